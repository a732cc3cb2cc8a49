//! The dynamic metric space shared by every component.
//!
//! Points carry an arrival sequence number (used for the lexicographic
//! output order) and a sampling priority drawn once at insertion (used by
//! the dynamic MIS). Distances are evaluated on demand, either as a
//! Minkowski norm over coordinates or from an explicit matrix that is
//! validated once at load time.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::hash::{BuildHasherDefault, Hasher};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Identifier of a point; unique across the whole lifetime of a run and
/// never reused after deletion.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
pub struct PointId(pub u64);

/// Multiplicative hasher for id-keyed tables; these lookups sit inside
/// every distance scan.
#[derive(Default, Clone)]
pub struct IdHasher(u64);

impl Hasher for IdHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0.rotate_left(8) ^ b as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        }
    }

    fn write_u64(&mut self, v: u64) {
        self.0 = v.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    }

    fn write_usize(&mut self, v: usize) {
        self.write_u64(v as u64);
    }
}

pub type FastMap<K, V> = HashMap<K, V, BuildHasherDefault<IdHasher>>;
pub type FastSet<K> = HashSet<K, BuildHasherDefault<IdHasher>>;

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Where a point lives: coordinates for norm-based modes, or a row index
/// into an explicit distance matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum Position {
    Coords(Vec<f64>),
    Row(usize),
}

#[derive(Clone, Debug)]
pub struct PointRecord {
    pub id: PointId,
    pub position: Position,
    /// Strictly increasing with insertion order.
    pub seq: u64,
    /// Drawn once from the store RNG at insertion, in [0, 1). Never changes.
    pub priority: f64,
}

impl PointRecord {
    /// Total order used wherever ties between equal priorities must break
    /// deterministically: ascending (priority, id). Priorities are
    /// non-negative, so the IEEE bit pattern orders like the value.
    pub fn priority_key(&self) -> (u64, PointId) {
        (self.priority.to_bits(), self.id)
    }

    /// The lexicographic order of the output fill: ascending (seq, id).
    pub fn lex_key(&self) -> (u64, PointId) {
        (self.seq, self.id)
    }
}

/// Global distance bounds declared for the lifetime of a run. Every
/// nonzero pairwise distance among live points must stay inside them.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MetricBounds {
    pub d_min: f64,
    pub d_max: f64,
}

impl MetricBounds {
    pub fn new(d_min: f64, d_max: f64) -> Result<Self> {
        if !(d_min > 0.0 && d_min.is_finite() && d_max >= d_min && d_max.is_finite()) {
            return Err(Error::Config(format!(
                "need 0 < d_min <= d_max, got d_min={d_min} d_max={d_max}"
            )));
        }
        Ok(Self { d_min, d_max })
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.d_max / self.d_min
    }
}

/// An explicit distance matrix, checked once for symmetry, zero diagonal
/// and the triangle inequality (relative tolerance 1e-9).
#[derive(Clone, Debug)]
pub struct MatrixMetric {
    n: usize,
    d: Vec<f64>,
}

/// First failure found while validating an explicit matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum MetricDefect {
    NotSquare { rows: usize, cols: usize },
    NegativeEntry { i: usize, j: usize, value: f64 },
    NonzeroDiagonal { i: usize, value: f64 },
    Asymmetric { i: usize, j: usize },
    TriangleViolation { i: usize, j: usize, k: usize },
}

impl fmt::Display for MetricDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricDefect::NotSquare { rows, cols } => write!(f, "row {rows} has {cols} entries"),
            MetricDefect::NegativeEntry { i, j, value } => {
                write!(f, "d({i},{j}) = {value} is negative")
            }
            MetricDefect::NonzeroDiagonal { i, value } => write!(f, "d({i},{i}) = {value} != 0"),
            MetricDefect::Asymmetric { i, j } => write!(f, "d({i},{j}) != d({j},{i})"),
            MetricDefect::TriangleViolation { i, j, k } => {
                write!(f, "d({i},{k}) > d({i},{j}) + d({j},{k})")
            }
        }
    }
}

/// Scans a candidate matrix and reports the first defect, in a fixed
/// order: shape, sign, diagonal, symmetry, then triangle triples in
/// lexicographic (i, j, k) order.
pub fn check_matrix(rows: &[Vec<f64>]) -> std::result::Result<(), MetricDefect> {
    let n = rows.len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(MetricDefect::NotSquare { rows: i, cols: r.len() });
        }
    }
    for (i, r) in rows.iter().enumerate() {
        for (j, &v) in r.iter().enumerate() {
            if v < 0.0 || !v.is_finite() {
                return Err(MetricDefect::NegativeEntry { i, j, value: v });
            }
        }
    }
    for (i, r) in rows.iter().enumerate() {
        if r[i] != 0.0 {
            return Err(MetricDefect::NonzeroDiagonal { i, value: r[i] });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (rows[i][j] - rows[j][i]).abs() > 1e-9 * rows[i][j].abs().max(1.0) {
                return Err(MetricDefect::Asymmetric { i, j });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let lhs = rows[i][k];
                let rhs = rows[i][j] + rows[j][k];
                if lhs > rhs + 1e-9 * rhs.max(1.0) {
                    return Err(MetricDefect::TriangleViolation { i, j, k });
                }
            }
        }
    }
    Ok(())
}

impl MatrixMetric {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        check_matrix(&rows).map_err(|d| Error::MetricViolation(d.to_string()))?;
        let n = rows.len();
        let mut d = Vec::with_capacity(n * n);
        for r in &rows {
            d.extend_from_slice(r);
        }
        Ok(Self { n, d })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }
}

#[derive(Clone, Debug)]
pub enum DistanceMode {
    /// Minkowski p-norm over coordinates; p = 2 is the Euclidean default.
    Minkowski { p: f64 },
    Matrix(MatrixMetric),
}

impl DistanceMode {
    pub fn euclidean() -> Self {
        DistanceMode::Minkowski { p: 2.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EventKind {
    Insert,
    Delete,
}

/// One step of the input stream.
#[derive(Clone, Debug)]
pub struct UpdateEvent {
    pub kind: EventKind,
    pub id: PointId,
    /// Present iff kind == Insert.
    pub position: Option<Position>,
}

impl UpdateEvent {
    pub fn insert(id: PointId, position: Position) -> Self {
        Self { kind: EventKind::Insert, id, position: Some(position) }
    }

    pub fn delete(id: PointId) -> Self {
        Self { kind: EventKind::Delete, id, position: None }
    }
}

/// The current dynamic point set with its distance oracle.
///
/// Records of deleted points are retained (ids are never reused), which
/// lets downstream structures key their bookkeeping on stable sequence
/// numbers even while a deletion is being propagated.
pub struct MetricView {
    mode: DistanceMode,
    bounds: MetricBounds,
    records: FastMap<PointId, PointRecord>,
    live: BTreeSet<PointId>,
    next_seq: u64,
    priority_rng: ChaCha8Rng,
    /// When set, every insert scans the live set and rejects points whose
    /// nonzero distances fall outside the declared bounds. Costs O(n) per
    /// insert, so benchmark runs leave it off and rely on generators that
    /// respect the bounds by construction.
    pub validate_bounds: bool,
}

impl MetricView {
    pub fn new(mode: DistanceMode, bounds: MetricBounds, priority_seed: u64) -> Self {
        Self {
            mode,
            bounds,
            records: FastMap::default(),
            live: BTreeSet::new(),
            next_seq: 0,
            priority_rng: ChaCha8Rng::seed_from_u64(priority_seed),
            validate_bounds: false,
        }
    }

    pub fn euclidean(bounds: MetricBounds, priority_seed: u64) -> Self {
        Self::new(DistanceMode::euclidean(), bounds, priority_seed)
    }

    pub fn bounds(&self) -> MetricBounds {
        self.bounds
    }

    pub fn mode(&self) -> &DistanceMode {
        &self.mode
    }

    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }

    pub fn is_live(&self, id: PointId) -> bool {
        self.live.contains(&id)
    }

    /// Live ids in ascending order.
    pub fn live_ids(&self) -> impl Iterator<Item = PointId> + '_ {
        self.live.iter().copied()
    }

    pub fn record(&self, id: PointId) -> Result<&PointRecord> {
        if !self.live.contains(&id) {
            return Err(Error::NotFound(id));
        }
        Ok(&self.records[&id])
    }

    /// Record access that also works for deleted points.
    pub fn record_any(&self, id: PointId) -> Option<&PointRecord> {
        self.records.get(&id)
    }

    pub fn insert(&mut self, id: PointId, position: Position) -> Result<()> {
        if self.live.contains(&id) {
            return Err(Error::InvalidState(format!("insert of live id {id}")));
        }
        if self.records.contains_key(&id) {
            return Err(Error::InvalidState(format!(
                "id {id} was deleted earlier and may not be reused"
            )));
        }
        match (&self.mode, &position) {
            (DistanceMode::Minkowski { .. }, Position::Coords(c)) => {
                if c.is_empty() || c.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidArgument(format!("bad coordinates for {id}")));
                }
            }
            (DistanceMode::Matrix(m), Position::Row(r)) => {
                if *r >= m.len() {
                    return Err(Error::InvalidArgument(format!(
                        "row {r} out of range for {} x {} matrix",
                        m.len(),
                        m.len()
                    )));
                }
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "position kind does not match the configured distance mode".into(),
                ));
            }
        }
        if self.validate_bounds {
            let rec = PointRecord { id, position: position.clone(), seq: 0, priority: 0.0 };
            for &y in &self.live {
                let d = self.dist_records(&rec, &self.records[&y]);
                if d > 0.0 && (d < self.bounds.d_min * (1.0 - 1e-12) || d > self.bounds.d_max * (1.0 + 1e-12)) {
                    return Err(Error::BoundsViolation(format!(
                        "d({id},{y}) = {d} outside [{}, {}]",
                        self.bounds.d_min, self.bounds.d_max
                    )));
                }
            }
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        let priority: f64 = self.priority_rng.random();
        self.records.insert(id, PointRecord { id, position, seq, priority });
        self.live.insert(id);
        Ok(())
    }

    pub fn delete(&mut self, id: PointId) -> Result<()> {
        if !self.live.remove(&id) {
            return Err(Error::NotFound(id));
        }
        Ok(())
    }

    pub fn apply(&mut self, event: &UpdateEvent) -> Result<()> {
        match event.kind {
            EventKind::Insert => {
                let pos = event.position.clone().ok_or_else(|| {
                    Error::InvalidArgument(format!("insert event for {} without position", event.id))
                })?;
                self.insert(event.id, pos)
            }
            EventKind::Delete => self.delete(event.id),
        }
    }

    fn dist_records(&self, a: &PointRecord, b: &PointRecord) -> f64 {
        match (&self.mode, &a.position, &b.position) {
            (DistanceMode::Minkowski { p }, Position::Coords(x), Position::Coords(y)) => {
                debug_assert_eq!(x.len(), y.len(), "dimension mismatch");
                if (*p - 2.0).abs() < f64::EPSILON {
                    let mut s = 0.0;
                    for (xi, yi) in x.iter().zip(y) {
                        let d = xi - yi;
                        s += d * d;
                    }
                    s.sqrt()
                } else {
                    let mut s = 0.0;
                    for (xi, yi) in x.iter().zip(y) {
                        s += (xi - yi).abs().powf(*p);
                    }
                    s.powf(1.0 / *p)
                }
            }
            (DistanceMode::Matrix(m), Position::Row(i), Position::Row(j)) => m.get(*i, *j),
            _ => unreachable!("insert validated position kinds"),
        }
    }

    /// Distance between two live points.
    pub fn distance(&self, a: PointId, b: PointId) -> Result<f64> {
        let ra = self.record(a)?;
        let rb = self.record(b)?;
        if a == b {
            return Ok(0.0);
        }
        Ok(self.dist_records(ra, rb))
    }

    /// Distance without the liveness check; callers must know both ids.
    pub(crate) fn dist(&self, a: PointId, b: PointId) -> f64 {
        if a == b {
            return 0.0;
        }
        self.dist_records(&self.records[&a], &self.records[&b])
    }

    /// Distance with one endpoint already resolved; the hot path of the
    /// MIS neighbor scans.
    pub(crate) fn dist_via(&self, ra: &PointRecord, b: PointId) -> f64 {
        if ra.id == b {
            return 0.0;
        }
        self.dist_records(ra, &self.records[&b])
    }

    /// Distance between two resolved records.
    pub(crate) fn dist_rr(&self, ra: &PointRecord, rb: &PointRecord) -> f64 {
        if ra.id == rb.id {
            return 0.0;
        }
        self.dist_records(ra, rb)
    }

    /// max over `space` of the distance to the nearest center.
    pub fn cl<I>(&self, centers: &[PointId], space: I) -> Result<f64>
    where
        I: IntoIterator<Item = PointId>,
    {
        let mut worst = 0.0f64;
        let mut saw_any = false;
        for x in space {
            saw_any = true;
            if centers.is_empty() {
                return Err(Error::InvalidArgument(
                    "cl of empty center set over nonempty space".into(),
                ));
            }
            let rx = self.record_any(x).ok_or(Error::NotFound(x))?;
            let mut best = f64::INFINITY;
            for &c in centers {
                let rc = self.record_any(c).ok_or(Error::NotFound(c))?;
                let d = if c == x { 0.0 } else { self.dist_records(rx, rc) };
                if d < best {
                    best = d;
                }
            }
            if best > worst {
                worst = best;
            }
        }
        let _ = saw_any;
        Ok(worst)
    }

    /// Clustering cost of `centers` over the whole live set.
    pub fn cl_live(&self, centers: &[PointId]) -> Result<f64> {
        let live: Vec<PointId> = self.live_ids().collect();
        self.cl(centers, live)
    }

    /// All points of `space` within distance `r` of `x` (inclusive).
    pub fn ball<I>(&self, x: PointId, r: f64, space: I) -> Result<Vec<PointId>>
    where
        I: IntoIterator<Item = PointId>,
    {
        let rx = self.record(x)?;
        let mut out = Vec::new();
        for y in space {
            let ry = self.record_any(y).ok_or(Error::NotFound(y))?;
            let d = if x == y { 0.0 } else { self.dist_records(rx, ry) };
            if d <= r {
                out.push(y);
            }
        }
        out.sort_unstable();
        Ok(out)
    }
}
