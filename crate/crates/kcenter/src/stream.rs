//! Update-stream generation and the line-delimited stream file format.
//!
//! Generators snap coordinates to a fixed grid inside a fixed box, so the
//! declared distance bounds hold for every stream by construction, and
//! they draw from their own RNG stream: the update sequence never depends
//! on the algorithm's coins.
//!
//! File format, one event per line:
//!
//! ```text
//! # kcenter stream v1
//! # dmin=0.009 dmax=142.0 dim=2
//! I 0 12.5 88.25
//! D 0
//! ```
//!
//! Explicit-matrix streams start with `M <n>` followed by n rows of
//! whitespace-separated distances; insert events then reference row ids.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::metric::{MatrixMetric, MetricBounds, PointId, Position, UpdateEvent};

/// Side length of the generation box.
pub const BOX_SIDE: f64 = 100.0;
/// Coordinate grid; nonzero distances are at least this large.
pub const GRID: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GeneratorKind {
    UniformBox,
    GaussianBlobs { clusters: usize },
    SlidingWindow { window: usize },
    AdversarialDuplicates,
}

impl GeneratorKind {
    /// Parses specs like `uniform-box`, `gaussian-blobs:5`,
    /// `sliding-window:100`, `adversarial-duplicates`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, arg) = match spec.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (spec, None),
        };
        let num = |what: &str| -> Result<usize> {
            arg.ok_or_else(|| Error::Config(format!("{name} needs :{what}")))?
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad {what} in generator spec {spec}")))
        };
        match name {
            "uniform-box" => Ok(GeneratorKind::UniformBox),
            "gaussian-blobs" => Ok(GeneratorKind::GaussianBlobs { clusters: num("clusters")? }),
            "sliding-window" => Ok(GeneratorKind::SlidingWindow { window: num("window")? }),
            "adversarial-duplicates" => Ok(GeneratorKind::AdversarialDuplicates),
            _ => Err(Error::Config(format!("unknown generator {name}"))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct StreamSpec {
    pub generator: GeneratorKind,
    /// Live-size cap.
    pub n_max: usize,
    /// Total update count (inserts plus deletes).
    pub total_updates: usize,
    pub dim: usize,
    /// Steady-state deletion probability once the cap was reached at
    /// least once; ignored by the sliding-window generator.
    pub delete_frac: f64,
    pub seed: u64,
}

impl StreamSpec {
    pub fn new(generator: GeneratorKind, n_max: usize, total_updates: usize, seed: u64) -> Self {
        Self { generator, n_max, total_updates, dim: 2, delete_frac: 0.5, seed }
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }

    pub fn with_delete_frac(mut self, f: f64) -> Self {
        self.delete_frac = f;
        self
    }

    /// Declared bounds every generated stream respects.
    pub fn bounds(&self) -> MetricBounds {
        let d_max = BOX_SIDE * (self.dim as f64).sqrt() * 1.001;
        MetricBounds::new(GRID * 0.9, d_max).expect("static bounds")
    }

    pub fn events(&self) -> Result<Vec<UpdateEvent>> {
        if self.n_max == 0 || self.dim == 0 {
            return Err(Error::Config("n_max and dim must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.delete_frac) {
            return Err(Error::Config("delete_frac must be in [0,1]".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut events = Vec::with_capacity(self.total_updates);
        let mut live: Vec<PointId> = Vec::new();
        let mut next = 0u64;
        let mut reached_cap = false;

        match self.generator {
            GeneratorKind::SlidingWindow { window } => {
                if window == 0 {
                    return Err(Error::Config("window must be >= 1".into()));
                }
                let mut oldest = 0usize;
                while events.len() < self.total_updates {
                    if live.len() - oldest >= window {
                        events.push(UpdateEvent::delete(live[oldest]));
                        oldest += 1;
                    } else {
                        let id = PointId(next);
                        next += 1;
                        live.push(id);
                        events.push(UpdateEvent::insert(id, self.draw_position(&mut rng, None)));
                    }
                }
            }
            _ => {
                let blob_centers: Vec<Vec<f64>> = match self.generator {
                    GeneratorKind::GaussianBlobs { clusters } => (0..clusters.max(1))
                        .map(|_| {
                            (0..self.dim)
                                .map(|_| rng.random_range(0.1 * BOX_SIDE..0.9 * BOX_SIDE))
                                .collect()
                        })
                        .collect(),
                    _ => Vec::new(),
                };
                let pool: Vec<Vec<f64>> = match self.generator {
                    GeneratorKind::AdversarialDuplicates => {
                        let p = (self.n_max / 8).max(4);
                        (0..p)
                            .map(|_| {
                                (0..self.dim)
                                    .map(|_| snap(rng.random_range(0.0..BOX_SIDE)))
                                    .collect()
                            })
                            .collect()
                    }
                    _ => Vec::new(),
                };
                while events.len() < self.total_updates {
                    if live.len() == self.n_max {
                        reached_cap = true;
                    }
                    let delete = if live.is_empty() {
                        false
                    } else if live.len() >= self.n_max {
                        true
                    } else if reached_cap {
                        rng.random_bool(self.delete_frac)
                    } else {
                        false
                    };
                    if delete {
                        let idx = rng.random_range(0..live.len());
                        let id = live.swap_remove(idx);
                        events.push(UpdateEvent::delete(id));
                    } else {
                        let id = PointId(next);
                        next += 1;
                        live.push(id);
                        let pos = match self.generator {
                            GeneratorKind::GaussianBlobs { .. } => {
                                let c = &blob_centers[rng.random_range(0..blob_centers.len())];
                                self.draw_position(&mut rng, Some(c))
                            }
                            GeneratorKind::AdversarialDuplicates => {
                                Position::Coords(pool[rng.random_range(0..pool.len())].clone())
                            }
                            _ => self.draw_position(&mut rng, None),
                        };
                        events.push(UpdateEvent::insert(id, pos));
                    }
                }
            }
        }
        Ok(events)
    }

    fn draw_position(&self, rng: &mut ChaCha8Rng, center: Option<&[f64]>) -> Position {
        let coords: Vec<f64> = match center {
            None => (0..self.dim).map(|_| snap(rng.random_range(0.0..BOX_SIDE))).collect(),
            Some(c) => {
                let normal = Normal::new(0.0, 2.0).unwrap();
                c.iter()
                    .map(|&ci| snap((ci + normal.sample(rng)).clamp(0.0, BOX_SIDE)))
                    .collect()
            }
        };
        Position::Coords(coords)
    }
}

fn snap(v: f64) -> f64 {
    (v / GRID).round() * GRID
}

/// Parsed contents of a stream file.
#[derive(Clone, Debug)]
pub struct StreamFile {
    pub bounds: Option<MetricBounds>,
    pub dim: Option<usize>,
    pub matrix: Option<MatrixMetric>,
    pub events: Vec<UpdateEvent>,
}

pub fn write_stream(
    path: &Path,
    bounds: MetricBounds,
    dim: usize,
    events: &[UpdateEvent],
) -> Result<()> {
    let mut out = String::new();
    out.push_str("# kcenter stream v1\n");
    writeln!(out, "# dmin={} dmax={} dim={}", bounds.d_min, bounds.d_max, dim).unwrap();
    for ev in events {
        match (&ev.kind, &ev.position) {
            (crate::metric::EventKind::Insert, Some(Position::Coords(c))) => {
                out.push('I');
                write!(out, " {}", ev.id).unwrap();
                for v in c {
                    write!(out, " {v}").unwrap();
                }
                out.push('\n');
            }
            (crate::metric::EventKind::Insert, Some(Position::Row(r))) => {
                writeln!(out, "I {r}").unwrap();
            }
            (crate::metric::EventKind::Delete, _) => {
                writeln!(out, "D {}", ev.id).unwrap();
            }
            _ => return Err(Error::InvalidState("insert event without position".into())),
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_stream(path: &Path) -> Result<StreamFile> {
    let text = fs::read_to_string(path)?;
    let mut bounds_min = None;
    let mut bounds_max = None;
    let mut dim = None;
    let mut matrix_rows: Option<Vec<Vec<f64>>> = None;
    let mut pending_rows = 0usize;
    let mut events = Vec::new();
    let is_matrix = |m: &Option<Vec<Vec<f64>>>| m.is_some();

    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| Error::Parse(format!("line {}: {msg}", ln + 1));
        if let Some(comment) = line.strip_prefix('#') {
            for token in comment.split_whitespace() {
                if let Some(v) = token.strip_prefix("dmin=") {
                    bounds_min = Some(v.parse::<f64>().map_err(|_| err("bad dmin"))?);
                } else if let Some(v) = token.strip_prefix("dmax=") {
                    bounds_max = Some(v.parse::<f64>().map_err(|_| err("bad dmax"))?);
                } else if let Some(v) = token.strip_prefix("dim=") {
                    dim = Some(v.parse::<usize>().map_err(|_| err("bad dim"))?);
                }
            }
            continue;
        }
        if pending_rows > 0 {
            let row: std::result::Result<Vec<f64>, _> =
                line.split_whitespace().map(str::parse::<f64>).collect();
            let row = row.map_err(|_| err("bad matrix row"))?;
            matrix_rows.as_mut().unwrap().push(row);
            pending_rows -= 1;
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("M") => {
                let n: usize = parts
                    .next()
                    .ok_or_else(|| err("M needs a size"))?
                    .parse()
                    .map_err(|_| err("bad matrix size"))?;
                matrix_rows = Some(Vec::with_capacity(n));
                pending_rows = n;
            }
            Some("I") => {
                let id: u64 = parts
                    .next()
                    .ok_or_else(|| err("I needs an id"))?
                    .parse()
                    .map_err(|_| err("bad id"))?;
                let coords: std::result::Result<Vec<f64>, _> =
                    parts.map(str::parse::<f64>).collect();
                let coords = coords.map_err(|_| err("bad coordinate"))?;
                let pos = if is_matrix(&matrix_rows) {
                    if !coords.is_empty() {
                        return Err(err("matrix-mode insert takes no coordinates"));
                    }
                    Position::Row(id as usize)
                } else {
                    if coords.is_empty() {
                        return Err(err("insert needs coordinates"));
                    }
                    Position::Coords(coords)
                };
                events.push(UpdateEvent::insert(PointId(id), pos));
            }
            Some("D") => {
                let id: u64 = parts
                    .next()
                    .ok_or_else(|| err("D needs an id"))?
                    .parse()
                    .map_err(|_| err("bad id"))?;
                events.push(UpdateEvent::delete(PointId(id)));
            }
            _ => return Err(err("expected I, D, M or a comment")),
        }
    }
    if pending_rows > 0 {
        return Err(Error::Parse("matrix rows truncated".into()));
    }
    let bounds = match (bounds_min, bounds_max) {
        (Some(lo), Some(hi)) => Some(MetricBounds::new(lo, hi)?),
        _ => None,
    };
    let matrix = matrix_rows.map(MatrixMetric::new).transpose()?;
    Ok(StreamFile { bounds, dim, matrix, events })
}

/// Distance matrix of well-separated blobs, each made of a tight "core"
/// at mutual distance `core_d` plus a "shell" at distance `shell_d` from
/// everything else in the blob. Blob diameter is exactly `shell_d` (or
/// `core_d` when there is no shell) and the smallest diameter bound under
/// which a half cover by `blobs` subsets exists is `core_d` whenever the
/// cores alone hold half the points.
pub fn blob_shell_matrix(
    blobs: usize,
    core: usize,
    shell: usize,
    core_d: f64,
    shell_d: f64,
    separation: f64,
) -> Vec<Vec<f64>> {
    let per = core + shell;
    let n = blobs * per;
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (bi, bj) = (i / per, j / per);
            rows[i][j] = if bi != bj {
                separation
            } else if i % per < core && j % per < core {
                core_d
            } else {
                shell_d
            };
        }
    }
    rows
}

/// Distance matrix realizing an arbitrary graph as a threshold graph:
/// edges sit at distance 1, non-edges at distance 2, so the 1-threshold
/// graph is exactly the sampled Erdős–Rényi graph.
pub fn uniform_graph_matrix(n: usize, edge_prob: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = vec![vec![2.0; n]; n];
    for i in 0..n {
        rows[i][i] = 0.0;
        for j in (i + 1)..n {
            if rng.random_bool(edge_prob) {
                rows[i][j] = 1.0;
                rows[j][i] = 1.0;
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{DistanceMode, EventKind, MetricView};

    #[test]
    fn uniform_stream_respects_cap_and_bounds() {
        let spec = StreamSpec::new(GeneratorKind::UniformBox, 50, 400, 7);
        let events = spec.events().unwrap();
        assert_eq!(events.len(), 400);
        let bounds = spec.bounds();
        let mut store = MetricView::euclidean(bounds, 1);
        store.validate_bounds = true;
        let mut live = 0usize;
        for ev in &events {
            store.apply(ev).unwrap();
            match ev.kind {
                EventKind::Insert => live += 1,
                EventKind::Delete => live -= 1,
            }
            assert!(live <= 50);
        }
        // Mixed phase actually happened.
        assert!(events.iter().any(|e| e.kind == EventKind::Delete));
    }

    #[test]
    fn sliding_window_pairs_inserts_with_oldest_deletes() {
        let spec = StreamSpec::new(GeneratorKind::SlidingWindow { window: 10 }, 20, 100, 7);
        let events = spec.events().unwrap();
        let mut live: Vec<PointId> = Vec::new();
        for ev in &events {
            match ev.kind {
                EventKind::Insert => live.push(ev.id),
                EventKind::Delete => {
                    assert_eq!(ev.id, live.remove(0), "must evict the oldest");
                }
            }
            assert!(live.len() <= 10);
        }
    }

    #[test]
    fn duplicates_generator_repeats_locations() {
        let spec = StreamSpec::new(GeneratorKind::AdversarialDuplicates, 40, 200, 7);
        let events = spec.events().unwrap();
        let mut seen = std::collections::HashMap::new();
        let mut dupes = 0;
        for ev in &events {
            if let Some(Position::Coords(c)) = &ev.position {
                let key = format!("{c:?}");
                if *seen.entry(key).or_insert(0) > 0 {
                    dupes += 1;
                }
                *seen.get_mut(&format!("{c:?}")).unwrap() += 1;
            }
        }
        assert!(dupes > 0, "duplicates generator produced no coincident points");
    }

    #[test]
    fn stream_file_roundtrip() {
        let spec = StreamSpec::new(GeneratorKind::GaussianBlobs { clusters: 3 }, 30, 120, 5);
        let events = spec.events().unwrap();
        let dir = std::env::temp_dir().join("kcenter-stream-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("s.txt");
        write_stream(&path, spec.bounds(), spec.dim, &events).unwrap();
        let parsed = read_stream(&path).unwrap();
        assert_eq!(parsed.events.len(), events.len());
        assert_eq!(parsed.dim, Some(2));
        let b = parsed.bounds.unwrap();
        assert_eq!(b.d_min, spec.bounds().d_min);
        assert_eq!(b.d_max, spec.bounds().d_max);
        for (a, b) in events.iter().zip(&parsed.events) {
            assert_eq!(a.kind, b.kind);
            assert_eq!(a.id, b.id);
            assert_eq!(a.position, b.position);
        }
    }

    #[test]
    fn matrix_stream_parses() {
        let dir = std::env::temp_dir().join("kcenter-stream-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.txt");
        std::fs::write(
            &path,
            "# dmin=1 dmax=2\nM 3\n0 1 2\n1 0 1.5\n2 1.5 0\nI 0\nI 2\nD 0\n",
        )
        .unwrap();
        let parsed = read_stream(&path).unwrap();
        let m = parsed.matrix.unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.get(1, 2), 1.5);
        assert_eq!(parsed.events.len(), 3);
        assert_eq!(parsed.events[0].position, Some(Position::Row(0)));

        let mut store = MetricView::new(
            DistanceMode::Matrix(m),
            MetricBounds::new(1.0, 2.0).unwrap(),
            3,
        );
        for ev in &parsed.events {
            store.apply(ev).unwrap();
        }
        assert_eq!(store.len(), 1);
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let spec = StreamSpec::new(GeneratorKind::UniformBox, 30, 200, 99);
        let a = spec.events().unwrap();
        let b = spec.events().unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.id, y.id);
            assert_eq!(x.kind, y.kind);
            assert_eq!(x.position, y.position);
        }
        let other = StreamSpec::new(GeneratorKind::UniformBox, 30, 200, 100);
        let c = other.events().unwrap();
        assert!(a.iter().zip(&c).any(|(x, y)| x.position != y.position));
    }

    #[test]
    fn blob_shell_matrix_is_a_metric() {
        let rows = blob_shell_matrix(4, 2, 1, 0.5, 1.0, 100.0);
        assert_eq!(rows.len(), 12);
        assert!(crate::metric::check_matrix(&rows).is_ok());
    }
}
