//! A dynamic point-set sparsifier built on repeated uniform sampling.
//!
//! The structure keeps nested subsets U_1 ⊇ ... ⊇ U_l. Layer i < l owns
//! the points of U_i \ U_{i+1}, partitioned into clusters around sampled
//! centers; the bottom layer U_l holds everything else as singletons. The
//! maintained output U is the union of all cluster centers and the bottom
//! layer: a small subset whose k-center cost stays within a constant
//! factor of the optimum over the full set, with high probability.
//!
//! Updates are lazy (an insert lands in the bottom layer, a deleted
//! center is replaced by a member of its cluster), and per-layer staleness
//! counters periodically trigger a rebuild of a suffix of the layers by
//! re-running the sampling pass, boosted over several independent trials.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::metric::{FastMap, FastSet, MetricView, PointId};

#[derive(Clone, Copy, Debug)]
pub struct SparsifierConfig {
    pub k: usize,
    /// Upper bound on the live size of the run; sizes the boost count.
    pub n_max: usize,
    /// Boost multiplier: each rebuild layer runs max(1, ceil(boost_c *
    /// log2(n_max))) independent sampling trials and keeps the best.
    pub boost_c: f64,
    pub seed: u64,
}

impl SparsifierConfig {
    pub fn new(k: usize, n_max: usize, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        if n_max == 0 {
            return Err(Error::Config("n_max must be >= 1".into()));
        }
        Ok(Self { k, n_max, boost_c: 2.0, seed })
    }

    pub fn with_boost_c(mut self, c: f64) -> Self {
        self.boost_c = c;
        self
    }

    pub fn boost_m(&self) -> usize {
        let m = (self.boost_c * (self.n_max.max(2) as f64).log2()).ceil() as usize;
        m.max(1)
    }

    /// Layer rebuilds stop once at most this many points remain.
    pub fn stop_threshold(&self) -> usize {
        16 * self.k
    }
}

/// Result of one sampling pass over a working set W: min(2k, |W|) centers
/// drawn uniformly without replacement, the floor(|W|/4) points closest
/// to them (ties by id), and the assignment of those points to their
/// nearest center (ties by center id).
#[derive(Clone, Debug)]
pub struct AlmostCover {
    /// Sampled centers, ascending by id.
    pub centers: Vec<PointId>,
    /// The covered quarter, ascending by id.
    pub covered: Vec<PointId>,
    /// W minus the covered quarter, ascending by id.
    pub remainder: Vec<PointId>,
    /// Sampled center -> covered points assigned to it.
    pub clusters: BTreeMap<PointId, Vec<PointId>>,
    /// Largest distance from a covered point to the sampled set.
    pub radius: f64,
}

pub fn almost_cover<R: Rng>(
    store: &MetricView,
    w: &[PointId],
    k: usize,
    rng: &mut R,
) -> Result<AlmostCover> {
    if w.is_empty() {
        return Err(Error::InvalidArgument("almost_cover over empty set".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let mut sorted: Vec<PointId> = w.to_vec();
    sorted.sort_unstable();
    let m = (2 * k).min(sorted.len());
    let mut centers: Vec<PointId> =
        index::sample(rng, sorted.len(), m).iter().map(|i| sorted[i]).collect();
    centers.sort_unstable();

    let center_recs: Vec<_> =
        centers.iter().map(|&c| store.record_any(c).expect("live center")).collect();
    let mut scored: Vec<(PointId, PointId, f64)> = sorted
        .iter()
        .map(|&x| {
            let rx = store.record_any(x).expect("live point");
            let mut best_d = f64::INFINITY;
            let mut best_c = centers[0];
            for (&c, rc) in centers.iter().zip(&center_recs) {
                let d = store.dist_rr(rx, rc);
                if d < best_d || (d == best_d && c < best_c) {
                    best_d = d;
                    best_c = c;
                }
            }
            (x, best_c, best_d)
        })
        .collect();
    // Only the quarter boundary matters; a selection puts the covered
    // set (same tie rule as a full sort) in front in linear time.
    let quarter = sorted.len() / 4;
    if quarter > 0 {
        scored.select_nth_unstable_by(quarter - 1, |a, b| {
            a.2.total_cmp(&b.2).then(a.0.cmp(&b.0))
        });
    }

    let take = quarter;
    let radius = if take == 0 { 0.0 } else { scored[take - 1].2 };
    let mut clusters: BTreeMap<PointId, Vec<PointId>> =
        centers.iter().map(|&c| (c, Vec::new())).collect();
    let mut covered: Vec<PointId> = Vec::with_capacity(take);
    for &(x, c, _) in &scored[..take] {
        covered.push(x);
        clusters.get_mut(&c).unwrap().push(x);
    }
    covered.sort_unstable();
    let mut remainder: Vec<PointId> = scored[take..].iter().map(|&(x, _, _)| x).collect();
    remainder.sort_unstable();
    Ok(AlmostCover { centers, covered, remainder, clusters, radius })
}

struct Cluster {
    center: PointId,
    /// Live members, the center included.
    members: BTreeSet<PointId>,
}

/// Fired when a staleness counter crossed its threshold.
#[derive(Clone, Copy, Debug)]
pub struct ReconstructReport {
    /// 1-based layer the rebuild started from.
    pub rebuilt_from: usize,
    /// Layer count after the rebuild.
    pub ell: usize,
}

/// Net change of the maintained output caused by one update.
#[derive(Clone, Debug, Default)]
pub struct SparsifierStep {
    pub added: Vec<PointId>,
    pub removed: Vec<PointId>,
    pub reconstruct: Option<ReconstructReport>,
}

impl SparsifierStep {
    pub fn recourse(&self) -> usize {
        self.added.len() + self.removed.len()
    }
}

pub struct Sparsifier {
    cfg: SparsifierConfig,
    boost_m: usize,
    /// Deepest layer each live point belongs to; layer l means "bottom".
    level_of: FastMap<PointId, usize>,
    /// The points owned by each layer: index i-1 holds U_i \ U_{i+1},
    /// the last entry holds the bottom layer.
    level_members: Vec<FastSet<PointId>>,
    /// Clusters of layer i at index i-1; the bottom layer has no entry.
    cluster_layers: Vec<Vec<Cluster>>,
    /// point -> (layer, cluster index) for clustered points.
    member_cluster: FastMap<PointId, (usize, usize)>,
    /// |U_1|, ..., |U_l|.
    layer_sizes: Vec<usize>,
    /// Updates seen since each layer was last rebuilt.
    counts: Vec<usize>,
    output: BTreeSet<PointId>,
    rng: ChaCha8Rng,
}

impl Sparsifier {
    pub fn new(cfg: SparsifierConfig) -> Self {
        Self {
            cfg,
            boost_m: cfg.boost_m(),
            level_of: FastMap::default(),
            level_members: vec![FastSet::default()],
            cluster_layers: Vec::new(),
            member_cluster: FastMap::default(),
            layer_sizes: vec![0],
            counts: vec![0],
            output: BTreeSet::new(),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        }
    }

    pub fn config(&self) -> &SparsifierConfig {
        &self.cfg
    }

    pub fn ell(&self) -> usize {
        self.layer_sizes.len()
    }

    /// |U_i| for 1 <= i <= ell.
    pub fn layer_size(&self, i: usize) -> usize {
        self.layer_sizes[i - 1]
    }

    pub fn count(&self, i: usize) -> usize {
        self.counts[i - 1]
    }

    pub fn len(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn is_empty(&self) -> bool {
        self.layer_sizes[0] == 0
    }

    pub fn output_len(&self) -> usize {
        self.output.len()
    }

    pub fn in_output(&self, id: PointId) -> bool {
        self.output.contains(&id)
    }

    /// The maintained subset, ascending by id.
    pub fn output(&self) -> Vec<PointId> {
        self.output.iter().copied().collect()
    }

    /// Representative centers of layer i's nonempty clusters.
    pub fn layer_centers(&self, i: usize) -> Vec<PointId> {
        let mut v: Vec<PointId> = self.cluster_layers[i - 1]
            .iter()
            .filter(|c| !c.members.is_empty())
            .map(|c| c.center)
            .collect();
        v.sort_unstable();
        v
    }

    /// Deepest layer of a live point.
    pub fn level_of(&self, id: PointId) -> Option<usize> {
        self.level_of.get(&id).copied()
    }

    /// Snapshot of the RNG, for replaying rebuild draws externally.
    pub fn clone_rng(&self) -> ChaCha8Rng {
        self.rng.clone()
    }

    /// Nonempty clusters of layer i as (center, members) pairs.
    pub fn layer_clusters(&self, i: usize) -> Vec<(PointId, Vec<PointId>)> {
        let mut v: Vec<(PointId, Vec<PointId>)> = self.cluster_layers[i - 1]
            .iter()
            .filter(|c| !c.members.is_empty())
            .map(|c| (c.center, c.members.iter().copied().collect()))
            .collect();
        v.sort_unstable_by_key(|&(c, _)| c);
        v
    }

    /// Bottom-layer points, ascending by id.
    pub fn bottom(&self) -> Vec<PointId> {
        let mut v: Vec<PointId> =
            self.level_members.last().unwrap().iter().copied().collect();
        v.sort_unstable();
        v
    }

    pub fn insert(&mut self, store: &MetricView, id: PointId) -> Result<SparsifierStep> {
        if self.level_of.contains_key(&id) {
            return Err(Error::InvalidState(format!("{id} already tracked")));
        }
        if store.record_any(id).is_none() {
            return Err(Error::NotFound(id));
        }
        let ell = self.ell();
        self.level_of.insert(id, ell);
        self.level_members.last_mut().unwrap().insert(id);
        for s in &mut self.layer_sizes {
            *s += 1;
        }
        let mut net: BTreeMap<PointId, i32> = BTreeMap::new();
        *net.entry(id).or_insert(0) += 1;
        self.output.insert(id);
        let reconstruct = self.bump_and_scan(store, &mut net);
        Ok(Self::finish(net, reconstruct))
    }

    pub fn delete(&mut self, store: &MetricView, id: PointId) -> Result<SparsifierStep> {
        let lv = self.level_of.remove(&id).ok_or(Error::NotFound(id))?;
        self.level_members[lv - 1].remove(&id);
        for s in self.layer_sizes[..lv].iter_mut() {
            *s -= 1;
        }
        let mut net: BTreeMap<PointId, i32> = BTreeMap::new();
        if let Some((layer, idx)) = self.member_cluster.remove(&id) {
            let cluster = &mut self.cluster_layers[layer - 1][idx];
            cluster.members.remove(&id);
            if cluster.center == id {
                self.output.remove(&id);
                *net.entry(id).or_insert(0) -= 1;
                if let Some(&p) = cluster.members.first() {
                    cluster.center = p;
                    self.output.insert(p);
                    *net.entry(p).or_insert(0) += 1;
                }
            }
        } else {
            // Bottom-layer point.
            self.output.remove(&id);
            *net.entry(id).or_insert(0) -= 1;
        }
        let reconstruct = self.bump_and_scan(store, &mut net);
        Ok(Self::finish(net, reconstruct))
    }

    fn finish(net: BTreeMap<PointId, i32>, reconstruct: Option<ReconstructReport>) -> SparsifierStep {
        let mut step = SparsifierStep { reconstruct, ..Default::default() };
        for (id, s) in net {
            match s.cmp(&0) {
                std::cmp::Ordering::Greater => step.added.push(id),
                std::cmp::Ordering::Less => step.removed.push(id),
                std::cmp::Ordering::Equal => {}
            }
        }
        step
    }

    /// Advances every staleness counter, then rebuilds from the smallest
    /// layer whose counter reached a quarter of its current size.
    fn bump_and_scan(
        &mut self,
        store: &MetricView,
        net: &mut BTreeMap<PointId, i32>,
    ) -> Option<ReconstructReport> {
        for c in &mut self.counts {
            *c += 1;
        }
        let trigger = (0..self.counts.len())
            .find(|&i| 4 * self.counts[i] >= self.layer_sizes[i]);
        trigger.map(|i| self.reconstruct_from(store, i + 1, net))
    }

    fn reconstruct_from(
        &mut self,
        store: &MetricView,
        from: usize,
        net: &mut BTreeMap<PointId, i32>,
    ) -> ReconstructReport {
        let old_output = self.output.clone();
        let stop = self.cfg.stop_threshold();

        // Tear down layers >= from.
        let mut cur: Vec<PointId> = self
            .level_members
            .drain(from - 1..)
            .flat_map(|s| s.into_iter())
            .collect();
        cur.sort_unstable();
        for layer in self.cluster_layers.drain(from.min(self.cluster_layers.len() + 1) - 1..) {
            for cl in layer {
                for m in cl.members {
                    self.member_cluster.remove(&m);
                }
            }
        }
        self.layer_sizes.truncate(from - 1);
        self.counts.truncate(from - 1);

        let mut level = from;
        while cur.len() > stop {
            self.layer_sizes.push(cur.len());
            self.counts.push(0);
            let mut owned: FastSet<PointId> = FastSet::default();
            let mut best: Option<AlmostCover> = None;
            for _ in 0..self.boost_m {
                let ac = almost_cover(store, &cur, self.cfg.k, &mut self.rng)
                    .expect("nonempty working set");
                if best.as_ref().map_or(true, |b| ac.radius < b.radius) {
                    best = Some(ac);
                }
            }
            let ac = best.unwrap();
            let mut clusters = Vec::new();
            for (center, members) in &ac.clusters {
                if members.is_empty() {
                    continue;
                }
                // The sampled center covers itself except in heavy
                // distance-zero ties; fall back to the smallest member so
                // the retained representative always sits in its cluster.
                let rep = if members.contains(center) {
                    *center
                } else {
                    *members.iter().min().unwrap()
                };
                let idx = clusters.len();
                for &m in members {
                    self.level_of.insert(m, level);
                    self.member_cluster.insert(m, (level, idx));
                    owned.insert(m);
                }
                clusters.push(Cluster { center: rep, members: members.iter().copied().collect() });
            }
            self.cluster_layers.push(clusters);
            self.level_members.push(owned);
            cur = ac.remainder;
            level += 1;
        }
        self.layer_sizes.push(cur.len());
        self.counts.push(0);
        let mut bottom_set: FastSet<PointId> = FastSet::default();
        for &id in &cur {
            self.level_of.insert(id, level);
            bottom_set.insert(id);
        }
        self.level_members.push(bottom_set);

        let mut new_output: BTreeSet<PointId> = cur.into_iter().collect();
        for layer in &self.cluster_layers {
            for cl in layer {
                if !cl.members.is_empty() {
                    new_output.insert(cl.center);
                }
            }
        }
        for &gone in old_output.difference(&new_output) {
            *net.entry(gone).or_insert(0) -= 1;
        }
        for &fresh in new_output.difference(&old_output) {
            *net.entry(fresh).or_insert(0) += 1;
        }
        self.output = new_output;
        ReconstructReport { rebuilt_from: from, ell: self.ell() }
    }
}
