//! Composition of a sparsifier (plain or buffered) with the nested
//! threshold algorithm: the sparsifier's output changes become the update
//! stream of the inner algorithm, whose space is then the small subset
//! rather than the full point set. In buffered mode the epoch resets are
//! forwarded with reporting suppressed, so a reset contributes a single
//! before/after diff to the reported recourse.

use std::collections::BTreeSet;
use std::time::Instant;

use crate::buffered::{BufferedConfig, BufferedSparsifier};
use crate::error::Result;
use crate::metric::{DistanceMode, EventKind, MetricBounds, MetricView, PointId, UpdateEvent};
use crate::nested::{LevelConfig, NestedKCenter, Solution};
use crate::sparsifier::{ReconstructReport, Sparsifier, SparsifierConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    Direct,
    Sparsified,
    Buffered { epsilon: f64 },
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Direct => "direct",
            Mode::Sparsified => "sparsified",
            Mode::Buffered { .. } => "buffered",
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub k: usize,
    pub bounds: MetricBounds,
    pub distance: DistanceMode,
    /// Expected maximum live size; sizes the sparsifier boost.
    pub n_max: usize,
    pub boost_c: f64,
    /// Algorithm seed; the store's priority stream and the sparsifier's
    /// sampling stream are derived from it independently.
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(mode: Mode, k: usize, bounds: MetricBounds, n_max: usize, seed: u64) -> Self {
        Self { mode, k, bounds, distance: DistanceMode::euclidean(), n_max, boost_c: 2.0, seed }
    }

    pub fn with_distance(mut self, d: DistanceMode) -> Self {
        self.distance = d;
        self
    }

    pub fn with_boost_c(mut self, c: f64) -> Self {
        self.boost_c = c;
        self
    }

    fn sparsifier_seed(&self) -> u64 {
        self.seed ^ 0x9e37_79b9_7f4a_7c15
    }
}

/// What one input update did to the reported solution.
#[derive(Clone, Debug)]
pub struct PipelineStepReport {
    pub reported_added: Vec<PointId>,
    pub reported_removed: Vec<PointId>,
    pub v_size: usize,
    /// Size of the inner algorithm's space (equals v_size in direct mode).
    pub u_size: usize,
    pub i_star: usize,
    /// Inner certificate: 2 lambda_{i*}, bounding the cost over the
    /// inner space.
    pub certificate: f64,
    /// Inner updates forwarded for this event, reported ones only.
    pub forwarded: usize,
    /// An epoch reset fired during this update (buffered mode).
    pub reset: bool,
    /// Additional inner updates replayed silently at an epoch reset.
    pub reset_forwarded: usize,
    pub reconstruct: Option<ReconstructReport>,
    pub sparsifier_nanos: u128,
    pub algorithm_nanos: u128,
}

impl PipelineStepReport {
    pub fn recourse(&self) -> usize {
        self.reported_added.len() + self.reported_removed.len()
    }
}

/// Cumulative snapshot, cheap to take between updates.
#[derive(Clone, Debug)]
pub struct PipelineReport {
    pub solution: Solution,
    /// Measured cl(S, V) at snapshot time; 0.0 for an empty space.
    pub cost: f64,
    pub v_size: usize,
    pub u_size: usize,
    pub total_updates: u64,
    pub reported_recourse: u64,
    pub forwarded_updates: u64,
    pub suppressed_updates: u64,
    pub sparsifier_nanos: u128,
    pub algorithm_nanos: u128,
}

pub struct Pipeline {
    cfg: PipelineConfig,
    store: MetricView,
    inner: NestedKCenter,
    sparsifier: Option<Sparsifier>,
    buffered: Option<BufferedSparsifier>,
    reported: BTreeSet<PointId>,
    total_updates: u64,
    reported_recourse: u64,
    forwarded_updates: u64,
    suppressed_updates: u64,
    sparsifier_nanos: u128,
    algorithm_nanos: u128,
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig) -> Result<Self> {
        let store = MetricView::new(cfg.distance.clone(), cfg.bounds, cfg.seed);
        let inner = NestedKCenter::new(LevelConfig::new(cfg.k, cfg.bounds)?);
        let (sparsifier, buffered) = match cfg.mode {
            Mode::Direct => (None, None),
            Mode::Sparsified => (
                Some(Sparsifier::new(
                    SparsifierConfig::new(cfg.k, cfg.n_max, cfg.sparsifier_seed())?
                        .with_boost_c(cfg.boost_c),
                )),
                None,
            ),
            Mode::Buffered { epsilon } => {
                let mut bcfg =
                    BufferedConfig::new(cfg.k, epsilon, cfg.n_max, cfg.sparsifier_seed())?;
                bcfg.boost_c = cfg.boost_c;
                (None, Some(BufferedSparsifier::new(bcfg)?))
            }
        };
        Ok(Self {
            cfg,
            store,
            inner,
            sparsifier,
            buffered,
            reported: BTreeSet::new(),
            total_updates: 0,
            reported_recourse: 0,
            forwarded_updates: 0,
            suppressed_updates: 0,
            sparsifier_nanos: 0,
            algorithm_nanos: 0,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn store(&self) -> &MetricView {
        &self.store
    }

    /// Turns on per-insert distance-bound validation in the store.
    pub fn validate_bounds(&mut self, on: bool) {
        self.store.validate_bounds = on;
    }

    /// The inner algorithm's current space, ascending.
    pub fn subspace(&self) -> Vec<PointId> {
        self.inner.live_ids().collect()
    }

    pub fn inner(&self) -> &NestedKCenter {
        &self.inner
    }

    pub fn sparsifier(&self) -> Option<&Sparsifier> {
        self.sparsifier.as_ref()
    }

    pub fn buffered(&self) -> Option<&BufferedSparsifier> {
        self.buffered.as_ref()
    }

    pub fn solution(&self) -> Solution {
        self.inner.solution()
    }

    pub fn apply(&mut self, event: &UpdateEvent) -> Result<PipelineStepReport> {
        self.store.apply(event)?;
        self.total_updates += 1;

        let forwarded;
        let mut did_reset = false;
        let mut reset_forwarded = 0usize;
        let mut reconstruct = None;
        let mut spars_nanos = 0u128;
        let algo_start;

        match self.cfg.mode {
            Mode::Direct => {
                algo_start = Instant::now();
                match event.kind {
                    EventKind::Insert => self.inner.insert(&self.store, event.id)?,
                    EventKind::Delete => self.inner.delete(&self.store, event.id)?,
                };
                forwarded = 1;
            }
            Mode::Sparsified => {
                let t = Instant::now();
                let step = match event.kind {
                    EventKind::Insert => {
                        self.sparsifier.as_mut().unwrap().insert(&self.store, event.id)?
                    }
                    EventKind::Delete => {
                        self.sparsifier.as_mut().unwrap().delete(&self.store, event.id)?
                    }
                };
                spars_nanos = t.elapsed().as_nanos();
                reconstruct = step.reconstruct;
                algo_start = Instant::now();
                for &gone in &step.removed {
                    self.inner.delete(&self.store, gone)?;
                }
                for &fresh in &step.added {
                    self.inner.insert(&self.store, fresh)?;
                }
                forwarded = step.removed.len() + step.added.len();
            }
            Mode::Buffered { .. } => {
                let t = Instant::now();
                let step = match event.kind {
                    EventKind::Insert => {
                        self.buffered.as_mut().unwrap().insert(&self.store, event.id)?
                    }
                    EventKind::Delete => {
                        self.buffered.as_mut().unwrap().delete(&self.store, event.id)?
                    }
                };
                let reset = if step.at_boundary {
                    Some(self.buffered.as_mut().unwrap().reset_epoch()?)
                } else {
                    None
                };
                spars_nanos = t.elapsed().as_nanos();
                algo_start = Instant::now();
                for &gone in &step.removed {
                    self.inner.delete(&self.store, gone)?;
                }
                for &fresh in &step.added {
                    self.inner.insert(&self.store, fresh)?;
                }
                forwarded = step.removed.len() + step.added.len();
                if let Some(reset) = reset {
                    did_reset = true;
                    for &gone in &reset.removed {
                        self.inner.delete(&self.store, gone)?;
                    }
                    for &fresh in &reset.added {
                        self.inner.insert(&self.store, fresh)?;
                    }
                    reset_forwarded = reset.internal_updates();
                }
            }
        }
        let algorithm_nanos = algo_start.elapsed().as_nanos();

        let new_solution = self.inner.solution();
        let reported_added: Vec<PointId> =
            new_solution.centers.difference(&self.reported).copied().collect();
        let reported_removed: Vec<PointId> =
            self.reported.difference(&new_solution.centers).copied().collect();
        self.reported = new_solution.centers;

        self.reported_recourse += (reported_added.len() + reported_removed.len()) as u64;
        self.forwarded_updates += forwarded as u64;
        self.suppressed_updates += reset_forwarded as u64;
        self.sparsifier_nanos += spars_nanos;
        self.algorithm_nanos += algorithm_nanos;

        Ok(PipelineStepReport {
            reported_added,
            reported_removed,
            v_size: self.store.len(),
            u_size: self.inner.len(),
            i_star: new_solution.level,
            certificate: new_solution.cost_upper,
            forwarded,
            reset: did_reset,
            reset_forwarded,
            reconstruct,
            sparsifier_nanos: spars_nanos,
            algorithm_nanos,
        })
    }

    /// Measured cost of the reported solution over the live set.
    pub fn measured_cost(&self) -> Result<f64> {
        if self.store.is_empty() {
            return Ok(0.0);
        }
        let centers: Vec<PointId> = self.reported.iter().copied().collect();
        self.store.cl(&centers, self.store.live_ids())
    }

    /// Measured cost of the inner space over the live set: cl(U, V).
    pub fn subspace_cost(&self) -> Result<f64> {
        if self.store.is_empty() {
            return Ok(0.0);
        }
        let u = self.subspace();
        self.store.cl(&u, self.store.live_ids())
    }

    pub fn report(&self) -> Result<PipelineReport> {
        Ok(PipelineReport {
            solution: self.inner.solution(),
            cost: self.measured_cost()?,
            v_size: self.store.len(),
            u_size: self.inner.len(),
            total_updates: self.total_updates,
            reported_recourse: self.reported_recourse,
            forwarded_updates: self.forwarded_updates,
            suppressed_updates: self.suppressed_updates,
            sparsifier_nanos: self.sparsifier_nanos,
            algorithm_nanos: self.algorithm_nanos,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Position;
    use crate::oracles::{opt_k_exact, OracleBudget};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn snap(v: f64) -> f64 {
        (v / 0.25).round() * 0.25
    }

    fn bounds() -> MetricBounds {
        MetricBounds::new(0.25, 300.0).unwrap()
    }

    fn random_events(
        rng: &mut ChaCha8Rng,
        t: usize,
        cap: usize,
        next: &mut u64,
        live: &mut Vec<PointId>,
    ) -> Vec<UpdateEvent> {
        let mut out = Vec::with_capacity(t);
        for _ in 0..t {
            let del = !live.is_empty() && (live.len() >= cap || rng.random_bool(0.35));
            if del {
                let v = live.swap_remove(rng.random_range(0..live.len()));
                out.push(UpdateEvent::delete(v));
            } else {
                let id = PointId(*next);
                *next += 1;
                let x = snap(rng.random_range(0.0..100.0));
                let y = snap(rng.random_range(0.0..100.0));
                live.push(id);
                out.push(UpdateEvent::insert(id, Position::Coords(vec![x, y])));
            }
        }
        out
    }

    #[test]
    fn report_starts_empty() {
        let cfg = PipelineConfig::new(Mode::Direct, 3, bounds(), 100, 1);
        let p = Pipeline::new(cfg).unwrap();
        let r = p.report().unwrap();
        assert!(r.solution.centers.is_empty());
        assert_eq!(r.total_updates, 0);
        assert_eq!(r.reported_recourse, 0);
        assert_eq!(r.cost, 0.0);
    }

    #[test]
    fn direct_mode_equals_bare_algorithm() {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        let mut next = 0;
        let mut live = Vec::new();
        let events = random_events(&mut rng, 250, 60, &mut next, &mut live);

        let seed = 9;
        let cfg = PipelineConfig::new(Mode::Direct, 4, bounds(), 100, seed);
        let mut p = Pipeline::new(cfg).unwrap();
        let mut store = MetricView::euclidean(bounds(), seed);
        let mut bare = NestedKCenter::new(LevelConfig::new(4, bounds()).unwrap());
        for ev in &events {
            p.apply(ev).unwrap();
            store.apply(ev).unwrap();
            match ev.kind {
                EventKind::Insert => bare.insert(&store, ev.id).unwrap(),
                EventKind::Delete => bare.delete(&store, ev.id).unwrap(),
            };
            assert_eq!(p.solution().centers, bare.solution().centers);
            assert_eq!(p.solution().level, bare.solution().level);
        }
    }

    #[test]
    fn sparsified_subset_chain_and_triangle_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(200);
        let mut next = 0;
        let mut live = Vec::new();
        let events = random_events(&mut rng, 400, 120, &mut next, &mut live);
        let cfg = PipelineConfig::new(Mode::Sparsified, 3, bounds(), 150, 77);
        let mut p = Pipeline::new(cfg).unwrap();
        for ev in &events {
            p.apply(ev).unwrap();
            // S subset of U subset of V.
            let s = p.solution().centers;
            let u: BTreeSet<PointId> = p.subspace().into_iter().collect();
            for c in &s {
                assert!(u.contains(c), "solution must live inside the subspace");
            }
            for x in &u {
                assert!(p.store().is_live(*x), "subspace must be live");
            }
            // cl(S,V) <= cl(U,V) + cl(S,U).
            if !s.is_empty() {
                let centers: Vec<PointId> = s.iter().copied().collect();
                let uvec: Vec<PointId> = u.iter().copied().collect();
                let cl_sv = p.store().cl(&centers, p.store().live_ids()).unwrap();
                let cl_uv = p.store().cl(&uvec, p.store().live_ids()).unwrap();
                let cl_su = p.store().cl(&centers, u.iter().copied()).unwrap();
                assert!(
                    cl_sv <= cl_uv + cl_su + 1e-9,
                    "triangle composition bound broken: {cl_sv} vs {cl_uv} + {cl_su}"
                );
                assert!(cl_su <= p.inner().cost_certificate() + 1e-9);
            }
        }
        let r = p.report().unwrap();
        assert!(r.forwarded_updates >= events.len() as u64 / 2);
    }

    #[test]
    fn sparsified_small_instances_stay_within_twenty() {
        let budget = OracleBudget::default();
        for trial in 0..30u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(3000 + trial);
            let mut next = 0;
            let mut live = Vec::new();
            let events = random_events(&mut rng, 40, 12, &mut next, &mut live);
            let cfg = PipelineConfig::new(Mode::Sparsified, 2, bounds(), 16, 40 + trial);
            let mut p = Pipeline::new(cfg).unwrap();
            for ev in &events {
                p.apply(ev).unwrap();
                let ids: Vec<PointId> = p.store().live_ids().collect();
                if ids.is_empty() {
                    continue;
                }
                let (opt, _) = opt_k_exact(p.store(), &ids, 2, budget).unwrap();
                let cost = p.measured_cost().unwrap();
                assert!(cost <= 20.0 * opt + 1e-9, "ratio too large: {cost} vs {opt}");
            }
        }
    }

    #[test]
    fn buffered_resets_report_single_diff() {
        let mut rng = ChaCha8Rng::seed_from_u64(400);
        let mut next = 0;
        let mut live = Vec::new();
        let events = random_events(&mut rng, 2000, 300, &mut next, &mut live);
        let cfg = PipelineConfig::new(Mode::Buffered { epsilon: 1.0 }, 2, bounds(), 350, 5);
        let epoch_len = BufferedConfig::new(2, 1.0, 350, 5).unwrap().epoch_len();
        let mut p = Pipeline::new(cfg).unwrap();
        let mut resets = 0;
        let mut reset_recourse = 0usize;
        for ev in &events {
            let step = p.apply(ev).unwrap();
            if step.reset {
                resets += 1;
                // The reported change at a reset stays bounded by the two
                // solution sizes even though many internal updates ran.
                assert!(step.recourse() <= 2 * 2, "reset recourse above 2k");
                reset_recourse += step.recourse();
            }
            let s = p.solution().centers;
            for c in &s {
                assert!(p.store().is_live(*c));
            }
        }
        assert!(resets >= events.len() / epoch_len / 2, "resets too rare: {resets}");
        // Resets fire every (q-1)k updates and each reports at most 2k
        // changes, so their amortized share is at most 2/(q-1).
        let q = 4.0 / 1.0;
        assert!(
            reset_recourse as f64 / events.len() as f64 <= 2.0 / (q - 1.0) + 1e-9,
            "amortized reset recourse too large"
        );
        let r = p.report().unwrap();
        // Reported stream the inner algorithm saw, minus suppressed resets,
        // is at most twice the input length.
        assert!(r.forwarded_updates <= 2 * events.len() as u64);
    }

    #[test]
    fn buffered_mode_respects_epoch_flow() {
        // Applying events one by one never leaves the wrapper at its
        // boundary: the pipeline resets it within the same update.
        let mut rng = ChaCha8Rng::seed_from_u64(500);
        let mut next = 0;
        let mut live = Vec::new();
        let events = random_events(&mut rng, 300, 80, &mut next, &mut live);
        let cfg = PipelineConfig::new(Mode::Buffered { epsilon: 0.5 }, 3, bounds(), 100, 6);
        let mut p = Pipeline::new(cfg).unwrap();
        for ev in &events {
            p.apply(ev).unwrap();
            assert!(!p.buffered().unwrap().needs_reset());
        }
    }
}
