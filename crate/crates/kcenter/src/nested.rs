//! Dynamic k-center over nested threshold levels.
//!
//! For geometrically growing thresholds lambda_1 < ... < lambda_tau the
//! structure maintains a chain of maximal independent sets
//! I_tau ⊆ ... ⊆ I_1 ⊆ I_0 = V, where level i's MIS lives on the
//! lambda_i-threshold graph induced on level (i-1)'s MIS. The solution is
//! read off the first level i* whose MIS fits inside k, padded with the
//! lexicographically first points of I_{i*-1} \ I_{i*}; 2 lambda_{i*} is a
//! certified upper bound on the solution cost. Each update cascades level
//! by level, and every level also keeps its set difference to the parent
//! split into an ordered "front" (the pad candidates) and "rest" so the
//! pad shifts one element at a time.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::metric::{MetricBounds, MetricView, PointId};
use crate::mis::{DynMis, MisChangeSet};

/// Threshold ladder: lambda_i = 2^(i-2) * d_min for 0 <= i <= tau, with
/// tau just large enough that lambda_tau >= d_max (so the top threshold
/// graph is complete and the top MIS has at most one vertex).
#[derive(Clone, Copy, Debug)]
pub struct LevelConfig {
    pub k: usize,
    pub bounds: MetricBounds,
    tau: usize,
}

impl LevelConfig {
    pub fn new(k: usize, bounds: MetricBounds) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        let mut tau = (bounds.aspect_ratio().log2().ceil() as i64 + 2).max(1) as usize;
        while bounds.d_min * 2f64.powi(tau as i32 - 2) < bounds.d_max {
            tau += 1;
        }
        Ok(Self { k, bounds, tau })
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn lambda(&self, i: usize) -> f64 {
        debug_assert!(i <= self.tau);
        self.bounds.d_min * 2f64.powi(i as i32 - 2)
    }
}

type LexKey = (u64, PointId);

struct LevelSlot {
    mis: DynMis,
    /// First max(0, min(k - |I_i|, |diff|)) elements of I_{i-1} \ I_i in
    /// (seq, id) order.
    front: BTreeSet<LexKey>,
    /// The remaining elements; everything in `front` precedes everything
    /// here.
    rest: BTreeSet<LexKey>,
}

impl LevelSlot {
    fn diff_len(&self) -> usize {
        self.front.len() + self.rest.len()
    }

    fn add_diff(&mut self, key: LexKey) {
        match self.front.last() {
            Some(&maxf) if key < maxf => {
                self.front.insert(key);
            }
            _ => {
                self.rest.insert(key);
            }
        }
    }

    fn remove_diff(&mut self, key: LexKey) {
        if !self.front.remove(&key) {
            self.rest.remove(&key);
        }
    }

    /// Moves boundary elements one at a time until the front holds
    /// exactly its target size.
    fn rebalance(&mut self, k: usize) {
        let target = (k as i64 - self.mis.len() as i64).clamp(0, self.diff_len() as i64) as usize;
        while self.front.len() > target {
            let x = *self.front.last().unwrap();
            self.front.remove(&x);
            self.rest.insert(x);
        }
        while self.front.len() < target {
            match self.rest.first().copied() {
                Some(x) => {
                    self.rest.remove(&x);
                    self.front.insert(x);
                }
                None => break,
            }
        }
    }
}

/// The maintained output.
#[derive(Clone, Debug)]
pub struct Solution {
    /// Exactly min(k, |V|) centers.
    pub centers: BTreeSet<PointId>,
    /// The level the solution was read from (smallest i with |I_i| <= k).
    pub level: usize,
    /// Certified upper bound 2 * lambda_{i*} on the clustering cost.
    pub cost_upper: f64,
}

/// What one update changed.
#[derive(Clone, Debug)]
pub struct StepReport {
    pub added: Vec<PointId>,
    pub removed: Vec<PointId>,
    /// Net change of each level's MIS, index 0 holding level 1.
    pub level_changes: Vec<MisChangeSet>,
    pub i_star: usize,
    pub cost_upper: f64,
}

impl StepReport {
    /// Symmetric-difference size of the solution change.
    pub fn recourse(&self) -> usize {
        self.added.len() + self.removed.len()
    }
}

pub struct NestedKCenter {
    cfg: LevelConfig,
    levels: Vec<LevelSlot>,
    /// I_0: the vertex set this instance is induced on.
    live: BTreeSet<PointId>,
    i_star: usize,
    solution: BTreeSet<PointId>,
}

impl NestedKCenter {
    pub fn new(cfg: LevelConfig) -> Self {
        let levels = (1..=cfg.tau())
            .map(|i| LevelSlot {
                mis: DynMis::new(cfg.lambda(i)),
                front: BTreeSet::new(),
                rest: BTreeSet::new(),
            })
            .collect();
        Self { cfg, levels, live: BTreeSet::new(), i_star: 1, solution: BTreeSet::new() }
    }

    pub fn config(&self) -> &LevelConfig {
        &self.cfg
    }

    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }

    pub fn contains(&self, id: PointId) -> bool {
        self.live.contains(&id)
    }

    pub fn live_ids(&self) -> impl Iterator<Item = PointId> + '_ {
        self.live.iter().copied()
    }

    pub fn i_star(&self) -> usize {
        self.i_star
    }

    /// Members of I_i, ascending by id. I_0 is the whole vertex set.
    pub fn level_members(&self, i: usize) -> Vec<PointId> {
        if i == 0 {
            return self.live.iter().copied().collect();
        }
        self.levels[i - 1].mis.members()
    }

    pub fn level_size(&self, i: usize) -> usize {
        if i == 0 {
            self.live.len()
        } else {
            self.levels[i - 1].mis.len()
        }
    }

    pub fn solution(&self) -> Solution {
        Solution {
            centers: self.solution.clone(),
            level: self.i_star,
            cost_upper: self.cost_certificate(),
        }
    }

    /// 2 * lambda_{i*}: an upper bound on the cost of the current
    /// solution over this structure's vertex set.
    pub fn cost_certificate(&self) -> f64 {
        2.0 * self.cfg.lambda(self.i_star)
    }

    pub fn insert(&mut self, store: &MetricView, id: PointId) -> Result<StepReport> {
        if self.live.contains(&id) {
            return Err(Error::InvalidState(format!("{id} already tracked")));
        }
        if store.record_any(id).is_none() {
            return Err(Error::NotFound(id));
        }
        self.live.insert(id);
        Ok(self.cascade(store, vec![id], Vec::new()))
    }

    pub fn delete(&mut self, store: &MetricView, id: PointId) -> Result<StepReport> {
        if !self.live.remove(&id) {
            return Err(Error::NotFound(id));
        }
        Ok(self.cascade(store, Vec::new(), vec![id]))
    }

    fn cascade(&mut self, store: &MetricView, add0: Vec<PointId>, del0: Vec<PointId>) -> StepReport {
        let mut add_p = add0;
        let mut del_p = del0;
        let prio = |id: &PointId| store.record_any(*id).unwrap().priority_key();
        let lex = |id: PointId| store.record_any(id).unwrap().lex_key();
        let mut level_changes = Vec::with_capacity(self.levels.len());
        for slot in &mut self.levels {
            del_p.sort_by_key(prio);
            add_p.sort_by_key(prio);
            let mut net: BTreeMap<PointId, i32> = BTreeMap::new();
            let mut fold = |ch: MisChangeSet| {
                for a in ch.added {
                    *net.entry(a).or_insert(0) += 1;
                }
                for r in ch.removed {
                    *net.entry(r).or_insert(0) -= 1;
                }
            };
            for &v in &del_p {
                fold(slot.mis.delete_vertex(store, v).expect("cascade delete"));
            }
            for &v in &add_p {
                fold(slot.mis.insert_vertex(store, v).expect("cascade insert"));
            }
            let own_added: Vec<PointId> =
                net.iter().filter(|&(_, &s)| s > 0).map(|(&v, _)| v).collect();
            let own_removed: Vec<PointId> =
                net.iter().filter(|&(_, &s)| s < 0).map(|(&v, _)| v).collect();

            for &v in &del_p {
                slot.remove_diff(lex(v));
            }
            for &v in &own_removed {
                if !del_p.contains(&v) {
                    slot.add_diff(lex(v));
                }
            }
            for &v in &own_added {
                slot.remove_diff(lex(v));
            }
            for &v in &add_p {
                if !slot.mis.contains(v) {
                    slot.add_diff(lex(v));
                }
            }
            slot.rebalance(self.cfg.k);

            level_changes.push(MisChangeSet { added: own_added.clone(), removed: own_removed.clone() });
            add_p = own_added;
            del_p = own_removed;
        }

        self.i_star = self.compute_i_star();
        let slot = &self.levels[self.i_star - 1];
        let mut new_solution: BTreeSet<PointId> = slot.mis.members().into_iter().collect();
        for &(_, id) in &slot.front {
            new_solution.insert(id);
        }
        let added: Vec<PointId> =
            new_solution.difference(&self.solution).copied().collect();
        let removed: Vec<PointId> =
            self.solution.difference(&new_solution).copied().collect();
        self.solution = new_solution;

        StepReport {
            added,
            removed,
            level_changes,
            i_star: self.i_star,
            cost_upper: self.cost_certificate(),
        }
    }

    fn compute_i_star(&self) -> usize {
        for i in 1..=self.cfg.tau() {
            if self.levels[i - 1].mis.len() <= self.cfg.k {
                return i;
            }
        }
        // The top threshold graph is complete, so |I_tau| <= 1 <= k.
        self.cfg.tau()
    }

    /// Test hook: swaps the boundary elements of a level's front/rest
    /// split, breaking the pad order while leaving set contents intact.
    #[cfg(test)]
    pub(crate) fn corrupt_front_boundary(&mut self) -> bool {
        for slot in &mut self.levels {
            if let (Some(&f), Some(&r)) = (slot.front.last().copied().as_ref(), slot.rest.first().copied().as_ref()) {
                slot.front.remove(&f);
                slot.rest.remove(&r);
                slot.front.insert(r);
                slot.rest.insert(f);
                let reread: BTreeSet<PointId> = self.levels[self.i_star - 1]
                    .mis
                    .members()
                    .into_iter()
                    .chain(self.levels[self.i_star - 1].front.iter().map(|&(_, id)| id))
                    .collect();
                self.solution = reread;
                return true;
            }
        }
        false
    }
}

/// The output order the solution must follow: I_tau first, then each
/// difference block I_{i-1} \ I_i going down, lexicographic inside each
/// block. Rebuilt from scratch, independent of the maintained fronts.
pub fn output_order(store: &MetricView, kc: &NestedKCenter) -> Vec<PointId> {
    let tau = kc.config().tau();
    let mut order: Vec<PointId> = Vec::with_capacity(kc.len());
    let mut inner: BTreeSet<PointId> = kc.level_members(tau).into_iter().collect();
    order.extend(inner.iter().copied());
    for i in (1..=tau).rev() {
        let parent: BTreeSet<PointId> = kc.level_members(i - 1).into_iter().collect();
        let mut block: Vec<PointId> = parent.difference(&inner).copied().collect();
        block.sort_by_key(|&id| store.record_any(id).unwrap().lex_key());
        order.extend(block);
        inner = parent;
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{MetricBounds, Position};
    use crate::oracles::{greedy_mis, opt_k_exact, OracleBudget};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bounds(d_min: f64, d_max: f64) -> MetricBounds {
        MetricBounds::new(d_min, d_max).unwrap()
    }

    fn store_1d(d_min: f64, d_max: f64, seed: u64) -> MetricView {
        MetricView::euclidean(bounds(d_min, d_max), seed)
    }

    /// Full invariant audit against brute force; cheap enough for small n.
    fn audit(store: &MetricView, kc: &NestedKCenter) {
        let tau = kc.config().tau();
        let k = kc.config().k;
        let mut parent: BTreeSet<PointId> = kc.live_ids().collect();
        for i in 1..=tau {
            let members: BTreeSet<PointId> = kc.level_members(i).into_iter().collect();
            assert!(members.is_subset(&parent), "level {i} breaks nesting");
            // Level i must equal the greedy MIS of the lambda_i graph on
            // the parent set.
            let verts: Vec<(PointId, f64)> = parent
                .iter()
                .map(|&id| (id, store.record_any(id).unwrap().priority))
                .collect();
            let lambda = kc.config().lambda(i);
            let oracle = greedy_mis(
                &verts,
                |a, b| store.dist(a, b) <= lambda,
                OracleBudget::default(),
            )
            .unwrap();
            assert_eq!(
                members.iter().copied().collect::<Vec<_>>(),
                oracle.into_iter().collect::<Vec<_>>(),
                "level {i} disagrees with the greedy oracle"
            );
            // Coverage: everything outside I_i sits within 2 lambda_i.
            for &x in kc.live_ids().collect::<Vec<_>>().iter() {
                if !members.contains(&x) && !members.is_empty() {
                    let d = members.iter().map(|&m| store.dist(x, m)).fold(f64::INFINITY, f64::min);
                    assert!(d <= 2.0 * lambda + 1e-9, "coverage broken at level {i}");
                }
            }
            parent = members;
        }
        // Output-order consistency.
        let order = output_order(store, kc);
        let want: BTreeSet<PointId> =
            order.into_iter().take(k.min(kc.len())).collect();
        let sol = kc.solution();
        assert_eq!(sol.centers, want, "solution must be the first k of the output order");
        assert_eq!(sol.centers.len(), k.min(kc.len()));
        // Certificate.
        let centers: Vec<PointId> = sol.centers.iter().copied().collect();
        if !centers.is_empty() {
            let cost = store.cl(&centers, kc.live_ids()).unwrap();
            assert!(cost <= sol.cost_upper + 1e-9, "cost {cost} above certificate");
        }
    }

    #[test]
    fn first_point_is_the_solution() {
        let mut store = store_1d(1.0, 16.0, 5);
        let cfg = LevelConfig::new(2, bounds(1.0, 16.0)).unwrap();
        let mut kc = NestedKCenter::new(cfg);
        store.insert(PointId(0), Position::Coords(vec![0.0])).unwrap();
        let rep = kc.insert(&store, PointId(0)).unwrap();
        assert_eq!(rep.added, vec![PointId(0)]);
        let sol = kc.solution();
        assert_eq!(sol.level, 1);
        assert_eq!(sol.cost_upper, 1.0); // 2 * lambda_1 = d_min
        audit(&store, &kc);
    }

    #[test]
    fn line_instance_stays_within_eight_of_optimum() {
        let mut store = store_1d(1.0, 16.0, 5);
        let cfg = LevelConfig::new(2, bounds(1.0, 16.0)).unwrap();
        let mut kc = NestedKCenter::new(cfg);
        for (i, x) in [0.0, 1.0, 10.0, 11.0].into_iter().enumerate() {
            store.insert(PointId(i as u64), Position::Coords(vec![x])).unwrap();
            kc.insert(&store, PointId(i as u64)).unwrap();
            audit(&store, &kc);
        }
        let sol = kc.solution();
        let centers: Vec<PointId> = sol.centers.iter().copied().collect();
        let cost = store.cl(&centers, kc.live_ids()).unwrap();
        let (opt, _) = opt_k_exact(
            &store,
            &kc.live_ids().collect::<Vec<_>>(),
            2,
            OracleBudget::default(),
        )
        .unwrap();
        assert_eq!(opt, 1.0);
        assert!(cost <= 8.0 * opt);
    }

    #[test]
    fn small_spaces_output_everything() {
        let mut store = store_1d(1.0, 16.0, 5);
        let cfg = LevelConfig::new(5, bounds(1.0, 16.0)).unwrap();
        let mut kc = NestedKCenter::new(cfg);
        for i in 0..4u64 {
            store.insert(PointId(i), Position::Coords(vec![i as f64 * 3.0])).unwrap();
            let rep = kc.insert(&store, PointId(i)).unwrap();
            assert_eq!(rep.added, vec![PointId(i)], "points enter while |V| <= k");
        }
        assert_eq!(kc.solution().centers.len(), 4);
        audit(&store, &kc);
    }

    #[test]
    fn delete_everything() {
        let mut store = store_1d(1.0, 16.0, 5);
        let cfg = LevelConfig::new(2, bounds(1.0, 16.0)).unwrap();
        let mut kc = NestedKCenter::new(cfg);
        for i in 0..4u64 {
            store.insert(PointId(i), Position::Coords(vec![i as f64 * 5.0])).unwrap();
            kc.insert(&store, PointId(i)).unwrap();
        }
        for i in 0..4u64 {
            store.delete(PointId(i)).unwrap();
            kc.delete(&store, PointId(i)).unwrap();
            audit(&store, &kc);
        }
        assert!(kc.solution().centers.is_empty());
        assert!(matches!(kc.delete(&store, PointId(0)), Err(Error::NotFound(_))));
    }

    #[test]
    fn coincident_twin_promotion_costs_two() {
        // Two points at the same location, k = 1: deleting the one that
        // represents the pair at every level swaps the whole solution.
        let mut store = store_1d(1.0, 16.0, 5);
        let cfg = LevelConfig::new(1, bounds(1.0, 16.0)).unwrap();
        let mut kc = NestedKCenter::new(cfg);
        store.insert(PointId(0), Position::Coords(vec![3.0])).unwrap();
        store.insert(PointId(1), Position::Coords(vec![3.0])).unwrap();
        kc.insert(&store, PointId(0)).unwrap();
        kc.insert(&store, PointId(1)).unwrap();
        let rep = kc.level_members(1);
        assert_eq!(rep.len(), 1, "one representative per coincidence class");
        let rep = rep[0];
        let twin = if rep == PointId(0) { PointId(1) } else { PointId(0) };
        store.delete(rep).unwrap();
        let step = kc.delete(&store, rep).unwrap();
        assert_eq!(step.recourse(), 2);
        assert_eq!(kc.solution().centers.iter().copied().collect::<Vec<_>>(), vec![twin]);
        audit(&store, &kc);
    }

    #[test]
    fn dominated_leaf_deletion_keeps_solution() {
        let mut store = store_1d(1.0, 64.0, 41);
        let cfg = LevelConfig::new(1, bounds(1.0, 64.0)).unwrap();
        let mut kc = NestedKCenter::new(cfg);
        // A tight pair far from a third point; with k = 1 the solution
        // sits at a high level and one of the pair is a dominated leaf.
        store.insert(PointId(0), Position::Coords(vec![0.0])).unwrap();
        store.insert(PointId(1), Position::Coords(vec![1.0])).unwrap();
        kc.insert(&store, PointId(0)).unwrap();
        kc.insert(&store, PointId(1)).unwrap();
        // Whichever of the pair is not in I_1 is dominated everywhere and
        // not part of the solution (k = 1, i* >= 2 once both are in).
        let i1: BTreeSet<PointId> = kc.level_members(1).into_iter().collect();
        if i1.len() == 1 {
            let leaf = if i1.contains(&PointId(0)) { PointId(1) } else { PointId(0) };
            if !kc.solution().centers.contains(&leaf) {
                store.delete(leaf).unwrap();
                let step = kc.delete(&store, leaf).unwrap();
                assert!(step.added.is_empty() && step.removed.is_empty());
            }
        }
        audit(&store, &kc);
    }

    #[test]
    fn random_stream_full_audit() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for trial in 0..6 {
            let k = 1 + trial % 3;
            let mut store = MetricView::euclidean(bounds(0.25, 30.0), 1000 + trial as u64);
            let cfg = LevelConfig::new(k, bounds(0.25, 30.0)).unwrap();
            let mut kc = NestedKCenter::new(cfg);
            let mut live: Vec<PointId> = Vec::new();
            let mut next = 0u64;
            for _ in 0..120 {
                let del = !live.is_empty() && (live.len() >= 12 || rng.random_bool(0.35));
                if del {
                    let v = live.swap_remove(rng.random_range(0..live.len()));
                    store.delete(v).unwrap();
                    kc.delete(&store, v).unwrap();
                } else {
                    let id = PointId(next);
                    next += 1;
                    // Snap to a 0.25 grid inside [0, 20] so the declared
                    // bounds hold by construction.
                    let x = (rng.random_range(0.0..20.0f64) / 0.25).round() * 0.25;
                    let y = (rng.random_range(0.0..20.0f64) / 0.25).round() * 0.25;
                    store.insert(id, Position::Coords(vec![x, y])).unwrap();
                    live.push(id);
                    kc.insert(&store, id).unwrap();
                }
                audit(&store, &kc);
            }
        }
    }

    #[test]
    fn scratch_rebuild_matches_incremental() {
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        let b = bounds(0.25, 300.0);
        let mut store = MetricView::euclidean(b, 9);
        let cfg = LevelConfig::new(5, b).unwrap();
        let mut kc = NestedKCenter::new(cfg);
        let mut live: Vec<PointId> = Vec::new();
        let mut next = 0u64;
        let mut events: Vec<(bool, PointId)> = Vec::new();
        for _ in 0..400 {
            let del = !live.is_empty() && (live.len() >= 200 || rng.random_bool(0.3));
            if del {
                let v = live.swap_remove(rng.random_range(0..live.len()));
                store.delete(v).unwrap();
                kc.delete(&store, v).unwrap();
                events.push((false, v));
            } else {
                let id = PointId(next);
                next += 1;
                let x = (rng.random_range(0.0..100.0f64) / 0.25).round() * 0.25;
                let y = (rng.random_range(0.0..100.0f64) / 0.25).round() * 0.25;
                store.insert(id, Position::Coords(vec![x, y])).unwrap();
                live.push(id);
                kc.insert(&store, id).unwrap();
                events.push((true, id));
            }
        }
        // Replaying the whole event history gives the same solution ...
        let mut replay = NestedKCenter::new(cfg);
        let mut replay_live: BTreeSet<PointId> = BTreeSet::new();
        for &(ins, id) in &events {
            if ins {
                replay.insert(&store, id).unwrap();
                replay_live.insert(id);
            } else {
                replay.delete(&store, id).unwrap();
                replay_live.remove(&id);
            }
        }
        assert_eq!(replay.solution().centers, kc.solution().centers);
        // ... and so does inserting just the surviving points: the
        // output is a pure function of the live set and its records.
        let mut fresh = NestedKCenter::new(cfg);
        for id in replay_live {
            fresh.insert(&store, id).unwrap();
        }
        assert_eq!(fresh.solution().centers, kc.solution().centers);
        assert_eq!(fresh.i_star(), kc.i_star());
    }

    #[test]
    fn corrupted_front_breaks_order_consistency() {
        // The mutation the order checker must catch: swap one element
        // across the front/rest boundary.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let b = bounds(0.25, 300.0);
        let mut store = MetricView::euclidean(b, 3);
        let cfg = LevelConfig::new(4, b).unwrap();
        let mut kc = NestedKCenter::new(cfg);
        for i in 0..40u64 {
            let x = (rng.random_range(0.0..100.0f64) / 0.25).round() * 0.25;
            store.insert(PointId(i), Position::Coords(vec![x, 0.0])).unwrap();
            kc.insert(&store, PointId(i)).unwrap();
        }
        if kc.corrupt_front_boundary() {
            let order = output_order(&store, &kc);
            let want: BTreeSet<PointId> = order.into_iter().take(4).collect();
            assert_ne!(kc.solution().centers, want, "corruption must be detectable");
        }
    }
}
