//! Brute-force reference implementations used by tests, the verifier and
//! the acceptance suite. None of these share code with the dynamic
//! structures they are used to check; only the distance oracle of
//! [`MetricView`] is common.

use std::collections::BTreeSet;

use itertools::Itertools;
use rand::seq::index;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::{check_matrix, MetricDefect, MetricView, PointId};

/// Caps on the exponential enumerations, enforced before any search starts.
#[derive(Clone, Copy, Debug)]
pub struct OracleBudget {
    /// Largest space for exhaustive k-center / cluster enumeration.
    pub max_n: usize,
    /// Largest subset size for center enumeration.
    pub max_k: usize,
    /// Largest vertex count for brute MIS checks.
    pub max_mis_vertices: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self { max_n: 14, max_k: 4, max_mis_vertices: 64 }
    }
}

/// Exact k-center optimum by enumerating all center subsets of size
/// min(k, |space|). Returns the optimal cost and one witness set (the
/// first optimum in lexicographic subset order).
pub fn opt_k_exact(
    store: &MetricView,
    space: &[PointId],
    k: usize,
    budget: OracleBudget,
) -> Result<(f64, Vec<PointId>)> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    if space.is_empty() {
        return Ok((0.0, Vec::new()));
    }
    if space.len() > budget.max_n {
        return Err(Error::BudgetExceeded(format!(
            "exhaustive optimum needs |space| <= {}, got {}",
            budget.max_n,
            space.len()
        )));
    }
    let m = k.min(space.len());
    if m > budget.max_k && m < space.len() {
        return Err(Error::BudgetExceeded(format!(
            "center enumeration capped at k <= {}, got {m}",
            budget.max_k
        )));
    }
    let mut ids: Vec<PointId> = space.to_vec();
    ids.sort_unstable();
    if m >= ids.len() {
        return Ok((0.0, ids));
    }
    let mut best = f64::INFINITY;
    let mut witness = Vec::new();
    for combo in ids.iter().copied().combinations(m) {
        let cost = store.cl(&combo, ids.iter().copied())?;
        if cost < best {
            best = cost;
            witness = combo;
        }
    }
    Ok((best, witness))
}

/// Farthest-first traversal seeded at `first`; ties on the farthest point
/// break toward the smallest id.
pub fn gonzalez(store: &MetricView, space: &[PointId], k: usize, first: PointId) -> Result<Vec<PointId>> {
    if space.is_empty() {
        return Err(Error::InvalidArgument("gonzalez over empty space".into()));
    }
    if !space.contains(&first) {
        return Err(Error::NotFound(first));
    }
    let mut ids: Vec<PointId> = space.to_vec();
    ids.sort_unstable();
    let mut centers = vec![first];
    let mut dist: Vec<f64> = ids.iter().map(|&x| store.dist(x, first)).collect();
    while centers.len() < k.min(ids.len()) {
        let mut far_i = 0;
        for i in 1..ids.len() {
            if dist[i] > dist[far_i] {
                far_i = i;
            }
        }
        let next = ids[far_i];
        centers.push(next);
        for (i, &x) in ids.iter().enumerate() {
            let d = store.dist(x, next);
            if d < dist[i] {
                dist[i] = d;
            }
        }
    }
    Ok(centers)
}

/// Greedy MIS over ascending (priority, id): a vertex joins iff none of
/// its already-chosen neighbors precede it.
pub fn greedy_mis<F>(
    vertices: &[(PointId, f64)],
    mut is_edge: F,
    budget: OracleBudget,
) -> Result<BTreeSet<PointId>>
where
    F: FnMut(PointId, PointId) -> bool,
{
    if vertices.len() > budget.max_mis_vertices {
        return Err(Error::BudgetExceeded(format!(
            "brute MIS capped at {} vertices, got {}",
            budget.max_mis_vertices,
            vertices.len()
        )));
    }
    let mut order: Vec<(u64, PointId)> =
        vertices.iter().map(|&(id, p)| (p.to_bits(), id)).collect();
    order.sort_unstable();
    let mut chosen: Vec<PointId> = Vec::new();
    for &(_, v) in &order {
        if chosen.iter().all(|&m| !is_edge(v, m)) {
            chosen.push(v);
        }
    }
    Ok(chosen.into_iter().collect())
}

/// Smallest diameter bound mu such that k disjoint subsets of `space`
/// with total size >= beta * |space| each have diameter <= mu.
///
/// Binary search over the candidate set {0} union pairwise distances,
/// with an exact covering check: a subset of diameter <= mu is a clique
/// of the mu-threshold graph, and the check maximizes the total size of
/// at most k disjoint cliques by submask dynamic programming.
pub fn mu_k_beta(
    store: &MetricView,
    space: &[PointId],
    k: usize,
    beta: f64,
    budget: OracleBudget,
) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidArgument(format!("beta must be in (0,1], got {beta}")));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let n = space.len();
    if n == 0 {
        return Ok(0.0);
    }
    if n > budget.max_n.max(14).min(20) {
        return Err(Error::BudgetExceeded(format!(
            "mu enumeration capped at {} points, got {n}",
            budget.max_n.max(14).min(20)
        )));
    }
    let mut ids: Vec<PointId> = space.to_vec();
    ids.sort_unstable();
    let mut dmat = vec![0.0f64; n * n];
    let mut candidates = vec![0.0f64];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = store.dist(ids[i], ids[j]);
            dmat[i * n + j] = d;
            dmat[j * n + i] = d;
            candidates.push(d);
        }
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let need = (beta * n as f64 - 1e-9).ceil().max(0.0) as usize;

    let feasible = |mu: f64| -> bool {
        // Adjacency bitmask of the mu-threshold graph.
        let mut adj = vec![0u32; n];
        for i in 0..n {
            for j in 0..n {
                if i != j && dmat[i * n + j] <= mu {
                    adj[i] |= 1 << j;
                }
            }
        }
        let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        let size = (full as usize) + 1;
        let mut clique = vec![false; size];
        clique[0] = true;
        for mask in 1..size {
            let m = mask as u32;
            let low = m.trailing_zeros() as usize;
            let rest = m & (m - 1);
            clique[mask] = clique[rest as usize] && (adj[low] & rest) == rest;
        }
        // cover[mask] = best total size using at most j cliques inside mask.
        let mut cover = vec![0u32; size];
        for _ in 0..k.min(n) {
            let mut next = cover.clone();
            for mask in 1..size {
                let m = mask as u32;
                let mut s = m;
                let mut best = cover[mask];
                while s > 0 {
                    if clique[s as usize] {
                        let cand = s.count_ones() + cover[(m & !s) as usize];
                        if cand > best {
                            best = cand;
                        }
                    }
                    s = (s - 1) & m;
                }
                next[mask] = best;
            }
            cover = next;
        }
        cover[full as usize] as usize >= need
    };

    // Feasibility is monotone in mu, so binary search the candidates.
    let mut lo = 0usize;
    let mut hi = candidates.len() - 1;
    if feasible(candidates[lo]) {
        return Ok(candidates[lo]);
    }
    if !feasible(candidates[hi]) {
        return Err(Error::InvalidArgument(format!(
            "no {k} subsets can cover a {beta} fraction of {n} points"
        )));
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(candidates[hi])
}

/// One layer of the static sampling pass.
#[derive(Clone, Debug)]
pub struct StaticLayer {
    pub centers: Vec<PointId>,
    /// (point, assigned center) for the covered quarter, the centers
    /// themselves included.
    pub covered: Vec<(PointId, PointId)>,
    pub radius: f64,
}

/// Result of the full static sampling pass.
#[derive(Clone, Debug)]
pub struct StaticSparsifier {
    pub layers: Vec<StaticLayer>,
    /// Remaining points once the loop guard stops.
    pub bottom: Vec<PointId>,
    /// Union of the per-layer centers and the bottom set, ascending.
    pub output: Vec<PointId>,
    /// Sizes |U_1|, ..., |U_l|.
    pub layer_sizes: Vec<usize>,
}

fn oracle_cover(
    store: &MetricView,
    sorted: &[PointId],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<PointId>, Vec<(PointId, PointId, f64)>) {
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
    (centers, scored)
}

/// The full static pass: repeatedly sample min(2k, |U|) centers, peel off
/// the quarter of the space closest to them (boosted over `boost_m`
/// independent trials, keeping the attempt with the smallest covering
/// radius), and stop once at most 16k points remain.
///
/// Draw-for-draw compatible with the dynamic structure's rebuild when
/// handed a clone of its RNG, which is what the equivalence checks rely
/// on; the code itself is kept independent.
pub fn static_sampling_pass(
    store: &MetricView,
    space: &[PointId],
    k: usize,
    boost_m: usize,
    rng: &mut ChaCha8Rng,
) -> StaticSparsifier {
    let mut current: Vec<PointId> = space.to_vec();
    current.sort_unstable();
    let mut layers = Vec::new();
    let mut layer_sizes = vec![current.len()];
    while current.len() > 16 * k {
        let take = current.len() / 4;
        let mut best: Option<(f64, Vec<PointId>, Vec<(PointId, PointId, f64)>)> = None;
        for _ in 0..boost_m.max(1) {
            let (centers, scored) = oracle_cover(store, &current, k, rng);
            let r = if take == 0 { 0.0 } else { scored[take - 1].2 };
            let better = match &best {
                None => true,
                Some((br, _, _)) => r < *br,
            };
            if better {
                best = Some((r, centers, scored));
            }
        }
        let (radius, centers, scored) = best.unwrap();
        let covered: Vec<(PointId, PointId)> =
            scored[..take].iter().map(|&(x, c, _)| (x, c)).collect();
        let keep: BTreeSet<PointId> = scored[take..].iter().map(|&(x, _, _)| x).collect();
        layers.push(StaticLayer { centers, covered, radius });
        current = keep.into_iter().collect();
        layer_sizes.push(current.len());
    }
    let mut output: BTreeSet<PointId> = current.iter().copied().collect();
    for l in &layers {
        output.extend(l.centers.iter().copied());
    }
    StaticSparsifier {
        layers,
        bottom: current,
        output: output.into_iter().collect(),
        layer_sizes,
    }
}

/// Validates an explicit distance matrix, reporting the first violation.
pub fn verify_metric(rows: &[Vec<f64>]) -> std::result::Result<(), MetricDefect> {
    check_matrix(rows)
}
