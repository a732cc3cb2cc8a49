//! The online invariant suite behind `kcenter verify`: randomized small
//! instances driven through every structure, with each property checked
//! against the brute-force oracles. All checks are deterministic given
//! the seed.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::metric::{
    DistanceMode, MatrixMetric, MetricBounds, MetricView, PointId, Position, UpdateEvent,
};
use crate::mis::DynMis;
use crate::nested::{output_order, LevelConfig, NestedKCenter};
use crate::oracles::{greedy_mis, mu_k_beta, opt_k_exact, static_sampling_pass, OracleBudget};
use crate::pipeline::{Mode, Pipeline, PipelineConfig};
use crate::sparsifier::{Sparsifier, SparsifierConfig};
use crate::stream::uniform_graph_matrix;

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    pub budget: OracleBudget,
    /// Number of random instances per check.
    pub trials: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { seed: 1, budget: OracleBudget::default(), trials: 12 }
    }
}

type CheckFn = fn(&VerifyConfig) -> std::result::Result<String, String>;

const CHECKS: &[(&str, CheckFn)] = &[
    ("metric-triangle", check_metric_triangle),
    ("mis-oracle-equivalence", check_mis_oracle),
    ("level-nesting-and-coverage", check_level_nesting),
    ("certificate-and-approximation", check_certificate),
    ("output-order-consistency", check_output_order),
    ("sparsifier-structure", check_sparsifier_structure),
    ("sparsifier-approximation", check_sparsifier_approx),
    ("pipeline-composition", check_pipeline_composition),
    ("buffered-wrapper", check_buffered),
    ("mu-claims", check_mu_claims),
    ("lazy-updates-lemma", check_lazy_updates),
    ("subset-optimum", check_subset_opt),
];

pub fn run_suite(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let mut checks = Vec::with_capacity(CHECKS.len());
    for (name, f) in CHECKS {
        let (passed, detail) = match f(cfg) {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        checks.push(CheckResult { name, passed, detail });
    }
    Ok(VerifyReport { seed: cfg.seed, checks })
}

fn grid(v: f64) -> f64 {
    (v / 0.25).round() * 0.25
}

fn small_bounds() -> MetricBounds {
    MetricBounds::new(0.25, 300.0).unwrap()
}

/// Random snapped euclidean store with `n` points on ids 0..n.
fn random_small_store(n: usize, rng: &mut ChaCha8Rng, store_seed: u64) -> MetricView {
    let mut store = MetricView::euclidean(small_bounds(), store_seed);
    for i in 0..n {
        let x = grid(rng.random_range(0.0..60.0));
        let y = grid(rng.random_range(0.0..60.0));
        store.insert(PointId(i as u64), Position::Coords(vec![x, y])).unwrap();
    }
    store
}

struct SmallStream {
    store: MetricView,
    live: Vec<PointId>,
    next: u64,
    rng: ChaCha8Rng,
    cap: usize,
}

impl SmallStream {
    fn new(seed: u64, cap: usize) -> Self {
        Self {
            store: MetricView::euclidean(small_bounds(), seed ^ 0xfeed),
            live: Vec::new(),
            next: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            cap,
        }
    }

    fn step(&mut self) -> UpdateEvent {
        let del =
            !self.live.is_empty() && (self.live.len() >= self.cap || self.rng.random_bool(0.35));
        let ev = if del {
            let v = self.live.swap_remove(self.rng.random_range(0..self.live.len()));
            UpdateEvent::delete(v)
        } else {
            let id = PointId(self.next);
            self.next += 1;
            self.live.push(id);
            let x = grid(self.rng.random_range(0.0..60.0));
            let y = grid(self.rng.random_range(0.0..60.0));
            UpdateEvent::insert(id, Position::Coords(vec![x, y]))
        };
        self.store.apply(&ev).unwrap();
        ev
    }
}

fn check_metric_triangle(cfg: &VerifyConfig) -> std::result::Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for t in 0..cfg.trials {
        let n = rng.random_range(4..=10);
        let store = random_small_store(n, &mut rng, cfg.seed + t as u64);
        let ids: Vec<PointId> = store.live_ids().collect();
        let rows: Vec<Vec<f64>> = ids
            .iter()
            .map(|&a| ids.iter().map(|&b| store.dist(a, b)).collect())
            .collect();
        if let Err(d) = crate::oracles::verify_metric(&rows) {
            return Err(format!("euclidean-derived matrix rejected: {d}"));
        }
        // An injected breach must be caught.
        let mut bad = rows.clone();
        if n >= 3 {
            bad[0][2] = bad[0][1] + bad[1][2] + 5.0;
            bad[2][0] = bad[0][2];
            if crate::oracles::verify_metric(&bad).is_ok() {
                return Err("constructed triangle breach went unnoticed".into());
            }
        }
    }
    Ok(format!("{} matrices validated", cfg.trials))
}

fn check_mis_oracle(cfg: &VerifyConfig) -> std::result::Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x11);
    let mut steps = 0usize;
    for t in 0..cfg.trials {
        let n_rows = 20;
        let p = [0.1, 0.25, 0.5][t % 3];
        let rows = uniform_graph_matrix(n_rows, p, cfg.seed + 7 * t as u64);
        let matrix = MatrixMetric::new(rows).map_err(|e| e.to_string())?;
        let mut store = MetricView::new(
            DistanceMode::Matrix(matrix),
            MetricBounds::new(1.0, 2.0).unwrap(),
            cfg.seed + t as u64,
        );
        let mut mis = DynMis::new(1.0);
        let mut live: Vec<PointId> = Vec::new();
        let mut next = 0u64;
        for _ in 0..150 {
            let del = !live.is_empty() && (live.len() >= n_rows || rng.random_bool(0.4));
            if del {
                let v = live.swap_remove(rng.random_range(0..live.len()));
                store.delete(v).unwrap();
                mis.delete_vertex(&store, v).map_err(|e| e.to_string())?;
            } else {
                let id = PointId(next);
                next += 1;
                store
                    .insert(id, Position::Row(rng.random_range(0..n_rows)))
                    .unwrap();
                live.push(id);
                mis.insert_vertex(&store, id).map_err(|e| e.to_string())?;
            }
            steps += 1;
            let verts: Vec<(PointId, f64)> = mis
                .vertex_ids()
                .into_iter()
                .map(|id| (id, store.record_any(id).unwrap().priority))
                .collect();
            let oracle = greedy_mis(&verts, |a, b| store.dist(a, b) <= 1.0, cfg.budget)
                .map_err(|e| e.to_string())?;
            let got: BTreeSet<PointId> = mis.members().into_iter().collect();
            if got != oracle {
                return Err(format!("MIS diverged from the greedy oracle after {steps} steps"));
            }
            let members = mis.members();
            for (i, &a) in members.iter().enumerate() {
                for &b in &members[i + 1..] {
                    if store.dist(a, b) <= 1.0 {
                        return Err(format!("independence broken: {a} adjacent {b}"));
                    }
                }
            }
            for v in mis.vertex_ids() {
                if !mis.contains(v)
                    && !members.iter().any(|&m| store.dist(v, m) <= 1.0)
                {
                    return Err(format!("maximality broken at {v}"));
                }
            }
        }
    }
    Ok(format!("{steps} updates matched the oracle"))
}

fn drive_direct(
    seed: u64,
    cap: usize,
    steps: usize,
    k: usize,
    mut check: impl FnMut(&MetricView, &NestedKCenter) -> std::result::Result<(), String>,
) -> std::result::Result<(), String> {
    let mut s = SmallStream::new(seed, cap);
    let cfg = LevelConfig::new(k, small_bounds()).map_err(|e| e.to_string())?;
    let mut kc = NestedKCenter::new(cfg);
    for _ in 0..steps {
        let ev = s.step();
        match ev.kind {
            crate::metric::EventKind::Insert => kc.insert(&s.store, ev.id),
            crate::metric::EventKind::Delete => kc.delete(&s.store, ev.id),
        }
        .map_err(|e| e.to_string())?;
        check(&s.store, &kc)?;
    }
    Ok(())
}

fn check_level_nesting(cfg: &VerifyConfig) -> std::result::Result<String, String> {
    for t in 0..cfg.trials {
        let budget = cfg.budget;
        drive_direct(cfg.seed + t as u64, 16, 60, 1 + t % 3, |store, kc| {
            let tau = kc.config().tau();
            let mut parent: BTreeSet<PointId> = kc.live_ids().collect();
            for i in 1..=tau {
                let members: BTreeSet<PointId> = kc.level_members(i).into_iter().collect();
                if !members.is_subset(&parent) {
                    return Err(format!("nesting broken at level {i}"));
                }
                let lambda = kc.config().lambda(i);
                let verts: Vec<(PointId, f64)> = parent
                    .iter()
                    .map(|&id| (id, store.record_any(id).unwrap().priority))
                    .collect();
                let oracle = greedy_mis(&verts, |a, b| store.dist(a, b) <= lambda, budget)
                    .map_err(|e| e.to_string())?;
                if oracle != members {
                    return Err(format!("level {i} is not the greedy MIS of its parent"));
                }
                for x in kc.live_ids() {
                    if !members.contains(&x) && !members.is_empty() {
                        let d = members
                            .iter()
                            .map(|&m| store.dist(x, m))
                            .fold(f64::INFINITY, f64::min);
                        if d > 2.0 * lambda + 1e-9 {
                            return Err(format!("coverage broken at level {i}: {d}"));
                        }
                    }
                }
                parent = members;
            }
            Ok(())
        })?;
    }
    Ok(format!("{} streams audited", cfg.trials))
}

fn check_certificate(cfg: &VerifyConfig) -> std::result::Result<String, String> {
    for t in 0..cfg.trials {
        let budget = cfg.budget;
        drive_direct(cfg.seed + 31 * t as u64, 12, 60, 1 + t % 3, |store, kc| {
            let sol = kc.solution();
            let centers: Vec<PointId> = sol.centers.iter().copied().collect();
            let ids: Vec<PointId> = kc.live_ids().collect();
            if ids.is_empty() {
                return Ok(());
            }
            let cost = store.cl(&centers, ids.iter().copied()).map_err(|e| e.to_string())?;
            if cost > sol.cost_upper + 1e-9 {
                return Err(format!("cost {cost} above certificate {}", sol.cost_upper));
            }
            let (opt, _) =
                opt_k_exact(store, &ids, kc.config().k, budget).map_err(|e| e.to_string())?;
            if cost > 8.0 * opt + 1e-9 {
                return Err(format!("cost {cost} above 8x optimum {opt}"));
            }
            let i = kc.i_star();
            if i >= 2 && kc.level_size(i - 1) > kc.config().k {
                let lambda_prev = kc.config().lambda(i - 1);
                if lambda_prev > 2.0 * opt + 1e-9 {
                    return Err(format!(
                        "threshold {lambda_prev} above 2x optimum {opt} with a large level"
                    ));
                }
            }
            Ok(())
        })?;
    }
    Ok(format!("{} streams audited", cfg.trials))
}

fn check_output_order(cfg: &VerifyConfig) -> std::result::Result<String, String> {
    for t in 0..cfg.trials {
        drive_direct(cfg.seed + 17 * t as u64, 20, 70, 2 + t % 3, |store, kc| {
            let order = output_order(store, kc);
            let want: BTreeSet<PointId> =
                order.into_iter().take(kc.config().k.min(kc.len())).collect();
            if kc.solution().centers != want {
                return Err("solution is not the prefix of the output order".into());
            }
            Ok(())
        })?;
    }
    Ok(format!("{} streams audited", cfg.trials))
}

fn check_sparsifier_structure(cfg: &VerifyConfig) -> std::result::Result<String, String> {
    let mut rebuild_checks = 0usize;
    for t in 0..cfg.trials {
        let mut s = SmallStream::new(cfg.seed + 13 * t as u64, 120);
        let scfg =
            SparsifierConfig::new(1, 128, cfg.seed + t as u64).map_err(|e| e.to_string())?;
        let mut sp = Sparsifier::new(scfg);
        for _ in 0..400 {
            let pre_rng = sp.clone_rng();
            let ev = s.step();
            let step = match ev.kind {
                crate::metric::EventKind::Insert => sp.insert(&s.store, ev.id),
                crate::metric::EventKind::Delete => sp.delete(&s.store, ev.id),
            }
            .map_err(|e| e.to_string())?;

            let ell = sp.ell();
            for i in 1..=ell {
                if 4 * sp.count(i) >= sp.layer_size(i) && sp.layer_size(i) > 0 {
                    return Err(format!("stale counter at rest on layer {i}"));
                }
            }
            for i in 1..ell {
                if sp.layer_size(i + 1) > (3 * sp.layer_size(i) + 3) / 4 + sp.count(i) {
                    return Err(format!("layer {} outgrew its decay allowance", i + 1));
                }
            }
            let mut expect: BTreeSet<PointId> = sp.bottom().into_iter().collect();
            for i in 1..ell {
                for (c, members) in sp.layer_clusters(i) {
                    if !members.contains(&c) {
                        return Err(format!("center {c} outside its cluster"));
                    }
                    expect.insert(c);
                }
            }
            if sp.output() != expect.into_iter().collect::<Vec<_>>() {
                return Err("output is not centers plus bottom".into());
            }
            if let Some(r) = step.reconstruct {
                if r.rebuilt_from == 1 && sp.len() > 20 {
                    let mut ids: Vec<PointId> = s.live.clone();
                    ids.sort_unstable();
                    let mut oracle_rng = pre_rng;
                    let st = static_sampling_pass(&s.store, &ids, 1, scfg.boost_m(), &mut oracle_rng);
                    if st.output != sp.output() {
                        return Err("full rebuild diverged from the static pass".into());
                    }
                    rebuild_checks += 1;
                }
            }
        }
    }
    Ok(format!("{rebuild_checks} full rebuilds matched the static pass"))
}

fn check_sparsifier_approx(cfg: &VerifyConfig) -> std::result::Result<String, String> {
    let budget = OracleBudget { max_n: 60, max_k: 2, ..cfg.budget };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x22);
    let trials = cfg.trials.max(8);
    let mut failures = 0usize;
    for t in 0..trials {
        let store = random_small_store(50, &mut rng, cfg.seed + 100 + t as u64);
        let scfg =
            SparsifierConfig::new(1, 64, cfg.seed + 200 + t as u64).map_err(|e| e.to_string())?;
        let mut sp = Sparsifier::new(scfg);
        for id in store.live_ids() {
            sp.insert(&store, id).map_err(|e| e.to_string())?;
        }
        let ids: Vec<PointId> = store.live_ids().collect();
        let (opt, _) = opt_k_exact(&store, &ids, 1, budget).map_err(|e| e.to_string())?;
        let out = sp.output();
        let cost = store.cl(&out, ids.iter().copied()).map_err(|e| e.to_string())?;
        if cost > 4.0 * opt + 1e-9 {
            failures += 1;
        }
    }
    if failures > trials / 8 {
        return Err(format!("{failures}/{trials} instances broke the 4x output bound"));
    }
    Ok(format!("{}/{trials} instances within 4x of optimum", trials - failures))
}

fn check_pipeline_composition(cfg: &VerifyConfig) -> std::result::Result<String, String> {
    for t in 0..cfg.trials {
        let mut stream = SmallStream::new(cfg.seed + 77 * t as u64, 12);
        let pcfg = PipelineConfig::new(Mode::Sparsified, 2, small_bounds(), 16, cfg.seed + t as u64);
        let mut p = Pipeline::new(pcfg).map_err(|e| e.to_string())?;
        for _ in 0..50 {
            // Drive the pipeline with the stream's events but its own store.
            let ev = {
                let del = !stream.live.is_empty()
                    && (stream.live.len() >= 12 || stream.rng.random_bool(0.35));
                if del {
                    let v = stream
                        .live
                        .swap_remove(stream.rng.random_range(0..stream.live.len()));
                    UpdateEvent::delete(v)
                } else {
                    let id = PointId(stream.next);
                    stream.next += 1;
                    stream.live.push(id);
                    let x = grid(stream.rng.random_range(0.0..60.0));
                    let y = grid(stream.rng.random_range(0.0..60.0));
                    UpdateEvent::insert(id, Position::Coords(vec![x, y]))
                }
            };
            p.apply(&ev).map_err(|e| e.to_string())?;
            let s = p.solution().centers;
            let u: BTreeSet<PointId> = p.subspace().into_iter().collect();
            if !s.iter().all(|c| u.contains(c)) {
                return Err("solution escapes the subspace".into());
            }
            if !u.iter().all(|&x| p.store().is_live(x)) {
                return Err("subspace contains dead points".into());
            }
            let ids: Vec<PointId> = p.store().live_ids().collect();
            if ids.is_empty() {
                continue;
            }
            let centers: Vec<PointId> = s.iter().copied().collect();
            if !centers.is_empty() {
                let uvec: Vec<PointId> = u.iter().copied().collect();
                let cl_sv =
                    p.store().cl(&centers, ids.iter().copied()).map_err(|e| e.to_string())?;
                let cl_uv = p.store().cl(&uvec, ids.iter().copied()).map_err(|e| e.to_string())?;
                let cl_su = p.store().cl(&centers, u.iter().copied()).map_err(|e| e.to_string())?;
                if cl_sv > cl_uv + cl_su + 1e-9 {
                    return Err("triangle composition bound broken".into());
                }
            }
            let (opt_v, _) = opt_k_exact(p.store(), &ids, 2, cfg.budget).map_err(|e| e.to_string())?;
            let uvec: Vec<PointId> = u.iter().copied().collect();
            let (opt_u, _) = opt_k_exact(p.store(), &uvec, 2, cfg.budget).map_err(|e| e.to_string())?;
            if opt_u > 2.0 * opt_v + 1e-9 {
                return Err(format!("subspace optimum {opt_u} above twice {opt_v}"));
            }
            let cost = p.measured_cost().map_err(|e| e.to_string())?;
            if cost > 20.0 * opt_v + 1e-9 {
                return Err(format!("composed cost {cost} above 20x optimum {opt_v}"));
            }
        }
    }
    Ok(format!("{} pipelines audited", cfg.trials))
}

fn check_buffered(cfg: &VerifyConfig) -> std::result::Result<String, String> {
    for t in 0..cfg.trials.min(6) {
        let mut stream = SmallStream::new(cfg.seed + 5 * t as u64, 70);
        let pcfg = PipelineConfig::new(
            Mode::Buffered { epsilon: 1.0 },
            1,
            small_bounds(),
            80,
            cfg.seed + t as u64,
        );
        let mut p = Pipeline::new(pcfg).map_err(|e| e.to_string())?;
        let budget = OracleBudget { max_n: 80, max_k: 2, ..cfg.budget };
        let mut lazy_forwarded = 0usize;
        let mut inputs = 0usize;
        for _ in 0..250 {
            let ev = stream.step();
            // Rebuild the event against the pipeline's store.
            let step = p.apply(&ev).map_err(|e| e.to_string())?;
            inputs += 1;
            lazy_forwarded += step.forwarded;
            if step.reset && step.recourse() > 2 * p.config().k {
                return Err("reset reported more than 2k changes".into());
            }
            if !p.solution().centers.iter().all(|&c| p.store().is_live(c)) {
                return Err("reported solution contains dead points".into());
            }
            if stream.live.len() >= 40 {
                let ids: Vec<PointId> = p.store().live_ids().collect();
                let (opt, _) = opt_k_exact(p.store(), &ids, 1, budget).map_err(|e| e.to_string())?;
                let u = p.subspace();
                let cl_uv = p.store().cl(&u, ids.iter().copied()).map_err(|e| e.to_string())?;
                if cl_uv > 4.0 * opt + 1e-9 {
                    return Err(format!("buffered output {cl_uv} above 4x optimum {opt}"));
                }
            }
        }
        if lazy_forwarded > 2 * inputs {
            return Err(format!(
                "lazy forwarding ({lazy_forwarded}) exceeded twice the input length ({inputs})"
            ));
        }
    }
    Ok("buffered wrapper audited".into())
}

fn check_mu_claims(cfg: &VerifyConfig) -> std::result::Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x33);
    for t in 0..cfg.trials {
        let n = rng.random_range(6..=10);
        let k = rng.random_range(1..=3);
        let store = random_small_store(n, &mut rng, cfg.seed + 300 + t as u64);
        let ids: Vec<PointId> = store.live_ids().collect();
        let (opt, _) = opt_k_exact(&store, &ids, k, cfg.budget).map_err(|e| e.to_string())?;
        let mu_full = mu_k_beta(&store, &ids, k, 1.0, cfg.budget).map_err(|e| e.to_string())?;
        if mu_full > 2.0 * opt + 1e-9 {
            return Err(format!("mu {mu_full} above 2x optimum {opt}"));
        }
        let w: Vec<PointId> = ids.iter().copied().filter(|_| rng.random_bool(0.7)).collect();
        if !w.is_empty() {
            let mu_w = mu_k_beta(&store, &w, k, 1.0, cfg.budget).map_err(|e| e.to_string())?;
            if mu_w > mu_full + 1e-12 {
                return Err("mu grew on a subset".into());
            }
        }
        // Quarter-perturbed sets keep the half-cover bound.
        let drop = (ids.len() / 4).min(2);
        let w2: Vec<PointId> = ids.iter().copied().skip(drop).collect();
        let mu_half =
            mu_k_beta(&store, &w2, k, 0.5, cfg.budget).map_err(|e| e.to_string())?;
        if mu_half > mu_full + 1e-12 {
            return Err(format!("half-cover bound {mu_half} above full bound {mu_full}"));
        }
    }
    Ok(format!("{} instances checked", cfg.trials))
}

fn check_lazy_updates(cfg: &VerifyConfig) -> std::result::Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x44);
    for t in 0..cfg.trials {
        let n = rng.random_range(7..=11);
        let store = random_small_store(n, &mut rng, cfg.seed + 400 + t as u64);
        let ids: Vec<PointId> = store.live_ids().collect();
        let k = rng.random_range(1..=2);
        let s = rng.random_range(1..=2usize);
        // V' differs from V in at most s points (drop s of them).
        let vprime: Vec<PointId> = ids.iter().copied().skip(s).collect();
        let (lhs, _) = opt_k_exact(&store, &ids, k + s, cfg.budget).map_err(|e| e.to_string())?;
        let (rhs, _) = opt_k_exact(&store, &vprime, k, cfg.budget).map_err(|e| e.to_string())?;
        if lhs > rhs + 1e-9 {
            return Err(format!("lazy-updates bound broken: {lhs} > {rhs}"));
        }
    }
    Ok(format!("{} instances checked", cfg.trials))
}

fn check_subset_opt(cfg: &VerifyConfig) -> std::result::Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x55);
    for t in 0..cfg.trials {
        let n = rng.random_range(6..=11);
        let store = random_small_store(n, &mut rng, cfg.seed + 500 + t as u64);
        let ids: Vec<PointId> = store.live_ids().collect();
        let k = rng.random_range(1..=3);
        let (opt_v, _) = opt_k_exact(&store, &ids, k, cfg.budget).map_err(|e| e.to_string())?;
        for _ in 0..4 {
            let w: Vec<PointId> = ids.iter().copied().filter(|_| rng.random_bool(0.6)).collect();
            if w.is_empty() {
                continue;
            }
            let (opt_w, _) = opt_k_exact(&store, &w, k, cfg.budget).map_err(|e| e.to_string())?;
            if opt_w > 2.0 * opt_v + 1e-9 {
                return Err(format!("subset optimum {opt_w} above twice {opt_v}"));
            }
        }
    }
    Ok(format!("{} instances checked", cfg.trials))
}
