//! On instances small enough for exhaustive search, compare the dynamic
//! solution against the exact optimum and the farthest-first baseline at
//! every step.

use kcenter::metric::{MetricBounds, MetricView, PointId, Position, UpdateEvent};
use kcenter::oracles::{gonzalez, opt_k_exact, OracleBudget};
use kcenter::pipeline::{Mode, Pipeline, PipelineConfig};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> kcenter::Result<()> {
    let bounds = MetricBounds::new(0.25, 300.0)?;
    let budget = OracleBudget::default();
    let k = 3;
    let cfg = PipelineConfig::new(Mode::Direct, k, bounds, 14, 17);
    let mut pipeline = Pipeline::new(cfg)?;

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut live: Vec<PointId> = Vec::new();
    let mut next = 0u64;
    let mut worst_ratio = 0.0f64;
    let mut worst_gonzalez = 0.0f64;

    println!("{:>4} {:>4} {:>9} {:>9} {:>9} {:>7}", "t", "|V|", "cost", "optimum", "baseline", "ratio");
    for t in 0..60 {
        let delete = !live.is_empty() && (live.len() >= 12 || rng.random_bool(0.3));
        let ev = if delete {
            UpdateEvent::delete(live.swap_remove(rng.random_range(0..live.len())))
        } else {
            let id = PointId(next);
            next += 1;
            live.push(id);
            let x = (rng.random_range(0.0..60.0f64) / 0.25).round() * 0.25;
            let y = (rng.random_range(0.0..60.0f64) / 0.25).round() * 0.25;
            UpdateEvent::insert(id, Position::Coords(vec![x, y]))
        };
        pipeline.apply(&ev)?;
        let store: &MetricView = pipeline.store();
        let ids: Vec<PointId> = store.live_ids().collect();
        if ids.is_empty() {
            continue;
        }
        let (opt, _witness) = opt_k_exact(store, &ids, k, budget)?;
        let baseline = {
            let g = gonzalez(store, &ids, k, ids[0])?;
            store.cl(&g, ids.iter().copied())?
        };
        let cost = pipeline.measured_cost()?;
        assert!(cost <= 8.0 * opt + 1e-9, "never more than 8x the optimum");
        assert!(baseline <= 2.0 * opt + 1e-9, "farthest-first stays 2x");
        if opt > 0.0 {
            worst_ratio = worst_ratio.max(cost / opt);
            worst_gonzalez = worst_gonzalez.max(baseline / opt);
        }
        if t % 6 == 0 {
            println!(
                "{:>4} {:>4} {:>9.3} {:>9.3} {:>9.3} {:>7.3}",
                t,
                ids.len(),
                cost,
                opt,
                baseline,
                if opt > 0.0 { cost / opt } else { 0.0 }
            );
        }
    }
    println!("\nworst dynamic/optimum ratio: {worst_ratio:.3} (bound 8)");
    println!("worst farthest-first/optimum ratio: {worst_gonzalez:.3} (bound 2)");
    Ok(())
}
