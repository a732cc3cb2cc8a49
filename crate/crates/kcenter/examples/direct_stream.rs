//! Run the nested threshold structure directly on a blob stream and watch
//! cost, certificate and recourse evolve.

use kcenter::pipeline::{Mode, Pipeline, PipelineConfig};
use kcenter::stream::{GeneratorKind, StreamSpec};

fn main() -> kcenter::Result<()> {
    let k = 8;
    let spec = StreamSpec::new(GeneratorKind::GaussianBlobs { clusters: k }, 1_000, 6_000, 42);
    let events = spec.events()?;

    let cfg = PipelineConfig::new(Mode::Direct, k, spec.bounds(), 1_000, 7);
    let mut pipeline = Pipeline::new(cfg)?;

    let mut recourse = 0usize;
    for (t, ev) in events.iter().enumerate() {
        let step = pipeline.apply(ev)?;
        recourse += step.recourse();
        if (t + 1) % 1_000 == 0 {
            let cost = pipeline.measured_cost()?;
            let sol = pipeline.solution();
            println!(
                "t={:>5}  |V|={:>4}  level={:>2}  cost={:>8.3}  certificate={:>8.3}  cum recourse={}",
                t + 1,
                step.v_size,
                sol.level,
                cost,
                sol.cost_upper,
                recourse
            );
            assert!(cost <= sol.cost_upper + 1e-9);
        }
    }

    let report = pipeline.report()?;
    println!(
        "\n{} updates, amortized recourse {:.3}, final cost {:.3} with {} centers",
        report.total_updates,
        report.reported_recourse as f64 / report.total_updates as f64,
        report.cost,
        report.solution.centers.len()
    );
    Ok(())
}
