//! Inspect the sparsifier's internals: layer sizes decaying by a quarter,
//! staleness counters, rebuild events, and the size of the maintained
//! output subset.

use kcenter::metric::{MetricView, PointId};
use kcenter::sparsifier::{Sparsifier, SparsifierConfig};
use kcenter::stream::{GeneratorKind, StreamSpec};

fn main() -> kcenter::Result<()> {
    let k = 4;
    let n = 4_096;
    let spec = StreamSpec::new(GeneratorKind::UniformBox, n, 2 * n, 33);
    let events = spec.events()?;

    let mut store = MetricView::euclidean(spec.bounds(), 1);
    let cfg = SparsifierConfig::new(k, n, 55)?;
    println!("k={k}, rebuild boost: {} trials per layer, stop at {} points\n", cfg.boost_m(), cfg.stop_threshold());
    let mut sp = Sparsifier::new(cfg);

    let mut rebuilds_from_one = 0usize;
    let mut deepest = 0usize;
    for (t, ev) in events.iter().enumerate() {
        store.apply(ev)?;
        let step = match ev.kind {
            kcenter::metric::EventKind::Insert => sp.insert(&store, ev.id)?,
            kcenter::metric::EventKind::Delete => sp.delete(&store, ev.id)?,
        };
        deepest = deepest.max(sp.ell());
        if let Some(r) = step.reconstruct {
            if r.rebuilt_from == 1 {
                rebuilds_from_one += 1;
                let sizes: Vec<usize> = (1..=sp.ell()).map(|i| sp.layer_size(i)).collect();
                println!("t={t:>5}: full rebuild -> {} layers, sizes {sizes:?}", r.ell);
            }
        }
    }

    let ell = sp.ell();
    println!("\nfinal state: {} live points, {} layers (deepest seen {deepest})", sp.len(), ell);
    for i in 1..=ell {
        let centers = if i < ell { sp.layer_centers(i).len() } else { 0 };
        println!(
            "  layer {i:>2}: |U_{i}|={:>5}  centers={:>3}  updates since rebuild={}",
            sp.layer_size(i),
            centers,
            sp.count(i)
        );
    }
    let out: Vec<PointId> = sp.output();
    println!(
        "\noutput subset: {} points (bottom {} + centers), vs {} live",
        out.len(),
        sp.layer_size(ell),
        sp.len()
    );
    println!("{rebuilds_from_one} full rebuilds over {} updates", events.len());

    // The output really is a subset of the live points.
    assert!(out.iter().all(|&p| store.is_live(p)));
    Ok(())
}
