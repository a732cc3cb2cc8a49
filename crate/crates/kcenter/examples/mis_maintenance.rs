//! Maintain a maximal independent set of a vertex-dynamic graph and check
//! it against a scratch greedy recomputation after every update.
//!
//! The graph is an arbitrary topology realized as a threshold graph:
//! edges at distance 1, non-edges at distance 2, threshold 1.

use std::collections::BTreeSet;

use kcenter::metric::{DistanceMode, MatrixMetric, MetricBounds, MetricView, PointId, Position};
use kcenter::mis::DynMis;
use kcenter::oracles::{greedy_mis, OracleBudget};
use kcenter::stream::uniform_graph_matrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> kcenter::Result<()> {
    let rows = 48;
    let matrix = MatrixMetric::new(uniform_graph_matrix(rows, 0.18, 11))?;
    let mut store = MetricView::new(
        DistanceMode::Matrix(matrix),
        MetricBounds::new(1.0, 2.0)?,
        99,
    );
    let mut mis = DynMis::new(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut live: Vec<PointId> = Vec::new();
    let mut next = 0u64;

    let updates = 10_000;
    let mut total_changes = 0usize;
    let mut histogram = [0usize; 6];
    for t in 0..updates {
        let delete = !live.is_empty() && (live.len() >= rows || rng.random_bool(0.5));
        let change = if delete {
            let v = live.swap_remove(rng.random_range(0..live.len()));
            store.delete(v)?;
            mis.delete_vertex(&store, v)?
        } else {
            let id = PointId(next);
            next += 1;
            store.insert(id, Position::Row(rng.random_range(0..rows)))?;
            live.push(id);
            mis.insert_vertex(&store, id)?
        };
        total_changes += change.len();
        histogram[change.len().min(5)] += 1;

        if t % 500 == 0 {
            let verts: Vec<(PointId, f64)> = mis
                .vertex_ids()
                .into_iter()
                .map(|id| (id, store.record_any(id).unwrap().priority))
                .collect();
            let oracle = greedy_mis(&verts, |a, b| store.dist_is_edge(a, b), OracleBudget::default())?;
            let got: BTreeSet<PointId> = mis.members().into_iter().collect();
            assert_eq!(got, oracle, "drifted from the greedy oracle");
        }
    }

    println!("{updates} vertex updates, mean recourse {:.4}", total_changes as f64 / updates as f64);
    println!("recourse histogram (|changes| -> count):");
    for (size, count) in histogram.iter().enumerate() {
        let label = if size == 5 { "5+".to_string() } else { size.to_string() };
        println!("  {label:>2}: {count}");
    }
    println!("current MIS has {} members over {} vertices", mis.len(), mis.vertex_count());
    Ok(())
}

trait EdgeProbe {
    fn dist_is_edge(&self, a: PointId, b: PointId) -> bool;
}

impl EdgeProbe for MetricView {
    fn dist_is_edge(&self, a: PointId, b: PointId) -> bool {
        self.distance(a, b).map(|d| d <= 1.0).unwrap_or(false)
    }
}
