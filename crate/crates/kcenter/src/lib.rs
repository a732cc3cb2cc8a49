//! Fully dynamic metric k-center with bounded recourse.
//!
//! The crate maintains a set of at most k centers of a point set evolving
//! under insertions and deletions, keeping the clustering cost within a
//! constant factor of the optimum while changing only O(1) centers per
//! update on average. Three pipelines are available:
//!
//! - **direct** — the nested threshold-level structure alone: a chain of
//!   maximal independent sets over geometrically growing distance
//!   thresholds, read off at the first level that fits inside k
//!   ([`nested::NestedKCenter`]). 8-approximate.
//! - **sparsified** — a sampling [`sparsifier::Sparsifier`] first shrinks
//!   the space to O(k log(n/k)) points, and the nested structure runs on
//!   that subset ([`pipeline::Pipeline`]). 20-approximate w.h.p., with
//!   per-update work polylogarithmic in n.
//! - **buffered** — the sparsifier is wrapped in lazy epochs
//!   ([`buffered::BufferedSparsifier`]) so the composed solution changes
//!   by at most 8 + epsilon centers per update on average.
//!
//! [`oracles`] holds brute-force references (exact optimum, greedy MIS,
//! farthest-first traversal, cluster-diameter bounds, a static sampling
//! pass) used by the test suites and by `kcenter verify`; [`stream`] and
//! [`bench`] drive reproducible benchmark runs from seeded generators or
//! stream files.
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --release --example direct_stream
//! cargo run --release --example sparsified_pipeline
//! cargo run --release --example buffered_recourse
//! cargo run --release --example mis_maintenance
//! cargo run --release --example oracle_cross_checks
//! cargo run --release --example sparsifier_layers
//! cargo run --release --example stream_files
//! ```

pub mod bench;
pub mod buffered;
pub mod error;
pub mod metric;
pub mod mis;
pub mod nested;
pub mod oracles;
pub mod pipeline;
pub mod sparsifier;
pub mod stream;
pub mod verify;

pub use error::{Error, Result};
pub use metric::{MetricBounds, MetricView, PointId, Position, UpdateEvent};
pub use nested::{LevelConfig, NestedKCenter, Solution};
pub use pipeline::{Mode, Pipeline, PipelineConfig};
pub use sparsifier::{Sparsifier, SparsifierConfig};
