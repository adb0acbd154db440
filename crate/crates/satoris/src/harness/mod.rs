//! Benchmark harness: dataset ingestion, grid execution over
//! days x methods x missingness x trials, result persistence and summaries.

pub mod config;
pub mod data;
pub mod records;
pub mod run;
pub mod seeds;
pub mod spec;
pub mod summary;
pub mod synth;

pub use config::load_config;
pub use data::load_dataset;
pub use records::{AggregateRow, CellRecord, TimingRecord};
pub use run::{run, run_with_jobs, run_with_registry, ExperimentResult};
pub use spec::{DatasetSource, ExperimentSpec, MethodSpec};
pub use summary::{summarize, SummaryFormat};
pub use synth::{generate_synthetic_days, SyntheticGenerator};
