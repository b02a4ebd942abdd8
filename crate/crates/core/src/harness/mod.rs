//! Seeded experiment runner and result aggregation.
//!
//! An [`ExperimentSpec`] expands into grid cells (degree × sampling rate for
//! synthetic models, sampling rate for datasets). Every (cell, replication)
//! task draws its own network and sample from a seed derived from
//! `(base_seed, cell, replication)`, fits all requested methods on that same
//! sample, and emits one [`ResultRow`] per method. Tasks may run in
//! parallel; rows are always emitted in (cell, replication, method) order.

mod run;
mod spec;
mod summary;

pub use run::{derive_seed, read_results_csv, run_experiment, write_results_csv, ResultRow};
pub use spec::{DataSource, ExperimentSpec, Method, Regime, SamplingSpec};
pub use summary::{summarize, write_summary_csv, SummaryRow};
