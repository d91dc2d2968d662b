//! Metrics, CSV output and experiment drivers.

pub mod experiment;
pub mod metrics;
pub mod record;

pub use experiment::{compare, run_experiment, seed_sweep, simulate, staleness_sweep, RunOutput, Summary, TickRecord};
pub use metrics::{avg_latency, jitter, utilization, JitterTracker};
pub use record::{read_csv, write_csv, EpisodeRecord, MetricsRecord};
