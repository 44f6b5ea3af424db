//! Monte-Carlo experiments on the scaled occupation time at the origin.

mod advisor;
mod compare;
mod experiment;
mod mdc;
mod probe;
pub mod stats;
mod sweep;

pub use advisor::{finite_size_advisor, forward_event_estimate, AdvisorReport, ForwardCap};
pub use compare::{compare_covariance, limit_kind_for, CovComparison, CovEntry};
pub use experiment::{run_clt_experiment, Engine, ExperimentConfig, RunResult, DEFAULT_BUDGET};
pub use mdc::{martingale_decomposition_check, MdcConfig, MdcReport, TRUNCATION};
pub use probe::{conjecture_probe_d2, ProbeConfig, ProbeReport, TailPoint, PROBE_LABEL};
pub use stats::{normality_test, NormalityReport};
pub use sweep::{variance_scaling_sweep, SweepConfig, SweepPoint, SweepReport, VarianceEstimator};
