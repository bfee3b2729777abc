//! Episode execution, the hindsight benchmark, regret, experiment
//! configuration and result emission.

pub mod benchmark;
pub mod config;
pub mod env;
pub mod episode;
pub mod experiment;
pub mod plot;
pub mod policy;
pub mod regret;
pub mod rng;
pub mod scenario;
pub mod verify;

pub use benchmark::{best_fixed_in_hindsight, ArrivalWeights, Benchmark, Hindsight};
pub use config::{ExperimentConfig, Seeds};
pub use env::{Environment, Outcome};
pub use episode::{run_episode, RoundRecord, Trace};
pub use experiment::{bench, run_scenario, run_seeds, BenchRow, BenchSummary, RegretBasis, RunRecord};
pub use policy::{Feedback, Policy, PolicySpec};
pub use regret::{compute_regret, fit_slope, mean_stderr, sample_schedule, CurvePoint};
pub use rng::{stream, Stream};
pub use scenario::{InstanceSource, MenuKind, MenuSpec, Scenario};
