//! Execution backends: exact click-pattern distributions and a Monte Carlo
//! sampler of per-trial detector records.

mod detector;
mod exact;
mod mc;

pub use detector::{ClickSet, DetectorSpec};
pub use exact::{outcome_distribution, OutcomeDistribution};
pub use mc::{
    coincidences, derive_seed, sample_recorded, sample_recorded_where, sample_trials, with_workers, write_trial_log, TrialClock,
    TrialOutcome,
};
