//! Shared fixtures for the criterion benches.

use apsim_core::protocols::{EngineKind, ExperimentConfig, Protocol};

/// Default config for `protocol` on the sampling engine.
pub fn mc_config(protocol: Protocol, trials: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(protocol);
    cfg.engine = EngineKind::Mc;
    cfg.mc_trials = trials;
    cfg.seed = 1;
    cfg
}
