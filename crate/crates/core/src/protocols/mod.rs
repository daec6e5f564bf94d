//! Experiment configuration and the three measurement protocols.

mod config;
mod ghz;
mod pair;
mod pipeline;
mod rates;
mod swap;
mod timing;

use serde::Serialize;

pub use config::{
    DetectorConfig, EngineKind, ExperimentConfig, LevelsConfig, Protocol, RecordTrigger, SourceConfig,
    CANONICAL_GRID, SWAP_GRID,
};
pub use ghz::{run_ghz, GhzReport, GhzSettingCounts, GHZ_SETTINGS};
pub use pair::{run_pair, PairArmResult, PairReport};
pub use pipeline::{detector_ids, BlockSummary, McSummary, TrialLog};
pub use rates::{pair_rate, swap_success_probability};
pub use swap::{decompose, run_swap, SwapDecomposition, SwapReport};
pub use timing::{trials_per_second, TimingSequence};

use crate::error::Result;

/// Result of one protocol at one storage time.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ProtocolReport {
    Pair(PairReport),
    Ghz3(GhzReport),
    Swap(SwapReport),
}

impl ProtocolReport {
    pub fn tau_ns(&self) -> f64 {
        match self {
            ProtocolReport::Pair(r) => r.tau_ns,
            ProtocolReport::Ghz3(r) => r.tau_ns,
            ProtocolReport::Swap(r) => r.tau_ns,
        }
    }

    pub fn trial_logs(&self) -> &[TrialLog] {
        match self {
            ProtocolReport::Pair(r) => &r.trial_logs,
            ProtocolReport::Ghz3(r) => &r.trial_logs,
            ProtocolReport::Swap(r) => &r.trial_logs,
        }
    }

    pub fn mc(&self) -> Option<&McSummary> {
        match self {
            ProtocolReport::Pair(r) => r.mc.as_ref(),
            ProtocolReport::Ghz3(r) => r.mc.as_ref(),
            ProtocolReport::Swap(r) => r.mc.as_ref(),
        }
    }
}

/// Runs `cfg.protocol` at one storage time.
pub fn run_at(cfg: &ExperimentConfig, tau_ns: f64) -> Result<ProtocolReport> {
    Ok(match cfg.protocol {
        Protocol::Pair => ProtocolReport::Pair(run_pair(cfg, tau_ns)?),
        Protocol::Ghz3 => ProtocolReport::Ghz3(run_ghz(cfg, tau_ns)?),
        Protocol::Swap => ProtocolReport::Swap(run_swap(cfg, tau_ns)?),
    })
}

/// Runs `cfg.protocol` at every configured storage time.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ProtocolReport>> {
    cfg.validate()?;
    cfg.taus.iter().map(|&t| run_at(cfg, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn ideal_pair_reaches_tsirelson() {
        let r = run_pair(&ExperimentConfig::ideal(Protocol::Pair), 0.0).unwrap();
        for a in &r.arms {
            assert!((a.chsh.value - 2.0 * SQRT_2).abs() < 1e-9);
            assert!(a.chsh.sigma_violation.is_none());
        }
    }

    #[test]
    fn ideal_ghz_statistics() {
        let r = run_ghz(&ExperimentConfig::ideal(Protocol::Ghz3), 0.0).unwrap();
        assert!(r.heralded);
        assert!((r.witness.unwrap().value + 1.0).abs() < 1e-9);
        assert!((r.mermin.unwrap().value - 4.0).abs() < 1e-9);
    }

    #[test]
    fn swap_heralds_agree() {
        let r = run_swap(&ExperimentConfig::new(Protocol::Swap), 30.0).unwrap();
        let (hh, vv) = (&r.decomposition[0], &r.decomposition[1]);
        assert!((hh.entangled_fraction - 0.5).abs() < 1e-9);
        assert!((hh.fidelity_plus - vv.fidelity_plus).abs() < 1e-12);
        assert!(r.chsh.value > 2.8);
    }

    #[test]
    fn protocol_mismatch_rejected() {
        let c = ExperimentConfig::new(Protocol::Pair);
        assert!(run_ghz(&c, 30.0).is_err());
        assert!(run_swap(&c, 30.0).is_err());
    }

    #[test]
    fn zero_efficiency_has_no_coincidences() {
        let mut c = ExperimentConfig::new(Protocol::Pair);
        c.detectors.efficiency = 0.0;
        assert!(run_pair(&c, 30.0).is_err());
    }

    #[test]
    fn mc_summary_present_only_for_mc() {
        let mut c = ExperimentConfig::new(Protocol::Pair);
        c.mc_trials = 2_000;
        assert!(run_at(&c, 30.0).unwrap().mc().is_none());
        c.engine = EngineKind::Mc;
        let r = run_at(&c, 30.0).unwrap();
        assert_eq!(r.mc().unwrap().blocks.len(), 8);
        assert_eq!(r.trial_logs().len(), 8);
        assert!(r.trial_logs().iter().all(|l| l.outcomes.len() == 2_000));
    }
}
