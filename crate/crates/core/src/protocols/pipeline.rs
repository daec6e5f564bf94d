//! Building blocks shared by the protocol runners: detector layouts, the
//! optical front ends, and exact/sampled measurement blocks.

use rayon::prelude::*;
use serde::Serialize;

use super::config::{EngineKind, ExperimentConfig, Protocol, RecordTrigger};
use crate::engines::{
    derive_seed, outcome_distribution, sample_recorded_where, ClickSet, DetectorSpec, OutcomeDistribution,
    TrialClock, TrialOutcome,
};
use crate::error::Result;
use crate::hilbert::{Arm, JointKet, Mode, Pol, Port};
use crate::optics::{analyzer_map, half_wave_45, pbs, quarter_wave, AnalyzerSetting, Convention};
use crate::source::{evolve_larmor, noisy_branches, retrieve_with, Residual, SourceParams};

pub(crate) const P1: Mode = Mode::PbsOut(Port::One);
pub(crate) const P2: Mode = Mode::PbsOut(Port::Two);
pub(crate) const AS1: Mode = Mode::AntiStokes(Arm::A1);
pub(crate) const AS2: Mode = Mode::AntiStokes(Arm::A2);

/// Photons 1–4 of the four-photon experiments.
pub(crate) const PHOTONS: [Mode; 4] = [P1, P2, AS1, AS2];

fn pair_ids(arm: Arm) -> [String; 4] {
    let i = arm.index() + 1;
    [format!("D_HS{i}"), format!("D_VS{i}"), format!("D_HAS{i}"), format!("D_VAS{i}")]
}

fn photon_ids(n: usize) -> [String; 2] {
    [format!("D_H{n}"), format!("D_V{n}")]
}

/// Detector ids a protocol declares, in engine order.
pub fn detector_ids(protocol: Protocol) -> Vec<String> {
    match protocol {
        Protocol::Pair => Arm::ALL.iter().flat_map(|&a| pair_ids(a)).collect(),
        Protocol::Ghz3 | Protocol::Swap => (1..=4).flat_map(photon_ids).collect(),
    }
}

fn spec(cfg: &ExperimentConfig, id: &str, mode: Mode, pol: Pol, scale: f64) -> DetectorSpec {
    DetectorSpec::new(id, mode, pol, cfg.detectors.efficiency_of(id) * scale)
        .with_dark_count(cfg.detectors.dark_count)
        .number_resolving(cfg.detectors.number_resolving)
}

/// `D_HSi, D_VSi` on the Stokes mode and `D_HASi, D_VASi` on the anti-Stokes
/// mode. Retrieval efficiency is folded into the anti-Stokes detectors.
pub(crate) fn pair_detectors(cfg: &ExperimentConfig, params: &SourceParams, arm: Arm) -> Vec<DetectorSpec> {
    let ids = pair_ids(arm);
    let r = params.retrieval_eff[arm];
    vec![
        spec(cfg, &ids[0], Mode::Stokes(arm), Pol::H, 1.0),
        spec(cfg, &ids[1], Mode::Stokes(arm), Pol::V, 1.0),
        spec(cfg, &ids[2], Mode::AntiStokes(arm), Pol::H, r),
        spec(cfg, &ids[3], Mode::AntiStokes(arm), Pol::V, r),
    ]
}

/// `D_Hn, D_Vn` for photons 1–4; indices `2(n−1)` and `2(n−1)+1`.
pub(crate) fn four_photon_detectors(cfg: &ExperimentConfig, params: &SourceParams) -> Vec<DetectorSpec> {
    PHOTONS
        .iter()
        .enumerate()
        .flat_map(|(i, &mode)| {
            let ids = photon_ids(i + 1);
            let scale = match mode {
                Mode::AntiStokes(arm) => params.retrieval_eff[arm],
                _ => 1.0,
            };
            [
                spec(cfg, &ids[0], mode, Pol::H, scale),
                spec(cfg, &ids[1], mode, Pol::V, scale),
            ]
        })
        .collect()
}

/// +1 or −1 when exactly one of the two detectors clicked.
pub(crate) fn single_click(set: &ClickSet, plus: usize, minus: usize) -> Option<i8> {
    match (set.clicked(plus), set.clicked(minus)) {
        (true, false) => Some(1),
        (false, true) => Some(-1),
        _ => None,
    }
}

pub(crate) fn any_click(set: &ClickSet, a: usize, b: usize) -> bool {
    set.clicked(a) || set.clicked(b)
}

/// Stokes plate, storage, retrieval (kept residual) and anti-Stokes plate
/// for one arm.
pub(crate) fn arm_front(params: &SourceParams, arm: Arm, ket: &JointKet) -> Result<JointKet> {
    let k = ket.apply_map(&quarter_wave(Mode::Stokes(arm), Convention::Stokes))?;
    let k = evolve_larmor(&k, params)?;
    let k = retrieve_with(&k, arm, params, 1.0, Residual::Keep)?;
    k.apply_map(&quarter_wave(Mode::AntiStokes(arm), Convention::AntiStokes))
}

/// Product of the per-arm noise branches.
pub(crate) fn two_arm_branches(params: &SourceParams) -> Result<Vec<(f64, JointKet)>> {
    let b1 = noisy_branches(params, Arm::A1);
    let b2 = noisy_branches(params, Arm::A2);
    let mut out = Vec::with_capacity(b1.len() * b2.len());
    for (w1, k1) in &b1 {
        for (w2, k2) in &b2 {
            out.push((w1 * w2, k1.tensor(k2)?));
        }
    }
    Ok(out)
}

/// Stokes plates, the beam splitter overlapping both Stokes modes, and
/// half-wave plates on the listed output ports.
pub(crate) fn interfere(ket: &JointKet, half_waves: &[Mode]) -> Result<JointKet> {
    let mut k = ket.apply_map(&quarter_wave(Mode::Stokes(Arm::A1), Convention::Stokes))?;
    k = k.apply_map(&quarter_wave(Mode::Stokes(Arm::A2), Convention::Stokes))?;
    k = k.apply_map(&pbs(Mode::Stokes(Arm::A1), Mode::Stokes(Arm::A2), P1, P2)?)?;
    for &m in half_waves {
        k = k.apply_map(&half_wave_45(m))?;
    }
    Ok(k)
}

/// Storage, retrieval of both arms and the anti-Stokes plates.
pub(crate) fn read_out(params: &SourceParams, ket: &JointKet) -> Result<JointKet> {
    let mut k = evolve_larmor(ket, params)?;
    for arm in Arm::ALL {
        k = retrieve_with(&k, arm, params, 1.0, Residual::Keep)?;
        k = k.apply_map(&quarter_wave(Mode::AntiStokes(arm), Convention::AntiStokes))?;
    }
    Ok(k)
}

/// Click distribution of the branch mixture with analyzers in place.
pub(crate) fn mixed_distribution(
    branches: &[(f64, JointKet)],
    settings: &[AnalyzerSetting],
    detectors: &[DetectorSpec],
) -> Result<OutcomeDistribution> {
    let parts: Vec<(f64, OutcomeDistribution)> = branches
        .par_iter()
        .map(|(w, ket)| {
            let mut k = ket.clone();
            for s in settings {
                k = k.apply_map(&analyzer_map(s))?;
            }
            Ok((*w, outcome_distribution(&k, detectors)?))
        })
        .collect::<Result<_>>()?;
    OutcomeDistribution::mixture(&parts)
}

/// Per-block Monte Carlo bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSummary {
    pub name: String,
    pub recorded: u64,
    /// Index of the last recorded trial, i.e. trials spanned minus one.
    pub last_trial_index: u64,
    /// Per-trial probability that the record trigger fires.
    pub record_probability: f64,
    /// Total variation distance between recorded frequencies and the exact
    /// distribution under the same trigger.
    pub tvd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub record: RecordTrigger,
    pub trials_per_block: u64,
    pub max_tvd: f64,
    pub blocks: Vec<BlockSummary>,
}

impl McSummary {
    pub(crate) fn from_blocks(cfg: &ExperimentConfig, blocks: &[Block]) -> Option<Self> {
        let summaries: Vec<BlockSummary> = blocks.iter().filter_map(|b| b.summary.clone()).collect();
        if summaries.is_empty() {
            return None;
        }
        Some(McSummary {
            record: cfg.mc_record,
            trials_per_block: cfg.mc_trials,
            max_tvd: summaries.iter().map(|s| s.tvd).fold(0.0, f64::max),
            blocks: summaries,
        })
    }
}

/// Recorded trials of one measurement block.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialLog {
    pub name: String,
    pub detectors: Vec<String>,
    pub outcomes: Vec<TrialOutcome>,
}

/// One analyzer setting: its exact distribution and, for the MC engine,
/// the recorded trials.
pub(crate) struct Block {
    pub exact: OutcomeDistribution,
    pub samples: Option<TrialLog>,
    pub summary: Option<BlockSummary>,
}

impl Block {
    pub(crate) fn measure(
        cfg: &ExperimentConfig,
        tau_ns: f64,
        index: u64,
        name: String,
        exact: OutcomeDistribution,
        clock: &TrialClock,
        coincidence: impl Fn(&ClickSet) -> bool,
    ) -> Result<Block> {
        if cfg.engine == EngineKind::Exact {
            return Ok(Block {
                exact,
                samples: None,
                summary: None,
            });
        }
        let trigger = |s: &ClickSet| match cfg.mc_record {
            RecordTrigger::Coincidence => coincidence(s),
            RecordTrigger::AnyClick => !s.is_empty(),
        };
        let seed = derive_seed(derive_seed(cfg.seed, tau_ns.to_bits()), index);
        let outcomes = sample_recorded_where(&exact, cfg.mc_trials, seed, clock, trigger)?;
        let empirical = OutcomeDistribution::empirical(exact.detectors().to_vec(), outcomes.iter().map(|o| &o.clicks))?;
        let summary = BlockSummary {
            name: name.clone(),
            recorded: outcomes.len() as u64,
            last_trial_index: outcomes.last().map_or(0, |o| o.trial_index),
            record_probability: exact.p_where(trigger),
            tvd: empirical.total_variation(&exact.conditioned(trigger)?),
        };
        Ok(Block {
            samples: Some(TrialLog {
                name,
                detectors: exact.detectors().to_vec(),
                outcomes,
            }),
            exact,
            summary: Some(summary),
        })
    }

    /// Counts (MC) or probabilities (exact) per category.
    pub(crate) fn tally(&self, categories: usize, classify: impl Fn(&ClickSet) -> Option<usize>) -> Vec<f64> {
        let mut out = vec![0.0; categories];
        match &self.samples {
            Some(log) => {
                for o in &log.outcomes {
                    if let Some(i) = classify(&o.clicks) {
                        out[i] += 1.0;
                    }
                }
            }
            None => {
                for (s, p) in self.exact.entries() {
                    if let Some(i) = classify(s) {
                        out[i] += p;
                    }
                }
            }
        }
        out
    }

    /// Exact per-trial probability of the categorized events.
    pub(crate) fn exact_probability(&self, classify: impl Fn(&ClickSet) -> bool) -> f64 {
        self.exact.p_where(classify)
    }

    pub(crate) fn is_exact(&self) -> bool {
        self.samples.is_none()
    }
}

/// Formats an angle for block names without trailing zeros.
pub(crate) fn angle_tag(theta: f64) -> String {
    format!("{theta}")
}
