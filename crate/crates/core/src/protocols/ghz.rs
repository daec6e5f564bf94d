use serde::Serialize;

use super::config::{EngineKind, ExperimentConfig, Protocol};
use super::pipeline::{
    any_click, four_photon_detectors, interfere, mixed_distribution, read_out, single_click, two_arm_branches,
    Block, McSummary, TrialLog, P1, PHOTONS,
};
use super::timing::trials_per_second;
use crate::analysis::{ghz_witness, mermin, Expectation, MerminInputs, MerminResult, WitnessInputs, WitnessResult};
use crate::engines::ClickSet;
use crate::error::{Error, Result};
use crate::optics::{AnalyzerKind, AnalyzerSetting};

/// Pauli settings on photons 2, 3, 4.
pub const GHZ_SETTINGS: [&str; 5] = ["zzz", "xxx", "yyx", "yxy", "xyy"];

/// Fourfold counts for one setting, split by herald outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GhzSettingCounts {
    pub setting: String,
    /// Indexed by the outcome bits of photons 2, 3, 4 (bit set = −1),
    /// photon 2 most significant.
    pub herald_h: Vec<f64>,
    pub herald_v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GhzReport {
    pub tau_ns: f64,
    pub engine: EngineKind,
    pub trials_per_second: u64,
    /// Exact per-trial probability of a `D_H1` herald with one click on
    /// each of photons 2–4.
    pub herald_probability: f64,
    /// False when some setting saw no heralded fourfold.
    pub heralded: bool,
    pub counts: Vec<GhzSettingCounts>,
    pub witness: Option<WitnessResult>,
    pub mermin: Option<MerminResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSummary>,
    #[serde(skip)]
    pub trial_logs: Vec<TrialLog>,
}

fn settings_for(name: &str) -> Result<Vec<AnalyzerSetting>> {
    name.chars()
        .zip(&PHOTONS[1..])
        .map(|(ch, &mode)| Ok(AnalyzerSetting::pauli(mode, AnalyzerKind::from_letter(ch)?)))
        .collect()
}

/// Herald (0 for `D_H1`, 1 for `D_V1`) times 8 plus the outcome bits.
fn classify(s: &ClickSet) -> Option<usize> {
    let h = match single_click(s, 0, 1)? {
        1 => 0,
        _ => 1,
    };
    let mut bits = 0;
    for p in 1..4 {
        let v = single_click(s, 2 * p, 2 * p + 1)?;
        bits = (bits << 1) | usize::from(v < 0);
    }
    Some(h * 8 + bits)
}

fn coincidence(s: &ClickSet) -> bool {
    (0..4).all(|p| any_click(s, 2 * p, 2 * p + 1))
}

/// Parity of the photons selected by `mask` (bit 2 = photon 2, bit 0 = photon 4).
fn parity(counts: &[f64], mask: usize, exact: bool) -> Result<Expectation> {
    let (mut plus, mut minus) = (0.0, 0.0);
    for (bits, c) in counts.iter().enumerate() {
        if (bits & mask).count_ones() % 2 == 0 {
            plus += c;
        } else {
            minus += c;
        }
    }
    let e = Expectation::from_parity(plus, minus)?;
    Ok(if exact { Expectation::exact(e.value) } else { e })
}

/// Heralded three-photon entanglement: witness and Mermin test on
/// photons 2–4 given a `D_H1` click.
pub fn run_ghz(cfg: &ExperimentConfig, tau_ns: f64) -> Result<GhzReport> {
    if cfg.protocol != Protocol::Ghz3 {
        return Err(Error::invalid("protocol", format!("expected ghz3, got {}", cfg.protocol)));
    }
    let params = cfg.source_params(tau_ns)?;
    let n = trials_per_second(&cfg.timing, tau_ns)?;
    let clock = cfg.timing.clock(tau_ns)?;
    let branches: Vec<_> = two_arm_branches(&params)?
        .into_iter()
        .map(|(w, k)| Ok((w, read_out(&params, &interfere(&k, &[P1])?)?)))
        .collect::<Result<_>>()?;
    let dets = four_photon_detectors(cfg, &params);
    let mut blocks = Vec::new();
    let mut counts = Vec::new();
    for (j, name) in GHZ_SETTINGS.iter().enumerate() {
        let dist = mixed_distribution(&branches, &settings_for(name)?, &dets)?;
        let block = Block::measure(cfg, tau_ns, j as u64, name.to_string(), dist, &clock, coincidence)?;
        let c = block.tally(16, classify);
        counts.push(GhzSettingCounts {
            setting: name.to_string(),
            herald_h: c[..8].to_vec(),
            herald_v: c[8..].to_vec(),
        });
        blocks.push(block);
    }
    let herald_probability = blocks[0].exact_probability(|s| classify(s).is_some_and(|i| i < 8));
    let exact = cfg.engine == EngineKind::Exact;
    let heralded = counts.iter().all(|c| c.herald_h.iter().sum::<f64>() > 0.0);
    let (witness, mermin_result) = if heralded {
        let e = |setting: usize, mask: usize| parity(&counts[setting].herald_h, mask, exact);
        let xxx = e(1, 0b111)?;
        let w = ghz_witness(WitnessInputs {
            xxx,
            zz23: e(0, 0b110)?,
            zz34: e(0, 0b011)?,
            zz24: e(0, 0b101)?,
        })?;
        let m = mermin(MerminInputs {
            yyx: e(2, 0b111)?,
            yxy: e(3, 0b111)?,
            xyy: e(4, 0b111)?,
            xxx,
        })?;
        (Some(w), Some(m))
    } else {
        (None, None)
    };
    let mc = McSummary::from_blocks(cfg, &blocks);
    Ok(GhzReport {
        tau_ns,
        engine: cfg.engine,
        trials_per_second: n,
        herald_probability,
        heralded,
        counts,
        witness,
        mermin: mermin_result,
        mc,
        trial_logs: blocks.into_iter().filter_map(|b| b.samples).collect(),
    })
}
