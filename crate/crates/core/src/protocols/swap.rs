use serde::Serialize;

use super::config::{EngineKind, ExperimentConfig, Protocol};
use super::pair::estimate;
use super::pipeline::{
    angle_tag, any_click, four_photon_detectors, interfere, mixed_distribution, read_out, single_click,
    two_arm_branches, Block, McSummary, TrialLog, AS1, AS2, P1, P2,
};
use super::rates::swap_success_probability;
use super::timing::trials_per_second;
use crate::analysis::{chsh, BellResult, CorrelationEstimate};
use crate::engines::ClickSet;
use crate::error::{Error, Result};
use crate::hilbert::{Arm, BasisLabel, JointKet, Mode, ModeKey, Pol, SpinWaveLevel};
use crate::source::{build_atom_photon_state, SourceParams};

/// Spin-wave content of both arms right after a Bell-state herald.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwapDecomposition {
    /// `"HH"` or `"VV"` on photons 1 and 2.
    pub herald: String,
    /// Probability of the herald photon pattern per trial, unit detection.
    pub herald_probability: f64,
    /// Weight with one excitation in each arm.
    pub entangled_weight: f64,
    /// Weight with both excitations in one arm.
    pub error_weight: f64,
    /// `entangled_weight / error_weight`, absent without double excitations.
    pub ratio: Option<f64>,
    pub entangled_fraction: f64,
    /// Fidelities of the heralded spin-wave state with
    /// `(|ψ⁺ψ⁺⟩ ± |ψ⁻ψ⁻⟩)/√2`.
    pub fidelity_plus: f64,
    pub fidelity_minus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwapReport {
    pub tau_ns: f64,
    pub engine: EngineKind,
    pub trials_per_second: u64,
    pub decomposition: Vec<SwapDecomposition>,
    /// `E(a,b), E(a,b′), E(a′,b), E(a′,b′)` on AS1/AS2, both heralds pooled.
    pub e_table: Vec<CorrelationEstimate>,
    pub chsh: BellResult,
    /// Closed-form probability of an anti-Stokes coincidence given a herald.
    pub success_probability: f64,
    /// The same probability from the engine's exact distribution.
    pub success_probability_engine: f64,
    /// Exact per-trial probability of either herald.
    pub herald_probability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSummary>,
    #[serde(skip)]
    pub trial_logs: Vec<TrialLog>,
}

fn herald_of(s: &ClickSet) -> Option<usize> {
    match (s.clicked(0), s.clicked(1), s.clicked(2), s.clicked(3)) {
        (true, false, true, false) => Some(0),
        (false, true, false, true) => Some(1),
        _ => None,
    }
}

/// Herald times 4 plus the `(pp, mm, pm, mp)` index of the AS1/AS2 outcome.
fn classify(s: &ClickSet) -> Option<usize> {
    let h = herald_of(s)?;
    let a = single_click(s, 4, 5)?;
    let b = single_click(s, 6, 7)?;
    let k = match (a, b) {
        (1, 1) => 0,
        (-1, -1) => 1,
        (1, -1) => 2,
        _ => 3,
    };
    Some(h * 4 + k)
}

fn coincidence(s: &ClickSet) -> bool {
    (0..4).all(|p| any_click(s, 2 * p, 2 * p + 1))
}

fn single_photon(l: &BasisLabel, mode: Mode, pol: Pol) -> bool {
    l.photons_in(mode) == 1 && l.occupation(ModeKey::photon(mode, pol)) == 1
}

/// Heralded spin-wave state for the ideal entangled write in both arms.
pub fn decompose(params: &SourceParams, herald: Pol) -> Result<SwapDecomposition> {
    let k = build_atom_photon_state(params, Arm::A1).tensor(&build_atom_photon_state(params, Arm::A2))?;
    let k = interfere(&k, &[P1, P2])?;
    let proj = k.project(|l| single_photon(l, P1, herald) && single_photon(l, P2, herald));
    if proj.probability == 0.0 {
        return Err(Error::domain(format!("the {herald}{herald} herald has zero probability")));
    }
    let level = |l: &BasisLabel, arm: Arm| l.arm_level(arm);
    let single = |x: Option<SpinWaveLevel>| matches!(x, Some(SpinWaveLevel::Plus | SpinWaveLevel::Minus));
    let weight = |pred: &dyn Fn(&BasisLabel) -> bool| -> f64 {
        proj.state.terms().filter(|(l, _)| pred(l)).fold(0.0, |acc, (_, a)| acc + a.norm_sqr())
    };
    let entangled = weight(&|l| single(level(l, Arm::A1)) && single(level(l, Arm::A2)));
    let error = weight(&|l| {
        matches!(
            (level(l, Arm::A1), level(l, Arm::A2)),
            (Some(SpinWaveLevel::Double), Some(SpinWaveLevel::Vac)) | (Some(SpinWaveLevel::Vac), Some(SpinWaveLevel::Double))
        )
    });
    let amp = |a: SpinWaveLevel, b: SpinWaveLevel| -> num_complex::Complex64 {
        proj.state
            .terms()
            .filter(|(l, _)| level(l, Arm::A1) == Some(a) && level(l, Arm::A2) == Some(b))
            .map(|(_, x)| *x)
            .sum()
    };
    let (pp, mm) = (amp(SpinWaveLevel::Plus, SpinWaveLevel::Plus), amp(SpinWaveLevel::Minus, SpinWaveLevel::Minus));
    Ok(SwapDecomposition {
        herald: format!("{herald}{herald}"),
        herald_probability: proj.probability,
        entangled_weight: entangled,
        error_weight: error,
        ratio: (error > 0.0).then(|| entangled / error),
        entangled_fraction: entangled / (entangled + error),
        fidelity_plus: (pp + mm).norm_sqr() / 2.0,
        fidelity_minus: (pp - mm).norm_sqr() / 2.0,
    })
}

fn check(k: &JointKet) -> Result<()> {
    if k.norm_deficit() > 1e-9 {
        return Err(Error::domain("swap front end lost weight"));
    }
    Ok(())
}

/// Entanglement swapping between the two arms, heralded by a Bell-state
/// measurement on the Stokes photons.
pub fn run_swap(cfg: &ExperimentConfig, tau_ns: f64) -> Result<SwapReport> {
    if cfg.protocol != Protocol::Swap {
        return Err(Error::invalid("protocol", format!("expected swap, got {}", cfg.protocol)));
    }
    let params = cfg.source_params(tau_ns)?;
    let n = trials_per_second(&cfg.timing, tau_ns)?;
    let clock = cfg.timing.clock(tau_ns)?;
    let decomposition = vec![decompose(&params, Pol::H)?, decompose(&params, Pol::V)?];
    let branches: Vec<_> = two_arm_branches(&params)?
        .into_iter()
        .map(|(w, k)| {
            let k = read_out(&params, &interfere(&k, &[P1, P2])?)?;
            check(&k)?;
            Ok((w, k))
        })
        .collect::<Result<_>>()?;
    let dets = four_photon_detectors(cfg, &params);
    let ([a, a2], [b, b2]) = cfg.chsh_settings(AS1, AS2)?;
    let mut blocks = Vec::new();
    let mut e = Vec::new();
    for (j, (x, y)) in [(a, b), (a, b2), (a2, b), (a2, b2)].into_iter().enumerate() {
        let dist = mixed_distribution(&branches, &[x, y], &dets)?;
        let name = format!("as{}_as{}", angle_tag(x.theta), angle_tag(y.theta));
        let block = Block::measure(cfg, tau_ns, j as u64, name, dist, &clock, coincidence)?;
        let c = block.tally(8, classify);
        let pooled: Vec<f64> = (0..4).map(|i| c[i] + c[4 + i]).collect();
        e.push(estimate(&block, &pooled)?.with_settings(x, y));
        blocks.push(block);
    }
    let e_table = [e[0], e[1], e[2], e[3]];
    let herald_probability = blocks[0].exact_probability(|s| herald_of(s).is_some());
    let both = blocks[0].exact_probability(|s| herald_of(s).is_some() && any_click(s, 4, 5) && any_click(s, 6, 7));
    let eff = |id: &str| cfg.detectors.efficiency_of(id);
    let mc = McSummary::from_blocks(cfg, &blocks);
    Ok(SwapReport {
        tau_ns,
        engine: cfg.engine,
        trials_per_second: n,
        decomposition,
        chsh: chsh(&e_table)?,
        e_table: e_table.to_vec(),
        success_probability: swap_success_probability(
            eff("D_H3"),
            eff("D_H4"),
            params.retrieval_eff[Arm::A1],
            params.retrieval_eff[Arm::A2],
        ),
        success_probability_engine: if herald_probability > 0.0 { both / herald_probability } else { 0.0 },
        herald_probability,
        mc,
        trial_logs: blocks.into_iter().filter_map(|b| b.samples).collect(),
    })
}
