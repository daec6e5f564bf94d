use serde::Serialize;

use super::config::{EngineKind, ExperimentConfig, Protocol};
use super::pipeline::{angle_tag, any_click, arm_front, pair_detectors, single_click, Block, McSummary, TrialLog};
use super::rates::pair_rate;
use super::timing::trials_per_second;
use crate::analysis::{chsh, correlation_e, BellResult, CoincidenceCounts, CorrelationEstimate};
use crate::engines::ClickSet;
use crate::error::{Error, Result};
use crate::hilbert::{Arm, Mode};
use crate::source::{noisy_branches, phi_of_tau};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairArmResult {
    pub arm: Arm,
    /// `E(a,b), E(a,b′), E(a′,b), E(a′,b′)`.
    pub e_table: Vec<CorrelationEstimate>,
    pub chsh: BellResult,
    /// Exact per-trial probability of a classified Stokes/anti-Stokes
    /// coincidence at the first setting.
    pub coincidence_probability: f64,
    pub predicted_rate_per_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairReport {
    pub tau_ns: f64,
    pub engine: EngineKind,
    pub trials_per_second: u64,
    /// Closed-form relative phase in degrees, where defined.
    pub phi_deg: Option<f64>,
    pub arms: Vec<PairArmResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSummary>,
    #[serde(skip)]
    pub trial_logs: Vec<TrialLog>,
}

/// Index into `(pp, mm, pm, mp)` for one Stokes/anti-Stokes coincidence.
fn classify(s: &ClickSet) -> Option<usize> {
    let a = single_click(s, 0, 1)?;
    let b = single_click(s, 2, 3)?;
    Some(match (a, b) {
        (1, 1) => 0,
        (-1, -1) => 1,
        (1, -1) => 2,
        _ => 3,
    })
}

fn coincidence(s: &ClickSet) -> bool {
    any_click(s, 0, 1) && any_click(s, 2, 3)
}

pub(crate) fn estimate(block: &Block, counts: &[f64]) -> Result<CorrelationEstimate> {
    let e = correlation_e(CoincidenceCounts::new(counts[0], counts[1], counts[2], counts[3]))?;
    Ok(if block.is_exact() { e.exact() } else { e })
}

/// CHSH test on each arm at storage time `tau_ns`.
pub fn run_pair(cfg: &ExperimentConfig, tau_ns: f64) -> Result<PairReport> {
    if cfg.protocol != Protocol::Pair {
        return Err(Error::invalid("protocol", format!("expected pair, got {}", cfg.protocol)));
    }
    let params = cfg.source_params(tau_ns)?;
    let n = trials_per_second(&cfg.timing, tau_ns)?;
    let clock = cfg.timing.clock(tau_ns)?;
    let mut arms = Vec::new();
    let mut blocks = Vec::new();
    for arm in Arm::ALL {
        let branches: Vec<_> = noisy_branches(&params, arm)
            .into_iter()
            .map(|(w, k)| Ok((w, arm_front(&params, arm, &k)?)))
            .collect::<Result<_>>()?;
        let dets = pair_detectors(cfg, &params, arm);
        let ([a, a2], [b, b2]) = cfg.chsh_settings(Mode::Stokes(arm), Mode::AntiStokes(arm))?;
        let mut e = Vec::new();
        let mut first_p = 0.0;
        for (j, (x, y)) in [(a, b), (a, b2), (a2, b), (a2, b2)].into_iter().enumerate() {
            let dist = super::pipeline::mixed_distribution(&branches, &[x, y], &dets)?;
            let name = format!("{arm}_s{}_as{}", angle_tag(x.theta), angle_tag(y.theta));
            let block = Block::measure(cfg, tau_ns, (arm.index() * 4 + j) as u64, name, dist, &clock, coincidence)?;
            if j == 0 {
                first_p = block.exact_probability(|s| classify(s).is_some());
            }
            let counts = block.tally(4, classify);
            e.push(estimate(&block, &counts)?.with_settings(x, y));
            blocks.push(block);
        }
        let e_table: [CorrelationEstimate; 4] = [e[0], e[1], e[2], e[3]];
        arms.push(PairArmResult {
            arm,
            chsh: chsh(&e_table)?,
            e_table: e_table.to_vec(),
            coincidence_probability: first_p,
            predicted_rate_per_s: pair_rate(
                dets[0].efficiency,
                cfg.detectors.efficiency_of(&dets[2].id),
                params.chi,
                params.retrieval_eff[arm],
                n,
            ),
        });
    }
    let mc = McSummary::from_blocks(cfg, &blocks);
    Ok(PairReport {
        tau_ns,
        engine: cfg.engine,
        trials_per_second: n,
        phi_deg: phi_of_tau(params.tau, params.beta).ok().map(f64::to_degrees),
        arms,
        mc,
        trial_logs: blocks.into_iter().filter_map(|b| b.samples).collect(),
    })
}
