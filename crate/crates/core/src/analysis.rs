//! Counts to statistics: correlation functions, CHSH, the three-photon
//! witness and the Mermin parameter, with standard errors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::AnalyzerSetting;

pub const CHSH_CLASSICAL_BOUND: f64 = 2.0;
pub const MERMIN_CLASSICAL_BOUND: f64 = 2.0;

/// Genuine tripartite bound of the Mermin parameter.
pub const MERMIN_GENUINE_BOUND: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Two-detector coincidence counts. Real-valued so expected counts from the
/// exact engine use the same estimator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CoincidenceCounts {
    pub pp: f64,
    pub mm: f64,
    pub pm: f64,
    pub mp: f64,
}

impl CoincidenceCounts {
    pub fn new(pp: f64, mm: f64, pm: f64, mp: f64) -> Self {
        CoincidenceCounts { pp, mm, pm, mp }
    }

    pub fn total(&self) -> f64 {
        self.pp + self.mm + self.pm + self.mp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub value: f64,
    pub stderr: f64,
    pub counts: CoincidenceCounts,
    pub settings: Option<(AnalyzerSetting, AnalyzerSetting)>,
}

impl CorrelationEstimate {
    pub fn with_settings(mut self, a: AnalyzerSetting, b: AnalyzerSetting) -> Self {
        self.settings = Some((a, b));
        self
    }

    /// Drops sampling error, for estimates built from exact probabilities.
    pub fn exact(mut self) -> Self {
        self.stderr = 0.0;
        self
    }
}

/// `E = (C₊₊ + C₋₋ − C₊₋ − C₋₊) / total` with multinomial error `√((1−E²)/total)`.
pub fn correlation_e(counts: CoincidenceCounts) -> Result<CorrelationEstimate> {
    let total = counts.total();
    if [counts.pp, counts.mm, counts.pm, counts.mp].iter().any(|c| *c < 0.0 || !c.is_finite()) {
        return Err(Error::domain("coincidence counts must be finite and non-negative"));
    }
    if total <= 0.0 {
        return Err(Error::domain("correlation needs a nonzero coincidence total"));
    }
    let value = ((counts.pp + counts.mm - counts.pm - counts.mp) / total).clamp(-1.0, 1.0);
    Ok(CorrelationEstimate {
        value,
        stderr: ((1.0 - value * value).max(0.0) / total).sqrt(),
        counts,
        settings: None,
    })
}

/// A scalar expectation with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub value: f64,
    pub stderr: f64,
}

impl Expectation {
    pub fn exact(value: f64) -> Self {
        Expectation { value, stderr: 0.0 }
    }

    /// Parity estimate `(N₊ − N₋)/(N₊ + N₋)`.
    pub fn from_parity(plus: f64, minus: f64) -> Result<Self> {
        let e = correlation_e(CoincidenceCounts::new(plus, 0.0, minus, 0.0))?;
        Ok(Expectation {
            value: e.value,
            stderr: e.stderr,
        })
    }
}

impl From<f64> for Expectation {
    fn from(value: f64) -> Self {
        Expectation::exact(value)
    }
}

impl From<&CorrelationEstimate> for Expectation {
    fn from(e: &CorrelationEstimate) -> Self {
        Expectation {
            value: e.value,
            stderr: e.stderr,
        }
    }
}

fn in_unit_range(name: &str, e: &Expectation) -> Result<()> {
    if !(-1.0..=1.0).contains(&e.value) || e.stderr < 0.0 {
        return Err(Error::domain(format!("{name} = {} outside [−1, 1]", e.value)));
    }
    Ok(())
}

fn quadrature(terms: &[f64]) -> f64 {
    terms.iter().map(|s| s * s).sum::<f64>().sqrt()
}

/// `(value − bound)/stderr`, absent when there is no sampling error.
fn significance(excess: f64, stderr: f64) -> Option<f64> {
    (stderr > 0.0).then(|| excess / stderr)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellResult {
    pub value: f64,
    pub stderr: f64,
    pub sigma_violation: Option<f64>,
    pub terms: Vec<CorrelationEstimate>,
}

fn check_pattern(e: &[CorrelationEstimate; 4]) -> Result<()> {
    let settings: Vec<_> = e.iter().filter_map(|x| x.settings).collect();
    if settings.is_empty() {
        return Ok(());
    }
    if settings.len() != 4 {
        return Err(Error::domain("CHSH terms mix estimates with and without settings"));
    }
    let (a, b) = settings[0];
    let (a2, b2) = settings[3];
    let ok = settings[1] == (a, b2) && settings[2] == (a2, b) && a != a2 && b != b2;
    if !ok {
        return Err(Error::domain(
            "CHSH terms must be ordered (a,b), (a,b′), (a′,b), (a′,b′)",
        ));
    }
    Ok(())
}

/// `S = |E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′)|`.
pub fn chsh(e: &[CorrelationEstimate; 4]) -> Result<BellResult> {
    check_pattern(e)?;
    let value = (e[0].value - e[1].value + e[2].value + e[3].value).abs();
    let stderr = quadrature(&e.iter().map(|x| x.stderr).collect::<Vec<_>>());
    Ok(BellResult {
        value,
        stderr,
        sigma_violation: significance(value - CHSH_CLASSICAL_BOUND, stderr),
        terms: e.to_vec(),
    })
}

/// CHSH from bare correlation values in canonical order.
pub fn chsh_values(e: [f64; 4]) -> Result<BellResult> {
    let est: Vec<CorrelationEstimate> = e
        .iter()
        .map(|&v| {
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::domain(format!("correlation {v} outside [−1, 1]")));
            }
            Ok(CorrelationEstimate {
                value: v,
                stderr: 0.0,
                counts: CoincidenceCounts::default(),
                settings: None,
            })
        })
        .collect::<Result<_>>()?;
    chsh(&[est[0], est[1], est[2], est[3]])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessInputs {
    pub xxx: Expectation,
    pub zz23: Expectation,
    pub zz34: Expectation,
    pub zz24: Expectation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessResult {
    pub value: f64,
    pub stderr: f64,
    /// `−W/stderr`: distance below zero.
    pub sigma_violation: Option<f64>,
    pub terms: WitnessInputs,
}

/// `W = 3/2 − ⟨xxx⟩ − ½(⟨zz₂₃⟩ + ⟨zz₃₄⟩ + ⟨zz₂₄⟩)`; negative values certify
/// genuine three-photon entanglement.
pub fn ghz_witness(t: WitnessInputs) -> Result<WitnessResult> {
    in_unit_range("xxx", &t.xxx)?;
    in_unit_range("zz23", &t.zz23)?;
    in_unit_range("zz34", &t.zz34)?;
    in_unit_range("zz24", &t.zz24)?;
    let value = 1.5 - t.xxx.value - 0.5 * (t.zz23.value + t.zz34.value + t.zz24.value);
    let stderr = quadrature(&[
        t.xxx.stderr,
        0.5 * t.zz23.stderr,
        0.5 * t.zz34.stderr,
        0.5 * t.zz24.stderr,
    ]);
    Ok(WitnessResult {
        value,
        stderr,
        sigma_violation: significance(-value, stderr),
        terms: t,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MerminInputs {
    pub yyx: Expectation,
    pub yxy: Expectation,
    pub xyy: Expectation,
    pub xxx: Expectation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MerminResult {
    pub value: f64,
    pub stderr: f64,
    pub sigma_violation: Option<f64>,
    pub exceeds_classical: bool,
    pub exceeds_genuine: bool,
    pub terms: MerminInputs,
}

/// `S_Me = |⟨yyx⟩ + ⟨yxy⟩ + ⟨xyy⟩ − ⟨xxx⟩|`.
pub fn mermin(t: MerminInputs) -> Result<MerminResult> {
    in_unit_range("yyx", &t.yyx)?;
    in_unit_range("yxy", &t.yxy)?;
    in_unit_range("xyy", &t.xyy)?;
    in_unit_range("xxx", &t.xxx)?;
    let value = (t.yyx.value + t.yxy.value + t.xyy.value - t.xxx.value).abs();
    let stderr = quadrature(&[t.yyx.stderr, t.yxy.stderr, t.xyy.stderr, t.xxx.stderr]);
    Ok(MerminResult {
        value,
        stderr,
        sigma_violation: significance(value - MERMIN_CLASSICAL_BOUND, stderr),
        exceeds_classical: value > MERMIN_CLASSICAL_BOUND,
        exceeds_genuine: value > MERMIN_GENUINE_BOUND,
        terms: t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{Arm, Mode};

    fn e(counts: (f64, f64, f64, f64)) -> f64 {
        correlation_e(CoincidenceCounts::new(counts.0, counts.1, counts.2, counts.3)).unwrap().value
    }

    #[test]
    fn estimator_examples() {
        assert_eq!(e((100.0, 100.0, 0.0, 0.0)), 1.0);
        assert_eq!(e((75.0, 75.0, 25.0, 25.0)), 0.5);
        assert_eq!(e((50.0, 50.0, 50.0, 50.0)), 0.0);
        assert!(correlation_e(CoincidenceCounts::default()).is_err());
    }

    #[test]
    fn estimator_error_bar() {
        let c = correlation_e(CoincidenceCounts::new(75.0, 75.0, 25.0, 25.0)).unwrap();
        assert!((c.stderr - (0.75f64 / 200.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ideal_chsh() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let b = chsh_values([r, -r, r, r]).unwrap();
        assert!((b.value - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
        assert_eq!(b.sigma_violation, None);
    }

    #[test]
    fn setting_pattern_checked() {
        let s = |m, t| AnalyzerSetting::linear(m, t).unwrap();
        let (a, a2) = (s(Mode::Stokes(Arm::A1), 0.0), s(Mode::Stokes(Arm::A1), 45.0));
        let (b, b2) = (s(Mode::AntiStokes(Arm::A1), 22.5), s(Mode::AntiStokes(Arm::A1), 67.5));
        let base = correlation_e(CoincidenceCounts::new(1.0, 1.0, 0.0, 0.0)).unwrap();
        let good = [
            base.with_settings(a, b),
            base.with_settings(a, b2),
            base.with_settings(a2, b),
            base.with_settings(a2, b2),
        ];
        assert!(chsh(&good).is_ok());
        let bad = [good[0], good[2], good[1], good[3]];
        assert!(chsh(&bad).is_err());
    }

    #[test]
    fn witness_and_mermin_ideal() {
        let w = ghz_witness(WitnessInputs {
            xxx: 1.0.into(),
            zz23: 1.0.into(),
            zz34: 1.0.into(),
            zz24: 1.0.into(),
        })
        .unwrap();
        assert_eq!(w.value, -1.0);
        let m = mermin(MerminInputs {
            yyx: (-1.0).into(),
            yxy: (-1.0).into(),
            xyy: (-1.0).into(),
            xxx: 1.0.into(),
        })
        .unwrap();
        assert_eq!(m.value, 4.0);
        assert!(m.exceeds_genuine);
    }

    #[test]
    fn out_of_range_rejected() {
        let bad = WitnessInputs {
            xxx: 1.2.into(),
            zz23: 0.0.into(),
            zz34: 0.0.into(),
            zz24: 0.0.into(),
        };
        assert!(ghz_witness(bad).is_err());
    }
}
