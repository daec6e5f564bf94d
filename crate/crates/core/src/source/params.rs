use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use super::scheme::{spin_wave_weights, LevelScheme, SpinWaveQubit};
use crate::error::{Error, Result};
use crate::hilbert::Arm;

/// Bohr magneton over ħ, rad·s⁻¹·T⁻¹.
pub const MU_B_OVER_HBAR: f64 = 9.274_010_078_3e-24 / 1.054_571_817e-34;

/// Ground-state Landé factor used for the default precession rate.
pub const DEFAULT_G_FACTOR: f64 = 0.5;

pub const DEFAULT_FIELD_GAUSS: f64 = 0.2;

pub const DEFAULT_CHI: f64 = 0.014;

pub const DEFAULT_RETRIEVAL_EFF: f64 = 0.20;

/// Larmor precession rate `g μ_B B / ħ` in rad/s for a field in gauss.
pub fn larmor_rate(g_factor: f64, field_gauss: f64) -> f64 {
    g_factor * MU_B_OVER_HBAR * field_gauss * 1e-4
}

/// One value per ensemble arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerArm<T> {
    #[serde(rename = "A1")]
    pub a1: T,
    #[serde(rename = "A2")]
    pub a2: T,
}

impl<T: Copy> PerArm<T> {
    pub fn splat(v: T) -> Self {
        PerArm { a1: v, a2: v }
    }
}

impl<T> Index<Arm> for PerArm<T> {
    type Output = T;

    fn index(&self, arm: Arm) -> &T {
        match arm {
            Arm::A1 => &self.a1,
            Arm::A2 => &self.a2,
        }
    }
}

impl<T> IndexMut<Arm> for PerArm<T> {
    fn index_mut(&mut self, arm: Arm) -> &mut T {
        match arm {
            Arm::A1 => &mut self.a1,
            Arm::A2 => &mut self.a2,
        }
    }
}

/// How storage-time evolution is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseModel {
    /// Every Zeeman coherence precesses with its own sign.
    #[default]
    Component,
    /// A single `e^{−iφ(τ)}` on the ψ⁻ branch.
    Effective,
}

/// Which linear functional of the Zeeman components the read pulse maps onto
/// the anti-Stokes photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetrievalWeighting {
    /// Projects onto the τ = 0 spin-wave state, so the bright mode is
    /// retrieved completely.
    #[default]
    Matched,
    /// Equal weight on every retained coherence.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceParams {
    pub chi: f64,
    /// Write-branch mixing angle in radians.
    pub eta: f64,
    pub field_gauss: f64,
    /// Precession rate in rad/s.
    pub beta: f64,
    /// Storage time in seconds.
    pub tau: f64,
    pub retrieval_eff: PerArm<f64>,
    pub visibility: PerArm<f64>,
    pub double_excitations: bool,
    pub phase_model: PhaseModel,
    pub retrieval_weighting: RetrievalWeighting,
    pub qubit: SpinWaveQubit,
}

impl SourceParams {
    /// Defaults for the rubidium scheme with the given excitation probability.
    pub fn new(chi: f64) -> Result<Self> {
        Self::from_scheme(chi, &LevelScheme::rubidium87())
    }

    pub fn from_scheme(chi: f64, scheme: &LevelScheme) -> Result<Self> {
        let qubit = spin_wave_weights(scheme)?;
        let p = SourceParams {
            chi,
            eta: qubit.sin_eta.atan2(qubit.cos_eta),
            field_gauss: DEFAULT_FIELD_GAUSS,
            beta: larmor_rate(DEFAULT_G_FACTOR, DEFAULT_FIELD_GAUSS),
            tau: 0.0,
            retrieval_eff: PerArm::splat(DEFAULT_RETRIEVAL_EFF),
            visibility: PerArm::splat(1.0),
            double_excitations: true,
            phase_model: PhaseModel::default(),
            retrieval_weighting: RetrievalWeighting::default(),
            qubit,
        };
        p.validate()?;
        Ok(p)
    }

    /// Noise-free, first-order source at τ = 0.
    pub fn ideal() -> Self {
        let mut p = Self::new(DEFAULT_CHI).expect("default source");
        p.double_excitations = false;
        p
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.chi > 0.0 && self.chi <= 0.2) {
            return Err(Error::invalid("source.chi", format!("{} outside (0, 0.2]", self.chi)));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid("source.beta", "must be finite and non-negative"));
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid("source.tau", "must be finite and non-negative"));
        }
        for arm in Arm::ALL {
            let r = self.retrieval_eff[arm];
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::invalid(
                    format!("source.retrieval_eff.{arm}"),
                    format!("{r} outside [0, 1]"),
                ));
            }
            let v = self.visibility[arm];
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(
                    format!("source.visibility.{arm}"),
                    format!("{v} outside [0, 1]"),
                ));
            }
        }
        Ok(())
    }

    /// `βτ` in radians.
    pub fn larmor_angle(&self) -> f64 {
        self.beta * self.tau
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_precession_rate() {
        let beta = larmor_rate(DEFAULT_G_FACTOR, DEFAULT_FIELD_GAUSS);
        assert!((beta - 8.794e5).abs() < 1e2, "{beta}");
    }

    #[test]
    fn default_mixing_angle() {
        let p = SourceParams::new(0.014).unwrap();
        assert!((p.eta - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn chi_range_checked() {
        let e = SourceParams::new(-1.0).unwrap_err();
        assert!(e.to_string().contains("source.chi"));
        assert!(SourceParams::new(0.3).is_err());
    }

    #[test]
    fn per_arm_indexing() {
        let mut v = PerArm::splat(0.2);
        v[Arm::A2] = 0.5;
        assert_eq!(v[Arm::A1], 0.2);
        assert_eq!(v.a2, 0.5);
    }
}
