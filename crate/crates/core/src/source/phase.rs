use num_complex::Complex64;

use super::params::RetrievalWeighting;
use super::scheme::{Component, SpinWaveQubit};
use crate::error::{Error, Result};

/// `(√(4/7) − √(3/7)) / (√(4/7) + √(3/7))`.
pub fn phase_ratio_constant() -> f64 {
    let (a, b) = ((3.0f64 / 7.0).sqrt(), (4.0f64 / 7.0).sqrt());
    (b - a) / (b + a)
}

/// Closed-form relative phase between the retrieved ψ⁺ and ψ⁻ branches,
/// `2·atan[c·tan βτ]`, for `βτ ∈ [0, π/2)`.
pub fn phi_of_tau(tau: f64, beta: f64) -> Result<f64> {
    let theta = beta * tau;
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(Error::domain(format!(
            "βτ = {theta} outside [0, π/2) where the phase formula is defined"
        )));
    }
    Ok(2.0 * (phase_ratio_constant() * theta.tan()).atan())
}

/// Relative retrieval phase `arg⟨w|ψ⁺(τ)⟩ − arg⟨w|ψ⁻(τ)⟩`, computed from the
/// components directly, for either retrieval functional.
pub fn relative_phase(qubit: &SpinWaveQubit, theta: f64, weighting: RetrievalWeighting) -> f64 {
    let overlap = |comps: &[Component]| -> Complex64 {
        let k = comps.len() as f64;
        comps
            .iter()
            .map(|c| {
                let w = match weighting {
                    RetrievalWeighting::Matched => c.weight,
                    RetrievalWeighting::Uniform => 1.0 / k.sqrt(),
                };
                w * c.weight * Complex64::from_polar(1.0, f64::from(c.larmor_sign) * theta)
            })
            .sum()
    };
    let d = overlap(&qubit.plus).arg() - overlap(&qubit.minus).arg();
    // wrap to (−π, π]
    let two_pi = 2.0 * std::f64::consts::PI;
    let w = d - two_pi * ((d + std::f64::consts::PI) / two_pi).floor();
    if w <= -std::f64::consts::PI {
        w + two_pi
    } else {
        w
    }
}
