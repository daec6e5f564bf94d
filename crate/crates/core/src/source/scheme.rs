//! Zeeman level scheme and the spin-wave qubit it induces.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::cg::cg_int;
use crate::error::{Error, Result};
use crate::hilbert::Family;

/// Hyperfine levels involved in write and read.
///
/// `f_a` is the initial level, `f_e2` the write excited level, `f_b` the
/// storage level and `f_e1` the read excited level. `cg_products[(m, α)]`
/// is `X_α(m) = ⟨F_a m; 1 0 | F_e2 m⟩ ⟨F_e2 m; 1 α | F_b m+α⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelScheme {
    pub f_a: i32,
    pub f_b: i32,
    pub f_e2: i32,
    pub f_e1: i32,
    #[serde(skip)]
    cg_products: BTreeMap<(i32, i32), f64>,
}

impl LevelScheme {
    /// Scheme with `F_a = 1` and read level `F_e1 = 1`.
    pub fn new(f_b: i32, f_e2: i32) -> Result<Self> {
        Self::with_levels(1, f_b, f_e2, 1)
    }

    pub fn with_levels(f_a: i32, f_b: i32, f_e2: i32, f_e1: i32) -> Result<Self> {
        if f_a != 1 {
            return Err(Error::invalid("source.levels.f_a", "initial level must have F_a = 1"));
        }
        for (name, f) in [("f_b", f_b), ("f_e2", f_e2), ("f_e1", f_e1)] {
            if !(0..=4).contains(&f) {
                return Err(Error::invalid(format!("source.levels.{name}"), "must lie in 0..=4"));
            }
        }
        let mut cg_products = BTreeMap::new();
        for m in -f_a..=f_a {
            for alpha in [-1, 1] {
                let x = cg_int(f_a, m, 1, 0, f_e2, m) * cg_int(f_e2, m, 1, alpha, f_b, m + alpha);
                cg_products.insert((m, alpha), x);
            }
        }
        Ok(LevelScheme {
            f_a,
            f_b,
            f_e2,
            f_e1,
            cg_products,
        })
    }

    /// <sup>87</sup>Rb assignment: `|a⟩ = F=1`, `|e₂⟩ = F'=2`, `|b⟩ = F=2`.
    pub fn rubidium87() -> Self {
        Self::new(2, 2).expect("valid default scheme")
    }

    pub fn x(&self, m: i32, alpha: i32) -> f64 {
        self.cg_products.get(&(m, alpha)).copied().unwrap_or(0.0)
    }

    pub fn cg_products(&self) -> &BTreeMap<(i32, i32), f64> {
        &self.cg_products
    }

    /// Coherence `|a,m⟩ ↔ |b,m+α⟩` survives retrieval only if `|m_b| ≤ F_e1`.
    fn retrievable(&self, m_b: i32) -> bool {
        m_b.abs() <= self.f_b && m_b.abs() <= self.f_e1
    }
}

impl Default for LevelScheme {
    fn default() -> Self {
        Self::rubidium87()
    }
}

/// One Zeeman coherence `|a,m_a⟩ ↔ |b,m_b⟩` inside a spin-wave qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Component {
    pub m_a: i32,
    pub m_b: i32,
    pub weight: f64,
    /// Larmor phase is `exp(i · larmor_sign · βτ)`.
    pub larmor_sign: i32,
}

/// Retained components of ψ⁺ (α = +1) and ψ⁻ (α = −1), plus the write
/// branch amplitudes `cos η`, `sin η`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpinWaveQubit {
    pub plus: Vec<Component>,
    pub minus: Vec<Component>,
    pub cos_eta: f64,
    pub sin_eta: f64,
}

impl SpinWaveQubit {
    pub fn family(&self, f: Family) -> &[Component] {
        match f {
            Family::Plus => &self.plus,
            Family::Minus => &self.minus,
        }
    }

    pub fn plus_weights(&self) -> Vec<f64> {
        self.plus.iter().map(|c| c.weight).collect()
    }

    pub fn minus_weights(&self) -> Vec<f64> {
        self.minus.iter().map(|c| c.weight).collect()
    }
}

/// Normalized spin-wave weights over the retrievable coherences.
///
/// Each family is sign-fixed so its first component is positive.
pub fn spin_wave_weights(scheme: &LevelScheme) -> Result<SpinWaveQubit> {
    let family = |alpha: i32| -> Result<(Vec<Component>, f64)> {
        let mut comps: Vec<Component> = (-scheme.f_a..=scheme.f_a)
            .filter(|m| scheme.retrievable(m + alpha))
            .map(|m| Component {
                m_a: m,
                m_b: m + alpha,
                weight: scheme.x(m, alpha),
                larmor_sign: m + (m + alpha),
            })
            .filter(|c| c.weight != 0.0)
            .collect();
        let x2: f64 = comps.iter().map(|c| c.weight * c.weight).sum();
        if x2 == 0.0 {
            return Err(Error::domain(format!(
                "level scheme F_b={} F_e2={} has no retrievable α={alpha:+} coherence",
                scheme.f_b, scheme.f_e2
            )));
        }
        let sign = comps[0].weight.signum();
        let norm = x2.sqrt();
        for c in &mut comps {
            c.weight *= sign / norm;
        }
        Ok((comps, x2))
    };
    let (plus, x2_plus) = family(1)?;
    let (minus, x2_minus) = family(-1)?;
    let cos_eta = (x2_minus / (x2_minus + x2_plus)).sqrt();
    let sin_eta = (x2_plus / (x2_minus + x2_plus)).sqrt();
    Ok(SpinWaveQubit {
        plus,
        minus,
        cos_eta,
        sin_eta,
    })
}
