//! Polarization optics as mode maps: wave plates, the polarizing beam
//! splitter and projective analyzers.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{LinearMap, MapKind, Mode, ModeKey, Pol};

const R2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn key(mode: Mode, pol: Pol) -> ModeKey {
    ModeKey::photon(mode, pol)
}

/// Which quarter-wave plate orientation a photon passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// `R → H`, `L → V`.
    Stokes,
    /// `R → V`, `L → H`.
    AntiStokes,
}

/// Circular-to-linear relabeling of one mode.
pub fn quarter_wave(mode: Mode, convention: Convention) -> LinearMap {
    let (r_to, l_to) = match convention {
        Convention::Stokes => (Pol::H, Pol::V),
        Convention::AntiStokes => (Pol::V, Pol::H),
    };
    let one = c(1.0, 0.0);
    LinearMap::from_images(
        &[
            (key(mode, Pol::R), vec![(key(mode, r_to), one)]),
            (key(mode, Pol::L), vec![(key(mode, l_to), one)]),
        ],
        MapKind::Unitary,
    )
    .expect("permutation is unitary")
}

/// Half-wave plate at 22.5° fast axis: `H → H′ = (H+V)/√2`, `V → V′ = (H−V)/√2`.
pub fn half_wave_45(mode: Mode) -> LinearMap {
    let (h, v) = (key(mode, Pol::H), key(mode, Pol::V));
    let m = DMatrix::from_row_slice(2, 2, &[c(R2, 0.0), c(R2, 0.0), c(R2, 0.0), c(-R2, 0.0)]);
    LinearMap::new(vec![h, v], vec![h, v], m, MapKind::Unitary).expect("Hadamard is unitary")
}

/// Polarizing beam splitter transmitting H and reflecting V.
pub fn pbs(in1: Mode, in2: Mode, out1: Mode, out2: Mode) -> Result<LinearMap> {
    pbs_with_phase(in1, in2, out1, out2, c(1.0, 0.0))
}

/// [`pbs`] with a unit-modulus phase on every reflected amplitude.
pub fn pbs_with_phase(in1: Mode, in2: Mode, out1: Mode, out2: Mode, reflection: Complex64) -> Result<LinearMap> {
    let modes = [in1, in2, out1, out2];
    for i in 0..4 {
        for j in i + 1..4 {
            if modes[i] == modes[j] {
                return Err(Error::domain(format!("beam splitter ports must be distinct, {} repeated", modes[i])));
            }
        }
    }
    if (reflection.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::domain("reflection phase must have unit modulus"));
    }
    let one = c(1.0, 0.0);
    LinearMap::from_images(
        &[
            (key(in1, Pol::H), vec![(key(out1, Pol::H), one)]),
            (key(in1, Pol::V), vec![(key(out2, Pol::V), reflection)]),
            (key(in2, Pol::H), vec![(key(out2, Pol::H), one)]),
            (key(in2, Pol::V), vec![(key(out1, Pol::V), reflection)]),
        ],
        MapKind::Unitary,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyzerKind {
    #[default]
    Linear,
    Circular,
    PauliX,
    PauliY,
    PauliZ,
}

impl AnalyzerKind {
    /// Single-letter tag used in setting names such as `yyx`.
    pub fn letter(self) -> char {
        match self {
            AnalyzerKind::Linear => 'l',
            AnalyzerKind::Circular => 'c',
            AnalyzerKind::PauliX => 'x',
            AnalyzerKind::PauliY => 'y',
            AnalyzerKind::PauliZ => 'z',
        }
    }

    pub fn from_letter(ch: char) -> Result<Self> {
        match ch {
            'x' => Ok(AnalyzerKind::PauliX),
            'y' => Ok(AnalyzerKind::PauliY),
            'z' => Ok(AnalyzerKind::PauliZ),
            _ => Err(Error::domain(format!("unknown Pauli setting `{ch}`"))),
        }
    }
}

/// Projective polarization measurement on one mode. `theta` is in degrees
/// from H and only matters for [`AnalyzerKind::Linear`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzerSetting {
    pub mode: Mode,
    #[serde(default)]
    pub kind: AnalyzerKind,
    #[serde(default)]
    pub theta: f64,
}

impl AnalyzerSetting {
    pub fn linear(mode: Mode, theta: f64) -> Result<Self> {
        let s = AnalyzerSetting {
            mode,
            kind: AnalyzerKind::Linear,
            theta,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn pauli(mode: Mode, kind: AnalyzerKind) -> Self {
        AnalyzerSetting { mode, kind, theta: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..180.0).contains(&self.theta) {
            return Err(Error::domain(format!("analyzer angle {}° outside [0°, 180°)", self.theta)));
        }
        Ok(())
    }
}

impl fmt::Display for AnalyzerSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            AnalyzerKind::Linear => write!(f, "{}@{}", self.mode, self.theta),
            k => write!(f, "{}:{}", self.mode, k.letter()),
        }
    }
}

/// Jones vectors `(H, V)` of the +1 and −1 outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorPair {
    pub plus: [Complex64; 2],
    pub minus: [Complex64; 2],
}

impl ProjectorPair {
    /// `|p⟩⟨p|` for the requested outcome.
    pub fn matrix(&self, outcome_plus: bool) -> DMatrix<Complex64> {
        let p = if outcome_plus { self.plus } else { self.minus };
        DMatrix::from_fn(2, 2, |i, j| p[i] * p[j].conj())
    }

    /// Outcome probabilities for a normalized Jones vector.
    pub fn probabilities(&self, jones: [Complex64; 2]) -> (f64, f64) {
        let ov = |p: [Complex64; 2]| (p[0].conj() * jones[0] + p[1].conj() * jones[1]).norm_sqr();
        (ov(self.plus), ov(self.minus))
    }
}

pub fn analyzer_projectors(setting: &AnalyzerSetting) -> ProjectorPair {
    match setting.kind {
        AnalyzerKind::Linear => {
            let t = setting.theta.to_radians();
            ProjectorPair {
                plus: [c(t.cos(), 0.0), c(t.sin(), 0.0)],
                minus: [c(-t.sin(), 0.0), c(t.cos(), 0.0)],
            }
        }
        AnalyzerKind::PauliX => ProjectorPair {
            plus: [c(R2, 0.0), c(R2, 0.0)],
            minus: [c(R2, 0.0), c(-R2, 0.0)],
        },
        AnalyzerKind::PauliY | AnalyzerKind::Circular => ProjectorPair {
            plus: [c(R2, 0.0), c(0.0, R2)],
            minus: [c(R2, 0.0), c(0.0, -R2)],
        },
        AnalyzerKind::PauliZ => ProjectorPair {
            plus: [c(1.0, 0.0), c(0.0, 0.0)],
            minus: [c(0.0, 0.0), c(1.0, 0.0)],
        },
    }
}

/// Rotates the measurement basis onto `(H, V)`, so a photon found in H after
/// the map is a +1 outcome.
pub fn analyzer_map(setting: &AnalyzerSetting) -> LinearMap {
    let p = analyzer_projectors(setting);
    let (h, v) = (key(setting.mode, Pol::H), key(setting.mode, Pol::V));
    let m = DMatrix::from_fn(2, 2, |out, inp| {
        let row = if out == 0 { p.plus } else { p.minus };
        row[inp].conj()
    });
    LinearMap::new(vec![h, v], vec![h, v], m, MapKind::Unitary).expect("orthonormal analyzer basis")
}
