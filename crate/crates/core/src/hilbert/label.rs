//! Mode keys and canonical basis labels.
//!
//! A basis label is a sparse Fock occupation over [`ModeKey`]s, kept sorted
//! by key so that two equal states always carry equal labels.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the two spin-wave arms (and the Stokes direction that heralds it).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Arm {
    A1,
    A2,
}

impl Arm {
    pub const ALL: [Arm; 2] = [Arm::A1, Arm::A2];

    pub fn index(self) -> usize {
        match self {
            Arm::A1 => 0,
            Arm::A2 => 1,
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arm::A1 => f.write_str("A1"),
            Arm::A2 => f.write_str("A2"),
        }
    }
}

impl FromStr for Arm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A1" | "1" => Ok(Arm::A1),
            "A2" | "2" => Ok(Arm::A2),
            _ => Err(Error::domain(format!("unknown arm `{s}`"))),
        }
    }
}

/// Output port of the polarizing beam splitter that overlaps the Stokes modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Port {
    One,
    Two,
}

/// Spatial photonic mode.
///
/// `PbsOut(One)` and `PbsOut(Two)` carry photons 1 and 2; the anti-Stokes
/// modes of arms 1 and 2 carry photons 3 and 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Mode {
    Stokes(Arm),
    AntiStokes(Arm),
    PbsOut(Port),
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Stokes(Arm::A1) => f.write_str("S1"),
            Mode::Stokes(Arm::A2) => f.write_str("S2"),
            Mode::AntiStokes(Arm::A1) => f.write_str("AS1"),
            Mode::AntiStokes(Arm::A2) => f.write_str("AS2"),
            Mode::PbsOut(Port::One) => f.write_str("P1"),
            Mode::PbsOut(Port::Two) => f.write_str("P2"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "S1" => Ok(Mode::Stokes(Arm::A1)),
            "S2" => Ok(Mode::Stokes(Arm::A2)),
            "AS1" | "S1'" | "photon3" => Ok(Mode::AntiStokes(Arm::A1)),
            "AS2" | "S2'" | "photon4" => Ok(Mode::AntiStokes(Arm::A2)),
            "P1" | "photon1" => Ok(Mode::PbsOut(Port::One)),
            "P2" | "photon2" => Ok(Mode::PbsOut(Port::Two)),
            _ => Err(Error::domain(format!("unknown mode `{s}`"))),
        }
    }
}

impl TryFrom<String> for Mode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Mode> for String {
    fn from(m: Mode) -> String {
        m.to_string()
    }
}

/// Photon polarization. `R` is σ⁺ and `L` is σ⁻ helicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Pol {
    H,
    V,
    R,
    L,
}

impl Pol {
    pub fn is_linear(self) -> bool {
        matches!(self, Pol::H | Pol::V)
    }
}

impl fmt::Display for Pol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pol::H => "H",
            Pol::V => "V",
            Pol::R => "R",
            Pol::L => "L",
        };
        f.write_str(s)
    }
}

impl FromStr for Pol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H" => Ok(Pol::H),
            "V" => Ok(Pol::V),
            "R" | "σ+" | "σ⁺" | "sigma+" => Ok(Pol::R),
            "L" | "σ-" | "σ⁻" | "sigma-" => Ok(Pol::L),
            _ => Err(Error::domain(format!("unknown polarization `{s}`"))),
        }
    }
}

impl TryFrom<String> for Pol {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Pol> for String {
    fn from(p: Pol) -> String {
        p.to_string()
    }
}

/// Spin-wave helicity family: ψ⁺ couples to σ⁺ retrieval, ψ⁻ to σ⁻.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Plus,
    Minus,
}

/// A spin-wave mode of one arm.
///
/// `Bright` is the logical qubit state (ψ⁺ or ψ⁻); `Dark(j)` spans the
/// remaining Zeeman-coherence directions of the same family, which Larmor
/// precession can populate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SwMode {
    Bright(Family),
    Dark(Family, u8),
}

impl SwMode {
    pub const PLUS: SwMode = SwMode::Bright(Family::Plus);
    pub const MINUS: SwMode = SwMode::Bright(Family::Minus);
}

impl fmt::Display for SwMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SwMode::Bright(Family::Plus) => f.write_str("plus"),
            SwMode::Bright(Family::Minus) => f.write_str("minus"),
            SwMode::Dark(Family::Plus, j) => write!(f, "plus_dark{j}"),
            SwMode::Dark(Family::Minus, j) => write!(f, "minus_dark{j}"),
        }
    }
}

/// A single bosonic mode of the composite system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModeKey {
    Photon(Mode, Pol),
    SpinWave(Arm, SwMode),
}

impl ModeKey {
    pub fn photon(mode: Mode, pol: Pol) -> Self {
        ModeKey::Photon(mode, pol)
    }

    pub fn spin_wave(arm: Arm, sw: SwMode) -> Self {
        ModeKey::SpinWave(arm, sw)
    }

    pub fn site(&self) -> Site {
        match *self {
            ModeKey::Photon(m, _) => Site::Photon(m),
            ModeKey::SpinWave(a, _) => Site::Arm(a),
        }
    }
}

impl fmt::Display for ModeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeKey::Photon(m, p) => write!(f, "{m}:{p}"),
            ModeKey::SpinWave(a, s) => write!(f, "{a}:{s}"),
        }
    }
}

/// A spatial photonic mode or a spin-wave arm; the unit of "disjointness" for
/// tensor products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Site {
    Photon(Mode),
    Arm(Arm),
}

/// Logical content of one spin-wave arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinWaveLevel {
    Vac,
    Plus,
    Minus,
    Double,
}

/// Canonical sparse occupation list, sorted by key, zero entries omitted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BasisLabel(Vec<(ModeKey, u8)>);

impl BasisLabel {
    pub fn vacuum() -> Self {
        BasisLabel(Vec::new())
    }

    /// Builds a canonical label; repeated keys are summed.
    pub fn new(entries: impl IntoIterator<Item = (ModeKey, u8)>) -> Result<Self> {
        let mut v: Vec<(ModeKey, u8)> = Vec::new();
        for (k, n) in entries {
            if n == 0 {
                continue;
            }
            match v.iter_mut().find(|(key, _)| *key == k) {
                Some((_, m)) => *m += n,
                None => v.push((k, n)),
            }
        }
        v.sort_by_key(|(k, _)| *k);
        let label = BasisLabel(v);
        label.validate()?;
        Ok(label)
    }

    /// Single-excitation label on `keys`, one quantum per key.
    pub fn ones(keys: &[ModeKey]) -> Result<Self> {
        Self::new(keys.iter().map(|k| (*k, 1)))
    }

    pub(crate) fn from_sorted_unchecked(v: Vec<(ModeKey, u8)>) -> Self {
        BasisLabel(v)
    }

    fn validate(&self) -> Result<()> {
        for (k, n) in &self.0 {
            if *n > 2 {
                return Err(Error::domain(format!(
                    "occupation {n} on {k} exceeds the two-excitation truncation"
                )));
            }
        }
        let mut arm_total = [0u8; 2];
        for (k, n) in &self.0 {
            if let ModeKey::SpinWave(a, _) = k {
                arm_total[a.index()] += n;
            }
        }
        if arm_total.iter().any(|&t| t > 2) {
            return Err(Error::domain("more than two spin-wave excitations in one arm"));
        }
        // one polarization basis per spatial mode
        for w in self.0.windows(2) {
            if let (ModeKey::Photon(m1, p1), ModeKey::Photon(m2, p2)) = (w[0].0, w[1].0) {
                if m1 == m2 && p1.is_linear() != p2.is_linear() {
                    return Err(Error::domain(format!(
                        "mode {m1} mixes linear and circular polarization tags"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn entries(&self) -> &[(ModeKey, u8)] {
        &self.0
    }

    pub fn is_vacuum(&self) -> bool {
        self.0.is_empty()
    }

    pub fn occupation(&self, key: ModeKey) -> u8 {
        self.0
            .binary_search_by_key(&key, |(k, _)| *k)
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    /// Total photon number in a spatial mode, summed over polarizations.
    pub fn photons_in(&self, mode: Mode) -> u8 {
        self.0
            .iter()
            .filter(|(k, _)| matches!(k, ModeKey::Photon(m, _) if *m == mode))
            .map(|(_, n)| n)
            .sum()
    }

    pub fn total_photons(&self) -> u8 {
        self.0
            .iter()
            .filter(|(k, _)| matches!(k, ModeKey::Photon(..)))
            .map(|(_, n)| n)
            .sum()
    }

    pub fn spin_wave_excitations(&self, arm: Arm) -> u8 {
        self.0
            .iter()
            .filter(|(k, _)| matches!(k, ModeKey::SpinWave(a, _) if *a == arm))
            .map(|(_, n)| n)
            .sum()
    }

    /// Logical arm level, or `None` when the arm holds a dark Zeeman component.
    pub fn arm_level(&self, arm: Arm) -> Option<SpinWaveLevel> {
        let plus = self.occupation(ModeKey::SpinWave(arm, SwMode::PLUS));
        let minus = self.occupation(ModeKey::SpinWave(arm, SwMode::MINUS));
        if self.spin_wave_excitations(arm) != plus + minus {
            return None;
        }
        match (plus, minus) {
            (0, 0) => Some(SpinWaveLevel::Vac),
            (1, 0) => Some(SpinWaveLevel::Plus),
            (0, 1) => Some(SpinWaveLevel::Minus),
            (1, 1) => Some(SpinWaveLevel::Double),
            _ => None,
        }
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        self.0.iter().map(|(k, _)| k.site())
    }

    /// Label with every key of `site` removed.
    pub fn without_site(&self, site: Site) -> BasisLabel {
        BasisLabel(self.0.iter().filter(|(k, _)| k.site() != site).copied().collect())
    }

    /// Label with `key` removed.
    pub fn without(&self, key: ModeKey) -> BasisLabel {
        BasisLabel(self.0.iter().filter(|(k, _)| *k != key).copied().collect())
    }

    /// `√(Π nₖ!)`, the normalization of `Π (a†ₖ)^nₖ |0⟩`.
    pub(crate) fn sqrt_factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|(_, n)| if *n == 2 { 2f64.sqrt() } else { 1.0 })
            .product()
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("vac");
        }
        for (i, (k, n)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}={n}")?;
        }
        Ok(())
    }
}
