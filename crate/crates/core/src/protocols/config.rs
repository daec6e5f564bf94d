use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::timing::TimingSequence;
use crate::error::{Error, Result};
use crate::hilbert::{Arm, Mode};
use crate::optics::{AnalyzerKind, AnalyzerSetting};
use crate::source::{
    larmor_rate, LevelScheme, PerArm, PhaseModel, RetrievalWeighting, SourceParams, DEFAULT_CHI, DEFAULT_G_FACTOR,
    DEFAULT_RETRIEVAL_EFF,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Pair,
    Ghz3,
    Swap,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Pair => "pair",
            Protocol::Ghz3 => "ghz3",
            Protocol::Swap => "swap",
        })
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pair" => Ok(Protocol::Pair),
            "ghz3" => Ok(Protocol::Ghz3),
            "swap" => Ok(Protocol::Swap),
            _ => Err(Error::invalid("protocol", format!("unknown protocol `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    #[default]
    Exact,
    Mc,
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngineKind::Exact => "exact",
            EngineKind::Mc => "mc",
        })
    }
}

impl FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(EngineKind::Exact),
            "mc" => Ok(EngineKind::Mc),
            _ => Err(Error::invalid("engine", format!("unknown engine `{s}`"))),
        }
    }
}

/// Which Monte Carlo trials are written to the record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordTrigger {
    /// Trials with at least one click on every photon the protocol analyzes.
    #[default]
    Coincidence,
    /// Trials with any click.
    AnyClick,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelsConfig {
    pub f_b: i32,
    pub f_e2: i32,
}

impl Default for LevelsConfig {
    fn default() -> Self {
        LevelsConfig { f_b: 2, f_e2: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceConfig {
    pub chi: f64,
    /// Bias field in mG.
    pub field_mg: f64,
    pub g_factor: f64,
    /// Precession rate override in rad/s; derived from the field when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub double_excitations: bool,
    pub phase_model: PhaseModel,
    pub retrieval_weighting: RetrievalWeighting,
    pub retrieval_eff: PerArm<f64>,
    pub visibility: PerArm<f64>,
    pub levels: LevelsConfig,
}

impl Default for SourceConfig {
    fn default() -> Self {
        SourceConfig {
            chi: DEFAULT_CHI,
            field_mg: 200.0,
            g_factor: DEFAULT_G_FACTOR,
            beta: None,
            double_excitations: true,
            phase_model: PhaseModel::default(),
            retrieval_weighting: RetrievalWeighting::default(),
            retrieval_eff: PerArm::splat(DEFAULT_RETRIEVAL_EFF),
            visibility: PerArm::splat(1.0),
            levels: LevelsConfig::default(),
        }
    }
}

impl SourceConfig {
    pub fn beta(&self) -> f64 {
        self.beta
            .unwrap_or_else(|| larmor_rate(self.g_factor, self.field_mg * 1e-3))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorConfig {
    /// Overall detection efficiency of every detector unless overridden.
    pub efficiency: f64,
    pub dark_count: f64,
    pub number_resolving: bool,
    /// Per-detector efficiency by id, e.g. `D_H3 = 0.25`.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<String, f64>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            efficiency: 0.30,
            dark_count: 0.0,
            number_resolving: false,
            overrides: BTreeMap::new(),
        }
    }
}

impl DetectorConfig {
    pub fn efficiency_of(&self, id: &str) -> f64 {
        self.overrides.get(id).copied().unwrap_or(self.efficiency)
    }
}

fn default_mc_trials() -> u64 {
    100_000
}

fn default_taus() -> Vec<f64> {
    vec![30.0]
}

/// One experiment: protocol, source, detection, analyzer settings, timing
/// and engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub protocol: Protocol,
    #[serde(default)]
    pub engine: EngineKind,
    /// Recorded trials per measurement setting.
    #[serde(default = "default_mc_trials")]
    pub mc_trials: u64,
    #[serde(default)]
    pub mc_record: RecordTrigger,
    #[serde(default)]
    pub seed: u64,
    /// Storage times in ns.
    #[serde(default = "default_taus")]
    pub taus: Vec<f64>,
    #[serde(default)]
    pub source: SourceConfig,
    #[serde(default)]
    pub detectors: DetectorConfig,
    #[serde(default)]
    pub timing: TimingSequence,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub settings: Vec<AnalyzerSetting>,
}

/// Anti-Stokes analyzer angles of the swap CHSH grid.
pub const SWAP_GRID: ([f64; 2], [f64; 2]) = ([0.0, 45.0], [22.5, 67.5]);

/// `(θ_s, θ′_s)` and `(θ_as, θ′_as)`.
pub const CANONICAL_GRID: ([f64; 2], [f64; 2]) = ([0.0, 45.0], [22.5, 67.5]);

impl ExperimentConfig {
    /// Defaults for `protocol`, with analyzer settings filled in.
    pub fn new(protocol: Protocol) -> Self {
        let mut c = ExperimentConfig {
            protocol,
            engine: EngineKind::Exact,
            mc_trials: default_mc_trials(),
            mc_record: RecordTrigger::default(),
            seed: 0,
            taus: default_taus(),
            source: SourceConfig::default(),
            detectors: DetectorConfig::default(),
            timing: TimingSequence::default(),
            settings: Vec::new(),
        };
        c.resolve().expect("defaults are valid");
        c
    }

    /// Unit visibility, no double excitations, zero storage time.
    pub fn ideal(protocol: Protocol) -> Self {
        let mut c = Self::new(protocol);
        c.source.visibility = PerArm::splat(1.0);
        c.source.double_excitations = false;
        c.taus = vec![0.0];
        c
    }

    /// Fills protocol-default analyzer settings and validates everything.
    pub fn resolve(&mut self) -> Result<()> {
        match self.protocol {
            Protocol::Pair => self.resolve_pair_settings()?,
            Protocol::Swap => {
                if self.settings.is_empty() {
                    self.settings = grid(Mode::AntiStokes(Arm::A1), Mode::AntiStokes(Arm::A2), SWAP_GRID)?;
                }
            }
            Protocol::Ghz3 => {
                if !self.settings.is_empty() {
                    return Err(Error::invalid(
                        "settings",
                        "the ghz3 protocol uses its fixed Pauli settings; remove this section",
                    ));
                }
            }
        }
        self.validate()
    }

    fn resolve_pair_settings(&mut self) -> Result<()> {
        let on = |m: Mode| -> Vec<AnalyzerSetting> { self.settings.iter().filter(|s| s.mode == m).copied().collect() };
        let mut resolved = Vec::new();
        for arm in Arm::ALL {
            let other = match arm {
                Arm::A1 => Arm::A2,
                Arm::A2 => Arm::A1,
            };
            let (s, a) = (Mode::Stokes(arm), Mode::AntiStokes(arm));
            let (mut ss, mut aa) = (on(s), on(a));
            if ss.is_empty() && aa.is_empty() {
                ss = on(Mode::Stokes(other)).into_iter().map(|x| AnalyzerSetting { mode: s, ..x }).collect();
                aa = on(Mode::AntiStokes(other)).into_iter().map(|x| AnalyzerSetting { mode: a, ..x }).collect();
            }
            if ss.is_empty() && aa.is_empty() {
                resolved.extend(grid(s, a, CANONICAL_GRID)?);
            } else {
                resolved.extend(ss);
                resolved.extend(aa);
            }
        }
        if let Some(bad) = self.settings.iter().find(|x| !matches!(x.mode, Mode::Stokes(_) | Mode::AntiStokes(_))) {
            return Err(Error::invalid(
                "settings",
                format!("pair analyzers act on Stokes and anti-Stokes modes, not {}", bad.mode),
            ));
        }
        self.settings = resolved;
        Ok(())
    }

    /// The four CHSH settings `((a, a′), (b, b′))` on modes `ma` and `mb`.
    pub fn chsh_settings(&self, ma: Mode, mb: Mode) -> Result<([AnalyzerSetting; 2], [AnalyzerSetting; 2])> {
        let pick = |m: Mode| -> Result<[AnalyzerSetting; 2]> {
            let v: Vec<AnalyzerSetting> = self.settings.iter().filter(|s| s.mode == m).copied().collect();
            if v.len() != 2 {
                return Err(Error::invalid(
                    "settings",
                    format!("need exactly two analyzer settings on {m}, found {}", v.len()),
                ));
            }
            if v[0] == v[1] {
                return Err(Error::invalid("settings", format!("the two settings on {m} coincide")));
            }
            Ok([v[0], v[1]])
        };
        Ok((pick(ma)?, pick(mb)?))
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.source;
        let unit = |path: String, v: f64| -> Result<()> {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::invalid(path, format!("{v} outside [0, 1]")))
            }
        };
        if !(s.chi > 0.0 && s.chi <= 0.2) {
            return Err(Error::invalid("source.chi", format!("{} outside (0, 0.2]", s.chi)));
        }
        if !(s.field_mg >= 0.0 && s.field_mg.is_finite()) {
            return Err(Error::invalid("source.field_mg", "must be finite and non-negative"));
        }
        if !(s.g_factor >= 0.0 && s.g_factor.is_finite()) {
            return Err(Error::invalid("source.g_factor", "must be finite and non-negative"));
        }
        if let Some(b) = s.beta {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(Error::invalid("source.beta", "must be finite and non-negative"));
            }
        }
        for arm in Arm::ALL {
            unit(format!("source.retrieval_eff.{arm}"), s.retrieval_eff[arm])?;
            unit(format!("source.visibility.{arm}"), s.visibility[arm])?;
        }
        LevelScheme::new(s.levels.f_b, s.levels.f_e2)
            .and_then(|l| crate::source::spin_wave_weights(&l))
            .map_err(|e| Error::invalid("source.levels", e.to_string()))?;

        unit("detectors.efficiency".into(), self.detectors.efficiency)?;
        if !(0.0..1.0).contains(&self.detectors.dark_count) {
            return Err(Error::invalid("detectors.dark_count", "must lie in [0, 1)"));
        }
        let ids = super::detector_ids(self.protocol);
        for (id, v) in &self.detectors.overrides {
            if !ids.iter().any(|k| k == id) {
                return Err(Error::invalid(
                    format!("detectors.overrides.{id}"),
                    format!("no detector `{id}` in the {} protocol", self.protocol),
                ));
            }
            unit(format!("detectors.overrides.{id}"), *v)?;
        }

        if self.engine == EngineKind::Mc && self.mc_trials == 0 {
            return Err(Error::invalid("mc_trials", "must be positive for the mc engine"));
        }
        if self.taus.is_empty() {
            return Err(Error::invalid("taus", "need at least one storage time"));
        }
        for (i, &t) in self.taus.iter().enumerate() {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::invalid(format!("taus[{i}]"), format!("{t} is not a valid storage time")));
            }
            self.timing
                .trials_per_run(t)
                .map_err(|e| Error::invalid(format!("taus[{i}]"), e.to_string()))?;
        }
        self.timing.validate()?;
        for (i, st) in self.settings.iter().enumerate() {
            st.validate()
                .map_err(|e| Error::invalid(format!("settings[{i}].theta"), e.to_string()))?;
            if st.kind != AnalyzerKind::Linear && self.protocol != Protocol::Ghz3 {
                return Err(Error::invalid(format!("settings[{i}].kind"), "CHSH analyzers must be linear"));
            }
        }
        match self.protocol {
            Protocol::Pair => {
                for arm in Arm::ALL {
                    self.chsh_settings(Mode::Stokes(arm), Mode::AntiStokes(arm))?;
                }
            }
            Protocol::Swap => {
                self.chsh_settings(Mode::AntiStokes(Arm::A1), Mode::AntiStokes(Arm::A2))?;
                if self.settings.len() != 4 {
                    return Err(Error::invalid("settings", "swap analyzers act on AS1 and AS2 only"));
                }
            }
            Protocol::Ghz3 => {}
        }
        Ok(())
    }

    /// Source parameters at storage time `tau_ns`.
    pub fn source_params(&self, tau_ns: f64) -> Result<SourceParams> {
        let s = &self.source;
        let scheme = LevelScheme::new(s.levels.f_b, s.levels.f_e2)?;
        let mut p = SourceParams::from_scheme(s.chi, &scheme)?;
        p.field_gauss = s.field_mg * 1e-3;
        p.beta = s.beta();
        p.tau = tau_ns * 1e-9;
        p.retrieval_eff = s.retrieval_eff;
        p.visibility = s.visibility;
        p.double_excitations = s.double_excitations;
        p.phase_model = s.phase_model;
        p.retrieval_weighting = s.retrieval_weighting;
        p.validate()?;
        Ok(p)
    }
}

fn grid(ma: Mode, mb: Mode, (a, b): ([f64; 2], [f64; 2])) -> Result<Vec<AnalyzerSetting>> {
    Ok(vec![
        AnalyzerSetting::linear(ma, a[0])?,
        AnalyzerSetting::linear(ma, a[1])?,
        AnalyzerSetting::linear(mb, b[0])?,
        AnalyzerSetting::linear(mb, b[1])?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_defaults_fill_both_arms() {
        let c = ExperimentConfig::new(Protocol::Pair);
        assert_eq!(c.settings.len(), 8);
        let ((a, _), (b, _)) = {
            let (s, t) = c.chsh_settings(Mode::Stokes(Arm::A2), Mode::AntiStokes(Arm::A2)).unwrap();
            ((s[0].theta, s[1].theta), (t[0].theta, t[1].theta))
        };
        assert_eq!((a, b), (0.0, 22.5));
    }

    #[test]
    fn one_arm_settings_are_mirrored() {
        let mut c = ExperimentConfig::new(Protocol::Pair);
        c.settings = grid(Mode::Stokes(Arm::A1), Mode::AntiStokes(Arm::A1), ([10.0, 55.0], [32.5, 77.5])).unwrap();
        c.resolve().unwrap();
        let (s, _) = c.chsh_settings(Mode::Stokes(Arm::A2), Mode::AntiStokes(Arm::A2)).unwrap();
        assert_eq!(s[1].theta, 55.0);
    }

    #[test]
    fn ghz_rejects_settings() {
        let mut c = ExperimentConfig::new(Protocol::Ghz3);
        c.settings = vec![AnalyzerSetting::linear(Mode::Stokes(Arm::A1), 0.0).unwrap()];
        assert!(c.resolve().is_err());
    }

    #[test]
    fn bad_chi_names_path() {
        let mut c = ExperimentConfig::new(Protocol::Pair);
        c.source.chi = -1.0;
        match c.validate().unwrap_err() {
            Error::Invalid { path, .. } => assert_eq!(path, "source.chi"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn unknown_override_rejected() {
        let mut c = ExperimentConfig::new(Protocol::Swap);
        c.detectors.overrides.insert("D_HS1".into(), 0.5);
        assert!(c.validate().is_err());
    }

    #[test]
    fn default_beta() {
        let c = ExperimentConfig::new(Protocol::Pair);
        assert!((c.source.beta() - 8.794e5).abs() < 1e2);
    }
}
