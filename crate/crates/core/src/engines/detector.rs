use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{Mode, ModeKey, Pol};

/// Single-photon detector behind one polarization output of one mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorSpec {
    pub id: String,
    pub mode: Mode,
    pub pol: Pol,
    pub efficiency: f64,
    /// Probability of a spurious click per trial.
    pub dark_count: f64,
    pub number_resolving: bool,
}

impl DetectorSpec {
    pub fn new(id: impl Into<String>, mode: Mode, pol: Pol, efficiency: f64) -> Self {
        DetectorSpec {
            id: id.into(),
            mode,
            pol,
            efficiency,
            dark_count: 0.0,
            number_resolving: false,
        }
    }

    pub fn with_dark_count(mut self, p: f64) -> Self {
        self.dark_count = p;
        self
    }

    pub fn number_resolving(mut self, yes: bool) -> Self {
        self.number_resolving = yes;
        self
    }

    pub fn key(&self) -> ModeKey {
        ModeKey::photon(self.mode, self.pol)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::invalid(
                format!("detectors.{}", self.id),
                format!("efficiency {} outside [0, 1]", self.efficiency),
            ));
        }
        if !(0.0..1.0).contains(&self.dark_count) {
            return Err(Error::invalid(
                format!("detectors.{}", self.id),
                format!("dark-count probability {} outside [0, 1)", self.dark_count),
            ));
        }
        Ok(())
    }

    /// `(clicks, probability)` given `n` photons on the detector.
    pub(crate) fn response(&self, n: u8) -> Vec<(u8, f64)> {
        let eta = self.efficiency;
        let d = self.dark_count;
        if !self.number_resolving {
            let silent = (1.0 - eta).powi(i32::from(n)) * (1.0 - d);
            return vec![(0, silent), (1, 1.0 - silent)];
        }
        // binomial thinning, then an independent dark click
        let mut out = vec![0.0; usize::from(n) + 2];
        for k in 0..=n {
            let b = binomial(n, k) * eta.powi(i32::from(k)) * (1.0 - eta).powi(i32::from(n - k));
            out[usize::from(k)] += b * (1.0 - d);
            out[usize::from(k) + 1] += b * d;
        }
        out.into_iter()
            .enumerate()
            .map(|(k, p)| (k as u8, p))
            .collect()
    }
}

fn binomial(n: u8, k: u8) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Detector clicks of one trial: `(detector index, count)` sorted by index.
/// Count is 1 unless the detector resolves photon number.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClickSet(Vec<(u16, u8)>);

impl ClickSet {
    pub fn empty() -> Self {
        ClickSet(Vec::new())
    }

    /// Builds a set from detector indices, each with one click.
    pub fn of(indices: &[usize]) -> Self {
        let mut v: Vec<(u16, u8)> = indices.iter().map(|&i| (i as u16, 1)).collect();
        v.sort();
        v.dedup_by_key(|(i, _)| *i);
        ClickSet(v)
    }

    pub(crate) fn from_sorted(v: Vec<(u16, u8)>) -> Self {
        ClickSet(v)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn clicked(&self, detector: usize) -> bool {
        self.0.iter().any(|(i, _)| usize::from(*i) == detector)
    }

    pub fn count(&self, detector: usize) -> u8 {
        self.0
            .iter()
            .find(|(i, _)| usize::from(*i) == detector)
            .map_or(0, |(_, n)| *n)
    }

    pub fn detectors(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|(i, _)| usize::from(*i))
    }

    /// Every detector of `pattern` clicked in `self`.
    pub fn contains(&self, pattern: &ClickSet) -> bool {
        pattern.detectors().all(|d| self.clicked(d))
    }

    /// Renders the set with detector names, `;`-joined; multiple counts get
    /// an `xN` suffix.
    pub fn render(&self, names: &[String]) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|&(i, n)| {
                let name = &names[usize::from(i)];
                if n > 1 {
                    format!("{name}x{n}")
                } else {
                    name.clone()
                }
            })
            .collect();
        parts.join(";")
    }
}

impl fmt::Display for ClickSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(i, n)| format!("{i}:{n}")).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}
