use std::collections::{BTreeMap, BTreeSet};

use super::detector::{ClickSet, DetectorSpec};
use crate::error::{Error, Result};
use crate::hilbert::{BasisLabel, Mode, ModeKey, Pol, Populations};

/// Probability of every detector click pattern, including the empty one.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    detectors: Vec<String>,
    entries: Vec<(ClickSet, f64)>,
}

impl OutcomeDistribution {
    /// Sorts and merges `entries`; probabilities must be non-negative.
    pub fn new(detectors: Vec<String>, entries: impl IntoIterator<Item = (ClickSet, f64)>) -> Result<Self> {
        let mut map: BTreeMap<ClickSet, f64> = BTreeMap::new();
        for (set, p) in entries {
            if p < 0.0 || !p.is_finite() {
                return Err(Error::domain(format!("negative probability {p} for {set}")));
            }
            if set.detectors().any(|d| d >= detectors.len()) {
                return Err(Error::domain(format!("click set {set} names an undeclared detector")));
            }
            *map.entry(set).or_default() += p;
        }
        let total: f64 = map.values().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::domain(format!("probabilities sum to {total} > 1")));
        }
        Ok(OutcomeDistribution {
            detectors,
            entries: map.into_iter().filter(|(_, p)| *p > 0.0).collect(),
        })
    }

    /// Relative frequencies of observed click sets.
    pub fn empirical<'a>(detectors: Vec<String>, sets: impl IntoIterator<Item = &'a ClickSet>) -> Result<Self> {
        let mut counts: BTreeMap<ClickSet, u64> = BTreeMap::new();
        let mut n = 0u64;
        for s in sets {
            *counts.entry(s.clone()).or_default() += 1;
            n += 1;
        }
        if n == 0 {
            return Err(Error::domain("no outcomes to tabulate"));
        }
        Self::new(detectors, counts.into_iter().map(|(s, k)| (s, k as f64 / n as f64)))
    }

    pub fn detectors(&self) -> &[String] {
        &self.detectors
    }

    pub fn entries(&self) -> &[(ClickSet, f64)] {
        &self.entries
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    pub fn probability(&self, set: &ClickSet) -> f64 {
        self.entries
            .binary_search_by(|(s, _)| s.cmp(set))
            .map_or(0.0, |i| self.entries[i].1)
    }

    /// Total probability of click sets containing every detector in `pattern`.
    pub fn probability_containing(&self, pattern: &ClickSet) -> f64 {
        self.entries
            .iter()
            .filter(|(s, _)| s.contains(pattern))
            .map(|(_, p)| p)
            .sum()
    }

    pub fn p_nonempty(&self) -> f64 {
        self.p_where(|s| !s.is_empty())
    }

    /// Total probability of click sets satisfying `pred`.
    pub fn p_where(&self, pred: impl Fn(&ClickSet) -> bool) -> f64 {
        self.entries.iter().filter(|(s, _)| pred(s)).map(|(_, p)| p).sum()
    }

    /// Distribution of click sets given at least one click.
    pub fn conditioned_nonempty(&self) -> Result<Self> {
        self.conditioned(|s| !s.is_empty())
    }

    /// Distribution of click sets given that `pred` holds.
    pub fn conditioned(&self, pred: impl Fn(&ClickSet) -> bool) -> Result<Self> {
        let p = self.p_where(&pred);
        if p <= 0.0 {
            return Err(Error::domain("the conditioning event has zero probability"));
        }
        Ok(OutcomeDistribution {
            detectors: self.detectors.clone(),
            entries: self
                .entries
                .iter()
                .filter(|(s, _)| pred(s))
                .map(|(s, q)| (s.clone(), q / p))
                .collect(),
        })
    }

    /// `Σ wᵢ Dᵢ` over distributions sharing one detector list.
    pub fn mixture(parts: &[(f64, OutcomeDistribution)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::domain("empty mixture"))?;
        if parts.iter().any(|(_, d)| d.detectors != first.1.detectors) {
            return Err(Error::domain("mixture components use different detectors"));
        }
        if parts.iter().any(|(w, _)| *w < 0.0) {
            return Err(Error::domain("negative mixture weight"));
        }
        Self::new(
            first.1.detectors.clone(),
            parts
                .iter()
                .flat_map(|(w, d)| d.entries.iter().map(move |(s, p)| (s.clone(), w * p))),
        )
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.detectors.iter().position(|d| d == id)
    }

    /// Click set from detector ids.
    pub fn pattern(&self, ids: &[&str]) -> Result<ClickSet> {
        let idx: Vec<usize> = ids
            .iter()
            .map(|id| self.index_of(id).ok_or_else(|| Error::domain(format!("unknown detector `{id}`"))))
            .collect::<Result<_>>()?;
        Ok(ClickSet::of(&idx))
    }

    pub fn render(&self, set: &ClickSet) -> String {
        set.render(&self.detectors)
    }

    /// `½ Σ |p − q|` over the union of click sets.
    pub fn total_variation(&self, other: &OutcomeDistribution) -> f64 {
        let keys: BTreeSet<&ClickSet> = self
            .entries
            .iter()
            .chain(&other.entries)
            .map(|(s, _)| s)
            .collect();
        0.5 * keys
            .into_iter()
            .map(|s| (self.probability(s) - other.probability(s)).abs())
            .sum::<f64>()
    }
}

fn check_detectors(detectors: &[DetectorSpec]) -> Result<BTreeMap<Mode, BTreeSet<Pol>>> {
    let mut ids = BTreeSet::new();
    let mut keys: BTreeSet<ModeKey> = BTreeSet::new();
    let mut watched: BTreeMap<Mode, BTreeSet<Pol>> = BTreeMap::new();
    for d in detectors {
        d.validate()?;
        if !ids.insert(d.id.as_str()) {
            return Err(Error::domain(format!("detector id `{}` declared twice", d.id)));
        }
        if !keys.insert(d.key()) {
            return Err(Error::domain(format!("two detectors watch {}", d.key())));
        }
        watched.entry(d.mode).or_default().insert(d.pol);
    }
    for (mode, pols) in &watched {
        let linear: BTreeSet<Pol> = [Pol::H, Pol::V].into();
        let circular: BTreeSet<Pol> = [Pol::R, Pol::L].into();
        if *pols != linear && *pols != circular {
            return Err(Error::domain(format!(
                "detectors on {mode} do not cover a complete polarization basis"
            )));
        }
    }
    Ok(watched)
}

fn label_outcomes(
    label: &BasisLabel,
    detectors: &[DetectorSpec],
    watched: &BTreeMap<Mode, BTreeSet<Pol>>,
    weight: f64,
    out: &mut BTreeMap<ClickSet, f64>,
) -> Result<()> {
    for &(k, n) in label.entries() {
        if let ModeKey::Photon(mode, pol) = k {
            if n > 0 && watched.get(&mode).is_some_and(|p| !p.contains(&pol)) {
                return Err(Error::domain(format!(
                    "photon in {k} is not covered by the detectors on {mode}"
                )));
            }
        }
    }
    let responses: Vec<Vec<(u8, f64)>> = detectors.iter().map(|d| d.response(label.occupation(d.key()))).collect();
    let mut clicks: Vec<(u16, u8)> = Vec::new();
    enumerate(&responses, 0, weight, &mut clicks, out);
    Ok(())
}

fn enumerate(
    responses: &[Vec<(u8, f64)>],
    i: usize,
    p: f64,
    clicks: &mut Vec<(u16, u8)>,
    out: &mut BTreeMap<ClickSet, f64>,
) {
    if p == 0.0 {
        return;
    }
    if i == responses.len() {
        *out.entry(ClickSet::from_sorted(clicks.clone())).or_default() += p;
        return;
    }
    for &(k, q) in &responses[i] {
        if k > 0 {
            clicks.push((i as u16, k));
        }
        enumerate(responses, i + 1, p * q, clicks, out);
        if k > 0 {
            clicks.pop();
        }
    }
}

/// Exact click statistics of `state` under `detectors`.
///
/// Efficiency thinning and dark counts are summed analytically. Weight lost
/// earlier in the pipeline reached no detector and is counted as vacuum.
/// Photons in unwatched modes (and spin-wave excitations) are traced out.
pub fn outcome_distribution<S: Populations>(state: &S, detectors: &[DetectorSpec]) -> Result<OutcomeDistribution> {
    let watched = check_detectors(detectors)?;
    let mut out: BTreeMap<ClickSet, f64> = BTreeMap::new();
    for (label, w) in state.populations() {
        label_outcomes(&label, detectors, &watched, w, &mut out)?;
    }
    let lost = state.lost_weight();
    if lost > 0.0 {
        label_outcomes(&BasisLabel::vacuum(), detectors, &watched, lost, &mut out)?;
    }
    OutcomeDistribution::new(detectors.iter().map(|d| d.id.clone()).collect(), out)
}
