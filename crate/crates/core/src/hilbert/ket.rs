use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use num_complex::Complex64;

use super::label::{BasisLabel, ModeKey, Site};
use super::map::{LinearMap, MapKind};
use crate::error::{Error, Result};

/// Amplitudes below this magnitude are dropped after every operation.
pub const PRUNE_EPS: f64 = 1e-15;

/// Pure state over labeled bosonic modes, with traced-out loss recorded in
/// `norm_deficit` so that `Σ|amp|² + norm_deficit = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointKet {
    terms: BTreeMap<BasisLabel, Complex64>,
    norm_deficit: f64,
    sites: BTreeSet<Site>,
}

/// Outcome of [`JointKet::project`].
#[derive(Debug, Clone)]
pub struct Projection {
    pub probability: f64,
    /// Renormalized post-measurement state; empty when `probability == 0`.
    pub state: JointKet,
}

impl JointKet {
    pub fn vacuum() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(BasisLabel::vacuum(), Complex64::new(1.0, 0.0));
        JointKet {
            terms,
            norm_deficit: 0.0,
            sites: BTreeSet::new(),
        }
    }

    /// Normalized superposition of `terms` acting on `sites`.
    pub fn from_terms(
        sites: impl IntoIterator<Item = Site>,
        terms: impl IntoIterator<Item = (BasisLabel, Complex64)>,
    ) -> Result<Self> {
        let mut sites: BTreeSet<Site> = sites.into_iter().collect();
        let mut map: BTreeMap<BasisLabel, Complex64> = BTreeMap::new();
        for (label, amp) in terms {
            sites.extend(label.sites());
            *map.entry(label).or_default() += amp;
        }
        let norm = map.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::domain("cannot normalize a zero state"));
        }
        for a in map.values_mut() {
            *a /= norm;
        }
        let mut ket = JointKet {
            terms: map,
            norm_deficit: 0.0,
            sites,
        };
        ket.prune();
        Ok(ket)
    }

    /// Single basis state with amplitude 1.
    pub fn basis(sites: impl IntoIterator<Item = Site>, label: BasisLabel) -> Self {
        Self::from_terms(sites, [(label, Complex64::new(1.0, 0.0))]).expect("unit amplitude")
    }

    fn empty(sites: BTreeSet<Site>) -> Self {
        JointKet {
            terms: BTreeMap::new(),
            norm_deficit: 1.0,
            sites,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm_deficit(&self) -> f64 {
        self.norm_deficit
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn sites(&self) -> &BTreeSet<Site> {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisLabel, &Complex64)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, label: &BasisLabel) -> Complex64 {
        self.terms.get(label).copied().unwrap_or_default()
    }

    fn prune(&mut self) {
        self.terms.retain(|_, a| a.norm() >= PRUNE_EPS);
    }

    /// Product state on disjoint site sets.
    pub fn tensor(&self, other: &JointKet) -> Result<JointKet> {
        if let Some(s) = self.sites.intersection(&other.sites).next() {
            return Err(Error::domain(format!("tensor factors overlap on {s:?}")));
        }
        let mut terms = BTreeMap::new();
        for (la, aa) in &self.terms {
            for (lb, ab) in &other.terms {
                let entries: Vec<(ModeKey, u8)> =
                    la.entries().iter().chain(lb.entries()).copied().collect();
                let label = BasisLabel::new(entries)?;
                *terms.entry(label).or_default() += aa * ab;
            }
        }
        let mut ket = JointKet {
            terms,
            norm_deficit: 1.0 - (1.0 - self.norm_deficit) * (1.0 - other.norm_deficit),
            sites: self.sites.union(&other.sites).copied().collect(),
        };
        ket.prune();
        Ok(ket)
    }

    /// Applies a mode transformation to every creation operator in the state.
    pub fn apply_map(&self, map: &LinearMap) -> Result<JointKet> {
        for s in map.input_sites() {
            if !self.sites.contains(&s) {
                return Err(Error::domain(format!("map acts on {s:?}, absent from the state")));
            }
        }
        let index: HashMap<ModeKey, usize> =
            map.inputs().iter().enumerate().map(|(j, k)| (*k, j)).collect();
        let outputs = map.outputs();
        let m = map.matrix();

        let mut out: BTreeMap<BasisLabel, Complex64> = BTreeMap::new();
        for (label, amp) in &self.terms {
            let mut rest: Vec<(ModeKey, u8)> = Vec::new();
            let mut creations: Vec<usize> = Vec::new();
            let mut in_norm = 1.0;
            for &(k, n) in label.entries() {
                match index.get(&k) {
                    Some(&j) => {
                        creations.extend(std::iter::repeat_n(j, n as usize));
                        if n == 2 {
                            in_norm *= 2f64.sqrt();
                        }
                    }
                    None => rest.push((k, n)),
                }
            }
            let rest_norm = BasisLabel::from_sorted_unchecked(rest.clone()).sqrt_factorial();
            let mut counts = vec![0u8; outputs.len()];
            let mut leaves: Vec<(Vec<u8>, Complex64)> = Vec::new();
            expand(&creations, m, &mut counts, *amp / in_norm, &mut leaves);
            for (counts, coeff) in leaves {
                let entries = rest.iter().copied().chain(
                    counts
                        .iter()
                        .enumerate()
                        .filter(|(_, n)| **n > 0)
                        .map(|(i, n)| (outputs[i], *n)),
                );
                let new_label = BasisLabel::new(entries)?;
                let c = coeff * new_label.sqrt_factorial() / rest_norm;
                *out.entry(new_label).or_default() += c;
            }
        }

        let norm_in = self.norm_sqr();
        let mut sites: BTreeSet<Site> = self.sites.clone();
        for s in map.input_sites() {
            sites.remove(&s);
        }
        sites.extend(map.output_sites());
        let mut ket = JointKet {
            terms: out,
            norm_deficit: self.norm_deficit,
            sites,
        };
        ket.prune();
        for l in ket.terms.keys() {
            ket.sites.extend(l.sites());
        }
        if map.kind() == MapKind::IsometryWithLoss {
            ket.norm_deficit += (norm_in - ket.norm_sqr()).max(0.0);
        }
        Ok(ket)
    }

    /// Projects onto the span of basis labels satisfying `pred`.
    ///
    /// `probability` is the absolute weight of the accepted labels.
    pub fn project<F>(&self, pred: F) -> Projection
    where
        F: Fn(&BasisLabel) -> bool,
    {
        let kept: BTreeMap<BasisLabel, Complex64> = self
            .terms
            .iter()
            .filter(|(l, _)| pred(l))
            .map(|(l, a)| (l.clone(), *a))
            .collect();
        let probability: f64 = kept.values().map(|a| a.norm_sqr()).sum();
        if probability == 0.0 {
            return Projection {
                probability,
                state: JointKet::empty(self.sites.clone()),
            };
        }
        let norm = probability.sqrt();
        let terms = kept.into_iter().map(|(l, a)| (l, a / norm)).collect();
        let mut state = JointKet {
            terms,
            norm_deficit: 0.0,
            sites: self.sites.clone(),
        };
        state.prune();
        Projection { probability, state }
    }

    /// Unnormalized restriction to labels satisfying `pred` (no renormalization;
    /// dropped weight goes to `norm_deficit`).
    pub fn restrict<F>(&self, pred: F) -> JointKet
    where
        F: Fn(&BasisLabel) -> bool,
    {
        let terms: BTreeMap<BasisLabel, Complex64> = self
            .terms
            .iter()
            .filter(|(l, _)| pred(l))
            .map(|(l, a)| (l.clone(), *a))
            .collect();
        let kept: f64 = terms.values().map(|a| a.norm_sqr()).sum();
        JointKet {
            terms,
            norm_deficit: self.norm_deficit + (self.norm_sqr() - kept),
            sites: self.sites.clone(),
        }
    }

    /// Renormalized copy with zero deficit.
    pub fn normalized(&self) -> Result<JointKet> {
        let n = self.norm_sqr();
        if n == 0.0 {
            return Err(Error::domain("cannot normalize an empty state"));
        }
        let s = n.sqrt();
        Ok(JointKet {
            terms: self.terms.iter().map(|(l, a)| (l.clone(), a / s)).collect(),
            norm_deficit: 0.0,
            sites: self.sites.clone(),
        })
    }

    /// Removes `key` when every term has the same occupation of it, returning
    /// that occupation. Fails if the mode is entangled with the rest.
    pub fn factor_out(&self, key: ModeKey) -> Result<(u8, JointKet)> {
        let mut occ = None;
        for l in self.terms.keys() {
            let n = l.occupation(key);
            match occ {
                None => occ = Some(n),
                Some(o) if o != n => {
                    return Err(Error::domain(format!("{key} is not in a definite state")))
                }
                _ => {}
            }
        }
        let terms = self.terms.iter().map(|(l, a)| (l.without(key), *a)).collect();
        Ok((
            occ.unwrap_or(0),
            JointKet {
                terms,
                norm_deficit: self.norm_deficit,
                sites: self.sites.clone(),
            },
        ))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &JointKet) -> Complex64 {
        self.terms
            .iter()
            .map(|(l, a)| a.conj() * other.amplitude(l))
            .sum()
    }

    /// Largest per-label amplitude difference.
    pub fn distance(&self, other: &JointKet) -> f64 {
        let labels: BTreeSet<&BasisLabel> = self.terms.keys().chain(other.terms.keys()).collect();
        labels
            .into_iter()
            .map(|l| (self.amplitude(l) - other.amplitude(l)).norm())
            .fold(0.0, f64::max)
    }

    /// Same as [`distance`](Self::distance) after removing the global phase of
    /// `other` relative to `self`.
    pub fn distance_up_to_phase(&self, other: &JointKet) -> f64 {
        let ov = other.inner(self);
        let phase = if ov.norm() > 0.0 {
            ov / ov.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let rotated = JointKet {
            terms: other.terms.iter().map(|(l, a)| (l.clone(), a * phase)).collect(),
            norm_deficit: other.norm_deficit,
            sites: other.sites.clone(),
        };
        self.distance(&rotated)
    }

    #[cfg(test)]
    pub(crate) fn scaled(&self, c: Complex64) -> JointKet {
        JointKet {
            terms: self.terms.iter().map(|(l, a)| (l.clone(), a * c)).collect(),
            norm_deficit: self.norm_deficit,
            sites: self.sites.clone(),
        }
    }

    /// Debug text: one `label\tre\tim` line per term in canonical order.
    pub fn to_debug_text(&self) -> String {
        let mut s = String::new();
        for (l, a) in &self.terms {
            let re = if a.re == 0.0 { 0.0 } else { a.re };
            let im = if a.im == 0.0 { 0.0 } else { a.im };
            let _ = writeln!(s, "{l}\t{re:.15e}\t{im:.15e}");
        }
        s
    }
}

fn expand(
    creations: &[usize],
    m: &nalgebra::DMatrix<Complex64>,
    counts: &mut Vec<u8>,
    coeff: Complex64,
    leaves: &mut Vec<(Vec<u8>, Complex64)>,
) {
    match creations.split_first() {
        None => leaves.push((counts.clone(), coeff)),
        Some((&j, rest)) => {
            for i in 0..m.nrows() {
                let c = m[(i, j)];
                if c.norm() == 0.0 {
                    continue;
                }
                counts[i] += 1;
                expand(rest, m, counts, coeff * c, leaves);
                counts[i] -= 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::label::{Arm, Mode, Pol};
    use nalgebra::DMatrix;

    fn key(p: Pol) -> ModeKey {
        ModeKey::photon(Mode::Stokes(Arm::A1), p)
    }

    fn site() -> Site {
        Site::Photon(Mode::Stokes(Arm::A1))
    }

    fn one(p: Pol) -> BasisLabel {
        BasisLabel::ones(&[key(p)]).unwrap()
    }

    #[test]
    fn vacuum_tensor_vacuum() {
        let v = JointKet::vacuum().tensor(&JointKet::vacuum()).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.amplitude(&BasisLabel::vacuum()), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn tensor_is_bilinear() {
        let s2 = ModeKey::photon(Mode::Stokes(Arm::A2), Pol::H);
        let a = JointKet::basis([site()], one(Pol::H));
        let b = JointKet::basis([s2.site()], BasisLabel::ones(&[s2]).unwrap());
        let ab = a.scaled(Complex64::new(0.6, 0.0)).tensor(&b.scaled(Complex64::new(0.0, 0.5))).unwrap();
        let l = BasisLabel::ones(&[key(Pol::H), s2]).unwrap();
        assert!((ab.amplitude(&l) - Complex64::new(0.0, 0.3)).norm() < 1e-15);
    }

    #[test]
    fn tensor_overlap_is_error() {
        let a = JointKet::basis([site()], one(Pol::H));
        assert!(a.tensor(&a).is_err());
    }

    #[test]
    fn projection_of_diagonal_state() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let psi = JointKet::from_terms(
            [site()],
            [(one(Pol::H), Complex64::new(r, 0.0)), (one(Pol::V), Complex64::new(r, 0.0))],
        )
        .unwrap();
        let p = psi.project(|l| l.occupation(key(Pol::H)) == 1);
        assert!((p.probability - 0.5).abs() < 1e-15);
        assert!((p.state.amplitude(&one(Pol::H)).re - 1.0).abs() < 1e-15);

        let z = psi.project(|l| l.occupation(key(Pol::R)) == 1);
        assert_eq!(z.probability, 0.0);
        assert!(z.state.is_empty());
    }

    #[test]
    fn bunching_on_a_balanced_splitter() {
        // Hong-Ou-Mandel: |1,1⟩ → (|2,0⟩ − |0,2⟩)/√2
        let h = key(Pol::H);
        let v = key(Pol::V);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(r, 0.0),
                Complex64::new(r, 0.0),
                Complex64::new(r, 0.0),
                Complex64::new(-r, 0.0),
            ],
        );
        let bs = LinearMap::new(vec![h, v], vec![h, v], m, MapKind::Unitary).unwrap();
        let psi = JointKet::basis([site()], BasisLabel::ones(&[h, v]).unwrap());
        let out = psi.apply_map(&bs).unwrap();
        assert_eq!(out.len(), 2);
        let hh = BasisLabel::new([(h, 2)]).unwrap();
        let vv = BasisLabel::new([(v, 2)]).unwrap();
        assert!((out.amplitude(&hh).re - r).abs() < 1e-15);
        assert!((out.amplitude(&vv).re + r).abs() < 1e-15);
        assert!((out.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_map_is_noop() {
        let psi = JointKet::basis([site()], one(Pol::H));
        let id = LinearMap::identity(vec![key(Pol::H), key(Pol::V)]);
        assert_eq!(psi.apply_map(&id).unwrap(), psi);
    }

    #[test]
    fn map_on_missing_site_is_error() {
        let psi = JointKet::basis([site()], one(Pol::H));
        let other = ModeKey::photon(Mode::AntiStokes(Arm::A1), Pol::H);
        assert!(psi.apply_map(&LinearMap::identity(vec![other])).is_err());
    }

    #[test]
    fn factor_out_definite_mode() {
        let psi = JointKet::basis([site()], one(Pol::H));
        let (n, rest) = psi.factor_out(key(Pol::H)).unwrap();
        assert_eq!(n, 1);
        assert_eq!(rest.amplitude(&BasisLabel::vacuum()).re, 1.0);
    }

    #[test]
    fn debug_text_format() {
        let psi = JointKet::basis([site()], one(Pol::H));
        assert_eq!(psi.to_debug_text(), "S1:H=1\t1.000000000000000e0\t0.000000000000000e0\n");
    }
}
