use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ket::JointKet;
use super::label::{BasisLabel, Site};
use super::map::{LinearMap, MapKind};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const EIGEN_FLOOR: f64 = -1e-10;

/// Density operator over an explicit, canonically ordered list of labels.
#[derive(Debug, Clone)]
pub struct DensityOp {
    basis: Vec<BasisLabel>,
    matrix: DMatrix<Complex64>,
}

impl DensityOp {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(basis: Vec<BasisLabel>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = basis.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Dimension {
                expected: n,
                got: matrix.nrows(),
            });
        }
        let mut sorted = basis.clone();
        sorted.sort();
        sorted.dedup();
        if sorted != basis {
            return Err(Error::domain("density basis must be sorted and unique"));
        }
        let herm = (&matrix - matrix.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if herm > HERMITIAN_TOL {
            return Err(Error::domain(format!("density matrix not Hermitian ({herm:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::domain(format!("density trace {tr} differs from 1")));
        }
        let rho = DensityOp { basis, matrix };
        let min = rho.min_eigenvalue();
        if min < EIGEN_FLOOR {
            return Err(Error::domain(format!("density matrix has eigenvalue {min}")));
        }
        Ok(rho)
    }

    pub fn basis(&self) -> &[BasisLabel] {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        if self.basis.is_empty() {
            return 0.0;
        }
        self.matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b))
    }

    pub fn element(&self, row: &BasisLabel, col: &BasisLabel) -> Complex64 {
        match (self.basis.binary_search(row), self.basis.binary_search(col)) {
            (Ok(i), Ok(j)) => self.matrix[(i, j)],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// Populations `⟨l|ρ|l⟩` for every basis label.
    pub fn populations(&self) -> Vec<(BasisLabel, f64)> {
        self.basis
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), self.matrix[(i, i)].re))
            .collect()
    }

    /// Maximally mixed state on the given labels.
    pub fn maximally_mixed(labels: &[BasisLabel]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::domain("maximally mixed state needs at least one label"));
        }
        let mut basis = labels.to_vec();
        basis.sort();
        basis.dedup();
        let n = basis.len();
        let m = DMatrix::from_diagonal_element(n, n, Complex64::new(1.0 / n as f64, 0.0));
        Self::new(basis, m)
    }

    /// `U ρ U†` for a unitary map.
    pub fn apply_unitary(&self, map: &LinearMap) -> Result<DensityOp> {
        if map.kind() != MapKind::Unitary {
            return Err(Error::domain("density operators only take unitary maps"));
        }
        let sites: Vec<Site> = map.input_sites();
        // Image of every basis label, as a ket.
        let images: Vec<JointKet> = self
            .basis
            .iter()
            .map(|l| {
                let ket = JointKet::basis(sites.iter().copied(), l.clone());
                ket.apply_map(map)
            })
            .collect::<Result<_>>()?;
        let mut new_basis: Vec<BasisLabel> =
            images.iter().flat_map(|k| k.terms().map(|(l, _)| l.clone())).collect();
        new_basis.sort();
        new_basis.dedup();
        let idx: BTreeMap<&BasisLabel, usize> =
            new_basis.iter().enumerate().map(|(i, l)| (l, i)).collect();
        let mut t = DMatrix::<Complex64>::zeros(new_basis.len(), self.basis.len());
        for (j, img) in images.iter().enumerate() {
            for (l, a) in img.terms() {
                t[(idx[l], j)] = *a;
            }
        }
        let m = &t * &self.matrix * t.adjoint();
        Ok(DensityOp {
            basis: new_basis,
            matrix: hermitize(m),
        })
    }

    /// `Tr(ρ · |ψ⟩⟨ψ|)`.
    pub fn fidelity_with(&self, ket: &JointKet) -> f64 {
        let psi: Vec<Complex64> = self.basis.iter().map(|l| ket.amplitude(l)).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += psi[i].conj() * self.matrix[(i, j)] * psi[j];
            }
        }
        acc.re
    }
}

fn hermitize(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    (&m + m.adjoint()).map(|c| c * 0.5)
}

/// Rank-one density operator of the normalized ket.
pub fn to_density(state: &JointKet) -> Result<DensityOp> {
    let psi = state.normalized()?;
    let basis: Vec<BasisLabel> = psi.terms().map(|(l, _)| l.clone()).collect();
    let amps: Vec<Complex64> = psi.terms().map(|(_, a)| *a).collect();
    let n = basis.len();
    let m = DMatrix::from_fn(n, n, |i, j| amps[i] * amps[j].conj());
    DensityOp::new(basis, hermitize(m))
}

/// Convex combination `Σ wᵢ ρᵢ`; weights must be non-negative and sum to 1.
pub fn mix(ops: &[(f64, DensityOp)]) -> Result<DensityOp> {
    if ops.is_empty() {
        return Err(Error::domain("mix needs at least one operator"));
    }
    if let Some((w, _)) = ops.iter().find(|(w, _)| *w < 0.0 || !w.is_finite()) {
        return Err(Error::domain(format!("negative mixing weight {w}")));
    }
    let total: f64 = ops.iter().map(|(w, _)| w).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::domain(format!("mixing weights sum to {total}, not 1")));
    }
    let mut basis: Vec<BasisLabel> =
        ops.iter().flat_map(|(_, r)| r.basis.iter().cloned()).collect();
    basis.sort();
    basis.dedup();
    let idx: BTreeMap<&BasisLabel, usize> =
        basis.iter().enumerate().map(|(i, l)| (l, i)).collect();
    let n = basis.len();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for (w, r) in ops {
        for (i, li) in r.basis.iter().enumerate() {
            for (j, lj) in r.basis.iter().enumerate() {
                m[(idx[li], idx[lj])] += r.matrix[(i, j)] * *w;
            }
        }
    }
    DensityOp::new(basis, hermitize(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::label::{Arm, Mode, ModeKey, Pol};

    fn lab(p: Pol) -> BasisLabel {
        BasisLabel::ones(&[ModeKey::photon(Mode::Stokes(Arm::A1), p)]).unwrap()
    }

    fn ket(p: Pol) -> JointKet {
        JointKet::basis([Site::Photon(Mode::Stokes(Arm::A1))], lab(p))
    }

    #[test]
    fn pure_state_projector() {
        let rho = to_density(&ket(Pol::H)).unwrap();
        assert_eq!(rho.dim(), 1);
        assert!((rho.trace() - 1.0).abs() < 1e-15);
        assert!((rho.fidelity_with(&ket(Pol::H)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn equal_mixture_is_diagonal() {
        let rho = mix(&[
            (0.5, to_density(&ket(Pol::H)).unwrap()),
            (0.5, to_density(&ket(Pol::V)).unwrap()),
        ])
        .unwrap();
        assert_eq!(rho.element(&lab(Pol::H), &lab(Pol::H)).re, 0.5);
        assert_eq!(rho.element(&lab(Pol::V), &lab(Pol::V)).re, 0.5);
        assert_eq!(rho.element(&lab(Pol::H), &lab(Pol::V)).norm(), 0.0);
    }

    #[test]
    fn negative_weight_rejected() {
        let r = to_density(&ket(Pol::H)).unwrap();
        assert!(mix(&[(1.5, r.clone()), (-0.5, r)]).is_err());
    }

    #[test]
    fn non_hermitian_rejected() {
        let basis = vec![lab(Pol::H), lab(Pol::V)];
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.5, 0.0),
                Complex64::new(0.3, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.5, 0.0),
            ],
        );
        assert!(DensityOp::new(basis, m).is_err());
    }
}
