use nalgebra::DMatrix;
use num_complex::Complex64;

use super::label::{ModeKey, Site};
use crate::error::{Error, Result};

const UNITARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    /// Columns orthonormal; norm preserving.
    Unitary,
    /// Contraction: lost weight is traced into an implicit environment.
    IsometryWithLoss,
}

/// Linear transformation of single-excitation mode operators.
///
/// Column `j` gives the image of a photon (or spin-wave quantum) in
/// `inputs[j]` as a superposition over `outputs`. Multi-excitation states
/// transform by expanding the product of creation operators. Keys absent
/// from `inputs` pass through untouched.
#[derive(Debug, Clone)]
pub struct LinearMap {
    inputs: Vec<ModeKey>,
    outputs: Vec<ModeKey>,
    matrix: DMatrix<Complex64>,
    kind: MapKind,
}

impl LinearMap {
    pub fn new(
        inputs: Vec<ModeKey>,
        outputs: Vec<ModeKey>,
        matrix: DMatrix<Complex64>,
        kind: MapKind,
    ) -> Result<Self> {
        if matrix.ncols() != inputs.len() {
            return Err(Error::Dimension {
                expected: inputs.len(),
                got: matrix.ncols(),
            });
        }
        if matrix.nrows() != outputs.len() {
            return Err(Error::Dimension {
                expected: outputs.len(),
                got: matrix.nrows(),
            });
        }
        for keys in [&inputs, &outputs] {
            let mut sorted = keys.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != keys.len() {
                return Err(Error::domain("linear map lists a mode twice"));
            }
        }
        let map = LinearMap {
            inputs,
            outputs,
            matrix,
            kind,
        };
        match kind {
            MapKind::Unitary => {
                let dev = map.isometry_deviation();
                if dev > UNITARY_TOL {
                    return Err(Error::domain(format!(
                        "unitary map columns deviate from orthonormal by {dev:e}"
                    )));
                }
            }
            MapKind::IsometryWithLoss => {
                let smax = map.max_singular_value();
                if smax > 1.0 + UNITARY_TOL {
                    return Err(Error::domain(format!(
                        "lossy map has singular value {smax} > 1"
                    )));
                }
            }
        }
        Ok(map)
    }

    /// Builds a map from `(input, [(output, coefficient)])` rows.
    pub fn from_images(
        images: &[(ModeKey, Vec<(ModeKey, Complex64)>)],
        kind: MapKind,
    ) -> Result<Self> {
        let inputs: Vec<ModeKey> = images.iter().map(|(k, _)| *k).collect();
        let mut outputs: Vec<ModeKey> = Vec::new();
        for (_, img) in images {
            for (k, _) in img {
                if !outputs.contains(k) {
                    outputs.push(*k);
                }
            }
        }
        let mut m = DMatrix::zeros(outputs.len(), inputs.len());
        for (j, (_, img)) in images.iter().enumerate() {
            for (k, c) in img {
                let i = outputs.iter().position(|o| o == k).expect("output collected");
                m[(i, j)] += *c;
            }
        }
        Self::new(inputs, outputs, m, kind)
    }

    pub fn identity(keys: Vec<ModeKey>) -> Self {
        let n = keys.len();
        LinearMap {
            inputs: keys.clone(),
            outputs: keys,
            matrix: DMatrix::identity(n, n),
            kind: MapKind::Unitary,
        }
    }

    pub fn inputs(&self) -> &[ModeKey] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[ModeKey] {
        &self.outputs
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    /// Image coefficient `⟨output|M|input⟩`.
    pub fn coefficient(&self, input: ModeKey, output: ModeKey) -> Complex64 {
        match (
            self.inputs.iter().position(|k| *k == input),
            self.outputs.iter().position(|k| *k == output),
        ) {
            (Some(j), Some(i)) => self.matrix[(i, j)],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn input_sites(&self) -> Vec<Site> {
        let mut s: Vec<Site> = self.inputs.iter().map(|k| k.site()).collect();
        s.sort();
        s.dedup();
        s
    }

    pub fn output_sites(&self) -> Vec<Site> {
        let mut s: Vec<Site> = self.outputs.iter().map(|k| k.site()).collect();
        s.sort();
        s.dedup();
        s
    }

    /// Inverse of a unitary map (its adjoint with inputs and outputs swapped).
    pub fn inverse(&self) -> Result<Self> {
        if self.kind != MapKind::Unitary || self.inputs.len() != self.outputs.len() {
            return Err(Error::domain("only square unitary maps are invertible"));
        }
        Ok(LinearMap {
            inputs: self.outputs.clone(),
            outputs: self.inputs.clone(),
            matrix: self.matrix.adjoint(),
            kind: MapKind::Unitary,
        })
    }

    /// Block-diagonal union of maps acting on disjoint input sets.
    pub fn direct_sum(maps: &[LinearMap]) -> Result<Self> {
        let inputs: Vec<ModeKey> = maps.iter().flat_map(|m| m.inputs.iter().copied()).collect();
        let outputs: Vec<ModeKey> = maps.iter().flat_map(|m| m.outputs.iter().copied()).collect();
        let mut matrix = DMatrix::zeros(outputs.len(), inputs.len());
        let (mut r0, mut c0) = (0, 0);
        for m in maps {
            let (r, c) = m.matrix.shape();
            matrix.view_mut((r0, c0), (r, c)).copy_from(&m.matrix);
            r0 += r;
            c0 += c;
        }
        let kind = if maps.iter().all(|m| m.kind == MapKind::Unitary) {
            MapKind::Unitary
        } else {
            MapKind::IsometryWithLoss
        };
        Self::new(inputs, outputs, matrix, kind)
    }

    fn isometry_deviation(&self) -> f64 {
        let gram = self.matrix.adjoint() * &self.matrix;
        let n = gram.nrows();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        dev
    }

    pub fn max_singular_value(&self) -> f64 {
        if self.matrix.is_empty() {
            return 0.0;
        }
        self.matrix
            .clone()
            .singular_values()
            .iter()
            .fold(0.0, |a: f64, &b| a.max(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::label::{Arm, Mode, Pol};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rejects_non_unitary() {
        let h = ModeKey::photon(Mode::Stokes(Arm::A1), Pol::H);
        let v = ModeKey::photon(Mode::Stokes(Arm::A1), Pol::V);
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(1.0)]);
        assert!(LinearMap::new(vec![h, v], vec![h, v], m, MapKind::Unitary).is_err());
    }

    #[test]
    fn rejects_gain() {
        let h = ModeKey::photon(Mode::Stokes(Arm::A1), Pol::H);
        let m = DMatrix::from_element(1, 1, c(1.1));
        assert!(LinearMap::new(vec![h], vec![h], m, MapKind::IsometryWithLoss).is_err());
    }

    #[test]
    fn dimension_checked() {
        let h = ModeKey::photon(Mode::Stokes(Arm::A1), Pol::H);
        let m = DMatrix::from_element(2, 1, c(0.5));
        let err = LinearMap::new(vec![h], vec![h], m, MapKind::IsometryWithLoss).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
    }
}
