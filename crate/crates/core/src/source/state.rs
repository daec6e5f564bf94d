use nalgebra::DMatrix;
use num_complex::Complex64;

use super::params::{PhaseModel, RetrievalWeighting, SourceParams};
use super::phase::phi_of_tau;
use super::scheme::{Component, SpinWaveQubit};
use crate::error::Result;
use crate::hilbert::{Arm, BasisLabel, Family, JointKet, LinearMap, MapKind, Mode, ModeKey, Pol, Site, SwMode};

const FAMILIES: [Family; 2] = [Family::Plus, Family::Minus];

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn stokes(arm: Arm, pol: Pol) -> ModeKey {
    ModeKey::photon(Mode::Stokes(arm), pol)
}

fn sw(arm: Arm, f: Family) -> ModeKey {
    ModeKey::spin_wave(arm, SwMode::Bright(f))
}

/// Photon polarization emitted together with (and on retrieval of) each
/// spin-wave family: ψ⁺ pairs with a σ⁻ Stokes photon and reads out as σ⁺.
pub fn stokes_pol(f: Family) -> Pol {
    match f {
        Family::Plus => Pol::L,
        Family::Minus => Pol::R,
    }
}

pub fn anti_stokes_pol(f: Family) -> Pol {
    match f {
        Family::Plus => Pol::R,
        Family::Minus => Pol::L,
    }
}

/// Orthonormal complement of the unit vector `w` by Gram-Schmidt over the
/// standard basis.
fn complement(w: &[f64]) -> Vec<Vec<f64>> {
    let k = w.len();
    let mut basis: Vec<Vec<f64>> = vec![w.to_vec()];
    let mut out = Vec::new();
    for i in 0..k {
        if out.len() + 1 == k {
            break;
        }
        let mut v = vec![0.0; k];
        v[i] = 1.0;
        for b in &basis {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= d * y;
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-9 {
            for x in &mut v {
                *x /= n;
            }
            basis.push(v.clone());
            out.push(v);
        }
    }
    out
}

/// Rows: bright mode then dark modes, in Zeeman-component coordinates.
fn family_frame(comps: &[Component]) -> Vec<Vec<f64>> {
    let w: Vec<f64> = comps.iter().map(|c| c.weight).collect();
    let mut rows = vec![w.clone()];
    rows.extend(complement(&w));
    rows
}

fn frame_key(arm: Arm, f: Family, row: usize) -> ModeKey {
    if row == 0 {
        sw(arm, f)
    } else {
        ModeKey::spin_wave(arm, SwMode::Dark(f, (row - 1) as u8))
    }
}

fn family_keys(arm: Arm, f: Family, k: usize) -> Vec<ModeKey> {
    (0..k).map(|r| frame_key(arm, f, r)).collect()
}

/// Spin-wave mode keys of one arm, bright and dark, for both families.
pub fn arm_modes(qubit: &SpinWaveQubit, arm: Arm) -> Vec<ModeKey> {
    FAMILIES
        .iter()
        .flat_map(|&f| family_keys(arm, f, qubit.family(f).len()))
        .collect()
}

/// Which spin-wave excitation an arm carries in the single-excitation branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WriteBranch {
    /// `cos η |L⟩|ψ⁺⟩ + sin η |R⟩|ψ⁻⟩`
    Entangled,
    /// A single product term `|pol⟩|family⟩`.
    Product(Pol, Family),
}

fn write_state(params: &SourceParams, arm: Arm, branch: WriteBranch) -> JointKet {
    let chi = params.chi;
    let sites = [Site::Photon(Mode::Stokes(arm)), Site::Arm(arm)];
    let mut terms: Vec<(BasisLabel, Complex64)> = vec![(BasisLabel::vacuum(), c(1.0))];
    let one = |f: Family, pol: Pol| BasisLabel::ones(&[stokes(arm, pol), sw(arm, f)]).expect("valid label");
    match branch {
        WriteBranch::Entangled => {
            terms.push((one(Family::Plus, stokes_pol(Family::Plus)), c(chi * params.eta.cos())));
            terms.push((one(Family::Minus, stokes_pol(Family::Minus)), c(chi * params.eta.sin())));
        }
        WriteBranch::Product(pol, f) => terms.push((one(f, pol), c(chi))),
    }
    if params.double_excitations {
        let l = BasisLabel::ones(&[
            stokes(arm, Pol::L),
            stokes(arm, Pol::R),
            sw(arm, Family::Plus),
            sw(arm, Family::Minus),
        ])
        .expect("valid label");
        terms.push((l, c(chi * chi / 2.0)));
    }
    JointKet::from_terms(sites, terms).expect("vacuum term keeps the state nonzero")
}

/// Normalized write output of one arm to second order in χ.
pub fn build_atom_photon_state(params: &SourceParams, arm: Arm) -> JointKet {
    write_state(params, arm, WriteBranch::Entangled)
}

/// Pure-state decomposition of the per-arm Werner mixture: weight `p` on the
/// entangled write state and `(1−p)/4` on each polarization/family product.
pub fn noisy_branches(params: &SourceParams, arm: Arm) -> Vec<(f64, JointKet)> {
    let p = params.visibility[arm];
    let mut out = Vec::new();
    if p > 0.0 {
        out.push((p, write_state(params, arm, WriteBranch::Entangled)));
    }
    if p < 1.0 {
        for pol in [Pol::L, Pol::R] {
            for f in FAMILIES {
                out.push(((1.0 - p) / 4.0, write_state(params, arm, WriteBranch::Product(pol, f))));
            }
        }
    }
    out
}

fn larmor_block(comps: &[Component], theta: f64) -> DMatrix<Complex64> {
    let q = family_frame(comps);
    let k = comps.len();
    DMatrix::from_fn(k, k, |out, inp| {
        (0..k)
            .map(|ci| {
                let phase = Complex64::from_polar(1.0, f64::from(comps[ci].larmor_sign) * theta);
                q[out][ci] * q[inp][ci] * phase
            })
            .sum()
    })
}

/// Storage-time evolution of every arm present in `state`.
///
/// Under [`PhaseModel::Component`] each Zeeman coherence picks up
/// `exp(i·sign·βτ)`; the bright/dark mode frame mixes accordingly.
pub fn evolve_larmor(state: &JointKet, params: &SourceParams) -> Result<JointKet> {
    let theta = params.larmor_angle();
    if theta == 0.0 {
        return Ok(state.clone());
    }
    let q = &params.qubit;
    let mut out = state.clone();
    for arm in Arm::ALL {
        if !state.sites().contains(&Site::Arm(arm)) {
            continue;
        }
        let map = match params.phase_model {
            PhaseModel::Component => {
                let blocks: Vec<LinearMap> = FAMILIES
                    .iter()
                    .map(|&f| {
                        let comps = q.family(f);
                        let keys = family_keys(arm, f, comps.len());
                        LinearMap::new(keys.clone(), keys, larmor_block(comps, theta), MapKind::Unitary)
                    })
                    .collect::<Result<_>>()?;
                LinearMap::direct_sum(&blocks)?
            }
            PhaseModel::Effective => {
                let phi = phi_of_tau(params.tau, params.beta)?;
                let keys = vec![sw(arm, Family::Plus), sw(arm, Family::Minus)];
                let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                    c(1.0),
                    Complex64::from_polar(1.0, -phi),
                ]));
                LinearMap::new(keys.clone(), keys, m, MapKind::Unitary)?
            }
        };
        out = out.apply_map(&map)?;
    }
    Ok(out)
}

/// What happens to spin-wave weight the read pulse does not convert.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Residual {
    /// Traced out into `norm_deficit`.
    Discard,
    /// Kept as dark spin-wave modes of the arm.
    Keep,
}

fn retrieval_functional(comps: &[Component], weighting: RetrievalWeighting) -> Vec<f64> {
    match weighting {
        RetrievalWeighting::Matched => comps.iter().map(|c| c.weight).collect(),
        RetrievalWeighting::Uniform => {
            let k = comps.len() as f64;
            vec![1.0 / k.sqrt(); comps.len()]
        }
    }
}

/// Read-out map of one arm: each family's spin-wave modes go to the
/// anti-Stokes photon with amplitude `√efficiency·⟨w|mode⟩`.
pub fn retrieval_map(
    params: &SourceParams,
    arm: Arm,
    efficiency: f64,
    residual: Residual,
) -> Result<LinearMap> {
    let q = &params.qubit;
    let mut inputs = Vec::new();
    let mut outputs: Vec<ModeKey> = FAMILIES
        .iter()
        .map(|&f| ModeKey::photon(Mode::AntiStokes(arm), anti_stokes_pol(f)))
        .collect();
    let mut images: Vec<(usize, Vec<(usize, f64)>)> = Vec::new();
    for (fi, &f) in FAMILIES.iter().enumerate() {
        let comps = q.family(f);
        let frame = family_frame(comps);
        let w = retrieval_functional(comps, params.retrieval_weighting);
        let perp = complement(&w);
        let perp_base = outputs.len();
        if residual == Residual::Keep {
            outputs.extend((0..perp.len()).map(|j| ModeKey::spin_wave(arm, SwMode::Dark(f, j as u8))));
        }
        for (r, row) in frame.iter().enumerate() {
            let dot = |v: &[f64]| -> f64 { v.iter().zip(row).map(|(a, b)| a * b).sum() };
            let mut col = vec![(fi, efficiency.sqrt() * dot(&w))];
            if residual == Residual::Keep {
                col.extend(perp.iter().enumerate().map(|(j, p)| (perp_base + j, dot(p))));
            }
            images.push((inputs.len(), col));
            inputs.push(frame_key(arm, f, r));
        }
    }
    let mut m = DMatrix::<Complex64>::zeros(outputs.len(), inputs.len());
    for (j, col) in images {
        for (i, v) in col {
            m[(i, j)] = c(v);
        }
    }
    let kind = if residual == Residual::Keep && efficiency == 1.0 {
        MapKind::Unitary
    } else {
        MapKind::IsometryWithLoss
    };
    LinearMap::new(inputs, outputs, m, kind)
}

/// Reads arm `arm` out into its anti-Stokes mode with the configured
/// retrieval efficiency; unconverted weight is lost.
pub fn retrieve(state: &JointKet, arm: Arm, params: &SourceParams) -> Result<JointKet> {
    let map = retrieval_map(params, arm, params.retrieval_eff[arm], Residual::Discard)?;
    state.apply_map(&map)
}

/// Retrieval with an explicit efficiency and residual policy.
pub fn retrieve_with(
    state: &JointKet,
    arm: Arm,
    params: &SourceParams,
    efficiency: f64,
    residual: Residual,
) -> Result<JointKet> {
    state.apply_map(&retrieval_map(params, arm, efficiency, residual)?)
}
