//! Small-basis state algebra: labeled Fock kets, mode maps, projective
//! measurement, loss bookkeeping and density operators.

mod density;
mod ket;
mod label;
mod map;

pub use density::{mix, to_density, DensityOp};
pub use ket::{JointKet, Projection, PRUNE_EPS};
pub use label::{Arm, BasisLabel, Family, Mode, ModeKey, Pol, Port, Site, SpinWaveLevel, SwMode};
pub use map::{LinearMap, MapKind};

/// Diagonal weights in the occupation basis, plus unaccounted (lost) weight.
///
/// Click statistics only depend on these once all analyzer rotations have
/// been applied.
pub trait Populations {
    fn populations(&self) -> Vec<(BasisLabel, f64)>;
    fn lost_weight(&self) -> f64;
}

impl Populations for JointKet {
    fn populations(&self) -> Vec<(BasisLabel, f64)> {
        self.terms().map(|(l, a)| (l.clone(), a.norm_sqr())).collect()
    }

    fn lost_weight(&self) -> f64 {
        self.norm_deficit()
    }
}

impl Populations for DensityOp {
    fn populations(&self) -> Vec<(BasisLabel, f64)> {
        DensityOp::populations(self)
    }

    fn lost_weight(&self) -> f64 {
        0.0
    }
}
