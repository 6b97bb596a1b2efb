//! Empirical measures, the weak* metric `ρ`, Birkhoff averages and point classification.

mod basin;
mod bounds;
mod classify;
mod empirical;
pub mod family;
mod target;

use serde::{Deserialize, Serialize};

pub use basin::srb_basin_estimate;
pub use bounds::{induced_distance, induced_dn_distance, orbit_window_bound};
pub use classify::{classify_point, classify_signatures, Classification, LimitMeasureSet, Verdict};
pub use empirical::{
    birkhoff_average, dirac_signature, empirical_measure, orbit_signatures, weak_star_distance, EmpiricalMeasure,
};
pub use target::TargetMeasure;

use crate::error::{Error, Result};

/// Default truncation of the series defining `ρ`.
pub const DEFAULT_TRUNCATION: usize = 20;
/// Default merge radius for limit-measure clustering.
pub const DEFAULT_MERGE_RADIUS: f64 = 0.02;

/// Integrals `∫φ_j dξ` for `j ≤ J` together with the norms `‖φ_j‖`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Signature {
    pub means: Vec<f64>,
    pub norms: Vec<f64>,
}

/// Truncated weak* distance with the bound on the neglected tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureDistance {
    pub value: f64,
    pub truncation: usize,
    pub tail_bound: f64,
}

impl MeasureDistance {
    /// Upper end of the certified interval `[value, value + tail]`.
    pub fn upper(&self) -> f64 {
        self.value + self.tail_bound
    }
}

/// `2^{1-J}`.
pub fn tail_bound(j: usize) -> f64 {
    (1.0 - j as f64).exp2()
}

impl Signature {
    pub fn new(means: Vec<f64>, norms: Vec<f64>) -> Self {
        Signature { means, norms }
    }

    pub fn truncation(&self) -> usize {
        self.means.len()
    }

    /// `Σ_{j≤J} |a_j − b_j| / (2^j ‖φ_j‖)`.
    pub fn rho(&self, other: &Signature) -> Result<MeasureDistance> {
        if self.means.len() != other.means.len() {
            return Err(Error::ShapeError(format!(
                "signatures truncated at {} and {}",
                self.means.len(),
                other.means.len()
            )));
        }
        let mut value = 0.0;
        let mut w = 1.0;
        for ((a, b), n) in self.means.iter().zip(&other.means).zip(&self.norms) {
            w *= 0.5;
            value += (a - b).abs() * w / n;
        }
        Ok(MeasureDistance { value, truncation: self.means.len(), tail_bound: tail_bound(self.means.len()) })
    }

    /// `Σ c_i · sig_i`, used for convex combinations of measures.
    pub fn combine(parts: &[(f64, &Signature)]) -> Result<Signature> {
        let first = parts.first().ok_or(Error::EmptyPool)?.1;
        let mut means = vec![0.0; first.means.len()];
        for (c, s) in parts {
            if s.means.len() != means.len() {
                return Err(Error::ShapeError("signatures of different truncation".into()));
            }
            for (m, v) in means.iter_mut().zip(&s.means) {
                *m += c * v;
            }
        }
        Ok(Signature { means, norms: first.norms.clone() })
    }

    pub fn truncated(&self, j: usize) -> Signature {
        Signature {
            means: self.means[..j.min(self.means.len())].to_vec(),
            norms: self.norms[..j.min(self.norms.len())].to_vec(),
        }
    }
}
