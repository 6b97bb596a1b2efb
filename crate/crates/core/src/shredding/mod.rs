//! Shredding of the torus: a grid of square cells, the index map `τ` it
//! induces, radial contractions `h` and the perturbed map `g = f ∘ h` whose
//! cell cores are trapping regions.

mod cells;
mod homeo;
mod lambda;
mod perturb;
mod tau;

pub use cells::{decompose_grid, CellDecomposition, Rect};
pub use homeo::{radial_homeo, GridHomeo, RadialHomeo};
pub use lambda::{
    lambda_entropy_bound, lambda_truncation, shredding_params_for, IndexSizes, LambdaApprox, ZeroEntropyBound,
};
pub use perturb::{perturb, verify_shredding, CellCertificate, PerturbParams, PerturbedMap, ShreddingReport};
pub use tau::{induce_tau, TauStructure, TIE_TOLERANCE};
