//! Horseshoes coding free concatenations of typical segments, and proximal
//! subshifts whose only minimal subset is the fixed point `0^∞`.

mod horseshoe;
mod proximal;

pub use horseshoe::{extract_horseshoe, Horseshoe, HorseshoeParams};
pub use proximal::{
    minimal_subset_check, proximal_entropy_check, proximal_samples, proximal_subshift, ProximalEntropyCheck,
    ProximalSpec, SyndeticViolation,
};
