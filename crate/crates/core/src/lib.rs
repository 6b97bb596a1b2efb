//! Executable constructions from the theory of irregular points: shift spaces
//! and low-dimensional maps, the weak* metric on empirical measures, entropy
//! estimators, pseudo-orbit tracers, irregular-point assembly, horseshoe and
//! proximal subshift constructions, and shredding perturbations of grid maps.

pub mod constructions;
pub mod entropy;
pub mod error;
pub mod irregular;
pub mod measures;
pub mod shadowing;
pub mod shredding;
pub mod systems;

pub use error::{Error, Result};
pub use measures::{EmpiricalMeasure, MeasureDistance, Signature, TargetMeasure, Verdict};
pub use systems::{
    orbit_segment, AnySystem, BaseMap, DynamicalSystem, GridMap, HomeoFormula, IntervalHomeo, SftSpec, Shift, Symbol,
    SymbolicPoint, SystemDescriptor,
};
