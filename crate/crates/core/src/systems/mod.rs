//! Compact metric spaces with a continuous self-map.

mod descriptor;
mod interval;
mod shift;
mod symbolic;
mod torus;

use std::fmt::Debug;

pub use descriptor::{AnySystem, SystemDescriptor};
pub use interval::{HomeoFormula, IntervalHomeo};
pub use shift::{SftSpec, Shift, WordCount};
pub use symbolic::{format_word, Symbol, SymbolicPoint, Tail};
pub use torus::{AffinePiece, BaseMap, GridMap};

use crate::error::{Error, Result};

/// A dynamical system `(X, f)`.
pub trait DynamicalSystem: Send + Sync {
    type Point: Clone + Debug + PartialEq + Send + Sync;

    fn step(&self, x: &Self::Point) -> Result<Self::Point>;

    fn distance(&self, x: &Self::Point, y: &Self::Point) -> Result<f64>;

    fn contains(&self, x: &Self::Point) -> bool;

    fn diameter(&self) -> f64;

    /// `f^n(x)`.
    fn iterate(&self, x: &Self::Point, n: usize) -> Result<Self::Point> {
        let mut y = x.clone();
        for _ in 0..n {
            y = self.step(&y)?;
        }
        Ok(y)
    }

    fn is_fixed_point(&self, x: &Self::Point) -> bool {
        matches!(self.step(x), Ok(y) if y == *x)
    }

    /// Key `K(x)` with `d_n(x,y) ≤ eps` iff `K(x) = K(y)`, available only on
    /// systems where `d_n` is an ultrametric with a prefix description.
    fn bowen_class(&self, _x: &Self::Point, _n: usize, _eps: f64) -> Option<Result<Vec<Symbol>>> {
        None
    }

    /// Adds `φ_j(x)` to `out[j-1]` for every `j ≤ out.len()`.
    fn accumulate_tests(&self, x: &Self::Point, out: &mut [f64]) -> Result<()>;

    /// Sup-norm `‖φ_j‖` (1-based).
    fn test_norm(&self, j: usize) -> f64;
}

/// `(x, f(x), .., f^{n-1}(x))`.
pub fn orbit_segment<S: DynamicalSystem>(sys: &S, x: &S::Point, n: usize) -> Result<Vec<S::Point>> {
    if n == 0 {
        return Err(Error::Precondition("orbit length must be at least 1".into()));
    }
    if !sys.contains(x) {
        return Err(Error::InvalidPoint(format!("{x:?}")));
    }
    let mut out = Vec::with_capacity(n);
    out.push(x.clone());
    for _ in 1..n {
        let next = sys.step(out.last().expect("nonempty"))?;
        out.push(next);
    }
    Ok(out)
}
