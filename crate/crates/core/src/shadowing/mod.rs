//! Pseudo-orbits, per-system tracers and the empirical shadowing modulus.

mod interval;
mod modulus;
mod symbolic;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::systems::DynamicalSystem;

pub use interval::{trace_interval, INITIAL_GRID, REFINEMENTS};
pub use modulus::{shadowing_modulus, Tracer, MODULUS_FLOOR};
pub use symbolic::{symbolic_modulus_limit, trace_symbolic};

/// A finite `δ`-pseudo-orbit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudoOrbit<P> {
    pub points: Vec<P>,
    pub delta: f64,
}

impl<P: Serialize> PseudoOrbit<P> {
    /// One JSON value per line.
    pub fn to_json_lines(&self) -> Result<String> {
        let mut out = String::new();
        for p in &self.points {
            out.push_str(&serde_json::to_string(p).map_err(|e| Error::InternalError(e.to_string()))?);
            out.push('\n');
        }
        Ok(out)
    }
}

/// `y` whose orbit stays within `achieved` of the pseudo-orbit for `horizon` steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowCertificate<P> {
    pub point: P,
    pub achieved: f64,
    pub horizon: usize,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum TraceOutcome<P> {
    Shadowed(ShadowCertificate<P>),
    /// Best deviation found by the search, not below the requested `ε`.
    NoShadowFound {
        best: f64,
    },
}

impl<P> TraceOutcome<P> {
    pub fn certificate(&self) -> Option<&ShadowCertificate<P>> {
        match self {
            TraceOutcome::Shadowed(c) => Some(c),
            TraceOutcome::NoShadowFound { .. } => None,
        }
    }
}

/// First index `n` with `d(f(x_n), x_{n+1}) ≥ δ`, with that gap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapViolation {
    pub index: usize,
    pub gap: f64,
}

pub fn is_pseudo_orbit<S: DynamicalSystem>(
    sys: &S,
    seq: &[S::Point],
    delta: f64,
) -> Result<(bool, Option<GapViolation>)> {
    if seq.len() < 2 {
        return Err(Error::Precondition("a pseudo-orbit needs at least two points".into()));
    }
    for (i, w) in seq.windows(2).enumerate() {
        let gap = sys.distance(&sys.step(&w[0])?, &w[1])?;
        if !(gap < delta) {
            return Ok((false, Some(GapViolation { index: i, gap })));
        }
    }
    Ok((true, None))
}

/// `max_{n<H} d(f^n y, x_n)` over the pseudo-orbit.
pub fn max_deviation<S: DynamicalSystem>(sys: &S, y: &S::Point, points: &[S::Point]) -> Result<f64> {
    let mut cur = y.clone();
    let mut worst = 0.0f64;
    for (n, x) in points.iter().enumerate() {
        worst = worst.max(sys.distance(&cur, x)?);
        if n + 1 < points.len() {
            cur = sys.step(&cur)?;
        }
    }
    Ok(worst)
}
