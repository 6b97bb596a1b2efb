use serde::{Deserialize, Serialize};

use super::DynamicalSystem;
use crate::error::{Error, Result};
use crate::measures::family;

/// Increasing homeomorphisms of `[0,1]` fixing only the endpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomeoFormula {
    Sqrt,
    Square,
    Power(f64),
    /// Breakpoints `(x, f(x))` of a piecewise-linear map.
    Table(Vec<(f64, f64)>),
}

#[derive(Clone, Debug)]
pub struct IntervalHomeo {
    formula: HomeoFormula,
}

impl IntervalHomeo {
    pub fn new(formula: HomeoFormula) -> Result<Self> {
        match &formula {
            HomeoFormula::Power(p) if !(p.is_finite() && *p > 0.0 && *p != 1.0) => {
                return Err(Error::InvalidHomeo(format!("exponent {p} must be positive and not 1")));
            }
            HomeoFormula::Table(pts) => validate_table(pts)?,
            _ => {}
        }
        Ok(IntervalHomeo { formula })
    }

    pub fn sqrt() -> Self {
        IntervalHomeo { formula: HomeoFormula::Sqrt }
    }

    pub fn formula(&self) -> &HomeoFormula {
        &self.formula
    }

    pub fn apply(&self, x: f64) -> f64 {
        match &self.formula {
            HomeoFormula::Sqrt => x.sqrt(),
            HomeoFormula::Square => x * x,
            HomeoFormula::Power(p) => x.powf(*p),
            HomeoFormula::Table(pts) => {
                let i = pts.partition_point(|&(a, _)| a <= x).clamp(1, pts.len() - 1);
                let (x0, y0) = pts[i - 1];
                let (x1, y1) = pts[i];
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }
}

fn validate_table(pts: &[(f64, f64)]) -> Result<()> {
    if pts.len() < 2 {
        return Err(Error::InvalidHomeo("need at least two breakpoints".into()));
    }
    let first = pts[0];
    let last = pts[pts.len() - 1];
    if first != (0.0, 0.0) || last != (1.0, 1.0) {
        return Err(Error::InvalidHomeo("table must start at (0,0) and end at (1,1)".into()));
    }
    for w in pts.windows(2) {
        if !(w[1].0 > w[0].0 && w[1].1 > w[0].1) {
            return Err(Error::InvalidHomeo(format!(
                "table is not strictly increasing between {:?} and {:?}",
                w[0], w[1]
            )));
        }
    }
    let interior = &pts[1..pts.len() - 1];
    let above = interior.iter().all(|&(x, y)| y > x);
    let below = interior.iter().all(|&(x, y)| y < x);
    if !(above || below) || interior.is_empty() {
        return Err(Error::InvalidHomeo("interior must lie strictly on one side of the diagonal".into()));
    }
    Ok(())
}

impl DynamicalSystem for IntervalHomeo {
    type Point = f64;

    fn step(&self, x: &f64) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::InvalidPoint(format!("{x} is outside [0,1]")));
        }
        Ok(self.apply(*x).clamp(0.0, 1.0))
    }

    fn distance(&self, x: &f64, y: &f64) -> Result<f64> {
        Ok((x - y).abs())
    }

    fn contains(&self, x: &f64) -> bool {
        (0.0..=1.0).contains(x)
    }

    fn diameter(&self) -> f64 {
        1.0
    }

    fn accumulate_tests(&self, x: &f64, out: &mut [f64]) -> Result<()> {
        family::accumulate_hats(*x, out);
        Ok(())
    }

    fn test_norm(&self, _j: usize) -> f64 {
        1.0
    }
}
