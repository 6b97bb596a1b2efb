use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::systems::DynamicalSystem;

/// `d_n(x,y) = max_{i<n} d(f^i x, f^i y)`.
pub fn dn_distance<S: DynamicalSystem>(sys: &S, x: &S::Point, y: &S::Point, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    let (mut a, mut b) = (x.clone(), y.clone());
    let mut best = 0.0f64;
    for i in 0..n {
        best = best.max(sys.distance(&a, &b)?);
        if i + 1 < n {
            a = sys.step(&a)?;
            b = sys.step(&b)?;
        }
    }
    Ok(best)
}

/// `B_n(x, ε) = {y : d_n(x,y) < ε}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BowenBall<P> {
    pub center: P,
    pub n: usize,
    pub radius: f64,
}

impl<P: Clone> BowenBall<P> {
    pub fn new(center: P, n: usize, radius: f64) -> Result<Self> {
        if n == 0 || !(radius > 0.0) {
            return Err(Error::Precondition(format!("Bowen ball needs n ≥ 1 and ε > 0, got n={n}, ε={radius}")));
        }
        Ok(BowenBall { center, n, radius })
    }

    pub fn contains<S: DynamicalSystem<Point = P>>(&self, sys: &S, y: &P) -> Result<bool> {
        Ok(dn_distance(sys, &self.center, y, self.n)? < self.radius)
    }
}
