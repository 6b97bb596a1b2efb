use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned rectangle with exact rational corners.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x0: BigRational,
    pub x1: BigRational,
    pub y0: BigRational,
    pub y1: BigRational,
}

impl Rect {
    pub fn area(&self) -> BigRational {
        (&self.x1 - &self.x0) * (&self.y1 - &self.y0)
    }
}

pub(crate) fn exact(v: f64) -> Result<BigRational> {
    BigRational::from_float(v).ok_or_else(|| Error::Precondition(format!("{v} is not finite")))
}

pub(crate) fn to_f64(v: &BigRational) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// The `g × g` grid of closed squares of side `1/g`, with open cores
/// `R_i^δ` and centers `p_i`. Cell `i` sits in row `i / g`, column `i % g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellDecomposition {
    pub g: usize,
    pub delta: f64,
    /// Lebesgue measure of the union of cores, `g²(1/g − 2δ)²`.
    pub coverage: f64,
}

pub fn decompose_grid(g: usize, delta: f64) -> Result<CellDecomposition> {
    if g < 2 {
        return Err(Error::Precondition(format!("grid size {g} is below 2")));
    }
    if !(delta > 0.0) || delta >= 0.5 / g as f64 {
        return Err(Error::EmptyCore(format!("δ = {delta} must lie in (0, 1/(2g)) for g = {g}")));
    }
    let mut cells = CellDecomposition { g, delta, coverage: 0.0 };
    cells.coverage = to_f64(&cells.coverage_exact()?);
    Ok(cells)
}

impl CellDecomposition {
    pub fn len(&self) -> usize {
        self.g * self.g
    }

    pub fn is_empty(&self) -> bool {
        self.g == 0
    }

    pub fn side(&self) -> f64 {
        1.0 / self.g as f64
    }

    /// Half the side of a core.
    pub fn core_half(&self) -> f64 {
        0.5 / self.g as f64 - self.delta
    }

    pub fn center(&self, i: usize) -> [f64; 2] {
        let s = self.side();
        [((i % self.g) as f64 + 0.5) * s, ((i / self.g) as f64 + 0.5) * s]
    }

    /// `[x0, x1, y0, y1]` of the closed cell.
    pub fn bounds(&self, i: usize) -> [f64; 4] {
        let s = self.side();
        let (c, r) = ((i % self.g) as f64, (i / self.g) as f64);
        [c * s, (c + 1.0) * s, r * s, (r + 1.0) * s]
    }

    pub fn cell_of(&self, p: [f64; 2]) -> usize {
        let idx = |v: f64| ((v.rem_euclid(1.0) * self.g as f64) as usize).min(self.g - 1);
        idx(p[1]) * self.g + idx(p[0])
    }

    /// Signed distance from `p` to the complement of the core of cell `i`,
    /// measured along the torus; positive inside.
    pub fn core_margin(&self, i: usize, p: [f64; 2]) -> f64 {
        let c = self.center(i);
        let d = |a: f64, b: f64| {
            let r = (a - b).rem_euclid(1.0);
            r.min(1.0 - r)
        };
        self.core_half() - d(p[0], c[0]).max(d(p[1], c[1]))
    }

    pub fn cell_diameter(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.side()
    }

    /// Diameter `√2(1/g − 2δ)` of a core.
    pub fn core_diameter(&self) -> f64 {
        std::f64::consts::SQRT_2 * 2.0 * self.core_half()
    }

    fn exact_side_and_delta(&self) -> Result<(BigRational, BigRational)> {
        Ok((BigRational::new(BigInt::from(1), BigInt::from(self.g)), exact(self.delta)?))
    }

    pub fn coverage_exact(&self) -> Result<BigRational> {
        let (s, d) = self.exact_side_and_delta()?;
        let core = &s - BigRational::from_integer(2.into()) * d;
        if core <= BigRational::zero() {
            return Err(Error::EmptyCore(format!("δ = {} leaves no core", self.delta)));
        }
        Ok(BigRational::from_integer(BigInt::from(self.len())) * &core * &core)
    }

    /// Squared core diameter `2(1/g − 2δ)²`, exactly.
    pub fn core_diameter_sq_exact(&self) -> Result<BigRational> {
        let (s, d) = self.exact_side_and_delta()?;
        let core = s - BigRational::from_integer(2.into()) * d;
        Ok(BigRational::from_integer(2.into()) * &core * &core)
    }

    /// Cores as exact open rectangles.
    pub fn core_rects(&self) -> Result<Vec<Rect>> {
        let (s, d) = self.exact_side_and_delta()?;
        Ok((0..self.len())
            .map(|i| {
                let c = BigRational::from_integer(BigInt::from(i % self.g));
                let r = BigRational::from_integer(BigInt::from(i / self.g));
                Rect {
                    x0: &c * &s + &d,
                    x1: (&c + BigRational::one()) * &s - &d,
                    y0: &r * &s + &d,
                    y1: (&r + BigRational::one()) * &s - &d,
                }
            })
            .collect())
    }
}
