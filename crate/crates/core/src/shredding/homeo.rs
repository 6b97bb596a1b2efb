use serde::{Deserialize, Serialize};

use super::CellDecomposition;
use crate::error::{Error, Result};

/// Radial contraction of a rectangular cell toward `p` with exponent `β`:
/// `h(x) = p + α(x)^β (q^x − p)`, where `q^x` is the boundary point on the
/// ray from `p` through `x` and `α(x) = |x − p| / |q^x − p|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialHomeo {
    /// `[x0, x1, y0, y1]`.
    pub bounds: [f64; 4],
    pub p: [f64; 2],
    pub beta: f64,
}

impl RadialHomeo {
    pub fn new(bounds: [f64; 4], p: [f64; 2], beta: f64) -> Result<Self> {
        let [x0, x1, y0, y1] = bounds;
        if !(beta >= 1.0) || !beta.is_finite() {
            return Err(Error::Precondition(format!("β = {beta} must be a finite number ≥ 1")));
        }
        if !(x0 < p[0] && p[0] < x1 && y0 < p[1] && p[1] < y1) {
            return Err(Error::Precondition(format!("{p:?} is not inside the open cell")));
        }
        Ok(RadialHomeo { bounds, p, beta })
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        let [x0, x1, y0, y1] = self.bounds;
        (x0..=x1).contains(&x[0]) && (y0..=y1).contains(&x[1])
    }

    /// Relative radial position `α(x)`.
    pub fn alpha(&self, x: [f64; 2]) -> f64 {
        let [x0, x1, y0, y1] = self.bounds;
        let (vx, vy) = (x[0] - self.p[0], x[1] - self.p[1]);
        let ax = if vx >= 0.0 { vx / (x1 - self.p[0]) } else { vx / (x0 - self.p[0]) };
        let ay = if vy >= 0.0 { vy / (y1 - self.p[1]) } else { vy / (y0 - self.p[1]) };
        ax.max(ay)
    }

    fn scale(&self, x: [f64; 2], factor: f64) -> [f64; 2] {
        [self.p[0] + factor * (x[0] - self.p[0]), self.p[1] + factor * (x[1] - self.p[1])]
    }

    /// `h(x)`; the identity outside the cell.
    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        if !self.contains(x) {
            return x;
        }
        let a = self.alpha(x);
        if a == 0.0 || a >= 1.0 {
            return x;
        }
        self.scale(x, a.powf(self.beta - 1.0))
    }

    /// `h^{-1}(y)`.
    pub fn invert(&self, y: [f64; 2]) -> [f64; 2] {
        if !self.contains(y) {
            return y;
        }
        let b = self.alpha(y);
        if b == 0.0 || b >= 1.0 {
            return y;
        }
        let a = b.powf(1.0 / self.beta);
        self.scale(y, a.powf(1.0 - self.beta))
    }
}

pub fn radial_homeo(cells: &CellDecomposition, i: usize, beta: f64) -> Result<RadialHomeo> {
    if i >= cells.len() {
        return Err(Error::Precondition(format!("cell {i} outside 0..{}", cells.len())));
    }
    RadialHomeo::new(cells.bounds(i), cells.center(i), beta)
}

/// The composition `h` of all cell contractions, evaluated through the
/// cell containing the point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridHomeo {
    pub cells: CellDecomposition,
    pub beta: f64,
}

impl GridHomeo {
    pub fn new(cells: CellDecomposition, beta: f64) -> Result<Self> {
        radial_homeo(&cells, 0, beta)?;
        Ok(GridHomeo { cells, beta })
    }

    pub fn piece(&self, i: usize) -> RadialHomeo {
        RadialHomeo { bounds: self.cells.bounds(i), p: self.cells.center(i), beta: self.beta }
    }

    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        self.piece(self.cells.cell_of(x)).apply(x)
    }

    /// Applies every piece in the given order.
    pub fn apply_in_order(&self, x: [f64; 2], order: &[usize]) -> [f64; 2] {
        order.iter().fold(x, |y, &i| self.piece(i).apply(y))
    }

    /// Distance from `p_i` to the farthest point of `h(closure(R_i^δ))`.
    pub fn core_image_radius(&self) -> f64 {
        let a = 0.5 * self.cells.side();
        let c = self.cells.core_half() / a;
        c.powf(self.beta) * a * std::f64::consts::SQRT_2
    }
}
