use serde::{Deserialize, Serialize};

use super::DynamicalSystem;
use crate::error::{Error, Result};
use crate::measures::family;

/// Affine map `(x,y) ↦ (a x + b y + c, d x + e y + f)` on one table cell.
pub type AffinePiece = [f64; 6];

/// Continuous self-maps of the square `[0,1]²` with opposite sides identified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseMap {
    Identity,
    Translate {
        dx: f64,
        dy: f64,
    },
    Constant {
        x: f64,
        y: f64,
    },
    /// Contraction toward a point along the shortest torus displacement.
    Contract {
        x: f64,
        y: f64,
        ratio: f64,
    },
    /// `(x,y) ↦ (m x, m y) mod 1` for an integer factor `m`.
    Stretch {
        factor: u32,
    },
    /// Piecewise-affine map given per cell of a `g × g` table; images must stay in the square.
    Affine {
        g: usize,
        pieces: Vec<AffinePiece>,
    },
}

#[derive(Clone, Debug)]
pub struct GridMap {
    g: usize,
    map: BaseMap,
}

fn wrap(v: f64) -> f64 {
    let r = v.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

fn wrapped_delta(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    if d > 0.5 {
        d - 1.0
    } else {
        d
    }
}

/// Shortest distance between two points of the torus.
pub fn torus_distance(p: [f64; 2], q: [f64; 2]) -> f64 {
    wrapped_delta(p[0], q[0]).hypot(wrapped_delta(p[1], q[1]))
}

impl GridMap {
    pub fn new(g: usize, map: BaseMap) -> Result<Self> {
        if g < 1 {
            return Err(Error::Precondition("grid size must be positive".into()));
        }
        match &map {
            BaseMap::Contract { ratio, .. } if !(0.0..1.0).contains(ratio) => {
                return Err(Error::Precondition(format!("contraction ratio {ratio} must lie in [0,1)")));
            }
            BaseMap::Stretch { factor: 0 } => {
                return Err(Error::Precondition("stretch factor must be positive".into()));
            }
            BaseMap::Affine { g: tg, pieces } if *tg == 0 || pieces.len() != tg * tg => {
                return Err(Error::ShapeError(format!(
                    "affine table of size {tg} needs {} pieces, got {}",
                    tg * tg,
                    pieces.len()
                )));
            }
            _ => {}
        }
        Ok(GridMap { g, map })
    }

    pub fn grid(&self) -> usize {
        self.g
    }

    pub fn base(&self) -> &BaseMap {
        &self.map
    }

    /// Declared Lipschitz constant of the base map for the torus metric.
    pub fn lipschitz(&self) -> f64 {
        match &self.map {
            BaseMap::Identity | BaseMap::Translate { .. } => 1.0,
            BaseMap::Constant { .. } => 0.0,
            BaseMap::Contract { ratio, .. } => *ratio,
            BaseMap::Stretch { factor } => *factor as f64,
            BaseMap::Affine { pieces, .. } => pieces
                .iter()
                .map(|p| (p[0] * p[0] + p[1] * p[1] + p[3] * p[3] + p[4] * p[4]).sqrt())
                .fold(0.0, f64::max),
        }
    }

    pub fn apply(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        let [x, y] = p;
        let out = match &self.map {
            BaseMap::Identity => [x, y],
            BaseMap::Translate { dx, dy } => [wrap(x + dx), wrap(y + dy)],
            BaseMap::Constant { x: cx, y: cy } => [wrap(*cx), wrap(*cy)],
            BaseMap::Contract { x: cx, y: cy, ratio } => {
                [wrap(cx + ratio * wrapped_delta(x, *cx)), wrap(cy + ratio * wrapped_delta(y, *cy))]
            }
            BaseMap::Stretch { factor } => [wrap(*factor as f64 * x), wrap(*factor as f64 * y)],
            BaseMap::Affine { g, pieces } => {
                let a = ((x * *g as f64) as usize).min(g - 1);
                let b = ((y * *g as f64) as usize).min(g - 1);
                let c = &pieces[b * g + a];
                let img = [c[0] * x + c[1] * y + c[2], c[3] * x + c[4] * y + c[5]];
                if !(0.0..=1.0).contains(&img[0]) || !(0.0..=1.0).contains(&img[1]) {
                    return Err(Error::RangeError(img));
                }
                img
            }
        };
        Ok(out)
    }
}

impl DynamicalSystem for GridMap {
    type Point = [f64; 2];

    fn step(&self, p: &[f64; 2]) -> Result<[f64; 2]> {
        if !self.contains(p) {
            return Err(Error::InvalidPoint(format!("{p:?} is outside the unit square")));
        }
        self.apply(*p)
    }

    fn distance(&self, p: &[f64; 2], q: &[f64; 2]) -> Result<f64> {
        Ok(torus_distance(*p, *q))
    }

    fn contains(&self, p: &[f64; 2]) -> bool {
        p.iter().all(|v| (0.0..=1.0).contains(v))
    }

    fn diameter(&self) -> f64 {
        std::f64::consts::FRAC_1_SQRT_2
    }

    fn accumulate_tests(&self, p: &[f64; 2], out: &mut [f64]) -> Result<()> {
        family::accumulate_torus(*p, out);
        Ok(())
    }

    fn test_norm(&self, _j: usize) -> f64 {
        1.0
    }
}
