use rayon::prelude::*;

use super::{max_deviation, PseudoOrbit, ShadowCertificate, TraceOutcome};
use crate::error::{Error, Result};
use crate::systems::IntervalHomeo;

pub const INITIAL_GRID: usize = 1 << 12;
pub const REFINEMENTS: usize = 20;

/// Grid search with local refinement for the initial point minimising the
/// maximal deviation from the pseudo-orbit.
pub fn trace_interval(f: &IntervalHomeo, po: &PseudoOrbit<f64>, eps: f64) -> Result<TraceOutcome<f64>> {
    if po.points.is_empty() {
        return Err(Error::Precondition("empty pseudo-orbit".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!("ε = {eps} must be positive")));
    }
    let cost = |y: f64| max_deviation(f, &y, &po.points);
    let grid: Vec<f64> = (0..=INITIAL_GRID).map(|i| i as f64 / INITIAL_GRID as f64).collect();
    let costs = grid.par_iter().map(|&y| cost(y)).collect::<Result<Vec<f64>>>()?;
    let (mut best_y, mut best) =
        grid.iter().zip(&costs).fold((0.0, f64::INFINITY), |acc, (&y, &c)| if c < acc.1 { (y, c) } else { acc });
    let mut half = 1.0 / INITIAL_GRID as f64;
    for _ in 0..REFINEMENTS {
        let lo = (best_y - half).max(0.0);
        let hi = (best_y + half).min(1.0);
        for i in 0..=16 {
            let y = lo + (hi - lo) * i as f64 / 16.0;
            let c = cost(y)?;
            if c < best {
                best = c;
                best_y = y;
            }
        }
        half /= 4.0;
    }
    if best < eps {
        let achieved = cost(best_y)?;
        Ok(TraceOutcome::Shadowed(ShadowCertificate {
            point: best_y,
            achieved,
            horizon: po.points.len(),
            epsilon: eps,
        }))
    } else {
        Ok(TraceOutcome::NoShadowFound { best })
    }
}
