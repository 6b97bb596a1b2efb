use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{trace_interval, trace_symbolic, PseudoOrbit, TraceOutcome};
use crate::error::{Error, Result};
use crate::systems::{DynamicalSystem, IntervalHomeo, Shift, Symbol};

/// Below this gap the modulus search gives up and reports 0.
pub const MODULUS_FLOOR: f64 = 9.313225746154785e-10;

/// Systems with a random pseudo-orbit generator and a tracer.
pub trait Tracer: DynamicalSystem {
    fn random_pseudo_orbit(&self, delta: f64, horizon: usize, rng: &mut ChaCha8Rng)
        -> Result<PseudoOrbit<Self::Point>>;

    /// Achieved deviation, or `None` when no shadowing orbit was found within `eps`.
    fn trace(&self, po: &PseudoOrbit<Self::Point>, eps: f64) -> Result<Option<f64>>;
}

const RANDOM_EXTENSION: usize = 8;

impl Tracer for Shift {
    fn random_pseudo_orbit(
        &self,
        delta: f64,
        horizon: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<PseudoOrbit<Self::Point>> {
        if horizon == 0 || !(delta > 0.0) {
            return Err(Error::Precondition("need horizon ≥ 1 and δ > 0".into()));
        }
        let mut keep = 0usize;
        while (-(keep as f64)).exp2() >= delta {
            keep += 1;
        }
        let fresh = |prefix: Vec<Symbol>, rng: &mut ChaCha8Rng| -> Result<_> {
            let mut w = prefix;
            if w.len() < self.memory() {
                w = self.periodic_point(&w)?.prefix(self.memory())?;
            }
            self.extend_random(&mut w, RANDOM_EXTENSION, rng);
            self.periodic_point(&w)
        };
        let mut points = vec![fresh(self.random_word(self.memory(), rng), rng)?];
        while points.len() < horizon {
            let next = points.last().expect("nonempty").shifted(1);
            points.push(fresh(next.prefix(keep)?, rng)?);
        }
        Ok(PseudoOrbit { points, delta })
    }

    fn trace(&self, po: &PseudoOrbit<Self::Point>, eps: f64) -> Result<Option<f64>> {
        match trace_symbolic(self, po) {
            Ok(c) => Ok((c.achieved < eps).then_some(c.achieved)),
            Err(Error::ModulusViolation(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

impl Tracer for IntervalHomeo {
    fn random_pseudo_orbit(&self, delta: f64, horizon: usize, rng: &mut ChaCha8Rng) -> Result<PseudoOrbit<f64>> {
        if horizon == 0 || !(delta > 0.0) {
            return Err(Error::Precondition("need horizon ≥ 1 and δ > 0".into()));
        }
        let mut points = vec![rng.gen::<f64>()];
        while points.len() < horizon {
            let fx = self.apply(*points.last().expect("nonempty"));
            let kick = (rng.gen::<f64>() * 2.0 - 1.0) * delta * 0.999;
            points.push((fx + kick).clamp(0.0, 1.0));
        }
        Ok(PseudoOrbit { points, delta })
    }

    fn trace(&self, po: &PseudoOrbit<f64>, eps: f64) -> Result<Option<f64>> {
        Ok(match trace_interval(self, po, eps)? {
            TraceOutcome::Shadowed(c) => Some(c.achieved),
            TraceOutcome::NoShadowFound { .. } => None,
        })
    }
}

/// Largest `δ = diam·2^{-i}` for which every random `δ`-pseudo-orbit of the
/// trial batch was `ε`-shadowed.
pub fn shadowing_modulus<S: Tracer>(sys: &S, eps: f64, trials: usize, horizon: usize, seed: u64) -> Result<f64> {
    if trials < 10 {
        return Err(Error::Precondition(format!("{trials} trials, need at least 10")));
    }
    if !(eps > 0.0) || horizon == 0 {
        return Err(Error::Precondition("need ε > 0 and horizon ≥ 1".into()));
    }
    let cap = sys.diameter();
    if eps >= cap {
        return Ok(cap);
    }
    let mut delta = cap;
    let mut level = 0u64;
    while delta >= MODULUS_FLOOR {
        let all = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(level * trials as u64 + t as u64);
                let po = sys.random_pseudo_orbit(delta, horizon, &mut rng)?;
                Ok(sys.trace(&po, eps)?.is_some())
            })
            .collect::<Result<Vec<bool>>>()?
            .into_iter()
            .all(|b| b);
        if all {
            return Ok(delta);
        }
        delta /= 2.0;
        level += 1;
    }
    Ok(0.0)
}
