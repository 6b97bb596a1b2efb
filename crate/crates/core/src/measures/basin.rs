use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{orbit_signatures, Signature};
use crate::error::{Error, Result};
use crate::systems::GridMap;

/// Fraction of uniformly sampled points whose empirical measures at
/// `n/2`, `3n/4` and `n` all lie within `eps` of `target`.
pub fn srb_basin_estimate(
    sys: &GridMap,
    target: &Signature,
    eps: f64,
    samples: usize,
    n: usize,
    seed: u64,
) -> Result<f64> {
    if samples < 100 {
        return Err(Error::Precondition(format!("{samples} samples, need at least 100")));
    }
    if n == 0 {
        return Err(Error::Precondition("orbit length must be positive".into()));
    }
    let mut checkpoints = vec![n / 2, 3 * n / 4, n];
    checkpoints.retain(|&c| c > 0);
    checkpoints.dedup();
    let j = target.truncation();
    let hits: Result<Vec<bool>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let x = [rng.gen::<f64>(), rng.gen::<f64>()];
            let sigs = orbit_signatures(sys, &x, &checkpoints, j)?;
            for s in &sigs {
                if s.rho(target)?.upper() >= eps {
                    return Ok(false);
                }
            }
            Ok(true)
        })
        .collect();
    let hits = hits?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / samples as f64)
}
