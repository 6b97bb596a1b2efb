use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dn_distance;
use crate::error::{Error, Result};
use crate::measures::TargetMeasure;
use crate::systems::{DynamicalSystem, SymbolicPoint};

/// Sample-cover estimate of `(1/n) log N(n, ε, δ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KatokEstimate {
    pub estimate: f64,
    /// Closed Bowen balls used to cover the required sample mass.
    pub balls: usize,
    /// Sample points covered by those balls.
    pub covered: usize,
    pub samples: usize,
    pub n: usize,
    pub eps: f64,
    pub delta: f64,
}

/// Points with a random `len`-symbol prefix drawn from `measure`.
pub fn word_sampler(measure: TargetMeasure, len: usize) -> impl Fn(&mut ChaCha8Rng) -> Result<SymbolicPoint> + Sync {
    move |rng| Ok(SymbolicPoint::truncated(measure.sample_word(len, rng)?))
}

fn sampler_error(e: Error) -> Error {
    match e {
        Error::SamplerError(_) => e,
        other => Error::SamplerError(other.to_string()),
    }
}

pub fn katok_entropy_estimate<S, F>(
    sys: &S,
    sampler: F,
    n: usize,
    eps: f64,
    delta: f64,
    samples: usize,
    seed: u64,
) -> Result<KatokEstimate>
where
    S: DynamicalSystem,
    F: Fn(&mut ChaCha8Rng) -> Result<S::Point>,
{
    if n == 0 || !(eps > 0.0) || !(delta > 0.0 && delta < 1.0) || samples == 0 {
        return Err(Error::Precondition(format!(
            "need n ≥ 1, ε > 0, δ ∈ (0,1), samples ≥ 1; got n={n}, ε={eps}, δ={delta}, samples={samples}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = (0..samples).map(|_| sampler(&mut rng).map_err(sampler_error)).collect::<Result<Vec<_>>>()?;
    let need = ((1.0 - delta) * samples as f64 - 1e-9).ceil().max(0.0) as usize;

    let (balls, covered) =
        if let Some(keys) = pts.iter().map(|p| sys.bowen_class(p, n, eps)).collect::<Option<Vec<_>>>() {
            let mut sizes: HashMap<Vec<_>, usize> = HashMap::new();
            for k in keys {
                *sizes.entry(k?).or_default() += 1;
            }
            let mut sizes: Vec<usize> = sizes.into_values().collect();
            sizes.sort_unstable_by(|a, b| b.cmp(a));
            let mut covered = 0;
            let mut balls = 0;
            for s in sizes {
                if covered >= need {
                    break;
                }
                covered += s;
                balls += 1;
            }
            (balls, covered)
        } else {
            let near: Vec<Vec<usize>> = (0..pts.len())
                .into_par_iter()
                .map(|i| {
                    let mut v = Vec::new();
                    for j in 0..pts.len() {
                        if i == j || dn_distance(sys, &pts[i], &pts[j], n)? <= eps {
                            v.push(j);
                        }
                    }
                    Ok(v)
                })
                .collect::<Result<_>>()?;
            let mut done = vec![false; pts.len()];
            let mut covered = 0;
            let mut balls = 0;
            while covered < need {
                let (best, gain) = near
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (i, v.iter().filter(|&&j| !done[j]).count()))
                    .fold((0, 0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
                if gain == 0 {
                    return Err(Error::InternalError("greedy cover stalled".into()));
                }
                for &j in &near[best] {
                    done[j] = true;
                }
                covered += gain;
                balls += 1;
            }
            (balls, covered)
        };
    Ok(KatokEstimate { estimate: (balls.max(1) as f64).ln() / n as f64, balls, covered, samples, n, eps, delta })
}
