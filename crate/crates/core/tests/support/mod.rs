//! Randomized checks of the three empirical-measure estimates, shared with
//! the acceptance suite.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use shadowlab_core::measures::{induced_dn_distance, orbit_signatures, orbit_window_bound, tail_bound};
use shadowlab_core::{DynamicalSystem, Result};

/// Outcome of one randomized run: instances checked per part and any violations.
#[derive(Debug, Default)]
pub struct EstimateRun {
    pub instances: [usize; 3],
    pub violations: Vec<String>,
}

fn signature_at<S: DynamicalSystem>(sys: &S, x: &S::Point, n: usize, j: usize) -> Result<shadowlab_core::Signature> {
    Ok(orbit_signatures(sys, x, &[n], j)?.pop().expect("one checkpoint"))
}

/// Runs `instances` draws of each part with truncation `j`, widening every
/// comparison by both tail bounds.
pub fn empirical_estimates<S, G, P>(
    sys: &S,
    sample: G,
    perturb: P,
    instances: usize,
    j: usize,
    seed: u64,
) -> EstimateRun
where
    S: DynamicalSystem,
    G: Fn(&mut ChaCha8Rng) -> S::Point + Sync,
    P: Fn(&S::Point, usize, &mut ChaCha8Rng) -> S::Point + Sync,
{
    let slack = 2.0 * tail_bound(j);
    let results: Vec<Result<[Option<String>; 3]>> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let x = sample(&mut rng);

            // orbit windows: 0 ≤ k < m < n ≤ 200
            let n = rng.gen_range(3..=200);
            let m = rng.gen_range(2..n);
            let k = rng.gen_range(0..m);
            let fk = sys.iterate(&x, k)?;
            let d = signature_at(sys, &x, m, j)?.rho(&signature_at(sys, &fk, n, j)?)?.value;
            let bound = orbit_window_bound(n, m, k)?;
            let one = (d > bound + slack).then(|| format!("(1) x#{i} k={k} m={m} n={n}: {d} > {bound}"));

            // Bowen-ball closeness: p ≤ 50, d_p(x,y) < ε
            let p = rng.gen_range(1..=50);
            let y = perturb(&x, p, &mut rng);
            let dp = induced_dn_distance(sys, &x, &y, p, j)?;
            let eps = dp + rng.gen_range(1e-6..0.5);
            let ex = signature_at(sys, &x, p, j)?;
            let d2 = signature_at(sys, &y, p, j)?.rho(&ex)?.value;
            let two = (d2 >= eps + slack).then(|| format!("(2) x#{i} p={p}: {d2} ≥ ε = {eps}"));

            // p ≤ q ≤ (1 + ε/2) p
            let qmax = ((1.0 + eps / 2.0) * p as f64).floor() as usize;
            let q = rng.gen_range(p..=qmax.max(p));
            let d3 = signature_at(sys, &y, q, j)?.rho(&ex)?.value;
            let three = (d3 >= 2.0 * eps + slack).then(|| format!("(3) x#{i} p={p} q={q}: {d3} ≥ 2ε = {}", 2.0 * eps));
            Ok([one, two, three])
        })
        .collect();
    let mut run = EstimateRun::default();
    for r in results {
        match r {
            Ok(parts) => {
                for (slot, v) in parts.into_iter().enumerate() {
                    run.instances[slot] += 1;
                    if let Some(v) = v {
                        run.violations.push(v);
                    }
                }
            }
            Err(e) => run.violations.push(format!("error: {e}")),
        }
    }
    run
}

pub mod samplers {
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;
    use shadowlab_core::{Shift, SymbolicPoint};

    pub const HORIZON: usize = 640;

    pub fn shift_point(shift: &Shift, rng: &mut ChaCha8Rng) -> SymbolicPoint {
        SymbolicPoint::truncated(shift.random_word(HORIZON, rng))
    }

    /// Keeps the first `p + r` symbols of `x` and continues at random.
    pub fn shift_neighbor(shift: &Shift, x: &SymbolicPoint, p: usize, rng: &mut ChaCha8Rng) -> SymbolicPoint {
        let keep = p + rng.gen_range(0..12);
        let mut w = x.prefix(keep).expect("horizon");
        shift.extend_random(&mut w, HORIZON - keep, rng);
        SymbolicPoint::truncated(w)
    }

    pub fn unit(rng: &mut ChaCha8Rng) -> f64 {
        rng.gen_range(0.0..=1.0)
    }

    pub fn unit_neighbor(x: f64, rng: &mut ChaCha8Rng) -> f64 {
        let scale = 10f64.powi(-rng.gen_range(1..8));
        (x + rng.gen_range(-scale..scale)).clamp(0.0, 1.0)
    }

    pub fn square(rng: &mut ChaCha8Rng) -> [f64; 2] {
        [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]
    }

    pub fn square_neighbor(x: [f64; 2], rng: &mut ChaCha8Rng) -> [f64; 2] {
        [unit_neighbor(x[0], rng).min(0.999_999), unit_neighbor(x[1], rng).min(0.999_999)]
    }
}
