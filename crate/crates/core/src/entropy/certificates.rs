use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::BowenBall;
use crate::error::{Error, Result};
use crate::systems::DynamicalSystem;

/// A cover by Bowen balls `B_u(x, ε)` with `u ≥ n`, weighted by `e^{-tu}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverSum<P> {
    pub balls: Vec<BowenBall<P>>,
    pub t: f64,
    pub n: usize,
}

impl<P: Clone> CoverSum<P> {
    pub fn new(balls: Vec<BowenBall<P>>, t: f64, n: usize) -> Result<Self> {
        if let Some(b) = balls.iter().find(|b| b.n < n) {
            return Err(Error::Precondition(format!("ball of length {} is shorter than n = {n}", b.n)));
        }
        if !(t >= 0.0) {
            return Err(Error::Precondition(format!("exponent t = {t} must be non-negative")));
        }
        Ok(CoverSum { balls, t, n })
    }

    /// `Σ e^{-t u}` over the balls.
    pub fn value(&self) -> f64 {
        self.balls.iter().map(|b| (-self.t * b.n as f64).exp()).sum()
    }
}

/// Cover sum after checking that every target point lies in some ball.
pub fn bowen_sum_upper<S: DynamicalSystem>(sys: &S, cover: &CoverSum<S::Point>, target: &[S::Point]) -> Result<f64> {
    if target.is_empty() {
        return Ok(0.0);
    }
    for (i, y) in target.iter().enumerate() {
        let mut hit = false;
        for b in &cover.balls {
            if b.contains(sys, y)? {
                hit = true;
                break;
            }
        }
        if !hit {
            return Err(Error::NotACover(i));
        }
    }
    Ok(cover.value())
}

/// `Σ_{s ≥ S} s e^{-ts}` in closed form.
pub fn geometric_tail_closed(t: f64, start: u64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Precondition(format!("tail needs t > 0, got {t}")));
    }
    let one_minus_q = -(-t).exp_m1();
    let s = start as f64;
    let q_s = (-t * s).exp();
    Ok(s * q_s / one_minus_q + q_s * (-t).exp() / (one_minus_q * one_minus_q))
}

/// `Σ_{s ≥ S} s e^{-ts}` by compensated summation of up to `max_terms` terms.
///
/// Stops early once a term drops below `1e-18` of the running sum.
pub fn geometric_tail_direct(t: f64, start: u64, max_terms: u64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Precondition(format!("tail needs t > 0, got {t}")));
    }
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for s in start..start.saturating_add(max_terms) {
        let term = s as f64 * (-t * s as f64).exp();
        let next = sum + term;
        comp += if sum.abs() >= term.abs() { (sum - next) + term } else { (term - next) + sum };
        sum = next;
        if term <= 1e-18 * sum.abs() && s > start {
            break;
        }
    }
    Ok(sum + comp)
}

/// Outcome of the counting test `|W_m| ≥ e^{M_m h}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoranCertificate {
    pub holds: bool,
    /// `min_m (log|W_m| − M_m h)`.
    pub min_margin: f64,
    pub worst_index: usize,
}

/// Natural logarithm of a big integer (`-∞` for zero).
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    let shift = bits.saturating_sub(64);
    let top = x >> shift;
    let top: u64 = top.try_into().expect("at most 64 bits");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn moran_lower_certificate(counts: &[BigUint], lengths: &[u64], h: f64) -> Result<MoranCertificate> {
    if counts.len() != lengths.len() || counts.is_empty() {
        return Err(Error::ShapeError(format!("{} counts against {} lengths", counts.len(), lengths.len())));
    }
    if lengths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("lengths must be strictly increasing".into()));
    }
    let (worst_index, min_margin) = counts
        .iter()
        .zip(lengths)
        .map(|(c, &m)| ln_biguint(c) - m as f64 * h)
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    Ok(MoranCertificate { holds: min_margin >= 0.0, min_margin, worst_index })
}
