use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::ln_biguint;
use crate::error::{Error, Result};
use crate::systems::Symbol;

/// Parameters of the proximal subshift generated by `A`: points over
/// `{0,…,m}` with `x_i = 0` exactly when `i mod s_n ≥ s_n − k_n` for some `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProximalSpec {
    pub m: usize,
    pub gamma: f64,
    /// `k_1, k_2, …` up to the largest level representable in `u128`.
    pub k: Vec<u128>,
    /// `s_1, s_2, …`, each dividing the next.
    pub s: Vec<u128>,
}

/// `k_n = n` and `s_n` the least multiple of `s_{n−1}` with `s_n ≥ 2^n n² / γ`.
pub fn proximal_subshift(m: usize, gamma: f64) -> Result<ProximalSpec> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidSlack(gamma));
    }
    if m < 2 {
        return Err(Error::InvalidAlphabet(m + 1));
    }
    let mut k = Vec::new();
    let mut s: Vec<u128> = Vec::new();
    for n in 1u32.. {
        let target = (2f64.powi(n as i32) * (n as f64).powi(2) / gamma).ceil();
        if !(target < 1.0e37) {
            break;
        }
        let target = target as u128;
        let prev = s.last().copied().unwrap_or(1);
        let Some(sn) = target.div_ceil(prev).checked_mul(prev) else { break };
        k.push(n as u128);
        s.push(sn);
    }
    let spec = ProximalSpec { m, gamma, k, s };
    spec.validate()?;
    Ok(spec)
}

impl ProximalSpec {
    pub fn levels(&self) -> usize {
        self.s.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.k.len() != self.s.len() || self.s.is_empty() {
            return Err(Error::ShapeError("k and s must be nonempty and of equal length".into()));
        }
        for n in 1..self.s.len() {
            if self.s[n] % self.s[n - 1] != 0 || self.k[n] >= self.s[n - 1] || self.k[n] <= self.k[n - 1] {
                return Err(Error::Precondition(format!("level {} breaks divisibility or k_(n+1) < s_n", n + 1)));
            }
        }
        if self.partial_sum(self.levels()) >= self.gamma {
            return Err(Error::Precondition("Σ k_i/s_i is not below γ".into()));
        }
        Ok(())
    }

    /// `Σ_{i≤n} k_i / s_i`.
    pub fn partial_sum(&self, n: usize) -> f64 {
        self.k.iter().zip(&self.s).take(n).map(|(&k, &s)| k as f64 / s as f64).sum()
    }

    fn partial_sum_exact(&self, n: usize) -> BigRational {
        self.k
            .iter()
            .zip(&self.s)
            .take(n)
            .map(|(&k, &s)| BigRational::new(BigInt::from(k), BigInt::from(s)))
            .fold(BigRational::from_integer(0.into()), |a, b| a + b)
    }

    /// Whether position `i` of every point of `A` is forced to 0.
    pub fn forced(&self, i: u128) -> bool {
        for (&k, &s) in self.k.iter().zip(&self.s) {
            if s - k > i {
                return false;
            }
            if i % s >= s - k {
                return true;
            }
        }
        false
    }

    /// Offsets whose windows of length `len` realize every zero pattern of `A`.
    fn candidate_offsets(&self, len: u128) -> Result<Vec<u128>> {
        let base = self
            .s
            .iter()
            .position(|&s| s >= len)
            .ok_or_else(|| Error::Precondition(format!("window {len} exceeds the largest level")))?;
        let top = (base + 1).min(self.levels() - 1);
        let mut out: Vec<u128> = (0..self.s[top] + len).collect();
        for n in top + 1..self.levels() {
            let lo = self.s[n] - self.k[n] - len;
            out.extend(lo..self.s[n] + len);
        }
        Ok(out)
    }

    fn zero_pattern(&self, start: u128, len: usize) -> Vec<bool> {
        (0..len as u128).map(|j| self.forced(start + j)).collect()
    }

    /// Whether `word` occurs in the subshift generated by `A`.
    pub fn is_admissible(&self, word: &[Symbol]) -> Result<bool> {
        if word.iter().any(|&c| c as usize > self.m) {
            return Ok(false);
        }
        if word.iter().all(|&c| c == 0) {
            return Ok(true);
        }
        let pattern: Vec<bool> = word.iter().map(|&c| c == 0).collect();
        let offsets = self.candidate_offsets(word.len() as u128)?;
        Ok(offsets.par_iter().any(|&p| self.zero_pattern(p, word.len()) == pattern))
    }

    /// Prefix of length `len` of a random point of `A`, starting at `offset`.
    pub fn sample_word<R: Rng + ?Sized>(&self, offset: u128, len: usize, rng: &mut R) -> Vec<Symbol> {
        (0..len as u128)
            .map(|j| if self.forced(offset + j) { 0 } else { rng.gen_range(1..=self.m) as Symbol })
            .collect()
    }
}

/// Count of length-`s_N` prefixes of `A` against `(1 − Σ_{i≤N} k_i/s_i) log m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProximalEntropyCheck {
    pub level: usize,
    pub length: u128,
    /// Unforced positions; the prefix count is `m^free`.
    pub free: u128,
    /// `(1/s_N) log m^free`.
    pub rate: f64,
    /// `(1 − Σ_{i≤N} k_i/s_i) log m`.
    pub bound: f64,
    /// Exact rational comparison of the two sides.
    pub holds: bool,
    /// `log(m+1)`.
    pub ambient: f64,
}

impl ProximalEntropyCheck {
    pub fn count(&self, m: usize) -> BigUint {
        BigUint::from(m).pow(self.free as u32)
    }
}

pub fn proximal_entropy_check(spec: &ProximalSpec, level: usize) -> Result<ProximalEntropyCheck> {
    if level == 0 || level > spec.levels() {
        return Err(Error::Precondition(format!("level {level} outside 1..={}", spec.levels())));
    }
    let len = spec.s[level - 1];
    if len > 1 << 26 {
        return Err(Error::Precondition(format!("s_{level} = {len} is too long to scan")));
    }
    let forced = (0..len).into_par_iter().filter(|&i| spec.forced(i)).count() as u128;
    let free = len - forced;
    let lm = (spec.m as f64).ln();
    let exact_rate = BigRational::new(BigInt::from(free), BigInt::from(len));
    let exact_bound = BigRational::from_integer(1.into()) - spec.partial_sum_exact(level);
    let count = BigUint::from(spec.m).pow(free as u32);
    Ok(ProximalEntropyCheck {
        level,
        length: len,
        free,
        rate: ln_biguint(&count) / len as f64,
        bound: (1.0 - spec.partial_sum(level)) * lm,
        holds: exact_rate >= exact_bound,
        ambient: ((spec.m + 1) as f64).ln(),
    })
}

/// First place a sample misses a `0^{k_n}` block within a window of length `2 s_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyndeticViolation {
    pub sample: usize,
    pub level: usize,
    pub window_start: usize,
}

pub fn minimal_subset_check(
    spec: &ProximalSpec,
    samples: &[Vec<Symbol>],
    horizon: usize,
) -> Result<Option<SyndeticViolation>> {
    if spec.levels() < 2 || (horizon as u128) < 2 * spec.s[1] {
        return Err(Error::Precondition(format!("horizon {horizon} is below 2·s_2")));
    }
    let levels: Vec<usize> = (0..spec.levels()).filter(|&n| 2 * spec.s[n] <= horizon as u128).collect();
    let found = samples.par_iter().enumerate().find_map_first(|(idx, w)| {
        let w = &w[..horizon.min(w.len())];
        for &n in &levels {
            let (k, win) = (spec.k[n] as usize, 2 * spec.s[n] as usize);
            // run[i] = length of the zero run ending at i
            let mut run = vec![0usize; w.len()];
            for i in 0..w.len() {
                run[i] = if w[i] == 0 { 1 + if i > 0 { run[i - 1] } else { 0 } } else { 0 };
            }
            let mut last_end: Option<usize> = None;
            let mut ends = vec![None; w.len()];
            for i in 0..w.len() {
                if run[i] >= k {
                    last_end = Some(i);
                }
                ends[i] = last_end;
            }
            for start in 0..=w.len().saturating_sub(win) {
                let end = start + win - 1;
                let ok = ends[end].is_some_and(|e| e + 1 >= start + k);
                if !ok {
                    return Some(SyndeticViolation { sample: idx, level: n + 1, window_start: start });
                }
            }
        }
        None
    });
    Ok(found)
}

/// Words of length `horizon` read from random points of `A` at random offsets.
pub fn proximal_samples(spec: &ProximalSpec, count: usize, horizon: usize, seed: u64) -> Vec<Vec<Symbol>> {
    let span = spec.s[spec.levels().min(4) - 1] * 2;
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let off = rng.gen_range(0..span);
            spec.sample_word(off, horizon, &mut rng)
        })
        .collect()
}
