use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::irregular::select_segments;
use crate::measures::TargetMeasure;
use crate::systems::{DynamicalSystem, Shift, Symbol, SymbolicPoint};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HorseshoeParams {
    /// Segment length `n`.
    #[serde(alias = "n")]
    pub segment_len: usize,
    pub tolerance: f64,
    #[serde(alias = "J")]
    pub truncation: usize,
    pub epsilon: f64,
    /// Random codec round-trips and separation pairs checked.
    pub checks: usize,
    pub seed: u64,
}

impl Default for HorseshoeParams {
    fn default() -> Self {
        HorseshoeParams { segment_len: 10, tolerance: 0.15, truncation: 2, epsilon: 0.5, checks: 1000, seed: 0 }
    }
}

/// An `f^k`-invariant set coded by free concatenations of `r` segments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Horseshoe {
    pub k: usize,
    pub r: usize,
    pub alpha: f64,
    /// `log(r−1)/k`.
    pub rate: f64,
    pub segments: Vec<Vec<Symbol>>,
    pub connector: Vec<Symbol>,
    pub round_trips: usize,
    pub separated_pairs: usize,
    #[serde(skip)]
    index: HashMap<Vec<Symbol>, usize>,
}

impl Horseshoe {
    fn block(&self, l: usize) -> Result<impl Iterator<Item = Symbol> + '_> {
        let seg = self.segments.get(l).ok_or_else(|| Error::InvalidSequence(format!("symbol {l} ≥ r = {}", self.r)))?;
        Ok(seg.iter().chain(&self.connector).copied())
    }

    fn concat(&self, xi: &[usize]) -> Result<Vec<Symbol>> {
        let mut out = Vec::with_capacity(xi.len() * self.k);
        for &l in xi {
            out.extend(self.block(l)?);
        }
        Ok(out)
    }

    /// Section of `π`: the point `η(ξ_0) η(ξ_1) …` for `ξ = pre · period^∞`,
    /// truncated after `pre` when `period` is empty.
    pub fn section(&self, pre: &[usize], period: &[usize]) -> Result<SymbolicPoint> {
        let head = self.concat(pre)?;
        if period.is_empty() {
            return Ok(SymbolicPoint::truncated(head));
        }
        SymbolicPoint::periodic(head, self.concat(period)?)
    }

    /// `π(x)` on its first `blocks` symbols.
    pub fn project(&self, x: &SymbolicPoint, blocks: usize) -> Result<Vec<usize>> {
        let w = x.prefix(blocks * self.k)?;
        w.chunks(self.k)
            .map(|c| {
                if c[self.segments[0].len()..] != self.connector[..] {
                    return Err(Error::InvalidPoint("connector mismatch".into()));
                }
                self.index
                    .get(&c[..self.segments[0].len()])
                    .copied()
                    .ok_or_else(|| Error::InvalidPoint("block is not a horseshoe segment".into()))
            })
            .collect()
    }

    fn rebuild_index(&mut self) {
        self.index = self.segments.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    }

    /// Restores the lookup table after deserialization.
    pub fn with_index(mut self) -> Self {
        self.rebuild_index();
        self
    }
}

fn random_sequence(rng: &mut ChaCha8Rng, r: usize) -> (Vec<usize>, Vec<usize>) {
    let pre = (0..rng.gen_range(0..4)).map(|_| rng.gen_range(0..r)).collect();
    let per = (0..rng.gen_range(1..5)).map(|_| rng.gen_range(0..r)).collect();
    (pre, per)
}

/// Builds a horseshoe from `μ`-typical segments of one boundary class and
/// verifies `σ∘π = π∘f^k` and separation on random symbol sequences.
pub fn extract_horseshoe(
    shift: &Shift,
    mu: &TargetMeasure,
    alpha: f64,
    eta: f64,
    params: &HorseshoeParams,
) -> Result<Horseshoe> {
    if !(alpha >= 0.0) || !(eta >= 0.0) {
        return Err(Error::Precondition(format!("need α, η ≥ 0; got α={alpha}, η={eta}")));
    }
    mu.validate(shift.alphabet())?;
    let h = mu.entropy()?;
    if h <= alpha + 4.0 * eta {
        return Err(Error::EntropyDeficit(format!("h(μ) = {h:.6} does not exceed α + 4η = {:.6}", alpha + 4.0 * eta)));
    }
    let bank = select_segments(shift, mu, mu, params.segment_len, params.epsilon, params.tolerance, params.truncation)
        .map_err(|e| match e {
            Error::ToleranceTooTight { .. } => Error::EntropyDeficit(e.to_string()),
            e => e,
        })?;
    let r = bank.mu_words.len();
    let connector = bank.connectors.mu_mu.clone();
    let k = params.segment_len + connector.len();
    let rate = if r >= 2 { ((r - 1) as f64).ln() / k as f64 } else { f64::NEG_INFINITY };
    if rate <= alpha {
        return Err(Error::EntropyDeficit(format!(
            "log(r−1)/k = {rate:.6} with r = {r}, k = {k} does not exceed α = {alpha}"
        )));
    }
    let mut hs = Horseshoe {
        k,
        r,
        alpha,
        rate,
        segments: bank.mu_words,
        connector,
        round_trips: 0,
        separated_pairs: 0,
        index: HashMap::new(),
    };
    hs.rebuild_index();

    let checks = params.checks;
    let results = (0..checks)
        .into_par_iter()
        .map(|i| -> Result<bool> {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(i as u64);
            let (pre, per) = random_sequence(&mut rng, r);
            let blocks = pre.len() + 2 * per.len() + 1;
            let seq = |t: usize| if t < pre.len() { pre[t] } else { per[(t - pre.len()) % per.len()] };
            let x = hs.section(&pre, &per)?;
            if !shift.contains(&x) {
                return Err(Error::InternalError("section left the subshift".into()));
            }
            let direct: Vec<usize> = (0..blocks).map(seq).collect();
            let shifted: Vec<usize> = (1..=blocks).map(seq).collect();
            let ok = hs.project(&x, blocks)? == direct && hs.project(&shift.iterate(&x, k)?, blocks)? == shifted;

            // a second sequence differing somewhere in the first blocks
            let (pre2, per2) = random_sequence(&mut rng, r);
            let seq2 = |t: usize| if t < pre2.len() { pre2[t] } else { per2[(t - pre2.len()) % per2.len()] };
            let Some(t) = (0..blocks).find(|&t| seq(t) != seq2(t)) else { return Ok(ok) };
            let y = hs.section(&pre2, &per2)?;
            let mut sep: f64 = 0.0;
            let (mut a, mut b) = (shift.iterate(&x, t * k)?, shift.iterate(&y, t * k)?);
            for _ in 0..params.segment_len {
                sep = sep.max(shift.distance(&a, &b)?);
                a = shift.step(&a)?;
                b = shift.step(&b)?;
            }
            if sep <= params.epsilon / 3.0 {
                return Err(Error::InternalError(format!("codes {t} blocks apart are only {sep}-separated")));
            }
            Ok(ok)
        })
        .collect::<Result<Vec<bool>>>()?;
    if let Some(bad) = results.iter().position(|&ok| !ok) {
        return Err(Error::InternalError(format!("semiconjugacy fails on round trip {bad}")));
    }
    hs.round_trips = checks;
    hs.separated_pairs = checks;
    Ok(hs)
}
