use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::family::cylinder_word;
use super::Signature;
use crate::error::{Error, Result};
use crate::systems::{Shift, Symbol, SymbolicPoint};

/// Invariant measures on a shift space with closed-form cylinder masses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetMeasure {
    /// Product measure with the given letter probabilities.
    Bernoulli { p: Vec<f64> },
    /// Uniform measure on the orbit of `word^∞` (base-36 characters).
    Periodic { word: String },
    /// Stationary Markov measure on letters.
    Markov { initial: Vec<f64>, transition: Vec<Vec<f64>> },
}

impl TargetMeasure {
    pub fn uniform_bernoulli(k: usize) -> Self {
        TargetMeasure::Bernoulli { p: vec![1.0 / k as f64; k] }
    }

    pub fn dirac_fixed(s: Symbol) -> Self {
        TargetMeasure::Periodic { word: crate::systems::format_word(&[s]).expect("small symbol") }
    }

    /// Parry measure of a one-step shift of finite type.
    pub fn parry(shift: &Shift) -> Result<Self> {
        let (initial, transition) = shift.parry_measure()?;
        Ok(TargetMeasure::Markov { initial, transition })
    }

    fn periodic_word(word: &str) -> Result<Vec<Symbol>> {
        let p: SymbolicPoint = format!("|{word}").parse()?;
        Ok(p.period().expect("periodic").to_vec())
    }

    /// Mass of the cylinder `[w]`.
    pub fn cylinder_mass(&self, w: &[Symbol]) -> Result<f64> {
        Ok(match self {
            TargetMeasure::Bernoulli { p } => {
                let mut m = 1.0;
                for &s in w {
                    m *= *p.get(s as usize).unwrap_or(&0.0);
                }
                m
            }
            TargetMeasure::Periodic { word } => {
                let per = Self::periodic_word(word)?;
                let hits = (0..per.len())
                    .filter(|&i| w.iter().enumerate().all(|(t, &s)| per[(i + t) % per.len()] == s))
                    .count();
                hits as f64 / per.len() as f64
            }
            TargetMeasure::Markov { initial, transition } => {
                let Some(&first) = w.first() else { return Ok(1.0) };
                let mut m = *initial.get(first as usize).unwrap_or(&0.0);
                for pair in w.windows(2) {
                    m *= transition
                        .get(pair[0] as usize)
                        .and_then(|row| row.get(pair[1] as usize))
                        .copied()
                        .unwrap_or(0.0);
                }
                m
            }
        })
    }

    /// Exact integrals of the first `j` cylinder indicators over `k` letters.
    pub fn signature(&self, k: usize, j: usize) -> Result<Signature> {
        self.validate(k)?;
        let means = (1..=j).map(|i| self.cylinder_mass(&cylinder_word(k, i))).collect::<Result<Vec<_>>>()?;
        Ok(Signature::new(means, vec![1.0; j]))
    }

    /// Measure-theoretic entropy `h(μ)` in nats.
    pub fn entropy(&self) -> Result<f64> {
        let plogp = |v: &[f64]| -> f64 { v.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum() };
        Ok(match self {
            TargetMeasure::Bernoulli { p } => plogp(p),
            TargetMeasure::Periodic { .. } => 0.0,
            TargetMeasure::Markov { initial, transition } => {
                initial.iter().zip(transition).map(|(&pi, row)| pi * plogp(row)).sum()
            }
        })
    }

    /// A word of length `len` drawn from the measure.
    pub fn sample_word<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Result<Vec<Symbol>> {
        let weights = |v: &[f64]| WeightedIndex::new(v).map_err(|e| Error::SamplerError(format!("bad weights: {e}")));
        Ok(match self {
            TargetMeasure::Bernoulli { p } => {
                let d = weights(p)?;
                (0..len).map(|_| d.sample(rng) as Symbol).collect()
            }
            TargetMeasure::Periodic { word } => {
                let per = Self::periodic_word(word)?;
                let off = rng.gen_range(0..per.len());
                (0..len).map(|i| per[(off + i) % per.len()]).collect()
            }
            TargetMeasure::Markov { initial, transition } => {
                let rows = transition.iter().map(|r| weights(r)).collect::<Result<Vec<_>>>()?;
                let mut w = Vec::with_capacity(len);
                if len > 0 {
                    w.push(weights(initial)?.sample(rng) as Symbol);
                }
                while w.len() < len {
                    let last = *w.last().expect("nonempty") as usize;
                    let row =
                        rows.get(last).ok_or_else(|| Error::SamplerError("letter outside transition matrix".into()))?;
                    w.push(row.sample(rng) as Symbol);
                }
                w
            }
        })
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        let check = |v: &[f64], what: &str| -> Result<()> {
            let s: f64 = v.iter().sum();
            if v.len() != k || v.iter().any(|&x| !(0.0..=1.0).contains(&x)) || (s - 1.0).abs() > 1e-9 {
                return Err(Error::Precondition(format!("{what} is not a probability vector on {k} letters")));
            }
            Ok(())
        };
        match self {
            TargetMeasure::Bernoulli { p } => check(p, "Bernoulli weights"),
            TargetMeasure::Periodic { word } => {
                let per = Self::periodic_word(word)?;
                if per.iter().any(|&s| s as usize >= k) {
                    return Err(Error::Precondition("periodic word leaves the alphabet".into()));
                }
                Ok(())
            }
            TargetMeasure::Markov { initial, transition } => {
                check(initial, "initial distribution")?;
                if transition.len() != k {
                    return Err(Error::ShapeError("transition matrix has wrong size".into()));
                }
                for row in transition {
                    if row.iter().sum::<f64>() > 0.0 {
                        check(row, "transition row")?;
                    }
                }
                Ok(())
            }
        }
    }
}
