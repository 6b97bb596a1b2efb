use serde::{Deserialize, Serialize};

use super::{orbit_signatures, MeasureDistance, Signature};
use crate::error::{Error, Result};
use crate::systems::DynamicalSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    QuasiRegularCandidate,
    IrregularCandidate,
    Inconclusive,
}

/// Finite approximation of the set of limit measures of `E_n(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitMeasureSet {
    pub checkpoints: Vec<usize>,
    /// Indices (into `checkpoints`) of the cluster representatives.
    pub representatives: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub limit_set: LimitMeasureSet,
    /// Checkpoint indices and distance of the most separated pair in the examined half.
    pub witness: (usize, usize, MeasureDistance),
    /// Pairwise distances among the examined checkpoints, row-major.
    pub pairwise: Vec<Vec<f64>>,
}

/// Verdict from checkpoint signatures, looking only at the last half.
pub fn classify_signatures(checkpoints: &[usize], sigs: &[Signature], radius: f64) -> Result<Classification> {
    if sigs.len() < 4 || sigs.len() != checkpoints.len() {
        return Err(Error::InsufficientEvidence(format!("{} checkpoints, need at least 4", sigs.len())));
    }
    let start = sigs.len() / 2;
    let tail = &sigs[start..];
    let mut pairwise = vec![vec![0.0; tail.len()]; tail.len()];
    let mut witness: Option<(usize, usize, MeasureDistance)> = None;
    let mut all_close = true;
    let mut far_apart = false;
    for a in 0..tail.len() {
        for b in (a + 1)..tail.len() {
            let d = tail[a].rho(&tail[b])?;
            pairwise[a][b] = d.value;
            pairwise[b][a] = d.value;
            if d.upper() >= radius {
                all_close = false;
            }
            if d.value > 2.0 * radius + 2.0 * d.tail_bound {
                far_apart = true;
            }
            if witness.map_or(true, |w| d.value > w.2.value) {
                witness = Some((start + a, start + b, d));
            }
        }
    }
    let mut representatives: Vec<usize> = Vec::new();
    for (i, s) in tail.iter().enumerate() {
        let mut near = false;
        for &r in &representatives {
            if s.rho(&sigs[r])?.value <= radius {
                near = true;
                break;
            }
        }
        if !near {
            representatives.push(start + i);
        }
    }
    let verdict = if all_close {
        Verdict::QuasiRegularCandidate
    } else if far_apart {
        Verdict::IrregularCandidate
    } else {
        Verdict::Inconclusive
    };
    Ok(Classification {
        verdict,
        limit_set: LimitMeasureSet { checkpoints: checkpoints.to_vec(), representatives },
        witness: witness.expect("at least two signatures"),
        pairwise,
    })
}

/// Classifies `x` by comparing `E_n(x)` across checkpoints.
pub fn classify_point<S: DynamicalSystem>(
    sys: &S,
    x: &S::Point,
    checkpoints: &[usize],
    j: usize,
    radius: f64,
) -> Result<Classification> {
    if checkpoints.len() < 4 {
        return Err(Error::InsufficientEvidence(format!("{} checkpoints, need at least 4", checkpoints.len())));
    }
    let sigs = orbit_signatures(sys, x, checkpoints, j)?;
    classify_signatures(checkpoints, &sigs, radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{IntervalHomeo, Shift, SymbolicPoint};

    #[test]
    fn fixed_point_is_quasi_regular() {
        let sh = Shift::full(2).unwrap();
        let c = classify_point(&sh, &SymbolicPoint::constant(0), &[10, 100, 1000, 10000], 20, 0.02).unwrap();
        assert_eq!(c.verdict, Verdict::QuasiRegularCandidate);
        assert_eq!(c.limit_set.representatives.len(), 1);
    }

    #[test]
    fn interval_orbit_converges() {
        let f = IntervalHomeo::sqrt();
        let c = classify_point(&f, &0.3, &[100, 1000, 10_000, 100_000], 20, 0.02).unwrap();
        assert_eq!(c.verdict, Verdict::QuasiRegularCandidate);
    }

    #[test]
    fn too_few_checkpoints() {
        let f = IntervalHomeo::sqrt();
        assert!(matches!(classify_point(&f, &0.3, &[1, 2, 3], 20, 0.02), Err(Error::InsufficientEvidence(_))));
    }

    #[test]
    fn alternating_blocks_are_irregular() {
        // blocks 0^{4^i} 1^{4^i}... with checkpoint at ends of blocks
        let mut w = Vec::new();
        let mut ends = Vec::new();
        for i in 0..8 {
            let len = 4usize.pow(i);
            w.extend(std::iter::repeat((i % 2) as u16).take(len * 3));
            ends.push(w.len());
        }
        let x = SymbolicPoint::periodic(w, vec![0]).unwrap();
        let sh = Shift::full(2).unwrap();
        let c = classify_point(&sh, &x, &ends, 20, 0.02).unwrap();
        assert_eq!(c.verdict, Verdict::IrregularCandidate);
        assert!(c.limit_set.representatives.len() >= 2);
    }
}
