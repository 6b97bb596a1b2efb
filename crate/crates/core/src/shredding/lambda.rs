use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::cells::{to_f64, Rect};
use crate::entropy::{geometric_tail_closed, geometric_tail_direct};
use crate::error::{Error, Result};

/// Truncation `⋂_{n≤N} ⋃_{n≤m≤N} V_m` on the common refinement of all
/// rectangle edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaApprox {
    pub n_max: usize,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Member cells of the refinement, row-major, as `(start, length)` runs.
    pub runs: Vec<(usize, usize)>,
    pub coverage: f64,
    pub coverage_exact: String,
    /// Coverage of each `V_m`.
    pub member_coverage: Vec<f64>,
}

fn breakpoints(sets: &[Vec<Rect>], pick: impl Fn(&Rect) -> [&BigRational; 2]) -> Vec<BigRational> {
    let mut v: Vec<BigRational> = sets.iter().flatten().flat_map(|r| pick(r).map(Clone::clone)).collect();
    v.push(BigRational::zero());
    v.push(BigRational::from_integer(1.into()));
    v.sort();
    v.dedup();
    v
}

fn mask(set: &[Rect], xs: &[BigRational], ys: &[BigRational]) -> Vec<bool> {
    let w = xs.len() - 1;
    let mut m = vec![false; w * (ys.len() - 1)];
    let at = |v: &[BigRational], q: &BigRational| v.binary_search(q).expect("breakpoint");
    for r in set {
        let (a, b) = (at(xs, &r.x0), at(xs, &r.x1));
        let (c, d) = (at(ys, &r.y0), at(ys, &r.y1));
        for row in c..d {
            m[row * w + a..row * w + b].iter_mut().for_each(|v| *v = true);
        }
    }
    m
}

fn area(m: &[bool], xs: &[BigRational], ys: &[BigRational]) -> BigRational {
    let w = xs.len() - 1;
    let mut total = BigRational::zero();
    for row in 0..ys.len() - 1 {
        let mut width = BigRational::zero();
        for col in 0..w {
            if m[row * w + col] {
                width += &xs[col + 1] - &xs[col];
            }
        }
        total += width * (&ys[row + 1] - &ys[row]);
    }
    total
}

/// `sets[m-1]` is `V_m` as a union of open rectangles inside `[0,1]²`.
pub fn lambda_truncation(sets: &[Vec<Rect>]) -> Result<LambdaApprox> {
    if sets.is_empty() {
        return Err(Error::Precondition("need at least one set".into()));
    }
    let (zero, one) = (BigRational::zero(), BigRational::from_integer(1.into()));
    for r in sets.iter().flatten() {
        if !(zero <= r.x0 && r.x0 < r.x1 && r.x1 <= one && zero <= r.y0 && r.y0 < r.y1 && r.y1 <= one) {
            return Err(Error::Precondition("rectangles must be nondegenerate and inside the unit square".into()));
        }
    }
    let xs = breakpoints(sets, |r| [&r.x0, &r.x1]);
    let ys = breakpoints(sets, |r| [&r.y0, &r.y1]);
    let masks: Vec<Vec<bool>> = sets.iter().map(|s| mask(s, &xs, &ys)).collect();
    let cells = masks[0].len();
    let n_max = sets.len();
    let mut lambda = vec![true; cells];
    for n in 0..n_max {
        for (c, slot) in lambda.iter_mut().enumerate() {
            *slot = *slot && masks[n..].iter().any(|m| m[c]);
        }
    }
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (c, &inside) in lambda.iter().enumerate() {
        if inside {
            match runs.last_mut() {
                Some((s, l)) if *s + *l == c => *l += 1,
                _ => runs.push((c, 1)),
            }
        }
    }
    let cov = area(&lambda, &xs, &ys);
    Ok(LambdaApprox {
        n_max,
        xs: xs.iter().map(to_f64).collect(),
        ys: ys.iter().map(to_f64).collect(),
        runs,
        coverage: to_f64(&cov),
        coverage_exact: cov.to_string(),
        member_coverage: masks.iter().map(|m| to_f64(&area(m, &xs, &ys))).collect(),
    })
}

/// Grid size and a dyadic `δ` whose cores have diameter below `ε` and
/// cover more than `1 − ε`.
pub fn shredding_params_for(epsilon: f64) -> Result<(usize, f64)> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Precondition(format!("ε = {epsilon} must lie in (0,1]")));
    }
    let g = ((std::f64::consts::SQRT_2 / epsilon).floor() as usize + 1).max(2);
    let cap = (1.0 - (1.0 - epsilon).sqrt()) / (2.0 * g as f64);
    let mut delta = 0.5f64;
    while delta >= cap {
        delta *= 0.5;
    }
    Ok((g, delta))
}

/// Sizes `|I(n)|` of the index sets, `n ≥ 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndexSizes {
    Identity,
    /// `a n + b`.
    Affine {
        a: u64,
        b: u64,
    },
    Explicit {
        values: Vec<u64>,
    },
}

impl IndexSizes {
    pub fn get(&self, n: u64) -> Option<u64> {
        match self {
            IndexSizes::Identity => Some(n),
            IndexSizes::Affine { a, b } => a.checked_mul(n)?.checked_add(*b),
            IndexSizes::Explicit { values } => values.get(usize::try_from(n).ok()?.checked_sub(1)?).copied(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            IndexSizes::Identity => Ok(()),
            IndexSizes::Affine { a, .. } if *a >= 1 => Ok(()),
            IndexSizes::Affine { a, b } => Err(Error::InvalidSequence(format!("{a}n + {b} is not increasing"))),
            IndexSizes::Explicit { values } => {
                if values.is_empty() {
                    return Err(Error::InvalidSequence("empty sequence".into()));
                }
                if let Some(i) = values.windows(2).position(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidSequence(format!("|I({})| ≥ |I({})|", i + 1, i + 2)));
                }
                if let Some(i) = values.iter().enumerate().position(|(i, &v)| v < i as u64 + 1) {
                    return Err(Error::InvalidSequence(format!("|I({})| = {} is below {}", i + 1, values[i], i + 1)));
                }
                Ok(())
            }
        }
    }
}

/// Cover-sum bounds for `Λ` at one `(t, n, k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroEntropyBound {
    pub t: f64,
    pub n: u64,
    pub k: u64,
    /// `|I(n+k)|`.
    pub size: u64,
    /// `S e^{−tS}/(1−e^{−t}) + e^{−t(S+1)}/(1−e^{−t})²` with `S = |I(n+k)|`.
    pub closed: f64,
    /// `Σ_{s≥S} s e^{−ts}` summed directly.
    pub direct: f64,
    /// `Σ_{m≥k} |I(m)| e^{−t|I(n+m)|}`, with the closed-form tail past an explicit sequence's end.
    pub cover_sum: f64,
}

pub fn lambda_entropy_bound(sizes: &IndexSizes, t: f64, n: u64, k: u64) -> Result<ZeroEntropyBound> {
    sizes.validate()?;
    if n == 0 || k == 0 {
        return Err(Error::Precondition("n and k must be at least 1".into()));
    }
    let size = sizes.get(n + k).ok_or_else(|| Error::InvalidSequence(format!("|I({})| is not available", n + k)))?;
    let closed = geometric_tail_closed(t, size)?;
    let direct = geometric_tail_direct(t, size, 1_000_000)?;
    let mut cover_sum = 0.0;
    let mut m = k;
    loop {
        let (Some(a), Some(b)) = (sizes.get(m), sizes.get(n + m)) else {
            let last = sizes.get(n + m - 1).expect("previous term exists");
            cover_sum += geometric_tail_closed(t, last + 1)?;
            break;
        };
        let term = a as f64 * (-t * b as f64).exp();
        cover_sum += term;
        if term <= 1e-18 * cover_sum || m - k > 10_000_000 {
            break;
        }
        m += 1;
    }
    Ok(ZeroEntropyBound { t, n, k, size, closed, direct, cover_sum })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shredding::decompose_grid;
    use num_bigint::BigInt;

    fn rect(x0: (i64, i64), x1: (i64, i64), y0: (i64, i64), y1: (i64, i64)) -> Rect {
        let q = |(a, b): (i64, i64)| BigRational::new(BigInt::from(a), BigInt::from(b));
        Rect { x0: q(x0), x1: q(x1), y0: q(y0), y1: q(y1) }
    }

    #[test]
    fn single_set_is_itself() {
        let v = decompose_grid(4, 1.0 / 32.0).unwrap().core_rects().unwrap();
        let l = lambda_truncation(&[v]).unwrap();
        assert_eq!(l.coverage_exact, "9/16");
        assert_eq!(l.runs.iter().map(|r| r.1).sum::<usize>(), 16);
    }

    #[test]
    fn nested_sets_reduce_to_last() {
        let v1 = vec![rect((0, 1), (1, 1), (0, 1), (1, 2))];
        let v2 = vec![rect((0, 1), (1, 4), (0, 1), (1, 4)), rect((1, 2), (3, 4), (1, 4), (1, 2))];
        let l = lambda_truncation(&[v1, v2]).unwrap();
        assert_eq!(l.coverage_exact, "1/8");
        assert_eq!(l.member_coverage, vec![0.5, 0.125]);
    }

    #[test]
    fn disjoint_sets_keep_only_the_last() {
        let v1 = vec![rect((0, 1), (1, 2), (0, 1), (1, 1))];
        let v2 = vec![rect((1, 2), (1, 1), (0, 1), (1, 1))];
        // n=1: V1 ∪ V2 covers all; n=2: V2
        assert_eq!(lambda_truncation(&[v1, v2]).unwrap().coverage_exact, "1/2");
    }

    #[test]
    fn params_meet_both_bounds() {
        for m in 1..=12 {
            let eps = 1.0 / m as f64;
            let (g, d) = shredding_params_for(eps).unwrap();
            let c = decompose_grid(g, d).unwrap();
            assert!(c.coverage > 1.0 - eps && c.core_diameter() < eps, "m={m}");
        }
    }

    #[test]
    fn tail_bound_values() {
        let b = lambda_entropy_bound(&IndexSizes::Identity, 0.1, 50, 50).unwrap();
        assert!((b.closed - 0.052244).abs() < 1e-5, "{}", b.closed);
        assert!((b.closed - b.direct).abs() < 1e-9);
        assert!(b.cover_sum <= b.closed);
        let b = lambda_entropy_bound(&IndexSizes::Identity, 0.01, 5000, 5000).unwrap();
        assert!(b.closed < 1e-37 && b.closed > 1e-38, "{}", b.closed);
        let e = lambda_entropy_bound(&IndexSizes::Explicit { values: vec![1, 2, 2] }, 0.1, 1, 1);
        assert!(matches!(e, Err(Error::InvalidSequence(_))));
        let e = lambda_entropy_bound(&IndexSizes::Explicit { values: vec![1, 3, 5, 7, 9] }, 0.5, 2, 2).unwrap();
        assert!(e.cover_sum <= e.closed + geometric_tail_closed(0.5, 1).unwrap());
    }
}
