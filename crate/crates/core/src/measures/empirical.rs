use super::{MeasureDistance, Signature};
use crate::error::{Error, Result};
use crate::systems::{orbit_segment, DynamicalSystem};

/// Atomic probability measure with rational weights `count / total`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure<P> {
    atoms: Vec<(P, u64)>,
    total: u64,
}

impl<P: Clone + PartialEq> EmpiricalMeasure<P> {
    pub fn from_atoms(atoms: Vec<(P, u64)>) -> Result<Self> {
        let total: u64 = atoms.iter().map(|a| a.1).sum();
        if total == 0 || atoms.iter().any(|a| a.1 == 0) {
            return Err(Error::Precondition("atoms need positive counts".into()));
        }
        Ok(EmpiricalMeasure { atoms, total })
    }

    pub fn dirac(p: P) -> Self {
        EmpiricalMeasure { atoms: vec![(p, 1)], total: 1 }
    }

    pub fn atoms(&self) -> &[(P, u64)] {
        &self.atoms
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Weight of atom `i` as a reduced fraction.
    pub fn weight(&self, i: usize) -> (u64, u64) {
        let c = self.atoms[i].1;
        let g = gcd(c, self.total);
        (c / g, self.total / g)
    }

    /// Same measure with equal atoms combined.
    pub fn merged(&self) -> Self {
        let mut out: Vec<(P, u64)> = Vec::new();
        for (p, c) in &self.atoms {
            match out.iter_mut().find(|(q, _)| q == p) {
                Some(slot) => slot.1 += c,
                None => out.push((p.clone(), *c)),
            }
        }
        EmpiricalMeasure { atoms: out, total: self.total }
    }

    pub fn signature<S: DynamicalSystem<Point = P>>(&self, sys: &S, j: usize) -> Result<Signature> {
        let mut sums = vec![0.0; j];
        let mut one = vec![0.0; j];
        for (p, c) in &self.atoms {
            one.iter_mut().for_each(|v| *v = 0.0);
            sys.accumulate_tests(p, &mut one)?;
            for (s, v) in sums.iter_mut().zip(&one) {
                *s += *c as f64 * v;
            }
        }
        Ok(finish(sys, sums, self.total as f64))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn finish<S: DynamicalSystem>(sys: &S, sums: Vec<f64>, n: f64) -> Signature {
    let norms = (1..=sums.len()).map(|j| sys.test_norm(j)).collect();
    Signature::new(sums.into_iter().map(|s| s / n).collect(), norms)
}

/// `E_n(x)`: `n` atoms of weight `1/n` on the first `n` orbit points.
pub fn empirical_measure<S: DynamicalSystem>(sys: &S, x: &S::Point, n: usize) -> Result<EmpiricalMeasure<S::Point>> {
    let orbit = orbit_segment(sys, x, n)?;
    Ok(EmpiricalMeasure { atoms: orbit.into_iter().map(|p| (p, 1)).collect(), total: n as u64 })
}

pub fn dirac_signature<S: DynamicalSystem>(sys: &S, x: &S::Point, j: usize) -> Result<Signature> {
    let mut sums = vec![0.0; j];
    sys.accumulate_tests(x, &mut sums)?;
    Ok(finish(sys, sums, 1.0))
}

pub fn weak_star_distance<S: DynamicalSystem>(
    sys: &S,
    xi: &EmpiricalMeasure<S::Point>,
    tau: &EmpiricalMeasure<S::Point>,
    j: usize,
) -> Result<MeasureDistance> {
    if j == 0 {
        return Err(Error::Precondition("truncation must be at least 1".into()));
    }
    xi.signature(sys, j)?.rho(&tau.signature(sys, j)?)
}

/// `(1/n) Σ_{i<n} φ(f^i x)`.
pub fn birkhoff_average<S: DynamicalSystem>(
    sys: &S,
    phi: impl Fn(&S::Point) -> Result<f64>,
    x: &S::Point,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    let mut cur = x.clone();
    let mut sum = 0.0;
    for i in 0..n {
        sum += phi(&cur)?;
        if i + 1 < n {
            cur = sys.step(&cur)?;
        }
    }
    Ok(sum / n as f64)
}

/// Signatures of `E_n(x)` at each checkpoint `n`, computed in one pass along the orbit.
///
/// Once the orbit reaches a fixed point the remaining mass is added in one step.
pub fn orbit_signatures<S: DynamicalSystem>(
    sys: &S,
    x: &S::Point,
    checkpoints: &[usize],
    j: usize,
) -> Result<Vec<Signature>> {
    if checkpoints.first().is_some_and(|&c| c == 0) || checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("checkpoints must be positive and strictly increasing".into()));
    }
    if !sys.contains(x) {
        return Err(Error::InvalidPoint(format!("{x:?}")));
    }
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut sums = vec![0.0; j];
    let mut one = vec![0.0; j];
    let mut cur = x.clone();
    let mut done = 0usize;
    let mut fixed = false;
    for &c in checkpoints {
        while done < c {
            if fixed {
                one.iter_mut().for_each(|v| *v = 0.0);
                sys.accumulate_tests(&cur, &mut one)?;
                let k = (c - done) as f64;
                for (s, v) in sums.iter_mut().zip(&one) {
                    *s += k * v;
                }
                done = c;
                break;
            }
            one.iter_mut().for_each(|v| *v = 0.0);
            sys.accumulate_tests(&cur, &mut one)?;
            for (s, v) in sums.iter_mut().zip(&one) {
                *s += v;
            }
            done += 1;
            let next = sys.step(&cur)?;
            fixed = sys.is_fixed_point(&next);
            cur = next;
        }
        out.push(finish(sys, sums.clone(), c as f64));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{IntervalHomeo, Shift, SymbolicPoint};

    fn p(s: &str) -> SymbolicPoint {
        s.parse().unwrap()
    }

    #[test]
    fn orbit_atoms_merge() {
        let sh = Shift::full(2).unwrap();
        let e = empirical_measure(&sh, &p("|011"), 6).unwrap().merged();
        assert_eq!(e.atoms().len(), 3);
        for i in 0..3 {
            assert_eq!(e.weight(i), (1, 3));
        }
        let z = empirical_measure(&sh, &p("|0"), 7).unwrap().merged();
        assert_eq!(z.atoms().len(), 1);
        assert_eq!(z.weight(0), (1, 1));
    }

    #[test]
    fn birkhoff_of_blocks() {
        let sh = Shift::full(2).unwrap();
        let x = p("|0000011111");
        let phi = |y: &SymbolicPoint| Ok(y.symbol(0)? as f64);
        assert_eq!(birkhoff_average(&sh, phi, &x, 5).unwrap(), 0.0);
        assert_eq!(birkhoff_average(&sh, phi, &x, 10).unwrap(), 0.5);
        assert_eq!(birkhoff_average(&sh, phi, &p("|01"), 10).unwrap(), 0.5);
    }

    #[test]
    fn streaming_agrees_with_direct() {
        let sh = Shift::full(2).unwrap();
        let x = p("0110100|01");
        let cps = [1, 2, 5, 17, 40];
        let sigs = orbit_signatures(&sh, &x, &cps, 12).unwrap();
        for (c, s) in cps.iter().zip(&sigs) {
            let direct = empirical_measure(&sh, &x, *c).unwrap().signature(&sh, 12).unwrap();
            assert!(s.rho(&direct).unwrap().value < 1e-14);
        }
        let f = IntervalHomeo::sqrt();
        let sigs = orbit_signatures(&f, &0.3, &[10, 1000, 100_000], 8).unwrap();
        let direct = empirical_measure(&f, &0.3, 1000).unwrap().signature(&f, 8).unwrap();
        assert!(sigs[1].rho(&direct).unwrap().value < 1e-12);
        let one = dirac_signature(&f, &1.0, 8).unwrap();
        assert!(sigs[2].rho(&one).unwrap().value < 0.01);
    }

    #[test]
    fn distance_of_fixed_point_diracs() {
        let sh = Shift::full(2).unwrap();
        let a = EmpiricalMeasure::dirac(p("|0"));
        let b = EmpiricalMeasure::dirac(p("|1"));
        let d20 = weak_star_distance(&sh, &a, &b, 20).unwrap();
        let d40 = weak_star_distance(&sh, &a, &b, 40).unwrap();
        // cylinders 0^l and 1^l are the only nonzero terms
        let mut oracle = 0.0;
        for l in 1..=5u32 {
            let first = (1u64 << l) - 1;
            let last = first + (1u64 << l) - 1;
            for j in [first, last] {
                if j <= 20 {
                    oracle += (-(j as f64)).exp2();
                }
            }
        }
        assert!((d20.value - oracle).abs() < 1e-15);
        assert!(d40.value >= d20.value && d40.value <= d20.upper());
        assert_eq!(weak_star_distance(&sh, &a, &a, 20).unwrap().value, 0.0);
    }
}
