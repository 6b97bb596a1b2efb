//! Test-function families `{φ_j}` (1-based) used by the weak* metric.
//!
//! Symbolic systems use cylinder indicators ordered by length, then
//! lexicographically. The interval uses the constant followed by dyadic hats
//! coarse-to-fine. The torus uses products of periodic dyadic hats paired by
//! the Cantor enumeration. Every family has sup-norm 1 and is dense.

use crate::error::Result;
use crate::systems::{Symbol, SymbolicPoint};

/// `(length, lexicographic code)` of the `j`-th cylinder over `k` letters.
pub fn cylinder_position(k: usize, j: usize) -> (usize, usize) {
    assert!(j >= 1, "test functions are 1-based");
    let mut rest = j - 1;
    let mut len = 1;
    let mut block = k;
    while rest >= block {
        rest -= block;
        len += 1;
        block = block.saturating_mul(k);
    }
    (len, rest)
}

/// The word defining the `j`-th cylinder.
pub fn cylinder_word(k: usize, j: usize) -> Vec<Symbol> {
    let (len, mut code) = cylinder_position(k, j);
    let mut w = vec![0; len];
    for slot in w.iter_mut().rev() {
        *slot = (code % k) as Symbol;
        code /= k;
    }
    w
}

pub(crate) fn accumulate_cylinders(k: usize, x: &SymbolicPoint, out: &mut [f64]) -> Result<()> {
    if out.is_empty() {
        return Ok(());
    }
    let (lmax, _) = cylinder_position(k, out.len());
    let mut offset = 0usize;
    let mut block = 1usize;
    let mut code = 0usize;
    for i in 0..lmax {
        let s = x.symbol(i)? as usize;
        code = code * k + s;
        block *= k;
        let j0 = offset + code;
        if j0 < out.len() {
            out[j0] += 1.0;
        }
        offset += block;
    }
    Ok(())
}

/// Center and half-width of the `j`-th interval test function, `None` for the constant.
pub fn hat_params(j: usize) -> Option<(f64, f64)> {
    assert!(j >= 1, "test functions are 1-based");
    match j {
        1 => None,
        2 => Some((0.0, 1.0)),
        3 => Some((1.0, 1.0)),
        _ => {
            let h = j - 2;
            let level = (usize::BITS - (h - 1).leading_zeros()) as i32;
            let r = h - 1 - (1usize << (level - 1));
            let w = (-level as f64).exp2();
            Some(((2 * r + 1) as f64 * w, w))
        }
    }
}

pub fn hat_value(j: usize, x: f64) -> f64 {
    match hat_params(j) {
        None => 1.0,
        Some((c, w)) => (1.0 - (x - c).abs() / w).max(0.0),
    }
}

pub(crate) fn accumulate_hats(x: f64, out: &mut [f64]) {
    for (i, slot) in out.iter_mut().enumerate() {
        *slot += hat_value(i + 1, x);
    }
}

/// Center and half-width of the `i`-th periodic hat (`i ≥ 1`).
fn circle_hat(i: usize) -> (f64, f64) {
    match i {
        1 => (0.0, 0.5),
        2 => (0.5, 0.5),
        _ => {
            let level = (usize::BITS - (i - 1).leading_zeros()) as i32;
            let r = i - 1 - (1usize << (level - 1));
            let w = (-level as f64).exp2();
            ((2 * r + 1) as f64 * w, w)
        }
    }
}

/// `u_0 = 1`, `u_i = (1 + hat_i)/2` on the circle.
pub fn circle_value(i: usize, x: f64) -> f64 {
    if i == 0 {
        return 1.0;
    }
    let (c, w) = circle_hat(i);
    let d = (x - c).rem_euclid(1.0);
    let d = d.min(1.0 - d);
    0.5 * (1.0 + (1.0 - d / w).max(0.0))
}

/// Lipschitz constant of `u_i`.
pub fn circle_lipschitz(i: usize) -> f64 {
    if i == 0 {
        0.0
    } else {
        0.5 / circle_hat(i).1
    }
}

/// Factor indices `(a, b)` of the `j`-th torus test function `u_a(x) u_b(y)`.
pub fn torus_factors(j: usize) -> (usize, usize) {
    assert!(j >= 1, "test functions are 1-based");
    let z = j - 1;
    let mut w = (((8 * z + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    while (w + 1) * (w + 2) / 2 <= z {
        w += 1;
    }
    while w * (w + 1) / 2 > z {
        w -= 1;
    }
    let b = z - w * (w + 1) / 2;
    (w - b, b)
}

pub(crate) fn accumulate_torus(p: [f64; 2], out: &mut [f64]) {
    for (i, slot) in out.iter_mut().enumerate() {
        let (a, b) = torus_factors(i + 1);
        *slot += circle_value(a, p[0]) * circle_value(b, p[1]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cylinder_enumeration_order() {
        let words: Vec<Vec<Symbol>> = (1..=8).map(|j| cylinder_word(2, j)).collect();
        assert_eq!(
            words,
            vec![vec![0], vec![1], vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1], vec![0, 0, 0], vec![0, 0, 1]]
        );
        assert_eq!(cylinder_position(3, 4), (2, 0));
        assert_eq!(cylinder_position(3, 12), (2, 8));
        assert_eq!(cylinder_position(3, 13), (3, 0));
    }

    #[test]
    fn cylinder_accumulation_matches_definition() {
        let x: SymbolicPoint = "10|110".parse().unwrap();
        let mut out = vec![0.0; 30];
        accumulate_cylinders(2, &x, &mut out).unwrap();
        let prefix = x.prefix(8).unwrap();
        for (j, v) in out.iter().enumerate() {
            let w = cylinder_word(2, j + 1);
            let hit = prefix.starts_with(&w) as u8 as f64;
            assert_eq!(*v, hit, "j={}", j + 1);
        }
    }

    #[test]
    fn hats_enumerate_dyadics() {
        assert_eq!(hat_params(4), Some((0.5, 0.5)));
        assert_eq!(hat_params(5), Some((0.25, 0.25)));
        assert_eq!(hat_params(6), Some((0.75, 0.25)));
        assert_eq!(hat_params(7), Some((0.125, 0.125)));
        assert_eq!(hat_params(10), Some((0.875, 0.125)));
        assert_eq!(hat_params(11), Some((0.0625, 0.0625)));
    }

    #[test]
    fn torus_pairs_cover_the_grid() {
        assert_eq!(torus_factors(1), (0, 0));
        let mut seen = std::collections::HashSet::new();
        for j in 1..=55 {
            assert!(seen.insert(torus_factors(j)));
        }
        for a in 0..10 {
            for b in 0..(10 - a) {
                assert!(seen.contains(&(a, b)));
            }
        }
    }

    #[test]
    fn weighted_lipschitz_budget_below_one() {
        // Σ 2^{-j} Lip(φ_j) ≤ 1 makes the weak* distance of Diracs a 1-Lipschitz function of the points
        let interval: f64 = (1..=60).map(|j| hat_params(j).map_or(0.0, |(_, w)| (-(j as f64)).exp2() / w)).sum();
        assert!(interval < 0.83, "{interval}");
        let torus: f64 = (1..=200)
            .map(|j| {
                let (a, b) = torus_factors(j);
                (-(j as f64)).exp2() * circle_lipschitz(a).hypot(circle_lipschitz(b))
            })
            .sum();
        assert!(torus < 0.6, "{torus}");
        let symbolic_tail = |i: i32| (-((1i64 << (i + 1)) as f64 - 2.0)).exp2();
        for i in 0..8 {
            assert!(symbolic_tail(i) <= (-(i as f64)).exp2());
        }
    }
}
