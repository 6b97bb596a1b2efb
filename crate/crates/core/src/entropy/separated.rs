use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dn_distance;
use crate::error::{Error, Result};
use crate::systems::{DynamicalSystem, Symbol};

/// Largest pool solved exactly by branch and bound on non-ultrametric systems.
pub const EXACT_POOL_LIMIT: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Maximal set in pool order, a lower bound on `s_n`.
    Greedy,
    /// Maximum set within the pool.
    Exhaustive,
}

/// Pool points whose pairwise `d_n` distances all exceed `ε`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparatedSet {
    /// Indices into the candidate pool.
    pub indices: Vec<usize>,
    pub n: usize,
    pub eps: f64,
    pub mode: SearchMode,
    /// Smallest pairwise `d_n` among the chosen points (`None` for a single point).
    pub min_separation: Option<f64>,
}

fn check_pool<P>(pool: &[P], n: usize, eps: f64) -> Result<()> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    if n == 0 || !(eps > 0.0) {
        return Err(Error::Precondition(format!("need n ≥ 1 and ε > 0, got n={n}, ε={eps}")));
    }
    Ok(())
}

/// Groups pool indices by closed `(n, ε)` class when the system is ultrametric.
fn ultrametric_classes<S: DynamicalSystem>(
    sys: &S,
    pool: &[S::Point],
    n: usize,
    eps: f64,
) -> Option<Result<Vec<Vec<usize>>>> {
    let mut keys: Vec<Vec<Symbol>> = Vec::with_capacity(pool.len());
    for p in pool {
        match sys.bowen_class(p, n, eps)? {
            Ok(k) => keys.push(k),
            Err(e) => return Some(Err(e)),
        }
    }
    let mut order: HashMap<Vec<Symbol>, usize> = HashMap::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (i, k) in keys.into_iter().enumerate() {
        let next = classes.len();
        let c = *order.entry(k).or_insert(next);
        if c == classes.len() {
            classes.push(Vec::new());
        }
        classes[c].push(i);
    }
    Some(Ok(classes))
}

fn distance_matrix<S: DynamicalSystem>(sys: &S, pool: &[S::Point], n: usize) -> Result<Vec<Vec<f64>>> {
    (0..pool.len())
        .into_par_iter()
        .map(|i| {
            (0..pool.len()).map(|j| if i == j { Ok(0.0) } else { dn_distance(sys, &pool[i], &pool[j], n) }).collect()
        })
        .collect()
}

fn min_pairwise<S: DynamicalSystem>(sys: &S, pool: &[S::Point], idx: &[usize], n: usize) -> Result<Option<f64>> {
    let mut best: Option<f64> = None;
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            let d = dn_distance(sys, &pool[i], &pool[j], n)?;
            best = Some(best.map_or(d, |b: f64| b.min(d)));
        }
    }
    Ok(best)
}

/// Smallest pairwise `d_n` on ultrametric systems with dyadic distances:
/// the first radius `2^{-i} > ε` at which two chosen points share a class.
fn dyadic_min_separation<S: DynamicalSystem>(
    sys: &S,
    pool: &[S::Point],
    idx: &[usize],
    n: usize,
    eps: f64,
) -> Option<Result<Option<f64>>> {
    if idx.len() < 2 {
        return Some(Ok(None));
    }
    let mut r = 1.0f64;
    while r / 2.0 > eps {
        r /= 2.0;
    }
    loop {
        let mut seen = std::collections::HashSet::new();
        for &i in idx {
            match sys.bowen_class(&pool[i], n, r)? {
                Ok(k) => {
                    if !seen.insert(k) {
                        return Some(Ok(Some(r)));
                    }
                }
                Err(e) => return Some(Err(e)),
            }
        }
        if r >= sys.diameter() {
            return Some(Err(Error::InternalError("distinct classes at the diameter".into())));
        }
        r *= 2.0;
    }
}

fn max_independent(adj: &[u64], mut cand: u64, chosen: u64, best: &mut u64) {
    if cand == 0 {
        if chosen.count_ones() > best.count_ones() {
            *best = chosen;
        }
        return;
    }
    if chosen.count_ones() + cand.count_ones() <= best.count_ones() {
        return;
    }
    let mut pick = cand.trailing_zeros() as usize;
    let mut deg = 0;
    let mut rest = cand;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let d = (adj[v] & cand).count_ones();
        if d > deg {
            deg = d;
            pick = v;
        }
    }
    if deg == 0 {
        let all = chosen | cand;
        if all.count_ones() > best.count_ones() {
            *best = all;
        }
        return;
    }
    let bit = 1u64 << pick;
    max_independent(adj, cand & !bit & !adj[pick], chosen | bit, best);
    cand &= !bit;
    max_independent(adj, cand, chosen, best);
}

fn min_dominating(cover: &[u64], uncovered: u64, chosen: Vec<usize>, best: &mut Option<Vec<usize>>) {
    if uncovered == 0 {
        if best.as_ref().map_or(true, |b| chosen.len() < b.len()) {
            *best = Some(chosen);
        }
        return;
    }
    let widest = cover.iter().map(|c| (c & uncovered).count_ones()).max().unwrap_or(0);
    if widest == 0 {
        return;
    }
    let lower = chosen.len() + (uncovered.count_ones() as usize).div_ceil(widest as usize);
    if best.as_ref().is_some_and(|b| lower >= b.len()) {
        return;
    }
    // branch on the uncovered point with the fewest covering centers
    let mut target = uncovered.trailing_zeros() as usize;
    let mut fewest = usize::MAX;
    let mut rest = uncovered;
    while rest != 0 {
        let u = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let c = cover.iter().filter(|c| *c & (1 << u) != 0).count();
        if c < fewest {
            fewest = c;
            target = u;
        }
    }
    let mut options: Vec<usize> = (0..cover.len()).filter(|&v| cover[v] & (1 << target) != 0).collect();
    options.sort_by_key(|&v| std::cmp::Reverse((cover[v] & uncovered).count_ones()));
    for v in options {
        let mut next = chosen.clone();
        next.push(v);
        min_dominating(cover, uncovered & !cover[v], next, best);
    }
}

fn adjacency(matrix: &[Vec<f64>], close: impl Fn(f64) -> bool) -> Vec<u64> {
    matrix
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter().enumerate().filter(|&(j, &d)| j != i && close(d)).fold(0u64, |m, (j, _)| m | (1 << j))
        })
        .collect()
}

/// `(n, ε)`-separated subset of `pool`: pairwise `d_n > ε`.
pub fn separated_set<S: DynamicalSystem>(
    sys: &S,
    pool: &[S::Point],
    n: usize,
    eps: f64,
    mode: SearchMode,
) -> Result<SeparatedSet> {
    check_pool(pool, n, eps)?;
    let indices = if let Some(classes) = ultrametric_classes(sys, pool, n, eps) {
        classes?.into_iter().map(|c| c[0]).collect()
    } else {
        match mode {
            SearchMode::Greedy => {
                let mut chosen: Vec<usize> = Vec::new();
                for i in 0..pool.len() {
                    let mut ok = true;
                    for &c in &chosen {
                        if dn_distance(sys, &pool[i], &pool[c], n)? <= eps {
                            ok = false;
                            break;
                        }
                    }
                    if ok {
                        chosen.push(i);
                    }
                }
                chosen
            }
            SearchMode::Exhaustive => {
                if pool.len() > EXACT_POOL_LIMIT {
                    return Err(Error::PoolTooLarge { size: pool.len(), limit: EXACT_POOL_LIMIT });
                }
                let m = distance_matrix(sys, pool, n)?;
                let adj = adjacency(&m, |d| d <= eps);
                let all = if pool.len() == 64 { u64::MAX } else { (1u64 << pool.len()) - 1 };
                let mut best = 0u64;
                max_independent(&adj, all, 0, &mut best);
                (0..pool.len()).filter(|&i| best & (1 << i) != 0).collect()
            }
        }
    };
    let min_separation = match dyadic_min_separation(sys, pool, &indices, n, eps) {
        Some(v) => v?,
        None => min_pairwise(sys, pool, &indices, n)?,
    };
    Ok(SeparatedSet { indices, n, eps, mode, min_separation })
}

/// Indices of centers whose closed balls `{d_n ≤ ε}` cover `sample`.
///
/// Greedy covers give an upper bound on `r_n`; exhaustive covers are
/// minimum among centers drawn from the sample.
pub fn spanning_set<S: DynamicalSystem>(
    sys: &S,
    sample: &[S::Point],
    n: usize,
    eps: f64,
    mode: SearchMode,
) -> Result<Vec<usize>> {
    check_pool(sample, n, eps)?;
    if let Some(classes) = ultrametric_classes(sys, sample, n, eps) {
        return Ok(classes?.into_iter().map(|c| c[0]).collect());
    }
    if mode == SearchMode::Exhaustive && sample.len() > EXACT_POOL_LIMIT {
        return Err(Error::PoolTooLarge { size: sample.len(), limit: EXACT_POOL_LIMIT });
    }
    let m = distance_matrix(sys, sample, n)?;
    match mode {
        SearchMode::Greedy => {
            let mut covered = vec![false; sample.len()];
            let mut left = sample.len();
            let mut centers = Vec::new();
            while left > 0 {
                let (best, _) = (0..sample.len())
                    .map(|c| (c, (0..sample.len()).filter(|&y| !covered[y] && m[c][y] <= eps).count()))
                    .fold((0, 0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
                for y in 0..sample.len() {
                    if !covered[y] && m[best][y] <= eps {
                        covered[y] = true;
                        left -= 1;
                    }
                }
                centers.push(best);
            }
            Ok(centers)
        }
        SearchMode::Exhaustive => {
            let cover: Vec<u64> =
                adjacency(&m, |d| d <= eps).into_iter().enumerate().map(|(i, a)| a | (1 << i)).collect();
            let all = if sample.len() == 64 { u64::MAX } else { (1u64 << sample.len()) - 1 };
            let mut best = None;
            min_dominating(&cover, all, Vec::new(), &mut best);
            let mut b = best.ok_or_else(|| Error::InternalError("no cover found".into()))?;
            b.sort_unstable();
            Ok(b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{IntervalHomeo, SftSpec, Shift, SymbolicPoint};

    fn words_with_zero_tail(sh: &Shift, n: usize) -> Vec<SymbolicPoint> {
        let k = sh.alphabet();
        (0..k.pow(n as u32))
            .filter_map(|mut c| {
                let mut w = vec![0 as Symbol; n];
                for slot in w.iter_mut().rev() {
                    *slot = (c % k) as Symbol;
                    c /= k;
                }
                let x = SymbolicPoint::periodic(w, vec![0]).ok()?;
                sh.contains(&x).then_some(x)
            })
            .collect()
    }

    #[test]
    fn all_words_are_separated() {
        let sh = Shift::full(2).unwrap();
        for n in 1..=8 {
            let pool = words_with_zero_tail(&sh, n);
            let s = separated_set(&sh, &pool, n, 0.5, SearchMode::Greedy).unwrap();
            assert_eq!(s.indices.len(), 1 << n);
            let direct = min_pairwise(&sh, &pool, &s.indices, n).unwrap();
            assert_eq!(s.min_separation, direct);
            // brute force over all pairs
            for i in 0..pool.len() {
                for j in (i + 1)..pool.len() {
                    assert!(dn_distance(&sh, &pool[i], &pool[j], n).unwrap() > 0.5);
                }
            }
        }
        let gm = Shift::sft(&SftSpec::golden_mean()).unwrap();
        let pool = words_with_zero_tail(&gm, 4);
        assert_eq!(separated_set(&gm, &pool, 4, 0.5, SearchMode::Exhaustive).unwrap().indices.len(), 8);
    }

    #[test]
    fn large_radius_leaves_one() {
        let f = IntervalHomeo::sqrt();
        let pool: Vec<f64> = (0..10).map(|i| i as f64 / 9.0).collect();
        let s = separated_set(&f, &pool, 1, 2.0, SearchMode::Exhaustive).unwrap();
        assert_eq!(s.indices.len(), 1);
        assert!(matches!(separated_set(&f, &[] as &[f64], 1, 0.1, SearchMode::Greedy), Err(Error::EmptyPool)));
    }

    #[test]
    fn spanning_on_words() {
        let sh = Shift::full(2).unwrap();
        let pool = words_with_zero_tail(&sh, 3);
        assert_eq!(spanning_set(&sh, &pool, 3, 1.0, SearchMode::Greedy).unwrap().len(), 1);
        assert_eq!(spanning_set(&sh, &pool, 3, 0.5, SearchMode::Greedy).unwrap().len(), 8);
        assert_eq!(spanning_set(&sh, &pool[..1], 3, 0.1, SearchMode::Greedy).unwrap().len(), 1);
    }

    #[test]
    fn exact_beats_or_matches_greedy() {
        let f = IntervalHomeo::sqrt();
        let pool: Vec<f64> = (0..30).map(|i| ((i * 7919) % 101) as f64 / 100.0).collect();
        for eps in [0.05, 0.1, 0.2] {
            let g = separated_set(&f, &pool, 3, eps, SearchMode::Greedy).unwrap();
            let e = separated_set(&f, &pool, 3, eps, SearchMode::Exhaustive).unwrap();
            assert!(e.indices.len() >= g.indices.len());
            let gs = spanning_set(&f, &pool, 3, eps, SearchMode::Greedy).unwrap();
            let es = spanning_set(&f, &pool, 3, eps, SearchMode::Exhaustive).unwrap();
            assert!(es.len() <= gs.len());
        }
    }
}
