use std::collections::{HashMap, HashSet, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::symbolic::{Symbol, SymbolicPoint, Tail};
use super::DynamicalSystem;
use crate::error::{Error, Result};
use crate::measures::family;

const MAX_STATES: usize = 1 << 20;
const EXACT_COUNT_LIMIT: usize = 60;

/// Alphabet size plus forbidden words, each written one base-36 character per symbol.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftSpec {
    pub k: usize,
    pub forbidden: Vec<String>,
}

impl SftSpec {
    pub fn new(k: usize, forbidden: &[&str]) -> Self {
        SftSpec { k, forbidden: forbidden.iter().map(|s| s.to_string()).collect() }
    }

    /// The golden-mean shift: binary sequences without `11`.
    pub fn golden_mean() -> Self {
        SftSpec::new(2, &["11"])
    }
}

#[derive(Clone, Debug)]
struct Graph {
    /// States are admissible words of this length.
    block: usize,
    states: Vec<Vec<Symbol>>,
    index: HashMap<Vec<Symbol>, usize>,
    succ: Vec<Vec<(Symbol, usize)>>,
}

/// Number of admissible words of one length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordCount {
    pub n: usize,
    /// Exact `|B_n|` while it fits.
    pub exact: Option<u128>,
    pub log_count: f64,
}

/// The full shift or a shift of finite type, with the metric `2^{-i}`.
#[derive(Clone, Debug)]
pub struct Shift {
    k: usize,
    forbidden: Vec<Vec<Symbol>>,
    graph: Option<Graph>,
}

fn contains_factor(word: &[Symbol], f: &[Symbol]) -> bool {
    f.len() <= word.len() && word.windows(f.len()).any(|w| w == f)
}

impl Shift {
    pub fn full(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidAlphabet(k));
        }
        if k > Symbol::MAX as usize {
            return Err(Error::InvalidAlphabet(k));
        }
        Ok(Shift { k, forbidden: Vec::new(), graph: None })
    }

    pub fn sft(spec: &SftSpec) -> Result<Self> {
        let base = Shift::full(spec.k)?;
        let mut forbidden = Vec::with_capacity(spec.forbidden.len());
        for w in &spec.forbidden {
            let word = w
                .chars()
                .map(|c| {
                    c.to_digit(36)
                        .filter(|&d| (d as usize) < spec.k)
                        .map(|d| d as Symbol)
                        .ok_or_else(|| Error::InvalidPoint(format!("forbidden word {w:?} leaves the alphabet")))
                })
                .collect::<Result<Vec<_>>>()?;
            if word.is_empty() {
                return Err(Error::Precondition("empty forbidden word".into()));
            }
            forbidden.push(word);
        }
        if forbidden.is_empty() {
            return Ok(base);
        }
        let w = forbidden.iter().map(Vec::len).max().unwrap_or(2).max(2);
        let block = w - 1;
        let total = (spec.k as u128).checked_pow(block as u32).unwrap_or(u128::MAX);
        if total > MAX_STATES as u128 {
            return Err(Error::Precondition(format!("higher-block recoding needs {total} states")));
        }
        let mut states = Vec::new();
        let mut word = vec![0 as Symbol; block];
        for code in 0..total as usize {
            let mut c = code;
            for slot in word.iter_mut().rev() {
                *slot = (c % spec.k) as Symbol;
                c /= spec.k;
            }
            if !forbidden.iter().any(|f| contains_factor(&word, f)) {
                states.push(word.clone());
            }
        }
        let index: HashMap<Vec<Symbol>, usize> = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let mut succ = vec![Vec::new(); states.len()];
        let mut ext = Vec::with_capacity(w);
        for (i, s) in states.iter().enumerate() {
            for a in 0..spec.k as Symbol {
                ext.clear();
                ext.extend_from_slice(s);
                ext.push(a);
                if forbidden.iter().any(|f| ext.ends_with(f)) {
                    continue;
                }
                if let Some(&j) = index.get(&ext[1..]) {
                    succ[i].push((a, j));
                }
            }
        }
        let mut alive = vec![true; states.len()];
        loop {
            let mut changed = false;
            for i in 0..states.len() {
                if alive[i] && !succ[i].iter().any(|&(_, j)| alive[j]) {
                    alive[i] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let remap: Vec<Option<usize>> = {
            let mut next = 0;
            alive
                .iter()
                .map(|&a| {
                    a.then(|| {
                        next += 1;
                        next - 1
                    })
                })
                .collect()
        };
        let kept: Vec<Vec<Symbol>> = states.iter().zip(&alive).filter(|(_, &a)| a).map(|(s, _)| s.clone()).collect();
        if kept.is_empty() {
            return Err(Error::EmptySystem);
        }
        let kept_succ = succ
            .iter()
            .zip(&alive)
            .filter(|(_, &a)| a)
            .map(|(edges, _)| edges.iter().filter_map(|&(a, j)| remap[j].map(|j| (a, j))).collect())
            .collect();
        let index = kept.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Shift { k: spec.k, forbidden, graph: Some(Graph { block, states: kept, index, succ: kept_succ }) })
    }

    pub fn alphabet(&self) -> usize {
        self.k
    }

    pub fn is_full(&self) -> bool {
        self.graph.is_none()
    }

    pub fn forbidden(&self) -> &[Vec<Symbol>] {
        &self.forbidden
    }

    /// Length of the recoded states (1 for the full shift).
    pub fn memory(&self) -> usize {
        self.graph.as_ref().map_or(1, |g| g.block)
    }

    /// Window length `w` whose admissibility decides membership.
    pub fn window(&self) -> usize {
        self.memory() + 1
    }

    /// Whether `word` occurs in some point of the shift.
    pub fn is_admissible(&self, word: &[Symbol]) -> bool {
        if word.iter().any(|&s| s as usize >= self.k) {
            return false;
        }
        let Some(g) = &self.graph else { return true };
        if word.len() < g.block {
            return g.states.iter().any(|s| s.starts_with(word));
        }
        let mut state = match g.index.get(&word[..g.block]) {
            Some(&s) => s,
            None => return false,
        };
        for &a in &word[g.block..] {
            match g.succ[state].iter().find(|&&(b, _)| b == a) {
                Some(&(_, j)) => state = j,
                None => return false,
            }
        }
        true
    }

    fn state_of(&self, suffix: &[Symbol]) -> Option<usize> {
        let g = self.graph.as_ref()?;
        if suffix.len() < g.block {
            return None;
        }
        g.index.get(&suffix[suffix.len() - g.block..]).copied()
    }

    /// `|B_n|` for `n = 1..=n_max`.
    pub fn word_counts(&self, n_max: usize) -> Vec<WordCount> {
        let Some(g) = &self.graph else {
            let lk = (self.k as f64).ln();
            return (1..=n_max)
                .map(|n| WordCount {
                    n,
                    exact: if n <= EXACT_COUNT_LIMIT { (self.k as u128).checked_pow(n as u32) } else { None },
                    log_count: n as f64 * lk,
                })
                .collect();
        };
        let mut out = Vec::with_capacity(n_max);
        for n in 1..g.block.min(n_max + 1) {
            let distinct: HashSet<&[Symbol]> = g.states.iter().map(|s| &s[..n]).collect();
            let c = distinct.len() as u128;
            out.push(WordCount { n, exact: Some(c), log_count: (c as f64).ln() });
        }
        let m = g.states.len();
        let mut exact: Option<Vec<u128>> = Some(vec![1; m]);
        let mut float = vec![1.0f64; m];
        let mut scale = 0.0f64;
        for n in g.block..=n_max {
            if n > g.block {
                exact = exact.and_then(|v| {
                    g.succ
                        .iter()
                        .map(|edges| edges.iter().try_fold(0u128, |acc, &(_, j)| acc.checked_add(v[j])))
                        .collect()
                });
                let next: Vec<f64> = g.succ.iter().map(|edges| edges.iter().map(|&(_, j)| float[j]).sum()).collect();
                let top = next.iter().cloned().fold(0.0, f64::max);
                scale += top.ln();
                float = next.into_iter().map(|v| v / top).collect();
            }
            let total = exact
                .as_ref()
                .filter(|_| n <= EXACT_COUNT_LIMIT)
                .and_then(|v| v.iter().try_fold(0u128, |a, &b| a.checked_add(b)));
            let log_count = match total {
                Some(c) => (c as f64).ln(),
                None => scale + float.iter().sum::<f64>().ln(),
            };
            out.push(WordCount { n, exact: total, log_count });
        }
        out
    }

    /// Uniformly random admissible word, walking the state graph.
    pub fn random_word<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Vec<Symbol> {
        let Some(g) = &self.graph else {
            return (0..len).map(|_| rng.gen_range(0..self.k) as Symbol).collect();
        };
        let s = &g.states[rng.gen_range(0..g.states.len())];
        let mut w: Vec<Symbol> = s[..len.min(g.block)].to_vec();
        if len > g.block {
            self.extend_random(&mut w, len - g.block, rng);
        }
        w
    }

    /// Appends `extra` random symbols keeping the word admissible.
    ///
    /// `word` must be admissible and at least as long as the state length.
    pub fn extend_random<R: Rng + ?Sized>(&self, word: &mut Vec<Symbol>, extra: usize, rng: &mut R) {
        let Some(g) = &self.graph else {
            word.extend((0..extra).map(|_| rng.gen_range(0..self.k) as Symbol));
            return;
        };
        let mut state = self.state_of(word).expect("admissible word ends in a live state");
        for _ in 0..extra {
            let (a, j) = g.succ[state][rng.gen_range(0..g.succ[state].len())];
            word.push(a);
            state = j;
        }
    }

    /// An exact admissible point beginning with `word`.
    pub fn periodic_point(&self, word: &[Symbol]) -> Result<SymbolicPoint> {
        if !self.is_admissible(word) {
            return Err(Error::InvalidPoint("word is not admissible".into()));
        }
        let Some(g) = &self.graph else {
            return SymbolicPoint::periodic(word.to_vec(), vec![0]);
        };
        let mut pre = word.to_vec();
        if pre.len() < g.block {
            let s = g.states.iter().find(|s| s.starts_with(word)).expect("admissible prefix");
            pre = s.clone();
        }
        let mut state = self.state_of(&pre).expect("live state");
        let mut seen: HashMap<usize, usize> = HashMap::new();
        let mut path: Vec<Symbol> = Vec::new();
        while !seen.contains_key(&state) {
            seen.insert(state, path.len());
            let (a, j) = g.succ[state][0];
            path.push(a);
            state = j;
        }
        let cut = seen[&state];
        pre.extend_from_slice(&path[..cut]);
        SymbolicPoint::periodic(pre, path[cut..].to_vec())
    }

    /// Shortest word `c` with `u·c·v` admissible for every `u` ending like `from`
    /// and every `v` starting like `to`.
    pub fn connector(&self, from: &[Symbol], to: &[Symbol]) -> Result<Vec<Symbol>> {
        let Some(g) = &self.graph else { return Ok(Vec::new()) };
        let s =
            self.state_of(from).ok_or_else(|| Error::InvalidPoint("connector source is not a live state".into()))?;
        let t = *g
            .index
            .get(to.get(..g.block).ok_or_else(|| Error::InvalidPoint("connector target too short".into()))?)
            .ok_or_else(|| Error::InvalidPoint("connector target is not a live state".into()))?;
        let b = g.block;
        let key = |st: usize, d: usize| st * (b + 1) + d.min(b);
        let mut prev: HashMap<usize, (usize, Symbol)> = HashMap::new();
        let mut queue = VecDeque::from([(s, 0usize)]);
        let mut seen = HashSet::from([key(s, 0)]);
        while let Some((st, d)) = queue.pop_front() {
            if st == t && d >= b {
                let mut path = Vec::new();
                let mut cur = key(st, d);
                while let Some(&(p, a)) = prev.get(&cur) {
                    path.push(a);
                    cur = p;
                }
                path.reverse();
                path.truncate(path.len() - b);
                return Ok(path);
            }
            for &(a, j) in &g.succ[st] {
                let nk = key(j, d + 1);
                if seen.insert(nk) {
                    prev.insert(nk, (key(st, d), a));
                    queue.push_back((j, (d + 1).min(b)));
                }
            }
        }
        Err(Error::InternalError("no connecting path between live states".into()))
    }

    /// First and last recoded states of a word, the entry/exit class used when grouping segments.
    pub fn boundary_class(&self, word: &[Symbol]) -> (Vec<Symbol>, Vec<Symbol>) {
        match &self.graph {
            None => (Vec::new(), Vec::new()),
            Some(g) => {
                let b = g.block.min(word.len());
                (word[..b].to_vec(), word[word.len() - b..].to_vec())
            }
        }
    }

    /// Parry measure of a shift whose forbidden words have length at most 2,
    /// as `(stationary, transition)` over symbols.
    pub fn parry_measure(&self) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let k = self.k;
        let Some(g) = &self.graph else {
            return Ok((vec![1.0 / k as f64; k], vec![vec![1.0 / k as f64; k]; k]));
        };
        if g.block != 1 {
            return Err(Error::Precondition("Parry measure needs a one-step shift".into()));
        }
        let mut a = vec![vec![0.0f64; k]; k];
        for (i, edges) in g.succ.iter().enumerate() {
            for &(_, j) in edges {
                a[g.states[i][0] as usize][g.states[j][0] as usize] = 1.0;
            }
        }
        let power = |m: &Vec<Vec<f64>>, transpose: bool| -> (f64, Vec<f64>) {
            let mut v = vec![1.0f64; k];
            let mut lam = 1.0;
            for _ in 0..5000 {
                let mut nv = vec![0.0; k];
                for i in 0..k {
                    for j in 0..k {
                        nv[i] += if transpose { m[j][i] } else { m[i][j] } * v[j];
                    }
                }
                let s: f64 = nv.iter().sum();
                lam = s / v.iter().sum::<f64>();
                v = nv.into_iter().map(|x| x / s).collect();
            }
            (lam, v)
        };
        let (lam, r) = power(&a, false);
        let (_, l) = power(&a, true);
        let z: f64 = l.iter().zip(&r).map(|(x, y)| x * y).sum();
        let pi: Vec<f64> = l.iter().zip(&r).map(|(x, y)| x * y / z).collect();
        let p = (0..k)
            .map(|i| (0..k).map(|j| if r[i] > 0.0 { a[i][j] * r[j] / (lam * r[i]) } else { 0.0 }).collect())
            .collect();
        Ok((pi, p))
    }

    fn admissible_point(&self, x: &SymbolicPoint) -> bool {
        if x.max_symbol().is_some_and(|m| m as usize >= self.k) {
            return false;
        }
        let Some(g) = &self.graph else { return true };
        match x.tail() {
            Tail::Periodic(p) => {
                let span = x.remaining_word().len() + p.len() + g.block;
                x.prefix(span).map(|w| self.is_admissible(&w)).unwrap_or(false)
            }
            Tail::Truncated => self.is_admissible(x.remaining_word()),
        }
    }
}

impl DynamicalSystem for Shift {
    type Point = SymbolicPoint;

    fn step(&self, x: &SymbolicPoint) -> Result<SymbolicPoint> {
        Ok(x.shifted(1))
    }

    fn distance(&self, x: &SymbolicPoint, y: &SymbolicPoint) -> Result<f64> {
        x.distance(y)
    }

    fn contains(&self, x: &SymbolicPoint) -> bool {
        self.admissible_point(x)
    }

    fn diameter(&self) -> f64 {
        1.0
    }

    fn iterate(&self, x: &SymbolicPoint, n: usize) -> Result<SymbolicPoint> {
        Ok(x.shifted(n))
    }

    fn is_fixed_point(&self, x: &SymbolicPoint) -> bool {
        x.remaining_word().is_empty() && x.period().is_some_and(|p| p.iter().all(|&s| s == p[0]))
    }

    fn bowen_class(&self, x: &SymbolicPoint, n: usize, eps: f64) -> Option<Result<Vec<Symbol>>> {
        let mut m = 0usize;
        while (-(m as f64)).exp2() > eps {
            m += 1;
        }
        let len = if m == 0 { 0 } else { n - 1 + m };
        Some(x.prefix(len))
    }

    fn accumulate_tests(&self, x: &SymbolicPoint, out: &mut [f64]) -> Result<()> {
        family::accumulate_cylinders(self.k, x, out)
    }

    fn test_norm(&self, _j: usize) -> f64 {
        1.0
    }
}
