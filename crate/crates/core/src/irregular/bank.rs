use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{separated_set, SearchMode};
use crate::error::{Error, Result};
use crate::measures::{orbit_signatures, tail_bound, MeasureDistance, Signature, TargetMeasure};
use crate::systems::{Shift, Symbol, SymbolicPoint};

/// Largest number of candidate words scanned during selection.
pub const MAX_SCAN: usize = 1 << 22;

/// Connector words between segment classes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Connectors {
    pub mu_mu: Vec<Symbol>,
    pub mu_nu: Vec<Symbol>,
    pub nu_mu: Vec<Symbol>,
}

impl Connectors {
    pub fn lengths(&self) -> super::ConnectorLengths {
        super::ConnectorLengths { mu_mu: self.mu_mu.len(), mu_nu: self.mu_nu.len(), nu_mu: self.nu_mu.len() }
    }
}

/// Selected length-`L` segments for the two target measures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentBank {
    pub segment_len: usize,
    pub truncation: usize,
    pub tolerance: f64,
    /// `Γ_μ` in lexicographic order.
    pub mu_words: Vec<Vec<Symbol>>,
    /// Words within tolerance before restricting to one boundary class.
    pub mu_candidates: usize,
    pub nu_word: Vec<Symbol>,
    /// `ρ_J(E_L(z_ν^∞), ν)`.
    pub nu_distance: f64,
    pub connectors: Connectors,
    /// Separation radius verified on `Γ_μ`.
    pub epsilon: f64,
}

impl SegmentBank {
    pub fn words(&self, tag: super::Tag) -> usize {
        match tag {
            super::Tag::Mu => self.mu_words.len(),
            super::Tag::Nu => 1,
        }
    }
}

fn all_words(shift: &Shift, len: usize) -> Result<Vec<Vec<Symbol>>> {
    let k = shift.alphabet();
    let total = (k as f64).powi(len as i32);
    if total > MAX_SCAN as f64 {
        return Err(Error::Precondition(format!("{k}^{len} candidate words exceed the scan limit {MAX_SCAN}")));
    }
    let total = total as usize;
    Ok((0..total)
        .into_par_iter()
        .filter_map(|mut c| {
            let mut w = vec![0 as Symbol; len];
            for slot in w.iter_mut().rev() {
                *slot = (c % k) as Symbol;
                c /= k;
            }
            shift.is_admissible(&w).then_some(w)
        })
        .collect())
}

/// Signature of `E_L(w^∞)`, the cyclic cylinder frequencies of `w`.
pub fn word_signature(k: usize, w: &[Symbol], j: usize) -> Result<Signature> {
    let full = Shift::full(k)?;
    let x = SymbolicPoint::periodic(Vec::new(), w.to_vec())?;
    Ok(orbit_signatures(&full, &x, &[w.len()], j)?.pop().expect("one checkpoint"))
}

/// Scans all admissible `L`-words: `Γ_μ` collects those within `tol` of `μ`
/// (restricted to the most popular boundary class) and `z_ν` is the word
/// closest to `ν`.
pub fn select_segments(
    shift: &Shift,
    mu: &TargetMeasure,
    nu: &TargetMeasure,
    segment_len: usize,
    epsilon: f64,
    tol: f64,
    j: usize,
) -> Result<SegmentBank> {
    if segment_len == 0 || j == 0 || !(tol > 0.0) || !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Precondition(format!(
            "need L ≥ 1, J ≥ 1, tol > 0, ε ∈ (0,1); got L={segment_len}, J={j}, tol={tol}, ε={epsilon}"
        )));
    }
    let k = shift.alphabet();
    let mu_sig = mu.signature(k, j)?;
    let nu_sig = nu.signature(k, j)?;
    let words = all_words(shift, segment_len)?;
    let scored = words
        .par_iter()
        .map(|w| {
            let s = word_signature(k, w, j)?;
            Ok((s.rho(&mu_sig)?.value, s.rho(&nu_sig)?.value))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;

    let mut classes: HashMap<(Vec<Symbol>, Vec<Symbol>), Vec<usize>> = HashMap::new();
    let mut order = Vec::new();
    for (i, &(dm, _)) in scored.iter().enumerate() {
        if dm <= tol {
            let key = shift.boundary_class(&words[i]);
            let entry = classes.entry(key.clone()).or_default();
            if entry.is_empty() {
                order.push(key);
            }
            entry.push(i);
        }
    }
    let mu_candidates: usize = classes.values().map(Vec::len).sum();
    let best_class = order
        .iter()
        .max_by(|a, b| classes[*a].len().cmp(&classes[*b].len()).then_with(|| b.cmp(a)))
        .ok_or(Error::ToleranceTooTight { tolerance: tol })?
        .clone();
    let mu_words: Vec<Vec<Symbol>> = classes[&best_class].iter().map(|&i| words[i].clone()).collect();

    let (nu_index, nu_distance) =
        scored.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &(_, dn))| if dn < acc.1 { (i, dn) } else { acc });
    let nu_word = words[nu_index].clone();

    let pts = mu_words.iter().map(|w| SymbolicPoint::periodic(Vec::new(), w.clone())).collect::<Result<Vec<_>>>()?;
    let sep = separated_set(shift, &pts, segment_len, epsilon, SearchMode::Exhaustive)?;
    if sep.indices.len() != mu_words.len() {
        return Err(Error::InternalError("selected segments are not separated".into()));
    }

    let (mu_in, mu_out) = best_class;
    let (nu_in, nu_out) = shift.boundary_class(&nu_word);
    let edge = |from: &[Symbol], to: &[Symbol]| -> Result<Vec<Symbol>> {
        if shift.is_full() {
            Ok(Vec::new())
        } else {
            shift.connector(from, to)
        }
    };
    let connectors =
        Connectors { mu_mu: edge(&mu_out, &mu_in)?, mu_nu: edge(&mu_out, &nu_in)?, nu_mu: edge(&nu_out, &mu_in)? };
    Ok(SegmentBank {
        segment_len,
        truncation: j,
        tolerance: tol,
        mu_words,
        mu_candidates,
        nu_word,
        nu_distance,
        connectors,
        epsilon,
    })
}

/// `ρ_J(μ, ν)` from the exact target signatures.
pub fn target_separation(k: usize, mu: &TargetMeasure, nu: &TargetMeasure, j: usize) -> Result<MeasureDistance> {
    let d = mu.signature(k, j)?.rho(&nu.signature(k, j)?)?;
    debug_assert_eq!(d.tail_bound, tail_bound(j));
    Ok(d)
}
