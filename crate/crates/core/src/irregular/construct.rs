use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{build_schedule, select_segments, target_separation, Schedule, SegmentBank, Tag};
use crate::error::{Error, Result};
use crate::measures::{
    classify_signatures, orbit_signatures, MeasureDistance, Signature, TargetMeasure, Verdict, DEFAULT_MERGE_RADIUS,
    DEFAULT_TRUNCATION,
};
use crate::shadowing::{is_pseudo_orbit, trace_symbolic, PseudoOrbit, ShadowCertificate};
use crate::systems::{Shift, Symbol, SymbolicPoint};

/// Largest number of pseudo-orbit points materialized by the assembly.
pub const MAX_POSITIONS: u64 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LabelMode {
    Random { seed: u64 },
    LexMin,
}

/// Index into `Γ_{ω_m}` for each block.
pub fn choose_labels(schedule: &Schedule, bank: &SegmentBank, mode: LabelMode) -> Vec<usize> {
    let mut rng = match mode {
        LabelMode::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        LabelMode::LexMin => None,
    };
    schedule
        .tags
        .iter()
        .map(|&tag| match (&mut rng, tag) {
            (Some(r), Tag::Mu) => r.gen_range(0..bank.mu_words.len()),
            _ => 0,
        })
        .collect()
}

/// Concatenation of the first `labels.len()` blocks, each a segment followed by its connector.
pub fn concatenate(schedule: &Schedule, bank: &SegmentBank, labels: &[usize]) -> Result<Vec<Symbol>> {
    if labels.len() > schedule.blocks() {
        return Err(Error::Precondition(format!(
            "{} labels for a schedule of {} blocks",
            labels.len(),
            schedule.blocks()
        )));
    }
    let len = schedule.end(labels.len());
    if len > MAX_POSITIONS {
        return Err(Error::DepthTooLarge(schedule.depth));
    }
    let mut out = Vec::with_capacity(len as usize);
    for (m, &label) in labels.iter().enumerate() {
        let tag = schedule.tags[m];
        let next = schedule.tags.get(m + 1).copied().unwrap_or(Tag::Mu);
        match tag {
            Tag::Mu => out.extend(
                bank.mu_words
                    .get(label)
                    .ok_or_else(|| Error::Precondition(format!("label {label} outside Γ_μ at block {}", m + 1)))?,
            ),
            Tag::Nu => {
                if label != 0 {
                    return Err(Error::Precondition(format!("ν block {} takes label 0", m + 1)));
                }
                out.extend(&bank.nu_word);
            }
        }
        let conn = match (tag, next) {
            (Tag::Mu, Tag::Mu) => &bank.connectors.mu_mu,
            (Tag::Mu, Tag::Nu) => &bank.connectors.mu_nu,
            (Tag::Nu, _) => &bank.connectors.nu_mu,
        };
        if conn.len() != schedule.connectors[m] {
            return Err(Error::ShapeError(format!("connector length mismatch at block {}", m + 1)));
        }
        out.extend(conn);
    }
    Ok(out)
}

/// `{w_u}`: every point of block `m` sees its block to the end plus `lookahead`
/// symbols of the next one, closed off by an admissible periodic tail.
pub fn assemble_pseudo_orbit(
    shift: &Shift,
    schedule: &Schedule,
    bank: &SegmentBank,
    labels: &[usize],
    lookahead: usize,
) -> Result<PseudoOrbit<SymbolicPoint>> {
    let word = concatenate(schedule, bank, labels)?;
    let delta = (-(lookahead as f64 - 1.0)).exp2();
    let mut points = Vec::with_capacity(word.len());
    for m in 1..=labels.len() {
        let (start, end) = (schedule.end(m - 1) as usize, schedule.end(m) as usize);
        let view = (end + lookahead).min(word.len());
        for u in start..end {
            points.push(shift.periodic_point(&word[u..view])?);
        }
    }
    if points.len() >= 2 {
        if let (false, Some(v)) = is_pseudo_orbit(shift, &points, delta)? {
            let block = schedule.ends.partition_point(|&e| e <= v.index as u64) + 1;
            return Err(Error::JunctionViolation { block, gap: v.gap, delta });
        }
    }
    Ok(PseudoOrbit { points, delta })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrregularConfig {
    #[serde(default = "defaults::lambda", alias = "λ")]
    pub lambda: u64,
    #[serde(default = "defaults::t")]
    pub t: u64,
    #[serde(default = "defaults::segment_len", alias = "L")]
    pub segment_len: usize,
    /// Truncation used for checkpoint distances.
    #[serde(default = "defaults::truncation", alias = "J")]
    pub truncation: usize,
    /// Truncation used when selecting `Γ_μ`.
    #[serde(default = "defaults::selection_truncation")]
    pub selection_truncation: usize,
    #[serde(default = "defaults::tolerance", alias = "tol")]
    pub tolerance: f64,
    #[serde(default = "defaults::depth")]
    pub depth: usize,
    #[serde(default = "defaults::epsilon")]
    pub epsilon: f64,
    #[serde(default = "defaults::eta")]
    pub eta: f64,
    #[serde(default = "defaults::radius")]
    pub merge_radius: f64,
    #[serde(default = "defaults::labels")]
    pub labels: LabelMode,
    /// Defaults to the uniform Bernoulli measure.
    #[serde(default)]
    pub mu: Option<TargetMeasure>,
    /// Defaults to the point mass at `0^∞`.
    #[serde(default)]
    pub nu: Option<TargetMeasure>,
}

mod defaults {
    use super::*;
    pub fn lambda() -> u64 {
        4
    }
    pub fn t() -> u64 {
        2
    }
    pub fn segment_len() -> usize {
        12
    }
    pub fn truncation() -> usize {
        DEFAULT_TRUNCATION
    }
    pub fn selection_truncation() -> usize {
        8
    }
    pub fn tolerance() -> f64 {
        0.15
    }
    pub fn depth() -> usize {
        5
    }
    pub fn epsilon() -> f64 {
        0.5
    }
    pub fn eta() -> f64 {
        0.12
    }
    pub fn radius() -> f64 {
        DEFAULT_MERGE_RADIUS
    }
    pub fn labels() -> LabelMode {
        LabelMode::Random { seed: 0 }
    }
}

impl Default for IrregularConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields default")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Odd,
    Even,
}

/// `E_n(z)` at the end of one super-block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRow {
    pub super_block: usize,
    pub position: u64,
    pub parity: Parity,
    /// `(1/n) Σ_{i<n} z_i`.
    pub birkhoff: f64,
    /// Fraction of positions in μ blocks.
    pub beta: f64,
    /// Distance to `μ` (odd) or `βμ + (1−β)ν` (even).
    pub target_distance: MeasureDistance,
}

/// `t(h_μ − 3η) ≥ (t+1)(h_μ − 4η)`, reported rather than enforced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TConstraint {
    pub h_mu: f64,
    pub eta: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrregularReport {
    pub gamma_size: usize,
    pub alpha: MeasureDistance,
    pub degenerate: bool,
    pub zeta: f64,
    pub lookahead: usize,
    pub delta: f64,
    pub positions: u64,
    pub shadow_achieved: f64,
    pub checkpoints: Vec<CheckpointRow>,
    /// Birkhoff average at the last odd checkpoint minus that at the last even one.
    pub birkhoff_gap: Option<f64>,
    /// `ρ_J` between the last odd and last even empirical measures, a lower bound on `ρ`.
    pub rho_gap: Option<f64>,
    /// `α/(3(t+1))`, the bound on odd-checkpoint distances to `μ`.
    pub step3_bound: f64,
    /// Whether every odd checkpoint from the third super-block on is within the bound plus tails.
    pub step3_holds: Option<bool>,
    pub t_constraint: TConstraint,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IrregularRun {
    pub schedule: Schedule,
    pub bank: SegmentBank,
    pub labels: Vec<usize>,
    pub word: Vec<Symbol>,
    pub certificate: ShadowCertificate<SymbolicPoint>,
    pub report: IrregularReport,
}

impl IrregularRun {
    /// `(n, (1/n) Σ_{i<n} z_i)` every `step` positions.
    pub fn birkhoff_series(&self, step: usize) -> Vec<(usize, f64)> {
        let step = step.max(1);
        let mut sum = 0u64;
        let mut out = Vec::new();
        for (i, &s) in self.word.iter().enumerate() {
            sum += s as u64;
            if (i + 1) % step == 0 || i + 1 == self.word.len() {
                out.push((i + 1, sum as f64 / (i + 1) as f64));
            }
        }
        out
    }
}

pub fn build_irregular_point(shift: &Shift, config: &IrregularConfig) -> Result<IrregularRun> {
    let k = shift.alphabet();
    let mu = match &config.mu {
        Some(m) => m.clone(),
        None => TargetMeasure::uniform_bernoulli(k),
    };
    let nu = config.nu.clone().unwrap_or_else(|| TargetMeasure::dirac_fixed(0));
    let j = config.truncation;
    let bank = select_segments(
        shift,
        &mu,
        &nu,
        config.segment_len,
        config.epsilon,
        config.tolerance,
        config.selection_truncation,
    )?;
    if bank.mu_words.len() < 2 {
        return Err(Error::EntropyDeficit(format!(
            "|Γ_μ| = {} leaves no branching for the Moran set",
            bank.mu_words.len()
        )));
    }
    let schedule =
        build_schedule(config.lambda, config.t, config.depth, config.segment_len, bank.connectors.lengths())?;
    let labels = choose_labels(&schedule, &bank, config.labels);

    let alpha = target_separation(k, &mu, &nu, j)?;
    let degenerate = alpha.value <= alpha.tail_bound;
    let third = config.epsilon / 3.0;
    let zeta = if degenerate { third } else { (alpha.value / (12.0 * (config.t + 1) as f64)).min(third) };
    let lookahead = (1.0 / zeta).log2().ceil().max(0.0) as usize + 1;

    let po = assemble_pseudo_orbit(shift, &schedule, &bank, &labels, lookahead)?;
    let certificate = trace_symbolic(shift, &po)?;
    if !(certificate.achieved < zeta) {
        return Err(Error::InternalError(format!("trace achieved {} ≥ ζ = {zeta}", certificate.achieved)));
    }
    let word = concatenate(&schedule, &bank, &labels)?;
    let z = &certificate.point;

    let positions: Vec<usize> = schedule.checkpoints().iter().map(|&c| c as usize).collect();
    let sigs = orbit_signatures(shift, z, &positions, j)?;
    let mu_sig = mu.signature(k, j)?;
    let nu_sig = nu.signature(k, j)?;
    let mut prefix_mu = vec![0u64; schedule.blocks() + 1];
    for m in 1..=schedule.blocks() {
        let len = schedule.end(m) - schedule.end(m - 1);
        prefix_mu[m] = prefix_mu[m - 1] + if schedule.tags[m - 1] == Tag::Mu { len } else { 0 };
    }
    let mut sums = vec![0u64; word.len() + 1];
    for (i, &s) in word.iter().enumerate() {
        sums[i + 1] = sums[i] + s as u64;
    }
    let mut checkpoints = Vec::with_capacity(positions.len());
    for (idx, (&n, sig)) in positions.iter().zip(&sigs).enumerate() {
        let kk = idx + 1;
        let beta = prefix_mu[schedule.super_block_end(kk)] as f64 / n as f64;
        let parity = if kk % 2 == 1 { Parity::Odd } else { Parity::Even };
        let target: Signature = match parity {
            Parity::Odd => mu_sig.clone(),
            Parity::Even => Signature::combine(&[(beta, &mu_sig), (1.0 - beta, &nu_sig)])?,
        };
        checkpoints.push(CheckpointRow {
            super_block: kk,
            position: n as u64,
            parity,
            birkhoff: sums[n] as f64 / n as f64,
            beta,
            target_distance: sig.rho(&target)?,
        });
    }
    let last = |p: Parity| checkpoints.iter().rposition(|c| c.parity == p);
    let (odd, even) = (last(Parity::Odd), last(Parity::Even));
    let (birkhoff_gap, rho_gap) = match (odd, even) {
        (Some(o), Some(e)) => {
            (Some(checkpoints[o].birkhoff - checkpoints[e].birkhoff), Some(sigs[o].rho(&sigs[e])?.value))
        }
        _ => (None, None),
    };
    let step3_bound = alpha.value / (3.0 * (config.t + 1) as f64);
    let late_odd: Vec<&CheckpointRow> =
        checkpoints.iter().filter(|c| c.parity == Parity::Odd && c.super_block >= 3).collect();
    let step3_holds = (!late_odd.is_empty())
        .then(|| late_odd.iter().all(|c| c.target_distance.value <= step3_bound + 2.0 * c.target_distance.tail_bound));
    let h_mu = mu.entropy()?;
    let t = config.t as f64;
    let t_constraint = TConstraint {
        h_mu,
        eta: config.eta,
        holds: t * (h_mu - 3.0 * config.eta) >= (t + 1.0) * (h_mu - 4.0 * config.eta),
    };
    let verdict = if positions.len() >= 4 {
        classify_signatures(&positions, &sigs, config.merge_radius)?.verdict
    } else {
        Verdict::Inconclusive
    };
    let report = IrregularReport {
        gamma_size: bank.mu_words.len(),
        alpha,
        degenerate,
        zeta,
        lookahead,
        delta: po.delta,
        positions: word.len() as u64,
        shadow_achieved: certificate.achieved,
        checkpoints,
        birkhoff_gap,
        rho_gap,
        step3_bound,
        step3_holds,
        t_constraint,
        verdict,
    };
    Ok(IrregularRun { schedule, bank, labels, word, certificate, report })
}
