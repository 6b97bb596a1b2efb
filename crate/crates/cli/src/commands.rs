use anyhow::{bail, Context};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use shadowlab_core::constructions::{
    extract_horseshoe, minimal_subset_check, proximal_entropy_check, proximal_samples, proximal_subshift,
};
use shadowlab_core::entropy::{moran_lower_certificate, subshift_entropy};
use shadowlab_core::irregular::{build_irregular_point, moran_set_count, LabelMode, Tag};
use shadowlab_core::measures::{classify_signatures, orbit_signatures};
use shadowlab_core::shadowing::{
    is_pseudo_orbit, shadowing_modulus, trace_interval, trace_symbolic, TraceOutcome, Tracer,
};
use shadowlab_core::shredding::{decompose_grid, induce_tau, lambda_entropy_bound, perturb, verify_shredding};
use shadowlab_core::systems::format_word;
use shadowlab_core::{AnySystem, GridMap, Shift, SymbolicPoint, TargetMeasure, Verdict};

use crate::config::*;
use crate::output::{num, Table};

/// A named pass/fail check with the quantity it rests on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

impl Certificate {
    fn new(name: impl Into<String>, holds: bool, detail: impl Into<String>) -> Self {
        Certificate { name: name.into(), holds, detail: detail.into() }
    }
}

/// Everything a command produces, before timing and provenance are attached.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub results: Value,
    pub certificates: Vec<Certificate>,
    pub tables: Vec<Table>,
}

pub fn execute(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let seed = cfg.seed();
    match &cfg.command {
        Command::Entropy(p) => entropy(p),
        Command::Irregular(p) => irregular(p, seed),
        Command::Shadow(p) => shadow(p, seed),
        Command::Horseshoe(p) => horseshoe(p, seed),
        Command::Proximal(p) => proximal(p, seed),
        Command::Shred(p) => shred(p),
        Command::Classify(p) => classify(p, seed),
    }
}

fn shift_of(system: &shadowlab_core::SystemDescriptor) -> anyhow::Result<Shift> {
    match system.build()? {
        AnySystem::Shift(s) => Ok(s),
        _ => bail!("this command needs a shift system"),
    }
}

fn entropy(p: &EntropyParams) -> anyhow::Result<Outcome> {
    let shift = shift_of(&p.system)?;
    let table = subshift_entropy(&shift, p.n_max)?;
    let mut csv = Table::new(
        "entropy.csv",
        &[
            ("n", "word length"),
            ("count", "|B_n| when it fits in 128 bits, exact"),
            ("log_count", "log|B_n|"),
            ("rate", "log|B_n|/n"),
        ],
    );
    for r in &table.rows {
        csv.push([
            r.n.to_string(),
            r.exact.map(|c| c.to_string()).unwrap_or_default(),
            num(r.log_count),
            num(r.log_count / r.n as f64),
        ]);
    }
    let mut worst: Option<(usize, usize)> = None;
    for m in 1..=table.rows.len() {
        for n in 1..=table.rows.len() - m {
            let (a, b, c) = (&table.rows[m - 1], &table.rows[n - 1], &table.rows[m + n - 1]);
            let ok = match (a.exact, b.exact, c.exact) {
                (Some(a), Some(b), Some(c)) => a.checked_mul(b).map_or(true, |ab| c <= ab),
                _ => c.log_count <= a.log_count + b.log_count + 1e-9,
            };
            if !ok && worst.is_none() {
                worst = Some((m, n));
            }
        }
    }
    let certificates = vec![Certificate::new(
        "subadditive",
        worst.is_none(),
        match worst {
            None => format!("|B_(m+n)| ≤ |B_m||B_n| for m+n ≤ {}", p.n_max),
            Some((m, n)) => format!("fails at m={m}, n={n}"),
        },
    )];
    Ok(Outcome { results: json!({ "estimate": table.estimate, "rows": table.rows }), certificates, tables: vec![csv] })
}

fn irregular(p: &IrregularParams, seed: u64) -> anyhow::Result<Outcome> {
    let shift = shift_of(&p.system)?;
    let mut config = p.config.clone();
    if let LabelMode::Random { .. } = config.labels {
        config.labels = LabelMode::Random { seed };
    }
    let run = build_irregular_point(&shift, &config)?;
    let rep = &run.report;
    let mut certs = Vec::new();

    match rep.birkhoff_gap {
        Some(g) => certs.push(Certificate::new(
            "birkhoff_gap",
            g.abs() >= p.min_gap,
            format!("|A_odd − A_even| = {} against {} (exact averages)", g.abs(), p.min_gap),
        )),
        None => certs.push(Certificate::new("birkhoff_gap", false, "fewer than two checkpoints")),
    }
    let tail = shadowlab_core::measures::tail_bound(config.truncation);
    if let Some(r) = rep.rho_gap {
        certs.push(Certificate::new("rho_gap", r > 0.0, format!("ρ_J = {r} (tail {tail})")));
    }
    let expected = if rep.degenerate { Verdict::QuasiRegularCandidate } else { Verdict::IrregularCandidate };
    certs.push(Certificate::new("verdict", rep.verdict == expected, format!("{:?}", rep.verdict)));
    if let Some(h) = rep.step3_holds {
        certs.push(Certificate::new("odd_checkpoints_near_mu", h, format!("bound {}", rep.step3_bound)));
    }

    let blocks = p.moran_blocks.min(run.schedule.blocks());
    let mut moran = Value::Null;
    let mut moran_csv = Table::new(
        "moran.csv",
        &[
            ("m", "block"),
            ("length", "M_m, positions in the first m blocks"),
            ("count", "|W_m|, exact"),
            ("log_count", "log|W_m|"),
        ],
    );
    if blocks >= 2 {
        let tree = moran_set_count(&run.schedule, &run.bank, blocks)?;
        let mut product = BigUint::from(1u8);
        let mut exact = true;
        for (m, c) in tree.counts.iter().enumerate() {
            product *= match run.schedule.tags[m] {
                Tag::Mu => run.bank.mu_words.len(),
                _ => 1,
            };
            exact &= *c == product;
            moran_csv.push([
                (m + 1).to_string(),
                tree.lengths[m].to_string(),
                c.to_string(),
                num(shadowlab_core::entropy::ln_biguint(c)),
            ]);
        }
        certs.push(Certificate::new("moran_product", exact, format!("|W_m| = Π|Γ_ω_i| for m ≤ {blocks}")));
        let h = p.moran_rate.unwrap_or_else(|| {
            let t = config.t as f64;
            0.8 * (t / (t + 1.0)) * (run.bank.mu_words.len() as f64).ln() / config.segment_len as f64
        });
        let cert = moran_lower_certificate(&tree.counts, &tree.lengths, h)?;
        certs.push(Certificate::new(
            "moran_lower",
            cert.holds,
            format!("min log|W_m| − M_m h = {} at h = {h}", cert.min_margin),
        ));
        moran = json!({ "tree": tree, "rate": h, "certificate": cert });
    }

    let mut cp = Table::new(
        "checkpoints.csv",
        &[
            ("super_block", "k"),
            ("n", "position"),
            ("parity", "odd targets μ, even the mixture"),
            ("birkhoff", "(1/n) Σ x_0, exact ratio"),
            ("beta", "fraction of positions in μ blocks"),
            ("rho", "ρ_J to the target"),
            ("tail", "tail bound of ρ_J"),
        ],
    );
    for c in &rep.checkpoints {
        cp.push([
            c.super_block.to_string(),
            c.position.to_string(),
            format!("{:?}", c.parity).to_lowercase(),
            num(c.birkhoff),
            num(c.beta),
            num(c.target_distance.value),
            num(c.target_distance.tail_bound),
        ]);
    }
    let step = (run.word.len() / 2000).max(1);
    let mut series = Table::new("birkhoff.csv", &[("n", "orbit length"), ("average", "(1/n) Σ_{i<n} x_i")]);
    for (n, a) in run.birkhoff_series(step) {
        series.push([n.to_string(), num(a)]);
    }
    Ok(Outcome {
        results: json!({
            "report": rep,
            "schedule": { "s": run.schedule.s, "n": run.schedule.n, "blocks": run.schedule.blocks() },
            "gamma_mu": run.bank.mu_words.len(),
            "shadow": { "achieved": run.certificate.achieved, "horizon": run.certificate.horizon },
            "moran": moran,
        }),
        certificates: certs,
        tables: vec![cp, series, moran_csv],
    })
}

#[derive(Serialize)]
struct LevelSummary {
    m: u32,
    delta: f64,
    epsilon: f64,
    trials: usize,
    shadowed: usize,
    max_achieved: f64,
    failures: Vec<String>,
}

/// Traces `trials` random pseudo-orbits and checks every orbit point against its target.
fn shadow_level<S, F>(sys: &S, trace: F, m: u32, p: &ShadowParams, seed: u64) -> anyhow::Result<LevelSummary>
where
    S: Tracer,
    F: Fn(&shadowlab_core::shadowing::PseudoOrbit<S::Point>, f64) -> anyhow::Result<Option<S::Point>> + Sync,
{
    let delta = (-(m as f64 + 1.0)).exp2();
    let eps = (-(m as f64)).exp2();
    let outcomes: Vec<anyhow::Result<Result<f64, String>>> = (0..p.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(m as u64 * p.trials as u64 + t as u64);
            let po = sys.random_pseudo_orbit(delta, p.horizon, &mut rng)?;
            if p.horizon >= 2 && !is_pseudo_orbit(sys, &po.points, delta)?.0 {
                return Ok(Err(format!("trial {t}: input is not a δ-pseudo-orbit")));
            }
            let Some(y) = trace(&po, eps)? else {
                return Ok(Err(format!("trial {t}: no shadowing point found")));
            };
            let mut cur = y;
            let mut worst = 0.0f64;
            for (i, x) in po.points.iter().enumerate() {
                let d = sys.distance(&cur, x)?;
                if d > eps {
                    return Ok(Err(format!("trial {t}: d(f^{i} y, x_{i}) = {d} > {eps}")));
                }
                worst = worst.max(d);
                cur = sys.step(&cur)?;
            }
            Ok(Ok(worst))
        })
        .collect();
    let mut summary =
        LevelSummary { m, delta, epsilon: eps, trials: p.trials, shadowed: 0, max_achieved: 0.0, failures: vec![] };
    for o in outcomes {
        match o? {
            Ok(w) => {
                summary.shadowed += 1;
                summary.max_achieved = summary.max_achieved.max(w);
            }
            Err(f) => summary.failures.push(f),
        }
    }
    Ok(summary)
}

fn shadow(p: &ShadowParams, seed: u64) -> anyhow::Result<Outcome> {
    let sys = p.system.build()?;
    let mut levels = Vec::new();
    let mut modulus = None;
    for &m in &p.levels {
        if !(1..=30).contains(&m) {
            bail!("level {m} outside 1..=30");
        }
        levels.push(match &sys {
            AnySystem::Shift(sh) => shadow_level(sh, |po, _| Ok(Some(trace_symbolic(sh, po)?.point)), m, p, seed)?,
            AnySystem::Interval(f) => shadow_level(
                f,
                |po, eps| {
                    Ok(match trace_interval(f, po, eps)? {
                        TraceOutcome::Shadowed(c) => Some(c.point),
                        TraceOutcome::NoShadowFound { .. } => None,
                    })
                },
                m,
                p,
                seed,
            )?,
            AnySystem::Grid(_) => bail!("shadow supports shifts and interval homeomorphisms"),
        });
    }
    if let Some(eps) = p.modulus_epsilon {
        modulus = Some(match &sys {
            AnySystem::Shift(sh) => shadowing_modulus(sh, eps, p.trials, p.horizon, seed)?,
            AnySystem::Interval(f) => shadowing_modulus(f, eps, p.trials, p.horizon, seed)?,
            AnySystem::Grid(_) => unreachable!("rejected above"),
        });
    }
    let mut csv = Table::new(
        "shadow.csv",
        &[
            ("m", "level"),
            ("delta", "pseudo-orbit gap 2^-(m+1)"),
            ("epsilon", "required accuracy 2^-m"),
            ("trials", "pseudo-orbits traced"),
            ("shadowed", "traces verified pointwise"),
            ("max_achieved", "largest max_n d(f^n y, x_n)"),
        ],
    );
    let mut certs = Vec::new();
    for l in &levels {
        csv.push([
            l.m.to_string(),
            num(l.delta),
            num(l.epsilon),
            l.trials.to_string(),
            l.shadowed.to_string(),
            num(l.max_achieved),
        ]);
        certs.push(Certificate::new(
            format!("shadow_m{}", l.m),
            l.failures.is_empty(),
            match l.failures.first() {
                None => format!("{}/{} within {}", l.shadowed, l.trials, l.epsilon),
                Some(f) => format!("{} failures, first: {f}", l.failures.len()),
            },
        ));
    }
    Ok(Outcome { results: json!({ "levels": levels, "modulus": modulus }), certificates: certs, tables: vec![csv] })
}

fn horseshoe(p: &HorseshoeRunParams, seed: u64) -> anyhow::Result<Outcome> {
    let shift = shift_of(&p.system)?;
    let mu = match &p.mu {
        Some(m) => m.clone(),
        None if shift.is_full() => TargetMeasure::uniform_bernoulli(shift.alphabet()),
        None => TargetMeasure::parry(&shift)?,
    };
    let hs = extract_horseshoe(&shift, &mu, p.alpha, p.eta, &p.params(seed))?;
    let certs = vec![
        Certificate::new(
            "rate",
            hs.rate >= p.alpha,
            format!("log(r−1)/k = {} with r = {}, k = {}", hs.rate, hs.r, hs.k),
        ),
        Certificate::new("semiconjugacy", hs.round_trips == p.checks, format!("{} codec round trips", hs.round_trips)),
        Certificate::new(
            "separation",
            hs.separated_pairs == p.checks,
            format!("{} separated pairs", hs.separated_pairs),
        ),
    ];
    let mut csv = Table::new("segments.csv", &[("index", "symbol of the coding"), ("segment", "word, base 36")]);
    for (i, w) in hs.segments.iter().enumerate() {
        csv.push([i.to_string(), format_word(w)?]);
    }
    Ok(Outcome { results: serde_json::to_value(&hs)?, certificates: certs, tables: vec![csv] })
}

fn proximal(p: &ProximalParams, seed: u64) -> anyhow::Result<Outcome> {
    let spec = proximal_subshift(p.m, p.gamma)?;
    let mut csv = Table::new(
        "proximal.csv",
        &[
            ("level", "N"),
            ("length", "s_N"),
            ("forced", "k_N"),
            ("free", "unforced positions in [0, s_N)"),
            ("rate", "(1/s_N) log|B_{s_N}|"),
            ("bound", "(1 − Σ k_i/s_i) log m"),
            ("holds", "rate ≥ bound, exact"),
        ],
    );
    let mut certs = Vec::new();
    let mut checks = Vec::new();
    for level in 1..=p.levels.min(spec.levels()) {
        let c = proximal_entropy_check(&spec, level)?;
        csv.push([
            level.to_string(),
            c.length.to_string(),
            spec.k[level - 1].to_string(),
            c.free.to_string(),
            num(c.rate),
            num(c.bound),
            c.holds.to_string(),
        ]);
        certs.push(Certificate::new(format!("count_level{level}"), c.holds, format!("{} ≥ {}", c.rate, c.bound)));
        checks.push(c);
    }
    let samples = proximal_samples(&spec, p.samples, p.horizon, seed);
    let mut inadmissible = None;
    for (i, w) in samples.iter().enumerate() {
        if !spec.is_admissible(w)? {
            inadmissible = Some(i);
            break;
        }
    }
    certs.push(Certificate::new(
        "samples_admissible",
        inadmissible.is_none(),
        match inadmissible {
            None => format!("{} samples of length {}", samples.len(), p.horizon),
            Some(i) => format!("sample {i} contains a forbidden pattern"),
        },
    ));
    let violation = minimal_subset_check(&spec, &samples, p.horizon)?;
    certs.push(Certificate::new(
        "minimal_subset",
        violation.is_none(),
        match &violation {
            None => "every sample has syndetic zero runs".to_string(),
            Some(v) => format!("sample {} at level {}, window {}", v.sample, v.level, v.window_start),
        },
    ));
    let mut sample_csv = Table::new(
        "samples.csv",
        &[("sample", "index"), ("zeros", "zero symbols in the sample"), ("prefix", "first 64 symbols, base 36")],
    );
    let mut zeros_total = 0usize;
    for (i, w) in samples.iter().enumerate() {
        let zeros = w.iter().filter(|&&c| c == 0).count();
        zeros_total += zeros;
        sample_csv.push([i.to_string(), zeros.to_string(), format_word(&w[..w.len().min(64)])?]);
    }
    let zero_fraction = zeros_total as f64 / (samples.len() * p.horizon).max(1) as f64;
    Ok(Outcome {
        results: json!({ "zero_fraction": zero_fraction, "spec": { "m": spec.m, "gamma": spec.gamma, "k": spec.k.iter().take(8).map(|k| k.to_string()).collect::<Vec<_>>(), "s": spec.s.iter().take(8).map(|s| s.to_string()).collect::<Vec<_>>() }, "checks": checks, "violation": violation }),
        certificates: certs,
        tables: vec![csv, sample_csv],
    })
}

fn shred(p: &ShredParams) -> anyhow::Result<Outcome> {
    let cells = decompose_grid(p.g, p.delta)?;
    let f = GridMap::new(p.g, p.map.clone())?;
    let tau = induce_tau(&f, &cells)?;
    let pm = perturb(&f, &cells, &tau, p.beta, p.delta_prime, &p.perturb)?;
    let report = verify_shredding(&pm, p.epsilon)?;
    let mut certs = vec![
        Certificate::new("trapping", report.trapping_holds, format!("min margin {}", report.trapping_margin)),
        Certificate::new("coverage", report.coverage_holds, format!("{} > 1 − ε, exact", report.coverage_exact)),
        Certificate::new("diameter", report.diameter_holds, format!("{} < ε, exact", report.core_diameter)),
        Certificate::new(
            "reach",
            report.reach_holds,
            format!("every cell reaches its cycle within {} steps", report.max_reach),
        ),
    ];
    let mut cells_csv = Table::new(
        "cells.csv",
        &[
            ("cell", "index, row-major"),
            ("target", "τ(cell)"),
            ("ball_margin", "distance from g(ball) to the target core boundary"),
            ("budget", "continuity allowance between samples"),
            ("boundary_margin", "margin over sampled core boundary points"),
            ("margin", "certified trapping margin"),
        ],
    );
    for c in &report.certificates {
        cells_csv.push([
            c.cell.to_string(),
            c.target.to_string(),
            num(c.ball_margin),
            num(c.budget),
            num(c.boundary_margin),
            num(c.margin),
        ]);
    }
    let mut tables = vec![cells_csv];
    let mut bounds = Vec::new();
    if let Some(z) = &p.zero_entropy {
        let mut csv = Table::new(
            "zero_entropy.csv",
            &[
                ("t", "exponent"),
                ("size", "|I(n+k)|"),
                ("closed", "closed-form tail"),
                ("direct", "direct summation"),
                ("cover_sum", "Bowen cover sum"),
            ],
        );
        for &t in &z.t {
            let b = lambda_entropy_bound(&z.sizes, t, z.n, z.k)?;
            let rel = (b.closed - b.direct).abs() / b.closed.abs().max(b.direct.abs()).max(f64::MIN_POSITIVE);
            certs.push(Certificate::new(
                format!("tail_agreement_t{t}"),
                rel <= z.tolerance,
                format!("relative difference {rel}"),
            ));
            certs.push(Certificate::new(
                format!("tail_small_t{t}"),
                b.closed < z.threshold,
                format!("{} < {}", b.closed, z.threshold),
            ));
            csv.push([num(t), b.size.to_string(), num(b.closed), num(b.direct), num(b.cover_sum)]);
            bounds.push(b);
        }
        tables.push(csv);
    }
    Ok(Outcome { results: json!({ "report": report, "zero_entropy": bounds }), certificates: certs, tables })
}

fn sample_point<R: Rng>(sys: &AnySystem, horizon: usize, rng: &mut R) -> Point {
    match sys {
        AnySystem::Shift(sh) => Point::Symbolic(SymbolicPoint::truncated(sh.random_word(horizon, rng))),
        AnySystem::Interval(_) => Point::Real(rng.gen_range(f64::EPSILON..1.0)),
        AnySystem::Grid(_) => Point::Plane([rng.gen::<f64>(), rng.gen::<f64>()]),
    }
}

enum Point {
    Symbolic(SymbolicPoint),
    Real(f64),
    Plane([f64; 2]),
}

impl Point {
    fn describe(&self) -> String {
        match self {
            Point::Symbolic(_) => String::new(),
            Point::Real(x) => num(*x),
            Point::Plane([x, y]) => format!("{} {}", num(*x), num(*y)),
        }
    }
}

fn classify(p: &ClassifyParams, seed: u64) -> anyhow::Result<Outcome> {
    let sys = p.system.build()?;
    let mut cps = p.checkpoints.clone();
    cps.sort_unstable();
    cps.dedup();
    let horizon = cps.last().copied().unwrap_or(0) + 64;
    let rows: Vec<anyhow::Result<_>> = (0..p.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let x = sample_point(&sys, horizon, &mut rng);
            let sigs = match (&sys, &x) {
                (AnySystem::Shift(s), Point::Symbolic(x)) => orbit_signatures(s, x, &cps, p.truncation)?,
                (AnySystem::Interval(f), Point::Real(x)) => orbit_signatures(f, x, &cps, p.truncation)?,
                (AnySystem::Grid(g), Point::Plane(x)) => orbit_signatures(g, x, &cps, p.truncation)?,
                _ => unreachable!("points are sampled per kind"),
            };
            let c = classify_signatures(&cps, &sigs, p.radius).with_context(|| format!("sample {i}"))?;
            Ok((x.describe(), sigs, c))
        })
        .collect();
    let mut verdicts = Vec::new();
    let mut table = Table::new(
        "classify.csv",
        &[
            ("sample", "index"),
            ("point", "coordinates; empty for symbolic points"),
            ("verdict", "classification"),
            ("limit_measures", "clusters among late checkpoints"),
            ("witness_rho", "largest ρ_J between late checkpoints"),
            ("tail", "tail bound of ρ_J"),
        ],
    );
    let mut cols: Vec<(String, String)> = vec![("sample".into(), "index".into()), ("n".into(), "checkpoint".into())];
    cols.extend((1..=p.truncation).map(|j| (format!("phi_{j}"), format!("∫φ_{j} dE_n"))));
    let mut sig_table = Table { name: "signatures.csv".into(), columns: cols, rows: vec![] };
    let mut counts = [0usize; 3];
    for (i, row) in rows.into_iter().enumerate() {
        let (desc, sigs, c) = row?;
        counts[match c.verdict {
            Verdict::QuasiRegularCandidate => 0,
            Verdict::IrregularCandidate => 1,
            Verdict::Inconclusive => 2,
        }] += 1;
        table.push([
            i.to_string(),
            desc,
            serde_json::to_value(c.verdict)?.as_str().unwrap_or_default().to_string(),
            c.limit_set.representatives.len().to_string(),
            num(c.witness.2.value),
            num(c.witness.2.tail_bound),
        ]);
        for (n, s) in cps.iter().zip(&sigs) {
            let mut r = vec![i.to_string(), n.to_string()];
            r.extend(s.means.iter().map(|m| num(*m)));
            sig_table.push(r);
        }
        verdicts.push(c.verdict);
    }
    let mut certs = Vec::new();
    if let Some(e) = p.expect {
        let off = verdicts.iter().filter(|&&v| v != e).count();
        certs.push(Certificate::new(
            "expected_verdict",
            off == 0,
            format!("{off} of {} samples differ", verdicts.len()),
        ));
    }
    Ok(Outcome {
        results: json!({
            "checkpoints": cps,
            "quasi_regular": counts[0],
            "irregular": counts[1],
            "inconclusive": counts[2],
            "verdicts": verdicts,
        }),
        certificates: certs,
        tables: vec![table, sig_table],
    })
}
