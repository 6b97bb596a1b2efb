//! The twelve acceptance criteria, run in sequence so each runtime is measured
//! alone. Every criterion prints one line to the real stdout.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use shadowlab::{replay, run, write_run, RunConfig, RunReport};
use shadowlab_core::constructions::{extract_horseshoe, proximal_subshift, HorseshoeParams};
use shadowlab_core::entropy::{moran_lower_certificate, separated_set, spanning_set, subshift_entropy, SearchMode};
use shadowlab_core::irregular::{
    build_irregular_point, moran_set_count, IrregularConfig, IrregularRun, LabelMode, Tag,
};
use shadowlab_core::measures::classify_point;
use shadowlab_core::shredding::{lambda_entropy_bound, IndexSizes};
use shadowlab_core::{
    BaseMap, DynamicalSystem, GridMap, IntervalHomeo, SftSpec, Shift, SymbolicPoint, TargetMeasure, Verdict,
};
use support::{empirical_estimates, samplers, EstimateRun};

struct Outcome {
    failures: Vec<String>,
    /// Reports whose replay belongs to the determinism criterion.
    reports: Vec<PathBuf>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { failures: Vec::new(), reports: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }
}

fn announce(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

fn criterion(
    results: &mut Vec<(usize, bool)>,
    id: usize,
    name: &str,
    budget: Option<Duration>,
    body: impl FnOnce() -> Outcome,
) -> Vec<PathBuf> {
    let start = Instant::now();
    let mut o = body();
    let took = start.elapsed();
    if let Some(b) = budget {
        o.check(took < b, || format!("runtime {took:.2?} exceeds {b:?}"));
    }
    let ok = o.failures.is_empty();
    let limit = budget.map(|b| format!(" (limit {b:?})")).unwrap_or_default();
    announce(&format!("criterion {id:>2} {name}: {} in {took:.2?}{limit}", if ok { "PASS" } else { "FAIL" }));
    for f in &o.failures {
        announce(&format!("    {f}"));
    }
    results.push((id, ok));
    o.reports
}

/// Runs a config through the CLI library and stores its report under `dir`.
fn cli_run(dir: &Path, name: &str, config: Value, o: &mut Outcome) -> RunReport {
    let cfg = RunConfig::from_json(&config.to_string()).expect("acceptance configs are valid");
    let r = run(&cfg);
    let path = write_run(&r, &dir.join(name)).expect("writable temp dir");
    o.reports.push(path);
    for f in &r.report.failures {
        o.failures.push(format!("{name}: {f}"));
    }
    r.report
}

fn cert<'a>(report: &'a RunReport, name: &str) -> Option<&'a shadowlab::Certificate> {
    report.certificates.iter().find(|c| c.name == name)
}

fn rational(s: &str) -> BigRational {
    s.parse().expect("exact rational")
}

fn entropy_exactness(dir: &Path) -> Outcome {
    let mut o = Outcome::new();
    for k in [2usize, 3, 5] {
        let t = subshift_entropy(&Shift::full(k).unwrap(), 40).unwrap();
        let target = (k as f64).ln();
        for r in &t.rows {
            let rate = r.log_count / r.n as f64;
            o.check((rate - target).abs() <= 1e-12, || format!("Σ_{k}, n={}: {rate} vs log {k}", r.n));
        }
    }
    let report = cli_run(
        dir,
        "entropy",
        json!({"command":"entropy","system":{"kind":"sft","k":2,"forbidden":["11"]},"n_max":32}),
        &mut o,
    );
    // |B_n| of the golden-mean shift is the Fibonacci number F_{n+2}.
    let (mut a, mut b) = (1u128, 2u128);
    for row in report.results["rows"].as_array().unwrap() {
        let n = row["n"].as_u64().unwrap();
        let got = row["exact"].as_u64().map(u128::from);
        let (fa, fb) = (b, a + b);
        o.check(got == Some(fa), || format!("golden mean n={n}: {got:?} words, oracle {fa}"));
        (a, b) = (fa, fb);
    }
    let est = report.results["estimate"].as_f64().unwrap();
    let golden = ((1.0 + 5f64.sqrt()) / 2.0).ln();
    o.check((est - golden).abs() <= 1e-2, || format!("golden-mean estimate {est} vs {golden}"));
    o
}

type Sandwich = Vec<(usize, usize, usize)>;

fn sandwich_instances() -> Sandwich {
    fn triple<S: DynamicalSystem>(sys: &S, pool: &[S::Point], n: usize, eps: f64) -> (usize, usize, usize) {
        let r = spanning_set(sys, pool, n, eps, SearchMode::Exhaustive).unwrap().len();
        let s = separated_set(sys, pool, n, eps, SearchMode::Exhaustive).unwrap().indices.len();
        let r2 = spanning_set(sys, pool, n, eps / 2.0, SearchMode::Exhaustive).unwrap().len();
        (r, s, r2)
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let shifts = [Shift::full(2).unwrap(), Shift::full(3).unwrap(), Shift::sft(&SftSpec::golden_mean()).unwrap()];
    let mut out = Vec::new();
    for i in 0..15 {
        let sh = &shifts[i % 3];
        let size = rng.gen_range(256..=4096);
        let pool: Vec<SymbolicPoint> =
            (0..size).map(|_| SymbolicPoint::truncated(sh.random_word(48, &mut rng))).collect();
        let n = rng.gen_range(1..10);
        let eps = [0.5, 0.25, 0.125, 0.3, 0.2][i % 5];
        out.push(triple(sh, &pool, n, eps));
    }
    let f = IntervalHomeo::sqrt();
    for _ in 0..10 {
        let size = rng.gen_range(12..=30);
        let pool: Vec<f64> = (0..size).map(|_| rng.gen_range(0.0..1.0)).collect();
        let (n, eps) = (rng.gen_range(1..5), rng.gen_range(0.05..0.4));
        out.push(triple(&f, &pool, n, eps));
    }
    out
}

fn sandwich(first: &mut Option<Sandwich>) -> Outcome {
    let mut o = Outcome::new();
    let all = sandwich_instances();
    o.check(all.len() >= 20, || format!("only {} instances", all.len()));
    for (i, &(r, s, r2)) in all.iter().enumerate() {
        o.check(r <= s && s <= r2, || format!("instance {i}: r={r}, s={s}, r(ε/2)={r2}"));
    }
    *first = Some(all);
    o
}

const ESTIMATE_INSTANCES: usize = 10_000;

fn estimate_runs() -> Vec<(&'static str, EstimateRun)> {
    let full = Shift::full(2).unwrap();
    let golden = Shift::sft(&SftSpec::golden_mean()).unwrap();
    let f = IntervalHomeo::sqrt();
    let g = GridMap::new(8, BaseMap::Contract { x: 0.3, y: 0.6, ratio: 0.7 }).unwrap();
    let sym = |sh: &Shift, seed| {
        empirical_estimates(
            sh,
            |r| samplers::shift_point(sh, r),
            |x, p, r| samplers::shift_neighbor(sh, x, p, r),
            ESTIMATE_INSTANCES,
            20,
            seed,
        )
    };
    vec![
        ("full shift", sym(&full, 31)),
        ("golden mean", sym(&golden, 32)),
        (
            "interval",
            empirical_estimates(
                &f,
                samplers::unit,
                |&x, _, r| samplers::unit_neighbor(x, r),
                ESTIMATE_INSTANCES,
                20,
                33,
            ),
        ),
        (
            "torus",
            empirical_estimates(
                &g,
                samplers::square,
                |&x, _, r| samplers::square_neighbor(x, r),
                ESTIMATE_INSTANCES,
                20,
                34,
            ),
        ),
    ]
}

fn estimate_suite(first: &mut Option<Vec<(usize, Vec<String>)>>) -> Outcome {
    let mut o = Outcome::new();
    let runs = estimate_runs();
    for (name, r) in &runs {
        o.check(r.instances.iter().all(|&n| n == ESTIMATE_INSTANCES), || format!("{name}: {:?}", r.instances));
        o.check(r.violations.is_empty(), || {
            format!("{name}: {} violations, first {:?}", r.violations.len(), r.violations.first())
        });
    }
    *first = Some(runs.into_iter().map(|(_, r)| (r.instances.iter().sum(), r.violations)).collect());
    o
}

fn shadowing(dir: &Path) -> Outcome {
    let mut o = Outcome::new();
    for (name, system) in [
        ("shadow_full", json!({"kind":"full_shift","k":2})),
        ("shadow_golden", json!({"kind":"sft","k":2,"forbidden":["11"]})),
    ] {
        let r = cli_run(
            dir,
            name,
            json!({"command":"shadow","system":system,"levels":[2,3,4,5,6,7,8],"trials":1000,"horizon":1000,"seed":4}),
            &mut o,
        );
        for l in r.results["levels"].as_array().unwrap() {
            let (m, shadowed, worst) =
                (l["m"].as_u64().unwrap(), l["shadowed"].as_u64().unwrap(), l["max_achieved"].as_f64().unwrap());
            o.check(shadowed == 1000, || format!("{name} m={m}: {shadowed}/1000 shadowed"));
            o.check(worst <= (-(m as f64)).exp2(), || format!("{name} m={m}: achieved {worst}"));
        }
    }
    o
}

fn irregular_config() -> Value {
    json!({"command":"irregular","t":2,"λ":4,"L":12,"J":20,"depth":5,"seed":7})
}

type IrregularPair = Option<(RunReport, IrregularRun)>;

fn irregular(dir: &Path, keep: &mut IrregularPair) -> Outcome {
    let mut o = Outcome::new();
    let r = cli_run(dir, "irregular", irregular_config(), &mut o);
    let gap = r.results["report"]["birkhoff_gap"].as_f64().unwrap_or(0.0);
    o.check(gap.abs() >= 0.1, || format!("Birkhoff gap {gap}"));
    // Independent classification of the traced point.
    let sh = Shift::full(2).unwrap();
    let cfg = IrregularConfig { labels: LabelMode::Random { seed: 7 }, ..Default::default() };
    let run = build_irregular_point(&sh, &cfg).unwrap();
    let cps: Vec<usize> = run.schedule.checkpoints().iter().map(|&c| c as usize).collect();
    let c = classify_point(&sh, &run.certificate.point, &cps, 20, 0.02).unwrap();
    o.check(c.verdict == Verdict::IrregularCandidate, || format!("classify_point gave {:?}", c.verdict));
    let prefix = run.certificate.point.prefix(cps[cps.len() - 1]).unwrap();
    let avg = |n: usize| prefix[..n].iter().map(|&s| s as u64).sum::<u64>() as f64 / n as f64;
    let direct = avg(cps[cps.len() - 1]) - avg(cps[cps.len() - 2]);
    o.check((direct.abs() - gap.abs()).abs() < 1e-12, || format!("recomputed gap {direct} vs reported {gap}"));
    *keep = Some((r, run));
    o
}

fn moran(keep: &IrregularPair) -> Outcome {
    let mut o = Outcome::new();
    let Some((r, run)) = keep else {
        o.failures.push("irregular run missing".into());
        return o;
    };
    let tree = moran_set_count(&run.schedule, &run.bank, 20).unwrap();
    let gamma = run.bank.mu_words.len();
    let mut product = BigUint::from(1u8);
    for (m, c) in tree.counts.iter().enumerate() {
        if run.schedule.tags[m] == Tag::Mu {
            product *= gamma;
        }
        o.check(*c == product, || format!("|W_{}| = {c}, product {product}", m + 1));
    }
    let h = 0.8 * (2.0 / 3.0) * (gamma as f64).ln() / 12.0;
    let c = moran_lower_certificate(&tree.counts, &tree.lengths, h).unwrap();
    o.check(c.holds, || format!("margin {} at level {}", c.min_margin, c.worst_index + 1));
    o.check(r.results["moran"]["tree"] == serde_json::to_value(&tree).unwrap(), || "CLI tree differs".into());
    o.check(r.results["moran"]["rate"].as_f64() == Some(h), || format!("CLI rate {}", r.results["moran"]["rate"]));
    o
}

fn dichotomy(dir: &Path, irregular: &IrregularPair) -> Outcome {
    let mut o = Outcome::new();
    let r = cli_run(
        dir,
        "classify_sqrt",
        json!({"command":"classify","system":{"kind":"interval_homeo","formula":"sqrt"},"samples":1000,
               "checkpoints":[100,1000,10000,100000],"expect":"quasi-regular-candidate","seed":1}),
        &mut o,
    );
    o.check(r.results["irregular"] == json!(0), || format!("{} irregular candidates", r.results["irregular"]));
    let verdict = irregular.as_ref().map(|(r, _)| r.results["report"]["verdict"].clone());
    o.check(verdict == Some(json!("irregular-candidate")), || format!("full shift verdict {verdict:?}"));
    o
}

fn horseshoe(dir: &Path) -> Outcome {
    let mut o = Outcome::new();
    let r = cli_run(dir, "horseshoe", json!({"command":"horseshoe","alpha":0.3,"checks":1000,"seed":8}), &mut o);
    let sh = Shift::full(2).unwrap();
    let params = HorseshoeParams { seed: 8, checks: 1000, ..Default::default() };
    let hs = extract_horseshoe(&sh, &TargetMeasure::uniform_bernoulli(2), 0.3, 0.05, &params).unwrap().with_index();
    o.check(r.results["r"] == json!(hs.r) && r.results["k"] == json!(hs.k), || "CLI and library disagree".into());
    let rate = ((hs.r - 1) as f64).ln() / hs.k as f64;
    o.check(rate >= 0.3, || format!("log(r−1)/k = {rate}"));
    let mut rng = ChaCha8Rng::seed_from_u64(80);
    let mut trips = 0;
    for _ in 0..1000 {
        let pre: Vec<usize> = (0..rng.gen_range(0..4)).map(|_| rng.gen_range(0..hs.r)).collect();
        let per: Vec<usize> = (0..rng.gen_range(1..5)).map(|_| rng.gen_range(0..hs.r)).collect();
        let x = hs.section(&pre, &per).unwrap();
        let blocks = pre.len() + 2 * per.len() + 1;
        let code: Vec<usize> =
            (0..blocks + 1).map(|i| if i < pre.len() { pre[i] } else { per[(i - pre.len()) % per.len()] }).collect();
        let fx = sh.iterate(&x, hs.k).unwrap();
        if hs.project(&x, blocks).unwrap() == code[..blocks] && hs.project(&fx, blocks).unwrap() == code[1..] {
            trips += 1;
        }
    }
    o.check(trips == 1000, || format!("{trips}/1000 exact round trips"));
    o
}

fn proximal(dir: &Path) -> Outcome {
    let mut o = Outcome::new();
    let r = cli_run(dir, "proximal", json!({"command":"proximal","m":2,"gamma":0.5,"samples":1000,"seed":9}), &mut o);
    let spec = proximal_subshift(2, 0.5).unwrap();
    let level1 = &r.results["checks"][0];
    let free = level1["free"].as_u64().unwrap() as i64;
    let (s1, k1) = (spec.s[0] as i64, spec.k[0] as i64);
    // (1/s₁) log 2^free ≥ (1 − k₁/s₁) log 2  ⇔  free ≥ s₁ − k₁
    o.check(free >= s1 - k1, || format!("free {free} < s₁ − k₁ = {}", s1 - k1));
    let brute = (0..1u32 << s1)
        .filter(|bits| {
            let w: Vec<u16> = (0..s1).map(|i| ((bits >> i) & 1) as u16).collect();
            spec.is_admissible(&w).unwrap()
        })
        .count() as u64;
    o.check(brute >= 1 << free, || format!("{brute} admissible words of length {s1}, below 2^{free}"));
    o.check(cert(&r, "minimal_subset").is_some_and(|c| c.holds), || "minimal subset check".into());
    o
}

fn shredding(dir: &Path) -> Outcome {
    let mut o = Outcome::new();
    let r = cli_run(
        dir,
        "shred",
        json!({"command":"shred","g":8,"delta":0.015625,"map":{"translate":{"dx":0.25,"dy":0.125}},
               "delta_prime":0.015625,"epsilon":0.5,
               "zero_entropy":{"t":[0.01,0.1,1.0],"n":5000,"k":5000}}),
        &mut o,
    );
    let rep = &r.results["report"];
    let cov = rational(rep["coverage_exact"].as_str().unwrap_or("0"));
    o.check(cov == rational("9/16"), || format!("coverage {cov}"));
    o.check(cov > rational("1/2"), || format!("coverage {cov} ≤ 1/2"));
    // (√2 · 3/32)² = 18/1024 < 1/4
    let side = rational("1/8") - rational("2/64");
    let diam_sq = rational("2") * &side * &side;
    o.check(side == rational("3/32") && diam_sq < rational("1/4"), || format!("core side {side}"));
    o.check(rep["diameter_holds"] == json!(true), || "diameter certificate".into());
    for c in rep["certificates"].as_array().unwrap() {
        let m = c["margin"].as_f64().unwrap_or(-1.0);
        o.check(m > 0.0, || format!("cell {}: margin {m}", c["cell"]));
    }
    o.check(rep["certificates"].as_array().unwrap().len() == 64, || "64 cells".into());
    o
}

fn zero_entropy() -> Outcome {
    let mut o = Outcome::new();
    for t in [0.01, 0.1, 1.0] {
        let mut prev = f64::INFINITY;
        for s in [10u64, 100, 1000, 10_000] {
            let b = lambda_entropy_bound(&IndexSizes::Identity, t, s / 2, s - s / 2).unwrap();
            let diff = (b.closed - b.direct).abs();
            o.check(diff <= 1e-9 * b.closed, || format!("t={t}, S={s}: closed {} vs direct {}", b.closed, b.direct));
            o.check(b.closed <= prev, || format!("t={t}: bound grows at S={s}"));
            prev = b.closed;
            if s == 10_000 {
                o.check(b.closed < 1e-6, || format!("t={t}: {} at n+k = 10⁴", b.closed));
            }
        }
    }
    o
}

fn determinism(
    reports: &[PathBuf],
    sandwich: &Option<Sandwich>,
    estimates: &Option<Vec<(usize, Vec<String>)>>,
) -> Outcome {
    let mut o = Outcome::new();
    for p in reports {
        match replay(p) {
            Ok(r) => o.check(r.identical(), || format!("{}: {:?}", p.display(), r.mismatches)),
            Err(e) => o.failures.push(format!("{}: {e}", p.display())),
        }
    }
    o.check(sandwich.as_ref() == Some(&sandwich_instances()), || "sandwich rerun differs".into());
    let again: Vec<(usize, Vec<String>)> =
        estimate_runs().into_iter().map(|(_, r)| (r.instances.iter().sum(), r.violations)).collect();
    o.check(estimates.as_ref() == Some(&again), || "estimate suite rerun differs".into());
    o
}

#[test]
fn acceptance() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let secs = Duration::from_secs;
    let mut results = Vec::new();
    let mut reports = Vec::new();
    let (mut sw, mut estimates, mut irr) = (None, None, None);

    reports.extend(criterion(&mut results, 1, "subshift entropy", Some(secs(5)), || entropy_exactness(d)));
    reports.extend(criterion(&mut results, 2, "separated/spanning sandwich", Some(secs(60)), || sandwich(&mut sw)));
    reports.extend(criterion(&mut results, 3, "empirical-measure estimates", Some(secs(120)), || {
        estimate_suite(&mut estimates)
    }));
    reports.extend(criterion(&mut results, 4, "shadowing exactness", Some(secs(30)), || shadowing(d)));
    reports.extend(criterion(&mut results, 5, "irregular divergence", Some(secs(60)), || irregular(d, &mut irr)));
    reports.extend(criterion(&mut results, 6, "Moran counting", Some(secs(10)), || moran(&irr)));
    reports.extend(criterion(&mut results, 7, "dichotomy", Some(secs(60)), || dichotomy(d, &irr)));
    reports.extend(criterion(&mut results, 8, "horseshoe", Some(secs(30)), || horseshoe(d)));
    reports.extend(criterion(&mut results, 9, "proximal subshift", Some(secs(30)), || proximal(d)));
    reports.extend(criterion(&mut results, 10, "shredding", Some(secs(30)), || shredding(d)));
    reports.extend(criterion(&mut results, 11, "zero-entropy bound", Some(secs(5)), zero_entropy));
    criterion(&mut results, 12, "determinism", None, || determinism(&reports, &sw, &estimates));

    let failed: Vec<usize> = results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}
