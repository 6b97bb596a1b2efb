use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn shadowlab(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_shadowlab"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("SHADOWLAB_THREADS", t),
        None => cmd.env_remove("SHADOWLAB_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, v.to_string()).unwrap();
    p
}

fn run_cmd(command: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![command, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    shadowlab(&args, None)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn entropy_run_writes_report_tables_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "e.json",
        &json!({"command":"entropy","system":{"kind":"sft","k":2,"forbidden":["11"]},"n_max":32}),
    );
    let out = tmp.path().join("e");
    let o = run_cmd("entropy", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&out);
    let last = r["results"]["rows"][31]["log_count"].as_f64().unwrap() / 32.0;
    assert!((last - 0.4812).abs() < 0.01, "{last}");
    assert_eq!(r["version"], json!(env!("CARGO_PKG_VERSION")));
    assert_eq!(r["config"]["n_max"], json!(32));
    let csv = fs::read_to_string(out.join("entropy.csv")).unwrap();
    assert!(csv.starts_with("n,count,log_count,rate\n"));
    assert_eq!(csv.lines().count(), 33);
    let manifest: Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest[0]["file"], json!("entropy.csv"));
    assert_eq!(manifest[0]["rows"], json!(32));
    let names: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 3, "no temporary files left: {names:?}");

    let rp = shadowlab(&["replay", out.join("report.json").to_str().unwrap()], None);
    assert_eq!(rp.status.code(), Some(0), "{}", stderr(&rp));
    assert!(String::from_utf8_lossy(&rp.stdout).contains("identical"));
}

#[test]
fn malformed_configs_are_usage_errors_with_pointers() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let bad = write_config(tmp.path(), "b.json", &json!({"command":"proximal","m":2,"gamma":"half","seed":1}));
    let o = run_cmd("proximal", &bad, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`gamma`"), "{}", stderr(&o));

    let unseeded = write_config(tmp.path(), "u.json", &json!({"command":"proximal","m":2,"gamma":0.5}));
    let o = run_cmd("proximal", &unseeded, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`seed`"), "{}", stderr(&o));

    let o = run_cmd("shred", &unseeded, &out, &[]);
    assert_eq!(o.status.code(), Some(2), "command and config must agree");
    let o = shadowlab(&["entropy"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn failed_checks_exit_nonzero_with_itemized_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "s.json",
        &json!({"command":"shred","g":4,"delta":0.03125,"map":{"translate":{"dx":0.3,"dy":0.0}},
                "delta_prime":0.015625,"epsilon":0.05}),
    );
    let out = tmp.path().join("s");
    let o = run_cmd("shred", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["passed"], json!(false));
    let failures: Vec<&str> = r["failures"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    assert!(failures.iter().any(|f| f.starts_with("coverage")), "{failures:?}");
    assert!(failures.iter().any(|f| f.starts_with("diameter")), "{failures:?}");
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL coverage"));
}

#[test]
fn documented_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        &json!({"command":"classify","system":{"kind":"interval_homeo","formula":"sqrt"},"samples":100,"seed":1}),
    );
    let out = tmp.path().join("c");
    assert_eq!(run_cmd("classify", &cfg, &out, &[]).status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"]["quasi_regular"], json!(100));

    let cfg = write_config(tmp.path(), "i.json", &json!({"command":"irregular","t":2,"λ":4,"L":12,"depth":5,"seed":7}));
    let out = tmp.path().join("i");
    let o = run_cmd("irregular", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let gap = report(&out)["results"]["report"]["birkhoff_gap"].as_f64().unwrap();
    assert!(gap.abs() >= 0.1, "{gap}");
    for f in ["checkpoints.csv", "birkhoff.csv", "moran.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "sh.json",
        &json!({"command":"shadow","system":{"kind":"full_shift","k":2},"levels":[2,5],"trials":50,"horizon":200,"seed":3}),
    );
    let mut csvs = Vec::new();
    for (i, t) in ["1", "3"].iter().enumerate() {
        let out = tmp.path().join(format!("run{i}"));
        let o = shadowlab(&["shadow", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], Some(t));
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        csvs.push(fs::read(out.join("shadow.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    let o = shadowlab(&["shadow", "--config", cfg.to_str().unwrap()], Some("zero"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn replay_flags_tampering_and_refuses_bad_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "p.json", &json!({"command":"proximal","m":2,"gamma":0.5,"samples":50}));
    let out = tmp.path().join("p");
    let o = run_cmd("proximal", &cfg, &out, &["--seed", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let path = out.join("report.json");
    let original = report(&out);
    assert_eq!(original["config"]["seed"], json!(5));

    let mut tampered = original.clone();
    tampered["config"]["seed"] = json!(6);
    fs::write(&path, tampered.to_string()).unwrap();
    let o = shadowlab(&["replay", path.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("mismatch"), "{}", stderr(&o));

    let mut stale = original.clone();
    stale["version"] = json!("0.0.0-old");
    fs::write(&path, stale.to_string()).unwrap();
    let o = shadowlab(&["replay", path.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("replay refused"), "{}", stderr(&o));

    let mut bare = original;
    bare.as_object_mut().unwrap().remove("config");
    fs::write(&path, bare.to_string()).unwrap();
    let o = shadowlab(&["replay", path.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no embedded config"), "{}", stderr(&o));
}

#[test]
fn horseshoe_deficit_is_reported_as_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "h.json", &json!({"command":"horseshoe","alpha":0.7,"seed":1}));
    let out = tmp.path().join("h");
    let o = run_cmd("horseshoe", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&out);
    assert!(r["failures"][0].as_str().unwrap().to_lowercase().contains("entropy"), "{}", r["failures"]);
}
