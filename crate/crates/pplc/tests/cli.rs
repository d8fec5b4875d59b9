use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use pplc::core::analysis::AnalysisConfig;
use pplc::core::corpus;
use pplc::core::frontend::parse;
use pplc::core::inference::{Algorithm, Model};
use pplc::core::interp::eval_sampling;
use pplc::core::kernel::alpha_eq;
use pplc::core::pipeline::{compile, CpsMode};
use pplc::{bench, timed_run, BenchOptions};

fn corpus_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/corpus")
        .join(format!("{name}.ppl"))
}

fn pplc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pplc"))
        .args(args)
        .env_remove("PPLC_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn suspend_set(json: &str) -> BTreeSet<String> {
    let v: Value = serde_json::from_str(json).unwrap();
    v["suspend"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s.as_str().unwrap().to_string())
        .collect()
}

fn coin() -> String {
    corpus_file("coin").to_string_lossy().into_owned()
}

#[test]
fn analyze_coin_weight_only() {
    let out = stdout(&pplc(&["analyze", &coin(), "--suspend", "weight"]));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["config"]["suspend_weight"], Value::Bool(true));
    assert_eq!(v["config"]["suspend_assume"], Value::Bool(false));
    let suspend = suspend_set(&out);
    assert_eq!(suspend.len(), 5, "{suspend:?}");
    assert!(suspend.iter().any(|l| l.starts_with("obs#")));
    let iter = v["data"]
        .as_object()
        .unwrap()
        .iter()
        .find(|(k, _)| k.starts_with("iter#"))
        .unwrap()
        .1;
    assert_eq!(iter.as_array().unwrap().len(), 1);
    assert!(iter[0].as_str().unwrap().starts_with("lam obs#"));
}

#[test]
fn analyze_pure_program_suspends_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pure.ppl");
    fs::write(&path, "let f = lam x. x * 2 in f 21").unwrap();
    let out = stdout(&pplc(&["analyze", path.to_str().unwrap()]));
    assert!(suspend_set(&out).is_empty());
}

#[test]
fn analyze_more_sources_suspend_more() {
    let weight = suspend_set(&stdout(&pplc(&["analyze", &coin(), "--suspend", "weight"])));
    let both = suspend_set(&stdout(&pplc(&["analyze", &coin(), "--suspend", "assume,weight"])));
    assert!(weight.is_subset(&both));
    assert!(weight.len() < both.len());
}

#[test]
fn transform_markers() {
    let sel = stdout(&pplc(&["transform", &coin(), "--cps", "selective"]));
    assert_eq!(sel.matches("Sus_weight").count(), 1, "{sel}");
    assert!(!sel.contains("Sus_assume"));
    let none = stdout(&pplc(&["transform", &coin(), "--cps", "none"]));
    assert!(!none.contains("Sus_"), "{none}");
    let full = stdout(&pplc(&["transform", &coin(), "--cps", "full"]));
    assert!(full.contains("Sus_weight") && full.contains("Sus_assume"), "{full}");
}

#[test]
fn untransformed_output_reparses_to_the_same_program() {
    let none = stdout(&pplc(&["transform", &coin(), "--cps", "none"]));
    let direct = compile(corpus::COIN).unwrap();
    assert!(alpha_eq(&parse(&none).unwrap(), &direct.to_source()), "{none}");
}

#[test]
fn run_is_deterministic_given_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let files: Vec<PathBuf> = (0..2).map(|i| dir.path().join(format!("s{i}.csv"))).collect();
    for f in &files {
        stdout(&pplc(&[
            "run",
            &coin(),
            "--inference",
            "lw",
            "--n",
            "1000",
            "--seed",
            "11",
            "--out",
            f.to_str().unwrap(),
        ]));
    }
    let a = fs::read(&files[0]).unwrap();
    assert_eq!(a, fs::read(&files[1]).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("sample,log_weight\n"));
    assert_eq!(text.lines().count(), 1001);
    let side: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("s0.diagnostics.json")).unwrap()).unwrap();
    assert_eq!(side["n"], Value::from(1000));
    assert_eq!(side["seed"], Value::from(11));
}

#[test]
fn seed_defaults_to_the_environment() {
    let run = |seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_pplc"));
        cmd.args(["run", &coin(), "--n", "50"]).env_remove("PPLC_SEED");
        if let Some(s) = seed {
            cmd.env("PPLC_SEED", s);
        }
        stdout(&cmd.output().unwrap())
    };
    assert_eq!(run(Some("5")), run(Some("5")));
    assert_ne!(run(Some("5")), run(Some("6")));
    assert_eq!(run(None), stdout(&pplc(&["run", &coin(), "--n", "50", "--seed", "0"])));
}

fn read_samples(path: &Path) -> Vec<(f64, f64)> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].parse().unwrap(), rec[1].parse().unwrap())
        })
        .collect()
}

#[test]
fn bpf_summary_reports_log_evidence() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bpf.csv");
    let summary = stdout(&pplc(&[
        "run",
        &coin(),
        "--inference",
        "bpf",
        "--n",
        "10000",
        "--seed",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]));
    let z: f64 = summary
        .split_whitespace()
        .find_map(|f| f.strip_prefix("log_norm_const="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((z - (2.0f64 / 35.0).ln()).abs() < 0.05, "{summary}");
    assert_eq!(read_samples(&out).len(), 10_000);
}

#[test]
fn lw_geometric_mean_is_inverse_success_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("geom.csv");
    let file = corpus_file("geometric");
    stdout(&pplc(&[
        "run",
        file.to_str().unwrap(),
        "--n",
        "20000",
        "--seed",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]));
    let samples = read_samples(&out);
    let (num, den) = samples
        .iter()
        .fold((0.0, 0.0), |(n, d), &(x, lw)| (n + x * lw.exp(), d + lw.exp()));
    let mean = num / den;
    // the success count has standard deviation sqrt(0.7) / 0.3
    assert!((mean - 1.0 / 0.3).abs() < 0.1, "{mean}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.ppl");
    fs::write(&bad, "let x = in x").unwrap();
    assert_eq!(pplc(&["analyze", bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(pplc(&["analyze", "/nonexistent/model.ppl"]).status.code(), Some(1));
    assert_eq!(pplc(&["transform", &coin(), "--cps", "partial"]).status.code(), Some(2));
    assert_eq!(pplc(&["frobnicate"]).status.code(), Some(2));
    let unsupported = pplc(&["run", &coin(), "--inference", "bpf", "--cps", "none"]);
    assert_eq!(unsupported.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unsupported.stderr).contains("bpf"));
}

#[test]
fn bench_cli_writes_records() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(corpus_file("coin"), dir.path().join("coin.ppl")).unwrap();
    let out = dir.path().join("bench.csv");
    stdout(&pplc(&[
        "bench",
        dir.path().to_str().unwrap(),
        "--reps",
        "2",
        "--n",
        "50",
        "--algorithms",
        "lw",
        "--out",
        out.to_str().unwrap(),
    ]));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("model,algorithm,cps_mode,n,wall_time_s,continuation_allocs,suspensions,log_norm_const,seed")
    );
    assert_eq!(lines.count(), 3 * 2);
}

#[test]
fn bench_counters_order_cps_modes() {
    let models = vec![("coin".to_string(), corpus::COIN.to_string())];
    let opts = BenchOptions {
        algorithms: vec![Algorithm::Lw],
        n: 100,
        reps: 1,
        ..BenchOptions::default()
    };
    let report = bench(&models, &opts);
    assert!(report.failures.is_empty());
    let allocs = |mode: &str| {
        report
            .records
            .iter()
            .find(|r| r.cps_mode == mode)
            .unwrap()
            .continuation_allocs
    };
    let sus = |mode: &str| report.records.iter().find(|r| r.cps_mode == mode).unwrap().suspensions;
    assert_eq!(allocs("none"), 0);
    assert_eq!(sus("none"), 0);
    assert!(allocs("selective") < allocs("full"));
    assert!(sus("selective") <= sus("full"));
}

#[test]
fn bpf_suspensions_match_reference_weight_count() {
    let anf = compile(corpus::COIN).unwrap();
    let mut rng = pplc::core::inference::stream_rng(0, 0);
    let reference = eval_sampling(&anf, &mut rng, AnalysisConfig::WEIGHT).unwrap();
    let firings = reference.tally.weight_args.len() as u64;
    assert!(reference.suspended && firings == 4);
    let n = 200;
    for mode in [CpsMode::Selective, CpsMode::Full] {
        let model = Model::new(anf.clone(), mode, AnalysisConfig::WEIGHT).unwrap();
        let (record, _) = timed_run("coin", &model, Algorithm::Bpf, n, 1).unwrap();
        let assumes = if mode == CpsMode::Full { 1 } else { 0 };
        assert_eq!(record.suspensions, n as u64 * (firings + assumes), "{mode}");
    }
}
