//! Reports, sample files, and the benchmark harness behind the `pplc` binary.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context};
use serde::Serialize;
use serde_json::{json, Value};

use pplc_core::analysis::{AnalysisConfig, AnalysisResult};
use pplc_core::corpus;
use pplc_core::inference::{run, Algorithm, InferenceError, InferenceResult, Model};
use pplc_core::pipeline::{compile, CpsMode};

pub use pplc_core as core;

/// Parses a comma-separated list of suspension sources, e.g. `assume,weight`.
pub fn parse_config(s: &str) -> Result<AnalysisConfig, String> {
    let mut cfg = AnalysisConfig::NONE;
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part {
            "none" => {}
            "assume" => cfg.suspend_assume = true,
            "weight" => cfg.suspend_weight = true,
            other => {
                return Err(format!(
                    "unknown suspension source `{other}` (expected assume, weight, or none)"
                ))
            }
        }
    }
    Ok(cfg)
}

/// The JSON report of an analysis result. Labels render as `name#id`.
pub fn analysis_report(r: &AnalysisResult, cfg: AnalysisConfig) -> Value {
    let data: serde_json::Map<String, Value> = r
        .data
        .iter()
        .map(|(x, vals)| (x.label(), vals.iter().map(|v| Value::String(v.to_string())).collect()))
        .collect();
    json!({
        "suspend": r.suspend.iter().map(|x| x.label()).collect::<Vec<_>>(),
        "data": data,
        "config": {
            "suspend_assume": cfg.suspend_assume,
            "suspend_weight": cfg.suspend_weight,
        },
    })
}

/// Writes `sample,log_weight` rows.
pub fn write_samples<W: Write>(out: W, result: &InferenceResult) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sample", "log_weight"])?;
    for s in &result.samples {
        w.write_record([s.value.to_string(), format!("{:?}", s.log_weight)])?;
    }
    w.flush()?;
    Ok(())
}

/// Run diagnostics as JSON. `wall_time_s` covers inference only.
pub fn diagnostics_report(
    result: &InferenceResult,
    algorithm: Algorithm,
    model: &Model,
    seed: u64,
    wall_time_s: f64,
) -> Value {
    let d = &result.diagnostics;
    json!({
        "algorithm": algorithm.to_string(),
        "cps_mode": model.mode.to_string(),
        "config": {
            "suspend_assume": model.cfg.suspend_assume,
            "suspend_weight": model.cfg.suspend_weight,
        },
        "n": result.samples.len(),
        "seed": seed,
        "log_norm_const": result.log_norm_const,
        "posterior_mean": result.posterior_mean(),
        "continuation_allocs": d.counters.continuation_allocs,
        "suspensions": d.counters.suspensions,
        "resampling_steps": d.resampling_steps,
        "ess": d.ess,
        "acceptance_rate": d.acceptance_rate,
        "wall_time_s": wall_time_s,
    })
}

/// One timed inference run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub model: String,
    pub algorithm: String,
    pub cps_mode: String,
    pub n: usize,
    pub wall_time_s: f64,
    pub continuation_allocs: u64,
    pub suspensions: u64,
    /// Empty for algorithms without an estimate.
    pub log_norm_const: Option<f64>,
    pub seed: u64,
}

/// Times one run of `algorithm`, excluding compilation.
pub fn timed_run(
    name: &str,
    model: &Model,
    algorithm: Algorithm,
    n: usize,
    seed: u64,
) -> Result<(BenchRecord, InferenceResult), InferenceError> {
    let start = Instant::now();
    let result = run(algorithm, model, n, seed)?;
    let wall_time_s = start.elapsed().as_secs_f64().max(f64::MIN_POSITIVE);
    let record = BenchRecord {
        model: name.to_string(),
        algorithm: algorithm.to_string(),
        cps_mode: model.mode.to_string(),
        n,
        wall_time_s,
        continuation_allocs: result.diagnostics.counters.continuation_allocs,
        suspensions: result.diagnostics.counters.suspensions,
        log_norm_const: result.log_norm_const,
        seed,
    };
    Ok((record, result))
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub algorithms: Vec<Algorithm>,
    pub modes: Vec<CpsMode>,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            algorithms: Algorithm::ALL.to_vec(),
            modes: CpsMode::ALL.to_vec(),
            n: 1000,
            reps: 10,
            seed: 0,
        }
    }
}

/// A benchmark cell that could not run.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub model: String,
    pub algorithm: Algorithm,
    pub cps_mode: CpsMode,
    pub error: String,
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub records: Vec<BenchRecord>,
    pub failures: Vec<CellFailure>,
}

impl BenchReport {
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs every model × algorithm × CPS mode cell: one warmup run, then
/// `reps` timed repetitions. Failing cells are reported and skipped.
pub fn bench(models: &[(String, String)], opts: &BenchOptions) -> BenchReport {
    let mut report = BenchReport::default();
    for (name, src) in models {
        for &algorithm in &opts.algorithms {
            for &mode in &opts.modes {
                let fail = |error: String| CellFailure {
                    model: name.clone(),
                    algorithm,
                    cps_mode: mode,
                    error,
                };
                let model = match Model::from_source(src, mode, algorithm.config()) {
                    Ok(m) => m,
                    Err(e) => {
                        report.failures.push(fail(e.to_string()));
                        continue;
                    }
                };
                let run_once = || timed_run(name, &model, algorithm, opts.n, opts.seed).map(|(r, _)| r);
                let cell =
                    run_once().and_then(|_warmup| (0..opts.reps).map(|_| run_once()).collect::<Result<Vec<_>, _>>());
                match cell {
                    Ok(records) => report.records.extend(records),
                    Err(e) => report.failures.push(fail(e.to_string())),
                }
            }
        }
    }
    report
}

/// The embedded corpus as `(name, source)` pairs.
pub fn builtin_corpus() -> Vec<(String, String)> {
    corpus::ALL
        .iter()
        .map(|(n, s)| (n.to_string(), s.to_string()))
        .collect()
}

/// Every `*.ppl` file in `dir`, sorted by name, as `(file stem, source)`.
pub fn load_corpus(dir: &Path) -> anyhow::Result<Vec<(String, String)>> {
    let mut paths: Vec<_> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "ppl"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no .ppl files in {}", dir.display());
    }
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let src = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            compile(&src).with_context(|| format!("compiling {}", p.display()))?;
            Ok((name, src))
        })
        .collect()
}
