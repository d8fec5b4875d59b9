use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use pplc::core::analysis::{analyze, AnalysisConfig};
use pplc::core::frontend::pretty_target;
use pplc::core::inference::{run, Algorithm, Model};
use pplc::core::pipeline::{compile, transform, CpsMode, PipelineError};
use pplc::{
    analysis_report, bench, builtin_corpus, diagnostics_report, load_corpus, parse_config, write_samples, BenchOptions,
};

#[derive(Parser)]
#[command(
    name = "pplc",
    version,
    about = "Suspension analysis, selective CPS, and inference for a small probabilistic language"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the suspension analysis of a program as JSON.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        sources: Sources,
    },
    /// Print a program after CPS transformation.
    Transform {
        file: PathBuf,
        #[arg(long, default_value = "selective")]
        cps: CpsMode,
        #[command(flatten)]
        sources: Sources,
    },
    /// Run inference and write weighted samples as CSV.
    Run {
        file: PathBuf,
        #[arg(long, default_value = "lw")]
        inference: Algorithm,
        /// Samples, particles, or MCMC iterations.
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, env = "PPLC_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "selective")]
        cps: CpsMode,
        /// Sources to suspend at; defaults to what the algorithm needs.
        #[arg(long, value_parser = parse_config)]
        suspend: Option<AnalysisConfig>,
        /// Sample CSV path. Diagnostics go to the same path with a
        /// `.diagnostics.json` extension. Without it, samples go to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time every model, algorithm, and CPS mode and write records as CSV.
    Bench {
        /// Directory of `.ppl` models; the built-in corpus when omitted.
        corpus: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, env = "PPLC_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "lw,bpf,mcmc")]
        algorithms: Vec<Algorithm>,
        #[arg(long, value_delimiter = ',', default_value = "none,selective,full")]
        modes: Vec<CpsMode>,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Sources {
    /// Comma-separated suspension sources: assume, weight, or none.
    #[arg(long, default_value = "weight", value_parser = parse_config)]
    suspend: AnalysisConfig,
}

/// Failures mapped to exit codes: 1 for bad input or failed runs, 2 for
/// internal invariant violations.
enum Failure {
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Parse(_) => Failure::Input(e.into()),
            PipelineError::Analysis(_) | PipelineError::Cps(_) => Failure::Internal(e.into()),
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn sidecar(out: &Path) -> PathBuf {
    out.with_extension("diagnostics.json")
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Analyze { file, sources } => {
            let t = compile(&read(&file)?)?;
            let r = analyze(&t, sources.suspend).map_err(PipelineError::from)?;
            let json =
                serde_json::to_string_pretty(&analysis_report(&r, sources.suspend)).map_err(anyhow::Error::from)?;
            println!("{json}");
        }
        Command::Transform { file, cps, sources } => {
            let t = compile(&read(&file)?)?;
            print!("{}", pretty_target(&transform(&t, cps, sources.suspend)?));
        }
        Command::Run {
            file,
            inference,
            n,
            seed,
            cps,
            suspend,
            out,
        } => {
            let cfg = suspend.unwrap_or(inference.config());
            let model = Model::from_source(&read(&file)?, cps, cfg)?;
            let start = Instant::now();
            let result = run(inference, &model, n, seed).map_err(anyhow::Error::from)?;
            let wall = start.elapsed().as_secs_f64();
            let diagnostics = diagnostics_report(&result, inference, &model, seed, wall);
            match &out {
                Some(path) => {
                    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                    write_samples(BufWriter::new(f), &result).map_err(anyhow::Error::from)?;
                    let side = sidecar(path);
                    let json = serde_json::to_string_pretty(&diagnostics).map_err(anyhow::Error::from)?;
                    fs::write(&side, json + "\n").with_context(|| format!("writing {}", side.display()))?;
                }
                None => write_samples(io::stdout().lock(), &result).map_err(anyhow::Error::from)?,
            }
            let summary = format!(
                "{inference} cps={cps} n={} log_norm_const={} wall_time_s={wall:.6} continuation_allocs={} suspensions={}",
                result.samples.len(),
                result.log_norm_const.map_or("n/a".to_string(), |z| format!("{z:.6}")),
                result.diagnostics.counters.continuation_allocs,
                result.diagnostics.counters.suspensions,
            );
            if out.is_some() {
                println!("{summary}");
            } else {
                eprintln!("{summary}");
            }
        }
        Command::Bench {
            corpus,
            reps,
            n,
            seed,
            algorithms,
            modes,
            out,
        } => {
            let models = match &corpus {
                Some(dir) => load_corpus(dir)?,
                None => builtin_corpus(),
            };
            let opts = BenchOptions {
                algorithms,
                modes,
                n,
                reps,
                seed,
            };
            let report = bench(&models, &opts);
            for f in &report.failures {
                warn!("skipped {} / {} / {}: {}", f.model, f.algorithm, f.cps_mode, f.error);
            }
            info!("{} records", report.records.len());
            match &out {
                Some(path) => {
                    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                    report.write_csv(BufWriter::new(f)).map_err(anyhow::Error::from)?;
                }
                None => report.write_csv(io::stdout().lock()).map_err(anyhow::Error::from)?,
            }
        }
    }
    Ok(())
}
