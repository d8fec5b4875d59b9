//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use pplc::core::analysis::{analyze, generate_constraints, AbstractValue, AnalysisConfig};
use pplc::core::corpus;
use pplc::core::cps::{selective_cps, TargetTerm, Vars};
use pplc::core::frontend::{AnfBinding, AnfTerm};
use pplc::core::generate::random_program;
use pplc::core::inference::{run_bpf, run_lw, run_mcmc, stream_rng, McmcOptions, Model};
use pplc::core::interp::{drive, eval_sampling, Counters, Replay, Sampler, SusEvent};
use pplc::core::kernel::{Ident, Intrinsic};
use pplc::core::pipeline::{compile, transform, CpsMode};

type Check = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn ms(d: Duration) -> String {
    format!("{:.3} ms", d.as_secs_f64() * 1e3)
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Beta(2, 2) prior density times the likelihood of true, true, false, true.
fn coin_joint(x: f64) -> f64 {
    6.0 * x * (1.0 - x) * x.powi(3) * (1.0 - x)
}

/// Evidence and posterior mean of the coin model by quadrature.
fn coin_oracle() -> (f64, f64) {
    let z = simpson(coin_joint, 0.0, 1.0, 10_000);
    (z, simpson(|x| x * coin_joint(x), 0.0, 1.0, 10_000) / z)
}

fn labels_where(t: &AnfTerm, pred: impl Fn(&AnfBinding) -> bool) -> Vec<Ident> {
    let mut out = Vec::new();
    t.visit(&mut |s| {
        if let AnfTerm::Let(x, b, _) = s {
            if pred(b) {
                out.push(x.clone());
            }
        }
    });
    out
}

fn golden_analysis() -> Outcome {
    let t = compile(corpus::COIN).unwrap();
    let (iter, obs, body) = t
        .bindings()
        .find_map(|(x, b)| match b {
            AnfBinding::Lam {
                param,
                body,
                recursive: true,
            } => Some((x.clone(), param.clone(), (**body).clone())),
            _ => None,
        })
        .unwrap();
    let weight = labels_where(&t, |b| matches!(b, AnfBinding::Weight(_)));
    let cond = labels_where(&t, |b| matches!(b, AnfBinding::If(..)));
    let inner = labels_where(&body, |b| matches!(b, AnfBinding::App(f, _) if *f == iter));
    let outer: Vec<Ident> = t
        .bindings()
        .filter(|(_, b)| matches!(b, AnfBinding::App(f, _) if *f == iter))
        .map(|(x, _)| x.clone())
        .collect();
    if weight.len() != 1 || cond.len() != 1 || inner.len() != 1 || outer.len() != 1 {
        return outcome(false, "coin model does not have the expected shape");
    }
    let expected: BTreeSet<Ident> = [
        obs.clone(),
        weight[0].clone(),
        cond[0].clone(),
        inner[0].clone(),
        outer[0].clone(),
    ]
    .into();
    let expected_data: BTreeSet<AbstractValue> = [AbstractValue::Lam {
        param: obs,
        ret: cond[0].clone(),
    }]
    .into();
    let mut times = Vec::new();
    let mut result = None;
    for _ in 0..50 {
        let start = Instant::now();
        let r = analyze(&t, AnalysisConfig::WEIGHT).unwrap();
        times.push(start.elapsed());
        result = Some(r);
    }
    times.sort();
    let median = times[times.len() / 2];
    let r = result.unwrap();
    let exact = r.suspend == expected && r.data.get(&iter) == Some(&expected_data);
    let fast = median < Duration::from_millis(1);
    let labels: Vec<String> = r.suspend.iter().map(Ident::label).collect();
    outcome(
        exact && fast,
        format!(
            "suspend = {{{}}}, data(iter) exact: {exact}, median {}",
            labels.join(", "),
            ms(median)
        ),
    )
}

fn lemma_validator() -> Outcome {
    let mut checked = 0;
    let mut violated = 0;
    for (_, src) in corpus::ALL {
        let t = compile(src).unwrap();
        for cfg in [AnalysisConfig::WEIGHT, AnalysisConfig::ASSUME, AnalysisConfig::BOTH] {
            let cs = generate_constraints(&t, cfg);
            let r = analyze(&t, cfg).unwrap();
            checked += cs.len();
            violated += r.violations(&cs).len();
        }
    }
    outcome(
        violated == 0,
        format!("{checked} constraints checked, {violated} violated"),
    )
}

fn soundness_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = stream_rng(2024, 0);
    let (mut runs, mut suspended, mut escapes) = (0, 0, 0);
    for p in 0..500u64 {
        let src = random_program(&mut rng, 4);
        let t = compile(&src).unwrap();
        for cfg in [AnalysisConfig::WEIGHT, AnalysisConfig::ASSUME, AnalysisConfig::BOTH] {
            let r = analyze(&t, cfg).unwrap();
            for s in 0..20u64 {
                let out = eval_sampling(&t, &mut stream_rng(s, p), cfg).unwrap();
                runs += 1;
                suspended += usize::from(out.suspended);
                escapes += out.suspension_log.difference(&r.suspend).count();
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        escapes == 0 && elapsed < Duration::from_secs(60),
        format!(
            "{runs} runs ({suspended} suspended), {escapes} escaping labels, {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn cps_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut mismatches = 0;
    let mut runs = 0;
    for (_, src) in corpus::ALL {
        let t = compile(src).unwrap();
        let target = transform(&t, CpsMode::Selective, AnalysisConfig::WEIGHT).unwrap();
        let mut rng = stream_rng(99, 0);
        for _ in 0..100 {
            let reference = eval_sampling(&t, &mut rng, AnalysisConfig::WEIGHT).unwrap();
            let mut fx = Replay::new(&reference.tally.trace);
            let out = drive(&target, &mut fx, &mut Counters::default()).unwrap();
            runs += 1;
            let err = rel_err(fx.tally.log_weight(), reference.log_weight);
            let value_err = match (out.value.as_const(), reference.value.as_const()) {
                (Some(Intrinsic::Real(a)), Some(Intrinsic::Real(b))) => rel_err(*a, *b),
                (a, b) if a == b => 0.0,
                _ => f64::INFINITY,
            };
            worst = worst.max(err).max(value_err);
            mismatches += usize::from(err >= 1e-12 || value_err >= 1e-12);
        }
    }
    outcome(
        mismatches == 0,
        format!("{runs} shared traces, worst relative error {worst:.1e}"),
    )
}

fn weight_args(target: &TargetTerm, seed: u64) -> Vec<u64> {
    let mut rng = stream_rng(seed, 0);
    let mut fx = Sampler::new(&mut rng);
    let out = drive(target, &mut fx, &mut Counters::default()).unwrap();
    out.events
        .into_iter()
        .filter_map(|e| match e {
            SusEvent::Weight(_, w) => Some(w.to_bits()),
            SusEvent::Assume(_) => None,
        })
        .collect()
}

fn suspension_sequences() -> Outcome {
    let t = compile(corpus::COIN).unwrap();
    let sel = transform(&t, CpsMode::Selective, AnalysisConfig::WEIGHT).unwrap();
    let full = transform(&t, CpsMode::Full, AnalysisConfig::BOTH).unwrap();
    let mut events = 0;
    let mut differing = 0;
    for seed in 0..100 {
        let (a, b) = (weight_args(&sel, seed), weight_args(&full, seed));
        events += a.len();
        differing += usize::from(a != b || a.is_empty());
    }
    outcome(
        differing == 0,
        format!("100 seeds, {events} weight suspensions, {differing} differing sequences"),
    )
}

fn posterior_correctness() -> Outcome {
    let (_, oracle_mean) = coin_oracle();
    let mut details = vec![format!("oracle mean {oracle_mean:.6}")];
    let mut pass = (oracle_mean - 0.625).abs() < 1e-9;
    let lw_model = Model::from_source(corpus::COIN, CpsMode::Selective, AnalysisConfig::WEIGHT).unwrap();
    let start = Instant::now();
    let lw = run_lw(&lw_model, 100_000, 1).unwrap().posterior_mean().unwrap();
    let lw_time = start.elapsed();
    pass &= (lw - 0.625).abs() < 0.01 && lw_time < Duration::from_secs(30);
    details.push(format!("LW {lw:.4} in {:.2} s", lw_time.as_secs_f64()));
    let mcmc_model = Model::from_source(corpus::COIN, CpsMode::Selective, AnalysisConfig::ASSUME).unwrap();
    let start = Instant::now();
    let mcmc = run_mcmc(&mcmc_model, 100_000, 3, McmcOptions::default())
        .unwrap()
        .posterior_mean()
        .unwrap();
    let mcmc_time = start.elapsed();
    pass &= (mcmc - 0.625).abs() < 0.02 && mcmc_time < Duration::from_secs(30);
    details.push(format!("MCMC {mcmc:.4} in {:.2} s", mcmc_time.as_secs_f64()));
    outcome(pass, details.join(", "))
}

fn normalizing_constant() -> Outcome {
    let (z, _) = coin_oracle();
    let truth = z.ln();
    let model = Model::from_source(corpus::COIN, CpsMode::Selective, AnalysisConfig::WEIGHT).unwrap();
    let lw = run_lw(&model, 10_000, 5).unwrap().log_norm_const.unwrap();
    let bpf = run_bpf(&model, 10_000, 5).unwrap().log_norm_const.unwrap();
    let pass = (truth - (2.0f64 / 35.0).ln()).abs() < 1e-9 && (lw - truth).abs() < 0.05 && (bpf - truth).abs() < 0.05;
    outcome(pass, format!("oracle {truth:.4}, LW {lw:.4}, BPF {bpf:.4}"))
}

/// Particles per timed run, so that each run takes a few milliseconds.
const TIMING_N: usize = 2_000;
const TIMING_REPS: usize = 30;

fn overhead_ordering() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for (name, src) in corpus::ALL {
        let models: Vec<Model> = CpsMode::ALL
            .iter()
            .map(|&m| Model::from_source(src, m, AnalysisConfig::WEIGHT).unwrap())
            .collect();
        let allocs: Vec<u64> = models
            .iter()
            .map(|m| run_lw(m, 100, 0).unwrap().diagnostics.counters.continuation_allocs)
            .collect();
        let ordered = allocs[0] == 0 && allocs[0] < allocs[1] && allocs[1] < allocs[2];
        let (sel, full) = (&models[1], &models[2]);
        let time = |m: &Model, seed: u64| {
            let t = Instant::now();
            run_lw(m, TIMING_N, seed).unwrap();
            t.elapsed()
        };
        time(sel, 0);
        time(full, 0);
        let mut wins = 0;
        for rep in 0..TIMING_REPS as u64 {
            // alternate which mode runs first
            let (s, f) = if rep % 2 == 0 {
                let s = time(sel, rep);
                (s, time(full, rep))
            } else {
                let f = time(full, rep);
                (time(sel, rep), f)
            };
            wins += usize::from(s <= f);
        }
        let timed = wins * 100 >= 95 * TIMING_REPS;
        pass &= ordered && timed;
        details.push(format!(
            "{name}: allocs {}/{}/{}, selective faster in {wins}/{TIMING_REPS}",
            allocs[0], allocs[1], allocs[2]
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(300);
    details.push(format!("{:.1} s", elapsed.as_secs_f64()));
    outcome(pass, details.join("; "))
}

fn empty_selection_identity() -> Outcome {
    let mismatched: Vec<&str> = corpus::ALL
        .iter()
        .filter(|(_, src)| {
            let t = compile(src).unwrap();
            selective_cps(&Vars::new(), &t).unwrap() != TargetTerm::from_anf(&t)
        })
        .map(|(name, _)| *name)
        .collect();
    outcome(
        mismatched.is_empty(),
        format!("{} models, mismatched: {mismatched:?}", corpus::ALL.len()),
    )
}

fn compile_stage_runtime() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for (name, src) in corpus::ALL {
        let t = compile(src).unwrap();
        let mut worst = Duration::ZERO;
        for cfg in [AnalysisConfig::WEIGHT, AnalysisConfig::ASSUME] {
            let start = Instant::now();
            transform(&t, CpsMode::Selective, cfg).unwrap();
            worst = worst.max(start.elapsed());
        }
        pass &= worst < Duration::from_millis(50);
        details.push(format!("{name} {}", ms(worst)));
    }
    outcome(pass, details.join(", "))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 10] = [
        ("golden analysis result", golden_analysis),
        ("constraint validator on corpus", lemma_validator),
        ("suspension soundness on random programs", soundness_suite),
        ("CPS oracle equivalence", cps_oracle),
        ("weight suspension sequences", suspension_sequences),
        ("coin posterior mean", posterior_correctness),
        ("coin normalizing constant", normalizing_constant),
        ("CPS overhead ordering", overhead_ordering),
        ("empty selection identity", empty_selection_identity),
        ("compile-stage runtime", compile_stage_runtime),
    ];
    // Silence the default panic message; failures are reported below.
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        failed += usize::from(!result.pass);
        let status = if result.pass { "PASS" } else { "FAIL" };
        println!("{status} {:>2} {name}: {}", i + 1, result.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
