use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::corpus;

fn model(src: &str, mode: CpsMode, cfg: AnalysisConfig) -> Model {
    Model::from_source(src, mode, cfg).unwrap()
}

/// Sum of exponentials in ascending order with compensation, as an
/// independent reference for `log_sum_exp`.
fn lse_oracle(xs: &[f64]) -> f64 {
    let mut terms: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
    terms.sort_by(f64::total_cmp);
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for t in terms {
        let y = t - c;
        let s = sum + y;
        c = (s - sum) - y;
        sum = s;
    }
    sum.ln()
}

#[test]
fn log_sum_exp_examples() {
    assert!((log_sum_exp(&[0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
    assert!((log_sum_exp(&[-1000.0, -1000.0]) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
    assert_eq!(log_sum_exp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let xs: Vec<f64> = (0..10).map(|_| rng.random_range(-20.0..20.0)).collect();
        let (a, b) = (log_sum_exp(&xs), lse_oracle(&xs));
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn systematic_resampling_of_uniform_weights_keeps_everyone() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let idx = resample_systematic(&[0.3; 8], &mut rng).unwrap();
    assert_eq!(idx, (0..8).collect::<Vec<_>>());
}

#[test]
fn systematic_resampling_of_degenerate_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert_eq!(
        resample_systematic(&[0.0, f64::NEG_INFINITY], &mut rng).unwrap(),
        vec![0, 0]
    );
    assert_eq!(
        resample_systematic(&[f64::NEG_INFINITY; 2], &mut rng),
        Err(InferenceError::DegenerateWeights)
    );
}

#[test]
fn systematic_resampling_matches_normalized_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let base: [f64; 5] = [0.1, 0.2, 0.3, 0.15, 0.25];
    let n = 10_000;
    // groups are assigned at random so the scheme's fixed stride cannot alias
    let group: Vec<usize> = (0..n).map(|_| rng.random_range(0..base.len())).collect();
    let lws: Vec<f64> = group.iter().map(|&g| base[g].ln()).collect();
    let total: f64 = group.iter().map(|&g| base[g]).sum();
    let mut expected = [0.0; 5];
    for &g in &group {
        expected[g] += base[g] / total;
    }
    let idx = resample_systematic(&lws, &mut rng).unwrap();
    let mut counts = [0usize; 5];
    for i in idx {
        counts[group[i]] += 1;
    }
    for (c, e) in counts.iter().zip(expected) {
        assert!((*c as f64 / n as f64 - e).abs() < 0.01, "{c} vs {e}");
    }
}

#[test]
fn ess_of_equal_and_degenerate_weights() {
    assert!((effective_sample_size(&[0.0; 10]) - 10.0).abs() < 1e-12);
    assert!((effective_sample_size(&[0.0, f64::NEG_INFINITY]) - 1.0).abs() < 1e-12);
}

#[test]
fn lw_of_a_constant_weight_is_exact() {
    let m = model("weight 0.5; ()", CpsMode::Selective, AnalysisConfig::WEIGHT);
    let r = run_lw(&m, 17, 3).unwrap();
    assert_eq!(r.log_norm_const, Some(0.5f64.ln()));
}

#[test]
fn lw_is_identical_under_selective_and_full_cps() {
    for (name, src) in corpus::ALL {
        let sel = run_lw(&model(src, CpsMode::Selective, AnalysisConfig::WEIGHT), 200, 9).unwrap();
        let full = run_lw(&model(src, CpsMode::Full, AnalysisConfig::WEIGHT), 200, 9).unwrap();
        let none = run_lw(&model(src, CpsMode::None, AnalysisConfig::WEIGHT), 200, 9).unwrap();
        assert_eq!(sel.samples, full.samples, "{name}");
        assert_eq!(sel.samples, none.samples, "{name}");
        assert_eq!(none.diagnostics.counters.suspensions, 0);
        assert_eq!(none.diagnostics.counters.continuation_allocs, 0);
    }
}

#[test]
fn bpf_without_weights_is_prior_sampling() {
    let m = model("assume (Normal 0. 1.)", CpsMode::Selective, AnalysisConfig::WEIGHT);
    let r = run_bpf(&m, 50, 1).unwrap();
    assert_eq!(r.log_norm_const, Some(0.0));
    assert_eq!(r.diagnostics.resampling_steps, 0);
}

#[test]
fn bpf_coin_particles_suspend_four_times() {
    let m = model(corpus::COIN, CpsMode::Selective, AnalysisConfig::WEIGHT);
    let n = 100;
    let r = run_bpf(&m, n, 4).unwrap();
    assert_eq!(r.diagnostics.counters.suspensions, 4 * n as u64);
    assert_eq!(r.diagnostics.resampling_steps, 4);
    assert_eq!(r.diagnostics.ess.len(), 4);
}

#[test]
fn bpf_resampling_is_identical_under_selective_and_full_cps() {
    for (name, src) in corpus::ALL {
        let sel = run_bpf(&model(src, CpsMode::Selective, AnalysisConfig::WEIGHT), 100, 6).unwrap();
        let full = run_bpf(&model(src, CpsMode::Full, AnalysisConfig::WEIGHT), 100, 6).unwrap();
        assert_eq!(sel.samples, full.samples, "{name}");
        assert_eq!(sel.log_norm_const, full.log_norm_const, "{name}");
        assert_eq!(sel.diagnostics.ess, full.diagnostics.ess, "{name}");
    }
}

#[test]
fn bpf_reports_the_step_where_all_weights_vanish() {
    let m = model("weight 1.; weight 0.; ()", CpsMode::Selective, AnalysisConfig::WEIGHT);
    assert_eq!(run_bpf(&m, 10, 0), Err(InferenceError::AllZeroWeight { step: 1 }));
}

#[test]
fn bpf_needs_weight_suspensions() {
    let m = model(corpus::COIN, CpsMode::None, AnalysisConfig::WEIGHT);
    assert!(matches!(run_bpf(&m, 10, 0), Err(InferenceError::Unsupported { .. })));
    let m = model(corpus::COIN, CpsMode::Selective, AnalysisConfig::ASSUME);
    assert!(matches!(run_bpf(&m, 10, 0), Err(InferenceError::Unsupported { .. })));
}

#[test]
fn mcmc_on_a_degenerate_model_is_constant() {
    let m = model("assume (Bernoulli 1.0)", CpsMode::Selective, AnalysisConfig::ASSUME);
    let r = run_mcmc(&m, 200, 1, McmcOptions::default()).unwrap();
    assert!(r.samples.iter().all(|s| s.value == Intrinsic::Bool(true)));
    assert_eq!(r.diagnostics.acceptance_rate, Some(1.0));
    assert_eq!(r.log_norm_const, None);
}

#[test]
fn mcmc_needs_assume_suspensions() {
    let m = model(corpus::COIN, CpsMode::Selective, AnalysisConfig::WEIGHT);
    assert!(matches!(
        run_mcmc(&m, 10, 0, McmcOptions::default()),
        Err(InferenceError::Unsupported { .. })
    ));
}

#[test]
fn mcmc_chains_agree_across_cps_modes() {
    let opts = McmcOptions {
        burn_in: 10,
        ..McmcOptions::default()
    };
    for (name, src) in corpus::ALL {
        let none = run_mcmc(&model(src, CpsMode::None, AnalysisConfig::ASSUME), 300, 2, opts).unwrap();
        let sel = run_mcmc(&model(src, CpsMode::Selective, AnalysisConfig::ASSUME), 300, 2, opts).unwrap();
        let full = run_mcmc(&model(src, CpsMode::Full, AnalysisConfig::ASSUME), 300, 2, opts).unwrap();
        assert_eq!(none.samples, sel.samples, "{name}");
        assert_eq!(sel.samples, full.samples, "{name}");
    }
}

#[test]
fn mcmc_fails_without_a_valid_initial_trace() {
    let m = model("weight 0.; ()", CpsMode::Selective, AnalysisConfig::ASSUME);
    let opts = McmcOptions {
        burn_in: 0,
        init_attempts: 3,
    };
    assert_eq!(run_mcmc(&m, 5, 0, opts), Err(InferenceError::NoValidInitialTrace(3)));
}

#[test]
fn algorithm_names_round_trip() {
    for a in Algorithm::ALL {
        assert_eq!(a.to_string().parse::<Algorithm>(), Ok(a));
    }
    assert!("smc".parse::<Algorithm>().is_err());
}
