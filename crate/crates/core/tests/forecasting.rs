use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riskbt_core::forecasting::empirical::{expectile, quantile, var_es};
use riskbt_core::forecasting::*;
use riskbt_core::{DistributionSpec, Forecast, Functional, Level};

fn lvl(v: f64) -> Level {
    Level::new(v).unwrap()
}

fn std_t(df: f64) -> DistributionSpec {
    DistributionSpec::student_t(df)
        .unwrap()
        .standardized()
        .unwrap()
}

/// Exact sample expectile by scanning the piecewise-linear first-order condition.
fn expectile_by_segments(sample: &[f64], tau: f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let total: f64 = s.iter().sum();
    let mut lower = 0.0;
    for j in 1..n {
        lower += s[j - 1];
        let upper = total - lower;
        let e =
            (tau * upper + (1.0 - tau) * lower) / (tau * (n - j) as f64 + (1.0 - tau) * j as f64);
        if e >= s[j - 1] && e <= s[j] {
            return e;
        }
    }
    panic!("no segment");
}

#[test]
fn iid_when_dynamics_vanish() {
    let p = ArGarchParams::new(
        0.0,
        0.0,
        1.0,
        0.0,
        0.0,
        DistributionSpec::normal(0.0, 1.0).unwrap(),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let path = simulate_ar_garch(&p, 20_000, 100, &mut rng);
    assert!(path.sigma.iter().all(|&s| s == 1.0));
    let n = path.x.len() as f64;
    let mean = path.x.iter().sum::<f64>() / n;
    let var = path.x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    assert!(mean.abs() < 0.04 && (var - 1.0).abs() < 0.05);
}

#[test]
fn stationary_variance() {
    let p = ArGarchParams::simulation_design();
    let phi = p.phi;
    let oracle_var = p.omega / (1.0 - p.alpha - p.beta) / (1.0 - phi * phi);
    assert!((p.unconditional_variance() - oracle_var).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let path = simulate_ar_garch(&p, 100_000, 1000, &mut rng);
    let n = path.x.len() as f64;
    let mean = path.x.iter().sum::<f64>() / n;
    let var = path.x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    assert!(
        (var / oracle_var - 1.0).abs() < 0.1,
        "{var} vs {oracle_var}"
    );
    assert!((mean - p.c / (1.0 - phi)).abs() < 0.02);
}

#[test]
fn filter_replays_the_simulator() {
    let p = ArGarchParams::simulation_design();
    let mut rng = ChaCha8Rng::seed_from_u64(72);
    let path = simulate_ar_garch(&p, 500, 200, &mut rng);
    let state = filter(&p, &path.x, Some(path.presample)).unwrap();
    for t in 0..500 {
        assert!((state.mu[t] - path.mu[t]).abs() < 1e-12);
        assert!((state.sigma[t] - path.sigma[t]).abs() < 1e-12);
        assert!((state.residuals[t] - path.z[t]).abs() < 1e-9);
    }
    let (mu, sigma) = forecast_one_step(&state);
    let last = 499;
    let eps = path.x[last] - path.mu[last];
    let s2 = p.omega + p.alpha * eps * eps + p.beta * path.sigma[last].powi(2);
    assert!((mu - (p.c + p.phi * path.x[last])).abs() < 1e-12);
    assert!((sigma - s2.sqrt()).abs() < 1e-12);
}

#[test]
fn default_presample_uses_window_moments() {
    let p = ArGarchParams::t4_design();
    let x = [0.5, -1.0, 2.0, 0.0];
    let state = filter(&p, &x, None).unwrap();
    let mean = 0.375;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 4.0;
    assert!((state.sigma[0] - var.sqrt()).abs() < 1e-12);
    assert!((state.mu[0] - (p.c + p.phi * mean)).abs() < 1e-12);
    let eps0 = x[0] - state.mu[0];
    assert!(
        (state.sigma[1] - (p.omega + p.alpha * eps0 * eps0 + p.beta * var).sqrt()).abs() < 1e-12
    );
}

#[test]
fn fit_recovers_design_parameters() {
    let p = ArGarchParams::simulation_design();
    let truth = [p.c, p.phi, p.omega, p.alpha, p.beta];
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    let mut covered = 0;
    let mut total = 0;
    for _ in 0..3 {
        let path = simulate_ar_garch(&p, 3000, 500, &mut rng);
        let fit = fit_ar_garch_mle(
            &path.x,
            InnovationFamily::SkewedT,
            None,
            &FitOptions::default(),
        )
        .unwrap();
        let se = standard_errors(&fit, &path.x).unwrap();
        let est = garch::parameter_vector(&fit.params);
        for i in 0..5 {
            total += 1;
            if (est[i] - truth[i]).abs() < 3.0 * se[i] {
                covered += 1;
            }
        }
    }
    assert!(covered >= total - 2, "{covered}/{total}");
}

#[test]
fn fit_needs_enough_data() {
    let x = vec![0.1; 100];
    assert!(fit_ar_garch_mle(&x, InnovationFamily::Normal, None, &FitOptions::default()).is_err());
}

#[test]
fn parametric_risk_of_the_normal() {
    let n = DistributionSpec::normal(0.0, 1.0).unwrap();
    let q = fp_risk(&n, Functional::VaR(lvl(0.99))).unwrap().headline();
    assert!((q - 2.326_347_874_040_841).abs() < 1e-8);
    let e = fp_risk(&n, Functional::Expectile(lvl(0.5)))
        .unwrap()
        .headline();
    assert!(e.abs() < 1e-10);
    match fp_risk(&n, Functional::VaRES(lvl(0.975))).unwrap() {
        Forecast::Pair { var, es } => {
            let phi = (-0.5 * var * var).exp() / (2.0 * std::f64::consts::PI).sqrt();
            assert!((es - phi / 0.025).abs() < 1e-8);
        }
        _ => panic!("expected a pair"),
    }
}

#[test]
fn parametric_skewed_t_agrees_with_monte_carlo() {
    let d = DistributionSpec::skewed_t(5.0, 1.5)
        .unwrap()
        .standardized()
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(74);
    let sample = d.sample(400_000, &mut rng);
    let (v_mc, es_mc) = var_es(&sample, 0.975).unwrap();
    match fp_risk(&d, Functional::VaRES(lvl(0.975))).unwrap() {
        Forecast::Pair { var, es } => {
            assert!((var / v_mc - 1.0).abs() < 0.02, "{var} {v_mc}");
            assert!((es / es_mc - 1.0).abs() < 0.03, "{es} {es_mc}");
        }
        _ => panic!("expected a pair"),
    }
    let e_mc = expectile(&sample, 0.99).unwrap();
    let e = fp_risk(&d, Functional::Expectile(lvl(0.99)))
        .unwrap()
        .headline();
    assert!((e / e_mc - 1.0).abs() < 0.02);
}

#[test]
fn composition_is_affine() {
    let f = compose(0.1, 2.0, Forecast::Pair { var: 1.5, es: 2.5 });
    assert_eq!(f, Forecast::Pair { var: 3.1, es: 5.1 });
}

#[test]
fn historical_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(75);
    let residuals = DistributionSpec::normal(0.0, 1.0)
        .unwrap()
        .sample(2000, &mut rng);
    let mean = residuals.iter().sum::<f64>() / 2000.0;
    let e = fhs_risk(&residuals, Functional::Expectile(lvl(0.5)), None, &mut rng)
        .unwrap()
        .headline();
    assert!((e - mean).abs() < 1e-9);
    for tau in [0.9, 0.99, 0.999] {
        let e = expectile(&residuals, tau).unwrap();
        assert!((e - expectile_by_segments(&residuals, tau)).abs() < 1e-8);
    }
    let q = fhs_risk(
        &residuals,
        Functional::VaR(lvl(0.99)),
        Some(DEFAULT_RESAMPLE_SIZE),
        &mut rng,
    )
    .unwrap();
    assert!((q.headline() - 2.33).abs() < 0.25);
    let sample = FhsSample::resample(&residuals, 500, &mut rng).unwrap();
    assert!(sample.values().iter().all(|v| residuals.contains(v)));
    assert!(sample.values().windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn resampled_quantile_concentrates() {
    let mut rng = ChaCha8Rng::seed_from_u64(76);
    let residuals = DistributionSpec::normal(0.0, 1.0)
        .unwrap()
        .sample(20_000, &mut rng);
    let q = fhs_risk(
        &residuals,
        Functional::VaR(lvl(0.99)),
        Some(DEFAULT_RESAMPLE_SIZE),
        &mut rng,
    )
    .unwrap();
    assert!((q.headline() - 2.326).abs() < 0.1);
}

#[test]
fn gpd_shape_of_exponential_is_near_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let y = DistributionSpec::exponential(0.5)
        .unwrap()
        .sample(20_000, &mut rng);
    let fit = gpd_fit_mle(&y).unwrap();
    assert!(fit.shape.abs() < 0.03, "{}", fit.shape);
    assert!((fit.scale - 2.0).abs() < 0.1);
}

#[test]
fn gpd_shape_of_t5_tail_is_positive() {
    // With 60 excesses the standard error of the shape is about 0.15 and the estimator is
    // biased downward at a 12% threshold, so roughly a third of the estimates fall at or below 0.
    let t = DistributionSpec::student_t(5.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    let reps = 200;
    let mut shapes: Vec<f64> = (0..reps)
        .map(|_| evt_fit(&t.sample(500, &mut rng), 60).unwrap().shape)
        .collect();
    shapes.sort_by(f64::total_cmp);
    let inside = shapes.iter().filter(|&&x| x > 0.0 && x < 0.6).count();
    assert!(inside as f64 >= 0.55 * reps as f64, "{inside}");
    assert!(shapes[reps / 2] > 0.0 && shapes[reps / 2] < 0.3);
    // A high threshold in a long sample removes most of the bias.
    let fit = evt_fit(&t.sample(200_000, &mut rng), 2000).unwrap();
    assert!((fit.shape - 0.2).abs() < 0.08, "{}", fit.shape);
}

#[test]
fn gpd_standard_errors_cover() {
    let mut rng = ChaCha8Rng::seed_from_u64(79);
    let (beta, xi) = (1.5, 0.25);
    let reps = 100;
    let (mut cb, mut cx) = (0, 0);
    for _ in 0..reps {
        let y: Vec<f64> = (0..1000)
            .map(|_| {
                let u: f64 = rng.gen();
                beta / xi * ((1.0 - u).powf(-xi) - 1.0)
            })
            .collect();
        let fit = gpd_fit_mle(&y).unwrap();
        let (sb, sx) = fit.standard_errors().unwrap();
        cb += ((fit.scale - beta).abs() < 2.0 * sb) as usize;
        cx += ((fit.shape - xi).abs() < 2.0 * sx) as usize;
    }
    assert!(cb >= 88 && cx >= 88, "{cb} {cx}");
}

#[test]
fn tail_estimates_on_exponential_residuals() {
    let mut rng = ChaCha8Rng::seed_from_u64(80);
    let z = DistributionSpec::exponential(1.0)
        .unwrap()
        .sample(50_000, &mut rng);
    let fit = evt_fit(&z, 5000).unwrap();
    assert!(fit.shape.abs() < 0.05);
    for alpha in [0.99_f64, 0.999] {
        let truth = -(1.0 - alpha).ln();
        assert!((fit.var(alpha) / truth - 1.0).abs() < 0.05);
        assert!((fit.es(alpha).unwrap() / (truth + 1.0) - 1.0).abs() < 0.05);
    }
    assert!((fit.model_mean() - 1.0).abs() < 0.03);
}

#[test]
fn es_to_var_ratio_approaches_tail_limit() {
    let mut rng = ChaCha8Rng::seed_from_u64(81);
    let z = DistributionSpec::gpd(1.0, 0.3)
        .unwrap()
        .sample(20_000, &mut rng);
    let fit = evt_fit(&z, 2000).unwrap();
    let ratio = fit.es(0.9999).unwrap() / fit.var(0.9999);
    assert!(
        (ratio * (1.0 - fit.shape) - 1.0).abs() < 0.05,
        "{ratio} {}",
        fit.shape
    );
}

#[test]
fn tail_expectile_of_t5() {
    let d = std_t(5.0);
    let truth = d.expectile(0.999).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(82);
    let z = d.sample(20_000, &mut rng);
    let est = evt_risk(&z, Functional::Expectile(lvl(0.999)), 2000).unwrap();
    assert!(!est.fallback);
    assert!(
        (est.forecast.headline() / truth - 1.0).abs() < 0.1,
        "{} {truth}",
        est.forecast.headline()
    );
    let g = est.fit.expectile_curve(est.forecast.headline());
    assert!((g - 0.999).abs() < 1e-8);
}

#[test]
fn low_tau_falls_back_to_empirical() {
    let mut rng = ChaCha8Rng::seed_from_u64(83);
    let z = std_t(5.0).sample(2000, &mut rng);
    let est = evt_risk(&z, Functional::Expectile(lvl(0.6)), 200).unwrap();
    assert!(est.fallback);
    assert!((est.forecast.headline() - expectile(&z, 0.6).unwrap()).abs() < 1e-12);
}

#[test]
fn level_inside_body_warns() {
    let mut rng = ChaCha8Rng::seed_from_u64(84);
    let z = std_t(5.0).sample(500, &mut rng);
    let est = evt_risk(&z, Functional::VaR(lvl(0.8)), 60).unwrap();
    assert_eq!(est.warnings.len(), 1);
    let est = evt_risk(&z, Functional::VaR(lvl(0.99)), 60).unwrap();
    assert!(est.warnings.is_empty());
}

#[test]
fn evt_scale_equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(85);
    let z = std_t(5.0).sample(2000, &mut rng);
    let c = 3.7;
    let zc: Vec<f64> = z.iter().map(|v| c * v).collect();
    for f in [
        Functional::VaR(lvl(0.995)),
        Functional::VaRES(lvl(0.99)),
        Functional::Expectile(lvl(0.995)),
    ] {
        let a = evt_risk(&z, f, 240).unwrap().forecast.headline();
        let b = evt_risk(&zc, f, 240).unwrap().forecast.headline();
        assert!((b / (c * a) - 1.0).abs() < 0.01, "{f:?}: {a} {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn empirical_expectile_matches_segment_oracle(seed in 0u64..10_000, tau in 0.01f64..0.999, n in 5usize..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0f64).powi(3)).collect();
        let e = expectile(&s, tau).unwrap();
        let o = expectile_by_segments(&s, tau);
        prop_assert!((e - o).abs() < 1e-8 * (1.0 + o.abs()));
    }

    #[test]
    fn empirical_quantile_is_monotone(seed in 0u64..10_000, p in 0.0f64..1.0, dp in 0.0f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let q1 = quantile(&s, p).unwrap();
        let q2 = quantile(&s, (p + dp).min(1.0)).unwrap();
        prop_assert!(q1 <= q2);
    }
}

#[test]
fn vanishing_shape_limit() {
    let mut rng = ChaCha8Rng::seed_from_u64(86);
    let z = std_t(5.0).sample(500, &mut rng);
    let mut fit = evt_fit(&z, 60).unwrap();
    fit.shape = 0.0;
    let alpha = 0.995;
    let limit = fit.threshold + fit.scale * (fit.tail_fraction() / (1.0 - alpha)).ln();
    assert!((fit.var(alpha) - limit).abs() < 1e-12);
    let mut near = fit.clone();
    near.shape = 1e-10;
    assert!((near.var(alpha) - limit).abs() < 1e-6);
    assert!(
        (near.expectile_curve(fit.threshold + 1.0) - fit.expectile_curve(fit.threshold + 1.0))
            .abs()
            < 1e-6
    );
}

#[test]
fn fitted_residuals_are_standardized() {
    let p = ArGarchParams::simulation_design();
    let mut rng = ChaCha8Rng::seed_from_u64(87);
    for _ in 0..5 {
        let path = simulate_ar_garch(&p, 500, 500, &mut rng);
        let fit = fit_ar_garch_mle(
            &path.x,
            InnovationFamily::SkewedT,
            None,
            &FitOptions::default(),
        )
        .unwrap();
        let n = fit.residuals.len() as f64;
        let m = fit.residuals.iter().sum::<f64>() / n;
        let v = fit.residuals.iter().map(|r| (r - m).powi(2)).sum::<f64>() / n;
        assert!((0.9..=1.1).contains(&v), "{v}");
        assert!(fit.sigma.iter().all(|&s| s > 0.0));
    }
}
