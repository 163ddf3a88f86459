use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riskbt_core::calibration::*;
use riskbt_core::identification::{identify, IdValue};
use riskbt_core::special::{norm_cdf, norm_quantile};
use riskbt_core::{DistributionSpec, Forecast, Functional, Level};

fn scalars(v: &[f64]) -> Vec<IdValue> {
    v.iter().map(|&x| IdValue::scalar(x)).collect()
}

fn ones(n: usize) -> TestFunctions {
    TestFunctions::constant(&[1.0], 1, 1, n).unwrap()
}

#[test]
fn zero_moments_are_degenerate() {
    let v = scalars(&[0.0; 100]);
    let r = two_sided_cct(&v, &ones(100)).unwrap();
    assert!(r.is_degenerate() && r.p_value.is_none());
    let r = one_sided_cct(&v, &ones(100), Direction::Super).unwrap();
    assert!(r.is_degenerate() && r.p_value.is_none());
    let r = average_calibration_test(&v, HacPolicy::Lag0).unwrap();
    assert!(r.is_degenerate() && r.p_value.is_none());
}

#[test]
fn collinear_test_functions_are_degenerate() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let v: Vec<f64> = (0..200).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let h = TestFunctions::constant(&[1.0, 2.0], 2, 1, 200).unwrap();
    let r = two_sided_cct(&scalars(&v), &h).unwrap();
    assert!(r.is_degenerate());
}

#[test]
fn t1_with_unit_test_function_is_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let v: Vec<f64> = (0..500).map(|_| rng.gen_range(-0.9..1.0)).collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let second = v.iter().map(|x| x * x).sum::<f64>() / n;
    let r = two_sided_cct(&scalars(&v), &ones(v.len())).unwrap();
    let expected = n * mean * mean / second;
    assert!((r.statistic[0] - expected).abs() < 1e-12 * expected.max(1.0));
    assert_eq!(r.df, 1);
}

#[test]
fn t1_matches_explicit_quadratic_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    let n = 300;
    let r: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..3.0)).collect();
    let f = Functional::VaR(Level::new(0.9).unwrap());
    let forecasts: Vec<Forecast> = r.iter().map(|&v| Forecast::Point(v)).collect();
    let values: Vec<IdValue> = forecasts
        .iter()
        .zip(&x)
        .map(|(fc, &xi)| identify(&f, fc, xi).unwrap())
        .collect();
    let h = TestFunctionSpec::VaRStandard
        .build(&TestContext {
            functional: f,
            forecasts: &forecasts,
            values: &values,
            sigma: None,
        })
        .unwrap();
    let report = two_sided_cct(&values, &h).unwrap();
    // Z_t = (V, rV); T = n z̄' Ω⁻¹ z̄ with a hand 2×2 inverse.
    let (mut m0, mut m1, mut s00, mut s01, mut s11) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for t in 0..n {
        let v = values[t].get(0);
        let (z0, z1) = (v, r[t] * v);
        m0 += z0;
        m1 += z1;
        s00 += z0 * z0;
        s01 += z0 * z1;
        s11 += z1 * z1;
    }
    let nf = n as f64;
    let (m0, m1, s00, s01, s11) = (m0 / nf, m1 / nf, s00 / nf, s01 / nf, s11 / nf);
    let det = s00 * s11 - s01 * s01;
    let t1 = nf * (m0 * m0 * s11 - 2.0 * m0 * m1 * s01 + m1 * m1 * s00) / det;
    assert!((report.statistic[0] - t1).abs() < 1e-9 * t1.max(1.0));
    assert!((report.p_value.unwrap() - (-t1 / 2.0).exp()).abs() < 1e-12);
}

#[test]
fn one_sided_q1_is_a_z_test() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    let v: Vec<f64> = (0..400).map(|_| rng.gen_range(-1.0..1.05)).collect();
    let n = v.len() as f64;
    let z = v.iter().sum::<f64>() / (n.sqrt() * (v.iter().map(|x| x * x).sum::<f64>() / n).sqrt());
    let sup = one_sided_cct(&scalars(&v), &ones(v.len()), Direction::Super).unwrap();
    let sub = one_sided_cct(&scalars(&v), &ones(v.len()), Direction::Sub).unwrap();
    assert!((sup.per_component_p[0] - norm_cdf(z)).abs() < 1e-14);
    assert!((sub.per_component_p[0] - norm_cdf(-z)).abs() < 1e-14);
    // With one component the Hommel and Bonferroni adjustments are the identity.
    assert_eq!(sup.hommel_p, Some(sup.per_component_p[0]));
    assert_eq!(sup.bonferroni_p, Some(sup.per_component_p[0]));
    let two = two_sided_cct(&scalars(&v), &ones(v.len())).unwrap();
    let min = sup.per_component_p[0].min(sub.per_component_p[0]);
    assert!((two.p_value.unwrap() - 2.0 * min).abs() < 1e-10);
}

#[test]
fn hommel_hand_example() {
    let p = [0.01, 0.5];
    let cq = 1.5;
    assert!(0.01 <= 0.05 / (2.0 * cq));
    assert!(hommel_rejects(&p, 0.05));
    assert!((hommel_adjusted(&p) - (2.0 * cq * 0.01f64).min(1.0)).abs() < 1e-15);
    assert_eq!(hommel_adjusted(&[0.9, 0.8, 0.7]), 1.0);
}

#[test]
fn negative_test_functions_rejected_for_one_sided_tests() {
    let h = TestFunctions::constant(&[-1.0], 1, 1, 50).unwrap();
    assert!(one_sided_cct(&scalars(&[0.1; 50]), &h, Direction::Super).is_err());
}

#[test]
fn one_sided_presets_are_nonnegative() {
    let mut rng = ChaCha8Rng::seed_from_u64(54);
    let n = 100;
    let fcs: Vec<Forecast> = (0..n)
        .map(|_| {
            let v = rng.gen_range(-2.0..2.0);
            Forecast::Pair {
                var: v,
                es: v + 0.5,
            }
        })
        .collect();
    let f = Functional::VaRES(Level::new(0.975).unwrap());
    let values: Vec<IdValue> = fcs
        .iter()
        .map(|fc| identify(&f, fc, rng.gen_range(-3.0..3.0)).unwrap())
        .collect();
    let sigma: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    let ctx = TestContext {
        functional: f,
        forecasts: &fcs,
        values: &values,
        sigma: Some(&sigma),
    };
    let h = TestFunctionSpec::OneSidedBlockDiag.build(&ctx).unwrap();
    assert!(h.is_nonnegative());
    assert_eq!((h.q(), h.k()), (4, 2));
    let pf: Vec<Forecast> = fcs
        .iter()
        .map(|f| Forecast::Point(f.headline() - 0.5))
        .collect();
    let g = Functional::VaR(Level::new(0.99).unwrap());
    let pv: Vec<IdValue> = pf.iter().map(|fc| identify(&g, fc, 0.0).unwrap()).collect();
    let ctx = TestContext {
        functional: g,
        forecasts: &pf,
        values: &pv,
        sigma: None,
    };
    assert!(TestFunctionSpec::VaRAbs
        .build(&ctx)
        .unwrap()
        .is_nonnegative());
    assert!(!TestFunctionSpec::VaRStandard
        .build(&ctx)
        .unwrap()
        .is_nonnegative());
    assert!(TestFunctionSpec::McNeilFrey.build(&ctx).is_err());
}

#[test]
fn dynamic_quantile_skips_the_first_lags() {
    let n = 50;
    let f = Functional::VaR(Level::new(0.95).unwrap());
    let fcs: Vec<Forecast> = (0..n)
        .map(|t| Forecast::Point(1.0 + t as f64 * 0.01))
        .collect();
    let values: Vec<IdValue> = fcs
        .iter()
        .enumerate()
        .map(|(t, fc)| identify(&f, fc, (t % 7) as f64 * 0.3).unwrap())
        .collect();
    let ctx = TestContext {
        functional: f,
        forecasts: &fcs,
        values: &values,
        sigma: None,
    };
    let h = TestFunctionSpec::DynamicQuantile(2).build(&ctx).unwrap();
    assert_eq!((h.q(), h.offset(), h.len()), (4, 2, n - 2));
    assert_eq!(
        h.matrix(0),
        &[1.0, values[1].get(0), values[0].get(0), 1.02]
    );
    let r = two_sided_cct(&values, &h).unwrap();
    assert_eq!(r.n, n - 2);
}

#[test]
fn average_calibration_reduces_to_z_test() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let v: Vec<f64> = (0..500).map(|_| rng.gen_range(-1.0..1.1)).collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let z = n.sqrt() * mean / var.sqrt();
    let r = average_calibration_test(&scalars(&v), HacPolicy::Lag0).unwrap();
    assert!((r.statistic[0] - z).abs() < 1e-10);
    assert!((r.p_value.unwrap() - 2.0 * norm_cdf(-z.abs())).abs() < 1e-10);
}

#[test]
fn hac_variance_exceeds_naive_under_positive_autocorrelation() {
    let mut rng = ChaCha8Rng::seed_from_u64(56);
    let phi = 0.6;
    let mut x = 0.0;
    let series: Vec<f64> = (0..20_000)
        .map(|_| {
            x = phi * x + norm_quantile(rng.gen_range(1e-12..1.0));
            x
        })
        .collect();
    let naive = long_run_variance(&series, HacPolicy::Lag0);
    let hac = long_run_variance(&series, HacPolicy::Bartlett(Some(40)));
    assert!(hac > 2.0 * naive);
    // Long-run variance of an AR(1) with unit innovations is 1/(1-φ)².
    assert!((hac - 1.0 / (1.0f64 - phi).powi(2)).abs() < 0.5, "{hac}");
    assert!((naive - 1.0 / (1.0 - phi * phi)).abs() < 0.1, "{naive}");
}

#[test]
fn hac_policy_parsing() {
    assert_eq!("lag0".parse::<HacPolicy>().unwrap(), HacPolicy::Lag0);
    assert_eq!(
        "bartlett".parse::<HacPolicy>().unwrap(),
        HacPolicy::Bartlett(None)
    );
    assert_eq!(
        "Bartlett:7".parse::<HacPolicy>().unwrap(),
        HacPolicy::Bartlett(Some(7))
    );
    assert!("parzen".parse::<HacPolicy>().is_err());
    assert_eq!(HacPolicy::Bartlett(None).lags(1000), 10);
    for p in [
        HacPolicy::Lag0,
        HacPolicy::Bartlett(None),
        HacPolicy::Bartlett(Some(3)),
    ] {
        assert_eq!(p.to_string().parse::<HacPolicy>().unwrap(), p);
    }
}

/// `P(Bin(n, p) = k)` by a running product, independent of the log-gamma route.
fn pmf_table(n: u64, p: f64) -> Vec<f64> {
    let mut out = vec![(1.0 - p).powi(n as i32)];
    for k in 1..=n {
        let prev = out[(k - 1) as usize];
        out.push(prev * (n - k + 1) as f64 / k as f64 * p / (1.0 - p));
    }
    out
}

#[test]
fn binomial_tests_match_exact_sums() {
    let table = pmf_table(250, 0.01);
    let sup = binomial_var_test(5, 250, 0.99, Side::Super).unwrap();
    let expected: f64 = table[5..].iter().sum();
    assert!((sup.p_value.unwrap() - expected).abs() < 1e-12);
    let sub = binomial_var_test(0, 250, 0.99, Side::Sub).unwrap();
    assert!((sub.p_value.unwrap() - 0.99f64.powi(250)).abs() < 1e-14);
    for k in [2, 3] {
        assert!(
            binomial_var_test(k, 250, 0.99, Side::Two)
                .unwrap()
                .p_value
                .unwrap()
                > 0.5
        );
    }
    let two = binomial_var_test(8, 250, 0.99, Side::Two)
        .unwrap()
        .p_value
        .unwrap();
    let expected: f64 = table
        .iter()
        .filter(|&&v| v <= table[8] * (1.0 + 1e-7))
        .sum();
    assert!((two - expected).abs() < 1e-12);
    assert!(binomial_var_test(251, 250, 0.99, Side::Two).is_err());
}

#[test]
fn mcneil_frey_statistic_forms() {
    let x = [0.0, 3.0, 1.0, 5.0];
    let r1 = [1.0, 2.0, 2.0, 2.0];
    let r2 = [2.0, 3.0, 3.0, 5.0];
    let s = mcneil_frey_statistic(&x, &r1, &r2, &[1.0; 4], 0.975).unwrap();
    assert_eq!(s.statistic, 0.0);
    assert_eq!(s.exceedances, 2);
    assert!(mcneil_frey_statistic(&[0.0], &[1.0], &[2.0], &[1.0], 0.9).is_err());

    // The moment form equals the statistic times (exceedances/n)/(1-ν).
    let mut rng = ChaCha8Rng::seed_from_u64(57);
    let nu = 0.975;
    let t5 = DistributionSpec::student_t(5.0)
        .unwrap()
        .standardized()
        .unwrap();
    let (q, es) = (t5.quantile(nu).unwrap(), t5.expected_shortfall(nu).unwrap());
    let n = 5000;
    let sigma: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    let x: Vec<f64> = sigma.iter().map(|s| s * t5.sample_one(&mut rng)).collect();
    let r1: Vec<f64> = sigma.iter().map(|s| s * q).collect();
    let r2: Vec<f64> = sigma.iter().map(|s| s * 0.9 * es).collect();
    let m = mcneil_frey_statistic(&x, &r1, &r2, &sigma, nu).unwrap();
    let ratio = m.exceedances as f64 / (n as f64 * (1.0 - nu));
    assert!((m.moment_form - m.statistic * ratio).abs() < 1e-12);
    let functional = Functional::VaRES(Level::new(nu).unwrap());
    let fcs: Vec<Forecast> = r1
        .iter()
        .zip(&r2)
        .map(|(&var, &es)| Forecast::Pair { var, es })
        .collect();
    let values: Vec<IdValue> = fcs
        .iter()
        .zip(&x)
        .map(|(f, &xi)| identify(&functional, f, xi).unwrap())
        .collect();
    let h = TestFunctionSpec::McNeilFrey
        .build(&TestContext {
            functional,
            forecasts: &fcs,
            values: &values,
            sigma: Some(&sigma),
        })
        .unwrap();
    let manual: f64 = (0..n)
        .map(|t| h.matrix(t)[0] * values[t].get(0) + h.matrix(t)[1] * values[t].get(1))
        .sum::<f64>()
        / n as f64;
    assert!((manual - m.moment_form).abs() < 1e-12);
    // The gap between the two forms is exactly the exceedance-rate error.
    let rel = (m.moment_form - m.statistic) / m.statistic;
    assert!((rel - (ratio - 1.0)).abs() < 1e-10, "{m:?}");
}

fn size_check(functional: Functional, d: &DistributionSpec, truth: Forecast, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reps = 500;
    let n = 1000;
    let mut rejections = 0;
    for _ in 0..reps {
        let values: Vec<IdValue> = (0..n)
            .map(|_| identify(&functional, &truth, d.sample_one(&mut rng)).unwrap())
            .collect();
        let h = TestFunctionSpec::Constant
            .build(&TestContext {
                functional,
                forecasts: &vec![truth; n],
                values: &values,
                sigma: None,
            })
            .unwrap();
        if two_sided_cct(&values, &h).unwrap().rejects(0.05) == Some(true) {
            rejections += 1;
        }
    }
    rejections as f64 / reps as f64
}

#[test]
fn simple_test_has_nominal_size_under_iid_normal() {
    let d = DistributionSpec::normal(0.0, 1.0).unwrap();
    let cases = [
        (
            Functional::VaR(Level::new(0.95).unwrap()),
            Forecast::Point(d.quantile(0.95).unwrap()),
        ),
        (
            Functional::Expectile(Level::new(0.98761).unwrap()),
            Forecast::Point(d.expectile(0.98761).unwrap()),
        ),
        (
            Functional::VaRES(Level::new(0.875).unwrap()),
            Forecast::Pair {
                var: d.quantile(0.875).unwrap(),
                es: d.expected_shortfall(0.875).unwrap(),
            },
        ),
    ];
    for (i, (f, truth)) in cases.into_iter().enumerate() {
        let rate = size_check(f, &d, truth, 58 + i as u64);
        assert!((0.02..=0.09).contains(&rate), "{f}: {rate}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reports_never_mix_degeneracy_and_p_values(v in proptest::collection::vec(prop_oneof![Just(0.0), -1.0f64..1.0], 40..80)) {
        let vals = scalars(&v);
        let h = TestFunctions::constant(&[1.0, 1.0], 2, 1, v.len()).unwrap();
        for r in [
            two_sided_cct(&vals, &ones(v.len())).unwrap(),
            two_sided_cct(&vals, &h).unwrap(),
            one_sided_cct(&vals, &ones(v.len()), Direction::Sub).unwrap(),
            average_calibration_test(&vals, HacPolicy::Bartlett(None)).unwrap(),
        ] {
            prop_assert!(r.is_degenerate() != r.p_value.is_some());
            if let Some(p) = r.p_value {
                prop_assert!((0.0..=1.0).contains(&p));
            }
        }
    }

    #[test]
    fn hommel_is_between_bonferroni_bounds(p in proptest::collection::vec(0.0f64..1.0, 1..6)) {
        let h = hommel_adjusted(&p);
        let min = p.iter().copied().fold(1.0, f64::min);
        prop_assert!(h >= min.min(1.0) - 1e-15);
        for eta in [0.01, 0.05, 0.1] {
            prop_assert_eq!(hommel_rejects(&p, eta), h <= eta + 1e-15);
        }
    }
}
