//! Quick self-checks run by the `validate` command.

use crate::config::RunConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riskbt_core::calibration::HacPolicy;
use riskbt_core::comparative::{traffic_light_matrix, Zone};
use riskbt_core::forecasting::fp_risk;
use riskbt_core::identification::expected_identification;
use riskbt_core::scoring::{validate_homogeneity, Homogeneity};
use riskbt_core::DistributionSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

/// Runs the checks for the functionals and scores in `config`.
pub fn run_checks(config: &RunConfig) -> Vec<Check> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = DistributionSpec::normal(0.0, 1.0).expect("valid");

    let q = normal.quantile(0.99).unwrap_or(f64::NAN);
    out.push(check(
        "normal quantile 0.99",
        (q - 2.326_347_874_040_841).abs() < 1e-9,
        format!("{q}"),
    ));
    let es = normal.expected_shortfall(0.975).unwrap_or(f64::NAN);
    out.push(check(
        "normal ES 0.975",
        (es - 2.337_802_792_201_417).abs() < 1e-9,
        format!("{es}"),
    ));

    let functionals = match config.functionals() {
        Ok(f) => f,
        Err(e) => {
            out.push(check("configuration", false, e.to_string()));
            return out;
        }
    };
    let skewed = DistributionSpec::skewed_t(5.0, 1.5)
        .and_then(|d| d.standardized())
        .expect("valid");
    for &f in &functionals {
        for (label, dist) in [("normal", &normal), ("skewed-t", &skewed)] {
            let detail =
                fp_risk(dist, f).and_then(|truth| expected_identification(&f, dist, &truth));
            match detail {
                Ok(v) => {
                    let worst = v.as_slice().iter().fold(0.0f64, |a, b| a.max(b.abs()));
                    out.push(check(
                        format!("identification zero, {f}, {label}"),
                        worst < 1e-8,
                        format!("{worst:e}"),
                    ));
                }
                Err(e) => out.push(check(
                    format!("identification zero, {f}, {label}"),
                    false,
                    e.to_string(),
                )),
            }
        }
        match config.scores.specs(f) {
            Ok(specs) => {
                for spec in specs {
                    let name = format!("homogeneity, {f}, {}", spec.generator_name());
                    if spec.homogeneity() == Homogeneity::None {
                        out.push(check(name, true, "not homogeneous"));
                        continue;
                    }
                    let r = validate_homogeneity(&spec, 1000, &mut rng);
                    out.push(check(
                        name,
                        r.degree_confirmed && r.max_rel_err < 1e-10,
                        format!("max relative error {:e}", r.max_rel_err),
                    ));
                }
            }
            Err(e) => out.push(check(format!("scores, {f}"), false, e.to_string())),
        }
    }

    let names: Vec<String> = (0..4).map(|i| format!("m{i}")).collect();
    let scores: Vec<Vec<f64>> = (0..4)
        .map(|i| {
            (0..300)
                .map(|_| 0.05 * i as f64 + rng.gen_range(-1.0..1.0))
                .collect()
        })
        .collect();
    let antisymmetric =
        traffic_light_matrix(&names, &scores, config.eta, HacPolicy::Lag0).map(|m| {
            (0..4).all(|i| {
                (0..4).all(|j| {
                    i == j
                        || matches!(
                            (m.zone(i, j), m.zone(j, i)),
                            (Some(Zone::Green), Some(Zone::Red))
                                | (Some(Zone::Red), Some(Zone::Green))
                                | (Some(Zone::Yellow), Some(Zone::Yellow))
                        )
                })
            })
        });
    out.push(check(
        "traffic-light antisymmetry",
        antisymmetric.unwrap_or(false),
        "",
    ));
    out
}
