//! Empirical risk functionals and filtered historical simulation.

use crate::error::{Error, Result};
use crate::functional::{Forecast, Functional};
use rand::Rng;

/// Sample quantile with linear interpolation between order statistics
/// (`h = (n-1)p`), on data sorted ascending.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::LevelOutOfRange(p));
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

pub fn quantile(sample: &[f64], p: f64) -> Result<f64> {
    quantile_sorted(&sorted_copy(sample)?, p)
}

fn sorted_copy(sample: &[f64]) -> Result<Vec<f64>> {
    if sample.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("sample contains NaN".into()));
    }
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

pub const EXPECTILE_TOL: f64 = 1e-10;
pub const EXPECTILE_MAX_ITER: usize = 500;

/// Empirical expectile by the asymmetric weighted-mean fixed point
/// `e ← Σ wᵢ zᵢ / Σ wᵢ` with `wᵢ = τ` above `e` and `1 - τ` otherwise, started at the mean.
pub fn expectile(sample: &[f64], tau: f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::LevelOutOfRange(tau));
    }
    let mut e = sample.iter().sum::<f64>() / sample.len() as f64;
    for _ in 0..EXPECTILE_MAX_ITER {
        let (mut num, mut den) = (0.0, 0.0);
        for &z in sample {
            let w = if z > e { tau } else { 1.0 - tau };
            num += w * z;
            den += w;
        }
        let next = num / den;
        if (next - e).abs() <= EXPECTILE_TOL * (1.0 + e.abs()) {
            return Ok(next);
        }
        e = next;
    }
    Err(Error::RootFinding(format!(
        "expectile iteration did not settle in {EXPECTILE_MAX_ITER} steps"
    )))
}

/// Mean of the values strictly above `var`.
pub fn tail_mean(sample: &[f64], var: f64) -> Result<f64> {
    let (sum, count) = sample
        .iter()
        .filter(|&&z| z > var)
        .fold((0.0, 0usize), |(s, c), &z| (s + z, c + 1));
    if count == 0 {
        return Err(Error::InsufficientData(format!(
            "no observations above {var}"
        )));
    }
    Ok(sum / count as f64)
}

/// Empirical `(VaR_ν, ES_ν)`.
pub fn var_es(sample: &[f64], nu: f64) -> Result<(f64, f64)> {
    let sorted = sorted_copy(sample)?;
    let var = quantile_sorted(&sorted, nu)?;
    Ok((var, tail_mean(&sorted, var)?))
}

/// Empirical estimate of a functional.
pub fn empirical_risk(sample: &[f64], functional: Functional) -> Result<Forecast> {
    let level = functional.level().value();
    match functional {
        Functional::VaR(_) => Ok(Forecast::Point(quantile(sample, level)?)),
        Functional::Expectile(_) => Ok(Forecast::Point(expectile(sample, level)?)),
        Functional::VaRES(_) => {
            let (var, es) = var_es(sample, level)?;
            Ok(Forecast::Pair { var, es })
        }
    }
}

/// Residual sample used by filtered historical simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct FhsSample {
    sorted: Vec<f64>,
}

pub const DEFAULT_RESAMPLE_SIZE: usize = 10_000;

impl FhsSample {
    /// Bootstrap of `n_draws` residuals drawn with replacement.
    pub fn resample<R: Rng + ?Sized>(
        residuals: &[f64],
        n_draws: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if residuals.len() < 2 {
            return Err(Error::InsufficientData(
                "need at least two residuals".into(),
            ));
        }
        if n_draws == 0 {
            return Err(Error::InvalidParameter(
                "resample size must be positive".into(),
            ));
        }
        let draws: Vec<f64> = (0..n_draws)
            .map(|_| residuals[rng.gen_range(0..residuals.len())])
            .collect();
        Ok(Self {
            sorted: sorted_copy(&draws)?,
        })
    }

    /// The residuals themselves, without resampling.
    pub fn direct(residuals: &[f64]) -> Result<Self> {
        if residuals.len() < 2 {
            return Err(Error::InsufficientData(
                "need at least two residuals".into(),
            ));
        }
        Ok(Self {
            sorted: sorted_copy(residuals)?,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn risk(&self, functional: Functional) -> Result<Forecast> {
        let level = functional.level().value();
        match functional {
            Functional::VaR(_) => Ok(Forecast::Point(quantile_sorted(&self.sorted, level)?)),
            Functional::Expectile(_) => Ok(Forecast::Point(expectile(&self.sorted, level)?)),
            Functional::VaRES(_) => {
                let var = quantile_sorted(&self.sorted, level)?;
                Ok(Forecast::Pair {
                    var,
                    es: tail_mean(&self.sorted, var)?,
                })
            }
        }
    }
}

/// Filtered historical simulation estimate of `ρ(Z)`; `n_draws = None` uses the residuals directly.
pub fn fhs_risk<R: Rng + ?Sized>(
    residuals: &[f64],
    functional: Functional,
    n_draws: Option<usize>,
    rng: &mut R,
) -> Result<Forecast> {
    let sample = match n_draws {
        Some(n) => FhsSample::resample(residuals, n, rng)?,
        None => FhsSample::direct(residuals)?,
    };
    sample.risk(functional)
}
