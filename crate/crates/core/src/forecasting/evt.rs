//! Peaks-over-threshold estimation of the upper tail of standardized residuals.

use super::empirical;
use crate::error::{Error, Result};
use crate::functional::{Forecast, Functional};
use crate::roots::solve_increasing;

/// Maximum-likelihood estimate of a generalized Pareto distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpdFit {
    pub scale: f64,
    pub shape: f64,
    pub log_likelihood: f64,
    pub n: usize,
}

impl GpdFit {
    /// Asymptotic standard errors `(se(β̂), se(ξ̂))`, valid for `ξ > -1/2`.
    pub fn standard_errors(&self) -> Option<(f64, f64)> {
        if self.shape <= -0.5 {
            return None;
        }
        let n = self.n as f64;
        let one_xi = 1.0 + self.shape;
        Some(((2.0 * one_xi / n).sqrt() * self.scale, one_xi / n.sqrt()))
    }
}

fn gpd_loglik(excesses: &[f64], scale: f64, shape: f64) -> f64 {
    let n = excesses.len() as f64;
    if shape.abs() < 1e-12 {
        return -n * scale.ln() - excesses.iter().sum::<f64>() / scale;
    }
    let mut s = 0.0;
    for &y in excesses {
        let a = 1.0 + shape * y / scale;
        if a <= 0.0 {
            return f64::NEG_INFINITY;
        }
        s += a.ln();
    }
    -n * scale.ln() - (1.0 / shape + 1.0) * s
}

/// Profile log-likelihood in `θ = ξ/β`, where `ξ(θ) = mean(log(1 + θy))`.
/// Returns `(value, ξ)`.
fn profile(excesses: &[f64], theta: f64, mean: f64) -> (f64, f64) {
    let n = excesses.len() as f64;
    if theta.abs() * mean < 1e-10 {
        return (-n * mean.ln() - n, 0.0);
    }
    let s: f64 = excesses.iter().map(|&y| (theta * y).ln_1p()).sum();
    let xi = s / n;
    (-n * (xi / theta).ln() - s - n, xi)
}

/// Generalized Pareto fit to positive excesses by profiling the likelihood over
/// `θ = ξ/β` on a grid, refined by golden-section search. Only `ξ > -1` is admitted.
pub fn gpd_fit_mle(excesses: &[f64]) -> Result<GpdFit> {
    if excesses.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "{} excesses, need at least 10",
            excesses.len()
        )));
    }
    if excesses.iter().any(|&y| !(y > 0.0 && y.is_finite())) {
        return Err(Error::InvalidParameter(
            "excesses must be positive and finite".into(),
        ));
    }
    let n = excesses.len();
    let mean = excesses.iter().sum::<f64>() / n as f64;
    let ymax = excesses.iter().cloned().fold(0.0, f64::max);
    // t = θ·ymax = -1 + e^v ranges over (-1, 1e4].
    let to_theta = |v: f64| (v.exp() - 1.0) / ymax;
    let eval = |v: f64| {
        let (l, xi) = profile(excesses, to_theta(v), mean);
        if xi > -1.0 && l.is_finite() {
            l
        } else {
            f64::NEG_INFINITY
        }
    };
    let (v_lo, v_hi) = ((1e-10f64).ln(), (1e4f64 + 1.0).ln());
    let steps = 200;
    let h = (v_hi - v_lo) / steps as f64;
    let grid: Vec<f64> = (0..=steps).map(|i| eval(v_lo + i as f64 * h)).collect();
    let best = (0..=steps)
        .max_by(|&a, &b| grid[a].total_cmp(&grid[b]))
        .ok_or_else(|| Error::Fit("empty profile grid".into()))?;
    if !grid[best].is_finite() {
        return Err(Error::Fit("profile likelihood is not finite".into()));
    }
    let (mut a, mut b) = (
        v_lo + best.saturating_sub(1) as f64 * h,
        v_lo + (best + 1).min(steps) as f64 * h,
    );
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (eval(c), eval(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = eval(d);
        }
    }
    let v = if fc > fd { c } else { d };
    let v = if eval(v) >= grid[best] {
        v
    } else {
        v_lo + best as f64 * h
    };
    let theta = to_theta(v);
    let (_, xi) = profile(excesses, theta, mean);
    let scale = if xi == 0.0 { mean } else { xi / theta };
    let log_likelihood = gpd_loglik(excesses, scale, xi);
    if !(scale > 0.0 && scale.is_finite() && log_likelihood.is_finite()) {
        return Err(Error::Fit(
            "GPD likelihood did not produce a valid maximum".into(),
        ));
    }
    Ok(GpdFit {
        scale,
        shape: xi,
        log_likelihood,
        n,
    })
}

/// Default tail count: 60 for a window of 500, `⌊0.12·n⌋` otherwise.
pub fn default_tail_count(n: usize) -> usize {
    (n as f64 * 0.12).floor() as usize
}

pub const SHAPE_WARNING: f64 = 0.9;

/// Tail model above the threshold `u = z₍ₖ₊₁₎`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvtFit {
    pub threshold: f64,
    pub k: usize,
    pub n: usize,
    pub scale: f64,
    pub shape: f64,
    /// `(1/n) Σ zᵢ 1{zᵢ ≤ u}`.
    pub body_mean: f64,
    sorted: Vec<f64>,
}

impl EvtFit {
    pub fn tail_fraction(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Tail estimate of `VaR_α`.
    pub fn var(&self, alpha: f64) -> f64 {
        let ratio = self.tail_fraction() / (1.0 - alpha);
        if self.shape.abs() < 1e-12 {
            self.threshold + self.scale * ratio.ln()
        } else {
            self.threshold + self.scale / self.shape * (ratio.powf(self.shape) - 1.0)
        }
    }

    /// Tail estimate of `ES_ν`; requires `ξ < 1`.
    pub fn es(&self, nu: f64) -> Result<f64> {
        self.require_finite_mean()?;
        let xi = self.shape;
        Ok(self.var(nu) / (1.0 - xi) + (self.scale - xi * self.threshold) / (1.0 - xi))
    }

    fn require_finite_mean(&self) -> Result<()> {
        if self.shape >= 1.0 {
            Err(Error::MomentUndefined(format!(
                "tail shape {} is not below 1",
                self.shape
            )))
        } else {
            Ok(())
        }
    }

    /// `E[Z] = z̄ᵤ + (k/n)(u + β/(1-ξ))` under the tail model.
    pub fn model_mean(&self) -> f64 {
        self.body_mean + self.tail_fraction() * (self.threshold + self.scale / (1.0 - self.shape))
    }

    /// Tail estimate of the expectile curve `G` at `z ≥ u`.
    pub fn expectile_curve(&self, z: f64) -> f64 {
        let (u, b, xi) = (self.threshold, self.scale, self.shape);
        let y = (z - u).max(0.0);
        let survival = if xi.abs() < 1e-12 {
            (-y / b).exp()
        } else {
            (1.0 + xi * y / b).powf(-1.0 / xi)
        };
        let upper = self.tail_fraction() * survival * (b + xi * y) / (1.0 - xi);
        let lower = z - self.model_mean() + upper;
        lower / (lower + upper)
    }

    /// Tail estimate of the `τ`-expectile, falling back to the empirical expectile
    /// when `G(u) ≥ τ` or the tail curve is not increasing.
    pub fn expectile(&self, tau: f64) -> Result<(f64, bool)> {
        self.require_finite_mean()?;
        let u = self.threshold;
        let g_u = self.expectile_curve(u);
        if !(g_u < tau) || !self.curve_is_increasing() {
            return Ok((empirical::expectile(&self.sorted, tau)?, true));
        }
        let spread = self.scale.max(1e-12);
        let root = solve_increasing(
            |z| self.expectile_curve(z) - tau,
            u + spread,
            spread,
            Some(u),
            None,
        )?;
        Ok((root, false))
    }

    fn curve_is_increasing(&self) -> bool {
        let u = self.threshold;
        let span = self.scale.max(1e-12);
        let mut prev = self.expectile_curve(u);
        for i in 1..=200 {
            let z = u + span * ((i as f64 / 20.0).exp() - 1.0);
            let g = self.expectile_curve(z);
            if g.is_nan() || g < prev - 1e-12 {
                return false;
            }
            prev = g;
        }
        true
    }
}

/// Fits the tail model with `k` exceedances.
pub fn evt_fit(residuals: &[f64], k: usize) -> Result<EvtFit> {
    let n = residuals.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "tail count {k} must lie in 1..{n}"
        )));
    }
    if residuals.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("residuals must be finite".into()));
    }
    let mut sorted = residuals.to_vec();
    sorted.sort_by(f64::total_cmp);
    let threshold = sorted[n - k - 1];
    let excesses: Vec<f64> = sorted[n - k..]
        .iter()
        .map(|z| z - threshold)
        .filter(|&y| y > 0.0)
        .collect();
    if excesses.len() < k {
        return Err(Error::Fit(format!(
            "ties at the threshold {threshold} leave {} positive excesses",
            excesses.len()
        )));
    }
    let fit = gpd_fit_mle(&excesses)?;
    let body_mean = sorted[..n - k].iter().sum::<f64>() / n as f64;
    Ok(EvtFit {
        threshold,
        k,
        n,
        scale: fit.scale,
        shape: fit.shape,
        body_mean,
        sorted,
    })
}

/// EVT risk estimate with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EvtEstimate {
    pub forecast: Forecast,
    pub fit: EvtFit,
    /// The expectile came from the empirical estimator.
    pub fallback: bool,
    pub warnings: Vec<String>,
}

pub fn evt_risk(residuals: &[f64], functional: Functional, k: usize) -> Result<EvtEstimate> {
    evt_fit(residuals, k)?.risk(functional)
}

impl EvtFit {
    /// Risk estimate of `functional` from this fit.
    pub fn risk(&self, functional: Functional) -> Result<EvtEstimate> {
        let level = functional.level().value();
        let mut warnings = Vec::new();
        if self.shape > SHAPE_WARNING {
            warnings.push(format!(
                "tail shape estimate {:.3} exceeds {SHAPE_WARNING}",
                self.shape
            ));
        }
        let mut fallback = false;
        let forecast = match functional {
            Functional::VaR(_) => Forecast::Point(self.var(level)),
            Functional::VaRES(_) => Forecast::Pair {
                var: self.var(level),
                es: self.es(level)?,
            },
            Functional::Expectile(_) => {
                let (e, fb) = self.expectile(level)?;
                fallback = fb;
                Forecast::Point(e)
            }
        };
        if !matches!(functional, Functional::Expectile(_)) && 1.0 - level > self.tail_fraction() {
            warnings.push(format!(
                "level {level} lies below the threshold's tail fraction"
            ));
        }
        Ok(EvtEstimate {
            forecast,
            fit: self.clone(),
            fallback,
            warnings,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gpd_sample(n: usize, beta: f64, xi: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let u: f64 = rng.gen();
                beta / xi * ((1.0 - u).powf(-xi) - 1.0)
            })
            .collect()
    }

    #[test]
    fn profile_maximum_is_a_stationary_point_of_the_full_likelihood() {
        let y = gpd_sample(5000, 1.0, 0.2, 3);
        let fit = gpd_fit_mle(&y).unwrap();
        let l0 = gpd_loglik(&y, fit.scale, fit.shape);
        for (db, dx) in [(1e-3, 0.0), (-1e-3, 0.0), (0.0, 1e-3), (0.0, -1e-3)] {
            assert!(gpd_loglik(&y, fit.scale + db, fit.shape + dx) <= l0 + 1e-9);
        }
    }

    #[test]
    fn negative_shape_is_recovered() {
        let y = gpd_sample(20_000, 2.0, -0.3, 5);
        let fit = gpd_fit_mle(&y).unwrap();
        assert!((fit.shape + 0.3).abs() < 0.05, "{fit:?}");
        assert!((fit.scale - 2.0).abs() < 0.1, "{fit:?}");
    }

    #[test]
    fn too_few_excesses() {
        assert!(gpd_fit_mle(&[1.0; 5]).is_err());
        assert!(gpd_fit_mle(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 0.0]).is_err());
    }

    #[test]
    fn curve_at_threshold_matches_direct_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let z: Vec<f64> = (0..500)
            .map(|_| rng.gen::<f64>() * 4.0 - 2.0 + rng.gen::<f64>().powi(-2) * 0.01)
            .collect();
        let fit = evt_fit(&z, 60).unwrap();
        let kn = fit.tail_fraction();
        let a = fit.threshold * (1.0 - kn) - fit.body_mean;
        let direct = a / (a + kn * fit.scale / (1.0 - fit.shape));
        assert!((fit.expectile_curve(fit.threshold) - direct).abs() < 1e-12);
    }

    #[test]
    fn threshold_is_order_statistic() {
        let z: Vec<f64> = (0..100)
            .map(|i| ((i * 37) % 100) as f64 + 0.5 * ((i * 7) % 3) as f64 / 10.0)
            .collect();
        let fit = evt_fit(&z, 10).unwrap();
        let mut s = z.clone();
        s.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(fit.threshold, s[10]);
        assert!(evt_fit(&z, 100).is_err());
    }
}
