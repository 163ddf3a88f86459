//! AR(1)-GARCH(1,1) simulation, filtering and maximum-likelihood fitting.
//!
//! `X_t = μ_t + σ_t Z_t`, `μ_t = c + φ X_{t-1}`, `σ_t² = ω + α ε_{t-1}² + β σ_{t-1}²`,
//! with `ε_t = X_t - μ_t` and zero-mean, unit-variance innovations `Z_t`.

use super::optimize::{nelder_mead, NelderMeadOptions};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::special::ln_gamma;
use rand::Rng;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InnovationFamily {
    Normal,
    StudentT,
    SkewedT,
}

impl InnovationFamily {
    pub fn prefix(self) -> &'static str {
        match self {
            InnovationFamily::Normal => "n",
            InnovationFamily::StudentT => "t",
            InnovationFamily::SkewedT => "st",
        }
    }

    fn shape_count(self) -> usize {
        match self {
            InnovationFamily::Normal => 0,
            InnovationFamily::StudentT => 1,
            InnovationFamily::SkewedT => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArGarchParams {
    pub c: f64,
    pub phi: f64,
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Standardized innovation distribution.
    pub innovation: DistributionSpec,
}

impl ArGarchParams {
    pub fn new(
        c: f64,
        phi: f64,
        omega: f64,
        alpha: f64,
        beta: f64,
        innovation: DistributionSpec,
    ) -> Result<Self> {
        let p = Self {
            c,
            phi,
            omega,
            alpha,
            beta,
            innovation,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phi.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "|phi| must be below 1, got {}",
                self.phi
            )));
        }
        if !(self.omega > 0.0) || !(self.alpha >= 0.0) || !(self.beta >= 0.0) || !self.c.is_finite()
        {
            return Err(Error::InvalidParameter(
                "GARCH needs omega > 0 and alpha, beta >= 0".into(),
            ));
        }
        if !(self.alpha + self.beta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha + beta must be below 1, got {}",
                self.alpha + self.beta
            )));
        }
        let standardized = match (self.innovation.mean(), self.innovation.variance()) {
            (Ok(m), Ok(v)) => m.abs() < 1e-9 && (v - 1.0).abs() < 1e-9,
            _ => false,
        };
        if !standardized {
            return Err(Error::InvalidParameter(
                "innovations must be standardized".into(),
            ));
        }
        Ok(())
    }

    /// Stationary variance of `ε_t`.
    pub fn shock_variance(&self) -> f64 {
        self.omega / (1.0 - self.alpha - self.beta)
    }

    /// Stationary variance of `X_t`.
    pub fn unconditional_variance(&self) -> f64 {
        self.shock_variance() / (1.0 - self.phi * self.phi)
    }

    pub fn unconditional_mean(&self) -> f64 {
        self.c / (1.0 - self.phi)
    }

    /// The simulation design: `c = -0.05`, `φ = 0.3`, `ω = 0.01`, `α = 0.1`, `β = 0.85` with
    /// standardized skewed-t(5, 1.5) innovations.
    pub fn simulation_design() -> Self {
        let innovation = DistributionSpec::skewed_t(5.0, 1.5)
            .and_then(|d| d.standardized())
            .expect("valid");
        Self::new(-0.05, 0.3, 0.01, 0.1, 0.85, innovation).expect("valid")
    }

    /// Zero-mean GARCH with `ω = 0.05`, `α = 0.2`, `β = 0.75` and unit-variance t₄ innovations.
    pub fn t4_design() -> Self {
        let innovation = DistributionSpec::student_t(4.0)
            .and_then(|d| d.standardized())
            .expect("valid");
        Self::new(0.0, 0.0, 0.05, 0.2, 0.75, innovation).expect("valid")
    }
}

/// State just before the first observation of a series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Presample {
    pub x: f64,
    pub eps: f64,
    pub sigma2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    pub x: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub z: Vec<f64>,
    /// State preceding `x[0]`.
    pub presample: Presample,
}

/// Simulates `n` observations after discarding `burnin`.
pub fn simulate_ar_garch<R: Rng + ?Sized>(
    params: &ArGarchParams,
    n: usize,
    burnin: usize,
    rng: &mut R,
) -> SimulatedPath {
    let mut state = Presample {
        x: params.unconditional_mean(),
        eps: 0.0,
        sigma2: params.shock_variance(),
    };
    let mut path = SimulatedPath {
        x: Vec::with_capacity(n),
        mu: Vec::with_capacity(n),
        sigma: Vec::with_capacity(n),
        z: Vec::with_capacity(n),
        presample: state,
    };
    for t in 0..burnin + n {
        if t == burnin {
            path.presample = state;
        }
        let mu = params.c + params.phi * state.x;
        let sigma2 =
            params.omega + params.alpha * state.eps * state.eps + params.beta * state.sigma2;
        let sigma = sigma2.sqrt();
        let z = params.innovation.sample_one(rng);
        let eps = sigma * z;
        let x = mu + eps;
        if t >= burnin {
            path.x.push(x);
            path.mu.push(mu);
            path.sigma.push(sigma);
            path.z.push(z);
        }
        state = Presample { x, eps, sigma2 };
    }
    path
}

/// Log-density of a standardized innovation, with per-parameter constants hoisted.
#[derive(Debug, Clone, Copy)]
enum LogDensity {
    Normal,
    StudentT {
        nu: f64,
        log_scale: f64,
        scale: f64,
        ln_norm: f64,
    },
    SkewedT {
        nu: f64,
        gamma: f64,
        log_sd: f64,
        sd: f64,
        mean: f64,
        ln_c: f64,
    },
}

impl LogDensity {
    fn new(family: InnovationFamily, shape: &[f64]) -> Self {
        match family {
            InnovationFamily::Normal => LogDensity::Normal,
            InnovationFamily::StudentT => {
                let nu = shape[0];
                let scale = (nu / (nu - 2.0)).sqrt();
                LogDensity::StudentT {
                    nu,
                    log_scale: scale.ln(),
                    scale,
                    ln_norm: t_ln_norm(nu),
                }
            }
            InnovationFamily::SkewedT => {
                let (nu, gamma) = (shape[0], shape[1]);
                let ln_norm = t_ln_norm(nu);
                let base = DistributionSpec::skewed_t(nu, gamma).expect("shape is constrained");
                let mean = base.mean().expect("df exceeds 2");
                let sd = base.variance().expect("df exceeds 2").sqrt();
                let ln_c = (2.0 / (gamma + 1.0 / gamma)).ln() + ln_norm;
                LogDensity::SkewedT {
                    nu,
                    gamma,
                    log_sd: sd.ln(),
                    sd,
                    mean,
                    ln_c,
                }
            }
        }
    }

    #[inline]
    fn eval(&self, z: f64) -> f64 {
        match *self {
            LogDensity::Normal => -0.5 * z * z - 0.918_938_533_204_672_8,
            LogDensity::StudentT {
                nu,
                log_scale,
                scale,
                ln_norm,
            } => {
                let y = scale * z;
                log_scale + ln_norm - 0.5 * (nu + 1.0) * (y * y / nu).ln_1p()
            }
            LogDensity::SkewedT {
                nu,
                gamma,
                log_sd,
                sd,
                mean,
                ln_c,
            } => {
                let y = mean + sd * z;
                let w = if y <= 0.0 { gamma * y } else { y / gamma };
                log_sd + ln_c - 0.5 * (nu + 1.0) * (w * w / nu).ln_1p()
            }
        }
    }
}

fn t_ln_norm(nu: f64) -> f64 {
    ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln()
}

/// Fitted filter over a window.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub family: InnovationFamily,
    pub params: ArGarchParams,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Standardized residuals `(x_t - μ̂_t)/σ̂_t`.
    pub residuals: Vec<f64>,
    pub log_likelihood: f64,
    pub converged: bool,
    pub evaluations: usize,
    last_x: f64,
    last_eps: f64,
    last_sigma2: f64,
}

impl FilterState {
    /// Window length.
    pub fn len(&self) -> usize {
        self.residuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residuals.is_empty()
    }
}

fn sample_moments(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Runs the filter with given parameters; `presample = None` starts from the window
/// mean, a zero shock and the sample variance.
pub fn filter(
    params: &ArGarchParams,
    x: &[f64],
    presample: Option<Presample>,
) -> Result<FilterState> {
    if x.is_empty() {
        return Err(Error::InsufficientData("empty window".into()));
    }
    let family = match params.innovation.family() {
        crate::distributions::Family::Normal { .. } => InnovationFamily::Normal,
        crate::distributions::Family::StudentT { .. } => InnovationFamily::StudentT,
        crate::distributions::Family::SkewedT { .. } => InnovationFamily::SkewedT,
        other => {
            return Err(Error::InvalidParameter(format!(
                "no likelihood for innovation family {other:?}"
            )))
        }
    };
    let shape = shape_of(&params.innovation);
    let dens = LogDensity::new(family, &shape);
    let (mean, var) = sample_moments(x);
    let (mut x_prev, mut eps_prev, mut sigma2) = match presample {
        None => (mean, 0.0, var),
        Some(p) => (
            p.x,
            p.eps,
            params.omega + params.alpha * p.eps * p.eps + params.beta * p.sigma2,
        ),
    };
    let n = x.len();
    let mut out = FilterState {
        family,
        params: *params,
        mu: Vec::with_capacity(n),
        sigma: Vec::with_capacity(n),
        residuals: Vec::with_capacity(n),
        log_likelihood: 0.0,
        converged: true,
        evaluations: 0,
        last_x: 0.0,
        last_eps: 0.0,
        last_sigma2: 0.0,
    };
    let mut first = true;
    for &xt in x {
        if !first {
            sigma2 = params.omega + params.alpha * eps_prev * eps_prev + params.beta * sigma2;
        }
        first = false;
        let mu = params.c + params.phi * x_prev;
        let sigma = sigma2.sqrt();
        let eps = xt - mu;
        let z = eps / sigma;
        out.log_likelihood += dens.eval(z) - sigma.ln();
        out.mu.push(mu);
        out.sigma.push(sigma);
        out.residuals.push(z);
        x_prev = xt;
        eps_prev = eps;
    }
    out.last_x = x_prev;
    out.last_eps = eps_prev;
    out.last_sigma2 = sigma2;
    Ok(out)
}

fn shape_of(d: &DistributionSpec) -> Vec<f64> {
    match d.family() {
        crate::distributions::Family::StudentT { df } => vec![df],
        crate::distributions::Family::SkewedT { df, gamma } => vec![df, gamma],
        _ => Vec::new(),
    }
}

/// `(μ_{n+1}, σ_{n+1})` from a fitted filter.
pub fn forecast_one_step(state: &FilterState) -> (f64, f64) {
    let p = &state.params;
    let mu = p.c + p.phi * state.last_x;
    let sigma2 = p.omega + p.alpha * state.last_eps * state.last_eps + p.beta * state.last_sigma2;
    (mu, sigma2.sqrt())
}

/// Parameters on the natural scale, as a flat vector `(c, φ, ω, α, β, shape…)`.
fn natural(u: &[f64], family: InnovationFamily, sd: f64, var: f64) -> Vec<f64> {
    let c = u[0] * sd;
    let phi = u[1].tanh();
    let omega = u[2].exp() * var;
    let (e3, e4) = (u[3].exp(), u[4].exp());
    let denom = 1.0 + e3 + e4;
    let mut out = vec![c, phi, omega, e3 / denom, e4 / denom];
    match family {
        InnovationFamily::Normal => {}
        InnovationFamily::StudentT => out.push(2.0 + u[5].exp()),
        InnovationFamily::SkewedT => {
            out.push(2.0 + u[5].exp());
            out.push(u[6].exp());
        }
    }
    out
}

fn unconstrained(theta: &[f64], family: InnovationFamily, sd: f64, var: f64) -> Vec<f64> {
    let (alpha, beta) = (theta[3].max(1e-8), theta[4].max(1e-8));
    let rest = (1.0 - alpha - beta).max(1e-8);
    let mut u = vec![
        theta[0] / sd,
        theta[1].clamp(-0.999, 0.999).atanh(),
        (theta[2] / var).max(1e-300).ln(),
        (alpha / rest).ln(),
        (beta / rest).ln(),
    ];
    match family {
        InnovationFamily::Normal => {}
        InnovationFamily::StudentT => u.push((theta[5] - 2.0).max(1e-6).ln()),
        InnovationFamily::SkewedT => {
            u.push((theta[5] - 2.0).max(1e-6).ln());
            u.push(theta[6].max(1e-6).ln());
        }
    }
    u
}

/// Builds parameters from a natural-scale vector.
fn params_from(theta: &[f64], family: InnovationFamily) -> Result<ArGarchParams> {
    let innovation = match family {
        InnovationFamily::Normal => DistributionSpec::normal(0.0, 1.0)?,
        InnovationFamily::StudentT => DistributionSpec::student_t(theta[5])?.standardized()?,
        InnovationFamily::SkewedT => {
            DistributionSpec::skewed_t(theta[5], theta[6])?.standardized()?
        }
    };
    ArGarchParams::new(theta[0], theta[1], theta[2], theta[3], theta[4], innovation)
}

fn natural_of(p: &ArGarchParams) -> Vec<f64> {
    let mut v = vec![p.c, p.phi, p.omega, p.alpha, p.beta];
    v.extend(shape_of(&p.innovation));
    v
}

/// Negative log-likelihood on the natural scale, with the default presample.
fn neg_loglik(theta: &[f64], family: InnovationFamily, x: &[f64], mean: f64, var: f64) -> f64 {
    let dens = LogDensity::new(family, &theta[5..]);
    let (c, phi, omega, alpha, beta) = (theta[0], theta[1], theta[2], theta[3], theta[4]);
    let mut x_prev = mean;
    let mut eps_prev = 0.0;
    let mut sigma2 = var;
    let mut ll = 0.0;
    for (t, &xt) in x.iter().enumerate() {
        if t > 0 {
            sigma2 = omega + alpha * eps_prev * eps_prev + beta * sigma2;
        }
        let eps = xt - c - phi * x_prev;
        let sigma = sigma2.sqrt();
        ll += dens.eval(eps / sigma) - sigma.ln();
        x_prev = xt;
        eps_prev = eps;
    }
    -ll
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub nelder_mead: NelderMeadOptions,
    /// Restart the simplex from the best point this many times.
    pub restarts: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            nelder_mead: NelderMeadOptions {
                f_tol: 1e-8,
                x_tol: 1e-5,
                max_evals: 6000,
                step: 0.3,
            },
            restarts: 2,
        }
    }
}

/// Maximum-likelihood fit of an AR(1)-GARCH(1,1) model.
///
/// Starts from moment-based values and, if given, from `warm_start`; the better optimum
/// is kept. `converged` is false if no start met the tolerance.
pub fn fit_ar_garch_mle(
    x: &[f64],
    family: InnovationFamily,
    warm_start: Option<&ArGarchParams>,
    opts: &FitOptions,
) -> Result<FilterState> {
    if x.len() < 250 {
        return Err(Error::InsufficientData(format!(
            "window of {} observations, need at least 250",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "window contains non-finite values".into(),
        ));
    }
    let (mean, var) = sample_moments(x);
    if !(var > 1e-300) || var <= 1e-24 * mean * mean {
        return Err(Error::Fit("window has zero variance".into()));
    }
    let sd = var.sqrt();
    let n = x.len();
    let lag1 = {
        let num: f64 = x.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
        (num / (n as f64 * var)).clamp(-0.9, 0.9)
    };
    let (a0, b0) = (0.05, 0.90);
    let mut moment = vec![
        mean * (1.0 - lag1),
        lag1,
        var * (1.0 - a0 - b0) * (1.0 - lag1 * lag1),
        a0,
        b0,
    ];
    match family {
        InnovationFamily::Normal => {}
        InnovationFamily::StudentT => moment.push(8.0),
        InnovationFamily::SkewedT => {
            moment.push(8.0);
            moment.push(1.0);
        }
    }
    let mut starts = vec![(
        unconstrained(&moment, family, sd, var),
        opts.nelder_mead.step,
    )];
    if let Some(w) = warm_start {
        let theta = natural_of(w);
        if theta.len() == 5 + family.shape_count() {
            starts.push((unconstrained(&theta, family, sd, var), 0.05));
        }
    }
    let objective = |u: &[f64]| {
        let theta = natural(u, family, sd, var);
        neg_loglik(&theta, family, x, mean, var)
    };
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    let mut evaluations = 0;
    for (start, step) in starts {
        let mut point = start;
        let mut converged = false;
        let mut value = f64::INFINITY;
        for round in 0..=opts.restarts {
            let nm = NelderMeadOptions {
                step: if round == 0 { step } else { step.min(0.05) },
                ..opts.nelder_mead
            };
            let m = nelder_mead(objective, &point, &nm);
            evaluations += m.evals;
            let improved = value - m.value;
            point = m.x;
            value = m.value;
            converged = m.converged;
            if round > 0 && m.converged && improved.abs() <= opts.nelder_mead.f_tol.max(1e-9) {
                break;
            }
        }
        if value.is_finite() && best.as_ref().is_none_or(|b| value < b.1) {
            best = Some((point, value, converged));
        }
    }
    let (u, _, converged) =
        best.ok_or_else(|| Error::Fit("likelihood is not finite at any start".into()))?;
    let theta = natural(&u, family, sd, var);
    let params = params_from(&theta, family)?;
    let mut state = filter(&params, x, None)?;
    state.converged = converged;
    state.evaluations = evaluations;
    if !state.log_likelihood.is_finite() || state.sigma.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::Fit("fitted filter is degenerate".into()));
    }
    Ok(state)
}

/// Asymptotic standard errors of `(c, φ, ω, α, β, shape…)` from a finite-difference
/// Hessian of the log-likelihood at the fitted parameters.
pub fn standard_errors(state: &FilterState, x: &[f64]) -> Result<Vec<f64>> {
    let theta = natural_of(&state.params);
    let (mean, var) = sample_moments(x);
    let d = theta.len();
    let f = |t: &[f64]| neg_loglik(t, state.family, x, mean, var);
    let h: Vec<f64> = theta.iter().map(|v| 1e-4 * v.abs().max(1e-3)).collect();
    let mut hess = nalgebra::DMatrix::zeros(d, d);
    let f0 = f(&theta);
    for i in 0..d {
        for j in i..d {
            let mut t = theta.clone();
            let val = if i == j {
                t[i] = theta[i] + h[i];
                let fp = f(&t);
                t[i] = theta[i] - h[i];
                let fm = f(&t);
                (fp - 2.0 * f0 + fm) / (h[i] * h[i])
            } else {
                let mut eval = |si: f64, sj: f64| {
                    t[i] = theta[i] + si * h[i];
                    t[j] = theta[j] + sj * h[j];
                    f(&t)
                };
                (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0))
                    / (4.0 * h[i] * h[j])
            };
            hess[(i, j)] = val;
            hess[(j, i)] = val;
        }
    }
    let inv = hess
        .try_inverse()
        .ok_or_else(|| Error::Fit("singular information matrix".into()))?;
    (0..d)
        .map(|i| {
            let v = inv[(i, i)];
            if v > 0.0 {
                Ok(v.sqrt())
            } else {
                Err(Error::Fit(
                    "information matrix is not positive definite".into(),
                ))
            }
        })
        .collect()
}

/// Flat natural-scale parameter vector `(c, φ, ω, α, β, shape…)`.
pub fn parameter_vector(p: &ArGarchParams) -> Vec<f64> {
    natural_of(p)
}
