//! Special functions and the standard distributions used throughout the crate.
//!
//! The error function comes from `libm`, the inverse error function and incomplete
//! gamma/beta primitives from `statrs`;
//! everything built on top of them lives here so the rest of the crate has a
//! single numerics surface.

use statrs::function::{beta, erf, gamma};
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn ln_gamma(x: f64) -> f64 {
    gamma::ln_gamma(x)
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Regularized upper incomplete gamma function `Q(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma::gamma_ur(a, x)
}

/// Regularized lower incomplete beta function `I_x(a, b)`.
pub fn beta_inc(a: f64, b: f64, x: f64) -> f64 {
    beta::beta_reg(a, b, x.clamp(0.0, 1.0))
}

/// Inverse of [`beta_inc`] in `x`.
pub fn beta_inc_inv(a: f64, b: f64, p: f64) -> f64 {
    beta::inv_beta_reg(a, b, p.clamp(0.0, 1.0))
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    -SQRT_2 * erf::erfc_inv(2.0 * p)
}

/// Student-t distribution with `df` degrees of freedom, unit scale, zero location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudentT {
    df: f64,
    ln_norm: f64,
}

impl StudentT {
    pub fn new(df: f64) -> Self {
        let ln_norm = ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df) - 0.5 * (df * PI).ln();
        Self { df, ln_norm }
    }

    pub fn df(&self) -> f64 {
        self.df
    }

    /// Density at zero, the constant `Γ((ν+1)/2) / (√(πν) Γ(ν/2))`.
    pub fn density_at_zero(&self) -> f64 {
        self.ln_norm.exp()
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        self.ln_norm - 0.5 * (self.df + 1.0) * (x * x / self.df).ln_1p()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if x.is_infinite() {
            return if x > 0.0 { 1.0 } else { 0.0 };
        }
        let nu = self.df;
        let x2 = x * x;
        if x2 < nu {
            let central = beta_inc(0.5, 0.5 * nu, x2 / (nu + x2));
            0.5 + 0.5 * central.copysign(x)
        } else {
            let tail = 0.5 * beta_inc(0.5 * nu, 0.5, nu / (nu + x2));
            if x < 0.0 {
                tail
            } else {
                1.0 - tail
            }
        }
    }

    /// Lower-tail probability computed without cancellation for `x < 0`.
    fn lower_tail(&self, x: f64) -> f64 {
        debug_assert!(x <= 0.0);
        let nu = self.df;
        let x2 = x * x;
        if x2 < nu {
            0.5 - 0.5 * beta_inc(0.5, 0.5 * nu, x2 / (nu + x2))
        } else {
            0.5 * beta_inc(0.5 * nu, 0.5, nu / (nu + x2))
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if p >= 1.0 {
            return f64::INFINITY;
        }
        if p == 0.5 {
            return 0.0;
        }
        let q = p.min(1.0 - p);
        let t = self.lower_quantile(q);
        if p < 0.5 {
            t
        } else {
            -t
        }
    }

    /// Quantile for a lower-tail probability `q < 0.5`, returned as a negative number.
    fn lower_quantile(&self, q: f64) -> f64 {
        let mut t = -hill_start(2.0 * q, self.df);
        if !t.is_finite() {
            t = self.beta_route(q);
        }
        let mut converged = false;
        for _ in 0..8 {
            let f = self.lower_tail(t.min(0.0)) - q;
            let d = self.pdf(t);
            if d <= 0.0 || !d.is_finite() {
                break;
            }
            let step = f / d;
            let next = t - step;
            t = if next >= 0.0 { 0.5 * t } else { next };
            if step.abs() <= 1e-15 * t.abs().max(1e-300) {
                converged = true;
                break;
            }
        }
        if !converged && ((self.lower_tail(t.min(0.0)) - q).abs() > 1e-12 * q || !t.is_finite()) {
            t = self.beta_route(q);
        }
        t
    }

    fn beta_route(&self, q: f64) -> f64 {
        let x = beta_inc_inv(0.5 * self.df, 0.5, 2.0 * q);
        -(self.df * (1.0 - x) / x).sqrt()
    }
}

/// Hill's asymptotic start for the t quantile given a two-sided tail probability.
fn hill_start(two_sided: f64, n: f64) -> f64 {
    if (n - 1.0).abs() < 1e-12 {
        let a = two_sided * std::f64::consts::FRAC_PI_2;
        return a.cos() / a.sin();
    }
    if (n - 2.0).abs() < 1e-12 {
        return (2.0 / (two_sided * (2.0 - two_sided)) - 2.0).sqrt();
    }
    let a = 1.0 / (n - 0.5);
    let b = 48.0 / (a * a);
    let mut c = ((20700.0 * a / b - 98.0) * a - 16.0) * a + 96.36;
    let d = ((94.5 / (b + c) - 3.0) / b + 1.0) * (a * std::f64::consts::FRAC_PI_2).sqrt() * n;
    let mut y = (d * two_sided).powf(2.0 / n);
    if (n < 2.1 && two_sided > 0.5) || y > 0.05 + a {
        let x = norm_quantile(0.5 * two_sided);
        y = x * x;
        if n < 5.0 {
            c += 0.3 * (n - 4.5) * (x + 0.6);
        }
        c += (((0.05 * d * x - 5.0) * x - 7.0) * x - 2.0) * x + b;
        y = (((((0.4 * y + 6.3) * y + 36.0) * y + 94.5) / c - y - 3.0) / b + 1.0) * x;
        y = (a * y * y).exp_m1();
    } else {
        y = ((1.0 / (((n + 6.0) / (n * y) - 0.089 * d - 0.822) * (n + 2.0) * 3.0)
            + 0.5 / (n + 4.0))
            * y
            - 1.0)
            * (n + 1.0)
            / (n + 2.0)
            + 1.0 / y;
    }
    (n * y).sqrt()
}

/// Survival function of the chi-square distribution with `k` degrees of freedom.
pub fn chi2_sf(x: f64, k: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(0.5 * k, 0.5 * x)
}

pub fn ln_binomial_pmf(k: u64, n: u64, p: f64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let (kf, nf) = (k as f64, n as f64);
    let ln_choose = ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0);
    let a = if k == 0 { 0.0 } else { kf * p.ln() };
    let b = if k == n {
        0.0
    } else {
        (nf - kf) * (-p).ln_1p()
    };
    ln_choose + a + b
}

pub fn binomial_pmf(k: u64, n: u64, p: f64) -> f64 {
    ln_binomial_pmf(k, n, p).exp()
}
