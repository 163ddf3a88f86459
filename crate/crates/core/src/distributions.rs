//! Parametric loss distributions with closed-form expectile curves.
//!
//! Every family exposes density, distribution function, quantile, partial moment
//! `M(z) = E[X 1{X <= z}]`, mean, variance, the expectile curve `G` (the inverse of
//! `τ ↦ e_τ`), expectiles, expected shortfall and inverse-CDF sampling. A
//! `DistributionSpec` may be *standardized*, meaning the family is shifted and scaled to
//! zero mean and unit variance.

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::roots::solve_increasing;
use crate::special::{norm_cdf, norm_pdf, norm_quantile, StudentT};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Normal {
        mu: f64,
        sigma: f64,
    },
    Exponential {
        rate: f64,
    },
    StudentT {
        df: f64,
    },
    /// Pareto on `[1, ∞)` with tail index `shape`.
    Pareto {
        shape: f64,
    },
    Gpd {
        scale: f64,
        shape: f64,
    },
    /// Two-piece Student-t with inverse scale `gamma` on the negative half-line.
    SkewedT {
        df: f64,
        gamma: f64,
    },
    /// Asymmetric Student-t with skewness `alpha` and left/right tail parameters.
    Ast {
        alpha: f64,
        df_left: f64,
        df_right: f64,
    },
}

#[derive(Debug, Clone, Copy)]
enum Base {
    Normal {
        mu: f64,
        sigma: f64,
    },
    Exponential {
        rate: f64,
    },
    T {
        t: StudentT,
    },
    Pareto {
        a: f64,
    },
    Gpd {
        beta: f64,
        xi: f64,
    },
    SkewedT {
        t: StudentT,
        gamma: f64,
    },
    Ast {
        alpha: f64,
        astar: f64,
        b: f64,
        t1: StudentT,
        t2: StudentT,
    },
}

const XI_ZERO: f64 = 1e-12;

impl Base {
    fn pdf(&self, y: f64) -> f64 {
        match *self {
            Base::Normal { mu, sigma } => norm_pdf((y - mu) / sigma) / sigma,
            Base::Exponential { rate } => {
                if y < 0.0 {
                    0.0
                } else {
                    rate * (-rate * y).exp()
                }
            }
            Base::T { t } => t.pdf(y),
            Base::Pareto { a } => {
                if y < 1.0 {
                    0.0
                } else {
                    a * y.powf(-a - 1.0)
                }
            }
            Base::Gpd { beta, xi } => {
                if y < 0.0 {
                    return 0.0;
                }
                if xi.abs() < XI_ZERO {
                    return (-y / beta).exp() / beta;
                }
                let s = 1.0 + xi * y / beta;
                if s <= 0.0 {
                    0.0
                } else {
                    s.powf(-1.0 / xi - 1.0) / beta
                }
            }
            Base::SkewedT { t, gamma } => {
                let c = 2.0 / (gamma + 1.0 / gamma);
                if y <= 0.0 {
                    c * t.pdf(gamma * y)
                } else {
                    c * t.pdf(y / gamma)
                }
            }
            Base::Ast {
                alpha,
                astar,
                t1,
                t2,
                ..
            } => {
                if y <= 0.0 {
                    alpha / astar * t1.pdf(y / (2.0 * astar))
                } else {
                    (1.0 - alpha) / (1.0 - astar) * t2.pdf(y / (2.0 * (1.0 - astar)))
                }
            }
        }
    }

    fn cdf(&self, y: f64) -> f64 {
        match *self {
            Base::Normal { mu, sigma } => norm_cdf((y - mu) / sigma),
            Base::Exponential { rate } => {
                if y <= 0.0 {
                    0.0
                } else {
                    -(-rate * y).exp_m1()
                }
            }
            Base::T { t } => t.cdf(y),
            Base::Pareto { a } => {
                if y <= 1.0 {
                    0.0
                } else {
                    1.0 - y.powf(-a)
                }
            }
            Base::Gpd { beta, xi } => {
                if y <= 0.0 {
                    return 0.0;
                }
                if xi.abs() < XI_ZERO {
                    return -(-y / beta).exp_m1();
                }
                let s = 1.0 + xi * y / beta;
                if s <= 0.0 {
                    1.0
                } else {
                    1.0 - s.powf(-1.0 / xi)
                }
            }
            Base::SkewedT { t, gamma } => {
                let g2 = gamma * gamma;
                if y <= 0.0 {
                    2.0 / (1.0 + g2) * t.cdf(gamma * y)
                } else {
                    1.0 / (1.0 + g2) + 2.0 * g2 / (1.0 + g2) * (t.cdf(y / gamma) - 0.5)
                }
            }
            Base::Ast {
                alpha,
                astar,
                t1,
                t2,
                ..
            } => {
                if y <= 0.0 {
                    2.0 * alpha * t1.cdf(y / (2.0 * astar))
                } else {
                    alpha + 2.0 * (1.0 - alpha) * (t2.cdf(y / (2.0 * (1.0 - astar))) - 0.5)
                }
            }
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        match *self {
            Base::Normal { mu, sigma } => mu + sigma * norm_quantile(p),
            Base::Exponential { rate } => -(-p).ln_1p() / rate,
            Base::T { t } => t.quantile(p),
            Base::Pareto { a } => (1.0 - p).powf(-1.0 / a),
            Base::Gpd { beta, xi } => {
                if xi.abs() < XI_ZERO {
                    -beta * (-p).ln_1p()
                } else {
                    beta / xi * ((-xi * (-p).ln_1p()).exp_m1())
                }
            }
            Base::SkewedT { t, gamma } => {
                let g2 = gamma * gamma;
                let p0 = 1.0 / (1.0 + g2);
                if p <= p0 {
                    t.quantile(0.5 * p * (1.0 + g2)) / gamma
                } else {
                    gamma * t.quantile(0.5 + (p - p0) * (1.0 + g2) / (2.0 * g2))
                }
            }
            Base::Ast {
                alpha,
                astar,
                t1,
                t2,
                ..
            } => {
                if p <= alpha {
                    2.0 * astar * t1.quantile(p / (2.0 * alpha))
                } else {
                    2.0 * (1.0 - astar) * t2.quantile(0.5 + (p - alpha) / (2.0 * (1.0 - alpha)))
                }
            }
        }
    }

    fn support(&self) -> (f64, f64) {
        match *self {
            Base::Exponential { .. } => (0.0, f64::INFINITY),
            Base::Pareto { .. } => (1.0, f64::INFINITY),
            Base::Gpd { beta, xi } => {
                if xi < -XI_ZERO {
                    (0.0, -beta / xi)
                } else {
                    (0.0, f64::INFINITY)
                }
            }
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    fn mean(&self) -> Result<f64> {
        match *self {
            Base::Normal { mu, .. } => Ok(mu),
            Base::Exponential { rate } => Ok(1.0 / rate),
            Base::T { t } => {
                if t.df() > 1.0 {
                    Ok(0.0)
                } else {
                    Err(Error::MomentUndefined("Student-t mean needs df > 1".into()))
                }
            }
            Base::Pareto { a } => {
                if a > 1.0 {
                    Ok(a / (a - 1.0))
                } else {
                    Err(Error::MomentUndefined("Pareto mean needs shape > 1".into()))
                }
            }
            Base::Gpd { beta, xi } => {
                if xi < 1.0 {
                    Ok(beta / (1.0 - xi))
                } else {
                    Err(Error::MomentUndefined("GPD mean needs shape < 1".into()))
                }
            }
            Base::SkewedT { t, gamma } => {
                let nu = t.df();
                Ok(2.0 * t.density_at_zero() * nu / (nu - 1.0) * (gamma - 1.0 / gamma))
            }
            Base::Ast {
                astar, b, t1, t2, ..
            } => {
                let (n1, n2) = (t1.df(), t2.df());
                Ok(4.0
                    * b
                    * (-astar * astar * n1 / (n1 - 1.0) + (1.0 - astar).powi(2) * n2 / (n2 - 1.0)))
            }
        }
    }

    fn variance(&self) -> Result<f64> {
        match *self {
            Base::Normal { sigma, .. } => Ok(sigma * sigma),
            Base::Exponential { rate } => Ok(1.0 / (rate * rate)),
            Base::T { t } => {
                let nu = t.df();
                if nu > 2.0 {
                    Ok(nu / (nu - 2.0))
                } else {
                    Err(Error::MomentUndefined(
                        "Student-t variance needs df > 2".into(),
                    ))
                }
            }
            Base::Pareto { a } => {
                if a > 2.0 {
                    Ok(a / ((a - 1.0).powi(2) * (a - 2.0)))
                } else {
                    Err(Error::MomentUndefined(
                        "Pareto variance needs shape > 2".into(),
                    ))
                }
            }
            Base::Gpd { beta, xi } => {
                if xi < 0.5 {
                    Ok(beta * beta / ((1.0 - xi).powi(2) * (1.0 - 2.0 * xi)))
                } else {
                    Err(Error::MomentUndefined(
                        "GPD variance needs shape < 1/2".into(),
                    ))
                }
            }
            Base::SkewedT { t, gamma } => {
                let nu = t.df();
                let k = t.density_at_zero();
                let g2 = gamma * gamma;
                let spread = (gamma + 1.0 / gamma).powi(2);
                let second = nu / (nu - 2.0) * (1.0 - 3.0 * g2 / (1.0 + g2).powi(2));
                let first =
                    4.0 * k * k * (nu / (nu - 1.0)).powi(2) * (1.0 - 2.0 / (1.0 + g2)).powi(2);
                Ok((second - first) * spread)
            }
            Base::Ast {
                alpha,
                astar,
                t1,
                t2,
                ..
            } => {
                let (n1, n2) = (t1.df(), t2.df());
                let m = self.mean()?;
                Ok(4.0
                    * (alpha * astar * astar * n1 / (n1 - 2.0)
                        + (1.0 - alpha) * (1.0 - astar).powi(2) * n2 / (n2 - 2.0))
                    - m * m)
            }
        }
    }

    /// `E[Y 1{Y <= z}]`; the caller has checked that the mean exists.
    fn partial_moment(&self, z: f64) -> f64 {
        match *self {
            Base::Normal { mu, sigma } => {
                let w = (z - mu) / sigma;
                mu * norm_cdf(w) - sigma * norm_pdf(w)
            }
            Base::Exponential { rate } => {
                if z <= 0.0 {
                    0.0
                } else {
                    1.0 / rate - (-rate * z).exp() * (z + 1.0 / rate)
                }
            }
            Base::T { t } => {
                let nu = t.df();
                -(nu + z * z) / (nu - 1.0) * t.pdf(z)
            }
            Base::Pareto { a } => {
                if z <= 1.0 {
                    0.0
                } else {
                    a / (a - 1.0) * (1.0 - z.powf(1.0 - a))
                }
            }
            Base::Gpd { beta, xi } => {
                if z <= 0.0 {
                    return 0.0;
                }
                let m = beta / (1.0 - xi);
                let surv = 1.0 - self.cdf(z);
                if surv <= 0.0 {
                    m
                } else {
                    m - surv * (z + (beta + xi * z) / (1.0 - xi))
                }
            }
            Base::SkewedT { t, gamma } => {
                let nu = t.df();
                let c = 2.0 / (gamma + 1.0 / gamma);
                let g0 = t.density_at_zero();
                let m0 = -c / (gamma * gamma) * nu / (nu - 1.0) * g0;
                if z <= 0.0 {
                    -c / (gamma * gamma) * (nu + gamma * gamma * z * z) / (nu - 1.0)
                        * t.pdf(gamma * z)
                } else {
                    let w = z / gamma;
                    m0 + c
                        * gamma
                        * gamma
                        * (nu / (nu - 1.0) * g0 - (nu + w * w) / (nu - 1.0) * t.pdf(w))
                }
            }
            Base::Ast {
                alpha,
                astar,
                t1,
                t2,
                ..
            } => {
                let (n1, n2) = (t1.df(), t2.df());
                if z <= 0.0 {
                    let w = z / (2.0 * astar);
                    -4.0 * alpha * astar * (n1 + w * w) / (n1 - 1.0) * t1.pdf(w)
                } else {
                    let w = z / (2.0 * (1.0 - astar));
                    let m0 = -4.0 * alpha * astar * n1 / (n1 - 1.0) * t1.density_at_zero();
                    m0 + 4.0
                        * (1.0 - alpha)
                        * (1.0 - astar)
                        * (n2 / (n2 - 1.0) * t2.density_at_zero()
                            - (n2 + w * w) / (n2 - 1.0) * t2.pdf(w))
                }
            }
        }
    }

    /// Closed-form expectile curve; the caller has checked that the mean exists.
    fn expectile_curve(&self, z: f64) -> f64 {
        match *self {
            Base::Normal { mu, sigma } => {
                let w = (z - mu) / sigma;
                let a = w * norm_cdf(w) + norm_pdf(w);
                a / (2.0 * a - w)
            }
            Base::Exponential { rate } => {
                if z <= 0.0 {
                    return 0.0;
                }
                let u = rate * z;
                let num = (-u).exp_m1() + u;
                num / (num + (-u).exp())
            }
            Base::T { t } => {
                let nu = t.df();
                let a = z * t.cdf(z) + (nu + z * z) / (nu - 1.0) * t.pdf(z);
                a / (2.0 * a - z)
            }
            Base::Pareto { a } => {
                if z <= 1.0 {
                    return 0.0;
                }
                let f = self.cdf(z);
                let num = a * (1.0 - z) + z * f;
                let den = a * (1.0 - z) + z * (2.0 * f - 1.0);
                num / den
            }
            Base::Gpd { beta, xi } => {
                if z <= 0.0 {
                    return 0.0;
                }
                let h = self.cdf(z);
                let s = beta + xi * z;
                (z - s * h) / (beta + z * (1.0 + xi) - 2.0 * s * h)
            }
            Base::SkewedT { t, gamma } => {
                let nu = t.df();
                let c = 2.0 / (gamma + 1.0 / gamma);
                let g2 = gamma * gamma;
                let f = self.cdf(z);
                let dens = self.pdf(z);
                let a = if z <= 0.0 {
                    z * f + (nu / g2 + z * z) / (nu - 1.0) * dens
                } else {
                    z * f + (nu * g2 + z * z) / (nu - 1.0) * dens
                        - nu / (nu - 1.0) * (g2 - 1.0 / g2) * c * t.density_at_zero()
                };
                let mean = 2.0 * t.density_at_zero() * nu / (nu - 1.0) * (gamma - 1.0 / gamma);
                a / (2.0 * a + mean - z)
            }
            Base::Ast { .. } => self.expectile_curve_generic(z),
        }
    }

    fn expectile_curve_generic(&self, z: f64) -> f64 {
        let mean = self.mean().expect("mean checked by caller");
        let a = z * self.cdf(z) - self.partial_moment(z);
        if a <= 0.0 {
            return 0.0;
        }
        a / (2.0 * a + mean - z)
    }
}

/// A loss distribution: a parametric family, optionally standardized.
#[derive(Debug, Clone, Copy)]
pub struct DistributionSpec {
    family: Family,
    base: Base,
    standardized: bool,
    loc: f64,
    scale: f64,
}

impl PartialEq for DistributionSpec {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family && self.standardized == other.standardized
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl DistributionSpec {
    pub fn new(family: Family) -> Result<Self> {
        let base = match family {
            Family::Normal { mu, sigma } => {
                if !mu.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "mu must be finite, got {mu}"
                    )));
                }
                positive("sigma", sigma)?;
                Base::Normal { mu, sigma }
            }
            Family::Exponential { rate } => {
                positive("rate", rate)?;
                Base::Exponential { rate }
            }
            Family::StudentT { df } => {
                if !(df > 1.0 && df.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "Student-t df must exceed 1, got {df}"
                    )));
                }
                Base::T {
                    t: StudentT::new(df),
                }
            }
            Family::Pareto { shape } => {
                if !(shape > 1.0 && shape.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "Pareto shape must exceed 1, got {shape}"
                    )));
                }
                Base::Pareto { a: shape }
            }
            Family::Gpd { scale, shape } => {
                positive("scale", scale)?;
                if !shape.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "shape must be finite, got {shape}"
                    )));
                }
                Base::Gpd {
                    beta: scale,
                    xi: shape,
                }
            }
            Family::SkewedT { df, gamma } => {
                if !(df > 2.0 && df.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "skewed-t df must exceed 2, got {df}"
                    )));
                }
                positive("gamma", gamma)?;
                Base::SkewedT {
                    t: StudentT::new(df),
                    gamma,
                }
            }
            Family::Ast {
                alpha,
                df_left,
                df_right,
            } => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "AST alpha must lie in (0, 1), got {alpha}"
                    )));
                }
                for (name, v) in [("df_left", df_left), ("df_right", df_right)] {
                    if !(v > 2.0 && v.is_finite()) {
                        return Err(Error::InvalidParameter(format!(
                            "AST {name} must exceed 2, got {v}"
                        )));
                    }
                }
                let (t1, t2) = (StudentT::new(df_left), StudentT::new(df_right));
                let (k1, k2) = (t1.density_at_zero(), t2.density_at_zero());
                let b = alpha * k1 + (1.0 - alpha) * k2;
                Base::Ast {
                    alpha,
                    astar: alpha * k1 / b,
                    b,
                    t1,
                    t2,
                }
            }
        };
        Ok(Self {
            family,
            base,
            standardized: false,
            loc: 0.0,
            scale: 1.0,
        })
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(Family::Normal { mu, sigma })
    }
    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(Family::Exponential { rate })
    }
    pub fn student_t(df: f64) -> Result<Self> {
        Self::new(Family::StudentT { df })
    }
    pub fn pareto(shape: f64) -> Result<Self> {
        Self::new(Family::Pareto { shape })
    }
    pub fn gpd(scale: f64, shape: f64) -> Result<Self> {
        Self::new(Family::Gpd { scale, shape })
    }
    pub fn skewed_t(df: f64, gamma: f64) -> Result<Self> {
        Self::new(Family::SkewedT { df, gamma })
    }
    pub fn ast(alpha: f64, df_left: f64, df_right: f64) -> Result<Self> {
        Self::new(Family::Ast {
            alpha,
            df_left,
            df_right,
        })
    }

    /// Shifts and scales the family to zero mean and unit variance.
    pub fn standardized(self) -> Result<Self> {
        if self.standardized {
            return Ok(self);
        }
        let mean = self.base.mean()?;
        let var = self.base.variance()?;
        Ok(Self {
            standardized: true,
            loc: mean,
            scale: var.sqrt(),
            ..self
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    #[inline]
    fn affine(&self, x: f64) -> f64 {
        self.loc + self.scale * x
    }

    #[inline]
    fn affine_inverse(&self, y: f64) -> f64 {
        (y - self.loc) / self.scale
    }

    /// Lower and upper end of the support.
    pub fn support(&self) -> (f64, f64) {
        let (a, b) = self.base.support();
        (self.affine_inverse(a), self.affine_inverse(b))
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.scale * self.base.pdf(self.affine(x))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.base.cdf(self.affine(x))
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::LevelOutOfRange(p));
        }
        Ok(self.affine_inverse(self.base.quantile(p)))
    }

    pub fn mean(&self) -> Result<f64> {
        let m = self.base.mean()?;
        Ok(if self.standardized { 0.0 } else { m })
    }

    pub fn variance(&self) -> Result<f64> {
        let v = self.base.variance()?;
        Ok(if self.standardized { 1.0 } else { v })
    }

    /// `E[X 1{X <= z}]`.
    pub fn partial_moment(&self, z: f64) -> Result<f64> {
        self.base.mean()?;
        let y = self.affine(z);
        Ok((self.base.partial_moment(y) - self.loc * self.base.cdf(y)) / self.scale)
    }

    /// The expectile curve `G(z)`, i.e. the level whose expectile equals `z`.
    pub fn expectile_curve(&self, z: f64) -> Result<f64> {
        self.base.mean()?;
        Ok(self.base.expectile_curve(self.affine(z)))
    }

    /// The expectile curve assembled from the partial moment,
    /// `(zF(z) - M(z)) / (2(zF(z) - M(z)) + E X - z)`.
    pub fn expectile_curve_generic(&self, z: f64) -> Result<f64> {
        self.base.mean()?;
        Ok(self.base.expectile_curve_generic(self.affine(z)))
    }

    /// A typical spread of the distribution, finite even without a variance.
    pub fn scale_hint(&self) -> f64 {
        self.spread_base() / self.scale
    }

    fn spread_base(&self) -> f64 {
        match self.base.variance() {
            Ok(v) if v.is_finite() && v > 0.0 => v.sqrt(),
            _ => {
                let iqr = self.base.quantile(0.75) - self.base.quantile(0.25);
                if iqr.is_finite() && iqr > 0.0 {
                    iqr
                } else {
                    1.0
                }
            }
        }
    }

    pub fn expectile(&self, tau: f64) -> Result<f64> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::LevelOutOfRange(tau));
        }
        let mean = self.base.mean()?;
        let (lo, hi) = self.base.support();
        let lower = lo.is_finite().then_some(lo);
        let upper = hi.is_finite().then_some(hi);
        let root = solve_increasing(
            |y| self.base.expectile_curve(y) - tau,
            mean,
            self.spread_base(),
            lower,
            upper,
        )?;
        Ok(self.affine_inverse(root))
    }

    /// Expected shortfall `E[X | X >= q_ν]`, by quadrature of the upper tail.
    pub fn expected_shortfall(&self, nu: f64) -> Result<f64> {
        if !(nu > 0.0 && nu < 1.0) {
            return Err(Error::LevelOutOfRange(nu));
        }
        self.base.mean()?;
        let q = self.base.quantile(nu);
        let (_, hi) = self.base.support();
        let opts = QuadOptions::default().with_scale(self.spread_base().max(q.abs() * 0.25));
        let excess = integrate(|y| (y - q) * self.base.pdf(y), q, hi, &opts)?;
        Ok(self.affine_inverse(q + excess / (1.0 - nu)))
    }

    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let u: f64 = rng.gen();
            if u > 0.0 {
                return self.affine_inverse(self.base.quantile(u));
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }
}
