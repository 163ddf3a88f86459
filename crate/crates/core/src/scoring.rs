//! Consistent scoring functions for VaR, expectiles and (VaR, ES).
//!
//! Each [`ScoreSpec`] pairs a functional with a generator:
//!
//! * VaR: `S(r, x) = (1 - α - 1{x > r}) G(r) + 1{x > r} G(x)` for increasing `G`.
//! * Expectile: `S(r, x) = 1{x > r}(1 - 2τ)(φ(r) - φ(x) - φ'(r)(r - x)) - (1 - τ)(φ(r) - φ'(r)(r - x))`
//!   for convex `φ`.
//! * (VaR, ES): `S = 1{x > r₁}(G₁(x) - G₁(r₁) - G₂(r₂)(r₁ - x)) + (1 - ν)(G₁(r₁) - G₂(r₂)(r₂ - r₁) + 𝒢₂(r₂))`
//!   with `𝒢₂' = G₂`, increasing `G₁` and increasing concave `𝒢₂`.
//!
//! Lower scores are better. Generators restricted to positive arguments reject
//! non-positive forecasts with [`Error::Domain`].

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::functional::{Forecast, Functional};
use crate::level::Level;
use crate::quadrature::{integrate_split, QuadOptions};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarGenerator {
    /// `G(r) = r`.
    Linear,
    /// `G(r) = log r`, positive forecasts only.
    Log,
    /// `G(x) = sign(x)|x|^b` for `b > 0`, `G(x) = -x^b` on `x > 0` for `b < 0`.
    Power(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExpectileGenerator {
    /// `φ(r) = r²`.
    Quadratic,
    /// `φ(r) = -log r`, positive forecasts only.
    NegLog,
    /// `φ(x) = |x|^b` for `b > 1`, `φ(x) = x^b / (b(b - 1))` on `x > 0` for `b < 1`, `b ≠ 0`.
    Power(f64),
    /// `φ(x) = x log x` on `x > 0`; only its score differences are homogeneous (of degree 1).
    XLogX,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VaResGenerator {
    /// `G₁ = 0`, `𝒢₂(r) = √r`.
    Sqrt,
    /// `G₁ = 0`, `𝒢₂(r) = log r`.
    Log,
    /// `b ∈ (0, 1)`: `G₁(x) = sign(x)|x|^b`, `𝒢₂(x) = x^b`; `b < 0`: `G₁ = 0`, `𝒢₂(x) = -x^b`.
    Power(f64),
    /// `G₁(x) = (1 - ν)x`, `𝒢₂(r) = -log(1 + e^{-r})`, rescaled by `1/(1 - ν)` and shifted by
    /// `-(1 - ν)x`. Defined for every real forecast pair; not homogeneous.
    Logistic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    VaR(VarGenerator),
    Expectile(ExpectileGenerator),
    VaRES(VaResGenerator),
}

/// Homogeneity declared by a score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Homogeneity {
    /// `S(cr, cx) = c^b S(r, x)`.
    Degree(f64),
    /// `S(cr, cx) - S(cr', cx) = c^b (S(r, x) - S(r', x))`.
    DifferenceDegree(f64),
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreSpec {
    functional: Functional,
    generator: Generator,
}

impl ScoreSpec {
    pub fn new(functional: Functional, generator: Generator) -> Result<Self> {
        match (functional, generator) {
            (Functional::VaR(_), Generator::VaR(g)) => {
                if let VarGenerator::Power(b) = g {
                    if !(b.is_finite() && b != 0.0) {
                        return Err(Error::InvalidParameter(format!(
                            "VaR power must be non-zero, got {b}"
                        )));
                    }
                }
            }
            (Functional::Expectile(_), Generator::Expectile(g)) => {
                if let ExpectileGenerator::Power(b) = g {
                    if !(b.is_finite() && b != 0.0 && b != 1.0) {
                        return Err(Error::InvalidParameter(format!(
                            "expectile power must differ from 0 and 1, got {b}"
                        )));
                    }
                }
            }
            (Functional::VaRES(_), Generator::VaRES(g)) => {
                if let VaResGenerator::Power(b) = g {
                    if !(b.is_finite() && (b < 0.0 || (b > 0.0 && b < 1.0))) {
                        return Err(Error::InvalidParameter(format!(
                            "(VaR, ES) power must lie in (0, 1) or be negative, got {b}"
                        )));
                    }
                }
            }
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "generator {generator:?} does not belong to functional {functional}"
                )))
            }
        }
        Ok(Self {
            functional,
            generator,
        })
    }

    pub fn var(alpha: f64, g: VarGenerator) -> Result<Self> {
        Self::new(Functional::VaR(Level::new(alpha)?), Generator::VaR(g))
    }

    pub fn expectile(tau: f64, g: ExpectileGenerator) -> Result<Self> {
        Self::new(
            Functional::Expectile(Level::new(tau)?),
            Generator::Expectile(g),
        )
    }

    pub fn vares(nu: f64, g: VaResGenerator) -> Result<Self> {
        Self::new(Functional::VaRES(Level::new(nu)?), Generator::VaRES(g))
    }

    pub fn functional(&self) -> Functional {
        self.functional
    }

    pub fn generator(&self) -> Generator {
        self.generator
    }

    pub fn level(&self) -> Level {
        self.functional.level()
    }

    /// Short identifier of the generator, e.g. `linear` or `sqrt`.
    pub fn generator_name(&self) -> String {
        match self.generator {
            Generator::VaR(VarGenerator::Linear) => "linear".into(),
            Generator::VaR(VarGenerator::Log) => "log".into(),
            Generator::Expectile(ExpectileGenerator::Quadratic) => "quadratic".into(),
            Generator::Expectile(ExpectileGenerator::NegLog) => "neglog".into(),
            Generator::Expectile(ExpectileGenerator::XLogX) => "xlogx".into(),
            Generator::VaRES(VaResGenerator::Sqrt) => "sqrt".into(),
            Generator::VaRES(VaResGenerator::Log) => "log".into(),
            Generator::VaRES(VaResGenerator::Logistic) => "logistic".into(),
            Generator::VaR(VarGenerator::Power(b))
            | Generator::Expectile(ExpectileGenerator::Power(b))
            | Generator::VaRES(VaResGenerator::Power(b)) => format!("power({b})"),
        }
    }

    pub fn homogeneity(&self) -> Homogeneity {
        match self.generator {
            Generator::VaR(VarGenerator::Linear) => Homogeneity::Degree(1.0),
            Generator::VaR(VarGenerator::Log) => Homogeneity::DifferenceDegree(0.0),
            Generator::VaR(VarGenerator::Power(b)) => Homogeneity::Degree(b),
            Generator::Expectile(ExpectileGenerator::Quadratic) => Homogeneity::Degree(2.0),
            Generator::Expectile(ExpectileGenerator::NegLog) => Homogeneity::DifferenceDegree(0.0),
            Generator::Expectile(ExpectileGenerator::Power(b)) => Homogeneity::Degree(b),
            Generator::Expectile(ExpectileGenerator::XLogX) => Homogeneity::DifferenceDegree(1.0),
            Generator::VaRES(VaResGenerator::Sqrt) => Homogeneity::Degree(0.5),
            Generator::VaRES(VaResGenerator::Log) => Homogeneity::DifferenceDegree(0.0),
            Generator::VaRES(VaResGenerator::Power(b)) => Homogeneity::Degree(b),
            Generator::VaRES(VaResGenerator::Logistic) => Homogeneity::None,
        }
    }

    /// Whether the forecast (or its ES component) must be strictly positive.
    pub fn requires_positive_forecast(&self) -> bool {
        match self.generator {
            Generator::VaR(VarGenerator::Linear) => false,
            Generator::VaR(VarGenerator::Log) => true,
            Generator::VaR(VarGenerator::Power(b)) => b < 0.0,
            Generator::Expectile(ExpectileGenerator::Quadratic) => false,
            Generator::Expectile(ExpectileGenerator::NegLog | ExpectileGenerator::XLogX) => true,
            Generator::Expectile(ExpectileGenerator::Power(b)) => b < 1.0,
            Generator::VaRES(VaResGenerator::Logistic) => false,
            Generator::VaRES(_) => true,
        }
    }

    fn check_domain(&self, forecast: &Forecast) -> Result<()> {
        self.functional.check_forecast(forecast)?;
        let values: &[f64] = match forecast {
            Forecast::Point(r) => &[*r],
            Forecast::Pair { var, es } => &[*var, *es],
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite forecast {forecast:?}")));
        }
        if self.requires_positive_forecast() && forecast.headline() <= 0.0 {
            return Err(Error::Domain(format!(
                "score {} needs a positive forecast, got {forecast:?}",
                self.generator_name()
            )));
        }
        Ok(())
    }

    pub fn score(&self, forecast: &Forecast, x: f64) -> Result<f64> {
        self.check_domain(forecast)?;
        if !x.is_finite() {
            return Err(Error::Domain(format!("non-finite observation {x}")));
        }
        let level = self.level().value();
        let s = match (self.generator, *forecast) {
            (Generator::VaR(g), Forecast::Point(r)) => var_score(g, level, r, x),
            (Generator::Expectile(g), Forecast::Point(r)) => expectile_score(g, level, r, x),
            (Generator::VaRES(g), Forecast::Pair { var, es }) => vares_score(g, level, var, es, x),
            _ => unreachable!("shape checked above"),
        };
        if s.is_finite() {
            Ok(s)
        } else {
            Err(Error::Domain(format!(
                "score is not finite at forecast {forecast:?}, x = {x}"
            )))
        }
    }

    /// `S(r, x) - S(r', x)`.
    pub fn score_difference(&self, r: &Forecast, r_alt: &Forecast, x: f64) -> Result<f64> {
        Ok(self.score(r, x)? - self.score(r_alt, x)?)
    }

    /// `E S(r, X)` under `dist`, by quadrature split at the forecast.
    pub fn expected_score(&self, dist: &DistributionSpec, forecast: &Forecast) -> Result<f64> {
        self.check_domain(forecast)?;
        let (lo, hi) = dist.support();
        let split = match *forecast {
            Forecast::Point(r) => r,
            Forecast::Pair { var, .. } => var,
        };
        let opts = QuadOptions {
            rel_tol: 1e-11,
            abs_tol: 1e-13,
            ..QuadOptions::default()
        }
        .with_scale(dist.scale_hint());
        let value = integrate_split(
            |x| {
                let f = dist.pdf(x);
                if f == 0.0 {
                    0.0
                } else {
                    self.score(forecast, x).map_or(f64::NAN, |s| s * f)
                }
            },
            lo,
            hi,
            &[split],
            &opts,
        )?;
        Ok(value)
    }
}

fn power_sign(x: f64, b: f64) -> f64 {
    x.abs().powf(b).copysign(x)
}

fn var_g(g: VarGenerator, v: f64) -> f64 {
    match g {
        VarGenerator::Linear => v,
        VarGenerator::Log => v.ln(),
        VarGenerator::Power(b) if b > 0.0 => power_sign(v, b),
        VarGenerator::Power(b) => -v.powf(b),
    }
}

fn var_score(g: VarGenerator, alpha: f64, r: f64, x: f64) -> f64 {
    if x > r {
        -alpha * var_g(g, r) + var_g(g, x)
    } else {
        (1.0 - alpha) * var_g(g, r)
    }
}

fn expectile_score(g: ExpectileGenerator, tau: f64, r: f64, x: f64) -> f64 {
    let exceed = x > r;
    match g {
        ExpectileGenerator::Quadratic => {
            let base = (1.0 - tau) * r * (r - 2.0 * x);
            if exceed {
                base - (1.0 - 2.0 * tau) * (x - r) * (x - r)
            } else {
                base
            }
        }
        ExpectileGenerator::NegLog => {
            let q = x / r;
            let base = (1.0 - tau) * (r.ln() - 1.0 + q);
            if exceed {
                base + (1.0 - 2.0 * tau) * (q.ln() + 1.0 - q)
            } else {
                base
            }
        }
        ExpectileGenerator::Power(_) | ExpectileGenerator::XLogX => {
            let (phi, dphi) = phi_pair(g);
            let bregman_base = phi(r) - dphi(r) * (r - x);
            let mut s = -(1.0 - tau) * bregman_base;
            if exceed {
                s += (1.0 - 2.0 * tau) * (bregman_base - phi(x));
            }
            s
        }
    }
}

type RealFn = Box<dyn Fn(f64) -> f64>;

fn phi_pair(g: ExpectileGenerator) -> (RealFn, RealFn) {
    match g {
        ExpectileGenerator::Power(b) if b > 1.0 => (
            Box::new(move |v: f64| v.abs().powf(b)),
            Box::new(move |v: f64| b * power_sign(v, b - 1.0)),
        ),
        ExpectileGenerator::Power(b) => (
            Box::new(move |v: f64| v.powf(b) / (b * (b - 1.0))),
            Box::new(move |v: f64| v.powf(b - 1.0) / (b - 1.0)),
        ),
        ExpectileGenerator::XLogX => (
            Box::new(|v: f64| v * v.ln()),
            Box::new(|v: f64| v.ln() + 1.0),
        ),
        ExpectileGenerator::Quadratic => (Box::new(|v: f64| v * v), Box::new(|v: f64| 2.0 * v)),
        ExpectileGenerator::NegLog => (Box::new(|v: f64| -v.ln()), Box::new(|v: f64| -1.0 / v)),
    }
}

fn vares_score(g: VaResGenerator, nu: f64, r1: f64, r2: f64, x: f64) -> f64 {
    let exceed = x > r1;
    match g {
        VaResGenerator::Sqrt => {
            let root = r2.sqrt();
            let base = (1.0 - nu) * (r1 + r2) / (2.0 * root);
            if exceed {
                base + (x - r1) / (2.0 * root)
            } else {
                base
            }
        }
        VaResGenerator::Log => {
            let base = (1.0 - nu) * (r1 / r2 - 1.0 + r2.ln());
            if exceed {
                base + (x - r1) / r2
            } else {
                base
            }
        }
        VaResGenerator::Power(b) => {
            let (g1, g2, cal_g2): (f64, f64, f64);
            if b > 0.0 {
                g1 = power_sign(r1, b);
                g2 = b * r2.powf(b - 1.0);
                cal_g2 = r2.powf(b);
            } else {
                g1 = 0.0;
                g2 = -b * r2.powf(b - 1.0);
                cal_g2 = -r2.powf(b);
            }
            let mut s = (1.0 - nu) * (g1 - g2 * (r2 - r1) + cal_g2);
            if exceed {
                let g1x = if b > 0.0 { power_sign(x, b) } else { 0.0 };
                s += g1x - g1 - g2 * (r1 - x);
            }
            s
        }
        VaResGenerator::Logistic => {
            let ind = if exceed { 1.0 } else { 0.0 };
            // 1 / (1 + e^{r2}) and log(1 + e^{-r2}), both evaluated without overflow.
            let weight = if r2 > 0.0 {
                let e = (-r2).exp();
                e / (1.0 + e)
            } else {
                1.0 / (1.0 + r2.exp())
            };
            let softplus = if r2 > 0.0 {
                (-r2).exp().ln_1p()
            } else {
                -r2 + r2.exp().ln_1p()
            };
            (ind - (1.0 - nu)) * (x - r1) + weight * (r1 - r2 + ind * (x - r1) / (1.0 - nu))
                - softplus
        }
    }
}

/// Outcome of [`validate_homogeneity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneityReport {
    pub declared: Homogeneity,
    pub degree_confirmed: bool,
    pub max_rel_err: f64,
    pub trials: usize,
}

/// Checks the declared homogeneity on random `(c, r, x)` triples.
///
/// Relative errors are measured against the magnitude of the scores that enter the
/// comparison, so that cancellation in score differences is not mistaken for a
/// failure of the identity.
pub fn validate_homogeneity<R: Rng + ?Sized>(
    spec: &ScoreSpec,
    trials: usize,
    rng: &mut R,
) -> HomogeneityReport {
    let declared = spec.homogeneity();
    let (b, differences) = match declared {
        Homogeneity::Degree(b) => (b, false),
        Homogeneity::DifferenceDegree(b) => (b, true),
        Homogeneity::None => {
            return HomogeneityReport {
                declared,
                degree_confirmed: false,
                max_rel_err: f64::NAN,
                trials: 0,
            }
        }
    };
    let positive = spec.requires_positive_forecast();
    let draw_forecast = |rng: &mut R| -> Forecast {
        let draw = |rng: &mut R| {
            let mag = (rng.gen_range(-1.5..1.5f64)).exp();
            if positive || rng.gen_bool(0.7) {
                mag
            } else {
                -mag
            }
        };
        match spec.functional() {
            Functional::VaRES(_) => {
                let var = draw(rng);
                let es = if positive {
                    var.abs() * rng.gen_range(1.0..2.0)
                } else {
                    draw(rng)
                };
                Forecast::Pair { var, es }
            }
            _ => Forecast::Point(draw(rng)),
        }
    };
    let mut max_rel_err = 0.0f64;
    for _ in 0..trials {
        let c = rng.gen_range(-2.0..2.0f64).exp();
        let r = draw_forecast(rng);
        let x = rng.gen_range(-1.0..4.0) * 1.5;
        let scale = c.powf(b);
        let (lhs, rhs, magnitude) = if differences {
            let r_alt = draw_forecast(rng);
            let s1 = spec.score(&r.scaled(c), c * x);
            let s2 = spec.score(&r_alt.scaled(c), c * x);
            let t1 = spec.score(&r, x);
            let t2 = spec.score(&r_alt, x);
            match (s1, s2, t1, t2) {
                (Ok(s1), Ok(s2), Ok(t1), Ok(t2)) => (
                    s1 - s2,
                    scale * (t1 - t2),
                    s1.abs() + s2.abs() + scale * (t1.abs() + t2.abs()),
                ),
                _ => continue,
            }
        } else {
            match (spec.score(&r.scaled(c), c * x), spec.score(&r, x)) {
                (Ok(s), Ok(t)) => (s, scale * t, s.abs().max((scale * t).abs())),
                _ => continue,
            }
        };
        let err = if magnitude > 0.0 {
            (lhs - rhs).abs() / magnitude
        } else {
            (lhs - rhs).abs()
        };
        max_rel_err = max_rel_err.max(err);
    }
    HomogeneityReport {
        declared,
        degree_confirmed: max_rel_err <= 1e-10,
        max_rel_err,
        trials,
    }
}
