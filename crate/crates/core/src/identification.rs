//! Identification functions: the moment conditions behind calibration tests.
//!
//! * VaR: `V(r, x) = 1 - α - 1{x > r}`
//! * Expectile: `V(r, x) = |1 - τ - 1{x > r}| (r - x)`
//! * (VaR, ES): `V = (1 - ν - 1{x > r₁}, r₁ - r₂ - 1{x > r₁}(r₁ - x)/(1 - ν))`
//!
//! Exceedances are strict: an observation equal to the forecast is not an exceedance.

use crate::distributions::DistributionSpec;
use crate::error::Result;
use crate::functional::{Forecast, Functional};
use crate::quadrature::{integrate_split, QuadOptions};

/// Value of an identification function: one component, or two for (VaR, ES).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdValue {
    values: [f64; 2],
    dim: usize,
}

impl IdValue {
    pub fn scalar(v: f64) -> Self {
        Self {
            values: [v, 0.0],
            dim: 1,
        }
    }

    pub fn pair(v1: f64, v2: f64) -> Self {
        Self {
            values: [v1, v2],
            dim: 2,
        }
    }

    pub fn from_slice(v: &[f64]) -> Self {
        match v {
            [a] => Self::scalar(*a),
            [a, b] => Self::pair(*a, *b),
            _ => panic!(
                "identification values have one or two components, got {}",
                v.len()
            ),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values[..self.dim]
    }

    pub fn get(&self, i: usize) -> f64 {
        self.as_slice()[i]
    }
}

/// Evaluates `V(forecast, x)`.
pub fn identify(functional: &Functional, forecast: &Forecast, x: f64) -> Result<IdValue> {
    functional.check_forecast(forecast)?;
    let level = functional.level().value();
    Ok(match (*functional, *forecast) {
        (Functional::VaR(_), Forecast::Point(r)) => {
            IdValue::scalar(if x > r { -level } else { 1.0 - level })
        }
        (Functional::Expectile(_), Forecast::Point(r)) => {
            let w = if x > r { level } else { 1.0 - level };
            IdValue::scalar(w * (r - x))
        }
        (Functional::VaRES(_), Forecast::Pair { var, es }) => {
            if x > var {
                IdValue::pair(-level, var - es - (var - x) / (1.0 - level))
            } else {
                IdValue::pair(1.0 - level, var - es)
            }
        }
        _ => unreachable!("shape checked above"),
    })
}

/// `E V(forecast, X)` under `dist`, by quadrature split at the forecast.
pub fn expected_identification(
    functional: &Functional,
    dist: &DistributionSpec,
    forecast: &Forecast,
) -> Result<IdValue> {
    functional.check_forecast(forecast)?;
    dist.mean()?;
    let (lo, hi) = dist.support();
    let split = match *forecast {
        Forecast::Point(r) => r,
        Forecast::Pair { var, .. } => var,
    };
    let opts = QuadOptions {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        ..QuadOptions::default()
    }
    .with_scale(dist.scale_hint());
    let component = |i: usize| {
        integrate_split(
            |x| {
                let f = dist.pdf(x);
                if f == 0.0 {
                    0.0
                } else {
                    identify(functional, forecast, x).map_or(f64::NAN, |v| v.get(i) * f)
                }
            },
            lo,
            hi,
            &[split],
            &opts,
        )
    };
    Ok(match functional.dimension() {
        1 => IdValue::scalar(component(0)?),
        _ => IdValue::pair(component(0)?, component(1)?),
    })
}

/// Bounds on `E V₂` for a (VaR, ES) forecast `(r₁, r₂)` when the truth is `(r₁*, r₂*)`:
/// `r₂* - r₂ <= E V₂ <= r₂* - r₂ + (ν - F(r₁))(r₁* - r₁)/(1 - ν)`.
pub fn es_component_bounds(
    nu: f64,
    forecast: (f64, f64),
    truth: (f64, f64),
    cdf_at_forecast: f64,
) -> (f64, f64) {
    let (r1, r2) = forecast;
    let (t1, t2) = truth;
    let lower = t2 - r2;
    (
        lower,
        lower + (nu - cdf_at_forecast) * (t1 - r1) / (1.0 - nu),
    )
}
