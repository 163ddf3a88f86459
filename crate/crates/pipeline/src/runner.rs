//! Rolling-window forecasting. The forecast for observation `t` is computed from the
//! window `x[t - w .. t]` only.

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::methods::{MethodId, Stage, FAMILIES};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use riskbt_core::forecasting::empirical::empirical_risk;
use riskbt_core::forecasting::{
    compose, evt_fit, filter, fit_ar_garch_mle, forecast_one_step, fp_risk, ArGarchParams,
    FhsSample, FilterState, FitOptions, InnovationFamily,
};
use riskbt_core::{DistributionSpec, Forecast, Functional};

/// True conditional moments of a simulated series, aligned with its losses.
#[derive(Debug, Clone, PartialEq)]
pub struct Oracle {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub innovation: DistributionSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestData {
    pub losses: Vec<f64>,
    pub dates: Option<Vec<String>>,
    pub oracle: Option<Oracle>,
}

/// One method's out-of-sample forecasts for every configured functional.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodForecasts {
    pub method: MethodId,
    /// Predicted conditional mean and volatility per verifying observation.
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    /// The filter fit did not converge and the previous window's parameters were reused.
    pub nonconverged: Vec<bool>,
    /// `forecasts[functional][t]`.
    pub forecasts: Vec<Vec<Forecast>>,
    /// EVT estimate replaced by its empirical counterpart.
    pub fallback: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forecasts {
    pub functionals: Vec<Functional>,
    /// Index of the first verifying observation in the input series.
    pub start: usize,
    /// Verifying observations.
    pub losses: Vec<f64>,
    pub dates: Option<Vec<String>>,
    pub methods: Vec<MethodForecasts>,
    pub warnings: Vec<String>,
}

impl Forecasts {
    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }

    pub fn method(&self, m: MethodId) -> Option<&MethodForecasts> {
        self.methods.iter().find(|f| f.method == m)
    }
}

/// Generator for the resampling step of window `t` and filter family `family`.
pub fn window_rng(seed: u64, t: usize, family: InnovationFamily) -> ChaCha8Rng {
    let idx = FAMILIES
        .iter()
        .position(|&f| f == family)
        .expect("known family") as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 + 3 * t as u64 + idx);
    rng
}

struct FamilyState {
    family: InnovationFamily,
    previous: Option<ArGarchParams>,
}

impl FamilyState {
    /// Fits the window, reusing the previous parameters if the optimizer fails.
    fn fit(&mut self, window: &[f64], opts: &FitOptions, t: usize) -> Result<(FilterState, bool)> {
        let fitted = fit_ar_garch_mle(window, self.family, self.previous.as_ref(), opts);
        let (state, carried) = match (fitted, self.previous) {
            (Ok(s), _) if s.converged => (s, false),
            (Ok(s), None) => (s, true),
            (Ok(_), Some(p)) | (Err(_), Some(p)) => (filter(&p, window, None)?, true),
            (Err(e), None) => {
                return Err(Error::Forecast {
                    method: format!("{}-filter", self.family.prefix()),
                    functional: "all".into(),
                    t,
                    source: e,
                })
            }
        };
        if !carried || self.previous.is_none() {
            self.previous = Some(state.params);
        }
        Ok((state, carried))
    }
}

/// Runs every configured method over the rolling windows of `data`.
pub fn run_forecasts(config: &RunConfig, data: &BacktestData) -> Result<Forecasts> {
    config.validate()?;
    let functionals = config.functionals()?;
    let n = data.losses.len();
    let window = config.window;
    if n < window + crate::config::MIN_OUT_OF_SAMPLE {
        return Err(Error::Config(format!(
            "{n} observations leave fewer than {} verifying points after a window of {window}",
            crate::config::MIN_OUT_OF_SAMPLE
        )));
    }
    if config.methods.contains(&MethodId::Opt) && data.oracle.is_none() {
        return Err(Error::Config(
            "method 'opt' needs the true conditional moments".into(),
        ));
    }
    let out_len = n - window;
    let nf = functionals.len();
    let mut methods: Vec<MethodForecasts> = config
        .methods
        .iter()
        .map(|&method| MethodForecasts {
            method,
            mu: Vec::with_capacity(out_len),
            sigma: Vec::with_capacity(out_len),
            nonconverged: Vec::with_capacity(out_len),
            forecasts: vec![Vec::with_capacity(out_len); nf],
            fallback: vec![Vec::with_capacity(out_len); nf],
        })
        .collect();
    let families: Vec<InnovationFamily> = FAMILIES
        .into_iter()
        .filter(|f| config.methods.iter().any(|m| m.family() == Some(*f)))
        .collect();
    let mut states: Vec<FamilyState> = families
        .iter()
        .map(|&family| FamilyState {
            family,
            previous: None,
        })
        .collect();
    let opts = FitOptions::default();
    let k = config.evt_k();
    let context = |method: MethodId, f: Functional, t: usize| {
        move |source: riskbt_core::Error| Error::Forecast {
            method: method.to_string(),
            functional: f.to_string(),
            t,
            source,
        }
    };

    let opt_standardized: Vec<Forecast> = match &data.oracle {
        Some(o) if config.methods.contains(&MethodId::Opt) => functionals
            .iter()
            .map(|&f| fp_risk(&o.innovation, f).map_err(context(MethodId::Opt, f, window)))
            .collect::<Result<_>>()?,
        _ => Vec::new(),
    };
    let mut evt_shape_warnings = 0usize;

    for t in window..n {
        let x = &data.losses[t - window..t];
        for st in states.iter_mut() {
            let (state, carried) = st.fit(x, &opts, t)?;
            let (mu, sigma) = forecast_one_step(&state);
            let stages: Vec<(usize, Stage)> = methods
                .iter()
                .enumerate()
                .filter_map(|(i, m)| match m.method {
                    MethodId::Filtered { family, stage } if family == st.family => Some((i, stage)),
                    _ => None,
                })
                .collect();
            for (i, stage) in stages {
                let method = methods[i].method;
                let mut fhs = None;
                let mut evt = None;
                for (j, &f) in functionals.iter().enumerate() {
                    let err = context(method, f, t);
                    let (z, fell_back) = match stage {
                        Stage::Fp => (fp_risk(&state.params.innovation, f).map_err(err)?, false),
                        Stage::Fhs => {
                            if fhs.is_none() {
                                fhs = Some(if config.fhs_draws == 0 {
                                    FhsSample::direct(&state.residuals)
                                } else {
                                    let mut rng = window_rng(config.seed, t, st.family);
                                    FhsSample::resample(
                                        &state.residuals,
                                        config.fhs_draws,
                                        &mut rng,
                                    )
                                });
                            }
                            let sample = fhs
                                .as_ref()
                                .expect("set above")
                                .as_ref()
                                .map_err(|e| err(e.clone()))?;
                            (sample.risk(f).map_err(err)?, false)
                        }
                        Stage::Evt => {
                            if evt.is_none() {
                                evt = Some(evt_fit(&state.residuals, k));
                            }
                            let estimate = evt
                                .as_ref()
                                .expect("set above")
                                .as_ref()
                                .map_err(|e| e.clone())
                                .and_then(|fit| fit.risk(f));
                            match estimate {
                                Ok(e) => {
                                    if e.fit.shape > riskbt_core::forecasting::evt::SHAPE_WARNING
                                        && j == 0
                                    {
                                        evt_shape_warnings += 1;
                                    }
                                    (e.forecast, e.fallback)
                                }
                                Err(_) => (empirical_risk(&state.residuals, f).map_err(err)?, true),
                            }
                        }
                    };
                    let m = &mut methods[i];
                    m.forecasts[j].push(compose(mu, sigma, z));
                    m.fallback[j].push(fell_back);
                }
                let m = &mut methods[i];
                m.mu.push(mu);
                m.sigma.push(sigma);
                m.nonconverged.push(carried);
            }
        }
        if let (Some(o), Some(m)) = (
            &data.oracle,
            methods.iter_mut().find(|m| m.method == MethodId::Opt),
        ) {
            for (j, z) in opt_standardized.iter().enumerate() {
                m.forecasts[j].push(compose(o.mu[t], o.sigma[t], *z));
                m.fallback[j].push(false);
            }
            m.mu.push(o.mu[t]);
            m.sigma.push(o.sigma[t]);
            m.nonconverged.push(false);
        }
    }

    let mut warnings = Vec::new();
    if evt_shape_warnings > 0 {
        warnings.push(format!(
            "EVT tail shape above {} in {evt_shape_warnings} window fits",
            riskbt_core::forecasting::evt::SHAPE_WARNING
        ));
    }
    for m in &methods {
        let c = m.nonconverged.iter().filter(|&&b| b).count();
        if c > 0 {
            warnings.push(format!(
                "{}: filter fit reused previous parameters in {c} windows",
                m.method
            ));
        }
    }
    Ok(Forecasts {
        functionals,
        start: window,
        losses: data.losses[window..].to_vec(),
        dates: data.dates.as_ref().map(|d| d[window..].to_vec()),
        methods,
        warnings,
    })
}
