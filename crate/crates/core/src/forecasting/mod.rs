//! Two-stage conditional risk forecasting: an AR(1)-GARCH(1,1) filter followed by a
//! fully parametric, filtered historical simulation or peaks-over-threshold estimate of
//! the risk of the standardized innovation. The composed forecast is `μ + σ·ρ(Z)`.

pub mod empirical;
pub mod evt;
pub mod fp;
pub mod garch;
pub mod optimize;

pub use empirical::{fhs_risk, FhsSample, DEFAULT_RESAMPLE_SIZE};
pub use evt::{default_tail_count, evt_fit, evt_risk, gpd_fit_mle, EvtEstimate, EvtFit, GpdFit};
pub use fp::fp_risk;
pub use garch::{
    filter, fit_ar_garch_mle, forecast_one_step, simulate_ar_garch, standard_errors, ArGarchParams,
    FilterState, FitOptions, InnovationFamily, Presample, SimulatedPath,
};

use crate::functional::Forecast;

/// `μ + σ·ρ(Z)`.
pub fn compose(mu: f64, sigma: f64, standardized: Forecast) -> Forecast {
    standardized.affine(mu, sigma)
}
