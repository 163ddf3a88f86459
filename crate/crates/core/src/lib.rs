//! Tools for comparing and backtesting forecasts of VaR, expectiles and the
//! (VaR, ES) pair: consistent scoring functions, identification functions,
//! conditional calibration tests, comparative Diebold–Mariano tests and the
//! AR-GARCH forecasting methods used to produce the forecasts.

// `!(x > 0.0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod comparative;
pub mod distributions;
pub mod error;
pub mod forecasting;
pub mod functional;
pub mod identification;
pub mod level;
pub mod quadrature;
pub mod roots;
pub mod scoring;
pub mod special;

pub use distributions::{DistributionSpec, Family};
pub use error::{Error, Result};
pub use functional::{Forecast, Functional, FunctionalKind};
pub use level::Level;
