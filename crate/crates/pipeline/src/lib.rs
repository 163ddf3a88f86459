//! Rolling-window backtesting runs on CSV or simulated loss series, the reproduction
//! experiments, and report output (CSV, SVG, terminal tables, JSON manifests).

pub mod commands;
pub mod config;
pub mod emit;
pub mod error;
pub mod ingest;
pub mod methods;
pub mod report;
pub mod reproduce;
pub mod runner;
pub mod validate;

pub use config::{Input, RunConfig};
pub use error::{Error, Result};
pub use methods::{MethodId, Stage};
