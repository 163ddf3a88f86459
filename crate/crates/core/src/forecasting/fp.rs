//! Fully parametric second stage: risk of the fitted innovation distribution.

use crate::distributions::DistributionSpec;
use crate::error::Result;
use crate::functional::{Forecast, Functional};

pub fn fp_risk(innovation: &DistributionSpec, functional: Functional) -> Result<Forecast> {
    let level = functional.level().value();
    match functional {
        Functional::VaR(_) => Ok(Forecast::Point(innovation.quantile(level)?)),
        Functional::Expectile(_) => Ok(Forecast::Point(innovation.expectile(level)?)),
        Functional::VaRES(_) => Ok(Forecast::Pair {
            var: innovation.quantile(level)?,
            es: innovation.expected_shortfall(level)?,
        }),
    }
}
