//! Forecasting method identifiers such as `st-EVT` or `opt`.

use crate::error::{Error, Result};
use riskbt_core::forecasting::InnovationFamily;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Second stage applied to the filtered residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    /// Risk of the fitted innovation distribution.
    Fp,
    /// Filtered historical simulation.
    Fhs,
    /// Peaks over threshold.
    Evt,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Fp => "FP",
            Stage::Fhs => "FHS",
            Stage::Evt => "EVT",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MethodId {
    Filtered {
        family: InnovationFamily,
        stage: Stage,
    },
    /// Forecasts from the true data-generating process; simulated input only.
    Opt,
}

impl MethodId {
    pub const fn filtered(family: InnovationFamily, stage: Stage) -> Self {
        MethodId::Filtered { family, stage }
    }

    /// The nine filtered methods followed by `opt`.
    pub fn all() -> Vec<MethodId> {
        let mut out = Vec::with_capacity(10);
        for family in FAMILIES {
            for stage in [Stage::Fp, Stage::Fhs, Stage::Evt] {
                out.push(MethodId::filtered(family, stage));
            }
        }
        out.push(MethodId::Opt);
        out
    }

    pub fn family(self) -> Option<InnovationFamily> {
        match self {
            MethodId::Filtered { family, .. } => Some(family),
            MethodId::Opt => None,
        }
    }
}

pub const FAMILIES: [InnovationFamily; 3] = [
    InnovationFamily::Normal,
    InnovationFamily::StudentT,
    InnovationFamily::SkewedT,
];

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodId::Filtered { family, stage } => {
                write!(f, "{}-{}", family.prefix(), stage.as_str())
            }
            MethodId::Opt => f.write_str("opt"),
        }
    }
}

impl FromStr for MethodId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("opt") {
            return Ok(MethodId::Opt);
        }
        let bad = || Error::Config(format!("unknown method '{s}'"));
        let (prefix, stage) = s.split_once('-').ok_or_else(bad)?;
        let family = FAMILIES
            .into_iter()
            .find(|f| f.prefix().eq_ignore_ascii_case(prefix))
            .ok_or_else(bad)?;
        let stage = [Stage::Fp, Stage::Fhs, Stage::Evt]
            .into_iter()
            .find(|st| st.as_str().eq_ignore_ascii_case(stage))
            .ok_or_else(bad)?;
        Ok(MethodId::filtered(family, stage))
    }
}

impl TryFrom<String> for MethodId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MethodId> for String {
    fn from(m: MethodId) -> String {
        m.to_string()
    }
}

/// Parses a comma-separated method list; `all` expands to every method.
pub fn parse_method_list(s: &str) -> Result<Vec<MethodId>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(MethodId::all());
    }
    let mut out: Vec<MethodId> = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let m: MethodId = part.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(Error::Config("empty method list".into()));
    }
    Ok(out)
}
