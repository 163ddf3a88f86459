//! Run configuration. Files use TOML; command-line flags override file values.

use crate::error::{Error, Result};
use crate::methods::MethodId;
use riskbt_core::calibration::HacPolicy;
use riskbt_core::scoring::{
    ExpectileGenerator, Generator, ScoreSpec, VaResGenerator, VarGenerator,
};
use riskbt_core::{Functional, FunctionalKind, Level};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const MIN_WINDOW: usize = 250;
pub const MIN_OUT_OF_SAMPLE: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Input {
    Csv {
        path: PathBuf,
        /// Convert prices to negated log-returns; otherwise plain log-returns.
        #[serde(default = "yes")]
        negate: bool,
    },
    /// Series from the AR(1)-GARCH(1,1) skewed-t design.
    Simulation {
        #[serde(default = "default_out_of_sample")]
        out_of_sample: usize,
        #[serde(default = "default_burnin")]
        burnin: usize,
    },
}

fn yes() -> bool {
    true
}

fn default_out_of_sample() -> usize {
    1000
}

fn default_burnin() -> usize {
    1000
}

/// Levels per functional. Within a `[targets]` table an omitted functional is not run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Targets {
    #[serde(default)]
    pub var: Vec<f64>,
    #[serde(default)]
    pub expectile: Vec<f64>,
    #[serde(default)]
    pub vares: Vec<f64>,
}

impl Default for Targets {
    fn default() -> Self {
        Self {
            var: vec![0.90, 0.95, 0.99],
            expectile: vec![0.96561, 0.98761, 0.99855],
            vares: vec![0.754, 0.875, 0.975],
        }
    }
}

impl Targets {
    pub fn functionals(&self) -> Result<Vec<Functional>> {
        let mut out = Vec::new();
        for (kind, levels) in [
            (FunctionalKind::VaR, &self.var),
            (FunctionalKind::Expectile, &self.expectile),
            (FunctionalKind::VaRES, &self.vares),
        ] {
            for &l in levels {
                out.push(kind.with_level(Level::new(l)?));
            }
        }
        Ok(out)
    }

    /// Parses `var=0.99;vares=0.975,0.875`; functionals not named get no levels.
    pub fn parse(s: &str) -> Result<Self> {
        let mut t = Targets {
            var: Vec::new(),
            expectile: Vec::new(),
            vares: Vec::new(),
        };
        for (kind, values) in parse_assignments(s)? {
            let levels = values
                .iter()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad level '{v}'")))
                })
                .collect::<Result<Vec<_>>>()?;
            match kind {
                FunctionalKind::VaR => t.var = levels,
                FunctionalKind::Expectile => t.expectile = levels,
                FunctionalKind::VaRES => t.vares = levels,
            }
        }
        Ok(t)
    }
}

/// Scoring-function variants per functional, by generator name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scores {
    pub var: Vec<String>,
    pub expectile: Vec<String>,
    pub vares: Vec<String>,
}

impl Default for Scores {
    fn default() -> Self {
        Self {
            var: vec!["linear".into(), "log".into()],
            expectile: vec!["quadratic".into(), "neglog".into()],
            vares: vec!["sqrt".into(), "log".into()],
        }
    }
}

impl Scores {
    pub fn for_kind(&self, kind: FunctionalKind) -> &[String] {
        match kind {
            FunctionalKind::VaR => &self.var,
            FunctionalKind::Expectile => &self.expectile,
            FunctionalKind::VaRES => &self.vares,
        }
    }

    /// Score choices for `functional`, in configured order.
    pub fn specs(&self, functional: Functional) -> Result<Vec<ScoreSpec>> {
        self.for_kind(functional.kind())
            .iter()
            .map(|name| {
                Ok(ScoreSpec::new(
                    functional,
                    parse_generator(functional.kind(), name)?,
                )?)
            })
            .collect()
    }

    /// Parses `var=linear,log;vares=log`; functionals not named keep their defaults.
    pub fn parse(s: &str) -> Result<Self> {
        let mut out = Scores::default();
        for (kind, names) in parse_assignments(s)? {
            for n in &names {
                parse_generator(kind, n)?;
            }
            match kind {
                FunctionalKind::VaR => out.var = names,
                FunctionalKind::Expectile => out.expectile = names,
                FunctionalKind::VaRES => out.vares = names,
            }
        }
        Ok(out)
    }
}

fn parse_assignments(s: &str) -> Result<Vec<(FunctionalKind, Vec<String>)>> {
    let mut out = Vec::new();
    for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected name=values, got '{part}'")))?;
        let kind: FunctionalKind = k.trim().parse()?;
        let values: Vec<String> = v
            .split(',')
            .map(|x| x.trim().to_string())
            .filter(|x| !x.is_empty())
            .collect();
        out.push((kind, values));
    }
    Ok(out)
}

/// Generator from its name: `linear`, `log`, `quadratic`, `neglog`, `xlogx`, `sqrt`,
/// `logistic` or `power:<b>`.
pub fn parse_generator(kind: FunctionalKind, name: &str) -> Result<Generator> {
    let lower = name.trim().to_ascii_lowercase();
    let power = match lower.strip_prefix("power:") {
        Some(b) => Some(
            b.parse::<f64>()
                .map_err(|_| Error::Config(format!("bad exponent in '{name}'")))?,
        ),
        None => None,
    };
    let g = match (kind, lower.as_str(), power) {
        (FunctionalKind::VaR, _, Some(b)) => Generator::VaR(VarGenerator::Power(b)),
        (FunctionalKind::VaR, "linear", _) => Generator::VaR(VarGenerator::Linear),
        (FunctionalKind::VaR, "log", _) => Generator::VaR(VarGenerator::Log),
        (FunctionalKind::Expectile, _, Some(b)) => {
            Generator::Expectile(ExpectileGenerator::Power(b))
        }
        (FunctionalKind::Expectile, "quadratic", _) => {
            Generator::Expectile(ExpectileGenerator::Quadratic)
        }
        (FunctionalKind::Expectile, "neglog", _) => {
            Generator::Expectile(ExpectileGenerator::NegLog)
        }
        (FunctionalKind::Expectile, "xlogx", _) => Generator::Expectile(ExpectileGenerator::XLogX),
        (FunctionalKind::VaRES, _, Some(b)) => Generator::VaRES(VaResGenerator::Power(b)),
        (FunctionalKind::VaRES, "sqrt", _) => Generator::VaRES(VaResGenerator::Sqrt),
        (FunctionalKind::VaRES, "log", _) => Generator::VaRES(VaResGenerator::Log),
        (FunctionalKind::VaRES, "logistic", _) => Generator::VaRES(VaResGenerator::Logistic),
        _ => {
            return Err(Error::Config(format!(
                "unknown {} score '{name}'",
                kind.as_str()
            )))
        }
    };
    Ok(g)
}

/// `lag0`, `bartlett` (automatic bandwidth) or `bartlett:<lags>`.
pub fn parse_hac(s: &str) -> Result<HacPolicy> {
    match s.trim().to_ascii_lowercase().as_str() {
        "lag0" | "0" => Ok(HacPolicy::Lag0),
        "bartlett" => Ok(HacPolicy::Bartlett(None)),
        other => other
            .strip_prefix("bartlett:")
            .and_then(|l| l.parse().ok())
            .map(|l| HacPolicy::Bartlett(Some(l)))
            .ok_or_else(|| Error::Config(format!("unknown HAC policy '{s}'"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Input,
    pub window: usize,
    pub methods: Vec<MethodId>,
    pub targets: Targets,
    pub scores: Scores,
    pub eta: f64,
    pub seed: u64,
    pub hac: String,
    /// Bootstrap size for FHS; 0 uses the residuals directly.
    pub fhs_draws: usize,
    /// EVT exceedances as a fraction of the window.
    pub evt_tail_fraction: f64,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: Input::Simulation {
                out_of_sample: default_out_of_sample(),
                burnin: default_burnin(),
            },
            window: 500,
            methods: MethodId::all(),
            targets: Targets::default(),
            scores: Scores::default(),
            eta: 0.05,
            seed: 20_170_101,
            hac: "lag0".into(),
            fhs_draws: riskbt_core::forecasting::DEFAULT_RESAMPLE_SIZE,
            evt_tail_fraction: 0.12,
            out: PathBuf::from("riskbt-out"),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn hac_policy(&self) -> Result<HacPolicy> {
        parse_hac(&self.hac)
    }

    pub fn functionals(&self) -> Result<Vec<Functional>> {
        self.targets.functionals()
    }

    pub fn is_simulated(&self) -> bool {
        matches!(self.input, Input::Simulation { .. })
    }

    /// EVT tail count for the configured window (60 for a window of 500).
    pub fn evt_k(&self) -> usize {
        ((self.evt_tail_fraction * self.window as f64).floor() as usize).max(10)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < MIN_WINDOW {
            return Err(Error::Config(format!(
                "window {} is below {MIN_WINDOW}",
                self.window
            )));
        }
        if let Input::Simulation { out_of_sample, .. } = self.input {
            if out_of_sample < MIN_OUT_OF_SAMPLE {
                return Err(Error::Config(format!(
                    "out-of-sample length {out_of_sample} is below {MIN_OUT_OF_SAMPLE}"
                )));
            }
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        if self.methods.contains(&MethodId::Opt) && !self.is_simulated() {
            return Err(Error::Config("method 'opt' needs simulated input".into()));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::Config(format!("eta {} is outside (0, 1)", self.eta)));
        }
        if !(self.evt_tail_fraction > 0.0 && self.evt_tail_fraction < 1.0) {
            return Err(Error::Config(format!(
                "EVT tail fraction {} is outside (0, 1)",
                self.evt_tail_fraction
            )));
        }
        let functionals = self.functionals()?;
        if functionals.is_empty() {
            return Err(Error::Config("no functionals selected".into()));
        }
        for f in functionals {
            self.scores.specs(f)?;
        }
        self.hac_policy()?;
        Ok(())
    }
}
