use crate::error::{Error, Result};
use crate::level::Level;
use std::fmt;

/// The risk functional being forecast, together with its level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    VaR(Level),
    Expectile(Level),
    /// The pair (VaR_ν, ES_ν).
    VaRES(Level),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionalKind {
    VaR,
    Expectile,
    VaRES,
}

impl FunctionalKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FunctionalKind::VaR => "var",
            FunctionalKind::Expectile => "expectile",
            FunctionalKind::VaRES => "vares",
        }
    }

    pub fn with_level(self, level: Level) -> Functional {
        match self {
            FunctionalKind::VaR => Functional::VaR(level),
            FunctionalKind::Expectile => Functional::Expectile(level),
            FunctionalKind::VaRES => Functional::VaRES(level),
        }
    }
}

impl std::str::FromStr for FunctionalKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "var" => Ok(FunctionalKind::VaR),
            "expectile" | "exp" => Ok(FunctionalKind::Expectile),
            "vares" | "var-es" | "es" => Ok(FunctionalKind::VaRES),
            other => Err(Error::InvalidParameter(format!(
                "unknown functional '{other}'"
            ))),
        }
    }
}

impl Functional {
    pub fn level(&self) -> Level {
        match *self {
            Functional::VaR(l) | Functional::Expectile(l) | Functional::VaRES(l) => l,
        }
    }

    pub fn kind(&self) -> FunctionalKind {
        match self {
            Functional::VaR(_) => FunctionalKind::VaR,
            Functional::Expectile(_) => FunctionalKind::Expectile,
            Functional::VaRES(_) => FunctionalKind::VaRES,
        }
    }

    /// Dimension of the functional (and of its identification function).
    pub fn dimension(&self) -> usize {
        match self {
            Functional::VaRES(_) => 2,
            _ => 1,
        }
    }

    /// Checks that a forecast has the shape this functional expects.
    pub fn check_forecast(&self, forecast: &Forecast) -> Result<()> {
        match (self, forecast) {
            (Functional::VaRES(_), Forecast::Pair { .. }) => Ok(()),
            (Functional::VaR(_) | Functional::Expectile(_), Forecast::Point(_)) => Ok(()),
            _ => Err(Error::Dimension(format!(
                "forecast {forecast:?} does not match functional {self}"
            ))),
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::VaR(l) => write!(f, "VaR_{l}"),
            Functional::Expectile(l) => write!(f, "expectile_{l}"),
            Functional::VaRES(l) => write!(f, "(VaR,ES)_{l}"),
        }
    }
}

/// A point forecast of a one-dimensional functional, or a (VaR, ES) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Forecast {
    Point(f64),
    Pair { var: f64, es: f64 },
}

impl Forecast {
    /// The component that must be positive for the positive-domain scores:
    /// the point itself, or the ES component of a pair.
    pub fn headline(&self) -> f64 {
        match *self {
            Forecast::Point(r) => r,
            Forecast::Pair { es, .. } => es,
        }
    }

    pub fn scaled(&self, c: f64) -> Forecast {
        match *self {
            Forecast::Point(r) => Forecast::Point(c * r),
            Forecast::Pair { var, es } => Forecast::Pair {
                var: c * var,
                es: c * es,
            },
        }
    }

    /// `shift + scale * self`, componentwise.
    pub fn affine(&self, shift: f64, scale: f64) -> Forecast {
        match *self {
            Forecast::Point(r) => Forecast::Point(shift + scale * r),
            Forecast::Pair { var, es } => Forecast::Pair {
                var: shift + scale * var,
                es: shift + scale * es,
            },
        }
    }
}
