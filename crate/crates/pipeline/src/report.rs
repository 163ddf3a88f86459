//! Summary tables, calibration p-values and traffic-light matrices from a forecast run.

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::runner::Forecasts;
use riskbt_core::calibration::{
    binomial_var_test, one_sided_cct, two_sided_cct, CalibrationReport, Direction, HacPolicy, Side,
    TestContext, TestFunctionSpec,
};
use riskbt_core::comparative::{rank_by_mean_score, traffic_light_matrix, TrafficLightMatrix};
use riskbt_core::identification::{identify, IdValue};
use riskbt_core::scoring::ScoreSpec;
use riskbt_core::{Forecast, Functional, FunctionalKind};

/// Scores of every method for one functional and scoring function.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSeries {
    pub functional: Functional,
    pub score: String,
    /// `scores[method][t]`.
    pub scores: Vec<Vec<f64>>,
}

/// Scores for one functional after the zeroing rule.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalScores {
    pub functional: Functional,
    pub series: Vec<ScoreSeries>,
    /// Times at which every method's score was set to zero.
    pub zeroed: Vec<usize>,
}

/// Scores all methods for functional `j`. If any method issues a non-positive forecast
/// (the ES component for pairs) at `t` and some score needs positive forecasts, or any
/// score is undefined at `t`, every method scores zero at `t`.
pub fn score_functional(forecasts: &Forecasts, j: usize, specs: &[ScoreSpec]) -> FunctionalScores {
    let functional = forecasts.functionals[j];
    let n = forecasts.len();
    let m = forecasts.methods.len();
    let needs_positive = specs.iter().any(ScoreSpec::requires_positive_forecast);
    let mut series: Vec<ScoreSeries> = specs
        .iter()
        .map(|s| ScoreSeries {
            functional,
            score: s.generator_name(),
            scores: vec![vec![0.0; n]; m],
        })
        .collect();
    let mut zeroed = Vec::new();
    for t in 0..n {
        let x = forecasts.losses[t];
        let nonpositive = needs_positive
            && forecasts
                .methods
                .iter()
                .any(|mf| mf.forecasts[j][t].headline() <= 0.0);
        let mut ok = !nonpositive;
        if ok {
            'outer: for (s, spec) in specs.iter().enumerate() {
                for (i, mf) in forecasts.methods.iter().enumerate() {
                    match spec.score(&mf.forecasts[j][t], x) {
                        Ok(v) => series[s].scores[i][t] = v,
                        Err(_) => {
                            ok = false;
                            break 'outer;
                        }
                    }
                }
            }
        }
        if !ok {
            for s in series.iter_mut() {
                for row in s.scores.iter_mut() {
                    row[t] = 0.0;
                }
            }
            zeroed.push(t);
        }
    }
    FunctionalScores {
        functional,
        series,
        zeroed,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSummary {
    pub score: String,
    pub mean_score: f64,
    /// Mean score divided by one minus the level.
    pub scaled_mean_score: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub functional: Functional,
    pub method: String,
    /// Mean of the forecast (ES for pairs).
    pub mean_forecast: f64,
    /// Mean VaR component for pairs.
    pub mean_var: Option<f64>,
    /// Count of strict exceedances `x > r` of the VaR (component).
    pub exceedances: Option<usize>,
    pub violations_pct: Option<f64>,
    /// Exact two-sided binomial p-value of the exceedance count.
    pub binomial_p: Option<f64>,
    pub scores: Vec<ScoreSummary>,
    pub nonconverged: usize,
    pub fallbacks: usize,
}

/// Which calibration test a p-value row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CctKind {
    SimpleTwoSided,
    GeneralTwoSided,
    SimpleOneSided,
    GeneralOneSided,
}

impl CctKind {
    pub const ALL: [CctKind; 4] = [
        CctKind::SimpleTwoSided,
        CctKind::GeneralTwoSided,
        CctKind::SimpleOneSided,
        CctKind::GeneralOneSided,
    ];

    pub fn test_name(self) -> &'static str {
        match self {
            CctKind::SimpleTwoSided | CctKind::SimpleOneSided => "simple",
            CctKind::GeneralTwoSided | CctKind::GeneralOneSided => "general",
        }
    }

    pub fn side_name(self) -> &'static str {
        match self {
            CctKind::SimpleTwoSided | CctKind::GeneralTwoSided => "two-sided",
            CctKind::SimpleOneSided | CctKind::GeneralOneSided => "one-sided",
        }
    }

    /// Test functions for `kind`: constant for simple tests; `(1, r)`, `σ̂⁻¹` and the
    /// exceedance-residual form for two-sided general tests; `(1, |r|)`, `σ̂⁻¹` and the
    /// nonnegative block form for one-sided general tests.
    pub fn test_functions(self, kind: FunctionalKind) -> TestFunctionSpec {
        match (self, kind) {
            (CctKind::SimpleTwoSided | CctKind::SimpleOneSided, _) => TestFunctionSpec::Constant,
            (CctKind::GeneralTwoSided, FunctionalKind::VaR) => TestFunctionSpec::VaRStandard,
            (CctKind::GeneralOneSided, FunctionalKind::VaR) => TestFunctionSpec::VaRAbs,
            (_, FunctionalKind::Expectile) => TestFunctionSpec::InverseSigma,
            (CctKind::GeneralTwoSided, FunctionalKind::VaRES) => TestFunctionSpec::McNeilFrey,
            (CctKind::GeneralOneSided, FunctionalKind::VaRES) => {
                TestFunctionSpec::OneSidedBlockDiag
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PValueRow {
    pub functional: Functional,
    pub method: String,
    pub kind: CctKind,
    pub report: CalibrationReport,
    pub significant: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixReport {
    pub functional: Functional,
    pub score: String,
    pub matrix: TrafficLightMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub methods: Vec<String>,
    pub functionals: Vec<Functional>,
    pub n: usize,
    pub summary: Vec<SummaryRow>,
    pub pvalues: Vec<PValueRow>,
    pub matrices: Vec<MatrixReport>,
    /// Zeroed time points per functional.
    pub zeroed: Vec<(Functional, usize)>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn summary_row(&self, functional: Functional, method: &str) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|r| r.functional == functional && r.method == method)
    }

    pub fn pvalue(
        &self,
        functional: Functional,
        method: &str,
        kind: CctKind,
    ) -> Option<&PValueRow> {
        self.pvalues
            .iter()
            .find(|r| r.functional == functional && r.method == method && r.kind == kind)
    }

    pub fn matrix(&self, functional: Functional, score: &str) -> Option<&MatrixReport> {
        self.matrices
            .iter()
            .find(|m| m.functional == functional && m.score == score)
    }
}

fn var_component(f: &Forecast) -> f64 {
    match *f {
        Forecast::Point(r) => r,
        Forecast::Pair { var, .. } => var,
    }
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, c) = v.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    s / c as f64
}

/// Calibration tests of one method's forecasts for one functional.
pub fn calibration_tests(
    functional: Functional,
    forecasts: &[Forecast],
    losses: &[f64],
    sigma: &[f64],
) -> Result<Vec<(CctKind, CalibrationReport)>> {
    let values: Vec<IdValue> = forecasts
        .iter()
        .zip(losses)
        .map(|(f, &x)| identify(&functional, f, x))
        .collect::<riskbt_core::Result<_>>()?;
    let ctx = TestContext {
        functional,
        forecasts,
        values: &values,
        sigma: Some(sigma),
    };
    let direction = Direction::for_functional(functional.kind());
    let mut out = Vec::with_capacity(4);
    for kind in CctKind::ALL {
        let h = kind.test_functions(functional.kind()).build(&ctx)?;
        let report = match kind {
            CctKind::SimpleTwoSided | CctKind::GeneralTwoSided => {
                two_sided_cct(&values[h.offset()..], &h)?
            }
            CctKind::SimpleOneSided | CctKind::GeneralOneSided => {
                one_sided_cct(&values[h.offset()..], &h, direction)?
            }
        };
        out.push((kind, report));
    }
    Ok(out)
}

/// Assembles all tables from a forecast run.
pub fn build_report(config: &RunConfig, forecasts: &Forecasts) -> Result<Report> {
    let hac: HacPolicy = config.hac_policy()?;
    let names: Vec<String> = forecasts
        .methods
        .iter()
        .map(|m| m.method.to_string())
        .collect();
    let n = forecasts.len();
    let mut summary = Vec::new();
    let mut pvalues = Vec::new();
    let mut matrices = Vec::new();
    let mut zeroed = Vec::new();
    for (j, &functional) in forecasts.functionals.iter().enumerate() {
        let level = functional.level().value();
        let specs = config.scores.specs(functional)?;
        let scored = score_functional(forecasts, j, &specs);
        zeroed.push((functional, scored.zeroed.len()));
        let mut ranked = Vec::with_capacity(scored.series.len());
        for s in &scored.series {
            ranked.push(rank_by_mean_score(&names, &s.scores, level)?);
            matrices.push(MatrixReport {
                functional,
                score: s.score.clone(),
                matrix: traffic_light_matrix(&names, &s.scores, config.eta, hac)?,
            });
        }
        for (i, mf) in forecasts.methods.iter().enumerate() {
            let fc = &mf.forecasts[j];
            let with_var = functional.kind() != FunctionalKind::Expectile;
            let exceedances = with_var.then(|| {
                fc.iter()
                    .zip(&forecasts.losses)
                    .filter(|(f, &x)| x > var_component(f))
                    .count()
            });
            let binomial_p = match exceedances {
                Some(e) => binomial_var_test(e as u64, n as u64, level, Side::Two)?.p_value,
                None => None,
            };
            summary.push(SummaryRow {
                functional,
                method: names[i].clone(),
                mean_forecast: mean(fc.iter().map(Forecast::headline)),
                mean_var: (functional.kind() == FunctionalKind::VaRES)
                    .then(|| mean(fc.iter().map(var_component))),
                exceedances,
                violations_pct: exceedances.map(|e| 100.0 * e as f64 / n as f64),
                binomial_p,
                scores: scored
                    .series
                    .iter()
                    .zip(&ranked)
                    .map(|(s, r)| ScoreSummary {
                        score: s.score.clone(),
                        mean_score: r[i].mean_score,
                        scaled_mean_score: r[i].scaled_mean_score,
                        rank: r[i].rank,
                    })
                    .collect(),
                nonconverged: mf.nonconverged.iter().filter(|&&b| b).count(),
                fallbacks: mf.fallback[j].iter().filter(|&&b| b).count(),
            });
            let tests = calibration_tests(functional, fc, &forecasts.losses, &mf.sigma).map_err(
                |e| match e {
                    Error::Core(source) => Error::Forecast {
                        method: names[i].clone(),
                        functional: functional.to_string(),
                        t: 0,
                        source,
                    },
                    other => other,
                },
            )?;
            for (kind, report) in tests {
                let significant = report.rejects(config.eta);
                pvalues.push(PValueRow {
                    functional,
                    method: names[i].clone(),
                    kind,
                    report,
                    significant,
                });
            }
        }
    }
    Ok(Report {
        methods: names,
        functionals: forecasts.functionals.clone(),
        n,
        summary,
        pvalues,
        matrices,
        zeroed,
        warnings: forecasts.warnings.clone(),
    })
}
