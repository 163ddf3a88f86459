//! Simulation experiments: the AR(1)-GARCH(1,1) skewed-t study, the magician/historian
//! comparison on a GARCH(1,1)-t₄ series, and the small out-of-sample replicate study.

use crate::config::{Input, RunConfig};
use crate::emit::{functional_columns, num};
use crate::error::{Error, Result};
use crate::report::{build_report, score_functional, Report};
use crate::runner::{run_forecasts, BacktestData, Forecasts, Oracle};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use riskbt_core::calibration::mcneil_frey_statistic;
use riskbt_core::comparative::{rank_by_mean_score, sign_preference_table, PreferenceTable};
use riskbt_core::forecasting::empirical::quantile_sorted;
use riskbt_core::forecasting::{simulate_ar_garch, ArGarchParams};
use riskbt_core::scoring::{ScoreSpec, VaResGenerator, VarGenerator};
use riskbt_core::{DistributionSpec, Functional};
use std::path::Path;

/// Simulates the design series for `config`: `window + out_of_sample` observations after
/// `burnin`, drawn from the master seed's first stream.
pub fn simulated_data(config: &RunConfig) -> Result<BacktestData> {
    let Input::Simulation {
        out_of_sample,
        burnin,
    } = config.input
    else {
        return Err(Error::Config(
            "simulation needs a simulation input block".into(),
        ));
    };
    let params = ArGarchParams::simulation_design();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let path = simulate_ar_garch(&params, config.window + out_of_sample, burnin, &mut rng);
    Ok(BacktestData {
        losses: path.x,
        dates: None,
        oracle: Some(Oracle {
            mu: path.mu,
            sigma: path.sigma,
            innovation: params.innovation,
        }),
    })
}

pub fn run_backtest(config: &RunConfig, data: &BacktestData) -> Result<(Forecasts, Report)> {
    let forecasts = run_forecasts(config, data)?;
    let report = build_report(config, &forecasts)?;
    Ok((forecasts, report))
}

pub fn reproduce_simulation(config: &RunConfig) -> Result<(Forecasts, Report)> {
    run_backtest(config, &simulated_data(config)?)
}

pub const HISTORIAN_WINDOWS: [usize; 3] = [250, 500, 1000];
pub const APPENDIX_A_VAR_LEVEL: f64 = 0.99;
pub const APPENDIX_A_ES_LEVEL: f64 = 0.975;

#[derive(Debug, Clone, PartialEq)]
pub struct ForecasterRow {
    pub forecaster: String,
    pub exceedance_pct: f64,
    /// Mean of the linear VaR score.
    pub var_mean_score: f64,
    /// Mean standardized exceedance residual of the (VaR, ES) forecasts, using the true σ.
    pub exceedance_residual: f64,
    /// Mean of the logistic (VaR, ES) score.
    pub vares_mean_score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppendixA {
    pub length: usize,
    pub seed: u64,
    /// Magician first, then the historians by window.
    pub rows: Vec<ForecasterRow>,
}

impl AppendixA {
    fn best_by(&self, key: impl Fn(&ForecasterRow) -> f64) -> usize {
        (0..self.rows.len())
            .min_by(|&a, &b| key(&self.rows[a]).total_cmp(&key(&self.rows[b])))
            .expect("rows")
    }

    /// Whether the magician has the strictly lowest mean VaR score.
    pub fn magician_best_var_score(&self) -> bool {
        self.rows[1..]
            .iter()
            .all(|r| self.rows[0].var_mean_score < r.var_mean_score)
    }

    pub fn magician_best_vares_score(&self) -> bool {
        self.rows[1..]
            .iter()
            .all(|r| self.rows[0].vares_mean_score < r.vares_mean_score)
    }

    /// Whether a historian's exceedance percentage is closer to the nominal 1% than the magician's.
    pub fn exceedance_inversion(&self) -> bool {
        let target = 100.0 * (1.0 - APPENDIX_A_VAR_LEVEL);
        self.best_by(|r| (r.exceedance_pct - target).abs()) != 0
    }

    /// Whether a historian's exceedance residual is closer to zero than the magician's.
    pub fn residual_inversion(&self) -> bool {
        self.best_by(|r| r.exceedance_residual.abs()) != 0
    }
}

/// Sorted sliding window supporting insert and remove in `O(w)`.
struct SortedWindow(Vec<f64>);

impl SortedWindow {
    fn insert(&mut self, v: f64) {
        let i = self.0.partition_point(|&a| a < v);
        self.0.insert(i, v);
    }

    fn remove(&mut self, v: f64) {
        let i = self.0.partition_point(|&a| a < v);
        debug_assert!(self.0[i] == v);
        self.0.remove(i);
    }
}

/// Empirical quantile and mean of the values strictly above it.
fn historian_forecast(sorted: &[f64]) -> Result<(f64, f64, f64)> {
    let var99 = quantile_sorted(sorted, APPENDIX_A_VAR_LEVEL)?;
    let var975 = quantile_sorted(sorted, APPENDIX_A_ES_LEVEL)?;
    let start = sorted.partition_point(|&a| a <= var975);
    let tail = &sorted[start..];
    let es = if tail.is_empty() {
        var975
    } else {
        tail.iter().sum::<f64>() / tail.len() as f64
    };
    Ok((var99, var975, es))
}

/// Magician against historians on a GARCH(1,1) series with unit-variance t₄ innovations.
/// Every forecaster is evaluated on the same `length` observations, which follow a
/// presample long enough for the largest historian window.
pub fn reproduce_appendix_a(length: usize, seed: u64) -> Result<AppendixA> {
    if length < 2000 {
        return Err(Error::Config(format!("length {length} is below 2000")));
    }
    let params = ArGarchParams::t4_design();
    let pre = *HISTORIAN_WINDOWS.iter().max().expect("windows");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let path = simulate_ar_garch(&params, pre + length, 1000, &mut rng);
    let x = &path.x[pre..];
    let sigma = &path.sigma[pre..];

    let t4 = DistributionSpec::student_t(4.0)?;
    let scale = std::f64::consts::SQRT_2;
    let q99 = t4.quantile(APPENDIX_A_VAR_LEVEL)? / scale;
    let q975 = t4.quantile(APPENDIX_A_ES_LEVEL)?;
    let es975 = t4.pdf(q975) / (1.0 - APPENDIX_A_ES_LEVEL) * (4.0 + q975 * q975) / 3.0 / scale;
    let q975 = q975 / scale;

    let mut var99 = vec![sigma.iter().map(|s| s * q99).collect::<Vec<_>>()];
    let mut var975 = vec![sigma.iter().map(|s| s * q975).collect::<Vec<_>>()];
    let mut es = vec![sigma.iter().map(|s| s * es975).collect::<Vec<_>>()];
    for &w in &HISTORIAN_WINDOWS {
        let mut window = SortedWindow(Vec::with_capacity(w + 1));
        for &v in &path.x[pre - w..pre] {
            window.insert(v);
        }
        let (mut a, mut b, mut c) = (
            Vec::with_capacity(length),
            Vec::with_capacity(length),
            Vec::with_capacity(length),
        );
        for t in pre..pre + length {
            let (v99, v975, e) = historian_forecast(&window.0)?;
            a.push(v99);
            b.push(v975);
            c.push(e);
            window.remove(path.x[t - w]);
            window.insert(path.x[t]);
        }
        var99.push(a);
        var975.push(b);
        es.push(c);
    }

    let var_spec = ScoreSpec::var(APPENDIX_A_VAR_LEVEL, VarGenerator::Linear)?;
    let vares_spec = ScoreSpec::vares(APPENDIX_A_ES_LEVEL, VaResGenerator::Logistic)?;
    let names = std::iter::once("magician".to_string())
        .chain(HISTORIAN_WINDOWS.iter().map(|w| format!("historian-{w}")));
    let mut rows = Vec::new();
    for (i, name) in names.enumerate() {
        let mut exceed = 0usize;
        let mut s_var = 0.0;
        let mut s_vares = 0.0;
        for t in 0..length {
            if x[t] > var99[i][t] {
                exceed += 1;
            }
            s_var += var_spec.score(&riskbt_core::Forecast::Point(var99[i][t]), x[t])?;
            s_vares += vares_spec.score(
                &riskbt_core::Forecast::Pair {
                    var: var975[i][t],
                    es: es[i][t],
                },
                x[t],
            )?;
        }
        let residual = mcneil_frey_statistic(x, &var975[i], &es[i], sigma, APPENDIX_A_ES_LEVEL)?;
        rows.push(ForecasterRow {
            forecaster: name,
            exceedance_pct: 100.0 * exceed as f64 / length as f64,
            var_mean_score: s_var / length as f64,
            exceedance_residual: residual.statistic,
            vares_mean_score: s_vares / length as f64,
        });
    }
    Ok(AppendixA { length, seed, rows })
}

pub fn write_appendix_a_csv(results: &[AppendixA], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "length",
        "forecaster",
        "exceedance_pct",
        "var_mean_score",
        "exceedance_residual",
        "vares_mean_score",
    ])?;
    for a in results {
        for r in &a.rows {
            w.write_record([
                a.length.to_string(),
                r.forecaster.clone(),
                num(r.exceedance_pct),
                num(r.var_mean_score),
                num(r.exceedance_residual),
                num(r.vares_mean_score),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Seed of replicate `r`, spread so neighbouring replicates share no stream.
pub fn replicate_seed(seed: u64, r: usize) -> u64 {
    seed ^ (r as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankRecord {
    pub replicate: usize,
    pub functional: Functional,
    pub score: String,
    pub method: String,
    pub mean_score: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceReport {
    pub functional: Functional,
    pub score: String,
    pub table: PreferenceTable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppendixD {
    pub replicates: usize,
    pub methods: Vec<String>,
    pub ranks: Vec<RankRecord>,
    pub preferences: Vec<PreferenceReport>,
}

impl AppendixD {
    /// Median rank (lower median) of `method` for one functional and score.
    pub fn median_rank(&self, functional: Functional, score: &str, method: &str) -> Option<usize> {
        let mut r: Vec<usize> = self
            .ranks
            .iter()
            .filter(|x| x.functional == functional && x.score == score && x.method == method)
            .map(|x| x.rank)
            .collect();
        if r.is_empty() {
            return None;
        }
        r.sort_unstable();
        Some(r[(r.len() - 1) / 2])
    }
}

/// Repeats the simulation study on independent series and collects ranks and pairwise
/// preferences by mean score.
pub fn reproduce_appendix_d(config: &RunConfig, replicates: usize) -> Result<AppendixD> {
    if replicates < 2 {
        return Err(Error::Config("need at least two replicates".into()));
    }
    let functionals = config.functionals()?;
    let methods: Vec<String> = config.methods.iter().map(|m| m.to_string()).collect();
    let mut ranks = Vec::new();
    // means[(functional, score)][replicate][method]
    let mut means: Vec<(Functional, String, Vec<Vec<f64>>)> = Vec::new();
    for r in 0..replicates {
        let cfg = RunConfig {
            seed: replicate_seed(config.seed, r),
            ..config.clone()
        };
        let forecasts = run_forecasts(&cfg, &simulated_data(&cfg)?)?;
        for (j, &f) in functionals.iter().enumerate() {
            let specs = cfg.scores.specs(f)?;
            let scored = score_functional(&forecasts, j, &specs);
            for s in &scored.series {
                let ranked = rank_by_mean_score(&methods, &s.scores, f.level().value())?;
                let key = means
                    .iter()
                    .position(|(mf, ms, _)| *mf == f && *ms == s.score)
                    .unwrap_or_else(|| {
                        means.push((f, s.score.clone(), Vec::new()));
                        means.len() - 1
                    });
                means[key]
                    .2
                    .push(ranked.iter().map(|x| x.mean_score).collect());
                for x in ranked {
                    ranks.push(RankRecord {
                        replicate: r,
                        functional: f,
                        score: s.score.clone(),
                        method: x.method,
                        mean_score: x.mean_score,
                        rank: x.rank,
                    });
                }
            }
        }
    }
    let preferences = means
        .into_iter()
        .map(|(functional, score, reps)| {
            Ok(PreferenceReport {
                functional,
                score,
                table: sign_preference_table(&methods, &reps)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(AppendixD {
        replicates,
        methods,
        ranks,
        preferences,
    })
}

pub fn write_appendix_d_csv(d: &AppendixD, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    let ranks_path = dir.join("appendix_d_ranks.csv");
    let mut w = csv::Writer::from_path(&ranks_path)?;
    w.write_record([
        "replicate",
        "functional",
        "level",
        "score",
        "method",
        "mean_score",
        "rank",
    ])?;
    for r in &d.ranks {
        let [f, l] = functional_columns(r.functional);
        w.write_record([
            r.replicate.to_string(),
            f,
            l,
            r.score.clone(),
            r.method.clone(),
            num(r.mean_score),
            r.rank.to_string(),
        ])?;
    }
    w.flush()?;
    let pref_path = dir.join("appendix_d_preferences.csv");
    let mut w = csv::Writer::from_path(&pref_path)?;
    w.write_record([
        "functional",
        "level",
        "score",
        "row_method",
        "column_method",
        "percent_column_preferred",
        "ties",
    ])?;
    for p in &d.preferences {
        let [f, l] = functional_columns(p.functional);
        for (i, row) in p.table.percent.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if i == j {
                    continue;
                }
                w.write_record([
                    f.clone(),
                    l.clone(),
                    p.score.clone(),
                    d.methods[i].clone(),
                    d.methods[j].clone(),
                    num(*v),
                    p.table.ties[i][j].to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(vec![ranks_path, pref_path])
}
