//! Command execution shared by the CLI and replay. A command is fully described by its
//! [`Manifest`], so replaying a manifest reruns the command exactly.

use crate::config::{Input, RunConfig};
use crate::emit::{emit, render_terminal, Format, Manifest};
use crate::error::{Error, Result};
use crate::ingest::ingest_csv;
use crate::reproduce::{
    reproduce_appendix_a, reproduce_appendix_d, run_backtest, simulated_data, write_appendix_a_csv,
    write_appendix_d_csv,
};
use crate::runner::BacktestData;
use crate::validate::run_checks;
use serde_json::json;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const BACKTEST: &str = "backtest";
pub const SIMULATE: &str = "simulate";
pub const APPENDIX_A: &str = "appendix-a";
pub const APPENDIX_D: &str = "appendix-d";
pub const VALIDATE: &str = "validate";

/// Result of a command: files written and text for the terminal.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub text: String,
    /// False when a validation check failed.
    pub success: bool,
}

fn param_usize(m: &Manifest, key: &str) -> Result<usize> {
    m.parameters
        .get(key)
        .and_then(|v| v.as_u64())
        .map(|v| v as usize)
        .ok_or_else(|| Error::Config(format!("manifest lacks parameter '{key}'")))
}

pub fn appendix_a_manifest(config: &RunConfig, lengths: &[usize], formats: &[Format]) -> Manifest {
    Manifest::new(APPENDIX_A, config, json!({ "lengths": lengths }), formats)
}

pub fn appendix_d_manifest(config: &RunConfig, replicates: usize, formats: &[Format]) -> Manifest {
    Manifest::new(
        APPENDIX_D,
        config,
        json!({ "replicates": replicates }),
        formats,
    )
}

/// Runs the command in `manifest`, writing outputs and the manifest itself to `out`.
pub fn execute(manifest: &Manifest, out: &Path, color: bool) -> Result<Outcome> {
    std::fs::create_dir_all(out)?;
    let config = &manifest.config;
    let (mut files, text, success) = match manifest.command.as_str() {
        BACKTEST | SIMULATE => {
            config.validate()?;
            let data = match &config.input {
                Input::Csv { path, negate } => {
                    if manifest.command == SIMULATE {
                        return Err(Error::Config("simulate needs a simulation input".into()));
                    }
                    let s = ingest_csv(path, *negate)?;
                    BacktestData {
                        losses: s.losses,
                        dates: s.dates,
                        oracle: None,
                    }
                }
                Input::Simulation { .. } => simulated_data(config)?,
            };
            let (_, report) = run_backtest(config, &data)?;
            let files = emit(&report, out, &manifest.formats)?;
            (files, render_terminal(&report, color), true)
        }
        APPENDIX_A => {
            let lengths: Vec<usize> = manifest
                .parameters
                .get("lengths")
                .and_then(|v| serde_json::from_value(v.clone()).ok())
                .ok_or_else(|| Error::Config("manifest lacks parameter 'lengths'".into()))?;
            let results = lengths
                .iter()
                .map(|&l| reproduce_appendix_a(l, config.seed))
                .collect::<Result<Vec<_>>>()?;
            let path = out.join("appendix_a.csv");
            write_appendix_a_csv(&results, &path)?;
            let mut text = String::new();
            for a in &results {
                let _ = writeln!(text, "length {}", a.length);
                let _ = writeln!(
                    text,
                    "  {:<16} {:>8} {:>12} {:>12} {:>12}",
                    "forecaster", "%exceed", "VaR score", "exc. resid", "ES score"
                );
                for r in &a.rows {
                    let _ = writeln!(
                        text,
                        "  {:<16} {:>8.2} {:>12.4} {:>12.4} {:>12.4}",
                        r.forecaster,
                        r.exceedance_pct,
                        r.var_mean_score,
                        r.exceedance_residual,
                        r.vares_mean_score
                    );
                }
                let _ = writeln!(
                    text,
                    "  magician lowest VaR score: {}, lowest ES score: {}, exceedance inversion: {}",
                    a.magician_best_var_score(),
                    a.magician_best_vares_score(),
                    a.exceedance_inversion()
                );
            }
            (vec![path], text, true)
        }
        APPENDIX_D => {
            config.validate()?;
            let replicates = param_usize(manifest, "replicates")?;
            let d = reproduce_appendix_d(config, replicates)?;
            let files = write_appendix_d_csv(&d, out)?;
            let mut text = format!("{} replicates\n", d.replicates);
            for p in &d.preferences {
                let _ = writeln!(text, "{} ({}) median ranks:", p.functional, p.score);
                for m in &d.methods {
                    let r = d.median_rank(p.functional, &p.score, m).unwrap_or(0);
                    let _ = writeln!(text, "  {m:<8} {r}");
                }
            }
            (files, text, true)
        }
        VALIDATE => {
            let checks = run_checks(config);
            let path = out.join("validate.csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["check", "passed", "detail"])?;
            let mut text = String::new();
            for c in &checks {
                w.write_record([
                    c.name.as_str(),
                    if c.passed { "true" } else { "false" },
                    c.detail.as_str(),
                ])?;
                let _ = writeln!(
                    text,
                    "{} {} {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            w.flush()?;
            (vec![path], text, checks.iter().all(|c| c.passed))
        }
        other => return Err(Error::Config(format!("unknown command '{other}'"))),
    };
    let mut m = manifest.clone();
    m.files = files
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    m.files.sort();
    files.push(m.write(out)?);
    Ok(Outcome {
        files,
        text,
        success,
    })
}
