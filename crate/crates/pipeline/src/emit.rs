//! Output files: CSV tables, SVG traffic-light heatmaps, terminal tables and the run manifest.

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::report::{MatrixReport, Report};
use riskbt_core::comparative::Zone;
use riskbt_core::Functional;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const GREEN: &str = "#2ca02c";
pub const YELLOW: &str = "#ffbf00";
pub const RED: &str = "#d62728";
pub const DIAGONAL: &str = "#bdbdbd";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
    Term,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            "term" | "terminal" => Ok(Format::Term),
            other => Err(Error::Config(format!("unknown output format '{other}'"))),
        }
    }
}

pub fn zone_color(zone: Option<Zone>) -> &'static str {
    match zone {
        Some(Zone::Green) => GREEN,
        Some(Zone::Yellow) => YELLOW,
        Some(Zone::Red) => RED,
        None => DIAGONAL,
    }
}

pub(crate) fn num(v: f64) -> String {
    v.to_string()
}

pub(crate) fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn opt_bool(v: Option<bool>) -> String {
    v.map(|b| b.to_string()).unwrap_or_default()
}

pub fn functional_columns(f: Functional) -> [String; 2] {
    [f.kind().as_str().to_string(), f.level().to_string()]
}

/// Slug used in file names, e.g. `vares_0.975_log`.
pub fn matrix_slug(m: &MatrixReport) -> String {
    format!(
        "{}_{}_{}",
        m.functional.kind().as_str(),
        m.functional.level(),
        m.score.replace([':', '(', ')'], "")
    )
}

pub fn write_summary_csv(report: &Report, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "functional",
        "level",
        "method",
        "mean_forecast",
        "mean_var",
        "exceedances",
        "violations_pct",
        "binomial_p",
        "nonconverged",
        "fallbacks",
    ])?;
    for r in &report.summary {
        let [f, l] = functional_columns(r.functional);
        w.write_record([
            f,
            l,
            r.method.clone(),
            num(r.mean_forecast),
            opt_num(r.mean_var),
            r.exceedances.map(|e| e.to_string()).unwrap_or_default(),
            opt_num(r.violations_pct),
            opt_num(r.binomial_p),
            r.nonconverged.to_string(),
            r.fallbacks.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_scores_csv(report: &Report, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "functional",
        "level",
        "score",
        "method",
        "mean_score",
        "scaled_mean_score",
        "rank",
    ])?;
    for r in &report.summary {
        let [f, l] = functional_columns(r.functional);
        for s in &r.scores {
            w.write_record([
                f.clone(),
                l.clone(),
                s.score.clone(),
                r.method.clone(),
                num(s.mean_score),
                num(s.scaled_mean_score),
                s.rank.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_pvalues_csv(report: &Report, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "functional",
        "level",
        "method",
        "test",
        "side",
        "p_value",
        "significant",
        "bonferroni_p",
        "degenerate",
    ])?;
    for r in &report.pvalues {
        let [f, l] = functional_columns(r.functional);
        w.write_record([
            f,
            l,
            r.method.clone(),
            r.kind.test_name().to_string(),
            r.kind.side_name().to_string(),
            opt_num(r.report.p_value),
            opt_bool(r.significant),
            opt_num(r.report.bonferroni_p),
            r.report.degenerate.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_traffic_lights_csv(report: &Report, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "functional",
        "level",
        "score",
        "standard",
        "internal",
        "zone",
        "mean_score_diff",
        "dm_statistic",
        "p_plus",
        "p_minus",
        "degenerate",
    ])?;
    for m in &report.matrices {
        let [f, l] = functional_columns(m.functional);
        let names = &m.matrix.methods;
        for (i, row) in m.matrix.cells.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                let Some(v) = cell else { continue };
                w.write_record([
                    f.clone(),
                    l.clone(),
                    m.score.clone(),
                    names[i].clone(),
                    names[j].clone(),
                    v.zone.as_str().to_string(),
                    num(v.mean_score_diff),
                    num(v.dm_statistic),
                    num(v.p_plus),
                    num(v.p_minus),
                    v.degenerate.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Heatmap with standard methods on the vertical axis and internal methods across.
pub fn render_svg(m: &MatrixReport) -> String {
    let names = &m.matrix.methods;
    let k = names.len();
    let cell = 36;
    let left = 80;
    let top = 110;
    let width = left + cell * k + 20;
    let height = top + cell * k + 20;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="16" font-size="13">{} / {}</text>"#,
        escape(&m.functional.to_string()),
        escape(&m.score)
    );
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="32">internal</text><text x="4" y="{}">standard</text>"#,
        top - 6
    );
    for (j, name) in names.iter().enumerate() {
        let x = left + cell * j + cell / 2;
        let _ = writeln!(
            s,
            r#"<text transform="translate({x},{}) rotate(-60)">{}</text>"#,
            top - 6,
            escape(name)
        );
    }
    for (i, name) in names.iter().enumerate() {
        let y = top + cell * i;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            left - 6,
            y + cell / 2 + 4,
            escape(name)
        );
        for j in 0..k {
            let x = left + cell * j;
            let fill = zone_color(m.matrix.zone(i, j));
            let _ = writeln!(
                s,
                r#"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}" stroke="white" stroke-width="1"/>"#
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn ansi(zone: Option<Zone>) -> &'static str {
    match zone {
        Some(Zone::Green) => "\x1b[42;30m",
        Some(Zone::Yellow) => "\x1b[43;30m",
        Some(Zone::Red) => "\x1b[41;37m",
        None => "\x1b[100m",
    }
}

/// Plain-text tables; zones are colored with ANSI escapes when `color` is set.
pub fn render_terminal(report: &Report, color: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} verifying observations", report.n);
    for &f in &report.functionals {
        let _ = writeln!(s, "\n{f}");
        let rows: Vec<_> = report
            .summary
            .iter()
            .filter(|r| r.functional == f)
            .collect();
        let mut header = format!("  {:<8} {:>10} {:>8}", "method", "mean", "%viol");
        for sc in rows
            .first()
            .map(|r| r.scores.as_slice())
            .unwrap_or_default()
        {
            let _ = write!(header, " {:>16}", sc.score);
        }
        for kind in crate::report::CctKind::ALL {
            let _ = write!(
                header,
                " {:>10}",
                format!("{}-{}", &kind.test_name()[..3], &kind.side_name()[..3])
            );
        }
        let _ = writeln!(s, "{header}");
        for r in rows {
            let viol = r
                .violations_pct
                .map(|v| format!("{v:.2}"))
                .unwrap_or_else(|| "-".into());
            let _ = write!(s, "  {:<8} {:>10.4} {:>8}", r.method, r.mean_forecast, viol);
            for sc in &r.scores {
                let _ = write!(s, " {:>11.4} ({:>2})", sc.scaled_mean_score, sc.rank);
            }
            for kind in crate::report::CctKind::ALL {
                let cell = match report.pvalue(f, &r.method, kind) {
                    Some(p) => match (p.report.p_value, p.significant) {
                        (Some(v), Some(true)) => format!("{v:.3}*"),
                        (Some(v), _) => format!("{v:.3}"),
                        (None, _) => "degen".into(),
                    },
                    None => "-".into(),
                };
                let _ = write!(s, " {cell:>10}");
            }
            let _ = writeln!(s);
        }
        for m in report.matrices.iter().filter(|m| m.functional == f) {
            let _ = writeln!(
                s,
                "  traffic lights ({}), rows standard, columns internal:",
                m.score
            );
            for (i, name) in m.matrix.methods.iter().enumerate() {
                let _ = write!(s, "  {name:>8} ");
                for j in 0..m.matrix.methods.len() {
                    let z = m.matrix.zone(i, j);
                    let ch = match z {
                        Some(Zone::Green) => 'G',
                        Some(Zone::Yellow) => 'Y',
                        Some(Zone::Red) => 'R',
                        None => '.',
                    };
                    if color {
                        let _ = write!(s, "{} {ch} \x1b[0m", ansi(z));
                    } else {
                        let _ = write!(s, " {ch} ");
                    }
                }
                let _ = writeln!(s);
            }
        }
    }
    for (f, z) in &report.zeroed {
        if *z > 0 {
            let _ = writeln!(s, "{f}: scores zeroed at {z} time points");
        }
    }
    for w in &report.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

/// Everything needed to replay a command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: RunConfig,
    /// Command-specific settings such as the series length.
    pub parameters: serde_json::Value,
    pub formats: Vec<Format>,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new(
        command: &str,
        config: &RunConfig,
        parameters: serde_json::Value,
        formats: &[Format],
    ) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: config.seed,
            config: config.clone(),
            parameters,
            formats: formats.to_vec(),
            files: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Writes the report in the requested formats and returns the files written. Terminal
/// output goes to `report.txt` without color.
pub fn emit(report: &Report, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    if formats.contains(&Format::Csv) {
        for (name, f) in [
            (
                "summary.csv",
                write_summary_csv as fn(&Report, &Path) -> Result<()>,
            ),
            ("scores.csv", write_scores_csv),
            ("pvalues.csv", write_pvalues_csv),
            ("traffic_lights.csv", write_traffic_lights_csv),
        ] {
            let p = dir.join(name);
            f(report, &p)?;
            files.push(p);
        }
    }
    if formats.contains(&Format::Svg) {
        for m in &report.matrices {
            let p = dir.join(format!("traffic_{}.svg", matrix_slug(m)));
            std::fs::write(&p, render_svg(m))?;
            files.push(p);
        }
    }
    if formats.contains(&Format::Term) {
        let p = dir.join("report.txt");
        std::fs::write(&p, render_terminal(report, false))?;
        files.push(p);
    }
    Ok(files)
}
