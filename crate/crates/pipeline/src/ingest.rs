//! CSV input: a `price` column (converted to log-returns) or a `loss` column.

use crate::error::{Error, Result};
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct LossSeries {
    /// Dates from an optional `date` column, aligned with `losses`.
    pub dates: Option<Vec<String>>,
    pub losses: Vec<f64>,
}

impl LossSeries {
    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }
}

/// Reads a loss series. Prices become `-log(p_t / p_{t-1})` when `negate`, `log(p_t / p_{t-1})`
/// otherwise; a `loss` column is used verbatim.
pub fn ingest_csv(path: &Path, negate: bool) -> Result<LossSeries> {
    let fail = |message: String| Error::Input {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (column, is_price) = match (find("loss"), find("price")) {
        (Some(i), _) => (i, false),
        (None, Some(i)) => (i, true),
        (None, None) => return Err(fail("header needs a 'price' or 'loss' column".into())),
    };
    let date_col = find("date");
    let mut values = Vec::new();
    let mut dates = date_col.map(|_| Vec::new());
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record?;
        let field = record.get(column).unwrap_or("");
        if field.is_empty() {
            return Err(fail(format!("line {line}: missing value")));
        }
        let v: f64 = field
            .parse()
            .map_err(|_| fail(format!("line {line}: '{field}' is not a number")))?;
        if !v.is_finite() || (is_price && v <= 0.0) {
            return Err(fail(format!("line {line}: invalid value {v}")));
        }
        values.push(v);
        if let (Some(ds), Some(c)) = (dates.as_mut(), date_col) {
            ds.push(record.get(c).unwrap_or("").to_string());
        }
    }
    if !is_price {
        return Ok(LossSeries {
            dates,
            losses: values,
        });
    }
    if values.len() < 2 {
        return Err(fail("need at least two prices".into()));
    }
    let sign = if negate { -1.0 } else { 1.0 };
    let losses = values
        .windows(2)
        .map(|w| sign * (w[1] / w[0]).ln())
        .collect();
    if let Some(ds) = dates.as_mut() {
        ds.remove(0);
    }
    Ok(LossSeries { dates, losses })
}

/// Writes a `loss` column (and `date` when present) with round-trip precision.
pub fn write_loss_csv(path: &Path, series: &LossSeries) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    match &series.dates {
        Some(dates) => {
            w.write_record(["date", "loss"])?;
            for (d, v) in dates.iter().zip(&series.losses) {
                w.write_record([d.as_str(), &v.to_string()])?;
            }
        }
        None => {
            w.write_record(["loss"])?;
            for v in &series.losses {
                w.write_record([v.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
