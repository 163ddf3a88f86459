//! Comparative backtests: Diebold–Mariano tests on score differences, the
//! three-zone verdict, traffic-light matrices, rankings by mean score and
//! replicate-level preference tables.
//!
//! Score differences are always "internal minus standard". A green verdict means the
//! internal method scores significantly lower (better) than the standard; red means
//! significantly higher. No correction for testing many cells at once is applied.

use crate::calibration::{long_run_variance, HacPolicy};
use crate::error::{Error, Result};
use crate::special::norm_cdf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Zone {
    Green,
    Yellow,
    Red,
}

impl Zone {
    pub fn as_str(self) -> &'static str {
        match self {
            Zone::Green => "green",
            Zone::Yellow => "yellow",
            Zone::Red => "red",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonVerdict {
    /// Mean of the score differences.
    pub mean_score_diff: f64,
    pub dm_statistic: f64,
    /// p-value of H₀⁺ (internal at most as good as standard); small values support green.
    pub p_plus: f64,
    /// p-value of H₀⁻ (internal at least as good as standard); small values support red.
    pub p_minus: f64,
    pub zone: Zone,
    pub degenerate: bool,
}

/// Diebold–Mariano test on `diffs = S(internal) - S(standard)`:
/// `T = mean / (σ̂ / √n)`, `p_plus = Φ(T)`, `p_minus = Φ(-T)`.
pub fn dm_test(diffs: &[f64], eta: f64, hac: HacPolicy) -> Result<ComparisonVerdict> {
    let n = diffs.len();
    if n < 30 {
        return Err(Error::InsufficientData(format!(
            "Diebold–Mariano test needs at least 30 observations, got {n}"
        )));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::LevelOutOfRange(eta));
    }
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidParameter(
            "score differences must be finite".into(),
        ));
    }
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = long_run_variance(diffs, hac);
    if !(var > 0.0) || var <= f64::EPSILON * f64::EPSILON * mean * mean {
        return Ok(ComparisonVerdict {
            mean_score_diff: mean,
            dm_statistic: f64::NAN,
            p_plus: f64::NAN,
            p_minus: f64::NAN,
            zone: Zone::Yellow,
            degenerate: true,
        });
    }
    let t = mean / (var / n as f64).sqrt();
    let p_plus = norm_cdf(t);
    let p_minus = norm_cdf(-t);
    let zone = if p_plus <= eta {
        Zone::Green
    } else if p_minus <= eta {
        Zone::Red
    } else {
        Zone::Yellow
    };
    Ok(ComparisonVerdict {
        mean_score_diff: mean,
        dm_statistic: t,
        p_plus,
        p_minus,
        zone,
        degenerate: false,
    })
}

/// A traffic-light matrix: rows are standard methods, columns internal methods.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficLightMatrix {
    pub methods: Vec<String>,
    /// `cells[i][j]` compares internal `j` against standard `i`; `None` on the diagonal.
    pub cells: Vec<Vec<Option<ComparisonVerdict>>>,
}

impl TrafficLightMatrix {
    pub fn zone(&self, standard: usize, internal: usize) -> Option<Zone> {
        self.cells[standard][internal].map(|v| v.zone)
    }

    pub fn index_of(&self, method: &str) -> Option<usize> {
        self.methods.iter().position(|m| m == method)
    }
}

/// Runs [`dm_test`] on every ordered pair of methods.
pub fn traffic_light_matrix(
    methods: &[String],
    scores: &[Vec<f64>],
    eta: f64,
    hac: HacPolicy,
) -> Result<TrafficLightMatrix> {
    if methods.len() != scores.len() {
        return Err(Error::Dimension(format!(
            "{} methods but {} score series",
            methods.len(),
            scores.len()
        )));
    }
    let n = scores.first().map_or(0, Vec::len);
    if scores.iter().any(|s| s.len() != n) {
        return Err(Error::Dimension("score series differ in length".into()));
    }
    let m = methods.len();
    let mut cells = vec![vec![None; m]; m];
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let diffs: Vec<f64> = scores[j]
                .iter()
                .zip(&scores[i])
                .map(|(a, b)| a - b)
                .collect();
            cells[i][j] = Some(dm_test(&diffs, eta, hac)?);
        }
    }
    Ok(TrafficLightMatrix {
        methods: methods.to_vec(),
        cells,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedMethod {
    pub method: String,
    pub mean_score: f64,
    /// Mean score divided by one minus the level.
    pub scaled_mean_score: f64,
    /// 1 is best.
    pub rank: usize,
}

/// Ranks methods by mean score (ascending); ties keep registration order.
pub fn rank_by_mean_score(
    methods: &[String],
    scores: &[Vec<f64>],
    level: f64,
) -> Result<Vec<RankedMethod>> {
    if methods.len() != scores.len() {
        return Err(Error::Dimension(format!(
            "{} methods but {} score series",
            methods.len(),
            scores.len()
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::LevelOutOfRange(level));
    }
    let means: Vec<f64> = scores
        .iter()
        .map(|s| {
            if s.is_empty() {
                f64::NAN
            } else {
                s.iter().sum::<f64>() / s.len() as f64
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..methods.len()).collect();
    order.sort_by(|&a, &b| means[a].total_cmp(&means[b]));
    let mut ranks = vec![0; methods.len()];
    for (pos, &idx) in order.iter().enumerate() {
        ranks[idx] = pos + 1;
    }
    Ok((0..methods.len())
        .map(|i| RankedMethod {
            method: methods[i].clone(),
            mean_score: means[i],
            scaled_mean_score: means[i] / (1.0 - level),
            rank: ranks[i],
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceTable {
    pub methods: Vec<String>,
    /// `percent[row][col]`: share of replicates (in %) where the column method has a lower
    /// mean score than the row method; ties count half. Zero on the diagonal.
    pub percent: Vec<Vec<f64>>,
    /// Whether any replicate tied for the pair.
    pub ties: Vec<Vec<bool>>,
}

/// Builds the preference table from per-replicate mean scores (`replicates[r][method]`).
pub fn sign_preference_table(
    methods: &[String],
    replicates: &[Vec<f64>],
) -> Result<PreferenceTable> {
    if replicates.len() < 2 {
        return Err(Error::InsufficientData(
            "need at least two replicates".into(),
        ));
    }
    let m = methods.len();
    if replicates.iter().any(|r| r.len() != m) {
        return Err(Error::Dimension(
            "replicate rows must have one entry per method".into(),
        ));
    }
    let total = replicates.len() as f64;
    let mut percent = vec![vec![0.0; m]; m];
    let mut ties = vec![vec![false; m]; m];
    for row in 0..m {
        for col in 0..m {
            if row == col {
                continue;
            }
            let mut wins = 0.0;
            for rep in replicates {
                if rep[col] < rep[row] {
                    wins += 1.0;
                } else if rep[col] == rep[row] {
                    wins += 0.5;
                    ties[row][col] = true;
                }
            }
            percent[row][col] = 100.0 * wins / total;
        }
    }
    Ok(PreferenceTable {
        methods: methods.to_vec(),
        percent,
        ties,
    })
}
