//! Traditional backtests: conditional calibration tests (two-sided Wald and
//! one-sided multiple tests), average calibration with a HAC covariance, the exact
//! binomial VaR test and the exceedance-residual statistic for ES.
//!
//! For observations `V_t = V(r_t, x_t)` and test functions `h_t` (q×k matrices),
//! everything works on `Z_t = h_t V_t`.

use crate::error::{Error, Result};
use crate::functional::{Forecast, Functional, FunctionalKind};
use crate::identification::IdValue;
use crate::special::{binomial_pmf, chi2_sf, norm_cdf};
use nalgebra::{DMatrix, DVector};

/// Condition-number ceiling above which a covariance matrix counts as singular.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// H₀: `E[V_t | F_{t-1}] >= 0` componentwise (forecasts at least as large as the truth
    /// for VaR and expectiles).
    Super,
    /// H₀: `E[V_t | F_{t-1}] <= 0` componentwise.
    Sub,
}

impl Direction {
    /// The direction used for each functional when testing against risk
    /// underestimation: super for VaR and expectiles, sub for (VaR, ES).
    pub fn for_functional(kind: FunctionalKind) -> Self {
        match kind {
            FunctionalKind::VaR | FunctionalKind::Expectile => Direction::Super,
            FunctionalKind::VaRES => Direction::Sub,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Two,
    Super,
    Sub,
}

/// Lag policy for long-run covariance estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HacPolicy {
    /// Sample covariance only.
    #[default]
    Lag0,
    /// Bartlett kernel; `None` picks `floor(n^(1/3))` lags.
    Bartlett(Option<usize>),
}

impl HacPolicy {
    pub fn lags(&self, n: usize) -> usize {
        match *self {
            HacPolicy::Lag0 => 0,
            HacPolicy::Bartlett(Some(l)) => l,
            HacPolicy::Bartlett(None) => (n as f64).cbrt().floor() as usize,
        }
    }
}

impl std::str::FromStr for HacPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "lag0" | "0" | "none" => Ok(HacPolicy::Lag0),
            "bartlett" => Ok(HacPolicy::Bartlett(None)),
            _ => {
                if let Some(l) = s.strip_prefix("bartlett:") {
                    l.parse::<usize>()
                        .map(|l| HacPolicy::Bartlett(Some(l)))
                        .map_err(|_| Error::InvalidParameter(format!("bad Bartlett lag '{l}'")))
                } else {
                    Err(Error::InvalidParameter(format!("unknown HAC policy '{s}'")))
                }
            }
        }
    }
}

impl std::fmt::Display for HacPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HacPolicy::Lag0 => write!(f, "lag0"),
            HacPolicy::Bartlett(None) => write!(f, "bartlett"),
            HacPolicy::Bartlett(Some(l)) => write!(f, "bartlett:{l}"),
        }
    }
}

/// Bartlett-weighted long-run covariance of the demeaned rows of `data` (n × d).
pub fn hac_covariance(data: &DMatrix<f64>, policy: HacPolicy) -> DMatrix<f64> {
    let n = data.nrows();
    let d = data.ncols();
    let mean = data.row_mean();
    let centered = DMatrix::from_fn(n, d, |i, j| data[(i, j)] - mean[j]);
    let mut cov = centered.transpose() * &centered / n as f64;
    let lags = policy.lags(n).min(n.saturating_sub(1));
    for l in 1..=lags {
        let w = 1.0 - l as f64 / (lags as f64 + 1.0);
        let head = centered.rows(l, n - l);
        let tail = centered.rows(0, n - l);
        let gamma = head.transpose() * tail / n as f64;
        cov += (&gamma + gamma.transpose()) * w;
    }
    cov
}

/// Scalar version of [`hac_covariance`].
pub fn long_run_variance(series: &[f64], policy: HacPolicy) -> f64 {
    let m = DMatrix::from_column_slice(series.len(), 1, series);
    hac_covariance(&m, policy)[(0, 0)]
}

/// Test functions `h_t`, stored as `n` row-major q×k matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctions {
    q: usize,
    k: usize,
    /// Index of the first observation the matrices apply to.
    offset: usize,
    data: Vec<f64>,
}

impl TestFunctions {
    pub fn new(q: usize, k: usize, offset: usize, data: Vec<f64>) -> Result<Self> {
        if q == 0 || k == 0 || !data.len().is_multiple_of(q * k) {
            return Err(Error::Dimension(format!(
                "{} entries do not form {q}x{k} matrices",
                data.len()
            )));
        }
        Ok(Self { q, k, offset, data })
    }

    /// The same matrix at every time point.
    pub fn constant(matrix: &[f64], q: usize, k: usize, n: usize) -> Result<Self> {
        if matrix.len() != q * k {
            return Err(Error::Dimension(format!(
                "{} entries do not form a {q}x{k} matrix",
                matrix.len()
            )));
        }
        Self::new(q, k, 0, matrix.repeat(n))
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.data.len() / (self.q * self.k)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn matrix(&self, t: usize) -> &[f64] {
        let s = self.q * self.k;
        &self.data[t * s..(t + 1) * s]
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&v| v >= 0.0)
    }
}

/// Everything a test-function builder may use. All entries are predictable: forecasts
/// and scale estimates are known at the start of each period.
#[derive(Debug, Clone, Copy)]
pub struct TestContext<'a> {
    pub functional: Functional,
    pub forecasts: &'a [Forecast],
    pub values: &'a [IdValue],
    /// One-step-ahead volatility forecasts `σ̂_t`.
    pub sigma: Option<&'a [f64]>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TestFunctionSpec {
    /// Identity `k×k`: the simple test.
    Constant,
    /// `(1, r_t)'` for VaR.
    VaRStandard,
    /// `(1, |r_t|)'` for VaR, nonnegative.
    VaRAbs,
    /// `(1, V_{t-1}, …, V_{t-p}, r_t)'` for one-dimensional functionals.
    DynamicQuantile(usize),
    /// `σ̂_t⁻¹ I_k`.
    InverseSigma,
    /// `σ̂_t⁻¹((r₂ₜ - r₁ₜ)/(1 - ν), 1)` for (VaR, ES).
    McNeilFrey,
    /// The 4×2 nonnegative block matrix with rows `(1, 0), (|r₁ₜ|, 0), (0, 1), (0, σ̂_t⁻¹)`.
    OneSidedBlockDiag,
    Custom(TestFunctions),
}

impl TestFunctionSpec {
    pub fn name(&self) -> &'static str {
        match self {
            TestFunctionSpec::Constant => "constant",
            TestFunctionSpec::VaRStandard => "var-standard",
            TestFunctionSpec::VaRAbs => "var-abs",
            TestFunctionSpec::DynamicQuantile(_) => "dynamic-quantile",
            TestFunctionSpec::InverseSigma => "inverse-sigma",
            TestFunctionSpec::McNeilFrey => "mcneil-frey",
            TestFunctionSpec::OneSidedBlockDiag => "one-sided-block",
            TestFunctionSpec::Custom(_) => "custom",
        }
    }

    pub fn build(&self, ctx: &TestContext<'_>) -> Result<TestFunctions> {
        let n = ctx.forecasts.len();
        if ctx.values.len() != n {
            return Err(Error::Dimension(format!(
                "{} forecasts but {} values",
                n,
                ctx.values.len()
            )));
        }
        let k = ctx.functional.dimension();
        let sigma = || {
            ctx.sigma.filter(|s| s.len() == n).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "{} test functions need σ̂ for every period",
                    self.name()
                ))
            })
        };
        let point = |f: &Forecast| match *f {
            Forecast::Point(r) => Ok(r),
            Forecast::Pair { .. } => Err(Error::Dimension("expected point forecasts".into())),
        };
        let pair = |f: &Forecast| match *f {
            Forecast::Pair { var, es } => Ok((var, es)),
            Forecast::Point(_) => Err(Error::Dimension("expected (VaR, ES) forecasts".into())),
        };
        let need = |kind: FunctionalKind| {
            if ctx.functional.kind() == kind {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{} test functions do not apply to {}",
                    self.name(),
                    ctx.functional
                )))
            }
        };
        match self {
            TestFunctionSpec::Constant => {
                let mut eye = vec![0.0; k * k];
                for i in 0..k {
                    eye[i * k + i] = 1.0;
                }
                TestFunctions::constant(&eye, k, k, n)
            }
            TestFunctionSpec::VaRStandard | TestFunctionSpec::VaRAbs => {
                need(FunctionalKind::VaR)?;
                let abs = matches!(self, TestFunctionSpec::VaRAbs);
                let mut data = Vec::with_capacity(2 * n);
                for f in ctx.forecasts {
                    let r = point(f)?;
                    data.push(1.0);
                    data.push(if abs { r.abs() } else { r });
                }
                TestFunctions::new(2, 1, 0, data)
            }
            TestFunctionSpec::DynamicQuantile(p) => {
                if k != 1 {
                    return Err(Error::InvalidParameter(
                        "dynamic-quantile test functions need a scalar functional".into(),
                    ));
                }
                let p = *p;
                if n <= p {
                    return Err(Error::InsufficientData(format!(
                        "{n} observations for {p} lags"
                    )));
                }
                let mut data = Vec::with_capacity((n - p) * (p + 2));
                for t in p..n {
                    data.push(1.0);
                    for lag in 1..=p {
                        data.push(ctx.values[t - lag].get(0));
                    }
                    data.push(point(&ctx.forecasts[t])?);
                }
                TestFunctions::new(p + 2, 1, p, data)
            }
            TestFunctionSpec::InverseSigma => {
                let s = sigma()?;
                let mut data = Vec::with_capacity(n * k * k);
                for &st in s {
                    for i in 0..k {
                        for j in 0..k {
                            data.push(if i == j { 1.0 / st } else { 0.0 });
                        }
                    }
                }
                TestFunctions::new(k, k, 0, data)
            }
            TestFunctionSpec::McNeilFrey => {
                need(FunctionalKind::VaRES)?;
                let s = sigma()?;
                let nu = ctx.functional.level().value();
                let mut data = Vec::with_capacity(2 * n);
                for (f, &st) in ctx.forecasts.iter().zip(s) {
                    let (r1, r2) = pair(f)?;
                    data.push((r2 - r1) / ((1.0 - nu) * st));
                    data.push(1.0 / st);
                }
                TestFunctions::new(1, 2, 0, data)
            }
            TestFunctionSpec::OneSidedBlockDiag => {
                need(FunctionalKind::VaRES)?;
                let s = sigma()?;
                let mut data = Vec::with_capacity(8 * n);
                for (f, &st) in ctx.forecasts.iter().zip(s) {
                    let (r1, _) = pair(f)?;
                    data.extend_from_slice(&[1.0, 0.0, r1.abs(), 0.0, 0.0, 1.0, 0.0, 1.0 / st]);
                }
                TestFunctions::new(4, 2, 0, data)
            }
            TestFunctionSpec::Custom(h) => {
                if h.k != k {
                    return Err(Error::Dimension(format!(
                        "custom test functions have k = {}, functional needs {k}",
                        h.k
                    )));
                }
                if h.offset + h.len() != n {
                    return Err(Error::Dimension(
                        "custom test functions do not cover the sample".into(),
                    ));
                }
                Ok(h.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    /// `T₁` (one entry) for Wald-type tests; the standardized vector `T₂` for one-sided tests.
    pub statistic: Vec<f64>,
    pub df: usize,
    pub n: usize,
    /// Headline p-value: chi-square for Wald tests, Hommel-adjusted for one-sided tests.
    pub p_value: Option<f64>,
    pub per_component_p: Vec<f64>,
    pub hommel_p: Option<f64>,
    pub bonferroni_p: Option<f64>,
    /// Reason the test could not be carried out.
    pub degenerate: Option<String>,
}

impl CalibrationReport {
    fn degenerate(df: usize, n: usize, reason: impl Into<String>) -> Self {
        Self {
            statistic: Vec::new(),
            df,
            n,
            p_value: None,
            per_component_p: Vec::new(),
            hommel_p: None,
            bonferroni_p: None,
            degenerate: Some(reason.into()),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate.is_some()
    }

    /// Whether the headline p-value is at or below `eta`; `None` when degenerate.
    pub fn rejects(&self, eta: f64) -> Option<bool> {
        self.p_value.map(|p| p <= eta)
    }
}

/// Stacks `Z_t = h_t V_t` as rows of an n×q matrix.
fn moment_matrix(values: &[IdValue], h: &TestFunctions) -> Result<DMatrix<f64>> {
    let values = values
        .get(h.offset..)
        .ok_or_else(|| Error::Dimension("test-function offset exceeds the sample".into()))?;
    if values.len() != h.len() {
        return Err(Error::Dimension(format!(
            "{} values but {} test-function matrices",
            values.len(),
            h.len()
        )));
    }
    let (q, k) = (h.q, h.k);
    let mut z = DMatrix::zeros(values.len(), q);
    for (t, v) in values.iter().enumerate() {
        if v.dim() != k {
            return Err(Error::Dimension(format!(
                "identification value has {} components, expected {k}",
                v.dim()
            )));
        }
        let m = h.matrix(t);
        for i in 0..q {
            let mut acc = 0.0;
            for j in 0..k {
                acc += m[i * k + j] * v.get(j);
            }
            z[(t, i)] = acc;
        }
    }
    Ok(z)
}

/// Eigen-decomposes a symmetric positive semi-definite matrix, refusing ill-conditioned ones.
fn well_conditioned_eigen(
    m: &DMatrix<f64>,
) -> std::result::Result<(DVector<f64>, DMatrix<f64>), String> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err("covariance matrix has non-finite entries".into());
    }
    let eig = m.clone().symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if max <= 0.0 {
        return Err("covariance matrix is zero".into());
    }
    if min <= 0.0 || max / min > MAX_CONDITION {
        return Err(format!(
            "covariance matrix is singular or ill-conditioned (eigenvalues {min:e} .. {max:e})"
        ));
    }
    Ok((eig.eigenvalues, eig.eigenvectors))
}

/// Two-sided conditional calibration test: `T₁ = n Z̄' Ω̂⁻¹ Z̄` against `χ²_q`, where
/// `Ω̂ = n⁻¹ Σ Z_t Z_t'` is the sample second-moment matrix.
pub fn two_sided_cct(values: &[IdValue], h: &TestFunctions) -> Result<CalibrationReport> {
    let z = moment_matrix(values, h)?;
    let (n, q) = (z.nrows(), z.ncols());
    if n < q + 1 {
        return Err(Error::InsufficientData(format!(
            "{n} observations for {q} moment conditions"
        )));
    }
    let mean = z.row_mean().transpose();
    let omega = z.transpose() * &z / n as f64;
    let (vals, vecs) = match well_conditioned_eigen(&omega) {
        Ok(e) => e,
        Err(reason) => return Ok(CalibrationReport::degenerate(q, n, reason)),
    };
    let proj = vecs.transpose() * &mean;
    let t1 = n as f64
        * proj
            .iter()
            .zip(vals.iter())
            .map(|(p, l)| p * p / l)
            .sum::<f64>();
    let p = chi2_sf(t1, q as f64).clamp(0.0, 1.0);
    Ok(CalibrationReport {
        statistic: vec![t1],
        df: q,
        n,
        p_value: Some(p),
        per_component_p: Vec::new(),
        hommel_p: None,
        bonferroni_p: None,
        degenerate: None,
    })
}

/// Hommel's combination: `min(1, q C_q min_m π₍ₘ₎/m)` with `C_q = Σ_{r<=q} 1/r`.
pub fn hommel_adjusted(p: &[f64]) -> f64 {
    let q = p.len();
    if q == 0 {
        return 1.0;
    }
    let mut sorted = p.to_vec();
    sorted.sort_by(f64::total_cmp);
    let cq: f64 = (1..=q).map(|r| 1.0 / r as f64).sum();
    let best = sorted
        .iter()
        .enumerate()
        .map(|(i, &pi)| pi / (i + 1) as f64)
        .fold(f64::INFINITY, f64::min);
    (q as f64 * cq * best).min(1.0)
}

/// Hommel's rejection rule: reject if `π₍ₘ₎ <= mη/(q C_q)` for some `m`.
pub fn hommel_rejects(p: &[f64], eta: f64) -> bool {
    let q = p.len();
    let mut sorted = p.to_vec();
    sorted.sort_by(f64::total_cmp);
    let cq: f64 = (1..=q).map(|r| 1.0 / r as f64).sum();
    sorted
        .iter()
        .enumerate()
        .any(|(i, &pi)| pi <= (i + 1) as f64 * eta / (q as f64 * cq))
}

/// Bonferroni's combination `min(1, q π₍₁₎)`.
pub fn bonferroni_adjusted(p: &[f64]) -> f64 {
    let min = p.iter().copied().fold(f64::INFINITY, f64::min);
    (p.len() as f64 * min).min(1.0)
}

/// One-sided conditional calibration test with nonnegative test functions.
///
/// Component `m` is standardized by its own second moment,
/// `T₂,ₘ = n^{-1/2} Σ_t Z_{t,m} / Ω̂_mm^{1/2}`, and gets `π_m = Φ(T₂,ₘ)` under super-calibration
/// or `1 - Φ(T₂,ₘ)` under sub-calibration. The components are combined with Hommel's
/// procedure (headline p-value) and with Bonferroni's.
pub fn one_sided_cct(
    values: &[IdValue],
    h: &TestFunctions,
    direction: Direction,
) -> Result<CalibrationReport> {
    if !h.is_nonnegative() {
        return Err(Error::InvalidParameter(
            "one-sided tests need nonnegative test functions".into(),
        ));
    }
    let z = moment_matrix(values, h)?;
    let (n, q) = (z.nrows(), z.ncols());
    if n < q + 1 {
        return Err(Error::InsufficientData(format!(
            "{n} observations for {q} moment conditions"
        )));
    }
    let nf = n as f64;
    let mut stats = Vec::with_capacity(q);
    let mut pis = Vec::with_capacity(q);
    for m in 0..q {
        let col = z.column(m);
        let second = col.iter().map(|v| v * v).sum::<f64>() / nf;
        if !(second > 0.0 && second.is_finite()) {
            return Ok(CalibrationReport::degenerate(
                q,
                n,
                format!("moment component {m} is identically zero"),
            ));
        }
        let t = col.sum() / (nf.sqrt() * second.sqrt());
        stats.push(t);
        pis.push(match direction {
            Direction::Super => norm_cdf(t),
            Direction::Sub => norm_cdf(-t),
        });
    }
    let hommel = hommel_adjusted(&pis);
    Ok(CalibrationReport {
        statistic: stats,
        df: q,
        n,
        p_value: Some(hommel),
        per_component_p: pis.clone(),
        hommel_p: Some(hommel),
        bonferroni_p: Some(bonferroni_adjusted(&pis)),
        degenerate: None,
    })
}

/// Average calibration test: `√n Σ̂^{-1/2} V̄` with a HAC covariance `Σ̂`; the squared norm
/// is compared with `χ²_k`. Per-component p-values are two-sided normal.
pub fn average_calibration_test(values: &[IdValue], hac: HacPolicy) -> Result<CalibrationReport> {
    let n = values.len();
    if n < 30 {
        return Err(Error::InsufficientData(format!(
            "average calibration needs at least 30 observations, got {n}"
        )));
    }
    let k = values[0].dim();
    let mut data = DMatrix::zeros(n, k);
    for (t, v) in values.iter().enumerate() {
        if v.dim() != k {
            return Err(Error::Dimension("mixed identification dimensions".into()));
        }
        for j in 0..k {
            data[(t, j)] = v.get(j);
        }
    }
    let mean = data.row_mean().transpose();
    let sigma = hac_covariance(&data, hac);
    let (vals, vecs) = match well_conditioned_eigen(&sigma) {
        Ok(e) => e,
        Err(reason) => return Ok(CalibrationReport::degenerate(k, n, reason)),
    };
    let inv_sqrt = &vecs * DMatrix::from_diagonal(&vals.map(|l| 1.0 / l.sqrt())) * vecs.transpose();
    let stat = inv_sqrt * mean * (n as f64).sqrt();
    let chi = stat.norm_squared();
    let per: Vec<f64> = stat.iter().map(|s| 2.0 * norm_cdf(-s.abs())).collect();
    Ok(CalibrationReport {
        statistic: stat.iter().copied().collect(),
        df: k,
        n,
        p_value: Some(chi2_sf(chi, k as f64).clamp(0.0, 1.0)),
        per_component_p: per,
        hommel_p: None,
        bonferroni_p: None,
        degenerate: None,
    })
}

/// Exact binomial test on the number of VaR exceedances out of `n` periods.
///
/// `Super` tests against too many exceedances (`P(B >= x)`), `Sub` against too few
/// (`P(B <= x)`), and `Two` sums the probabilities of all counts no more likely than
/// the observed one.
pub fn binomial_var_test(
    exceedances: u64,
    n: u64,
    alpha: f64,
    side: Side,
) -> Result<CalibrationReport> {
    if exceedances > n {
        return Err(Error::InvalidParameter(format!(
            "{exceedances} exceedances out of {n}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::LevelOutOfRange(alpha));
    }
    let p = 1.0 - alpha;
    let pmf: Vec<f64> = (0..=n).map(|k| binomial_pmf(k, n, p)).collect();
    let x = exceedances as usize;
    let value = match side {
        Side::Super => pmf[x..].iter().sum::<f64>(),
        Side::Sub => pmf[..=x].iter().sum::<f64>(),
        Side::Two => {
            let cutoff = pmf[x] * (1.0 + 1e-7);
            pmf.iter().filter(|&&v| v <= cutoff).sum::<f64>()
        }
    };
    Ok(CalibrationReport {
        statistic: vec![exceedances as f64],
        df: 1,
        n: n as usize,
        p_value: Some(value.clamp(0.0, 1.0)),
        per_component_p: Vec::new(),
        hommel_p: None,
        bonferroni_p: None,
        degenerate: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExceedanceResiduals {
    /// Mean of `(x_t - r₂ₜ)/σ̂_t` over the exceedances `x_t > r₁ₜ`.
    pub statistic: f64,
    pub exceedances: usize,
    /// `n⁻¹ Σ h_t V_t` with the McNeil–Frey test function, the moment-condition form of the same quantity.
    pub moment_form: f64,
}

/// Mean standardized exceedance residual for (VaR, ES) forecasts at level `nu`.
pub fn mcneil_frey_statistic(
    x: &[f64],
    r1: &[f64],
    r2: &[f64],
    sigma: &[f64],
    nu: f64,
) -> Result<ExceedanceResiduals> {
    let n = x.len();
    if r1.len() != n || r2.len() != n || sigma.len() != n {
        return Err(Error::Dimension("series lengths differ".into()));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut moment = 0.0;
    for t in 0..n {
        // h_t V_t, evaluated literally.
        let (v1, v2) = if x[t] > r1[t] {
            (-nu, r1[t] - r2[t] - (r1[t] - x[t]) / (1.0 - nu))
        } else {
            (1.0 - nu, r1[t] - r2[t])
        };
        moment += (r2[t] - r1[t]) / ((1.0 - nu) * sigma[t]) * v1 + v2 / sigma[t];
        if x[t] > r1[t] {
            sum += (x[t] - r2[t]) / sigma[t];
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::InsufficientData("no exceedances".into()));
    }
    Ok(ExceedanceResiduals {
        statistic: sum / count as f64,
        exceedances: count,
        moment_form: moment / n as f64,
    })
}
