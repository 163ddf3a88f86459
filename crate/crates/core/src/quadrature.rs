//! Adaptive Gauss–Kronrod (7/15) integration with a tangent map for infinite limits.

use crate::error::{Error, Result};
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Length scale of the tangent map used on infinite ranges.
    pub scale: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-11,
            max_intervals: 4000,
            scale: 1.0,
        }
    }
}

impl QuadOptions {
    pub fn with_scale(mut self, scale: f64) -> Self {
        if scale.is_finite() && scale > 0.0 {
            self.scale = scale;
        }
        self
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kron * h;
    let error = ((kron - gauss) * h).abs();
    (value, error)
}

fn adaptive<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, opts: &QuadOptions) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (value, error) = kronrod(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut count = 1;
    loop {
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::Quadrature {
                value: total,
                error: total_err,
            });
        }
        if total_err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            return Ok(total);
        }
        if count >= opts.max_intervals {
            return Err(Error::Quadrature {
                value: total,
                error: total_err,
            });
        }
        let seg = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Interval cannot be split further in floating point.
            return Err(Error::Quadrature {
                value: total,
                error: total_err,
            });
        }
        let (v1, e1) = kronrod(f, seg.a, mid);
        let (v2, e2) = kronrod(f, mid, seg.b);
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment {
            a: seg.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: seg.b,
            value: v2,
            error: e2,
        });
        count += 1;
        if count % 64 == 0 {
            // Re-sum to keep round-off from accumulating in the running totals.
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
}

/// Integrates `f` over `[a, b]`; either limit may be infinite.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<f64> {
    integrate_dyn(&f, a, b, opts)
}

fn integrate_dyn(f: &dyn Fn(f64) -> f64, a: f64, b: f64, opts: &QuadOptions) -> Result<f64> {
    if a.is_nan() || b.is_nan() {
        return Err(Error::InvalidParameter("integration limit is NaN".into()));
    }
    if a > b {
        return integrate_dyn(f, b, a, opts).map(|v| -v);
    }
    let s = opts.scale;
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adaptive(f, a, b, opts),
        (true, false) => {
            let g = |t: f64| {
                let (sin, cos) = t.sin_cos();
                if cos <= 0.0 {
                    return 0.0;
                }
                let v = f(a + s * sin / cos);
                if v == 0.0 {
                    0.0
                } else {
                    v * s / (cos * cos)
                }
            };
            adaptive(&g, 0.0, FRAC_PI_2, opts)
        }
        (false, true) => {
            let g = |t: f64| {
                let (sin, cos) = t.sin_cos();
                if cos <= 0.0 {
                    return 0.0;
                }
                let v = f(b - s * sin / cos);
                if v == 0.0 {
                    0.0
                } else {
                    v * s / (cos * cos)
                }
            };
            adaptive(&g, 0.0, FRAC_PI_2, opts)
        }
        (false, false) => {
            let left = integrate_dyn(f, f64::NEG_INFINITY, 0.0, opts)?;
            let right = integrate_dyn(f, 0.0, f64::INFINITY, opts)?;
            Ok(left + right)
        }
    }
}

/// Integrates over consecutive pieces separated by `breaks` (which must be sorted and lie
/// strictly inside `(a, b)`; points outside are ignored).
pub fn integrate_split<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: &QuadOptions,
) -> Result<f64> {
    let mut points = vec![a];
    for &p in breaks {
        if p > *points.last().unwrap() && p < b {
            points.push(p);
        }
    }
    points.push(b);
    let mut total = 0.0;
    for w in points.windows(2) {
        total += integrate(&f, w[0], w[1], opts)?;
    }
    Ok(total)
}
