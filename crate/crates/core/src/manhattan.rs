//! Manhattan-curve sampling and the correlation number by three routes:
//! the tangency point of the sampled curve, minimization of mixed
//! renormalized spectra, and a direct joint-window counting fit.

use crate::error::{Error, Result};
use crate::growth::{growth_core, GrowthEstimate, SpectrumView, WindowPolicy};
use crate::representation::schottky_pair;
use crate::spectrum::{compute_spectrum, CountingFunction, SpectrumOptions, SpectrumTable};
use crate::representation::LengthFunctional;
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

const PROPORTIONAL_TOL: f64 = 1e-9;
const ENDPOINT_FIT_RMS_LIMIT: f64 = 0.05;
/// Total-variation floor under which the mixed-growth objective is considered
/// flat (the estimator's correlated-difference precision).
const FLAT_OBJECTIVE_TV: f64 = 0.005;

/// Grid and stencil options for curve sampling.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveOptions {
    /// Number of b-grid samples.
    pub points: usize,
    /// Grid start as a multiple of h2.
    pub lo_factor: f64,
    /// Grid end as a multiple of h2.
    pub hi_factor: f64,
    /// Skip the proportional-spectra guard (test mode).
    pub allow_proportional: bool,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions { points: 33, lo_factor: -0.1, hi_factor: 1.1, allow_proportional: false }
    }
}

/// Fixed stencil width for slope extraction; reported in the serialized curve.
pub const SLOPE_STENCIL: usize = 5;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CurveSample {
    pub b: f64,
    pub a: f64,
    pub stderr: f64,
}

/// Sampled Manhattan curve with endpoint entropies and certificates.
#[derive(Clone, Debug, Serialize)]
pub struct ManhattanCurve {
    pub samples: Vec<CurveSample>,
    pub h1: GrowthEstimate,
    pub h2: GrowthEstimate,
    /// Worst violation of discrete convexity (0 when convex).
    pub convexity_violation: f64,
    /// Worst violation of strict decrease in b (0 when monotone).
    pub monotonicity_violation: f64,
    pub labels: (String, String),
    pub stencil: usize,
}

impl ManhattanCurve {
    /// Linear interpolation of a(b) on the sample grid.
    pub fn a_at(&self, b: f64) -> f64 {
        let s = &self.samples;
        if b <= s[0].b {
            return s[0].a;
        }
        for w in s.windows(2) {
            if b <= w[1].b {
                let t = (b - w[0].b) / (w[1].b - w[0].b);
                return w[0].a + t * (w[1].a - w[0].a);
            }
        }
        s[s.len() - 1].a
    }
}

fn proportionality(l1: &[f64], l2: &[f64]) -> (f64, f64) {
    let num: f64 = l1.iter().zip(l2).map(|(a, b)| a * b).sum();
    let den: f64 = l2.iter().map(|b| b * b).sum();
    let kappa = num / den;
    let dev = l1
        .iter()
        .zip(l2)
        .map(|(a, b)| (a - kappa * b).abs())
        .fold(0.0, f64::max);
    (kappa, dev)
}

fn curve_from_samples(
    samples: Vec<CurveSample>,
    h1: GrowthEstimate,
    h2: GrowthEstimate,
    labels: (String, String),
) -> ManhattanCurve {
    let mut convexity_violation = 0.0f64;
    for w in samples.windows(3) {
        let d2 = w[2].a - 2.0 * w[1].a + w[0].a;
        convexity_violation = convexity_violation.max(-d2);
    }
    let mut monotonicity_violation = 0.0f64;
    for w in samples.windows(2) {
        monotonicity_violation = monotonicity_violation.max(w[1].a - w[0].a);
    }
    ManhattanCurve {
        samples,
        h1,
        h2,
        convexity_violation,
        monotonicity_violation,
        labels,
        stencil: SLOPE_STENCIL,
    }
}

struct CurveInputs {
    cf1: CountingFunction,
    l2_aligned: Vec<f64>,
    h1: GrowthEstimate,
    h2: GrowthEstimate,
    grid: Vec<f64>,
    labels: (String, String),
}

fn curve_inputs(
    table: &SpectrumTable,
    col1: usize,
    col2: usize,
    opts: &CurveOptions,
    policy: &WindowPolicy,
) -> Result<CurveInputs> {
    let h1 = crate::growth::growth_rate(&table.column_counting(col1), None, policy)?;
    let h2 = crate::growth::growth_rate(&table.column_counting(col2), None, policy)?;
    let (cf1, l2_aligned) = table.aligned_pair(col1, col2);
    if !opts.allow_proportional {
        let (kappa, dev) = proportionality(cf1.values(), &l2_aligned);
        if dev <= PROPORTIONAL_TOL {
            return Err(Error::ProportionalSpectra { kappa, dev });
        }
    }
    let n = opts.points.max(5);
    let grid: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            (opts.lo_factor + t * (opts.hi_factor - opts.lo_factor)) * h2.value
        })
        .collect();
    let labels = (
        format!("{}:{}", table.columns()[col1].label, table.columns()[col1].functional),
        format!("{}:{}", table.columns()[col2].label, table.columns()[col2].functional),
    );
    Ok(CurveInputs { cf1, l2_aligned, h1, h2, grid, labels })
}

fn sample_one(inputs: &CurveInputs, b: f64, policy: &WindowPolicy) -> Result<CurveSample> {
    let weights: Vec<f64> = inputs.l2_aligned.iter().map(|l| (-b * l).exp()).collect();
    let view = SpectrumView {
        values: inputs.cf1.values(),
        wordlens: inputs.cf1.word_lengths(),
        weights: Some(&weights),
        n_max: inputs.cf1.n_max(),
    };
    let est = growth_core(&view, policy)?;
    Ok(CurveSample { b, a: est.value, stderr: est.stderr })
}

/// Sample a(b) = growth of column-1 counting weighted by e^{-b l2} over the
/// default grid b in [-0.1 h2, 1.1 h2]. Parallel over the grid.
pub fn sample_curve(
    table: &SpectrumTable,
    col1: usize,
    col2: usize,
    opts: &CurveOptions,
    policy: &WindowPolicy,
) -> Result<ManhattanCurve> {
    let inputs = curve_inputs(table, col1, col2, opts, policy)?;
    #[cfg(feature = "parallel")]
    let samples: Result<Vec<CurveSample>> = inputs
        .grid
        .par_iter()
        .map(|&b| sample_one(&inputs, b, policy))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let samples: Result<Vec<CurveSample>> = inputs
        .grid
        .iter()
        .map(|&b| sample_one(&inputs, b, policy))
        .collect();
    Ok(curve_from_samples(samples?, inputs.h1, inputs.h2, inputs.labels))
}

/// Sequential twin of `sample_curve`; bit-identical output.
pub fn sample_curve_serial(
    table: &SpectrumTable,
    col1: usize,
    col2: usize,
    opts: &CurveOptions,
    policy: &WindowPolicy,
) -> Result<ManhattanCurve> {
    let inputs = curve_inputs(table, col1, col2, opts, policy)?;
    let samples: Result<Vec<CurveSample>> = inputs
        .grid
        .iter()
        .map(|&b| sample_one(&inputs, b, policy))
        .collect();
    Ok(curve_from_samples(samples?, inputs.h1, inputs.h2, inputs.labels))
}

/// Least-squares quadratic y = c0 + c1 (x - x0) + c2 (x - x0)^2.
fn quad_fit(xs: &[f64], ys: &[f64], x0: f64) -> ([f64; 3], f64) {
    let n = xs.len();
    let mut s = [0.0f64; 5];
    let mut t = [0.0f64; 3];
    for i in 0..n {
        let d = xs[i] - x0;
        let d2 = d * d;
        s[0] += 1.0;
        s[1] += d;
        s[2] += d2;
        s[3] += d2 * d;
        s[4] += d2 * d2;
        t[0] += ys[i];
        t[1] += d * ys[i];
        t[2] += d2 * ys[i];
    }
    // solve the 3x3 normal system by Cramer's rule
    let a = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let det3 = |m: [[f64; 3]; 3]| -> f64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d0 = det3(a);
    let col = |k: usize| -> [[f64; 3]; 3] {
        let mut m = a;
        for r in 0..3 {
            m[r][k] = t[r];
        }
        m
    };
    let c = [det3(col(0)) / d0, det3(col(1)) / d0, det3(col(2)) / d0];
    let mut ss = 0.0;
    for i in 0..n {
        let d = xs[i] - x0;
        let r = ys[i] - (c[0] + c[1] * d + c[2] * d * d);
        ss += r * r;
    }
    (c, (ss / n as f64).sqrt())
}

fn stencil_around(curve: &ManhattanCurve, center: usize) -> (Vec<f64>, Vec<f64>) {
    let n = curve.samples.len();
    let half = SLOPE_STENCIL / 2;
    let lo = center.saturating_sub(half);
    let hi = (center + half + 1).min(n);
    let lo = lo.min(hi.saturating_sub(SLOPE_STENCIL));
    let xs: Vec<f64> = curve.samples[lo..hi].iter().map(|s| s.b).collect();
    let ys: Vec<f64> = curve.samples[lo..hi].iter().map(|s| s.a).collect();
    (xs, ys)
}

fn nearest_index(curve: &ManhattanCurve, b: f64) -> usize {
    let mut best = 0;
    let mut bd = f64::INFINITY;
    for (i, s) in curve.samples.iter().enumerate() {
        let d = (s.b - b).abs();
        if d < bd {
            bd = d;
            best = i;
        }
    }
    best
}

/// Endpoint analysis: normal slopes at (h1, 0) and (0, h2) via fixed-width
/// quadratic stencils, the renormalized intersections, and the curve's
/// a(0) anchor and root in b.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PressureIntersections {
    pub i12: f64,
    pub i21: f64,
    pub j12: f64,
    pub j21: f64,
    /// Fitted a(0); anchors against h1.
    pub a_at_zero: f64,
    /// Fitted root of a(b); anchors against h2.
    pub root: f64,
    pub fit_rms: (f64, f64),
}

pub fn pressure_intersections(curve: &ManhattanCurve) -> Result<PressureIntersections> {
    let h1 = curve.h1.value;
    let h2 = curve.h2.value;
    let i0 = nearest_index(curve, 0.0);
    let ih = nearest_index(curve, h2);
    let (xs0, ys0) = stencil_around(curve, i0);
    let (xsh, ysh) = stencil_around(curve, ih);
    let (c0, rms0) = quad_fit(&xs0, &ys0, 0.0);
    let (ch, rmsh) = quad_fit(&xsh, &ysh, h2);
    let limit = ENDPOINT_FIT_RMS_LIMIT;
    if rms0 > limit || rmsh > limit {
        return Err(Error::EndpointFitUnstable { rms: rms0.max(rmsh), limit });
    }
    let slope0 = c0[1];
    let slopeh = ch[1];
    let i12 = -slope0;
    let i21 = -1.0 / slopeh;
    // root of the local quadratic c[0] + c[1] t + c[2] t^2 nearest to t = 0
    let root_offset = {
        let (a, b, c) = (ch[2], ch[1], ch[0]);
        let disc = b * b - 4.0 * a * c;
        if a.abs() > 1e-12 && disc > 0.0 {
            let r1 = (-b + disc.sqrt()) / (2.0 * a);
            let r2 = (-b - disc.sqrt()) / (2.0 * a);
            if r1.abs() < r2.abs() {
                r1
            } else {
                r2
            }
        } else {
            -c / b
        }
    };
    Ok(PressureIntersections {
        i12,
        i21,
        j12: (h2 / h1) * i12,
        j21: (h1 / h2) * i21,
        a_at_zero: c0[0],
        root: h2 + root_offset,
        fit_rms: (rms0, rmsh),
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TangentReport {
    /// Correlation number a/h1 + b/h2 at the tangent-parallel point.
    pub m: f64,
    pub a: f64,
    pub b: f64,
    /// False when the target slope fell outside the sampled slope range and
    /// the nearest sample was used instead.
    pub slope_bracketed: bool,
}

/// Point where the curve's tangent is parallel to the chord through
/// (h1, 0) and (0, h2); in a(b)-graph coordinates the target slope is -h1/h2.
///
/// On a convex curve that point is the minimizer of M(b) = a(b)/h1 + b/h2, so
/// the value is extracted as the minimum of M over the fitted local quadratics
/// (far better conditioned than locating the slope crossing when the curve is
/// shallow); the slope bracket is kept as a diagnostic.
pub fn correlation_tangent(curve: &ManhattanCurve) -> Result<TangentReport> {
    let h1 = curve.h1.value;
    let h2 = curve.h2.value;
    let target = -h1 / h2;
    let n = curve.samples.len();
    let slopes: Vec<f64> = (0..n)
        .map(|i| {
            let (xs, ys) = stencil_around(curve, i);
            let (c, _) = quad_fit(&xs, &ys, curve.samples[i].b);
            c[1]
        })
        .collect();
    let bracketed = (0..n - 1).any(|i| (slopes[i] - target) * (slopes[i + 1] - target) <= 0.0);
    if !bracketed {
        let miss = slopes.iter().map(|s| (s - target).abs()).fold(f64::INFINITY, f64::min);
        if miss > 0.10 * target.abs() {
            let lo = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            return Err(Error::SlopeNotBracketed { target, lo, hi });
        }
    }
    // minimize M over each sample's local quadratic, evaluated on a fine grid
    // of its own stencil cell
    let mut best = (f64::INFINITY, 0.0f64, 0.0f64);
    for i in 0..n {
        let (xs, ys) = stencil_around(curve, i);
        let (c, _) = quad_fit(&xs, &ys, curve.samples[i].b);
        let cell_lo = if i == 0 { curve.samples[0].b } else { 0.5 * (curve.samples[i - 1].b + curve.samples[i].b) };
        let cell_hi = if i == n - 1 {
            curve.samples[n - 1].b
        } else {
            0.5 * (curve.samples[i].b + curve.samples[i + 1].b)
        };
        for k in 0..=8 {
            let b = cell_lo + (cell_hi - cell_lo) * k as f64 / 8.0;
            let d = b - curve.samples[i].b;
            let a = c[0] + c[1] * d + c[2] * d * d;
            let m = a / h1 + b / h2;
            if m < best.0 {
                best = (m, a, b);
            }
        }
    }
    Ok(TangentReport { m: best.0, a: best.1, b: best.2, slope_bracketed: bracketed })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MinsReport {
    /// Minimal growth of the mixed renormalized spectrum.
    pub m: f64,
    /// Argmin in (0, 1).
    pub s0: f64,
    /// Objective at the bracket ends (sanity: both near 1).
    pub ends: (f64, f64),
    pub evaluations: usize,
}

/// Golden-section minimization of s -> growth(s h1 l1 + (1-s) h2 l2).
pub fn correlation_mins(
    table: &SpectrumTable,
    col1: usize,
    col2: usize,
    h1: f64,
    h2: f64,
    policy: &WindowPolicy,
) -> Result<MinsReport> {
    let mut evals = 0usize;
    let mut seen_min = f64::INFINITY;
    let mut seen_max = f64::NEG_INFINITY;
    let mut objective = |s: f64| -> Result<f64> {
        let cf = table.counting(&mix_weights(table, col1, col2, s * h1, (1.0 - s) * h2))?;
        let est = crate::growth::growth_rate(&cf, None, policy)?;
        evals += 1;
        seen_min = seen_min.min(est.value);
        seen_max = seen_max.max(est.value);
        Ok(est.value)
    };
    let lo_end = objective(0.02)?;
    let hi_end = objective(0.98)?;
    let gr = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.02f64, 0.98f64);
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let mut fc = objective(c)?;
    let mut fd = objective(d)?;
    while b - a > 1e-3 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = objective(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = objective(d)?;
        }
    }
    let s0 = 0.5 * (a + b);
    let m = objective(s0)?;
    let tv = seen_max - seen_min;
    if tv < FLAT_OBJECTIVE_TV {
        return Err(Error::FlatObjective { tv, floor: FLAT_OBJECTIVE_TV });
    }
    Ok(MinsReport { m, s0, ends: (lo_end, hi_end), evaluations: evals })
}

fn mix_weights(table: &SpectrumTable, col1: usize, col2: usize, w1: f64, w2: f64) -> Vec<f64> {
    let mut w = vec![0.0; table.columns().len()];
    w[col1] += w1;
    w[col2] += w2;
    w
}

#[derive(Clone, Debug, Serialize)]
pub struct CountPoint {
    pub x: f64,
    pub count: u64,
    pub fitted: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CountFit {
    /// Fitted exponent of count ~ C e^{Mx} / x^{3/2}.
    pub m: f64,
    pub c: f64,
    pub epsilon: f64,
    /// Diagnostic ratio C / eps^2 (order-of-magnitude check only).
    pub c_over_eps2: f64,
    pub points: Vec<CountPoint>,
    pub rms_residual: f64,
}

/// X-grid policy for the counting fit, as fractions of h1 * T_hi.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct XGridPolicy {
    pub points: usize,
    pub lo_frac: f64,
    pub hi_frac: f64,
}

impl Default for XGridPolicy {
    fn default() -> Self {
        XGridPolicy { points: 12, lo_frac: 0.35, hi_frac: 0.8 }
    }
}

/// Window counts of classes with renormalized lengths jointly near x, and the
/// weighted fit of log(count * x^{3/2}) against x.
pub fn correlation_count(
    table: &SpectrumTable,
    col1: usize,
    col2: usize,
    h1: f64,
    h2: f64,
    epsilon: f64,
    grid: &XGridPolicy,
    t_hi: f64,
) -> Result<CountFit> {
    assert!(epsilon > 0.0);
    let l1 = table.column_values(col1);
    let l2 = table.column_values(col2);
    let x_top = h1 * t_hi;
    let xs: Vec<f64> = (0..grid.points)
        .map(|i| {
            let t = i as f64 / (grid.points - 1).max(1) as f64;
            (grid.lo_frac + t * (grid.hi_frac - grid.lo_frac)) * x_top
        })
        .collect();
    let counts: Vec<u64> = xs.iter().map(|&x| window_count(&l1, &l2, h1, h2, x, epsilon)).collect();
    let nonzero = counts.iter().filter(|c| **c > 0).count();
    if nonzero < 5 {
        return Err(Error::EmptyWindows { got: nonzero, need: 5 });
    }
    // Poisson-weighted least squares on y = ln(count) + 1.5 ln(x)
    let mut sw = 0.0;
    let mut sx = 0.0;
    let mut sy = 0.0;
    for (x, c) in xs.iter().zip(&counts) {
        if *c == 0 {
            continue;
        }
        let w = *c as f64;
        let y = (*c as f64).ln() + 1.5 * x.ln();
        sw += w;
        sx += w * x;
        sy += w * y;
    }
    let xm = sx / sw;
    let ym = sy / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, c) in xs.iter().zip(&counts) {
        if *c == 0 {
            continue;
        }
        let w = *c as f64;
        let y = (*c as f64).ln() + 1.5 * x.ln();
        sxx += w * (x - xm) * (x - xm);
        sxy += w * (x - xm) * (y - ym);
    }
    let m = sxy / sxx;
    let lnc = ym - m * xm;
    let c_fit = lnc.exp();
    let mut points = Vec::with_capacity(xs.len());
    let mut ss = 0.0;
    let mut nres = 0usize;
    for (x, c) in xs.iter().zip(&counts) {
        let fitted = c_fit * (m * x).exp() / x.powf(1.5);
        if *c > 0 {
            let r = (*c as f64).ln() - fitted.ln();
            ss += r * r;
            nres += 1;
        }
        points.push(CountPoint { x: *x, count: *c, fitted });
    }
    Ok(CountFit {
        m,
        c: c_fit,
        epsilon,
        c_over_eps2: c_fit / (epsilon * epsilon),
        points,
        rms_residual: (ss / nres as f64).sqrt(),
    })
}

/// Exact window count: h1 l1 in (x, x + h1 eps) and h2 l2 in (x, x + h2 eps).
pub fn window_count(l1: &[f64], l2: &[f64], h1: f64, h2: f64, x: f64, eps: f64) -> u64 {
    let mut n = 0u64;
    for i in 0..l1.len() {
        let a = h1 * l1[i];
        let b = h2 * l2[i];
        if a > x && a < x + h1 * eps && b > x && b < x + h2 * eps {
            n += 1;
        }
    }
    n
}

/// Raw-length joint windows (no renormalization): count over a dense x-grid,
/// reporting the largest x with a nonzero count.
#[derive(Clone, Debug, Serialize)]
pub struct RawWindowScan {
    pub epsilon: f64,
    pub x_grid: Vec<f64>,
    pub counts: Vec<u64>,
    /// Largest grid x with a nonzero count; None when every window is empty.
    pub threshold: Option<f64>,
}

pub fn raw_window_scan(
    table: &SpectrumTable,
    col1: usize,
    col2: usize,
    epsilon: f64,
    points: usize,
) -> RawWindowScan {
    let l1 = table.column_values(col1);
    let l2 = table.column_values(col2);
    let max1 = l1.iter().cloned().fold(0.0f64, f64::max);
    let min1 = l1.iter().cloned().fold(f64::INFINITY, f64::min);
    let xs: Vec<f64> = (0..points)
        .map(|i| min1 + (max1 - min1) * i as f64 / (points - 1).max(1) as f64)
        .collect();
    let counts: Vec<u64> = xs
        .iter()
        .map(|&x| {
            let mut n = 0u64;
            for i in 0..l1.len() {
                if l1[i] > x && l1[i] < x + epsilon && l2[i] > x && l2[i] < x + epsilon {
                    n += 1;
                }
            }
            n
        })
        .collect();
    let threshold = xs
        .iter()
        .zip(&counts)
        .filter(|(_, c)| **c > 0)
        .map(|(x, _)| *x)
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
    RawWindowScan { epsilon, x_grid: xs, counts, threshold }
}

/// Consistency flags aggregated across the three correlation routes.
#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyFlags {
    pub tangent_mins_gap: Option<f64>,
    pub tangent_count_gap: Option<f64>,
    pub point_on_curve_residual: Option<f64>,
    pub slope_bracketed: bool,
    pub curve_convex: bool,
    pub endpoints_anchored: bool,
    pub mins_flat: bool,
    pub count_windows_empty: bool,
}

/// Correlation number of a pair of columns by all three routes.
#[derive(Clone, Debug, Serialize)]
pub struct CorrelationReport {
    pub labels: (String, String),
    pub h1: GrowthEstimate,
    pub h2: GrowthEstimate,
    pub m_tangent: f64,
    pub tangent_point: (f64, f64),
    pub m_mins: Option<f64>,
    pub s0: Option<f64>,
    pub m_countfit: Option<f64>,
    pub c_countfit: Option<f64>,
    pub c_over_eps2: Option<f64>,
    pub i12: f64,
    pub i21: f64,
    pub j12: f64,
    pub j21: f64,
    pub a_at_zero: f64,
    pub root: f64,
    pub convexity_violation: f64,
    pub flags: ConsistencyFlags,
}

/// Run the full correlation pipeline for a pair of table columns.
pub fn correlation_report(
    table: &SpectrumTable,
    col1: usize,
    col2: usize,
    curve_opts: &CurveOptions,
    policy: &WindowPolicy,
    epsilon: f64,
    x_grid: &XGridPolicy,
) -> Result<(ManhattanCurve, CorrelationReport)> {
    let curve = sample_curve(table, col1, col2, curve_opts, policy)?;
    let inter = pressure_intersections(&curve)?;
    let tangent = correlation_tangent(&curve)?;
    let h1 = curve.h1.value;
    let h2 = curve.h2.value;
    let mins = correlation_mins(table, col1, col2, h1, h2, policy);
    let (m_mins, s0, mins_flat) = match &mins {
        Ok(r) => (Some(r.m), Some(r.s0), false),
        Err(Error::FlatObjective { .. }) => (None, None, true),
        Err(_) => {
            mins.as_ref().map_err(|e| Error::Config(format!("mins route failed: {e}"))).ok();
            (None, None, true)
        }
    };
    let count = correlation_count(table, col1, col2, h1, h2, epsilon, x_grid, curve.h1.window.1);
    let (m_cnt, c_cnt, c_ratio, cnt_empty) = match &count {
        Ok(f) => (Some(f.m), Some(f.c), Some(f.c_over_eps2), false),
        Err(_) => (None, None, None, true),
    };
    let point_on_curve = m_mins.zip(s0).map(|(m, s)| {
        let a_pt = s * h1 * m;
        let b_pt = (1.0 - s) * h2 * m;
        (curve.a_at(b_pt) - a_pt).abs()
    });
    let flags = ConsistencyFlags {
        tangent_mins_gap: m_mins.map(|m| (tangent.m - m).abs()),
        tangent_count_gap: m_cnt.map(|m| (tangent.m - m).abs()),
        point_on_curve_residual: point_on_curve,
        slope_bracketed: tangent.slope_bracketed,
        curve_convex: curve.convexity_violation <= 5e-3,
        endpoints_anchored: (inter.a_at_zero - h1).abs() <= 0.02 && (inter.root - h2).abs() <= 0.02,
        mins_flat,
        count_windows_empty: cnt_empty,
    };
    let report = CorrelationReport {
        labels: curve.labels.clone(),
        h1: curve.h1.clone(),
        h2: curve.h2.clone(),
        m_tangent: tangent.m,
        tangent_point: (tangent.a, tangent.b),
        m_mins,
        s0,
        m_countfit: m_cnt,
        c_countfit: c_cnt,
        c_over_eps2: c_ratio,
        i12: inter.i12,
        i21: inter.i21,
        j12: inter.j12,
        j21: inter.j21,
        a_at_zero: inter.a_at_zero,
        root: inter.root,
        convexity_violation: curve.convexity_violation,
        flags,
    };
    Ok((curve, report))
}

/// One step of the pinching experiment.
#[derive(Clone, Debug, Serialize)]
pub struct PinchReport {
    pub epsilon: f64,
    pub k_fixed: f64,
    pub angle: f64,
    pub dropped: usize,
    pub h1: Option<f64>,
    pub h2: Option<f64>,
    pub m_tangent: Option<f64>,
    pub m_mins: Option<f64>,
    pub raw_sum_systole: f64,
    pub renorm_sum_systole: Option<f64>,
    /// "ok" or the error that stopped the estimation.
    pub status: String,
}

/// Pinching demonstration: rho = schottky(eps, K), eta = schottky(K, eps),
/// full correlation pipeline per epsilon plus sum-column systoles.
#[allow(clippy::too_many_arguments)]
pub fn pinching_demo(
    eps_list: &[f64],
    k_fixed: f64,
    angle: f64,
    n_max: usize,
    policy: &WindowPolicy,
    curve_opts: &CurveOptions,
    epsilon: f64,
    x_grid: &XGridPolicy,
) -> Result<Vec<PinchReport>> {
    assert!(eps_list.windows(2).all(|w| w[1] < w[0]), "eps_list must decrease");
    let a1 = LengthFunctional::alpha(1, 2).unwrap();
    let mut out = Vec::new();
    for &eps in eps_list {
        let rho = schottky_pair(eps, k_fixed, angle)?;
        let eta = schottky_pair(k_fixed, eps, angle)?;
        let table = compute_spectrum(
            &[(rho, a1.clone()), (eta, a1.clone())],
            2,
            n_max,
            &SpectrumOptions { force: true, ..Default::default() },
        )?;
        let raw_sys = table.counting(&[1.0, 1.0])?.systole()?;
        let mut report = PinchReport {
            epsilon: eps,
            k_fixed,
            angle,
            dropped: table.meta().dropped,
            h1: None,
            h2: None,
            m_tangent: None,
            m_mins: None,
            raw_sum_systole: raw_sys,
            renorm_sum_systole: None,
            status: "ok".into(),
        };
        match correlation_report(&table, 0, 1, curve_opts, policy, epsilon, x_grid) {
            Ok((_, r)) => {
                report.h1 = Some(r.h1.value);
                report.h2 = Some(r.h2.value);
                report.m_tangent = Some(r.m_tangent);
                report.m_mins = r.m_mins;
                report.renorm_sum_systole =
                    table.counting(&[r.h1.value, r.h2.value]).ok().and_then(|c| c.systole().ok());
            }
            Err(e) => {
                report.status = e.to_string();
                // entropies may still be estimable even when the pipeline is not
                let h1 = crate::growth::growth_rate(&table.column_counting(0), None, policy).ok();
                let h2 = crate::growth::growth_rate(&table.column_counting(1), None, policy).ok();
                report.h1 = h1.as_ref().map(|e| e.value);
                report.h2 = h2.as_ref().map(|e| e.value);
                if let (Some(a), Some(b)) = (&h1, &h2) {
                    report.renorm_sum_systole =
                        table.counting(&[a.value, b.value]).ok().and_then(|c| c.systole().ok());
                }
            }
        }
        out.push(report);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::growth_rate;
    use crate::representation::LengthFunctional;

    fn a1() -> LengthFunctional {
        LengthFunctional::alpha(1, 2).unwrap()
    }

    fn table_two(nmax: usize) -> SpectrumTable {
        let r1 = schottky_pair(1.8, 2.6, 1.1).unwrap();
        let r2 = schottky_pair(2.5, 2.0, 1.9).unwrap();
        compute_spectrum(&[(r1, a1()), (r2, a1())], 2, nmax, &SpectrumOptions::default()).unwrap()
    }

    fn table_self_pair(nmax: usize) -> SpectrumTable {
        // identical column twice, then a doubled copy: for line tests
        let r1 = schottky_pair(2.0, 2.0, std::f64::consts::FRAC_PI_2).unwrap();
        let doubled = LengthFunctional::new(vec![2.0], 1.0).unwrap();
        compute_spectrum(
            &[(r1.clone(), a1()), (r1.clone(), a1()), (r1, doubled)],
            2,
            nmax,
            &SpectrumOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn proportional_detected() {
        let t = table_self_pair(8);
        let err = sample_curve(&t, 0, 1, &CurveOptions::default(), &WindowPolicy::default());
        assert!(matches!(err, Err(Error::ProportionalSpectra { .. })));
        let err2 = sample_curve(&t, 0, 2, &CurveOptions::default(), &WindowPolicy::default());
        assert!(matches!(err2, Err(Error::ProportionalSpectra { kappa, .. }) if (kappa - 0.5).abs() < 1e-9));
    }

    #[test]
    fn identical_columns_give_line() {
        let t = table_self_pair(11);
        let opts = CurveOptions { allow_proportional: true, ..Default::default() };
        let policy = WindowPolicy::default();
        let curve = sample_curve(&t, 0, 1, &opts, &policy).unwrap();
        let h = curve.h1.value;
        for s in &curve.samples {
            assert!(
                (s.a - (h - s.b)).abs() <= 0.01,
                "a({}) = {} vs line {}",
                s.b,
                s.a,
                h - s.b
            );
        }
        // doubled column: a(b) = h - 2b
        let curve2 = sample_curve(&t, 0, 2, &opts, &policy).unwrap();
        for s in &curve2.samples {
            assert!((s.a - (h - 2.0 * s.b)).abs() <= 0.01);
        }
        // line geometry: I12 = 2 for the doubled column
        let inter = pressure_intersections(&curve2).unwrap();
        assert!((inter.i12 - 2.0).abs() < 0.02, "I12 {}", inter.i12);
        assert!((inter.j12 - 1.0).abs() < 0.02);
        assert!((inter.j21 - 1.0).abs() < 0.02);
    }

    #[test]
    fn serial_parallel_curve_identical() {
        let t = table_two(9);
        let opts = CurveOptions::default();
        let policy = WindowPolicy::default();
        let a = sample_curve(&t, 0, 1, &opts, &policy).unwrap();
        let b = sample_curve_serial(&t, 0, 1, &opts, &policy).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert_eq!(x.a.to_bits(), y.a.to_bits());
        }
    }

    #[test]
    fn curve_monotone_and_convex() {
        let t = table_two(11);
        let curve = sample_curve(&t, 0, 1, &CurveOptions::default(), &WindowPolicy::default()).unwrap();
        assert!(curve.monotonicity_violation <= 0.0 + 1e-12, "{}", curve.monotonicity_violation);
        assert!(curve.convexity_violation <= 5e-3, "{}", curve.convexity_violation);
    }

    #[test]
    fn endpoints_anchor() {
        let t = table_two(12);
        let curve = sample_curve(&t, 0, 1, &CurveOptions::default(), &WindowPolicy::default()).unwrap();
        let inter = pressure_intersections(&curve).unwrap();
        assert!((inter.a_at_zero - curve.h1.value).abs() <= 0.02);
        assert!((inter.root - curve.h2.value).abs() <= 0.03);
        assert!(inter.j12 >= 0.97, "J12 {}", inter.j12);
        assert!(inter.j21 >= 0.97, "J21 {}", inter.j21);
    }

    #[test]
    fn tangent_and_mins_agree() {
        let t = table_two(12);
        let policy = WindowPolicy::default();
        let curve = sample_curve(&t, 0, 1, &CurveOptions::default(), &policy).unwrap();
        let tan = correlation_tangent(&curve).unwrap();
        assert!(tan.m > 0.0 && tan.m < 1.02, "M_tan {}", tan.m);
        let mins = correlation_mins(&t, 0, 1, curve.h1.value, curve.h2.value, &policy).unwrap();
        assert!(mins.m > 0.0 && mins.m < 1.0);
        assert!(mins.s0 > 0.0 && mins.s0 < 1.0);
        assert!((tan.m - mins.m).abs() <= 0.04, "{} vs {}", tan.m, mins.m);
        // endpoint growth of the renormalized mix is 1
        assert!((mins.ends.0 - 1.0).abs() <= 0.02);
        assert!((mins.ends.1 - 1.0).abs() <= 0.02);
    }

    #[test]
    fn count_windows_match_brute_force() {
        let t = table_two(9);
        let l1 = t.column_values(0);
        let l2 = t.column_values(1);
        let (h1, h2) = (0.7, 0.65);
        // seeded pseudo-random probes
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let x = 2.0 + next() * 8.0;
            let eps = 0.1 + next() * 0.6;
            let fast = window_count(&l1, &l2, h1, h2, x, eps);
            let mut brute = 0u64;
            for i in 0..t.row_count() {
                let a = h1 * t.lengths_at(i)[0];
                let b = h2 * t.lengths_at(i)[1];
                if a > x && a < x + h1 * eps && b > x && b < x + h2 * eps {
                    brute += 1;
                }
            }
            assert_eq!(fast, brute);
        }
    }

    #[test]
    fn count_fit_toy_table() {
        // toy: {(3.0,3.1),(3.05,4.0),(5.0,5.0)}, h1=h2=1, eps=0.2, x=2.95 -> 1
        let l1 = [3.0, 3.05, 5.0];
        let l2 = [3.1, 4.0, 5.0];
        assert_eq!(window_count(&l1, &l2, 1.0, 1.0, 2.95, 0.2), 1);
    }

    #[test]
    fn full_report_and_swap_symmetry() {
        let t = table_two(12);
        let policy = WindowPolicy::default();
        let opts = CurveOptions::default();
        let xg = XGridPolicy::default();
        let (_, rep) = correlation_report(&t, 0, 1, &opts, &policy, 1.0, &xg).unwrap();
        let (_, rep_swapped) = correlation_report(&t, 1, 0, &opts, &policy, 1.0, &xg).unwrap();
        assert!((rep.m_tangent - rep_swapped.m_tangent).abs() <= 0.03);
        assert!(rep.m_tangent > 0.0 && rep.m_tangent < 1.0);
    }

    #[test]
    fn m_scale_invariance() {
        // scaling one column must not move M_tangent or M_mins beyond 0.01
        let r1 = schottky_pair(1.8, 2.6, 1.1).unwrap();
        let r2 = schottky_pair(2.5, 2.0, 1.9).unwrap();
        let scaled = LengthFunctional::new(vec![1.0], 1.7).unwrap();
        let t = compute_spectrum(
            &[(r1.clone(), a1()), (r2.clone(), a1()), (r2, scaled)],
            2,
            10,
            &SpectrumOptions::default(),
        )
        .unwrap();
        let policy = WindowPolicy::default();
        let opts = CurveOptions::default();
        let c_base = sample_curve(&t, 0, 1, &opts, &policy).unwrap();
        let c_scaled = sample_curve(&t, 0, 2, &opts, &policy).unwrap();
        let m_base = correlation_tangent(&c_base).unwrap().m;
        let m_scaled = correlation_tangent(&c_scaled).unwrap().m;
        assert!((m_base - m_scaled).abs() <= 0.01, "{m_base} vs {m_scaled}");
        let mins_base = correlation_mins(&t, 0, 1, c_base.h1.value, c_base.h2.value, &policy).unwrap();
        let mins_scaled = correlation_mins(&t, 0, 2, c_scaled.h1.value, c_scaled.h2.value, &policy).unwrap();
        assert!((mins_base.m - mins_scaled.m).abs() <= 0.01);
    }

    #[test]
    fn shift_identity_through_growth() {
        // weighted growth against the same column drops the estimate by b
        let t = table_two(12);
        let policy = WindowPolicy::default();
        let cf = t.column_counting(0);
        let h = growth_rate(&cf, None, &policy).unwrap().value;
        let w: Vec<f64> = cf.values().iter().map(|l| (-0.3 * l).exp()).collect();
        let est = growth_rate(&cf, Some(&w), &policy).unwrap();
        assert!((est.value - (h - 0.3)).abs() <= 0.01);
    }
}
