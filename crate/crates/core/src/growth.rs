//! Exponential growth-rate estimation for length spectra.
//!
//! Counting functions of enumerated spectra behave like C e^{hT} / T over
//! their reliable range, then flatten where the word-length cutoff starts
//! removing long classes. The estimator therefore (1) anchors its window at
//! the mean length of the top word-length generation, (2) trims the top until
//! a generation-ladder undercount estimate drops below `u_max`, and (3) fits
//! the exponential rate on shell increments with the 1/T polynomial factor
//! divided out. Two methods run on the same shells: a least-squares slope in
//! log(shell mass), and a bisection for the tilt that balances the first and
//! last third of the window; `both` cross-checks them.

use crate::error::{Error, Result};
use crate::spectrum::CountingFunction;
use serde::{Deserialize, Serialize};

/// Polynomial correction power in N(T) ~ C e^{hT} / T^KAPPA.
const KAPPA: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthMethod {
    Regression,
    Bisection,
    Both,
}

/// Window and shell policy for growth estimation.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowPolicy {
    /// Window bottom as a fraction of the (trimmed) top.
    pub lo_frac: f64,
    /// Window top as a fraction of the top-generation mean length.
    pub hi_frac: f64,
    /// Maximum tolerated projected undercount fraction at the window top.
    pub u_max: f64,
    /// Number of equal-width shells across the window.
    pub shells: usize,
    /// Minimum items inside the window.
    pub min_items: usize,
    /// Minimum populated shells for a fit.
    pub min_shells: usize,
    /// Minimum effective sample size for a shell to enter the fit.
    pub ess_min: f64,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        WindowPolicy {
            lo_frac: 0.5,
            hi_frac: 0.9,
            u_max: 0.05,
            shells: 12,
            min_items: 200,
            min_shells: 4,
            ess_min: 4.0,
        }
    }
}

/// Growth-rate estimate with its cross-check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthEstimate {
    /// Primary value (regression method).
    pub value: f64,
    pub stderr: f64,
    pub window: (f64, f64),
    pub sample_count: usize,
    pub method: GrowthMethod,
    pub regression: f64,
    pub bisection: f64,
    /// |regression - bisection| <= max(3 stderr, 0.02).
    pub consistent: bool,
}

impl GrowthEstimate {
    pub fn discrepancy(&self) -> f64 {
        (self.regression - self.bisection).abs()
    }
}

/// Neumaier compensated accumulator.
#[derive(Clone, Copy, Default)]
pub(crate) struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(self) -> f64 {
        self.sum + self.comp
    }
}

struct Shell {
    mean: f64,
    mass: f64,
}

/// Sorted-spectrum view the estimators run on. `values` ascending; `wordlens`
/// aligned; `weights` aligned (empty = unit weights).
pub(crate) struct SpectrumView<'a> {
    pub values: &'a [f64],
    pub wordlens: &'a [u32],
    pub weights: Option<&'a [f64]>,
    pub n_max: u32,
}

impl<'a> SpectrumView<'a> {
    fn weight(&self, i: usize) -> f64 {
        self.weights.map_or(1.0, |w| w[i])
    }
}

/// Undercount-aware estimation window.
pub(crate) fn estimation_window(view: &SpectrumView<'_>, policy: &WindowPolicy) -> Result<(f64, f64)> {
    let n = view.values.len();
    if n == 0 {
        return Err(Error::EmptySpectrum);
    }
    let top = view.n_max;
    let mut t_ref_sum = Kahan::default();
    let mut t_ref_n = 0usize;
    for i in 0..n {
        if view.wordlens[i] >= top {
            t_ref_sum.add(view.values[i]);
            t_ref_n += 1;
        }
    }
    if t_ref_n == 0 {
        return Err(Error::WindowDegenerate("no classes at the top word length".into()));
    }
    let t_ref = t_ref_sum.value() / t_ref_n as f64;
    let mut t_hi = policy.hi_frac * t_ref;
    let count_leq = |t: f64, pred: &dyn Fn(usize) -> bool| -> usize {
        let mut c = 0usize;
        for i in 0..n {
            if view.values[i] <= t && pred(i) {
                c += 1;
            }
        }
        c
    };
    for _ in 0..120 {
        let n_all = count_leq(t_hi, &|_| true);
        if n_all == 0 {
            break;
        }
        let g_top = count_leq(t_hi, &|i| view.wordlens[i] == top) as f64;
        let g_prev = count_leq(t_hi, &|i| view.wordlens[i] == top.saturating_sub(1)) as f64;
        let r = if g_prev > 0.0 { (g_top / g_prev).min(0.95) } else { 0.95 };
        let u = (g_top / n_all as f64) * r / (1.0 - r);
        if u <= policy.u_max {
            break;
        }
        t_hi *= 0.97;
    }
    let t_lo = policy.lo_frac * t_hi;
    if !(t_hi > t_lo && t_hi.is_finite()) {
        return Err(Error::WindowDegenerate(format!("window [{t_lo}, {t_hi}]")));
    }
    Ok((t_lo, t_hi))
}

fn shell_stats(view: &SpectrumView<'_>, t_lo: f64, t_hi: f64, policy: &WindowPolicy) -> (Vec<Shell>, usize) {
    let nsh = policy.shells;
    let width = (t_hi - t_lo) / nsh as f64;
    let mut mass = vec![Kahan::default(); nsh];
    let mut mass2 = vec![Kahan::default(); nsh];
    let mut moment = vec![Kahan::default(); nsh];
    let mut items = 0usize;
    for i in 0..view.values.len() {
        let v = view.values[i];
        if v <= t_lo || v > t_hi {
            continue;
        }
        items += 1;
        let mut k = ((v - t_lo) / width) as usize;
        if k >= nsh {
            k = nsh - 1;
        }
        let w = view.weight(i);
        mass[k].add(w);
        mass2[k].add(w * w);
        moment[k].add(w * v);
    }
    let mut shells = Vec::with_capacity(nsh);
    for k in 0..nsh {
        let m = mass[k].value();
        if m <= 0.0 {
            continue;
        }
        let m2 = mass2[k].value();
        let ess = m * m / m2;
        if ess < policy.ess_min {
            continue;
        }
        shells.push(Shell { mean: moment[k].value() / m, mass: m });
    }
    (shells, items)
}

fn regression(shells: &[Shell]) -> (f64, f64) {
    let n = shells.len() as f64;
    let xs: Vec<f64> = shells.iter().map(|s| s.mean).collect();
    let ys: Vec<f64> = shells.iter().map(|s| s.mass.ln() + KAPPA * s.mean.ln()).collect();
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum::<f64>()
        / sxx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - ym - slope * (x - xm);
            r * r
        })
        .sum();
    let stderr = (ss_res / (n - 2.0).max(1.0) / sxx).sqrt();
    (slope, stderr)
}

/// Tilt s at which the polynomial-corrected masses of the last third of the
/// window stop outgrowing the first third; bracketed to 1e-4.
fn bisection(shells: &[Shell]) -> f64 {
    let n = shells.len();
    let k = (n / 3).max(1);
    let t_ref = shells[n - 1].mean;
    let logmass = |s: &Shell, tilt: f64| s.mass.ln() + KAPPA * s.mean.ln() - tilt * (s.mean - t_ref);
    let f = |tilt: f64| -> f64 {
        let hi = log_sum_exp(shells[n - k..].iter().map(|s| logmass(s, tilt)));
        let lo = log_sum_exp(shells[..k].iter().map(|s| logmass(s, tilt)));
        hi - lo
    };
    let (mut lo, mut hi) = (-16.0f64, 16.0f64);
    if f(lo) < 0.0 || f(hi) > 0.0 {
        return f64::NAN;
    }
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn log_sum_exp(vals: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = vals.collect();
    let mx = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !mx.is_finite() {
        return mx;
    }
    mx + v.iter().map(|x| (x - mx).exp()).sum::<f64>().ln()
}

pub(crate) fn growth_core(view: &SpectrumView<'_>, policy: &WindowPolicy) -> Result<GrowthEstimate> {
    let (t_lo, t_hi) = estimation_window(view, policy)?;
    let (shells, items) = shell_stats(view, t_lo, t_hi, policy);
    if items < policy.min_items {
        return Err(Error::InsufficientData { items, need: policy.min_items, lo: t_lo, hi: t_hi });
    }
    if shells.len() < policy.min_shells {
        return Err(Error::WindowDegenerate(format!(
            "{} populated shells in [{t_lo:.3}, {t_hi:.3}] (need {})",
            shells.len(),
            policy.min_shells
        )));
    }
    let (reg, stderr) = regression(&shells);
    let bis = bisection(&shells);
    let consistent = bis.is_finite() && (reg - bis).abs() <= (3.0 * stderr).max(0.02);
    Ok(GrowthEstimate {
        value: reg,
        stderr,
        window: (t_lo, t_hi),
        sample_count: items,
        method: GrowthMethod::Both,
        regression: reg,
        bisection: bis,
        consistent,
    })
}

/// Growth rate of a weighted counting function.
///
/// `weights[i]` must align with `lengths.values()[i]`; `None` means unit
/// weights (plain counting).
pub fn growth_rate(
    lengths: &CountingFunction,
    weights: Option<&[f64]>,
    policy: &WindowPolicy,
) -> Result<GrowthEstimate> {
    if let Some(w) = weights {
        if w.len() != lengths.len() {
            return Err(Error::Config(format!(
                "{} weights for {} lengths",
                w.len(),
                lengths.len()
            )));
        }
        if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::Config("weights must be finite and nonnegative".into()));
        }
    }
    let view = SpectrumView {
        values: lengths.values(),
        wordlens: lengths.word_lengths(),
        weights,
        n_max: lengths.n_max(),
    };
    growth_core(&view, policy)
}
