//! Confidence bands, flat-line significance, component combination and
//! variance-share statistics.

use crate::bootstrap::{BootstrapEnsemble, EnsembleMode};
use crate::error::{Error, Result};
use crate::par::map_indexed;
use crate::timeseries::TimeSeries;

/// Empirical quantile of sorted data, linear interpolation at `q (len - 1)`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Per-phase lower/median/upper curves.
pub trait Band {
    fn period_samples(&self) -> usize;
    fn lower(&self) -> &[f64];
    fn median(&self) -> &[f64];
    fn upper(&self) -> &[f64];

    fn widths(&self) -> Vec<f64> {
        self.upper()
            .iter()
            .zip(self.lower())
            .map(|(u, l)| u - l)
            .collect()
    }

    fn median_width(&self) -> f64 {
        let mut w = self.widths();
        w.sort_by(f64::total_cmp);
        quantile_sorted(&w, 0.5)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CiBand {
    pub component_label: String,
    pub mode: EnsembleMode,
    pub period_samples: usize,
    pub lower: Vec<f64>,
    pub median: Vec<f64>,
    pub upper: Vec<f64>,
    pub alpha: f64,
    /// No horizontal line fits inside the band.
    pub significant: bool,
    /// `max(lower) - min(upper)`; positive exactly when significant.
    pub gap: f64,
    /// (min, max) of the lower curve.
    pub lower_range: (f64, f64),
    /// (min, max) of the upper curve.
    pub upper_range: (f64, f64),
    /// Zero lies outside `[lower, upper]` at every phase.
    pub excludes_zero_everywhere: bool,
    /// (lower, upper) at the phase where the median is smallest.
    pub trough_interval: (f64, f64),
    /// (lower, upper) at the phase where the median is largest.
    pub peak_interval: (f64, f64),
}

impl Band for CiBand {
    fn period_samples(&self) -> usize {
        self.period_samples
    }
    fn lower(&self) -> &[f64] {
        &self.lower
    }
    fn median(&self) -> &[f64] {
        &self.median
    }
    fn upper(&self) -> &[f64] {
        &self.upper
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinedBand {
    /// Least common multiple of the contributing periods.
    pub period_samples: usize,
    pub lower: Vec<f64>,
    pub median: Vec<f64>,
    pub upper: Vec<f64>,
    pub alpha: f64,
    pub contributing_components: Vec<String>,
    pub significant: bool,
    pub gap: f64,
}

impl Band for CombinedBand {
    fn period_samples(&self) -> usize {
        self.period_samples
    }
    fn lower(&self) -> &[f64] {
        &self.lower
    }
    fn median(&self) -> &[f64] {
        &self.median
    }
    fn upper(&self) -> &[f64] {
        &self.upper
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

/// Band intervals at the lowest and highest point of the median curve.
pub fn peak_trough_intervals(
    lower: &[f64],
    median: &[f64],
    upper: &[f64],
) -> ((f64, f64), (f64, f64)) {
    let arg = |better: fn(f64, f64) -> bool| {
        (1..median.len()).fold(0, |best, s| if better(median[s], median[best]) { s } else { best })
    };
    let lo = arg(|a, b| a < b);
    let hi = arg(|a, b| a > b);
    ((lower[lo], upper[lo]), (lower[hi], upper[hi]))
}

/// Flat-line test: returns `(max(lower) > min(upper), max(lower) - min(upper))`.
///
/// A constant `c` with `lower[s] <= c <= upper[s]` at every phase exists
/// exactly when the gap is not positive.
pub fn significance(lower: &[f64], upper: &[f64]) -> Result<(bool, f64)> {
    if lower.len() != upper.len() {
        return Err(Error::LengthMismatch(lower.len(), upper.len()));
    }
    if lower.is_empty() {
        return Err(Error::EmptySeries);
    }
    let gap = min_max(lower).1 - min_max(upper).0;
    Ok((gap > 0.0, gap))
}

/// Lower, median and upper quantiles of each column produced by `column`.
fn quantile_curves<F>(period: usize, alpha: f64, column: F) -> (Vec<f64>, Vec<f64>, Vec<f64>)
where
    F: Fn(usize) -> Vec<f64> + Sync + Send,
{
    let rows = map_indexed(period, |s| {
        let mut col = column(s);
        col.sort_by(f64::total_cmp);
        (
            quantile_sorted(&col, alpha / 2.0),
            quantile_sorted(&col, 0.5),
            quantile_sorted(&col, 1.0 - alpha / 2.0),
        )
    });
    let mut lower = Vec::with_capacity(period);
    let mut median = Vec::with_capacity(period);
    let mut upper = Vec::with_capacity(period);
    for (l, m, u) in rows {
        lower.push(l);
        median.push(m);
        upper.push(u);
    }
    (lower, median, upper)
}

pub fn ci_band(ensemble: &BootstrapEnsemble, alpha: f64) -> Result<CiBand> {
    check_alpha(alpha)?;
    if ensemble.replicates() < 2 {
        return Err(Error::DegenerateEnsemble {
            got: ensemble.replicates(),
            needed: 2,
        });
    }
    let p = ensemble.period_samples();
    let (lower, median, upper) = quantile_curves(p, alpha, |s| ensemble.phase_values(s));
    let (significant, gap) = significance(&lower, &upper)?;
    let excludes_zero_everywhere = lower
        .iter()
        .zip(&upper)
        .all(|(&l, &u)| l > 0.0 || u < 0.0);
    let (trough_interval, peak_interval) = peak_trough_intervals(&lower, &median, &upper);
    Ok(CiBand {
        trough_interval,
        peak_interval,
        component_label: ensemble.component_label.clone(),
        mode: ensemble.mode,
        period_samples: p,
        lower_range: min_max(&lower),
        upper_range: min_max(&upper),
        lower,
        median,
        upper,
        alpha,
        significant,
        gap,
        excludes_zero_everywhere,
    })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: usize, b: usize) -> Option<usize> {
    (a / gcd(a, b)).checked_mul(b)
}

/// Upper bound on `replicates x combined period` cells.
const MAX_COMBINED_CELLS: usize = 1 << 32;

/// Band of the per-replicate sum of component profiles over the LCM of
/// their periods. Replicate `r` of each ensemble is paired with replicate
/// `r` of the others.
pub fn combine_components(ensembles: &[&BootstrapEnsemble], alpha: f64) -> Result<CombinedBand> {
    check_alpha(alpha)?;
    let first = ensembles.first().ok_or(Error::NothingToCombine)?;
    let b = first.replicates();
    if let Some(bad) = ensembles.iter().find(|e| e.replicates() != b) {
        return Err(Error::MismatchedB(b, bad.replicates()));
    }
    if b < 2 {
        return Err(Error::DegenerateEnsemble { got: b, needed: 2 });
    }
    let mut period = 1usize;
    for e in ensembles {
        period = lcm(period, e.period_samples())
            .ok_or_else(|| Error::PeriodOverflow("least common multiple overflows".into()))?;
    }
    if period.saturating_mul(b) > MAX_COMBINED_CELLS {
        return Err(Error::PeriodOverflow(format!(
            "{b} replicates x period {period} is too large"
        )));
    }
    let (lower, median, upper) = quantile_curves(period, alpha, |s| {
        (0..b)
            .map(|r| {
                ensembles
                    .iter()
                    .map(|e| e.profile(r)[s % e.period_samples()])
                    .sum()
            })
            .collect()
    });
    let (significant, gap) = significance(&lower, &upper)?;
    Ok(CombinedBand {
        period_samples: period,
        lower,
        median,
        upper,
        alpha,
        contributing_components: ensembles.iter().map(|e| e.component_label.clone()).collect(),
        significant,
        gap,
    })
}

/// Median over phases of `width_a / width_b`.
///
/// If the periods differ, `band_b`'s period must be a multiple of
/// `band_a`'s and `band_a` is read at `s mod period_a`. Phases where
/// `band_b` has zero width are skipped.
pub fn width_ratio<A: Band + ?Sized, B: Band + ?Sized>(band_a: &A, band_b: &B) -> Result<f64> {
    let (pa, pb) = (band_a.period_samples(), band_b.period_samples());
    if pa == 0 || pb % pa != 0 {
        return Err(Error::IncomparableBands(pa, pb));
    }
    let wa = band_a.widths();
    let wb = band_b.widths();
    let mut ratios: Vec<f64> = wb
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(s, &w)| wa[s % pa] / w)
        .collect();
    if ratios.is_empty() {
        return Err(Error::AllZeroWidths);
    }
    ratios.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&ratios, 0.5))
}

/// Repeats `profile` over `len` samples; sample `i` takes phase
/// `(i + phase_offset) mod p`.
pub fn tile_profile(profile: &[f64], len: usize, phase_offset: usize) -> Vec<f64> {
    let p = profile.len();
    (0..len).map(|i| profile[(i + phase_offset) % p]).collect()
}

/// Squared Pearson correlation over the samples the two series share.
///
/// `fitted` is aligned to `original` through its start time; both must use
/// the same sampling step and the offset must be a whole number of steps.
pub fn coefficient_of_determination(original: &TimeSeries, fitted: &TimeSeries) -> Result<f64> {
    if (original.step_hours() - fitted.step_hours()).abs() > 1e-12 * original.step_hours() {
        return Err(Error::NoOverlap);
    }
    let step_ms = original.step_hours() * 3_600_000.0;
    let diff_ms = (fitted.start_time() - original.start_time()).num_milliseconds() as f64;
    let steps = diff_ms / step_ms;
    if (steps - steps.round()).abs() > 1e-6 {
        return Err(Error::NoOverlap);
    }
    let offset = steps.round() as i64;
    // fitted[j] lines up with original[j + offset]
    let start = offset.max(0);
    let end = (original.len() as i64).min(fitted.len() as i64 + offset);
    if end <= start {
        return Err(Error::NoOverlap);
    }
    let a = &original.values()[start as usize..end as usize];
    let b = &fitted.values()[(start - offset) as usize..(end - offset) as usize];
    pearson_squared(a, b)
}

fn pearson_squared(a: &[f64], b: &[f64]) -> Result<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    // rounding residue of a constant series stays below this
    let floor = |m: f64| n * (64.0 * f64::EPSILON * m.abs()).powi(2);
    if saa <= floor(ma) || sbb <= floor(mb) {
        return Err(Error::ZeroVariance);
    }
    Ok((sab * sab / (saa * sbb)).clamp(0.0, 1.0))
}
