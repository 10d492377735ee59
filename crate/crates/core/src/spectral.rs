//! Periodogram, harmonic enumeration and KZFT window planning.
//!
//! Frequencies are in cycles per sample throughout; conversion to calendar
//! units belongs to the caller.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::timeseries::{center, TimeSeries};

/// Raw periodogram at the positive Fourier frequencies `j / n`,
/// `j = 1..=n/2`.
///
/// Normalization: `power[j] = |sum_t x[t] exp(-2 pi i j t / n)|^2 / n` on the
/// mean-centered series, so that summing `power` over all `n - 1` nonzero
/// Fourier frequencies gives `n * var` (population variance). Over the
/// positive half this is `2 * sum(power) - power[n/2]` for even `n`
/// (Nyquist counted once) and `2 * sum(power)` for odd `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
}

impl Spectrum {
    /// Index of the largest power value.
    pub fn peak(&self) -> Option<usize> {
        self.power
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
    }

    /// Indices that are strict local maxima of the power sequence.
    pub fn local_maxima(&self) -> Vec<usize> {
        let p = &self.power;
        (0..p.len())
            .filter(|&i| {
                let left = i == 0 || p[i] > p[i - 1];
                let right = i + 1 == p.len() || p[i] > p[i + 1];
                left && right
            })
            .collect()
    }

    /// Power at the Fourier frequency nearest to `frequency`.
    pub fn power_near(&self, frequency: f64) -> Option<f64> {
        self.frequencies
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - frequency).abs().total_cmp(&(b.1 - frequency).abs()))
            .map(|(i, _)| self.power[i])
    }
}

pub fn periodogram(series: &TimeSeries) -> Result<Spectrum> {
    let n = series.len();
    if n < 2 {
        return Err(Error::SeriesTooShort { len: n, needed: 2 });
    }
    let (centered, _) = center(series);
    let mut buf: Vec<Complex64> = centered
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let frequencies = (1..=half).map(|j| j as f64 / n as f64).collect();
    let power = (1..=half).map(|j| buf[j].norm_sqr() / n as f64).collect();
    Ok(Spectrum { frequencies, power })
}

/// One periodic component: harmonic `harmonic` of a cycle lasting
/// `period_samples` samples, i.e. frequency `harmonic / period_samples`.
///
/// Bootstrap blocks and periodic-mean profiles for a harmonic use the
/// fundamental period, so all harmonics of one cycle share a phase grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ComponentSpec {
    pub label: String,
    pub period_samples: usize,
    pub harmonic: usize,
}

impl ComponentSpec {
    pub fn new(label: impl Into<String>, period_samples: usize, harmonic: usize) -> Self {
        Self {
            label: label.into(),
            period_samples,
            harmonic,
        }
    }

    /// Fundamental of a cycle.
    pub fn fundamental(label: impl Into<String>, period_samples: usize) -> Self {
        Self::new(label, period_samples, 1)
    }

    /// Cycles per sample.
    pub fn frequency(&self) -> f64 {
        self.harmonic as f64 / self.period_samples as f64
    }

    fn validate(&self) -> Result<()> {
        if self.period_samples == 0 || self.harmonic == 0 {
            return Err(Error::FrequencyOutOfRange(self.frequency()));
        }
        if 2 * self.harmonic > self.period_samples {
            return Err(Error::HarmonicAboveNyquist {
                period: self.period_samples,
                harmonic: self.harmonic,
            });
        }
        Ok(())
    }
}

fn harmonic_label(j: usize) -> String {
    const ORDINALS: [&str; 9] = [
        "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth",
    ];
    match j {
        1 => "fundamental".to_string(),
        2..=10 => format!("{} harmonic", ORDINALS[j - 2]),
        _ => format!("harmonic {j}"),
    }
}

pub fn enumerate_harmonics(
    fundamental_period_samples: usize,
    n_harmonics: usize,
) -> Result<Vec<ComponentSpec>> {
    if fundamental_period_samples == 0 {
        return Err(Error::ZeroPeriod);
    }
    (1..=n_harmonics)
        .map(|j| {
            let c = ComponentSpec::new(harmonic_label(j), fundamental_period_samples, j);
            c.validate().map(|_| c)
        })
        .collect()
}

/// Window plan shared by every KZFT pass of one analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyPlan {
    pub components: Vec<ComponentSpec>,
    /// Odd window length in samples.
    pub m: usize,
    pub k: usize,
}

impl FrequencyPlan {
    /// Smallest pairwise spacing of the planned frequencies, if there are two.
    pub fn min_spacing(&self) -> Option<f64> {
        let f: Vec<f64> = self.components.iter().map(ComponentSpec::frequency).collect();
        let mut best: Option<f64> = None;
        for i in 0..f.len() {
            for j in i + 1..f.len() {
                let d = (f[i] - f[j]).abs();
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
        best
    }
}

/// `2 / |v_a - v_b|` as an exact fraction `(num, den)`.
fn inverse_half_spacing(a: &ComponentSpec, b: &ComponentSpec) -> Result<(u128, u128)> {
    let (pa, ja) = (a.period_samples as u128, a.harmonic as u128);
    let (pb, jb) = (b.period_samples as u128, b.harmonic as u128);
    let diff = (ja * pb).abs_diff(jb * pa);
    if diff == 0 {
        return Err(Error::DuplicateFrequency(a.frequency()));
    }
    Ok((2 * pa * pb, diff))
}

/// Smallest odd integer strictly greater than `num / den`.
fn odd_above(num: u128, den: u128) -> usize {
    let mut m = num / den + 1;
    if m.is_multiple_of(2) {
        m += 1;
    }
    m.max(3) as usize
}

fn check_odd(m: usize) -> Result<usize> {
    if m < 3 || m.is_multiple_of(2) {
        Err(Error::NotOdd(m))
    } else {
        Ok(m)
    }
}

/// Chooses one window `m` (with `k = 1`) so that each filter's half
/// bandwidth `1/m` is below half of the closest pairwise spacing.
///
/// Spacings are computed from the exact fractions `harmonic / period`, so
/// `2 / spacing` landing on an integer is handled without rounding noise.
pub fn plan_bandwidth(
    components: Vec<ComponentSpec>,
    override_m: Option<usize>,
) -> Result<FrequencyPlan> {
    for c in &components {
        c.validate()?;
    }
    let mut widest: Option<(u128, u128)> = None;
    for i in 0..components.len() {
        for j in i + 1..components.len() {
            let (num, den) = inverse_half_spacing(&components[i], &components[j])?;
            widest = match widest {
                Some((bn, bd)) if bn * den >= num * bd => Some((bn, bd)),
                _ => Some((num, den)),
            };
        }
    }
    let m = match (override_m, widest) {
        (Some(m), _) => check_odd(m)?,
        (None, Some((num, den))) => odd_above(num, den),
        (None, None) => return Err(Error::NeedTwoFrequencies),
    };
    Ok(FrequencyPlan {
        components,
        m,
        k: 1,
    })
}

/// Window for a component analysed on its own: the smallest odd `m` whose
/// passband half-width `1/m` stays below half the distance to frequency 0.
pub fn window_excluding_dc(component: &ComponentSpec) -> Result<usize> {
    component.validate()?;
    Ok(odd_above(
        2 * component.period_samples as u128,
        component.harmonic as u128,
    ))
}
