//! Kolmogorov-Zurbenko Fourier transform (KZFT) bandpass filter.
//!
//! `KZFT[m,k,v](X)(t) = sum_u a_u / m^k * exp(-2 pi i v u) * X(t + u)` for
//! `u` in `-k(m-1)/2 ..= k(m-1)/2`, where `a_u` are the coefficients of
//! `(1 + z + ... + z^(m-1))^k`. With `v = 0` this is the KZ filter, the
//! `k`-times iterated centered moving average of width `m`.
//!
//! Two evaluation paths are provided. [`kzft_apply`] demodulates the input
//! to frequency zero, runs `k` moving-average passes on compensated prefix
//! sums and remodulates, in O(n k). [`kzft_apply_direct`] evaluates the
//! convolution sum literally in O(n k m). They agree to rounding.
//!
//! Output is trimmed to points where the window is fully supported.

use chrono::NaiveDateTime;
use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::par::map_indexed;
use crate::timeseries::{offset_time, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KzftConfig {
    m: usize,
    k: usize,
    v: f64,
}

impl KzftConfig {
    pub fn new(m: usize, k: usize, v: f64) -> Result<Self> {
        if m < 3 || m.is_multiple_of(2) {
            return Err(Error::NotOdd(m));
        }
        if k == 0 {
            return Err(Error::InvalidFilter("iterations must be >= 1".into()));
        }
        if !(0.0..=0.5).contains(&v) {
            return Err(Error::InvalidFilter(format!(
                "center frequency {v} outside [0, 0.5]"
            )));
        }
        Ok(Self { m, k, v })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    /// Samples lost at each edge.
    pub fn half_width(&self) -> usize {
        self.k * (self.m - 1) / 2
    }

    /// Total kernel length `k(m-1) + 1`.
    pub fn span(&self) -> usize {
        2 * self.half_width() + 1
    }
}

/// Filtered complex demodulate, aligned to its source series.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexComponentSeries {
    pub values: Vec<Complex64>,
    /// Source index of `values[0]`; equals the filter half width.
    pub start_offset: usize,
    pub source_length: usize,
    pub source_start: NaiveDateTime,
    pub step_hours: f64,
    pub name: String,
}

/// Coefficients of `(1 + z + ... + z^(m-1))^k` as exact integers, or
/// `None` if an intermediate value overflows `u128`.
pub fn kzft_coefficients_exact(m: usize, k: usize) -> Option<Vec<u128>> {
    let mut coef: Vec<u128> = vec![1];
    for _ in 0..k {
        let mut next = vec![0u128; coef.len() + m - 1];
        // running-window sum: next[i] = sum coef[i-m+1..=i]
        let mut window: u128 = 0;
        for (i, slot) in next.iter_mut().enumerate() {
            if i < coef.len() {
                window = window.checked_add(coef[i])?;
            }
            if i >= m {
                window -= coef[i - m];
            }
            *slot = window;
        }
        coef = next;
    }
    Some(coef)
}

/// Coefficients `a_u` for `u = -k(m-1)/2 ..= k(m-1)/2`; symmetric and
/// summing to `m^k`.
///
/// Exact integer arithmetic is used while it fits in `u128`; beyond that
/// the same recurrence runs in floating point.
pub fn kzft_coefficients(m: usize, k: usize) -> Vec<f64> {
    if let Some(exact) = kzft_coefficients_exact(m, k) {
        return exact.into_iter().map(|c| c as f64).collect();
    }
    let mut coef = vec![1.0f64];
    for _ in 0..k {
        coef = box_convolve(&coef, m, 1.0);
    }
    coef
}

/// Normalized weights `a_u / m^k`, built as k-fold convolution of a
/// box of height `1/m` so nothing overflows.
fn kzft_weights(m: usize, k: usize) -> Vec<f64> {
    let mut w = vec![1.0f64];
    for _ in 0..k {
        w = box_convolve(&w, m, 1.0 / m as f64);
    }
    w
}

fn box_convolve(x: &[f64], m: usize, height: f64) -> Vec<f64> {
    let mut out = vec![0.0; x.len() + m - 1];
    for (i, &xi) in x.iter().enumerate() {
        for o in &mut out[i..i + m] {
            *o += xi * height;
        }
    }
    out
}

/// `exp(-2 pi i v s)` with the phase reduced modulo one cycle first.
#[inline]
fn carrier(v: f64, s: usize) -> Complex64 {
    let turns = (v * s as f64).fract();
    Complex64::from_polar(1.0, -TAU * turns)
}

fn check_length(n: usize, config: &KzftConfig) -> Result<()> {
    if n <= 2 * config.half_width() {
        return Err(Error::SeriesShorterThanWindow {
            len: n,
            span: config.span(),
        });
    }
    Ok(())
}

/// Moving average of width `m` over complex values using compensated
/// prefix sums. Output has `len - m + 1` points.
fn moving_average(z: &[Complex64], m: usize) -> Vec<Complex64> {
    // prefix[i] = sum z[..i] held as (hi, lo) pairs per component
    let mut hi = Vec::with_capacity(z.len() + 1);
    let mut lo = Vec::with_capacity(z.len() + 1);
    let (mut s, mut c) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    hi.push(s);
    lo.push(c);
    for &x in z {
        let (re, re_err) = two_sum(s.re, x.re);
        let (im, im_err) = two_sum(s.im, x.im);
        s = Complex64::new(re, im);
        c += Complex64::new(re_err, im_err);
        hi.push(s);
        lo.push(c);
    }
    let inv = 1.0 / m as f64;
    (0..=z.len() - m)
        .map(|i| ((hi[i + m] - hi[i]) + (lo[i + m] - lo[i])) * inv)
        .collect()
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Filters a complex sequence. Returns the fully supported outputs,
/// `values[i]` corresponding to input index `i + half_width`.
pub fn kzft_filter_complex(values: &[Complex64], config: &KzftConfig) -> Result<Vec<Complex64>> {
    check_length(values.len(), config)?;
    let v = config.v;
    let mut z: Vec<Complex64> = values
        .iter()
        .enumerate()
        .map(|(s, &x)| x * carrier(v, s))
        .collect();
    for _ in 0..config.k {
        z = moving_average(&z, config.m);
    }
    let h = config.half_width();
    Ok(z
        .into_iter()
        .enumerate()
        .map(|(i, w)| w * carrier(v, i + h).conj())
        .collect())
}

/// Literal evaluation of the convolution sum.
pub fn kzft_filter_complex_direct(
    values: &[Complex64],
    config: &KzftConfig,
) -> Result<Vec<Complex64>> {
    check_length(values.len(), config)?;
    let h = config.half_width();
    let kernel: Vec<Complex64> = kzft_weights(config.m, config.k)
        .into_iter()
        .enumerate()
        .map(|(idx, w)| {
            // u = idx - h; exp(-2 pi i v u)
            let u = idx as f64 - h as f64;
            Complex64::from_polar(w, -TAU * (config.v * u).fract())
        })
        .collect();
    let out_len = values.len() - 2 * h;
    Ok(map_indexed(out_len, |i| {
        kernel
            .iter()
            .zip(&values[i..i + kernel.len()])
            .fold(Complex64::new(0.0, 0.0), |acc, (c, x)| acc + c * x)
    }))
}

fn to_complex(series: &TimeSeries) -> Vec<Complex64> {
    series
        .values()
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect()
}

fn wrap(series: &TimeSeries, values: Vec<Complex64>, config: &KzftConfig) -> ComplexComponentSeries {
    ComplexComponentSeries {
        values,
        start_offset: config.half_width(),
        source_length: series.len(),
        source_start: series.start_time(),
        step_hours: series.step_hours(),
        name: series.name().to_string(),
    }
}

pub fn kzft_apply(series: &TimeSeries, config: &KzftConfig) -> Result<ComplexComponentSeries> {
    let out = kzft_filter_complex(&to_complex(series), config)?;
    Ok(wrap(series, out, config))
}

pub fn kzft_apply_direct(
    series: &TimeSeries,
    config: &KzftConfig,
) -> Result<ComplexComponentSeries> {
    let out = kzft_filter_complex_direct(&to_complex(series), config)?;
    Ok(wrap(series, out, config))
}

/// Real component series `c * Re(component)`, with `c = 2` strictly inside
/// `(0, 0.5)` and `c = 1` at the two real-valued frequencies 0 and 0.5.
/// Timestamps start `start_offset` samples after the source start.
pub fn reconstruct_real(component: &ComplexComponentSeries, v: f64) -> Result<TimeSeries> {
    let factor = if v > 0.0 && v < 0.5 { 2.0 } else { 1.0 };
    let values = component.values.iter().map(|z| factor * z.re).collect();
    TimeSeries::new(
        values,
        offset_time(
            component.source_start,
            component.step_hours,
            component.start_offset as i64,
        ),
        component.step_hours,
        component.name.clone(),
    )
}
