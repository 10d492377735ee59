//! Uniformly sampled series, phase arithmetic and periodic means.

use chrono::{Duration, NaiveDate, NaiveDateTime};

use crate::error::{Error, Result};

/// A uniformly sampled, finite, non-empty real series.
///
/// Timestamps are implicit: sample `i` sits at `start_time + i * step_hours`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    start_time: NaiveDateTime,
    step_hours: f64,
    name: String,
}

impl TimeSeries {
    pub fn new(
        values: Vec<f64>,
        start_time: NaiveDateTime,
        step_hours: f64,
        name: impl Into<String>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        if !(step_hours.is_finite() && step_hours > 0.0) {
            return Err(Error::InvalidStep(step_hours));
        }
        Ok(Self {
            values,
            start_time,
            step_hours,
            name: name.into(),
        })
    }

    /// Hourly series starting at 2000-01-01T00:00.
    pub fn hourly(values: Vec<f64>) -> Result<Self> {
        Self::new(values, default_epoch(), 1.0, "series")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn start_time(&self) -> NaiveDateTime {
        self.start_time
    }

    pub fn step_hours(&self) -> f64 {
        self.step_hours
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn time_at(&self, index: usize) -> NaiveDateTime {
        offset_time(self.start_time, self.step_hours, index as i64)
    }

    /// Same timing metadata, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(values, self.start_time, self.step_hours, self.name.clone())
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

pub(crate) fn default_epoch() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2000, 1, 1)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("valid epoch")
}

/// `start + steps * step_hours`, rounded to the millisecond.
pub(crate) fn offset_time(start: NaiveDateTime, step_hours: f64, steps: i64) -> NaiveDateTime {
    let millis = (steps as f64 * step_hours * 3_600_000.0).round() as i64;
    start + Duration::milliseconds(millis)
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Subtracts the grand mean. Returns the centered series and the mean.
pub fn center(series: &TimeSeries) -> (TimeSeries, f64) {
    let values = series.values();
    let mean = compensated_sum(values.iter().copied()) / values.len() as f64;
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    // a second pass removes the rounding residue of the first
    let residue = compensated_sum(centered.iter().copied()) / centered.len() as f64;
    let centered = centered.into_iter().map(|v| v - residue).collect();
    let out = TimeSeries {
        values: centered,
        start_time: series.start_time,
        step_hours: series.step_hours,
        name: series.name.clone(),
    };
    (out, mean + residue)
}

#[inline]
pub fn phase_of(index: usize, period_samples: usize) -> usize {
    index % period_samples
}

/// Per-phase averages over one period, partial final cycles included.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicMeanProfile {
    pub period_samples: usize,
    pub means: Vec<f64>,
    pub counts: Vec<usize>,
}

pub fn periodic_mean(series: &TimeSeries, period_samples: usize) -> Result<PeriodicMeanProfile> {
    periodic_mean_of(series.values(), period_samples)
}

pub(crate) fn periodic_mean_of(values: &[f64], period: usize) -> Result<PeriodicMeanProfile> {
    if period == 0 {
        return Err(Error::ZeroPeriod);
    }
    if period > values.len() {
        return Err(Error::PeriodExceedsLength {
            period,
            len: values.len(),
        });
    }
    let mut sums = vec![0.0; period];
    let mut counts = vec![0usize; period];
    for chunk in values.chunks(period) {
        for (s, v) in chunk.iter().enumerate() {
            sums[s] += v;
            counts[s] += 1;
        }
    }
    let means = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s / c as f64)
        .collect();
    Ok(PeriodicMeanProfile {
        period_samples: period,
        means,
        counts,
    })
}
