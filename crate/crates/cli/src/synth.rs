//! Seeded synthetic series with known periodic content.

use std::f64::consts::{PI, TAU};

use anyhow::{ensure, Result};
use chrono::NaiveDateTime;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use vbpbb::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Waveform {
    Cosine,
    /// Fourier partial sum of a unit square wave over the odd harmonics
    /// up to `harmonics`.
    Square { harmonics: usize },
}

impl Waveform {
    /// Value at angle `theta` (radians).
    pub fn at(&self, theta: f64) -> f64 {
        match *self {
            Waveform::Cosine => theta.cos(),
            Waveform::Square { harmonics } => {
                (1..=harmonics.max(1))
                    .step_by(2)
                    .map(|j| {
                        let sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
                        sign * (j as f64 * theta).cos() / j as f64
                    })
                    .sum::<f64>()
                    * 4.0
                    / PI
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticComponent {
    pub period_samples: usize,
    pub amplitude: f64,
    #[serde(default = "cosine")]
    pub waveform: Waveform,
}

fn cosine() -> Waveform {
    Waveform::Cosine
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub length_samples: usize,
    #[serde(default)]
    pub components: Vec<SyntheticComponent>,
    #[serde(default)]
    pub noise_sd: f64,
    #[serde(default)]
    pub trend: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub start: Option<NaiveDateTime>,
    #[serde(default = "hourly")]
    pub step_hours: f64,
}

fn hourly() -> f64 {
    1.0
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        ensure!(self.length_samples >= 1, "synthetic length must be positive");
        ensure!(
            self.noise_sd.is_finite() && self.noise_sd >= 0.0,
            "noise sd must be >= 0"
        );
        ensure!(self.trend.is_finite(), "trend must be finite");
        ensure!(self.step_hours > 0.0, "step_hours must be positive");
        for c in &self.components {
            ensure!(c.period_samples >= 1, "component period must be positive");
            ensure!(
                c.amplitude.is_finite() && c.amplitude >= 0.0,
                "component amplitude must be >= 0"
            );
        }
        Ok(())
    }

    /// Noise-free part at sample `t`.
    pub fn deterministic_at(&self, t: usize) -> f64 {
        self.trend * t as f64
            + self
                .components
                .iter()
                .map(|c| c.amplitude * c.waveform.at(TAU * t as f64 / c.period_samples as f64))
                .sum::<f64>()
    }
}

/// Default synthetic start, the first hour of the analysis window used for
/// the Turkish load data.
pub fn default_start() -> NaiveDateTime {
    chrono::NaiveDate::from_ymd_opt(2013, 9, 6)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("valid date")
}

pub fn synthesize(spec: &SyntheticSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sd)?;
    let values = (0..spec.length_samples)
        .map(|t| {
            let e = if spec.noise_sd > 0.0 {
                noise.sample(&mut rng)
            } else {
                0.0
            };
            spec.deterministic_at(t) + e
        })
        .collect();
    Ok(TimeSeries::new(
        values,
        spec.start.unwrap_or_else(default_start),
        spec.step_hours,
        "synthetic",
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(components: Vec<SyntheticComponent>, noise_sd: f64, n: usize) -> SyntheticSpec {
        SyntheticSpec {
            length_samples: n,
            components,
            noise_sd,
            trend: 0.0,
            seed: 11,
            start: None,
            step_hours: 1.0,
        }
    }

    #[test]
    fn cosine_closed_form() {
        let s = synthesize(&spec(
            vec![SyntheticComponent {
                period_samples: 24,
                amplitude: 10.0,
                waveform: Waveform::Cosine,
            }],
            0.0,
            48,
        ))
        .unwrap();
        assert!((s.values()[0] - 10.0).abs() < 1e-12);
        assert!((s.values()[12] + 10.0).abs() < 1e-12);
    }

    #[test]
    fn null_signal() {
        let s = synthesize(&spec(vec![], 0.0, 100)).unwrap();
        assert!(s.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn noise_sd_recovered() {
        let sp = spec(
            vec![SyntheticComponent {
                period_samples: 24,
                amplitude: 3.0,
                waveform: Waveform::Square { harmonics: 7 },
            }],
            5.0,
            10_000,
        );
        let s = synthesize(&sp).unwrap();
        let resid: Vec<f64> = s
            .values()
            .iter()
            .enumerate()
            .map(|(t, v)| v - sp.deterministic_at(t))
            .collect();
        let mu = resid.iter().sum::<f64>() / resid.len() as f64;
        let sd = (resid.iter().map(|r| (r - mu).powi(2)).sum::<f64>() / (resid.len() - 1) as f64).sqrt();
        assert!((4.8..=5.2).contains(&sd), "sd {sd}");
        assert_eq!(synthesize(&sp).unwrap(), s);
    }

    #[test]
    fn square_wave_shape() {
        let w = Waveform::Square { harmonics: 199 };
        assert!((w.at(0.3) - 1.0).abs() < 0.05);
        assert!((w.at(PI - 0.3) + 1.0).abs() < 0.05);
    }

    #[test]
    fn rejects_negative_amplitude() {
        let sp = spec(
            vec![SyntheticComponent {
                period_samples: 24,
                amplitude: -1.0,
                waveform: Waveform::Cosine,
            }],
            0.0,
            10,
        );
        assert!(synthesize(&sp).is_err());
    }
}
