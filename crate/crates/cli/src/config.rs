//! Analysis configuration: a TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};

use crate::synth::SyntheticSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PbbMode {
    /// PBB on the centered raw series at each component's own period.
    #[default]
    PerComponent,
    /// PBB at a 24-hour period for every component.
    Fixed24,
    Off,
}

impl std::str::FromStr for PbbMode {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-component" => Ok(Self::PerComponent),
            "fixed24" | "fixed-24h" => Ok(Self::Fixed24),
            "off" => Ok(Self::Off),
            other => bail!("unknown pbb mode {other:?} (expected per-component, fixed24 or off)"),
        }
    }
}

impl PbbMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::PerComponent => "per-component",
            Self::Fixed24 => "fixed24",
            Self::Off => "off",
        }
    }
}

/// A cycle and how many of its harmonics to analyse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleConfig {
    pub name: String,
    pub period_hours: f64,
    #[serde(default = "one")]
    pub harmonics: usize,
}

impl std::str::FromStr for CycleConfig {
    type Err = anyhow::Error;

    /// `name:period_hours[:harmonics]`, e.g. `daily:24:4`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        ensure!(
            (2..=3).contains(&parts.len()),
            "component {s:?} must look like name:period_hours[:harmonics]"
        );
        Ok(Self {
            name: parts[0].to_string(),
            period_hours: parts[1]
                .parse()
                .with_context(|| format!("bad period in {s:?}"))?,
            harmonics: match parts.get(2) {
                Some(h) => h.parse().with_context(|| format!("bad harmonic count in {s:?}"))?,
                None => 1,
            },
        })
    }
}

fn one() -> usize {
    1
}

/// Daily x4, weekly x3 and a 364-day annual cycle x3.
pub fn default_cycles() -> Vec<CycleConfig> {
    vec![
        CycleConfig {
            name: "daily".into(),
            period_hours: 24.0,
            harmonics: 4,
        },
        CycleConfig {
            name: "weekly".into(),
            period_hours: 168.0,
            harmonics: 3,
        },
        CycleConfig {
            name: "annual".into(),
            period_hours: 8736.0,
            harmonics: 3,
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub input: Option<PathBuf>,
    pub synthetic: Option<SyntheticSpec>,
    pub timestamp_column: String,
    pub value_column: String,
    pub step_hours: f64,
    pub decimal_comma: bool,
    pub delimiter: char,
    pub components: Vec<CycleConfig>,
    pub b: usize,
    pub seed: u64,
    pub alpha: f64,
    pub override_m: Option<usize>,
    pub pbb_mode: PbbMode,
    pub out_dir: PathBuf,
    pub plots: bool,
    pub periodogram: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            input: None,
            synthetic: None,
            timestamp_column: "timestamp".into(),
            value_column: "value".into(),
            step_hours: 1.0,
            decimal_comma: false,
            delimiter: ',',
            components: default_cycles(),
            b: 1000,
            seed: 2023,
            alpha: 0.05,
            override_m: None,
            pbb_mode: PbbMode::PerComponent,
            out_dir: PathBuf::from("vbpbb-out"),
            plots: false,
            periodogram: false,
        }
    }
}

impl AnalysisConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).context("parsing analysis config")
    }

    /// Reads a config file. A relative `input` path is resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let (Some(input), Some(dir)) = (cfg.input.as_mut(), path.parent()) {
            if input.is_relative() {
                *input = dir.join(&*input);
            }
        }
        Ok(cfg)
    }

    /// Samples per period for a cycle length given in hours.
    pub fn samples_for_hours(&self, hours: f64) -> Result<usize> {
        let samples = hours / self.step_hours;
        let rounded = samples.round();
        ensure!(
            rounded >= 1.0 && (samples - rounded).abs() <= 1e-9 * samples.max(1.0),
            "period of {hours} h is not a whole number of {}-hour samples",
            self.step_hours
        );
        Ok(rounded as usize)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.step_hours.is_finite() && self.step_hours > 0.0,
            "step_hours must be positive"
        );
        ensure!(!self.components.is_empty(), "at least one component is required");
        ensure!(self.b >= 2, "b must be at least 2 to form quantile bands");
        ensure!(
            self.alpha > 0.0 && self.alpha < 1.0,
            "alpha must lie in (0, 1)"
        );
        ensure!(
            self.input.is_some() || self.synthetic.is_some(),
            "either input or synthetic must be set"
        );
        let mut names = std::collections::BTreeSet::new();
        for c in &self.components {
            ensure!(c.harmonics >= 1, "component {} needs at least one harmonic", c.name);
            ensure!(names.insert(c.name.as_str()), "duplicate component name {}", c.name);
            let p = self.samples_for_hours(c.period_hours)?;
            if self.pbb_mode == PbbMode::Fixed24 {
                let day = self.samples_for_hours(24.0)?;
                ensure!(
                    p % day == 0,
                    "fixed24 comparison needs component {} to span whole days",
                    c.name
                );
            }
        }
        if let Some(m) = self.override_m {
            ensure!(m >= 3 && m % 2 == 1, "override_m must be an odd integer >= 3, got {m}");
        }
        if let Some(s) = &self.synthetic {
            s.validate()?;
        }
        Ok(())
    }
}
