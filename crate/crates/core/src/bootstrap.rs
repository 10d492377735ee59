//! Phase-preserving periodic block bootstrap.
//!
//! Blocks are exactly one period long. The destination series is tiled
//! with blocks starting at multiples of `p`; each block copies a source
//! block whose start is drawn uniformly from the non-wrapping starts that
//! share its phase, i.e. `{0, p, 2p, ...} ∩ [0, n - p]`. A short final
//! destination block takes the prefix of a full source block.
//!
//! Replicate `r` draws from a ChaCha8 stream selected by `(seed, r)`, so an
//! ensemble depends only on its inputs, never on scheduling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kzft::{kzft_apply, reconstruct_real, KzftConfig};
use crate::par::map_indexed;
use crate::spectral::ComponentSpec;
use crate::timeseries::{periodic_mean_of, TimeSeries};

pub const DEFAULT_REPLICATES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
    pub block_samples: usize,
}

impl BootstrapConfig {
    pub fn new(replicates: usize, seed: u64, block_samples: usize) -> Result<Self> {
        if replicates == 0 {
            return Err(Error::DegenerateEnsemble { got: 0, needed: 1 });
        }
        if block_samples == 0 {
            return Err(Error::ZeroPeriod);
        }
        Ok(Self {
            replicates,
            seed,
            block_samples,
        })
    }

    pub fn with_block(self, block_samples: usize) -> Result<Self> {
        Self::new(self.replicates, self.seed, block_samples)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnsembleMode {
    /// Raw series, one component's period.
    Pbb,
    /// KZFT-filtered component series.
    Vbpbb,
}

impl EnsembleMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            EnsembleMode::Pbb => "pbb",
            EnsembleMode::Vbpbb => "vbpbb",
        }
    }
}

/// `replicates x period_samples` matrix of resampled periodic means,
/// stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapEnsemble {
    period_samples: usize,
    replicates: usize,
    profiles: Vec<f64>,
    pub mode: EnsembleMode,
    pub component_label: String,
}

impl BootstrapEnsemble {
    pub fn from_profiles(
        profiles: Vec<Vec<f64>>,
        mode: EnsembleMode,
        component_label: impl Into<String>,
    ) -> Result<Self> {
        let replicates = profiles.len();
        let period_samples = profiles.first().map_or(0, Vec::len);
        if replicates == 0 || period_samples == 0 {
            return Err(Error::InvalidEnsemble("empty profile matrix".into()));
        }
        if let Some(bad) = profiles.iter().find(|p| p.len() != period_samples) {
            return Err(Error::LengthMismatch(period_samples, bad.len()));
        }
        let flat: Vec<f64> = profiles.into_iter().flatten().collect();
        if flat.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidEnsemble("non-finite profile entry".into()));
        }
        Ok(Self {
            period_samples,
            replicates,
            profiles: flat,
            mode,
            component_label: component_label.into(),
        })
    }

    pub fn period_samples(&self) -> usize {
        self.period_samples
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn profile(&self, r: usize) -> &[f64] {
        let p = self.period_samples;
        &self.profiles[r * p..(r + 1) * p]
    }

    pub fn profiles(&self) -> impl Iterator<Item = &[f64]> {
        self.profiles.chunks(self.period_samples)
    }

    /// Values of every replicate at one phase.
    pub fn phase_values(&self, phase: usize) -> Vec<f64> {
        self.profiles().map(|row| row[phase]).collect()
    }

    pub fn mean_profile(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.period_samples];
        for row in self.profiles() {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
        acc.iter().map(|a| a / self.replicates as f64).collect()
    }

    pub fn labelled(mut self, label: impl Into<String>, mode: EnsembleMode) -> Self {
        self.component_label = label.into();
        self.mode = mode;
        self
    }

    /// Re-indexes phases so that column `g` holds what was column
    /// `(g - shift) mod p`.
    fn rotate_phases(&mut self, shift: usize) {
        let p = self.period_samples;
        let shift = shift % p;
        if shift == 0 {
            return;
        }
        for row in self.profiles.chunks_mut(p) {
            row.rotate_right(shift);
        }
    }
}

/// RNG for replicate `r` of a run seeded with `seed`.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Source start of every destination block, in destination order.
fn draw_block_starts<R: Rng + ?Sized>(n: usize, period: usize, rng: &mut R) -> Result<Vec<usize>> {
    if period == 0 {
        return Err(Error::ZeroPeriod);
    }
    if period > n {
        return Err(Error::PeriodExceedsLength { period, len: n });
    }
    let admissible = (n / period) as u64;
    let blocks = n.div_ceil(period);
    Ok((0..blocks)
        .map(|_| rng.random_range(0..admissible) as usize * period)
        .collect())
}

/// Source index for every destination index of one resample.
pub fn pbb_resample_indices<R: Rng + ?Sized>(
    n: usize,
    period: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let starts = draw_block_starts(n, period, rng)?;
    let mut out = Vec::with_capacity(n);
    for (b, s) in starts.into_iter().enumerate() {
        let len = period.min(n - b * period);
        out.extend(s..s + len);
    }
    Ok(out)
}

pub fn pbb_resample<R: Rng + ?Sized>(values: &[f64], period: usize, rng: &mut R) -> Result<Vec<f64>> {
    Ok(pbb_resample_indices(values.len(), period, rng)?
        .into_iter()
        .map(|i| values[i])
        .collect())
}

/// Periodic mean of one resample, accumulated block by block without
/// materializing the resample. Consumes the RNG exactly like
/// [`pbb_resample`].
fn resampled_periodic_mean(values: &[f64], period: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = values.len();
    let starts = draw_block_starts(n, period, rng).expect("validated by caller");
    let mut sums = vec![0.0; period];
    let mut counts = vec![0usize; period];
    for (b, s) in starts.into_iter().enumerate() {
        let len = period.min(n - b * period);
        for (ph, v) in values[s..s + len].iter().enumerate() {
            sums[ph] += v;
            counts[ph] += 1;
        }
    }
    sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect()
}

/// Ensemble of `config.replicates` resampled periodic-mean profiles at
/// period `config.block_samples`.
pub fn bootstrap_periodic_means(values: &[f64], config: &BootstrapConfig) -> Result<BootstrapEnsemble> {
    let p = config.block_samples;
    // surfaces the period errors before spawning work
    periodic_mean_of(values, p)?;
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue { index: i });
    }
    let rows = map_indexed(config.replicates, |r| {
        let mut rng = replicate_rng(config.seed, r as u64);
        resampled_periodic_mean(values, p, &mut rng)
    });
    Ok(BootstrapEnsemble {
        period_samples: p,
        replicates: config.replicates,
        profiles: rows.into_iter().flatten().collect(),
        mode: EnsembleMode::Pbb,
        component_label: String::new(),
    })
}

/// Classical PBB: resample the (centered) raw series at `period`.
pub fn pbb_periodic_means(
    series: &TimeSeries,
    period: usize,
    config: &BootstrapConfig,
    label: impl Into<String>,
) -> Result<BootstrapEnsemble> {
    let config = config.with_block(period)?;
    Ok(bootstrap_periodic_means(series.values(), &config)?.labelled(label, EnsembleMode::Pbb))
}

/// Filtered component series used by [`vbpbb_component`]: KZFT at the
/// component frequency with `k = 1`, reconstructed to real values.
/// Returns the series and its offset into the source.
pub fn isolate_component(
    series: &TimeSeries,
    component: &ComponentSpec,
    filter_m: usize,
) -> Result<(TimeSeries, usize)> {
    let cfg = KzftConfig::new(filter_m, 1, component.frequency())?;
    let filtered = kzft_apply(series, &cfg)?;
    let real = reconstruct_real(&filtered, cfg.v())?;
    Ok((real, filtered.start_offset))
}

/// VBPBB ensemble for one component.
///
/// Phases of the returned profiles refer to the source series: phase `s`
/// covers source indices congruent to `s` mod `p`, regardless of how many
/// samples the filter trimmed.
pub fn vbpbb_component(
    series: &TimeSeries,
    component: &ComponentSpec,
    filter_m: usize,
    config: &BootstrapConfig,
) -> Result<BootstrapEnsemble> {
    let p = component.period_samples;
    let (real, offset) = isolate_component(series, component, filter_m)?;
    let config = config.with_block(p)?;
    let mut ens = bootstrap_periodic_means(real.values(), &config)?
        .labelled(component.label.clone(), EnsembleMode::Vbpbb);
    ens.rotate_phases(offset);
    Ok(ens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::periodic_mean_of;
    use std::f64::consts::TAU;

    #[test]
    fn one_block_returns_input() {
        let v = [3.0, 1.0, 4.0, 1.0, 5.0];
        for seed in 0..20 {
            let mut rng = replicate_rng(seed, 0);
            assert_eq!(pbb_resample(&v, 5, &mut rng).unwrap(), v);
        }
    }

    #[test]
    fn blocks_come_from_admissible_starts() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let allowed = [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]];
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..200 {
            let mut rng = replicate_rng(seed, 3);
            let out = pbb_resample(&v, 2, &mut rng).unwrap();
            assert_eq!(out.len(), 6);
            for block in out.chunks(2) {
                assert!(allowed.iter().any(|a| a == block));
                seen.insert(block[0] as i64);
                // odd positions (1-based) carry odd source values
                assert_eq!(block[0] as i64 % 2, 1);
            }
        }
        assert_eq!(seen.len(), 3);
    }

    #[test]
    fn repeated_cycle_is_fixed_point() {
        let cycle = [0.5, -1.0, 2.0, 7.0];
        let v: Vec<f64> = cycle.iter().chain(cycle.iter()).copied().collect();
        for seed in 0..50 {
            let mut rng = replicate_rng(seed, 1);
            assert_eq!(pbb_resample(&v, 4, &mut rng).unwrap(), v);
        }
    }

    #[test]
    fn partial_last_block_keeps_phase() {
        let v: Vec<f64> = (0..11).map(|i| i as f64).collect();
        for seed in 0..100 {
            let mut rng = replicate_rng(seed, 0);
            let idx = pbb_resample_indices(v.len(), 3, &mut rng).unwrap();
            assert_eq!(idx.len(), 11);
            for (d, s) in idx.iter().enumerate() {
                assert_eq!(d % 3, s % 3);
                assert!(*s < 9, "source must come from a full block");
            }
        }
    }

    #[test]
    fn period_too_long() {
        let mut rng = replicate_rng(0, 0);
        assert_eq!(
            pbb_resample(&[1.0, 2.0], 3, &mut rng),
            Err(Error::PeriodExceedsLength { period: 3, len: 2 })
        );
    }

    #[test]
    fn streaming_profile_matches_materialized_resample() {
        let v: Vec<f64> = (0..103).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let cfg = BootstrapConfig::new(25, 99, 7).unwrap();
        let ens = bootstrap_periodic_means(&v, &cfg).unwrap();
        for r in 0..25 {
            let mut rng = replicate_rng(99, r as u64);
            let resample = pbb_resample(&v, 7, &mut rng).unwrap();
            let prof = periodic_mean_of(&resample, 7).unwrap();
            assert_eq!(ens.profile(r), prof.means.as_slice());
        }
    }

    #[test]
    fn constant_series_gives_constant_profiles() {
        let cfg = BootstrapConfig::new(10, 1, 24).unwrap();
        let ens = bootstrap_periodic_means(&[2.5; 100], &cfg).unwrap();
        assert_eq!(ens.replicates(), 10);
        assert!(ens.profiles().all(|row| row.iter().all(|&x| x == 2.5)));
    }

    #[test]
    fn single_block_ensemble_equals_series() {
        let v: Vec<f64> = (0..24).map(|i| (i as f64).sqrt()).collect();
        let cfg = BootstrapConfig::new(1000, 5, 24).unwrap();
        let ens = bootstrap_periodic_means(&v, &cfg).unwrap();
        assert!(ens.profiles().all(|row| row == v.as_slice()));
    }

    #[test]
    fn two_block_enumeration() {
        // phase 0 of each replicate averages two draws from {1, 3}:
        // values 1, 2, 2, 3 equally likely, expectation 2
        let cfg = BootstrapConfig::new(1000, 11, 2).unwrap();
        let ens = bootstrap_periodic_means(&[1.0, 2.0, 3.0, 4.0], &cfg).unwrap();
        let phase0 = ens.phase_values(0);
        assert!(phase0.iter().all(|x| [1.0, 2.0, 3.0].contains(x)));
        let mean = phase0.iter().sum::<f64>() / phase0.len() as f64;
        assert!((mean - 2.0).abs() < 0.1);
        let twos = phase0.iter().filter(|&&x| x == 2.0).count() as f64 / 1000.0;
        assert!((twos - 0.5).abs() < 0.06);
    }

    #[test]
    fn deterministic_per_seed() {
        let v: Vec<f64> = (0..500).map(|i| (i as f64 * 0.3).sin()).collect();
        let cfg = BootstrapConfig::new(64, 42, 24).unwrap();
        let a = bootstrap_periodic_means(&v, &cfg).unwrap();
        let b = bootstrap_periodic_means(&v, &cfg).unwrap();
        assert_eq!(a, b);
        let c = bootstrap_periodic_means(&v, &BootstrapConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn ensemble_mean_tracks_sample_periodic_mean() {
        let p = 24;
        let n = 24 * 60;
        let v: Vec<f64> = (0..n)
            .map(|i| (TAU * i as f64 / 24.0).cos() + ((i * 7919) % 97) as f64 / 20.0)
            .collect();
        let cfg = BootstrapConfig::new(1000, 2024, p).unwrap();
        let ens = bootstrap_periodic_means(&v, &cfg).unwrap();
        let sample = periodic_mean_of(&v, p).unwrap();
        let mean = ens.mean_profile();
        for (s, &mean_s) in mean.iter().enumerate() {
            let block_vals: Vec<f64> = (s..n).step_by(p).map(|i| v[i]).collect();
            let mu = block_vals.iter().sum::<f64>() / block_vals.len() as f64;
            let sd = (block_vals.iter().map(|x| (x - mu).powi(2)).sum::<f64>()
                / (block_vals.len() - 1) as f64)
                .sqrt();
            assert!((mean_s - sample.means[s]).abs() <= 3.0 * sd / (1000f64).sqrt());
        }
    }

    #[test]
    fn rotation_maps_to_source_phase() {
        let mut ens = BootstrapEnsemble::from_profiles(
            vec![vec![0.0, 1.0, 2.0, 3.0]],
            EnsembleMode::Vbpbb,
            "x",
        )
        .unwrap();
        ens.rotate_phases(5);
        // local phase 0 sat at source phase 1
        assert_eq!(ens.profile(0), &[3.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn vbpbb_recovers_clean_cosine() {
        let x: Vec<f64> = (0..24 * 40).map(|t| (TAU * t as f64 / 24.0).cos()).collect();
        let series = TimeSeries::hourly(x).unwrap();
        let comp = ComponentSpec::fundamental("daily", 24);
        let cfg = BootstrapConfig::new(100, 7, 1).unwrap();
        let ens = vbpbb_component(&series, &comp, 57, &cfg).unwrap();
        assert_eq!(ens.mode, EnsembleMode::Vbpbb);
        assert_eq!(ens.period_samples(), 24);
        for row in ens.profiles() {
            for (s, y) in row.iter().enumerate() {
                assert!((y - (TAU * s as f64 / 24.0).cos()).abs() <= 0.05);
            }
        }
    }

    #[test]
    fn vbpbb_suppresses_weekly_in_daily_profiles() {
        let x: Vec<f64> = (0..168 * 12)
            .map(|t| (TAU * t as f64 / 24.0).cos() + (TAU * t as f64 / 168.0).cos())
            .collect();
        let series = TimeSeries::hourly(x).unwrap();
        let comp = ComponentSpec::fundamental("daily", 24);
        let cfg = BootstrapConfig::new(200, 3, 24).unwrap();
        let ens = vbpbb_component(&series, &comp, 57, &cfg).unwrap();
        // weekly leakage into a daily profile: regress each profile minus
        // the daily cosine on the weekly cosine at the same phases
        let weekly: Vec<f64> = (0..24).map(|s| (TAU * s as f64 / 168.0).cos()).collect();
        let wnorm: f64 = weekly.iter().map(|w| w * w).sum();
        for row in ens.profiles() {
            let resid: Vec<f64> = row
                .iter()
                .enumerate()
                .map(|(s, y)| y - (TAU * s as f64 / 24.0).cos())
                .collect();
            let coef = resid.iter().zip(&weekly).map(|(r, w)| r * w).sum::<f64>() / wnorm;
            assert!(coef.abs() <= 0.05, "coef {coef}");
        }
    }

    #[test]
    fn vbpbb_errors() {
        let series = TimeSeries::hourly(vec![0.0; 60]).unwrap();
        let comp = ComponentSpec::fundamental("daily", 24);
        let cfg = BootstrapConfig::new(10, 0, 24).unwrap();
        assert!(matches!(
            vbpbb_component(&series, &comp, 61, &cfg),
            Err(Error::SeriesShorterThanWindow { .. })
        ));
        assert!(matches!(
            vbpbb_component(&series, &comp, 41, &cfg),
            Err(Error::PeriodExceedsLength { period: 24, len: 20 })
        ));
    }
}
