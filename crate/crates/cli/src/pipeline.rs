//! End-to-end analysis: load, center, plan, filter, bootstrap, band,
//! compare and combine.

use std::collections::BTreeMap;

use anyhow::{Context, Result};
use vbpbb::bootstrap::pbb_periodic_means;
use vbpbb::spectral::window_excluding_dc;
use vbpbb::{
    center, ci_band, coefficient_of_determination, combine_components, enumerate_harmonics,
    periodogram, plan_bandwidth, tile_profile, vbpbb_component, width_ratio, Band,
    BootstrapConfig, BootstrapEnsemble, CiBand, CombinedBand, ComponentSpec, Spectrum,
    TimeSeries,
};

use crate::config::{AnalysisConfig, PbbMode};
use crate::ingest::{ingest_csv, IngestOptions};
use crate::synth::synthesize;

pub struct ComponentResult {
    pub cycle: String,
    pub spec: ComponentSpec,
    pub period_hours: f64,
    pub frequency_per_hour: f64,
    pub vbpbb: CiBand,
    /// PBB band this component is compared against.
    pub pbb: Option<CiBand>,
    pub width_ratio_vs_pbb: Option<f64>,
    /// Variance share of the tiled VBPBB median.
    pub r_squared: Option<f64>,
    pub ensemble: BootstrapEnsemble,
}

/// All harmonics of one cycle combined.
pub struct CycleResult {
    pub name: String,
    pub period_samples: usize,
    pub period_hours: f64,
    pub band: CombinedBand,
    pub pbb: Option<CiBand>,
    pub width_ratio_vs_pbb: Option<f64>,
    pub r_squared: Option<f64>,
}

pub struct CombinedResult {
    pub band: CombinedBand,
    pub r_squared: Option<f64>,
}

pub struct AnalysisResults {
    pub series: TimeSeries,
    pub grand_mean: f64,
    pub filter_m: usize,
    pub filter_k: usize,
    pub b: usize,
    pub seed: u64,
    pub alpha: f64,
    pub pbb_mode: PbbMode,
    pub components: Vec<ComponentResult>,
    pub cycles: Vec<CycleResult>,
    /// Combination of every significant component, if any.
    pub combined: Option<CombinedResult>,
    pub spectrum: Option<Spectrum>,
}

/// SplitMix64 finalizer over `(seed, stream, index)`.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const VBPBB_STREAM: u64 = 1;
const PBB_STREAM: u64 = 2;

pub fn load_series(config: &AnalysisConfig) -> Result<TimeSeries> {
    match (&config.input, &config.synthetic) {
        (Some(path), _) => {
            let opts = IngestOptions {
                timestamp_column: config.timestamp_column.clone(),
                value_column: config.value_column.clone(),
                step_hours: config.step_hours,
                decimal_comma: config.decimal_comma,
                delimiter: config.delimiter as u8,
            };
            Ok(ingest_csv(path, &opts)?)
        }
        (None, Some(spec)) => synthesize(spec),
        (None, None) => anyhow::bail!("no input file or synthetic spec configured"),
    }
}

/// Every component of every configured cycle, in configuration order.
pub fn expand_components(config: &AnalysisConfig) -> Result<Vec<(String, ComponentSpec)>> {
    let mut out = Vec::new();
    for cycle in &config.components {
        let p = config.samples_for_hours(cycle.period_hours)?;
        for mut spec in enumerate_harmonics(p, cycle.harmonics)
            .with_context(|| format!("enumerating harmonics of {}", cycle.name))?
        {
            spec.label = format!("{} {}", cycle.name, spec.label);
            out.push((cycle.name.clone(), spec));
        }
    }
    Ok(out)
}

/// Window length: the override, the pairwise-spacing rule for two or more
/// frequencies, or the distance-to-zero rule for a lone frequency.
pub fn choose_window(components: &[ComponentSpec], override_m: Option<usize>) -> Result<usize> {
    if override_m.is_none() && components.len() == 1 {
        return Ok(window_excluding_dc(&components[0])?);
    }
    Ok(plan_bandwidth(components.to_vec(), override_m)?.m)
}

fn r_squared_of(original: &TimeSeries, median: &[f64]) -> Result<Option<f64>> {
    let fitted = original.with_values(tile_profile(median, original.len(), 0))?;
    match coefficient_of_determination(original, &fitted) {
        Ok(r2) => Ok(Some(r2)),
        Err(vbpbb::Error::ZeroVariance) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn ratio_of<A: Band, B: Band>(pbb: Option<&A>, vbpbb: &B) -> Result<Option<f64>> {
    match pbb.map(|p| width_ratio(p, vbpbb)) {
        None | Some(Err(vbpbb::Error::AllZeroWidths)) => Ok(None),
        Some(Ok(r)) => Ok(Some(r)),
        Some(Err(e)) => Err(e.into()),
    }
}

pub fn run_analysis(config: &AnalysisConfig) -> Result<AnalysisResults> {
    config.validate().context("validating configuration")?;
    let raw = load_series(config).context("loading input series")?;
    let spectrum = if config.periodogram {
        Some(periodogram(&raw).context("computing periodogram")?)
    } else {
        None
    };
    let (series, grand_mean) = center(&raw);
    let step = series.step_hours();

    let components = expand_components(config).context("enumerating components")?;
    let specs: Vec<ComponentSpec> = components.iter().map(|(_, s)| s.clone()).collect();
    let m = choose_window(&specs, config.override_m).context("planning filter bandwidth")?;

    let pbb_period = |p: usize| -> Result<Option<usize>> {
        Ok(match config.pbb_mode {
            PbbMode::PerComponent => Some(p),
            PbbMode::Fixed24 => Some(config.samples_for_hours(24.0)?),
            PbbMode::Off => None,
        })
    };

    // PBB bands, one per distinct period
    let mut pbb_bands: BTreeMap<usize, CiBand> = BTreeMap::new();
    for (_, spec) in &components {
        if let Some(p) = pbb_period(spec.period_samples)? {
            if pbb_bands.contains_key(&p) {
                continue;
            }
            let cfg = BootstrapConfig::new(config.b, derive_seed(config.seed, PBB_STREAM, p as u64), p)?;
            let label = format!("pbb period {p}");
            let ens = pbb_periodic_means(&series, p, &cfg, label)
                .with_context(|| format!("PBB bootstrap at period {p}"))?;
            pbb_bands.insert(p, ci_band(&ens, config.alpha)?);
        }
    }

    let mut results = Vec::with_capacity(components.len());
    for (idx, (cycle, spec)) in components.iter().enumerate() {
        let cfg = BootstrapConfig::new(
            config.b,
            derive_seed(config.seed, VBPBB_STREAM, idx as u64),
            spec.period_samples,
        )?;
        let ensemble = vbpbb_component(&series, spec, m, &cfg)
            .with_context(|| format!("VBPBB for component {} (m = {m})", spec.label))?;
        let band = ci_band(&ensemble, config.alpha)
            .with_context(|| format!("confidence band for {}", spec.label))?;
        let pbb = pbb_period(spec.period_samples)?.and_then(|p| pbb_bands.get(&p).cloned());
        let width_ratio_vs_pbb = ratio_of(pbb.as_ref(), &band)
            .with_context(|| format!("width ratio for {}", spec.label))?;
        let r_squared = r_squared_of(&series, &band.median)?;
        results.push(ComponentResult {
            cycle: cycle.clone(),
            period_hours: spec.period_samples as f64 * step,
            frequency_per_hour: spec.frequency() / step,
            spec: spec.clone(),
            vbpbb: band,
            pbb,
            width_ratio_vs_pbb,
            r_squared,
            ensemble,
        });
    }

    let mut cycles = Vec::new();
    for cycle in &config.components {
        let members: Vec<&BootstrapEnsemble> = results
            .iter()
            .filter(|r| r.cycle == cycle.name)
            .map(|r| &r.ensemble)
            .collect();
        let band = combine_components(&members, config.alpha)
            .with_context(|| format!("combining harmonics of {}", cycle.name))?;
        let p = band.period_samples;
        let pbb = pbb_period(p)?.and_then(|q| pbb_bands.get(&q).cloned());
        cycles.push(CycleResult {
            name: cycle.name.clone(),
            period_samples: p,
            period_hours: p as f64 * step,
            width_ratio_vs_pbb: ratio_of(pbb.as_ref(), &band)?,
            r_squared: r_squared_of(&series, &band.median)?,
            pbb,
            band,
        });
    }

    let significant: Vec<&BootstrapEnsemble> = results
        .iter()
        .filter(|r| r.vbpbb.significant)
        .map(|r| &r.ensemble)
        .collect();
    let combined = if significant.is_empty() {
        None
    } else {
        let band = combine_components(&significant, config.alpha)
            .context("combining significant components")?;
        let r_squared = r_squared_of(&series, &band.median)?;
        Some(CombinedResult { band, r_squared })
    };

    Ok(AnalysisResults {
        series,
        grand_mean,
        filter_m: m,
        filter_k: 1,
        b: config.b,
        seed: config.seed,
        alpha: config.alpha,
        pbb_mode: config.pbb_mode,
        components: results,
        cycles,
        combined,
        spectrum,
    })
}
