//! Result files: bands.csv, combined_bands.csv, summary.json,
//! periodogram.csv and optional SVG band plots.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use vbpbb::{Band, CiBand, Spectrum};

use crate::pipeline::AnalysisResults;
use crate::plot::band_svg;

/// Scientific notation with ten significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.9e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub name: String,
    pub start_time: String,
    pub step_hours: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub label: String,
    pub cycle: String,
    pub harmonic: usize,
    pub period_samples: usize,
    pub period_hours: f64,
    /// Cycles per hour.
    pub frequency: f64,
    pub frequency_per_sample: f64,
    /// (min, max) of the lower band curve.
    pub lower_range: (f64, f64),
    /// (min, max) of the upper band curve.
    pub upper_range: (f64, f64),
    /// Band at the trough of the median curve.
    pub trough_interval: (f64, f64),
    /// Band at the peak of the median curve.
    pub peak_interval: (f64, f64),
    pub significant: bool,
    pub gap: f64,
    pub excludes_zero_everywhere: bool,
    pub vbpbb_median_width: f64,
    pub pbb_median_width: Option<f64>,
    pub width_ratio_vs_pbb: Option<f64>,
    pub r_squared: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleSummary {
    pub name: String,
    pub period_samples: usize,
    pub period_hours: f64,
    pub significant: bool,
    pub gap: f64,
    pub vbpbb_median_width: f64,
    pub pbb_median_width: Option<f64>,
    pub width_ratio_vs_pbb: Option<f64>,
    pub r_squared: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedSummary {
    pub components: Vec<String>,
    pub period_samples: usize,
    pub significant: bool,
    pub gap: f64,
    pub r_squared: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub series: SeriesSummary,
    pub grand_mean: f64,
    pub filter_m: usize,
    pub filter_k: usize,
    pub b: usize,
    pub seed: u64,
    pub alpha: f64,
    pub pbb_mode: String,
    pub components: Vec<ComponentSummary>,
    pub cycles: Vec<CycleSummary>,
    /// Significant components combined over the LCM of their periods.
    pub combined: Option<CombinedSummary>,
}

impl Summary {
    pub fn from_results(res: &AnalysisResults) -> Self {
        let components = res
            .components
            .iter()
            .map(|c| ComponentSummary {
                label: c.spec.label.clone(),
                cycle: c.cycle.clone(),
                harmonic: c.spec.harmonic,
                period_samples: c.spec.period_samples,
                period_hours: c.period_hours,
                frequency: c.frequency_per_hour,
                frequency_per_sample: c.spec.frequency(),
                lower_range: c.vbpbb.lower_range,
                upper_range: c.vbpbb.upper_range,
                trough_interval: c.vbpbb.trough_interval,
                peak_interval: c.vbpbb.peak_interval,
                significant: c.vbpbb.significant,
                gap: c.vbpbb.gap,
                excludes_zero_everywhere: c.vbpbb.excludes_zero_everywhere,
                vbpbb_median_width: c.vbpbb.median_width(),
                pbb_median_width: c.pbb.as_ref().map(Band::median_width),
                width_ratio_vs_pbb: c.width_ratio_vs_pbb,
                r_squared: c.r_squared,
            })
            .collect();
        let cycles = res
            .cycles
            .iter()
            .map(|c| CycleSummary {
                name: c.name.clone(),
                period_samples: c.period_samples,
                period_hours: c.period_hours,
                significant: c.band.significant,
                gap: c.band.gap,
                vbpbb_median_width: c.band.median_width(),
                pbb_median_width: c.pbb.as_ref().map(Band::median_width),
                width_ratio_vs_pbb: c.width_ratio_vs_pbb,
                r_squared: c.r_squared,
            })
            .collect();
        Summary {
            series: SeriesSummary {
                name: res.series.name().to_string(),
                start_time: res.series.start_time().format("%Y-%m-%dT%H:%M:%S").to_string(),
                step_hours: res.series.step_hours(),
                n_samples: res.series.len(),
            },
            grand_mean: res.grand_mean,
            filter_m: res.filter_m,
            filter_k: res.filter_k,
            b: res.b,
            seed: res.seed,
            alpha: res.alpha,
            pbb_mode: res.pbb_mode.as_str().to_string(),
            components,
            cycles,
            combined: res.combined.as_ref().map(|c| CombinedSummary {
                components: c.band.contributing_components.clone(),
                period_samples: c.band.period_samples,
                significant: c.band.significant,
                gap: c.band.gap,
                r_squared: c.r_squared,
            }),
        }
    }
}

fn create(path: &Path) -> Result<std::io::BufWriter<fs::File>> {
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(std::io::BufWriter::new(f))
}

fn write_band_rows<W: Write, B: Band + ?Sized>(
    w: &mut W,
    name: &str,
    method: Option<&str>,
    band: &B,
    step_hours: f64,
) -> std::io::Result<()> {
    for s in 0..band.period_samples() {
        write!(
            w,
            "{},{},{},{},{},{}",
            csv_field(name),
            s,
            fmt_num(s as f64 * step_hours),
            fmt_num(band.lower()[s]),
            fmt_num(band.median()[s]),
            fmt_num(band.upper()[s]),
        )?;
        match method {
            Some(m) => writeln!(w, ",{m}")?,
            None => writeln!(w)?,
        }
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Per-component VBPBB and PBB bands.
pub fn write_bands_csv(res: &AnalysisResults, path: &Path) -> Result<()> {
    let step = res.series.step_hours();
    let mut w = create(path)?;
    (|| -> std::io::Result<()> {
        writeln!(w, "component,phase_index,phase_time_hours,lower,median,upper,method")?;
        for c in &res.components {
            write_band_rows(&mut w, &c.spec.label, Some("vbpbb"), &c.vbpbb, step)?;
            if let Some(p) = &c.pbb {
                write_band_rows(&mut w, &c.spec.label, Some("pbb"), p, step)?;
            }
        }
        w.flush()
    })()
    .with_context(|| format!("writing {}", path.display()))
}

/// Cycle-level and all-significant combined VBPBB bands.
pub fn write_combined_csv(res: &AnalysisResults, path: &Path) -> Result<()> {
    let step = res.series.step_hours();
    let mut w = create(path)?;
    (|| -> std::io::Result<()> {
        writeln!(w, "band,phase_index,phase_time_hours,lower,median,upper")?;
        for c in &res.cycles {
            write_band_rows(&mut w, &format!("cycle {}", c.name), None, &c.band, step)?;
        }
        if let Some(c) = &res.combined {
            write_band_rows(&mut w, "significant", None, &c.band, step)?;
        }
        w.flush()
    })()
    .with_context(|| format!("writing {}", path.display()))
}

pub fn write_summary_json(res: &AnalysisResults, path: &Path) -> Result<()> {
    let summary = Summary::from_results(res);
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, &summary)
        .with_context(|| format!("writing {}", path.display()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_summary_json(path: &Path) -> Result<Summary> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_periodogram_csv(spectrum: &Spectrum, step_hours: f64, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    (|| -> std::io::Result<()> {
        writeln!(w, "frequency_per_sample,frequency_per_hour,period_hours,power")?;
        for (f, p) in spectrum.frequencies.iter().zip(&spectrum.power) {
            writeln!(
                w,
                "{},{},{},{}",
                fmt_num(*f),
                fmt_num(f / step_hours),
                fmt_num(step_hours / f),
                fmt_num(*p)
            )?;
        }
        w.flush()
    })()
    .with_context(|| format!("writing {}", path.display()))
}

/// File-name-safe version of a component label.
pub fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect()
}

fn write_plot(path: &Path, title: &str, vbpbb: &dyn Band, pbb: Option<&CiBand>, step: f64) -> Result<()> {
    let svg = band_svg(title, vbpbb, pbb.map(|b| b as &dyn Band), step);
    fs::write(path, svg).with_context(|| format!("writing {}", path.display()))
}

/// Writes every output file into `out_dir` and returns their paths.
pub fn emit_outputs(res: &AnalysisResults, out_dir: &Path, plots: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut written = Vec::new();
    let bands = out_dir.join("bands.csv");
    write_bands_csv(res, &bands)?;
    written.push(bands);
    let combined = out_dir.join("combined_bands.csv");
    write_combined_csv(res, &combined)?;
    written.push(combined);
    let summary = out_dir.join("summary.json");
    write_summary_json(res, &summary)?;
    written.push(summary);
    if let Some(spectrum) = &res.spectrum {
        let path = out_dir.join("periodogram.csv");
        write_periodogram_csv(spectrum, res.series.step_hours(), &path)?;
        written.push(path);
    }
    if plots {
        let dir = out_dir.join("plots");
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let step = res.series.step_hours();
        for c in &res.components {
            let path = dir.join(format!("{}.svg", slug(&c.spec.label)));
            write_plot(&path, &c.spec.label, &c.vbpbb, c.pbb.as_ref(), step)?;
            written.push(path);
        }
        for c in &res.cycles {
            let path = dir.join(format!("cycle_{}.svg", slug(&c.name)));
            let title = format!("{} cycle, all harmonics", c.name);
            write_plot(&path, &title, &c.band, c.pbb.as_ref(), step)?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_keeps_precision() {
        assert_eq!(fmt_num(100.0), "1.000000000e2");
        assert_eq!(fmt_num(-0.000123456789), "-1.234567890e-4");
        let x = 3_152.596_123;
        let back: f64 = fmt_num(x).parse().unwrap();
        assert!((back - x).abs() <= 1e-9 * x);
    }

    #[test]
    fn slugs_and_fields() {
        assert_eq!(slug("daily second harmonic"), "daily_second_harmonic");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
