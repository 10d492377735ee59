use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use vbpbb::spectral::window_excluding_dc;
use vbpbb::{kzft_apply, periodogram, reconstruct_real, ComponentSpec, KzftConfig, TimeSeries};
use vbpbb_cli::config::{AnalysisConfig, CycleConfig, PbbMode};
use vbpbb_cli::ingest::{ingest_csv, IngestOptions};
use vbpbb_cli::output::{emit_outputs, fmt_num, write_periodogram_csv};
use vbpbb_cli::pipeline::run_analysis;
use vbpbb_cli::synth::{synthesize, SyntheticComponent, SyntheticSpec, Waveform};

#[derive(Parser)]
#[command(name = "vbpbb", version, about = "Variable bandpass periodic block bootstrap")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bootstrap confidence bands for every configured component.
    Analyze(AnalyzeArgs),
    /// Raw periodogram of the centered series.
    Periodogram(PeriodogramArgs),
    /// Isolate one component with a KZFT filter.
    Filter(FilterArgs),
    /// Write a seeded synthetic series.
    Simulate(SimulateArgs),
}

#[derive(Args, Clone)]
struct InputArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    timestamp_column: Option<String>,
    #[arg(long)]
    value_column: Option<String>,
    #[arg(long)]
    step_hours: Option<f64>,
    /// Numbers use `,` as the decimal mark.
    #[arg(long)]
    decimal_comma: bool,
    #[arg(long)]
    delimiter: Option<char>,
}

impl InputArgs {
    fn apply(&self, cfg: &mut AnalysisConfig) {
        if let Some(p) = &self.input {
            cfg.input = Some(p.clone());
        }
        if let Some(c) = &self.timestamp_column {
            cfg.timestamp_column = c.clone();
        }
        if let Some(c) = &self.value_column {
            cfg.value_column = c.clone();
        }
        if let Some(s) = self.step_hours {
            cfg.step_hours = s;
        }
        if self.decimal_comma {
            cfg.decimal_comma = true;
        }
        if let Some(d) = self.delimiter {
            cfg.delimiter = d;
        }
    }

    fn load(&self) -> Result<TimeSeries> {
        let mut cfg = AnalysisConfig::default();
        self.apply(&mut cfg);
        let path = cfg.input.context("--input is required")?;
        let opts = IngestOptions {
            timestamp_column: cfg.timestamp_column,
            value_column: cfg.value_column,
            step_hours: cfg.step_hours,
            decimal_comma: cfg.decimal_comma,
            delimiter: cfg.delimiter as u8,
        };
        Ok(ingest_csv(&path, &opts)?)
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// TOML configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    input: InputArgs,
    /// Bootstrap replicates.
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Odd KZFT window length replacing the planned one.
    #[arg(long)]
    override_m: Option<usize>,
    #[arg(long)]
    pbb_mode: Option<PbbMode>,
    /// Cycle as name:period_hours[:harmonics]; repeat for several.
    #[arg(long = "component")]
    components: Vec<CycleConfig>,
    #[arg(long)]
    plots: bool,
    #[arg(long)]
    periodogram: bool,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PeriodogramArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "periodogram.csv")]
    out: PathBuf,
    /// Number of strongest local maxima to print.
    #[arg(long, default_value_t = 10)]
    top: usize,
}

#[derive(Args)]
struct FilterArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Fundamental period in hours.
    #[arg(long)]
    period_hours: f64,
    #[arg(long, default_value_t = 1)]
    harmonic: usize,
    /// Window length; defaults to the smallest odd length that keeps the
    /// component away from zero frequency.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value = "component.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Optional TOML synthetic spec; other flags are then ignored.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 24 * 7 * 10)]
    length: usize,
    /// Cosine as period_samples:amplitude; repeat for several.
    #[arg(long = "cosine")]
    cosines: Vec<String>,
    #[arg(long, default_value_t = 0.0)]
    noise_sd: f64,
    #[arg(long, default_value_t = 0.0)]
    trend: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "synthetic.csv")]
    out: PathBuf,
}

fn parse_cosine(s: &str) -> Result<SyntheticComponent> {
    let (p, a) = s
        .split_once(':')
        .with_context(|| format!("cosine {s:?} must look like period_samples:amplitude"))?;
    Ok(SyntheticComponent {
        period_samples: p.parse().with_context(|| format!("bad period in {s:?}"))?,
        amplitude: a.parse().with_context(|| format!("bad amplitude in {s:?}"))?,
        waveform: Waveform::Cosine,
    })
}

fn write_series_csv(path: &PathBuf, series: &TimeSeries, extra: Option<(&str, Vec<Vec<f64>>)>) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    match &extra {
        Some((cols, _)) => writeln!(w, "timestamp,value,{cols}")?,
        None => writeln!(w, "timestamp,value")?,
    }
    for (i, v) in series.values().iter().enumerate() {
        write!(w, "{},{}", series.time_at(i).format("%Y-%m-%dT%H:%M:%S"), fmt_num(*v))?;
        if let Some((_, rows)) = &extra {
            for x in &rows[i] {
                write!(w, ",{}", fmt_num(*x))?;
            }
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => AnalysisConfig::load(p)?,
        None => AnalysisConfig::default(),
    };
    args.input.apply(&mut cfg);
    if let Some(b) = args.b {
        cfg.b = b;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(a) = args.alpha {
        cfg.alpha = a;
    }
    if args.override_m.is_some() {
        cfg.override_m = args.override_m;
    }
    if let Some(m) = args.pbb_mode {
        cfg.pbb_mode = m;
    }
    if !args.components.is_empty() {
        cfg.components = args.components;
    }
    cfg.plots |= args.plots;
    cfg.periodogram |= args.periodogram;
    if let Some(d) = args.out_dir {
        cfg.out_dir = d;
    }

    let res = run_analysis(&cfg)?;
    let files = emit_outputs(&res, &cfg.out_dir, cfg.plots).context("writing outputs")?;
    println!(
        "n = {}, grand mean = {}, m = {}, k = {}, B = {}",
        res.series.len(),
        fmt_num(res.grand_mean),
        res.filter_m,
        res.filter_k,
        res.b
    );
    for c in &res.components {
        println!(
            "{:<28} significant = {:<5} gap = {:>16}  width ratio = {}",
            c.spec.label,
            c.vbpbb.significant,
            fmt_num(c.vbpbb.gap),
            c.width_ratio_vs_pbb.map_or("n/a".into(), fmt_num)
        );
    }
    if let Some(c) = &res.combined {
        println!(
            "combined significant components: R^2 = {}",
            c.r_squared.map_or("n/a".into(), fmt_num)
        );
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn run_periodogram(args: PeriodogramArgs) -> Result<()> {
    let series = args.input.load().context("loading input series")?;
    let spectrum = periodogram(&series).context("computing periodogram")?;
    write_periodogram_csv(&spectrum, series.step_hours(), &args.out)?;
    let mut peaks = spectrum.local_maxima();
    peaks.sort_by(|a, b| spectrum.power[*b].total_cmp(&spectrum.power[*a]));
    for j in peaks.into_iter().take(args.top) {
        let f = spectrum.frequencies[j];
        println!(
            "period {} h  power {}",
            fmt_num(series.step_hours() / f),
            fmt_num(spectrum.power[j])
        );
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn run_filter(args: FilterArgs) -> Result<()> {
    let series = args.input.load().context("loading input series")?;
    let cfg = AnalysisConfig {
        step_hours: series.step_hours(),
        ..Default::default()
    };
    let p = cfg.samples_for_hours(args.period_hours)?;
    let spec = ComponentSpec::new("component", p, args.harmonic);
    let m = match args.m {
        Some(m) => m,
        None => window_excluding_dc(&spec)?,
    };
    let v = spec.frequency();
    let kz = KzftConfig::new(m, args.k, v)?;
    let (centered, _) = vbpbb::center(&series);
    let comp = kzft_apply(&centered, &kz).with_context(|| format!("KZFT filter (m = {m}, k = {})", args.k))?;
    let real = reconstruct_real(&comp, v)?;
    let extra: Vec<Vec<f64>> = comp.values.iter().map(|z| vec![z.re, z.im, z.norm()]).collect();
    write_series_csv(&args.out, &real, Some(("re,im,modulus", extra)))?;
    println!(
        "m = {m}, k = {}, frequency = {} per hour, {} samples trimmed each side",
        args.k,
        fmt_num(v / series.step_hours()),
        comp.start_offset
    );
    println!("wrote {}", args.out.display());
    Ok(())
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let spec = match &args.spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str::<SyntheticSpec>(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => SyntheticSpec {
            length_samples: args.length,
            components: args.cosines.iter().map(|s| parse_cosine(s)).collect::<Result<_>>()?,
            noise_sd: args.noise_sd,
            trend: args.trend,
            seed: args.seed,
            start: None,
            step_hours: 1.0,
        },
    };
    let series = synthesize(&spec)?;
    write_series_csv(&args.out, &series, None)?;
    println!("wrote {} ({} samples)", args.out.display(), series.len());
    Ok(())
}

fn init_threads(threads: Option<usize>) -> Result<()> {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads(cli.threads).and_then(|_| match cli.command {
        Command::Analyze(a) => analyze(a).context("analyze"),
        Command::Periodogram(a) => run_periodogram(a).context("periodogram"),
        Command::Filter(a) => run_filter(a).context("filter"),
        Command::Simulate(a) => run_simulate(a).context("simulate"),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
