use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use vbpbb::bootstrap::pbb_periodic_means;
use vbpbb::kzft::KzftConfig;
use vbpbb::{
    bootstrap_periodic_means, ci_band, kzft_apply, kzft_apply_direct, reconstruct_real,
    vbpbb_component, Band, BootstrapConfig, ComponentSpec, TimeSeries,
};

/// Centered moving average applied `k` times, each pass trimming the edges.
fn iterated_moving_average(x: &[f64], m: usize, k: usize) -> Vec<f64> {
    let mut cur = x.to_vec();
    for _ in 0..k {
        cur = (0..=cur.len() - m)
            .map(|i| cur[i..i + m].iter().sum::<f64>() / m as f64)
            .collect();
    }
    cur
}

fn noise(n: usize, sd: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = Normal::new(0.0, sd).unwrap();
    (0..n).map(|_| d.sample(&mut rng)).collect()
}

#[test]
fn zero_frequency_is_kz_filter() {
    let x = noise(10_000, 3.0, 1);
    let series = TimeSeries::hourly(x.clone()).unwrap();
    for k in 1..=3 {
        let cfg = KzftConfig::new(31, k, 0.0).unwrap();
        let out = kzft_apply(&series, &cfg).unwrap();
        let oracle = iterated_moving_average(&x, 31, k);
        assert_eq!(out.values.len(), oracle.len());
        let worst = out
            .values
            .iter()
            .zip(&oracle)
            .map(|(z, o)| (z.re - o).abs().max(z.im.abs()))
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "k={k} worst={worst}");
    }
}

/// Largest magnitude of the reconstructed output for a unit cosine at
/// `v + delta` filtered at `v`.
fn stopband_amplitude(m: usize, k: usize, v: f64, delta: f64) -> f64 {
    let n = 4 * k * m + 400;
    let x: Vec<f64> = (0..n).map(|t| (TAU * (v + delta) * t as f64).cos()).collect();
    let cfg = KzftConfig::new(m, k, v).unwrap();
    let out = kzft_apply(&TimeSeries::hourly(x).unwrap(), &cfg).unwrap();
    let real = reconstruct_real(&out, v).unwrap();
    real.values().iter().fold(0.0, |a, y| a.max(y.abs()))
}

#[test]
fn stopband_attenuation_bound_and_monotone_in_k() {
    let m = 41;
    for &v in &[0.05, 0.13, 0.3] {
        for &mult in &[2.0, 2.5, 3.3, 5.0, 7.9] {
            let delta = mult / m as f64;
            let a1 = stopband_amplitude(m, 1, v, delta);
            assert!(a1 <= 0.25, "v={v} delta={delta} a1={a1}");
            let a2 = stopband_amplitude(m, 2, v, delta);
            let a3 = stopband_amplitude(m, 3, v, delta);
            assert!(a2 < a1 && a3 < a2, "v={v} mult={mult}: {a1} {a2} {a3}");
        }
    }
}

#[test]
fn stopband_matches_dirichlet_oracle() {
    // reconstructed amplitude of cos at v + d filtered at v, k = 1:
    // |D(d) e^{i..} + D(2v + d) e^{-i..}| bounded by |D(d)| + |D(2v + d)|
    let dirichlet = |m: f64, f: f64| (PI * m * f).sin() / (m * (PI * f).sin());
    let (m, v) = (101usize, 0.1);
    let d = 3.0 / m as f64;
    let bound = dirichlet(m as f64, d).abs() + dirichlet(m as f64, 2.0 * v + d).abs();
    let amp = stopband_amplitude(m, 1, v, d);
    assert!(amp <= bound + 1e-9);
    assert!(amp <= 0.15);
}

#[test]
fn filter_gain_one_at_center_for_random_configs() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let m = 2 * rng.random_range(1..150) + 1;
        let v: f64 = rng.random_range(0.001..0.499);
        let cfg = KzftConfig::new(m, 1, v).unwrap();
        let probe: Vec<num_complex::Complex64> = (0..m + 50)
            .map(|t| num_complex::Complex64::from_polar(1.0, TAU * v * t as f64))
            .collect();
        let out = vbpbb::kzft::kzft_filter_complex(&probe, &cfg).unwrap();
        for (i, y) in out.iter().enumerate() {
            assert!((y - probe[i + cfg.half_width()]).norm() < 1e-9);
        }
    }
}

fn with_threads<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let x: Vec<f64> = noise(2000, 1.0, 9)
        .into_iter()
        .enumerate()
        .map(|(t, e)| e + (TAU * t as f64 / 24.0).cos())
        .collect();
    let series = TimeSeries::hourly(x).unwrap();
    let cfg = BootstrapConfig::new(300, 77, 24).unwrap();
    let comp = ComponentSpec::fundamental("daily", 24);
    let kz = KzftConfig::new(57, 2, 1.0 / 24.0).unwrap();
    let run = || {
        (
            bootstrap_periodic_means(series.values(), &cfg).unwrap(),
            vbpbb_component(&series, &comp, 57, &cfg).unwrap(),
            kzft_apply_direct(&series, &kz).unwrap(),
        )
    };
    let one = with_threads(1, run);
    let many = with_threads(6, run);
    assert_eq!(one.0, many.0);
    assert_eq!(one.1, many.1);
    assert_eq!(one.2, many.2);
    let band_one = with_threads(1, || ci_band(&one.1, 0.05).unwrap());
    let band_many = with_threads(6, || ci_band(&one.1, 0.05).unwrap());
    assert_eq!(band_one, band_many);
}

fn per_phase_variance(e: &vbpbb::BootstrapEnsemble) -> Vec<f64> {
    (0..e.period_samples())
        .map(|s| {
            let col = e.phase_values(s);
            let mu = col.iter().sum::<f64>() / col.len() as f64;
            col.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (col.len() - 1) as f64
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[test]
fn vbpbb_variance_below_pbb_on_signal_plus_noise() {
    let n = 24 * 7 * 10;
    let x: Vec<f64> = noise(n, 5.0, 21)
        .into_iter()
        .enumerate()
        .map(|(t, e)| {
            let t = t as f64;
            e + 10.0 * (TAU * t / 24.0).cos() + 5.0 * (TAU * t / 168.0).cos()
        })
        .collect();
    let series = TimeSeries::hourly(x).unwrap();
    let cfg = BootstrapConfig::new(1000, 5, 24).unwrap();
    let v = vbpbb_component(&series, &ComponentSpec::fundamental("daily", 24), 57, &cfg).unwrap();
    let p = pbb_periodic_means(&series, 24, &cfg, "daily").unwrap();
    assert!(median(per_phase_variance(&v)) < median(per_phase_variance(&p)));
}

#[test]
fn white_noise_vbpbb_band_narrower_than_pbb() {
    let series = TimeSeries::hourly(noise(24 * 7 * 10, 1.0, 4)).unwrap();
    let comp = ComponentSpec::fundamental("daily", 24);
    for seed in 0..3 {
        let cfg = BootstrapConfig::new(1000, seed, 24).unwrap();
        let v = ci_band(&vbpbb_component(&series, &comp, 49, &cfg).unwrap(), 0.05).unwrap();
        let p = ci_band(&pbb_periodic_means(&series, 24, &cfg, "daily").unwrap(), 0.05).unwrap();
        assert!(v.median_width() < p.median_width());
    }
}
