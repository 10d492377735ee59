//! Variable bandpass periodic block bootstrap (VBPBB) for periodically
//! correlated time series.
//!
//! The pipeline isolates each periodic component with a Kolmogorov-Zurbenko
//! Fourier transform (KZFT) bandpass filter, block-bootstraps the filtered
//! component with phase-preserving blocks of one period, and turns the
//! bootstrap ensemble of periodic means into per-phase confidence bands.
//! The classical periodic block bootstrap (PBB) on the raw series is
//! available for comparison.
//!
//! Replicate loops run on rayon when the `parallel` feature is enabled
//! (the default). Every random draw is keyed by `(seed, replicate index)`,
//! so results are bitwise identical with or without the feature and for
//! any thread count.

pub mod bootstrap;
pub mod error;
pub mod inference;
pub mod kzft;
mod par;
pub mod spectral;
pub mod timeseries;

pub use bootstrap::{
    bootstrap_periodic_means, pbb_resample, pbb_resample_indices, vbpbb_component,
    BootstrapConfig, BootstrapEnsemble, EnsembleMode,
};
pub use error::{Error, Result};
pub use inference::{
    ci_band, coefficient_of_determination, combine_components, significance, tile_profile,
    width_ratio, Band, CiBand, CombinedBand,
};
pub use kzft::{kzft_apply, kzft_apply_direct, kzft_coefficients, reconstruct_real};
pub use kzft::{ComplexComponentSeries, KzftConfig};
pub use spectral::{enumerate_harmonics, periodogram, plan_bandwidth, ComponentSpec};
pub use spectral::{FrequencyPlan, Spectrum};
pub use timeseries::{center, periodic_mean, phase_of, PeriodicMeanProfile, TimeSeries};
