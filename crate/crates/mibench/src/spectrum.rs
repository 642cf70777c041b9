//! Periodogram PSD estimation and max-pooled band features.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::data::Label;
use crate::error::{Error, Result};
use crate::preprocess::Epoch;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// One-sided periodogram of a real signal at the DFT bin frequencies
/// k * fs / N for k = 0..=floor(N/2).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    pub values: Vec<f64>,
    pub bin_hz: f64,
    pub n_samples: usize,
}

impl SpectrumEstimate {
    pub fn bin_frequency(&self, k: usize) -> f64 {
        k as f64 * self.bin_hz
    }
}

/// Band restriction and pooling geometry for feature extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolingConfig {
    pub band_low_hz: f64,
    pub band_high_hz: f64,
    pub window_bins: usize,
}

impl Default for PoolingConfig {
    fn default() -> Self {
        PoolingConfig {
            band_low_hz: 3.0,
            band_high_hz: 35.0,
            window_bins: 10,
        }
    }
}

/// A classification input: pooled band powers concatenated across channels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub label: Label,
    pub feature_names: Arc<[String]>,
}

/// Periodogram PSD estimate: S(w_k) = |DFT_k(x)|^2 / N, the rectangular
/// window form (dt/T) * |sum x[n] e^{-i w_k n dt}|^2. No detrending.
pub fn periodogram(x: &[f64], fs: f64) -> Result<SpectrumEstimate> {
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "periodogram needs at least 2 samples, got {n}"
        )));
    }
    if !(fs > 0.0) {
        return Err(Error::InvalidInput(format!(
            "sampling rate must be positive, got {fs}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("periodogram input must be finite".into()));
    }
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_forward(n);
        fft.process(&mut buf);
    });
    let values = buf[..n / 2 + 1]
        .iter()
        .map(|c| c.norm_sqr() / n as f64)
        .collect();
    Ok(SpectrumEstimate {
        values,
        bin_hz: fs / n as f64,
        n_samples: n,
    })
}

/// Indices of the bins whose frequency lies in `[low, high]`, inclusive up
/// to float round-off.
fn in_band_bins(spec: &SpectrumEstimate, low: f64, high: f64) -> Vec<usize> {
    const EPS: f64 = 1e-9;
    (0..spec.values.len())
        .filter(|&k| {
            let f = spec.bin_frequency(k);
            f >= low - EPS && f <= high + EPS
        })
        .collect()
}

/// Maximum of the periodogram over consecutive runs of `window_bins` in-band
/// bins. A trailing run shorter than the window is dropped.
pub fn pool_max(
    spec: &SpectrumEstimate,
    band_low_hz: f64,
    band_high_hz: f64,
    window_bins: usize,
) -> Result<Vec<f64>> {
    if window_bins == 0 {
        return Err(Error::InvalidInput("pooling window must be at least 1 bin".into()));
    }
    let bins = in_band_bins(spec, band_low_hz, band_high_hz);
    if bins.is_empty() {
        return Err(Error::InvalidInput(format!(
            "band {band_low_hz}-{band_high_hz} Hz selects no bins (bin width {} Hz)",
            spec.bin_hz
        )));
    }
    Ok(bins
        .chunks_exact(window_bins)
        .map(|run| {
            run.iter()
                .map(|&k| spec.values[k])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect())
}

fn trim_float(v: f64) -> String {
    // Four decimals absorb accumulated bin-frequency round-off; trailing
    // zeros are stripped so whole numbers read cleanly.
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// Feature names for one channel's pooled windows: "CH:lo-hiHz" where lo/hi
/// are the first and last bin frequencies of each complete window.
fn window_names(channel: &str, spec: &SpectrumEstimate, cfg: &PoolingConfig) -> Vec<String> {
    let bins = in_band_bins(spec, cfg.band_low_hz, cfg.band_high_hz);
    bins.chunks_exact(cfg.window_bins)
        .map(|run| {
            format!(
                "{channel}:{}-{}Hz",
                trim_float(spec.bin_frequency(run[0])),
                trim_float(spec.bin_frequency(*run.last().unwrap()))
            )
        })
        .collect()
}

/// Periodogram + pooling per channel, concatenated in channel order.
pub fn assemble_features(epoch: &Epoch, cfg: &PoolingConfig) -> Result<FeatureVector> {
    let mut values = Vec::new();
    let mut names = Vec::new();
    for (row, channel) in epoch.samples.iter().zip(epoch.channel_names.iter()) {
        let spec = periodogram(row, epoch.sampling_rate_hz)?;
        let pooled = pool_max(&spec, cfg.band_low_hz, cfg.band_high_hz, cfg.window_bins)?;
        names.extend(window_names(channel, &spec, cfg));
        values.extend(pooled);
    }
    debug_assert_eq!(values.len(), names.len());
    Ok(FeatureVector {
        values,
        label: epoch.label,
        feature_names: names.into(),
    })
}
