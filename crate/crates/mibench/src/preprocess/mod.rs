//! Epoch extraction and band-pass preprocessing.

mod butter;

pub use butter::{design_butterworth, filtfilt, Biquad, FilterSpec};

use std::sync::Arc;

use crate::data::{Label, ProtocolTiming, TrialRecording};
use crate::error::{Error, Result};

/// A task-window segment of one trial, ready for feature extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    pub subject_id: String,
    pub trial_index: u32,
    pub label: Label,
    pub sampling_rate_hz: f64,
    pub channel_names: Arc<[String]>,
    /// Row per channel.
    pub samples: Vec<Vec<f64>>,
}

/// Cuts the motor-imagery segment out of a stored trial: the task window
/// with `drop_head_s` removed from its start and `drop_tail_s` from its end.
pub fn extract_mi_segment(
    trial: &TrialRecording,
    protocol: &ProtocolTiming,
    drop_head_s: f64,
    drop_tail_s: f64,
) -> Result<Epoch> {
    if drop_head_s < 0.0 || drop_tail_s < 0.0 {
        return Err(Error::InvalidInput(format!(
            "drop durations must be non-negative, got {drop_head_s} and {drop_tail_s}"
        )));
    }
    if drop_head_s + drop_tail_s >= protocol.task_s {
        return Err(Error::InvalidInput(format!(
            "dropping {drop_head_s} + {drop_tail_s} s exceeds the {} s task window",
            protocol.task_s
        )));
    }
    let fs = trial.sampling_rate_hz;
    let t0 = protocol.task_start_s() + drop_head_s;
    let t1 = protocol.task_start_s() + protocol.task_s - drop_tail_s;
    let start = (t0 * fs).round() as usize;
    let end = (t1 * fs).round() as usize;
    if end > trial.n_samples() {
        return Err(Error::InvalidInput(format!(
            "trial {}#{} stores {} samples but the task window needs {}",
            trial.subject_id,
            trial.trial_index,
            trial.n_samples(),
            end
        )));
    }
    let samples: Vec<Vec<f64>> = trial
        .samples
        .iter()
        .map(|row| row[start..end].to_vec())
        .collect();
    if samples
        .iter()
        .any(|row| row.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::InvalidInput(format!(
            "trial {}#{} contains non-finite samples in the task window",
            trial.subject_id, trial.trial_index
        )));
    }
    Ok(Epoch {
        subject_id: trial.subject_id.clone(),
        trial_index: trial.trial_index,
        label: trial.label,
        sampling_rate_hz: fs,
        channel_names: Arc::clone(&trial.channel_names),
        samples,
    })
}

/// Applies the band-pass to every channel of the epoch, zero-phase.
pub fn apply_bandpass(epoch: &Epoch, filt: &FilterSpec) -> Result<Epoch> {
    if epoch.sampling_rate_hz != filt.sampling_rate_hz {
        return Err(Error::InvalidInput(format!(
            "epoch sampled at {} Hz but filter designed for {} Hz",
            epoch.sampling_rate_hz, filt.sampling_rate_hz
        )));
    }
    let samples = epoch
        .samples
        .iter()
        .map(|row| filtfilt(filt, row))
        .collect::<Result<_>>()?;
    Ok(Epoch {
        samples,
        channel_names: Arc::clone(&epoch.channel_names),
        subject_id: epoch.subject_id.clone(),
        ..epoch.clone()
    })
}
