//! Trial data model: labels, recordings, protocol timing, channel selection.

mod format;
mod synthetic;

pub use format::{load_trial_set, write_trial_set, FORMAT_VERSION, MAGIC};
pub use synthetic::{generate_synthetic, SyntheticSpec};

use std::sync::Arc;

use crate::error::{Error, Result};

/// Class label. `Right` encodes class 0, `Left` class 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Right = 0,
    Left = 1,
}

impl Label {
    pub const BOTH: [Label; 2] = [Label::Right, Label::Left];

    pub fn class_index(self) -> usize {
        self as usize
    }

    pub fn from_class_index(i: usize) -> Label {
        match i {
            0 => Label::Right,
            1 => Label::Left,
            _ => panic!("class index {i} out of range"),
        }
    }

    /// Parses a manifest label string, case-insensitive.
    pub fn parse(s: &str) -> Option<Label> {
        match s.to_ascii_lowercase().as_str() {
            "right" => Some(Label::Right),
            "left" => Some(Label::Left),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Right => "right",
            Label::Left => "left",
        }
    }

    pub fn opposite(self) -> Label {
        match self {
            Label::Right => Label::Left,
            Label::Left => Label::Right,
        }
    }
}

/// Which sub-interval of the session each stored trial covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoredWindow {
    /// Samples cover exactly the MI task window.
    Task,
    /// Samples start at cue onset; the task begins `cue_s` into the trial.
    CueAndTask,
}

/// Session timing of the recording protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolTiming {
    pub cue_s: f64,
    pub task_s: f64,
    pub rest_s: f64,
    pub stored_window: StoredWindow,
}

impl ProtocolTiming {
    /// Offset of the task-window start within the stored samples, in seconds.
    pub fn task_start_s(&self) -> f64 {
        match self.stored_window {
            StoredWindow::Task => 0.0,
            StoredWindow::CueAndTask => self.cue_s,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cue_s <= 0.0 || self.task_s <= 0.0 || self.rest_s <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "protocol durations must be positive (cue {}, task {}, rest {})",
                self.cue_s, self.task_s, self.rest_s
            )));
        }
        Ok(())
    }
}

impl Default for ProtocolTiming {
    fn default() -> Self {
        ProtocolTiming {
            cue_s: 3.0,
            task_s: 4.0,
            rest_s: 6.0,
            stored_window: StoredWindow::Task,
        }
    }
}

/// One recorded trial: a channels x samples matrix plus identity metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecording {
    pub subject_id: String,
    pub trial_index: u32,
    pub label: Label,
    pub sampling_rate_hz: f64,
    /// Shared across the trials of one set.
    pub channel_names: Arc<[String]>,
    /// Row per channel; rows all share one length.
    pub samples: Vec<Vec<f64>>,
}

impl TrialRecording {
    pub fn n_channels(&self) -> usize {
        self.samples.len()
    }

    pub fn n_samples(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sampling_rate_hz > 0.0) {
            return Err(Error::InvalidInput(format!(
                "trial {}#{}: sampling rate must be positive, got {}",
                self.subject_id, self.trial_index, self.sampling_rate_hz
            )));
        }
        if self.samples.len() != self.channel_names.len() {
            return Err(Error::InvalidInput(format!(
                "trial {}#{}: {} sample rows but {} channel names",
                self.subject_id,
                self.trial_index,
                self.samples.len(),
                self.channel_names.len()
            )));
        }
        let n = self.n_samples();
        if self.samples.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInput(format!(
                "trial {}#{}: ragged sample rows",
                self.subject_id, self.trial_index
            )));
        }
        Ok(())
    }
}

/// An ordered collection of trials sharing one montage and protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSet {
    pub trials: Vec<TrialRecording>,
    pub protocol: ProtocolTiming,
}

impl TrialSet {
    /// Checks the cross-trial invariants: shared sampling rate and channel
    /// names, unique trial indices per subject.
    pub fn validate(&self) -> Result<()> {
        self.protocol.validate()?;
        let Some(first) = self.trials.first() else {
            return Ok(());
        };
        let mut seen = std::collections::HashSet::new();
        for t in &self.trials {
            t.validate()?;
            if t.sampling_rate_hz != first.sampling_rate_hz {
                return Err(Error::InvalidInput(format!(
                    "trial {}#{}: sampling rate {} differs from {}",
                    t.subject_id, t.trial_index, t.sampling_rate_hz, first.sampling_rate_hz
                )));
            }
            if t.channel_names != first.channel_names {
                return Err(Error::InvalidInput(format!(
                    "trial {}#{}: channel names differ across the set",
                    t.subject_id, t.trial_index
                )));
            }
            if !seen.insert((t.subject_id.clone(), t.trial_index)) {
                return Err(Error::InvalidInput(format!(
                    "duplicate trial index {} for subject {}",
                    t.trial_index, t.subject_id
                )));
            }
        }
        Ok(())
    }

    /// Subject ids in first-appearance order.
    pub fn subject_ids(&self) -> Vec<String> {
        let mut out = Vec::new();
        for t in &self.trials {
            if !out.contains(&t.subject_id) {
                out.push(t.subject_id.clone());
            }
        }
        out
    }

    pub fn channel_names(&self) -> Option<&Arc<[String]>> {
        self.trials.first().map(|t| &t.channel_names)
    }
}

/// Restricts every trial to the channels in `keep`, in `keep` order.
pub fn select_channels(set: &TrialSet, keep: &[String]) -> Result<TrialSet> {
    let Some(names) = set.channel_names() else {
        return Ok(set.clone());
    };
    let indices: Vec<usize> = keep
        .iter()
        .map(|name| {
            names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::UnknownChannel(name.clone()))
        })
        .collect::<Result<_>>()?;
    let new_names: Arc<[String]> = keep.to_vec().into();
    let trials = set
        .trials
        .iter()
        .map(|t| TrialRecording {
            subject_id: t.subject_id.clone(),
            trial_index: t.trial_index,
            label: t.label,
            sampling_rate_hz: t.sampling_rate_hz,
            channel_names: Arc::clone(&new_names),
            samples: indices.iter().map(|&i| t.samples[i].clone()).collect(),
        })
        .collect();
    Ok(TrialSet {
        trials,
        protocol: set.protocol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(list: &[&str]) -> Arc<[String]> {
        list.iter().map(|s| s.to_string()).collect()
    }

    fn tiny_set() -> TrialSet {
        let ch = names(&["C3", "CZ", "C4"]);
        let trials = (0..2)
            .map(|i| TrialRecording {
                subject_id: "S01".into(),
                trial_index: i,
                label: if i == 0 { Label::Right } else { Label::Left },
                sampling_rate_hz: 10.0,
                channel_names: Arc::clone(&ch),
                samples: vec![
                    vec![1.0 + i as f64, 2.0],
                    vec![3.0, 4.0],
                    vec![5.0, 6.0 - i as f64],
                ],
            })
            .collect();
        TrialSet {
            trials,
            protocol: ProtocolTiming::default(),
        }
    }

    #[test]
    fn label_round_trip() {
        assert_eq!(Label::parse("LEFT"), Some(Label::Left));
        assert_eq!(Label::parse("right"), Some(Label::Right));
        assert_eq!(Label::parse("up"), None);
        assert_eq!(Label::Right.class_index(), 0);
        assert_eq!(Label::Left.class_index(), 1);
        assert_eq!(Label::parse(Label::Left.as_str()), Some(Label::Left));
    }

    #[test]
    fn select_identity() {
        let set = tiny_set();
        let keep: Vec<String> = set.channel_names().unwrap().to_vec();
        let out = select_channels(&set, &keep).unwrap();
        assert_eq!(out, set);
    }

    #[test]
    fn select_reorders_and_subsets() {
        let set = tiny_set();
        let out = select_channels(&set, &["C4".into(), "C3".into()]).unwrap();
        assert_eq!(out.channel_names().unwrap().as_ref(), &["C4".to_string(), "C3".to_string()]);
        assert_eq!(out.trials[0].samples, vec![vec![5.0, 6.0], vec![1.0, 2.0]]);
        assert!(out.validate().is_ok());
    }

    #[test]
    fn select_unknown_channel_is_named() {
        let set = tiny_set();
        let err = select_channels(&set, &["NOSUCH".into()]).unwrap_err();
        assert!(err.to_string().contains("NOSUCH"), "got: {err}");
    }

    #[test]
    fn select_is_idempotent() {
        let set = tiny_set();
        let keep = vec!["CZ".to_string(), "C3".to_string()];
        let once = select_channels(&set, &keep).unwrap();
        let twice = select_channels(&once, &keep).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn validate_rejects_ragged_rows() {
        let mut set = tiny_set();
        set.trials[1].samples[0].push(9.0);
        assert!(set.validate().is_err());
    }

    #[test]
    fn validate_rejects_duplicate_index() {
        let mut set = tiny_set();
        set.trials[1].trial_index = 0;
        assert!(set.validate().is_err());
    }

    #[test]
    fn task_start_depends_on_stored_window() {
        let mut p = ProtocolTiming::default();
        assert_eq!(p.task_start_s(), 0.0);
        p.stored_window = StoredWindow::CueAndTask;
        assert_eq!(p.task_start_s(), 3.0);
    }
}
