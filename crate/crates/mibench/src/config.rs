//! Line-based `key = value` run configuration.
//!
//! Every knob of the pipeline lives here with its default. Unknown keys and
//! type mismatches are hard errors naming the offending line; later
//! assignments override earlier ones.

use std::path::{Path, PathBuf};

use crate::classify::{KernelSpec, SigmaSpec, TrainParams};
use crate::data::{Label, ProtocolTiming, StoredWindow, SyntheticSpec};
use crate::error::{Error, Result};
use crate::eval::{DesignKind, EvalSettings, PipelineSettings};
use crate::preprocess::design_butterworth;
use crate::select::SelectionMode;
use crate::spectrum::PoolingConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub filter_order: usize,
    pub filter_low_hz: f64,
    pub filter_high_hz: f64,
    pub drop_head_s: f64,
    pub drop_tail_s: f64,
    pub window_bins: usize,
    pub band_low_hz: f64,
    pub band_high_hz: f64,
    pub p_threshold_ss: f64,
    pub p_threshold_si: f64,
    pub mode: SelectionMode,
    pub lda_shrinkage_ss: f64,
    pub lda_shrinkage_si: f64,
    pub svm_c: f64,
    pub svm_kernel_rbf: bool,
    pub svm_sigma: SigmaSpec,
    pub svm_tol: f64,
    pub cart_min_leaf: usize,
    pub knn_k: usize,
    pub reps: usize,
    pub master_seed: u64,
    pub ss_sizes: Vec<usize>,
    pub si_sizes: Vec<usize>,
    pub fixed_split: bool,
    /// Manifest of the trial corpus; required by run-ss/run-si/ingest-check.
    pub manifest: Option<PathBuf>,
    /// Channels to keep, in order; empty keeps all channels.
    pub channels: Vec<String>,
    pub protocol: ProtocolTiming,
    pub synth: SyntheticSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            filter_order: 4,
            filter_low_hz: 3.0,
            filter_high_hz: 35.0,
            drop_head_s: 1.0,
            drop_tail_s: 0.5,
            window_bins: 10,
            band_low_hz: 3.0,
            band_high_hz: 35.0,
            p_threshold_ss: 0.05,
            p_threshold_si: 0.005,
            mode: SelectionMode::Faithful,
            lda_shrinkage_ss: 0.1,
            lda_shrinkage_si: 0.01,
            svm_c: 1.0,
            svm_kernel_rbf: true,
            svm_sigma: SigmaSpec::Median,
            svm_tol: 1e-3,
            cart_min_leaf: 3,
            knn_k: 3,
            reps: 100,
            master_seed: 42,
            ss_sizes: vec![10, 15, 20],
            si_sizes: vec![100, 150, 200, 250, 300, 350, 400],
            fixed_split: false,
            manifest: None,
            channels: Vec::new(),
            protocol: ProtocolTiming::default(),
            synth: SyntheticSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn train_params(&self, design: DesignKind) -> TrainParams {
        TrainParams {
            lda_shrinkage: match design {
                DesignKind::Ss => self.lda_shrinkage_ss,
                DesignKind::Si => self.lda_shrinkage_si,
            },
            svm_c: self.svm_c,
            svm_kernel: if self.svm_kernel_rbf {
                KernelSpec::Rbf(self.svm_sigma)
            } else {
                KernelSpec::Linear
            },
            svm_tol: self.svm_tol,
            cart_min_leaf: self.cart_min_leaf,
            knn_k: self.knn_k,
        }
    }

    pub fn p_threshold(&self, design: DesignKind) -> f64 {
        match design {
            DesignKind::Ss => self.p_threshold_ss,
            DesignKind::Si => self.p_threshold_si,
        }
    }

    pub fn sizes(&self, design: DesignKind) -> &[usize] {
        match design {
            DesignKind::Ss => &self.ss_sizes,
            DesignKind::Si => &self.si_sizes,
        }
    }

    pub fn eval_settings(&self, design: DesignKind) -> EvalSettings {
        EvalSettings {
            mode: self.mode,
            p_threshold: self.p_threshold(design),
            params: self.train_params(design),
            fixed_split: self.fixed_split,
            repetitions: self.reps,
            master_seed: self.master_seed,
        }
    }

    /// Designs the filter and bundles the preprocessing stages.
    pub fn pipeline(&self) -> Result<PipelineSettings> {
        Ok(PipelineSettings {
            filter: design_butterworth(
                self.filter_order,
                self.filter_low_hz,
                self.filter_high_hz,
                self.synth.sampling_rate_hz,
            )?,
            drop_head_s: self.drop_head_s,
            drop_tail_s: self.drop_tail_s,
            pooling: PoolingConfig {
                band_low_hz: self.band_low_hz,
                band_high_hz: self.band_high_hz,
                window_bins: self.window_bins,
            },
        })
    }

    /// Same, but the filter is designed at `sampling_rate_hz` (the corpus
    /// rate, which need not match the synthetic one).
    pub fn pipeline_at(&self, sampling_rate_hz: f64) -> Result<PipelineSettings> {
        Ok(PipelineSettings {
            filter: design_butterworth(
                self.filter_order,
                self.filter_low_hz,
                self.filter_high_hz,
                sampling_rate_hz,
            )?,
            drop_head_s: self.drop_head_s,
            drop_tail_s: self.drop_tail_s,
            pooling: PoolingConfig {
                band_low_hz: self.band_low_hz,
                band_high_hz: self.band_high_hz,
                window_bins: self.window_bins,
            },
        })
    }

    /// Canonical `key = value` rendering of every setting; parsing it back
    /// reproduces this configuration.
    pub fn snapshot(&self) -> String {
        let sigma = match self.svm_sigma {
            SigmaSpec::Median => "median".to_string(),
            SigmaSpec::Fixed(v) => format!("{v}"),
        };
        let join = |v: &[usize]| {
            v.iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let stored = match self.protocol.stored_window {
            StoredWindow::Task => "task",
            StoredWindow::CueAndTask => "cue_and_task",
        };
        format!(
            "filter.order = {}\n\
             filter.low_hz = {}\n\
             filter.high_hz = {}\n\
             segment.drop_head_s = {}\n\
             segment.drop_tail_s = {}\n\
             feature.window_bins = {}\n\
             feature.band_low_hz = {}\n\
             feature.band_high_hz = {}\n\
             select.p_threshold_ss = {}\n\
             select.p_threshold_si = {}\n\
             select.mode = {}\n\
             lda.shrinkage_ss = {}\n\
             lda.shrinkage_si = {}\n\
             svm.c = {}\n\
             svm.kernel = {}\n\
             svm.sigma = {sigma}\n\
             svm.tol = {}\n\
             cart.min_leaf = {}\n\
             knn.k = {}\n\
             eval.reps = {}\n\
             eval.master_seed = {}\n\
             eval.ss_sizes = {}\n\
             eval.si_sizes = {}\n\
             eval.fixed_split = {}\n\
             data.manifest = {}\n\
             data.channels = {}\n\
             protocol.cue_s = {}\n\
             protocol.task_s = {}\n\
             protocol.rest_s = {}\n\
             protocol.stored_window = {stored}\n\
             synth.n_subjects = {}\n\
             synth.trials_per_class = {}\n\
             synth.n_channels = {}\n\
             synth.duration_s = {}\n\
             synth.sampling_rate_hz = {}\n\
             synth.contrast_freq_hz = {}\n\
             synth.contrast_amplitude = {}\n\
             synth.noise_std = {}\n\
             synth.contrast_channels = {}\n\
             synth.contrast_class = {}\n",
            self.filter_order,
            self.filter_low_hz,
            self.filter_high_hz,
            self.drop_head_s,
            self.drop_tail_s,
            self.window_bins,
            self.band_low_hz,
            self.band_high_hz,
            self.p_threshold_ss,
            self.p_threshold_si,
            self.mode.as_str(),
            self.lda_shrinkage_ss,
            self.lda_shrinkage_si,
            self.svm_c,
            if self.svm_kernel_rbf { "rbf" } else { "linear" },
            self.svm_tol,
            self.cart_min_leaf,
            self.knn_k,
            self.reps,
            self.master_seed,
            join(&self.ss_sizes),
            join(&self.si_sizes),
            self.fixed_split,
            self.manifest
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
            self.channels.join(","),
            self.protocol.cue_s,
            self.protocol.task_s,
            self.protocol.rest_s,
            self.synth.n_subjects,
            self.synth.trials_per_class,
            self.synth.n_channels,
            self.synth.duration_s,
            self.synth.sampling_rate_hz,
            self.synth.contrast_freq_hz,
            self.synth.contrast_amplitude,
            self.synth.noise_std,
            self.synth.contrast_channels,
            self.synth.contrast_class.as_str(),
        )
    }
}

fn bad(line: usize, detail: impl Into<String>) -> Error {
    Error::Config {
        line,
        detail: detail.into(),
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, value: &str, kind: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| bad(line, format!("{key} expects {kind}, got \"{value}\"")))
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(bad(line, format!("{key} expects true or false, got \"{value}\""))),
    }
}

fn parse_usize_list(line: usize, key: &str, value: &str) -> Result<Vec<usize>> {
    let inner = value
        .trim()
        .trim_start_matches('[')
        .trim_end_matches(']');
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num::<usize>(line, key, s, "a list of non-negative integers"))
        .collect()
}

fn parse_string_list(value: &str) -> Vec<String> {
    value
        .trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Applies one assignment to the config in place.
fn apply(cfg: &mut RunConfig, line: usize, key: &str, value: &str) -> Result<()> {
    match key {
        "filter.order" => cfg.filter_order = parse_num(line, key, value, "an integer")?,
        "filter.low_hz" => cfg.filter_low_hz = parse_num(line, key, value, "a real")?,
        "filter.high_hz" => cfg.filter_high_hz = parse_num(line, key, value, "a real")?,
        "segment.drop_head_s" => cfg.drop_head_s = parse_num(line, key, value, "a real")?,
        "segment.drop_tail_s" => cfg.drop_tail_s = parse_num(line, key, value, "a real")?,
        "feature.window_bins" => cfg.window_bins = parse_num(line, key, value, "an integer")?,
        "feature.band_low_hz" => cfg.band_low_hz = parse_num(line, key, value, "a real")?,
        "feature.band_high_hz" => cfg.band_high_hz = parse_num(line, key, value, "a real")?,
        "select.p_threshold_ss" => cfg.p_threshold_ss = parse_num(line, key, value, "a real")?,
        "select.p_threshold_si" => cfg.p_threshold_si = parse_num(line, key, value, "a real")?,
        "select.mode" => {
            cfg.mode = SelectionMode::parse(value)
                .ok_or_else(|| bad(line, format!("select.mode expects faithful or clean, got \"{value}\"")))?;
        }
        "lda.shrinkage_ss" => cfg.lda_shrinkage_ss = parse_num(line, key, value, "a real")?,
        "lda.shrinkage_si" => cfg.lda_shrinkage_si = parse_num(line, key, value, "a real")?,
        "svm.c" => cfg.svm_c = parse_num(line, key, value, "a real")?,
        "svm.kernel" => {
            cfg.svm_kernel_rbf = match value {
                "rbf" => true,
                "linear" => false,
                _ => return Err(bad(line, format!("svm.kernel expects linear or rbf, got \"{value}\""))),
            };
        }
        "svm.sigma" => {
            cfg.svm_sigma = if value == "median" {
                SigmaSpec::Median
            } else {
                SigmaSpec::Fixed(parse_num(line, key, value, "median or a real")?)
            };
        }
        "svm.tol" => cfg.svm_tol = parse_num(line, key, value, "a real")?,
        "cart.min_leaf" => cfg.cart_min_leaf = parse_num(line, key, value, "an integer")?,
        "knn.k" => cfg.knn_k = parse_num(line, key, value, "an integer")?,
        "eval.reps" => cfg.reps = parse_num(line, key, value, "an integer")?,
        "eval.master_seed" => cfg.master_seed = parse_num(line, key, value, "an integer")?,
        "eval.ss_sizes" => cfg.ss_sizes = parse_usize_list(line, key, value)?,
        "eval.si_sizes" => cfg.si_sizes = parse_usize_list(line, key, value)?,
        "eval.fixed_split" => cfg.fixed_split = parse_bool(line, key, value)?,
        "data.manifest" => {
            cfg.manifest = if value.is_empty() {
                None
            } else {
                Some(PathBuf::from(value))
            };
        }
        "data.channels" => cfg.channels = parse_string_list(value),
        "protocol.cue_s" => cfg.protocol.cue_s = parse_num(line, key, value, "a real")?,
        "protocol.task_s" => cfg.protocol.task_s = parse_num(line, key, value, "a real")?,
        "protocol.rest_s" => cfg.protocol.rest_s = parse_num(line, key, value, "a real")?,
        "protocol.stored_window" => {
            cfg.protocol.stored_window = match value {
                "task" => StoredWindow::Task,
                "cue_and_task" => StoredWindow::CueAndTask,
                _ => {
                    return Err(bad(
                        line,
                        format!("protocol.stored_window expects task or cue_and_task, got \"{value}\""),
                    ))
                }
            };
        }
        "synth.n_subjects" => cfg.synth.n_subjects = parse_num(line, key, value, "an integer")?,
        "synth.trials_per_class" => {
            cfg.synth.trials_per_class = parse_num(line, key, value, "an integer")?;
        }
        "synth.n_channels" => cfg.synth.n_channels = parse_num(line, key, value, "an integer")?,
        "synth.duration_s" => cfg.synth.duration_s = parse_num(line, key, value, "a real")?,
        "synth.sampling_rate_hz" => {
            cfg.synth.sampling_rate_hz = parse_num(line, key, value, "a real")?;
        }
        "synth.contrast_freq_hz" => {
            cfg.synth.contrast_freq_hz = parse_num(line, key, value, "a real")?;
        }
        "synth.contrast_amplitude" => {
            cfg.synth.contrast_amplitude = parse_num(line, key, value, "a real")?;
        }
        "synth.noise_std" => cfg.synth.noise_std = parse_num(line, key, value, "a real")?,
        "synth.contrast_channels" => {
            cfg.synth.contrast_channels = parse_num(line, key, value, "an integer")?;
        }
        "synth.contrast_class" => {
            cfg.synth.contrast_class = Label::parse(value)
                .ok_or_else(|| bad(line, format!("synth.contrast_class expects left or right, got \"{value}\"")))?;
        }
        _ => return Err(bad(line, format!("unknown key \"{key}\""))),
    }
    Ok(())
}

/// Parses configuration text. Lines are `key = value`; `#` starts a
/// comment; blank lines are ignored; later assignments win.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(bad(line, format!("expected key = value, got \"{content}\"")));
        };
        apply(&mut cfg, line, key.trim(), value.trim())?;
    }
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = parse_config_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.filter_order, 4);
        assert_eq!(cfg.si_sizes, vec![100, 150, 200, 250, 300, 350, 400]);
    }

    #[test]
    fn comments_blanks_and_overrides() {
        let cfg = parse_config_str(
            "# a comment\n\
             \n\
             cart.min_leaf = 5\n\
             knn.k = 7   # trailing comment\n\
             cart.min_leaf = 3\n",
        )
        .unwrap();
        assert_eq!(cfg.cart_min_leaf, 3);
        assert_eq!(cfg.knn_k, 7);
    }

    #[test]
    fn type_error_names_the_line() {
        let err = parse_config_str("eval.reps = 10\nsvm.c = banana\n").unwrap_err();
        match err {
            Error::Config { line, detail } => {
                assert_eq!(line, 2);
                assert!(detail.contains("banana"), "{detail}");
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let err = parse_config_str("svm.gamma = 1.0\n").unwrap_err();
        match err {
            Error::Config { line, detail } => {
                assert_eq!(line, 1);
                assert!(detail.contains("svm.gamma"), "{detail}");
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn missing_equals_rejected() {
        assert!(parse_config_str("knn.k 3\n").is_err());
    }

    #[test]
    fn lists_parse_with_or_without_brackets() {
        let cfg = parse_config_str("eval.ss_sizes = [4, 8]\neval.si_sizes = 10,20,30\n").unwrap();
        assert_eq!(cfg.ss_sizes, vec![4, 8]);
        assert_eq!(cfg.si_sizes, vec![10, 20, 30]);
        let cfg = parse_config_str("data.channels = C3, C4, Cz\n").unwrap();
        assert_eq!(cfg.channels, vec!["C3", "C4", "Cz"]);
    }

    #[test]
    fn enums_and_modes() {
        let cfg = parse_config_str(
            "select.mode = clean\n\
             svm.kernel = linear\n\
             svm.sigma = 2.5\n\
             protocol.stored_window = cue_and_task\n\
             synth.contrast_class = RIGHT\n\
             eval.fixed_split = true\n",
        )
        .unwrap();
        assert_eq!(cfg.mode, SelectionMode::Clean);
        assert!(!cfg.svm_kernel_rbf);
        assert_eq!(cfg.svm_sigma, SigmaSpec::Fixed(2.5));
        assert_eq!(cfg.protocol.stored_window, StoredWindow::CueAndTask);
        assert_eq!(cfg.synth.contrast_class, Label::Right);
        assert!(cfg.fixed_split);
        assert!(parse_config_str("select.mode = magic\n").is_err());
        assert!(parse_config_str("svm.kernel = poly\n").is_err());
    }

    #[test]
    fn design_specific_values() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.p_threshold(DesignKind::Ss), 0.05);
        assert_eq!(cfg.p_threshold(DesignKind::Si), 0.005);
        assert_eq!(cfg.train_params(DesignKind::Ss).lda_shrinkage, 0.1);
        assert_eq!(cfg.train_params(DesignKind::Si).lda_shrinkage, 0.01);
        assert_eq!(
            cfg.train_params(DesignKind::Si).svm_kernel,
            KernelSpec::Rbf(SigmaSpec::Median)
        );
    }

    #[test]
    fn snapshot_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.manifest = Some(PathBuf::from("/data/corpus/manifest.csv"));
        cfg.channels = vec!["C3".into(), "C4".into()];
        cfg.svm_sigma = SigmaSpec::Fixed(1.25);
        cfg.mode = SelectionMode::Clean;
        cfg.master_seed = 987654321;
        cfg.fixed_split = true;
        let text = cfg.snapshot();
        let back = parse_config_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn pipeline_builds_from_defaults() {
        let cfg = RunConfig::default();
        let pipe = cfg.pipeline().unwrap();
        assert_eq!(pipe.filter.order, 4);
        assert_eq!(pipe.pooling.window_bins, 10);
        assert_eq!(pipe.drop_head_s, 1.0);
    }
}
