//! Monte-Carlo evaluation: repeated stratified splits, per-n subsampling,
//! training, and held-out accuracy, over subject-specific and
//! subject-independent designs.
//!
//! Every random draw flows from a seed derived by hashing the experiment
//! coordinates (master seed, design, subject, algorithm, n, repetition,
//! stage tag), so results are independent of scheduling and parallelism.

use rayon::prelude::*;

use crate::classify::{train, Algorithm, LabeledSet, TrainParams};
use crate::data::{Label, TrialSet};
use crate::error::{Error, Result, TrainError};
use crate::preprocess::{apply_bandpass, extract_mi_segment, FilterSpec};
use crate::seeds::SeedMixer;
use crate::select::{apply_mask_all, select_features, FeatureMask, SelectionMode};
use crate::spectrum::{assemble_features, FeatureVector, PoolingConfig};

/// Which trials a cell draws on.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Design {
    Ss { subject_id: String },
    Si,
}

impl Design {
    pub fn tag(&self) -> &'static str {
        match self {
            Design::Ss { .. } => "SS",
            Design::Si => "SI",
        }
    }

    pub fn subject(&self) -> Option<&str> {
        match self {
            Design::Ss { subject_id } => Some(subject_id),
            Design::Si => None,
        }
    }
}

/// One experimental condition: a design, an algorithm, and a training size.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentCell {
    pub design: Design,
    pub algorithm: Algorithm,
    pub n: usize,
    pub repetitions: usize,
    pub master_seed: u64,
}

/// Per-cell result. Repetitions that failed to train are listed separately
/// and excluded from the mean and standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracySummary {
    pub cell: ExperimentCell,
    /// (repetition index, accuracy in percent) for successful repetitions.
    pub accuracies: Vec<(usize, f64)>,
    pub failures: Vec<(usize, TrainError)>,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator), 0 below two points.
    pub std: f64,
}

/// Options shared by every cell of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSettings {
    pub mode: SelectionMode,
    pub p_threshold: f64,
    pub params: TrainParams,
    /// Reuse one split per (design, subject) across repetitions instead of
    /// re-splitting each repetition.
    pub fixed_split: bool,
    pub repetitions: usize,
    pub master_seed: u64,
}

/// Everything between raw trials and feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSettings {
    pub filter: FilterSpec,
    pub drop_head_s: f64,
    pub drop_tail_s: f64,
    pub pooling: PoolingConfig,
}

fn shuffled_class_indices<R: rand::Rng>(
    labels: &[Label],
    rng: &mut R,
) -> (Vec<usize>, Vec<usize>) {
    use rand::seq::SliceRandom;
    let mut class0: Vec<usize> = Vec::new();
    let mut class1: Vec<usize> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        match l {
            Label::Right => class0.push(i),
            Label::Left => class1.push(i),
        }
    }
    class0.shuffle(rng);
    class1.shuffle(rng);
    (class0, class1)
}

/// Stratified 50/50 partition of `labels` positions; odd class counts put
/// the extra point in the training side. Both sides come back sorted.
fn split_half_indices<R: rand::Rng>(labels: &[Label], rng: &mut R) -> (Vec<usize>, Vec<usize>) {
    let (class0, class1) = shuffled_class_indices(labels, rng);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [&class0, &class1] {
        let take = class.len().div_ceil(2);
        train.extend_from_slice(&class[..take]);
        test.extend_from_slice(&class[take..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Stratified draw of `n` positions without replacement: class 0 supplies
/// ceil(n/2), class 1 the rest. Output sorted (canonical order).
fn subsample_indices<R: rand::Rng>(
    labels: &[Label],
    n: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let (class0, class1) = shuffled_class_indices(labels, rng);
    let need0 = n.div_ceil(2);
    let need1 = n / 2;
    if need0 > class0.len() || need1 > class1.len() {
        return Err(Error::Eval(format!(
            "subsample of {n} needs {need0}/{need1} per class but only {}/{} available",
            class0.len(),
            class1.len()
        )));
    }
    let mut chosen: Vec<usize> = class0[..need0]
        .iter()
        .chain(&class1[..need1])
        .copied()
        .collect();
    chosen.sort_unstable();
    Ok(chosen)
}

fn labels_of(set: &LabeledSet) -> Vec<Label> {
    set.vectors.iter().map(|v| v.label).collect()
}

fn gather(set: &LabeledSet, idx: &[usize]) -> Result<LabeledSet> {
    LabeledSet::new(idx.iter().map(|&i| set.vectors[i].clone()).collect())
}

/// Stratified 50/50 split into training and test sets, deterministic per
/// seed. Odd class counts favor the training side.
pub fn split_half(data: &LabeledSet, seed: u64) -> Result<(LabeledSet, LabeledSet)> {
    if data.len() < 2 {
        return Err(Error::Eval(format!(
            "cannot split {} points into two halves",
            data.len()
        )));
    }
    let labels = labels_of(data);
    let mut rng = SeedMixer::new(seed).rng();
    let (train, test) = split_half_indices(&labels, &mut rng);
    Ok((gather(data, &train)?, gather(data, &test)?))
}

/// Stratified subsample of `n` points without replacement, deterministic
/// per seed, returned in the input's order.
pub fn subsample(train: &LabeledSet, n: usize, seed: u64) -> Result<LabeledSet> {
    let labels = labels_of(train);
    let mut rng = SeedMixer::new(seed).rng();
    let idx = subsample_indices(&labels, n, &mut rng)?;
    gather(train, &idx)
}

fn cell_mixer(cell: &ExperimentCell, rep: usize) -> SeedMixer {
    SeedMixer::new(cell.master_seed)
        .with_str(cell.design.tag())
        .with_str(cell.design.subject().unwrap_or(""))
        .with_str(cell.algorithm.as_str())
        .with_u64(cell.n as u64)
        .with_u64(rep as u64)
}

/// Seed of the shared split used when `fixed_split` is on: one partition
/// per (design, subject), common to all algorithms, sizes, and repetitions.
fn fixed_split_seed(cell: &ExperimentCell) -> u64 {
    SeedMixer::new(cell.master_seed)
        .with_str(cell.design.tag())
        .with_str(cell.design.subject().unwrap_or(""))
        .with_str("split")
        .finish()
}

/// Runs every repetition of one cell over `pool` and aggregates held-out
/// accuracies. More than 10% failed repetitions abort the cell.
pub fn run_cell(
    pool: &LabeledSet,
    cell: &ExperimentCell,
    settings: &EvalSettings,
) -> Result<AccuracySummary> {
    if cell.repetitions == 0 {
        return Err(Error::Eval("cell has zero repetitions".into()));
    }
    if pool.len() < 2 {
        return Err(Error::Eval(format!(
            "pool for {} has {} trials, need at least 2",
            describe(cell),
            pool.len()
        )));
    }
    let pool_labels = labels_of(pool);
    // Faithful mode mirrors the reproduced protocol: the mask is computed
    // on all data once, before any split.
    let faithful_mask = match settings.mode {
        SelectionMode::Faithful => Some(select_features(&pool.vectors, settings.p_threshold)?),
        SelectionMode::Clean => None,
    };

    let mut accuracies = Vec::with_capacity(cell.repetitions);
    let mut failures: Vec<(usize, TrainError)> = Vec::new();
    for rep in 0..cell.repetitions {
        let split_seed = if settings.fixed_split {
            fixed_split_seed(cell)
        } else {
            cell_mixer(cell, rep).with_str("split").finish()
        };
        let mut split_rng = SeedMixer::new(split_seed).rng();
        let (train_idx, test_idx) = split_half_indices(&pool_labels, &mut split_rng);

        let train_labels: Vec<Label> = train_idx.iter().map(|&i| pool_labels[i]).collect();
        let mask: FeatureMask = match &faithful_mask {
            Some(m) => m.clone(),
            None => {
                let train_half: Vec<FeatureVector> =
                    train_idx.iter().map(|&i| pool.vectors[i].clone()).collect();
                select_features(&train_half, settings.p_threshold)?
            }
        };

        let mut sub_rng = cell_mixer(cell, rep).with_str("subsample").rng();
        let chosen = subsample_indices(&train_labels, cell.n, &mut sub_rng)?;

        let train_vectors: Vec<FeatureVector> = chosen
            .iter()
            .map(|&j| pool.vectors[train_idx[j]].clone())
            .collect();
        let masked_train = apply_mask_all(&train_vectors, &mask)?;
        let train_set = LabeledSet::new(masked_train)?;

        let model = match train(cell.algorithm, &train_set, &settings.params) {
            Ok(m) => m,
            Err(e) => {
                failures.push((rep, e));
                continue;
            }
        };

        let mut correct = 0usize;
        for &i in &test_idx {
            let projected = mask.project_values(&pool.vectors[i].values);
            if model.predict(&projected)? == pool_labels[i] {
                correct += 1;
            }
        }
        accuracies.push((rep, 100.0 * correct as f64 / test_idx.len() as f64));
    }

    if failures.len() * 10 > cell.repetitions {
        let (first_rep, first_err) = &failures[0];
        return Err(Error::Eval(format!(
            "{}: {} of {} repetitions failed to train (first failure at repetition {first_rep}: {first_err})",
            describe(cell),
            failures.len(),
            cell.repetitions
        )));
    }

    let (mean, std) = mean_std(accuracies.iter().map(|&(_, a)| a));
    Ok(AccuracySummary {
        cell: cell.clone(),
        accuracies,
        failures,
        mean,
        std,
    })
}

fn mean_std(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let values: Vec<f64> = values.collect();
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (values.len() - 1) as f64).sqrt())
}

fn describe(cell: &ExperimentCell) -> String {
    match &cell.design {
        Design::Ss { subject_id } => {
            format!("SS {subject_id} {} n={}", cell.algorithm, cell.n)
        }
        Design::Si => format!("SI {} n={}", cell.algorithm, cell.n),
    }
}

/// Feature vectors for every trial, in trial-set order, tagged by subject.
pub fn extract_features(
    trials: &TrialSet,
    pipe: &PipelineSettings,
) -> Result<Vec<(String, FeatureVector)>> {
    trials
        .trials
        .par_iter()
        .map(|trial| {
            let epoch = extract_mi_segment(
                trial,
                &trials.protocol,
                pipe.drop_head_s,
                pipe.drop_tail_s,
            )?;
            let filtered = apply_bandpass(&epoch, &pipe.filter)?;
            let vector = assemble_features(&filtered, &pipe.pooling)?;
            Ok((trial.subject_id.clone(), vector))
        })
        .collect()
}

/// SS or SI sweep request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignKind {
    Ss,
    Si,
}

/// A cell that either summarized or failed; failed cells carry the reason
/// so a sweep never silently drops a condition.
#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    Done(AccuracySummary),
    Failed { cell: ExperimentCell, reason: String },
}

impl CellOutcome {
    pub fn cell(&self) -> &ExperimentCell {
        match self {
            CellOutcome::Done(s) => &s.cell,
            CellOutcome::Failed { cell, .. } => cell,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignRun {
    pub kind: DesignKind,
    pub outcomes: Vec<CellOutcome>,
}

/// Runs the full sweep: (subjects x) algorithms x sizes, each for
/// `settings.repetitions` repetitions. Cell-level training collapses are
/// recorded as failed outcomes; infrastructure errors propagate.
pub fn run_design(
    trials: &TrialSet,
    kind: DesignKind,
    algorithms: &[Algorithm],
    sizes: &[usize],
    pipe: &PipelineSettings,
    settings: &EvalSettings,
) -> Result<DesignRun> {
    if algorithms.is_empty() || sizes.is_empty() {
        return Err(Error::Eval("empty algorithm or size list".into()));
    }
    let features = extract_features(trials, pipe)?;

    // Pools of feature-vector indices, one per design unit.
    let pools: Vec<(Design, Vec<usize>)> = match kind {
        DesignKind::Si => vec![(Design::Si, (0..features.len()).collect())],
        DesignKind::Ss => trials
            .subject_ids()
            .into_iter()
            .map(|subject_id| {
                let idx: Vec<usize> = features
                    .iter()
                    .enumerate()
                    .filter(|(_, (s, _))| *s == subject_id)
                    .map(|(i, _)| i)
                    .collect();
                (Design::Ss { subject_id }, idx)
            })
            .collect(),
    };

    // Every size must be drawable from the training half of its pool.
    let max_n = *sizes.iter().max().unwrap();
    for (design, idx) in &pools {
        let n1 = idx
            .iter()
            .filter(|&&i| features[i].1.label == Label::Left)
            .count();
        let n0 = idx.len() - n1;
        let have0 = n0.div_ceil(2);
        let have1 = n1.div_ceil(2);
        if max_n.div_ceil(2) > have0 || max_n / 2 > have1 {
            return Err(Error::Eval(format!(
                "{} pool has {n0}+{n1} trials; training half {have0}+{have1} cannot supply n={max_n}",
                design.subject().unwrap_or("SI"),
            )));
        }
    }

    let mut jobs: Vec<(ExperimentCell, &[usize])> = Vec::new();
    for (design, idx) in &pools {
        for &algorithm in algorithms {
            for &n in sizes {
                jobs.push((
                    ExperimentCell {
                        design: design.clone(),
                        algorithm,
                        n,
                        repetitions: settings.repetitions,
                        master_seed: settings.master_seed,
                    },
                    idx.as_slice(),
                ));
            }
        }
    }

    let outcomes: Vec<CellOutcome> = jobs
        .par_iter()
        .map(|(cell, idx)| {
            let pool = match LabeledSet::new(
                idx.iter().map(|&i| features[i].1.clone()).collect(),
            ) {
                Ok(p) => p,
                Err(e) => {
                    return CellOutcome::Failed {
                        cell: cell.clone(),
                        reason: e.to_string(),
                    }
                }
            };
            match run_cell(&pool, cell, settings) {
                Ok(summary) => CellOutcome::Done(summary),
                Err(e) => CellOutcome::Failed {
                    cell: cell.clone(),
                    reason: e.to_string(),
                },
            }
        })
        .collect();

    Ok(DesignRun { kind, outcomes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, SyntheticSpec};
    use crate::preprocess::design_butterworth;
    use std::sync::Arc;

    fn toy_set_sep(n0: usize, n1: usize, seed: u64, separation: f64) -> LabeledSet {
        use rand::Rng;
        let mut rng = SeedMixer::new(seed).rng();
        let names: Arc<[String]> = vec!["A".to_string(), "B".to_string()].into();
        let mut vectors = Vec::new();
        for i in 0..n0 + n1 {
            let label = if i < n0 { Label::Right } else { Label::Left };
            let off = if label == Label::Left { separation } else { -separation };
            vectors.push(FeatureVector {
                values: vec![
                    off + rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ],
                label,
                feature_names: Arc::clone(&names),
            });
        }
        LabeledSet::new(vectors).unwrap()
    }

    fn toy_set(n0: usize, n1: usize, seed: u64) -> LabeledSet {
        toy_set_sep(n0, n1, seed, 1.5)
    }

    #[test]
    fn split_is_stratified_and_exhaustive() {
        let data = toy_set(400, 400, 1);
        let (train, test) = split_half(&data, 7).unwrap();
        assert_eq!(train.len(), 400);
        assert_eq!(test.len(), 400);
        assert_eq!((train.n0, train.n1), (200, 200));
        assert_eq!((test.n0, test.n1), (200, 200));

        let small = toy_set(20, 20, 2);
        let (train, test) = split_half(&small, 7).unwrap();
        assert_eq!((train.len(), test.len()), (20, 20));
    }

    #[test]
    fn odd_class_counts_favor_training() {
        let data = toy_set(7, 4, 3);
        let (train, test) = split_half(&data, 1).unwrap();
        assert_eq!((train.n0, test.n0), (4, 3));
        assert_eq!((train.n1, test.n1), (2, 2));
    }

    #[test]
    fn split_is_deterministic_and_seed_sensitive() {
        let data = toy_set(30, 30, 4);
        let a = split_half(&data, 11).unwrap();
        let b = split_half(&data, 11).unwrap();
        assert_eq!(a, b);
        let c = split_half(&data, 12).unwrap();
        assert_ne!(a, c);
        assert!(split_half(&toy_set(1, 0, 0), 1).is_err());
    }

    #[test]
    fn split_disjointness_by_identity() {
        // Unique values act as trial identities.
        let names: Arc<[String]> = vec!["id".to_string()].into();
        let vectors: Vec<FeatureVector> = (0..41)
            .map(|i| FeatureVector {
                values: vec![i as f64],
                label: if i % 2 == 0 { Label::Right } else { Label::Left },
                feature_names: Arc::clone(&names),
            })
            .collect();
        let data = LabeledSet::new(vectors).unwrap();
        for seed in 0..20 {
            let (train, test) = split_half(&data, seed).unwrap();
            let mut seen: Vec<i64> = train
                .vectors
                .iter()
                .chain(&test.vectors)
                .map(|v| v.values[0] as i64)
                .collect();
            seen.sort_unstable();
            assert_eq!(seen, (0..41).collect::<Vec<i64>>(), "seed {seed}");
        }
    }

    #[test]
    fn subsample_counts_and_identity() {
        let data = toy_set(10, 10, 5);
        let sub = subsample(&data, 10, 3).unwrap();
        assert_eq!((sub.n0, sub.n1), (5, 5));
        // Odd n: the extra point goes to class 0.
        let sub = subsample(&data, 15, 3).unwrap();
        assert_eq!((sub.n0, sub.n1), (8, 7));
        // n equal to the set size returns the whole set in input order.
        let all = subsample(&data, 20, 9).unwrap();
        assert_eq!(all, data);
        // Too large is an error.
        assert!(subsample(&data, 21, 3).is_err());
        // Different seeds give different subsets on a set this size.
        let a = subsample(&data, 10, 1).unwrap();
        let b = subsample(&data, 10, 2).unwrap();
        assert_ne!(a, b);
    }

    fn settings(mode: SelectionMode, reps: usize, seed: u64) -> EvalSettings {
        EvalSettings {
            mode,
            p_threshold: 0.05,
            params: TrainParams::default(),
            fixed_split: false,
            repetitions: reps,
            master_seed: seed,
        }
    }

    fn cell(algorithm: Algorithm, n: usize, reps: usize, seed: u64) -> ExperimentCell {
        ExperimentCell {
            design: Design::Si,
            algorithm,
            n,
            repetitions: reps,
            master_seed: seed,
        }
    }

    #[test]
    fn cell_on_separated_data_scores_high() {
        let pool = toy_set(60, 60, 6);
        let summary = run_cell(
            &pool,
            &cell(Algorithm::Lda, 20, 20, 42),
            &settings(SelectionMode::Clean, 20, 42),
        )
        .unwrap();
        assert_eq!(summary.accuracies.len(), 20);
        assert!(summary.failures.is_empty());
        assert!(summary.mean > 85.0, "mean {}", summary.mean);
        for &(_, a) in &summary.accuracies {
            assert!((0.0..=100.0).contains(&a));
        }
        // Aggregates recompute from the stored list.
        let (m, s) = mean_std(summary.accuracies.iter().map(|&(_, a)| a));
        assert!((m - summary.mean).abs() < 1e-12);
        assert!((s - summary.std).abs() < 1e-12);
    }

    #[test]
    fn cell_is_deterministic() {
        let pool = toy_set(40, 40, 8);
        let c = cell(Algorithm::Svm, 16, 10, 7);
        let s = settings(SelectionMode::Faithful, 10, 7);
        assert_eq!(run_cell(&pool, &c, &s).unwrap(), run_cell(&pool, &c, &s).unwrap());
    }

    #[test]
    fn fixed_split_reuses_one_partition() {
        // Overlapping classes, so held-out accuracy depends on the split.
        // The vacuous threshold keeps selection out of the picture.
        let pool = toy_set_sep(30, 30, 9, 0.35);
        let mut s = settings(SelectionMode::Clean, 6, 3);
        s.p_threshold = 1.1;
        s.fixed_split = true;
        // With a fixed split and n equal to the full training half, every
        // repetition trains on the same data: all accuracies equal.
        let summary = run_cell(&pool, &cell(Algorithm::Lda, 30, 6, 3), &s).unwrap();
        let first = summary.accuracies[0].1;
        for &(_, a) in &summary.accuracies {
            assert_eq!(a, first);
        }
        // Re-splitting per repetition does not collapse like that.
        s.fixed_split = false;
        let varied = run_cell(&pool, &cell(Algorithm::Lda, 30, 6, 3), &s).unwrap();
        let spread = varied
            .accuracies
            .iter()
            .any(|&(_, a)| a != varied.accuracies[0].1);
        assert!(spread, "independent splits should vary: {varied:?}");
    }

    #[test]
    fn failure_tolerance_boundary() {
        // kNN with k = 5 fails whenever the subsample has under 5 points;
        // here n = 4 < k so every repetition fails.
        let pool = toy_set(10, 10, 10);
        let mut s = settings(SelectionMode::Clean, 10, 1);
        s.params.knn_k = 5;
        let err = run_cell(&pool, &cell(Algorithm::Knn, 4, 10, 1), &s).unwrap_err();
        assert!(matches!(err, Error::Eval(_)), "{err}");
    }

    #[test]
    fn si_design_shapes_and_order() {
        let spec = SyntheticSpec {
            n_subjects: 4,
            trials_per_class: 10,
            n_channels: 2,
            duration_s: 1.0,
            ..SyntheticSpec::default()
        };
        let trials = generate_synthetic(&spec, 11).unwrap();
        let pipe = PipelineSettings {
            filter: design_butterworth(4, 3.0, 35.0, spec.sampling_rate_hz).unwrap(),
            drop_head_s: 0.0,
            drop_tail_s: 0.0,
            pooling: PoolingConfig::default(),
        };
        let s = settings(SelectionMode::Faithful, 4, 5);
        let run = run_design(
            &trials,
            DesignKind::Si,
            &Algorithm::ALL,
            &[10, 20],
            &pipe,
            &s,
        )
        .unwrap();
        assert_eq!(run.outcomes.len(), 8);
        // Order: algorithms in given order, sizes inner.
        let got: Vec<(Algorithm, usize)> = run
            .outcomes
            .iter()
            .map(|o| (o.cell().algorithm, o.cell().n))
            .collect();
        let want: Vec<(Algorithm, usize)> = Algorithm::ALL
            .iter()
            .flat_map(|&a| [(a, 10), (a, 20)])
            .collect();
        assert_eq!(got, want);
        for o in &run.outcomes {
            match o {
                CellOutcome::Done(s) => assert_eq!(s.accuracies.len() + s.failures.len(), 4),
                CellOutcome::Failed { cell, reason } => {
                    panic!("{} failed: {reason}", describe(cell))
                }
            }
        }
    }

    #[test]
    fn ss_design_iterates_subjects() {
        let spec = SyntheticSpec {
            n_subjects: 3,
            trials_per_class: 8,
            n_channels: 2,
            duration_s: 1.0,
            ..SyntheticSpec::default()
        };
        let trials = generate_synthetic(&spec, 12).unwrap();
        let pipe = PipelineSettings {
            filter: design_butterworth(4, 3.0, 35.0, spec.sampling_rate_hz).unwrap(),
            drop_head_s: 0.0,
            drop_tail_s: 0.0,
            pooling: PoolingConfig::default(),
        };
        let s = settings(SelectionMode::Faithful, 3, 5);
        let run = run_design(
            &trials,
            DesignKind::Ss,
            &[Algorithm::Lda],
            &[8],
            &pipe,
            &s,
        )
        .unwrap();
        assert_eq!(run.outcomes.len(), 3);
        let subjects: Vec<&str> = run
            .outcomes
            .iter()
            .map(|o| o.cell().design.subject().unwrap())
            .collect();
        assert_eq!(subjects, vec!["S01", "S02", "S03"]);
        // Oversized n is rejected up front, not flushed per cell.
        let err = run_design(
            &trials,
            DesignKind::Ss,
            &[Algorithm::Lda],
            &[8, 99],
            &pipe,
            &s,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Eval(_)), "{err}");
    }

    #[test]
    fn parallel_and_serial_runs_agree() {
        let spec = SyntheticSpec {
            n_subjects: 4,
            trials_per_class: 10,
            n_channels: 2,
            duration_s: 1.0,
            ..SyntheticSpec::default()
        };
        let trials = generate_synthetic(&spec, 21).unwrap();
        let pipe = PipelineSettings {
            filter: design_butterworth(4, 3.0, 35.0, spec.sampling_rate_hz).unwrap(),
            drop_head_s: 0.0,
            drop_tail_s: 0.0,
            pooling: PoolingConfig::default(),
        };
        let s = settings(SelectionMode::Clean, 5, 99);
        let go = || {
            run_design(
                &trials,
                DesignKind::Si,
                &Algorithm::ALL,
                &[10, 20],
                &pipe,
                &s,
            )
            .unwrap()
        };
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let serial = single.install(go);
        let parallel = go();
        assert_eq!(serial, parallel);
    }

    /// Larger training subsamples should score better. Run on a weak
    /// contrast so no algorithm saturates; the margin is the qualitative
    /// finding the whole harness exists to measure.
    #[test]
    fn accuracy_grows_with_sample_size() {
        let spec = SyntheticSpec {
            n_subjects: 10,
            trials_per_class: 20,
            n_channels: 8,
            duration_s: 2.0,
            contrast_amplitude: 0.15,
            ..SyntheticSpec::default()
        };
        let trials = generate_synthetic(&spec, 31).unwrap();
        let pipe = PipelineSettings {
            filter: design_butterworth(4, 3.0, 35.0, spec.sampling_rate_hz).unwrap(),
            drop_head_s: 0.0,
            drop_tail_s: 0.0,
            pooling: PoolingConfig::default(),
        };
        // A permissive threshold lets noise windows through, so the
        // discriminant has enough dimensions for n = 50 to hurt.
        let mut s = settings(SelectionMode::Faithful, 100, 404);
        s.p_threshold = 0.4;
        let run = run_design(
            &trials,
            DesignKind::Si,
            &[Algorithm::Lda],
            &[50, 200],
            &pipe,
            &s,
        )
        .unwrap();
        let mean_at = |n: usize| -> f64 {
            run.outcomes
                .iter()
                .find_map(|o| match o {
                    CellOutcome::Done(s) if s.cell.n == n => Some(s.mean),
                    _ => None,
                })
                .unwrap()
        };
        let small = mean_at(50);
        let large = mean_at(200);
        assert!(
            large >= small + 2.0,
            "n=200 mean {large:.2} should beat n=50 mean {small:.2} by 2 points"
        );
    }
}
