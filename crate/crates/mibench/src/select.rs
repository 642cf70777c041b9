//! Per-feature Welch t-tests with p-value thresholding.

use std::sync::Arc;

use crate::data::Label;
use crate::error::{Error, Result};
use crate::spectrum::FeatureVector;
use crate::stats::welch_t_test;

/// Outcome of feature selection over one training set.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMask {
    /// Strictly increasing indices into the source feature space.
    pub selected: Vec<usize>,
    pub source_dim: usize,
    /// Two-sided p-value per source feature.
    pub p_values: Vec<f64>,
}

impl FeatureMask {
    /// Keeps every feature of a `dim`-dimensional space.
    pub fn identity(dim: usize) -> FeatureMask {
        FeatureMask {
            selected: (0..dim).collect(),
            source_dim: dim,
            p_values: vec![0.0; dim],
        }
    }

    pub fn project_values(&self, values: &[f64]) -> Vec<f64> {
        self.selected.iter().map(|&i| values[i]).collect()
    }
}

/// When the selection mask is computed relative to the evaluation loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    /// Once, from all available data, before any splitting. Leaks test
    /// information into the mask; kept for comparability with prior results.
    Faithful,
    /// From each repetition's training half only.
    Clean,
}

impl SelectionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SelectionMode::Faithful => "faithful",
            SelectionMode::Clean => "clean",
        }
    }

    pub fn parse(s: &str) -> Option<SelectionMode> {
        match s {
            "faithful" => Some(SelectionMode::Faithful),
            "clean" => Some(SelectionMode::Clean),
            _ => None,
        }
    }
}

/// Runs a Welch t-test per feature between the two classes and keeps the
/// indices with p < `p_threshold`. An empty selection is legal here;
/// trainers reject zero-dimensional input themselves.
pub fn select_features(train: &[FeatureVector], p_threshold: f64) -> Result<FeatureMask> {
    let Some(first) = train.first() else {
        return Err(Error::InvalidInput("feature selection needs training data".into()));
    };
    let dim = first.values.len();
    if train.iter().any(|v| v.values.len() != dim) {
        return Err(Error::InvalidInput(
            "feature selection: vectors disagree on dimensionality".into(),
        ));
    }
    let n0 = train.iter().filter(|v| v.label == Label::Right).count();
    let n1 = train.len() - n0;
    if n0 == 0 || n1 == 0 {
        return Err(Error::InvalidInput(format!(
            "feature selection needs both classes, got {n0} right and {n1} left"
        )));
    }

    let mut selected = Vec::new();
    let mut p_values = Vec::with_capacity(dim);
    let mut a = Vec::with_capacity(n0);
    let mut b = Vec::with_capacity(n1);
    for i in 0..dim {
        a.clear();
        b.clear();
        for v in train {
            match v.label {
                Label::Right => a.push(v.values[i]),
                Label::Left => b.push(v.values[i]),
            }
        }
        let (_t, p) = welch_t_test(&a, &b)?;
        if p < p_threshold {
            selected.push(i);
        }
        p_values.push(p);
    }
    Ok(FeatureMask {
        selected,
        source_dim: dim,
        p_values,
    })
}

/// Restricts one vector to the masked feature subspace.
pub fn apply_mask(v: &FeatureVector, m: &FeatureMask) -> Result<FeatureVector> {
    if v.values.len() != m.source_dim {
        return Err(Error::InvalidInput(format!(
            "mask built over {} features applied to a {}-dimensional vector",
            m.source_dim,
            v.values.len()
        )));
    }
    let names: Arc<[String]> = m
        .selected
        .iter()
        .map(|&i| v.feature_names[i].clone())
        .collect();
    Ok(FeatureVector {
        values: m.project_values(&v.values),
        label: v.label,
        feature_names: names,
    })
}

/// Masks a whole dataset; the output vectors share one feature-name list.
pub fn apply_mask_all(vectors: &[FeatureVector], m: &FeatureMask) -> Result<Vec<FeatureVector>> {
    let Some(first) = vectors.first() else {
        return Ok(Vec::new());
    };
    let template = apply_mask(first, m)?;
    let names = Arc::clone(&template.feature_names);
    let mut out = Vec::with_capacity(vectors.len());
    out.push(template);
    for v in &vectors[1..] {
        if v.values.len() != m.source_dim {
            return Err(Error::InvalidInput(format!(
                "mask built over {} features applied to a {}-dimensional vector",
                m.source_dim,
                v.values.len()
            )));
        }
        out.push(FeatureVector {
            values: m.project_values(&v.values),
            label: v.label,
            feature_names: Arc::clone(&names),
        });
    }
    Ok(out)
}
