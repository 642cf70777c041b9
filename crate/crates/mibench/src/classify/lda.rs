//! Fisher linear discriminant with shrinkage-regularized pooled covariance.

use crate::classify::LabeledSet;
use crate::data::Label;
use crate::error::{Result as CrateResult, TrainError};
use crate::linalg::{cholesky, cholesky_solve, dot};

type Result<T> = std::result::Result<T, TrainError>;

#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    pub w: Vec<f64>,
    pub b: f64,
    pub mean0: Vec<f64>,
    pub mean1: Vec<f64>,
    /// Pooled covariance after shrinkage, row-major d x d.
    pub pooled_cov: Vec<f64>,
    dim: usize,
}

impl LdaModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Signed score; positive values fall on the class-1 side.
    pub fn decision_value(&self, x: &[f64]) -> f64 {
        dot(&self.w, x) + self.b
    }

    /// Decision value 0 maps to class 0.
    pub fn predict(&self, x: &[f64]) -> CrateResult<Label> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(crate::error::Error::InvalidInput(
                "prediction input must be finite".into(),
            ));
        }
        Ok(if self.decision_value(x) > 0.0 {
            Label::Left
        } else {
            Label::Right
        })
    }
}

/// Trains the discriminant. The pooled covariance is the bias-corrected
/// two-class estimate, shrunk toward its scaled identity:
/// (1 - gamma) S + gamma (tr S / d) I.
pub fn train_lda(set: &LabeledSet, shrinkage: f64) -> Result<LdaModel> {
    set.check_trainable()?;
    if !(0.0..=1.0).contains(&shrinkage) || !shrinkage.is_finite() {
        return Err(TrainError::InvalidParam(format!(
            "lda shrinkage must be in [0, 1], got {shrinkage}"
        )));
    }
    for (class, got) in [(0u8, set.n0), (1u8, set.n1)] {
        if got < 2 {
            return Err(TrainError::TooFewPerClass {
                class,
                got,
                required: 2,
            });
        }
    }
    let d = set.dim();
    let mut mean0 = vec![0.0; d];
    let mut mean1 = vec![0.0; d];
    for v in &set.vectors {
        let acc = if v.label == Label::Right { &mut mean0 } else { &mut mean1 };
        for (m, &x) in acc.iter_mut().zip(&v.values) {
            *m += x;
        }
    }
    for m in &mut mean0 {
        *m /= set.n0 as f64;
    }
    for m in &mut mean1 {
        *m /= set.n1 as f64;
    }

    // Pooled scatter over both classes, bias-corrected.
    let mut cov = vec![0.0; d * d];
    let mut centered = vec![0.0; d];
    for v in &set.vectors {
        let mean = if v.label == Label::Right { &mean0 } else { &mean1 };
        for (c, (&x, &m)) in centered.iter_mut().zip(v.values.iter().zip(mean)) {
            *c = x - m;
        }
        for i in 0..d {
            for j in 0..=i {
                cov[i * d + j] += centered[i] * centered[j];
            }
        }
    }
    let denom = (set.len() - 2) as f64;
    for i in 0..d {
        for j in 0..=i {
            cov[i * d + j] /= denom;
            cov[j * d + i] = cov[i * d + j];
        }
    }

    let trace_mean = (0..d).map(|i| cov[i * d + i]).sum::<f64>() / d as f64;
    for i in 0..d {
        for j in 0..d {
            cov[i * d + j] *= 1.0 - shrinkage;
        }
        cov[i * d + i] += shrinkage * trace_mean;
    }

    let Some(l) = cholesky(&cov, d) else {
        return Err(TrainError::Degenerate);
    };
    let diff: Vec<f64> = mean1.iter().zip(&mean0).map(|(a, b)| a - b).collect();
    let w = cholesky_solve(&l, d, &diff);
    let mid: Vec<f64> = mean0.iter().zip(&mean1).map(|(a, b)| 0.5 * (a + b)).collect();
    let b = -dot(&w, &mid);
    if !b.is_finite() || w.iter().any(|v| !v.is_finite()) {
        return Err(TrainError::Degenerate);
    }

    Ok(LdaModel {
        w,
        b,
        mean0,
        mean1,
        pooled_cov: cov,
        dim: d,
    })
}
