//! The four classification algorithms behind one train/predict contract.

mod cart;
mod knn;
mod lda;
mod svm;

pub use cart::{train_cart, CartModel, CartNode};
pub use knn::{train_knn, KnnModel};
pub use lda::{train_lda, LdaModel};
pub use svm::{kkt_certificate, train_svm, Kernel, KernelSpec, KktReport, SigmaSpec, SvmModel};

use std::sync::Arc;

use crate::data::Label;
use crate::error::{Error, Result, TrainError};
use crate::spectrum::FeatureVector;

/// A training or evaluation dataset with cached per-class counts.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub vectors: Vec<FeatureVector>,
    pub n0: usize,
    pub n1: usize,
}

impl LabeledSet {
    pub fn new(vectors: Vec<FeatureVector>) -> Result<LabeledSet> {
        if let Some(first) = vectors.first() {
            let dim = first.values.len();
            if vectors.iter().any(|v| v.values.len() != dim) {
                return Err(Error::InvalidInput(
                    "labeled set: vectors disagree on dimensionality".into(),
                ));
            }
        }
        let n0 = vectors.iter().filter(|v| v.label == Label::Right).count();
        let n1 = vectors.len() - n0;
        Ok(LabeledSet { vectors, n0, n1 })
    }

    /// Builds a set from bare value rows, inventing placeholder names.
    pub fn from_raw(values: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<LabeledSet> {
        if values.len() != labels.len() {
            return Err(Error::InvalidInput(format!(
                "{} value rows but {} labels",
                values.len(),
                labels.len()
            )));
        }
        let dim = values.first().map_or(0, Vec::len);
        let names: Arc<[String]> = (0..dim).map(|i| format!("F{i}")).collect();
        LabeledSet::new(
            values
                .into_iter()
                .zip(labels)
                .map(|(v, label)| FeatureVector {
                    values: v,
                    label,
                    feature_names: Arc::clone(&names),
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, |v| v.values.len())
    }

    pub(crate) fn check_trainable(&self) -> std::result::Result<(), TrainError> {
        if self.n0 == 0 || self.n1 == 0 {
            return Err(TrainError::ClassAbsent);
        }
        if self.dim() == 0 {
            return Err(TrainError::ZeroDimensional);
        }
        if self
            .vectors
            .iter()
            .any(|v| v.values.iter().any(|x| !x.is_finite()))
        {
            return Err(TrainError::NonFinite);
        }
        Ok(())
    }
}

/// Algorithm tags in alphabetical order; the derived `Ord` is the
/// tie-breaking order for winner extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Cart,
    Knn,
    Lda,
    Svm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Cart, Algorithm::Knn, Algorithm::Lda, Algorithm::Svm];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Cart => "CART",
            Algorithm::Knn => "KNN",
            Algorithm::Lda => "LDA",
            Algorithm::Svm => "SVM",
        }
    }

    pub fn parse(s: &str) -> Option<Algorithm> {
        match s.to_ascii_uppercase().as_str() {
            "CART" => Some(Algorithm::Cart),
            "KNN" => Some(Algorithm::Knn),
            "LDA" => Some(Algorithm::Lda),
            "SVM" => Some(Algorithm::Svm),
            _ => None,
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Hyper-parameters for all four trainers.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainParams {
    pub lda_shrinkage: f64,
    pub svm_c: f64,
    pub svm_kernel: KernelSpec,
    pub svm_tol: f64,
    pub cart_min_leaf: usize,
    pub knn_k: usize,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            lda_shrinkage: 0.1,
            svm_c: 1.0,
            svm_kernel: KernelSpec::Rbf(SigmaSpec::Median),
            svm_tol: 1e-3,
            cart_min_leaf: 3,
            knn_k: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Lda(LdaModel),
    Svm(SvmModel),
    Cart(CartModel),
    Knn(KnnModel),
}

impl TrainedModel {
    pub fn dim(&self) -> usize {
        match self {
            TrainedModel::Lda(m) => m.dim(),
            TrainedModel::Svm(m) => m.dim(),
            TrainedModel::Cart(m) => m.dim(),
            TrainedModel::Knn(m) => m.dim(),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        if x.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "model over {} features asked to predict a {}-dimensional point",
                self.dim(),
                x.len()
            )));
        }
        match self {
            TrainedModel::Lda(m) => m.predict(x),
            TrainedModel::Svm(m) => m.predict(x),
            TrainedModel::Cart(m) => m.predict(x),
            TrainedModel::Knn(m) => m.predict(x),
        }
    }
}

/// Dispatches to the right trainer with the parameters for `algorithm`.
pub fn train(
    algorithm: Algorithm,
    set: &LabeledSet,
    params: &TrainParams,
) -> std::result::Result<TrainedModel, TrainError> {
    match algorithm {
        Algorithm::Lda => train_lda(set, params.lda_shrinkage).map(TrainedModel::Lda),
        Algorithm::Svm => {
            train_svm(set, params.svm_kernel, params.svm_c, params.svm_tol).map(TrainedModel::Svm)
        }
        Algorithm::Cart => train_cart(set, params.cart_min_leaf).map(TrainedModel::Cart),
        Algorithm::Knn => train_knn(set, params.knn_k).map(TrainedModel::Knn),
    }
}
