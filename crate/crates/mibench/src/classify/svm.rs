//! Soft-margin SVM trained by sequential minimal optimization.
//!
//! The solver is fully deterministic: candidate pairs are scanned in index
//! order, the partner is chosen by largest error gap with lowest-index
//! tie-break, and there is no randomness anywhere. Internally it drives KKT
//! violations below half the requested tolerance so that the certificate
//! still holds at the full tolerance after the bias is recomputed.

use crate::classify::LabeledSet;
use crate::data::Label;
use crate::error::{Result as CrateResult, TrainError};

type Result<T> = std::result::Result<T, TrainError>;

/// RBF bandwidth: a fixed value or the median pairwise distance heuristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaSpec {
    Median,
    Fixed(f64),
}

/// Kernel requested for training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Linear,
    Rbf(SigmaSpec),
}

/// Kernel with its bandwidth resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Linear,
    Rbf { sigma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { sigma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-d2 / (2.0 * sigma * sigma)).exp()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub support_vectors: Vec<Vec<f64>>,
    /// Labels in {-1, +1}, parallel to `support_vectors`.
    pub support_labels: Vec<f64>,
    /// Positive multipliers, parallel to `support_vectors`.
    pub multipliers: Vec<f64>,
    /// Indices of the support vectors in the training set.
    pub sv_indices: Vec<usize>,
    pub bias: f64,
    pub c: f64,
    dim: usize,
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Decision value per the dual expansion, internal labels in {-1, +1}.
    pub fn decision_value(&self, x: &[f64]) -> f64 {
        let mut acc = self.bias;
        for ((sv, &y), &lambda) in self
            .support_vectors
            .iter()
            .zip(&self.support_labels)
            .zip(&self.multipliers)
        {
            acc += lambda * y * self.kernel.eval(sv, x);
        }
        acc
    }

    /// Primal weight vector; only defined for the linear kernel.
    pub fn linear_weights(&self) -> Option<Vec<f64>> {
        match self.kernel {
            Kernel::Linear => {
                let mut w = vec![0.0; self.dim];
                for ((sv, &y), &lambda) in self
                    .support_vectors
                    .iter()
                    .zip(&self.support_labels)
                    .zip(&self.multipliers)
                {
                    for (wi, &xi) in w.iter_mut().zip(sv) {
                        *wi += lambda * y * xi;
                    }
                }
                Some(w)
            }
            Kernel::Rbf { .. } => None,
        }
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

/// Median Euclidean distance over all point pairs, the RBF bandwidth
/// heuristic. Even pair counts average the two middle values.
pub(crate) fn median_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    let mut dists = Vec::with_capacity(points.len() * (points.len() - 1) / 2);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d2: f64 = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            dists.push(d2.sqrt());
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = dists.len();
    if m == 0 {
        return 0.0;
    }
    if m % 2 == 1 {
        dists[m / 2]
    } else {
        0.5 * (dists[m / 2 - 1] + dists[m / 2])
    }
}

const MAX_ITERS: usize = 100_000;
/// Curvature floor for a pair update; near-flat directions (nearly
/// identical points under a wide kernel) otherwise divide by ~0.
const TAU: f64 = 1e-12;

struct Solver<'a> {
    gram: Vec<f64>,
    y: &'a [f64],
    alphas: Vec<f64>,
    errors: Vec<f64>,
    c: f64,
    tol: f64,
    n: usize,
}

impl<'a> Solver<'a> {
    fn k(&self, i: usize, j: usize) -> f64 {
        self.gram[i * self.n + j]
    }

    /// Jointly optimizes the pair (i, j). Returns whether the multipliers
    /// moved. The error cache stays exact (bias-free form).
    /// Picks the maximal violating pair: `i` maximizes -E over points whose
    /// multiplier may still grow along +y, `j` minimizes -E over those that
    /// may shrink. Ties keep the lowest index. Returns the pair and the gap
    /// m - M, which bounds the bias-feasibility violation.
    fn select_pair(&self) -> (Option<usize>, Option<usize>, f64) {
        let mut m = f64::NEG_INFINITY;
        let mut i_up = None;
        let mut mm = f64::INFINITY;
        let mut j_low = None;
        for t in 0..self.n {
            let a = self.alphas[t];
            let v = -self.errors[t];
            let up = if self.y[t] > 0.0 { a < self.c } else { a > 0.0 };
            let low = if self.y[t] > 0.0 { a > 0.0 } else { a < self.c };
            if up && v > m {
                m = v;
                i_up = Some(t);
            }
            if low && v < mm {
                mm = v;
                j_low = Some(t);
            }
        }
        (i_up, j_low, m - mm)
    }

    /// Jointly optimizes the pair (i, j). Returns whether the multipliers
    /// moved. The error cache stays exact (bias-free form).
    fn step(&mut self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let (ai_old, aj_old) = (self.alphas[i], self.alphas[j]);
        let (yi, yj) = (self.y[i], self.y[j]);
        let (lo, hi) = if yi != yj {
            (0f64.max(aj_old - ai_old), self.c.min(self.c + aj_old - ai_old))
        } else {
            (0f64.max(ai_old + aj_old - self.c), self.c.min(ai_old + aj_old))
        };
        if lo >= hi {
            return false;
        }
        let eta = (self.k(i, i) + self.k(j, j) - 2.0 * self.k(i, j)).max(TAU);
        let ei = self.errors[i];
        let ej = self.errors[j];
        let aj_new = (aj_old + yj * (ei - ej) / eta).clamp(lo, hi);
        // Snap to the box so bound classification stays exact and a
        // snapped-back multiplier cannot masquerade as progress.
        let mut aj_new = aj_new;
        if aj_new < 1e-10 {
            aj_new = 0.0;
        } else if aj_new > self.c - 1e-10 {
            aj_new = self.c;
        }
        let mut ai_new = ai_old + yi * yj * (aj_old - aj_new);
        if ai_new < 1e-10 {
            ai_new = 0.0;
        } else if ai_new > self.c - 1e-10 {
            ai_new = self.c;
        }
        if ai_new == ai_old && aj_new == aj_old {
            return false;
        }
        let di = (ai_new - ai_old) * yi;
        let dj = (aj_new - aj_old) * yj;
        self.alphas[i] = ai_new;
        self.alphas[j] = aj_new;
        for k in 0..self.n {
            self.errors[k] += di * self.k(i, k) + dj * self.k(j, k);
        }
        true
    }
}

fn gvals(s: &Solver) -> Vec<f64> {
    (0..s.n).map(|i| s.errors[i] + s.y[i]).collect()
}

/// Midpoint of the feasible bias interval implied by the bound multipliers:
/// points at lambda = 0 require y(g + b) >= 1, points at lambda = C require
/// y(g + b) <= 1.
fn bias_interval(alphas: &[f64], y: &[f64], g: &[f64], c: f64) -> Option<f64> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for i in 0..alphas.len() {
        let edge = y[i] - g[i];
        let at_zero = alphas[i] <= 0.0;
        let at_c = alphas[i] >= c;
        if at_zero {
            if y[i] > 0.0 {
                lo = lo.max(edge);
            } else {
                hi = hi.min(edge);
            }
        } else if at_c {
            if y[i] > 0.0 {
                hi = hi.min(edge);
            } else {
                lo = lo.max(edge);
            }
        }
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => Some(0.5 * (lo + hi)),
        (true, false) => Some(lo),
        (false, true) => Some(hi),
        (false, false) => None,
    }
}

/// Trains a soft-margin SVM. Class 0 maps to -1, class 1 to +1.
pub fn train_svm(set: &LabeledSet, kernel: KernelSpec, c: f64, tol: f64) -> Result<SvmModel> {
    set.check_trainable()?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(TrainError::InvalidParam(format!("svm c must be positive, got {c}")));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(TrainError::InvalidParam(format!("svm tol must be positive, got {tol}")));
    }
    let points: Vec<&[f64]> = set.vectors.iter().map(|v| v.values.as_slice()).collect();
    let kernel = match kernel {
        KernelSpec::Linear => Kernel::Linear,
        KernelSpec::Rbf(SigmaSpec::Fixed(sigma)) => {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(TrainError::InvalidParam(format!(
                    "rbf sigma must be positive, got {sigma}"
                )));
            }
            Kernel::Rbf { sigma }
        }
        KernelSpec::Rbf(SigmaSpec::Median) => {
            let owned: Vec<Vec<f64>> = points.iter().map(|p| p.to_vec()).collect();
            let sigma = median_pairwise_distance(&owned);
            if !(sigma > 0.0) {
                // All points coincide; no bandwidth separates anything.
                return Err(TrainError::Degenerate);
            }
            Kernel::Rbf { sigma }
        }
    };

    let n = set.len();
    let y: Vec<f64> = set
        .vectors
        .iter()
        .map(|v| if v.label == Label::Left { 1.0 } else { -1.0 })
        .collect();
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let k = kernel.eval(points[i], points[j]);
            gram[i * n + j] = k;
            gram[j * n + i] = k;
        }
    }

    let mut solver = Solver {
        gram,
        y: &y,
        alphas: vec![0.0; n],
        errors: y.iter().map(|&v| -v).collect(),
        c,
        // Solve harder than asked so the recomputed bias keeps the
        // certificate inside the requested tolerance.
        tol: tol / 2.0,
        n,
    };

    // Maximal-violating-pair iteration: optimal (to within tol) exactly
    // when no feasible bias separates the up and down gradient extremes.
    let mut iters = 0usize;
    loop {
        let (i_up, j_low, gap) = solver.select_pair();
        let (Some(i), Some(j)) = (i_up, j_low) else {
            break;
        };
        if gap <= solver.tol {
            break;
        }
        iters += 1;
        if iters > MAX_ITERS || !solver.step(i, j) {
            return Err(TrainError::NoConvergence { passes: iters });
        }
    }

    // Final bias from the converged multipliers.
    let g: Vec<f64> = gvals(&solver);
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    for i in 0..n {
        if solver.alphas[i] > 0.0 && solver.alphas[i] < c {
            free_sum += y[i] - g[i];
            free_count += 1;
        }
    }
    let bias = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        bias_interval(&solver.alphas, &y, &g, c).unwrap_or(0.0)
    };

    let mut support_vectors = Vec::new();
    let mut support_labels = Vec::new();
    let mut multipliers = Vec::new();
    let mut sv_indices = Vec::new();
    for i in 0..n {
        if solver.alphas[i] > 0.0 {
            support_vectors.push(points[i].to_vec());
            support_labels.push(y[i]);
            multipliers.push(solver.alphas[i]);
            sv_indices.push(i);
        }
    }

    Ok(SvmModel {
        kernel,
        support_vectors,
        support_labels,
        multipliers,
        sv_indices,
        bias,
        c,
        dim: set.dim(),
    })
}

/// KKT certificate of a trained model over its training set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    /// Largest violation of the per-point optimality conditions.
    pub max_violation: f64,
    /// |sum of lambda_i y_i|.
    pub dual_balance: f64,
    /// Largest amount by which a multiplier leaves [0, C].
    pub box_violation: f64,
}

impl KktReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_violation <= tol && self.dual_balance <= tol && self.box_violation <= tol
    }
}

/// Recomputes the optimality conditions of `model` on the set it was
/// trained on: lambda = 0 needs y f(x) >= 1 - tol, free vectors need
/// |y f(x) - 1| <= tol, lambda = C needs y f(x) <= 1 + tol.
pub fn kkt_certificate(model: &SvmModel, set: &LabeledSet) -> KktReport {
    let mut alphas = vec![0.0; set.len()];
    for (&idx, &lambda) in model.sv_indices.iter().zip(&model.multipliers) {
        alphas[idx] = lambda;
    }
    let mut max_violation = 0.0f64;
    let mut balance = 0.0;
    let mut box_violation = 0.0f64;
    for (i, v) in set.vectors.iter().enumerate() {
        let y = if v.label == Label::Left { 1.0 } else { -1.0 };
        let yf = y * model.decision_value(&v.values);
        let a = alphas[i];
        balance += a * y;
        box_violation = box_violation.max(-a).max(a - model.c);
        let violation = if a <= 0.0 {
            (1.0 - yf).max(0.0)
        } else if a >= model.c {
            (yf - 1.0).max(0.0)
        } else {
            (yf - 1.0).abs()
        };
        max_violation = max_violation.max(violation);
    }
    KktReport {
        max_violation,
        dual_balance: balance.abs(),
        box_violation,
    }
}
