//! k-nearest-neighbour voting with deterministic tie handling.
//!
//! Neighbours are ranked by (squared distance, training index), so
//! equidistant points resolve to the lowest index. k must be odd, which
//! makes the two-class vote itself tie-free.

use crate::classify::LabeledSet;
use crate::data::Label;
use crate::error::{Result as CrateResult, TrainError};

type Result<T> = std::result::Result<T, TrainError>;

#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    points: Vec<Vec<f64>>,
    labels: Vec<Label>,
    pub k: usize,
    dim: usize,
}

impl KnnModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn predict(&self, x: &[f64]) -> CrateResult<Label> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(crate::error::Error::InvalidInput(
                "prediction input must be finite".into(),
            ));
        }
        let mut ranked: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let d2: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                (d2, i)
            })
            .collect();
        ranked.select_nth_unstable_by(self.k - 1, |a, b| {
            a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1))
        });
        let votes_left = ranked[..self.k]
            .iter()
            .filter(|&&(_, i)| self.labels[i] == Label::Left)
            .count();
        Ok(if 2 * votes_left > self.k {
            Label::Left
        } else {
            Label::Right
        })
    }
}

/// Stores the training set for nearest-neighbour voting. k must be odd and
/// no larger than the set.
pub fn train_knn(set: &LabeledSet, k: usize) -> Result<KnnModel> {
    set.check_trainable()?;
    if k == 0 || k > set.len() {
        return Err(TrainError::InvalidParam(format!(
            "knn k must be in 1..={}, got {k}",
            set.len()
        )));
    }
    if k % 2 == 0 {
        return Err(TrainError::InvalidParam(format!("knn k must be odd, got {k}")));
    }
    Ok(KnnModel {
        points: set.vectors.iter().map(|v| v.values.clone()).collect(),
        labels: set.vectors.iter().map(|v| v.label).collect(),
        k,
        dim: set.dim(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(rows: Vec<Vec<f64>>, labels: Vec<u8>) -> LabeledSet {
        LabeledSet::from_raw(
            rows,
            labels
                .into_iter()
                .map(|c| Label::from_class_index(c as usize))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn k_one_returns_the_nearest_label() {
        let train = set(vec![vec![0.0], vec![10.0]], vec![0, 1]);
        let model = train_knn(&train, 1).unwrap();
        assert_eq!(model.predict(&[2.0]).unwrap(), Label::Right);
        assert_eq!(model.predict(&[9.0]).unwrap(), Label::Left);
        // On the training points themselves the distance is zero.
        assert_eq!(model.predict(&[0.0]).unwrap(), Label::Right);
    }

    #[test]
    fn majority_among_three() {
        let train = set(
            vec![vec![0.0], vec![1.0], vec![2.0], vec![50.0]],
            vec![0, 0, 1, 1],
        );
        let model = train_knn(&train, 3).unwrap();
        // Neighbours of 1.0 are {0, 1, 2} with labels {0, 0, 1}.
        assert_eq!(model.predict(&[1.0]).unwrap(), Label::Right);
        // Neighbours of 30.0 are {2, 50, 1} -> labels {1, 1, 0}.
        assert_eq!(model.predict(&[30.0]).unwrap(), Label::Left);
    }

    #[test]
    fn equidistant_neighbours_resolve_to_lowest_index() {
        // Points at -1 and +1 are equidistant from 0; index 0 (label 1)
        // must enter the k=1 neighbourhood.
        let train = set(vec![vec![-1.0], vec![1.0], vec![5.0]], vec![1, 0, 0]);
        let model = train_knn(&train, 1).unwrap();
        assert_eq!(model.predict(&[0.0]).unwrap(), Label::Left);
        // Swap the storage order and the answer flips with it.
        let swapped = set(vec![vec![1.0], vec![-1.0], vec![5.0]], vec![0, 1, 0]);
        let model = train_knn(&swapped, 1).unwrap();
        assert_eq!(model.predict(&[0.0]).unwrap(), Label::Right);
    }

    #[test]
    fn agrees_with_full_sort_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 60;
        let d = 4;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let labels: Vec<Label> = (0..n)
            .map(|i| if i % 3 == 0 { Label::Left } else { Label::Right })
            .collect();
        let train = LabeledSet::from_raw(rows.clone(), labels.clone()).unwrap();
        for k in [1, 3, 5, 7] {
            let model = train_knn(&train, k).unwrap();
            for _ in 0..1000 {
                let q: Vec<f64> = (0..d).map(|_| rng.random_range(-1.2..1.2)).collect();
                // Oracle: full sort by (squared distance, index), majority
                // over the first k.
                let mut ranked: Vec<(f64, usize)> = rows
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        (
                            p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(),
                            i,
                        )
                    })
                    .collect();
                ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
                let votes = ranked[..k]
                    .iter()
                    .filter(|&&(_, i)| labels[i] == Label::Left)
                    .count();
                let want = if 2 * votes > k { Label::Left } else { Label::Right };
                assert_eq!(model.predict(&q).unwrap(), want, "k {k}, query {q:?}");
            }
        }
    }

    #[test]
    fn parameter_validation() {
        let train = set(vec![vec![0.0], vec![1.0], vec![2.0]], vec![0, 1, 0]);
        assert!(matches!(train_knn(&train, 0), Err(TrainError::InvalidParam(_))));
        assert!(matches!(train_knn(&train, 2), Err(TrainError::InvalidParam(_))));
        assert!(matches!(train_knn(&train, 5), Err(TrainError::InvalidParam(_))));
        assert!(train_knn(&train, 3).is_ok());
        let one_class = set(vec![vec![0.0], vec![1.0]], vec![0, 0]);
        assert_eq!(train_knn(&one_class, 1), Err(TrainError::ClassAbsent));
    }

    #[test]
    fn non_finite_query_rejected() {
        let train = set(vec![vec![0.0], vec![1.0]], vec![0, 1]);
        let model = train_knn(&train, 1).unwrap();
        assert!(model.predict(&[f64::NAN]).is_err());
    }
}
