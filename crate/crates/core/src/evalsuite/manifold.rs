//! k-NN manifold precision and recall.
//!
//! The manifold of a point set is the union of closed balls centred on each
//! point with radius equal to the distance to its k-th nearest neighbour in
//! the same set (the point itself excluded). Precision is the fraction of
//! synthetic points inside the real manifold; recall is the fraction of real
//! points inside the synthetic manifold.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EncodedMatrix, EvalError};

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifoldParams {
    pub k: usize,
}

impl Default for ManifoldParams {
    fn default() -> Self {
        Self { k: DEFAULT_K }
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Distance from every point to its k-th nearest other point.
pub fn knn_radii(points: &EncodedMatrix, k: usize) -> Result<Vec<f64>, EvalError> {
    let n = points.n_rows();
    if k == 0 || n <= k {
        return Err(EvalError::TooSmall { n, k });
    }
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let p = points.row(i);
            let mut dists: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| euclidean(p, points.row(j)))
                .collect();
            let (_, kth, _) = dists.select_nth_unstable_by(k - 1, f64::total_cmp);
            *kth
        })
        .collect())
}

/// Number of `queries` lying in at least one ball `(centers[i], radii[i])`.
pub fn count_inside(queries: &EncodedMatrix, centers: &EncodedMatrix, radii: &[f64]) -> usize {
    (0..queries.n_rows())
        .into_par_iter()
        .filter(|&q| {
            let p = queries.row(q);
            (0..centers.n_rows()).any(|c| euclidean(p, centers.row(c)) <= radii[c])
        })
        .count()
}

/// `(precision, recall)` of `synth` against `real`.
pub fn precision_recall(
    real: &EncodedMatrix,
    synth: &EncodedMatrix,
    params: ManifoldParams,
) -> Result<(f64, f64), EvalError> {
    if real.n_cols() != synth.n_cols() {
        return Err(EvalError::DimensionMismatch { real: real.n_cols(), synth: synth.n_cols() });
    }
    let real_radii = knn_radii(real, params.k)?;
    let synth_radii = knn_radii(synth, params.k)?;
    let precision = count_inside(synth, real, &real_radii) as f64 / synth.n_rows() as f64;
    let recall = count_inside(real, synth, &synth_radii) as f64 / real.n_rows() as f64;
    Ok((precision, recall))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(points: &[f64]) -> EncodedMatrix {
        EncodedMatrix::from_rows(&points.iter().map(|&x| vec![x]).collect::<Vec<_>>())
    }

    #[test]
    fn radii_exclude_self() {
        let m = line(&[0.0, 1.0, 3.0]);
        assert_eq!(knn_radii(&m, 1).unwrap(), vec![1.0, 1.0, 2.0]);
        assert_eq!(knn_radii(&m, 2).unwrap(), vec![3.0, 2.0, 3.0]);
        assert!(knn_radii(&m, 3).is_err());
    }

    #[test]
    fn duplicates_give_zero_radius_and_boundary_is_inclusive() {
        let m = line(&[2.0, 2.0, 5.0]);
        assert_eq!(knn_radii(&m, 1).unwrap()[0], 0.0);
        let q = line(&[2.0]);
        assert_eq!(count_inside(&q, &m, &[0.0, 0.0, 0.0]), 1);
    }

    #[test]
    fn identical_sets_score_one() {
        let m = line(&[0.0, 0.3, 1.1, 2.0, 7.5, 9.0, 9.1]);
        assert_eq!(precision_recall(&m, &m, ManifoldParams { k: 5 }).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn separated_clusters_score_zero() {
        let real = line(&[0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
        let synth = line(&[1e6, 1e6 + 0.1, 1e6 + 0.2, 1e6 + 0.3, 1e6 + 0.4, 1e6 + 0.5, 1e6 + 0.6]);
        assert_eq!(precision_recall(&real, &synth, ManifoldParams::default()).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn small_sets_are_rejected() {
        let m = line(&[0.0, 1.0, 2.0]);
        assert!(matches!(
            precision_recall(&m, &m, ManifoldParams::default()),
            Err(EvalError::TooSmall { n: 3, k: 5 })
        ));
    }
}
