//! Local outlier factor over Euclidean distance.
//!
//! Neighborhoods include every point tied with the k-th nearest distance, so
//! a neighborhood can hold more than `k` points. Query points are never part
//! of the reference set; a training point's own entry is excluded from its
//! neighborhood (duplicates of it are not).

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scores::ScoreVector;

// keeps densities finite when a neighborhood collapses onto one point
const REACH_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct LofIndex {
    train: Matrix,
    k: usize,
    k_distance: Vec<f64>,
    lrd: Vec<f64>,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `(index, distance)` pairs of the k-neighborhood plus the k-distance.
fn neighborhood(train: &Matrix, q: &[f64], k: usize, skip: Option<usize>) -> (Vec<(usize, f64)>, f64) {
    let mut dists: Vec<(usize, f64)> = train
        .iter_rows()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(i, p)| (i, distance(q, p)))
        .collect();
    dists.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let k_dist = dists[k - 1].1;
    let end = dists.partition_point(|&(_, d)| d <= k_dist);
    dists.truncate(end);
    (dists, k_dist)
}

impl LofIndex {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.train.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.train.rows() == 0
    }

    /// Mean reachability distance from `q` over its neighborhood.
    fn mean_reach(&self, neighbors: &[(usize, f64)]) -> f64 {
        neighbors
            .iter()
            .map(|&(o, d)| self.k_distance[o].max(d))
            .sum::<f64>()
            / neighbors.len() as f64
    }

    /// LOF of a single query point.
    pub fn lof(&self, q: &[f64]) -> Result<f64> {
        if q.len() != self.train.cols() {
            return Err(Error::DimensionMismatch(format!(
                "index has {} columns, query has {}",
                self.train.cols(),
                q.len()
            )));
        }
        let (neighbors, _) = neighborhood(&self.train, q, self.k, None);
        let reach = self.mean_reach(&neighbors);
        if reach == 0.0 {
            // the query coincides with its whole neighborhood
            return Ok(1.0);
        }
        let lrd_q = 1.0 / reach;
        let ratio: f64 = neighbors.iter().map(|&(o, _)| self.lrd[o] / lrd_q).sum();
        Ok(ratio / neighbors.len() as f64)
    }
}

pub fn fit_lof(train: &Matrix, k: usize) -> Result<LofIndex> {
    let n = train.rows();
    if k == 0 || k >= n {
        return Err(Error::InvalidK {
            k,
            max: n.saturating_sub(1),
        });
    }
    let hoods: Vec<(Vec<(usize, f64)>, f64)> = train
        .iter_rows()
        .enumerate()
        .map(|(i, p)| neighborhood(train, p, k, Some(i)))
        .collect();
    let k_distance: Vec<f64> = hoods.iter().map(|h| h.1).collect();
    let lrd = hoods
        .iter()
        .map(|(nb, _)| {
            let reach =
                nb.iter().map(|&(o, d)| k_distance[o].max(d)).sum::<f64>() / nb.len() as f64;
            1.0 / reach.max(REACH_FLOOR)
        })
        .collect();
    Ok(LofIndex {
        train: train.clone(),
        k,
        k_distance,
        lrd,
    })
}

/// `-LOF` per query row, so inliers (LOF near 1) score higher.
pub fn lof_score(index: &LofIndex, query: &Matrix) -> Result<ScoreVector> {
    let values = query
        .iter_rows()
        .map(|q| index.lof(q).map(|v| -v))
        .collect::<Result<Vec<_>>>()?;
    ScoreVector::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_k() {
        let m = Matrix::zeros(3, 2);
        assert!(matches!(fit_lof(&m, 3), Err(Error::InvalidK { k: 3, max: 2 })));
        assert!(matches!(fit_lof(&m, 0), Err(Error::InvalidK { .. })));
    }

    #[test]
    fn ties_extend_the_neighborhood() {
        let train = Matrix::new(4, 1, vec![0.0, 1.0, -1.0, 5.0]).unwrap();
        let (nb, kd) = neighborhood(&train, &[0.0], 2, Some(0));
        assert_eq!(kd, 1.0);
        assert_eq!(nb.len(), 2);
        let (nb, kd) = neighborhood(&train, &[0.0], 1, None);
        assert_eq!(kd, 0.0);
        assert_eq!(nb.len(), 1);
        let (nb, _) = neighborhood(&train, &[0.0], 2, None);
        assert_eq!(nb.len(), 3);
    }

    #[test]
    fn collapsed_neighborhood_has_unit_lof() {
        let train = Matrix::new(4, 1, vec![2.0, 2.0, 2.0, 9.0]).unwrap();
        let idx = fit_lof(&train, 2).unwrap();
        assert_eq!(idx.lof(&[2.0]).unwrap(), 1.0);
        assert!(idx.lof(&[3.0]).unwrap().is_finite());
    }

    #[test]
    fn far_point_is_an_outlier() {
        let pts: Vec<f64> = (0..20)
            .flat_map(|i| {
                let a = i as f64 * std::f64::consts::TAU / 20.0;
                [0.1 * a.cos(), 0.1 * a.sin()]
            })
            .collect();
        let idx = fit_lof(&Matrix::new(20, 2, pts).unwrap(), 5).unwrap();
        assert!(idx.lof(&[10.0, 0.0]).unwrap() > 5.0);
        let s = lof_score(&idx, &Matrix::new(1, 2, vec![10.0, 0.0]).unwrap()).unwrap();
        assert!(s.values()[0] < -5.0);
    }
}
