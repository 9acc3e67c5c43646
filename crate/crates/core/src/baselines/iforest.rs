//! Isolation forest.
//!
//! Each tree is grown on a uniform subsample without replacement. A node
//! picks a dimension uniformly among those with a non-zero range in the node
//! and splits at a uniform value in `[min, max)`. Growth stops at depth
//! `ceil(log2(subsample))` or when a node holds at most one point.

use rand::seq::index::sample;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::Rng;
use crate::scores::ScoreVector;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Harmonic number `H(n)`; exact summation up to 10^4 terms.
fn harmonic(n: usize) -> f64 {
    if n <= 10_000 {
        (1..=n).map(|j| 1.0 / j as f64).sum()
    } else {
        let x = n as f64;
        x.ln() + EULER_GAMMA + 1.0 / (2.0 * x) - 1.0 / (12.0 * x * x)
    }
}

/// Average unsuccessful-search path length in a binary search tree of `n`
/// nodes: `c(n) = 2 H(n - 1) - 2 (n - 1) / n`, with `c(n) = 0` for `n <= 1`.
pub fn average_path_length(n: usize) -> f64 {
    if n <= 1 {
        0.0
    } else {
        2.0 * harmonic(n - 1) - 2.0 * (n - 1) as f64 / n as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Split {
        dim: usize,
        value: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        size: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsolationTree {
    nodes: Vec<Node>,
}

impl IsolationTree {
    fn grow(data: &Matrix, rows: Vec<usize>, max_depth: usize, rng: &mut Rng) -> Self {
        let mut tree = IsolationTree { nodes: Vec::new() };
        tree.build(data, rows, 0, max_depth, rng);
        tree
    }

    fn build(&mut self, data: &Matrix, rows: Vec<usize>, depth: usize, max_depth: usize, rng: &mut Rng) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { size: rows.len() });
        if depth >= max_depth || rows.len() <= 1 {
            return id;
        }
        let ranges: Vec<(usize, f64, f64)> = (0..data.cols())
            .filter_map(|j| {
                let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
                    let v = data.get(r, j);
                    (lo.min(v), hi.max(v))
                });
                (hi > lo).then_some((j, lo, hi))
            })
            .collect();
        if ranges.is_empty() {
            return id;
        }
        let (dim, lo, hi) = ranges[rng.random_range(0..ranges.len())];
        let value = lo + rng.random::<f64>() * (hi - lo);
        let (l, r): (Vec<usize>, Vec<usize>) = rows.into_iter().partition(|&i| data.get(i, dim) < value);
        let left = self.build(data, l, depth + 1, max_depth, rng);
        let right = self.build(data, r, depth + 1, max_depth, rng);
        self.nodes[id] = Node::Split {
            dim,
            value,
            left,
            right,
        };
        id
    }

    /// Depth of the leaf reached by `x`, plus `c(size)` for the points left
    /// unseparated in it.
    pub fn path_length(&self, x: &[f64]) -> f64 {
        let mut id = 0;
        let mut depth = 0usize;
        loop {
            match self.nodes[id] {
                Node::Split {
                    dim,
                    value,
                    left,
                    right,
                } => {
                    id = if x[dim] < value { left } else { right };
                    depth += 1;
                }
                Node::Leaf { size } => return depth as f64 + average_path_length(size),
            }
        }
    }

    /// Longest root-to-leaf edge count.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsolationForestModel {
    trees: Vec<IsolationTree>,
    subsample: usize,
    dim: usize,
    seed: u64,
}

impl IsolationForestModel {
    pub fn trees(&self) -> &[IsolationTree] {
        &self.trees
    }

    pub fn subsample(&self) -> usize {
        self.subsample
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Anomaly score `2^(-E[h(x)] / c(subsample))`; near 1 for anomalies.
    pub fn anomaly(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "forest has {} columns, query has {}",
                self.dim,
                x.len()
            )));
        }
        let mean = self.trees.iter().map(|t| t.path_length(x)).sum::<f64>() / self.trees.len() as f64;
        Ok(2f64.powf(-mean / average_path_length(self.subsample)))
    }
}

/// Grows `trees` isolation trees. Tree `t` draws from `rng.split("tree-{t}")`.
pub fn fit_iforest(train: &Matrix, trees: usize, subsample: usize, rng: &Rng) -> Result<IsolationForestModel> {
    if trees == 0 {
        return Err(Error::InvalidConfig("need at least one tree".into()));
    }
    if subsample < 2 || subsample > train.rows() {
        return Err(Error::InvalidConfig(format!(
            "subsample {subsample} outside [2, {}]",
            train.rows()
        )));
    }
    let max_depth = (subsample as f64).log2().ceil() as usize;
    let forest = (0..trees)
        .map(|t| {
            let mut tree_rng = rng.split(&format!("tree-{t}"));
            let rows = sample(&mut tree_rng, train.rows(), subsample).into_vec();
            IsolationTree::grow(train, rows, max_depth, &mut tree_rng)
        })
        .collect();
    Ok(IsolationForestModel {
        trees: forest,
        subsample,
        dim: train.cols(),
        seed: rng.seed(),
    })
}

/// `-anomaly` per query row.
pub fn iforest_score(model: &IsolationForestModel, query: &Matrix) -> Result<ScoreVector> {
    let values = query
        .iter_rows()
        .map(|q| model.anomaly(q).map(|s| -s))
        .collect::<Result<Vec<_>>>()?;
    ScoreVector::new(values)
}
