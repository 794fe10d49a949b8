//! Bagged ensemble of depth-limited CART trees (Gini impurity) used as the
//! downstream classifier.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EncodedMatrix;
use crate::dataset::rng_for;

/// Binary probabilistic classifier used by the utility harness.
pub trait Classifier: Send + Sync {
    /// Fits on `(train_x, train_y)` and returns P(positive) for each row of `test_x`.
    fn fit_predict(&self, train_x: &EncodedMatrix, train_y: &[bool], test_x: &EncodedMatrix, seed: u64) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features tried per split; `None` means `ceil(sqrt(d))`.
    pub max_features: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        // grown out, like a default random forest; the depth bound only
        // guards the recursion
        Self { n_trees: 50, max_depth: 64, min_leaf: 1, max_features: None }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(f64),
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(p) => return p,
                Node::Split { feature, threshold, left, right } => {
                    at = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

struct Builder<'a, R> {
    x: &'a EncodedMatrix,
    y: &'a [bool],
    params: ForestParams,
    mtry: usize,
    rng: R,
    nodes: Vec<Node>,
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

impl<R: Rng> Builder<'_, R> {
    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let n = rows.len();
        let pos = rows.iter().filter(|&&r| self.y[r]).count();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(pos as f64 / n.max(1) as f64));
        if depth >= self.params.max_depth || pos == 0 || pos == n || n < 2 * self.params.min_leaf {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(&rows, pos) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows.into_iter().partition(|&i| self.x.get(i, feature) <= threshold);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[id] = Node::Split { feature, threshold, left, right };
        id
    }

    fn best_split(&mut self, rows: &[usize], pos: usize) -> Option<(usize, f64)> {
        let n = rows.len();
        let parent = gini(pos, n);
        let min_leaf = self.params.min_leaf.max(1);
        let features = sample(&mut self.rng, self.x.n_cols(), self.mtry);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut column: Vec<(f64, bool)> = Vec::with_capacity(n);
        for feature in features {
            column.clear();
            column.extend(rows.iter().map(|&r| (self.x.get(r, feature), self.y[r])));
            column.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_pos = 0;
            for i in 0..n - 1 {
                left_pos += column[i].1 as usize;
                let left_n = i + 1;
                if column[i].0 == column[i + 1].0 || left_n < min_leaf || n - left_n < min_leaf {
                    continue;
                }
                let impurity = (left_n as f64 * gini(left_pos, left_n)
                    + (n - left_n) as f64 * gini(pos - left_pos, n - left_n))
                    / n as f64;
                if impurity < parent - 1e-12 && best.is_none_or(|(b, _, _)| impurity < b) {
                    best = Some((impurity, feature, 0.5 * (column[i].0 + column[i + 1].0)));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

/// Fits one tree on the given bootstrap rows.
pub fn fit_tree(x: &EncodedMatrix, y: &[bool], rows: Vec<usize>, params: ForestParams, seed: u64, stream: u64) -> Tree {
    let d = x.n_cols();
    let mtry = params
        .max_features
        .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
        .clamp(1, d.max(1));
    let mut builder = Builder { x, y, params, mtry, rng: rng_for(seed, stream), nodes: Vec::new() };
    if d == 0 {
        let pos = rows.iter().filter(|&&r| y[r]).count();
        return Tree { nodes: vec![Node::Leaf(pos as f64 / rows.len().max(1) as f64)] };
    }
    builder.build(rows, 0);
    Tree { nodes: builder.nodes }
}

#[derive(Debug, Clone, Default)]
pub struct BaggedTrees {
    pub params: ForestParams,
}

impl BaggedTrees {
    pub fn new(params: ForestParams) -> Self {
        Self { params }
    }

    pub fn fit(&self, x: &EncodedMatrix, y: &[bool], seed: u64) -> Vec<Tree> {
        let n = x.n_rows();
        (0..self.params.n_trees as u64)
            .into_par_iter()
            .map(|t| {
                let mut rng = rng_for(seed, 2 * t);
                let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                fit_tree(x, y, rows, self.params, seed, 2 * t + 1)
            })
            .collect()
    }
}

impl Classifier for BaggedTrees {
    fn fit_predict(&self, train_x: &EncodedMatrix, train_y: &[bool], test_x: &EncodedMatrix, seed: u64) -> Vec<f64> {
        let trees = self.fit(train_x, train_y, seed);
        (0..test_x.n_rows())
            .into_par_iter()
            .map(|i| {
                let row = test_x.row(i);
                trees.iter().map(|t| t.predict(row)).sum::<f64>() / trees.len().max(1) as f64
            })
            .collect()
    }
}
