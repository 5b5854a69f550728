//! Balanced random forest with Gini trees.
//!
//! Each tree draws a bootstrap of the training rows, then keeps all minority
//! draws and an equal number of majority draws sampled without replacement.
//! Tree `i` uses its own ChaCha stream `(seed, i)`, so trees can be grown in
//! any order or in parallel with identical results.

use std::cmp::Ordering;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::check_training_set;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Parallelism};
use crate::matrix::FeatureMatrix;

const MAX_BOOTSTRAP_TRIES: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or too small.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Candidate features per split; `None` means `ceil(sqrt(D))`.
    pub mtry: Option<usize>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self { n_trees: 200, max_depth: None, min_leaf: 1, mtry: None }
    }
}

impl ForestConfig {
    fn validate(&self, n_features: usize) -> Result<usize> {
        if self.n_trees == 0 {
            return Err(Error::InvalidInput("n_trees must be at least 1".into()));
        }
        if self.min_leaf == 0 {
            return Err(Error::InvalidInput("min_leaf must be at least 1".into()));
        }
        if n_features == 0 {
            return Err(Error::InvalidInput("no features".into()));
        }
        let mtry = self.mtry.unwrap_or_else(|| (n_features as f64).sqrt().ceil() as usize);
        if mtry == 0 || mtry > n_features {
            return Err(Error::InvalidInput(format!("mtry {mtry} outside 1..={n_features}")));
        }
        Ok(mtry)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Leaf {
        /// Class proportions of the training rows reaching the leaf.
        votes: [f64; 2],
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
    /// Weighted Gini decrease per feature, summed over this tree's splits.
    importance: Vec<f64>,
    /// Class counts of the balanced training sample.
    class_counts: [usize; 2],
}

impl Tree {
    pub fn predict_row(&self, row: &[f64]) -> u8 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { votes } => return u8::from(votes[1] >= votes[0]),
                Node::Split { feature, threshold, left, right } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        self.class_counts
    }

    /// Feature and threshold of the root split, if the root is not a leaf.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes.first()? {
            Node::Split { feature, threshold, .. } => Some((*feature, *threshold)),
            Node::Leaf { .. } => None,
        }
    }

    pub(crate) fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub(crate) fn importance(&self) -> &[f64] {
        &self.importance
    }

    pub(crate) fn from_parts(
        nodes: Vec<Node>,
        importance: Vec<f64>,
        class_counts: [usize; 2],
    ) -> Result<Self> {
        let n_features = importance.len();
        let n = nodes.len();
        if n == 0 {
            return Err(Error::Format("empty tree".into()));
        }
        for (i, node) in nodes.iter().enumerate() {
            if let Node::Split { feature, left, right, .. } = node {
                if *feature >= n_features || *left >= n || *right >= n || *left <= i || *right <= i {
                    return Err(Error::Format(format!("malformed split at node {i}")));
                }
            }
        }
        Ok(Self { nodes, importance, class_counts })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    trees: Vec<Tree>,
    n_features: usize,
    config: ForestConfig,
    seed: u64,
}

impl ForestModel {
    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub(crate) fn from_trees(trees: Vec<Tree>, n_features: usize, config: ForestConfig, seed: u64) -> Self {
        Self { trees, n_features, config, seed }
    }
}

pub fn fit_balanced_forest(x: &FeatureMatrix, y: &[u8], config: &ForestConfig, seed: u64) -> Result<ForestModel> {
    fit_balanced_forest_with(x, y, config, seed, Parallelism::default())
}

pub fn fit_balanced_forest_with(
    x: &FeatureMatrix,
    y: &[u8],
    config: &ForestConfig,
    seed: u64,
    mode: Parallelism,
) -> Result<ForestModel> {
    check_training_set(x, y)?;
    let mtry = config.validate(x.cols())?;
    let trees = map_indexed(config.n_trees, mode, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let sample = balanced_bootstrap(y, &mut rng)?;
        Ok(grow_tree(x, y, &sample, config, mtry, &mut rng))
    });
    let trees = trees.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ForestModel { trees, n_features: x.cols(), config: config.clone(), seed })
}

/// Bootstrap of all rows, then the majority draws are cut down (without
/// replacement) to the minority count. Redraws if a class is absent.
fn balanced_bootstrap(y: &[u8], rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let n = y.len();
    for _ in 0..MAX_BOOTSTRAP_TRIES {
        let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for _ in 0..n {
            let i = rng.random_range(0..n);
            by_class[y[i] as usize].push(i);
        }
        let m = by_class[0].len().min(by_class[1].len());
        if m == 0 {
            continue;
        }
        let major = if by_class[0].len() > by_class[1].len() { 0 } else { 1 };
        let keep = index::sample(rng, by_class[major].len(), m).into_vec();
        let mut sample: Vec<usize> = by_class[1 - major].clone();
        sample.extend(keep.into_iter().map(|k| by_class[major][k]));
        return Ok(sample);
    }
    Err(Error::DegenerateLabels(format!(
        "no bootstrap with both classes after {MAX_BOOTSTRAP_TRIES} draws"
    )))
}

fn gini(c0: f64, c1: f64) -> f64 {
    let n = c0 + c1;
    if n == 0.0 {
        return 0.0;
    }
    let (p0, p1) = (c0 / n, c1 / n);
    1.0 - p0 * p0 - p1 * p1
}

struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
    /// Sorted sample positions going left; with the column values, breaks
    /// exact gain ties without reference to column order.
    left: Vec<usize>,
}

fn grow_tree(
    x: &FeatureMatrix,
    y: &[u8],
    sample: &[usize],
    config: &ForestConfig,
    mtry: usize,
    rng: &mut ChaCha8Rng,
) -> Tree {
    let d = x.cols();
    let root_n = sample.len() as f64;
    let mut nodes: Vec<Node> = Vec::new();
    let mut importance = vec![0.0; d];
    let mut class_counts = [0usize; 2];
    for &i in sample {
        class_counts[y[i] as usize] += 1;
    }

    // (node slot, positions into `sample`, depth)
    let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(0, (0..sample.len()).collect(), 0)];
    nodes.push(Node::Leaf { votes: [0.0, 0.0] });
    let mut pairs: Vec<(f64, u8, usize)> = Vec::new();
    while let Some((slot, members, depth)) = stack.pop() {
        let mut counts = [0.0f64; 2];
        for &p in &members {
            counts[y[sample[p]] as usize] += 1.0;
        }
        let n = members.len() as f64;
        let leaf = Node::Leaf { votes: [counts[0] / n, counts[1] / n] };
        let pure = counts[0] == 0.0 || counts[1] == 0.0;
        let depth_capped = config.max_depth.is_some_and(|m| depth >= m);
        if pure || depth_capped || members.len() < 2 * config.min_leaf {
            nodes[slot] = leaf;
            continue;
        }
        let parent_gini = gini(counts[0], counts[1]);
        let features: Vec<usize> = if mtry >= d {
            (0..d).collect()
        } else {
            index::sample(rng, d, mtry).into_vec()
        };

        let mut best: Option<Candidate> = None;
        for &f in &features {
            pairs.clear();
            pairs.extend(members.iter().map(|&p| (x.get(sample[p], f), y[sample[p]], p)));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
            let mut left = [0.0f64; 2];
            for cut in 1..pairs.len() {
                left[pairs[cut - 1].1 as usize] += 1.0;
                if pairs[cut - 1].0 == pairs[cut].0 {
                    continue;
                }
                let nl = cut;
                let nr = pairs.len() - cut;
                if nl < config.min_leaf || nr < config.min_leaf {
                    continue;
                }
                let right = [counts[0] - left[0], counts[1] - left[1]];
                let child = (nl as f64 * gini(left[0], left[1]) + nr as f64 * gini(right[0], right[1])) / n;
                let gain = parent_gini - child;
                let better = match &best {
                    None => true,
                    Some(b) if gain > b.gain => true,
                    Some(b) if gain == b.gain => {
                        let mut l: Vec<usize> = pairs[..cut].iter().map(|p| p.2).collect();
                        l.sort_unstable();
                        match l.cmp(&b.left) {
                            Ordering::Less => true,
                            Ordering::Greater => false,
                            // same partition from another column: compare the columns themselves
                            Ordering::Equal => members
                                .iter()
                                .map(|&p| x.get(sample[p], f).total_cmp(&x.get(sample[p], b.feature)))
                                .find(|o| o.is_ne())
                                .is_some_and(|o| o.is_lt()),
                        }
                    }
                    _ => false,
                };
                if better {
                    let mut l: Vec<usize> = pairs[..cut].iter().map(|p| p.2).collect();
                    l.sort_unstable();
                    let lo = pairs[cut - 1].0;
                    let hi = pairs[cut].0;
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if !(threshold >= lo && threshold < hi) {
                        threshold = lo;
                    }
                    best = Some(Candidate { gain, feature: f, threshold, left: l });
                }
            }
        }
        let Some(best) = best else {
            nodes[slot] = leaf;
            continue;
        };
        importance[best.feature] += n / root_n * best.gain.max(0.0);
        let go_left: Vec<usize> = best.left;
        let go_right: Vec<usize> = {
            let mut keep = vec![true; sample.len()];
            for &p in &go_left {
                keep[p] = false;
            }
            members.iter().copied().filter(|&p| keep[p]).collect()
        };
        let left_slot = nodes.len();
        nodes.push(Node::Leaf { votes: [0.0, 0.0] });
        let right_slot = nodes.len();
        nodes.push(Node::Leaf { votes: [0.0, 0.0] });
        nodes[slot] = Node::Split { feature: best.feature, threshold: best.threshold, left: left_slot, right: right_slot };
        stack.push((right_slot, go_right, depth + 1));
        stack.push((left_slot, go_left, depth + 1));
    }
    Tree { nodes, importance, class_counts }
}

/// Majority vote of the trees; a tie goes to class 1.
pub fn predict_forest(m: &ForestModel, x: &FeatureMatrix) -> Result<Vec<u8>> {
    if x.cols() != m.n_features {
        return Err(Error::DimensionMismatch { expected: m.n_features, got: x.cols() });
    }
    Ok(x.iter_rows()
        .map(|row| {
            let ones = m.trees.iter().filter(|t| t.predict_row(row) == 1).count();
            u8::from(2 * ones >= m.trees.len())
        })
        .collect())
}

/// Mean Gini importance over trees (each tree normalised first), scaled to
/// sum to 1. All zeros when no tree has a split.
pub fn feature_importance(m: &ForestModel) -> Vec<f64> {
    let mut total = vec![0.0; m.n_features];
    for t in &m.trees {
        let s: f64 = t.importance.iter().sum();
        if s > 0.0 {
            for (acc, v) in total.iter_mut().zip(&t.importance) {
                *acc += v / s;
            }
        }
    }
    let s: f64 = total.iter().sum();
    if s > 0.0 {
        total.iter_mut().for_each(|v| *v /= s);
    }
    total
}
