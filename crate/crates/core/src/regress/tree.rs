//! Regression trees and the two ensembles built on them.
//!
//! Splits minimize the summed squared error of the two children (variance
//! reduction).  Features are scanned in ascending index order, candidate
//! thresholds are midpoints between consecutive distinct values, and a new
//! split is adopted only when strictly better, so fits are deterministic.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::tournament::derive_seed;

/// Minimum rows per leaf for the standalone tree and the forest.
pub const TREE_MIN_LEAF: usize = 5;

/// Forest size.
pub const FOREST_TREES: usize = 100;

/// Boosting stages.
pub const GB_STAGES: usize = 100;

/// Depth cap for boosted trees.
pub const GB_DEPTH: usize = 3;

/// Boosting shrinkage.
pub const GB_LEARNING_RATE: f64 = 0.1;

/// A fitted regression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum TreeNode {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn predict(&self, x: &[f64]) -> f64 {
        match self {
            TreeNode::Leaf(v) => *v,
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if x[*feature] <= *threshold {
                    left.predict(x)
                } else {
                    right.predict(x)
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf(_) => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            TreeNode::Leaf(_) => 1,
            TreeNode::Split { left, right, .. } => left.leaves() + right.leaves(),
        }
    }
}

/// Tree-growing controls.
#[derive(Clone, Copy, Debug)]
pub struct TreeConfig {
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
}

impl Default for TreeConfig {
    fn default() -> TreeConfig {
        TreeConfig {
            min_leaf: TREE_MIN_LEAF,
            max_depth: None,
        }
    }
}

fn mean_of(rows: &[usize], y: &[f64]) -> f64 {
    rows.iter().map(|&r| y[r]).sum::<f64>() / rows.len() as f64
}

fn sse_of(rows: &[usize], y: &[f64], mean: f64) -> f64 {
    rows.iter()
        .map(|&r| {
            let d = y[r] - mean;
            d * d
        })
        .sum()
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn find_split(
    xs: &[Vec<f64>],
    y: &[f64],
    rows: &[usize],
    features: &[usize],
    min_leaf: usize,
    parent_sse: f64,
) -> Option<BestSplit> {
    let mut best: Option<BestSplit> = None;
    let mut values = Vec::with_capacity(rows.len());
    for &f in features {
        values.clear();
        values.extend(rows.iter().map(|&r| xs[r][f]));
        values.sort_unstable_by(f64::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let threshold = (pair[0] + pair[1]) / 2.0;
            let mut left_n = 0usize;
            let mut left_sum = 0.0f64;
            for &r in rows {
                if xs[r][f] <= threshold {
                    left_n += 1;
                    left_sum += y[r];
                }
            }
            let right_n = rows.len() - left_n;
            if left_n < min_leaf || right_n < min_leaf {
                continue;
            }
            let left_mean = left_sum / left_n as f64;
            let mut left_sse = 0.0;
            let mut right_sum = 0.0;
            for &r in rows {
                if xs[r][f] <= threshold {
                    let d = y[r] - left_mean;
                    left_sse += d * d;
                } else {
                    right_sum += y[r];
                }
            }
            let right_mean = right_sum / right_n as f64;
            let mut right_sse = 0.0;
            for &r in rows {
                if xs[r][f] > threshold {
                    let d = y[r] - right_mean;
                    right_sse += d * d;
                }
            }
            let gain = parent_sse - left_sse - right_sse;
            if gain > 0.0 && best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(BestSplit {
                    feature: f,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

fn build(
    xs: &[Vec<f64>],
    y: &[f64],
    rows: &[usize],
    features: &[usize],
    config: &TreeConfig,
    depth: usize,
) -> TreeNode {
    let mean = mean_of(rows, y);
    if rows.len() < 2 * config.min_leaf {
        return TreeNode::Leaf(mean);
    }
    if let Some(cap) = config.max_depth {
        if depth >= cap {
            return TreeNode::Leaf(mean);
        }
    }
    let parent_sse = sse_of(rows, y, mean);
    let Some(split) = find_split(xs, y, rows, features, config.min_leaf, parent_sse) else {
        return TreeNode::Leaf(mean);
    };
    // Stable partition: both children keep the parent's row order.
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&r| xs[r][split.feature] <= split.threshold);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(build(xs, y, &left_rows, features, config, depth + 1)),
        right: Box::new(build(xs, y, &right_rows, features, config, depth + 1)),
    }
}

/// Fit one regression tree on all rows and features.
pub fn fit_tree(xs: &[Vec<f64>], y: &[f64], config: &TreeConfig) -> TreeNode {
    let rows: Vec<usize> = (0..xs.len()).collect();
    let features: Vec<usize> = (0..xs.first().map_or(0, Vec::len)).collect();
    build(xs, y, &rows, &features, config, 0)
}

/// Feature subsampling policy for the forest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mtry {
    /// All features at every tree (used to reduce the forest to a single
    /// deterministic tree).
    All,
    /// `ceil(sqrt(d))` features per tree.
    Sqrt,
}

/// Forest controls.
#[derive(Clone, Copy, Debug)]
pub struct ForestConfig {
    pub trees: usize,
    pub min_leaf: usize,
    pub bootstrap: bool,
    pub mtry: Mtry,
}

impl Default for ForestConfig {
    fn default() -> ForestConfig {
        ForestConfig {
            trees: FOREST_TREES,
            min_leaf: TREE_MIN_LEAF,
            bootstrap: true,
            mtry: Mtry::Sqrt,
        }
    }
}

/// Fit a random forest.  Per-tree randomness is derived from `seed`, so the
/// fit is reproducible and independent of evaluation order.
pub fn fit_forest(xs: &[Vec<f64>], y: &[f64], config: &ForestConfig, seed: u64) -> Vec<TreeNode> {
    let n = xs.len();
    let d = xs.first().map_or(0, Vec::len);
    let tree_config = TreeConfig {
        min_leaf: config.min_leaf,
        max_depth: None,
    };
    let mut trees = Vec::with_capacity(config.trees);
    for t in 0..config.trees {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed("tree", "", &[seed, t as u64]));
        let rows: Vec<usize> = if config.bootstrap {
            (0..n).map(|_| rng.gen_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let features: Vec<usize> = match config.mtry {
            Mtry::All => (0..d).collect(),
            Mtry::Sqrt => {
                let m = (d as f64).sqrt().ceil() as usize;
                let m = m.clamp(1, d.max(1));
                // Partial Fisher-Yates, then sorted so the split scan stays
                // in ascending feature order.
                let mut pool: Vec<usize> = (0..d).collect();
                for i in 0..m {
                    let j = rng.gen_range(i..d);
                    pool.swap(i, j);
                }
                let mut chosen: Vec<usize> = pool[..m].to_vec();
                chosen.sort_unstable();
                chosen
            }
        };
        trees.push(build(xs, y, &rows, &features, &tree_config, 0));
    }
    trees
}

/// Fit gradient-boosted trees on the residuals of a running prediction.
/// Returns `(base, stages)`; predictions are
/// `base + GB_LEARNING_RATE * sum(stage predictions)`.
pub fn fit_boosted(xs: &[Vec<f64>], y: &[f64]) -> (f64, Vec<TreeNode>) {
    let n = xs.len();
    let base = y.iter().sum::<f64>() / n as f64;
    let config = TreeConfig {
        min_leaf: 1,
        max_depth: Some(GB_DEPTH),
    };
    let mut current: Vec<f64> = vec![base; n];
    let mut residual = vec![0.0; n];
    let mut stages = Vec::with_capacity(GB_STAGES);
    for _ in 0..GB_STAGES {
        for i in 0..n {
            residual[i] = y[i] - current[i];
        }
        let tree = fit_tree(xs, &residual, &config);
        for (i, cur) in current.iter_mut().enumerate() {
            *cur += GB_LEARNING_RATE * tree.predict(&xs[i]);
        }
        stages.push(tree);
    }
    (base, stages)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_data() -> (Vec<Vec<f64>>, Vec<f64>) {
        let xs: Vec<Vec<f64>> = (0..10).map(|i| vec![f64::from(u8::from(i >= 5))]).collect();
        let y: Vec<f64> = (0..10).map(|i| if i >= 5 { 10.0 } else { 0.0 }).collect();
        (xs, y)
    }

    #[test]
    fn tree_recovers_a_step_function() {
        let (xs, y) = step_data();
        let tree = fit_tree(&xs, &y, &TreeConfig::default());
        match &tree {
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 0.5, "binary split lands on the midpoint");
                assert_eq!(**left, TreeNode::Leaf(0.0));
                assert_eq!(**right, TreeNode::Leaf(10.0));
            }
            other => panic!("expected a split, got {other:?}"),
        }
        assert_eq!(tree.predict(&[0.0]), 0.0);
        assert_eq!(tree.predict(&[1.0]), 10.0);
    }

    #[test]
    fn min_leaf_blocks_small_partitions() {
        // 9 zeros and a single one: any split strands the singleton.
        let xs: Vec<Vec<f64>> = (0..10).map(|i| vec![f64::from(u8::from(i == 9))]).collect();
        let y: Vec<f64> = (0..10).map(|i| if i == 9 { 10.0 } else { 0.0 }).collect();
        let tree = fit_tree(&xs, &y, &TreeConfig::default());
        assert_eq!(tree, TreeNode::Leaf(1.0));
    }

    #[test]
    fn constant_targets_fit_a_single_leaf() {
        let xs: Vec<Vec<f64>> = (0..12)
            .map(|i| vec![(i % 3) as f64, (i % 2) as f64])
            .collect();
        let y = vec![4.5; 12];
        let tree = fit_tree(&xs, &y, &TreeConfig::default());
        assert_eq!(tree, TreeNode::Leaf(4.5));
    }

    #[test]
    fn depth_cap_is_respected() {
        let xs: Vec<Vec<f64>> = (0..32).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..32).map(|i| i as f64).collect();
        let config = TreeConfig {
            min_leaf: 1,
            max_depth: Some(3),
        };
        let tree = fit_tree(&xs, &y, &config);
        assert!(tree.depth() <= 3);
        assert!(tree.leaves() <= 8);
    }

    #[test]
    fn single_tree_forest_without_bootstrap_is_the_plain_tree() {
        let xs: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![(i % 4) as f64, ((i / 4) % 3) as f64, (i % 2) as f64])
            .collect();
        let y: Vec<f64> = (0..20).map(|i| ((i * 7) % 23) as f64).collect();
        let config = ForestConfig {
            trees: 1,
            bootstrap: false,
            mtry: Mtry::All,
            min_leaf: TREE_MIN_LEAF,
        };
        let forest = fit_forest(&xs, &y, &config, 123);
        let tree = fit_tree(&xs, &y, &TreeConfig::default());
        assert_eq!(forest.len(), 1);
        assert_eq!(forest[0], tree);
    }

    #[test]
    fn forest_fit_is_seed_deterministic() {
        let xs: Vec<Vec<f64>> = (0..15)
            .map(|i| (0..4).map(|j| ((i + j) % 3) as f64).collect())
            .collect();
        let y: Vec<f64> = (0..15).map(|i| (i % 5) as f64).collect();
        let config = ForestConfig {
            trees: 8,
            ..ForestConfig::default()
        };
        let a = fit_forest(&xs, &y, &config, 9);
        let b = fit_forest(&xs, &y, &config, 9);
        assert_eq!(a, b);
        let c = fit_forest(&xs, &y, &config, 10);
        assert_ne!(a, c, "different seeds should bootstrap differently");
    }

    #[test]
    fn boosting_drives_training_error_down_geometrically() {
        // Two points, min_leaf 1: every stage fits the residual exactly, so
        // the error shrinks by the learning rate each stage.
        let xs = vec![vec![0.0], vec![1.0]];
        let y = vec![0.0, 10.0];
        let (base, stages) = fit_boosted(&xs, &y);
        assert_eq!(base, 5.0);
        assert_eq!(stages.len(), GB_STAGES);
        let predict =
            |x: &[f64]| base + GB_LEARNING_RATE * stages.iter().map(|t| t.predict(x)).sum::<f64>();
        let expected_err = 5.0 * (1.0 - GB_LEARNING_RATE).powi(GB_STAGES as i32);
        assert!((predict(&[0.0]) - 0.0).abs() <= expected_err + 1e-9);
        assert!((predict(&[1.0]) - 10.0).abs() <= expected_err + 1e-9);
        assert!(predict(&[1.0]) > 9.99);
    }

    #[test]
    fn boosting_on_constant_targets_stays_constant() {
        let xs: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let y = vec![7.0; 6];
        let (base, stages) = fit_boosted(&xs, &y);
        assert_eq!(base, 7.0);
        let total: f64 = stages.iter().map(|t| t.predict(&[3.0])).sum();
        assert_eq!(total, 0.0);
    }
}
