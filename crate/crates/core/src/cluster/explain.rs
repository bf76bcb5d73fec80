//! Decision-tree explanations of clusters in ludeme space.
//!
//! A shallow Gini-impurity classification tree is fit on the non-noise
//! games, predicting cluster membership from the binary ludeme features.
//! Leaf paths become human-readable rules (`ludeme=present` /
//! `ludeme=absent`), reported per cluster with the tree's accuracy on the
//! clustered games.

use std::fmt::Write as _;

use crate::cluster::dbscan::Clustering;
use crate::dataset::FeatureMatrix;

/// Default depth cap for the explanation tree.
pub const DEFAULT_MAX_DEPTH: usize = 3;

#[derive(Clone, Debug)]
enum Node {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        left: Box<Node>,
        right: Box<Node>,
    },
}

fn gini(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let f = c as f64 / t;
            f * f
        })
        .sum::<f64>()
}

fn class_counts(rows: &[usize], labels: &[usize], classes: usize) -> Vec<usize> {
    let mut counts = vec![0usize; classes];
    for &r in rows {
        counts[labels[r]] += 1;
    }
    counts
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

fn build(
    xs: &[Vec<u8>],
    labels: &[usize],
    rows: &[usize],
    classes: usize,
    depth: usize,
    max_depth: usize,
) -> Node {
    let counts = class_counts(rows, labels, classes);
    let parent_gini = gini(&counts);
    if depth >= max_depth || parent_gini == 0.0 {
        return Node::Leaf {
            class: majority(&counts),
        };
    }
    let d = xs.first().map_or(0, Vec::len);
    let mut best: Option<(usize, f64)> = None;
    // Column access across rows: the feature id is the split payload.
    #[allow(clippy::needless_range_loop)]
    for f in 0..d {
        let mut left_counts = vec![0usize; classes];
        let mut right_counts = vec![0usize; classes];
        for &r in rows {
            if xs[r][f] == 0 {
                left_counts[labels[r]] += 1;
            } else {
                right_counts[labels[r]] += 1;
            }
        }
        let ln: usize = left_counts.iter().sum();
        let rn: usize = right_counts.iter().sum();
        if ln == 0 || rn == 0 {
            continue;
        }
        let weighted =
            (ln as f64 * gini(&left_counts) + rn as f64 * gini(&right_counts)) / rows.len() as f64;
        let gain = parent_gini - weighted;
        if gain > 1e-12 && best.is_none_or(|(_, g)| gain > g) {
            best = Some((f, gain));
        }
    }
    let Some((feature, _)) = best else {
        return Node::Leaf {
            class: majority(&counts),
        };
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
        rows.iter().partition(|&&r| xs[r][feature] == 0);
    Node::Split {
        feature,
        left: Box::new(build(xs, labels, &left_rows, classes, depth + 1, max_depth)),
        right: Box::new(build(
            xs,
            labels,
            &right_rows,
            classes,
            depth + 1,
            max_depth,
        )),
    }
}

fn predict(node: &Node, x: &[u8]) -> usize {
    match node {
        Node::Leaf { class } => *class,
        Node::Split {
            feature,
            left,
            right,
        } => {
            if x[*feature] == 0 {
                predict(left, x)
            } else {
                predict(right, x)
            }
        }
    }
}

fn collect_rules(
    node: &Node,
    features: &[String],
    path: &mut Vec<(usize, bool)>,
    out: &mut Vec<(usize, String)>,
) {
    match node {
        Node::Leaf { class } => {
            let rule = if path.is_empty() {
                "always".to_string()
            } else {
                path.iter()
                    .map(|&(f, present)| {
                        format!(
                            "{}={}",
                            features[f],
                            if present { "present" } else { "absent" }
                        )
                    })
                    .collect::<Vec<_>>()
                    .join(" AND ")
            };
            out.push((*class, rule));
        }
        Node::Split {
            feature,
            left,
            right,
        } => {
            path.push((*feature, false));
            collect_rules(left, features, path, out);
            path.pop();
            path.push((*feature, true));
            collect_rules(right, features, path, out);
            path.pop();
        }
    }
}

/// The rendered account of a clustering.
#[derive(Clone, Debug)]
pub struct ClusterExplanation {
    pub clusters: usize,
    pub sizes: Vec<usize>,
    /// Names of noise games, in corpus order.
    pub noise: Vec<String>,
    /// Accuracy of the rule tree on the clustered games (1.0 when there is
    /// nothing to classify).
    pub accuracy: f64,
    /// Disjunctive rule per cluster, in cluster order.
    pub rules: Vec<String>,
    /// Ludeme the root splits on, when the tree has any split.
    pub root_feature: Option<String>,
}

/// Fit the explanation tree and extract per-cluster rules.
pub fn explain_clusters(
    matrix: &FeatureMatrix,
    clustering: &Clustering,
    max_depth: usize,
) -> ClusterExplanation {
    debug_assert_eq!(matrix.n_games(), clustering.labels.len());
    let noise: Vec<String> = matrix
        .games
        .iter()
        .zip(clustering.labels.iter())
        .filter(|(_, l)| l.is_none())
        .map(|(g, _)| g.clone())
        .collect();
    let rows: Vec<usize> = (0..matrix.n_games())
        .filter(|&g| clustering.labels[g].is_some())
        .collect();
    let labels: Vec<usize> = clustering
        .labels
        .iter()
        .map(|l| l.unwrap_or(usize::MAX))
        .collect();
    let sizes = clustering.cluster_sizes();
    if clustering.clusters == 0 || rows.is_empty() {
        return ClusterExplanation {
            clusters: 0,
            sizes,
            noise,
            accuracy: 1.0,
            rules: Vec::new(),
            root_feature: None,
        };
    }
    let tree = build(
        &matrix.rows,
        &labels,
        &rows,
        clustering.clusters,
        0,
        max_depth,
    );
    let correct = rows
        .iter()
        .filter(|&&r| predict(&tree, &matrix.rows[r]) == labels[r])
        .count();
    let accuracy = correct as f64 / rows.len() as f64;
    let mut leaf_rules = Vec::new();
    collect_rules(&tree, &matrix.features, &mut Vec::new(), &mut leaf_rules);
    let rules = (0..clustering.clusters)
        .map(|c| {
            let mine: Vec<&str> = leaf_rules
                .iter()
                .filter(|(class, _)| *class == c)
                .map(|(_, r)| r.as_str())
                .collect();
            if mine.is_empty() {
                "(no leaf predicts this cluster)".to_string()
            } else {
                mine.join(" OR ")
            }
        })
        .collect();
    let root_feature = match &tree {
        Node::Split { feature, .. } => Some(matrix.features[*feature].clone()),
        Node::Leaf { .. } => None,
    };
    ClusterExplanation {
        clusters: clustering.clusters,
        sizes,
        noise,
        accuracy,
        rules,
        root_feature,
    }
}

/// Plain-text rendering written to `explanation.txt`.
pub fn render_explanation(e: &ClusterExplanation) -> String {
    let mut out = String::new();
    if e.clusters == 0 {
        out.push_str("no clusters found (every game was classified as noise)\n");
    } else {
        let _ = writeln!(
            out,
            "clusters={} noise={} tree_accuracy={:.4}",
            e.clusters,
            e.noise.len(),
            e.accuracy
        );
        for (c, (size, rule)) in e.sizes.iter().zip(e.rules.iter()).enumerate() {
            let _ = writeln!(out, "cluster {c}: size={size} rule: {rule}");
        }
    }
    if !e.noise.is_empty() {
        let _ = writeln!(out, "noise games: {}", e.noise.join(", "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: Vec<Vec<u8>>, features: &[&str]) -> FeatureMatrix {
        FeatureMatrix {
            games: (0..rows.len()).map(|i| format!("G{i}")).collect(),
            features: features.iter().map(|s| s.to_string()).collect(),
            rows,
            label_names: Vec::new(),
            labels: Vec::new(),
        }
    }

    fn clustering(labels: Vec<Option<usize>>) -> Clustering {
        let clusters = labels.iter().flatten().copied().max().map_or(0, |m| m + 1);
        Clustering { labels, clusters }
    }

    #[test]
    fn single_feature_split_is_explained_exactly() {
        let m = matrix(
            vec![
                vec![0, 1],
                vec![0, 0],
                vec![0, 1],
                vec![1, 0],
                vec![1, 1],
                vec![1, 0],
            ],
            &["sow", "board"],
        );
        let c = clustering(vec![Some(0), Some(0), Some(0), Some(1), Some(1), Some(1)]);
        let e = explain_clusters(&m, &c, DEFAULT_MAX_DEPTH);
        assert_eq!(e.clusters, 2);
        assert_eq!(e.sizes, vec![3, 3]);
        assert_eq!(e.accuracy, 1.0);
        assert_eq!(e.root_feature.as_deref(), Some("sow"));
        assert_eq!(e.rules[0], "sow=absent");
        assert_eq!(e.rules[1], "sow=present");
    }

    #[test]
    fn noise_rows_are_listed_but_not_classified() {
        let m = matrix(
            vec![vec![0], vec![0], vec![1], vec![1], vec![1]],
            &["track"],
        );
        let c = clustering(vec![Some(0), Some(0), Some(1), Some(1), None]);
        let e = explain_clusters(&m, &c, DEFAULT_MAX_DEPTH);
        assert_eq!(e.noise, vec!["G4"]);
        assert_eq!(e.accuracy, 1.0);
        let text = render_explanation(&e);
        assert!(text.contains("clusters=2 noise=1 tree_accuracy=1.0000"));
        assert!(text.contains("noise games: G4"));
    }

    #[test]
    fn all_noise_renders_the_empty_note() {
        let m = matrix(vec![vec![0], vec![1]], &["track"]);
        let c = clustering(vec![None, None]);
        let e = explain_clusters(&m, &c, DEFAULT_MAX_DEPTH);
        assert_eq!(e.clusters, 0);
        let text = render_explanation(&e);
        assert!(text.starts_with("no clusters found"));
        assert!(text.contains("G0, G1"));
    }

    #[test]
    fn depth_cap_limits_rule_length() {
        // Cluster 0 is the conjunction a AND b; depth 1 can only manage a
        // single test, depth 2 recovers the conjunction exactly.
        let m = matrix(
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![1, 0],
                vec![1, 1],
                vec![0, 0],
                vec![0, 1],
                vec![1, 0],
                vec![1, 1],
            ],
            &["a", "b"],
        );
        let c = clustering(vec![
            Some(1),
            Some(1),
            Some(1),
            Some(0),
            Some(1),
            Some(1),
            Some(1),
            Some(0),
        ]);
        let shallow = explain_clusters(&m, &c, 1);
        for rule in &shallow.rules {
            assert!(!rule.contains(" AND "), "depth-1 rules are single tests");
        }
        assert!(shallow.accuracy < 1.0);
        let deep = explain_clusters(&m, &c, 2);
        assert_eq!(deep.accuracy, 1.0, "depth 2 captures the conjunction");
        assert_eq!(deep.rules[0], "a=present AND b=present");
    }

    #[test]
    fn majority_ties_prefer_the_lowest_cluster() {
        let m = matrix(vec![vec![0], vec![0]], &["a"]);
        let c = clustering(vec![Some(1), Some(0)]);
        let e = explain_clusters(&m, &c, 2);
        // One row per class and no usable split: the leaf predicts class 0.
        assert_eq!(e.accuracy, 0.5);
        assert_eq!(e.rules[0], "always");
        assert_eq!(e.rules[1], "(no leaf predicts this cluster)");
    }
}
