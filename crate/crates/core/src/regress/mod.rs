//! From-scratch regression suite with leave-one-out evaluation.
//!
//! Eight algorithms map a game's binary ludeme vector to the win percentage
//! of each portfolio slot.  Every prediction is clamped to the label range
//! `[0, 100]`.  Evaluation is leave-one-out per (algorithm, slot): the
//! reported numbers are the mean and spread of per-slot MAE, plus the
//! selection quality when each game plays the heuristic its predictions
//! rank first (expected win rate, and regret against the true best slot).

pub mod linear;
pub mod tree;

pub use linear::{elastic_net_kkt_residual, fit_elastic_net, fit_ridge, solve_linear_system};
pub use tree::{fit_boosted, fit_forest, fit_tree, ForestConfig, Mtry, TreeConfig, TreeNode};

use std::fmt::Write as _;

use thiserror::Error;

use crate::dataset::FeatureMatrix;
use crate::tournament::derive_seed;

/// Ridge penalty.
pub const RIDGE_LAMBDA: f64 = 1.0;
/// Lasso penalty.
pub const LASSO_LAMBDA: f64 = 1.0;
/// Elastic-net penalty.
pub const ELASTIC_LAMBDA: f64 = 1.0;
/// Elastic-net L1 share.
pub const ELASTIC_ALPHA: f64 = 0.5;
/// Neighbor count.
pub const KNN_K: usize = 5;

/// Lower label bound.
pub const LABEL_MIN: f64 = 0.0;
/// Upper label bound.
pub const LABEL_MAX: f64 = 100.0;

#[derive(Debug, Error)]
pub enum RegressError {
    #[error("the feature matrix has no label columns")]
    NoLabels,
}

/// The eight regression algorithms, in reporting order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Naive,
    Ridge,
    Lasso,
    ElasticNet,
    KNeighbors,
    DecisionTree,
    RandomForest,
    GradientBoosting,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Naive,
        Algorithm::Ridge,
        Algorithm::Lasso,
        Algorithm::ElasticNet,
        Algorithm::KNeighbors,
        Algorithm::DecisionTree,
        Algorithm::RandomForest,
        Algorithm::GradientBoosting,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Naive => "Naive",
            Algorithm::Ridge => "Ridge",
            Algorithm::Lasso => "Lasso",
            Algorithm::ElasticNet => "ElasticNet",
            Algorithm::KNeighbors => "KNeighbors",
            Algorithm::DecisionTree => "DecisionTree",
            Algorithm::RandomForest => "RandomForest",
            Algorithm::GradientBoosting => "GradientBoosting",
        }
    }
}

/// A fitted model of any algorithm.
#[derive(Clone, Debug)]
pub enum FittedModel {
    Constant(f64),
    Linear {
        weights: Vec<f64>,
        intercept: f64,
    },
    Nearest {
        xs: Vec<Vec<f64>>,
        y: Vec<f64>,
        k: usize,
    },
    Tree(TreeNode),
    Forest(Vec<TreeNode>),
    Boosted {
        base: f64,
        stages: Vec<TreeNode>,
    },
}

impl FittedModel {
    /// Predict a label, clamped to the label range.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let raw = match self {
            FittedModel::Constant(v) => *v,
            FittedModel::Linear { weights, intercept } => {
                intercept
                    + weights
                        .iter()
                        .zip(x.iter())
                        .map(|(w, v)| w * v)
                        .sum::<f64>()
            }
            FittedModel::Nearest { xs, y, k } => {
                let mut order: Vec<(f64, usize)> = xs
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        let d2: f64 = row
                            .iter()
                            .zip(x.iter())
                            .map(|(a, b)| {
                                let d = a - b;
                                d * d
                            })
                            .sum();
                        (d2, i)
                    })
                    .collect();
                // Distance ties break toward the lower row index.
                order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let k = (*k).min(order.len());
                order[..k].iter().map(|&(_, i)| y[i]).sum::<f64>() / k as f64
            }
            FittedModel::Tree(tree) => tree.predict(x),
            FittedModel::Forest(trees) => {
                trees.iter().map(|t| t.predict(x)).sum::<f64>() / trees.len() as f64
            }
            FittedModel::Boosted { base, stages } => {
                base + tree::GB_LEARNING_RATE * stages.iter().map(|t| t.predict(x)).sum::<f64>()
            }
        };
        raw.clamp(LABEL_MIN, LABEL_MAX)
    }
}

/// Fit `alg` on the given rows.  Only the random forest consumes `seed`.
pub fn fit(alg: Algorithm, xs: &[Vec<f64>], y: &[f64], seed: u64) -> FittedModel {
    match alg {
        Algorithm::Naive => FittedModel::Constant(y.iter().sum::<f64>() / y.len() as f64),
        Algorithm::Ridge => {
            let (weights, intercept) = fit_ridge(xs, y, RIDGE_LAMBDA);
            FittedModel::Linear { weights, intercept }
        }
        Algorithm::Lasso => {
            let (weights, intercept) = fit_elastic_net(xs, y, LASSO_LAMBDA, 1.0);
            FittedModel::Linear { weights, intercept }
        }
        Algorithm::ElasticNet => {
            let (weights, intercept) = fit_elastic_net(xs, y, ELASTIC_LAMBDA, ELASTIC_ALPHA);
            FittedModel::Linear { weights, intercept }
        }
        Algorithm::KNeighbors => FittedModel::Nearest {
            xs: xs.to_vec(),
            y: y.to_vec(),
            k: KNN_K,
        },
        Algorithm::DecisionTree => FittedModel::Tree(fit_tree(xs, y, &TreeConfig::default())),
        Algorithm::RandomForest => {
            FittedModel::Forest(fit_forest(xs, y, &ForestConfig::default(), seed))
        }
        Algorithm::GradientBoosting => {
            let (base, stages) = fit_boosted(xs, y);
            FittedModel::Boosted { base, stages }
        }
    }
}

/// Leave-one-out predictions, one per row, in row order.
pub fn loocv(alg: Algorithm, xs: &[Vec<f64>], y: &[f64], seed: u64) -> Vec<f64> {
    let n = xs.len();
    (0..n)
        .map(|held| {
            let train_x: Vec<Vec<f64>> = xs
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != held)
                .map(|(_, row)| row.clone())
                .collect();
            let train_y: Vec<f64> = y
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != held)
                .map(|(_, v)| *v)
                .collect();
            let fold_seed = derive_seed("fold", "", &[seed, held as u64]);
            fit(alg, &train_x, &train_y, fold_seed).predict(&xs[held])
        })
        .collect()
}

/// Mean absolute error.
pub fn mae(pred: &[f64], truth: &[f64]) -> f64 {
    debug_assert_eq!(pred.len(), truth.len());
    pred.iter()
        .zip(truth.iter())
        .map(|(p, t)| (p - t).abs())
        .sum::<f64>()
        / pred.len() as f64
}

/// Selection quality of per-game slot predictions against the truth:
/// `(expected win rate, regret, mean best win rate)`.  Each game plays the
/// slot its predictions rank first (ties to the lowest slot index); regret
/// is measured against the true best slot.
pub fn selection_metrics(preds: &[Vec<f64>], truth: &[Vec<f64>]) -> (f64, f64, f64) {
    debug_assert_eq!(preds.len(), truth.len());
    let n = preds.len() as f64;
    let mut chosen_sum = 0.0;
    let mut regret_sum = 0.0;
    let mut best_sum = 0.0;
    for (p, t) in preds.iter().zip(truth.iter()) {
        let mut chosen = 0;
        for (s, &v) in p.iter().enumerate() {
            if v > p[chosen] {
                chosen = s;
            }
        }
        let best = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        chosen_sum += t[chosen];
        regret_sum += best - t[chosen];
        best_sum += best;
    }
    (chosen_sum / n, regret_sum / n, best_sum / n)
}

/// Full leave-one-out evaluation of one algorithm.
#[derive(Clone, Debug)]
pub struct AlgorithmReport {
    pub algorithm: Algorithm,
    /// Per-label-column MAE over held-out games.
    pub mae_per_slot: Vec<f64>,
    pub mae_mean: f64,
    /// Population standard deviation of the per-slot MAEs.
    pub mae_stdev: f64,
    pub expected_win_rate: f64,
    pub regret: f64,
    /// Mean over games of the true best slot's label; equals
    /// `expected_win_rate + regret` up to rounding.
    pub mean_best_win_rate: f64,
    /// Held-out predictions, `[game][slot]`.
    pub predictions: Vec<Vec<f64>>,
}

/// Run every algorithm over every label column of a labeled matrix.
pub fn evaluate_suite(
    matrix: &FeatureMatrix,
    seed: u64,
) -> Result<Vec<AlgorithmReport>, RegressError> {
    if matrix.label_names.is_empty() || matrix.labels.is_empty() {
        return Err(RegressError::NoLabels);
    }
    let xs: Vec<Vec<f64>> = (0..matrix.n_games()).map(|g| matrix.row_f64(g)).collect();
    let slots = matrix.label_names.len();
    let games = matrix.n_games();
    let mut reports = Vec::with_capacity(Algorithm::ALL.len());
    for (ai, &alg) in Algorithm::ALL.iter().enumerate() {
        let mut predictions = vec![vec![0.0; slots]; games];
        let mut mae_per_slot = Vec::with_capacity(slots);
        for s in 0..slots {
            let y: Vec<f64> = matrix.labels.iter().map(|row| row[s]).collect();
            let slot_seed = derive_seed("slot", alg.name(), &[seed, ai as u64, s as u64]);
            let preds = loocv(alg, &xs, &y, slot_seed);
            mae_per_slot.push(mae(&preds, &y));
            for (g, p) in preds.into_iter().enumerate() {
                predictions[g][s] = p;
            }
        }
        let mae_mean = mae_per_slot.iter().sum::<f64>() / slots as f64;
        let var = mae_per_slot
            .iter()
            .map(|m| {
                let d = m - mae_mean;
                d * d
            })
            .sum::<f64>()
            / slots as f64;
        let (expected_win_rate, regret, mean_best_win_rate) =
            selection_metrics(&predictions, &matrix.labels);
        reports.push(AlgorithmReport {
            algorithm: alg,
            mae_per_slot,
            mae_mean,
            mae_stdev: var.sqrt(),
            expected_win_rate,
            regret,
            mean_best_win_rate,
            predictions,
        });
    }
    Ok(reports)
}

/// The headline table, one row per algorithm.
pub fn report_csv(reports: &[AlgorithmReport], seed: u64, games: usize) -> String {
    let mut out = format!("# seed={seed} games={games}\n");
    out.push_str("algorithm,mae_mean,mae_stdev,expected_win_rate,regret\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{:.4},{:.4},{:.4},{:.4}",
            r.algorithm.name(),
            r.mae_mean,
            r.mae_stdev,
            r.expected_win_rate,
            r.regret
        );
    }
    out
}

/// Per-slot MAE breakdown, one row per (algorithm, label column).
pub fn mae_per_slot_csv(reports: &[AlgorithmReport], label_names: &[String], seed: u64) -> String {
    let mut out = format!("# seed={seed}\n");
    out.push_str("algorithm,heuristic,sign,mae\n");
    for r in reports {
        for (name, m) in label_names.iter().zip(r.mae_per_slot.iter()) {
            let mut parts = name.splitn(3, ':');
            let _tag = parts.next();
            let kind = parts.next().unwrap_or(name);
            let sign = parts.next().unwrap_or("");
            let _ = writeln!(out, "{},{},{},{:.4}", r.algorithm.name(), kind, sign, m);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::label_columns;

    fn toy_labeled_matrix() -> FeatureMatrix {
        let games: Vec<String> = (0..8).map(|i| format!("G{i}")).collect();
        let features: Vec<String> = vec!["alpha".into(), "beta".into(), "gamma".into()];
        let rows: Vec<Vec<u8>> = (0..8)
            .map(|i| vec![(i % 2) as u8, ((i / 2) % 2) as u8, ((i / 4) % 2) as u8])
            .collect();
        let label_names = label_columns();
        let labels: Vec<Vec<f64>> = (0..8)
            .map(|g| {
                (0..label_names.len())
                    .map(|s| (((g * 31 + s * 17) % 101) as f64).clamp(0.0, 100.0))
                    .collect()
            })
            .collect();
        FeatureMatrix {
            games,
            features,
            rows,
            label_names,
            labels,
        }
    }

    #[test]
    fn algorithm_order_is_fixed() {
        let names: Vec<&str> = Algorithm::ALL.iter().map(|a| a.name()).collect();
        assert_eq!(
            names,
            vec![
                "Naive",
                "Ridge",
                "Lasso",
                "ElasticNet",
                "KNeighbors",
                "DecisionTree",
                "RandomForest",
                "GradientBoosting"
            ]
        );
    }

    #[test]
    fn naive_loocv_matches_the_closed_form() {
        let xs: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64]).collect();
        let y = vec![3.0, 9.0, 27.0, 1.0, 50.0, 8.0, 2.0];
        let preds = loocv(Algorithm::Naive, &xs, &y, 0);
        let total: f64 = y.iter().sum();
        for (i, p) in preds.iter().enumerate() {
            let expect = ((total - y[i]) / 6.0).clamp(LABEL_MIN, LABEL_MAX);
            assert!((p - expect).abs() < 1e-9, "fold {i}: {p} vs {expect}");
        }
    }

    #[test]
    fn knn_breaks_distance_ties_by_row_index() {
        let xs = vec![vec![0.0]; 7];
        let y = vec![1.0, 2.0, 3.0, 4.0, 5.0, 60.0, 70.0];
        let model = fit(Algorithm::KNeighbors, &xs, &y, 0);
        // All distances tie, so the five lowest-index rows win.
        assert_eq!(model.predict(&[0.0]), 3.0);
    }

    #[test]
    fn knn_shrinks_k_on_tiny_training_sets() {
        let xs = vec![vec![0.0], vec![1.0]];
        let y = vec![10.0, 20.0];
        let model = fit(Algorithm::KNeighbors, &xs, &y, 0);
        assert_eq!(model.predict(&[0.0]), 15.0);
    }

    #[test]
    fn predictions_clamp_to_the_label_range() {
        let xs = vec![vec![0.0], vec![1.0]];
        let y = vec![0.0, 100.0];
        let model = fit(Algorithm::Ridge, &xs, &y, 0);
        assert_eq!(model.predict(&[5.0]), 100.0);
        assert_eq!(model.predict(&[-5.0]), 0.0);
    }

    #[test]
    fn selection_metrics_satisfy_the_regret_identity() {
        let truth = vec![
            vec![10.0, 50.0, 30.0],
            vec![70.0, 20.0, 70.0],
            vec![5.0, 5.0, 5.0],
        ];
        let preds = vec![
            vec![1.0, 0.0, 2.0], // picks slot 2 (30), best 50
            vec![3.0, 3.0, 1.0], // tie -> slot 0 (70), best 70
            vec![0.0, 9.0, 0.0], // picks slot 1 (5), best 5
        ];
        let (ewr, regret, best) = selection_metrics(&preds, &truth);
        assert!((ewr - (30.0 + 70.0 + 5.0) / 3.0).abs() < 1e-12);
        assert!((regret - 20.0 / 3.0).abs() < 1e-12);
        assert!((ewr + regret - best).abs() < 1e-10, "identity violated");
        // A perfect predictor has zero regret.
        let (ewr, regret, best) = selection_metrics(&truth, &truth);
        assert_eq!(regret, 0.0);
        assert!((ewr - best).abs() < 1e-12);
    }

    #[test]
    fn suite_runs_every_algorithm_and_is_deterministic() {
        let matrix = toy_labeled_matrix();
        let a = evaluate_suite(&matrix, 5).unwrap();
        let b = evaluate_suite(&matrix, 5).unwrap();
        assert_eq!(a.len(), 8);
        for (ra, rb) in a.iter().zip(b.iter()) {
            assert_eq!(ra.predictions, rb.predictions, "{}", ra.algorithm.name());
            assert!(ra.mae_mean.is_finite());
            assert!(ra.mae_stdev.is_finite());
            assert!(
                (ra.expected_win_rate + ra.regret - ra.mean_best_win_rate).abs() < 1e-10,
                "{}: identity violated",
                ra.algorithm.name()
            );
            assert!(ra.regret >= 0.0);
            assert_eq!(ra.mae_per_slot.len(), matrix.label_names.len());
        }
    }

    #[test]
    fn csv_reports_have_the_pinned_schemas() {
        let matrix = toy_labeled_matrix();
        let reports = evaluate_suite(&matrix, 2).unwrap();
        let head = report_csv(&reports, 2, matrix.n_games());
        let mut lines = head.lines();
        assert_eq!(lines.next().unwrap(), "# seed=2 games=8");
        assert_eq!(
            lines.next().unwrap(),
            "algorithm,mae_mean,mae_stdev,expected_win_rate,regret"
        );
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 8);
        assert!(rows[0].starts_with("Naive,"));
        assert!(rows[7].starts_with("GradientBoosting,"));
        for row in rows {
            assert_eq!(row.split(',').count(), 5);
        }
        let per_slot = mae_per_slot_csv(&reports, &matrix.label_names, 2);
        let mut lines = per_slot.lines();
        assert_eq!(lines.next().unwrap(), "# seed=2");
        assert_eq!(lines.next().unwrap(), "algorithm,heuristic,sign,mae");
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 8 * 27);
        assert!(rows[0].starts_with("Naive,Material,+,"));
        assert!(rows[26].starts_with("Naive,Null,+,"));
    }
}
