//! Corpus embedding and cluster analysis.
//!
//! The pipeline embeds the binary ludeme matrix into two dimensions with
//! exact t-SNE, groups the embedded games with DBSCAN, then explains the
//! groups with a shallow decision tree over the original ludeme features.

pub mod dbscan;
pub mod explain;
pub mod tsne;

pub use dbscan::{dbscan, default_eps, Clustering, DbscanConfig, DEFAULT_MIN_PTS};
pub use explain::{explain_clusters, render_explanation, ClusterExplanation, DEFAULT_MAX_DEPTH};
pub use tsne::{
    gradient, joint_affinities, kl_divergence, pairwise_sq_distances, tsne, Embedding, TsneConfig,
    TsneError,
};

use crate::dataset::FeatureMatrix;

/// Result of the full embed-cluster-explain pipeline.
#[derive(Clone, Debug)]
pub struct ClusterAnalysis {
    pub embedding: Embedding,
    pub eps: f64,
    pub clustering: Clustering,
    pub explanation: ClusterExplanation,
}

/// Run t-SNE, DBSCAN (with the default radius when `eps` is `None`), and
/// the rule extraction in one call.
pub fn analyze(
    matrix: &FeatureMatrix,
    tsne_config: &TsneConfig,
    eps: Option<f64>,
    min_pts: usize,
    max_depth: usize,
) -> Result<ClusterAnalysis, TsneError> {
    let rows: Vec<Vec<f64>> = (0..matrix.n_games()).map(|g| matrix.row_f64(g)).collect();
    let embedding = tsne(&rows, tsne_config)?;
    let eps = eps.unwrap_or_else(|| default_eps(&embedding.points));
    let clustering = dbscan(&embedding.points, &DbscanConfig { eps, min_pts });
    let explanation = explain_clusters(matrix, &clustering, max_depth);
    Ok(ClusterAnalysis {
        embedding,
        eps,
        clustering,
        explanation,
    })
}

/// CSV of the embedded points and their cluster assignments.
pub fn embedding_csv(matrix: &FeatureMatrix, analysis: &ClusterAnalysis, seed: u64) -> String {
    use std::fmt::Write as _;
    let mut out = format!(
        "# seed={} eps={} clusters={} initialKL={} finalKL={}\n",
        seed,
        analysis.eps,
        analysis.clustering.clusters,
        analysis.embedding.initial_kl,
        analysis.embedding.final_kl
    );
    out.push_str("game,x,y,cluster\n");
    for (g, name) in matrix.games.iter().enumerate() {
        let p = analysis.embedding.points[g];
        let cluster = analysis.clustering.labels[g]
            .map(|c| c.to_string())
            .unwrap_or_else(|| "noise".to_string());
        let _ = writeln!(out, "{},{},{},{}", name, p[0], p[1], cluster);
    }
    out
}
