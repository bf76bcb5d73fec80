//! Density-based clustering of the 2-D embedding.
//!
//! Classic DBSCAN with inclusive distance comparisons and the point itself
//! counted in its own neighborhood.  Points are scanned in index order and
//! clusters are numbered in discovery order, so results are deterministic.

/// Default neighborhood size threshold (including the point itself).
pub const DEFAULT_MIN_PTS: usize = 4;

/// Fraction of the bounding-box diagonal used for the default radius.
pub const DEFAULT_EPS_FRACTION: f64 = 0.05;

/// DBSCAN parameters.
#[derive(Clone, Copy, Debug)]
pub struct DbscanConfig {
    pub eps: f64,
    pub min_pts: usize,
}

/// Cluster assignment per point; `None` marks noise.
#[derive(Clone, Debug, PartialEq)]
pub struct Clustering {
    pub labels: Vec<Option<usize>>,
    pub clusters: usize,
}

impl Clustering {
    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_none()).count()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.clusters];
        for l in self.labels.iter().flatten() {
            sizes[*l] += 1;
        }
        sizes
    }
}

/// The default radius: a fixed fraction of the embedding's bounding-box
/// diagonal.
pub fn default_eps(points: &[[f64; 2]]) -> f64 {
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for p in points {
        for c in 0..2 {
            min[c] = min[c].min(p[c]);
            max[c] = max[c].max(p[c]);
        }
    }
    if points.is_empty() {
        return 0.0;
    }
    let dx = max[0] - min[0];
    let dy = max[1] - min[1];
    DEFAULT_EPS_FRACTION * (dx * dx + dy * dy).sqrt()
}

fn neighbors(points: &[[f64; 2]], i: usize, eps: f64) -> Vec<usize> {
    let eps2 = eps * eps;
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| {
            let dx = p[0] - points[i][0];
            let dy = p[1] - points[i][1];
            dx * dx + dy * dy <= eps2
        })
        .map(|(j, _)| j)
        .collect()
}

/// Run DBSCAN over the embedded points.
pub fn dbscan(points: &[[f64; 2]], config: &DbscanConfig) -> Clustering {
    #[derive(Clone, Copy, PartialEq)]
    enum State {
        Unvisited,
        Noise,
        Cluster(usize),
    }
    let n = points.len();
    let mut state = vec![State::Unvisited; n];
    let mut clusters = 0usize;
    for i in 0..n {
        if state[i] != State::Unvisited {
            continue;
        }
        let seed_neighbors = neighbors(points, i, config.eps);
        if seed_neighbors.len() < config.min_pts {
            state[i] = State::Noise;
            continue;
        }
        let id = clusters;
        clusters += 1;
        state[i] = State::Cluster(id);
        let mut queue: std::collections::VecDeque<usize> = seed_neighbors.into();
        while let Some(j) = queue.pop_front() {
            match state[j] {
                State::Cluster(_) => continue,
                State::Noise => {
                    // A former noise point on the border joins the cluster
                    // but does not expand it.
                    state[j] = State::Cluster(id);
                    continue;
                }
                State::Unvisited => {
                    state[j] = State::Cluster(id);
                    let reach = neighbors(points, j, config.eps);
                    if reach.len() >= config.min_pts {
                        queue.extend(reach);
                    }
                }
            }
        }
    }
    let labels = state
        .into_iter()
        .map(|s| match s {
            State::Cluster(id) => Some(id),
            _ => None,
        })
        .collect();
    Clustering { labels, clusters }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blob(cx: f64, cy: f64, k: usize) -> Vec<[f64; 2]> {
        (0..k)
            .map(|i| {
                [
                    cx + ((i * 7) % 5) as f64 * 0.01,
                    cy + ((i * 3) % 5) as f64 * 0.01,
                ]
            })
            .collect()
    }

    #[test]
    fn two_blobs_form_two_clusters_without_noise() {
        let mut pts = blob(0.0, 0.0, 6);
        pts.extend(blob(10.0, 10.0, 6));
        let config = DbscanConfig {
            eps: default_eps(&pts),
            min_pts: DEFAULT_MIN_PTS,
        };
        let c = dbscan(&pts, &config);
        assert_eq!(c.clusters, 2);
        assert_eq!(c.noise_count(), 0);
        // Scan order numbers the origin blob first.
        assert_eq!(c.labels[0], Some(0));
        assert_eq!(c.labels[6], Some(1));
        assert_eq!(c.cluster_sizes(), vec![6, 6]);
    }

    #[test]
    fn isolated_points_are_noise() {
        let mut pts = blob(0.0, 0.0, 8);
        pts.push([50.0, 50.0]);
        let config = DbscanConfig {
            eps: 1.0,
            min_pts: DEFAULT_MIN_PTS,
        };
        let c = dbscan(&pts, &config);
        assert_eq!(c.clusters, 1);
        assert_eq!(c.labels[8], None);
        assert_eq!(c.noise_count(), 1);
    }

    #[test]
    fn min_pts_suppresses_sparse_groups() {
        let pts = blob(0.0, 0.0, 3);
        let config = DbscanConfig {
            eps: 1.0,
            min_pts: 4,
        };
        let c = dbscan(&pts, &config);
        assert_eq!(c.clusters, 0);
        assert_eq!(c.noise_count(), 3);
    }

    #[test]
    fn inclusive_radius_and_self_membership() {
        // Two points exactly eps apart plus the self-inclusive count reach
        // min_pts = 2 each, so they cluster together.
        let pts = vec![[0.0, 0.0], [1.0, 0.0]];
        let c = dbscan(
            &pts,
            &DbscanConfig {
                eps: 1.0,
                min_pts: 2,
            },
        );
        assert_eq!(c.clusters, 1);
        assert_eq!(c.labels, vec![Some(0), Some(0)]);
    }

    #[test]
    fn default_eps_tracks_the_bounding_box() {
        let pts = vec![[0.0, 0.0], [3.0, 4.0]];
        assert!((default_eps(&pts) - 0.25).abs() < 1e-12);
        assert_eq!(default_eps(&[]), 0.0);
    }
}
