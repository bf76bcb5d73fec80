//! Exact t-SNE for small corpora.
//!
//! Input affinities use per-row Gaussian kernels whose bandwidths are tuned
//! by binary search until the conditional distribution's perplexity (the
//! exponential of its natural-log entropy) matches the target; the joint
//! distribution is the symmetrized, renormalized average.  The embedding
//! minimizes the KL divergence to a Student-t kernel by gradient descent
//! with momentum, per-coordinate adaptive gains, early exaggeration, and
//! per-iteration centering.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Early-exaggeration factor on the input affinities.
pub const EARLY_EXAGGERATION: f64 = 12.0;
/// Iterations that use early exaggeration.
pub const EXAGGERATION_ITERS: usize = 250;
/// Iteration at which momentum switches.
pub const MOMENTUM_SWITCH_ITER: usize = 250;
/// Momentum before the switch.
pub const INITIAL_MOMENTUM: f64 = 0.5;
/// Momentum after the switch.
pub const FINAL_MOMENTUM: f64 = 0.8;
/// Tolerance on `|perplexity(beta) - target|` in the bandwidth search.
pub const PERPLEXITY_TOL: f64 = 1e-4;
/// Cap on bandwidth search iterations per row.
pub const BETA_MAX_ITERS: usize = 200;
/// Standard deviation of the random initial layout.
pub const INIT_SIGMA: f64 = 1e-4;
/// Probability floor that keeps the KL divergence finite.
pub const PROB_FLOOR: f64 = 1e-12;
/// Floor on the per-coordinate adaptive gains.
pub const MIN_GAIN: f64 = 0.01;

#[derive(Debug, Error, PartialEq)]
pub enum TsneError {
    #[error("perplexity {perplexity} requires more than {points} points")]
    PerplexityTooLarge { perplexity: f64, points: usize },
}

/// Gradient-descent controls.
#[derive(Clone, Copy, Debug)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> TsneConfig {
        TsneConfig {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: 200.0,
            seed: 0,
        }
    }
}

/// A finished embedding with its start and end objective values.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub points: Vec<[f64; 2]>,
    pub initial_kl: f64,
    pub final_kl: f64,
}

/// Squared Euclidean distances between all row pairs.
pub fn pairwise_sq_distances(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut d2 = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d: f64 = rows[i]
                .iter()
                .zip(rows[j].iter())
                .map(|(a, b)| {
                    let d = a - b;
                    d * d
                })
                .sum();
            d2[i][j] = d;
            d2[j][i] = d;
        }
    }
    d2
}

/// Conditional distribution for row `i` at bandwidth `beta`, with its
/// perplexity.  Probabilities use a shifted exponential so large `beta`
/// cannot underflow every term.
fn conditional_row(d2: &[f64], i: usize, beta: f64) -> (Vec<f64>, f64) {
    let n = d2.len();
    let mut min_d2 = f64::INFINITY;
    for (j, &d) in d2.iter().enumerate() {
        if j != i {
            min_d2 = min_d2.min(d);
        }
    }
    let mut p = vec![0.0; n];
    let mut sum = 0.0;
    for j in 0..n {
        if j == i {
            continue;
        }
        let v = (-beta * (d2[j] - min_d2)).exp();
        p[j] = v;
        sum += v;
    }
    let mut entropy = 0.0;
    for q in p.iter_mut() {
        *q /= sum;
        if *q > 0.0 {
            entropy -= *q * q.ln();
        }
    }
    (p, entropy.exp())
}

/// Symmetric joint affinities at the requested perplexity.
pub fn joint_affinities(d2: &[Vec<f64>], perplexity: f64) -> Result<Vec<Vec<f64>>, TsneError> {
    let n = d2.len();
    let in_range = perplexity > 0.0 && perplexity < n as f64;
    if !in_range {
        return Err(TsneError::PerplexityTooLarge {
            perplexity,
            points: n,
        });
    }
    let mut conditional = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut beta = 1.0f64;
        let mut beta_min = f64::NEG_INFINITY;
        let mut beta_max = f64::INFINITY;
        let mut best = conditional_row(&d2[i], i, beta);
        for _ in 0..BETA_MAX_ITERS {
            let gap = best.1 - perplexity;
            if gap.abs() < PERPLEXITY_TOL {
                break;
            }
            if gap > 0.0 {
                // Too flat: sharpen the kernel.
                beta_min = beta;
                beta = if beta_max.is_finite() {
                    (beta + beta_max) / 2.0
                } else {
                    beta * 2.0
                };
            } else {
                beta_max = beta;
                beta = if beta_min.is_finite() {
                    (beta + beta_min) / 2.0
                } else {
                    beta / 2.0
                };
            }
            best = conditional_row(&d2[i], i, beta);
        }
        conditional[i] = best.0;
    }
    // Symmetrize and renormalize to a joint distribution.
    let mut joint = vec![vec![0.0; n]; n];
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = (conditional[i][j] + conditional[j][i]) / (2.0 * n as f64);
            joint[i][j] = v;
            total += v;
        }
    }
    for row in &mut joint {
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    Ok(joint)
}

/// Student-t kernel weights and their total.
fn student_weights(points: &[[f64; 2]]) -> (Vec<Vec<f64>>, f64) {
    let n = points.len();
    let mut num = vec![vec![0.0; n]; n];
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let dx = points[i][0] - points[j][0];
            let dy = points[i][1] - points[j][1];
            let w = 1.0 / (1.0 + dx * dx + dy * dy);
            num[i][j] = w;
            num[j][i] = w;
            total += 2.0 * w;
        }
    }
    (num, total)
}

/// KL divergence from the joint affinities to the embedding's Student-t
/// distribution.
pub fn kl_divergence(p: &[Vec<f64>], points: &[[f64; 2]]) -> f64 {
    let (num, total) = student_weights(points);
    let n = points.len();
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let pij = p[i][j].max(PROB_FLOOR);
            let qij = (num[i][j] / total).max(PROB_FLOOR);
            kl += pij * (pij / qij).ln();
        }
    }
    kl
}

fn gradient_scaled(p: &[Vec<f64>], scale: f64, points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let (num, total) = student_weights(points);
    let n = points.len();
    let mut grad = vec![[0.0; 2]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let qij = num[i][j] / total;
            let coef = 4.0 * (scale * p[i][j] - qij) * num[i][j];
            grad[i][0] += coef * (points[i][0] - points[j][0]);
            grad[i][1] += coef * (points[i][1] - points[j][1]);
        }
    }
    grad
}

/// Analytic gradient of [`kl_divergence`] with respect to the points.
pub fn gradient(p: &[Vec<f64>], points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    gradient_scaled(p, 1.0, points)
}

fn gaussian_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Run exact t-SNE on the feature rows.
pub fn tsne(rows: &[Vec<f64>], config: &TsneConfig) -> Result<Embedding, TsneError> {
    let n = rows.len();
    let d2 = pairwise_sq_distances(rows);
    let p = joint_affinities(&d2, config.perplexity)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut points: Vec<[f64; 2]> = (0..n)
        .map(|_| {
            let (a, b) = gaussian_pair(&mut rng);
            [a * INIT_SIGMA, b * INIT_SIGMA]
        })
        .collect();
    let initial_kl = kl_divergence(&p, &points);
    let mut velocity = vec![[0.0f64; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    // Zero-aware sign, so a resting coordinate counts as a direction change.
    let sign = |v: f64| {
        if v > 0.0 {
            1i8
        } else if v < 0.0 {
            -1
        } else {
            0
        }
    };
    for iter in 0..config.iterations {
        let scale = if iter < EXAGGERATION_ITERS {
            EARLY_EXAGGERATION
        } else {
            1.0
        };
        let momentum = if iter < MOMENTUM_SWITCH_ITER {
            INITIAL_MOMENTUM
        } else {
            FINAL_MOMENTUM
        };
        let grad = gradient_scaled(&p, scale, &points);
        let mut mean = [0.0f64; 2];
        for i in 0..n {
            for c in 0..2 {
                // Adaptive gains: accelerate coordinates moving downhill
                // consistently, damp ones that overshoot.
                gains[i][c] = if sign(grad[i][c]) != sign(velocity[i][c]) {
                    gains[i][c] + 0.2
                } else {
                    (gains[i][c] * 0.8).max(MIN_GAIN)
                };
                velocity[i][c] =
                    momentum * velocity[i][c] - config.learning_rate * gains[i][c] * grad[i][c];
                points[i][c] += velocity[i][c];
                mean[c] += points[i][c];
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        for pt in &mut points {
            pt[0] -= mean[0];
            pt[1] -= mean[1];
        }
    }
    let final_kl = kl_divergence(&p, &points);
    Ok(Embedding {
        points,
        initial_kl,
        final_kl,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_rows(n: usize, d: usize, shift: impl Fn(usize) -> f64) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                (0..d)
                    .map(|j| ((i * 31 + j * 13) % 7) as f64 / 7.0 + shift(i))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn affinities_hit_the_target_perplexity() {
        let rows = toy_rows(12, 4, |_| 0.0);
        let d2 = pairwise_sq_distances(&rows);
        let target = 5.0;
        // Re-run the search and inspect the conditional perplexities by
        // recomputing them from the joint construction inputs.
        for (i, row) in d2.iter().enumerate() {
            let mut beta = 1.0f64;
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::INFINITY;
            let mut perp = conditional_row(row, i, beta).1;
            for _ in 0..BETA_MAX_ITERS {
                if (perp - target).abs() < PERPLEXITY_TOL {
                    break;
                }
                if perp > target {
                    lo = beta;
                    beta = if hi.is_finite() {
                        (beta + hi) / 2.0
                    } else {
                        beta * 2.0
                    };
                } else {
                    hi = beta;
                    beta = if lo.is_finite() {
                        (beta + lo) / 2.0
                    } else {
                        beta / 2.0
                    };
                }
                perp = conditional_row(row, i, beta).1;
            }
            assert!(
                (perp - target).abs() < PERPLEXITY_TOL,
                "row {i} stuck at perplexity {perp}"
            );
        }
        let p = joint_affinities(&d2, target).unwrap();
        let total: f64 = p.iter().flatten().sum();
        assert!(
            (total - 1.0).abs() < 1e-9,
            "joint affinities sum to {total}"
        );
        for (i, row) in p.iter().enumerate() {
            assert_eq!(row[i], 0.0);
            for (j, &v) in row.iter().enumerate() {
                assert!((v - p[j][i]).abs() < 1e-15, "symmetry at ({i},{j})");
            }
        }
    }

    #[test]
    fn oversized_perplexity_is_rejected() {
        let rows = toy_rows(5, 3, |_| 0.0);
        let d2 = pairwise_sq_distances(&rows);
        let err = joint_affinities(&d2, 5.0).unwrap_err();
        assert_eq!(
            err,
            TsneError::PerplexityTooLarge {
                perplexity: 5.0,
                points: 5
            }
        );
        assert!(joint_affinities(&d2, 4.9).is_ok());
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let rows = toy_rows(7, 3, |_| 0.0);
        let d2 = pairwise_sq_distances(&rows);
        let p = joint_affinities(&d2, 3.0).unwrap();
        // A spread-out layout keeps the objective smooth and far from the
        // probability floor.
        let points: Vec<[f64; 2]> = (0..7)
            .map(|i| [((i * 29) % 13) as f64 / 3.0, ((i * 17) % 11) as f64 / 3.0])
            .collect();
        let analytic = gradient(&p, &points);
        let h = 1e-6;
        for i in 0..points.len() {
            for c in 0..2 {
                let mut plus = points.clone();
                plus[i][c] += h;
                let mut minus = points.clone();
                minus[i][c] -= h;
                let numeric = (kl_divergence(&p, &plus) - kl_divergence(&p, &minus)) / (2.0 * h);
                let denom = analytic[i][c].abs().max(numeric.abs()).max(1e-8);
                let rel = (analytic[i][c] - numeric).abs() / denom;
                assert!(
                    rel < 1e-5,
                    "point {i} coord {c}: analytic {} vs numeric {numeric}",
                    analytic[i][c]
                );
            }
        }
    }

    #[test]
    fn optimization_reduces_the_objective() {
        let rows = toy_rows(10, 4, |_| 0.0);
        let config = TsneConfig {
            perplexity: 4.0,
            iterations: 400,
            learning_rate: 100.0,
            seed: 3,
        };
        let e = tsne(&rows, &config).unwrap();
        assert!(e.final_kl.is_finite());
        assert!(
            e.final_kl < e.initial_kl,
            "KL went from {} to {}",
            e.initial_kl,
            e.final_kl
        );
        // Centered output.
        let mean_x: f64 = e.points.iter().map(|p| p[0]).sum::<f64>() / 10.0;
        assert!(mean_x.abs() < 1e-9);
    }

    #[test]
    fn well_separated_blocks_stay_separated() {
        // Two blocks far apart in feature space; the embedding must keep
        // the between-block distance well above the within-block spread.
        let mut rows = toy_rows(6, 4, |_| 0.0);
        rows.extend(toy_rows(6, 4, |_| 40.0));
        let config = TsneConfig {
            perplexity: 3.0,
            iterations: 600,
            learning_rate: 100.0,
            seed: 1,
        };
        let e = tsne(&rows, &config).unwrap();
        let centroid = |idx: std::ops::Range<usize>| {
            let mut c = [0.0f64; 2];
            let len = idx.len() as f64;
            for i in idx {
                c[0] += e.points[i][0] / len;
                c[1] += e.points[i][1] / len;
            }
            c
        };
        let a = centroid(0..6);
        let b = centroid(6..12);
        let between = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        let spread = |idx: std::ops::Range<usize>, c: [f64; 2]| {
            let len = idx.len() as f64;
            idx.map(|i| ((e.points[i][0] - c[0]).powi(2) + (e.points[i][1] - c[1]).powi(2)).sqrt())
                .sum::<f64>()
                / len
        };
        let within = spread(0..6, a).max(spread(6..12, b));
        assert!(
            between > 3.0 * within,
            "between {between} vs within {within}"
        );
    }

    #[test]
    fn embedding_is_seed_deterministic() {
        let rows = toy_rows(8, 3, |_| 0.0);
        let config = TsneConfig {
            perplexity: 3.0,
            iterations: 200,
            learning_rate: 100.0,
            seed: 11,
        };
        let a = tsne(&rows, &config).unwrap();
        let b = tsne(&rows, &config).unwrap();
        assert_eq!(a.points, b.points);
        let c = tsne(&rows, &TsneConfig { seed: 12, ..config }).unwrap();
        assert_ne!(a.points, c.points);
    }
}
