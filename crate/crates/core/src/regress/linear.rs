//! Penalized linear regression: ridge via the normal equations, lasso and
//! elastic net via coordinate descent.
//!
//! Conventions: the intercept is fit by centering and never penalized.
//! Ridge minimizes `||y - Xw - b||^2 + lambda ||w||^2`.  Elastic net (and
//! lasso as its `alpha = 1` case) minimizes
//! `1/(2n) ||y - Xw - b||^2 + lambda alpha ||w||_1
//!  + lambda (1 - alpha)/2 ||w||^2`.

/// Coordinate-descent stopping tolerance on the largest coefficient change
/// in one sweep.
pub const CD_TOL: f64 = 1e-6;

/// Coordinate-descent sweep cap.
pub const CD_MAX_SWEEPS: usize = 10_000;

/// Column-major centered copy of the data plus the centering offsets.
struct Centered {
    cols: Vec<Vec<f64>>,
    x_mean: Vec<f64>,
    y: Vec<f64>,
    y_mean: f64,
}

fn center(xs: &[Vec<f64>], y: &[f64]) -> Centered {
    let n = xs.len();
    let d = xs.first().map_or(0, Vec::len);
    let mut x_mean = vec![0.0; d];
    for row in xs {
        for (m, &v) in x_mean.iter_mut().zip(row.iter()) {
            *m += v;
        }
    }
    for m in &mut x_mean {
        *m /= n as f64;
    }
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let cols = (0..d)
        .map(|j| xs.iter().map(|row| row[j] - x_mean[j]).collect())
        .collect();
    Centered {
        cols,
        x_mean,
        y: y.iter().map(|&v| v - y_mean).collect(),
        y_mean,
    }
}

fn intercept(x_mean: &[f64], y_mean: f64, w: &[f64]) -> f64 {
    y_mean - x_mean.iter().zip(w.iter()).map(|(m, c)| m * c).sum::<f64>()
}

/// Solve `a x = b` by Gaussian elimination with partial pivoting.  Returns
/// `None` when the system is numerically singular.
pub fn solve_linear_system(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            let (head, tail) = a.split_at_mut(row);
            for (k, v) in tail[0].iter_mut().enumerate().skip(col) {
                *v -= factor * head[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

/// Ridge regression; returns `(weights, intercept)`.
pub fn fit_ridge(xs: &[Vec<f64>], y: &[f64], lambda: f64) -> (Vec<f64>, f64) {
    let c = center(xs, y);
    let d = c.cols.len();
    if d == 0 {
        return (Vec::new(), c.y_mean);
    }
    let mut a = vec![vec![0.0; d]; d];
    let mut rhs = vec![0.0; d];
    for j in 0..d {
        for k in j..d {
            let dot: f64 = c.cols[j]
                .iter()
                .zip(c.cols[k].iter())
                .map(|(a, b)| a * b)
                .sum();
            a[j][k] = dot;
            a[k][j] = dot;
        }
        a[j][j] += lambda;
        rhs[j] = c.cols[j].iter().zip(c.y.iter()).map(|(a, b)| a * b).sum();
    }
    let w = solve_linear_system(a, rhs).expect("ridge system is positive definite for lambda > 0");
    let b = intercept(&c.x_mean, c.y_mean, &w);
    (w, b)
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Elastic-net regression by cyclic coordinate descent; returns
/// `(weights, intercept)`.  `alpha = 1` is the lasso.
pub fn fit_elastic_net(xs: &[Vec<f64>], y: &[f64], lambda: f64, alpha: f64) -> (Vec<f64>, f64) {
    let n = xs.len();
    let c = center(xs, y);
    let d = c.cols.len();
    let mut w = vec![0.0; d];
    if d == 0 {
        return (w, c.y_mean);
    }
    // Mean squared column norms, fixed across sweeps.
    let z: Vec<f64> = c
        .cols
        .iter()
        .map(|col| col.iter().map(|v| v * v).sum::<f64>() / n as f64)
        .collect();
    let l1 = lambda * alpha;
    let l2 = lambda * (1.0 - alpha);
    let mut residual = c.y.clone();
    for _ in 0..CD_MAX_SWEEPS {
        let mut max_delta = 0.0f64;
        for j in 0..d {
            if z[j] == 0.0 {
                continue;
            }
            let old = w[j];
            // rho is the coordinate-wise least-squares target with w_j
            // removed from the residual.
            let dot: f64 = c.cols[j]
                .iter()
                .zip(residual.iter())
                .map(|(a, b)| a * b)
                .sum();
            let rho = dot / n as f64 + z[j] * old;
            let new = soft_threshold(rho, l1) / (z[j] + l2);
            if new != old {
                let delta = new - old;
                for (r, &xv) in residual.iter_mut().zip(c.cols[j].iter()) {
                    *r -= delta * xv;
                }
                w[j] = new;
                max_delta = max_delta.max(delta.abs());
            }
        }
        if max_delta < CD_TOL {
            break;
        }
    }
    let b = intercept(&c.x_mean, c.y_mean, &w);
    (w, b)
}

/// Largest violation of the elastic-net stationarity (KKT) conditions at
/// `(w, b)`.  Zero at the exact optimum.
pub fn elastic_net_kkt_residual(
    xs: &[Vec<f64>],
    y: &[f64],
    w: &[f64],
    b: f64,
    lambda: f64,
    alpha: f64,
) -> f64 {
    let n = xs.len();
    let l1 = lambda * alpha;
    let l2 = lambda * (1.0 - alpha);
    let residual: Vec<f64> = xs
        .iter()
        .zip(y.iter())
        .map(|(row, &yv)| yv - b - row.iter().zip(w.iter()).map(|(x, c)| x * c).sum::<f64>())
        .collect();
    let mut worst = 0.0f64;
    for (j, &wj) in w.iter().enumerate() {
        let dot: f64 = xs
            .iter()
            .zip(residual.iter())
            .map(|(row, r)| row[j] * r)
            .sum();
        // Gradient of the smooth part of the objective.
        let g = -dot / n as f64 + l2 * wj;
        let violation = if wj > 0.0 {
            (g + l1).abs()
        } else if wj < 0.0 {
            (g - l1).abs()
        } else {
            (g.abs() - l1).max(0.0)
        };
        worst = worst.max(violation);
    }
    // Intercept stationarity: the residual mean must vanish.
    worst.max(residual.iter().sum::<f64>().abs() / n as f64)
}
