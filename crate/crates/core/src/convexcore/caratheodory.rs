use crate::error::{Error, Result};

const NULL_TOL: f64 = 1e-12;

/// Shrink the support of a convex combination of points `(x_i, y_i) ∈ Δ_N × R`
/// without moving the combined point.
///
/// Each step finds an affine dependence `Σ μ_i (x_i, y_i, 1) = 0` among the
/// supported points and moves the weights along `-μ` until one hits zero. The
/// loop stops once the supported points are affinely independent, so at most
/// `N + 1` weights stay positive. Inputs already supported on `N + 1` points or
/// fewer are returned unchanged.
pub fn caratheodory_reduce(points: &[(Vec<f64>, f64)], target: (&[f64], f64), weights: &[f64]) -> Result<Vec<f64>> {
    if points.len() != weights.len() {
        return Err(Error::Inconsistent(format!("{} points but {} weights", points.len(), weights.len())));
    }
    let n = target.0.len();
    if points.iter().any(|(x, _)| x.len() != n) {
        return Err(Error::Inconsistent("points and target have different dimensions".into()));
    }
    if weights.iter().any(|&w| !(w >= -1e-15)) {
        return Err(Error::Inconsistent("weights must be nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Inconsistent(format!("weights sum to {total}, not 1")));
    }
    let combined = combine(points, weights, n);
    let scale = 1.0 + target.0.iter().map(|v| v.abs()).sum::<f64>() + target.1.abs();
    if !residual_ok(&combined, target, 1e-9 * scale) {
        return Err(Error::Inconsistent("weights do not reproduce the target point".into()));
    }

    let mut w: Vec<f64> = weights.iter().map(|&v| v.max(0.0)).collect();
    let support_count = w.iter().filter(|&&v| v > 0.0).count();
    if support_count <= n + 1 {
        return Ok(weights.to_vec());
    }

    loop {
        let support: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.0).collect();
        let Some(mu) = affine_dependence(points, &support, n) else {
            break;
        };
        let (mut theta, mut drop) = (f64::INFINITY, usize::MAX);
        for (k, &i) in support.iter().enumerate() {
            if mu[k] > NULL_TOL {
                let r = w[i] / mu[k];
                if r < theta {
                    theta = r;
                    drop = i;
                }
            }
        }
        if drop == usize::MAX {
            break;
        }
        for (k, &i) in support.iter().enumerate() {
            w[i] -= theta * mu[k];
            if w[i] < 1e-15 {
                w[i] = 0.0;
            }
        }
        w[drop] = 0.0;
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    Ok(w)
}

fn combine(points: &[(Vec<f64>, f64)], weights: &[f64], n: usize) -> (Vec<f64>, f64) {
    let mut x = vec![0.0; n];
    let mut y = 0.0;
    for ((p, py), &w) in points.iter().zip(weights) {
        for (acc, v) in x.iter_mut().zip(p) {
            *acc += w * v;
        }
        y += w * py;
    }
    (x, y)
}

fn residual_ok(combined: &(Vec<f64>, f64), target: (&[f64], f64), tol: f64) -> bool {
    combined.0.iter().zip(target.0).all(|(a, b)| (a - b).abs() <= tol) && (combined.1 - target.1).abs() <= tol
}

/// A nonzero `μ` with `Σ μ_k (x_k, y_k, 1) = 0` over `support`, normalized so
/// that its largest entry is positive; `None` when the points are affinely
/// independent.
fn affine_dependence(points: &[(Vec<f64>, f64)], support: &[usize], n: usize) -> Option<Vec<f64>> {
    let rows = n + 2;
    let cols = support.len();
    let mut m = vec![vec![0.0; cols]; rows];
    for (c, &i) in support.iter().enumerate() {
        for r in 0..n {
            m[r][c] = points[i].0[r];
        }
        m[n][c] = points[i].1;
        m[n + 1][c] = 1.0;
    }
    let col_scale: Vec<f64> =
        (0..cols).map(|c| (0..rows).map(|r| m[r][c].abs()).fold(1.0, f64::max)).collect();

    // Reduced row echelon form with partial pivoting.
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, val) =
            (r..rows).map(|i| (i, m[i][c].abs())).max_by(|a, b| a.1.total_cmp(&b.1)).unwrap_or((r, 0.0));
        if val <= NULL_TOL * col_scale[c] {
            continue;
        }
        m.swap(r, best);
        let p = m[r][c];
        for v in m[r].iter_mut() {
            *v /= p;
        }
        for i in 0..rows {
            if i != r {
                let f = m[i][c];
                if f != 0.0 {
                    for k in 0..cols {
                        m[i][k] -= f * m[r][k];
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free = (0..cols).find(|c| !pivots.contains(c))?;
    let mut mu = vec![0.0; cols];
    mu[free] = 1.0;
    for (row, &pc) in pivots.iter().enumerate() {
        mu[pc] = -m[row][free];
    }
    if mu.iter().all(|&v| v <= NULL_TOL) {
        mu.iter_mut().for_each(|v| *v = -*v);
    }
    Some(mu)
}
