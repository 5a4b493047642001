use super::plan::{lex_cmp, AllocationPlan};
use crate::convexcore::support::common_dim;
use crate::error::{Error, Result};
use crate::simplexgeom::{project, simplex_grid_capped, validate_input, SimplexPoint, DEFAULT_GRID_CAP};
use crate::technology::Technology;
use rayon::prelude::*;
use std::cmp::Ordering;

/// Largest number of (firm subset, point tuple) combinations searched.
pub const BRUTE_CAP: u128 = 100_000_000;

/// Grid maximization of `Σ α_j F_j(x_j)` subject to `Σ α_j x_j = x / ‖x‖₁`.
///
/// Every firm may pick any point of the resolution-`k` grid or the direction
/// of `x` itself. For fixed points the weights solve an LP with `N` equality
/// rows, whose basic optima use at most `N` firms, so it suffices to scan firm
/// subsets of size `≤ N` with one point each and solve for `α` exactly. Ties are
/// broken toward the lexicographically smallest `(α, x_1, …, x_J)`.
pub fn brute_force(techs: &[Technology], x: &[f64], k: usize) -> Result<AllocationPlan> {
    brute_force_capped(techs, x, k, BRUTE_CAP)
}

#[derive(Clone, Debug)]
struct Candidate {
    value: f64,
    firms: Vec<usize>,
    idx: Vec<usize>,
    alpha: Vec<f64>,
}

pub fn brute_force_capped(techs: &[Technology], x: &[f64], k: usize, cap: u128) -> Result<AllocationPlan> {
    let n = common_dim(techs)?;
    validate_input(x, n)?;
    let jn = techs.len();
    let (_, p) = match project(x) {
        Ok(v) => v,
        Err(Error::ZeroVector) => return Ok(AllocationPlan::zero(jn, n)),
        Err(e) => return Err(e),
    };
    let grid_count = crate::simplexgeom::grid_size(n, k).unwrap_or(u128::MAX).saturating_add(1);
    let max_s = n.min(jn);
    let mut count: u128 = 0;
    for s in 1..=max_s {
        let term = binomial(jn, s).saturating_mul(grid_count.saturating_pow(s as u32));
        count = count.saturating_add(term);
    }
    if count > cap {
        return Err(Error::SearchTooLarge { count, cap });
    }

    let mut cands = simplex_grid_capped(n, k, DEFAULT_GRID_CAP)?;
    cands.push(p.clone());
    let vals: Vec<Vec<f64>> =
        techs.par_iter().map(|t| cands.iter().map(|c| t.value_on_simplex(c)).collect()).collect();

    let mut best: Option<Candidate> = None;
    for s in 1..=max_s {
        for firms in subsets(jn, s) {
            let found = if n == 2 {
                search_2d(&cands, &vals, &firms, &p)
            } else {
                search_general(&cands, &vals, &firms, &p)
            };
            if let Some(c) = found {
                best = Some(match best {
                    None => c,
                    Some(b) => better(b, c, &cands, jn, n),
                });
            }
        }
    }
    let best = best.ok_or_else(|| Error::Numerical("brute force found no feasible split".into()))?;
    Ok(to_plan(techs, x, &best, &cands, jn, n))
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn key(c: &Candidate, cands: &[SimplexPoint], jn: usize, n: usize) -> Vec<f64> {
    let mut alpha = vec![0.0; jn];
    let mut pts = vec![SimplexPoint::barycenter(n); jn];
    for ((&f, &i), &a) in c.firms.iter().zip(&c.idx).zip(&c.alpha) {
        alpha[f] = a;
        if a > 0.0 {
            pts[f] = cands[i].clone();
        }
    }
    let mut k = alpha;
    for p in &pts {
        k.extend_from_slice(p.coords());
    }
    k
}

fn better(a: Candidate, b: Candidate, cands: &[SimplexPoint], jn: usize, n: usize) -> Candidate {
    match a.value.total_cmp(&b.value) {
        Ordering::Greater => a,
        Ordering::Less => b,
        Ordering::Equal => {
            if lex_cmp(&key(&b, cands, jn, n), &key(&a, cands, jn, n)) == Ordering::Less {
                b
            } else {
                a
            }
        }
    }
}

fn merge(a: Option<Candidate>, b: Option<Candidate>, cands: &[SimplexPoint], jn: usize, n: usize) -> Option<Candidate> {
    match (a, b) {
        (None, b) => b,
        (a, None) => a,
        (Some(a), Some(b)) => Some(better(a, b, cands, jn, n)),
    }
}

fn same_point(a: &SimplexPoint, b: &SimplexPoint) -> bool {
    a.coords().iter().zip(b.coords()).all(|(x, y)| (x - y).abs() <= 1e-14)
}

fn search_2d(cands: &[SimplexPoint], vals: &[Vec<f64>], firms: &[usize], p: &SimplexPoint) -> Option<Candidate> {
    let jn = vals.len();
    let g = cands.len();
    let tbar = p.t();
    match firms.len() {
        1 => {
            let f = firms[0];
            (0..g)
                .filter(|&i| same_point(&cands[i], p))
                .map(|i| Candidate { value: vals[f][i], firms: vec![f], idx: vec![i], alpha: vec![1.0] })
                .fold(None, |acc, c| merge(acc, Some(c), cands, jn, 2))
        }
        2 => {
            let (f1, f2) = (firms[0], firms[1]);
            let ts: Vec<f64> = cands.iter().map(SimplexPoint::t).collect();
            (0..g)
                .into_par_iter()
                .map(|i1| {
                    let t1 = ts[i1];
                    let mut local: Option<Candidate> = None;
                    for i2 in 0..g {
                        let t2 = ts[i2];
                        if !((t1 < tbar && tbar < t2) || (t2 < tbar && tbar < t1)) {
                            continue;
                        }
                        let a1 = (t2 - tbar) / (t2 - t1);
                        let a2 = 1.0 - a1;
                        let value = a1 * vals[f1][i1] + a2 * vals[f2][i2];
                        if let Some(b) = &local {
                            if value < b.value {
                                continue;
                            }
                        }
                        let c = Candidate { value, firms: vec![f1, f2], idx: vec![i1, i2], alpha: vec![a1, a2] };
                        local = merge(local, Some(c), cands, jn, 2);
                    }
                    local
                })
                .reduce(|| None, |a, b| merge(a, b, cands, jn, 2))
        }
        _ => None,
    }
}

fn search_general(cands: &[SimplexPoint], vals: &[Vec<f64>], firms: &[usize], p: &SimplexPoint) -> Option<Candidate> {
    let jn = vals.len();
    let n = p.dim();
    let g = cands.len();
    let s = firms.len();
    (0..g)
        .into_par_iter()
        .map(|i0| {
            let mut local: Option<Candidate> = None;
            let mut idx = vec![0usize; s];
            idx[0] = i0;
            let rest = g.pow((s - 1) as u32);
            for code in 0..rest {
                let mut c = code;
                for slot in idx.iter_mut().skip(1) {
                    *slot = c % g;
                    c /= g;
                }
                let Some(alpha) = barycentric(cands, &idx, p) else { continue };
                if alpha.iter().any(|&a| a <= 0.0) && s > 1 {
                    continue;
                }
                let value: f64 = firms.iter().zip(&idx).zip(&alpha).map(|((&f, &i), a)| a * vals[f][i]).sum();
                if let Some(b) = &local {
                    if value < b.value {
                        continue;
                    }
                }
                let cand = Candidate { value, firms: firms.to_vec(), idx: idx.clone(), alpha };
                local = merge(local, Some(cand), cands, jn, n);
            }
            local
        })
        .reduce(|| None, |a, b| merge(a, b, cands, jn, n))
}

/// Weights `α ≥ 0` with `Σ α_k c_{idx_k} = p`, if they exist and are unique.
fn barycentric(cands: &[SimplexPoint], idx: &[usize], p: &SimplexPoint) -> Option<Vec<f64>> {
    let s = idx.len();
    let n = p.dim();
    if s == 1 {
        return same_point(&cands[idx[0]], p).then(|| vec![1.0]);
    }
    // Normal equations AᵀA α = Aᵀp, columns are the candidate points.
    let col = |k: usize| cands[idx[k]].coords();
    let mut m = vec![vec![0.0; s + 1]; s];
    for a in 0..s {
        for b in 0..s {
            m[a][b] = (0..n).map(|r| col(a)[r] * col(b)[r]).sum();
        }
        m[a][s] = (0..n).map(|r| col(a)[r] * p.coords()[r]).sum();
    }
    for c in 0..s {
        let piv = (c..s).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs()))?;
        if m[piv][c].abs() < 1e-12 {
            return None;
        }
        m.swap(c, piv);
        for r in 0..s {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..=s {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    let alpha: Vec<f64> = (0..s).map(|i| m[i][s] / m[i][i]).collect();
    if alpha.iter().any(|&a| a < -1e-12) {
        return None;
    }
    for r in 0..n {
        let mixed: f64 = (0..s).map(|k| alpha[k] * col(k)[r]).sum();
        if (mixed - p.coords()[r]).abs() > 1e-10 {
            return None;
        }
    }
    let alpha: Vec<f64> = alpha.iter().map(|a| a.max(0.0)).collect();
    let sum: f64 = alpha.iter().sum();
    Some(alpha.iter().map(|a| a / sum).collect())
}

fn to_plan(techs: &[Technology], x: &[f64], c: &Candidate, cands: &[SimplexPoint], jn: usize, n: usize) -> AllocationPlan {
    let mut alpha = vec![0.0; jn];
    let mut pts = vec![SimplexPoint::barycenter(n); jn];
    for ((&f, &i), &a) in c.firms.iter().zip(&c.idx).zip(&c.alpha) {
        alpha[f] = a;
        pts[f] = cands[i].clone();
    }
    AllocationPlan::assemble(techs, x.to_vec(), alpha, pts)
}
