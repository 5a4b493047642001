//! The unit ℓ¹-simplex and finitely generated cones.
//!
//! A degree-one homogeneous function is pinned down by its restriction to
//! `Δ_N = {x ≥ 0 : ‖x‖₁ = 1}`, so nearly every engine in this crate works on
//! simplex points and rescales at the end.

use crate::convexcore::lp::{solve_lp, LinearProgram, LpStatus, Relation, Sense};
use crate::error::{Error, Result};
use serde::Serialize;

/// Tolerance on `‖coords‖₁ = 1`.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Default cap on the number of points [`simplex_grid`] may produce.
pub const DEFAULT_GRID_CAP: u128 = 10_000_000;

/// Check that `x` is a finite, nonnegative vector of length `dim`.
pub fn validate_input(x: &[f64], dim: usize) -> Result<()> {
    if x.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: x.len() });
    }
    for (index, &value) in x.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NotFinite { index });
        }
        if value < 0.0 {
            return Err(Error::NegativeComponent { index, value });
        }
    }
    Ok(())
}

pub fn l1_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A point of `Δ_N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        validate_input(&coords, coords.len())?;
        if coords.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        let s: f64 = coords.iter().sum();
        if (s - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::Inconsistent(format!("simplex coordinates sum to {s}, not 1")));
        }
        Ok(SimplexPoint(coords))
    }

    /// Caller guarantees the invariant.
    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!((coords.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        SimplexPoint(coords)
    }

    /// `(t, 1 - t)` on `Δ_2`.
    pub fn from_t(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Inconsistent(format!("t = {t} is outside [0, 1]")));
        }
        Ok(SimplexPoint(vec![t, 1.0 - t]))
    }

    pub fn barycenter(dim: usize) -> Self {
        SimplexPoint(vec![1.0 / dim as f64; dim])
    }

    pub fn vertex(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        SimplexPoint(v)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// First coordinate; the chart used for `Δ_2`.
    pub fn t(&self) -> f64 {
        self.0[0]
    }

    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|&c| c > 0.0)
    }

    pub fn scaled(&self, scale: f64) -> Vec<f64> {
        self.0.iter().map(|c| c * scale).collect()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Split `x ≠ 0` into its ℓ¹ norm and its direction on the simplex.
pub fn project(x: &[f64]) -> Result<(f64, SimplexPoint)> {
    validate_input(x, x.len())?;
    let scale = l1_norm(x);
    if scale == 0.0 {
        return Err(Error::ZeroVector);
    }
    let coords = x.iter().map(|v| v / scale).collect();
    Ok((scale, SimplexPoint(coords)))
}

/// Number of points of the resolution-`k` grid on `Δ_n`, `C(k + n - 1, n - 1)`.
/// `None` on overflow.
pub fn grid_size(n: usize, k: usize) -> Option<u128> {
    let r = (n as u128).checked_sub(1)?;
    let total = (k as u128).checked_add(r)?;
    let mut acc: u128 = 1;
    for i in 1..=r {
        acc = acc.checked_mul(total - r + i)? / i;
    }
    Some(acc)
}

/// All points of `Δ_n` with coordinates in `{0, 1/k, …, 1}`, in lexicographic order.
pub fn simplex_grid(n: usize, k: usize) -> Result<Vec<SimplexPoint>> {
    simplex_grid_capped(n, k, DEFAULT_GRID_CAP)
}

pub fn simplex_grid_capped(n: usize, k: usize, cap: u128) -> Result<Vec<SimplexPoint>> {
    if n < 2 {
        return Err(Error::InvalidParameter { field: "dimension", reason: format!("need N >= 2, got {n}") });
    }
    if k < 1 {
        return Err(Error::InvalidParameter { field: "resolution", reason: "need K >= 1".into() });
    }
    let count = grid_size(n, k).unwrap_or(u128::MAX);
    if count > cap {
        return Err(Error::GridTooLarge { count, cap });
    }
    let kf = k as f64;
    let mut out = Vec::with_capacity(count as usize);
    let mut parts = vec![0usize; n];
    compositions(&mut parts, 0, k, &mut |c| {
        out.push(SimplexPoint(c.iter().map(|&p| p as f64 / kf).collect()));
    });
    Ok(out)
}

fn compositions(parts: &mut [usize], idx: usize, remaining: usize, emit: &mut dyn FnMut(&[usize])) {
    if idx == parts.len() - 1 {
        parts[idx] = remaining;
        emit(parts);
        return;
    }
    for a in 0..=remaining {
        parts[idx] = a;
        compositions(parts, idx + 1, remaining - a, emit);
    }
}

/// A finitely generated convex cone `cone({r_1, …, r_m})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeRegion {
    rays: Vec<Vec<f64>>,
}

impl ConeRegion {
    /// Rays must be nonzero and nonnegative. Rays that are positive multiples of
    /// an earlier ray are dropped.
    pub fn new(rays: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rays.first().map(Vec::len).unwrap_or(0);
        let mut kept: Vec<Vec<f64>> = Vec::new();
        let mut directions: Vec<SimplexPoint> = Vec::new();
        for ray in rays {
            validate_input(&ray, dim)?;
            let (_, dir) = project(&ray)?;
            let duplicate = directions.iter().any(|d| {
                d.coords().iter().zip(dir.coords()).all(|(a, b)| (a - b).abs() <= 1e-12)
            });
            if !duplicate {
                directions.push(dir);
                kept.push(ray);
            }
        }
        Ok(ConeRegion { rays: kept })
    }

    pub fn rays(&self) -> &[Vec<f64>] {
        &self.rays
    }

    pub fn dim(&self) -> Option<usize> {
        self.rays.first().map(Vec::len)
    }

    /// Same cone, compared by ray directions.
    pub fn same_cone_as(&self, other: &ConeRegion, tol: f64) -> bool {
        let dirs = |c: &ConeRegion| -> Vec<Vec<f64>> {
            c.rays.iter().map(|r| project(r).map(|(_, p)| p.into_vec()).unwrap_or_default()).collect()
        };
        let (a, b) = (dirs(self), dirs(other));
        let covers = |xs: &[Vec<f64>], ys: &[Vec<f64>]| {
            xs.iter().all(|x| ys.iter().any(|y| x.iter().zip(y).all(|(p, q)| (p - q).abs() <= tol)))
        };
        covers(&a, &b) && covers(&b, &a)
    }
}

/// Default membership tolerance `1e-8·(1 + ‖x‖₁)`.
pub fn default_cone_tol(x: &[f64]) -> f64 {
    1e-8 * (1.0 + l1_norm(x))
}

/// ℓ¹ distance from `x` to the cone, from the LP
/// `min Σ(s⁺ + s⁻)  s.t.  Σ β_j r_j + s⁺ - s⁻ = x,  β, s ≥ 0`.
pub fn cone_distance(cone: &ConeRegion, x: &[f64]) -> Result<f64> {
    let n = x.len();
    if let Some(d) = cone.dim() {
        if d != n {
            return Err(Error::DimensionMismatch { expected: d, got: n });
        }
    }
    let m = cone.rays.len();
    let nvars = m + 2 * n;
    let mut objective = vec![0.0; nvars];
    objective[m..].iter_mut().for_each(|c| *c = 1.0);
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    for i in 0..n {
        let mut row = vec![0.0; nvars];
        for (j, ray) in cone.rays.iter().enumerate() {
            row[j] = ray[i];
        }
        row[m + i] = 1.0;
        row[m + n + i] = -1.0;
        lp.constraint(row, Relation::Eq, x[i]);
    }
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.value.max(0.0)),
        other => Err(Error::Numerical(format!("cone distance LP ended {other:?}"))),
    }
}

/// Whether some `β ≥ 0` has `‖x − Σ β_j r_j‖₁ ≤ tol`. `tol = None` uses
/// [`default_cone_tol`].
pub fn cone_contains(cone: &ConeRegion, x: &[f64], tol: Option<f64>) -> Result<bool> {
    let tol = tol.unwrap_or_else(|| default_cone_tol(x));
    Ok(cone_distance(cone, x)? <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial_by_enumeration(n: usize, k: usize) -> usize {
        // Brute force: count integer vectors in [0, k]^n summing to k.
        let mut count = 0;
        let mut idx = vec![0usize; n];
        loop {
            if idx.iter().sum::<usize>() == k {
                count += 1;
            }
            let mut d = 0;
            loop {
                if d == n {
                    return count;
                }
                idx[d] += 1;
                if idx[d] <= k {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }

    #[test]
    fn projection_examples() {
        let (s, p) = project(&[2.0, 2.0]).unwrap();
        assert_eq!(s, 4.0);
        assert_eq!(p.coords(), &[0.5, 0.5]);
        let (s, p) = project(&[1.0, 0.0]).unwrap();
        assert_eq!((s, p.coords()), (1.0, &[1.0, 0.0][..]));
        let (s, p) = project(&[0.3, 0.9]).unwrap();
        assert!((s - 1.2).abs() < 1e-15);
        assert!((p.coords()[0] - 0.25).abs() < 1e-15 && (p.coords()[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn projection_errors() {
        assert_eq!(project(&[0.0, 0.0]), Err(Error::ZeroVector));
        assert!(matches!(project(&[1.0, -0.1]), Err(Error::NegativeComponent { index: 1, .. })));
        assert!(matches!(project(&[f64::NAN, 1.0]), Err(Error::NotFinite { index: 0 })));
    }

    #[test]
    fn small_grids_enumerate_lexicographically() {
        let g: Vec<_> = simplex_grid(2, 2).unwrap().into_iter().map(SimplexPoint::into_vec).collect();
        assert_eq!(g, vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]]);
        let g: Vec<_> = simplex_grid(3, 1).unwrap().into_iter().map(SimplexPoint::into_vec).collect();
        assert_eq!(g, vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]]);
    }

    #[test]
    fn grid_count_matches_enumeration() {
        assert_eq!(simplex_grid(3, 10).unwrap().len(), 66);
        assert_eq!(binomial_by_enumeration(3, 10), 66);
        for (n, k) in [(2, 7), (3, 5), (4, 6), (5, 3)] {
            let expected = binomial_by_enumeration(n, k);
            assert_eq!(simplex_grid(n, k).unwrap().len(), expected);
            assert_eq!(grid_size(n, k), Some(expected as u128));
        }
    }

    #[test]
    fn grid_cap_is_enforced() {
        assert!(matches!(simplex_grid(6, 1000), Err(Error::GridTooLarge { .. })));
        assert!(matches!(simplex_grid_capped(3, 10, 65), Err(Error::GridTooLarge { count: 66, cap: 65 })));
    }

    #[test]
    fn grid_points_sum_to_one() {
        for p in simplex_grid(4, 7).unwrap() {
            assert!((p.coords().iter().sum::<f64>() - 1.0).abs() <= SIMPLEX_TOL);
        }
    }

    #[test]
    fn cone_membership_examples() {
        let cone = ConeRegion::new(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(cone_contains(&cone, &[3.0, 3.0], None).unwrap());
        assert!(!cone_contains(&cone, &[1.0, 0.0], None).unwrap());
        let ray = ConeRegion::new(vec![vec![1.0, 2.0]]).unwrap();
        assert!(cone_contains(&ray, &[0.0, 0.0], None).unwrap());
    }

    #[test]
    fn cone_rejects_outside_ratio_range() {
        // Nonnegative combinations of (1,2),(2,1) have x2/x1 in [1/2, 2].
        let cone = ConeRegion::new(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        for (x, inside) in [([1.0, 0.49], false), ([1.0, 0.51], true), ([1.0, 1.99], true), ([1.0, 2.01], false)] {
            assert_eq!(cone_contains(&cone, &x, None).unwrap(), inside, "{x:?}");
        }
    }

    #[test]
    fn cone_dedups_scaled_rays() {
        let cone = ConeRegion::new(vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 1.0]]).unwrap();
        assert_eq!(cone.rays().len(), 2);
        assert!(matches!(ConeRegion::new(vec![vec![0.0, 0.0]]), Err(Error::ZeroVector)));
    }
}
