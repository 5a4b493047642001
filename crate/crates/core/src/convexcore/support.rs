use crate::convexcore::lp::{solve_lp, LinearProgram, LpStatus, Relation, Sense};
use crate::error::{Error, Result};
use crate::simplexgeom::{dot, project, simplex_grid, validate_input, SimplexPoint};
use crate::technology::Technology;
use rayon::prelude::*;
use serde::Serialize;

/// Pointwise maximum of the firms' simplex restrictions at a finite set of
/// sample points, with the firm attaining it (lowest index on ties).
#[derive(Debug, Clone, Serialize)]
pub struct SampleSet {
    pub points: Vec<SimplexPoint>,
    pub values: Vec<f64>,
    pub firms: Vec<usize>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub(crate) fn common_dim(techs: &[Technology]) -> Result<usize> {
    let first = techs.first().ok_or_else(|| Error::Inconsistent("no technologies given".into()))?;
    let n = first.dim();
    for t in techs {
        if t.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: t.dim() });
        }
    }
    Ok(n)
}

pub(crate) fn require_concave(techs: &[Technology]) -> Result<()> {
    match techs.iter().position(|t| !t.is_concave()) {
        Some(firm) => Err(Error::NonConcave { firm }),
        None => Ok(()),
    }
}

/// Grid of resolution `k`, every kink of every firm, then `extra`.
pub(crate) fn sample_points(techs: &[Technology], k: usize, extra: &[SimplexPoint]) -> Result<Vec<SimplexPoint>> {
    let n = common_dim(techs)?;
    let mut pts = simplex_grid(n, k)?;
    for t in techs {
        pts.extend(t.kinks());
    }
    pts.extend(extra.iter().cloned());
    Ok(pts)
}

pub fn sample_envelope(techs: &[Technology], k: usize, extra: &[SimplexPoint]) -> Result<SampleSet> {
    let points = sample_points(techs, k, extra)?;
    let (values, firms): (Vec<f64>, Vec<usize>) = points
        .par_iter()
        .map(|p| {
            let mut best = (f64::NEG_INFINITY, 0);
            for (j, t) in techs.iter().enumerate() {
                let v = t.value_on_simplex(p);
                if v > best.0 {
                    best = (v, j);
                }
            }
            best
        })
        .unzip();
    Ok(SampleSet { points, values, firms })
}

/// Solution of the sampled hull LP
/// `max Σ λ_i y_i  s.t.  Σ λ_i v_i = p,  λ ≥ 0` at a simplex point `p`.
///
/// `price` is the multiplier of the equality rows. Strong duality makes it an
/// optimum of `min w·p  s.t.  w·v_i ≥ y_i`, i.e. a linear function lying above
/// every sample and touching the sampled hull at `p`.
#[derive(Debug, Clone, Serialize)]
pub struct HullSolution {
    pub value: f64,
    pub lambda: Vec<f64>,
    pub price: Vec<f64>,
}

pub fn solve_hull_lp(samples: &SampleSet, p: &SimplexPoint) -> Result<HullSolution> {
    let n = p.dim();
    let mut lp = LinearProgram::new(Sense::Maximize, samples.values.clone());
    for r in 0..n {
        let row: Vec<f64> = samples.points.iter().map(|v| v.coords()[r]).collect();
        lp.constraint(row, Relation::Eq, p.coords()[r]);
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Numerical(format!("sampled hull LP ended {:?}", sol.status)));
    }
    Ok(HullSolution { value: sol.value, lambda: sol.primal, price: sol.dual })
}

/// Everything the sampled hull LP produced for one input vector.
#[derive(Debug, Clone, Serialize)]
pub struct SampledHull {
    pub samples: SampleSet,
    pub solution: HullSolution,
    /// `‖x̄‖₁`.
    pub scale: f64,
    pub point: SimplexPoint,
}

pub(crate) fn sampled_hull(techs: &[Technology], xbar: &[f64], k: usize) -> Result<SampledHull> {
    let n = common_dim(techs)?;
    validate_input(xbar, n)?;
    require_concave(techs)?;
    let (scale, point) = project(xbar)?;
    let samples = sample_envelope(techs, k, std::slice::from_ref(&point))?;
    let solution = solve_hull_lp(&samples, &point)?;
    Ok(SampledHull { samples, solution, scale, point })
}

/// A linear price `w` supporting the aggregate at `x̄`.
#[derive(Debug, Clone, Serialize)]
pub struct SupportPrice {
    pub price: Vec<f64>,
    /// `w · x̄`.
    pub value: f64,
    /// `min_v (w·v − max_j F_j(v))` over the sample points; nonnegative up to
    /// round-off.
    pub majorization_slack: f64,
    pub samples: usize,
}

/// Supergradient of the aggregate at a strictly positive `x̄`, computed from
/// the hull of the firms' values on the resolution-`k` grid plus their kinks.
///
/// For polyhedral two-input technologies the kinks make the sample hull exact
/// and so is the price. Otherwise it is exact for the sampled hull, which
/// converges to the true hull as `k` grows.
pub fn support_price(techs: &[Technology], xbar: &[f64], k: usize) -> Result<SupportPrice> {
    let n = common_dim(techs)?;
    validate_input(xbar, n)?;
    if xbar.iter().any(|&v| v <= 0.0) {
        return Err(Error::BoundaryPoint);
    }
    let hull = sampled_hull(techs, xbar, k)?;
    price_from_hull(&hull)
}

pub(crate) fn price_from_hull(hull: &SampledHull) -> Result<SupportPrice> {
    let w = hull.solution.price.clone();
    let slack = hull
        .samples
        .points
        .iter()
        .zip(&hull.samples.values)
        .map(|(v, y)| dot(&w, v.coords()) - y)
        .fold(f64::INFINITY, f64::min);
    if slack < -1e-7 {
        return Err(Error::Numerical(format!("support price undercuts a sample by {}", -slack)));
    }
    Ok(SupportPrice {
        value: hull.scale * dot(&w, hull.point.coords()),
        price: w,
        majorization_slack: slack,
        samples: hull.samples.len(),
    })
}

/// Linear upper bound `w` on the aggregate, certified from supergradients.
///
/// Each supergradient `g` of a concave `F_j` at a sample point satisfies
/// `F_j ≤ g·x` on the whole orthant, and so does any convex combination of
/// them. The LP picks, for each firm, such a combination dominated by one common
/// `w`, minimizing `w·x̄`. Hence `F ≤ w·x` everywhere and `w·x̄ ≥ F(x̄)`.
pub fn outer_price(techs: &[Technology], xbar: &[f64], k: usize) -> Result<SupportPrice> {
    let n = common_dim(techs)?;
    validate_input(xbar, n)?;
    require_concave(techs)?;
    let (scale, point) = project(xbar)?;
    let pts = sample_points(techs, k, std::slice::from_ref(&point))?;

    let grads: Vec<Vec<Vec<f64>>> = techs
        .par_iter()
        .map(|t| {
            let mut g: Vec<Vec<f64>> = pts.iter().flat_map(|p| t.supergradients(p)).collect();
            g.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
            g.dedup();
            g
        })
        .collect();
    if let Some(firm) = grads.iter().position(|g| g.is_empty()) {
        return Err(Error::Inconsistent(format!("firm {firm} has no supergradient at resolution {k}")));
    }

    let cols = n + grads.iter().map(Vec::len).sum::<usize>();
    let mut objective = vec![0.0; cols];
    objective[..n].copy_from_slice(point.coords());
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    for i in 0..n {
        lp.free(i);
    }
    let mut offset = n;
    for g in &grads {
        for r in 0..n {
            let mut row = vec![0.0; cols];
            row[r] = 1.0;
            for (c, gv) in g.iter().enumerate() {
                row[offset + c] = -gv[r];
            }
            lp.constraint(row, Relation::Ge, 0.0);
        }
        let mut row = vec![0.0; cols];
        row[offset..offset + g.len()].iter_mut().for_each(|v| *v = 1.0);
        lp.constraint(row, Relation::Eq, 1.0);
        offset += g.len();
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Numerical(format!("outer price LP ended {:?}", sol.status)));
    }
    let w = sol.primal[..n].to_vec();
    let samples = sample_envelope(techs, k, &[])?;
    let slack = samples
        .points
        .iter()
        .zip(&samples.values)
        .map(|(v, y)| dot(&w, v.coords()) - y)
        .fold(f64::INFINITY, f64::min);
    Ok(SupportPrice { value: scale * dot(&w, point.coords()), price: w, majorization_slack: slack, samples: pts.len() })
}
