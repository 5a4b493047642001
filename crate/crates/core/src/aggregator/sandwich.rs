use super::plan::AllocationPlan;
use crate::convexcore::caratheodory::caratheodory_reduce;
use crate::convexcore::support::{common_dim, outer_price, price_from_hull, sampled_hull, SampledHull};
use crate::error::{Error, Result};
use crate::simplexgeom::{validate_input, SimplexPoint};
use crate::technology::Technology;
use serde::Serialize;

/// Two-sided bounds on `F(x̄)` for concave firms.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichResult {
    /// Output of `plan`, evaluated exactly.
    pub lower: f64,
    /// `w · x̄` for the certified price `price`.
    pub upper: f64,
    pub gap: f64,
    /// Linear majorant of every firm, so `F(x) ≤ price · x` on the orthant.
    pub price: Vec<f64>,
    /// Supporting price of the sampled hull at `x̄`.
    pub hull_price: Vec<f64>,
    pub plan: AllocationPlan,
    pub resolution: usize,
}

/// Turns an optimal hull LP solution into a firm-level plan: the support is
/// pruned to at most `N + 1` points, then each firm's points are pooled, which
/// concavity allows without losing output.
pub(crate) fn plan_from_hull(techs: &[Technology], xbar: &[f64], hull: &SampledHull) -> Result<AllocationPlan> {
    let n = hull.point.dim();
    let lam = &hull.solution.lambda;
    let support: Vec<usize> = (0..lam.len()).filter(|&i| lam[i] > 1e-13).collect();
    let total: f64 = support.iter().map(|&i| lam[i]).sum();
    let weights: Vec<f64> = support.iter().map(|&i| lam[i] / total).collect();
    let points: Vec<(Vec<f64>, f64)> =
        support.iter().map(|&i| (hull.samples.points[i].coords().to_vec(), hull.samples.values[i])).collect();
    let ty: f64 = weights.iter().zip(&points).map(|(w, p)| w * p.1).sum();
    let reduced = caratheodory_reduce(&points, (hull.point.coords(), ty), &weights)
        .or_else(|_| Ok::<_, Error>(weights.clone()))?;

    let jn = techs.len();
    let mut alpha = vec![0.0; jn];
    let mut acc = vec![vec![0.0; n]; jn];
    for (k, &i) in support.iter().enumerate() {
        let w = reduced[k];
        if w <= 0.0 {
            continue;
        }
        let f = hull.samples.firms[i];
        alpha[f] += w;
        for (a, c) in acc[f].iter_mut().zip(hull.samples.points[i].coords()) {
            *a += w * c;
        }
    }
    let s: f64 = alpha.iter().sum();
    let mut pts = Vec::with_capacity(jn);
    for j in 0..jn {
        alpha[j] /= s;
        if alpha[j] > 0.0 {
            let m: f64 = acc[j].iter().sum();
            pts.push(SimplexPoint::from_vec_unchecked(acc[j].iter().map(|v| v / m).collect()));
        } else {
            pts.push(SimplexPoint::barycenter(n));
        }
    }
    Ok(AllocationPlan::assemble(techs, xbar.to_vec(), alpha, pts))
}

/// The lower side of [`sandwich`] alone: the plan read off the sampled hull at
/// `x`, valid on the boundary too.
pub fn hull_plan(techs: &[Technology], x: &[f64], k: usize) -> Result<AllocationPlan> {
    let n = common_dim(techs)?;
    validate_input(x, n)?;
    if x.iter().all(|&v| v == 0.0) {
        return Ok(AllocationPlan::zero(techs.len(), n));
    }
    let hull = sampled_hull(techs, x, k)?;
    plan_from_hull(techs, x, &hull)
}

/// Lower plan from the resolution-`k` hull of the firms' graphs, upper bound
/// from supergradients sampled at the same points.
///
/// The hull's own supporting price would not do for the upper side: the hull of
/// the samples lies below `F`, so its price can undercut `F` between samples.
pub fn sandwich(techs: &[Technology], xbar: &[f64], k: usize) -> Result<SandwichResult> {
    let n = common_dim(techs)?;
    validate_input(xbar, n)?;
    if xbar.iter().any(|&v| v <= 0.0) {
        return Err(Error::BoundaryPoint);
    }
    let hull = sampled_hull(techs, xbar, k)?;
    let plan = plan_from_hull(techs, xbar, &hull)?;
    let hull_price = price_from_hull(&hull)?.price;
    let outer = outer_price(techs, xbar, k)?;
    let (lower, upper) = (plan.value, outer.value);
    let slack = 1e-9 * (1.0 + upper.abs());
    if lower > upper + slack {
        return Err(Error::Numerical(format!("lower bound {lower} exceeds upper bound {upper}")));
    }
    Ok(SandwichResult { lower, upper, gap: (upper - lower).max(0.0), price: outer.price, hull_price, plan, resolution: k })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cobb_douglas_pair_brackets_the_flat_level() {
        let techs = vec![
            Technology::cobb_douglas(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap(),
            Technology::cobb_douglas(vec![2.0 / 3.0, 1.0 / 3.0]).unwrap(),
        ];
        let level = 2f64.powf(2.0 / 3.0) / 3.0;
        let r = sandwich(&techs, &[0.5, 0.5], 512).unwrap();
        assert!(r.lower <= level + 1e-12 && level <= r.upper + 1e-12);
        assert!((r.lower - level).abs() < 1e-3 && (r.upper - level).abs() < 1e-3);
        assert!(r.gap < 2e-3);
        r.plan.check(&techs).unwrap();
        assert_eq!(r.plan.active_firms().len(), 2);
    }

    #[test]
    fn linear_firm_has_no_gap() {
        let t = vec![Technology::linear(vec![2.0, 3.0]).unwrap()];
        let r = sandwich(&t, &[1.0, 1.0], 64).unwrap();
        assert_eq!(r.lower, 5.0);
        assert_eq!(r.upper, 5.0);
        assert_eq!(r.price, vec![2.0, 3.0]);
    }

    #[test]
    fn linear_pair_splits_by_input() {
        let t = vec![Technology::linear(vec![2.0, 1.0]).unwrap(), Technology::linear(vec![1.0, 3.0]).unwrap()];
        let r = sandwich(&t, &[1.0, 1.0], 64).unwrap();
        assert!((r.lower - 5.0).abs() < 1e-12 && (r.upper - 5.0).abs() < 1e-12);
        let x0 = r.plan.firm_input(0);
        let x1 = r.plan.firm_input(1);
        assert!((x0[0] - 1.0).abs() < 1e-12 && x0[1].abs() < 1e-12);
        assert!(x1[0].abs() < 1e-12 && (x1[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_rejected() {
        let t = vec![Technology::linear(vec![2.0, 3.0]).unwrap()];
        assert_eq!(sandwich(&t, &[1.0, 0.0], 8).unwrap_err(), Error::BoundaryPoint);
    }
}
