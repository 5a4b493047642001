use super::plan::AllocationPlan;
use crate::convexcore::hull::{interpolate, upper_hull_2d, HullVertex, LabeledPoint};
use crate::convexcore::support::common_dim;
use crate::error::{Error, Result};
use crate::simplexgeom::{project, simplex_grid, validate_input, SimplexPoint};
use crate::technology::{Family, Technology};
use serde::Serialize;

/// The aggregate of concave two-input firms on `Δ_2`, as a labeled concave
/// polyline in `t = x₁ / (x₁ + x₂)`.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope2d {
    vertices: Vec<HullVertex>,
}

/// A piece of the envelope lying strictly above both adjacent firms' own
/// graphs: output there needs two firms at once and the aggregate is linear
/// along it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bridge {
    pub t0: f64,
    pub y0: f64,
    pub t1: f64,
    pub y1: f64,
    pub left_firm: usize,
    pub right_firm: usize,
}

fn firm_samples(t: &Technology, k: usize) -> Result<Vec<SimplexPoint>> {
    let mut pts = match t.family() {
        Family::PwlSimplex { .. } | Family::Leontief { .. } | Family::Linear { .. } => {
            vec![SimplexPoint::vertex(2, 1), SimplexPoint::vertex(2, 0)]
        }
        _ => simplex_grid(2, k)?,
    };
    pts.extend(t.kinks());
    Ok(pts)
}

/// Upper hull of all firms' simplex graphs. Polyhedral firms contribute their
/// exact breakpoints; smooth ones are sampled on the resolution-`k` grid.
pub fn exact_envelope_2d(techs: &[Technology], k: usize) -> Result<Envelope2d> {
    let n = common_dim(techs)?;
    if n != 2 {
        return Err(Error::Unsupported(format!("the hull envelope needs 2 inputs, got {n}")));
    }
    if let Some(firm) = techs.iter().position(|t| !t.is_concave()) {
        return Err(Error::NonConcave { firm });
    }
    let mut labeled = Vec::new();
    for (j, t) in techs.iter().enumerate() {
        for p in firm_samples(t, k)? {
            labeled.push(LabeledPoint { y: t.value_on_simplex(&p), x: p, firm: j });
        }
    }
    Ok(Envelope2d { vertices: upper_hull_2d(&labeled)? })
}

impl Envelope2d {
    pub fn vertices(&self) -> &[HullVertex] {
        &self.vertices
    }

    pub fn value_at_t(&self, t: f64) -> f64 {
        interpolate(&self.vertices, t)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        validate_input(x, 2)?;
        match project(x) {
            Ok((s, p)) => Ok(s * self.value_at_t(p.t())),
            Err(Error::ZeroVector) => Ok(0.0),
            Err(e) => Err(e),
        }
    }

    /// Optimal split of `x`. Within a piece whose ends belong to one firm that
    /// firm works alone; otherwise a single firm is used whenever it reaches
    /// the envelope by itself, and the two end firms share the input only on
    /// genuine bridges.
    pub fn plan(&self, techs: &[Technology], x: &[f64]) -> Result<AllocationPlan> {
        validate_input(x, 2)?;
        let jn = techs.len();
        let (_, p) = match project(x) {
            Ok(v) => v,
            Err(Error::ZeroVector) => return Ok(AllocationPlan::zero(jn, 2)),
            Err(e) => return Err(e),
        };
        let t = p.t();
        let single = |j: usize| {
            let mut w = vec![0.0; jn];
            w[j] = 1.0;
            let pts = vec![p.clone(); jn];
            AllocationPlan::assemble(techs, x.to_vec(), w, pts)
        };
        let v = &self.vertices;
        let i = v.partition_point(|h| h.t <= t);
        let a = v[i.saturating_sub(1)];
        if a.t == t || i == v.len() {
            return Ok(single(a.firm.unwrap_or(0)));
        }
        let b = v[i];
        let (fa, fb) = (a.firm.unwrap_or(0), b.firm.unwrap_or(0));
        if fa == fb {
            return Ok(single(fa));
        }
        let y = self.value_at_t(t);
        for f in [fa.min(fb), fa.max(fb)] {
            if techs[f].value_at_t(t) >= y - 1e-12 {
                return Ok(single(f));
            }
        }
        let wa = (b.t - t) / (b.t - a.t);
        let mut w = vec![0.0; jn];
        w[fa] = wa;
        w[fb] = 1.0 - wa;
        let mut pts = vec![SimplexPoint::barycenter(2); jn];
        pts[fa] = SimplexPoint::from_vec_unchecked(vec![a.t, 1.0 - a.t]);
        pts[fb] = SimplexPoint::from_vec_unchecked(vec![b.t, 1.0 - b.t]);
        Ok(AllocationPlan::assemble(techs, x.to_vec(), w, pts))
    }

    pub fn bridges(&self, techs: &[Technology]) -> Vec<Bridge> {
        self.vertices
            .windows(2)
            .filter_map(|w| {
                let (a, b) = (w[0], w[1]);
                let (fa, fb) = (a.firm?, b.firm?);
                if fa == fb {
                    return None;
                }
                let mid = 0.5 * (a.t + b.t);
                let level = 0.5 * (a.y + b.y);
                let below = |f: usize| techs[f].value_at_t(mid) < level - 1e-9;
                (below(fa) && below(fb)).then_some(Bridge { t0: a.t, y0: a.y, t1: b.t, y1: b.y, left_firm: fa, right_firm: fb })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3() -> Vec<Technology> {
        vec![
            Technology::leontief(vec![2.0, 0.5]).unwrap(),
            Technology::leontief(vec![1.0, 1.0]).unwrap(),
            Technology::leontief(vec![0.5, 2.0]).unwrap(),
        ]
    }

    #[test]
    fn leontief_envelope_vertices() {
        let env = exact_envelope_2d(&fig3(), 10).unwrap();
        let got: Vec<(f64, f64)> = env.vertices().iter().map(|v| (v.t, v.y)).collect();
        let want = [(0.0, 0.0), (0.2, 0.4), (0.5, 0.5), (0.8, 0.4), (1.0, 0.0)];
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert!((g.0 - w.0).abs() < 1e-12 && (g.1 - w.1).abs() < 1e-12, "{got:?}");
        }
        let bridges = env.bridges(&fig3());
        assert_eq!(bridges.len(), 2);
        assert_eq!((bridges[0].left_firm, bridges[0].right_firm), (0, 1));
    }

    #[test]
    fn bridge_plan_splits_and_flank_plan_does_not() {
        let techs = fig3();
        let env = exact_envelope_2d(&techs, 10).unwrap();
        let plan = env.plan(&techs, &[0.35, 0.65]).unwrap();
        assert_eq!(plan.active_firms(), vec![0, 1]);
        assert!((plan.value - 0.45).abs() < 1e-12);
        plan.check(&techs).unwrap();
        let plan = env.plan(&techs, &[0.9, 0.1]).unwrap();
        assert_eq!(plan.active_firms(), vec![2]);
        assert!((plan.value - 0.2).abs() < 1e-12);
    }

    #[test]
    fn cobb_douglas_flat_stretch() {
        let techs = vec![
            Technology::cobb_douglas(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap(),
            Technology::cobb_douglas(vec![2.0 / 3.0, 1.0 / 3.0]).unwrap(),
        ];
        let env = exact_envelope_2d(&techs, 512).unwrap();
        let level = 2f64.powf(2.0 / 3.0) / 3.0;
        let br = env.bridges(&techs);
        assert_eq!(br.len(), 1);
        assert!((br[0].t0 - 1.0 / 3.0).abs() < 2e-3 && (br[0].t1 - 2.0 / 3.0).abs() < 2e-3);
        assert!((br[0].y0 - level).abs() < 1e-4 && (br[0].y1 - level).abs() < 1e-4);
        assert!((env.value_at_t(0.5) - level).abs() < 1e-4);
    }

    #[test]
    fn single_firm_envelope_is_its_graph() {
        let t = vec![Technology::pwl_simplex(vec![[0.0, 0.1], [0.5, 0.5], [1.0, 0.2]]).unwrap()];
        let env = exact_envelope_2d(&t, 4).unwrap();
        let got: Vec<(f64, f64)> = env.vertices().iter().map(|v| (v.t, v.y)).collect();
        assert_eq!(got, vec![(0.0, 0.1), (0.5, 0.5), (1.0, 0.2)]);
    }

    #[test]
    fn non_concave_rejected() {
        let t = vec![Technology::pwl_simplex(vec![[0.0, 0.0], [0.2, 0.5], [0.4, 0.0], [1.0, 0.0]]).unwrap()];
        assert_eq!(exact_envelope_2d(&t, 4).unwrap_err(), Error::NonConcave { firm: 0 });
    }
}
