use super::plan::AllocationPlan;
use crate::convexcore::support::common_dim;
use crate::error::{Error, Result};
use crate::simplexgeom::{project, validate_input, SimplexPoint};
use crate::technology::{Family, Technology};
use serde::Serialize;

/// Where a candidate segment comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SegmentKind {
    /// A piece of one firm's own graph.
    Graph { firm: usize },
    /// A chord from a breakpoint of `left_firm` to one of the other firm.
    Chord { left_firm: usize, right_firm: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub t0: f64,
    pub y0: f64,
    pub t1: f64,
    pub y1: f64,
    pub kind: SegmentKind,
}

impl Segment {
    fn covers(&self, t: f64) -> bool {
        self.t0 <= t && t <= self.t1
    }

    fn at(&self, t: f64) -> f64 {
        if t == self.t1 {
            self.y1
        } else {
            self.y0 + (self.y1 - self.y0) * (t - self.t0) / (self.t1 - self.t0)
        }
    }

    fn line(&self) -> (f64, f64) {
        let slope = (self.y1 - self.y0) / (self.t1 - self.t0);
        (self.y0 - slope * self.t0, slope)
    }
}

/// Exact aggregate of two piecewise-linear firms, concave or not.
///
/// With one point per firm, the best split at `t` either uses one firm alone
/// or mixes a breakpoint of each graph: for fixed pieces the problem is an LP
/// in `(α, α t₁)` whose vertices put both points on breakpoints. The envelope is
/// therefore the pointwise maximum of the two graphs and all breakpoint chords.
#[derive(Debug, Clone, Serialize)]
pub struct PairwiseEnvelope {
    segments: Vec<Segment>,
    vertices: Vec<(f64, f64)>,
}

fn breakpoints(t: &Technology) -> Option<&[[f64; 2]]> {
    match t.family() {
        Family::PwlSimplex { points } => Some(points),
        _ => None,
    }
}

pub fn envelope_pairwise_2d(techs: &[Technology]) -> Result<PairwiseEnvelope> {
    if techs.len() != 2 {
        return Err(Error::Unsupported(format!("the pairwise envelope needs exactly 2 firms, got {}", techs.len())));
    }
    common_dim(techs)?;
    let (Some(b0), Some(b1)) = (breakpoints(&techs[0]), breakpoints(&techs[1])) else {
        return Err(Error::Unsupported("the pairwise envelope needs two pwl_simplex firms".into()));
    };
    let mut segments = Vec::new();
    for (firm, pts) in [(0usize, b0), (1usize, b1)] {
        for w in pts.windows(2) {
            segments.push(Segment { t0: w[0][0], y0: w[0][1], t1: w[1][0], y1: w[1][1], kind: SegmentKind::Graph { firm } });
        }
    }
    for p in b0 {
        for q in b1 {
            if p[0] == q[0] {
                continue;
            }
            let ((l, lf), (r, rf)) = if p[0] < q[0] { ((p, 0), (q, 1)) } else { ((q, 1), (p, 0)) };
            segments.push(Segment {
                t0: l[0],
                y0: l[1],
                t1: r[0],
                y1: r[1],
                kind: SegmentKind::Chord { left_firm: lf, right_firm: rf },
            });
        }
    }

    let mut ts: Vec<f64> = Vec::new();
    for s in &segments {
        ts.push(s.t0);
        ts.push(s.t1);
    }
    for (i, a) in segments.iter().enumerate() {
        let (ca, sa) = a.line();
        for b in &segments[i + 1..] {
            let (cb, sb) = b.line();
            if sa == sb {
                continue;
            }
            let t = (cb - ca) / (sa - sb);
            if a.covers(t) && b.covers(t) {
                ts.push(t);
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-13);

    let mut env = PairwiseEnvelope { segments, vertices: Vec::new() };
    let mut vertices: Vec<(f64, f64)> = Vec::with_capacity(ts.len());
    for t in ts {
        let y = env.value_at_t(t);
        while vertices.len() >= 2 {
            let (ta, ya) = vertices[vertices.len() - 2];
            let (tb, yb) = vertices[vertices.len() - 1];
            let chord = ya + (y - ya) * (tb - ta) / (t - ta);
            if (yb - chord).abs() <= 1e-12 {
                vertices.pop();
            } else {
                break;
            }
        }
        vertices.push((t, y));
    }
    env.vertices = vertices;
    Ok(env)
}

impl PairwiseEnvelope {
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Breakpoints of the envelope polyline, collinear points removed.
    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    fn best_segment(&self, t: f64) -> Option<&Segment> {
        let mut best: Option<(&Segment, f64)> = None;
        for s in self.segments.iter().filter(|s| s.covers(t)) {
            let y = s.at(t);
            let replace = match best {
                None => true,
                Some((b, by)) => {
                    y > by || (y == by && matches!(s.kind, SegmentKind::Graph { .. }) && !matches!(b.kind, SegmentKind::Graph { .. }))
                }
            };
            if replace {
                best = Some((s, y));
            }
        }
        best.map(|(s, _)| s)
    }

    pub fn value_at_t(&self, t: f64) -> f64 {
        self.best_segment(t).map_or(0.0, |s| s.at(t))
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        validate_input(x, 2)?;
        match project(x) {
            Ok((s, p)) => Ok(s * self.value_at_t(p.t())),
            Err(Error::ZeroVector) => Ok(0.0),
            Err(e) => Err(e),
        }
    }

    pub fn plan(&self, techs: &[Technology], x: &[f64]) -> Result<AllocationPlan> {
        validate_input(x, 2)?;
        let (_, p) = match project(x) {
            Ok(v) => v,
            Err(Error::ZeroVector) => return Ok(AllocationPlan::zero(2, 2)),
            Err(e) => return Err(e),
        };
        let t = p.t();
        let seg = self.best_segment(t).ok_or_else(|| Error::Numerical(format!("no segment covers t = {t}")))?;
        let single = |f: usize| {
            let mut w = vec![0.0; 2];
            w[f] = 1.0;
            AllocationPlan::assemble(techs, x.to_vec(), w, vec![p.clone(), p.clone()])
        };
        match seg.kind {
            SegmentKind::Graph { firm } => Ok(single(firm)),
            SegmentKind::Chord { left_firm, right_firm } => {
                if t == seg.t0 {
                    return Ok(single(left_firm));
                }
                if t == seg.t1 {
                    return Ok(single(right_firm));
                }
                let wl = (seg.t1 - t) / (seg.t1 - seg.t0);
                let mut w = vec![0.0; 2];
                w[left_firm] = wl;
                w[right_firm] = 1.0 - wl;
                let mut pts = vec![SimplexPoint::barycenter(2); 2];
                pts[left_firm] = SimplexPoint::from_vec_unchecked(vec![seg.t0, 1.0 - seg.t0]);
                pts[right_firm] = SimplexPoint::from_vec_unchecked(vec![seg.t1, 1.0 - seg.t1]);
                Ok(AllocationPlan::assemble(techs, x.to_vec(), w, pts))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> Vec<Technology> {
        vec![
            Technology::pwl_simplex(vec![[0.0, 0.0], [0.2, 0.5], [0.4, 0.0], [1.0, 0.0]]).unwrap(),
            Technology::pwl_simplex(vec![[0.0, 0.0], [0.4, 0.6], [0.8, 0.0], [0.9, 0.5], [1.0, 0.0]]).unwrap(),
        ]
    }

    #[test]
    fn figure_one_values() {
        let env = envelope_pairwise_2d(&fig1()).unwrap();
        assert!((env.value_at_t(0.7) - 0.5).abs() < 1e-12);
        assert!((env.value_at_t(0.3) - 0.55).abs() < 1e-12);
        // Chord from firm 2's peak (0.4, 0.6) to firm 1's (1, 0).
        assert!((env.value_at_t(0.45) - 0.55).abs() < 1e-12);
        assert!((env.value_at_t(0.4) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn figure_one_plans() {
        let techs = fig1();
        let env = envelope_pairwise_2d(&techs).unwrap();
        let plan = env.plan(&techs, &[0.3, 0.7]).unwrap();
        plan.check(&techs).unwrap();
        assert_eq!(plan.active_firms(), vec![0, 1]);
        assert!((plan.value - 0.55).abs() < 1e-12);
        let plan = env.plan(&techs, &[1.4, 0.6]).unwrap();
        assert!((plan.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vertices_trace_the_envelope() {
        let env = envelope_pairwise_2d(&fig1()).unwrap();
        let v = env.vertices();
        assert_eq!(v.first().unwrap().0, 0.0);
        assert_eq!(v.last().unwrap().0, 1.0);
        for w in v.windows(2) {
            let mid = 0.5 * (w[0].0 + w[1].0);
            assert!((env.value_at_t(mid) - 0.5 * (w[0].1 + w[1].1)).abs() < 1e-12);
        }
    }

    #[test]
    fn needs_two_pwl_firms() {
        let mut t = fig1();
        t.push(t[0].clone());
        assert!(matches!(envelope_pairwise_2d(&t), Err(Error::Unsupported(_))));
        let t = vec![fig1()[0].clone(), Technology::linear(vec![1.0, 1.0]).unwrap()];
        assert!(matches!(envelope_pairwise_2d(&t), Err(Error::Unsupported(_))));
    }
}
