use crate::error::{Error, Result};
use crate::simplexgeom::SimplexPoint;
use serde::Serialize;

/// A point `(x, y)` of the hypograph of firm `firm`'s restriction to the simplex.
/// Firms are indexed from zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledPoint {
    pub x: SimplexPoint,
    pub y: f64,
    pub firm: usize,
}

/// Vertex of a two-input upper envelope, in the chart `t = x₁`. `firm` is
/// `None` only for the corner points `(0, 0)` and `(1, 0)` added to close the hull.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HullVertex {
    pub t: f64,
    pub y: f64,
    pub firm: Option<usize>,
}

/// Height below which a middle vertex counts as collinear and is dropped.
pub const COLLINEAR_TOL: f64 = 1e-10;

/// Concave upper envelope of labeled points on `Δ_2`.
///
/// The corners `(0, 0)` and `(1, 0)` lie in every hypograph and are always
/// added. Among points sharing a `t`, the highest wins; ties prefer a firm label
/// over a corner and then the lower firm index.
pub fn upper_hull_2d(points: &[LabeledPoint]) -> Result<Vec<HullVertex>> {
    let mut pts: Vec<HullVertex> = Vec::with_capacity(points.len() + 2);
    for p in points {
        if p.x.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: p.x.dim() });
        }
        if !p.y.is_finite() || p.y < 0.0 {
            return Err(Error::Inconsistent(format!("hull point has invalid height {}", p.y)));
        }
        pts.push(HullVertex { t: p.x.t(), y: p.y, firm: Some(p.firm) });
    }
    let mut distinct: Vec<f64> = pts.iter().map(|v| v.t).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::Inconsistent("hull needs at least two distinct t values".into()));
    }
    pts.push(HullVertex { t: 0.0, y: 0.0, firm: None });
    pts.push(HullVertex { t: 1.0, y: 0.0, firm: None });
    Ok(upper_hull_vertices(pts))
}

pub(crate) fn upper_hull_vertices(mut pts: Vec<HullVertex>) -> Vec<HullVertex> {
    let label_key = |f: Option<usize>| f.unwrap_or(usize::MAX);
    pts.sort_by(|a, b| {
        a.t.total_cmp(&b.t).then(b.y.total_cmp(&a.y)).then(label_key(a.firm).cmp(&label_key(b.firm)))
    });
    pts.dedup_by(|later, first| later.t == first.t);

    let mut hull: Vec<HullVertex> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let chord = a.y + (p.y - a.y) * (b.t - a.t) / (p.t - a.t);
            if b.y - chord <= COLLINEAR_TOL {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Linear interpolation along a hull polyline sorted by `t`.
pub fn interpolate(vertices: &[HullVertex], t: f64) -> f64 {
    let i = vertices.partition_point(|v| v.t <= t);
    if i == 0 {
        return vertices[0].y;
    }
    let a = vertices[i - 1];
    if i == vertices.len() || a.t == t {
        return a.y;
    }
    let b = vertices[i];
    a.y + (b.y - a.y) * (t - a.t) / (b.t - a.t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(t: f64, y: f64, firm: usize) -> LabeledPoint {
        LabeledPoint { x: SimplexPoint::from_t(t).unwrap(), y, firm }
    }

    fn coords(h: &[HullVertex]) -> Vec<(f64, f64)> {
        h.iter().map(|v| (v.t, v.y)).collect()
    }

    #[test]
    fn leontief_peaks_are_all_extreme() {
        let pts = [lp(0.0, 0.0, 0), lp(0.2, 0.4, 0), lp(0.5, 0.5, 1), lp(0.8, 0.4, 2), lp(1.0, 0.0, 2)];
        let h = upper_hull_2d(&pts).unwrap();
        assert_eq!(coords(&h), vec![(0.0, 0.0), (0.2, 0.4), (0.5, 0.5), (0.8, 0.4), (1.0, 0.0)]);
        assert_eq!(h[2].firm, Some(1));
    }

    #[test]
    fn dominated_point_dropped() {
        let pts = [lp(0.0, 0.0, 0), lp(0.5, 0.2, 0), lp(1.0, 0.0, 0), lp(0.5, 0.5, 1)];
        let h = upper_hull_2d(&pts).unwrap();
        assert_eq!(coords(&h), vec![(0.0, 0.0), (0.5, 0.5), (1.0, 0.0)]);
    }

    #[test]
    fn collinear_interior_vertices_removed() {
        let pts = [lp(0.0, 0.0, 0), lp(0.25, 0.25, 0), lp(0.5, 0.5, 1), lp(1.0, 0.0, 0)];
        let h = upper_hull_2d(&pts).unwrap();
        assert_eq!(coords(&h), vec![(0.0, 0.0), (0.5, 0.5), (1.0, 0.0)]);
    }

    #[test]
    fn all_zero_heights_give_the_two_corners() {
        let pts = [lp(0.0, 0.0, 1), lp(0.3, 0.0, 0), lp(1.0, 0.0, 0)];
        let h = upper_hull_2d(&pts).unwrap();
        assert_eq!(coords(&h), vec![(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(h[0].firm, Some(1));
    }

    #[test]
    fn needs_two_distinct_abscissae() {
        let pts = [lp(0.4, 0.1, 0), lp(0.4, 0.3, 1)];
        assert!(upper_hull_2d(&pts).is_err());
    }

    #[test]
    fn interpolation_hits_vertices_exactly() {
        let pts = [lp(0.2, 0.4, 0), lp(0.5, 0.5, 1), lp(0.8, 0.4, 2)];
        let h = upper_hull_2d(&pts).unwrap();
        assert_eq!(interpolate(&h, 0.5), 0.5);
        assert!((interpolate(&h, 0.35) - 0.45).abs() < 1e-15);
        assert_eq!(interpolate(&h, 1.0), 0.0);
    }
}
