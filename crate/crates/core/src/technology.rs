//! Constant-returns-to-scale production functions.
//!
//! Every family is evaluated through its restriction to the simplex,
//! `F(x) = ‖x‖₁ · F(x / ‖x‖₁)` with `F(0) = 0`, so degree-one homogeneity holds
//! by construction rather than by algebra.

use crate::error::{Error, Result};
use crate::simplexgeom::{project, validate_input, SimplexPoint};
use serde::{Deserialize, Serialize};

/// Parametric family and its parameters. Serializes to the scenario record
/// format, e.g. `{"family": "leontief", "a": [2.0, 0.5]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `Π x_n^{α_n}`, `α ∈ Δ_N`.
    CobbDouglas { alpha: Vec<f64> },
    /// `min_n a_n x_n`, `a > 0`.
    Leontief { a: Vec<f64> },
    /// `v · x`, `v ≥ 0`.
    Linear { v: Vec<f64> },
    /// `(Σ w_n x_n^ρ)^{1/ρ}`, `ρ < 1`, `ρ ≠ 0`.
    Ces { weights: Vec<f64>, rho: f64 },
    /// Two inputs only: piecewise-linear in `t = x₁ / (x₁ + x₂)` through the
    /// breakpoints `(t_k, y_k)`, with `t_0 = 0` and `t_last = 1`.
    PwlSimplex { points: Vec<[f64; 2]> },
}

const KNOWN_FAMILIES: [&str; 5] = ["cobb_douglas", "leontief", "linear", "ces", "pwl_simplex"];

/// A validated technology. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Technology {
    family: Family,
    #[serde(skip)]
    concave: bool,
    #[serde(skip)]
    monotone: bool,
}

fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { field, reason: reason.into() }
}

fn check_finite(field: &'static str, xs: &[f64]) -> Result<()> {
    if xs.iter().any(|v| !v.is_finite()) {
        return Err(invalid(field, "entries must be finite"));
    }
    Ok(())
}

fn pwl_slopes(points: &[[f64; 2]]) -> Vec<f64> {
    points.windows(2).map(|w| (w[1][1] - w[0][1]) / (w[1][0] - w[0][0])).collect()
}

impl Technology {
    pub fn new(family: Family) -> Result<Self> {
        match &family {
            Family::CobbDouglas { alpha } => {
                check_finite("alpha", alpha)?;
                if alpha.len() < 2 {
                    return Err(invalid("alpha", "need at least two inputs"));
                }
                if alpha.iter().any(|&a| a < 0.0) {
                    return Err(invalid("alpha", "exponents must be nonnegative"));
                }
                let s: f64 = alpha.iter().sum();
                if (s - 1.0).abs() > 1e-12 {
                    return Err(invalid("alpha", format!("exponents must sum to 1 (got {s})")));
                }
            }
            Family::Leontief { a } => {
                check_finite("a", a)?;
                if a.len() < 2 {
                    return Err(invalid("a", "need at least two inputs"));
                }
                if a.iter().any(|&c| c <= 0.0) {
                    return Err(invalid("a", "coefficients must be strictly positive"));
                }
            }
            Family::Linear { v } => {
                check_finite("v", v)?;
                if v.len() < 2 {
                    return Err(invalid("v", "need at least two inputs"));
                }
                if v.iter().any(|&c| c < 0.0) {
                    return Err(invalid("v", "prices must be nonnegative"));
                }
            }
            Family::Ces { weights, rho } => {
                check_finite("weights", weights)?;
                if weights.len() < 2 {
                    return Err(invalid("weights", "need at least two inputs"));
                }
                if weights.iter().any(|&w| w < 0.0) || weights.iter().all(|&w| w == 0.0) {
                    return Err(invalid("weights", "weights must be nonnegative and not all zero"));
                }
                if !rho.is_finite() || *rho >= 1.0 || *rho == 0.0 {
                    return Err(invalid("rho", format!("need rho < 1 and rho != 0 (got {rho})")));
                }
            }
            Family::PwlSimplex { points } => {
                if points.len() < 2 {
                    return Err(invalid("points", "need at least two breakpoints"));
                }
                for p in points {
                    check_finite("points", p)?;
                    if p[1] < 0.0 {
                        return Err(invalid("points", "values must be nonnegative"));
                    }
                }
                if points[0][0] != 0.0 || points[points.len() - 1][0] != 1.0 {
                    return Err(invalid("points", "breakpoints must start at t = 0 and end at t = 1"));
                }
                if points.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return Err(invalid("points", "breakpoints must be strictly increasing in t"));
                }
            }
        }
        let concave = match &family {
            Family::PwlSimplex { points } => {
                let s = pwl_slopes(points);
                s.windows(2).all(|w| w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()))
            }
            _ => true,
        };
        let monotone = match &family {
            Family::PwlSimplex { points } => {
                // ∇F = (f + (1 - t) f', f - t f') is affine in t on each piece,
                // so checking the piece endpoints suffices.
                pwl_slopes(points).iter().zip(points.windows(2)).all(|(&s, w)| {
                    w.iter().all(|p| p[1] + (1.0 - p[0]) * s >= -1e-12 && p[1] - p[0] * s >= -1e-12)
                })
            }
            _ => true,
        };
        Ok(Technology { family, concave, monotone })
    }

    pub fn cobb_douglas(alpha: Vec<f64>) -> Result<Self> {
        Self::new(Family::CobbDouglas { alpha })
    }

    pub fn leontief(a: Vec<f64>) -> Result<Self> {
        Self::new(Family::Leontief { a })
    }

    pub fn linear(v: Vec<f64>) -> Result<Self> {
        Self::new(Family::Linear { v })
    }

    pub fn ces(weights: Vec<f64>, rho: f64) -> Result<Self> {
        Self::new(Family::Ces { weights, rho })
    }

    pub fn pwl_simplex(points: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(Family::PwlSimplex { points })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::CobbDouglas { .. } => "cobb_douglas",
            Family::Leontief { .. } => "leontief",
            Family::Linear { .. } => "linear",
            Family::Ces { .. } => "ces",
            Family::PwlSimplex { .. } => "pwl_simplex",
        }
    }

    pub fn dim(&self) -> usize {
        match &self.family {
            Family::CobbDouglas { alpha } => alpha.len(),
            Family::Leontief { a } => a.len(),
            Family::Linear { v } => v.len(),
            Family::Ces { weights, .. } => weights.len(),
            Family::PwlSimplex { .. } => 2,
        }
    }

    pub fn is_concave(&self) -> bool {
        self.concave
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    /// Piecewise linear on the simplex with finitely many known kinks; such
    /// technologies are sampled exactly in two dimensions.
    pub fn is_polyhedral(&self) -> bool {
        matches!(self.family, Family::Leontief { .. } | Family::Linear { .. } | Family::PwlSimplex { .. })
    }

    /// `F(x)` for `x ∈ R₊^N`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        validate_input(x, self.dim())?;
        match project(x) {
            Ok((scale, p)) => Ok(scale * self.value_on_simplex(&p)),
            Err(Error::ZeroVector) => Ok(0.0),
            Err(e) => Err(e),
        }
    }

    /// `F(p)` for `p ∈ Δ_N` of matching dimension.
    pub fn value_on_simplex(&self, p: &SimplexPoint) -> f64 {
        let x = p.coords();
        match &self.family {
            Family::CobbDouglas { alpha } => {
                let mut log = 0.0;
                for (&a, &xi) in alpha.iter().zip(x) {
                    if a > 0.0 {
                        if xi <= 0.0 {
                            return 0.0;
                        }
                        log += a * xi.ln();
                    }
                }
                log.exp()
            }
            Family::Leontief { a } => a.iter().zip(x).map(|(a, x)| a * x).fold(f64::INFINITY, f64::min),
            Family::Linear { v } => v.iter().zip(x).map(|(v, x)| v * x).sum(),
            Family::Ces { weights, rho } => {
                let mut s = 0.0;
                for (&w, &xi) in weights.iter().zip(x) {
                    if w == 0.0 {
                        continue;
                    }
                    if xi <= 0.0 {
                        if *rho < 0.0 {
                            return 0.0;
                        }
                        continue;
                    }
                    s += w * xi.powf(*rho);
                }
                if s <= 0.0 {
                    0.0
                } else {
                    s.powf(1.0 / rho)
                }
            }
            Family::PwlSimplex { points } => pwl_value(points, x[0]),
        }
    }

    /// `F(t, 1 - t)`. Only meaningful for two-input technologies.
    pub fn value_at_t(&self, t: f64) -> f64 {
        self.value_on_simplex(&SimplexPoint::from_vec_unchecked(vec![t, 1.0 - t]))
    }

    /// Supergradients of the homogeneous extension at `p`: vectors `g` with
    /// `g · p = F(p)` and `F(x) ≤ g · x` for all `x ≥ 0` when the technology is
    /// concave. Kinks return both one-sided candidates; points where the
    /// gradient blows up (boundary zeros of Cobb-Douglas or CES) return none.
    pub fn supergradients(&self, p: &SimplexPoint) -> Vec<Vec<f64>> {
        let x = p.coords();
        match &self.family {
            Family::Linear { v } => vec![v.clone()],
            Family::Leontief { a } => {
                let vals: Vec<f64> = a.iter().zip(x).map(|(a, x)| a * x).collect();
                let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
                let tol = 1e-12 * (1.0 + min.abs());
                vals.iter()
                    .enumerate()
                    .filter(|(_, &v)| v <= min + tol)
                    .map(|(n, _)| {
                        let mut g = vec![0.0; a.len()];
                        g[n] = a[n];
                        g
                    })
                    .collect()
            }
            Family::CobbDouglas { alpha } => {
                if alpha.iter().zip(x).any(|(&a, &xi)| a > 0.0 && xi <= 0.0) {
                    return Vec::new();
                }
                let f = self.value_on_simplex(p);
                vec![alpha.iter().zip(x).map(|(&a, &xi)| if a > 0.0 { a * f / xi } else { 0.0 }).collect()]
            }
            Family::Ces { weights, rho } => {
                if weights.iter().zip(x).any(|(&w, &xi)| w > 0.0 && xi <= 0.0) {
                    return Vec::new();
                }
                let f = self.value_on_simplex(p);
                if f <= 0.0 {
                    return Vec::new();
                }
                vec![weights
                    .iter()
                    .zip(x)
                    .map(|(&w, &xi)| if w > 0.0 { w * xi.powf(rho - 1.0) * f.powf(1.0 - rho) } else { 0.0 })
                    .collect()]
            }
            Family::PwlSimplex { points } => {
                let t = x[0];
                let f = pwl_value(points, t);
                let slopes = pwl_slopes(points);
                let mut out = Vec::new();
                for (k, w) in points.windows(2).enumerate() {
                    if w[0][0] <= t && t <= w[1][0] {
                        let s = slopes[k];
                        out.push(vec![f + (1.0 - t) * s, f - t * s]);
                    }
                }
                out
            }
        }
    }

    /// Points of the simplex where the restriction is not smooth. Sampling
    /// engines add these to their grids so polyhedral families are represented
    /// exactly.
    pub fn kinks(&self) -> Vec<SimplexPoint> {
        match &self.family {
            Family::PwlSimplex { points } => {
                points.iter().map(|p| SimplexPoint::from_vec_unchecked(vec![p[0], 1.0 - p[0]])).collect()
            }
            Family::Leontief { a } => {
                let inv: Vec<f64> = a.iter().map(|c| 1.0 / c).collect();
                let s: f64 = inv.iter().sum();
                vec![SimplexPoint::from_vec_unchecked(inv.iter().map(|v| v / s).collect())]
            }
            _ => Vec::new(),
        }
    }
}

fn pwl_value(points: &[[f64; 2]], t: f64) -> f64 {
    let i = points.partition_point(|p| p[0] <= t);
    if i == 0 {
        return points[0][1];
    }
    let [t0, y0] = points[i - 1];
    if t == t0 || i == points.len() {
        return y0;
    }
    let [t1, y1] = points[i];
    y0 + (y1 - y0) * (t - t0) / (t1 - t0)
}

/// Build a [`Technology`] from a scenario record such as
/// `{"family": "cobb_douglas", "alpha": [0.5, 0.5]}`.
pub fn parse_technology(record: &serde_json::Value) -> Result<Technology> {
    let family = record
        .get("family")
        .ok_or_else(|| Error::Malformed("missing field `family`".into()))?
        .as_str()
        .ok_or_else(|| Error::Malformed("`family` must be a string".into()))?;
    if !KNOWN_FAMILIES.contains(&family) {
        return Err(Error::UnknownFamily(family.to_string()));
    }
    let parsed: Family = serde_json::from_value(record.clone()).map_err(|e| Error::Malformed(e.to_string()))?;
    Technology::new(parsed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use serde_json::json;

    fn fig1_firm1() -> Technology {
        Technology::pwl_simplex(vec![[0.0, 0.0], [0.2, 0.5], [0.4, 0.0], [1.0, 0.0]]).unwrap()
    }

    #[test]
    fn cobb_douglas_peak_value() {
        let f = Technology::cobb_douglas(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let expected = 2f64.powf(2.0 / 3.0) / 3.0;
        assert_abs_diff_eq!(f.evaluate(&[1.0 / 3.0, 2.0 / 3.0]).unwrap(), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(expected, 0.529134, epsilon = 1e-6);
        assert_abs_diff_eq!(f.evaluate(&[2.0, 2.0]).unwrap(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn leontief_vertex() {
        let f = Technology::leontief(vec![2.0, 0.5]).unwrap();
        assert_abs_diff_eq!(f.evaluate(&[0.2, 0.8]).unwrap(), 0.4, epsilon = 1e-15);
        assert_eq!(f.kinks()[0].coords().len(), 2);
        assert_abs_diff_eq!(f.kinks()[0].t(), 0.2, epsilon = 1e-15);
    }

    #[test]
    fn zero_input_gives_zero_for_every_family() {
        let techs = [
            Technology::cobb_douglas(vec![0.5, 0.5]).unwrap(),
            Technology::leontief(vec![1.0, 1.0]).unwrap(),
            Technology::linear(vec![2.0, 3.0]).unwrap(),
            Technology::ces(vec![1.0, 1.0], -1.0).unwrap(),
            fig1_firm1(),
        ];
        for t in &techs {
            assert_eq!(t.evaluate(&[0.0, 0.0]).unwrap(), 0.0);
        }
    }

    #[test]
    fn evaluation_errors() {
        let f = Technology::linear(vec![1.0, 1.0]).unwrap();
        assert_eq!(f.evaluate(&[1.0]), Err(Error::DimensionMismatch { expected: 2, got: 1 }));
        assert!(matches!(f.evaluate(&[1.0, -1.0]), Err(Error::NegativeComponent { index: 1, .. })));
        assert!(matches!(f.evaluate(&[f64::NAN, 1.0]), Err(Error::NotFinite { index: 0 })));
    }

    #[test]
    fn cobb_douglas_boundary_conventions() {
        let f = Technology::cobb_douglas(vec![0.0, 1.0]).unwrap();
        // zero exponent on a zero input contributes a factor of 1
        assert_abs_diff_eq!(f.evaluate(&[0.0, 3.0]).unwrap(), 3.0, epsilon = 1e-15);
        let g = Technology::cobb_douglas(vec![0.5, 0.5]).unwrap();
        assert_eq!(g.evaluate(&[0.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn ces_limits() {
        let f = Technology::ces(vec![1.0, 1.0], 0.5).unwrap();
        // (√x + √y)² at (1, 0) is 1; at (1, 1) is 4
        assert_abs_diff_eq!(f.evaluate(&[1.0, 0.0]).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.evaluate(&[1.0, 1.0]).unwrap(), 4.0, epsilon = 1e-14);
        let g = Technology::ces(vec![1.0, 1.0], -1.0).unwrap();
        assert_eq!(g.evaluate(&[1.0, 0.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(g.evaluate(&[1.0, 1.0]).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn pwl_breakpoints_round_trip_exactly() {
        let f = Technology::pwl_simplex(vec![
            [0.0, 0.0],
            [0.1, 0.3],
            [0.2, 0.5],
            [0.3, 0.55],
            [0.4, 0.0],
            [0.7, 0.1],
            [1.0, 0.0],
        ])
        .unwrap();
        if let Family::PwlSimplex { points } = f.family() {
            for p in points {
                assert_eq!(f.evaluate(&[p[0], 1.0 - p[0]]).unwrap(), p[1], "t = {}", p[0]);
            }
        }
    }

    #[test]
    fn pwl_concavity_flag() {
        assert!(!fig1_firm1().is_concave());
        let tent = Technology::pwl_simplex(vec![[0.0, 0.0], [0.5, 0.5], [1.0, 0.0]]).unwrap();
        assert!(tent.is_concave());
        assert!(tent.is_monotone());
        assert!(!fig1_firm1().is_monotone());
    }

    #[test]
    fn supergradients_satisfy_euler_identity() {
        let techs = [
            Technology::cobb_douglas(vec![0.3, 0.7]).unwrap(),
            Technology::leontief(vec![2.0, 0.5]).unwrap(),
            Technology::ces(vec![0.4, 0.6], -2.0).unwrap(),
            Technology::pwl_simplex(vec![[0.0, 0.1], [0.5, 0.5], [1.0, 0.2]]).unwrap(),
        ];
        for tech in &techs {
            for t in [0.1, 0.2, 0.5, 0.77] {
                let p = SimplexPoint::from_t(t).unwrap();
                let f = tech.value_on_simplex(&p);
                for g in tech.supergradients(&p) {
                    assert_abs_diff_eq!(g[0] * t + g[1] * (1.0 - t), f, epsilon = 1e-12);
                    for s in [0.0, 0.05, 0.3, 0.6, 0.95, 1.0] {
                        let q = SimplexPoint::from_t(s).unwrap();
                        assert!(tech.value_on_simplex(&q) <= g[0] * s + g[1] * (1.0 - s) + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn parse_records() {
        let t = parse_technology(&json!({"family": "cobb_douglas", "alpha": [0.5, 0.5]})).unwrap();
        assert!(t.is_concave());
        let err = parse_technology(&json!({"family": "cobb_douglas", "alpha": [0.5, 0.6]})).unwrap_err();
        assert!(err.to_string().contains("exponents must sum to 1"), "{err}");
        let t = parse_technology(&json!({"family": "pwl_simplex", "points": [[0,0],[0.2,0.5],[0.4,0],[1,0]]}))
            .unwrap();
        assert!(!t.is_concave());
        assert_eq!(
            parse_technology(&json!({"family": "translog"})),
            Err(Error::UnknownFamily("translog".into()))
        );
        let err = parse_technology(&json!({"family": "ces", "weights": [1, 1], "rho": 1.0})).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { field: "rho", .. }));
        assert!(matches!(parse_technology(&json!({"family": "leontief"})), Err(Error::Malformed(_))));
        let err = parse_technology(&json!({"family": "leontief", "a": [1.0, 0.0]})).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { field: "a", .. }));
    }

    #[test]
    fn records_serialize_back() {
        let t = Technology::leontief(vec![2.0, 0.5]).unwrap();
        assert_eq!(serde_json::to_value(&t).unwrap(), json!({"family": "leontief", "a": [2.0, 0.5]}));
    }
}
