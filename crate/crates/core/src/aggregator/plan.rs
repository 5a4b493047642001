use crate::error::{Error, Result};
use crate::simplexgeom::{l1_norm, SimplexPoint};
use crate::technology::Technology;
use serde::Serialize;

/// Weights at or below this count as inactive.
pub const ACTIVE_TOL: f64 = 1e-12;

/// A split of an input vector `x` among the firms: firm `j` receives
/// `‖x‖₁ · α_j · x_j` with `α ∈ Δ_J` and each `x_j ∈ Δ_N`.
///
/// Inactive firms (`α_j = 0`) sit at the barycenter so plans compare exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationPlan {
    pub weights: Vec<f64>,
    pub firm_points: Vec<SimplexPoint>,
    pub total: Vec<f64>,
    pub value: f64,
}

impl AllocationPlan {
    /// Builds a plan and evaluates its output exactly.
    pub fn assemble(techs: &[Technology], total: Vec<f64>, weights: Vec<f64>, mut firm_points: Vec<SimplexPoint>) -> Self {
        let n = total.len();
        for (w, p) in weights.iter().zip(firm_points.iter_mut()) {
            if *w <= 0.0 {
                *p = SimplexPoint::barycenter(n);
            }
        }
        let s = l1_norm(&total);
        let value =
            s * techs.iter().zip(&weights).zip(&firm_points).map(|((t, &a), p)| a * t.value_on_simplex(p)).sum::<f64>();
        AllocationPlan { weights, firm_points, total, value }
    }

    /// The plan for `x = 0`: uniform weights, every firm at the barycenter.
    pub fn zero(firms: usize, n: usize) -> Self {
        AllocationPlan {
            weights: vec![1.0 / firms as f64; firms],
            firm_points: vec![SimplexPoint::barycenter(n); firms],
            total: vec![0.0; n],
            value: 0.0,
        }
    }

    pub fn active_firms(&self) -> Vec<usize> {
        (0..self.weights.len()).filter(|&j| self.weights[j] > ACTIVE_TOL).collect()
    }

    /// Actual input bundle of firm `j`.
    pub fn firm_input(&self, j: usize) -> Vec<f64> {
        self.firm_points[j].scaled(l1_norm(&self.total) * self.weights[j])
    }

    pub fn firm_inputs(&self) -> Vec<Vec<f64>> {
        (0..self.weights.len()).map(|j| self.firm_input(j)).collect()
    }

    /// Checks feasibility and the recorded value against `techs`.
    pub fn check(&self, techs: &[Technology]) -> Result<()> {
        let n = self.total.len();
        if self.weights.len() != techs.len() || self.firm_points.len() != techs.len() {
            return Err(Error::Inconsistent("plan and technology list differ in length".into()));
        }
        if self.weights.iter().any(|&a| a < -1e-12) {
            return Err(Error::Inconsistent("negative firm weight".into()));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::Inconsistent(format!("weights sum to {sum}")));
        }
        let s = l1_norm(&self.total);
        if s > 0.0 {
            for i in 0..n {
                let mixed: f64 = self.weights.iter().zip(&self.firm_points).map(|(a, p)| a * p.coords()[i]).sum();
                if (mixed - self.total[i] / s).abs() > 1e-8 {
                    return Err(Error::Inconsistent(format!("coordinate {i} mixes to {mixed}, expected {}", self.total[i] / s)));
                }
            }
        }
        let v = s * techs
            .iter()
            .zip(&self.weights)
            .zip(&self.firm_points)
            .map(|((t, &a), p)| a * t.value_on_simplex(p))
            .sum::<f64>();
        if (v - self.value).abs() > 1e-8 * (1.0 + v.abs()) {
            return Err(Error::Inconsistent(format!("recorded value {} but plan yields {v}", self.value)));
        }
        Ok(())
    }
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assembled_plans_pass_their_own_check() {
        let techs = vec![Technology::linear(vec![2.0, 1.0]).unwrap(), Technology::linear(vec![1.0, 3.0]).unwrap()];
        let plan = AllocationPlan::assemble(
            &techs,
            vec![1.0, 1.0],
            vec![0.5, 0.5],
            vec![SimplexPoint::vertex(2, 0), SimplexPoint::vertex(2, 1)],
        );
        assert_eq!(plan.value, 5.0);
        plan.check(&techs).unwrap();
        assert_eq!(plan.firm_input(0), vec![1.0, 0.0]);
        assert_eq!(plan.active_firms(), vec![0, 1]);
    }

    #[test]
    fn inactive_firms_move_to_the_barycenter() {
        let techs = vec![Technology::linear(vec![2.0, 1.0]).unwrap(), Technology::linear(vec![1.0, 3.0]).unwrap()];
        let plan = AllocationPlan::assemble(
            &techs,
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![SimplexPoint::vertex(2, 0), SimplexPoint::vertex(2, 1)],
        );
        assert_eq!(plan.firm_points[1], SimplexPoint::barycenter(2));
        assert_eq!(plan.active_firms(), vec![0]);
    }

    #[test]
    fn check_catches_infeasible_plans() {
        let techs = vec![Technology::linear(vec![1.0, 1.0]).unwrap()];
        let mut plan = AllocationPlan::assemble(&techs, vec![0.5, 0.5], vec![1.0], vec![SimplexPoint::barycenter(2)]);
        plan.check(&techs).unwrap();
        plan.total = vec![0.9, 0.1];
        assert!(plan.check(&techs).is_err());
    }
}
