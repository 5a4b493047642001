//! Dense two-phase simplex method.
//!
//! Problems here are small (a handful of rows against a few thousand columns, or
//! the transpose), so the solver keeps a full dense tableau. Pricing is Dantzig's
//! largest-coefficient rule; after a run of degenerate pivots it falls back to
//! Bland's rule for the remainder of the phase, which rules out cycling.

use crate::error::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// Variable bounds. `lower` may be `-inf`, `upper` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub const NONNEG: Bounds = Bounds { lower: 0.0, upper: f64::INFINITY };
    pub const FREE: Bounds = Bounds { lower: f64::NEG_INFINITY, upper: f64::INFINITY };
}

/// A dense linear program `opt c·x  s.t.  rows, bounds`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    pub bounds: Vec<Bounds>,
}

impl LinearProgram {
    /// New program with every variable nonnegative and no constraints.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram { sense, objective, rows: Vec::new(), bounds: vec![Bounds::NONNEG; n] }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.rows.push(Row { coeffs, relation, rhs });
        self
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        self.bounds[var] = Bounds { lower, upper };
        self
    }

    pub fn free(&mut self, var: usize) -> &mut Self {
        self.bounds[var] = Bounds::FREE;
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(Error::Inconsistent(format!("{} bounds for {} variables", self.bounds.len(), n)));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::Inconsistent("objective has non-finite entries".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(Error::Inconsistent(format!(
                    "row {i} has {} coefficients for {n} variables",
                    row.coeffs.len()
                )));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(Error::Inconsistent(format!("row {i} has non-finite entries")));
            }
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if b.lower.is_nan() || b.upper.is_nan() || b.lower > b.upper || b.lower == f64::INFINITY {
                return Err(Error::Inconsistent(format!("variable {j} has empty bounds")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of [`solve_lp`].
///
/// `dual` holds one multiplier per user row, in the sign convention of the
/// user's sense: for a minimization with `≥` rows the multipliers are
/// nonnegative and `rhs·dual` equals the optimum when all variables are plain
/// nonnegative or free. Empty unless `status` is optimal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub iterations: usize,
}

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-10;
const DEGENERATE_STREAK: usize = 50;

#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// x = offset + col
    Shift { col: usize, offset: f64 },
    /// x = offset - col
    Mirror { col: usize, offset: f64 },
    /// x = pos - neg
    Split { pos: usize, neg: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    m: usize,
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    obj: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn ncols(&self) -> usize {
        self.width - 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.data[r * self.width + self.width - 1]
    }

    fn price(&mut self, costs: &[f64]) {
        let n = self.ncols();
        for j in 0..=n {
            let mut acc = if j < n { -costs[j] } else { 0.0 };
            for r in 0..self.m {
                let cb = costs[self.basis[r]];
                if cb != 0.0 {
                    acc += cb * self.at(r, j);
                }
            }
            self.obj[j] = acc;
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.data[r * w + c];
        for v in &mut self.data[r * w..(r + 1) * w] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.data[r * w..(r + 1) * w].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.data[i * w + c];
            if f != 0.0 {
                for (v, pr) in self.data[i * w..(i + 1) * w].iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
                self.data[i * w + c] = 0.0;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, pr) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
        self.iterations += 1;
    }

    fn run(&mut self, eligible: &[bool]) -> Result<PhaseOutcome> {
        let n = self.ncols();
        let mut degenerate = 0usize;
        let mut bland = false;
        loop {
            if self.iterations > self.max_iterations {
                return Err(Error::Numerical(format!(
                    "iteration limit {} exceeded",
                    self.max_iterations
                )));
            }
            let entering = if bland {
                (0..n).find(|&j| eligible[j] && self.obj[j] < -COST_TOL)
            } else {
                let mut best = None;
                let mut best_val = -COST_TOL;
                for j in 0..n {
                    if eligible[j] && self.obj[j] < best_val {
                        best_val = self.obj[j];
                        best = Some(j);
                    }
                }
                best
            };
            let Some(c) = entering else {
                return Ok(PhaseOutcome::Optimal);
            };
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for r in 0..self.m {
                let a = self.at(r, c);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r).max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            ratio < best_ratio - 1e-12
                                || (ratio <= best_ratio + 1e-12 && self.basis[r] < self.basis[l])
                        }
                    };
                    if better {
                        best_ratio = ratio;
                        leave = Some(r);
                    }
                }
            }
            let Some(r) = leave else {
                return Ok(PhaseOutcome::Unbounded);
            };
            if best_ratio <= 1e-12 {
                degenerate += 1;
                if degenerate > DEGENERATE_STREAK {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
        }
    }
}

/// Solve a dense linear program.
///
/// Infeasibility and unboundedness are reported through [`LpStatus`]; an
/// iteration-limit overrun surfaces as [`Error::Numerical`] so that it is never
/// mistaken for infeasibility.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n_user = lp.num_vars();
    let sign = match lp.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };

    // Map user variables onto nonnegative internal columns.
    let mut maps = Vec::with_capacity(n_user);
    let mut n_struct = 0usize;
    let mut extra_rows: Vec<(usize, f64)> = Vec::new();
    for b in &lp.bounds {
        let map = if b.lower.is_finite() {
            let col = n_struct;
            n_struct += 1;
            if b.upper.is_finite() {
                extra_rows.push((col, b.upper - b.lower));
            }
            VarMap::Shift { col, offset: b.lower }
        } else if b.upper.is_finite() {
            let col = n_struct;
            n_struct += 1;
            VarMap::Mirror { col, offset: b.upper }
        } else {
            let pos = n_struct;
            n_struct += 2;
            VarMap::Split { pos, neg: pos + 1 }
        };
        maps.push(map);
    }

    // Internal rows over structural columns.
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(lp.rows.len() + extra_rows.len());
    for row in &lp.rows {
        let mut coeffs = vec![0.0; n_struct];
        let mut rhs = row.rhs;
        for (j, &a) in row.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shift { col, offset } => {
                    coeffs[col] += a;
                    rhs -= a * offset;
                }
                VarMap::Mirror { col, offset } => {
                    coeffs[col] -= a;
                    rhs -= a * offset;
                }
                VarMap::Split { pos, neg } => {
                    coeffs[pos] += a;
                    coeffs[neg] -= a;
                }
            }
        }
        rows.push((coeffs, row.relation, rhs));
    }
    for &(col, width) in &extra_rows {
        let mut coeffs = vec![0.0; n_struct];
        coeffs[col] = 1.0;
        rows.push((coeffs, Relation::Le, width));
    }
    let mut flipped = vec![false; rows.len()];
    for (i, (coeffs, rel, rhs)) in rows.iter_mut().enumerate() {
        if *rhs < 0.0 {
            flipped[i] = true;
            *rhs = -*rhs;
            coeffs.iter_mut().for_each(|a| *a = -*a);
            *rel = match *rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    // Constant offsets from shifted bounds are dropped; the reported value is
    // recomputed from the user objective.
    let mut costs_struct = vec![0.0; n_struct];
    for (j, &c) in lp.objective.iter().enumerate() {
        let c = sign * c;
        match maps[j] {
            VarMap::Shift { col, .. } => costs_struct[col] += c,
            VarMap::Mirror { col, .. } => costs_struct[col] -= c,
            VarMap::Split { pos, neg } => {
                costs_struct[pos] += c;
                costs_struct[neg] -= c;
            }
        }
    }

    // Lay out slack/surplus and artificial columns.
    let m = rows.len();
    let mut kinds = vec![ColKind::Structural; n_struct];
    let mut row_slack: Vec<Option<(usize, f64)>> = vec![None; m];
    let mut row_art: Vec<Option<usize>> = vec![None; m];
    for (i, (_, rel, _)) in rows.iter().enumerate() {
        match rel {
            Relation::Le => {
                row_slack[i] = Some((kinds.len(), 1.0));
                kinds.push(ColKind::Slack);
            }
            Relation::Ge => {
                row_slack[i] = Some((kinds.len(), -1.0));
                kinds.push(ColKind::Slack);
                row_art[i] = Some(kinds.len());
                kinds.push(ColKind::Artificial);
            }
            Relation::Eq => {
                row_art[i] = Some(kinds.len());
                kinds.push(ColKind::Artificial);
            }
        }
    }
    let ncols = kinds.len();
    let width = ncols + 1;
    let mut data = vec![0.0; m * width];
    let mut basis = vec![0usize; m];
    for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
        let base = i * width;
        data[base..base + n_struct].copy_from_slice(coeffs);
        if let Some((c, s)) = row_slack[i] {
            data[base + c] = s;
        }
        if let Some(a) = row_art[i] {
            data[base + a] = 1.0;
        }
        data[base + ncols] = *rhs;
        basis[i] = match rel {
            Relation::Le => row_slack[i].map(|(c, _)| c).unwrap_or(0),
            _ => row_art[i].unwrap_or(0),
        };
    }

    let mut tab = Tableau {
        m,
        width,
        data,
        basis,
        obj: vec![0.0; width],
        iterations: 0,
        max_iterations: 50_000 + 50 * (m + ncols),
    };

    // Phase 1: drive artificials to zero.
    let has_artificials = kinds.contains(&ColKind::Artificial);
    if has_artificials {
        let phase1: Vec<f64> = kinds
            .iter()
            .map(|k| if *k == ColKind::Artificial { -1.0 } else { 0.0 })
            .collect();
        tab.price(&phase1);
        let eligible = vec![true; ncols];
        tab.run(&eligible)?;
        let scale = 1.0 + rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
        if tab.obj[ncols] < -1e-7 * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                value: if sign > 0.0 { f64::NEG_INFINITY } else { f64::INFINITY },
                primal: Vec::new(),
                dual: Vec::new(),
                iterations: tab.iterations,
            });
        }
        for r in 0..m {
            if kinds[tab.basis[r]] == ColKind::Artificial {
                let replacement = (0..ncols)
                    .filter(|&j| kinds[j] != ColKind::Artificial)
                    .max_by(|&a, &b| tab.at(r, a).abs().total_cmp(&tab.at(r, b).abs()))
                    .filter(|&j| tab.at(r, j).abs() > PIVOT_TOL);
                if let Some(j) = replacement {
                    tab.pivot(r, j);
                }
            }
        }
    }

    // Phase 2.
    let mut costs = vec![0.0; ncols];
    costs[..n_struct].copy_from_slice(&costs_struct);
    tab.price(&costs);
    let eligible: Vec<bool> = kinds.iter().map(|k| *k != ColKind::Artificial).collect();
    if let PhaseOutcome::Unbounded = tab.run(&eligible)? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            value: if sign > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY },
            primal: Vec::new(),
            dual: Vec::new(),
            iterations: tab.iterations,
        });
    }

    let mut internal = vec![0.0; ncols];
    for r in 0..m {
        internal[tab.basis[r]] = tab.rhs(r).max(0.0);
    }
    let primal: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            VarMap::Shift { col, offset } => offset + internal[col],
            VarMap::Mirror { col, offset } => offset - internal[col],
            VarMap::Split { pos, neg } => internal[pos] - internal[neg],
        })
        .collect();
    let value = lp.objective.iter().zip(&primal).map(|(c, x)| c * x).sum();

    let dual = (0..lp.rows.len())
        .map(|i| {
            let y = match (row_slack[i], row_art[i]) {
                (Some((c, s)), _) => tab.obj[c] * s,
                (None, Some(a)) => tab.obj[a],
                (None, None) => 0.0,
            };
            let y = if flipped[i] { -y } else { y };
            sign * y
        })
        .collect();

    Ok(LpSolution { status: LpStatus::Optimal, value, primal, dual, iterations: tab.iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_upper_bound_row() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0]);
        lp.free(0).constraint(vec![1.0], Relation::Le, 1.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.value, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.primal[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.dual[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unit_budget() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 1.0]);
        lp.constraint(vec![1.0, 1.0], Relation::Le, 1.0);
        let s = solve_lp(&lp).unwrap();
        assert_abs_diff_eq!(s.value, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.dual[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn minimize_with_ge_rows_has_nonnegative_duals() {
        // min 2a + 3b  s.t. a + b >= 1, a - b >= -0.5
        let mut lp = LinearProgram::new(Sense::Minimize, vec![2.0, 3.0]);
        lp.constraint(vec![1.0, 1.0], Relation::Ge, 1.0)
            .constraint(vec![1.0, -1.0], Relation::Ge, -0.5);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.value, 2.0, epsilon = 1e-10);
        assert!(s.dual.iter().all(|&y| y >= -1e-12));
        let dual_value: f64 = s.dual[0] * 1.0 + s.dual[1] * -0.5;
        assert_abs_diff_eq!(dual_value, s.value, epsilon = 1e-9);
    }

    #[test]
    fn infeasible_is_a_status_not_an_error() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0]);
        lp.constraint(vec![1.0], Relation::Ge, 2.0).constraint(vec![1.0], Relation::Le, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 0.0]);
        lp.constraint(vec![1.0, -1.0], Relation::Le, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn bounded_and_shifted_variables() {
        // max x + y, 1 <= x <= 2, y <= 3 (y free below), x + y <= 4
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 1.0]);
        lp.set_bounds(0, 1.0, 2.0)
            .set_bounds(1, f64::NEG_INFINITY, 3.0)
            .constraint(vec![1.0, 1.0], Relation::Le, 4.0);
        let s = solve_lp(&lp).unwrap();
        assert_abs_diff_eq!(s.value, 4.0, epsilon = 1e-10);
        assert!(s.primal[0] >= 1.0 - 1e-12 && s.primal[0] <= 2.0 + 1e-12);
        assert!(s.primal[1] <= 3.0 + 1e-12);
    }

    #[test]
    fn equality_rows_with_redundancy() {
        // x + y = 1 listed twice; max x.
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 0.0]);
        lp.constraint(vec![1.0, 1.0], Relation::Eq, 1.0)
            .constraint(vec![2.0, 2.0], Relation::Eq, 2.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under naive Dantzig pricing.
        let mut lp = LinearProgram::new(Sense::Maximize, vec![0.75, -20.0, 0.5, -6.0]);
        lp.constraint(vec![0.25, -8.0, -1.0, 9.0], Relation::Le, 0.0)
            .constraint(vec![0.5, -12.0, -0.5, 3.0], Relation::Le, 0.0)
            .constraint(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.value, 1.25, epsilon = 1e-9);
    }

    #[test]
    fn rejects_ragged_rows() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 1.0]);
        lp.constraint(vec![1.0], Relation::Le, 1.0);
        assert!(matches!(solve_lp(&lp), Err(Error::Inconsistent(_))));
    }
}
