//! Numerical certificates for the structural facts about aggregates: linearity
//! on the cone of optimal firm inputs, equivalence of aggregate and firm-level
//! profit maximization, inherited properties, and sparse optimal plans.
//!
//! Every checker is a pure function of its inputs and seed. Residuals are
//! reported per unit of total input (`‖x‖₁`), so a certificate for `x̄` and for
//! `2x̄` carry the same numbers.

use crate::aggregator::brute::subsets;
use crate::aggregator::sandwich::plan_from_hull;
use crate::aggregator::{brute_force, exact_envelope_2d, hull_plan, Aggregate, AllocationPlan, Engine};
use crate::convexcore::lp::{solve_lp, LinearProgram, LpStatus, Relation, Sense};
use crate::convexcore::support::{common_dim, price_from_hull, require_concave, sample_envelope, sample_points, sampled_hull};
use crate::error::{Error, Result};
use crate::simplexgeom::{dot, l1_norm, project, validate_input, ConeRegion, SimplexPoint};
use crate::technology::Technology;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Tolerance for two-input instances whose firms are all polyhedral, where the
/// engines are exact.
pub const EXACT_TOL: f64 = 1e-6;
/// Tolerance for sampled instances at default resolution.
pub const SAMPLED_TOL: f64 = 3e-3;
/// Most firms [`sparsify`] will enumerate subsets of.
pub const SPARSIFY_MAX_FIRMS: usize = 12;

pub fn default_tolerance(techs: &[Technology]) -> f64 {
    let two_inputs = techs.first().is_some_and(|t| t.dim() == 2);
    if two_inputs && techs.iter().all(Technology::is_polyhedral) {
        EXACT_TOL
    } else {
        SAMPLED_TOL
    }
}

/// Grid resolution used when none is given: 512 on `Δ_2`, 64 above.
pub fn default_resolution(n: usize) -> usize {
    if n == 2 {
        512
    } else {
        64
    }
}

/// Knobs shared by the checkers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifyOptions {
    /// Resolution for hull-based engines and sample grids.
    pub resolution: usize,
    /// Resolution for brute-force evaluation, which scales much worse.
    pub brute_resolution: usize,
    pub seed: u64,
    pub trials: usize,
    /// `None` picks [`default_tolerance`].
    pub tolerance: Option<f64>,
}

impl CertifyOptions {
    pub fn for_dim(n: usize) -> Self {
        CertifyOptions {
            resolution: default_resolution(n),
            brute_resolution: if n == 2 { 200 } else { 16 },
            seed: 0,
            trials: 100,
            tolerance: None,
        }
    }

    fn tol(&self, techs: &[Technology]) -> f64 {
        self.tolerance.unwrap_or_else(|| default_tolerance(techs))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Passed,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
}

/// Outcome of one check. A failed report always carries a counterexample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub instance: String,
    pub status: CheckStatus,
    pub residuals: Vec<Residual>,
    pub counterexample: Option<Vec<f64>>,
    pub notes: Vec<String>,
}

impl CheckReport {
    fn new(check: &str, instance: String) -> Self {
        CheckReport {
            check: check.to_string(),
            instance,
            status: CheckStatus::Passed,
            residuals: Vec::new(),
            counterexample: None,
            notes: Vec::new(),
        }
    }

    fn residual(&mut self, name: &str, value: f64) {
        self.residuals.push(Residual { name: name.to_string(), value });
    }

    fn fail(&mut self, counterexample: Vec<f64>) {
        self.status = CheckStatus::Failed;
        if self.counterexample.is_none() {
            self.counterexample = Some(counterexample);
        }
    }

    pub fn passed(&self) -> bool {
        self.status != CheckStatus::Failed
    }
}

fn describe(techs: &[Technology]) -> String {
    let names: Vec<&str> = techs.iter().map(Technology::family_name).collect();
    format!("{} firms ({}), {} inputs", techs.len(), names.join(", "), techs.first().map_or(0, Technology::dim))
}

/// Most accurate engine available for `techs`.
pub fn best_aggregate(techs: &[Technology], opts: &CertifyOptions) -> Result<Aggregate> {
    let n = common_dim(techs)?;
    let concave = techs.iter().all(Technology::is_concave);
    if concave && n == 2 {
        Aggregate::build(techs, Engine::Exact2d, opts.resolution)
    } else if concave {
        Aggregate::build(techs, Engine::Sandwich, opts.resolution)
    } else {
        let k = if matches!(super::aggregator::resolve_engine(techs, Engine::Auto)?, Engine::Brute) {
            opts.brute_resolution
        } else {
            opts.resolution
        };
        Aggregate::build(techs, Engine::Auto, k)
    }
}

/// Grid on which profit excesses are scanned: the engine's own resolution.
fn scan_resolution(agg: &Aggregate, opts: &CertifyOptions) -> usize {
    match agg.engine() {
        Engine::Brute => opts.brute_resolution,
        _ => opts.resolution,
    }
}

/// Evidence that the aggregate is linear on the cone of optimal firm inputs.
#[derive(Debug, Clone, Serialize)]
pub struct ConeCertificate {
    pub cone: ConeRegion,
    pub price: Vec<f64>,
    pub plan: AllocationPlan,
    pub samples_checked: usize,
    /// `max |F(x) − w·x| / ‖x‖₁` over the random cone points.
    pub max_abs_residual: f64,
    /// `max_j |F_j(x_j) − w·x_j|` over active firms, per unit input.
    pub max_ray_excess: f64,
    /// `max_v (max_j F_j(v) − w·v)` over the grid; at most `tolerance` when
    /// `w` majorizes every firm.
    pub majorization_gap: f64,
    pub tolerance: f64,
    pub seed: u64,
    pub engine: Engine,
    pub valid: bool,
}

/// Builds the supporting price and optimal plan at `x̄` from the sampled hull,
/// then checks that `F(x) = w·x` on the cone spanned by the firm inputs.
pub fn flat_cone(techs: &[Technology], xbar: &[f64], opts: &CertifyOptions) -> Result<ConeCertificate> {
    let n = common_dim(techs)?;
    validate_input(xbar, n)?;
    if xbar.iter().any(|&v| v <= 0.0) {
        return Err(Error::BoundaryPoint);
    }
    require_concave(techs)?;
    let tol = opts.tol(techs);
    let k = opts.resolution;
    let hull = sampled_hull(techs, xbar, k)?;
    let w = price_from_hull(&hull)?.price;
    let plan = plan_from_hull(techs, xbar, &hull)?;
    plan.check(techs)?;

    let active = plan.active_firms();
    let rays: Vec<Vec<f64>> = active.iter().map(|&j| plan.firm_input(j)).collect();
    let max_ray_excess = active
        .iter()
        .map(|&j| (techs[j].value_on_simplex(&plan.firm_points[j]) - dot(&w, plan.firm_points[j].coords())).abs())
        .fold(0.0, f64::max);
    let cone = ConeRegion::new(rays.clone())?;

    let agg = best_aggregate(techs, opts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let draws: Vec<Vec<f64>> = (0..opts.trials.max(1))
        .map(|_| {
            let beta: Vec<f64> = rays.iter().map(|_| rng.gen::<f64>()).collect();
            (0..n).map(|i| rays.iter().zip(&beta).map(|(r, b)| b * r[i]).sum()).collect()
        })
        .collect();
    let residuals: Vec<f64> = draws
        .par_iter()
        .map(|x| {
            let s = l1_norm(x);
            if s == 0.0 {
                return Ok(0.0);
            }
            Ok((agg.value(x)? - dot(&w, x)).abs() / s)
        })
        .collect::<Result<_>>()?;
    let max_abs_residual = residuals.iter().copied().fold(0.0, f64::max);

    let grid = sample_envelope(techs, k, &[])?;
    let majorization_gap = grid
        .points
        .iter()
        .zip(&grid.values)
        .map(|(v, y)| y - dot(&w, v.coords()))
        .fold(f64::NEG_INFINITY, f64::max);

    let valid = max_abs_residual <= tol && max_ray_excess <= tol && majorization_gap <= tol;
    Ok(ConeCertificate {
        cone,
        price: w,
        plan,
        samples_checked: draws.len(),
        max_abs_residual,
        max_ray_excess,
        majorization_gap,
        tolerance: tol,
        seed: opts.seed,
        engine: agg.engine(),
        valid,
    })
}

/// Profit-maximization verdict for one producer (or the aggregate) at price `w`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub optimal: bool,
    /// `max_v (F(v) − w·v)` over unit-input directions `v`.
    pub max_excess: f64,
    pub excess_direction: Vec<f64>,
    /// `(F(x*) − w·x*) / ‖x*‖₁` for the aggregate, the same with the firm's own
    /// input for a firm; zero when that input is zero.
    pub own_profit: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfitEquivalence {
    pub price: Vec<f64>,
    pub aggregate: Verdict,
    pub firms: Vec<Verdict>,
    /// Aggregate verdict equals the conjunction of the firm verdicts.
    pub agree: bool,
    pub report: CheckReport,
}

fn verdict(values: &[f64], points: &[SimplexPoint], w: &[f64], own: f64, tol: f64) -> Verdict {
    let (mut best, mut dir) = (f64::NEG_INFINITY, Vec::new());
    for (y, v) in values.iter().zip(points) {
        let e = y - dot(w, v.coords());
        if e > best {
            best = e;
            dir = v.coords().to_vec();
        }
    }
    Verdict { optimal: best <= tol && own >= -tol, max_excess: best, excess_direction: dir, own_profit: own }
}

/// Compares aggregate profit maximization at `(w, x*)` against profit
/// maximization by each firm at its share of `plan`.
///
/// With constant returns, profit along any ray is either zero or unbounded, so
/// optimality of `x*` means no unit direction earns positive profit and `x*`
/// itself does not lose money.
pub fn profit_equivalence(
    techs: &[Technology],
    w: &[f64],
    x_star: &[f64],
    plan: &AllocationPlan,
    opts: &CertifyOptions,
) -> Result<ProfitEquivalence> {
    let n = common_dim(techs)?;
    validate_input(x_star, n)?;
    if w.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: w.len() });
    }
    if plan.weights.len() != techs.len() {
        return Err(Error::Inconsistent("plan does not match the technology list".into()));
    }
    let tol = opts.tol(techs);
    let agg = best_aggregate(techs, opts)?;
    let s = l1_norm(x_star);
    let mut extra = Vec::new();
    if s > 0.0 {
        extra.push(project(x_star)?.1);
    }
    for j in plan.active_firms() {
        extra.push(plan.firm_points[j].clone());
    }
    let pts = sample_points(techs, scan_resolution(&agg, opts), &extra)?;

    let agg_values: Vec<f64> = pts.par_iter().map(|v| agg.value(v.coords())).collect::<Result<_>>()?;
    let own = if s > 0.0 { (agg.value(x_star)? - dot(w, x_star)) / s } else { 0.0 };
    let aggregate = verdict(&agg_values, &pts, w, own, tol);

    let firms: Vec<Verdict> = techs
        .iter()
        .enumerate()
        .map(|(j, t)| {
            let values: Vec<f64> = pts.iter().map(|v| t.value_on_simplex(v)).collect();
            // Per unit of the firm's own input, so the aggregate figure is an
            // input-weighted average of the firm figures.
            let xj = plan.firm_input(j);
            let sj = l1_norm(&xj);
            let own = if sj > 0.0 { (t.evaluate(&xj)? - dot(w, &xj)) / sj } else { 0.0 };
            Ok(verdict(&values, &pts, w, own, tol))
        })
        .collect::<Result<_>>()?;

    let all_firms = firms.iter().all(|v| v.optimal);
    let agree = aggregate.optimal == all_firms;
    let mut report = CheckReport::new("profit_equivalence", format!("{}; x* = {:?}; w = {:?}", describe(techs), x_star, w));
    report.residual("aggregate_max_excess", aggregate.max_excess);
    report.residual("aggregate_own_profit", aggregate.own_profit);
    for (j, v) in firms.iter().enumerate() {
        report.residual(&format!("firm_{}_max_excess", j + 1), v.max_excess);
        report.residual(&format!("firm_{}_own_profit", j + 1), v.own_profit);
    }
    report.notes.push(format!("aggregate optimal: {}; every firm optimal: {}", aggregate.optimal, all_firms));
    if !aggregate.optimal {
        report.counterexample = Some(if aggregate.max_excess > tol { aggregate.excess_direction.clone() } else { x_star.to_vec() });
    } else if let Some(v) = firms.iter().find(|v| !v.optimal) {
        report.counterexample = Some(v.excess_direction.clone());
    }
    if !agree {
        let ce = report.counterexample.clone().unwrap_or_else(|| x_star.to_vec());
        report.fail(ce);
    }
    Ok(ProfitEquivalence { price: w.to_vec(), aggregate, firms, agree, report })
}

/// A tested price and the direction that beats it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceProbe {
    pub price: Vec<f64>,
    pub direction: Vec<f64>,
    pub excess: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Impossibility {
    pub point: Vec<f64>,
    pub value: f64,
    pub probes: Vec<PriceProbe>,
    pub report: CheckReport,
}

/// Tests whether `x̄` fails to be profit maximizing at every nonnegative price.
///
/// Prices with `w·x̄ ≠ F(x̄)` are ruled out at once: a loss is beaten by
/// producing nothing and a gain can be scaled without bound. On the hyperplane
/// `w·x̄ = F(x̄)` an LP finds the price with the smallest worst-case excess
/// `max_v F(v) − w·v` over the sample directions; the report passes when even
/// that price leaves an excess above tolerance. Sampled values are achievable
/// outputs, so a pass is a certificate. A failure's counterexample is the
/// supporting price. `probes` adds a sweep of prices for context.
pub fn profit_impossibility(techs: &[Technology], xbar: &[f64], opts: &CertifyOptions) -> Result<Impossibility> {
    let n = common_dim(techs)?;
    validate_input(xbar, n)?;
    let (scale, p) = project(xbar)?;
    let tol = opts.tol(techs);
    let agg = best_aggregate(techs, opts)?;
    let value = agg.value(xbar)?;
    let pts = sample_points(techs, scan_resolution(&agg, opts), &[p.clone()])?;
    let values: Vec<f64> = pts.par_iter().map(|v| agg.value(v.coords())).collect::<Result<_>>()?;

    // w0 lies on the hyperplane; directions d are orthogonal to x̄.
    let level = value / scale;
    let pp = dot(p.coords(), p.coords());
    let w0: Vec<f64> = p.coords().iter().map(|c| level * c / pp).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let count = opts.trials.max(2);
    let mut probes = Vec::with_capacity(count);
    for i in 0..count {
        let mut d: Vec<f64> = if n == 2 {
            vec![p.coords()[1], -p.coords()[0]]
        } else {
            (0..n).map(|_| rng.gen::<f64>() - 0.5).collect()
        };
        let proj = dot(&d, p.coords()) / pp;
        d.iter_mut().zip(p.coords()).for_each(|(di, ci)| *di -= proj * ci);
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (wi, di) in w0.iter().zip(&d) {
            if *di > 0.0 {
                lo = lo.max(-wi / di);
            } else if *di < 0.0 {
                hi = hi.min(-wi / di);
            }
        }
        let frac = if n == 2 { i as f64 / (count - 1) as f64 } else { rng.gen::<f64>() };
        let step = if lo.is_finite() && hi.is_finite() { lo + (hi - lo) * frac } else { 0.0 };
        let w: Vec<f64> = w0.iter().zip(&d).map(|(a, b)| (a + step * b).max(0.0)).collect();
        let v = verdict(&values, &pts, &w, 0.0, tol);
        probes.push(PriceProbe { price: w, direction: v.excess_direction, excess: v.max_excess });
    }

    // min s  s.t.  w·v + s ≥ F(v) for every sample v,  w·p = F(p),  w ≥ 0.
    let mut lp = LinearProgram::new(Sense::Minimize, [vec![0.0; n], vec![1.0]].concat());
    lp.free(n);
    for (v, y) in pts.iter().zip(&values) {
        lp.constraint([v.coords().to_vec(), vec![1.0]].concat(), Relation::Ge, *y);
    }
    lp.constraint([p.coords().to_vec(), vec![0.0]].concat(), Relation::Eq, level);
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Numerical(format!("minimax price LP ended {:?}", sol.status)));
    }
    let best_w: Vec<f64> = sol.primal[..n].iter().map(|v| v.max(0.0)).collect();
    let best = verdict(&values, &pts, &best_w, 0.0, tol);
    probes.insert(0, PriceProbe { price: best_w.clone(), direction: best.excess_direction, excess: best.max_excess });

    let mut report = CheckReport::new("profit_impossibility", format!("{}; x̄ = {:?}", describe(techs), xbar));
    report.residual("min_excess_over_prices", best.max_excess);
    report.notes.push(format!("best price {best_w:?} on w·x̄ = F(x̄) = {value}; {} prices swept", probes.len() - 1));
    if best.max_excess <= tol {
        report.fail(best_w);
        report.notes.push("a nonnegative price supports x̄".into());
    } else {
        report.notes.push("x̄ is not profit maximizing at any nonnegative price".into());
    }
    Ok(Impossibility { point: xbar.to_vec(), value, probes, report })
}

/// One randomized property check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubCheck {
    pub name: String,
    pub status: CheckStatus,
    /// Whether the property is implied for this instance. Informational
    /// checks never fail the suite.
    pub required: bool,
    pub trials: usize,
    pub tolerance: f64,
    pub worst_residual: f64,
    /// The offending input vectors, concatenated.
    pub counterexample: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Inheritance {
    pub checks: Vec<SubCheck>,
    pub report: CheckReport,
}

struct Tracker {
    check: SubCheck,
}

impl Tracker {
    fn new(name: &str, required: bool, trials: usize, tolerance: f64) -> Self {
        Tracker {
            check: SubCheck {
                name: name.into(),
                status: CheckStatus::Passed,
                required,
                trials,
                tolerance,
                worst_residual: 0.0,
                counterexample: None,
            },
        }
    }

    /// `residual > tolerance` is a violation.
    fn record(&mut self, residual: f64, witness: impl FnOnce() -> Vec<f64>) {
        if residual > self.check.worst_residual {
            self.check.worst_residual = residual;
        }
        if residual > self.check.tolerance && self.check.status == CheckStatus::Passed {
            self.check.status = CheckStatus::Failed;
            self.check.counterexample = Some(witness());
        }
    }
}

/// Randomized checks that the aggregate inherits monotonicity, concavity and
/// degree-one homogeneity from the firms, plus superadditivity. Monotonicity is
/// required only when every firm is monotone, concavity and superadditivity
/// only when every firm is concave; otherwise they are reported for
/// information. `F` comes from brute force at `opts.brute_resolution`, whose
/// values are achievable outputs, so one-sided grid error is all the tolerance
/// has to absorb. Residuals are scaled by `max(1, ‖·‖₁)`.
pub fn inheritance_suite(techs: &[Technology], opts: &CertifyOptions) -> Result<Inheritance> {
    let n = common_dim(techs)?;
    let tol = opts.tolerance.unwrap_or(SAMPLED_TOL);
    let k = opts.brute_resolution;
    let f = |x: &[f64]| -> Result<f64> { Ok(brute_force(techs, x, k)?.value) };
    let unit = |x: &[f64]| l1_norm(x).max(1.0);
    let trials = opts.trials;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut draw = |hi: f64| -> Vec<f64> { (0..n).map(|_| rng.gen::<f64>() * hi).collect() };

    let monotone_required = techs.iter().all(Technology::is_monotone);
    let concave = techs.iter().all(Technology::is_concave);
    let mut mono = Tracker::new("monotonicity", monotone_required, trials, tol);
    let mut conc = Tracker::new("concavity", concave, if concave { trials } else { 0 }, tol);
    let mut homo = Tracker::new("homogeneity", true, trials, 1e-9);
    // Each firm runs one bundle, so merging two allocations is only feasible
    // after pooling bundles, which needs concave firms.
    let mut sup = Tracker::new("superadditivity", concave, trials, 3.0 * tol);

    for _ in 0..trials {
        let x = draw(1.0);
        let d = draw(0.5);
        let y: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + b).collect();
        let (fx, fy) = (f(&x)?, f(&y)?);
        mono.record((fx - fy) / unit(&y), || [x.clone(), y.clone()].concat());

        let z = draw(1.0);
        let sum: Vec<f64> = x.iter().zip(&z).map(|(a, b)| a + b).collect();
        let fz = f(&z)?;
        let fsum = f(&sum)?;
        sup.record((fx + fz - fsum) / unit(&sum), || [x.clone(), z.clone()].concat());

        if concave {
            let mid: Vec<f64> = x.iter().zip(&z).map(|(a, b)| 0.5 * (a + b)).collect();
            let fm = f(&mid)?;
            conc.record((0.5 * (fx + fz) - fm) / unit(&sum), || [x.clone(), z.clone()].concat());
        }

        for lambda in [0.5, 2.0] {
            let lx: Vec<f64> = x.iter().map(|v| lambda * v).collect();
            let r = (f(&lx)? - lambda * fx).abs() / unit(&lx);
            homo.record(r, || [x.clone(), vec![lambda]].concat());
        }
    }
    if !concave {
        conc.check.status = CheckStatus::Skipped;
    }

    let checks = vec![mono.check, conc.check, homo.check, sup.check];
    let mut report = CheckReport::new("inheritance", describe(techs));
    for c in &checks {
        report.residual(&c.name, c.worst_residual);
        let tag = match (c.status, c.required) {
            (CheckStatus::Skipped, _) => "skipped".to_string(),
            (s, true) => format!("{s:?}").to_lowercase(),
            (s, false) => format!("{} (informational)", format!("{s:?}").to_lowercase()),
        };
        report.notes.push(format!("{}: {tag}", c.name));
    }
    if let Some(c) = checks.iter().find(|c| c.required && c.status == CheckStatus::Failed) {
        report.fail(c.counterexample.clone().unwrap_or_default());
    }
    Ok(Inheritance { checks, report })
}

/// Replaces `plan` by one using at most `N` firms and losing at most
/// `tol·max(1, ‖x‖₁)` output.
///
/// Subsets are scanned by size, then lexicographically; each is re-solved on
/// its own and the first that reaches the target wins. A plan that is already
/// sparse enough is returned as is.
pub fn sparsify(techs: &[Technology], x: &[f64], plan: &AllocationPlan, opts: &CertifyOptions) -> Result<AllocationPlan> {
    let n = common_dim(techs)?;
    validate_input(x, n)?;
    require_concave(techs)?;
    let jn = techs.len();
    if jn > SPARSIFY_MAX_FIRMS {
        return Err(Error::Unsupported(format!("sparsify enumerates at most {SPARSIFY_MAX_FIRMS} firms, got {jn}")));
    }
    if plan.total.iter().zip(x).any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + b.abs())) {
        return Err(Error::Inconsistent("plan was computed for a different input".into()));
    }
    plan.check(techs)?;
    if plan.active_firms().len() <= n {
        return Ok(plan.clone());
    }
    let tol = opts.tol(techs);
    let target = plan.value - tol * l1_norm(x).max(1.0);
    let k = opts.resolution;

    let all: Vec<Vec<usize>> = (1..=n.min(jn)).flat_map(|s| subsets(jn, s)).collect();
    let solved: Vec<Result<AllocationPlan>> = all
        .par_iter()
        .map(|sub| {
            let restricted: Vec<Technology> = sub.iter().map(|&j| techs[j].clone()).collect();
            let p = if n == 2 {
                exact_envelope_2d(&restricted, k)?.plan(&restricted, x)?
            } else {
                hull_plan(&restricted, x, k)?
            };
            let mut w = vec![0.0; jn];
            let mut pts = vec![SimplexPoint::barycenter(n); jn];
            for (slot, &j) in sub.iter().enumerate() {
                w[j] = p.weights[slot];
                pts[j] = p.firm_points[slot].clone();
            }
            Ok(AllocationPlan::assemble(techs, x.to_vec(), w, pts))
        })
        .collect();
    for r in solved {
        let p = r?;
        if p.value >= target && p.active_firms().len() <= n {
            p.check(techs)?;
            return Ok(p);
        }
    }
    Err(Error::NoSparsePlan { limit: n, target, tol })
}
