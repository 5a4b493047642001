//! The `supconv` command-line tool as a library, so tests can drive it
//! without spawning processes.
//!
//! Every command reads a JSON scenario (`--scenario FILE`) and prints either a
//! single number, a JSON document or CSV. Numbers carry nine significant
//! digits, and identical arguments give byte-identical output.

pub mod format;
pub mod scenario;

use clap::{Args, Parser, Subcommand};
use format::{json, sig9, FigureTable};
use scenario::Scenario;
use serde_json::{json, Map, Value};
use std::io::Write;
use std::path::{Path, PathBuf};
use supconv::aggregator::{resolve_engine, sandwich, Aggregate};
use supconv::certify::{
    best_aggregate, flat_cone, inheritance_suite, profit_equivalence, profit_impossibility, sparsify, CheckReport,
    CheckStatus,
};
use supconv::simplexgeom::l1_norm;
use supconv::{AllocationPlan, Engine, Error, Technology};

/// Failure classes, one per exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad arguments or scenario contents.
    #[error("{0}")]
    Input(String),
    /// The requested engine or command does not apply to the scenario.
    #[error("{0}")]
    Capability(String),
    /// The input violates a mathematical precondition.
    #[error("{0}")]
    Precondition(String),
    /// A solver or certificate check broke down.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Capability(_) => 3,
            CliError::Precondition(_) => 4,
            CliError::Numerical(_) => 5,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = match &e {
            Error::NonConcave { firm } => format!("firm {} is not concave, which this engine or check requires", firm + 1),
            _ => e.to_string(),
        };
        match e {
            Error::DimensionMismatch { .. }
            | Error::NegativeComponent { .. }
            | Error::NotFinite { .. }
            | Error::ZeroVector
            | Error::UnknownFamily(_)
            | Error::InvalidParameter { .. }
            | Error::Malformed(_) => CliError::Input(msg),
            Error::GridTooLarge { .. } | Error::SearchTooLarge { .. } | Error::NonConcave { .. } | Error::Unsupported(_) => {
                CliError::Capability(msg)
            }
            Error::BoundaryPoint => CliError::Precondition(msg),
            Error::Inconsistent(_) | Error::Numerical(_) | Error::NoSparsePlan { .. } => CliError::Numerical(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(format!("i/o error: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "supconv", version, about = "Aggregate production functions of constant-returns firms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    pub scenario: PathBuf,
    /// Grid resolution; for `figure`, the number of intervals in t.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Seed for randomized checks.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Output of one firm.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Firm number, starting at 1.
        #[arg(long)]
        firm: usize,
        #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
        x: InputList,
    },
    /// Aggregate output and an optimal allocation.
    Aggregate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
        x: InputList,
        /// auto, brute, exact2d, pairwise or sandwich.
        #[arg(long, default_value = "auto", value_parser = parse_engine)]
        engine: Engine,
    },
    /// Linearity-cone certificate at a strictly positive input.
    Flat {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
        x: InputList,
    },
    /// CSV (and optionally SVG) of every firm and the aggregate on the simplex.
    Figure {
        #[command(flatten)]
        common: Common,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Inheritance, profit-equivalence and sparsity checks for the scenario.
    Certify {
        #[command(flatten)]
        common: Common,
        /// Point to examine; defaults to the scenario's probe, then the barycenter.
        #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
        x: Option<InputList>,
    },
    /// An optimal plan using at most N firms.
    Sparsify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
        x: InputList,
        #[arg(long, default_value = "auto", value_parser = parse_engine)]
        engine: Engine,
    },
}

/// A comma-separated list of numbers such as `0.2,0.8`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputList(pub Vec<f64>);

fn parse_list(s: &str) -> Result<InputList, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}` is not a number: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(InputList)
}

fn parse_engine(s: &str) -> Result<Engine, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Runs one command, writing its report to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Eval { common, firm, x } => {
            let s = Scenario::load(&common.scenario)?;
            let t = pick_firm(&s, *firm)?;
            writeln!(out, "{}", sig9(t.evaluate(&x.0)?))?;
        }
        Command::Aggregate { common, x, engine } => {
            let s = Scenario::load(&common.scenario)?;
            out.write_all(json(&aggregate_report(&s, common, &x.0, *engine)?).as_bytes())?;
        }
        Command::Flat { common, x } => {
            let s = Scenario::load(&common.scenario)?;
            out.write_all(json(&flat_report(&s, common, &x.0)?).as_bytes())?;
        }
        Command::Figure { common, out: path, svg } => {
            let s = Scenario::load(&common.scenario)?;
            let table = figure_table(&s, common)?;
            let csv = table.csv();
            match path {
                Some(p) => write_file(p, &csv)?,
                None => out.write_all(csv.as_bytes())?,
            }
            if let Some(p) = svg {
                write_file(p, &table.svg())?;
            }
        }
        Command::Certify { common, x } => {
            let s = Scenario::load(&common.scenario)?;
            let (report, passed) = certify_bundle(&s, common, x.as_ref().map(|l| l.0.as_slice()))?;
            out.write_all(json(&report).as_bytes())?;
            if !passed {
                return Err(CliError::Numerical("certificate checks failed".into()));
            }
        }
        Command::Sparsify { common, x, engine } => {
            let s = Scenario::load(&common.scenario)?;
            out.write_all(json(&sparsify_report(&s, common, &x.0, *engine)?).as_bytes())?;
        }
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn pick_firm(s: &Scenario, firm: usize) -> Result<&Technology, CliError> {
    if firm == 0 || firm > s.firms.len() {
        return Err(CliError::Input(format!("no such firm: {firm} (scenario has {} firms, numbered from 1)", s.firms.len())));
    }
    Ok(&s.firms[firm - 1])
}

/// Resolution for `engine`: brute force has its own, coarser default.
fn engine_resolution(s: &Scenario, common: &Common, engine: Engine) -> Result<(Engine, usize), CliError> {
    let resolved = resolve_engine(&s.firms, engine)?;
    let k = match (common.resolution, resolved) {
        (Some(k), _) => k,
        (None, Engine::Brute) => s.options(None).brute_resolution,
        (None, _) => s.resolution(),
    };
    if k == 0 {
        return Err(CliError::Input("resolution must be positive".into()));
    }
    Ok((resolved, k))
}

fn plan_json(techs: &[Technology], plan: &AllocationPlan) -> Value {
    let active = plan.active_firms();
    let firms: Vec<Value> = (0..techs.len())
        .map(|j| {
            let input = plan.firm_input(j);
            let output = techs[j].evaluate(&input).unwrap_or(0.0);
            json!({
                "firm": j + 1,
                "active": active.contains(&j),
                "weight": plan.weights[j],
                "point": plan.firm_points[j].coords(),
                "input": input,
                "output": output,
            })
        })
        .collect();
    json!({
        "value": plan.value,
        "active_firms": active.iter().map(|j| j + 1).collect::<Vec<_>>(),
        "active_count": active.len(),
        "firms": firms,
    })
}

fn aggregate_report(s: &Scenario, common: &Common, x: &[f64], engine: Engine) -> Result<Value, CliError> {
    let (resolved, k) = engine_resolution(s, common, engine)?;
    let plan = Aggregate::build(&s.firms, resolved, k)?.plan(x)?;
    let mut obj = Map::new();
    obj.insert("engine".into(), json!(resolved.to_string()));
    obj.insert("resolution".into(), json!(k));
    obj.insert("x".into(), json!(x));
    obj.insert("value".into(), json!(plan.value));
    obj.insert("active_count".into(), json!(plan.active_firms().len()));
    if resolved == Engine::Sandwich && x.iter().all(|&v| v > 0.0) {
        let r = sandwich(&s.firms, x, k)?;
        obj.insert("bounds".into(), json!({"lower": r.lower, "upper": r.upper, "gap": r.gap, "price": r.price}));
    }
    obj.insert("plan".into(), plan_json(&s.firms, &plan));
    Ok(Value::Object(obj))
}

fn flat_report(s: &Scenario, common: &Common, x: &[f64]) -> Result<Value, CliError> {
    let mut opts = s.options(common.seed);
    if let Some(k) = common.resolution {
        opts.resolution = k;
    }
    let c = flat_cone(&s.firms, x, &opts)?;
    Ok(json!({
        "valid": c.valid,
        "point": x,
        "value": c.plan.value,
        "price": c.price,
        "rays": c.cone.rays(),
        "samples_checked": c.samples_checked,
        "max_abs_residual": c.max_abs_residual,
        "max_ray_excess": c.max_ray_excess,
        "majorization_gap": c.majorization_gap,
        "tolerance": c.tolerance,
        "seed": c.seed,
        "engine": c.engine.to_string(),
        "resolution": opts.resolution,
        "plan": plan_json(&s.firms, &c.plan),
    }))
}

fn figure_table(s: &Scenario, common: &Common) -> Result<FigureTable, CliError> {
    if s.dim() != 2 {
        return Err(CliError::Capability("figure emission is 2-input only".into()));
    }
    let rows = common.resolution.unwrap_or_else(|| s.resolution());
    if rows == 0 {
        return Err(CliError::Input("resolution must be positive".into()));
    }
    let agg = best_aggregate(&s.firms, &s.options(common.seed))?;
    let t: Vec<f64> = (0..=rows).map(|i| i as f64 / rows as f64).collect();
    let firms = s.firms.iter().map(|f| t.iter().map(|&ti| f.value_at_t(ti)).collect()).collect();
    let aggregate = t.iter().map(|&ti| agg.value(&[ti, 1.0 - ti])).collect::<supconv::Result<Vec<f64>>>()?;
    Ok(FigureTable { t, firms, aggregate })
}

fn report_json(r: &CheckReport) -> Value {
    let mut residuals = Map::new();
    for res in &r.residuals {
        residuals.insert(res.name.clone(), json!(res.value));
    }
    json!({
        "check": r.check,
        "status": status_name(r.status),
        "instance": r.instance,
        "residuals": residuals,
        "counterexample": r.counterexample,
        "notes": r.notes,
    })
}

fn status_name(s: CheckStatus) -> &'static str {
    match s {
        CheckStatus::Passed => "passed",
        CheckStatus::Failed => "failed",
        CheckStatus::Skipped => "skipped",
    }
}

fn skipped(check: &str, reason: &str) -> Value {
    json!({"check": check, "status": "skipped", "notes": [reason]})
}

/// The certificate bundle and whether every required check passed.
fn certify_bundle(s: &Scenario, common: &Common, x: Option<&[f64]>) -> Result<(Value, bool), CliError> {
    let n = s.dim();
    let mut opts = s.options(common.seed);
    if let Some(k) = common.resolution {
        opts.resolution = k;
    }
    let point: Vec<f64> = x.map(<[f64]>::to_vec).or_else(|| s.probe.clone()).unwrap_or_else(|| vec![1.0 / n as f64; n]);
    let concave = s.firms.iter().all(Technology::is_concave);
    let mut checks = Vec::new();
    let mut passed = true;

    let inh = inheritance_suite(&s.firms, &opts)?;
    passed &= inh.report.passed();
    let mut inh_json = report_json(&inh.report);
    inh_json["subchecks"] = json!(inh
        .checks
        .iter()
        .map(|c| json!({
            "name": c.name,
            "status": status_name(c.status),
            "required": c.required,
            "trials": c.trials,
            "tolerance": c.tolerance,
            "worst_residual": c.worst_residual,
            "counterexample": c.counterexample,
        }))
        .collect::<Vec<_>>());
    checks.push(inh_json);

    if concave {
        let cert = flat_cone(&s.firms, &point, &opts)?;
        passed &= cert.valid;
        checks.push(json!({
            "check": "flat_cone",
            "status": if cert.valid { "passed" } else { "failed" },
            "price": cert.price,
            "rays": cert.cone.rays(),
            "max_abs_residual": cert.max_abs_residual,
            "max_ray_excess": cert.max_ray_excess,
            "majorization_gap": cert.majorization_gap,
            "tolerance": cert.tolerance,
        }));

        let pe = profit_equivalence(&s.firms, &cert.price, &point, &cert.plan, &opts)?;
        passed &= pe.report.passed() && pe.aggregate.optimal;
        let mut pe_json = report_json(&pe.report);
        pe_json["price"] = json!(pe.price);
        pe_json["aggregate_optimal"] = json!(pe.aggregate.optimal);
        pe_json["firms_optimal"] = json!(pe.firms.iter().map(|v| v.optimal).collect::<Vec<_>>());
        checks.push(pe_json);

        let agg = best_aggregate(&s.firms, &opts)?;
        let plan = agg.plan(&point)?;
        let sparse = sparsify(&s.firms, &point, &plan, &opts)?;
        let tol = opts.tolerance.unwrap_or_else(|| supconv::certify::default_tolerance(&s.firms));
        let ok = sparse.active_firms().len() <= n && sparse.value >= plan.value - tol * l1_norm(&point).max(1.0);
        passed &= ok;
        checks.push(json!({
            "check": "sparsity",
            "status": if ok { "passed" } else { "failed" },
            "value_before": plan.value,
            "value_after": sparse.value,
            "active_before": plan.active_firms().len(),
            "active_after": sparse.active_firms().len(),
            "limit": n,
            "tolerance": tol,
        }));
    } else {
        let reason = "requires concave firms";
        checks.push(skipped("flat_cone", reason));
        checks.push(skipped("profit_equivalence", reason));
        checks.push(skipped("sparsity", reason));
    }

    if !concave {
        // No supporting price is the expected outcome here: the aggregate is
        // not concave at the point.
        let imp = profit_impossibility(&s.firms, &point, &opts)?;
        passed &= imp.report.passed();
        let mut j = report_json(&imp.report);
        j["expected"] = json!("no supporting price");
        j["value"] = json!(imp.value);
        j["best_price"] = json!(imp.probes[0].price);
        j["best_price_excess"] = json!(imp.probes[0].excess);
        j["beating_direction"] = json!(imp.probes[0].direction);
        checks.push(j);
    }

    let summary = json!({
        "name": s.name,
        "firms": s.firms.iter().map(Technology::family_name).collect::<Vec<_>>(),
        "inputs": n,
        "concave": concave,
        "point": point,
        "seed": opts.seed,
        "resolution": opts.resolution,
        "brute_resolution": opts.brute_resolution,
        "trials": opts.trials,
    });
    Ok((json!({"scenario": summary, "checks": checks, "passed": passed}), passed))
}

fn sparsify_report(s: &Scenario, common: &Common, x: &[f64], engine: Engine) -> Result<Value, CliError> {
    let (resolved, k) = engine_resolution(s, common, engine)?;
    let plan = Aggregate::build(&s.firms, resolved, k)?.plan(x)?;
    let mut opts = s.options(common.seed);
    opts.resolution = k;
    let sparse = sparsify(&s.firms, x, &plan, &opts)?;
    Ok(json!({
        "engine": resolved.to_string(),
        "x": x,
        "limit": s.dim(),
        "before": plan_json(&s.firms, &plan),
        "after": plan_json(&s.firms, &sparse),
    }))
}

/// Caps rayon's worker count from `SUPCONV_THREADS` when set.
pub fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("SUPCONV_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Input(format!("SUPCONV_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("cannot configure threads: {e}")))?;
    }
    Ok(())
}
