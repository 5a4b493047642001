//! The aggregate `F = F_1 ⊕ … ⊕ F_J` and its optimal allocations.
//!
//! Four engines cover different regimes:
//!
//! | engine | firms | inputs | exact? |
//! |---|---|---|---|
//! | [`brute_force`] | any | any (small) | grid-accurate |
//! | [`exact_envelope_2d`] | concave | 2 | exact for polyhedral firms |
//! | [`envelope_pairwise_2d`] | 2 pwl, any shape | 2 | exact |
//! | [`sandwich`] | concave | any | two-sided bounds |

pub mod brute;
pub mod envelope;
pub mod pairwise;
pub mod plan;
pub mod sandwich;

pub use brute::{brute_force, brute_force_capped, BRUTE_CAP};
pub use envelope::{exact_envelope_2d, Bridge, Envelope2d};
pub use pairwise::{envelope_pairwise_2d, PairwiseEnvelope, Segment, SegmentKind};
pub use plan::{AllocationPlan, ACTIVE_TOL};
pub use sandwich::{hull_plan, sandwich, SandwichResult};

use crate::convexcore::support::common_dim;
use crate::error::{Error, Result};
use crate::technology::{Family, Technology};
use serde::Serialize;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Auto,
    Brute,
    Exact2d,
    Pairwise,
    Sandwich,
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Engine::Auto),
            "brute" => Ok(Engine::Brute),
            "exact2d" => Ok(Engine::Exact2d),
            "pairwise" => Ok(Engine::Pairwise),
            "sandwich" => Ok(Engine::Sandwich),
            other => Err(Error::Malformed(format!("unknown engine `{other}`"))),
        }
    }
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Engine::Auto => "auto",
            Engine::Brute => "brute",
            Engine::Exact2d => "exact2d",
            Engine::Pairwise => "pairwise",
            Engine::Sandwich => "sandwich",
        })
    }
}

fn all_pwl(techs: &[Technology]) -> bool {
    techs.iter().all(|t| matches!(t.family(), Family::PwlSimplex { .. }))
}

/// The engine `Auto` resolves to: the hull envelope for concave two-input
/// firms, the pairwise envelope for two non-concave pwl firms, brute force
/// otherwise.
pub fn resolve_engine(techs: &[Technology], engine: Engine) -> Result<Engine> {
    let n = common_dim(techs)?;
    let concave = techs.iter().all(Technology::is_concave);
    Ok(match engine {
        Engine::Auto if n == 2 && concave => Engine::Exact2d,
        Engine::Auto if n == 2 && techs.len() == 2 && all_pwl(techs) => Engine::Pairwise,
        Engine::Auto => Engine::Brute,
        e => e,
    })
}

/// A prepared evaluator for one engine: envelopes are built once, the other
/// engines solve per query.
#[derive(Debug, Clone)]
pub enum Aggregate {
    Brute { techs: Vec<Technology>, resolution: usize },
    Exact2d { techs: Vec<Technology>, envelope: Envelope2d },
    Pairwise { techs: Vec<Technology>, envelope: PairwiseEnvelope },
    Sandwich { techs: Vec<Technology>, resolution: usize },
}

impl Aggregate {
    pub fn build(techs: &[Technology], engine: Engine, k: usize) -> Result<Self> {
        let techs_v = techs.to_vec();
        Ok(match resolve_engine(techs, engine)? {
            Engine::Brute => Aggregate::Brute { techs: techs_v, resolution: k },
            Engine::Exact2d => Aggregate::Exact2d { envelope: exact_envelope_2d(techs, k)?, techs: techs_v },
            Engine::Pairwise => Aggregate::Pairwise { envelope: envelope_pairwise_2d(techs)?, techs: techs_v },
            Engine::Sandwich => {
                if let Some(firm) = techs.iter().position(|t| !t.is_concave()) {
                    return Err(Error::NonConcave { firm });
                }
                Aggregate::Sandwich { techs: techs_v, resolution: k }
            }
            Engine::Auto => unreachable!("resolve_engine never returns Auto"),
        })
    }

    pub fn engine(&self) -> Engine {
        match self {
            Aggregate::Brute { .. } => Engine::Brute,
            Aggregate::Exact2d { .. } => Engine::Exact2d,
            Aggregate::Pairwise { .. } => Engine::Pairwise,
            Aggregate::Sandwich { .. } => Engine::Sandwich,
        }
    }

    pub fn plan(&self, x: &[f64]) -> Result<AllocationPlan> {
        let plan = match self {
            Aggregate::Brute { techs, resolution } => brute_force(techs, x, *resolution)?,
            Aggregate::Exact2d { techs, envelope } => envelope.plan(techs, x)?,
            Aggregate::Pairwise { techs, envelope } => envelope.plan(techs, x)?,
            Aggregate::Sandwich { techs, resolution } => hull_plan(techs, x, *resolution)?,
        };
        let techs = match self {
            Aggregate::Brute { techs, .. }
            | Aggregate::Exact2d { techs, .. }
            | Aggregate::Pairwise { techs, .. }
            | Aggregate::Sandwich { techs, .. } => techs,
        };
        plan.check(techs)?;
        Ok(plan)
    }

    /// `F(x)`. The envelope engines interpolate their polyline; the others
    /// return the value of their plan. The sandwich engine serves its lower
    /// plan here, which needs no interior input.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        match self {
            Aggregate::Exact2d { envelope, .. } => envelope.evaluate(x),
            Aggregate::Pairwise { envelope, .. } => envelope.evaluate(x),
            _ => Ok(self.plan(x)?.value),
        }
    }
}

/// Optimal plan for `x` with the chosen engine at resolution `k`.
pub fn aggregate(techs: &[Technology], x: &[f64], engine: Engine, k: usize) -> Result<AllocationPlan> {
    Aggregate::build(techs, engine, k)?.plan(x)
}
