//! Convex-geometry kernels: linear programming, two-input upper hulls,
//! Carathéodory support reduction and supporting prices.

pub mod caratheodory;
pub mod hull;
pub mod lp;
pub mod support;

pub use caratheodory::caratheodory_reduce;
pub use hull::{upper_hull_2d, HullVertex, LabeledPoint};
pub use lp::{solve_lp, Bounds, LinearProgram, LpSolution, LpStatus, Relation, Row, Sense};
pub use support::{outer_price, sample_envelope, solve_hull_lp, support_price, HullSolution, SampleSet, SampledHull, SupportPrice};
