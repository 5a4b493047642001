//! Aggregation of constant-returns-to-scale production technologies.
//!
//! The aggregate of firms `F_1, …, F_J` is their sup-convolution
//! `F(x) = max { Σ F_j(x_j) : Σ x_j = x, x_j ≥ 0 }`. Every technology here is
//! homogeneous of degree one, so the aggregate is too, and all the work happens
//! on the unit simplex.
//!
//! ```
//! use supconv::{aggregate, Engine, Technology};
//!
//! let firms = vec![
//!     Technology::leontief(vec![2.0, 0.5]).unwrap(),
//!     Technology::leontief(vec![1.0, 1.0]).unwrap(),
//!     Technology::leontief(vec![0.5, 2.0]).unwrap(),
//! ];
//! let plan = aggregate(&firms, &[0.35, 0.65], Engine::Auto, 100).unwrap();
//! assert!((plan.value - 0.45).abs() < 1e-12);
//! ```

pub mod aggregator;
pub mod certify;
pub mod convexcore;
pub mod error;
pub mod simplexgeom;
pub mod technology;

pub use aggregator::{aggregate, AllocationPlan, Engine};
pub use error::{Error, Result};
pub use simplexgeom::SimplexPoint;
pub use technology::{parse_technology, Family, Technology};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/technologies.md")]
    mod technologies {}
    #[doc = include_str!("../../../book/src/envelopes.md")]
    mod envelopes {}
    #[doc = include_str!("../../../book/src/prices.md")]
    mod prices {}
    #[doc = include_str!("../../../book/src/certificates.md")]
    mod certificates {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
