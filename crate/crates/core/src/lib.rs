//! Exact moments and Monte Carlo simulation of typical and weighted typical
//! faces of random great-hypersphere tessellations of the sphere.
//!
//! * [`exactnum`]: exact arithmetic in Q[sqrt(pi), 1/sqrt(pi)] and constants.
//! * [`combinat`]: cell counts and the coefficient families `A[m, l]`, `B{m, l}`.
//! * [`moments`]: closed-form expectations and identity checks.
//! * [`geom`]: arrangements, cone tests and projections in floating point.
//! * [`simulate`]: face samplers and Monte Carlo estimators.
//! * [`report`]: reference tables, figure data and golden comparison.

pub mod error;
pub mod combinat;
pub mod exactnum;
pub mod geom;
pub mod moments;
pub mod report;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
pub use exactnum::SqrtPiPoly;
pub use num_bigint::BigInt;
pub use num_rational::BigRational;
