//! Numerical laboratory for the two-set convex feasibility problem:
//! alternating projections, perturbed alternating projections under
//! Attouch–Wets convergent set sequences, regularity moduli and stability
//! experiments.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod metrics;
pub mod perturbations;
pub mod point;
pub mod regularity;
pub mod sampling;
pub mod scenarios;
pub mod sets;
pub mod verify;

pub use error::{Error, Result};
pub use point::{cosine, Point};
pub use sets::{ConvexSet, SetDescription};
