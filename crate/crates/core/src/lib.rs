//! Explicit solvable Lie groups `R^n ⋊ R` whose compact quotients have a
//! small curvature-diameter product yet are not finitely covered by a
//! nilmanifold.
//!
//! The crate builds the integer holonomy matrix exactly, computes its
//! spectrum two independent ways, assembles the Lie algebra generator,
//! evaluates sectional curvature of the left-invariant metric and bounds the
//! diameter of the quotient. [`certify::certify_dimension`] strings all of
//! this together into a per-dimension [`certify::Certificate`].

#![allow(
    clippy::needless_range_loop,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::type_complexity
)]

pub mod certify;
pub mod curvature;
pub mod error;
pub mod exactalg;
pub mod quotient;
pub mod solvgroup;
pub mod spectra;

pub use error::{Error, Result};
