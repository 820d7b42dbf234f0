//! Numerical toolkit for the phenomenologically symmetric geometry of two
//! sets of rank (3,2).
//!
//! A metric function `f(x, xi, eta)` pairs points of a one-dimensional and a
//! two-dimensional manifold. When the geometry is phenomenologically
//! symmetric, the six values on any three points of the first manifold and
//! two of the second satisfy a single determinant law, the 7x6 functional
//! matrix of first partials never reaches rank 6, and the metric is the
//! product form `x*xi + eta` up to coordinate changes and a scaling. This
//! crate verifies all of that numerically for arbitrary metric expressions,
//! and inverts the construction: from a table of measured values it recovers
//! hidden coordinates up to the two-parameter motion group.
//!
//! Start with the runnable examples (`cargo run --example ...`) or the
//! `biset` binary, which exposes every capability as a subcommand.

pub mod cli;
pub mod diff;
pub mod expr;
pub mod geometry;
pub mod linalg;
pub mod motions;
pub mod pdecheck;
pub mod recovery;
pub mod sampling;
pub mod scalar;
pub mod symmetry;

pub use diff::{evaluate_with_partials, finite_difference_partials, Jet};
pub use expr::{eval_expr, parse_metric_expr, MetricExpr};
pub use geometry::{
    canonical_metric, essentiality_check, general_form_metric, Cortege32, GeneralForm,
    MetricFunction, OneVarFn, TwoVarFn,
};
pub use motions::Motion;
pub use recovery::{
    detect_ps, gauge_distance, generate_table, recover_coordinates, Coordinates, MeasurementTable,
};
pub use scalar::{DomainError, Scalar};
pub use symmetry::{
    build_functional_matrix, canonical_matrix16, minor5_canonical, numeric_rank, ps_residual,
    ps_residual_normalized, relations6_residual, FunctionalMatrix,
};
