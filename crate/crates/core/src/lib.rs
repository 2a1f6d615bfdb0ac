//! Uhlmann curvature and multiparameter estimation geometry for
//! parameterized families of density matrices.
//!
//! The pipeline for one point in parameter space:
//!
//! 1. [`model::ModelDefinition::evaluate`] produces `rho` and `d rho`.
//! 2. [`geometry`] diagonalizes `rho`, solves `d rho = G rho + rho G` for the
//!    Hermitian `G_mu` (half the symmetric logarithmic derivatives) and builds
//!    the Bures metric `g` and the quantum Fisher information `K = 4 g`.
//! 3. [`curvature`] evaluates the scalar curvature
//!    `C = -1/4 tr(F_{mu nu} F^{mu nu})` of the Uhlmann connection from the
//!    spectrum and the `G_mu` alone. Two finite-difference routes (through the
//!    dual curvature `dG - G^G` and through the connection form itself) exist
//!    to cross-check it.
//! 4. [`estimation`] turns the same quantities into statements about
//!    parameter estimation: the partial commutativity condition, the
//!    incompatibility factor and the two-parameter precision tradeoff.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curvature;
pub mod error;
pub mod estimation;
pub mod expr;
pub mod geometry;
pub mod linalg;
pub mod model;

pub use curvature::{
    connection_form, curvature_action, curvature_at, curvature_via_dual_contraction,
    dual_contraction_curvature, dual_curvature, scalar_curvature, scalar_curvature_pure, AxisRange,
    ConnectionFrame, CurvatureReport, DualCurvature, FdOptions, Measure, Method,
};
pub use error::{Error, ModelError, Result, ValidationKind};
pub use estimation::{
    incompatibility_gamma, pcc_check, tradeoff_boundary_curve, tradeoff_feasible, BoundaryCurve,
    PccResult, TradeoffQuery, Verdict,
};
pub use expr::{parse, DualComplex, ExprError, Expression};
pub use geometry::{
    analyze, bures_metric, raise_indices, solve_g, spectral_decompose, GeometryPoint, MetricData,
    PointAnalysis, Spectrum,
};
pub use linalg::{CMatrix, RMatrix};
pub use model::{builtin, load_model, ModelDefinition, ModelPoint};
pub use num_complex::Complex64;
