//! Closed-form solutions of systems of Ito stochastic differential equations
//! over commutative hypercomplex algebras.
//!
//! A real n-dimensional SDE system whose coefficients are the component
//! functions of an analytic map on a commutative hypercomplex algebra is the
//! expansion of a single scalar SDE over that algebra. When the scalar
//! equation is solvable by quadratures (linear, Lotka-Volterra), the system
//! is solved by evaluating the scalar solution with algebra arithmetic and
//! projecting along the units. This crate provides:
//!
//! - [`algebra`]: structure-constant algebras, axiom verification, products;
//! - [`analytic`]: hypercomplex exp/ln/pow/cos/sin and the Scheffers
//!   (generalized Cauchy-Riemann) analyticity checker;
//! - [`expr`]: the coefficient expression DSL with plain and truncated-Taylor
//!   evaluation;
//! - [`paths`]: reproducible Wiener path sampling and grid integrals;
//! - [`solvers`]: the closed forms and base-equation expansions;
//! - [`reducibility`]: Gard's reducibility criterion and its planar
//!   (C_p-valued) counterpart;
//! - [`sim`]: Euler-Maruyama integration and strong-convergence studies.
//!
//! Everything is generic over the floating-point type through
//! [`scalar::Scalar`]; the `*F64` aliases below are the working defaults.

pub mod algebra;
pub mod analytic;
pub mod expr;
mod linalg;
pub mod paths;
mod quad;
pub mod reducibility;
pub mod scalar;
pub mod sim;
pub mod solvers;

pub use algebra::{Algebra, AlgebraError, HValue, VerificationReport};
pub use expr::{parse, Env, ExprAst};
pub use scalar::Scalar;

/// Double-precision aliases for the main types.
pub type AlgebraF64 = algebra::Algebra<f64>;
pub type HValueF64 = algebra::HValue<f64>;
pub type WienerGridF64 = paths::WienerGrid<f64>;
pub type HPathF64 = solvers::HPath<f64>;
pub type SdeSystemSpecF64 = solvers::SdeSystemSpec<f64>;
pub type ConvergenceStudyF64 = sim::ConvergenceStudy<f64>;

/// Single-precision aliases.
pub type AlgebraF32 = algebra::Algebra<f32>;
pub type HValueF32 = algebra::HValue<f32>;
