//! Closed-form solution evaluation on Wiener grids and expansion of base
//! equations into component SDE systems.
//!
//! Ground truth is always the base-level hypercomplex formula; the planar
//! (`C_p`) projection solvers re-derive the same quantities in real
//! arithmetic and exist to cross-validate it. Stochastic (`dW`) integrals are
//! accumulated with the left-point (Ito) rule; deterministic (`ds`)
//! integrands inside the closed forms use the trapezoid rule, whose `O(dt^2)`
//! error keeps the degenerate-noise cases within the accuracy the validation
//! suite demands.

mod expand;
mod linear;
mod lv;

use std::io::{self, Write};
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{Algebra, AlgebraError, HValue};
use crate::analytic::AnalyticError;
use crate::expr::{eval, Env, EvalError, ExprAst};
use crate::paths::WienerGrid;
use crate::quad::simpson;
use crate::scalar::Scalar;

pub use expand::{expand_general_system, expand_linear_system, expand_lv_system};
pub use linear::{solve_linear_base, solve_linear_cp, CpLinearCoeffs};
pub use lv::{solve_lv_base, solve_lv_cp};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("grid supplies {found} Wiener components, the solver needs {expected}")]
    GridMismatch { expected: usize, found: usize },
    #[error("singular element at t = {t}: {detail}")]
    SingularAt { t: f64, detail: String },
    #[error("expected {expected} coefficient expressions, got {found}")]
    CoeffCount { expected: usize, found: usize },
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A hypercomplex-valued path on a uniform grid.
#[derive(Debug, Clone)]
pub struct HPath<T> {
    pub label: String,
    pub times: Vec<T>,
    pub states: Vec<HValue<T>>,
}

impl<T: Scalar> HPath<T> {
    /// Real path of the `i`-th component (0-based).
    pub fn component(&self, i: usize) -> Vec<T> {
        self.states.iter().map(|s| s.coeffs()[i]).collect()
    }

    pub fn to_real(&self) -> RealPaths<T> {
        RealPaths {
            times: self.times.clone(),
            states: self.states.iter().map(|s| s.coeffs().to_vec()).collect(),
        }
    }
}

/// A real vector-valued path: `states[k]` is the state at `times[k]`.
#[derive(Debug, Clone)]
pub struct RealPaths<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
}

impl<T: Scalar> RealPaths<T> {
    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn endpoint(&self) -> &[T] {
        self.states.last().expect("non-empty path")
    }

    /// CSV dump with columns `t, X1..Xn`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        write!(out, "t")?;
        for i in 1..=self.dim() {
            write!(out, ",X{}", i)?;
        }
        writeln!(out)?;
        for (t, row) in self.times.iter().zip(&self.states) {
            write!(out, "{}", t)?;
            for v in row {
                write!(out, ",{}", v)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Drift/diffusion entry of a component system. Evaluation failures inside
/// coefficient expressions surface as NaN, which the simulator reports as
/// `NonFinite` at the offending step.
pub type CoeffFn<T> = Box<dyn Fn(T, &[T]) -> T + Send + Sync>;

/// Component-level description of an n-dimensional real Ito system driven by
/// m Wiener processes.
pub struct SdeSystemSpec<T> {
    pub n: usize,
    pub m: usize,
    pub drift: Vec<CoeffFn<T>>,
    /// Row-major `n x m`.
    pub diffusion: Vec<Vec<CoeffFn<T>>>,
    /// Which base equation and algebra generated this system, if any.
    pub provenance: String,
}

impl<T> SdeSystemSpec<T> {
    pub fn drift_at(&self, i: usize, t: T, x: &[T]) -> T
    where
        T: Copy,
    {
        (self.drift[i])(t, x)
    }

    pub fn diffusion_at(&self, i: usize, j: usize, t: T, x: &[T]) -> T
    where
        T: Copy,
    {
        (self.diffusion[i][j])(t, x)
    }
}

/// Time-dependent coefficients of the linear base equation
/// `dZ = (f1 + f2 Z) dt + (g1 + g2 Z) dW`, componentwise expressions in `t`.
#[derive(Debug, Clone)]
pub struct LinearBaseCoeffs {
    pub f1: Vec<ExprAst>,
    pub f2: Vec<ExprAst>,
    pub g1: Vec<ExprAst>,
    pub g2: Vec<ExprAst>,
}

impl LinearBaseCoeffs {
    pub fn check_dim(&self, n: usize) -> Result<(), SolveError> {
        for part in [&self.f1, &self.f2, &self.g1, &self.g2] {
            if part.len() != n {
                return Err(SolveError::CoeffCount {
                    expected: n,
                    found: part.len(),
                });
            }
        }
        Ok(())
    }
}

/// Constant coefficients of the Lotka-Volterra base equation
/// `dZ = (b Z - a Z^2) dt + G Z dW`.
#[derive(Debug, Clone)]
pub struct LvCoeffs<T> {
    pub a: HValue<T>,
    pub b: HValue<T>,
    pub g: HValue<T>,
    pub z0: HValue<T>,
}

/// Evaluates a componentwise expression vector at time `t` as an algebra
/// element.
pub(crate) fn eval_hvalue<T: Scalar>(
    alg: &Algebra<T>,
    exprs: &[ExprAst],
    t: T,
) -> Result<HValue<T>, SolveError> {
    let env = Env::time(t);
    let mut coeffs = Vec::with_capacity(exprs.len());
    for e in exprs {
        coeffs.push(eval(e, &env)?);
    }
    Ok(alg.value(coeffs)?)
}

pub(crate) fn wiener_increment<T: Scalar>(
    alg: &Algebra<T>,
    grid: &WienerGrid<T>,
    k: usize,
) -> HValue<T> {
    let coeffs: Vec<T> = (0..grid.m()).map(|j| grid.increment(j, k)).collect();
    alg.value(coeffs).expect("grid dimension checked by caller")
}

pub(crate) fn singular_at<T: Scalar>(t: T, err: AlgebraError) -> SolveError {
    SolveError::SingularAt {
        t: t.to_f64().unwrap_or(f64::NAN),
        detail: err.to_string(),
    }
}

/// Fundamental matrix of the deterministic planar system
/// `dX1/dt = f21 X1 + p f22 X2`, `dX2/dt = f22 X1 + f21 X2`:
///
/// `Phi(t) = e^(I1) [[cos_p I2, p sin_p I2], [sin_p I2, cos_p I2]]` with
/// `I1 = int_0^t f21`, `I2 = int_0^t f22` (composite Simpson). Its
/// determinant is `exp(2 I1)` by the generalized Pythagorean identity.
pub fn fundamental_matrix_cp<T: Scalar>(
    p: T,
    f21: &ExprAst,
    f22: &ExprAst,
    t: T,
) -> Result<[[T; 2]; 2], SolveError> {
    let i1 = simpson(|s| eval(f21, &Env::time(s)), T::zero(), t, 512)?;
    let i2 = simpson(|s| eval(f22, &Env::time(s)), T::zero(), t, 512)?;
    let (c, s) = crate::analytic::cosp_sinp(p, i2);
    let scale = i1.exp();
    Ok([[scale * c, p * scale * s], [scale * s, scale * c]])
}

pub(crate) fn shared<T: Scalar>(alg: &Algebra<T>) -> Arc<Algebra<T>> {
    Arc::new(alg.clone())
}
