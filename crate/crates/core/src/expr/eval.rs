//! Plain (IEEE) evaluation of expression trees.

use thiserror::Error;

use super::ast::{BinOp, ExprAst, ExprKind, Func, Span, VarId};
use crate::scalar::Scalar;

/// Variable assignment: the time value and the state components `x1..xn`.
#[derive(Debug, Clone)]
pub struct Env<T> {
    pub t: T,
    pub x: Vec<T>,
}

impl<T: Scalar> Env<T> {
    pub fn new(t: T, x: Vec<T>) -> Self {
        Env { t, x }
    }

    /// Time-only environment (coefficient functions of `t`).
    pub fn time(t: T) -> Self {
        Env { t, x: Vec::new() }
    }

    pub fn lookup(&self, var: VarId) -> Option<T> {
        match var {
            VarId::T => Some(self.t),
            VarId::X(i) => (i as usize)
                .checked_sub(1)
                .and_then(|idx| self.x.get(idx))
                .copied(),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalErrorKind {
    #[error("division by zero")]
    DivByZero,
    #[error("ln of a non-positive value ({0})")]
    LnNonPositive(f64),
    #[error("square root of a negative value ({0})")]
    SqrtNegative(f64),
    #[error("non-integer power of a non-positive base ({base}^{exponent})")]
    PowDomain { base: f64, exponent: f64 },
    #[error("unbound variable {0}")]
    UnboundVar(String),
}

#[derive(Debug, Clone, Error, PartialEq)]
#[error("{kind} at bytes {}..{}", span.start, span.end)]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub span: Span,
}

fn err<T>(kind: EvalErrorKind, span: Span) -> Result<T, EvalError> {
    Err(EvalError { kind, span })
}

/// Evaluates the tree at the given assignment. All variables must be bound.
pub fn eval<T: Scalar>(ast: &ExprAst, env: &Env<T>) -> Result<T, EvalError> {
    match &ast.kind {
        ExprKind::Num(v) => Ok(T::c(*v)),
        ExprKind::Var(v) => env
            .lookup(*v)
            .ok_or(())
            .or_else(|_| err(EvalErrorKind::UnboundVar(v.to_string()), ast.span)),
        ExprKind::Neg(a) => Ok(-eval(a, env)?),
        ExprKind::Bin(op, a, b) => {
            let x = eval(a, env)?;
            let y = eval(b, env)?;
            match op {
                BinOp::Add => Ok(x + y),
                BinOp::Sub => Ok(x - y),
                BinOp::Mul => Ok(x * y),
                BinOp::Div => {
                    if y == T::zero() {
                        return err(EvalErrorKind::DivByZero, ast.span);
                    }
                    Ok(x / y)
                }
                BinOp::Pow => pow_value(x, y, ast.span),
            }
        }
        ExprKind::Call(func, a) => {
            let x = eval(a, env)?;
            match func {
                Func::Exp => Ok(x.exp()),
                Func::Ln => {
                    if x <= T::zero() {
                        return err(
                            EvalErrorKind::LnNonPositive(x.to_f64().unwrap_or(f64::NAN)),
                            ast.span,
                        );
                    }
                    Ok(x.ln())
                }
                Func::Sin => Ok(x.sin()),
                Func::Cos => Ok(x.cos()),
                Func::Sqrt => {
                    if x < T::zero() {
                        return err(
                            EvalErrorKind::SqrtNegative(x.to_f64().unwrap_or(f64::NAN)),
                            ast.span,
                        );
                    }
                    Ok(x.sqrt())
                }
            }
        }
    }
}

/// Integer exponents use repeated multiplication (any base); non-integer
/// exponents require a positive base.
pub(crate) fn pow_value<T: Scalar>(base: T, exponent: T, span: Span) -> Result<T, EvalError> {
    if let Some(k) = as_small_int(exponent) {
        if k < 0 && base == T::zero() {
            return err(EvalErrorKind::DivByZero, span);
        }
        return Ok(base.powi(k));
    }
    if base <= T::zero() {
        return err(
            EvalErrorKind::PowDomain {
                base: base.to_f64().unwrap_or(f64::NAN),
                exponent: exponent.to_f64().unwrap_or(f64::NAN),
            },
            span,
        );
    }
    Ok(base.powf(exponent))
}

pub(crate) fn as_small_int<T: Scalar>(v: T) -> Option<i32> {
    if v.fract() != T::zero() {
        return None;
    }
    let f = v.to_f64()?;
    if f.abs() > i32::MAX as f64 {
        return None;
    }
    Some(f as i32)
}
