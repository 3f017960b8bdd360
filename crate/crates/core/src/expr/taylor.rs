//! Truncated Taylor (jet) arithmetic for exact-to-rounding derivatives.
//!
//! A `TaylorVal` is a multivariate polynomial truncated at a fixed total
//! degree, stored in Taylor-coefficient form: the coefficient of the monomial
//! with exponents `e` is `(prod_i e_i!)^-1` times the corresponding partial
//! derivative. Addition and multiplication are polynomial operations in the
//! truncated ring; elementary functions are composed through
//! `f(u0 + du) = sum_k f^(k)(u0)/k! du^k`, which terminates because `du` is
//! nilpotent. This is the hyper-dual approach: derivatives come out exact up
//! to rounding, with no finite-difference step error.
//!
//! Orders up to 3 are supported; order 2 backs [`eval_taylor2`], order 3 is
//! used where third derivatives are required.

use std::collections::HashMap;

use super::ast::{BinOp, ExprAst, ExprKind, Func, Span, VarId};
use super::eval::{as_small_int, Env, EvalError, EvalErrorKind};
use crate::scalar::Scalar;

/// Monomial tables for a fixed (number of seeded variables, order) pair.
pub struct TaylorCtx {
    nvars: usize,
    order: usize,
    monomials: Vec<Vec<u8>>,
    /// `prod[i * len + j]` is the index of `mono_i * mono_j`, when it stays
    /// within the truncation order.
    prod: Vec<Option<u32>>,
    /// `dec[k * nvars + v]`: index of the monomial with `e_v` lowered by one.
    dec: Vec<Option<u32>>,
    /// Index of the linear monomial of each variable.
    var_linear: Vec<usize>,
}

/// A jet: truncated Taylor expansion of a quantity in the seeded variables.
#[derive(Debug, Clone)]
pub struct TaylorVal<T> {
    c: Vec<T>,
}

impl TaylorCtx {
    pub fn new(nvars: usize, order: usize) -> Self {
        assert!(nvars >= 1, "need at least one seeded variable");
        assert!(order >= 1 && order <= 3, "supported orders are 1..=3");
        let mut monomials: Vec<Vec<u8>> = Vec::new();
        for degree in 0..=order {
            enumerate_monomials(nvars, degree, &mut Vec::new(), &mut monomials);
        }
        let index: HashMap<Vec<u8>, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let len = monomials.len();
        let mut prod = vec![None; len * len];
        for i in 0..len {
            for j in 0..len {
                let total: usize = monomials[i]
                    .iter()
                    .zip(&monomials[j])
                    .map(|(&a, &b)| (a + b) as usize)
                    .sum();
                if total <= order {
                    let sum: Vec<u8> = monomials[i]
                        .iter()
                        .zip(&monomials[j])
                        .map(|(&a, &b)| a + b)
                        .collect();
                    prod[i * len + j] = Some(index[&sum] as u32);
                }
            }
        }
        let mut dec = vec![None; len * nvars];
        for k in 0..len {
            for v in 0..nvars {
                if monomials[k][v] >= 1 {
                    let mut lowered = monomials[k].clone();
                    lowered[v] -= 1;
                    dec[k * nvars + v] = Some(index[&lowered] as u32);
                }
            }
        }
        let var_linear = (0..nvars)
            .map(|v| {
                let mut e = vec![0u8; nvars];
                e[v] = 1;
                index[&e]
            })
            .collect();
        TaylorCtx {
            nvars,
            order,
            monomials,
            prod,
            dec,
            var_linear,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn constant<T: Scalar>(&self, v: T) -> TaylorVal<T> {
        let mut c = vec![T::zero(); self.len()];
        c[0] = v;
        TaylorVal { c }
    }

    /// Seeds variable `slot` with value `v`: the jet `v + x_slot`.
    pub fn seeded<T: Scalar>(&self, slot: usize, v: T) -> TaylorVal<T> {
        let mut c = vec![T::zero(); self.len()];
        c[0] = v;
        c[self.var_linear[slot]] = T::one();
        TaylorVal { c }
    }

    pub fn add<T: Scalar>(&self, a: &TaylorVal<T>, b: &TaylorVal<T>) -> TaylorVal<T> {
        TaylorVal {
            c: a.c.iter().zip(&b.c).map(|(&x, &y)| x + y).collect(),
        }
    }

    pub fn sub<T: Scalar>(&self, a: &TaylorVal<T>, b: &TaylorVal<T>) -> TaylorVal<T> {
        TaylorVal {
            c: a.c.iter().zip(&b.c).map(|(&x, &y)| x - y).collect(),
        }
    }

    pub fn neg<T: Scalar>(&self, a: &TaylorVal<T>) -> TaylorVal<T> {
        TaylorVal {
            c: a.c.iter().map(|&x| -x).collect(),
        }
    }

    pub fn scale<T: Scalar>(&self, a: &TaylorVal<T>, s: T) -> TaylorVal<T> {
        TaylorVal {
            c: a.c.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn mul<T: Scalar>(&self, a: &TaylorVal<T>, b: &TaylorVal<T>) -> TaylorVal<T> {
        let len = self.len();
        let mut c = vec![T::zero(); len];
        for i in 0..len {
            let ai = a.c[i];
            if ai == T::zero() {
                continue;
            }
            for j in 0..len {
                if let Some(k) = self.prod[i * len + j] {
                    let bj = b.c[j];
                    if bj != T::zero() {
                        c[k as usize] = c[k as usize] + ai * bj;
                    }
                }
            }
        }
        TaylorVal { c }
    }

    /// `f(u)` for `f` given by its scaled derivatives at the jet's value:
    /// `coeffs[k] = f^(k)(u0) / k!`. Evaluated by Horner on the nilpotent
    /// part of `u`.
    pub fn compose<T: Scalar>(&self, u: &TaylorVal<T>, coeffs: &[T]) -> TaylorVal<T> {
        debug_assert_eq!(coeffs.len(), self.order + 1);
        let mut du = u.clone();
        du.c[0] = T::zero();
        let mut acc = self.constant(coeffs[self.order]);
        for k in (0..self.order).rev() {
            acc = self.mul(&acc, &du);
            acc.c[0] = acc.c[0] + coeffs[k];
        }
        acc
    }

    /// Reciprocal `1/u`, requiring a nonzero value part.
    pub fn recip<T: Scalar>(&self, u: &TaylorVal<T>, span: Span) -> Result<TaylorVal<T>, EvalError> {
        let u0 = u.c[0];
        if u0 == T::zero() {
            return Err(EvalError {
                kind: EvalErrorKind::DivByZero,
                span,
            });
        }
        let inv = u0.recip();
        let mut coeffs = Vec::with_capacity(self.order + 1);
        let mut cur = inv;
        coeffs.push(cur);
        for _ in 0..self.order {
            cur = -cur * inv;
            coeffs.push(cur);
        }
        Ok(self.compose(u, &coeffs))
    }

    pub fn powi<T: Scalar>(
        &self,
        u: &TaylorVal<T>,
        k: i32,
        span: Span,
    ) -> Result<TaylorVal<T>, EvalError> {
        if k < 0 {
            let pos = self.powi(u, -k, span)?;
            return self.recip(&pos, span);
        }
        let mut acc = self.constant(T::one());
        let mut base = u.clone();
        let mut e = k as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        Ok(acc)
    }

    /// Partial-derivative operator with respect to seeded variable `slot`.
    /// Coefficients of total degree `order` in the result are truncated away;
    /// callers must budget one order per derivative they take.
    pub fn derivative<T: Scalar>(&self, a: &TaylorVal<T>, slot: usize) -> TaylorVal<T> {
        let len = self.len();
        let mut c = vec![T::zero(); len];
        for k in 0..len {
            if let Some(tgt) = self.dec[k * self.nvars + slot] {
                let e = T::of_usize(self.monomials[k][slot] as usize);
                c[tgt as usize] = c[tgt as usize] + a.c[k] * e;
            }
        }
        TaylorVal { c }
    }

    /// Taylor coefficient of the given exponent vector.
    pub fn coeff<T: Scalar>(&self, a: &TaylorVal<T>, exps: &[u8]) -> T {
        debug_assert_eq!(exps.len(), self.nvars);
        for (k, m) in self.monomials.iter().enumerate() {
            if m == exps {
                return a.c[k];
            }
        }
        T::zero()
    }

    /// Partial derivative value: Taylor coefficient times the factorials.
    pub fn partial<T: Scalar>(&self, a: &TaylorVal<T>, exps: &[u8]) -> T {
        let mut fact = T::one();
        for &e in exps {
            for m in 2..=e as usize {
                fact = fact * T::of_usize(m);
            }
        }
        self.coeff(a, exps) * fact
    }

    /// Evaluates `ast` as a jet: variables listed in `seeds` are seeded as
    /// jet variables (in slot order), everything else is read from `env`.
    pub fn eval<T: Scalar>(
        &self,
        ast: &ExprAst,
        env: &Env<T>,
        seeds: &[VarId],
    ) -> Result<TaylorVal<T>, EvalError> {
        debug_assert_eq!(seeds.len(), self.nvars);
        match &ast.kind {
            ExprKind::Num(v) => Ok(self.constant(T::c(*v))),
            ExprKind::Var(v) => {
                let value = env.lookup(*v).ok_or(EvalError {
                    kind: EvalErrorKind::UnboundVar(v.to_string()),
                    span: ast.span,
                })?;
                match seeds.iter().position(|s| s == v) {
                    Some(slot) => Ok(self.seeded(slot, value)),
                    None => Ok(self.constant(value)),
                }
            }
            ExprKind::Neg(a) => Ok(self.neg(&self.eval(a, env, seeds)?)),
            ExprKind::Bin(op, a, b) => {
                let x = self.eval(a, env, seeds)?;
                let y = self.eval(b, env, seeds)?;
                match op {
                    BinOp::Add => Ok(self.add(&x, &y)),
                    BinOp::Sub => Ok(self.sub(&x, &y)),
                    BinOp::Mul => Ok(self.mul(&x, &y)),
                    BinOp::Div => {
                        let inv = self.recip(&y, ast.span)?;
                        Ok(self.mul(&x, &inv))
                    }
                    BinOp::Pow => self.pow(&x, &y, ast.span),
                }
            }
            ExprKind::Call(func, a) => {
                let u = self.eval(a, env, seeds)?;
                let u0 = u.c[0];
                match func {
                    Func::Exp => {
                        let e = u0.exp();
                        let coeffs = self.scaled_derivs(|k| e / factorial::<T>(k));
                        Ok(self.compose(&u, &coeffs))
                    }
                    Func::Ln => {
                        if u0 <= T::zero() {
                            return Err(EvalError {
                                kind: EvalErrorKind::LnNonPositive(
                                    u0.to_f64().unwrap_or(f64::NAN),
                                ),
                                span: ast.span,
                            });
                        }
                        // ln(u0 + h) = ln u0 + sum_k (-1)^(k+1) h^k / (k u0^k)
                        let inv = u0.recip();
                        let mut coeffs = vec![u0.ln()];
                        let mut p = T::one();
                        for k in 1..=self.order {
                            p = p * inv;
                            let sign = if k % 2 == 1 { T::one() } else { -T::one() };
                            coeffs.push(sign * p / T::of_usize(k));
                        }
                        Ok(self.compose(&u, &coeffs))
                    }
                    Func::Sin | Func::Cos => {
                        let (s, c) = (u0.sin(), u0.cos());
                        // Derivative cycle of sin: sin, cos, -sin, -cos.
                        let cycle = if *func == Func::Sin {
                            [s, c, -s, -c]
                        } else {
                            [c, -s, -c, s]
                        };
                        let coeffs =
                            self.scaled_derivs(|k| cycle[k % 4] / factorial::<T>(k));
                        Ok(self.compose(&u, &coeffs))
                    }
                    Func::Sqrt => {
                        if u0 <= T::zero() {
                            return Err(EvalError {
                                kind: EvalErrorKind::SqrtNegative(
                                    u0.to_f64().unwrap_or(f64::NAN),
                                ),
                                span: ast.span,
                            });
                        }
                        self.pow_const(&u, T::c(0.5), ast.span)
                    }
                }
            }
        }
    }

    fn scaled_derivs<T: Scalar>(&self, f: impl Fn(usize) -> T) -> Vec<T> {
        (0..=self.order).map(f).collect()
    }

    fn pow<T: Scalar>(
        &self,
        base: &TaylorVal<T>,
        exponent: &TaylorVal<T>,
        span: Span,
    ) -> Result<TaylorVal<T>, EvalError> {
        let exp_is_const = exponent.c[1..].iter().all(|&c| c == T::zero());
        if exp_is_const {
            let m = exponent.c[0];
            if let Some(k) = as_small_int(m) {
                return self.powi(base, k, span);
            }
            if base.c[0] <= T::zero() {
                return Err(EvalError {
                    kind: EvalErrorKind::PowDomain {
                        base: base.c[0].to_f64().unwrap_or(f64::NAN),
                        exponent: m.to_f64().unwrap_or(f64::NAN),
                    },
                    span,
                });
            }
            return self.pow_const(base, m, span);
        }
        // General u^v = exp(v ln u), positive base required.
        if base.c[0] <= T::zero() {
            return Err(EvalError {
                kind: EvalErrorKind::PowDomain {
                    base: base.c[0].to_f64().unwrap_or(f64::NAN),
                    exponent: exponent.c[0].to_f64().unwrap_or(f64::NAN),
                },
                span,
            });
        }
        let u0 = base.c[0];
        let inv = u0.recip();
        let mut ln_coeffs = vec![u0.ln()];
        let mut p = T::one();
        for k in 1..=self.order {
            p = p * inv;
            let sign = if k % 2 == 1 { T::one() } else { -T::one() };
            ln_coeffs.push(sign * p / T::of_usize(k));
        }
        let ln_u = self.compose(base, &ln_coeffs);
        let prod = self.mul(exponent, &ln_u);
        let e = prod.c[0].exp();
        let exp_coeffs = self.scaled_derivs(|k| e / factorial::<T>(k));
        Ok(self.compose(&prod, &exp_coeffs))
    }

    /// `u^m` for constant real `m` with a positive base: binomial series.
    fn pow_const<T: Scalar>(
        &self,
        u: &TaylorVal<T>,
        m: T,
        _span: Span,
    ) -> Result<TaylorVal<T>, EvalError> {
        let u0 = u.c[0];
        let mut coeffs = Vec::with_capacity(self.order + 1);
        // coeffs[k] = binom(m, k) u0^(m-k)
        let mut binom = T::one();
        for k in 0..=self.order {
            if k > 0 {
                binom = binom * (m - T::of_usize(k - 1)) / T::of_usize(k);
            }
            coeffs.push(binom * u0.powf(m - T::of_usize(k)));
        }
        Ok(self.compose(u, &coeffs))
    }
}

fn factorial<T: Scalar>(k: usize) -> T {
    let mut f = T::one();
    for m in 2..=k {
        f = f * T::of_usize(m);
    }
    f
}

fn enumerate_monomials(nvars: usize, degree: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if prefix.len() == nvars - 1 {
        let used: usize = prefix.iter().map(|&e| e as usize).sum();
        if used <= degree {
            let mut m = prefix.clone();
            m.push((degree - used) as u8);
            out.push(m);
        }
        return;
    }
    let used: usize = prefix.iter().map(|&e| e as usize).sum();
    for e in 0..=(degree - used) {
        prefix.push(e as u8);
        enumerate_monomials(nvars, degree, prefix, out);
        prefix.pop();
    }
}

impl<T: Scalar> TaylorVal<T> {
    pub fn value(&self) -> T {
        self.c[0]
    }
}

/// Value, gradient and Hessian of an expression over a variable subset.
/// The Hessian is symmetric by construction (mixed partials are computed
/// once and mirrored).
#[derive(Debug, Clone)]
pub struct Taylor2<T> {
    pub value: T,
    pub grad: Vec<T>,
    pub hess: Vec<Vec<T>>,
}

/// Evaluates value, first and second partial derivatives with respect to
/// `vars` at `env`, via order-2 jet arithmetic.
pub fn eval_taylor2<T: Scalar>(
    ast: &ExprAst,
    env: &Env<T>,
    vars: &[VarId],
) -> Result<Taylor2<T>, EvalError> {
    let ctx = TaylorCtx::new(vars.len(), 2);
    let val = ctx.eval(ast, env, vars)?;
    let n = vars.len();
    let mut grad = vec![T::zero(); n];
    let mut hess = vec![vec![T::zero(); n]; n];
    for v in 0..n {
        let mut e = vec![0u8; n];
        e[v] = 1;
        grad[v] = ctx.partial(&val, &e);
        for w in v..n {
            let mut e2 = vec![0u8; n];
            e2[v] += 1;
            e2[w] += 1;
            let p = ctx.partial(&val, &e2);
            hess[v][w] = p;
            hess[w][v] = p;
        }
    }
    Ok(Taylor2 {
        value: val.value(),
        grad,
        hess,
    })
}
