//! Hypercomplex elementary functions and the Scheffers analyticity checker.
//!
//! Exponentials split along the algebra: on `C_p`,
//! `e^(x+iy) = e^x (cos_p y + i sin_p y)` where `cos_p`/`sin_p` are the
//! even/odd parts of the exponential series with `i^2 = p`; on `A3_4`,
//! `e^(t+xi+yj) = e^t [1 + x i + (x^2/2 + y) j]`. For any other algebra the
//! truncated power series of `exp` is summed directly (nilpotent parts
//! terminate exactly). Closed forms are dispatched by structural inspection
//! of the table, so user-supplied tables identical to a built-in get the
//! closed form too; the series fallback stays available for cross-checking.
//!
//! Analyticity of a component tuple `f_1..f_n` is decided by the generalized
//! Cauchy-Riemann system
//! `df_i/dx_k = sum_{j,l} eps_l gamma_jki df_j/dx_l`,
//! obtained by substituting `f'_j = sum_l eps_l df_j/dx_l` into
//! `df_i/dx_k = sum_j gamma_jki f'_j`.

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{Algebra, AlgebraError, HValue};
use crate::expr::{Env, EvalError, ExprAst, TaylorCtx, VarId};
use crate::scalar::Scalar;

/// Hard cap on series terms before reporting non-convergence.
pub const MAX_SERIES_TERMS: usize = 400;
/// Consecutive below-threshold terms required before a series stops.
const SETTLE_TERMS: usize = 10;
/// Newton iteration cap for logarithms on general algebras.
const NEWTON_MAX_ITERS: usize = 80;

#[derive(Debug, Error)]
pub enum AnalyticError {
    #[error("series did not converge within {max_terms} terms")]
    NoConvergence { max_terms: usize },
    #[error("argument outside the principal domain: {0}")]
    Domain(String),
    #[error("Newton iteration for the logarithm did not converge (residual {residual})")]
    NewtonDivergence { residual: f64 },
    #[error("operation requires algebra `{expected}`, got `{found}`")]
    WrongAlgebra { expected: String, found: String },
    #[error("evaluation failed at sample {point:?}: {source}")]
    Eval {
        point: Vec<f64>,
        source: EvalError,
    },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Structural family of an algebra, used to dispatch closed forms.
pub(crate) enum Family<T> {
    Cp(T),
    A34,
    General,
}

pub(crate) fn classify<T: Scalar>(alg: &Algebra<T>) -> Family<T> {
    let n = alg.dim();
    if n == 2 && alg.identity_coeffs() == [T::one(), T::zero()] {
        let p = alg.gamma(1, 1, 0);
        let reference = Algebra::cp(p);
        let matches = (0..2).all(|i| {
            (0..2).all(|j| (0..2).all(|k| alg.gamma(i, j, k) == reference.gamma(i, j, k)))
        });
        if matches {
            return Family::Cp(p);
        }
    }
    if n == 3 && alg.identity_coeffs() == [T::one(), T::zero(), T::zero()] {
        let reference = Algebra::<T>::a34();
        let matches = (0..3).all(|i| {
            (0..3).all(|j| (0..3).all(|k| alg.gamma(i, j, k) == reference.gamma(i, j, k)))
        });
        if matches {
            return Family::A34;
        }
    }
    Family::General
}

/// Generalized cosine/sine: the even and odd parts of `e^(iy)` on `C_p`,
/// `cos_p(y) = sum_{k>=0} p^k y^(2k)/(2k)!` and
/// `sin_p(y) = sum_{k>=0} p^k y^(2k+1)/(2k+1)!`.
///
/// Closed forms: circular for `p < 0`, affine `(1, y)` for `p = 0`,
/// hyperbolic for `p > 0`; they sum the series exactly for every real `p`.
pub fn cosp_sinp<T: Scalar>(p: T, y: T) -> (T, T) {
    if p == T::zero() {
        (T::one(), y)
    } else if p < T::zero() {
        let s = (-p).sqrt();
        ((s * y).cos(), (s * y).sin() / s)
    } else {
        let s = p.sqrt();
        ((s * y).cosh(), (s * y).sinh() / s)
    }
}

/// Direct truncated summation of the `cos_p`/`sin_p` series, kept as an
/// independent cross-check of the closed forms.
pub fn cosp_sinp_series<T: Scalar>(p: T, y: T, tol: T) -> Result<(T, T), AnalyticError> {
    let mut cos_acc = T::zero();
    let mut sin_acc = T::zero();
    let mut c_term = T::one();
    let mut s_term = y;
    let mut settled = 0usize;
    for k in 0..MAX_SERIES_TERMS {
        cos_acc = cos_acc + c_term;
        sin_acc = sin_acc + s_term;
        let scale = T::one() + cos_acc.abs().max(sin_acc.abs());
        if !scale.is_finite() {
            return Err(AnalyticError::NoConvergence {
                max_terms: MAX_SERIES_TERMS,
            });
        }
        if c_term.abs().max(s_term.abs()) <= tol * scale {
            settled += 1;
            if settled >= SETTLE_TERMS {
                return Ok((cos_acc, sin_acc));
            }
        } else {
            settled = 0;
        }
        let k2 = T::of_usize(2 * k);
        c_term = c_term * p * y * y / ((k2 + T::one()) * (k2 + T::c(2.0)));
        s_term = s_term * p * y * y / ((k2 + T::c(2.0)) * (k2 + T::c(3.0)));
    }
    Err(AnalyticError::NoConvergence {
        max_terms: MAX_SERIES_TERMS,
    })
}

/// Hypercomplex exponential. Closed form on `C_p` and `A3_4`, truncated
/// series `sum z^k/k!` elsewhere.
pub fn hc_exp<T: Scalar>(
    alg: &Algebra<T>,
    z: &HValue<T>,
    tol: T,
) -> Result<HValue<T>, AnalyticError> {
    match classify(alg) {
        Family::Cp(p) => {
            let (x, y) = (z.coeffs()[0], z.coeffs()[1]);
            let (c, s) = cosp_sinp(p, y);
            let ex = x.exp();
            Ok(alg.value(vec![ex * c, ex * s])?)
        }
        Family::A34 => {
            let (t, x, y) = (z.coeffs()[0], z.coeffs()[1], z.coeffs()[2]);
            let et = t.exp();
            Ok(alg.value(vec![et, et * x, et * (x * x / T::c(2.0) + y)])?)
        }
        Family::General => hc_exp_series(alg, z, tol),
    }
}

/// Truncated exponential series with the settling stop rule: summation ends
/// once ten consecutive term norms fall below `tol * (1 + ||partial sum||)`.
/// Nilpotent parts terminate exactly; the cap guards non-convergent inputs.
pub fn hc_exp_series<T: Scalar>(
    alg: &Algebra<T>,
    z: &HValue<T>,
    tol: T,
) -> Result<HValue<T>, AnalyticError> {
    let mut acc = alg.one();
    let mut term = alg.one();
    let mut settled = 0usize;
    for k in 1..=MAX_SERIES_TERMS {
        term = alg.mul(&term, z)?.scale(T::one() / T::of_usize(k));
        acc = acc.add(&term);
        if !acc.norm().is_finite() {
            return Err(AnalyticError::NoConvergence {
                max_terms: MAX_SERIES_TERMS,
            });
        }
        if term.norm() <= tol * (T::one() + acc.norm()) {
            settled += 1;
            if settled >= SETTLE_TERMS {
                return Ok(acc);
            }
        } else {
            settled = 0;
        }
    }
    Err(AnalyticError::NoConvergence {
        max_terms: MAX_SERIES_TERMS,
    })
}

/// Principal hypercomplex logarithm, the inverse of [`hc_exp`].
///
/// Domains: on `C_p` with `p < 0` the full punctured plane (argument by
/// `atan2`); with `p = 0` the half plane `x1 > 0`; with `p > 0` the wedge
/// `x1 > sqrt(p) |x2|` where the exponential is a bijection. On `A3_4` the
/// region `t > 0`. General algebras run a Newton iteration on
/// `w -> exp(w) - z`, seeded from the logarithm of the identity-direction
/// part; since `exp' = exp`, each step is
/// `w <- w - exp(w)^-1 (exp(w) - z)`.
pub fn hc_ln<T: Scalar>(alg: &Algebra<T>, z: &HValue<T>) -> Result<HValue<T>, AnalyticError> {
    match classify(alg) {
        Family::Cp(p) => {
            let (x1, x2) = (z.coeffs()[0], z.coeffs()[1]);
            if p < T::zero() {
                let s = (-p).sqrt();
                let r2 = x1 * x1 - p * x2 * x2;
                if r2 <= T::zero() {
                    return Err(AnalyticError::Domain("ln of 0 in C_p (p < 0)".into()));
                }
                let x = r2.ln() / T::c(2.0);
                let y = (s * x2).atan2(x1) / s;
                Ok(alg.value(vec![x, y])?)
            } else if p == T::zero() {
                if x1 <= T::zero() {
                    return Err(AnalyticError::Domain(
                        "ln on dual numbers requires x1 > 0".into(),
                    ));
                }
                Ok(alg.value(vec![x1.ln(), x2 / x1])?)
            } else {
                let s = p.sqrt();
                if x1 <= s * x2.abs() {
                    return Err(AnalyticError::Domain(format!(
                        "ln on C_p (p > 0) requires x1 > sqrt(p)|x2|, got ({}, {})",
                        x1, x2
                    )));
                }
                let q = x1 * x1 - p * x2 * x2;
                let x = q.ln() / T::c(2.0);
                let y = (s * x2 / x1).atanh() / s;
                Ok(alg.value(vec![x, y])?)
            }
        }
        Family::A34 => {
            let (t, x, y) = (z.coeffs()[0], z.coeffs()[1], z.coeffs()[2]);
            if t <= T::zero() {
                return Err(AnalyticError::Domain("ln on A3_4 requires t > 0".into()));
            }
            Ok(alg.value(vec![
                t.ln(),
                x / t,
                y / t - x * x / (T::c(2.0) * t * t),
            ])?)
        }
        Family::General => hc_ln_newton(alg, z),
    }
}

fn hc_ln_newton<T: Scalar>(alg: &Algebra<T>, z: &HValue<T>) -> Result<HValue<T>, AnalyticError> {
    let eps = alg.one();
    let eps_norm2 = eps.coeffs().iter().fold(T::zero(), |a, &e| a + e * e);
    let c = z
        .coeffs()
        .iter()
        .zip(eps.coeffs())
        .fold(T::zero(), |a, (&zi, &ei)| a + zi * ei)
        / eps_norm2;
    if c <= T::zero() {
        return Err(AnalyticError::Domain(
            "identity-direction part of z must be positive to seed ln".into(),
        ));
    }
    let series_tol = T::c(1e-16);
    let mut w = eps.scale(c.ln());
    let target = T::c(1e-13) * (T::one() + z.norm());
    let mut residual = T::infinity();
    for _ in 0..NEWTON_MAX_ITERS {
        let ew = hc_exp_series(alg, &w, series_tol)?;
        let diff = ew.sub(z);
        residual = diff.norm();
        if residual <= target {
            return Ok(w);
        }
        let step = alg.mul(&alg.inv(&ew)?, &diff)?;
        w = w.sub(&step);
    }
    Err(AnalyticError::NewtonDivergence {
        residual: residual.to_f64().unwrap_or(f64::NAN),
    })
}

/// Real power `z^m = exp(m ln z)`, on the principal domain of [`hc_ln`].
pub fn hc_pow<T: Scalar>(
    alg: &Algebra<T>,
    z: &HValue<T>,
    m: T,
) -> Result<HValue<T>, AnalyticError> {
    let lnz = hc_ln(alg, z)?;
    hc_exp(alg, &lnz.scale(m), T::c(1e-16))
}

/// Cosine and sine on `A3_4`:
/// `cos z = cos t - (x sin t) i - (y sin t + x^2 cos t / 2) j` and
/// `sin z = sin t + (x cos t) i + (y cos t - x^2 sin t / 2) j`,
/// which satisfy `cos^2 z + sin^2 z = 1`.
pub fn hc_cos_sin_a34<T: Scalar>(
    alg: &Algebra<T>,
    z: &HValue<T>,
) -> Result<(HValue<T>, HValue<T>), AnalyticError> {
    if !matches!(classify(alg), Family::A34) {
        return Err(AnalyticError::WrongAlgebra {
            expected: "A3_4".into(),
            found: alg.label().to_string(),
        });
    }
    let (t, x, y) = (z.coeffs()[0], z.coeffs()[1], z.coeffs()[2]);
    let (st, ct) = (t.sin(), t.cos());
    let half = T::c(0.5);
    let cos = alg.value(vec![ct, -x * st, -(y * st + x * x * ct * half)])?;
    let sin = alg.value(vec![st, x * ct, y * ct - x * x * st * half])?;
    Ok((cos, sin))
}

/// Residual report of the Scheffers system at a set of sample points.
#[derive(Debug, Clone, Serialize)]
pub struct ScheffersReport<T> {
    pub max_residual: T,
    /// `[t, x1..xn]` of the worst sample.
    pub worst_point: Vec<T>,
    /// 1-based `(i, k)` of the worst equation.
    pub worst_indices: (usize, usize),
    pub tolerance: T,
    pub pass: bool,
}

/// Checks the Scheffers (generalized Cauchy-Riemann) system for the component
/// tuple `f_1..f_n` at every sample: the residuals
/// `df_i/dx_k - sum_j gamma_jki (sum_l eps_l df_j/dx_l)`
/// must vanish for an analytic tuple. Partials are exact (jet arithmetic).
pub fn scheffers_check<T: Scalar>(
    alg: &Algebra<T>,
    components: &[ExprAst],
    samples: &[Env<T>],
    tol: T,
) -> Result<ScheffersReport<T>, AnalyticError> {
    let n = alg.dim();
    assert_eq!(
        components.len(),
        n,
        "need one component per unit of the algebra"
    );
    let vars: Vec<VarId> = (1..=n as u32).map(VarId::X).collect();
    let ctx = TaylorCtx::new(n, 1);
    let eps = alg.identity_coeffs();
    let mut max_residual = T::zero();
    let mut worst_point = Vec::new();
    let mut worst_indices = (1, 1);
    for env in samples {
        // Jacobian J[j][l] = df_j/dx_l at this sample.
        let mut jac = vec![vec![T::zero(); n]; n];
        for (j, component) in components.iter().enumerate() {
            let jet = ctx.eval(component, env, &vars).map_err(|source| {
                let mut point = vec![env.t.to_f64().unwrap_or(f64::NAN)];
                point.extend(env.x.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)));
                AnalyticError::Eval { point, source }
            })?;
            for l in 0..n {
                let mut e = vec![0u8; n];
                e[l] = 1;
                jac[j][l] = ctx.partial(&jet, &e);
            }
        }
        // Derivative estimate f'_j = sum_l eps_l df_j/dx_l.
        let fprime: Vec<T> = (0..n)
            .map(|j| {
                (0..n).fold(T::zero(), |acc, l| acc + eps[l] * jac[j][l])
            })
            .collect();
        for i in 0..n {
            for k in 0..n {
                let mut rhs = T::zero();
                for j in 0..n {
                    rhs = rhs + alg.gamma(j, k, i) * fprime[j];
                }
                let r = (jac[i][k] - rhs).abs();
                if r > max_residual {
                    max_residual = r;
                    worst_indices = (i + 1, k + 1);
                    worst_point = std::iter::once(env.t).chain(env.x.iter().copied()).collect();
                }
            }
        }
    }
    Ok(ScheffersReport {
        max_residual,
        worst_point,
        worst_indices,
        tolerance: tol,
        pass: max_residual <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    type A = Algebra<f64>;
    const TOL: f64 = 1e-12;

    #[test]
    fn cosp_sinp_basics() {
        for p in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            let (c, s) = cosp_sinp(p, 0.0);
            assert_eq!((c, s), (1.0, 0.0));
        }
        let (c, s) = cosp_sinp(0.0, 1.7);
        assert_eq!((c, s), (1.0, 1.7));
        let (c, s) = cosp_sinp(1.0, 0.5);
        assert!((c - 0.5f64.cosh()).abs() < 1e-15);
        assert!((s - 0.5f64.sinh()).abs() < 1e-15);
    }

    #[test]
    fn closed_forms_match_the_series() {
        for p in [-2.0f64, -1.0, -0.25, 0.0, 0.5, 1.0] {
            for y in [-2.5f64, -0.3, 0.0, 0.9, 3.0] {
                let (c, s) = cosp_sinp(p, y);
                let (cs, ss) = cosp_sinp_series(p, y, 1e-16).unwrap();
                assert!((c - cs).abs() < 1e-12, "cos_p mismatch p={p} y={y}");
                assert!((s - ss).abs() < 1e-12, "sin_p mismatch p={p} y={y}");
            }
        }
    }

    #[test]
    fn pythagorean_identity_squared() {
        for p in [-1.0, 0.0, 1.0] {
            for k in 0..61 {
                let y = -3.0 + 0.1 * k as f64;
                let (c, s) = cosp_sinp(p, y);
                assert!(
                    (c * c - p * s * s - 1.0).abs() <= TOL,
                    "identity failed at p={p}, y={y}"
                );
            }
        }
    }

    #[test]
    fn a34_exponential_matches_formula() {
        let alg = A::a34();
        let z = alg.value(vec![0.0, 1.0, 0.0]).unwrap();
        let e = hc_exp(&alg, &z, 1e-14).unwrap();
        assert!(e.max_abs_diff(&alg.value(vec![1.0, 1.0, 0.5]).unwrap()) < 1e-15);
    }

    #[test]
    fn exp_of_zero_is_identity() {
        for alg in [A::cp(-1.0), A::cp(0.0), A::cp(1.0), A::a34()] {
            let e = hc_exp(&alg, &alg.zero(), 1e-14).unwrap();
            assert!(e.max_abs_diff(&alg.one()) == 0.0);
        }
        let prod = A::cp(-1.0).direct_product(&A::cp(1.0));
        let e = hc_exp(&prod, &prod.zero(), 1e-14).unwrap();
        assert!(e.max_abs_diff(&prod.one()) < 1e-15);
    }

    #[test]
    fn complex_exp_of_i_pi_is_minus_one() {
        let alg = A::cp(-1.0);
        let z = alg.value(vec![0.0, std::f64::consts::PI]).unwrap();
        let e = hc_exp(&alg, &z, 1e-14).unwrap();
        assert!((e.coeffs()[0] + 1.0).abs() < 1e-12);
        assert!(e.coeffs()[1].abs() < 1e-12);
    }

    #[test]
    fn closed_forms_agree_with_series_fallback() {
        for alg in [A::cp(-1.0), A::cp(0.0), A::cp(1.0)] {
            let z = alg.value(vec![0.4, -1.3]).unwrap();
            let closed = hc_exp(&alg, &z, 1e-15).unwrap();
            let series = hc_exp_series(&alg, &z, 1e-15).unwrap();
            assert!(closed.max_abs_diff(&series) < 1e-12);
        }
        let alg = A::a34();
        let z = alg.value(vec![0.2, 0.7, -0.4]).unwrap();
        let closed = hc_exp(&alg, &z, 1e-15).unwrap();
        let series = hc_exp_series(&alg, &z, 1e-15).unwrap();
        assert!(closed.max_abs_diff(&series) < 1e-12);
    }

    #[test]
    fn a34_log_matches_formula() {
        let alg = A::a34();
        let z = alg.value(vec![1.0, 1.0, 0.0]).unwrap();
        let l = hc_ln(&alg, &z).unwrap();
        assert!(l.max_abs_diff(&alg.value(vec![0.0, 1.0, -0.5]).unwrap()) < 1e-15);
    }

    #[test]
    fn ln_of_identity_is_zero() {
        for alg in [A::cp(-1.0), A::cp(0.0), A::cp(1.0), A::a34()] {
            let l = hc_ln(&alg, &alg.one()).unwrap();
            assert!(l.norm() < 1e-14, "{}", alg.label());
        }
    }

    #[test]
    fn a34_exp_ln_roundtrip() {
        let alg = A::a34();
        let z = alg.value(vec![0.3, -1.2, 0.7]).unwrap();
        let back = hc_ln(&alg, &hc_exp(&alg, &z, 1e-15).unwrap()).unwrap();
        assert!(back.max_abs_diff(&z) < 1e-10);
    }

    #[test]
    fn ln_domains_are_enforced() {
        // Dual numbers: x1 must be positive.
        let dual = A::cp(0.0);
        let z = dual.value(vec![-0.5, 1.0]).unwrap();
        assert!(matches!(hc_ln(&dual, &z), Err(AnalyticError::Domain(_))));
        // Split-complex: outside the wedge x1 > |x2| the exponential has no
        // preimage.
        let split = A::cp(1.0);
        let z = split.value(vec![1.0, 1.5]).unwrap();
        assert!(matches!(hc_ln(&split, &z), Err(AnalyticError::Domain(_))));
        // A3_4 needs a positive real part.
        let a34 = A::a34();
        let z = a34.value(vec![0.0, 1.0, 1.0]).unwrap();
        assert!(matches!(hc_ln(&a34, &z), Err(AnalyticError::Domain(_))));
        // Complex numbers: only 0 is excluded.
        let complex = A::cp(-1.0);
        let z = complex.value(vec![-2.0, 0.5]).unwrap();
        let l = hc_ln(&complex, &z).unwrap();
        let back = hc_exp(&complex, &l, 1e-15).unwrap();
        assert!(back.max_abs_diff(&z) < 1e-12);
    }

    #[test]
    fn newton_log_on_a_product_algebra() {
        let alg = A::cp(-1.0).direct_product(&A::cp(1.0));
        let z = alg
            .value(vec![0.2, -0.3, 0.15, 0.1])
            .unwrap();
        let e = hc_exp(&alg, &z, 1e-16).unwrap();
        let back = hc_ln(&alg, &e).unwrap();
        assert!(back.max_abs_diff(&z) < 1e-10, "got {back}");
    }

    #[test]
    fn pow_matches_a34_formula_and_edge_cases() {
        let alg = A::a34();
        let z = alg.value(vec![1.0, 1.0, 0.0]).unwrap();
        let sq = hc_pow(&alg, &z, 2.0).unwrap();
        assert!(sq.max_abs_diff(&alg.value(vec![1.0, 2.0, 1.0]).unwrap()) < 1e-12);

        let same = hc_pow(&alg, &z, 1.0).unwrap();
        assert!(same.max_abs_diff(&z) < 1e-12);
        let one = hc_pow(&alg, &z, 0.0).unwrap();
        assert!(one.max_abs_diff(&alg.one()) < 1e-12);

        // Explicit A3_4 power formula t^m [1 + m x/t i + (m y/t + m(m-1)x^2/(2t^2)) j].
        let w = alg.value(vec![2.0, 0.5, -0.3]).unwrap();
        let m = 1.7;
        let (t, x, y) = (2.0f64, 0.5, -0.3);
        let tm = t.powf(m);
        let explicit = alg
            .value(vec![
                tm,
                tm * m * x / t,
                tm * (m * y / t + m * (m - 1.0) * x * x / (2.0 * t * t)),
            ])
            .unwrap();
        let computed = hc_pow(&alg, &w, m).unwrap();
        assert!(computed.max_abs_diff(&explicit) < 1e-12);
    }

    #[test]
    fn a34_cos_sin_values_and_identity() {
        let alg = A::a34();
        let zero = alg.zero();
        let (c, s) = hc_cos_sin_a34(&alg, &zero).unwrap();
        assert!(c.max_abs_diff(&alg.one()) == 0.0);
        assert!(s.norm() == 0.0);

        let real = alg.value(vec![0.8, 0.0, 0.0]).unwrap();
        let (c, s) = hc_cos_sin_a34(&alg, &real).unwrap();
        assert_eq!(c.coeffs(), &[0.8f64.cos(), 0.0, 0.0]);
        assert_eq!(s.coeffs(), &[0.8f64.sin(), 0.0, 0.0]);

        let z = alg.value(vec![0.0, 1.0, 0.0]).unwrap();
        let (c, _) = hc_cos_sin_a34(&alg, &z).unwrap();
        assert!(c.max_abs_diff(&alg.value(vec![1.0, 0.0, -0.5]).unwrap()) < 1e-15);

        let w = alg.value(vec![0.9, -1.1, 0.6]).unwrap();
        let (cw, sw) = hc_cos_sin_a34(&alg, &w).unwrap();
        let sum = alg
            .mul(&cw, &cw)
            .unwrap()
            .add(&alg.mul(&sw, &sw).unwrap());
        assert!(sum.max_abs_diff(&alg.one()) < 1e-12);
    }

    fn grid2(lo: f64, hi: f64, count: usize) -> Vec<Env<f64>> {
        let mut envs = Vec::new();
        for a in 0..count {
            for b in 0..count {
                let step = (hi - lo) / (count - 1) as f64;
                envs.push(Env::new(0.0, vec![lo + step * a as f64, lo + step * b as f64]));
            }
        }
        envs
    }

    #[test]
    fn scheffers_passes_for_z_squared_and_fails_for_re_z() {
        let alg = A::cp(-1.0);
        let samples = grid2(-1.5, 1.5, 5);
        let z2 = [parse("x1^2-x2^2").unwrap(), parse("2*x1*x2").unwrap()];
        let report = scheffers_check(&alg, &z2, &samples, 1e-12).unwrap();
        assert!(report.pass, "residual {}", report.max_residual);

        let re = [parse("x1").unwrap(), parse("0").unwrap()];
        let report = scheffers_check(&alg, &re, &samples, 1e-12).unwrap();
        assert!(!report.pass);
        assert!(report.max_residual > 0.1);
    }

    #[test]
    fn scheffers_passes_for_a34_square() {
        let alg = A::a34();
        let mut samples = Vec::new();
        for a in [-1.0, 0.3, 1.2] {
            for b in [-0.7, 0.5] {
                for c in [-1.1, 0.9] {
                    samples.push(Env::new(0.0, vec![a, b, c]));
                }
            }
        }
        // (x1 + x2 i + x3 j)^2 = x1^2 + 2 x1 x2 i + (2 x1 x3 + x2^2) j.
        let z2 = [
            parse("x1^2").unwrap(),
            parse("2*x1*x2").unwrap(),
            parse("2*x1*x3+x2^2").unwrap(),
        ];
        let report = scheffers_check(&alg, &z2, &samples, 1e-12).unwrap();
        assert!(report.pass, "residual {}", report.max_residual);
    }

    #[test]
    fn scheffers_evaluation_error_carries_point() {
        let alg = A::cp(-1.0);
        let comps = [parse("ln(x1)").unwrap(), parse("0").unwrap()];
        let samples = vec![Env::new(0.0, vec![-1.0, 0.0])];
        let err = scheffers_check(&alg, &comps, &samples, 1e-12).unwrap_err();
        match err {
            AnalyticError::Eval { point, .. } => assert_eq!(point, vec![0.0, -1.0, 0.0]),
            other => panic!("unexpected error {other}"),
        }
    }
}
