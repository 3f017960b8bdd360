//! Closed form of the linear base equation and its planar projection.
//!
//! The base equation `dZ = (f1 + f2 Z) dt + (g1 + g2 Z) dW` over a
//! commutative algebra has the solution
//!
//! ```text
//! Z(t) = E(t) { Z(0) + int_0^t E^-1(s) [f1(s) - g1(s) g2(s) Q] ds
//!                      + int_0^t E^-1(s) g1(s) dW(s) },
//! E(t) = exp{ int_0^t [f2(s) - g2(s)^2 Q / 2] ds + int_0^t g2(s) dW(s) },
//! ```
//!
//! where `Q = sum_i e_i^2` is the quadratic variation of the hypercomplex
//! Wiener process, `(dW)^2 = Q dt`. The scalar formula has `Q = 1`; keeping
//! `Q` as an algebra element is what makes `E` the integrating factor
//! (`dE = E f2 dt + E g2 dW` under Ito's rule) for every commutative algebra
//! - on the complex numbers `Q = 0` and the corrections drop entirely.
//! Everything is evaluated with algebra products, `hc_exp` and explicit
//! inversion of `E` (exponential images are invertible; the inversion guards
//! rounding).

use crate::algebra::{Algebra, HValue};
use crate::analytic::{cosp_sinp, hc_exp};
use crate::expr::{eval, Env, ExprAst};
use crate::paths::WienerGrid;
use crate::scalar::Scalar;

use super::{
    eval_hvalue, singular_at, wiener_increment, HPath, LinearBaseCoeffs, SolveError,
};

/// Evaluates the linear closed form on the grid. The grid must carry one
/// Wiener component per algebra unit.
pub fn solve_linear_base<T: Scalar>(
    alg: &Algebra<T>,
    coeffs: &LinearBaseCoeffs,
    z0: &HValue<T>,
    grid: &WienerGrid<T>,
) -> Result<HPath<T>, SolveError> {
    let n = alg.dim();
    coeffs.check_dim(n)?;
    if grid.m() != n {
        return Err(SolveError::GridMismatch {
            expected: n,
            found: grid.m(),
        });
    }
    let steps = grid.steps();
    let dt = grid.dt();
    let half_dt = dt / T::c(2.0);
    let half = T::c(0.5);
    let tol = T::c(1e-16);
    let qvar = alg.unit_square_sum();

    // f1, f2, g1, g2 at a time node, plus the derived integrands
    // phi = f2 - g2^2 Q / 2 (exponent drift) and f1 - g1 g2 Q (bracket drift).
    struct Node<T> {
        g1: HValue<T>,
        g2: HValue<T>,
        phi: HValue<T>,
        bracket_drift: HValue<T>,
    }
    let eval_node = |t: T| -> Result<Node<T>, SolveError> {
        let f1 = eval_hvalue(alg, &coeffs.f1, t)?;
        let f2 = eval_hvalue(alg, &coeffs.f2, t)?;
        let g1 = eval_hvalue(alg, &coeffs.g1, t)?;
        let g2 = eval_hvalue(alg, &coeffs.g2, t)?;
        let g2q = alg.mul(&g2, &qvar)?;
        let phi = f2.sub(&alg.mul(&g2, &g2q)?.scale(half));
        let bracket_drift = f1.sub(&alg.mul(&g1, &g2q)?);
        Ok(Node {
            g1,
            g2,
            phi,
            bracket_drift,
        })
    };

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(grid.t(0));
    states.push(z0.clone());

    let mut exponent = alg.zero();
    let mut e_inv = alg.one();
    // psi = E^-1 (f1 - g1 g2), the trapezoid integrand of the ds term.
    let mut cur = eval_node(grid.t(0))?;
    let mut psi = cur.bracket_drift.clone();
    let mut leb = alg.zero();
    let mut ito = alg.zero();

    for k in 0..steps {
        let t_next = grid.t(k + 1);
        let nxt = eval_node(t_next)?;
        let dw = wiener_increment(alg, grid, k);

        // Ito parts use left-endpoint values.
        ito = ito.add(&alg.mul(&alg.mul(&e_inv, &cur.g1)?, &dw)?);
        exponent = exponent
            .add(&cur.phi.add(&nxt.phi).scale(half_dt))
            .add(&alg.mul(&cur.g2, &dw)?);

        let e_next = hc_exp(alg, &exponent, tol)?;
        let e_inv_next = alg.inv(&e_next).map_err(|err| singular_at(t_next, err))?;
        let psi_next = alg.mul(&e_inv_next, &nxt.bracket_drift)?;
        leb = leb.add(&psi.add(&psi_next).scale(half_dt));

        let bracket = z0.add(&leb).add(&ito);
        states.push(alg.mul(&e_next, &bracket)?);
        times.push(t_next);

        cur = nxt;
        e_inv = e_inv_next;
        psi = psi_next;
    }

    Ok(HPath {
        label: alg.label().to_string(),
        times,
        states,
    })
}

/// Component coefficients of the planar linear system: `f1 = f11 + i f12`
/// and so on, each an expression in `t`.
#[derive(Debug, Clone)]
pub struct CpLinearCoeffs {
    pub f11: ExprAst,
    pub f12: ExprAst,
    pub f21: ExprAst,
    pub f22: ExprAst,
    pub g11: ExprAst,
    pub g12: ExprAst,
    pub g21: ExprAst,
    pub g22: ExprAst,
}

/// Planar (`C_p`) projection of the linear closed form, in real arithmetic.
///
/// With `a(t, s) = A(t) - A(s)` and `b(t, s) = B(t) - B(s)` built from one
/// cumulative integral each (`q = 1 + p` is the scalar form of the
/// quadratic-variation element `Q` on `C_p`),
///
/// ```text
/// A(t) = int_0^t [f21 - q (g21^2 + p g22^2)/2] ds + int g21 dW1 + p int g22 dW2,
/// B(t) = int_0^t [f22 - q g21 g22] ds + int g22 dW1 + int g21 dW2,
/// ```
///
/// the kernel `e^(a(t,s)) (cos_p b(t,s) + i sin_p b(t,s))` factorizes through
/// the addition formulas of `cos_p`/`sin_p`, which is how the evaluation
/// below stays `O(steps)`: it accumulates `E^-1(s)`-weighted integrals and
/// applies `E(t)` once per node, exactly mirroring the base formula
/// componentwise.
pub fn solve_linear_cp<T: Scalar>(
    p: T,
    coeffs: &CpLinearCoeffs,
    x0: (T, T),
    grid: &WienerGrid<T>,
) -> Result<(Vec<T>, Vec<T>), SolveError> {
    if grid.m() != 2 {
        return Err(SolveError::GridMismatch {
            expected: 2,
            found: grid.m(),
        });
    }
    let steps = grid.steps();
    let dt = grid.dt();
    let half_dt = dt / T::c(2.0);
    let half = T::c(0.5);
    let q = T::one() + p;

    let cp_mul = |a: (T, T), b: (T, T)| (a.0 * b.0 + p * a.1 * b.1, a.0 * b.1 + a.1 * b.0);

    // Coefficient values and derived integrands at one time node.
    struct Node<T> {
        g11: T,
        g12: T,
        g21: T,
        g22: T,
        phi_a: T,
        phi_b: T,
        u: T,
        v: T,
    }
    let eval_node = |t: T| -> Result<Node<T>, SolveError> {
        let env = Env::time(t);
        let f11 = eval(&coeffs.f11, &env)?;
        let f12 = eval(&coeffs.f12, &env)?;
        let f21 = eval(&coeffs.f21, &env)?;
        let f22 = eval(&coeffs.f22, &env)?;
        let g11 = eval(&coeffs.g11, &env)?;
        let g12 = eval(&coeffs.g12, &env)?;
        let g21 = eval(&coeffs.g21, &env)?;
        let g22 = eval(&coeffs.g22, &env)?;
        Ok(Node {
            g11,
            g12,
            g21,
            g22,
            phi_a: f21 - half * q * (g21 * g21 + p * g22 * g22),
            phi_b: f22 - q * g21 * g22,
            // Components of f1 - g1 g2 Q.
            u: f11 - q * (g11 * g21 + p * g12 * g22),
            v: f12 - q * (g11 * g22 + g12 * g21),
        })
    };

    let mut x1 = Vec::with_capacity(steps + 1);
    let mut x2 = Vec::with_capacity(steps + 1);
    x1.push(x0.0);
    x2.push(x0.1);

    let mut a_acc = T::zero();
    let mut b_acc = T::zero();
    // E^-1(s) components: e^-A (cos_p B - i sin_p B).
    let mut e_inv = (T::one(), T::zero());
    let mut cur = eval_node(grid.t(0))?;
    let mut psi = (cur.u, cur.v);
    let mut leb = (T::zero(), T::zero());
    let mut ito = (T::zero(), T::zero());

    for k in 0..steps {
        let dw1 = grid.increment(0, k);
        let dw2 = grid.increment(1, k);
        let nxt = eval_node(grid.t(k + 1))?;

        let r = cp_mul(e_inv, (cur.g11, cur.g12));
        let dd = cp_mul(r, (dw1, dw2));
        ito = (ito.0 + dd.0, ito.1 + dd.1);

        a_acc = a_acc + (cur.phi_a + nxt.phi_a) * half_dt + cur.g21 * dw1 + p * cur.g22 * dw2;
        b_acc = b_acc + (cur.phi_b + nxt.phi_b) * half_dt + cur.g22 * dw1 + cur.g21 * dw2;

        let (cb, sb) = cosp_sinp(p, b_acc);
        let ea = a_acc.exp();
        let e_next = (ea * cb, ea * sb);
        let ea_inv = (-a_acc).exp();
        let e_inv_next = (ea_inv * cb, -(ea_inv * sb));

        let psi_next = cp_mul(e_inv_next, (nxt.u, nxt.v));
        leb = (
            leb.0 + (psi.0 + psi_next.0) * half_dt,
            leb.1 + (psi.1 + psi_next.1) * half_dt,
        );

        let bracket = (x0.0 + leb.0 + ito.0, x0.1 + leb.1 + ito.1);
        let state = cp_mul(e_next, bracket);
        x1.push(state.0);
        x2.push(state.1);

        cur = nxt;
        e_inv = e_inv_next;
        psi = psi_next;
    }

    Ok((x1, x2))
}
