//! Closed form of the Lotka-Volterra base equation and its planar
//! projection.
//!
//! The base equation `dZ = (b Z - a Z^2) dt + G Z dW` with constant `a`, `b`,
//! `G` has the solution
//!
//! ```text
//! Z(t) = M(t) [ Z(0)^-1 + a int_0^t M(s) ds ]^-1,
//! M(t) = exp{ (b - G^2 Q / 2) t + G W(t) },
//! ```
//!
//! with `Q = sum_i e_i^2` the quadratic variation of the hypercomplex Wiener
//! process (`Q = 1` in the scalar formula); `M` is then the geometric growth
//! factor `dM = M b dt + M G dW` on any commutative algebra. Everything is
//! evaluated with hypercomplex exp, products and inversion; the bracket can
//! cross the zero-divisor set of the algebra (finite-time blow-up), which is
//! reported with the first offending grid time.

use crate::algebra::Algebra;
use crate::analytic::{cosp_sinp, hc_exp};
use crate::paths::WienerGrid;
use crate::scalar::Scalar;

use super::{singular_at, HPath, LvCoeffs, SolveError};

pub fn solve_lv_base<T: Scalar>(
    alg: &Algebra<T>,
    coeffs: &LvCoeffs<T>,
    grid: &WienerGrid<T>,
) -> Result<HPath<T>, SolveError> {
    let n = alg.dim();
    if grid.m() != n {
        return Err(SolveError::GridMismatch {
            expected: n,
            found: grid.m(),
        });
    }
    let steps = grid.steps();
    let dt = grid.dt();
    let half_dt = dt / T::c(2.0);
    let tol = T::c(1e-16);

    let gq = alg.mul(&coeffs.g, &alg.unit_square_sum())?;
    let drift = coeffs.b.sub(&alg.mul(&coeffs.g, &gq)?.scale(T::c(0.5)));
    let inv_z0 = alg
        .inv(&coeffs.z0)
        .map_err(|err| singular_at(T::zero(), err))?;

    let growth = |k: usize| -> Result<_, SolveError> {
        let t = grid.t(k);
        let w: Vec<T> = (0..n).map(|j| grid.w(j, k)).collect();
        let gw = alg.mul(&coeffs.g, &alg.value(w)?)?;
        Ok(hc_exp(alg, &drift.scale(t).add(&gw), tol)?)
    };

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut integral = alg.zero();
    let mut m_cur = growth(0)?;
    for k in 0..=steps {
        let t = grid.t(k);
        let bracket = inv_z0.add(&alg.mul(&coeffs.a, &integral)?);
        let inv_bracket = alg.inv(&bracket).map_err(|err| singular_at(t, err))?;
        times.push(t);
        states.push(alg.mul(&m_cur, &inv_bracket)?);
        if k < steps {
            let m_next = growth(k + 1)?;
            integral = integral.add(&m_cur.add(&m_next).scale(half_dt));
            m_cur = m_next;
        }
    }
    Ok(HPath {
        label: alg.label().to_string(),
        times,
        states,
    })
}

/// Planar (`C_p`) projection of the Lotka-Volterra closed form in real
/// arithmetic. Writing `M(t) = e^alpha (cos_p beta + i sin_p beta)` with
/// `q = 1 + p` (the quadratic-variation factor on `C_p`),
///
/// ```text
/// alpha(t) = (b1 - q (G1^2 + p G2^2)/2) t + G1 W1 + p G2 W2,
/// beta(t)  = (b2 - q G1 G2) t + G2 W1 + G1 W2,
/// ```
///
/// the bracket accumulates as `gamma(t) + i delta(t)` and
///
/// ```text
/// X1 = e^alpha [gamma cos_p beta - p delta sin_p beta] / (gamma^2 - p delta^2),
/// X2 = e^alpha [gamma sin_p beta - delta cos_p beta] / (gamma^2 - p delta^2).
/// ```
pub fn solve_lv_cp<T: Scalar>(
    p: T,
    a: (T, T),
    b: (T, T),
    g: (T, T),
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
    let half_dt = grid.dt() / T::c(2.0);

    let d0 = x0.0 * x0.0 - p * x0.1 * x0.1;
    let d0_scale = x0.0 * x0.0 + p.abs() * x0.1 * x0.1;
    if d0.abs() <= T::c(1e-12) * (T::one() + d0_scale) {
        return Err(SolveError::SingularAt {
            t: 0.0,
            detail: format!("X1(0)^2 - p X2(0)^2 = {} vanishes", d0),
        });
    }

    let q = T::one() + p;
    let drift_alpha = b.0 - q * (g.0 * g.0 + p * g.1 * g.1) / T::c(2.0);
    let drift_beta = b.1 - q * g.0 * g.1;

    // Growth factor components at node k: m = e^alpha (cos_p beta, sin_p beta).
    let growth = |k: usize| -> (T, T) {
        let t = grid.t(k);
        let (w1, w2) = (grid.w(0, k), grid.w(1, k));
        let alpha = drift_alpha * t + g.0 * w1 + p * g.1 * w2;
        let beta = drift_beta * t + g.1 * w1 + g.0 * w2;
        let (cb, sb) = cosp_sinp(p, beta);
        let ea = alpha.exp();
        (ea * cb, ea * sb)
    };

    let mut x1 = Vec::with_capacity(steps + 1);
    let mut x2 = Vec::with_capacity(steps + 1);
    let mut gamma = x0.0 / d0;
    let mut delta = -x0.1 / d0;
    let mut m_cur = growth(0);
    for k in 0..=steps {
        let den = gamma * gamma - p * delta * delta;
        let scale = gamma * gamma + p.abs() * delta * delta;
        if den.abs() <= T::c(1e-12) * scale {
            return Err(SolveError::SingularAt {
                t: grid.t(k).to_f64().unwrap_or(f64::NAN),
                detail: format!("gamma^2 - p delta^2 = {} vanishes", den),
            });
        }
        x1.push((gamma * m_cur.0 - p * delta * m_cur.1) / den);
        x2.push((gamma * m_cur.1 - delta * m_cur.0) / den);
        if k < steps {
            let m_next = growth(k + 1);
            // a M = (a1 m1 + p a2 m2) + i (a2 m1 + a1 m2), trapezoid in ds.
            let q_cur = (a.0 * m_cur.0 + p * a.1 * m_cur.1, a.1 * m_cur.0 + a.0 * m_cur.1);
            let q_next = (
                a.0 * m_next.0 + p * a.1 * m_next.1,
                a.1 * m_next.0 + a.0 * m_next.1,
            );
            gamma = gamma + (q_cur.0 + q_next.0) * half_dt;
            delta = delta + (q_cur.1 + q_next.1) * half_dt;
            m_cur = m_next;
        }
    }
    Ok((x1, x2))
}
