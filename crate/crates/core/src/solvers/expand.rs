//! Expansion of base equations into component SDE systems.
//!
//! Projecting a scalar hypercomplex SDE along the units turns algebra
//! products into structure-constant contractions. For the linear base
//! equation the components are
//!
//! ```text
//! dX_i = (f1_i + sum_{k,l} gamma_kli f2_k X_l) dt
//!      + sum_l (sum_k gamma_kli g1_k
//!               + sum_{k,q,m} gamma_kqm gamma_mli g2_k X_q) dW_l,
//! ```
//!
//! and analogously for the general and Lotka-Volterra forms.

use std::sync::Arc;

use crate::algebra::Algebra;
use crate::expr::{eval, Env, ExprAst};
use crate::scalar::Scalar;

use super::{shared, CoeffFn, LinearBaseCoeffs, LvCoeffs, SdeSystemSpec, SolveError};

fn eval_or_nan<T: Scalar>(expr: &ExprAst, env: &Env<T>) -> T {
    eval(expr, env).unwrap_or_else(|_| T::nan())
}

/// Expands the linear base equation over `alg` into its n-dimensional
/// component system (n driving Wiener processes).
pub fn expand_linear_system<T: Scalar>(
    alg: &Algebra<T>,
    coeffs: &LinearBaseCoeffs,
) -> Result<SdeSystemSpec<T>, SolveError> {
    let n = alg.dim();
    coeffs.check_dim(n)?;
    let alg = shared(alg);
    let coeffs = Arc::new(coeffs.clone());

    let mut drift: Vec<CoeffFn<T>> = Vec::with_capacity(n);
    for i in 0..n {
        let alg = Arc::clone(&alg);
        let coeffs = Arc::clone(&coeffs);
        drift.push(Box::new(move |t, x| {
            let env = Env::time(t);
            let mut acc = eval_or_nan(&coeffs.f1[i], &env);
            for k in 0..alg.dim() {
                let f2k = eval_or_nan(&coeffs.f2[k], &env);
                if f2k == T::zero() {
                    continue;
                }
                for (l, &xl) in x.iter().enumerate() {
                    acc = acc + alg.gamma(k, l, i) * f2k * xl;
                }
            }
            acc
        }));
    }

    let mut diffusion: Vec<Vec<CoeffFn<T>>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row: Vec<CoeffFn<T>> = Vec::with_capacity(n);
        for l in 0..n {
            let alg = Arc::clone(&alg);
            let coeffs = Arc::clone(&coeffs);
            row.push(Box::new(move |t, x| {
                let env = Env::time(t);
                let n = alg.dim();
                let mut acc = T::zero();
                for k in 0..n {
                    let g1k = eval_or_nan(&coeffs.g1[k], &env);
                    if g1k != T::zero() {
                        acc = acc + alg.gamma(k, l, i) * g1k;
                    }
                    let g2k = eval_or_nan(&coeffs.g2[k], &env);
                    if g2k == T::zero() {
                        continue;
                    }
                    for (q, &xq) in x.iter().enumerate() {
                        for m in 0..n {
                            acc = acc + alg.gamma(k, q, m) * alg.gamma(m, l, i) * g2k * xq;
                        }
                    }
                }
                acc
            }));
        }
        diffusion.push(row);
    }

    Ok(SdeSystemSpec {
        n,
        m: n,
        drift,
        diffusion,
        provenance: format!("linear base equation over {}", alg.label()),
    })
}

/// Expands a general base equation `dZ = a dt + b dW` whose coefficients are
/// given as `m <= n` hypercomplex components of `(t, x1..xn)`:
/// `dX_i = a_i dt + sum_{k<m} (sum_{j<m} gamma_jki b_j) dW_k`, with `a_i = 0`
/// for `i >= m`.
pub fn expand_general_system<T: Scalar>(
    alg: &Algebra<T>,
    a: Vec<ExprAst>,
    b: Vec<ExprAst>,
    m: usize,
) -> Result<SdeSystemSpec<T>, SolveError> {
    let n = alg.dim();
    if m == 0 || m > n {
        return Err(SolveError::CoeffCount {
            expected: n.min(1),
            found: m,
        });
    }
    if a.len() != m || b.len() != m {
        return Err(SolveError::CoeffCount {
            expected: m,
            found: if a.len() != m { a.len() } else { b.len() },
        });
    }
    let alg = shared(alg);
    let a = Arc::new(a);
    let b = Arc::new(b);

    let mut drift: Vec<CoeffFn<T>> = Vec::with_capacity(n);
    for i in 0..n {
        if i < m {
            let a = Arc::clone(&a);
            drift.push(Box::new(move |t, x| {
                eval_or_nan(&a[i], &Env::new(t, x.to_vec()))
            }));
        } else {
            drift.push(Box::new(|_, _| T::zero()));
        }
    }

    let mut diffusion: Vec<Vec<CoeffFn<T>>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row: Vec<CoeffFn<T>> = Vec::with_capacity(m);
        for k in 0..m {
            let alg = Arc::clone(&alg);
            let b = Arc::clone(&b);
            row.push(Box::new(move |t, x| {
                let env = Env::new(t, x.to_vec());
                let mut acc = T::zero();
                for (j, bj) in b.iter().enumerate() {
                    let g = alg.gamma(j, k, i);
                    if g != T::zero() {
                        acc = acc + g * eval_or_nan(bj, &env);
                    }
                }
                acc
            }));
        }
        diffusion.push(row);
    }

    Ok(SdeSystemSpec {
        n,
        m,
        drift,
        diffusion,
        provenance: format!("general base equation over {}", alg.label()),
    })
}

/// Expands the Lotka-Volterra base equation. The contractions are constant,
/// so they are precomputed:
///
/// ```text
/// dX_i = (sum_j lin[i][j] X_j - sum_{r,j} quad[i][r][j] X_r X_j) dt
///      + sum_r (sum_j dif[i][r][j] X_j) dW_r,
/// lin[i][j]     = sum_k gamma_kji b_k,
/// quad[i][r][j] = sum_{k,s} gamma_rjk gamma_ski a_s,
/// dif[i][r][j]  = sum_{k,s} gamma_sjk gamma_kri G_s.
/// ```
pub fn expand_lv_system<T: Scalar>(
    alg: &Algebra<T>,
    coeffs: &LvCoeffs<T>,
) -> Result<SdeSystemSpec<T>, SolveError> {
    let n = alg.dim();
    let a = coeffs.a.coeffs();
    let b = coeffs.b.coeffs();
    let g = coeffs.g.coeffs();

    let mut lin = vec![T::zero(); n * n];
    let mut quad = vec![T::zero(); n * n * n];
    let mut dif = vec![T::zero(); n * n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = T::zero();
            for k in 0..n {
                acc = acc + alg.gamma(k, j, i) * b[k];
            }
            lin[i * n + j] = acc;
            for r in 0..n {
                let mut q = T::zero();
                let mut d = T::zero();
                for k in 0..n {
                    for s in 0..n {
                        q = q + alg.gamma(r, j, k) * alg.gamma(s, k, i) * a[s];
                        d = d + alg.gamma(s, j, k) * alg.gamma(k, r, i) * g[s];
                    }
                }
                quad[(i * n + r) * n + j] = q;
                dif[(i * n + r) * n + j] = d;
            }
        }
    }
    let lin = Arc::new(lin);
    let quad = Arc::new(quad);
    let dif = Arc::new(dif);

    let mut drift: Vec<CoeffFn<T>> = Vec::with_capacity(n);
    for i in 0..n {
        let lin = Arc::clone(&lin);
        let quad = Arc::clone(&quad);
        drift.push(Box::new(move |_t, x| {
            let n = x.len();
            let mut acc = T::zero();
            for (j, &xj) in x.iter().enumerate() {
                acc = acc + lin[i * n + j] * xj;
            }
            for (r, &xr) in x.iter().enumerate() {
                for (j, &xj) in x.iter().enumerate() {
                    acc = acc - quad[(i * n + r) * n + j] * xr * xj;
                }
            }
            acc
        }));
    }

    let mut diffusion: Vec<Vec<CoeffFn<T>>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row: Vec<CoeffFn<T>> = Vec::with_capacity(n);
        for r in 0..n {
            let dif = Arc::clone(&dif);
            row.push(Box::new(move |_t, x| {
                let n = x.len();
                let mut acc = T::zero();
                for (j, &xj) in x.iter().enumerate() {
                    acc = acc + dif[(i * n + r) * n + j] * xj;
                }
                acc
            }));
        }
        diffusion.push(row);
    }

    Ok(SdeSystemSpec {
        n,
        m: n,
        drift,
        diffusion,
        provenance: format!("Lotka-Volterra base equation over {}", alg.label()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn consts(vals: &[f64]) -> Vec<ExprAst> {
        vals.iter().map(|v| parse(&v.to_string()).unwrap()).collect()
    }

    #[test]
    fn one_dimensional_expansion_is_the_scalar_equation() {
        let alg = Algebra::<f64>::reals();
        let coeffs = LinearBaseCoeffs {
            f1: consts(&[0.3]),
            f2: consts(&[0.7]),
            g1: consts(&[0.1]),
            g2: consts(&[0.4]),
        };
        let sys = expand_linear_system(&alg, &coeffs).unwrap();
        let x = [2.0f64];
        assert!((sys.drift_at(0, 0.0, &x) - (0.3 + 0.7 * 2.0)).abs() < 1e-15);
        assert!((sys.diffusion_at(0, 0, 0.0, &x) - (0.1 + 0.4 * 2.0)).abs() < 1e-15);
    }

    #[test]
    fn cp_expansion_matches_hand_expanded_system() {
        // Components of (11)-(12) for C_p with constant coefficients:
        // dX1 = [f11 + f21 X1 + p f22 X2] dt
        //     + [g11 + g21 X1 + p g22 X2] dW1 + p [g12 + g22 X1 + g21 X2] dW2
        // dX2 = [f12 + f22 X1 + f21 X2] dt
        //     + [g12 + g22 X1 + g21 X2] dW1 + [g11 + g21 X1 + p g22 X2] dW2.
        let p = 0.5f64;
        let alg = Algebra::cp(p);
        let (f11, f12, f21, f22) = (0.3, -0.1, 0.25, 0.4);
        let (g11, g12, g21, g22) = (0.15, -0.2, 0.1, 0.05);
        let coeffs = LinearBaseCoeffs {
            f1: consts(&[f11, f12]),
            f2: consts(&[f21, f22]),
            g1: consts(&[g11, g12]),
            g2: consts(&[g21, g22]),
        };
        let sys = expand_linear_system(&alg, &coeffs).unwrap();
        let x = [1.3f64, -0.8];
        let (x1, x2) = (x[0], x[1]);
        let expect = [
            [f11 + f21 * x1 + p * f22 * x2, f12 + f22 * x1 + f21 * x2],
            [
                g11 + g21 * x1 + p * g22 * x2,
                g12 + g22 * x1 + g21 * x2,
            ],
            [
                p * (g12 + g22 * x1 + g21 * x2),
                g11 + g21 * x1 + p * g22 * x2,
            ],
        ];
        for i in 0..2 {
            assert!(
                (sys.drift_at(i, 0.0, &x) - expect[0][i]).abs() < 1e-14,
                "drift {i}"
            );
            assert!(
                (sys.diffusion_at(i, 0, 0.0, &x) - expect[1][i]).abs() < 1e-14,
                "dW1 column, row {i}"
            );
            assert!(
                (sys.diffusion_at(i, 1, 0.0, &x) - expect[2][i]).abs() < 1e-14,
                "dW2 column, row {i}"
            );
        }
    }

    #[test]
    fn a34_constant_drift_at_identity_point() {
        // At X = (1, 0, 0) the gamma contraction collapses to f1 + f2.
        let alg = Algebra::<f64>::a34();
        let f1 = [0.2, -0.4, 0.6];
        let f2 = [0.5, 0.3, -0.1];
        let coeffs = LinearBaseCoeffs {
            f1: consts(&f1),
            f2: consts(&f2),
            g1: consts(&[0.0, 0.0, 0.0]),
            g2: consts(&[0.0, 0.0, 0.0]),
        };
        let sys = expand_linear_system(&alg, &coeffs).unwrap();
        let x = [1.0, 0.0, 0.0];
        for i in 0..3 {
            assert!((sys.drift_at(i, 0.0, &x) - (f1[i] + f2[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn general_expansion_identity_diffusion() {
        // b = identity: dX_i = dW_i by the identity axiom.
        let alg = Algebra::cp(-1.0);
        let sys = expand_general_system(
            &alg,
            consts(&[0.0, 0.0]),
            consts(&[1.0, 0.0]),
            2,
        )
        .unwrap();
        let x = [0.7f64, -0.3];
        for i in 0..2 {
            for k in 0..2 {
                let expect = if i == k { 1.0 } else { 0.0 };
                assert_eq!(sys.diffusion_at(i, k, 0.5, &x), expect);
            }
            assert_eq!(sys.drift_at(i, 0.5, &x), 0.0);
        }
    }

    #[test]
    fn deterministic_general_system() {
        let alg = Algebra::cp(1.0);
        let sys = expand_general_system(
            &alg,
            vec![parse("x1*t").unwrap(), parse("x2").unwrap()],
            consts(&[0.0, 0.0]),
            2,
        )
        .unwrap();
        let x = [2.0f64, 3.0];
        assert_eq!(sys.drift_at(0, 0.5, &x), 1.0);
        assert_eq!(sys.drift_at(1, 0.5, &x), 3.0);
        for i in 0..2 {
            for k in 0..2 {
                assert_eq!(sys.diffusion_at(i, k, 0.5, &x), 0.0);
            }
        }
    }

    #[test]
    fn lv_cp_drift_matches_projected_equations() {
        // dX1 drift at X = (1, 1): b1 + p b2 - 2 p a2 - a1 (1 + p).
        let p = -1.0f64;
        let alg = Algebra::cp(p);
        let (a, b, g) = ((0.5, 0.1), (1.0, 0.2), (0.3, 0.1));
        let coeffs = LvCoeffs {
            a: alg.value(vec![a.0, a.1]).unwrap(),
            b: alg.value(vec![b.0, b.1]).unwrap(),
            g: alg.value(vec![g.0, g.1]).unwrap(),
            z0: alg.value(vec![1.0, 0.5]).unwrap(),
        };
        let sys = expand_lv_system(&alg, &coeffs).unwrap();
        let x = [1.0, 1.0];
        let expect = b.0 + p * b.1 - 2.0 * p * a.1 - a.0 * (1.0 + p);
        assert!((sys.drift_at(0, 0.0, &x) - expect).abs() < 1e-14);
        // Full projected system at a generic point.
        let x = [1.3, -0.7];
        let (x1, x2) = (x[0], x[1]);
        let d1 = b.0 * x1 + p * b.1 * x2
            - 2.0 * p * a.1 * x1 * x2
            - a.0 * (x1 * x1 + p * x2 * x2);
        let d2 = b.1 * x1 + b.0 * x2 - 2.0 * a.0 * x1 * x2 - a.1 * (x1 * x1 + p * x2 * x2);
        assert!((sys.drift_at(0, 0.0, &x) - d1).abs() < 1e-14);
        assert!((sys.drift_at(1, 0.0, &x) - d2).abs() < 1e-14);
        let rows = [
            [g.0 * x1 + p * g.1 * x2, p * (g.1 * x1 + g.0 * x2)],
            [g.1 * x1 + g.0 * x2, g.0 * x1 + p * g.1 * x2],
        ];
        for i in 0..2 {
            for r in 0..2 {
                assert!(
                    (sys.diffusion_at(i, r, 0.0, &x) - rows[i][r]).abs() < 1e-14,
                    "diffusion ({i}, {r})"
                );
            }
        }
    }

    #[test]
    fn one_dimensional_lv_is_the_scalar_model() {
        let alg = Algebra::<f64>::reals();
        let coeffs = LvCoeffs {
            a: alg.value(vec![0.6]).unwrap(),
            b: alg.value(vec![1.1]).unwrap(),
            g: alg.value(vec![0.2]).unwrap(),
            z0: alg.value(vec![0.5]).unwrap(),
        };
        let sys = expand_lv_system(&alg, &coeffs).unwrap();
        let x = [1.7];
        assert!((sys.drift_at(0, 0.0, &x) - (1.1 * 1.7 - 0.6 * 1.7 * 1.7)).abs() < 1e-14);
        assert!((sys.diffusion_at(0, 0, 0.0, &x) - 0.2 * 1.7).abs() < 1e-14);
    }

    #[test]
    fn lv_with_zero_interaction_matches_linear_expansion() {
        // a = 0 turns the LV system into the linear one with f2 = b, g2 = G.
        let alg = Algebra::<f64>::a34();
        let b = [0.4, -0.3, 0.2];
        let g = [0.1, 0.25, -0.15];
        let lv = LvCoeffs {
            a: alg.zero(),
            b: alg.value(b.to_vec()).unwrap(),
            g: alg.value(g.to_vec()).unwrap(),
            z0: alg.one(),
        };
        let lin = LinearBaseCoeffs {
            f1: consts(&[0.0, 0.0, 0.0]),
            f2: consts(&b),
            g1: consts(&[0.0, 0.0, 0.0]),
            g2: consts(&g),
        };
        let lv_sys = expand_lv_system(&alg, &lv).unwrap();
        let lin_sys = expand_linear_system(&alg, &lin).unwrap();
        let x = [0.9, -1.2, 0.4];
        for i in 0..3 {
            assert!(
                (lv_sys.drift_at(i, 0.3, &x) - lin_sys.drift_at(i, 0.3, &x)).abs() < 1e-13
            );
            for r in 0..3 {
                assert!(
                    (lv_sys.diffusion_at(i, r, 0.3, &x) - lin_sys.diffusion_at(i, r, 0.3, &x))
                        .abs()
                        < 1e-13,
                    "({i}, {r})"
                );
            }
        }
    }

    #[test]
    fn lv_expansion_agrees_with_general_expansion() {
        // The LV coefficients as general base-equation components:
        // a_hc = b Z - a Z^2 and b_hc = G Z, expanded by hand for C_p.
        let p = -1.0f64;
        let alg = Algebra::cp(p);
        let (av, bv, gv) = ((0.5, 0.1), (1.0, 0.2), (0.3, 0.1));
        let lv = LvCoeffs {
            a: alg.value(vec![av.0, av.1]).unwrap(),
            b: alg.value(vec![bv.0, bv.1]).unwrap(),
            g: alg.value(vec![gv.0, gv.1]).unwrap(),
            z0: alg.one(),
        };
        // (b Z - a Z^2) components over C_p (p = -1), written out:
        let drift1 = "1*x1 - 1*0.2*x2 - (0.5*(x1^2 - x2^2) - 2*0.1*x1*x2)";
        let drift2 = "0.2*x1 + 1*x2 - (0.1*(x1^2 - x2^2) + 2*0.5*x1*x2)";
        // G Z components:
        let b1 = "0.3*x1 - 0.1*x2";
        let b2 = "0.1*x1 + 0.3*x2";
        let general = expand_general_system(
            &alg,
            vec![parse(drift1).unwrap(), parse(drift2).unwrap()],
            vec![parse(b1).unwrap(), parse(b2).unwrap()],
            2,
        )
        .unwrap();
        let lv_sys = expand_lv_system(&alg, &lv).unwrap();
        for point in [[1.0, 1.0], [0.6, -1.4], [2.0, 0.0]] {
            for i in 0..2 {
                assert!(
                    (general.drift_at(i, 0.0, &point) - lv_sys.drift_at(i, 0.0, &point)).abs()
                        < 1e-12,
                    "drift {i} at {point:?}"
                );
                for r in 0..2 {
                    assert!(
                        (general.diffusion_at(i, r, 0.0, &point)
                            - lv_sys.diffusion_at(i, r, 0.0, &point))
                        .abs()
                            < 1e-12,
                        "diffusion ({i},{r}) at {point:?}"
                    );
                }
            }
        }
    }
}
