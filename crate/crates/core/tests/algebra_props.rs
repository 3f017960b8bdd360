//! Property tests for the algebra layer: multiplication laws, inverses and
//! the zero-divisor classification on C_p.

use hypersde_core::algebra::Algebra;
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = f64> {
    prop_oneof![
        8 => -2.0..2.0f64,
        1 => Just(0.0),
        1 => Just(1.0),
    ]
}

fn test_algebras() -> Vec<Algebra<f64>> {
    vec![
        Algebra::cp(-1.0),
        Algebra::cp(0.0),
        Algebra::cp(1.0),
        Algebra::a34(),
        Algebra::cp(-1.0).direct_product(&Algebra::cp(1.0)),
        Algebra::cp(-1.0).direct_sum(&Algebra::cp(-1.0)),
    ]
}

proptest! {
    #[test]
    fn multiplication_is_commutative_and_associative(values in prop::collection::vec(coeff(), 18)) {
        for alg in test_algebras() {
            let n = alg.dim();
            let u = alg.value(values[..n].to_vec()).unwrap();
            let v = alg.value(values[6..6 + n].to_vec()).unwrap();
            let w = alg.value(values[12..12 + n].to_vec()).unwrap();

            let uv = alg.mul(&u, &v).unwrap();
            let vu = alg.mul(&v, &u).unwrap();
            prop_assert!(uv.max_abs_diff(&vu) <= 1e-12 * (1.0 + uv.norm()));

            let uv_w = alg.mul(&uv, &w).unwrap();
            let u_vw = alg.mul(&u, &alg.mul(&v, &w).unwrap()).unwrap();
            prop_assert!(
                uv_w.max_abs_diff(&u_vw) <= 1e-12 * (1.0 + uv_w.norm()),
                "associativity broke on {}",
                alg.label()
            );
        }
    }

    #[test]
    fn multiplication_is_bilinear(values in prop::collection::vec(coeff(), 18), s in -3.0..3.0f64) {
        for alg in test_algebras() {
            let n = alg.dim();
            let u = alg.value(values[..n].to_vec()).unwrap();
            let v = alg.value(values[6..6 + n].to_vec()).unwrap();
            let w = alg.value(values[12..12 + n].to_vec()).unwrap();

            // (u + s v) w = u w + s (v w)
            let lhs = alg.mul(&u.add(&v.scale(s)), &w).unwrap();
            let rhs = alg.mul(&u, &w).unwrap().add(&alg.mul(&v, &w).unwrap().scale(s));
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-11 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn inverse_roundtrips_on_invertible_elements(values in prop::collection::vec(coeff(), 6)) {
        for alg in test_algebras() {
            let n = alg.dim();
            let u = alg.value(values[..n].to_vec()).unwrap();
            match alg.inv(&u) {
                Ok(inv) => {
                    let product = alg.mul(&u, &inv).unwrap();
                    prop_assert!(product.max_abs_diff(&alg.one()) <= 1e-8);
                    let back = alg.inv(&inv).unwrap();
                    prop_assert!(back.max_abs_diff(&u) <= 1e-10 * (1.0 + u.norm()));
                }
                Err(_) => {
                    // Zero divisors have singular multiplication matrices.
                    let det = alg.mul_det(&u).unwrap();
                    prop_assert!(det.abs() <= 1e-9 * (1.0 + u.norm().powi(n as i32)));
                }
            }
        }
    }

    #[test]
    fn cp_singularity_is_classified_by_the_determinant(x1 in -2.0..2.0f64, x2 in -2.0..2.0f64) {
        // det M(u) = x1^2 - p x2^2: for p < 0 only 0 is singular, for p = 0
        // the line x1 = 0, for p > 0 the cone x1 = +-sqrt(p) x2.
        for p in [-1.0, 0.0, 1.0] {
            let alg = Algebra::cp(p);
            let u = alg.value(vec![x1, x2]).unwrap();
            let det = alg.mul_det(&u).unwrap();
            prop_assert!((det - (x1 * x1 - p * x2 * x2)).abs() <= 1e-12);
            let invertible = alg.inv(&u).is_ok();
            let clearly_regular = det.abs() > 1e-6 * (1.0 + u.norm());
            if clearly_regular {
                prop_assert!(invertible, "p={p}, u=({x1},{x2}), det={det}");
            }
        }
    }

    #[test]
    fn norm_scales_linearly(values in prop::collection::vec(coeff(), 2), s in -4.0..4.0f64) {
        let alg = Algebra::cp(-1.0);
        let u = alg.value(values).unwrap();
        let scaled = u.scale(s);
        prop_assert!((scaled.norm() - s.abs() * u.norm()).abs() <= 1e-12 * (1.0 + u.norm()));
    }
}

#[test]
fn constructions_verify_with_tiny_residuals() {
    for alg in test_algebras() {
        let report = alg.verify();
        assert!(report.pass, "{} failed: {report:?}", alg.label());
        assert!(
            report.max_residual() <= 1e-14,
            "{}: residual {}",
            alg.label(),
            report.max_residual()
        );
    }
}
