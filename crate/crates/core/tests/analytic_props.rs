//! Property tests for the hypercomplex elementary functions and the
//! Scheffers checker.

use hypersde_core::algebra::Algebra;
use hypersde_core::analytic::{
    cosp_sinp, hc_cos_sin_a34, hc_exp, hc_exp_series, hc_ln, hc_pow, scheffers_check,
};
use hypersde_core::expr::{parse, Env, ExprAst};
use proptest::prelude::*;

fn builtins() -> Vec<Algebra<f64>> {
    vec![
        Algebra::cp(-1.0),
        Algebra::cp(0.0),
        Algebra::cp(1.0),
        Algebra::a34(),
    ]
}

proptest! {
    #[test]
    fn exp_is_a_homomorphism(values in prop::collection::vec(-1.2..1.2f64, 6)) {
        for alg in builtins() {
            let n = alg.dim();
            let z1 = alg.value(values[..n].to_vec()).unwrap();
            let z2 = alg.value(values[3..3 + n].to_vec()).unwrap();
            let lhs = hc_exp(&alg, &z1.add(&z2), 1e-16).unwrap();
            let rhs = alg
                .mul(&hc_exp(&alg, &z1, 1e-16).unwrap(), &hc_exp(&alg, &z2, 1e-16).unwrap())
                .unwrap();
            prop_assert!(
                lhs.max_abs_diff(&rhs) <= 1e-10 * (1.0 + lhs.norm()),
                "{}: {lhs} vs {rhs}",
                alg.label()
            );
        }
    }

    #[test]
    fn closed_form_exp_equals_series(values in prop::collection::vec(-1.5..1.5f64, 3)) {
        for alg in builtins() {
            let n = alg.dim();
            let z = alg.value(values[..n].to_vec()).unwrap();
            let closed = hc_exp(&alg, &z, 1e-16).unwrap();
            let series = hc_exp_series(&alg, &z, 1e-16).unwrap();
            prop_assert!(closed.max_abs_diff(&series) <= 1e-10 * (1.0 + closed.norm()));
        }
    }

    #[test]
    fn exp_ln_roundtrip(values in prop::collection::vec(-1.4..1.4f64, 3)) {
        for alg in builtins() {
            let n = alg.dim();
            let w = alg.value(values[..n].to_vec()).unwrap();
            let z = hc_exp(&alg, &w, 1e-16).unwrap();
            let back = hc_ln(&alg, &z).unwrap();
            prop_assert!(
                back.max_abs_diff(&w) <= 1e-10 * (1.0 + w.norm()),
                "{}: ln(exp({w})) = {back}",
                alg.label()
            );
        }
    }

    #[test]
    fn pythagorean_identity(y in -3.0..3.0f64) {
        for p in [-1.0, 0.0, 1.0] {
            let (c, s) = cosp_sinp(p, y);
            prop_assert!((c * c - p * s * s - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn a34_cos_sin_identity(values in prop::collection::vec(-2.0..2.0f64, 3)) {
        let alg = Algebra::a34();
        let z = alg.value(values).unwrap();
        let (c, s) = hc_cos_sin_a34(&alg, &z).unwrap();
        let sum = alg.mul(&c, &c).unwrap().add(&alg.mul(&s, &s).unwrap());
        prop_assert!(sum.max_abs_diff(&alg.one()) <= 1e-10);
    }

    #[test]
    fn pow_composes_with_integer_squaring(first in 1.5..2.5f64, rest in prop::collection::vec(-0.9..0.9f64, 2)) {
        // z^2 computed by hc_pow equals the direct product. The generator
        // keeps z inside every principal ln domain: x1 dominates |x2| (the
        // C_p p > 0 wedge) and stays positive (dual numbers, A3_4).
        for alg in builtins() {
            let n = alg.dim();
            let mut coeffs = vec![first];
            coeffs.extend_from_slice(&rest[..n - 1]);
            let z = alg.value(coeffs).unwrap();
            let via_pow = hc_pow(&alg, &z, 2.0).unwrap();
            let direct = alg.mul(&z, &z).unwrap();
            prop_assert!(via_pow.max_abs_diff(&direct) <= 1e-9 * (1.0 + direct.norm()));
        }
    }
}

/// z^2 component tuples per algebra, as expression strings.
fn square_components(alg: &Algebra<f64>) -> Vec<ExprAst> {
    let texts: Vec<String> = match alg.dim() {
        2 => {
            let p = alg.gamma(1, 1, 0);
            vec![format!("x1^2 + {p}*x2^2"), "2*x1*x2".into()]
        }
        _ => vec![
            "x1^2".into(),
            "2*x1*x2".into(),
            "2*x1*x3 + x2^2".into(),
        ],
    };
    texts.iter().map(|t| parse(t).unwrap()).collect()
}

fn sample_envs(n: usize) -> Vec<Env<f64>> {
    let axis = [-1.3, -0.4, 0.5, 1.1];
    let mut envs = Vec::new();
    match n {
        2 => {
            for &a in &axis {
                for &b in &axis {
                    envs.push(Env::new(0.0, vec![a, b]));
                }
            }
        }
        _ => {
            for &a in &axis {
                for &b in &axis[..2] {
                    for &c in &axis[..2] {
                        envs.push(Env::new(0.0, vec![a, b, c]));
                    }
                }
            }
        }
    }
    envs
}

#[test]
fn analytic_squares_satisfy_scheffers_everywhere() {
    for alg in builtins() {
        let components = square_components(&alg);
        let samples = sample_envs(alg.dim());
        let report = scheffers_check(&alg, &components, &samples, 1e-11).unwrap();
        assert!(
            report.pass,
            "{}: residual {} at {:?} (eq {:?})",
            alg.label(),
            report.max_residual,
            report.worst_point,
            report.worst_indices
        );
    }
}

#[test]
fn a34_cos_sin_match_their_power_series() {
    // Independent oracle: sum the cosine/sine power series with algebra
    // products (they terminate quickly thanks to the nilpotent part).
    let alg = Algebra::a34();
    for coeffs in [[0.7, -0.4, 0.9], [0.0, 1.3, -0.2], [-1.1, 0.5, 0.3]] {
        let z = alg.value(coeffs.to_vec()).unwrap();
        let z2 = alg.mul(&z, &z).unwrap();
        let mut cos_acc = alg.one();
        let mut sin_acc = z.clone();
        let mut even_term = alg.one(); // z^(2m) / (2m)!
        let mut odd_term = z.clone(); // z^(2m+1) / (2m+1)!
        for m in 1..40 {
            let f = 2.0 * m as f64;
            even_term = alg.mul(&even_term, &z2).unwrap().scale(1.0 / (f * (f - 1.0)));
            odd_term = alg.mul(&odd_term, &z2).unwrap().scale(1.0 / (f * (f + 1.0)));
            let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
            cos_acc = cos_acc.add(&even_term.scale(sign));
            sin_acc = sin_acc.add(&odd_term.scale(sign));
        }
        let (c, s) = hc_cos_sin_a34(&alg, &z).unwrap();
        assert!(
            c.max_abs_diff(&cos_acc) < 1e-12,
            "cos mismatch at {coeffs:?}: {c} vs {cos_acc}"
        );
        assert!(
            s.max_abs_diff(&sin_acc) < 1e-12,
            "sin mismatch at {coeffs:?}: {s} vs {sin_acc}"
        );
    }
}

#[test]
fn runaway_series_reports_non_convergence() {
    // On a general (product) algebra the exponential falls back to the
    // series; a norm far beyond the term cap must fail loudly.
    let alg = Algebra::cp(-1.0).direct_product(&Algebra::cp(1.0));
    let z = alg.value(vec![500.0, 0.0, 0.0, 0.0]).unwrap();
    assert!(matches!(
        hc_exp(&alg, &z, 1e-16),
        Err(hypersde_core::analytic::AnalyticError::NoConvergence { .. })
    ));
}

#[test]
fn single_precision_instantiation_works() {
    // The whole stack is generic over the scalar; f32 must at least agree to
    // single precision.
    let alg32 = Algebra::<f32>::cp(-1.0f32);
    assert!(alg32.verify().pass);
    let z = alg32.value(vec![0.3f32, -0.7]).unwrap();
    let e32 = hc_exp(&alg32, &z, 1e-7f32).unwrap();
    let alg64 = Algebra::<f64>::cp(-1.0);
    let e64 = hc_exp(
        &alg64,
        &alg64.value(vec![0.3, -0.7]).unwrap(),
        1e-16,
    )
    .unwrap();
    for i in 0..2 {
        assert!((e32.coeffs()[i] as f64 - e64.coeffs()[i]).abs() < 1e-6);
    }
}

#[test]
fn single_sample_violation_fails_the_check() {
    // Components of conj(z) on the complex numbers violate Cauchy-Riemann at
    // every point; one sample is enough to fail.
    let alg = Algebra::cp(-1.0);
    let comps = [parse("x1").unwrap(), parse("-x2").unwrap()];
    let samples = vec![Env::new(0.0, vec![0.3, 0.4])];
    let report = scheffers_check(&alg, &comps, &samples, 1e-11).unwrap();
    assert!(!report.pass);
    assert!(report.max_residual >= 1.0);
}
