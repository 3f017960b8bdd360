//! Property tests for the expression DSL: print/parse round-trip and
//! jet-derivative agreement with finite differences.

use hypersde_core::expr::{eval, eval_taylor2, parse, Env, ExprAst, VarId};
use proptest::prelude::*;

/// Random expression trees over t, x1, x2. Literals are kept non-negative
/// (negative constants print as unary minus applied to a literal) and
/// divisions/calls are built so that evaluation stays in-domain on the test
/// box.
fn arb_expr() -> impl Strategy<Value = ExprAst> {
    let leaf = prop_oneof![
        (0u8..100).prop_map(|v| ExprAst::num(v as f64 / 8.0)),
        Just(ExprAst::var(VarId::T)),
        Just(ExprAst::var(VarId::X(1))),
        Just(ExprAst::var(VarId::X(2))),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| combine("+", a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| combine("-", a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| combine("*", a, b)),
            inner.clone().prop_map(|a| wrap("sin", a)),
            inner.clone().prop_map(|a| wrap("cos", a)),
            inner.clone().prop_map(neg),
            // Division by a positive-definite expression keeps eval total.
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| parse(&format!("({a})/(({b})^2+1)")).unwrap()),
            inner
                .clone()
                .prop_map(|a| parse(&format!("exp(({a})/8)")).unwrap()),
            (inner.clone(), 1u8..4).prop_map(|(a, k)| parse(&format!("({a})^{k}")).unwrap()),
        ]
    })
}

fn combine(op: &str, a: ExprAst, b: ExprAst) -> ExprAst {
    parse(&format!("({a}){op}({b})")).unwrap()
}

fn wrap(func: &str, a: ExprAst) -> ExprAst {
    parse(&format!("{func}({a})")).unwrap()
}

fn neg(a: ExprAst) -> ExprAst {
    parse(&format!("-({a})")).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn print_parse_roundtrip_is_identity(ast in arb_expr()) {
        let printed = ast.to_string();
        let reparsed = parse(&printed).unwrap_or_else(|e| panic!("{printed}: {e}"));
        prop_assert_eq!(&reparsed, &ast, "printed: {}", printed);
        // And printing is a fixed point after one round.
        prop_assert_eq!(reparsed.to_string(), printed);
    }

    #[test]
    fn gradient_matches_central_differences(ast in arb_expr(), t in -0.9..0.9f64, x1 in -0.9..0.9f64, x2 in -0.9..0.9f64) {
        let env = Env::new(t, vec![x1, x2]);
        let vars = [VarId::T, VarId::X(1), VarId::X(2)];
        let jet = match eval_taylor2(&ast, &env, &vars) {
            Ok(j) => j,
            Err(_) => return Ok(()), // domain edge (e.g. 0^-1 inside a power)
        };
        // Random deep products can overflow; differencing infinities tells
        // us nothing, so restrict the oracle to finite samples.
        let finite = jet.value.is_finite()
            && jet.grad.iter().all(|g| g.is_finite())
            && jet.hess.iter().flatten().all(|h| h.is_finite());
        if !finite {
            return Ok(());
        }
        let h = 1e-5;
        for (slot, var) in vars.iter().enumerate() {
            let shift = |delta: f64| {
                let mut e = Env::new(t, vec![x1, x2]);
                match var {
                    VarId::T => e.t += delta,
                    VarId::X(i) => e.x[*i as usize - 1] += delta,
                }
                eval(&ast, &e)
            };
            let (plus, minus) = match (shift(h), shift(-h)) {
                (Ok(p), Ok(m)) if p.is_finite() && m.is_finite() => (p, m),
                _ => return Ok(()),
            };
            let fd = (plus - minus) / (2.0 * h);
            let scale = 1.0 + jet.grad[slot].abs().max(fd.abs());
            prop_assert!(
                (jet.grad[slot] - fd).abs() <= 1e-6 * scale,
                "d/d{var} of {ast}: jet {} vs fd {fd}",
                jet.grad[slot]
            );
            // Diagonal second derivative against the second difference. The
            // oracle's own rounding floor is eps |f| / h^2 (three-term
            // cancellation), which dominates for large function values.
            let center = eval(&ast, &env).unwrap();
            let fd2 = (plus - 2.0 * center + minus) / (h * h);
            let scale2 = 1.0 + jet.hess[slot][slot].abs().max(fd2.abs());
            let noise_floor = 4.0 * f64::EPSILON * center.abs() / (h * h);
            prop_assert!(
                (jet.hess[slot][slot] - fd2).abs() <= 1e-4 * scale2 + noise_floor,
                "d2/d{var}2 of {ast}: jet {} vs fd {fd2}",
                jet.hess[slot][slot]
            );
        }
    }
}

#[test]
fn mixed_partials_match_finite_differences_on_corpus() {
    let corpus = [
        "x1*x2",
        "sin(x1*x2)+t",
        "exp(x1/4)*cos(x2)",
        "(x1+2)/(x2^2+1)",
        "x1^3 - 2*x1*x2 + x2^2",
        "sqrt(x1+3)*x2",
    ];
    let env = Env::new(0.4, vec![0.7, -0.6]);
    let vars = [VarId::X(1), VarId::X(2)];
    let h = 1e-4;
    for text in corpus {
        let ast = parse(text).unwrap();
        let jet = eval_taylor2(&ast, &env, &vars).unwrap();
        let at = |dx: f64, dy: f64| {
            eval(&ast, &Env::new(0.4, vec![0.7 + dx, -0.6 + dy])).unwrap()
        };
        let fd = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
        assert!(
            (jet.hess[0][1] - fd).abs() <= 1e-4 * (1.0 + fd.abs()),
            "{text}: jet {} vs fd {fd}",
            jet.hess[0][1]
        );
    }
}
