//! The README usage example, kept compiling.

use hypersde_core::{algebra::Algebra, analytic, paths, solvers};

fn main() {
    let alg = Algebra::cp(-1.0); // the complex numbers
    assert!(alg.verify().pass);

    // exp(i pi) = -1, through the generalized cos_p/sin_p split.
    let z = alg.value(vec![0.0, std::f64::consts::PI]).unwrap();
    let e = analytic::hc_exp(&alg, &z, 1e-15).unwrap();
    assert!((e.coeffs()[0] + 1.0).abs() < 1e-12);

    // Solve dZ = (b Z - a Z^2) dt + G Z dW on one sampled Wiener path.
    let coeffs = solvers::LvCoeffs {
        a: alg.value(vec![0.5, 0.1]).unwrap(),
        b: alg.value(vec![1.0, 0.2]).unwrap(),
        g: alg.value(vec![0.3, 0.1]).unwrap(),
        z0: alg.value(vec![1.0, 0.5]).unwrap(),
    };
    let grid = paths::sample_wiener(2, 1.0, 1 << 10, 42, 0);
    let path = solvers::solve_lv_base(&alg, &coeffs, &grid).unwrap();
    println!("Z(1) = {}", path.states.last().unwrap());
}
