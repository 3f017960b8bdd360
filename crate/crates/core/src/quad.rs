//! Deterministic quadrature for smooth integrands (composite Simpson).

use crate::scalar::Scalar;

/// Composite Simpson rule on `[a, b]` with `panels` subdivisions (rounded up
/// to even). Handles reversed limits with the usual sign convention.
pub(crate) fn simpson<T: Scalar, E>(
    mut f: impl FnMut(T) -> Result<T, E>,
    a: T,
    b: T,
    panels: usize,
) -> Result<T, E> {
    if a == b {
        return Ok(T::zero());
    }
    let n = panels.max(2) + panels % 2;
    let h = (b - a) / T::of_usize(n);
    let mut acc = f(a)? + f(b)?;
    for k in 1..n {
        let t = a + h * T::of_usize(k);
        let w = if k % 2 == 1 { T::c(4.0) } else { T::c(2.0) };
        acc = acc + w * f(t)?;
    }
    Ok(acc * h / T::c(3.0))
}
