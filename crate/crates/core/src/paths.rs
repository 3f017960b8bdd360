//! Reproducible Wiener path sampling and grid integrals.
//!
//! Increments are drawn from a counter-based generator (Philox4x32-10,
//! Salmon et al. constants) keyed by `(seed, path_id)` with the counter
//! `(step, component)`. Any single increment is recomputable in isolation,
//! so path generation is order-independent: identical inputs give
//! bit-identical grids regardless of thread scheduling.
//!
//! Both integral kinds use the left-point rule on the sampling grid,
//! consistent with the Ito interpretation of the equations and with
//! Euler-Maruyama comparisons.

use std::io::{self, Write};

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum PathsError {
    #[error("coarsening factor {factor} does not divide {steps} steps")]
    IndivisibleFactor { steps: usize, factor: usize },
    #[error("integrand has {found} samples, the grid needs {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("component index {component} out of range for m = {m}")]
    BadComponent { m: usize, component: usize },
}

/// `m` independent standard Wiener paths on a uniform grid of `steps` steps
/// over `[0, t_horizon]`, with their increments.
#[derive(Debug, Clone)]
pub struct WienerGrid<T> {
    m: usize,
    t_horizon: T,
    steps: usize,
    dt: T,
    /// Increments, component-major: `increments[j * steps + k]`.
    increments: Vec<T>,
    /// Cumulative values `W_j(t_k)`, component-major with `steps + 1` nodes.
    w: Vec<T>,
    seed: u64,
    path_id: u64,
}

mod philox {
    //! Philox4x32-10 block cipher used as a counter-based RNG.

    const M0: u32 = 0xD251_1F53;
    const M1: u32 = 0xCD9E_8D57;
    const W0: u32 = 0x9E37_79B9;
    const W1: u32 = 0xBB67_AE85;

    pub fn philox4x32_10(mut ctr: [u32; 4], mut key: [u32; 2]) -> [u32; 4] {
        for _ in 0..10 {
            let p0 = u64::from(M0) * u64::from(ctr[0]);
            let p1 = u64::from(M1) * u64::from(ctr[2]);
            ctr = [
                ((p1 >> 32) as u32) ^ ctr[1] ^ key[0],
                p1 as u32,
                ((p0 >> 32) as u32) ^ ctr[3] ^ key[1],
                p0 as u32,
            ];
            key[0] = key[0].wrapping_add(W0);
            key[1] = key[1].wrapping_add(W1);
        }
        ctr
    }

    /// One standard normal draw per counter block, via Box-Muller on the two
    /// 64-bit halves of the Philox output. The uniform maps into `(0, 1]`.
    pub fn standard_normal(seed: u64, path_id: u64, component: u32, step: u32) -> f64 {
        let ctr = [step, component, path_id as u32, (path_id >> 32) as u32];
        let key = [seed as u32, (seed >> 32) as u32];
        let out = philox4x32_10(ctr, key);
        let a = (u64::from(out[0]) << 32) | u64::from(out[1]);
        let b = (u64::from(out[2]) << 32) | u64::from(out[3]);
        let u1 = ((a >> 11) + 1) as f64 * (1.0 / 9007199254740992.0);
        let u2 = ((b >> 11) + 1) as f64 * (1.0 / 9007199254740992.0);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// Samples `m` independent Wiener components; pure function of
/// `(seed, path_id, m, t_horizon, steps)`.
pub fn sample_wiener<T: Scalar>(
    m: usize,
    t_horizon: T,
    steps: usize,
    seed: u64,
    path_id: u64,
) -> WienerGrid<T> {
    assert!(steps >= 1, "need at least one step");
    assert!(m >= 1, "need at least one component");
    let dt = t_horizon / T::of_usize(steps);
    let sqrt_dt = dt.sqrt();
    let mut increments = Vec::with_capacity(m * steps);
    let mut w = Vec::with_capacity(m * (steps + 1));
    for j in 0..m {
        let mut acc = T::zero();
        w.push(acc);
        for k in 0..steps {
            let z = T::c(philox::standard_normal(seed, path_id, j as u32, k as u32));
            let inc = z * sqrt_dt;
            increments.push(inc);
            acc = acc + inc;
            w.push(acc);
        }
    }
    WienerGrid {
        m,
        t_horizon,
        steps,
        dt,
        increments,
        w,
        seed,
        path_id,
    }
}

impl<T: Scalar> WienerGrid<T> {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn t_horizon(&self) -> T {
        self.t_horizon
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path_id(&self) -> u64 {
        self.path_id
    }

    /// Grid time `t_k = k dt`.
    pub fn t(&self, k: usize) -> T {
        self.dt * T::of_usize(k)
    }

    /// Increment of component `j` over `[t_k, t_{k+1}]`.
    pub fn increment(&self, j: usize, k: usize) -> T {
        self.increments[j * self.steps + k]
    }

    /// Value `W_j(t_k)`.
    pub fn w(&self, j: usize, k: usize) -> T {
        self.w[j * (self.steps + 1) + k]
    }

    /// Restriction to every `factor`-th node. The coarse values are the fine
    /// values at the shared nodes (bit-identical) and the coarse increments
    /// are their consecutive differences, so nested coarsenings compose.
    pub fn coarsen(&self, factor: usize) -> Result<WienerGrid<T>, PathsError> {
        if factor == 0 || self.steps % factor != 0 {
            return Err(PathsError::IndivisibleFactor {
                steps: self.steps,
                factor,
            });
        }
        if factor == 1 {
            return Ok(self.clone());
        }
        let steps = self.steps / factor;
        let dt = self.t_horizon / T::of_usize(steps);
        let mut increments = Vec::with_capacity(self.m * steps);
        let mut w = Vec::with_capacity(self.m * (steps + 1));
        for j in 0..self.m {
            w.push(self.w(j, 0));
            for k in 0..steps {
                let lo = self.w(j, k * factor);
                let hi = self.w(j, (k + 1) * factor);
                increments.push(hi - lo);
                w.push(hi);
            }
        }
        Ok(WienerGrid {
            m: self.m,
            t_horizon: self.t_horizon,
            steps,
            dt,
            increments,
            w,
            seed: self.seed,
            path_id: self.path_id,
        })
    }

    /// CSV dump with columns `t, W1..Wm`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        write!(out, "t")?;
        for j in 1..=self.m {
            write!(out, ",W{}", j)?;
        }
        writeln!(out)?;
        for k in 0..=self.steps {
            write!(out, "{}", self.t(k))?;
            for j in 0..self.m {
                write!(out, ",{}", self.w(j, k))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Cumulative Ito integral of a sampled integrand against component `j`:
/// left-point sums `I(t_{k+1}) = I(t_k) + f(t_k) dW_j(t_k)`. The integrand
/// must be sampled at every grid node (`steps + 1` values).
pub fn ito_integral<T: Scalar>(
    samples: &[T],
    grid: &WienerGrid<T>,
    component: usize,
) -> Result<Vec<T>, PathsError> {
    if component >= grid.m {
        return Err(PathsError::BadComponent {
            m: grid.m,
            component,
        });
    }
    if samples.len() != grid.steps + 1 {
        return Err(PathsError::LengthMismatch {
            expected: grid.steps + 1,
            found: samples.len(),
        });
    }
    let mut out = Vec::with_capacity(grid.steps + 1);
    let mut acc = T::zero();
    out.push(acc);
    for k in 0..grid.steps {
        acc = acc + samples[k] * grid.increment(component, k);
        out.push(acc);
    }
    Ok(out)
}

/// Cumulative Lebesgue integral with the same left-point convention:
/// `L(t_{k+1}) = L(t_k) + f(t_k) dt`.
pub fn lebesgue_integral<T: Scalar>(
    samples: &[T],
    grid: &WienerGrid<T>,
) -> Result<Vec<T>, PathsError> {
    if samples.len() != grid.steps + 1 {
        return Err(PathsError::LengthMismatch {
            expected: grid.steps + 1,
            found: samples.len(),
        });
    }
    let mut out = Vec::with_capacity(grid.steps + 1);
    let mut acc = T::zero();
    out.push(acc);
    for k in 0..grid.steps {
        acc = acc + samples[k] * grid.dt;
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_start_at_zero_and_accumulate_increments() {
        let g: WienerGrid<f64> = sample_wiener(3, 2.0, 16, 7, 0);
        for j in 0..3 {
            assert_eq!(g.w(j, 0), 0.0);
            let total: f64 = (0..16).map(|k| g.increment(j, k)).sum();
            assert!((total - g.w(j, 16)).abs() < 1e-14);
        }
    }

    #[test]
    fn identical_inputs_give_bit_identical_grids() {
        let a: WienerGrid<f64> = sample_wiener(2, 1.0, 64, 42, 3);
        let b: WienerGrid<f64> = sample_wiener(2, 1.0, 64, 42, 3);
        assert_eq!(a.increments, b.increments);
        assert_eq!(a.w, b.w);
    }

    #[test]
    fn different_path_ids_decorrelate() {
        let a: WienerGrid<f64> = sample_wiener(1, 1.0, 8, 42, 0);
        let b: WienerGrid<f64> = sample_wiener(1, 1.0, 8, 42, 1);
        assert_ne!(a.increments, b.increments);
    }

    #[test]
    fn terminal_variance_is_near_one() {
        // 10^4 single-step paths of W(1); the 99% chi-square band for the
        // sample variance of 10^4 standard normals is well inside [0.94, 1.06].
        let n = 10_000;
        let values: Vec<f64> = (0..n)
            .map(|pid| sample_wiener::<f64>(1, 1.0, 1, 2024, pid).w(0, 1))
            .collect();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!(var > 0.94 && var < 1.06, "sample variance {var}");
        assert!(mean.abs() < 0.05, "sample mean {mean}");
    }

    #[test]
    fn coarsen_restricts_the_same_path() {
        let g: WienerGrid<f64> = sample_wiener(2, 1.0, 64, 5, 9);
        let c = g.coarsen(4).unwrap();
        assert_eq!(c.steps(), 16);
        for j in 0..2 {
            for k in 0..=16 {
                assert_eq!(c.w(j, k), g.w(j, 4 * k));
            }
        }
        // Coarsening by the full step count leaves the single increment W(T).
        let all = g.coarsen(64).unwrap();
        assert_eq!(all.steps(), 1);
        assert_eq!(all.increment(0, 0), g.w(0, 64));
    }

    #[test]
    fn coarsen_composes_and_is_identity_at_factor_one() {
        let g: WienerGrid<f64> = sample_wiener(1, 1.0, 32, 11, 2);
        let id = g.coarsen(1).unwrap();
        assert_eq!(id.increments, g.increments);
        let ab = g.coarsen(2).unwrap().coarsen(2).unwrap();
        let c = g.coarsen(4).unwrap();
        assert_eq!(ab.increments, c.increments);
        assert_eq!(ab.w, c.w);
    }

    #[test]
    fn coarsen_rejects_non_divisors() {
        let g: WienerGrid<f64> = sample_wiener(1, 1.0, 10, 1, 0);
        assert_eq!(
            g.coarsen(3).unwrap_err(),
            PathsError::IndivisibleFactor {
                steps: 10,
                factor: 3
            }
        );
    }

    #[test]
    fn ito_integral_of_one_is_the_path() {
        let g: WienerGrid<f64> = sample_wiener(2, 1.0, 32, 3, 1);
        let ones = vec![1.0; 33];
        let integral = ito_integral(&ones, &g, 1).unwrap();
        for k in 0..=32 {
            assert!((integral[k] - g.w(1, k)).abs() < 1e-15);
        }
        // Linearity in a constant integrand.
        let threes = vec![3.0; 33];
        let scaled = ito_integral(&threes, &g, 1).unwrap();
        for k in 0..=32 {
            assert!((scaled[k] - 3.0 * g.w(1, k)).abs() < 1e-13);
        }
    }

    #[test]
    fn lebesgue_integral_of_one_is_time() {
        let g: WienerGrid<f64> = sample_wiener(1, 1.0, 16, 3, 1);
        let ones = vec![1.0; 17];
        let integral = lebesgue_integral(&ones, &g).unwrap();
        for k in 0..=16 {
            assert!((integral[k] - g.t(k)).abs() < 1e-14);
        }
    }

    #[test]
    fn lebesgue_left_rule_on_identity_integrand() {
        let steps = 1 << 16;
        let g: WienerGrid<f64> = sample_wiener(1, 1.0, steps, 3, 1);
        let samples: Vec<f64> = (0..=steps).map(|k| g.t(k)).collect();
        let integral = lebesgue_integral(&samples, &g).unwrap();
        assert!((integral[steps] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn length_mismatch_is_reported() {
        let g: WienerGrid<f64> = sample_wiener(1, 1.0, 8, 1, 0);
        assert!(matches!(
            ito_integral(&[0.0; 4], &g, 0),
            Err(PathsError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn ito_identity_for_w_dw() {
        // int_0^T W dW = (W(T)^2 - T)/2; with left sums the difference is
        // (T - sum dW^2)/2, which concentrates tightly at fine grids.
        let steps = 1 << 16;
        let mut hits = 0;
        let total = 200;
        for pid in 0..total {
            let g: WienerGrid<f64> = sample_wiener(1, 1.0, steps, 99, pid);
            let samples: Vec<f64> = (0..=steps).map(|k| g.w(0, k)).collect();
            let integral = ito_integral(&samples, &g, 0).unwrap();
            let oracle = (g.w(0, steps).powi(2) - 1.0) / 2.0;
            if (integral[steps] - oracle).abs() < 0.05 {
                hits += 1;
            }
        }
        assert!(hits >= 190, "only {hits}/{total} paths within band");
    }

    #[test]
    fn csv_dump_has_expected_shape() {
        let g: WienerGrid<f64> = sample_wiener(2, 1.0, 4, 1, 0);
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,W1,W2");
        assert_eq!(lines.count(), 5);
    }
}
