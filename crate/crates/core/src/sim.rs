//! Euler-Maruyama integration and strong-convergence studies.
//!
//! The scheme is `X_{k+1} = X_k + a(t_k, X_k) dt + b(t_k, X_k) dW_k` on the
//! shared Wiener grid, so a run at a coarsened level uses exactly the
//! Brownian increments obtained by block-summing the finest level. Studies
//! are bit-reproducible: paths are independent work units keyed by path id
//! and results are reduced in path-id order regardless of worker count.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::paths::{sample_wiener, PathsError, WienerGrid};
use crate::scalar::Scalar;
use crate::solvers::{RealPaths, SdeSystemSpec, SolveError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("state or increment became non-finite at step {step}")]
    NonFinite { step: usize },
    #[error("grid supplies {found} Wiener components, the system needs {expected}")]
    GridMismatch { expected: usize, found: usize },
    #[error("paths have different shapes: {0} vs {1} nodes")]
    ShapeMismatch(usize, usize),
    #[error("initial state has {found} components, the system has {expected}")]
    StateMismatch { expected: usize, found: usize },
    #[error("convergence study needs at least 3 levels, got {0}")]
    TooFewLevels(usize),
    #[error("{excluded} of {total} runs were excluded (non-finite or solver failure), more than 5%")]
    TooManyExclusions { excluded: usize, total: usize },
    #[error(transparent)]
    Paths(#[from] PathsError),
    #[error("closed form failed on path {path_id}: {source}")]
    ClosedForm { path_id: u64, source: SolveError },
}

/// Euler-Maruyama integration of a component system on a Wiener grid.
pub fn euler_maruyama<T: Scalar>(
    system: &SdeSystemSpec<T>,
    x0: &[T],
    grid: &WienerGrid<T>,
) -> Result<RealPaths<T>, SimError> {
    if grid.m() != system.m {
        return Err(SimError::GridMismatch {
            expected: system.m,
            found: grid.m(),
        });
    }
    if x0.len() != system.n {
        return Err(SimError::StateMismatch {
            expected: system.n,
            found: x0.len(),
        });
    }
    let steps = grid.steps();
    let dt = grid.dt();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut x = x0.to_vec();
    times.push(grid.t(0));
    states.push(x.clone());
    let mut next = vec![T::zero(); system.n];
    for k in 0..steps {
        let t = grid.t(k);
        for i in 0..system.n {
            let mut v = x[i] + system.drift_at(i, t, &x) * dt;
            for j in 0..system.m {
                v = v + system.diffusion_at(i, j, t, &x) * grid.increment(j, k);
            }
            if !v.is_finite() {
                return Err(SimError::NonFinite { step: k });
            }
            next[i] = v;
        }
        x.copy_from_slice(&next);
        times.push(grid.t(k + 1));
        states.push(x.clone());
    }
    Ok(RealPaths { times, states })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMode {
    Endpoint,
    Sup,
}

/// Pathwise error between two paths on the same grid: per component either
/// the endpoint absolute difference or the sup over the grid, then the
/// Euclidean norm across components.
pub fn pathwise_error<T: Scalar>(
    exact: &RealPaths<T>,
    approx: &RealPaths<T>,
    mode: ErrorMode,
) -> Result<T, SimError> {
    if exact.states.len() != approx.states.len() {
        return Err(SimError::ShapeMismatch(
            exact.states.len(),
            approx.states.len(),
        ));
    }
    let n = exact.dim();
    if n != approx.dim() {
        return Err(SimError::ShapeMismatch(n, approx.dim()));
    }
    let mut acc = T::zero();
    for i in 0..n {
        let per_component = match mode {
            ErrorMode::Endpoint => (exact.endpoint()[i] - approx.endpoint()[i]).abs(),
            ErrorMode::Sup => exact
                .states
                .iter()
                .zip(&approx.states)
                .fold(T::zero(), |m, (a, b)| m.max((a[i] - b[i]).abs())),
        };
        acc = acc + per_component * per_component;
    }
    Ok(acc.sqrt())
}

/// Result of a strong-convergence study over dyadic grid levels.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStudy<T> {
    /// Steps per level, strictly increasing.
    pub levels: Vec<usize>,
    pub dts: Vec<T>,
    pub rms_errors: Vec<T>,
    /// Least-squares slope of log2(error) against log2(dt).
    pub slope: T,
    pub intercept: T,
    pub n_paths: usize,
    pub seed: u64,
    /// Path/level runs dropped because of non-finite states or closed-form
    /// failures.
    pub excluded: usize,
    pub total_runs: usize,
}

impl<T: Scalar> ConvergenceStudy<T> {
    /// CSV dump with columns `level, dt, rms_error`.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "level,dt,rms_error")?;
        for ((level, dt), err) in self.levels.iter().zip(&self.dts).zip(&self.rms_errors) {
            writeln!(out, "{},{},{}", level, dt, err)?;
        }
        Ok(())
    }
}

/// Runs Euler-Maruyama at `levels` dyadic resolutions (`base_steps`,
/// `2 base_steps`, ...) against a closed-form evaluator, on shared Brownian
/// paths. For each path the finest grid is sampled once and coarsened to
/// every level; the closed form is evaluated on the finest grid and compared
/// at the endpoint. RMS errors are taken across paths per level, and the
/// strong order is the fitted log2-log2 slope.
pub fn convergence_study<T, F>(
    system: &SdeSystemSpec<T>,
    closed_form: F,
    x0: &[T],
    t_horizon: T,
    base_steps: usize,
    levels: usize,
    n_paths: usize,
    seed: u64,
) -> Result<ConvergenceStudy<T>, SimError>
where
    T: Scalar,
    F: Fn(&WienerGrid<T>) -> Result<RealPaths<T>, SolveError> + Sync,
{
    if levels < 3 {
        return Err(SimError::TooFewLevels(levels));
    }
    let finest = base_steps << (levels - 1);
    let steps_per_level: Vec<usize> = (0..levels).map(|l| base_steps << l).collect();

    // Per-path endpoint errors per level; None marks an excluded run.
    let per_path: Vec<Vec<Option<T>>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|path_id| {
            let fine = sample_wiener::<T>(system.m, t_horizon, finest, seed, path_id);
            let exact = match closed_form(&fine) {
                Ok(path) => path,
                Err(_) => return vec![None; levels],
            };
            let exact_end = exact.endpoint().to_vec();
            steps_per_level
                .iter()
                .map(|&steps| {
                    let coarse = fine.coarsen(finest / steps).expect("dyadic levels divide");
                    match euler_maruyama(system, x0, &coarse) {
                        Ok(approx) => {
                            let end = approx.endpoint();
                            let mut acc = T::zero();
                            for i in 0..system.n {
                                let d = exact_end[i] - end[i];
                                acc = acc + d * d;
                            }
                            Some(acc.sqrt())
                        }
                        Err(_) => None,
                    }
                })
                .collect()
        })
        .collect();

    let total_runs = n_paths * levels;
    let mut excluded = 0usize;
    let mut rms_errors = Vec::with_capacity(levels);
    for level in 0..levels {
        let mut sum_sq = T::zero();
        let mut count = 0usize;
        for path in &per_path {
            match path[level] {
                Some(e) => {
                    sum_sq = sum_sq + e * e;
                    count += 1;
                }
                None => excluded += 1,
            }
        }
        let rms = if count > 0 {
            (sum_sq / T::of_usize(count)).sqrt()
        } else {
            T::nan()
        };
        rms_errors.push(rms);
    }
    if excluded * 20 > total_runs {
        return Err(SimError::TooManyExclusions {
            excluded,
            total: total_runs,
        });
    }

    let dts: Vec<T> = steps_per_level
        .iter()
        .map(|&s| t_horizon / T::of_usize(s))
        .collect();
    let (slope, intercept) = fit_log2(&dts, &rms_errors);
    Ok(ConvergenceStudy {
        levels: steps_per_level,
        dts,
        rms_errors,
        slope,
        intercept,
        n_paths,
        seed,
        excluded,
        total_runs,
    })
}

fn fit_log2<T: Scalar>(dts: &[T], errors: &[T]) -> (T, T) {
    let two = T::c(2.0);
    let pts: Vec<(T, T)> = dts
        .iter()
        .zip(errors)
        .filter(|(_, &e)| e.is_finite() && e > T::zero())
        .map(|(&dt, &e)| (dt.ln() / two.ln(), e.ln() / two.ln()))
        .collect();
    if pts.len() < 2 {
        return (T::nan(), T::nan());
    }
    let n = T::of_usize(pts.len());
    let sx = pts.iter().fold(T::zero(), |a, p| a + p.0);
    let sy = pts.iter().fold(T::zero(), |a, p| a + p.1);
    let sxx = pts.iter().fold(T::zero(), |a, p| a + p.0 * p.0);
    let sxy = pts.iter().fold(T::zero(), |a, p| a + p.0 * p.1);
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::solvers::CoeffFn;

    fn scalar_system(
        drift: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        diffusion: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> SdeSystemSpec<f64> {
        SdeSystemSpec {
            n: 1,
            m: 1,
            drift: vec![Box::new(move |t, x| drift(t, x[0]))],
            diffusion: vec![vec![Box::new(move |t, x| diffusion(t, x[0]))]],
            provenance: "test scalar system".into(),
        }
    }

    #[test]
    fn zero_coefficients_keep_the_state_constant() {
        let sys = scalar_system(|_, _| 0.0, |_, _| 0.0);
        let grid = sample_wiener(1, 1.0, 32, 9, 0);
        let path = euler_maruyama(&sys, &[1.5], &grid).unwrap();
        assert!(path.states.iter().all(|s| s[0] == 1.5));
    }

    #[test]
    fn identity_diffusion_reproduces_the_wiener_path() {
        let n = 2;
        let drift: Vec<CoeffFn<f64>> = (0..n).map(|_| {
            Box::new(move |_t: f64, _x: &[f64]| 0.0) as CoeffFn<f64>
        }).collect();
        let diffusion: Vec<Vec<CoeffFn<f64>>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        Box::new(move |_t: f64, _x: &[f64]| if i == j { 1.0 } else { 0.0 })
                            as CoeffFn<f64>
                    })
                    .collect()
            })
            .collect();
        let sys = SdeSystemSpec {
            n,
            m: n,
            drift,
            diffusion,
            provenance: "identity noise".into(),
        };
        let grid = sample_wiener(2, 1.0, 64, 21, 0);
        let path = euler_maruyama(&sys, &[0.0, 0.0], &grid).unwrap();
        for k in 0..=64 {
            for j in 0..2 {
                assert!((path.states[k][j] - grid.w(j, k)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn non_finite_states_are_reported_with_the_step() {
        // Explosive drift with a huge time step blows past f64 range.
        let sys = scalar_system(|_, x| x * x * 1e200, |_, _| 0.0);
        let grid = sample_wiener(1, 1.0, 4, 1, 0);
        let err = euler_maruyama(&sys, &[1e200], &grid).unwrap_err();
        assert!(matches!(err, SimError::NonFinite { .. }));
    }

    #[test]
    fn pathwise_error_modes() {
        let a = RealPaths {
            times: vec![0.0, 0.5, 1.0],
            states: vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]],
        };
        let c = 0.3f64;
        let b = RealPaths {
            times: a.times.clone(),
            states: a
                .states
                .iter()
                .map(|s| s.iter().map(|v| v + c).collect())
                .collect(),
        };
        let sup = pathwise_error(&a, &b, ErrorMode::Sup).unwrap();
        assert!((sup - c * (2.0f64).sqrt()).abs() < 1e-14);
        let sym = pathwise_error(&b, &a, ErrorMode::Sup).unwrap();
        assert_eq!(sup, sym);
        assert_eq!(pathwise_error(&a, &a, ErrorMode::Endpoint).unwrap(), 0.0);
    }

    #[test]
    fn gbm_strong_order_is_about_half() {
        let (b, g) = (1.0, 0.8);
        let sys = scalar_system(move |_, x| b * x, move |_, x| g * x);
        let closed = move |grid: &WienerGrid<f64>| {
            let mut states = Vec::with_capacity(grid.steps() + 1);
            let mut times = Vec::with_capacity(grid.steps() + 1);
            for k in 0..=grid.steps() {
                let t = grid.t(k);
                times.push(t);
                states.push(vec![((b - g * g / 2.0) * t + g * grid.w(0, k)).exp()]);
            }
            Ok(RealPaths { times, states })
        };
        let study =
            convergence_study(&sys, closed, &[1.0], 1.0, 64, 5, 200, 424242).unwrap();
        assert_eq!(study.levels, vec![64, 128, 256, 512, 1024]);
        assert!(
            study.slope > 0.25 && study.slope < 0.75,
            "slope {}",
            study.slope
        );
        assert_eq!(study.excluded, 0);
    }

    #[test]
    fn deterministic_euler_has_order_one() {
        let sys = scalar_system(|t, x| -x + t.sin(), |_, _| 0.0);
        // Reference: very fine Euler is not independent; use the closed form
        // x(t) = (x0 - 1/2) e^-t + (sin t - cos t)/2 for x0 chosen so the
        // particular solution stays O(1).
        let x0 = 2.0;
        let closed = move |grid: &WienerGrid<f64>| {
            let c = x0 + 0.5;
            let mut states = Vec::with_capacity(grid.steps() + 1);
            let mut times = Vec::with_capacity(grid.steps() + 1);
            for k in 0..=grid.steps() {
                let t = grid.t(k);
                times.push(t);
                states.push(vec![c * (-t).exp() + (t.sin() - t.cos()) / 2.0]);
            }
            Ok(RealPaths { times, states })
        };
        let study = convergence_study(&sys, closed, &[x0], 1.0, 32, 5, 8, 7).unwrap();
        assert!(
            study.slope > 0.8 && study.slope < 1.2,
            "slope {}",
            study.slope
        );
    }

    #[test]
    fn study_is_reproducible_for_fixed_seed() {
        let sys = scalar_system(|_, x| 0.5 * x, |_, x| 0.4 * x);
        let closed = |grid: &WienerGrid<f64>| {
            let mut states = Vec::new();
            let mut times = Vec::new();
            for k in 0..=grid.steps() {
                let t = grid.t(k);
                times.push(t);
                states.push(vec![((0.5 - 0.08) * t + 0.4 * grid.w(0, k)).exp()]);
            }
            Ok(RealPaths { times, states })
        };
        let a = convergence_study(&sys, closed, &[1.0], 1.0, 32, 3, 50, 11).unwrap();
        let b = convergence_study(&sys, closed, &[1.0], 1.0, 32, 3, 50, 11).unwrap();
        assert_eq!(a.rms_errors, b.rms_errors);
        assert_eq!(a.slope, b.slope);
    }

    #[test]
    fn study_csv_layout() {
        let study = ConvergenceStudy {
            levels: vec![64, 128],
            dts: vec![1.0 / 64.0, 1.0 / 128.0],
            rms_errors: vec![0.1, 0.07],
            slope: 0.51,
            intercept: -1.0,
            n_paths: 10,
            seed: 1,
            excluded: 0,
            total_runs: 20,
        };
        let mut buf = Vec::new();
        study.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("level,dt,rms_error\n64,"));
    }

    #[test]
    fn exploding_paths_fail_the_study_loudly() {
        // Every path overflows immediately: 100% exclusions is an error, not
        // a silently empty study.
        let sys = scalar_system(|_, x| x * x * 1e160, |_, _| 0.0);
        let closed = |grid: &WienerGrid<f64>| {
            let times: Vec<f64> = (0..=grid.steps()).map(|k| grid.t(k)).collect();
            let states = vec![vec![0.0]; grid.steps() + 1];
            Ok(RealPaths { times, states })
        };
        let err = convergence_study(&sys, closed, &[1e160], 1.0, 8, 3, 10, 1).unwrap_err();
        assert!(matches!(err, SimError::TooManyExclusions { .. }));
    }

    #[test]
    fn expression_backed_system_runs() {
        // Smoke test wiring expr-based coefficients through the simulator.
        let sys = crate::solvers::expand_general_system(
            &crate::algebra::Algebra::cp(-1.0),
            vec![parse("0.2*x1").unwrap(), parse("0.2*x2").unwrap()],
            vec![parse("0.1*x1 - 0.1*x2").unwrap(), parse("0.1*x2 + 0.1*x1").unwrap()],
            2,
        )
        .unwrap();
        let grid = sample_wiener(2, 1.0f64, 64, 3, 0);
        let path = euler_maruyama(&sys, &[1.0, 0.0], &grid).unwrap();
        assert_eq!(path.states.len(), 65);
        assert!(path.states.iter().all(|s| s.iter().all(|v| v.is_finite())));
    }
}
