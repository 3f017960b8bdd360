//! Task implementations. Every task writes its artifacts under the output
//! directory and returns the one-line JSON summary for standard output.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use hypersde_core::algebra::Algebra;
use hypersde_core::paths::{sample_wiener, WienerGrid};
use hypersde_core::reducibility::{
    check_cp_system, check_reducible_scalar, construct_reduction, grid_2d, grid_3d,
};
use hypersde_core::sim::{convergence_study, euler_maruyama, pathwise_error, ErrorMode};
use hypersde_core::solvers::{
    expand_general_system, expand_linear_system, expand_lv_system, solve_linear_base,
    solve_linear_cp, solve_lv_base, solve_lv_cp, RealPaths, SdeSystemSpec, SolveError,
};

use crate::config::{GridSection, RunConfig};
use crate::svg::polyline_chart;
use crate::CliError;

pub struct TaskIo<'a> {
    pub config: &'a RunConfig,
    pub config_dir: &'a Path,
    pub out_dir: PathBuf,
    pub seed_override: Option<u64>,
}

impl TaskIo<'_> {
    fn seed(&self, grid: &GridSection) -> u64 {
        self.seed_override.unwrap_or(grid.seed)
    }

    fn write(&self, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.out_dir)
            .map_err(|e| CliError::config(format!("cannot create output dir: {e}")))?;
        let path = self.out_dir.join(name);
        fs::write(&path, contents)
            .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }

    fn write_json(&self, name: &str, value: &Value) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    fn maybe_chart(
        &self,
        name: &str,
        title: &str,
        series: &[(String, Vec<(f64, f64)>)],
    ) -> Result<Option<PathBuf>, CliError> {
        if !self.config.output.svg {
            return Ok(None);
        }
        Ok(Some(self.write(name, polyline_chart(title, series).as_bytes())?))
    }

    fn maybe_wiener_dump(&self, grid: &WienerGrid<f64>) -> Result<(), CliError> {
        if !self.config.output.wiener {
            return Ok(());
        }
        let mut buf = Vec::new();
        grid.write_csv(&mut buf).expect("in-memory write");
        self.write("wiener_path0.csv", &buf)?;
        Ok(())
    }
}

fn math_err(e: impl std::fmt::Display) -> CliError {
    CliError::math(e.to_string())
}

fn path_series(paths: &RealPaths<f64>) -> Vec<(String, Vec<(f64, f64)>)> {
    (0..paths.dim())
        .map(|i| {
            (
                format!("X{}", i + 1),
                paths
                    .times
                    .iter()
                    .zip(&paths.states)
                    .map(|(&t, s)| (t, s[i]))
                    .collect(),
            )
        })
        .collect()
}

fn csv_bytes(paths: &RealPaths<f64>) -> Vec<u8> {
    let mut buf = Vec::new();
    paths.write_csv(&mut buf).expect("in-memory write");
    buf
}

pub fn verify_algebra(io: &TaskIo) -> Result<Value, CliError> {
    let spec = io
        .config
        .algebra
        .as_ref()
        .ok_or_else(|| CliError::config("verify-algebra needs an `algebra` section".into()))?;
    let algebra = spec.build(io.config_dir)?;
    let report = algebra.verify();
    let report_json = serde_json::to_value(&report).expect("serializable");
    io.write_json("verify_algebra.json", &report_json)?;
    if !report.pass {
        return Err(CliError::validation(format!(
            "algebra `{}` failed verification (max residual {})",
            algebra.label(),
            report.max_residual()
        )));
    }
    Ok(json!({
        "task": "verify-algebra",
        "status": "ok",
        "label": algebra.label(),
        "dim": algebra.dim(),
        "max_residual": report.max_residual(),
        "report": "verify_algebra.json",
    }))
}

/// Builds the expanded system the configured model describes.
fn build_system(
    io: &TaskIo,
    algebra: &Algebra<f64>,
) -> Result<(SdeSystemSpec<f64>, Vec<f64>, String), CliError> {
    let model = io.config.model.as_deref().unwrap_or("linear");
    match model {
        "linear" => {
            let section = io
                .config
                .linear
                .as_ref()
                .ok_or_else(|| CliError::config("model `linear` needs a `linear` section".into()))?;
            let coeffs = section.coeffs()?;
            let system = expand_linear_system(algebra, &coeffs).map_err(math_err)?;
            Ok((system, section.z0.clone(), "linear".into()))
        }
        "lv" => {
            let section = io
                .config
                .lv
                .as_ref()
                .ok_or_else(|| CliError::config("model `lv` needs an `lv` section".into()))?;
            let coeffs = section.coeffs(algebra)?;
            let system = expand_lv_system(algebra, &coeffs).map_err(math_err)?;
            Ok((system, section.z0.clone(), "lv".into()))
        }
        "general" => {
            let section = io.config.general.as_ref().ok_or_else(|| {
                CliError::config("model `general` needs a `general` section".into())
            })?;
            let a = crate::config::parse_all("general.a", &section.a)?;
            let b = crate::config::parse_all("general.b", &section.b)?;
            let system =
                expand_general_system(algebra, a, b, section.m).map_err(math_err)?;
            Ok((system, section.x0.clone(), "general".into()))
        }
        other => Err(CliError::config(format!(
            "unknown model `{other}` (expected linear, lv or general)"
        ))),
    }
}

pub fn expand(io: &TaskIo) -> Result<Value, CliError> {
    let algebra = io.config.require_algebra(io.config_dir)?;
    let (system, x0, model) = build_system(io, &algebra)?;
    // The expansion produces callables; report their values on a small
    // deterministic probe grid so the expansion is inspectable.
    let mut probes = Vec::new();
    for step in 0..3 {
        let t = 0.5 * step as f64;
        let x: Vec<f64> = (0..system.n)
            .map(|i| x0.get(i).copied().unwrap_or(0.0) + 0.25 * step as f64 * (i + 1) as f64)
            .collect();
        let drift: Vec<f64> = (0..system.n).map(|i| system.drift_at(i, t, &x)).collect();
        let diffusion: Vec<Vec<f64>> = (0..system.n)
            .map(|i| (0..system.m).map(|j| system.diffusion_at(i, j, t, &x)).collect())
            .collect();
        probes.push(json!({"t": t, "x": x, "drift": drift, "diffusion": diffusion}));
    }
    let doc = json!({
        "algebra": algebra.label(),
        "model": model,
        "n": system.n,
        "m": system.m,
        "provenance": system.provenance,
        "probes": probes,
    });
    io.write_json("expand.json", &doc)?;
    Ok(json!({
        "task": "expand",
        "status": "ok",
        "n": system.n,
        "m": system.m,
        "provenance": system.provenance,
        "artifact": "expand.json",
    }))
}

/// Closed-form solve on one path per configured path count; writes path 0.
fn solve_closed(io: &TaskIo, task: &str) -> Result<Value, CliError> {
    let algebra = io.config.require_algebra(io.config_dir)?;
    let grid_cfg = io.config.require_grid()?;
    let seed = io.seed(grid_cfg);
    let n = algebra.dim();

    let solve_one = |grid: &WienerGrid<f64>| -> Result<RealPaths<f64>, SolveError> {
        match task {
            "solve-linear" => {
                let section = io.config.linear.as_ref().expect("checked by caller");
                let coeffs = section.coeffs().expect("checked by caller");
                let z0 = algebra.value(section.z0.clone())?;
                solve_linear_base(&algebra, &coeffs, &z0, grid).map(|p| p.to_real())
            }
            _ => {
                let section = io.config.lv.as_ref().expect("checked by caller");
                let coeffs = section.coeffs(&algebra).expect("checked by caller");
                solve_lv_base(&algebra, &coeffs, grid).map(|p| p.to_real())
            }
        }
    };
    // Validate the sections up front so the closures can't panic.
    match task {
        "solve-linear" => {
            let section = io
                .config
                .linear
                .as_ref()
                .ok_or_else(|| CliError::config("solve-linear needs a `linear` section".into()))?;
            section.coeffs()?;
            if section.z0.len() != n {
                return Err(CliError::config(format!(
                    "linear.z0 has {} components, algebra has dimension {n}",
                    section.z0.len()
                )));
            }
        }
        _ => {
            let section = io
                .config
                .lv
                .as_ref()
                .ok_or_else(|| CliError::config("solve-lv needs an `lv` section".into()))?;
            section.coeffs(&algebra)?;
        }
    }

    let mut endpoints = Vec::new();
    let mut first_path: Option<RealPaths<f64>> = None;
    for path_id in 0..grid_cfg.n_paths as u64 {
        let grid = sample_wiener(n, grid_cfg.t_horizon, grid_cfg.steps, seed, path_id);
        let paths = solve_one(&grid).map_err(math_err)?;
        endpoints.push(paths.endpoint().to_vec());
        if path_id == 0 {
            io.maybe_wiener_dump(&grid)?;
            first_path = Some(paths);
        }
    }
    let first_path = first_path.expect("at least one path");
    let mut outputs = vec![];
    if io.config.output.csv {
        io.write("solution_path0.csv", &csv_bytes(&first_path))?;
        outputs.push("solution_path0.csv");
    }
    if io
        .maybe_chart(
            "solution_path0.svg",
            &format!("{task} over {}", algebra.label()),
            &path_series(&first_path),
        )?
        .is_some()
    {
        outputs.push("solution_path0.svg");
    }
    Ok(json!({
        "task": task,
        "status": "ok",
        "algebra": algebra.label(),
        "n_paths": grid_cfg.n_paths,
        "steps": grid_cfg.steps,
        "seed": seed,
        "endpoint_path0": first_path.endpoint(),
        "outputs": outputs,
    }))
}

pub fn solve_linear(io: &TaskIo) -> Result<Value, CliError> {
    solve_closed(io, "solve-linear")
}

pub fn solve_lv(io: &TaskIo) -> Result<Value, CliError> {
    solve_closed(io, "solve-lv")
}

pub fn simulate(io: &TaskIo) -> Result<Value, CliError> {
    let algebra = io.config.require_algebra(io.config_dir)?;
    let grid_cfg = io.config.require_grid()?;
    let seed = io.seed(grid_cfg);
    let (system, x0, model) = build_system(io, &algebra)?;
    if x0.len() != system.n {
        return Err(CliError::config(format!(
            "initial state has {} components, system has {}",
            x0.len(),
            system.n
        )));
    }
    let grid = sample_wiener(system.m, grid_cfg.t_horizon, grid_cfg.steps, seed, 0);
    io.maybe_wiener_dump(&grid)?;
    let path = euler_maruyama(&system, &x0, &grid).map_err(math_err)?;
    let mut outputs = vec![];
    if io.config.output.csv {
        io.write("em_path0.csv", &csv_bytes(&path))?;
        outputs.push("em_path0.csv");
    }
    if io
        .maybe_chart(
            "em_path0.svg",
            &format!("Euler-Maruyama ({model})"),
            &path_series(&path),
        )?
        .is_some()
    {
        outputs.push("em_path0.svg");
    }
    Ok(json!({
        "task": "simulate",
        "status": "ok",
        "model": model,
        "steps": grid_cfg.steps,
        "seed": seed,
        "endpoint": path.endpoint(),
        "outputs": outputs,
    }))
}

pub fn compare(io: &TaskIo) -> Result<Value, CliError> {
    let algebra = io.config.require_algebra(io.config_dir)?;
    let grid_cfg = io.config.require_grid()?;
    let seed = io.seed(grid_cfg);
    let model = io.config.model.as_deref().unwrap_or("linear");
    let (system, x0, _) = build_system(io, &algebra)?;
    let cp_param = io
        .config
        .algebra
        .as_ref()
        .and_then(|spec| spec.cp_parameter());

    let closed = |grid: &WienerGrid<f64>| -> Result<RealPaths<f64>, SolveError> {
        match model {
            "linear" => {
                let section = io.config.linear.as_ref().expect("validated");
                let coeffs = section.coeffs().expect("validated");
                let z0 = algebra.value(section.z0.clone())?;
                solve_linear_base(&algebra, &coeffs, &z0, grid).map(|p| p.to_real())
            }
            _ => {
                let section = io.config.lv.as_ref().expect("validated");
                let coeffs = section.coeffs(&algebra).expect("validated");
                solve_lv_base(&algebra, &coeffs, grid).map(|p| p.to_real())
            }
        }
    };
    // Planar projection cross-check, available when the algebra is C_p.
    let projected = |grid: &WienerGrid<f64>| -> Option<Result<RealPaths<f64>, SolveError>> {
        let p = cp_param?;
        let out = match model {
            "linear" => {
                let section = io.config.linear.as_ref().expect("validated");
                let coeffs = match section.cp_coeffs() {
                    Ok(c) => c,
                    Err(_) => return None,
                };
                solve_linear_cp(p, &coeffs, (section.z0[0], section.z0[1]), grid)
            }
            "lv" => {
                let s = io.config.lv.as_ref().expect("validated");
                solve_lv_cp(
                    p,
                    (s.a[0], s.a[1]),
                    (s.b[0], s.b[1]),
                    (s.g[0], s.g[1]),
                    (s.z0[0], s.z0[1]),
                    grid,
                )
            }
            _ => return None,
        };
        Some(out.map(|(x1, x2)| RealPaths {
            times: (0..=grid.steps()).map(|k| grid.t(k)).collect(),
            states: x1.into_iter().zip(x2).map(|(a, b)| vec![a, b]).collect(),
        }))
    };

    if model == "lv" {
        let s = io
            .config
            .lv
            .as_ref()
            .ok_or_else(|| CliError::config("model `lv` needs an `lv` section".into()))?;
        if cp_param.is_some() && (s.a.len() != 2 || s.z0.len() != 2) {
            return Err(CliError::config("C_p LV coefficients must be pairs".into()));
        }
    }

    let mut rows = vec!["path_id,endpoint_error,sup_error,projection_sup_error".to_string()];
    let mut max_endpoint = 0.0f64;
    let mut max_projection = 0.0f64;
    let mut exact0: Option<RealPaths<f64>> = None;
    let mut em0: Option<RealPaths<f64>> = None;
    for path_id in 0..grid_cfg.n_paths as u64 {
        let grid = sample_wiener(system.m, grid_cfg.t_horizon, grid_cfg.steps, seed, path_id);
        let exact = closed(&grid).map_err(math_err)?;
        let em = euler_maruyama(&system, &x0, &grid).map_err(math_err)?;
        let endpoint = pathwise_error(&exact, &em, ErrorMode::Endpoint).map_err(math_err)?;
        let sup = pathwise_error(&exact, &em, ErrorMode::Sup).map_err(math_err)?;
        max_endpoint = max_endpoint.max(endpoint);
        let proj = match projected(&grid) {
            Some(result) => {
                let proj_paths = result.map_err(math_err)?;
                let sup = pathwise_error(&exact, &proj_paths, ErrorMode::Sup).map_err(math_err)?;
                max_projection = max_projection.max(sup);
                format!("{}", sup)
            }
            None => String::new(),
        };
        rows.push(format!("{path_id},{endpoint},{sup},{proj}"));
        if path_id == 0 {
            exact0 = Some(exact);
            em0 = Some(em);
        }
    }

    let mut outputs = vec![];
    if io.config.output.csv {
        let mut csv = rows.join("\n");
        csv.push('\n');
        io.write("compare.csv", csv.as_bytes())?;
        outputs.push("compare.csv");
        io.write("exact_path0.csv", &csv_bytes(exact0.as_ref().unwrap()))?;
        io.write("em_path0.csv", &csv_bytes(em0.as_ref().unwrap()))?;
        outputs.push("exact_path0.csv");
        outputs.push("em_path0.csv");
    }
    if io.config.output.svg {
        let exact = exact0.as_ref().unwrap();
        let em = em0.as_ref().unwrap();
        let mut series = Vec::new();
        for (name, paths) in [("exact", exact), ("em", em)] {
            for (label, pts) in path_series(paths) {
                series.push((format!("{name} {label}"), pts));
            }
        }
        io.write(
            "compare_path0.svg",
            polyline_chart("closed form vs Euler-Maruyama", &series).as_bytes(),
        )?;
        outputs.push("compare_path0.svg");
    }

    let tol = io.config.tolerances.compare;
    let proj_tol = io.config.tolerances.projection;
    let summary = json!({
        "task": "compare",
        "status": "ok",
        "model": model,
        "algebra": algebra.label(),
        "n_paths": grid_cfg.n_paths,
        "steps": grid_cfg.steps,
        "seed": seed,
        "max_endpoint_error": max_endpoint,
        "max_projection_sup_error": if cp_param.is_some() { Value::from(max_projection) } else { Value::Null },
        "tolerance": tol,
        "outputs": outputs,
    });
    if max_endpoint > tol {
        return Err(CliError::validation(format!(
            "closed form vs Euler-Maruyama endpoint error {max_endpoint} exceeds tolerance {tol}"
        )));
    }
    if cp_param.is_some() && max_projection > proj_tol {
        return Err(CliError::validation(format!(
            "base formula vs planar projection sup error {max_projection} exceeds tolerance {proj_tol}"
        )));
    }
    Ok(summary)
}

pub fn convergence(io: &TaskIo) -> Result<Value, CliError> {
    let algebra = io.config.require_algebra(io.config_dir)?;
    let grid_cfg = io.config.require_grid()?;
    let seed = io.seed(grid_cfg);
    let conv = io
        .config
        .convergence
        .as_ref()
        .ok_or_else(|| CliError::config("convergence needs a `convergence` section".into()))?;
    let model = io.config.model.as_deref().unwrap_or("linear");
    let (system, x0, _) = build_system(io, &algebra)?;

    let closed = |grid: &WienerGrid<f64>| -> Result<RealPaths<f64>, SolveError> {
        match model {
            "linear" => {
                let section = io.config.linear.as_ref().expect("validated");
                let coeffs = section.coeffs().expect("validated");
                let z0 = algebra.value(section.z0.clone())?;
                solve_linear_base(&algebra, &coeffs, &z0, grid).map(|p| p.to_real())
            }
            _ => {
                let section = io.config.lv.as_ref().expect("validated");
                let coeffs = section.coeffs(&algebra).expect("validated");
                solve_lv_base(&algebra, &coeffs, grid).map(|p| p.to_real())
            }
        }
    };

    let study = convergence_study(
        &system,
        closed,
        &x0,
        grid_cfg.t_horizon,
        conv.base_steps,
        conv.levels,
        conv.n_paths,
        seed,
    )
    .map_err(math_err)?;

    let mut outputs = vec![];
    if io.config.output.csv {
        let mut buf = Vec::new();
        study.write_csv(&mut buf).expect("in-memory write");
        io.write("convergence.csv", &buf)?;
        outputs.push("convergence.csv");
    }
    let study_json = serde_json::to_value(&study).expect("serializable");
    io.write_json("convergence.json", &study_json)?;
    outputs.push("convergence.json");
    if io.config.output.svg {
        let pts: Vec<(f64, f64)> = study
            .dts
            .iter()
            .zip(&study.rms_errors)
            .map(|(&dt, &e)| (dt.log2(), e.log2()))
            .collect();
        io.write(
            "convergence.svg",
            polyline_chart("log2 RMS error vs log2 dt", &[("rms".into(), pts)]).as_bytes(),
        )?;
        outputs.push("convergence.svg");
    }

    let summary = json!({
        "task": "convergence",
        "status": "ok",
        "model": model,
        "algebra": algebra.label(),
        "slope": study.slope,
        "levels": study.levels,
        "rms_errors": study.rms_errors,
        "excluded": study.excluded,
        "seed": seed,
        "outputs": outputs,
    });
    if let Some([lo, hi]) = conv.slope_band {
        if !(study.slope >= lo && study.slope <= hi) {
            return Err(CliError::validation(format!(
                "fitted strong order {} outside [{lo}, {hi}]",
                study.slope
            )));
        }
    }
    Ok(summary)
}

pub fn check_reducible(io: &TaskIo) -> Result<Value, CliError> {
    let section = io
        .config
        .scalar
        .as_ref()
        .ok_or_else(|| CliError::config("check-reducible needs a `scalar` section".into()))?;
    let f = crate::config::parse_one("scalar.f", &section.f)?;
    let g = crate::config::parse_one("scalar.g", &section.g)?;
    let samples = grid_2d(
        (section.t_range[0], section.t_range[1]),
        (section.z_range[0], section.z_range[1]),
        section.nt,
        section.nz,
    );
    let tol = io.config.tolerances.reducibility;
    let report = check_reducible_scalar(&f, &g, &samples, tol);
    let mut doc = serde_json::to_value(&report).expect("serializable");

    if let Some(anchor) = section.anchor {
        if report.verdict == hypersde_core::reducibility::Verdict::Reducible {
            let t_samples: Vec<f64> = (0..section.nt)
                .map(|i| {
                    section.t_range[0]
                        + (section.t_range[1] - section.t_range[0]) * i as f64
                            / (section.nt.max(2) - 1) as f64
                })
                .collect();
            let z_samples: Vec<f64> = (0..section.nz)
                .map(|i| {
                    section.z_range[0]
                        + (section.z_range[1] - section.z_range[0]) * i as f64
                            / (section.nz.max(2) - 1) as f64
                })
                .collect();
            let reduction = construct_reduction(&f, &g, &t_samples, &z_samples, anchor, 1e-6)
                .map_err(math_err)?;
            let reduction_json = serde_json::to_value(&reduction).expect("serializable");
            io.write_json("reduction.json", &reduction_json)?;
            doc["reduction"] = Value::String("reduction.json".into());
        }
    }
    io.write_json("reducibility.json", &doc)?;
    Ok(json!({
        "task": "check-reducible",
        "status": "ok",
        "verdict": report.verdict,
        "max_residual": report.max_residual,
        "tolerance": tol,
        "report": "reducibility.json",
    }))
}

pub fn check_cp(io: &TaskIo) -> Result<Value, CliError> {
    let section = io
        .config
        .cp_system
        .as_ref()
        .ok_or_else(|| CliError::config("check-cp needs a `cp_system` section".into()))?;
    let f1 = crate::config::parse_one("cp_system.f1", &section.f1)?;
    let f2 = crate::config::parse_one("cp_system.f2", &section.f2)?;
    let g1 = crate::config::parse_one("cp_system.g1", &section.g1)?;
    let g2 = crate::config::parse_one("cp_system.g2", &section.g2)?;
    let samples = grid_3d(
        (section.t_range[0], section.t_range[1]),
        (section.x_range[0], section.x_range[1]),
        (section.y_range[0], section.y_range[1]),
        section.n,
    );
    let tol = io.config.tolerances.reducibility;
    let report =
        check_cp_system(section.p, &f1, &f2, &g1, &g2, &samples, tol).map_err(math_err)?;
    let doc = serde_json::to_value(&report).expect("serializable");
    io.write_json("cp_reducibility.json", &doc)?;
    Ok(json!({
        "task": "check-cp",
        "status": "ok",
        "p": section.p,
        "verdict": report.verdict,
        "scheffers_pass": report.scheffers_pass,
        "max_residual": report.max_residual,
        "report": "cp_reducibility.json",
    }))
}
