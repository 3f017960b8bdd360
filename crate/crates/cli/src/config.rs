//! JSON run configuration: a single document drives every task. Expressions
//! are strings in the coefficient grammar, so configs stay diffable and
//! seedable.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use hypersde_core::algebra::Algebra;
use hypersde_core::expr::{parse, ExprAst};
use hypersde_core::solvers::{CpLinearCoeffs, LinearBaseCoeffs, LvCoeffs};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional echo of the task; when present it must match the subcommand.
    pub task: Option<String>,
    pub algebra: Option<AlgebraSpec>,
    /// Which closed-form model `expand`/`simulate`/`compare`/`convergence`
    /// use: "linear", "lv" or "general" (expand/simulate only).
    pub model: Option<String>,
    pub linear: Option<LinearSection>,
    pub lv: Option<LvSection>,
    pub general: Option<GeneralSection>,
    pub scalar: Option<ScalarSection>,
    pub cp_system: Option<CpSystemSection>,
    pub grid: Option<GridSection>,
    pub convergence: Option<ConvergenceSection>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSection,
    pub workers: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgebraSpec {
    /// Generalized complex numbers with `i^2 = p`.
    Cp { p: f64 },
    /// The 3-dimensional algebra 1, i, j with i^2 = j, ij = j^2 = 0.
    A34,
    /// The reals.
    Reals,
    /// Explicit structure table, inline or from a JSON file.
    Table {
        file: Option<PathBuf>,
        dim: Option<usize>,
        gamma: Option<Vec<Vec<Vec<f64>>>>,
        identity: Option<Vec<f64>>,
        label: Option<String>,
    },
    Product { factors: Vec<AlgebraSpec> },
    Sum { factors: Vec<AlgebraSpec> },
}

impl AlgebraSpec {
    pub fn build(&self, config_dir: &Path) -> Result<Algebra<f64>, CliError> {
        match self {
            AlgebraSpec::Cp { p } => Ok(Algebra::cp(*p)),
            AlgebraSpec::A34 => Ok(Algebra::a34()),
            AlgebraSpec::Reals => Ok(Algebra::reals()),
            AlgebraSpec::Table {
                file,
                dim,
                gamma,
                identity,
                label,
            } => {
                if let Some(file) = file {
                    let path = if file.is_absolute() {
                        file.clone()
                    } else {
                        config_dir.join(file)
                    };
                    let doc = std::fs::read_to_string(&path).map_err(|e| {
                        CliError::config(format!("cannot read table file {}: {e}", path.display()))
                    })?;
                    return Algebra::from_json(&doc).map_err(table_error);
                }
                let (dim, gamma) = match (dim, gamma) {
                    (Some(d), Some(g)) => (*d, g),
                    _ => {
                        return Err(CliError::config(
                            "inline table needs both `dim` and `gamma`".into(),
                        ))
                    }
                };
                let mut flat = Vec::with_capacity(dim * dim * dim);
                for plane in gamma {
                    for row in plane {
                        flat.extend_from_slice(row);
                    }
                }
                Algebra::from_table(
                    dim,
                    flat,
                    identity.clone(),
                    label.clone().unwrap_or_else(|| format!("table({dim}d)")),
                )
                .map_err(table_error)
            }
            AlgebraSpec::Product { factors } => {
                combine(factors, config_dir, |a, b| a.direct_product(b))
            }
            AlgebraSpec::Sum { factors } => combine(factors, config_dir, |a, b| a.direct_sum(b)),
        }
    }

    /// The parameter `p` when this is (syntactically) a `C_p` algebra; the
    /// planar cross-check solvers only run in that case.
    pub fn cp_parameter(&self) -> Option<f64> {
        match self {
            AlgebraSpec::Cp { p } => Some(*p),
            _ => None,
        }
    }
}

/// A table that fails its axioms is a verification outcome (exit 3), not a
/// malformed config; shape and IO problems stay config errors.
fn table_error(e: hypersde_core::AlgebraError) -> CliError {
    use hypersde_core::AlgebraError::*;
    match e {
        AxiomViolation { .. } | NoIdentity { .. } => {
            CliError::validation(format!("algebra table rejected: {e}"))
        }
        other => CliError::config(format!("algebra table: {other}")),
    }
}

fn combine(
    factors: &[AlgebraSpec],
    config_dir: &Path,
    op: impl Fn(&Algebra<f64>, &Algebra<f64>) -> Algebra<f64>,
) -> Result<Algebra<f64>, CliError> {
    if factors.len() < 2 {
        return Err(CliError::config(
            "product/sum needs at least two factors".into(),
        ));
    }
    let mut acc = factors[0].build(config_dir)?;
    for f in &factors[1..] {
        acc = op(&acc, &f.build(config_dir)?);
    }
    Ok(acc)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSection {
    pub f1: Vec<String>,
    pub f2: Vec<String>,
    pub g1: Vec<String>,
    pub g2: Vec<String>,
    pub z0: Vec<f64>,
}

impl LinearSection {
    pub fn coeffs(&self) -> Result<LinearBaseCoeffs, CliError> {
        Ok(LinearBaseCoeffs {
            f1: parse_all("linear.f1", &self.f1)?,
            f2: parse_all("linear.f2", &self.f2)?,
            g1: parse_all("linear.g1", &self.g1)?,
            g2: parse_all("linear.g2", &self.g2)?,
        })
    }

    /// The eight component expressions in planar order, for the `C_p`
    /// cross-check solver. Only valid when the dimension is 2.
    pub fn cp_coeffs(&self) -> Result<CpLinearCoeffs, CliError> {
        let c = self.coeffs()?;
        if c.f1.len() != 2 {
            return Err(CliError::config(
                "planar cross-check needs 2-component coefficients".into(),
            ));
        }
        Ok(CpLinearCoeffs {
            f11: c.f1[0].clone(),
            f12: c.f1[1].clone(),
            f21: c.f2[0].clone(),
            f22: c.f2[1].clone(),
            g11: c.g1[0].clone(),
            g12: c.g1[1].clone(),
            g21: c.g2[0].clone(),
            g22: c.g2[1].clone(),
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LvSection {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub g: Vec<f64>,
    pub z0: Vec<f64>,
}

impl LvSection {
    pub fn coeffs(&self, alg: &Algebra<f64>) -> Result<LvCoeffs<f64>, CliError> {
        let value = |name: &str, v: &[f64]| {
            alg.value(v.to_vec())
                .map_err(|e| CliError::config(format!("lv.{name}: {e}")))
        };
        Ok(LvCoeffs {
            a: value("a", &self.a)?,
            b: value("b", &self.b)?,
            g: value("g", &self.g)?,
            z0: value("z0", &self.z0)?,
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralSection {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub m: usize,
    pub x0: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarSection {
    pub f: String,
    pub g: String,
    #[serde(default = "default_unit_range")]
    pub t_range: [f64; 2],
    #[serde(default = "default_unit_range")]
    pub z_range: [f64; 2],
    #[serde(default = "default_grid_count")]
    pub nt: usize,
    #[serde(default = "default_grid_count")]
    pub nz: usize,
    /// Anchor of the `h`-quadrature; enables reduction construction.
    pub anchor: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CpSystemSection {
    pub p: f64,
    pub f1: String,
    pub f2: String,
    pub g1: String,
    pub g2: String,
    #[serde(default = "default_unit_range")]
    pub t_range: [f64; 2],
    #[serde(default = "default_unit_range")]
    pub x_range: [f64; 2],
    #[serde(default = "default_unit_range")]
    pub y_range: [f64; 2],
    #[serde(default = "default_grid_count")]
    pub n: usize,
}

fn default_unit_range() -> [f64; 2] {
    [0.1, 1.0]
}

fn default_grid_count() -> usize {
    9
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_horizon")]
    pub t_horizon: f64,
    pub steps: usize,
    #[serde(default = "default_n_paths")]
    pub n_paths: usize,
    /// Mandatory for any stochastic task.
    pub seed: u64,
}

fn default_horizon() -> f64 {
    1.0
}

fn default_n_paths() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSection {
    pub base_steps: usize,
    pub levels: usize,
    pub n_paths: usize,
    /// When set, the fitted slope must land inside, else exit 3.
    pub slope_band: Option<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Closed form vs Euler-Maruyama bound in compare mode (endpoint RMS
    /// across paths).
    #[serde(default = "default_compare_tol")]
    pub compare: f64,
    /// Base-formula vs planar-projection bound (pathwise sup).
    #[serde(default = "default_projection_tol")]
    pub projection: f64,
    #[serde(default = "default_reducibility_tol")]
    pub reducibility: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            compare: default_compare_tol(),
            projection: default_projection_tol(),
            reducibility: default_reducibility_tol(),
        }
    }
}

fn default_compare_tol() -> f64 {
    0.5
}

fn default_projection_tol() -> f64 {
    1e-9
}

fn default_reducibility_tol() -> f64 {
    hypersde_core::reducibility::DEFAULT_TOL
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub csv: bool,
    #[serde(default)]
    pub svg: bool,
    /// Also dump the sampled Wiener grid of path 0 (columns `t, W1..Wm`).
    #[serde(default)]
    pub wiener: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: None,
            csv: true,
            svg: false,
            wiener: false,
        }
    }
}

fn default_true() -> bool {
    true
}

pub fn parse_all(what: &str, texts: &[String]) -> Result<Vec<ExprAst>, CliError> {
    texts
        .iter()
        .map(|t| parse(t).map_err(|e| CliError::config(format!("{what}: \"{t}\": {e}"))))
        .collect()
}

pub fn parse_one(what: &str, text: &str) -> Result<ExprAst, CliError> {
    parse(text).map_err(|e| CliError::config(format!("{what}: \"{text}\": {e}")))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<(Self, PathBuf), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let dir = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok((config, dir))
    }

    pub fn require_algebra(&self, config_dir: &Path) -> Result<Algebra<f64>, CliError> {
        self.algebra
            .as_ref()
            .ok_or_else(|| CliError::config("this task needs an `algebra` section".into()))?
            .build(config_dir)
    }

    pub fn require_grid(&self) -> Result<&GridSection, CliError> {
        self.grid
            .as_ref()
            .ok_or_else(|| CliError::config("this task needs a `grid` section (with a seed)".into()))
    }
}
