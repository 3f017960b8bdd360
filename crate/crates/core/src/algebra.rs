//! Commutative hypercomplex algebras given by structure constants.
//!
//! An algebra is a real vector space with units `e_1..e_n` and a product
//! fixed by the rank-3 table `gamma`, `e_i e_j = sum_k gamma[i][j][k] e_k`.
//! The product is commutative iff `gamma_ijk = gamma_jik`, associative iff
//! `sum_s gamma_ijs gamma_skt = sum_s gamma_ist gamma_jks`, and
//! `eps = sum_k eps_k e_k` is the identity iff `sum_k eps_k gamma_ikj = delta_ij`.
//! Construction verifies all three axioms and solves for the identity when it
//! is not supplied.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{least_squares, Lu};
use crate::scalar::Scalar;

/// Absolute tolerance for the axiom residuals at construction time.
const AXIOM_TOL: f64 = 1e-10;
/// Residual bound accepted when solving the identity by least squares.
const IDENTITY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("{axiom} axiom violated at indices {indices:?} (1-based), residual {residual}")]
    AxiomViolation {
        axiom: Axiom,
        indices: Vec<usize>,
        residual: f64,
    },
    #[error("no multiplicative identity: the defining linear system is singular or inconsistent (residual {residual})")]
    NoIdentity { residual: f64 },
    #[error("structure table is not a consistent rank-3 array: {0}")]
    BadTable(String),
    #[error("operands belong to different algebras: `{left}` vs `{right}`")]
    AlgebraMismatch { left: String, right: String },
    #[error("element is a zero divisor or numerically singular (|det M(u)| = {det})")]
    SingularElement { det: f64 },
    #[error("value has {found} components, algebra `{label}` has dimension {dim}")]
    DimensionMismatch {
        label: String,
        dim: usize,
        found: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Commutativity,
    Associativity,
    Identity,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::Commutativity => write!(f, "commutativity"),
            Axiom::Associativity => write!(f, "associativity"),
            Axiom::Identity => write!(f, "identity"),
        }
    }
}

/// Outcome of checking one axiom: worst residual and where it occurred.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomCheck<T> {
    pub axiom: Axiom,
    pub max_residual: T,
    /// 1-based indices of the worst violation.
    pub witness: Vec<usize>,
}

/// Per-axiom residual report produced by [`Algebra::verify`].
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport<T> {
    pub label: String,
    pub commutativity: AxiomCheck<T>,
    pub associativity: AxiomCheck<T>,
    pub identity: AxiomCheck<T>,
    pub pass: bool,
}

impl<T: Scalar> VerificationReport<T> {
    pub fn max_residual(&self) -> T {
        self.commutativity
            .max_residual
            .max(self.associativity.max_residual)
            .max(self.identity.max_residual)
    }
}

/// A verified commutative hypercomplex algebra. Immutable after construction;
/// the label is the only equality key used across module boundaries.
#[derive(Debug, Clone)]
pub struct Algebra<T> {
    dim: usize,
    gamma: Vec<T>,
    identity: Vec<T>,
    label: Arc<str>,
}

/// Element of an algebra: the coefficient vector of `z = sum_i x_i e_i` in
/// the unit basis, tagged with the algebra label it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HValue<T> {
    coeffs: Vec<T>,
    label: Arc<str>,
}

/// JSON document shape accepted by [`Algebra::from_json`].
#[derive(Deserialize)]
struct TableDoc {
    dim: usize,
    gamma: Vec<Vec<Vec<f64>>>,
    identity: Option<Vec<f64>>,
    label: Option<String>,
}

impl<T: Scalar> Algebra<T> {
    /// Generalized complex numbers `C_p`: units 1, i with `i^2 = p`.
    /// `p = -1` gives the complex numbers, `p = 0` the dual numbers and
    /// `p = 1` the split-complex numbers.
    pub fn cp(p: T) -> Self {
        let z = T::zero();
        let o = T::one();
        // gamma[(i*2+j)*2+k], 0-based
        let gamma = vec![
            o, z, // e1 e1 = e1
            z, o, // e1 e2 = e2
            z, o, // e2 e1 = e2
            p, z, // e2 e2 = p e1
        ];
        Algebra {
            dim: 2,
            gamma,
            identity: vec![o, z],
            label: format!("Cp(p={})", p).into(),
        }
    }

    /// The three-dimensional algebra with units 1, i, j obeying
    /// `i^2 = j`, `ij = 0`, `j^2 = 0`.
    pub fn a34() -> Self {
        let mut gamma = vec![T::zero(); 27];
        let n = 3;
        let mut set = |i: usize, j: usize, k: usize, v: T| gamma[(i * n + j) * n + k] = v;
        for k in 0..3 {
            set(0, k, k, T::one());
            set(k, 0, k, T::one());
        }
        set(1, 1, 2, T::one());
        let mut identity = vec![T::zero(); 3];
        identity[0] = T::one();
        Algebra {
            dim: 3,
            gamma,
            identity,
            label: "A3_4".into(),
        }
    }

    /// The reals as a 1-dimensional algebra (neutral element of the direct
    /// product).
    pub fn reals() -> Self {
        Algebra {
            dim: 1,
            gamma: vec![T::one()],
            identity: vec![T::one()],
            label: "R".into(),
        }
    }

    /// Builds an algebra from an explicit structure table, verifying the
    /// axioms. When `identity` is `None` it is solved from
    /// `sum_k eps_k gamma_ikj = delta_ij` by least squares.
    pub fn from_table(
        dim: usize,
        gamma: Vec<T>,
        identity: Option<Vec<T>>,
        label: impl Into<String>,
    ) -> Result<Self, AlgebraError> {
        if dim == 0 {
            return Err(AlgebraError::BadTable("dimension must be positive".into()));
        }
        if gamma.len() != dim * dim * dim {
            return Err(AlgebraError::BadTable(format!(
                "expected {} entries for dim {}, got {}",
                dim * dim * dim,
                dim,
                gamma.len()
            )));
        }
        if let Some(eps) = &identity {
            if eps.len() != dim {
                return Err(AlgebraError::BadTable(format!(
                    "identity has {} components, expected {}",
                    eps.len(),
                    dim
                )));
            }
        }
        let candidate = Algebra {
            dim,
            gamma,
            identity: identity.clone().unwrap_or_else(|| vec![T::zero(); dim]),
            label: label.into().into(),
        };
        let tol = T::c(AXIOM_TOL);
        let comm = candidate.check_commutativity();
        if comm.max_residual > tol {
            return Err(AlgebraError::AxiomViolation {
                axiom: Axiom::Commutativity,
                indices: comm.witness,
                residual: comm.max_residual.to_f64().unwrap_or(f64::NAN),
            });
        }
        let assoc = candidate.check_associativity();
        if assoc.max_residual > tol {
            return Err(AlgebraError::AxiomViolation {
                axiom: Axiom::Associativity,
                indices: assoc.witness,
                residual: assoc.max_residual.to_f64().unwrap_or(f64::NAN),
            });
        }
        let candidate = match identity {
            Some(_) => {
                let id = candidate.check_identity();
                if id.max_residual > tol {
                    return Err(AlgebraError::AxiomViolation {
                        axiom: Axiom::Identity,
                        indices: id.witness,
                        residual: id.max_residual.to_f64().unwrap_or(f64::NAN),
                    });
                }
                candidate
            }
            None => {
                let eps = candidate.solve_identity()?;
                Algebra {
                    identity: eps,
                    ..candidate
                }
            }
        };
        Ok(candidate)
    }

    /// Loads an explicit table from a JSON document
    /// `{"dim": n, "gamma": [[[..]..]..], "identity": [..]?, "label": ".."?}`.
    pub fn from_json(doc: &str) -> Result<Self, AlgebraError> {
        let doc: TableDoc =
            serde_json::from_str(doc).map_err(|e| AlgebraError::BadTable(e.to_string()))?;
        let n = doc.dim;
        if doc.gamma.len() != n {
            return Err(AlgebraError::BadTable(format!(
                "gamma has {} rows, expected {}",
                doc.gamma.len(),
                n
            )));
        }
        let mut flat = Vec::with_capacity(n * n * n);
        for (i, plane) in doc.gamma.iter().enumerate() {
            if plane.len() != n {
                return Err(AlgebraError::BadTable(format!(
                    "gamma[{}] has {} rows, expected {}",
                    i,
                    plane.len(),
                    n
                )));
            }
            for (j, row) in plane.iter().enumerate() {
                if row.len() != n {
                    return Err(AlgebraError::BadTable(format!(
                        "gamma[{}][{}] has {} entries, expected {}",
                        i,
                        j,
                        row.len(),
                        n
                    )));
                }
                for &v in row {
                    flat.push(T::c(v));
                }
            }
        }
        let identity = doc.identity.map(|v| v.iter().map(|&x| T::c(x)).collect());
        let label = doc.label.unwrap_or_else(|| format!("table({}d)", n));
        Self::from_table(n, flat, identity, label)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Structure constant `gamma_ijk` (0-based indices).
    #[inline]
    pub fn gamma(&self, i: usize, j: usize, k: usize) -> T {
        self.gamma[(i * self.dim + j) * self.dim + k]
    }

    /// Identity coefficient vector.
    pub fn identity_coeffs(&self) -> &[T] {
        &self.identity
    }

    /// The multiplicative identity as an element.
    pub fn one(&self) -> HValue<T> {
        HValue {
            coeffs: self.identity.clone(),
            label: Arc::clone(&self.label),
        }
    }

    pub fn zero(&self) -> HValue<T> {
        HValue {
            coeffs: vec![T::zero(); self.dim],
            label: Arc::clone(&self.label),
        }
    }

    /// Wraps a coefficient vector as an element of this algebra.
    pub fn value(&self, coeffs: Vec<T>) -> Result<HValue<T>, AlgebraError> {
        if coeffs.len() != self.dim {
            return Err(AlgebraError::DimensionMismatch {
                label: self.label.to_string(),
                dim: self.dim,
                found: coeffs.len(),
            });
        }
        Ok(HValue {
            coeffs,
            label: Arc::clone(&self.label),
        })
    }

    /// The unit `e_i` (0-based).
    pub fn unit(&self, i: usize) -> HValue<T> {
        let mut coeffs = vec![T::zero(); self.dim];
        coeffs[i] = T::one();
        HValue {
            coeffs,
            label: Arc::clone(&self.label),
        }
    }

    fn check_owned(&self, u: &HValue<T>) -> Result<(), AlgebraError> {
        if u.label != self.label {
            return Err(AlgebraError::AlgebraMismatch {
                left: self.label.to_string(),
                right: u.label.to_string(),
            });
        }
        if u.coeffs.len() != self.dim {
            return Err(AlgebraError::DimensionMismatch {
                label: self.label.to_string(),
                dim: self.dim,
                found: u.coeffs.len(),
            });
        }
        Ok(())
    }

    /// Product `(u v)_k = sum_ij gamma_ijk u_i v_j`.
    pub fn mul(&self, u: &HValue<T>, v: &HValue<T>) -> Result<HValue<T>, AlgebraError> {
        self.check_owned(u)?;
        self.check_owned(v)?;
        let mut out = vec![T::zero(); self.dim];
        self.mul_raw(&u.coeffs, &v.coeffs, &mut out);
        Ok(HValue {
            coeffs: out,
            label: Arc::clone(&self.label),
        })
    }

    /// Product on raw coefficient slices (hot path for the solvers).
    pub(crate) fn mul_raw(&self, u: &[T], v: &[T], out: &mut [T]) {
        let n = self.dim;
        for x in out.iter_mut() {
            *x = T::zero();
        }
        for i in 0..n {
            let ui = u[i];
            if ui == T::zero() {
                continue;
            }
            for j in 0..n {
                let uv = ui * v[j];
                if uv == T::zero() {
                    continue;
                }
                for k in 0..n {
                    let g = self.gamma[(i * n + j) * n + k];
                    if g != T::zero() {
                        out[k] = out[k] + g * uv;
                    }
                }
            }
        }
    }

    /// Row-major left-multiplication matrix `M(u)_kj = sum_i gamma_ijk u_i`,
    /// so `(u v)_k = sum_j M_kj v_j`.
    pub fn mul_matrix(&self, u: &HValue<T>) -> Result<Vec<T>, AlgebraError> {
        self.check_owned(u)?;
        Ok(self.mul_matrix_raw(&u.coeffs))
    }

    fn mul_matrix_raw(&self, u: &[T]) -> Vec<T> {
        let n = self.dim;
        let mut m = vec![T::zero(); n * n];
        for k in 0..n {
            for j in 0..n {
                let mut acc = T::zero();
                for i in 0..n {
                    acc = acc + self.gamma[(i * n + j) * n + k] * u[i];
                }
                m[k * n + j] = acc;
            }
        }
        m
    }

    /// Multiplicative inverse, by solving `M(u) x = eps`.
    ///
    /// Fails with [`AlgebraError::SingularElement`] when
    /// `|det M(u)| <= 1e-10 * ||u||^(n-1)`; near-zero divisors inside the
    /// solution formulas signal blow-up and must error loudly.
    pub fn inv(&self, u: &HValue<T>) -> Result<HValue<T>, AlgebraError> {
        self.check_owned(u)?;
        let n = self.dim;
        let m = self.mul_matrix_raw(&u.coeffs);
        let lu = Lu::new(&m, n);
        let det = lu.det();
        let scale = if n == 1 {
            T::one()
        } else {
            u.norm().powi(n as i32 - 1)
        };
        let tol = T::c(1e-10) * scale;
        if det.abs() <= tol {
            return Err(AlgebraError::SingularElement {
                det: det.to_f64().unwrap_or(f64::NAN),
            });
        }
        let x = lu
            .solve(&self.identity)
            .ok_or(AlgebraError::SingularElement {
                det: det.to_f64().unwrap_or(f64::NAN),
            })?;
        Ok(HValue {
            coeffs: x,
            label: Arc::clone(&self.label),
        })
    }

    /// Determinant of the left-multiplication matrix; its zero set is the set
    /// of zero divisors (for `C_p`: `x1^2 - p x2^2 = 0`).
    pub fn mul_det(&self, u: &HValue<T>) -> Result<T, AlgebraError> {
        self.check_owned(u)?;
        Ok(Lu::new(&self.mul_matrix_raw(&u.coeffs), self.dim).det())
    }

    /// The quadratic-variation element `Q = sum_i e_i^2` (components
    /// `Q_k = sum_i gamma_iik`). For `m` independent Wiener components,
    /// `(dW)^2 = Q dt`; `Q` equals the identity for the reals and the dual
    /// numbers, vanishes for the complex numbers, and differs elsewhere, so
    /// every Ito correction in the solution formulas must carry it.
    pub fn unit_square_sum(&self) -> HValue<T> {
        let n = self.dim;
        let mut coeffs = vec![T::zero(); n];
        for k in 0..n {
            for i in 0..n {
                coeffs[k] = coeffs[k] + self.gamma(i, i, k);
            }
        }
        HValue {
            coeffs,
            label: Arc::clone(&self.label),
        }
    }

    fn check_commutativity(&self) -> AxiomCheck<T> {
        let n = self.dim;
        let mut worst = T::zero();
        let mut witness = vec![1, 1, 1];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let r = (self.gamma(i, j, k) - self.gamma(j, i, k)).abs();
                    if r > worst {
                        worst = r;
                        witness = vec![i + 1, j + 1, k + 1];
                    }
                }
            }
        }
        AxiomCheck {
            axiom: Axiom::Commutativity,
            max_residual: worst,
            witness,
        }
    }

    fn check_associativity(&self) -> AxiomCheck<T> {
        let n = self.dim;
        let mut worst = T::zero();
        let mut witness = vec![1, 1, 1, 1];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for t in 0..n {
                        let mut lhs = T::zero();
                        let mut rhs = T::zero();
                        for s in 0..n {
                            lhs = lhs + self.gamma(i, j, s) * self.gamma(s, k, t);
                            rhs = rhs + self.gamma(i, s, t) * self.gamma(j, k, s);
                        }
                        let r = (lhs - rhs).abs();
                        if r > worst {
                            worst = r;
                            witness = vec![i + 1, j + 1, k + 1, t + 1];
                        }
                    }
                }
            }
        }
        AxiomCheck {
            axiom: Axiom::Associativity,
            max_residual: worst,
            witness,
        }
    }

    fn check_identity(&self) -> AxiomCheck<T> {
        let n = self.dim;
        let mut worst = T::zero();
        let mut witness = vec![1, 1];
        for i in 0..n {
            for j in 0..n {
                let mut acc = T::zero();
                for k in 0..n {
                    acc = acc + self.identity[k] * self.gamma(i, k, j);
                }
                let delta = if i == j { T::one() } else { T::zero() };
                let r = (acc - delta).abs();
                if r > worst {
                    worst = r;
                    witness = vec![i + 1, j + 1];
                }
            }
        }
        AxiomCheck {
            axiom: Axiom::Identity,
            max_residual: worst,
            witness,
        }
    }

    fn solve_identity(&self) -> Result<Vec<T>, AlgebraError> {
        let n = self.dim;
        // Equations indexed by (i, j): sum_k eps_k gamma_ikj = delta_ij.
        let mut a = vec![T::zero(); n * n * n];
        let mut b = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                let row = i * n + j;
                for k in 0..n {
                    a[row * n + k] = self.gamma(i, k, j);
                }
                b[row] = if i == j { T::one() } else { T::zero() };
            }
        }
        let (eps, resid) = least_squares(&a, &b, n * n, n).ok_or(AlgebraError::NoIdentity {
            residual: f64::NAN,
        })?;
        if resid > T::c(IDENTITY_TOL) {
            return Err(AlgebraError::NoIdentity {
                residual: resid.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(eps)
    }

    /// Per-axiom residual report; residuals are exact maximum absolute
    /// violations of the three defining identities.
    pub fn verify(&self) -> VerificationReport<T> {
        let commutativity = self.check_commutativity();
        let associativity = self.check_associativity();
        let identity = self.check_identity();
        let tol = T::c(AXIOM_TOL);
        let pass = commutativity.max_residual <= tol
            && associativity.max_residual <= tol
            && identity.max_residual <= tol;
        VerificationReport {
            label: self.label.to_string(),
            commutativity,
            associativity,
            identity,
            pass,
        }
    }

    /// Direct product: indices are pairs `(i, a)` flattened as `i * dim_B + a`,
    /// with `gamma_(i,a)(j,b)(k,c) = gamma^A_ijk * gamma^B_abc` and identity
    /// `eps_A (x) eps_B`.
    pub fn direct_product(&self, other: &Algebra<T>) -> Algebra<T> {
        let (na, nb) = (self.dim, other.dim);
        let n = na * nb;
        let mut gamma = vec![T::zero(); n * n * n];
        for i in 0..na {
            for a in 0..nb {
                for j in 0..na {
                    for b in 0..nb {
                        for k in 0..na {
                            for c in 0..nb {
                                let v = self.gamma(i, j, k) * other.gamma(a, b, c);
                                if v != T::zero() {
                                    let row = i * nb + a;
                                    let col = j * nb + b;
                                    let out = k * nb + c;
                                    gamma[(row * n + col) * n + out] = v;
                                }
                            }
                        }
                    }
                }
            }
        }
        let mut identity = vec![T::zero(); n];
        for k in 0..na {
            for c in 0..nb {
                identity[k * nb + c] = self.identity[k] * other.identity[c];
            }
        }
        Algebra {
            dim: n,
            gamma,
            identity,
            label: format!("{}(x){}", self.label, other.label).into(),
        }
    }

    /// Direct sum: block-diagonal table, identity `(eps_A, eps_B)`; products
    /// of cross-block units vanish.
    pub fn direct_sum(&self, other: &Algebra<T>) -> Algebra<T> {
        let (na, nb) = (self.dim, other.dim);
        let n = na + nb;
        let mut gamma = vec![T::zero(); n * n * n];
        for i in 0..na {
            for j in 0..na {
                for k in 0..na {
                    gamma[(i * n + j) * n + k] = self.gamma(i, j, k);
                }
            }
        }
        for i in 0..nb {
            for j in 0..nb {
                for k in 0..nb {
                    gamma[((na + i) * n + na + j) * n + na + k] = other.gamma(i, j, k);
                }
            }
        }
        let mut identity = Vec::with_capacity(n);
        identity.extend_from_slice(&self.identity);
        identity.extend_from_slice(&other.identity);
        Algebra {
            dim: n,
            gamma,
            identity,
            label: format!("{}(+){}", self.label, other.label).into(),
        }
    }
}

impl<T: Scalar> HValue<T> {
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> T {
        self.coeffs
            .iter()
            .fold(T::zero(), |acc, &x| acc + x * x)
            .sqrt()
    }

    pub fn add(&self, other: &HValue<T>) -> HValue<T> {
        debug_assert_eq!(self.label, other.label);
        HValue {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| a + b)
                .collect(),
            label: Arc::clone(&self.label),
        }
    }

    pub fn sub(&self, other: &HValue<T>) -> HValue<T> {
        debug_assert_eq!(self.label, other.label);
        HValue {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| a - b)
                .collect(),
            label: Arc::clone(&self.label),
        }
    }

    pub fn scale(&self, s: T) -> HValue<T> {
        HValue {
            coeffs: self.coeffs.iter().map(|&a| a * s).collect(),
            label: Arc::clone(&self.label),
        }
    }

    pub fn neg(&self) -> HValue<T> {
        self.scale(-T::one())
    }

    /// Largest absolute componentwise difference.
    pub fn max_abs_diff(&self, other: &HValue<T>) -> T {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
    }
}

impl<T: Scalar> fmt::Display for HValue<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", c)?;
        }
        write!(f, "]@{}", self.label)
    }
}
