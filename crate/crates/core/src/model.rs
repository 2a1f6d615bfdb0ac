//! Parameterized density-matrix families.
//!
//! A [`ModelDefinition`] is a `d x d` grid of [`Expression`]s over an ordered
//! list of real parameters. Evaluating it at a coordinate vector gives a
//! [`ModelPoint`]: the density matrix and its first partial derivatives,
//! both validated.
//!
//! The text format is a small TOML document:
//!
//! ```toml
//! dim = 2
//! params = ["a", "b"]
//! rank_tol = 1e-10
//! name = "phase-diffusion qubit"
//! [rho]
//! row0 = ["1/2",              "exp(-i*a - b)/2"]
//! row1 = ["exp(i*a - b)/2",   "1/2"]
//! ```

use std::collections::HashSet;

use num_complex::Complex64;
use toml::{Table, Value};

use crate::error::{ModelError, ValidationKind};
use crate::expr::{self, Expression};
use crate::linalg::{self, CMatrix, RMatrix};

pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Max element deviation tolerated (and then symmetrized away) in `rho`.
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const DERIVATIVE_TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-12;

pub const BUILTIN_NAMES: [&str; 3] = [
    "phase-diffusion-qubit",
    "bloch-pure-qubit",
    "product-qubits",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ModelDefinition {
    pub name: String,
    pub description: Option<String>,
    pub rank_tol: f64,
    dim: usize,
    params: Vec<String>,
    entries: Vec<Vec<Expression>>,
}

/// The density matrix and its parameter derivatives at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPoint {
    pub coords: Vec<f64>,
    pub rho: CMatrix,
    pub drho: Vec<CMatrix>,
}

fn validate_params(params: &[String]) -> Result<(), ModelError> {
    if params.is_empty() {
        return Err(ModelError::Format("params must be non-empty".into()));
    }
    let mut seen = HashSet::new();
    for p in params {
        let valid = p
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && p.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid {
            return Err(ModelError::Format(format!("invalid parameter name `{p}`")));
        }
        if expr::is_reserved(p) {
            return Err(ModelError::Format(format!(
                "parameter name `{p}` is reserved"
            )));
        }
        if !seen.insert(p.as_str()) {
            return Err(ModelError::Format(format!("duplicate parameter `{p}`")));
        }
    }
    Ok(())
}

impl ModelDefinition {
    /// Build a model from row-major entry sources.
    pub fn from_sources<P: AsRef<str>, S: AsRef<str>>(
        name: &str,
        params: &[P],
        rows: &[Vec<S>],
    ) -> Result<Self, ModelError> {
        let params: Vec<String> = params.iter().map(|p| p.as_ref().to_string()).collect();
        validate_params(&params)?;
        let dim = rows.len();
        if dim < 2 {
            return Err(ModelError::Format(format!(
                "dim must be at least 2, got {dim}"
            )));
        }
        let mut entries = Vec::with_capacity(dim);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(ModelError::Format(format!(
                    "row {r} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            let parsed = row
                .iter()
                .enumerate()
                .map(|(c, src)| {
                    expr::parse(src.as_ref(), &params).map_err(|source| ModelError::Entry {
                        row: r + 1,
                        col: c + 1,
                        source,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            entries.push(parsed);
        }
        Ok(Self {
            name: name.to_string(),
            description: None,
            rank_tol: DEFAULT_RANK_TOL,
            dim,
            params,
            entries,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> &Expression {
        &self.entries[row][col]
    }

    /// Evaluate `rho` and every `d rho / d x^mu` at `coords`, enforcing
    /// Hermiticity, unit trace and positivity.
    pub fn evaluate(&self, coords: &[f64]) -> Result<ModelPoint, ModelError> {
        let p = self.n_params();
        if coords.len() != p {
            return Err(ModelError::Arity {
                expected: p,
                got: coords.len(),
            });
        }
        let d = self.dim;
        let mut rho = CMatrix::zeros(d, d);
        let mut drho = vec![CMatrix::zeros(d, d); p];
        for (r, row) in self.entries.iter().enumerate() {
            for (c, e) in row.iter().enumerate() {
                let v = e.eval_dual(coords).map_err(|source| ModelError::Entry {
                    row: r + 1,
                    col: c + 1,
                    source,
                })?;
                rho[(r, c)] = v.value;
                for (mu, dv) in v.partials.iter().enumerate() {
                    drho[mu][(r, c)] = *dv;
                }
            }
        }

        let dev = linalg::hermiticity_deviation(&rho);
        if dev > HERMITIAN_TOL {
            return Err(invalid(ValidationKind::NonHermitian, dev));
        }
        let rho = linalg::hermitian_part(&rho);
        let tr_dev = (linalg::trace(&rho) - Complex64::new(1.0, 0.0)).norm();
        if tr_dev > TRACE_TOL {
            return Err(invalid(ValidationKind::TraceNotOne, tr_dev));
        }
        let drho = drho
            .into_iter()
            .map(|m| {
                let dev = linalg::hermiticity_deviation(&m);
                if dev > HERMITIAN_TOL {
                    return Err(invalid(ValidationKind::BadDerivative, dev));
                }
                let m = linalg::hermitian_part(&m);
                let tr = linalg::trace(&m).norm();
                if tr > DERIVATIVE_TRACE_TOL {
                    return Err(invalid(ValidationKind::BadDerivative, tr));
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>, _>>()?;

        let (eigenvalues, _) = linalg::hermitian_eigh(&rho).map_err(|e| {
            ModelError::Format(format!("eigensolver failed while checking positivity: {e}"))
        })?;
        let min = eigenvalues.last().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(invalid(ValidationKind::NonPsd, -min));
        }
        Ok(ModelPoint {
            coords: coords.to_vec(),
            rho,
            drho,
        })
    }

    /// The same family in a linear chart `x = M y`, with `new_params` naming
    /// the `y` coordinates.
    pub fn reparametrize_linear<S: AsRef<str>>(
        &self,
        m: &RMatrix,
        new_params: &[S],
    ) -> Result<Self, ModelError> {
        let p = self.n_params();
        if m.nrows() != p || m.ncols() != new_params.len() {
            return Err(ModelError::Format(format!(
                "chart matrix is {}x{}, expected {p}x{}",
                m.nrows(),
                m.ncols(),
                new_params.len()
            )));
        }
        let names: Vec<String> = new_params.iter().map(|s| s.as_ref().to_string()).collect();
        validate_params(&names)?;
        let replacements: Vec<Expression> = (0..p)
            .map(|k| {
                let row: Vec<f64> = m.row(k).iter().copied().collect();
                Expression::linear_combination(&row, &names)
            })
            .collect();
        let entries = self
            .entries
            .iter()
            .map(|row| row.iter().map(|e| e.substitute(&replacements)).collect())
            .collect();
        Ok(Self {
            name: format!("{} (reparametrized)", self.name),
            description: self.description.clone(),
            rank_tol: self.rank_tol,
            dim: self.dim,
            params: names,
            entries,
        })
    }
}

fn invalid(kind: ValidationKind, deviation: f64) -> ModelError {
    ModelError::Validation { kind, deviation }
}

fn format_err(msg: impl Into<String>) -> ModelError {
    ModelError::Format(msg.into())
}

/// Parse a model file.
pub fn load_model(text: &str) -> Result<ModelDefinition, ModelError> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| format_err(e.message().to_string()))?;

    let dim = match table.get("dim") {
        Some(Value::Integer(d)) if *d >= 2 => *d as usize,
        Some(Value::Integer(d)) => return Err(format_err(format!("dim must be >= 2, got {d}"))),
        Some(_) => return Err(format_err("dim must be an integer")),
        None => return Err(format_err("missing key `dim`")),
    };
    let params: Vec<String> = match table.get("params") {
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| format_err("params must be strings"))
            })
            .collect::<Result<_, _>>()?,
        Some(_) => return Err(format_err("params must be an array of strings")),
        None => return Err(format_err("missing key `params`")),
    };
    let rank_tol = match table.get("rank_tol") {
        None => DEFAULT_RANK_TOL,
        Some(v) => {
            let t = v
                .as_float()
                .or_else(|| v.as_integer().map(|i| i as f64))
                .ok_or_else(|| format_err("rank_tol must be a number"))?;
            if !(t > 0.0) {
                return Err(format_err("rank_tol must be positive"));
            }
            t
        }
    };
    let name = match table.get("name") {
        None => "unnamed".to_string(),
        Some(v) => v
            .as_str()
            .ok_or_else(|| format_err("name must be a string"))?
            .to_string(),
    };
    let description = match table.get("description") {
        None => None,
        Some(v) => Some(
            v.as_str()
                .ok_or_else(|| format_err("description must be a string"))?
                .to_string(),
        ),
    };
    let rho = table
        .get("rho")
        .ok_or_else(|| format_err("missing table [rho]"))?
        .as_table()
        .ok_or_else(|| format_err("[rho] must be a table"))?;

    for key in rho.keys() {
        let index = key
            .strip_prefix("row")
            .and_then(|k| k.parse::<usize>().ok())
            .ok_or_else(|| format_err(format!("unexpected key `{key}` in [rho]")))?;
        if index >= dim {
            return Err(format_err(format!(
                "dimension mismatch: `{key}` present but dim = {dim}"
            )));
        }
    }
    let mut rows = Vec::with_capacity(dim);
    for r in 0..dim {
        let key = format!("row{r}");
        let row = rho
            .get(&key)
            .ok_or_else(|| format_err(format!("missing key `{key}` in [rho]")))?
            .as_array()
            .ok_or_else(|| format_err(format!("`{key}` must be an array")))?;
        if row.len() != dim {
            return Err(format_err(format!(
                "dimension mismatch: `{key}` has {} entries, dim = {dim}",
                row.len()
            )));
        }
        let sources = row
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| format_err(format!("`{key}` entries must be strings")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(sources);
    }
    let mut model = ModelDefinition::from_sources(&name, &params, &rows)?;
    model.rank_tol = rank_tol;
    model.description = description;
    Ok(model)
}

/// Built-in models used by the tests and the CLI.
pub fn builtin(name: &str) -> Result<ModelDefinition, ModelError> {
    let (params, rows, description): (&[&str], Vec<Vec<&str>>, &str) = match name {
        "phase-diffusion-qubit" => (
            &["a", "b"],
            vec![
                vec!["1/2", "exp(-i*a - b)/2"],
                vec!["exp(i*a - b)/2", "1/2"],
            ],
            "phase a with phase diffusion b > 0",
        ),
        "bloch-pure-qubit" => (
            &["theta", "phi"],
            vec![
                vec!["cos(theta/2)^2", "cos(theta/2)*sin(theta/2)*exp(-i*phi)"],
                vec!["cos(theta/2)*sin(theta/2)*exp(i*phi)", "sin(theta/2)^2"],
            ],
            "pure qubit (cos(theta/2), exp(i phi) sin(theta/2))",
        ),
        "product-qubits" => (
            &["x1", "x2"],
            vec![
                vec!["(1 + x1)*(1 + x2)/4", "0", "0", "0"],
                vec!["0", "(1 + x1)*(1 - x2)/4", "0", "0"],
                vec!["0", "0", "(1 - x1)*(1 + x2)/4", "0"],
                vec!["0", "0", "0", "(1 - x1)*(1 - x2)/4"],
            ],
            "diag((1+x1)/2, (1-x1)/2) (x) diag((1+x2)/2, (1-x2)/2), |xk| < 1",
        ),
        other => return Err(ModelError::UnknownModel(other.to_string())),
    };
    let mut model = ModelDefinition::from_sources(name, params, &rows)?;
    model.description = Some(description.to_string());
    Ok(model)
}
