use std::path::PathBuf;

use log::{debug, info};
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use uhlmann_core::curvature::{connection_curvature, curvature_at, dual_curvatures};
use uhlmann_core::{
    analyze, curvature_action, dual_contraction_curvature, incompatibility_gamma, pcc_check,
    scalar_curvature, scalar_curvature_pure, tradeoff_boundary_curve, AxisRange, Error, FdOptions,
    Measure, Method, ModelDefinition, RMatrix,
};

use crate::config::{self, config_error, ConfigError};
use crate::output::{self, float_text, num, CsvTable, Format};

/// Exit status of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// At least one point failed or a verification check did not pass.
    PointFailures,
}

impl Status {
    fn from_failures(any: bool) -> Self {
        if any {
            Status::PointFailures
        } else {
            Status::Success
        }
    }
}

/// Options shared by every subcommand, already validated.
pub struct Settings {
    pub model: Option<ModelDefinition>,
    pub at: Option<String>,
    pub grid: Option<String>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub pcc_tol: f64,
    pub fd: FdOptions,
    pub method: Method,
    pub measure: Measure,
}

impl Settings {
    fn model(&self) -> Result<&ModelDefinition, ConfigError> {
        self.model
            .as_ref()
            .ok_or_else(|| config_error("--model is required"))
    }

    fn params(&self) -> Result<&[String], ConfigError> {
        Ok(self.model()?.params())
    }

    fn single_point(&self) -> Result<Vec<f64>, ConfigError> {
        if self.grid.is_some() {
            return Err(config_error("this command takes --at, not --grid"));
        }
        let at = self
            .at
            .as_deref()
            .ok_or_else(|| config_error("--at is required"))?;
        config::parse_point(at, self.params()?)
    }

    /// Exactly one of `--at` / `--grid`.
    fn points(&self) -> Result<Vec<Vec<f64>>, ConfigError> {
        let params = self.params()?;
        match (&self.at, &self.grid) {
            (Some(at), None) => Ok(vec![config::parse_point(at, params)?]),
            (None, Some(grid)) => Ok(config::grid_points(&config::parse_grid(grid, params)?)),
            (Some(_), Some(_)) => Err(config_error("give either --at or --grid, not both")),
            (None, None) => Err(config_error("one of --at or --grid is required")),
        }
    }

    fn emit(&self, json: Value, csv: impl FnOnce() -> String) -> Result<(), ConfigError> {
        let text = match self.format {
            Format::Json => output::json_text(&json),
            Format::Csv => csv(),
        };
        output::emit(&text, self.out.as_deref())
    }

    fn header(&self, command: &str) -> Map<String, Value> {
        let mut obj = Map::new();
        obj.insert("command".into(), json!(command));
        if let Some(m) = &self.model {
            obj.insert("model".into(), json!(m.name));
            obj.insert("params".into(), json!(m.params()));
        }
        obj
    }
}

fn error_fields(e: Option<&Error>) -> [String; 2] {
    match e {
        Some(e) => [e.kind().to_string(), e.to_string()],
        None => [String::new(), String::new()],
    }
}

pub fn curvature(s: &Settings) -> Result<Status, ConfigError> {
    let model = s.model()?;
    let points = s.points()?;
    info!("curvature: {} point(s), method {}", points.len(), s.method);
    let results: Vec<_> = points
        .par_iter()
        .map(|x| curvature_at(model, x, s.method, &s.fd))
        .collect();
    let failed = results.iter().any(Result::is_err);
    let params = model.params();

    let records: Vec<Value> = points
        .iter()
        .zip(&results)
        .map(|(x, r)| match r {
            Ok(rep) => json!({
                "coords": output::coords_object(params, x),
                "C": num(rep.c),
                "pair_terms": output::real_matrix(&rep.pair_terms),
                "rank": rep.diagnostics.rank,
                "condition_number": num(rep.diagnostics.condition_number),
                "method": rep.method.as_str(),
                "fd_step": output::opt_num(rep.diagnostics.fd_step),
                "error": Value::Null,
            }),
            Err(e) => json!({
                "coords": output::coords_object(params, x),
                "C": Value::Null,
                "pair_terms": Value::Null,
                "rank": Value::Null,
                "condition_number": Value::Null,
                "method": s.method.as_str(),
                "fd_step": Value::Null,
                "error": output::error_value(e),
            }),
        })
        .collect();
    let mut doc = s.header("curvature");
    doc.insert("method".into(), json!(s.method.as_str()));
    doc.insert("records".into(), Value::Array(records));

    s.emit(Value::Object(doc), || {
        let mut header: Vec<String> = params.to_vec();
        header.extend(
            [
                "C",
                "rank",
                "condition_number",
                "method",
                "error_kind",
                "error_message",
            ]
            .map(String::from),
        );
        let mut t = CsvTable::new(&header);
        for (x, r) in points.iter().zip(&results) {
            let mut row: Vec<String> = x.iter().map(|v| float_text(*v)).collect();
            match r {
                Ok(rep) => row.extend([
                    float_text(rep.c),
                    rep.diagnostics.rank.to_string(),
                    float_text(rep.diagnostics.condition_number),
                ]),
                Err(_) => row.extend([String::new(), String::new(), String::new()]),
            }
            row.push(s.method.as_str().to_string());
            row.extend(error_fields(r.as_ref().err()));
            t.row(&row);
        }
        t.finish()
    })?;
    Ok(Status::from_failures(failed))
}

struct PointReport {
    value: Value,
    flat: Vec<(String, String)>,
}

fn report_at(model: &ModelDefinition, x: &[f64], pcc_tol: f64) -> Result<PointReport, Error> {
    let a = analyze(model, x)?;
    let curv = scalar_curvature(&a.spectrum, &a.geometry);
    let pcc = pcc_check(&a.spectrum, &a.geometry.g_ops, pcc_tol);
    let gamma = (model.n_params() == 2)
        .then(|| incompatibility_gamma(&a.spectrum, &a.geometry.g_ops, &a.geometry.qfi));
    let (gamma_value, gamma_error) = match &gamma {
        None => (Value::Null, Value::Null),
        Some(Ok(g)) => (num(*g), Value::Null),
        Some(Err(e)) => (Value::Null, output::error_value(e)),
    };
    let value = json!({
        "coords": output::coords_object(model.params(), x),
        "rho": output::complex_matrix(&a.point.rho),
        "eigenvalues": output::nums(&a.spectrum.eigenvalues),
        "rank": a.spectrum.rank,
        "G": a.geometry.g_ops.iter().map(output::complex_matrix).collect::<Vec<_>>(),
        "metric": output::real_matrix(&a.geometry.metric),
        "qfi": output::real_matrix(&a.geometry.qfi),
        "condition_number": num(a.geometry.condition_number),
        "C": num(curv.c),
        "pair_terms": output::real_matrix(&curv.pair_terms),
        "pcc": {
            "satisfied": pcc.satisfied,
            "residual": num(pcc.residual),
            "pcc_tol": num(pcc.pcc_tol),
        },
        "gamma": gamma_value,
        "gamma_error": gamma_error,
        "error": Value::Null,
    });

    let mut flat = Vec::new();
    let mut put = |k: String, v: String| flat.push((k, v));
    for (name, v) in model.params().iter().zip(x) {
        put(format!("coords.{name}"), float_text(*v));
    }
    put("C".into(), float_text(curv.c));
    put("rank".into(), a.spectrum.rank.to_string());
    put(
        "condition_number".into(),
        float_text(a.geometry.condition_number),
    );
    put("pcc.satisfied".into(), pcc.satisfied.to_string());
    put("pcc.residual".into(), float_text(pcc.residual));
    put("pcc.pcc_tol".into(), float_text(pcc.pcc_tol));
    if let Some(Ok(g)) = &gamma {
        put("gamma".into(), float_text(*g));
    }
    for (k, l) in a.spectrum.eigenvalues.iter().enumerate() {
        put(format!("eigenvalues[{k}]"), float_text(*l));
    }
    for (name, m) in [("metric", &a.geometry.metric), ("qfi", &a.geometry.qfi)] {
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                put(format!("{name}[{r}][{c}]"), float_text(m[(r, c)]));
            }
        }
    }
    let mut complex = vec![("rho".to_string(), &a.point.rho)];
    for (mu, g) in a.geometry.g_ops.iter().enumerate() {
        complex.push((format!("G[{mu}]"), g));
    }
    for (name, m) in complex {
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                put(format!("{name}[{r}][{c}].re"), float_text(m[(r, c)].re));
                put(format!("{name}[{r}][{c}].im"), float_text(m[(r, c)].im));
            }
        }
    }
    Ok(PointReport { value, flat })
}

pub fn report(s: &Settings) -> Result<Status, ConfigError> {
    let model = s.model()?;
    let x = s.single_point()?;
    let result = report_at(model, &x, s.pcc_tol);
    let mut doc = s.header("report");
    let record = match &result {
        Ok(r) => r.value.clone(),
        Err(e) => json!({
            "coords": output::coords_object(model.params(), &x),
            "error": output::error_value(e),
        }),
    };
    doc.insert("record".into(), record);
    s.emit(Value::Object(doc), || {
        let mut t = CsvTable::new(&["quantity".into(), "value".into()]);
        match &result {
            Ok(r) => {
                for (k, v) in &r.flat {
                    t.row(&[k.clone(), v.clone()]);
                }
            }
            Err(e) => {
                let [kind, message] = error_fields(Some(e));
                t.row(&["error_kind".into(), kind]);
                t.row(&["error_message".into(), message]);
            }
        }
        t.finish()
    })?;
    Ok(Status::from_failures(result.is_err()))
}

pub fn tradeoff(s: &Settings, n: u32, v1: &str) -> Result<Status, ConfigError> {
    let model = s.model()?;
    if model.n_params() != 2 {
        return Err(config_error(format!(
            "WrongArity: tradeoff needs a two-parameter model, `{}` has {}",
            model.name,
            model.n_params()
        )));
    }
    if n == 0 {
        return Err(config_error("--n must be positive"));
    }
    let x = s.single_point()?;
    let v1_grid = config::parse_axis(v1, "--v1")?.values();

    let computed = analyze(model, &x).and_then(|a| {
        let gamma = incompatibility_gamma(&a.spectrum, &a.geometry.g_ops, &a.geometry.qfi)?;
        // Roundoff can push gamma a hair past 1.
        let gamma = gamma.min(1.0);
        let curve = tradeoff_boundary_curve(&a.geometry.qfi, gamma, n, &v1_grid)?;
        Ok((a.geometry.qfi, gamma, curve))
    });
    let (k, gamma, curve) = match computed {
        Ok(v) => v,
        Err(e) => {
            let mut doc = s.header("tradeoff");
            doc.insert("coords".into(), output::coords_object(model.params(), &x));
            doc.insert("error".into(), output::error_value(&e));
            s.emit(Value::Object(doc), || {
                let [kind, message] = error_fields(Some(&e));
                format!("# error={kind}: {message}\nv1,v2_min,status\n")
            })?;
            return Ok(Status::PointFailures);
        }
    };

    let status_of = |r: &Result<f64, Error>| match r {
        Ok(_) => "ok",
        Err(Error::NoSolution { .. }) => "no-solution",
        Err(_) => "error",
    };
    let failed = curve
        .points
        .iter()
        .any(|(_, r)| matches!(r, Err(e) if !matches!(e, Error::NoSolution { .. })));
    let rows: Vec<Value> = curve
        .points
        .iter()
        .map(|(v1, r)| {
            json!({
                "v1": num(*v1),
                "v2_min": r.as_ref().map_or(Value::Null, |v| num(*v)),
                "status": status_of(r),
            })
        })
        .collect();
    let mut doc = s.header("tradeoff");
    doc.insert("coords".into(), output::coords_object(model.params(), &x));
    doc.insert("qfi".into(), output::real_matrix(&k));
    doc.insert("gamma".into(), num(gamma));
    doc.insert("n".into(), json!(n));
    doc.insert("chart".into(), output::real_matrix(&curve.chart));
    doc.insert(
        "qfi_diagonal".into(),
        output::nums(&[curve.k_diagonal.0, curve.k_diagonal.1]),
    );
    doc.insert("rows".into(), Value::Array(rows));
    s.emit(Value::Object(doc), || {
        let mut t = CsvTable::new(&["v1".into(), "v2_min".into(), "status".into()]);
        let m2 = |m: &RMatrix| {
            format!(
                "[[{}, {}], [{}, {}]]",
                float_text(m[(0, 0)]),
                float_text(m[(0, 1)]),
                float_text(m[(1, 0)]),
                float_text(m[(1, 1)])
            )
        };
        t.comment(&format!("model={}", model.name));
        t.comment(&format!("qfi={}", m2(&k)));
        t.comment(&format!("gamma={}", float_text(gamma)));
        t.comment(&format!("n={n}"));
        t.comment(&format!("chart={}", m2(&curve.chart)));
        t.comment(&format!(
            "qfi_diagonal=[{}, {}]",
            float_text(curve.k_diagonal.0),
            float_text(curve.k_diagonal.1)
        ));
        for (v1, r) in &curve.points {
            let v2 = r.as_ref().map_or(String::new(), |v| float_text(*v));
            t.row(&[float_text(*v1), v2, status_of(r).to_string()]);
        }
        t.finish()
    })?;
    Ok(Status::from_failures(failed))
}

#[derive(Debug, Clone)]
struct Check {
    name: &'static str,
    outcome: CheckOutcome,
}

#[derive(Debug, Clone)]
enum CheckOutcome {
    Measured { residual: f64, tol: f64 },
    Skipped(String),
    Failed(String),
}

impl Check {
    fn measured(name: &'static str, residual: f64, tol: f64) -> Self {
        Self {
            name,
            outcome: CheckOutcome::Measured { residual, tol },
        }
    }

    fn passed(&self) -> bool {
        match &self.outcome {
            CheckOutcome::Measured { residual, tol } => residual <= tol,
            CheckOutcome::Skipped(_) => true,
            CheckOutcome::Failed(_) => false,
        }
    }

    fn status(&self) -> &'static str {
        match &self.outcome {
            CheckOutcome::Skipped(_) => "skipped",
            _ if self.passed() => "pass",
            _ => "fail",
        }
    }

    fn fields(&self) -> (Option<f64>, Option<f64>, String) {
        match &self.outcome {
            CheckOutcome::Measured { residual, tol } => {
                (Some(*residual), Some(*tol), String::new())
            }
            CheckOutcome::Skipped(note) | CheckOutcome::Failed(note) => (None, None, note.clone()),
        }
    }
}

/// Errors that mean a check's precondition does not hold at this point.
fn precondition_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::RankChange(_) | Error::DegenerateSpectrum { .. } | Error::NotPure { .. }
    )
}

fn compare(name: &'static str, reference: f64, other: Result<f64, Error>, tol: f64) -> Check {
    match other {
        Ok(v) => Check::measured(name, (v - reference).abs(), tol),
        Err(e) if precondition_failure(&e) => Check {
            name,
            outcome: CheckOutcome::Skipped(format!("{}: {e}", e.kind())),
        },
        Err(e) => Check {
            name,
            outcome: CheckOutcome::Failed(format!("{}: {e}", e.kind())),
        },
    }
}

/// Fixed, well-conditioned chart `x = M y` for the invariance spot check.
fn spot_chart(p: usize) -> RMatrix {
    RMatrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0 + 0.1 * i as f64
        } else if j == i + 1 {
            0.25
        } else if i == j + 1 {
            -0.15
        } else {
            0.0
        }
    })
}

fn verify_at(model: &ModelDefinition, x: &[f64], s: &Settings) -> Result<Vec<Check>, Error> {
    let a = analyze(model, x)?;
    let c = scalar_curvature(&a.spectrum, &a.geometry).c;
    let p = model.n_params();
    let mut checks = Vec::new();

    checks.push(compare(
        "spectral-vs-dual-contraction",
        c,
        dual_contraction_curvature(model, x, &s.fd).map(|r| r.c),
        1e-4,
    ));
    checks.push(compare(
        "spectral-vs-connection",
        c,
        connection_curvature(model, x, &s.fd).map(|r| r.c),
        1e-4,
    ));
    checks.push(compare(
        "pure-state-formula",
        c,
        scalar_curvature_pure(&a.spectrum, &a.geometry).map(|r| r.c),
        1e-10,
    ));

    let chart = spot_chart(p);
    let new_params: Vec<String> = (0..p).map(|k| format!("y{k}")).collect();
    let reparam = (|| {
        let moved = model.reparametrize_linear(&chart, &new_params)?;
        let inv = chart
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("singular chart".into()))?;
        let y = inv * uhlmann_core::RMatrix::from_column_slice(p, 1, x);
        let b = analyze(&moved, y.as_slice())?;
        Ok::<f64, Error>(scalar_curvature(&b.spectrum, &b.geometry).c)
    })();
    checks.push(match reparam {
        Ok(c2) => Check::measured(
            "reparametrization-invariance",
            (c2 - c).abs() / c.abs().max(1.0),
            1e-8,
        ),
        Err(e) => Check {
            name: "reparametrization-invariance",
            outcome: CheckOutcome::Failed(format!("{}: {e}", e.kind())),
        },
    });

    let pcc = pcc_check(&a.spectrum, &a.geometry.g_ops, s.pcc_tol);
    let flat = c <= 1e-10;
    checks.push(Check {
        name: "pcc-iff-flat",
        outcome: if flat == pcc.satisfied {
            CheckOutcome::Measured {
                residual: 0.0,
                tol: 0.0,
            }
        } else {
            CheckOutcome::Failed(format!(
                "C = {c:e} but PCC residual = {:e} (satisfied = {})",
                pcc.residual, pcc.satisfied
            ))
        },
    });

    checks.push(if p == 2 && a.spectrum.rank == 1 {
        match incompatibility_gamma(&a.spectrum, &a.geometry.g_ops, &a.geometry.qfi) {
            Ok(gamma) => {
                Check::measured("pure-gamma-half-curvature", (gamma - c / 2.0).abs(), 1e-8)
            }
            Err(e) => Check {
                name: "pure-gamma-half-curvature",
                outcome: CheckOutcome::Failed(format!("{}: {e}", e.kind())),
            },
        }
    } else {
        Check {
            name: "pure-gamma-half-curvature",
            outcome: CheckOutcome::Skipped(format!(
                "needs two parameters and rank 1 (have {p}, rank {})",
                a.spectrum.rank
            )),
        }
    });

    checks.push(match dual_curvatures(model, x, &s.fd) {
        Ok(duals) => Check::measured(
            "dual-curvature-rho-relation",
            duals
                .iter()
                .map(|d| d.rho_relation_residual)
                .fold(0.0, f64::max),
            1e-6,
        ),
        Err(e) if precondition_failure(&e) => Check {
            name: "dual-curvature-rho-relation",
            outcome: CheckOutcome::Skipped(format!("{}: {e}", e.kind())),
        },
        Err(e) => Check {
            name: "dual-curvature-rho-relation",
            outcome: CheckOutcome::Failed(format!("{}: {e}", e.kind())),
        },
    });
    debug!("verify at {x:?}: {checks:?}");
    Ok(checks)
}

pub fn verify(s: &Settings) -> Result<Status, ConfigError> {
    let model = s.model()?;
    let points = s.points()?;
    info!("verify: {} point(s)", points.len());
    let results: Vec<_> = points.par_iter().map(|x| verify_at(model, x, s)).collect();
    let all_passed = results.iter().all(|r| {
        r.as_ref()
            .is_ok_and(|checks| checks.iter().all(Check::passed))
    });
    let params = model.params();

    let records: Vec<Value> = points
        .iter()
        .zip(&results)
        .map(|(x, r)| {
            let checks: Vec<Value> = r
                .as_ref()
                .map(|cs| {
                    cs.iter()
                        .map(|c| {
                            let (residual, tol, note) = c.fields();
                            json!({
                                "name": c.name,
                                "status": c.status(),
                                "residual": output::opt_num(residual),
                                "tol": output::opt_num(tol),
                                "note": note,
                            })
                        })
                        .collect()
                })
                .unwrap_or_default();
            json!({
                "coords": output::coords_object(params, x),
                "checks": checks,
                "error": r.as_ref().err().map_or(Value::Null, output::error_value),
            })
        })
        .collect();
    let mut doc = s.header("verify");
    doc.insert("all_passed".into(), json!(all_passed));
    doc.insert("records".into(), Value::Array(records));
    s.emit(Value::Object(doc), || {
        let mut header: Vec<String> = params.to_vec();
        header.extend(["check", "status", "residual", "tol", "note"].map(String::from));
        let mut t = CsvTable::new(&header);
        for (x, r) in points.iter().zip(&results) {
            let coords: Vec<String> = x.iter().map(|v| float_text(*v)).collect();
            match r {
                Ok(checks) => {
                    for c in checks {
                        let (residual, tol, note) = c.fields();
                        let mut row = coords.clone();
                        row.extend([
                            c.name.to_string(),
                            c.status().to_string(),
                            residual.map_or(String::new(), float_text),
                            tol.map_or(String::new(), float_text),
                            note,
                        ]);
                        t.row(&row);
                    }
                }
                Err(e) => {
                    let mut row = coords.clone();
                    row.extend([
                        "evaluation".to_string(),
                        "error".to_string(),
                        String::new(),
                        String::new(),
                        format!("{}: {e}", e.kind()),
                    ]);
                    t.row(&row);
                }
            }
        }
        t.finish()
    })?;
    Ok(Status::from_failures(!all_passed))
}

pub fn action(s: &Settings) -> Result<Status, ConfigError> {
    let model = s.model()?;
    if s.at.is_some() {
        return Err(config_error("action integrates over --grid, not --at"));
    }
    let grid = s
        .grid
        .as_deref()
        .ok_or_else(|| config_error("--grid is required (name=lo:hi:cells)"))?;
    let axes = config::parse_grid(grid, model.params())?;
    if axes.iter().any(|a| a.hi <= a.lo) {
        return Err(config_error("--grid: action needs hi > lo on every axis"));
    }
    let region: Vec<AxisRange> = axes
        .iter()
        .map(|a| AxisRange::new(a.lo, a.hi, a.count))
        .collect();
    let result = curvature_action(model, &region, s.measure);
    let region_json: Vec<Value> = model
        .params()
        .iter()
        .zip(&region)
        .map(|(name, r)| json!({"param": name, "lo": num(r.lo), "hi": num(r.hi), "cells": r.n_steps}))
        .collect();
    let mut doc = s.header("action");
    doc.insert("measure".into(), json!(s.measure.to_string()));
    doc.insert("region".into(), Value::Array(region_json));
    doc.insert(
        "action".into(),
        result.as_ref().map_or(Value::Null, |v| num(*v)),
    );
    doc.insert(
        "error".into(),
        result
            .as_ref()
            .err()
            .map_or(Value::Null, output::error_value),
    );
    s.emit(Value::Object(doc), || {
        let mut t =
            CsvTable::new(&["measure", "action", "error_kind", "error_message"].map(String::from));
        let [kind, message] = error_fields(result.as_ref().err());
        t.row(&[
            s.measure.to_string(),
            result.as_ref().map_or(String::new(), |v| float_text(*v)),
            kind,
            message,
        ]);
        t.finish()
    })?;
    Ok(Status::from_failures(result.is_err()))
}

/// Lint expressions, or a whole model file when `--model` is given.
pub fn parse_check(
    s: &Settings,
    model_source: Option<&str>,
    expressions: &[String],
    params: &[String],
) -> Result<Status, ConfigError> {
    if expressions.is_empty() && model_source.is_none() {
        return Err(config_error("give expressions to check or --model"));
    }
    let point = match &s.at {
        Some(at) if !expressions.is_empty() => Some(config::parse_point(at, params)?),
        _ => None,
    };
    let mut failed = false;
    let mut results = Vec::new();
    let mut rows = Vec::new();
    for source in expressions {
        let parsed = uhlmann_core::parse(source, params);
        let evaluated = match (&parsed, &point) {
            (Ok(e), Some(x)) => Some(e.eval_dual(x)),
            _ => None,
        };
        let error = match (&parsed, &evaluated) {
            (Err(e), _) | (_, Some(Err(e))) => Some(e.clone()),
            _ => None,
        };
        failed |= error.is_some();
        let value = match &evaluated {
            Some(Ok(v)) => json!({
                "value": [num(v.value.re), num(v.value.im)],
                "partials": v.partials.iter().map(|p| json!([num(p.re), num(p.im)])).collect::<Vec<_>>(),
            }),
            _ => Value::Null,
        };
        results.push(json!({
            "source": source,
            "ok": error.is_none(),
            "printed": parsed.as_ref().map_or(Value::Null, |e| json!(e.to_string())),
            "evaluation": value,
            "error": error.as_ref().map_or(Value::Null, output::expr_error_value),
        }));
        rows.push(vec![
            source.clone(),
            error.is_none().to_string(),
            parsed.as_ref().map_or(String::new(), |e| e.to_string()),
            error
                .as_ref()
                .map_or(String::new(), |e| e.kind().to_string()),
            error.as_ref().map_or(String::new(), |e| e.to_string()),
        ]);
    }
    if let Some(src) = model_source {
        let loaded = config::load(src);
        failed |= loaded.is_err();
        let message = loaded.as_ref().err().map(|e| e.to_string());
        results.push(json!({
            "source": src,
            "ok": loaded.is_ok(),
            "printed": Value::Null,
            "evaluation": Value::Null,
            "error": message.as_ref().map_or(Value::Null, |m| json!({"kind": "ModelError", "message": m})),
        }));
        rows.push(vec![
            src.to_string(),
            loaded.is_ok().to_string(),
            String::new(),
            if loaded.is_ok() {
                String::new()
            } else {
                "ModelError".into()
            },
            message.unwrap_or_default(),
        ]);
    }
    let mut doc = Map::new();
    doc.insert("command".into(), json!("parse-check"));
    doc.insert("params".into(), json!(params));
    doc.insert("results".into(), Value::Array(results));
    s.emit(Value::Object(doc), || {
        let mut t = CsvTable::new(
            &["source", "ok", "printed", "error_kind", "error_message"].map(String::from),
        );
        for r in &rows {
            t.row(r);
        }
        t.finish()
    })?;
    Ok(Status::from_failures(failed))
}
