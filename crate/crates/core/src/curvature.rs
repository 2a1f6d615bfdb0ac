//! Scalar Uhlmann curvature `C = -1/4 tr(F_{mu nu} F^{mu nu})`.
//!
//! Three routes compute the same number:
//!
//! * [`scalar_curvature`] uses only the spectrum of `rho` and the `G_mu`:
//!   `C = -sum_{mu nu} sum_{l,m in supp} lambda_l lambda_m / (lambda_l + lambda_m)^2
//!        <phi_l|[G_mu, G_nu]|phi_m> <phi_m|[G^mu, G^nu]|phi_l>`.
//!   No derivatives beyond `d rho` are needed; this is the production path.
//! * [`curvature_via_dual_contraction`] builds the dual curvature
//!   `F~_{mu nu} = (d_mu G_nu - d_nu G_mu) - [G_mu, G_nu]` with central
//!   differences of `G` and contracts it over the support.
//! * [`connection_form`] solves for the Uhlmann connection `A_mu` in the
//!   purification gauge `|Psi> = sum_n sqrt(lambda_n) |phi_n> (x) |n>` and
//!   differentiates it numerically to get `F = dA + A^A`.
//!
//! The finite-difference routes need a full-rank `rho`; the connection route
//! additionally needs a non-degenerate spectrum.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{self, GeometryPoint, Spectrum};
use crate::linalg::{self, c64, CMatrix, RMatrix};
use crate::model::{ModelDefinition, ModelPoint};

pub const DEFAULT_FD_STEP: f64 = 1e-4;
pub const MIN_FD_STEP: f64 = 1e-10;
/// Minimum gap between eigenvalues for the connection route.
pub const GAP_TOL: f64 = 1e-6;
/// Tolerated residual of the connection equation before anti-Hermitian
/// projection.
pub const CONNECTION_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Spectral,
    DualContraction,
    Connection,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Spectral => "spectral",
            Method::DualContraction => "dual-contraction",
            Method::Connection => "connection",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "spectral" => Ok(Method::Spectral),
            "dual-contraction" => Ok(Method::DualContraction),
            "connection" => Ok(Method::Connection),
            other => Err(format!(
                "unknown method `{other}` (expected spectral, dual-contraction or connection)"
            )),
        }
    }
}

/// Central-difference settings for the oracle routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdOptions {
    pub step: f64,
    /// Combine steps `h` and `h/2` as `(4 D(h/2) - D(h)) / 3`.
    pub richardson: bool,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self {
            step: DEFAULT_FD_STEP,
            richardson: false,
        }
    }
}

impl FdOptions {
    pub fn with_step(step: f64) -> Self {
        Self {
            step,
            richardson: false,
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.step >= MIN_FD_STEP) {
            return Err(Error::StepTooSmall(self.step));
        }
        Ok(())
    }

    /// Evaluate `f` at step `h` (and `h/2` when extrapolating) and combine.
    fn apply(&self, f: impl Fn(f64) -> Result<Vec<CMatrix>>) -> Result<Vec<CMatrix>> {
        let coarse = f(self.step)?;
        if !self.richardson {
            return Ok(coarse);
        }
        let fine = f(self.step / 2.0)?;
        Ok(fine
            .iter()
            .zip(&coarse)
            .map(|(fi, co)| (fi * c64(4.0, 0.0) - co) / c64(3.0, 0.0))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub rank: usize,
    pub condition_number: f64,
    pub fd_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureReport {
    /// Scalar curvature (dimensionless).
    pub c: f64,
    /// `pair_terms[(mu, nu)]`; symmetric, zero diagonal, sums to `c`.
    pub pair_terms: RMatrix,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

impl CurvatureReport {
    fn from_terms(pair_terms: RMatrix, method: Method, diagnostics: Diagnostics) -> Self {
        Self {
            c: pair_terms.iter().sum(),
            pair_terms,
            method,
            diagnostics,
        }
    }
}

/// Derivative-free spectral formula.
pub fn scalar_curvature(spectrum: &Spectrum, geometry: &GeometryPoint) -> CurvatureReport {
    let p = geometry.n_params();
    let r = spectrum.rank;
    let lower: Vec<CMatrix> = geometry
        .g_ops
        .iter()
        .map(|g| spectrum.to_eigenbasis(g))
        .collect();
    let upper: Vec<CMatrix> = geometry
        .g_raised
        .iter()
        .map(|g| spectrum.to_eigenbasis(g))
        .collect();
    let weight = |l: usize, m: usize| {
        let (a, b) = (spectrum.eigenvalues[l], spectrum.eigenvalues[m]);
        a * b / ((a + b) * (a + b))
    };
    let mut terms = RMatrix::zeros(p, p);
    for mu in 0..p {
        for nu in (mu + 1)..p {
            let x = linalg::commutator(&lower[mu], &lower[nu]);
            let y = linalg::commutator(&upper[mu], &upper[nu]);
            let mut acc = Complex64::new(0.0, 0.0);
            for l in 0..r {
                for m in 0..r {
                    acc += x[(l, m)] * y[(m, l)] * weight(l, m);
                }
            }
            terms[(mu, nu)] = -acc.re;
            terms[(nu, mu)] = -acc.re;
        }
    }
    CurvatureReport::from_terms(
        terms,
        Method::Spectral,
        Diagnostics {
            rank: r,
            condition_number: geometry.condition_number,
            fd_step: None,
        },
    )
}

/// Pure-state form `C = sum_{mu nu} |Im<G_mu G_nu> Im<G^mu G^nu>|`.
pub fn scalar_curvature_pure(
    spectrum: &Spectrum,
    geometry: &GeometryPoint,
) -> Result<CurvatureReport> {
    if spectrum.rank != 1 {
        return Err(Error::NotPure {
            rank: spectrum.rank,
        });
    }
    let psi = spectrum.eigenvectors.column(0).into_owned();
    let expect = |a: &CMatrix, b: &CMatrix| (psi.adjoint() * a * b * &psi)[(0, 0)];
    let p = geometry.n_params();
    let mut terms = RMatrix::zeros(p, p);
    for mu in 0..p {
        for nu in 0..p {
            let lower = expect(&geometry.g_ops[mu], &geometry.g_ops[nu]).im;
            let upper = expect(&geometry.g_raised[mu], &geometry.g_raised[nu]).im;
            terms[(mu, nu)] = (lower * upper).abs();
        }
    }
    Ok(CurvatureReport::from_terms(
        terms,
        Method::Spectral,
        Diagnostics {
            rank: 1,
            condition_number: geometry.condition_number,
            fd_step: None,
        },
    ))
}

fn shifted(coords: &[f64], mu: usize, delta: f64) -> Vec<f64> {
    let mut x = coords.to_vec();
    x[mu] += delta;
    x
}

/// Evaluate and diagonalize, insisting on full rank.
fn full_rank_point(model: &ModelDefinition, coords: &[f64]) -> Result<(ModelPoint, Spectrum)> {
    let point = model.evaluate(coords)?;
    let spectrum = geometry::spectral_decompose(&point, model.rank_tol)?;
    if spectrum.rank != spectrum.dim() {
        return Err(Error::RankChange(format!(
            "rank {} < dimension {} at {coords:?}; finite-difference routes need full rank",
            spectrum.rank,
            spectrum.dim()
        )));
    }
    Ok((point, spectrum))
}

fn g_ops_full_rank(model: &ModelDefinition, coords: &[f64]) -> Result<Vec<CMatrix>> {
    let (point, spectrum) = full_rank_point(model, coords)?;
    point
        .drho
        .iter()
        .map(|d| geometry::solve_g(&spectrum, d))
        .collect()
}

/// `d_mu G_nu` for every `nu`, by central differences along `mu`.
fn g_derivative_along(
    model: &ModelDefinition,
    coords: &[f64],
    mu: usize,
    fd: &FdOptions,
) -> Result<Vec<CMatrix>> {
    fd.apply(|h| {
        let plus = g_ops_full_rank(model, &shifted(coords, mu, h))?;
        let minus = g_ops_full_rank(model, &shifted(coords, mu, -h))?;
        Ok(plus
            .iter()
            .zip(&minus)
            .map(|(p, m)| (p - m) / c64(2.0 * h, 0.0))
            .collect())
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualCurvature {
    pub pair: (usize, usize),
    /// `F~_{mu nu}`.
    pub matrix: CMatrix,
    /// Max element of `F~_{mu nu} + F~_{nu mu}`.
    pub antisymmetry_residual: f64,
    /// Max element of `F~ rho + rho F~^dagger`.
    pub rho_relation_residual: f64,
    pub fd_step: f64,
}

fn assemble_dual(
    pair: (usize, usize),
    g_ops: &[CMatrix],
    d_along_mu: &[CMatrix],
    d_along_nu: &[CMatrix],
    rho: &CMatrix,
    fd_step: f64,
) -> DualCurvature {
    let (mu, nu) = pair;
    let build = |dm: &[CMatrix], dn: &[CMatrix], a: usize, b: usize| {
        (&dm[b] - &dn[a]) - linalg::commutator(&g_ops[a], &g_ops[b])
    };
    let matrix = build(d_along_mu, d_along_nu, mu, nu);
    let reversed = build(d_along_nu, d_along_mu, nu, mu);
    let antisymmetry_residual = linalg::max_abs(&(&matrix + &reversed));
    let rho_relation_residual = linalg::max_abs(&(&matrix * rho + rho * matrix.adjoint()));
    DualCurvature {
        pair,
        matrix,
        antisymmetry_residual,
        rho_relation_residual,
        fd_step,
    }
}

/// `F~_{mu nu} = (d_mu G_nu - d_nu G_mu) - [G_mu, G_nu]` with numerical `dG`.
pub fn dual_curvature(
    model: &ModelDefinition,
    coords: &[f64],
    pair: (usize, usize),
    fd: &FdOptions,
) -> Result<DualCurvature> {
    fd.check()?;
    let p = model.n_params();
    let (mu, nu) = pair;
    if mu >= p || nu >= p {
        return Err(Error::InvalidArgument(format!(
            "pair {pair:?} out of range for {p} parameters"
        )));
    }
    let (point, spectrum) = full_rank_point(model, coords)?;
    let g_ops = point
        .drho
        .iter()
        .map(|d| geometry::solve_g(&spectrum, d))
        .collect::<Result<Vec<_>>>()?;
    let d_mu = g_derivative_along(model, coords, mu, fd)?;
    let d_nu = if nu == mu {
        d_mu.clone()
    } else {
        g_derivative_along(model, coords, nu, fd)?
    };
    Ok(assemble_dual(
        pair, &g_ops, &d_mu, &d_nu, &point.rho, fd.step,
    ))
}

/// Dual curvatures for every pair `mu < nu`, sharing the `dG` evaluations.
pub fn dual_curvatures(
    model: &ModelDefinition,
    coords: &[f64],
    fd: &FdOptions,
) -> Result<Vec<DualCurvature>> {
    fd.check()?;
    let (point, spectrum) = full_rank_point(model, coords)?;
    let g_ops = point
        .drho
        .iter()
        .map(|d| geometry::solve_g(&spectrum, d))
        .collect::<Result<Vec<_>>>()?;
    let p = model.n_params();
    let derivs = (0..p)
        .map(|mu| g_derivative_along(model, coords, mu, fd))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for mu in 0..p {
        for nu in (mu + 1)..p {
            out.push(assemble_dual(
                (mu, nu),
                &g_ops,
                &derivs[mu],
                &derivs[nu],
                &point.rho,
                fd.step,
            ));
        }
    }
    Ok(out)
}

fn condition_from_inverse(metric_inv: &RMatrix) -> f64 {
    match linalg::symmetric_eigh(metric_inv) {
        Ok((values, _)) => values[0] / values[values.len() - 1],
        Err(_) => f64::NAN,
    }
}

/// `F^{mu nu} = g^{mu alpha} g^{nu beta} F_{alpha beta}` for a full table.
fn raise_pair_table(table: &[Vec<CMatrix>], metric_inv: &RMatrix) -> Vec<Vec<CMatrix>> {
    let p = table.len();
    let d = table.first().map_or(0, |row| row[0].nrows());
    (0..p)
        .map(|mu| {
            (0..p)
                .map(|nu| {
                    let mut acc = CMatrix::zeros(d, d);
                    for (alpha, row) in table.iter().enumerate() {
                        for (beta, f) in row.iter().enumerate() {
                            let w = metric_inv[(mu, alpha)] * metric_inv[(nu, beta)];
                            if w != 0.0 {
                                acc += f * c64(w, 0.0);
                            }
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// `C = -1/4 sum_{mu nu} sum_{l,m in supp} <phi_l|F~_{mu nu}|phi_m><phi_m|F~^{mu nu}|phi_l>`.
pub fn curvature_via_dual_contraction(
    spectrum: &Spectrum,
    duals: &[DualCurvature],
    metric_inv: &RMatrix,
) -> Result<CurvatureReport> {
    let p = metric_inv.nrows();
    let d = spectrum.dim();
    let mut table = vec![vec![CMatrix::zeros(d, d); p]; p];
    let mut seen = vec![vec![false; p]; p];
    for dual in duals {
        let (mu, nu) = dual.pair;
        if mu >= p || nu >= p {
            return Err(Error::DimensionMismatch(format!(
                "dual pair {:?} for {p} parameters",
                dual.pair
            )));
        }
        table[mu][nu] = dual.matrix.clone();
        table[nu][mu] = -&dual.matrix;
        seen[mu][nu] = true;
        seen[nu][mu] = true;
    }
    for (mu, row) in seen.iter().enumerate() {
        for (nu, &done) in row.iter().enumerate().skip(mu + 1) {
            if !done {
                return Err(Error::InvalidArgument(format!(
                    "missing dual curvature for pair ({mu}, {nu})"
                )));
            }
        }
    }
    let raised = raise_pair_table(&table, metric_inv);
    let r = spectrum.rank;
    let mut terms = RMatrix::zeros(p, p);
    for mu in 0..p {
        for nu in 0..p {
            if mu == nu {
                continue;
            }
            let lower = spectrum.to_eigenbasis(&table[mu][nu]);
            let upper = spectrum.to_eigenbasis(&raised[mu][nu]);
            let mut acc = Complex64::new(0.0, 0.0);
            for l in 0..r {
                for m in 0..r {
                    acc += lower[(l, m)] * upper[(m, l)];
                }
            }
            terms[(mu, nu)] = -0.25 * acc.re;
        }
    }
    Ok(CurvatureReport::from_terms(
        terms,
        Method::DualContraction,
        Diagnostics {
            rank: r,
            condition_number: condition_from_inverse(metric_inv),
            fd_step: duals.first().map(|d| d.fd_step),
        },
    ))
}

/// Dual-curvature route end to end: geometry at `coords`, all `F~` pairs,
/// contraction.
pub fn dual_contraction_curvature(
    model: &ModelDefinition,
    coords: &[f64],
    fd: &FdOptions,
) -> Result<CurvatureReport> {
    let analysis = geometry::analyze(model, coords)?;
    if analysis.spectrum.rank != analysis.spectrum.dim() {
        return Err(Error::RankChange(format!(
            "rank {} < dimension {}; dual contraction needs full rank",
            analysis.spectrum.rank,
            analysis.spectrum.dim()
        )));
    }
    let duals = dual_curvatures(model, coords, fd)?;
    let mut report =
        curvature_via_dual_contraction(&analysis.spectrum, &duals, &analysis.geometry.metric_inv)?;
    report.diagnostics.condition_number = analysis.geometry.condition_number;
    report.diagnostics.fd_step = Some(fd.step);
    Ok(report)
}

/// Uhlmann connection and its curvature in the spectral purification gauge.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionFrame {
    /// `sqrt(lambda_n)`, the purification amplitudes at the center point.
    pub amplitudes: Vec<f64>,
    /// Eigenvectors `|phi_n>` at the center; the phase reference of the gauge.
    pub eigenvectors: CMatrix,
    /// Anti-Hermitian `A_mu`, `r x r`.
    pub a: Vec<CMatrix>,
    /// `F_{mu nu} = d_mu A_nu - d_nu A_mu + [A_mu, A_nu]`.
    pub f: Vec<Vec<CMatrix>>,
    /// Worst residual of the connection equation before projection.
    pub connection_residual: f64,
    pub fd_step: f64,
}

impl ConnectionFrame {
    /// Per-pair terms of `-1/4 tr(F_{mu nu} F^{mu nu})`.
    pub fn pair_terms(&self, metric_inv: &RMatrix) -> RMatrix {
        let p = self.f.len();
        let raised = raise_pair_table(&self.f, metric_inv);
        let mut terms = RMatrix::zeros(p, p);
        for mu in 0..p {
            for nu in 0..p {
                if mu != nu {
                    terms[(mu, nu)] =
                        -0.25 * linalg::trace(&(&self.f[mu][nu] * &raised[mu][nu])).re;
                }
            }
        }
        terms
    }

    pub fn scalar_curvature(&self, metric_inv: &RMatrix) -> f64 {
        self.pair_terms(metric_inv).iter().sum()
    }

    /// Apply a constant ancilla unitary `U`: `A -> U A U^dagger`,
    /// `F -> U F U^dagger`.
    pub fn gauge_transformed(&self, u: &CMatrix) -> Self {
        let conj = |m: &CMatrix| u * m * u.adjoint();
        Self {
            amplitudes: self.amplitudes.clone(),
            eigenvectors: self.eigenvectors.clone(),
            a: self.a.iter().map(conj).collect(),
            f: self
                .f
                .iter()
                .map(|row| row.iter().map(conj).collect())
                .collect(),
            connection_residual: self.connection_residual,
            fd_step: self.fd_step,
        }
    }
}

/// Eigen-frame at `coords` with each eigenvector phase-aligned to the
/// matching column of `reference`.
struct AlignedFrame {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
    point: ModelPoint,
}

fn aligned_frame(
    model: &ModelDefinition,
    coords: &[f64],
    reference: Option<&CMatrix>,
) -> Result<AlignedFrame> {
    let (point, spectrum) = full_rank_point(model, coords)?;
    let gap = spectrum
        .eigenvalues
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::INFINITY, f64::min);
    if gap < GAP_TOL {
        return Err(Error::DegenerateSpectrum { gap });
    }
    let mut v = spectrum.eigenvectors;
    if let Some(reference) = reference {
        for k in 0..v.ncols() {
            let overlap = reference.column(k).dotc(&v.column(k));
            if overlap.norm() < 0.5 {
                return Err(Error::DegenerateSpectrum { gap });
            }
            let phase = Complex64::from_polar(1.0, -overlap.arg());
            v.column_mut(k).iter_mut().for_each(|x| *x *= phase);
        }
    }
    Ok(AlignedFrame {
        eigenvalues: spectrum.eigenvalues,
        eigenvectors: v,
        point,
    })
}

/// `A_mu` at `coords` for every `mu`, in the gauge fixed by `reference`.
/// Returns the projected connection and the raw residual.
fn connection_at(
    model: &ModelDefinition,
    coords: &[f64],
    reference: &CMatrix,
    h: f64,
) -> Result<(Vec<CMatrix>, f64)> {
    let center = aligned_frame(model, coords, Some(reference))?;
    let d = center.eigenvalues.len();
    let sqrt_l: Vec<f64> = center.eigenvalues.iter().map(|l| l.sqrt()).collect();
    let v = &center.eigenvectors;
    let mut out = Vec::with_capacity(model.n_params());
    let mut worst: f64 = 0.0;
    for mu in 0..model.n_params() {
        let plus = aligned_frame(model, &shifted(coords, mu, h), Some(reference))?;
        let minus = aligned_frame(model, &shifted(coords, mu, -h), Some(reference))?;
        // <phi_k | d_mu phi_m>
        let dv = (&plus.eigenvectors - &minus.eigenvectors) / c64(2.0 * h, 0.0);
        let overlap = v.adjoint() * dv;
        let drho_hat = v.adjoint() * &center.point.drho[mu] * v;
        let mut a = CMatrix::zeros(d, d);
        for m in 0..d {
            for k in 0..d {
                let g_km = drho_hat[(k, m)] / (center.eigenvalues[k] + center.eigenvalues[m]);
                let mut num = (g_km - overlap[(k, m)]) * sqrt_l[m];
                if k == m {
                    // d sqrt(lambda_m) = <phi_m|d rho|phi_m> / (2 sqrt(lambda_m))
                    num -= drho_hat[(m, m)].re / (2.0 * sqrt_l[m]);
                }
                a[(m, k)] = num / sqrt_l[k];
            }
        }
        let projected = (&a - a.adjoint()) * c64(0.5, 0.0);
        // Residual of |d Psi> = (G (x) I)|Psi> - (I (x) A)|Psi> in the
        // <phi_k| (x) <m| components, i.e. sqrt(lambda_k) (A_raw - A)_{mk}.
        for m in 0..d {
            for k in 0..d {
                worst = worst.max(((a[(m, k)] - projected[(m, k)]) * sqrt_l[k]).norm());
            }
        }
        out.push(projected);
    }
    Ok((out, worst))
}

/// Connection 1-form and curvature 2-form by finite differences.
pub fn connection_form(
    model: &ModelDefinition,
    coords: &[f64],
    fd: &FdOptions,
) -> Result<ConnectionFrame> {
    fd.check()?;
    let reference = aligned_frame(model, coords, None)?;
    let refv = reference.eigenvectors.clone();
    let p = model.n_params();

    let (a_center, residual_center) = connection_at(model, coords, &refv, fd.step)?;
    let residual = std::cell::Cell::new(residual_center);
    let f_flat = fd.apply(|h| {
        let (a0, _) = connection_at(model, coords, &refv, h)?;
        let mut derivs = Vec::with_capacity(p);
        for mu in 0..p {
            let (ap, rp) = connection_at(model, &shifted(coords, mu, h), &refv, h)?;
            let (am, rm) = connection_at(model, &shifted(coords, mu, -h), &refv, h)?;
            residual.set(residual.get().max(rp).max(rm));
            let d: Vec<CMatrix> = ap
                .iter()
                .zip(&am)
                .map(|(x, y)| (x - y) / c64(2.0 * h, 0.0))
                .collect();
            derivs.push(d);
        }
        let mut flat = Vec::with_capacity(p * p);
        for mu in 0..p {
            for nu in 0..p {
                flat.push(&derivs[mu][nu] - &derivs[nu][mu] + linalg::commutator(&a0[mu], &a0[nu]));
            }
        }
        Ok(flat)
    })?;
    let residual = residual.get();
    if residual > CONNECTION_TOL {
        return Err(Error::Residual {
            check: "connection equation",
            residual,
            tol: CONNECTION_TOL,
        });
    }
    let f = f_flat.chunks(p).map(|row| row.to_vec()).collect();
    Ok(ConnectionFrame {
        amplitudes: reference.eigenvalues.iter().map(|l| l.sqrt()).collect(),
        eigenvectors: refv,
        a: a_center,
        f,
        connection_residual: residual,
        fd_step: fd.step,
    })
}

/// Connection route end to end.
pub fn connection_curvature(
    model: &ModelDefinition,
    coords: &[f64],
    fd: &FdOptions,
) -> Result<CurvatureReport> {
    let analysis = geometry::analyze(model, coords)?;
    let frame = connection_form(model, coords, fd)?;
    let terms = frame.pair_terms(&analysis.geometry.metric_inv);
    Ok(CurvatureReport::from_terms(
        terms,
        Method::Connection,
        Diagnostics {
            rank: analysis.spectrum.rank,
            condition_number: analysis.geometry.condition_number,
            fd_step: Some(fd.step),
        },
    ))
}

/// Scalar curvature at `coords` by the requested route.
pub fn curvature_at(
    model: &ModelDefinition,
    coords: &[f64],
    method: Method,
    fd: &FdOptions,
) -> Result<CurvatureReport> {
    match method {
        Method::Spectral => {
            let a = geometry::analyze(model, coords)?;
            Ok(scalar_curvature(&a.spectrum, &a.geometry))
        }
        Method::DualContraction => dual_contraction_curvature(model, coords, fd),
        Method::Connection => connection_curvature(model, coords, fd),
    }
}

/// Integration measure for [`curvature_action`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Measure {
    /// `sqrt(det g) dx`.
    #[default]
    Riemannian,
    /// Plain coordinate volume `dx`.
    Lebesgue,
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "riemannian" => Ok(Measure::Riemannian),
            "lebesgue" => Ok(Measure::Lebesgue),
            other => Err(format!(
                "unknown measure `{other}` (expected riemannian or lebesgue)"
            )),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Riemannian => "riemannian",
            Measure::Lebesgue => "lebesgue",
        })
    }
}

/// One integration axis: `n_steps` equal cells over `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRange {
    pub lo: f64,
    pub hi: f64,
    pub n_steps: usize,
}

impl AxisRange {
    pub fn new(lo: f64, hi: f64, n_steps: usize) -> Self {
        Self { lo, hi, n_steps }
    }

    fn width(&self) -> f64 {
        (self.hi - self.lo) / self.n_steps as f64
    }

    fn midpoint(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.width()
    }
}

/// Midpoint-rule integral of the spectral `C` over a box in parameter space.
/// Nodes are evaluated in parallel and summed in grid order.
pub fn curvature_action(
    model: &ModelDefinition,
    region: &[AxisRange],
    measure: Measure,
) -> Result<f64> {
    let p = model.n_params();
    if region.len() != p {
        return Err(Error::WrongArity {
            expected: p,
            got: region.len(),
        });
    }
    if region.iter().any(|ax| ax.n_steps == 0 || !(ax.hi > ax.lo)) {
        return Err(Error::InvalidArgument(
            "each axis needs hi > lo and at least one step".into(),
        ));
    }
    let total: usize = region.iter().map(|ax| ax.n_steps).product();
    let cell: f64 = region.iter().map(AxisRange::width).product();
    let node = |flat: usize| -> Vec<f64> {
        let mut rest = flat;
        let mut coords = vec![0.0; p];
        for k in (0..p).rev() {
            let n = region[k].n_steps;
            coords[k] = region[k].midpoint(rest % n);
            rest /= n;
        }
        coords
    };
    let values: Vec<Result<f64>> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let coords = node(flat);
            let eval = || -> Result<f64> {
                let a = geometry::analyze(model, &coords)?;
                let c = scalar_curvature(&a.spectrum, &a.geometry).c;
                Ok(match measure {
                    Measure::Lebesgue => c,
                    Measure::Riemannian => c * a.geometry.metric.determinant().max(0.0).sqrt(),
                })
            };
            eval().map_err(|e| Error::AtNode {
                coords: coords.clone(),
                source: Box::new(e),
            })
        })
        .collect();
    let mut sum = 0.0;
    for v in values {
        sum += v?;
    }
    Ok(sum * cell)
}

/// Square root of `rho` eigenvalues as a vector, for callers building
/// purifications.
pub fn purification_amplitudes(spectrum: &Spectrum) -> DVector<f64> {
    DVector::from_iterator(
        spectrum.dim(),
        (0..spectrum.dim()).map(|l| spectrum.support_eigenvalue(l).sqrt()),
    )
}
