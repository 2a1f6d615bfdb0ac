//! Spectral decomposition, the `G` operators and the Bures metric.
//!
//! `G_mu` solves `d_mu rho = G_mu rho + rho G_mu`. In the eigenbasis of `rho`
//! this is diagonal: `(G_mu)_{lm} = (d_mu rho)_{lm} / (lambda_l + lambda_m)`
//! wherever at least one index lies in the support. The kernel-kernel block
//! is unconstrained and set to zero; no exported quantity depends on it.
//! The symmetric logarithmic derivative is `L_mu = 2 G_mu`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix, RMatrix};
use crate::model::{ModelDefinition, ModelPoint};

/// Max element allowed in the kernel-kernel block of `d rho`.
pub const KERNEL_TOL: f64 = 1e-8;
/// Smallest admissible eigenvalue of the Bures metric.
pub const METRIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors `|phi_l>`.
    pub eigenvectors: CMatrix,
    pub rank: usize,
    /// Orthogonal projector onto the support.
    pub projector: CMatrix,
}

impl Spectrum {
    /// Diagonalize `rho`. An eigenvalue counts towards the rank when it
    /// exceeds `rank_tol` times the largest eigenvalue.
    pub fn from_rho(rho: &CMatrix, rank_tol: f64) -> Result<Self> {
        let (eigenvalues, eigenvectors) = linalg::hermitian_eigh(rho)?;
        let largest = eigenvalues.first().copied().unwrap_or(0.0);
        let rank = eigenvalues
            .iter()
            .take_while(|&&l| l > rank_tol * largest)
            .count();
        Ok(Self::assemble(eigenvalues, eigenvectors, rank))
    }

    fn assemble(eigenvalues: Vec<f64>, eigenvectors: CMatrix, rank: usize) -> Self {
        let support = eigenvectors.columns(0, rank);
        let projector = support * support.adjoint();
        Self {
            eigenvalues,
            eigenvectors,
            rank,
            projector,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn in_support(&self, l: usize) -> bool {
        l < self.rank
    }

    /// Eigenvalue `l`, with kernel eigenvalues reported as exactly zero.
    pub fn support_eigenvalue(&self, l: usize) -> f64 {
        if self.in_support(l) {
            self.eigenvalues[l]
        } else {
            0.0
        }
    }

    /// `V^dagger m V`.
    pub fn to_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        self.eigenvectors.adjoint() * m * &self.eigenvectors
    }

    /// `V m V^dagger`.
    pub fn from_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        &self.eigenvectors * m * self.eigenvectors.adjoint()
    }

    fn diagonal_operator(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d = DVector::from_iterator(
            self.dim(),
            (0..self.dim()).map(|l| c64(f(self.support_eigenvalue(l)), 0.0)),
        );
        self.from_eigenbasis(&CMatrix::from_diagonal(&d))
    }

    /// `rho` rebuilt from the support eigenpairs.
    pub fn rho(&self) -> CMatrix {
        self.diagonal_operator(|l| l)
    }

    pub fn sqrt_rho(&self) -> CMatrix {
        self.diagonal_operator(f64::sqrt)
    }

    /// Copy with eigenvector `l` multiplied by `exp(i phases[l])`.
    pub fn with_phases(&self, phases: &[f64]) -> Self {
        let mut v = self.eigenvectors.clone();
        for (l, &theta) in phases.iter().enumerate() {
            let z = Complex64::from_polar(1.0, theta);
            v.column_mut(l).iter_mut().for_each(|x| *x *= z);
        }
        Self::assemble(self.eigenvalues.clone(), v, self.rank)
    }
}

pub fn spectral_decompose(point: &ModelPoint, rank_tol: f64) -> Result<Spectrum> {
    Spectrum::from_rho(&point.rho, rank_tol)
}

/// Solve `d rho = G rho + rho G` for Hermitian `G` (kernel-kernel block zero).
pub fn solve_g(spectrum: &Spectrum, drho: &CMatrix) -> Result<CMatrix> {
    let d = spectrum.dim();
    if drho.nrows() != d || drho.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "d rho is {}x{}, rho is {d}x{d}",
            drho.nrows(),
            drho.ncols()
        )));
    }
    let r = spectrum.rank;
    let dd = spectrum.to_eigenbasis(drho);
    let mut kernel_max: f64 = 0.0;
    for l in r..d {
        for m in r..d {
            kernel_max = kernel_max.max(dd[(l, m)].norm());
        }
    }
    if kernel_max > KERNEL_TOL {
        return Err(Error::RankChange(format!(
            "kernel block of d rho has element {kernel_max:.3e} > {KERNEL_TOL:.0e}"
        )));
    }
    let mut g = CMatrix::zeros(d, d);
    for l in 0..d {
        for m in 0..d {
            if spectrum.in_support(l) || spectrum.in_support(m) {
                let denom = spectrum.support_eigenvalue(l) + spectrum.support_eigenvalue(m);
                g[(l, m)] = dd[(l, m)] / denom;
            }
        }
    }
    Ok(linalg::hermitian_part(&spectrum.from_eigenbasis(&g)))
}

/// Max residual of `G rho + rho G - d rho` over the blocks touching the
/// support, measured in the eigenbasis.
pub fn lyapunov_residual(spectrum: &Spectrum, g: &CMatrix, drho: &CMatrix) -> f64 {
    let gg = spectrum.to_eigenbasis(g);
    let dd = spectrum.to_eigenbasis(drho);
    let d = spectrum.dim();
    let mut worst: f64 = 0.0;
    for l in 0..d {
        for m in 0..d {
            if !(spectrum.in_support(l) || spectrum.in_support(m)) {
                continue;
            }
            let lhs = gg[(l, m)] * (spectrum.eigenvalues[l] + spectrum.eigenvalues[m]);
            worst = worst.max((lhs - dd[(l, m)]).norm());
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricData {
    /// Bures metric `g_{mu nu}`.
    pub metric: RMatrix,
    pub metric_inv: RMatrix,
    /// Quantum Fisher information `K = 4 g`.
    pub qfi: RMatrix,
    pub condition_number: f64,
}

/// `g_{mu nu} = tr(rho (G_mu G_nu + G_nu G_mu) / 2)` and its inverse.
pub fn bures_metric(spectrum: &Spectrum, g_ops: &[CMatrix]) -> Result<MetricData> {
    let p = g_ops.len();
    let hats: Vec<CMatrix> = g_ops.iter().map(|g| spectrum.to_eigenbasis(g)).collect();
    let mut metric = RMatrix::zeros(p, p);
    for mu in 0..p {
        for nu in mu..p {
            let prod = &hats[mu] * &hats[nu];
            let v: f64 = (0..spectrum.rank)
                .map(|l| spectrum.eigenvalues[l] * prod[(l, l)].re)
                .sum();
            metric[(mu, nu)] = v;
            metric[(nu, mu)] = v;
        }
    }
    let (values, vectors) = linalg::symmetric_eigh(&metric)?;
    let min = values.last().copied().unwrap_or(0.0);
    if !(min > METRIC_TOL) {
        return Err(Error::DegenerateMetric {
            min_eigenvalue: min,
        });
    }
    let inv_diag =
        RMatrix::from_diagonal(&DVector::from_iterator(p, values.iter().map(|v| 1.0 / v)));
    let inv = &vectors * inv_diag * vectors.transpose();
    let metric_inv = (&inv + inv.transpose()) * 0.5;
    let qfi = &metric * 4.0;
    Ok(MetricData {
        metric,
        metric_inv,
        qfi,
        condition_number: values[0] / min,
    })
}

/// `G^mu = g^{mu alpha} G_alpha`.
pub fn raise_indices(g_ops: &[CMatrix], metric_inv: &RMatrix) -> Result<Vec<CMatrix>> {
    let p = g_ops.len();
    if metric_inv.nrows() != p || metric_inv.ncols() != p {
        return Err(Error::DimensionMismatch(format!(
            "{p} operators but inverse metric is {}x{}",
            metric_inv.nrows(),
            metric_inv.ncols()
        )));
    }
    let d = g_ops.first().map_or(0, |g| g.nrows());
    Ok((0..p)
        .map(|mu| {
            g_ops
                .iter()
                .enumerate()
                .fold(CMatrix::zeros(d, d), |acc, (alpha, g)| {
                    acc + g * c64(metric_inv[(mu, alpha)], 0.0)
                })
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryPoint {
    /// `G_mu`, lower index.
    pub g_ops: Vec<CMatrix>,
    /// `G^mu`, raised with the inverse metric.
    pub g_raised: Vec<CMatrix>,
    pub metric: RMatrix,
    pub metric_inv: RMatrix,
    pub qfi: RMatrix,
    pub condition_number: f64,
}

impl GeometryPoint {
    pub fn compute(spectrum: &Spectrum, point: &ModelPoint) -> Result<Self> {
        let g_ops = point
            .drho
            .iter()
            .map(|d| solve_g(spectrum, d))
            .collect::<Result<Vec<_>>>()?;
        Self::from_g_ops(spectrum, g_ops)
    }

    pub fn from_g_ops(spectrum: &Spectrum, g_ops: Vec<CMatrix>) -> Result<Self> {
        let MetricData {
            metric,
            metric_inv,
            qfi,
            condition_number,
        } = bures_metric(spectrum, &g_ops)?;
        let g_raised = raise_indices(&g_ops, &metric_inv)?;
        Ok(Self {
            g_ops,
            g_raised,
            metric,
            metric_inv,
            qfi,
            condition_number,
        })
    }

    pub fn n_params(&self) -> usize {
        self.g_ops.len()
    }

    /// Symmetric logarithmic derivative `L_mu = 2 G_mu`.
    pub fn sld(&self, mu: usize) -> CMatrix {
        &self.g_ops[mu] * c64(2.0, 0.0)
    }
}

/// Everything the curvature and estimation routines need at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointAnalysis {
    pub point: ModelPoint,
    pub spectrum: Spectrum,
    pub geometry: GeometryPoint,
}

/// Evaluate, diagonalize and solve for the geometry at `coords`, using the
/// model's own `rank_tol`.
pub fn analyze(model: &ModelDefinition, coords: &[f64]) -> Result<PointAnalysis> {
    analyze_with(model, coords, model.rank_tol)
}

pub fn analyze_with(
    model: &ModelDefinition,
    coords: &[f64],
    rank_tol: f64,
) -> Result<PointAnalysis> {
    let point = model.evaluate(coords)?;
    let spectrum = spectral_decompose(&point, rank_tol)?;
    let geometry = GeometryPoint::compute(&spectrum, &point)?;
    Ok(PointAnalysis {
        point,
        spectrum,
        geometry,
    })
}
