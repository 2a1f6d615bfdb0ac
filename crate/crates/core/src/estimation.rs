//! Estimation-side quantities: the partial commutativity condition (PCC),
//! the incompatibility factor `gamma` and the two-parameter precision
//! tradeoff `sqrt|nEK - I| + sqrt((1 - gamma)|nEK|) >= 1`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Spectrum, METRIC_TOL};
use crate::linalg::{self, c64, CMatrix, RMatrix};

pub const DEFAULT_PCC_TOL: f64 = 1e-9;
/// Slack on the tradeoff inequality and on the determinant signs.
pub const TRADEOFF_TOL: f64 = 1e-12;
/// Agreement required between the general and pure-state `gamma`.
pub const PURE_GAMMA_TOL: f64 = 1e-10;
/// Relative width at which boundary bisection stops.
pub const BISECTION_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PccResult {
    pub satisfied: bool,
    /// Max over pairs of `max |(P [L_mu, L_nu] P)_{ij}|`.
    pub residual: f64,
    pub pcc_tol: f64,
}

/// PCC as the support-projected SLD commutator, `L_mu = 2 G_mu`.
pub fn pcc_check(spectrum: &Spectrum, g_ops: &[CMatrix], pcc_tol: f64) -> PccResult {
    let p_proj = &spectrum.projector;
    let mut residual: f64 = 0.0;
    for mu in 0..g_ops.len() {
        for nu in (mu + 1)..g_ops.len() {
            let comm = linalg::commutator(&g_ops[mu], &g_ops[nu]) * c64(4.0, 0.0);
            residual = residual.max(linalg::max_abs(&(p_proj * comm * p_proj)));
        }
    }
    PccResult {
        satisfied: residual <= pcc_tol,
        residual,
        pcc_tol,
    }
}

/// `gamma = ||sqrt(rho) [L_1, L_2] sqrt(rho)||_1^2 / (4 |K|)`.
///
/// For rank one the result is also checked against
/// `|Im<G_1 G_2>|^2 / |g|`.
pub fn incompatibility_gamma(spectrum: &Spectrum, g_ops: &[CMatrix], qfi: &RMatrix) -> Result<f64> {
    if g_ops.len() != 2 || qfi.nrows() != 2 || qfi.ncols() != 2 {
        return Err(Error::WrongArity {
            expected: 2,
            got: g_ops.len(),
        });
    }
    let det_k = qfi.determinant();
    if det_k <= METRIC_TOL {
        let (values, _) = linalg::symmetric_eigh(qfi)?;
        return Err(Error::DegenerateMetric {
            min_eigenvalue: values[1],
        });
    }
    let sqrt_rho = spectrum.sqrt_rho();
    let comm = linalg::commutator(&g_ops[0], &g_ops[1]) * c64(4.0, 0.0);
    let sandwiched = &sqrt_rho * comm * &sqrt_rho;
    let norm = linalg::schatten1(&sandwiched);
    let gamma = norm * norm / (4.0 * det_k);

    if spectrum.rank == 1 {
        let psi = spectrum.eigenvectors.column(0).into_owned();
        let im = (psi.adjoint() * &g_ops[0] * &g_ops[1] * &psi)[(0, 0)].im;
        let pure = im * im / (det_k / 16.0);
        let residual = (pure - gamma).abs();
        if residual > PURE_GAMMA_TOL * gamma.max(1.0) {
            return Err(Error::Residual {
                check: "pure-state gamma",
                residual,
                tol: PURE_GAMMA_TOL,
            });
        }
    }
    Ok(gamma)
}

/// Covariance `E` of `n` repetitions against QFI `K` and factor `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffQuery {
    pub e: RMatrix,
    pub n: u32,
    pub k: RMatrix,
    pub gamma: f64,
}

impl TradeoffQuery {
    /// Checks shapes, symmetry, `E >= 0`, `n > 0` and `0 <= gamma <= 1 + 1e-10`.
    pub fn new(e: RMatrix, n: u32, k: RMatrix, gamma: f64) -> Result<Self> {
        let square2 = |m: &RMatrix| m.nrows() == 2 && m.ncols() == 2;
        if !square2(&e) || !square2(&k) {
            return Err(Error::DimensionMismatch("E and K must be 2x2".into()));
        }
        if (e[(0, 1)] - e[(1, 0)]).abs() > 1e-12 || (k[(0, 1)] - k[(1, 0)]).abs() > 1e-12 {
            return Err(Error::InvalidArgument("E and K must be symmetric".into()));
        }
        if e.iter().chain(k.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("E and K must be finite".into()));
        }
        let (e_values, _) = linalg::symmetric_eigh(&e)?;
        if e_values[1] < -1e-12 {
            return Err(Error::InvalidArgument(format!(
                "E is not positive semidefinite (min eigenvalue {:e})",
                e_values[1]
            )));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        if !(0.0..=1.0 + 1e-10).contains(&gamma) {
            return Err(Error::InvalidArgument(format!(
                "gamma = {gamma} outside [0, 1]"
            )));
        }
        Ok(Self { e, n, k, gamma })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Feasible,
    Infeasible,
    /// `nEK` violates the QCRB or a determinant is negative.
    OutsideDomain,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Feasible => "feasible",
            Verdict::Infeasible => "infeasible",
            Verdict::OutsideDomain => "outside-domain",
        }
    }
}

/// Eigenvalues of the 2x2 matrix `nEK`; real because `nEK` is similar to
/// `n K^{1/2} E K^{1/2}`.
fn nek_eigenvalues(m: &RMatrix) -> (f64, f64) {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    (tr / 2.0 - disc, tr / 2.0 + disc)
}

pub fn tradeoff_feasible(q: &TradeoffQuery) -> Verdict {
    let nek = &q.e * &q.k * f64::from(q.n);
    let det_nek = nek.determinant();
    let shifted = &nek - RMatrix::identity(2, 2);
    let det_shift = shifted.determinant();
    let (min_eig, _) = nek_eigenvalues(&nek);
    if det_shift < -TRADEOFF_TOL || det_nek < -TRADEOFF_TOL || min_eig < 1.0 - TRADEOFF_TOL {
        return Verdict::OutsideDomain;
    }
    let one_minus_gamma = (1.0 - q.gamma).max(0.0);
    let lhs = det_shift.max(0.0).sqrt() + (one_minus_gamma * det_nek.max(0.0)).sqrt();
    if lhs >= 1.0 - TRADEOFF_TOL {
        Verdict::Feasible
    } else {
        Verdict::Infeasible
    }
}

/// Minimal `v2` along the diagonal family `E = R diag(v1, v2) R^T`, where
/// `R^T K R = diag(k1, k2)`.
#[derive(Debug)]
pub struct BoundaryCurve {
    /// Columns are the eigenvectors of `K` spanning the search chart.
    pub chart: RMatrix,
    pub k_diagonal: (f64, f64),
    /// `(v1, v2_min)` in input order.
    pub points: Vec<(f64, Result<f64>)>,
}

/// Closed-form Jacobi rotation diagonalizing a symmetric 2x2 matrix; the
/// identity when it is already diagonal.
fn eigen_chart(k: &RMatrix) -> (RMatrix, f64, f64) {
    let theta = 0.5 * (2.0 * k[(0, 1)]).atan2(k[(0, 0)] - k[(1, 1)]);
    let (s, c) = theta.sin_cos();
    let r = RMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
    let d = r.transpose() * k * &r;
    (r, d[(0, 0)], d[(1, 1)])
}

pub fn tradeoff_boundary_curve(
    k: &RMatrix,
    gamma: f64,
    n: u32,
    v1_grid: &[f64],
) -> Result<BoundaryCurve> {
    TradeoffQuery::new(RMatrix::zeros(2, 2), n, k.clone(), gamma)?;
    let (chart, k1, k2) = eigen_chart(k);
    if k1 <= METRIC_TOL || k2 <= METRIC_TOL {
        return Err(Error::DegenerateMetric {
            min_eigenvalue: k1.min(k2),
        });
    }
    let nf = f64::from(n);
    let feasible = |v1: f64, v2: f64| {
        let e = &chart
            * RMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![v1, v2]))
            * chart.transpose();
        let e = (&e + e.transpose()) * 0.5;
        let q = TradeoffQuery {
            e,
            n,
            k: k.clone(),
            gamma,
        };
        tradeoff_feasible(&q) == Verdict::Feasible
    };
    let solve = |v1: f64| -> Result<f64> {
        if !(v1 > 0.0) || !v1.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "v1 = {v1} must be positive"
            )));
        }
        let s = nf * v1 * k1;
        if s < 1.0 - TRADEOFF_TOL {
            return Err(Error::NoSolution { v1 });
        }
        // v2 below the single-parameter bound is never feasible.
        let floor = 1.0 / (nf * k2);
        if feasible(v1, floor) {
            return Ok(floor);
        }
        let mut lo = floor;
        let mut hi = 2.0 * floor;
        while !feasible(v1, hi) {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::NoSolution { v1 });
            }
        }
        while hi - lo > BISECTION_RTOL * hi {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if feasible(v1, mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    };
    let points = v1_grid.par_iter().map(|&v1| (v1, solve(v1))).collect();
    Ok(BoundaryCurve {
        chart,
        k_diagonal: (k1, k2),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::analyze;
    use crate::model::builtin;

    fn gamma_at(name: &str, x: &[f64]) -> f64 {
        let a = analyze(&builtin(name).unwrap(), x).unwrap();
        incompatibility_gamma(&a.spectrum, &a.geometry.g_ops, &a.geometry.qfi).unwrap()
    }

    fn query(e: &[f64], k: &[f64], gamma: f64) -> TradeoffQuery {
        TradeoffQuery::new(
            RMatrix::from_row_slice(2, 2, e),
            1,
            RMatrix::from_row_slice(2, 2, k),
            gamma,
        )
        .unwrap()
    }

    #[test]
    fn pcc_on_builtins() {
        let a = analyze(&builtin("product-qubits").unwrap(), &[0.3, 0.1]).unwrap();
        let r = pcc_check(&a.spectrum, &a.geometry.g_ops, DEFAULT_PCC_TOL);
        assert!(r.satisfied && r.residual <= 1e-12);

        let a = analyze(
            &builtin("phase-diffusion-qubit").unwrap(),
            &[0.0, 2f64.ln()],
        )
        .unwrap();
        let r = pcc_check(&a.spectrum, &a.geometry.g_ops, DEFAULT_PCC_TOL);
        assert!(!r.satisfied && r.residual > 0.1);

        let single = pcc_check(&a.spectrum, &a.geometry.g_ops[..1], DEFAULT_PCC_TOL);
        assert!(single.satisfied);
        assert_eq!(single.residual, 0.0);
    }

    #[test]
    fn gamma_on_builtins() {
        for theta in [0.3, 1.0, 2.0] {
            assert!((gamma_at("bloch-pure-qubit", &[theta, 0.4]) - 1.0).abs() < 1e-10);
        }
        assert!(gamma_at("product-qubits", &[0.3, -0.2]).abs() < 1e-15);
    }

    #[test]
    fn gamma_of_phase_diffusion_matches_dense_svd() {
        // In the eigenbasis of rho, [L1, L2] = (2i/3) sigma_x and
        // sqrt(rho) = diag(sqrt(3)/2, 1/2), so the trace norm is sqrt(3)/3
        // and |K| = 1/12.
        let g = gamma_at("phase-diffusion-qubit", &[0.0, 2f64.ln()]);
        assert!((g - 1.0).abs() < 1e-12, "{g}");
    }

    #[test]
    fn gamma_requires_two_parameters() {
        let a = analyze(&builtin("product-qubits").unwrap(), &[0.3, 0.1]).unwrap();
        let k1 = a.geometry.qfi.view((0, 0), (1, 1)).into_owned();
        assert!(matches!(
            incompatibility_gamma(&a.spectrum, &a.geometry.g_ops[..1], &k1),
            Err(Error::WrongArity {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn tradeoff_examples() {
        let eye = [1.0, 0.0, 0.0, 1.0];
        assert_eq!(
            tradeoff_feasible(&query(&eye, &eye, 0.0)),
            Verdict::Feasible
        );
        assert_eq!(
            tradeoff_feasible(&query(&eye, &eye, 1.0)),
            Verdict::Infeasible
        );
        assert_eq!(
            tradeoff_feasible(&query(&[2.0, 0.0, 0.0, 2.0], &eye, 1.0)),
            Verdict::Feasible
        );
        assert_eq!(
            tradeoff_feasible(&query(&[0.5, 0.0, 0.0, 2.0], &eye, 0.0)),
            Verdict::OutsideDomain
        );
    }

    #[test]
    fn query_validation() {
        let eye = RMatrix::identity(2, 2);
        assert!(TradeoffQuery::new(eye.clone(), 0, eye.clone(), 0.5).is_err());
        assert!(TradeoffQuery::new(eye.clone(), 1, eye.clone(), 1.1).is_err());
        let neg = RMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(TradeoffQuery::new(neg, 1, eye, 0.5).is_err());
    }

    #[test]
    fn boundary_examples() {
        let eye = RMatrix::identity(2, 2);
        let curve = tradeoff_boundary_curve(&eye, 1.0, 1, &[2.0, 0.5]).unwrap();
        let v2 = *curve.points[0].1.as_ref().unwrap();
        assert!((v2 - 2.0).abs() < 1e-9);
        assert!(matches!(curve.points[1].1, Err(Error::NoSolution { .. })));

        let k = RMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 2.0]);
        let curve = tradeoff_boundary_curve(&k, 0.0, 3, &[1.0 / 12.0, 0.2, 5.0]).unwrap();
        for (_, v2) in &curve.points {
            assert_eq!(*v2.as_ref().unwrap(), 1.0 / 6.0);
        }
    }

    #[test]
    fn boundary_chart_is_identity_for_diagonal_k() {
        let k = RMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0]);
        let (r, k1, k2) = eigen_chart(&k);
        assert_eq!(r, RMatrix::identity(2, 2));
        assert_eq!((k1, k2), (3.0, 1.0));
    }

    #[test]
    fn boundary_with_rotated_k() {
        let k = RMatrix::from_row_slice(2, 2, &[2.0, 0.7, 0.7, 1.0]);
        let gamma = 0.6;
        let grid = [1.0, 1.5, 2.0, 4.0, 10.0];
        let curve = tradeoff_boundary_curve(&k, gamma, 2, &grid).unwrap();
        let mut prev = f64::INFINITY;
        for (v1, v2) in &curve.points {
            let v2 = *v2.as_ref().unwrap();
            assert!(v2 <= prev);
            prev = v2;
            let e = |v: f64| {
                &curve.chart
                    * RMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![*v1, v]))
                    * curve.chart.transpose()
            };
            let q = |v: f64| TradeoffQuery {
                e: e(v),
                n: 2,
                k: k.clone(),
                gamma,
            };
            assert_eq!(tradeoff_feasible(&q(v2)), Verdict::Feasible);
            assert_ne!(tradeoff_feasible(&q(v2 * (1.0 - 1e-6))), Verdict::Feasible);
        }
    }
}
