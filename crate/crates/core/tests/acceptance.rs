//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

mod support;

use std::f64::consts::{LN_2, PI};
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uhlmann_core::curvature::{connection_curvature, curvature_at};
use uhlmann_core::estimation::DEFAULT_PCC_TOL;
use uhlmann_core::{
    analyze, builtin, dual_contraction_curvature, dual_curvature, incompatibility_gamma, pcc_check,
    scalar_curvature, tradeoff_boundary_curve, CMatrix, Error, FdOptions, GeometryPoint, Method,
    ModelDefinition, RMatrix,
};

use support::*;

/// Bound on resampling loops so a generator bug fails instead of hanging.
const MAX_ATTEMPTS: usize = 10_000;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn grid() -> Vec<[f64; 2]> {
    let mut nodes = Vec::with_capacity(400);
    for i in 0..20 {
        for j in 0..20 {
            let a = 2.0 * PI * i as f64 / 20.0;
            let b = 0.1 + 1.9 * j as f64 / 19.0;
            nodes.push([a, b]);
        }
    }
    nodes
}

fn phase_diffusion_constant_curvature() -> Outcome {
    let model = builtin("phase-diffusion-qubit").unwrap();
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for x in grid() {
        let a = analyze(&model, &x).unwrap();
        worst = worst.max((scalar_curvature(&a.spectrum, &a.geometry).c - 4.0).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    Outcome::new(
        worst <= 1e-8 && elapsed < 1.0,
        format!("max |C - 4| = {worst:.2e} over 400 nodes in {elapsed:.3} s"),
    )
}

fn phase_diffusion_metric() -> Outcome {
    let model = builtin("phase-diffusion-qubit").unwrap();
    let (mut dev_g, mut dev_k): (f64, f64) = (0.0, 0.0);
    for [a, b] in grid() {
        let an = analyze(&model, &[a, b]).unwrap();
        let expected = RMatrix::from_row_slice(
            2,
            2,
            &[
                (-2.0 * b).exp() / 4.0,
                0.0,
                0.0,
                1.0 / (4.0 * ((2.0 * b).exp() - 1.0)),
            ],
        );
        let g = &an.geometry.metric;
        dev_g = dev_g.max((g - expected).abs().max());
        dev_k = dev_k.max((&an.geometry.qfi - g * 4.0).abs().max());
    }
    Outcome::new(
        dev_g <= 1e-10 && dev_k <= 1e-14,
        format!("max |g - g_exact| = {dev_g:.2e}, max |K - 4g| = {dev_k:.2e}"),
    )
}

fn phase_diffusion_dual_curvature() -> Outcome {
    let model = builtin("phase-diffusion-qubit").unwrap();
    let exact = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(1.0, 0.0),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(-1.0, 0.0),
        ],
    ) * Complex64::new(0.0, -1.0 / 6.0);
    let plain = dual_curvature(&model, &[0.0, LN_2], (0, 1), &FdOptions::with_step(1e-4)).unwrap();
    let rich = dual_curvature(
        &model,
        &[0.0, LN_2],
        (0, 1),
        &FdOptions {
            step: 1e-4,
            richardson: true,
        },
    )
    .unwrap();
    let e_plain = max_abs(&(&plain.matrix - &exact));
    let e_rich = max_abs(&(&rich.matrix - &exact));
    Outcome::new(
        e_plain <= 1e-5 && e_rich <= 1e-7,
        format!("central {e_plain:.2e}, Richardson {e_rich:.2e}"),
    )
}

/// Full rank, well separated spectrum, reasonably conditioned metric.
fn well_conditioned(model: &ModelDefinition, x: &[f64]) -> bool {
    let Ok(a) = analyze(model, x) else {
        return false;
    };
    let ev = &a.spectrum.eigenvalues;
    a.spectrum.rank == ev.len()
        && ev[ev.len() - 1] > 0.02
        && ev.windows(2).all(|w| w[0] - w[1] > 0.02)
        && a.geometry.condition_number < 1e3
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let start = Instant::now();
    let fd = FdOptions::default();
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut done = 0;
    let mut attempts = 0;
    while done < 50 && attempts < MAX_ATTEMPTS {
        attempts += 1;
        let d = 2 + done % 2;
        let model = gram_model(&mut rng, d);
        let x = random_point(&mut rng, 0.8);
        if !well_conditioned(&model, &x) {
            continue;
        }
        done += 1;
        let spectral = curvature_at(&model, &x, Method::Spectral, &fd).map(|r| r.c);
        let dual = dual_contraction_curvature(&model, &x, &fd).map(|r| r.c);
        let conn = connection_curvature(&model, &x, &fd).map(|r| r.c);
        match (spectral, dual, conn) {
            (Ok(s), Ok(dc), Ok(cc)) => {
                worst = worst
                    .max((s - dc).abs())
                    .max((s - cc).abs())
                    .max((dc - cc).abs());
            }
            (s, dc, cc) => failures.push(format!("{s:?} {dc:?} {cc:?}")),
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    Outcome::new(
        failures.is_empty() && done == 50 && worst <= 1e-4 && elapsed < 30.0,
        format!(
            "50 models, max pairwise |dC| = {worst:.2e}, {} errors, {elapsed:.2} s",
            failures.len()
        ),
    )
}

fn pcc_iff_flat_at(model: &ModelDefinition, x: &[f64]) -> Option<(bool, bool)> {
    let a = analyze(model, x).ok()?;
    let c = scalar_curvature(&a.spectrum, &a.geometry).c;
    let pcc = pcc_check(&a.spectrum, &a.geometry.g_ops, DEFAULT_PCC_TOL);
    Some((c <= 1e-10, pcc.satisfied))
}

fn pcc_iff_flat() -> Outcome {
    let mut mismatches = 0;
    let mut expectations_ok = true;
    let builtin_points: [(&str, &[f64], bool); 7] = [
        ("product-qubits", &[0.3, -0.4], true),
        ("product-qubits", &[0.0, 0.9], true),
        ("phase-diffusion-qubit", &[0.0, LN_2], false),
        ("phase-diffusion-qubit", &[2.0, 0.3], false),
        ("bloch-pure-qubit", &[0.3, 0.1], false),
        ("bloch-pure-qubit", &[1.0, 2.0], false),
        ("bloch-pure-qubit", &[2.0, -1.0], false),
    ];
    for (name, x, flat) in builtin_points {
        let (is_flat, pcc) = pcc_iff_flat_at(&builtin(name).unwrap(), x).unwrap();
        if is_flat != pcc {
            mismatches += 1;
        }
        if is_flat != flat || pcc != flat {
            expectations_ok = false;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let (mut n_flat, mut n_curved, mut done) = (0, 0, 0);
    let mut attempts = 0;
    while done < 50 && attempts < MAX_ATTEMPTS {
        attempts += 1;
        let model = match done % 3 {
            0 => gram_model(&mut rng, 2 + done % 2),
            1 => commuting_model(&mut rng, 3 + done % 2),
            _ => pure_model(&mut rng, 2 + done % 2),
        };
        let x = random_point(&mut rng, 0.8);
        let Some((is_flat, pcc)) = pcc_iff_flat_at(&model, &x) else {
            continue;
        };
        done += 1;
        if is_flat {
            n_flat += 1;
        } else {
            n_curved += 1;
        }
        if is_flat != pcc {
            mismatches += 1;
        }
    }
    Outcome::new(
        mismatches == 0 && expectations_ok && done == 50,
        format!(
            "built-ins as expected: {expectations_ok}; random: {n_flat} flat, {n_curved} curved; {mismatches} mismatches"
        ),
    )
}

fn pure_gamma_is_half_curvature() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let mut worst: f64 = 0.0;
    let mut errors = 0;
    let mut done = 0;
    let mut model = pure_model(&mut rng, 2);
    let mut attempts = 0;
    while done < 100 && attempts < MAX_ATTEMPTS {
        attempts += 1;
        if done % 10 == 0 {
            model = pure_model(&mut rng, 2 + (done / 10) % 2);
        }
        let x = random_point(&mut rng, 1.0);
        let Ok(a) = analyze(&model, &x) else {
            continue;
        };
        if a.geometry.condition_number > 1e6 {
            continue;
        }
        done += 1;
        let c = scalar_curvature(&a.spectrum, &a.geometry).c;
        match incompatibility_gamma(&a.spectrum, &a.geometry.g_ops, &a.geometry.qfi) {
            Ok(gamma) => worst = worst.max((gamma - c / 2.0).abs()),
            Err(_) => errors += 1,
        }
    }
    let bloch = builtin("bloch-pure-qubit").unwrap();
    let mut bloch_dev: f64 = 0.0;
    for theta in [0.3, 1.0, 2.0] {
        let a = analyze(&bloch, &[theta, 0.7]).unwrap();
        let c = scalar_curvature(&a.spectrum, &a.geometry).c;
        let gamma = incompatibility_gamma(&a.spectrum, &a.geometry.g_ops, &a.geometry.qfi).unwrap();
        bloch_dev = bloch_dev.max((c - 2.0).abs()).max((gamma - 1.0).abs());
    }
    Outcome::new(
        worst <= 1e-8 && errors == 0 && done == 100 && bloch_dev <= 1e-10,
        format!(
            "100 points, max |gamma - C/2| = {worst:.2e}, {errors} errors; bloch max dev {bloch_dev:.2e}"
        ),
    )
}

fn reparametrization_invariance() -> Outcome {
    let model = builtin("phase-diffusion-qubit").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let x0 = [0.7, 0.9];
    let a = analyze(&model, &x0).unwrap();
    let c0 = scalar_curvature(&a.spectrum, &a.geometry).c;
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < 20 {
        let m = RMatrix::from_fn(2, 2, |_, _| rng.random_range(-2.0..2.0));
        if m.determinant().abs() < 0.1 {
            continue;
        }
        done += 1;
        let chart = model.reparametrize_linear(&m, &["u", "v"]).unwrap();
        let y = m.clone().try_inverse().unwrap() * nalgebra::DVector::from_column_slice(&x0);
        let b = analyze(&chart, y.as_slice()).unwrap();
        let c = scalar_curvature(&b.spectrum, &b.geometry).c;
        worst = worst.max((c - c0).abs() / c0.abs());
    }
    Outcome::new(
        worst <= 1e-8,
        format!("20 charts, max relative |dC| = {worst:.2e}"),
    )
}

fn kernel_convention_independence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let (mut dev_g, mut dev_c): (f64, f64) = (0.0, 0.0);
    let shapes = [(3, 2), (3, 1), (4, 2), (4, 3), (2, 1)];
    let mut models_done = 0;
    for (d, r) in shapes.iter().cycle().take(10) {
        let model = gram_model_rank(&mut rng, *d, *r);
        let x = random_point(&mut rng, 0.8);
        let Ok(a) = analyze(&model, &x) else {
            continue;
        };
        assert_eq!(a.spectrum.rank, *r);
        models_done += 1;
        let c = scalar_curvature(&a.spectrum, &a.geometry).c;
        let kernel = a.spectrum.eigenvectors.columns(*r, d - r).into_owned();
        for _ in 0..10 {
            let g_ops: Vec<CMatrix> = a
                .geometry
                .g_ops
                .iter()
                .map(|g| g + &kernel * random_hermitian(&mut rng, d - r, 3.0) * kernel.adjoint())
                .collect();
            let moved = GeometryPoint::from_g_ops(&a.spectrum, g_ops).unwrap();
            dev_g = dev_g.max((&moved.metric - &a.geometry.metric).abs().max());
            dev_c = dev_c.max((scalar_curvature(&a.spectrum, &moved).c - c).abs());
        }
    }
    Outcome::new(
        dev_g <= 1e-10 && dev_c <= 1e-10 && models_done == 10,
        format!("{models_done} rank-deficient models x 10 kernel blocks, max |dg| = {dev_g:.2e}, max |dC| = {dev_c:.2e}"),
    )
}

fn tradeoff_boundary() -> Outcome {
    let eye = RMatrix::identity(2, 2);
    let curve = tradeoff_boundary_curve(&eye, 1.0, 1, &[2.0]).unwrap();
    let v2 = curve.points[0].1.as_ref().map(|v| *v).unwrap_or(f64::NAN);
    let dev = (v2 - 2.0).abs();

    let k = RMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 0.5]);
    let n = 4;
    let grid: Vec<f64> = [1.0, 1.5, 3.0, 10.0]
        .iter()
        .map(|s| s / (n as f64 * 3.0))
        .collect();
    let rect = tradeoff_boundary_curve(&k, 0.0, n, &grid).unwrap();
    let corner = 1.0 / (n as f64 * 0.5);
    let exact = rect
        .points
        .iter()
        .all(|(_, v)| matches!(v, Ok(v2) if *v2 == corner));
    let below = tradeoff_boundary_curve(&k, 0.0, n, &[0.9 / 12.0]).unwrap();
    let no_solution = matches!(below.points[0].1, Err(Error::NoSolution { .. }));
    Outcome::new(
        dev <= 1e-9 && exact && no_solution,
        format!("|v2_min(2) - 2| = {dev:.2e}; rectangle exact: {exact}; below bound -> NoSolution: {no_solution}"),
    )
}

/// Conditioning filter: the central difference must be stable under
/// halving the step, which rules out samples straddling a branch cut or a
/// pole.
fn stable_fd(e: &uhlmann_core::Expression, x: &[f64], mu: usize, h: f64) -> Option<Complex64> {
    let at = |delta: f64| {
        let mut y = x.to_vec();
        y[mu] += delta;
        e.eval_dual(&y).ok().map(|v| v.value)
    };
    let d1 = (at(h)? - at(-h)?) / (2.0 * h);
    let d2 = (at(2.0 * h)? - at(-2.0 * h)?) / (4.0 * h);
    ((d1 - d2).norm() <= 1e-6 * (1.0 + d1.norm())).then_some(d1)
}

fn parser_derivatives() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0010);
    let params = ["x", "y", "z"];
    let (mut accepted, mut rejected, mut failed) = (0, 0, 0);
    let mut worst: f64 = 0.0;
    let mut roundtrip_failures = 0;
    while accepted < 1000 && accepted + rejected < 2 * MAX_ATTEMPTS {
        let source = random_expression(&mut rng, &params, 4);
        let expr = uhlmann_core::parse(&source, &params).unwrap();
        let reparsed = uhlmann_core::parse(&expr.to_string(), &params).unwrap();
        if reparsed.root() != expr.root() {
            roundtrip_failures += 1;
        }
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.5..1.5)).collect();
        let Ok(v) = expr.eval_dual(&x) else {
            rejected += 1;
            continue;
        };
        if v.value.norm() > 1e2 || v.partials.iter().any(|p| p.norm() > 1e4) {
            rejected += 1;
            continue;
        }
        let fds: Option<Vec<Complex64>> = (0..3).map(|mu| stable_fd(&expr, &x, mu, 1e-6)).collect();
        let Some(fds) = fds else {
            rejected += 1;
            continue;
        };
        accepted += 1;
        let mut ok = true;
        for (p, fd) in v.partials.iter().zip(&fds) {
            let err = (p - fd).norm() / (1.0 + p.norm());
            worst = worst.max(err);
            ok &= err <= 1e-7;
        }
        if !ok {
            failed += 1;
        }
    }
    let reject_rate = rejected as f64 / (accepted + rejected) as f64;
    Outcome::new(
        accepted == 1000 && failed == 0 && roundtrip_failures == 0 && reject_rate < 0.5,
        format!(
            "1000 expressions, {failed} failures, max relative error {worst:.2e}, {rejected} rejected as ill-conditioned, {roundtrip_failures} round-trip failures"
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        (
            "phase-diffusion curvature is 4 on a 20x20 grid",
            phase_diffusion_constant_curvature,
        ),
        ("phase-diffusion metric and QFI", phase_diffusion_metric),
        (
            "phase-diffusion dual curvature",
            phase_diffusion_dual_curvature,
        ),
        (
            "spectral, dual-contraction and connection routes agree",
            oracle_equivalence,
        ),
        ("PCC holds iff C vanishes", pcc_iff_flat),
        ("pure states: gamma = C/2", pure_gamma_is_half_curvature),
        (
            "invariance under linear reparametrization",
            reparametrization_invariance,
        ),
        (
            "independence of the kernel block of G",
            kernel_convention_independence,
        ),
        ("tradeoff boundary curve", tradeoff_boundary),
        ("parser and forward-mode derivatives", parser_derivatives),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        if !outcome.passed {
            failures += 1;
        }
        println!("{tag} criterion {:>2}: {name}: {}", k + 1, outcome.detail);
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
