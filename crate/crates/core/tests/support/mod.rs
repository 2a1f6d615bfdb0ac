//! Random model families written as expression strings, plus
//! finite-difference oracles that never touch the forward-mode derivatives.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use uhlmann_core::{CMatrix, ModelDefinition};

pub const PARAMS: [&str; 2] = ["x", "y"];

fn real(rng: &mut impl Rng, scale: f64) -> f64 {
    rng.random_range(-scale..scale)
}

/// Complex literal `(re + im*i)`.
pub fn complex_literal(z: Complex64) -> String {
    format!("({:e} + {:e}*i)", z.re, z.im)
}

fn random_complex(rng: &mut impl Rng, scale: f64) -> Complex64 {
    Complex64::new(real(rng, scale), real(rng, scale))
}

/// Smooth complex function of `x`, `y` with random coefficients.
fn smooth_entry(rng: &mut impl Rng, offset: f64) -> String {
    let c: Vec<String> = (0..4)
        .map(|_| complex_literal(random_complex(rng, 1.0)))
        .collect();
    let (f1, f2, ph) = (real(rng, 1.5), real(rng, 1.5), real(rng, 3.0));
    format!(
        "({offset:e} + {}*sin({f1:e}*x + {ph:e}) + {}*cos({f2:e}*y) + {}*x*y + {}*exp(i*(x - y)))",
        c[0], c[1], c[2], c[3]
    )
}

/// `rho = M M^dagger / tr(M M^dagger)` for an entry-wise random `M`.
fn gram_rows(m: &[Vec<String>]) -> Vec<Vec<String>> {
    let d = m.len();
    let total = m
        .iter()
        .flatten()
        .map(|e| format!("{e}*conj({e})"))
        .collect::<Vec<_>>()
        .join(" + ");
    (0..d)
        .map(|j| {
            (0..d)
                .map(|k| {
                    let num = (0..m[j].len())
                        .map(|l| format!("{}*conj({})", m[j][l], m[k][l]))
                        .collect::<Vec<_>>()
                        .join(" + ");
                    format!("({num})/({total})")
                })
                .collect()
        })
        .collect()
}

/// Generic `d x d` model, full rank near the origin.
pub fn gram_model(rng: &mut impl Rng, d: usize) -> ModelDefinition {
    gram_model_rank(rng, d, d)
}

/// `d x d` model of rank `r` built from a `d x r` factor.
pub fn gram_model_rank(rng: &mut impl Rng, d: usize, r: usize) -> ModelDefinition {
    let m: Vec<Vec<String>> = (0..d)
        .map(|j| {
            (0..r)
                .map(|l| smooth_entry(rng, if j == l { 2.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    ModelDefinition::from_sources(&format!("gram-{d}-{r}"), &PARAMS, &gram_rows(&m)).unwrap()
}

/// Pure model `|v><v| / <v|v>`.
pub fn pure_model(rng: &mut impl Rng, d: usize) -> ModelDefinition {
    gram_model_rank(rng, d, 1)
}

/// `U diag(w(x, y)) U^dagger / sum w` with a fixed random unitary `U`;
/// all SLDs commute.
pub fn commuting_model(rng: &mut impl Rng, d: usize) -> ModelDefinition {
    let raw = DMatrix::from_fn(d, d, |_, _| random_complex(rng, 1.0));
    let u = raw.qr().q();
    let weights: Vec<String> = (0..d)
        .map(|_| {
            format!(
                "exp({:e}*x + {:e}*y + {:e}*sin(x*y))",
                real(rng, 1.0),
                real(rng, 1.0),
                real(rng, 0.5)
            )
        })
        .collect();
    let total = weights.join(" + ");
    let rows: Vec<Vec<String>> = (0..d)
        .map(|j| {
            (0..d)
                .map(|k| {
                    let num = (0..d)
                        .map(|l| {
                            let coef = u[(j, l)] * u[(k, l)].conj();
                            format!("{}*{}", complex_literal(coef), weights[l])
                        })
                        .collect::<Vec<_>>()
                        .join(" + ");
                    format!("({num})/({total})")
                })
                .collect()
        })
        .collect();
    ModelDefinition::from_sources(&format!("commuting-{d}"), &PARAMS, &rows).unwrap()
}

pub fn random_point(rng: &mut impl Rng, scale: f64) -> Vec<f64> {
    vec![real(rng, scale), real(rng, scale)]
}

/// Central difference of `rho` along every coordinate.
pub fn fd_drho(model: &ModelDefinition, x: &[f64], h: f64) -> Vec<CMatrix> {
    (0..x.len())
        .map(|mu| {
            let mut plus = x.to_vec();
            let mut minus = x.to_vec();
            plus[mu] += h;
            minus[mu] -= h;
            let rp = model.evaluate(&plus).unwrap().rho;
            let rm = model.evaluate(&minus).unwrap().rho;
            (rp - rm) / Complex64::new(2.0 * h, 0.0)
        })
        .collect()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Random Hermitian `d x d` matrix with entries of size `scale`.
pub fn random_hermitian(rng: &mut impl Rng, d: usize, scale: f64) -> CMatrix {
    let a = DMatrix::from_fn(d, d, |_, _| random_complex(rng, scale));
    (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Random real expression tree over `params`, printed in the surface
/// syntax.
pub fn random_expression(rng: &mut impl Rng, params: &[&str], depth: u32) -> String {
    const FUNCS: [&str; 12] = [
        "exp", "log", "sqrt", "sin", "cos", "tan", "sinh", "cosh", "tanh", "conj", "re", "im",
    ];
    if depth == 0 || rng.random_bool(0.25) {
        return match rng.random_range(0..10) {
            0..=4 => params[rng.random_range(0..params.len())].to_string(),
            5..=7 => format!("{:.3}", rng.random_range(0.1..2.0)),
            8 => "i".to_string(),
            _ => "pi".to_string(),
        };
    }
    let sub = |rng: &mut _| random_expression(rng, params, depth - 1);
    match rng.random_range(0..10) {
        0..=3 => {
            let op = ["+", "-", "*", "/"][rng.random_range(0..4)];
            format!("({} {op} {})", sub(rng), sub(rng))
        }
        4 => format!("(-{})", sub(rng)),
        5 => format!("({})^{}", sub(rng), rng.random_range(-2..=3)),
        _ => format!("{}({})", FUNCS[rng.random_range(0..FUNCS.len())], sub(rng)),
    }
}
