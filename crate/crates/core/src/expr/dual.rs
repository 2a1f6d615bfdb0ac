//! Complex dual numbers carrying first derivatives with respect to real parameters.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

/// A complex value together with its partial derivatives with respect to
/// every declared real parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct DualComplex {
    pub value: Complex64,
    pub partials: Vec<Complex64>,
}

impl DualComplex {
    pub fn constant(value: Complex64, n_params: usize) -> Self {
        Self {
            value,
            partials: vec![Complex64::new(0.0, 0.0); n_params],
        }
    }

    /// The coordinate function `x^index` evaluated at `value`.
    pub fn variable(value: f64, index: usize, n_params: usize) -> Self {
        let mut partials = vec![Complex64::new(0.0, 0.0); n_params];
        partials[index] = Complex64::new(1.0, 0.0);
        Self {
            value: Complex64::new(value, 0.0),
            partials,
        }
    }

    pub fn n_params(&self) -> usize {
        self.partials.len()
    }

    /// Chain rule: `f(self)` given `f(value)` and `f'(value)`.
    pub fn chain(&self, value: Complex64, derivative: Complex64) -> Self {
        Self {
            value,
            partials: self.partials.iter().map(|d| derivative * d).collect(),
        }
    }

    pub fn has_nonzero_partial(&self) -> bool {
        self.partials.iter().any(|d| d.re != 0.0 || d.im != 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.partials.iter().all(|d| d.is_finite())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            value: self.value * factor,
            partials: self.partials.iter().map(|d| d * factor).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            value: self.value.conj(),
            partials: self.partials.iter().map(|d| d.conj()).collect(),
        }
    }

    pub fn re(&self) -> Self {
        Self {
            value: Complex64::new(self.value.re, 0.0),
            partials: self
                .partials
                .iter()
                .map(|d| Complex64::new(d.re, 0.0))
                .collect(),
        }
    }

    pub fn im(&self) -> Self {
        Self {
            value: Complex64::new(self.value.im, 0.0),
            partials: self
                .partials
                .iter()
                .map(|d| Complex64::new(d.im, 0.0))
                .collect(),
        }
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e)
    }

    /// Principal-branch logarithm. The caller rules out a zero argument.
    pub fn ln(&self) -> Self {
        self.chain(self.value.ln(), self.value.inv())
    }

    /// Principal-branch square root. At zero the derivative is only defined
    /// when every partial vanishes.
    pub fn sqrt(&self) -> Self {
        let s = self.value.sqrt();
        if s.re == 0.0 && s.im == 0.0 {
            return Self::constant(s, self.n_params());
        }
        self.chain(s, (s * 2.0).inv())
    }

    pub fn sin(&self) -> Self {
        self.chain(self.value.sin(), self.value.cos())
    }

    pub fn cos(&self) -> Self {
        self.chain(self.value.cos(), -self.value.sin())
    }

    pub fn tan(&self) -> Self {
        let c = self.value.cos();
        self.chain(self.value.tan(), (c * c).inv())
    }

    pub fn sinh(&self) -> Self {
        self.chain(self.value.sinh(), self.value.cosh())
    }

    pub fn cosh(&self) -> Self {
        self.chain(self.value.cosh(), self.value.sinh())
    }

    pub fn tanh(&self) -> Self {
        let t = self.value.tanh();
        self.chain(t, Complex64::new(1.0, 0.0) - t * t)
    }

    /// Integer power. `z^0` is one everywhere, including at zero.
    pub fn powi(&self, exponent: i32) -> Self {
        if exponent == 0 {
            return Self::constant(Complex64::new(1.0, 0.0), self.n_params());
        }
        let value = self.value.powi(exponent);
        let derivative = self.value.powi(exponent - 1) * f64::from(exponent);
        self.chain(value, derivative)
    }
}

impl Add for &DualComplex {
    type Output = DualComplex;

    fn add(self, rhs: &DualComplex) -> DualComplex {
        DualComplex {
            value: self.value + rhs.value,
            partials: self
                .partials
                .iter()
                .zip(&rhs.partials)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &DualComplex {
    type Output = DualComplex;

    fn sub(self, rhs: &DualComplex) -> DualComplex {
        DualComplex {
            value: self.value - rhs.value,
            partials: self
                .partials
                .iter()
                .zip(&rhs.partials)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for &DualComplex {
    type Output = DualComplex;

    fn mul(self, rhs: &DualComplex) -> DualComplex {
        DualComplex {
            value: self.value * rhs.value,
            partials: self
                .partials
                .iter()
                .zip(&rhs.partials)
                .map(|(a, b)| a * rhs.value + self.value * b)
                .collect(),
        }
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Div for &DualComplex {
    type Output = DualComplex;

    /// Quotient rule. Division by an exact zero is rejected by the evaluator
    /// before reaching here.
    fn div(self, rhs: &DualComplex) -> DualComplex {
        let inv = rhs.value.inv();
        let value = self.value * inv;
        DualComplex {
            value,
            partials: self
                .partials
                .iter()
                .zip(&rhs.partials)
                .map(|(a, b)| (a - value * b) * inv)
                .collect(),
        }
    }
}

impl Neg for &DualComplex {
    type Output = DualComplex;

    fn neg(self) -> DualComplex {
        DualComplex {
            value: -self.value,
            partials: self.partials.iter().map(|d| -d).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn variable_is_unit_vector() {
        let x = DualComplex::variable(2.5, 1, 3);
        assert_eq!(x.value, c(2.5, 0.0));
        assert_eq!(x.partials, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn product_rule() {
        let x = DualComplex::variable(3.0, 0, 2);
        let y = DualComplex::variable(-2.0, 1, 2);
        let p = &x * &y;
        assert_eq!(p.value, c(-6.0, 0.0));
        assert_eq!(p.partials, vec![c(-2.0, 0.0), c(3.0, 0.0)]);
    }

    #[test]
    fn quotient_rule() {
        let x = DualComplex::variable(1.0, 0, 1);
        let two = DualComplex::constant(c(2.0, 0.0), 1);
        let q = &two / &x;
        assert_eq!(q.value, c(2.0, 0.0));
        assert_eq!(q.partials[0], c(-2.0, 0.0));
    }

    #[test]
    fn sqrt_at_zero_without_derivative() {
        let z = DualComplex::constant(c(0.0, 0.0), 2);
        let s = z.sqrt();
        assert_eq!(s.value, c(0.0, 0.0));
        assert!(!s.has_nonzero_partial());
    }

    #[test]
    fn powi_zero_exponent() {
        let x = DualComplex::variable(0.0, 0, 1);
        let p = x.powi(0);
        assert_eq!(p.value, c(1.0, 0.0));
        assert_eq!(p.partials[0], c(0.0, 0.0));
    }

    #[test]
    fn conj_conjugates_partials() {
        let mut x = DualComplex::variable(1.0, 0, 1);
        x.partials[0] = c(0.0, 1.0);
        let y = x.conj();
        assert_eq!(y.partials[0], c(0.0, -1.0));
    }
}
