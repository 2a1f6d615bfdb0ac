//! Complex-valued scalar expressions in real parameters.
//!
//! Expressions are parsed once and evaluated with forward-mode dual numbers,
//! so every evaluation yields the value together with its exact first
//! partial derivatives. Differentiation is always with respect to the real
//! parameters, which makes `conj`, `re` and `im` differentiable:
//! `d/dx conj(f) = conj(df/dx)`.

mod ast;
mod dual;
mod parser;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

pub use ast::{BinaryOp, Constant, Function, Node, NodeKind, Span};
pub use dual::DualComplex;

/// Identifiers that can never be used as parameter names.
pub fn is_reserved(name: &str) -> bool {
    name == "i" || name == "pi" || Function::from_name(name).is_some()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("domain error at bytes {}..{}: {message}", span.start, span.end)]
    Domain { span: Span, message: String },
    #[error("expected {expected} parameter values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("no value supplied for parameter `{0}`")]
    MissingParameter(String),
}

/// A parsed expression bound to an ordered list of declared parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    params: Vec<String>,
}

/// Parse `source` against the declared parameter names.
pub fn parse<S: AsRef<str>>(source: &str, declared_params: &[S]) -> Result<Expression, ExprError> {
    let params: Vec<String> = declared_params
        .iter()
        .map(|p| p.as_ref().to_string())
        .collect();
    let root = parser::parse_node(source, &params)?;
    Ok(Expression { root, params })
}

impl Expression {
    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    /// Evaluate at `point` (one value per declared parameter, in order).
    pub fn eval_dual(&self, point: &[f64]) -> Result<DualComplex, ExprError> {
        if point.len() != self.params.len() {
            return Err(ExprError::Arity {
                expected: self.params.len(),
                got: point.len(),
            });
        }
        eval_node(&self.root, point)
    }

    /// Evaluate with parameter values looked up by name.
    pub fn eval_named(&self, point: &BTreeMap<String, f64>) -> Result<DualComplex, ExprError> {
        let coords = self
            .params
            .iter()
            .map(|p| {
                point
                    .get(p)
                    .copied()
                    .ok_or_else(|| ExprError::MissingParameter(p.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.eval_dual(&coords)
    }

    /// Replace every parameter reference `x^k` by `replacements[k]`. All
    /// replacements must share one parameter list, which becomes the
    /// parameter list of the result.
    pub fn substitute(&self, replacements: &[Expression]) -> Expression {
        assert_eq!(replacements.len(), self.params.len());
        let params = replacements
            .first()
            .map(|r| r.params.clone())
            .unwrap_or_default();
        debug_assert!(replacements.iter().all(|r| r.params == params));
        Expression {
            root: substitute_node(&self.root, replacements),
            params,
        }
    }

    /// Linear form `sum_k coeffs[k] * params[k]` as an expression.
    pub fn linear_combination<S: AsRef<str>>(coeffs: &[f64], params: &[S]) -> Expression {
        assert_eq!(coeffs.len(), params.len());
        let names: Vec<String> = params.iter().map(|p| p.as_ref().to_string()).collect();
        let mut acc: Option<Node> = None;
        for (k, (&c, name)) in coeffs.iter().zip(&names).enumerate() {
            if c == 0.0 {
                continue;
            }
            let term = Node::binary(
                BinaryOp::Mul,
                Node::number(c.abs()),
                Node::new(NodeKind::Param(k, name.clone()), Span::default()),
            );
            acc = Some(match acc {
                None if c < 0.0 => Node::new(NodeKind::Neg(Box::new(term)), Span::default()),
                None => term,
                Some(prev) if c < 0.0 => Node::binary(BinaryOp::Sub, prev, term),
                Some(prev) => Node::binary(BinaryOp::Add, prev, term),
            });
        }
        Expression {
            root: acc.unwrap_or_else(|| Node::number(0.0)),
            params: names,
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

fn substitute_node(node: &Node, replacements: &[Expression]) -> Node {
    let kind = match &node.kind {
        NodeKind::Param(k, _) => return replacements[*k].root.clone(),
        NodeKind::Number(_) | NodeKind::Constant(_) => return node.clone(),
        NodeKind::Neg(a) => NodeKind::Neg(Box::new(substitute_node(a, replacements))),
        NodeKind::Binary(op, l, r) => NodeKind::Binary(
            *op,
            Box::new(substitute_node(l, replacements)),
            Box::new(substitute_node(r, replacements)),
        ),
        NodeKind::Pow(b, e) => NodeKind::Pow(Box::new(substitute_node(b, replacements)), *e),
        NodeKind::Call(func, a) => {
            NodeKind::Call(*func, Box::new(substitute_node(a, replacements)))
        }
    };
    Node::new(kind, node.span)
}

fn domain(node: &Node, message: &str) -> ExprError {
    ExprError::Domain {
        span: node.span,
        message: message.to_string(),
    }
}

fn eval_node(node: &Node, point: &[f64]) -> Result<DualComplex, ExprError> {
    let n = point.len();
    let out = match &node.kind {
        NodeKind::Number(v) => DualComplex::constant(Complex64::new(*v, 0.0), n),
        NodeKind::Constant(Constant::I) => DualComplex::constant(Complex64::new(0.0, 1.0), n),
        NodeKind::Constant(Constant::Pi) => DualComplex::constant(Complex64::new(PI, 0.0), n),
        NodeKind::Param(k, _) => DualComplex::variable(point[*k], *k, n),
        NodeKind::Neg(a) => -&eval_node(a, point)?,
        NodeKind::Binary(op, l, r) => {
            let lhs = eval_node(l, point)?;
            let rhs = eval_node(r, point)?;
            match op {
                BinaryOp::Add => &lhs + &rhs,
                BinaryOp::Sub => &lhs - &rhs,
                BinaryOp::Mul => &lhs * &rhs,
                BinaryOp::Div => {
                    if rhs.value.re == 0.0 && rhs.value.im == 0.0 {
                        return Err(domain(node, "division by zero"));
                    }
                    &lhs / &rhs
                }
            }
        }
        NodeKind::Pow(b, e) => {
            let base = eval_node(b, point)?;
            let zero = base.value.re == 0.0 && base.value.im == 0.0;
            if zero && *e < 0 {
                return Err(domain(node, "negative power of zero"));
            }
            base.powi(*e)
        }
        NodeKind::Call(func, a) => {
            let arg = eval_node(a, point)?;
            let zero = arg.value.re == 0.0 && arg.value.im == 0.0;
            match func {
                Function::Exp => arg.exp(),
                Function::Log => {
                    if zero {
                        return Err(domain(node, "log of zero"));
                    }
                    arg.ln()
                }
                Function::Sqrt => {
                    if zero && arg.has_nonzero_partial() {
                        return Err(domain(node, "sqrt branch point with nonzero derivative"));
                    }
                    arg.sqrt()
                }
                Function::Sin => arg.sin(),
                Function::Cos => arg.cos(),
                Function::Tan => arg.tan(),
                Function::Sinh => arg.sinh(),
                Function::Cosh => arg.cosh(),
                Function::Tanh => arg.tanh(),
                Function::Conj => arg.conj(),
                Function::Re => arg.re(),
                Function::Im => arg.im(),
            }
        }
    };
    if !out.is_finite() {
        return Err(domain(node, "non-finite result"));
    }
    Ok(out)
}
