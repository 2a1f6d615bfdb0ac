use std::fmt;

/// Half-open byte range `[start, end)` into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    /// The imaginary unit `i`.
    I,
    Pi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    pub fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Conj,
    Re,
    Im,
}

impl Function {
    pub const ALL: [Function; 12] = [
        Function::Exp,
        Function::Log,
        Function::Sqrt,
        Function::Sin,
        Function::Cos,
        Function::Tan,
        Function::Sinh,
        Function::Cosh,
        Function::Tanh,
        Function::Conj,
        Function::Re,
        Function::Im,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Function::Exp => "exp",
            Function::Log => "log",
            Function::Sqrt => "sqrt",
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Tan => "tan",
            Function::Sinh => "sinh",
            Function::Cosh => "cosh",
            Function::Tanh => "tanh",
            Function::Conj => "conj",
            Function::Re => "re",
            Function::Im => "im",
        }
    }

    pub fn from_name(name: &str) -> Option<Function> {
        Function::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone)]
pub enum NodeKind {
    Number(f64),
    Constant(Constant),
    /// Index into the declared parameter list, plus the name for printing.
    Param(usize, String),
    Neg(Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
    Call(Function, Box<Node>),
}

/// AST node. Equality is structural and ignores spans.
#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    pub span: Span,
}

impl Node {
    pub fn new(kind: NodeKind, span: Span) -> Self {
        Self { kind, span }
    }

    pub fn number(value: f64) -> Self {
        Node::new(NodeKind::Number(value), Span::default())
    }

    pub fn binary(op: BinaryOp, lhs: Node, rhs: Node) -> Self {
        let span = lhs.span.join(rhs.span);
        Node::new(NodeKind::Binary(op, Box::new(lhs), Box::new(rhs)), span)
    }

    fn is_atomic(&self) -> bool {
        matches!(
            self.kind,
            NodeKind::Number(_) | NodeKind::Constant(_) | NodeKind::Param(..) | NodeKind::Call(..)
        )
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        use NodeKind::*;
        match (&self.kind, &other.kind) {
            (Number(a), Number(b)) => a.to_bits() == b.to_bits(),
            (Constant(a), Constant(b)) => a == b,
            (Param(a, na), Param(b, nb)) => a == b && na == nb,
            (Neg(a), Neg(b)) => a == b,
            (Binary(oa, la, ra), Binary(ob, lb, rb)) => oa == ob && la == lb && ra == rb,
            (Pow(a, ea), Pow(b, eb)) => ea == eb && a == b,
            (Call(fa, a), Call(fb, b)) => fa == fb && a == b,
            _ => false,
        }
    }
}

/// Prints a fully parenthesized form that re-parses to the same tree.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            NodeKind::Number(v) => write!(f, "{v:?}"),
            NodeKind::Constant(Constant::I) => f.write_str("i"),
            NodeKind::Constant(Constant::Pi) => f.write_str("pi"),
            NodeKind::Param(_, name) => f.write_str(name),
            NodeKind::Neg(inner) => write!(f, "(-{inner})"),
            NodeKind::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            NodeKind::Pow(base, e) => {
                if base.is_atomic() {
                    write!(f, "({base}^{e})")
                } else {
                    write!(f, "(({base})^{e})")
                }
            }
            NodeKind::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}
