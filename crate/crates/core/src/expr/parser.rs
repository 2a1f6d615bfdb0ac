//! Recursive-descent parser for the entry expression language.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-'? power
//! power  := atom ('^' int_literal)?
//! atom   := number | 'i' | 'pi' | ident | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! The exponent literal may carry a leading `-`.

use super::ast::{BinaryOp, Constant, Function, Node, NodeKind, Span};
use super::ExprError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: Span,
}

fn lex(source: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let c = bytes[pos];
        if c.is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        let start = pos;
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            pos += 1;
            tokens.push(Token {
                tok,
                span: Span::new(start, pos),
            });
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            let mut digits = 0;
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
                digits += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'.' {
                pos += 1;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                    digits += 1;
                }
            }
            if digits == 0 {
                return Err(ExprError::Syntax {
                    offset: start,
                    message: "malformed number".into(),
                });
            }
            if pos < bytes.len() && (bytes[pos] == b'e' || bytes[pos] == b'E') {
                let mut look = pos + 1;
                if look < bytes.len() && (bytes[look] == b'+' || bytes[look] == b'-') {
                    look += 1;
                }
                let exp_start = look;
                while look < bytes.len() && bytes[look].is_ascii_digit() {
                    look += 1;
                }
                if look == exp_start {
                    return Err(ExprError::Syntax {
                        offset: pos,
                        message: "missing exponent digits".into(),
                    });
                }
                pos = look;
            }
            let text = &source[start..pos];
            let value: f64 = text.parse().map_err(|_| ExprError::Syntax {
                offset: start,
                message: format!("invalid number `{text}`"),
            })?;
            if !value.is_finite() {
                return Err(ExprError::Syntax {
                    offset: start,
                    message: format!("number `{text}` is out of range"),
                });
            }
            tokens.push(Token {
                tok: Tok::Number(value),
                span: Span::new(start, pos),
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                pos += 1;
            }
            tokens.push(Token {
                tok: Tok::Ident(source[start..pos].to_string()),
                span: Span::new(start, pos),
            });
            continue;
        }
        let ch = source[start..].chars().next().unwrap_or('?');
        return Err(ExprError::Syntax {
            offset: start,
            message: format!("unexpected character `{ch}`"),
        });
    }
    tokens.push(Token {
        tok: Tok::End,
        span: Span::new(bytes.len(), bytes.len()),
    });
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    params: &'a [String],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ExprError {
        let t = self.peek();
        let found = match &t.tok {
            Tok::End => "end of input".to_string(),
            Tok::Number(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            other => format!("{other:?}"),
        };
        ExprError::Syntax {
            offset: t.span.start,
            message: format!("expected {expected}, found {found}"),
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.term()?;
            lhs = Node::binary(op, lhs, rhs);
        }
    }

    /// A `-` that opens a term negates the whole product that follows it,
    /// so `-i*a` is `Neg(Mul(i, a))`; after `*` or `/` it binds one factor.
    fn term(&mut self) -> Result<Node, ExprError> {
        if self.peek().tok == Tok::Minus {
            let minus = self.advance();
            let first = self.power()?;
            let inner = self.product(first)?;
            let span = minus.span.join(inner.span);
            return Ok(Node::new(NodeKind::Neg(Box::new(inner)), span));
        }
        let first = self.power()?;
        self.product(first)
    }

    fn product(&mut self, mut lhs: Node) -> Result<Node, ExprError> {
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.factor()?;
            lhs = Node::binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Node, ExprError> {
        if self.peek().tok == Tok::Minus {
            let minus = self.advance();
            let inner = self.power()?;
            let span = minus.span.join(inner.span);
            return Ok(Node::new(NodeKind::Neg(Box::new(inner)), span));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        self.advance();
        let negative = if self.peek().tok == Tok::Minus {
            self.advance();
            true
        } else {
            false
        };
        let tok = self.peek().clone();
        let Tok::Number(v) = tok.tok else {
            return Err(self.unexpected("integer exponent"));
        };
        if v.fract() != 0.0 || v > f64::from(i32::MAX) {
            return Err(ExprError::Syntax {
                offset: tok.span.start,
                message: "exponent must be an integer literal".into(),
            });
        }
        self.advance();
        let exponent = if negative { -(v as i32) } else { v as i32 };
        let span = base.span.join(tok.span);
        Ok(Node::new(NodeKind::Pow(Box::new(base), exponent), span))
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let tok = self.peek().clone();
        match tok.tok {
            Tok::Number(v) => {
                self.advance();
                Ok(Node::new(NodeKind::Number(v), tok.span))
            }
            Tok::LParen => {
                self.advance();
                let mut inner = self.expr()?;
                let close = self.expect_rparen()?;
                inner.span = tok.span.join(close);
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.advance();
                if let Some(func) = Function::from_name(&name) {
                    if self.peek().tok != Tok::LParen {
                        return Err(self.unexpected(&format!("`(` after `{name}`")));
                    }
                    self.advance();
                    let arg = self.expr()?;
                    let close = self.expect_rparen()?;
                    return Ok(Node::new(
                        NodeKind::Call(func, Box::new(arg)),
                        tok.span.join(close),
                    ));
                }
                match name.as_str() {
                    "i" => Ok(Node::new(NodeKind::Constant(Constant::I), tok.span)),
                    "pi" => Ok(Node::new(NodeKind::Constant(Constant::Pi), tok.span)),
                    _ => match self.params.iter().position(|p| *p == name) {
                        Some(index) => Ok(Node::new(NodeKind::Param(index, name), tok.span)),
                        None => Err(ExprError::UnknownIdentifier {
                            name,
                            offset: tok.span.start,
                        }),
                    },
                }
            }
            _ => Err(self.unexpected("a number, identifier or `(`")),
        }
    }

    fn expect_rparen(&mut self) -> Result<Span, ExprError> {
        if self.peek().tok == Tok::RParen {
            Ok(self.advance().span)
        } else {
            Err(self.unexpected("`)`"))
        }
    }
}

pub(super) fn parse_node(source: &str, params: &[String]) -> Result<Node, ExprError> {
    let tokens = lex(source)?;
    if tokens.len() == 1 {
        return Err(ExprError::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        params,
    };
    let node = parser.expr()?;
    if parser.peek().tok != Tok::End {
        return Err(parser.unexpected("an operator or end of input"));
    }
    Ok(node)
}
