//! Recursive-descent parser for the coefficient expression grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?            -- right-associative
//! atom   := number | variable | func '(' expr ')' | '(' expr ')'
//! func   := 'exp' | 'ln' | 'sin' | 'cos' | 'sqrt'
//! ```
//!
//! Variables are `t` and `x1`, `x2`, ...; the aliases `x`, `y`, `z` stand for
//! `x1`, `x2`, `x1` to match the usual scalar/planar SDE notation. Whitespace
//! is insignificant.

use thiserror::Error;

use super::ast::{BinOp, ExprAst, ExprKind, Func, Span, VarId};

#[derive(Debug, Clone, Error, PartialEq)]
#[error("parse error at offset {offset}: expected {expected}")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

/// Parses an expression, requiring the whole input to be consumed.
pub fn parse(text: &str) -> Result<ExprAst, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let ast = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(ParseError {
            offset: p.pos,
            expected: "end of input or an operator".into(),
        });
    }
    Ok(ast)
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(ParseError {
                offset: self.pos,
                expected: format!("\"{}\"", c as char),
            })
        }
    }

    fn expr(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = bin(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<ExprAst, ParseError> {
        if self.peek() == Some(b'-') {
            let start = self.pos;
            self.pos += 1;
            let inner = self.unary()?;
            let span = Span {
                start,
                end: inner.span.end,
            };
            return Ok(ExprAst {
                kind: ExprKind::Neg(Box::new(inner)),
                span,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExprAst, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exponent = self.unary()?;
            let span = Span {
                start: base.span.start,
                end: exponent.span.end,
            };
            return Ok(ExprAst {
                kind: ExprKind::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)),
                span,
            });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ExprAst, ParseError> {
        match self.peek() {
            Some(b'(') => {
                let start = self.pos;
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(ExprAst {
                    kind: inner.kind,
                    span: Span {
                        start,
                        end: self.pos,
                    },
                })
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            _ => Err(ParseError {
                offset: self.pos,
                expected: "a number, variable, function call or \"(\"".into(),
            }),
        }
    }

    fn number(&mut self) -> Result<ExprAst, ParseError> {
        let start = self.pos;
        let mut end = self.pos;
        let mut seen_dot = false;
        while end < self.src.len() {
            let c = self.src[end];
            if c.is_ascii_digit() {
                end += 1;
            } else if c == b'.' && !seen_dot {
                seen_dot = true;
                end += 1;
            } else if (c == b'e' || c == b'E') && end > start {
                // exponent part: e[+-]?digits
                let mut cursor = end + 1;
                if cursor < self.src.len() && (self.src[cursor] == b'+' || self.src[cursor] == b'-')
                {
                    cursor += 1;
                }
                if cursor < self.src.len() && self.src[cursor].is_ascii_digit() {
                    end = cursor;
                    while end < self.src.len() && self.src[end].is_ascii_digit() {
                        end += 1;
                    }
                }
                break;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..end]).expect("ascii digits");
        let value: f64 = text.parse().map_err(|_| ParseError {
            offset: start,
            expected: "a numeric literal".into(),
        })?;
        self.pos = end;
        Ok(ExprAst {
            kind: ExprKind::Num(value),
            span: Span { start, end },
        })
    }

    fn ident(&mut self) -> Result<ExprAst, ParseError> {
        let start = self.pos;
        let mut end = self.pos;
        while end < self.src.len() && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
        {
            end += 1;
        }
        let name = std::str::from_utf8(&self.src[start..end]).expect("ascii ident");
        self.pos = end;
        let func = match name {
            "exp" => Some(Func::Exp),
            "ln" => Some(Func::Ln),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        };
        if let Some(func) = func {
            self.expect(b'(')?;
            let arg = self.expr()?;
            self.expect(b')')?;
            return Ok(ExprAst {
                kind: ExprKind::Call(func, Box::new(arg)),
                span: Span {
                    start,
                    end: self.pos,
                },
            });
        }
        let var = match name {
            "t" => Some(VarId::T),
            "x" | "z" => Some(VarId::X(1)),
            "y" => Some(VarId::X(2)),
            _ if name.starts_with('x') && name.len() > 1 => {
                name[1..].parse::<u32>().ok().filter(|&i| i >= 1).map(VarId::X)
            }
            _ => None,
        };
        match var {
            Some(v) => Ok(ExprAst {
                kind: ExprKind::Var(v),
                span: Span { start, end },
            }),
            None => Err(ParseError {
                offset: start,
                expected: format!(
                    "a known identifier (t, x<i>, x, y, z, exp, ln, sin, cos, sqrt), found \"{}\"",
                    name
                ),
            }),
        }
    }
}

fn bin(op: BinOp, lhs: ExprAst, rhs: ExprAst) -> ExprAst {
    let span = Span {
        start: lhs.span.start,
        end: rhs.span.end,
    };
    ExprAst {
        kind: ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)),
        span,
    }
}
