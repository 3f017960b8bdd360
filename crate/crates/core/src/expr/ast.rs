//! Expression trees for coefficient functions of `(t, x1..xn)`.

use std::fmt;

/// Variable reference: the time variable `t` or a state component `x<i>`
/// (1-based, as written in the source text).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarId {
    T,
    X(u32),
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarId::T => write!(f, "t"),
            VarId::X(i) => write!(f, "x{}", i),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }
}

/// Byte range of a node in the source text, for error reporting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Num(f64),
    Var(VarId),
    Neg(Box<ExprAst>),
    Bin(BinOp, Box<ExprAst>, Box<ExprAst>),
    Call(Func, Box<ExprAst>),
}

/// A parsed, immutable expression tree. Nodes keep their source spans;
/// equality compares structure only, so printing and re-parsing an
/// expression yields an equal tree.
#[derive(Debug, Clone)]
pub struct ExprAst {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for ExprAst {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (ExprKind::Num(a), ExprKind::Num(b)) => a == b,
            (ExprKind::Var(a), ExprKind::Var(b)) => a == b,
            (ExprKind::Neg(a), ExprKind::Neg(b)) => a == b,
            (ExprKind::Bin(op, al, ar), ExprKind::Bin(oq, bl, br)) => {
                op == oq && al == bl && ar == br
            }
            (ExprKind::Call(f, a), ExprKind::Call(g, b)) => f == g && a == b,
            _ => false,
        }
    }
}

impl ExprAst {
    pub fn num(v: f64) -> Self {
        ExprAst {
            kind: ExprKind::Num(v),
            span: Span::default(),
        }
    }

    pub fn var(v: VarId) -> Self {
        ExprAst {
            kind: ExprKind::Var(v),
            span: Span::default(),
        }
    }

    /// Largest state index referenced, if any.
    pub fn max_state_index(&self) -> Option<u32> {
        match &self.kind {
            ExprKind::Num(_) => None,
            ExprKind::Var(VarId::T) => None,
            ExprKind::Var(VarId::X(i)) => Some(*i),
            ExprKind::Neg(a) | ExprKind::Call(_, a) => a.max_state_index(),
            ExprKind::Bin(_, a, b) => match (a.max_state_index(), b.max_state_index()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        match &self.kind {
            ExprKind::Num(v) => write!(f, "{}", v),
            ExprKind::Var(v) => write!(f, "{}", v),
            ExprKind::Neg(a) => {
                // Unary minus sits between +,- and *,/ in strength.
                let needs = min_prec > 3;
                if needs {
                    write!(f, "(")?;
                }
                write!(f, "-")?;
                a.fmt_prec(f, 4)?;
                if needs {
                    write!(f, ")")
                } else {
                    Ok(())
                }
            }
            ExprKind::Bin(op, a, b) => {
                let p = op.precedence();
                let needs = p < min_prec;
                if needs {
                    write!(f, "(")?;
                }
                // +,-,*,/ are left-associative, '^' right-associative; the
                // right child of a left-associative operator keeps its parens
                // at equal precedence so the printed tree re-parses to the
                // same shape.
                let (lp, rp) = match op {
                    BinOp::Pow => (p + 1, p),
                    _ => (p, p + 1),
                };
                a.fmt_prec(f, lp)?;
                write!(f, "{}", op.symbol())?;
                b.fmt_prec(f, rp)?;
                if needs {
                    write!(f, ")")
                } else {
                    Ok(())
                }
            }
            ExprKind::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}
