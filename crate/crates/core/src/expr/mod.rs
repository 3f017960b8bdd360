//! Coefficient-function DSL: parsing, plain evaluation and truncated Taylor
//! (hyper-dual) evaluation for exact first and second partial derivatives.

mod ast;
mod eval;
mod parser;
mod taylor;

pub use ast::{BinOp, ExprAst, ExprKind, Func, Span, VarId};
pub use eval::{eval, Env, EvalError, EvalErrorKind};
pub use parser::{parse, ParseError};
pub use taylor::{eval_taylor2, Taylor2, TaylorCtx, TaylorVal};
