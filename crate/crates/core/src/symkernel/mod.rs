//! Exact symbolic algebra over the jet space of `u(t, x)`.

mod calculus;
mod eval;
mod expr;
mod normalize;
mod parse;
mod print;
mod zero;

pub use calculus::{
    differentiate, replace, substitute, substitute_f, substitute_one, total_derivative, Bindings,
    Direction,
};
pub use eval::{eval_numeric, Compiled, Point};
pub use expr::{rational_approx, Expr, Func, Node, Rational, Symbol, SymbolKind, EPS, MAX_JET_ORDER};
pub use normalize::normalize;
pub use parse::{parse, Grammar};
pub use zero::{clear_denominators, is_zero, is_zero_with, ZeroConfig, ZeroTest};

pub(crate) use expr::rational_to_f64;
pub(crate) use zero::sample_point;


#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum KernelError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown symbol `{name}` at byte {offset}")]
    UnknownSymbol { name: String, offset: usize },
    #[error("jet order above {MAX_JET_ORDER}: {0}")]
    OrderOverflow(String),
    #[error("cyclic substitution for `{0}`")]
    CyclicSubstitution(String),
    #[error("evaluation left the domain on every resample: {0}")]
    EvalDomain(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
}
