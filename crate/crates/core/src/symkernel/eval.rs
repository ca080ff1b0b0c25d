//! Floating-point evaluation.

use std::collections::HashMap;

use super::expr::{rational_to_f64, Expr, Func, Node, Symbol};
use super::KernelError;

pub type Point = HashMap<Symbol, f64>;

/// Evaluates `e` at a point. Every free symbol must be bound; `ln`/`sqrt` of a
/// non-positive argument, or a non-integer power of a negative base, is a
/// domain error.
pub fn eval_numeric(e: &Expr, point: &Point) -> Result<f64, KernelError> {
    let v = eval(e, point)?;
    if !v.is_finite() {
        return Err(KernelError::Domain(format!("non-finite value of {e}")));
    }
    Ok(v)
}

fn eval(e: &Expr, point: &Point) -> Result<f64, KernelError> {
    Ok(match e.node() {
        Node::Num(q) => rational_to_f64(q).ok_or_else(|| KernelError::Domain(q.to_string()))?,
        Node::Sym(s) => *point
            .get(s)
            .ok_or_else(|| KernelError::UnboundSymbol(s.to_string()))?,
        Node::Func(f, a) => apply(*f, eval(a, point)?)?,
        Node::Pow(b, x) => {
            let bv = eval(b, point)?;
            match x.as_rational() {
                Some(q) if q.is_integer() => powi(bv, q.to_integer())?,
                _ => powf(bv, eval(x, point)?)?,
            }
        }
        Node::Mul(fs) => {
            let mut acc = 1.0;
            for f in fs {
                acc *= eval(f, point)?;
            }
            acc
        }
        Node::Add(ts) => {
            let mut acc = 0.0;
            for t in ts {
                acc += eval(t, point)?;
            }
            acc
        }
    })
}

pub(crate) fn apply(f: Func, a: f64) -> Result<f64, KernelError> {
    Ok(match f {
        Func::Exp => a.exp(),
        Func::Ln => {
            if a <= 0.0 {
                return Err(KernelError::Domain(format!("ln({a})")));
            }
            a.ln()
        }
        Func::Sin => a.sin(),
        Func::Cos => a.cos(),
        Func::Arctan => a.atan(),
        Func::Sqrt => {
            if a < 0.0 {
                return Err(KernelError::Domain(format!("sqrt({a})")));
            }
            a.sqrt()
        }
    })
}

pub(crate) fn powi(b: f64, n: i128) -> Result<f64, KernelError> {
    if b == 0.0 && n < 0 {
        return Err(KernelError::Domain("0 raised to a negative power".into()));
    }
    Ok(match i32::try_from(n) {
        Ok(k) => b.powi(k),
        Err(_) => b.powf(n as f64),
    })
}

pub(crate) fn powf(b: f64, x: f64) -> Result<f64, KernelError> {
    if b < 0.0 {
        if x.fract() == 0.0 {
            return Ok(b.powf(x));
        }
        return Err(KernelError::Domain(format!("({b})^{x}")));
    }
    if b == 0.0 && x <= 0.0 {
        return Err(KernelError::Domain(format!("0^{x}")));
    }
    Ok(b.powf(x))
}

/// An expression lowered to a tree over slot indices, for repeated evaluation
/// (ODE right-hand sides, sampling sweeps).
#[derive(Clone, Debug)]
pub struct Compiled {
    root: Op,
}

#[derive(Clone, Debug)]
enum Op {
    Const(f64),
    Var(usize),
    Func(Func, Box<Op>),
    PowI(Box<Op>, i32),
    Pow(Box<Op>, Box<Op>),
    Mul(Vec<Op>),
    Add(Vec<Op>),
}

impl Compiled {
    /// Symbols not listed in `slots` are rejected.
    pub fn new(e: &Expr, slots: &[Symbol]) -> Result<Compiled, KernelError> {
        Ok(Compiled {
            root: lower(e, slots)?,
        })
    }

    /// May return NaN or infinity; callers decide how to treat that.
    pub fn eval(&self, vals: &[f64]) -> f64 {
        run(&self.root, vals)
    }
}

fn lower(e: &Expr, slots: &[Symbol]) -> Result<Op, KernelError> {
    Ok(match e.node() {
        Node::Num(q) => Op::Const(rational_to_f64(q).unwrap_or(f64::NAN)),
        Node::Sym(s) => Op::Var(
            slots
                .iter()
                .position(|x| x == s)
                .ok_or_else(|| KernelError::UnboundSymbol(s.to_string()))?,
        ),
        Node::Func(f, a) => Op::Func(*f, Box::new(lower(a, slots)?)),
        Node::Pow(b, x) => match x.as_integer().and_then(|n| i32::try_from(n).ok()) {
            Some(n) => Op::PowI(Box::new(lower(b, slots)?), n),
            None => Op::Pow(Box::new(lower(b, slots)?), Box::new(lower(x, slots)?)),
        },
        Node::Mul(fs) => Op::Mul(fs.iter().map(|f| lower(f, slots)).collect::<Result<_, _>>()?),
        Node::Add(ts) => Op::Add(ts.iter().map(|t| lower(t, slots)).collect::<Result<_, _>>()?),
    })
}

fn run(op: &Op, v: &[f64]) -> f64 {
    match op {
        Op::Const(c) => *c,
        Op::Var(i) => v[*i],
        Op::Func(f, a) => apply(*f, run(a, v)).unwrap_or(f64::NAN),
        Op::PowI(b, n) => run(b, v).powi(*n),
        Op::Pow(b, x) => powf(run(b, v), run(x, v)).unwrap_or(f64::NAN),
        Op::Mul(fs) => fs.iter().map(|f| run(f, v)).product(),
        Op::Add(ts) => ts.iter().map(|t| run(t, v)).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::parse;

    #[test]
    fn evaluates_and_reports_domain() {
        let e = parse("x^2 + ln(t)").unwrap();
        let mut pt = Point::new();
        pt.insert(Symbol::X, 3.0);
        pt.insert(Symbol::T, 1.0);
        assert_eq!(eval_numeric(&e, &pt).unwrap(), 9.0);
        pt.insert(Symbol::T, -1.0);
        assert!(matches!(eval_numeric(&e, &pt), Err(KernelError::Domain(_))));
        pt.insert(Symbol::T, 1.0);
        pt.remove(&Symbol::X);
        assert!(matches!(eval_numeric(&e, &pt), Err(KernelError::UnboundSymbol(_))));
    }

    #[test]
    fn compiled_matches_interpreted() {
        let e = parse("sin(x)*u^(3/2) - exp(-t)*u_x/(1+x^2)").unwrap();
        let slots = [Symbol::T, Symbol::X, Symbol::u(), Symbol::Jet { t: 0, x: 1 }];
        let c = Compiled::new(&e, &slots).unwrap();
        let vals = [0.3, 1.7, 0.9, -0.4];
        let pt: Point = slots.iter().cloned().zip(vals).collect();
        let a = eval_numeric(&e, &pt).unwrap();
        assert!((a - c.eval(&vals)).abs() < 1e-14);
    }
}
