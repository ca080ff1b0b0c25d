//! Differentiation and substitution.

use std::collections::BTreeMap;

use super::expr::{Expr, Func, Node, Symbol, MAX_JET_ORDER};
use super::normalize::{add_norm, normalize};
use super::KernelError;

/// Partial derivative with respect to one symbol.
///
/// Differentiating by `t` also reaches the symbols that stand for functions of
/// `t`: `d/dt f^(r) = f^(r+1)` and `d/dt F = f`. Jet variables are treated as
/// independent coordinates; use [`total_derivative`] for `D_t`/`D_x`.
pub fn differentiate(e: &Expr, s: &Symbol) -> Expr {
    diff(&normalize(e), s)
}

fn depends(e: &Expr, s: &Symbol) -> bool {
    if *s == Symbol::T {
        e.any_symbol(&Symbol::depends_on_t)
    } else {
        e.contains(s)
    }
}

fn diff(e: &Expr, s: &Symbol) -> Expr {
    if !depends(e, s) {
        return Expr::zero();
    }
    match e.node() {
        Node::Num(_) => Expr::zero(),
        Node::Sym(x) => {
            if x == s {
                return Expr::one();
            }
            match x {
                Symbol::FDeriv(r) => Expr::f_deriv(r + 1),
                Symbol::FInt => Expr::f(),
                _ => Expr::zero(),
            }
        }
        Node::Add(ts) => add_norm(ts.iter().map(|t| diff(t, s))),
        Node::Mul(fs) => add_norm((0..fs.len()).filter_map(|i| {
            let d = diff(&fs[i], s);
            if d.is_zero_literal() {
                return None;
            }
            let mut parts = fs.clone();
            parts[i] = d;
            Some(normalize(&Expr::mul_raw(parts)))
        })),
        Node::Pow(b, x) => {
            let db = diff(b, s);
            if !depends(x, s) {
                // x * b^(x-1) * b'
                return normalize(&Expr::mul_raw(vec![
                    x.clone(),
                    Expr::pow_raw(b.clone(), Expr::add_raw(vec![x.clone(), Expr::int(-1)])),
                    db,
                ]));
            }
            let dx = diff(x, s);
            // b^x * (x' ln b + x b'/b)
            normalize(&Expr::mul_raw(vec![
                e.clone(),
                Expr::add_raw(vec![
                    Expr::mul_raw(vec![dx, Expr::func_raw(Func::Ln, b.clone())]),
                    Expr::mul_raw(vec![x.clone(), db, Expr::pow_raw(b.clone(), Expr::int(-1))]),
                ]),
            ]))
        }
        Node::Func(func, a) => {
            let da = diff(a, s);
            let outer = match func {
                Func::Exp => e.clone(),
                Func::Ln => Expr::pow_raw(a.clone(), Expr::int(-1)),
                Func::Sin => Expr::func_raw(Func::Cos, a.clone()),
                Func::Cos => Expr::mul_raw(vec![Expr::int(-1), Expr::func_raw(Func::Sin, a.clone())]),
                Func::Arctan => Expr::pow_raw(
                    Expr::add_raw(vec![Expr::one(), Expr::pow_raw(a.clone(), Expr::int(2))]),
                    Expr::int(-1),
                ),
                Func::Sqrt => Expr::mul_raw(vec![
                    Expr::frac(1, 2),
                    Expr::pow_raw(a.clone(), Expr::frac(-1, 2)),
                ]),
            };
            normalize(&Expr::mul_raw(vec![outer, da]))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    T,
    X,
}

impl Direction {
    pub fn symbol(self) -> Symbol {
        match self {
            Direction::T => Symbol::T,
            Direction::X => Symbol::X,
        }
    }
}

/// Total derivative `D_t` or `D_x` on the jet space. Fails with
/// [`KernelError::OrderOverflow`] when a jet variable would exceed the order cap.
pub fn total_derivative(e: &Expr, dir: Direction) -> Result<Expr, KernelError> {
    let e = normalize(e);
    let mut parts = vec![diff(&e, &dir.symbol())];
    for sym in e.free_symbols() {
        if let Symbol::Jet { t, x } = sym {
            let d = diff(&e, &sym);
            if d.is_zero_literal() {
                continue;
            }
            let (nt, nx) = match dir {
                Direction::T => (t + 1, x),
                Direction::X => (t, x + 1),
            };
            if nt + nx > MAX_JET_ORDER {
                return Err(KernelError::OrderOverflow(format!(
                    "D_{} of {}",
                    dir.symbol(),
                    Symbol::Jet { t, x }
                )));
            }
            parts.push(normalize(&Expr::mul_raw(vec![Expr::jet(nt, nx), d])));
        }
    }
    Ok(add_norm(parts.into_iter()))
}

pub type Bindings = BTreeMap<Symbol, Expr>;

/// Simultaneous substitution of symbols. A binding whose value mentions its
/// own symbol is rejected as cyclic.
pub fn substitute(e: &Expr, bindings: &Bindings) -> Result<Expr, KernelError> {
    for (k, v) in bindings {
        if v.contains(k) {
            return Err(KernelError::CyclicSubstitution(k.to_string()));
        }
    }
    Ok(replace(e, &|s| bindings.get(s).cloned()))
}

pub fn substitute_one(e: &Expr, s: &Symbol, value: &Expr) -> Result<Expr, KernelError> {
    let mut b = Bindings::new();
    b.insert(s.clone(), value.clone());
    substitute(e, &b)
}

/// Substitution driven by a lookup; values may mention the replaced symbol
/// (e.g. `x -> x + 1`) because replacement is a single simultaneous pass.
pub fn replace(e: &Expr, lookup: &dyn Fn(&Symbol) -> Option<Expr>) -> Expr {
    if !e.any_symbol(&|s| lookup(s).is_some()) {
        return normalize(e);
    }
    normalize(&replace_raw(e, lookup))
}

fn replace_raw(e: &Expr, lookup: &dyn Fn(&Symbol) -> Option<Expr>) -> Expr {
    match e.node() {
        Node::Num(_) => e.clone(),
        Node::Sym(s) => lookup(s).unwrap_or_else(|| e.clone()),
        Node::Func(f, a) => Expr::func_raw(*f, replace_raw(a, lookup)),
        Node::Pow(b, x) => Expr::pow_raw(replace_raw(b, lookup), replace_raw(x, lookup)),
        Node::Mul(fs) => Expr::mul_raw(fs.iter().map(|x| replace_raw(x, lookup)).collect()),
        Node::Add(ts) => Expr::add_raw(ts.iter().map(|x| replace_raw(x, lookup)).collect()),
    }
}

/// Replaces the opaque `f`, `f_t`, ... and `F` by a concrete function of `t`
/// and its derivatives / antiderivative.
pub fn substitute_f(e: &Expr, f: &Expr, antiderivative: Option<&Expr>) -> Result<Expr, KernelError> {
    let mut b = Bindings::new();
    let mut max_order = 0;
    for s in e.free_symbols() {
        match s {
            Symbol::FDeriv(r) => max_order = max_order.max(r),
            Symbol::FInt if antiderivative.is_none() => {
                return Err(KernelError::UnboundSymbol("F".into()));
            }
            _ => {}
        }
    }
    let mut d = normalize(f);
    for r in 0..=max_order {
        b.insert(Symbol::FDeriv(r), d.clone());
        d = differentiate(&d, &Symbol::T);
    }
    if let Some(a) = antiderivative {
        b.insert(Symbol::FInt, normalize(a));
    }
    // f itself may legitimately contain t; only f-symbols are replaced.
    Ok(replace(e, &|s| b.get(s).cloned()))
}
