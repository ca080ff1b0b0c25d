use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops;
use std::sync::Arc;

use num_traits::{One, ToPrimitive, Zero};

use super::normalize::normalize;

/// Exact rational coefficient type used throughout the kernel.
pub type Rational = num_rational::Ratio<i128>;

/// Highest total jet order a symbol may carry.
pub const MAX_JET_ORDER: u8 = 4;

/// Name of the sign parameter obeying `eps^2 = 1`.
pub const EPS: &str = "eps";

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    T,
    X,
    /// `u` differentiated `t` times in time and `x` times in space; `Jet{0,0}` is `u`.
    Jet { t: u8, x: u8 },
    Param(Arc<str>),
    /// `f` and its time derivatives `f_t`, `f_tt`, ...
    FDeriv(u32),
    /// A fixed antiderivative of `f` in `t`.
    FInt,
    Omega,
    /// `phi` and its derivatives with respect to `omega`.
    Phi(u8),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    IndependentVar,
    Dependent,
    JetVar,
    Parameter,
    ArbitraryFunction,
    ReductionVar,
}

impl Symbol {
    pub fn param(name: &str) -> Symbol {
        Symbol::Param(Arc::from(name))
    }

    pub fn u() -> Symbol {
        Symbol::Jet { t: 0, x: 0 }
    }

    pub fn kind(&self) -> SymbolKind {
        match self {
            Symbol::T | Symbol::X => SymbolKind::IndependentVar,
            Symbol::Jet { t: 0, x: 0 } => SymbolKind::Dependent,
            Symbol::Jet { .. } => SymbolKind::JetVar,
            Symbol::Param(_) => SymbolKind::Parameter,
            Symbol::FDeriv(_) | Symbol::FInt => SymbolKind::ArbitraryFunction,
            Symbol::Omega | Symbol::Phi(_) => SymbolKind::ReductionVar,
        }
    }

    pub fn is_eps(&self) -> bool {
        matches!(self, Symbol::Param(p) if &**p == EPS)
    }

    pub fn jet_order(&self) -> Option<u8> {
        match self {
            Symbol::Jet { t, x } => Some(t + x),
            _ => None,
        }
    }

    /// True for symbols that are functions of `t` even when not written as `t`.
    pub fn depends_on_t(&self) -> bool {
        matches!(self, Symbol::T | Symbol::FDeriv(_) | Symbol::FInt)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::T => f.write_str("t"),
            Symbol::X => f.write_str("x"),
            Symbol::Jet { t: 0, x: 0 } => f.write_str("u"),
            Symbol::Jet { t, x } => {
                f.write_str("u_")?;
                for _ in 0..*t {
                    f.write_str("t")?;
                }
                for _ in 0..*x {
                    f.write_str("x")?;
                }
                Ok(())
            }
            Symbol::Param(p) => f.write_str(p),
            Symbol::FDeriv(0) => f.write_str("f"),
            Symbol::FDeriv(r) => {
                f.write_str("f_")?;
                for _ in 0..*r {
                    f.write_str("t")?;
                }
                Ok(())
            }
            Symbol::FInt => f.write_str("F"),
            Symbol::Omega => f.write_str("omega"),
            Symbol::Phi(j) => {
                f.write_str("phi")?;
                for _ in 0..*j {
                    f.write_str("'")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Arctan,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Arctan => "arctan",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "arctan" | "atan" => Func::Arctan,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// Variant order matters: it fixes the canonical ordering of factors and terms
/// (numbers sort first so a coefficient always leads a product).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Num(Rational),
    Sym(Symbol),
    Func(Func, Expr),
    Pow(Expr, Expr),
    Mul(Vec<Expr>),
    Add(Vec<Expr>),
}

struct Inner {
    node: Node,
    normal: bool,
}

/// Immutable, cheaply clonable symbolic expression.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.node == other.0.node
    }
}

impl Eq for Expr {}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.0.node.cmp(&other.0.node)
    }
}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.node.hash(state)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Expr {
    pub(crate) fn raw(node: Node) -> Expr {
        Expr(Arc::new(Inner { node, normal: false }))
    }

    pub(crate) fn normal(node: Node) -> Expr {
        Expr(Arc::new(Inner { node, normal: true }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn is_normalized(&self) -> bool {
        self.0.normal
    }

    pub fn rational(q: Rational) -> Expr {
        Expr::normal(Node::Num(q))
    }

    pub fn int(i: i128) -> Expr {
        Expr::rational(Rational::from_integer(i))
    }

    pub fn frac(p: i128, q: i128) -> Expr {
        Expr::rational(Rational::new(p, q))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn sym(s: Symbol) -> Expr {
        Expr::normal(Node::Sym(s))
    }

    pub fn t() -> Expr {
        Expr::sym(Symbol::T)
    }

    pub fn x() -> Expr {
        Expr::sym(Symbol::X)
    }

    pub fn u() -> Expr {
        Expr::sym(Symbol::u())
    }

    pub fn jet(t: u8, x: u8) -> Expr {
        Expr::sym(Symbol::Jet { t, x })
    }

    pub fn param(name: &str) -> Expr {
        Expr::sym(Symbol::param(name))
    }

    pub fn eps() -> Expr {
        Expr::param(EPS)
    }

    pub fn f() -> Expr {
        Expr::sym(Symbol::FDeriv(0))
    }

    pub fn f_deriv(order: u32) -> Expr {
        Expr::sym(Symbol::FDeriv(order))
    }

    pub fn f_int() -> Expr {
        Expr::sym(Symbol::FInt)
    }

    pub fn omega() -> Expr {
        Expr::sym(Symbol::Omega)
    }

    pub fn phi(order: u8) -> Expr {
        Expr::sym(Symbol::Phi(order))
    }

    /// Unnormalized sum node.
    pub fn add_raw(terms: Vec<Expr>) -> Expr {
        Expr::raw(Node::Add(terms))
    }

    /// Unnormalized product node.
    pub fn mul_raw(factors: Vec<Expr>) -> Expr {
        Expr::raw(Node::Mul(factors))
    }

    pub fn pow_raw(base: Expr, exp: Expr) -> Expr {
        Expr::raw(Node::Pow(base, exp))
    }

    pub fn func_raw(f: Func, arg: Expr) -> Expr {
        Expr::raw(Node::Func(f, arg))
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        normalize(&Expr::add_raw(terms.into_iter().collect()))
    }

    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        normalize(&Expr::mul_raw(factors.into_iter().collect()))
    }

    pub fn pow(&self, exp: &Expr) -> Expr {
        normalize(&Expr::pow_raw(self.clone(), exp.clone()))
    }

    pub fn powi(&self, exp: i128) -> Expr {
        self.pow(&Expr::int(exp))
    }

    pub fn apply(f: Func, arg: &Expr) -> Expr {
        normalize(&Expr::func_raw(f, arg.clone()))
    }

    pub fn exp(&self) -> Expr {
        Expr::apply(Func::Exp, self)
    }

    pub fn ln(&self) -> Expr {
        Expr::apply(Func::Ln, self)
    }

    pub fn sin(&self) -> Expr {
        Expr::apply(Func::Sin, self)
    }

    pub fn cos(&self) -> Expr {
        Expr::apply(Func::Cos, self)
    }

    pub fn arctan(&self) -> Expr {
        Expr::apply(Func::Arctan, self)
    }

    pub fn sqrt(&self) -> Expr {
        Expr::apply(Func::Sqrt, self)
    }

    pub fn recip(&self) -> Expr {
        self.powi(-1)
    }

    pub fn as_rational(&self) -> Option<Rational> {
        match self.node() {
            Node::Num(q) => Some(*q),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<i128> {
        self.as_rational().filter(|q| q.is_integer()).map(|q| q.to_integer())
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        match self.node() {
            Node::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self.node(), Node::Num(q) if q.is_zero())
    }

    pub fn is_one_literal(&self) -> bool {
        matches!(self.node(), Node::Num(q) if q.is_one())
    }

    pub fn to_f64(&self) -> Option<f64> {
        self.as_rational().and_then(|q| rational_to_f64(&q))
    }

    /// Terms of a sum, or the expression itself as a single term (empty for 0).
    pub fn terms(&self) -> Vec<Expr> {
        match self.node() {
            Node::Add(ts) => ts.clone(),
            Node::Num(q) if q.is_zero() => Vec::new(),
            _ => vec![self.clone()],
        }
    }

    /// Factors of a product, or the expression itself as a single factor.
    pub fn factors(&self) -> Vec<Expr> {
        match self.node() {
            Node::Mul(fs) => fs.clone(),
            _ => vec![self.clone()],
        }
    }

    /// Splits a normalized term into its rational coefficient and the remaining monomial.
    pub fn split_coefficient(&self) -> (Rational, Expr) {
        match self.node() {
            Node::Num(q) => (*q, Expr::one()),
            Node::Mul(fs) => match fs[0].node() {
                Node::Num(q) => {
                    let rest = &fs[1..];
                    let mono = if rest.len() == 1 {
                        rest[0].clone()
                    } else {
                        Expr::normal(Node::Mul(rest.to_vec()))
                    };
                    (*q, mono)
                }
                _ => (Rational::one(), self.clone()),
            },
            _ => (Rational::one(), self.clone()),
        }
    }

    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self.node() {
            Node::Num(_) => {}
            Node::Sym(s) => {
                out.insert(s.clone());
            }
            Node::Func(_, a) => a.collect_symbols(out),
            Node::Pow(b, e) => {
                b.collect_symbols(out);
                e.collect_symbols(out);
            }
            Node::Mul(xs) | Node::Add(xs) => xs.iter().for_each(|x| x.collect_symbols(out)),
        }
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        self.any_symbol(&|x| x == s)
    }

    pub fn any_symbol(&self, pred: &dyn Fn(&Symbol) -> bool) -> bool {
        match self.node() {
            Node::Num(_) => false,
            Node::Sym(s) => pred(s),
            Node::Func(_, a) => a.any_symbol(pred),
            Node::Pow(b, e) => b.any_symbol(pred) || e.any_symbol(pred),
            Node::Mul(xs) | Node::Add(xs) => xs.iter().any(|x| x.any_symbol(pred)),
        }
    }

    pub fn depends_on_t(&self) -> bool {
        self.any_symbol(&Symbol::depends_on_t)
    }

    /// True when the expression involves only numbers and parameters.
    pub fn is_constant(&self) -> bool {
        !self.any_symbol(&|s| s.kind() != SymbolKind::Parameter)
    }

    /// Number of nodes, used to keep randomized tests bounded.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Num(_) | Node::Sym(_) => 1,
            Node::Func(_, a) => 1 + a.size(),
            Node::Pow(b, e) => 1 + b.size() + e.size(),
            Node::Mul(xs) | Node::Add(xs) => 1 + xs.iter().map(Expr::size).sum::<usize>(),
        }
    }

    /// Structurally identical copy with every normalization mark cleared.
    pub fn to_raw(&self) -> Expr {
        let node = match self.node() {
            Node::Num(q) => Node::Num(*q),
            Node::Sym(s) => Node::Sym(s.clone()),
            Node::Func(f, a) => Node::Func(*f, a.to_raw()),
            Node::Pow(b, e) => Node::Pow(b.to_raw(), e.to_raw()),
            Node::Mul(xs) => Node::Mul(xs.iter().map(Expr::to_raw).collect()),
            Node::Add(xs) => Node::Add(xs.iter().map(Expr::to_raw).collect()),
        };
        Expr::raw(node)
    }
}

pub(crate) fn rational_to_f64(q: &Rational) -> Option<f64> {
    Some(q.numer().to_f64()? / q.denom().to_f64()?)
}

/// Best rational approximation with bounded denominator (continued fractions).
pub fn rational_approx(x: f64, max_den: i128) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    for _ in 0..40 {
        let a = v.floor();
        if a > 1e15 {
            break;
        }
        let ai = a as i128;
        let p2 = ai.checked_mul(p1)?.checked_add(p0)?;
        let q2 = ai.checked_mul(q1)?.checked_add(q0)?;
        if q2 > max_den {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = v - a;
        if frac < 1e-12 {
            break;
        }
        v = 1.0 / frac;
    }
    if q1 == 0 {
        return None;
    }
    let r = Rational::new(p1, q1);
    Some(if neg { -r } else { r })
}

impl From<i128> for Expr {
    fn from(i: i128) -> Expr {
        Expr::int(i)
    }
}

impl From<Rational> for Expr {
    fn from(q: Rational) -> Expr {
        Expr::rational(q)
    }
}

impl From<Symbol> for Expr {
    fn from(s: Symbol) -> Expr {
        Expr::sym(s)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(&self, &rhs)
            }
        }
        impl ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(&self, rhs)
            }
        }
        impl ops::$trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, &rhs)
            }
        }
        impl ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl ops::$trait<i128> for Expr {
            type Output = Expr;
            fn $method(self, rhs: i128) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(&self, &Expr::int(rhs))
            }
        }
        impl ops::$trait<i128> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: i128) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, &Expr::int(rhs))
            }
        }
        impl ops::$trait<Expr> for i128 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(&Expr::int(self), &rhs)
            }
        }
        impl ops::$trait<&Expr> for i128 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(&Expr::int(self), rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| normalize(&Expr::add_raw(vec![a.clone(), b.clone()])));
binop!(Sub, sub, |a, b| normalize(&Expr::add_raw(vec![
    a.clone(),
    Expr::mul_raw(vec![Expr::int(-1), b.clone()])
])));
binop!(Mul, mul, |a, b| normalize(&Expr::mul_raw(vec![a.clone(), b.clone()])));
binop!(Div, div, |a, b| normalize(&Expr::mul_raw(vec![
    a.clone(),
    Expr::pow_raw(b.clone(), Expr::int(-1))
])));

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::int(-1) * self
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::int(-1) * self
    }
}
