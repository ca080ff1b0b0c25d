//! Coefficient forms `f(t)` recognized by the case tables.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::symkernel::{
    differentiate, is_zero, normalize, Expr, Func, Grammar, Node, Rational, Symbol, SymbolKind,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FSpec {
    One,
    /// A constant other than 1; equivalent to `One` under scalings.
    Const(Rational),
    /// `c*t^k`, `k != 0`.
    Power { c: Rational, k: Expr },
    /// `c*exp(lambda*t)`.
    Exp { c: Rational, lambda: Rational },
    /// `exp(k*arctan t)*sqrt(t^2+1)`.
    ExpArctan { k: Expr },
    /// `(t+beta)^k*t^(1-k)`.
    PowerShifted { k: Expr, beta: Expr },
    /// `t*exp(1/t)`.
    TExpInv,
    /// `f = t`.
    Linear,
    /// Any other expression in `t`; the bare symbol `f` means arbitrary.
    General(Expr),
}

impl FSpec {
    pub fn arbitrary() -> FSpec {
        FSpec::General(Expr::f())
    }

    pub fn is_arbitrary(&self) -> bool {
        matches!(self, FSpec::General(e) if *e == Expr::f())
    }

    pub fn parse(text: &str) -> Result<FSpec> {
        let text = text.trim();
        if text.is_empty() || text == "f" || text == "f(t)" {
            return Ok(FSpec::arbitrary());
        }
        FSpec::from_expr(&Grammar::default().parse_raw(text)?)
    }

    /// Structural recognition of the tabulated forms; anything else is `General`.
    pub fn from_expr(e: &Expr) -> Result<FSpec> {
        let shifted = shifted_power(e);
        let e = normalize(e);
        if e == Expr::f() {
            return Ok(FSpec::arbitrary());
        }
        if e.any_symbol(&|s| !matches!(s.kind(), SymbolKind::Parameter) && *s != Symbol::T) {
            return Err(Error::InvalidSpec(format!("f must depend on t only, got {e}")));
        }
        if e.is_zero_literal() {
            return Err(Error::InvalidSpec("f vanishes identically".into()));
        }
        if let Some(q) = e.as_rational() {
            return Ok(if q.is_one() { FSpec::One } else { FSpec::Const(q) });
        }
        if e == Expr::t() {
            return Ok(FSpec::Linear);
        }
        if !e.depends_on_t() {
            return Ok(FSpec::General(e));
        }
        Ok(shifted.or_else(|| recognize(&e)).unwrap_or(FSpec::General(e)))
    }

    /// `from_expr`, but keeps `like` when `e` has the same value.
    pub fn from_expr_like(e: &Expr, like: &FSpec) -> Result<FSpec> {
        let got = FSpec::from_expr(e)?;
        if let (FSpec::General(_), Some(old)) = (&got, like.expr()) {
            if is_zero(&(e - old)).map(|z| z.is_zero()).unwrap_or(false) {
                return Ok(like.clone());
            }
        }
        Ok(got)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            FSpec::One => "one",
            FSpec::Const(_) => "const",
            FSpec::Power { .. } => "power",
            FSpec::Exp { .. } => "exp",
            FSpec::ExpArctan { .. } => "exparctan",
            FSpec::PowerShifted { .. } => "powershifted",
            FSpec::TExpInv => "texpinv",
            FSpec::Linear => "linear",
            FSpec::General(_) if self.is_arbitrary() => "arbitrary",
            FSpec::General(_) => "general",
        }
    }

    /// The exponent `k` of the forms that carry one.
    pub fn k(&self) -> Option<Expr> {
        match self {
            FSpec::Power { k, .. } | FSpec::ExpArctan { k } | FSpec::PowerShifted { k, .. } => {
                Some(k.clone())
            }
            FSpec::Linear => Some(Expr::one()),
            _ => None,
        }
    }

    /// `f(t)` as an expression, or `None` when arbitrary.
    pub fn expr(&self) -> Option<Expr> {
        if self.is_arbitrary() {
            return None;
        }
        let t = Expr::t();
        Some(normalize(&match self {
            FSpec::One => Expr::one(),
            FSpec::Const(c) => Expr::rational(*c),
            FSpec::Power { c, k } => Expr::rational(*c) * t.pow(k),
            FSpec::Exp { c, lambda } => Expr::rational(*c) * (Expr::rational(*lambda) * &t).exp(),
            FSpec::ExpArctan { k } => (k * t.arctan()).exp() * (t.powi(2) + 1).sqrt(),
            FSpec::PowerShifted { k, beta } => (&t + beta).pow(k) * t.pow(&(1 - k)),
            FSpec::TExpInv => &t * t.recip().exp(),
            FSpec::Linear => t,
            FSpec::General(e) => e.clone(),
        }))
    }

    /// An antiderivative in closed form when one is easy to write down.
    pub fn antiderivative(&self) -> Option<Expr> {
        let t = Expr::t();
        match self {
            FSpec::One => Some(t),
            FSpec::Const(c) => Some(Expr::rational(*c) * t),
            FSpec::Linear => Some(t.powi(2) * Expr::frac(1, 2)),
            FSpec::Power { c, k } => {
                let c = Expr::rational(*c);
                if is_zero(&(k + 1)).map(|z| z.is_zero()).unwrap_or(false) {
                    Some(c * t.ln())
                } else {
                    let k1 = k + 1;
                    Some(c * t.pow(&k1) / k1)
                }
            }
            FSpec::Exp { c, lambda } => {
                Some(Expr::rational(*c / *lambda) * (Expr::rational(*lambda) * t).exp())
            }
            FSpec::General(e) if !self.is_arbitrary() => integrate_t(e),
            _ => None,
        }
    }
}

impl fmt::Display for FSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expr() {
            Some(e) => write!(f, "{e}"),
            None => f.write_str("f"),
        }
    }
}

/// Splits a normalized term into its constant factors (numbers, parameters)
/// and the remaining factors.
pub(crate) fn split_constant(term: &Expr) -> (Expr, Expr) {
    let (c, mono) = term.split_coefficient();
    let (k, v): (Vec<Expr>, Vec<Expr>) = mono.factors().into_iter().partition(|f| f.is_constant());
    (Expr::rational(c) * Expr::product(k), Expr::product(v))
}

fn recognize(e: &Expr) -> Option<FSpec> {
    let (c, mono) = e.split_coefficient();
    let factors = mono.factors();
    let t = Expr::t();
    // c*t^k
    if factors.len() == 1 {
        if let Node::Pow(b, k) = factors[0].node() {
            if *b == t && k.is_constant() {
                return Some(FSpec::Power { c, k: k.clone() });
            }
        }
        if factors[0] == t {
            return Some(FSpec::Power { c, k: Expr::one() });
        }
        if let Node::Func(Func::Exp, a) = factors[0].node() {
            let lambda = normalize(&(a / &t));
            if let Some(l) = lambda.as_rational() {
                return Some(FSpec::Exp { c, lambda: l });
            }
        }
    }
    if !c.is_one() {
        return None;
    }
    let exp_arg = factors.iter().find_map(|f| match f.node() {
        Node::Func(Func::Exp, a) => Some(a.clone()),
        _ => None,
    });
    let others: Vec<&Expr> = factors
        .iter()
        .filter(|f| !matches!(f.node(), Node::Func(Func::Exp, _)))
        .collect();
    // t*exp(1/t)
    if exp_arg.as_ref() == Some(&t.recip()) && others.len() == 1 && *others[0] == t {
        return Some(FSpec::TExpInv);
    }
    // exp(k*arctan t)*sqrt(1+t^2)
    let sqrt = normalize(&(t.powi(2) + 1).sqrt());
    if others.len() == 1 && *others[0] == sqrt {
        match &exp_arg {
            None => return Some(FSpec::ExpArctan { k: Expr::zero() }),
            Some(a) => {
                let k = normalize(&(a / t.arctan()));
                if k.is_constant() {
                    return Some(FSpec::ExpArctan { k });
                }
            }
        }
    }
    None
}

/// `(t+beta)^k*t^(1-k)` on the tree as written: normalization splits the
/// fractional power of the sum, so this is matched before normalizing.
fn shifted_power(e: &Expr) -> Option<FSpec> {
    let Node::Mul(fs) = e.node() else { return None };
    if fs.len() != 2 {
        return None;
    }
    let t = Expr::t();
    let (mut shifted, mut tpow) = (None, None);
    for f in fs {
        let Node::Pow(b, k) = f.node() else { return None };
        let (b, k) = (normalize(b), normalize(k));
        if b == t {
            tpow = Some(k);
        } else {
            let beta = normalize(&(&b - &t));
            if beta.is_constant() && !beta.is_zero_literal() && k.is_constant() {
                shifted = Some((beta, k));
            }
        }
    }
    let ((beta, k), p) = (shifted?, tpow?);
    let sums_to_one = is_zero(&(&k + &p - 1)).ok()?.is_zero();
    let excluded = k.is_zero_literal() || k.is_one_literal();
    (sums_to_one && !excluded).then_some(FSpec::PowerShifted { k, beta })
}

/// Termwise antiderivative of sums of `c*t^p` and `c*exp(lambda*t)`,
/// checked by differentiation.
pub fn integrate_t(e: &Expr) -> Option<Expr> {
    let t = Expr::t();
    let mut parts = Vec::new();
    for term in normalize(e).terms() {
        let (c, v) = split_constant(&term);
        let part = if v.is_one_literal() {
            c * &t
        } else if v == t {
            c * t.powi(2) / 2
        } else {
            match v.node() {
                Node::Pow(b, p) if *b == t && p.is_constant() => {
                    if p.as_rational() == Some(-Rational::one()) {
                        c * t.ln()
                    } else {
                        let p1 = p + 1;
                        c * t.pow(&p1) / p1
                    }
                }
                Node::Func(Func::Exp, a) => {
                    let l = normalize(&(a / &t));
                    if !l.is_constant() || l.is_zero_literal() {
                        return None;
                    }
                    c * v.clone() / l
                }
                _ => return None,
            }
        };
        parts.push(part);
    }
    let out = normalize(&Expr::sum(parts));
    let check = differentiate(&out, &Symbol::T) - e;
    is_zero(&check).ok()?.is_zero().then_some(out)
}

pub(crate) fn sign_of(q: &Rational) -> i8 {
    if q.is_negative() {
        -1
    } else if q.is_zero() {
        0
    } else {
        1
    }
}
