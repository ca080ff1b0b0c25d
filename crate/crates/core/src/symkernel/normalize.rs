//! Canonical form.
//!
//! A normalized expression is a sum of monomials with exact rational
//! coefficients. Each monomial is a sorted product of atoms, one per base:
//! symbols, function applications, numeric bases with non-integer exponent,
//! and primitive sums raised to an exponent whose constant part is below one.
//! Sums raised to a positive integer power are expanded; a sum factor whose
//! base matches a fractional/negative power of the same sum is merged into it
//! before expansion. All `exp` factors of a monomial are combined into one.
//! `eps^2 = 1` is applied to every integer power of `eps`.

use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::expr::{Expr, Func, Node, Rational};

/// Largest integer power of a sum that is expanded.
const EXPAND_CAP: i128 = 12;

pub fn normalize(e: &Expr) -> Expr {
    if e.is_normalized() {
        return e.clone();
    }
    match e.node() {
        Node::Num(_) | Node::Sym(_) => Expr::normal(e.node().clone()),
        Node::Func(f, a) => func_norm(*f, normalize(a)),
        Node::Pow(b, x) => pow_norm(&normalize(b), &normalize(x)),
        Node::Mul(fs) => {
            let mut mb = MulBuilder::default();
            for f in fs {
                mb.push(&normalize(f));
            }
            mb.finish()
        }
        Node::Add(ts) => add_norm(ts.iter().map(normalize)),
    }
}

pub(crate) fn add_norm(terms: impl Iterator<Item = Expr>) -> Expr {
    let mut acc: BTreeMap<Expr, Rational> = BTreeMap::new();
    for t in terms {
        add_into(&mut acc, &t);
    }
    build_sum(acc)
}

fn add_into(acc: &mut BTreeMap<Expr, Rational>, t: &Expr) {
    if let Node::Add(ts) = t.node() {
        for x in ts {
            add_into(acc, x);
        }
        return;
    }
    let (c, mono) = t.split_coefficient();
    if !c.is_zero() {
        *acc.entry(mono).or_insert_with(Rational::zero) += c;
    }
}

fn build_sum(acc: BTreeMap<Expr, Rational>) -> Expr {
    let mut terms: Vec<Expr> = acc
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(m, c)| make_term(c, &m))
        .collect();
    match terms.len() {
        0 => Expr::zero(),
        1 => terms.pop().unwrap(),
        _ => Expr::normal(Node::Add(terms)),
    }
}

pub(crate) fn make_term(c: Rational, mono: &Expr) -> Expr {
    if c.is_zero() {
        return Expr::zero();
    }
    if mono.is_one_literal() {
        return Expr::rational(c);
    }
    if c.is_one() {
        return mono.clone();
    }
    let mut fs = vec![Expr::rational(c)];
    fs.extend(mono.factors());
    Expr::normal(Node::Mul(fs))
}

fn make_product(coeff: Rational, atoms: Vec<Expr>) -> Expr {
    if coeff.is_zero() {
        return Expr::zero();
    }
    if atoms.is_empty() {
        return Expr::rational(coeff);
    }
    if coeff.is_one() && atoms.len() == 1 {
        return atoms.into_iter().next().unwrap();
    }
    let mut fs = Vec::with_capacity(atoms.len() + 1);
    if !coeff.is_one() {
        fs.push(Expr::rational(coeff));
    }
    fs.extend(atoms);
    Expr::normal(Node::Mul(fs))
}

fn func_norm(f: Func, a: Expr) -> Expr {
    match f {
        Func::Sqrt => pow_norm(&a, &Expr::frac(1, 2)),
        Func::Exp if a.is_zero_literal() => Expr::one(),
        Func::Exp if a.terms().iter().any(|t| matches!(t.split_coefficient().1.node(), Node::Func(Func::Ln, _))) => {
            let mut mb = MulBuilder::default();
            mb.push(&Expr::normal(Node::Func(Func::Exp, a)));
            mb.finish()
        }
        Func::Ln => ln_norm(a),
        Func::Sin | Func::Arctan if a.is_zero_literal() => Expr::zero(),
        Func::Cos if a.is_zero_literal() => Expr::one(),
        _ => Expr::normal(Node::Func(f, a)),
    }
}

fn ln_norm(a: Expr) -> Expr {
    if a.is_one_literal() {
        return Expr::zero();
    }
    match a.node() {
        Node::Func(Func::Exp, b) => b.clone(),
        Node::Pow(b, e) => normalize(&Expr::mul_raw(vec![
            e.clone(),
            Expr::func_raw(Func::Ln, b.clone()),
        ])),
        Node::Mul(fs) if fs.iter().all(|f| !f.as_rational().is_some_and(|q| q.is_negative())) => {
            add_norm(fs.iter().map(|f| ln_norm(f.clone())))
        }
        _ => Expr::normal(Node::Func(Func::Ln, a)),
    }
}

pub(crate) fn pow_norm(b: &Expr, e: &Expr) -> Expr {
    if e.is_zero_literal() {
        return Expr::one();
    }
    if e.is_one_literal() {
        return b.clone();
    }
    let mut mb = MulBuilder::default();
    mb.push_pow(b, e);
    mb.finish()
}

/// Splits a sum into a positive rational content and the primitive sum whose
/// leading coefficient is +1 or -1.
pub(crate) fn primitive(sum: &Expr) -> (Rational, Expr) {
    let terms = match sum.node() {
        Node::Add(ts) => ts,
        _ => return (Rational::one(), sum.clone()),
    };
    let c = terms[0].split_coefficient().0.abs();
    if c.is_one() {
        return (c, sum.clone());
    }
    let scaled = terms
        .iter()
        .map(|t| {
            let (k, m) = t.split_coefficient();
            make_term(k / c, &m)
        })
        .collect();
    (c, Expr::normal(Node::Add(scaled)))
}

/// Splits an exponent into its non-numeric part and its rational constant.
pub(crate) fn split_exponent(e: &Expr) -> (Expr, Rational) {
    match e.node() {
        Node::Num(q) => (Expr::zero(), *q),
        Node::Add(ts) => match ts[0].as_rational() {
            Some(q) => {
                let rest = &ts[1..];
                let sym = if rest.len() == 1 {
                    rest[0].clone()
                } else {
                    Expr::normal(Node::Add(rest.to_vec()))
                };
                (sym, q)
            }
            None => (e.clone(), Rational::zero()),
        },
        _ => (e.clone(), Rational::zero()),
    }
}

pub(crate) fn checked_pow(c: &Rational, n: i128) -> Option<Rational> {
    if n < 0 {
        if c.is_zero() {
            return None;
        }
        return checked_pow(&c.recip(), -n);
    }
    if n > 256 {
        return None;
    }
    let mut num: i128 = 1;
    let mut den: i128 = 1;
    for _ in 0..n {
        num = num.checked_mul(*c.numer())?;
        den = den.checked_mul(*c.denom())?;
    }
    Some(Rational::new(num, den))
}

fn int_root(v: i128, q: u32) -> Option<i128> {
    if v < 0 {
        return None;
    }
    let est = (v as f64).powf(1.0 / q as f64).round() as i128;
    for cand in [est - 1, est, est + 1] {
        if cand < 0 {
            continue;
        }
        if cand.checked_pow(q) == Some(v) {
            return Some(cand);
        }
    }
    None
}

/// `c^total` as (rational multiplier, optional residual atom).
fn numeric_power(c: Rational, base: &Expr, total: &Expr) -> (Rational, Option<Expr>) {
    let keep = || {
        (
            Rational::one(),
            Some(Expr::normal(Node::Pow(base.clone(), total.clone()))),
        )
    };
    let Some(r) = total.as_rational() else {
        return keep();
    };
    if r.is_integer() {
        return match checked_pow(&c, r.to_integer()) {
            Some(v) => (v, None),
            None => keep(),
        };
    }
    if c.is_negative() {
        return keep();
    }
    let fl = r.floor().to_integer();
    let frac = r - Rational::from_integer(fl);
    let Some(mult) = checked_pow(&c, fl) else {
        return keep();
    };
    let (p, q) = (*frac.numer(), *frac.denom());
    if let (Some(cp), Some(qq)) = (checked_pow(&c, p), q.to_u32()) {
        if let (Some(rn), Some(rd)) = (int_root(*cp.numer(), qq), int_root(*cp.denom(), qq)) {
            return (mult * Rational::new(rn, rd), None);
        }
    }
    (
        mult,
        Some(Expr::normal(Node::Pow(base.clone(), Expr::rational(frac)))),
    )
}

#[derive(Default)]
struct MulBuilder {
    coeff: Option<Rational>,
    bases: BTreeMap<Expr, Vec<Expr>>,
    exp_args: Vec<Expr>,
    opaque: Vec<Expr>,
}

impl MulBuilder {
    fn scale(&mut self, q: &Rational) {
        let c = self.coeff.get_or_insert_with(Rational::one);
        *c *= *q;
    }

    fn push(&mut self, f: &Expr) {
        match f.node() {
            Node::Num(q) => self.scale(q),
            Node::Mul(fs) => fs.iter().for_each(|x| self.push(x)),
            Node::Add(_) => self.push_pow(f, &Expr::one()),
            Node::Pow(b, e) => self.push_pow(b, e),
            Node::Func(Func::Exp, a) => self.exp_args.push(a.clone()),
            _ => self.bases.entry(f.clone()).or_default().push(Expr::one()),
        }
    }

    fn push_pow(&mut self, b: &Expr, e: &Expr) {
        if e.is_zero_literal() {
            return;
        }
        match b.node() {
            Node::Num(q) => {
                if q.is_one() {
                    return;
                }
                if q.is_zero() {
                    if e.as_rational().is_some_and(|r| r.is_positive()) {
                        self.coeff = Some(Rational::zero());
                    } else {
                        self.opaque.push(Expr::normal(Node::Pow(b.clone(), e.clone())));
                    }
                    return;
                }
                if e.is_one_literal() {
                    self.scale(q);
                    return;
                }
                self.bases.entry(b.clone()).or_default().push(e.clone());
            }
            Node::Add(_) => {
                let (c, p) = primitive(b);
                if !c.is_one() {
                    self.push_pow(&Expr::rational(c), e);
                }
                self.bases.entry(p).or_default().push(e.clone());
            }
            Node::Mul(fs) => fs.iter().for_each(|x| self.push_pow(x, e)),
            Node::Pow(b0, e0) => {
                let ne = normalize(&Expr::mul_raw(vec![e0.clone(), e.clone()]));
                self.push_pow(b0, &ne);
            }
            Node::Func(Func::Exp, a) => {
                let na = normalize(&Expr::mul_raw(vec![a.clone(), e.clone()]));
                self.exp_args.push(na);
            }
            _ => self.bases.entry(b.clone()).or_default().push(e.clone()),
        }
    }

    fn finish(mut self) -> Expr {
        // exp(r*ln(b)) with rational r becomes b^r.
        let mut exp_args = Vec::new();
        if !self.exp_args.is_empty() {
            let a = add_norm(std::mem::take(&mut self.exp_args).into_iter());
            for term in a.terms() {
                let (c, mono) = term.split_coefficient();
                match mono.node() {
                    Node::Func(Func::Ln, b) => self.push_pow(b, &Expr::rational(c)),
                    _ => exp_args.push(term),
                }
            }
        }
        let mut coeff = self.coeff.unwrap_or_else(Rational::one);
        if coeff.is_zero() {
            return Expr::zero();
        }
        let mut atoms = self.opaque;
        let mut distribute: Vec<(Expr, i128)> = Vec::new();
        for (base, exps) in self.bases {
            let total = if exps.len() == 1 {
                exps.into_iter().next().unwrap()
            } else {
                add_norm(exps.into_iter())
            };
            if total.is_zero_literal() {
                continue;
            }
            match base.node() {
                Node::Num(c) => {
                    let (m, atom) = numeric_power(*c, &base, &total);
                    coeff *= m;
                    atoms.extend(atom);
                }
                Node::Sym(s) if s.is_eps() => match total.as_integer() {
                    Some(i) => {
                        if i.rem_euclid(2) == 1 {
                            atoms.push(base.clone());
                        }
                    }
                    None => atoms.push(Expr::normal(Node::Pow(base.clone(), total))),
                },
                Node::Add(_) => {
                    let (_, c) = split_exponent(&total);
                    let q = c.floor().to_integer();
                    if (1..=EXPAND_CAP).contains(&q) {
                        distribute.push((base.clone(), q));
                        let rest = add_norm([total, Expr::int(-q)].into_iter());
                        if !rest.is_zero_literal() {
                            atoms.push(Expr::normal(Node::Pow(base.clone(), rest)));
                        }
                    } else {
                        atoms.push(Expr::normal(Node::Pow(base.clone(), total)));
                    }
                }
                _ => {
                    if total.is_one_literal() {
                        atoms.push(base.clone());
                    } else {
                        atoms.push(Expr::normal(Node::Pow(base.clone(), total)));
                    }
                }
            }
        }
        if !exp_args.is_empty() {
            let a = add_norm(exp_args.into_iter());
            if !a.is_zero_literal() {
                atoms.push(Expr::normal(Node::Func(Func::Exp, a)));
            }
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
        atoms.sort();
        let mono = make_product(coeff, atoms);
        if distribute.is_empty() {
            return mono;
        }
        // A sum that also appears as a power base inside the terms of another
        // expanded sum is multiplied into those terms afterwards, so that it
        // can merge with its reciprocal instead of being expanded blindly.
        let (mut deferred, mut expand): (Vec<_>, Vec<_>) =
            distribute.iter().cloned().partition(|(p, _)| {
                distribute
                    .iter()
                    .any(|(o, _)| o != p && has_power_of(o, p))
            });
        if expand.is_empty() {
            expand.push(deferred.remove(0));
        }
        let mut terms = vec![mono];
        for (p, q) in expand {
            let pts = p.terms();
            for _ in 0..q {
                let mut next = Vec::with_capacity(terms.len() * pts.len());
                for t in &terms {
                    for s in &pts {
                        let mut mb = MulBuilder::default();
                        mb.push(t);
                        mb.push(s);
                        next.push(mb.finish());
                    }
                }
                terms = next;
            }
        }
        if !deferred.is_empty() {
            terms = terms
                .iter()
                .map(|t| {
                    let mut mb = MulBuilder::default();
                    mb.push(t);
                    for (p, q) in &deferred {
                        mb.push_pow(p, &Expr::int(*q));
                    }
                    mb.finish()
                })
                .collect();
        }
        add_norm(terms.into_iter())
    }
}

fn has_power_of(sum: &Expr, base: &Expr) -> bool {
    sum.terms().iter().any(|t| {
        t.factors()
            .iter()
            .any(|f| matches!(f.node(), Node::Pow(b, _) if b == base))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::parse;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn cancels_commuted_products() {
        assert!((p("u_x*u") - p("u*u_x")).is_zero_literal());
    }

    #[test]
    fn eps_squared_is_one() {
        assert_eq!(p("eps*eps*u"), Expr::u());
        assert_eq!(p("eps^3"), Expr::eps());
        assert_eq!(p("eps^(-1)"), Expr::eps());
    }

    #[test]
    fn merges_symbolic_exponents() {
        assert_eq!(p("u^(n-1)*u^2"), p("u^(n+1)"));
        assert_eq!(p("u^(n-1)*u^2").to_string(), "u^(1 + n)");
    }

    #[test]
    fn expands_integer_powers_of_sums() {
        assert_eq!(p("(t+1)^2"), p("t^2 + 2*t + 1"));
        assert_eq!(p("(n-1)*(n-2)"), p("n^2 - 3*n + 2"));
    }

    #[test]
    fn sum_factor_merges_with_its_reciprocal() {
        assert_eq!(p("(k+1)*(k+1)^(-1)"), Expr::one());
        assert_eq!(p("(2*k+2)/(k+1)"), Expr::int(2));
        assert_eq!(p("(t^2+1)*(t^2+1)^(-1/2)"), p("(t^2+1)^(1/2)"));
    }

    #[test]
    fn fractional_power_of_sum_splits_integer_part() {
        assert_eq!(p("(t+1)^(3/2)"), p("t*(t+1)^(1/2) + (t+1)^(1/2)"));
    }

    #[test]
    fn numeric_powers_are_exact_when_possible() {
        assert_eq!(p("4^(1/2)"), Expr::int(2));
        assert_eq!(p("(1/8)^(2/3)"), Expr::frac(1, 4));
        assert_eq!(p("2^(1/2)*2^(1/2)"), Expr::int(2));
        assert_eq!(p("2^(3/2)"), p("2*2^(1/2)"));
    }

    #[test]
    fn exponentials_combine() {
        assert_eq!(p("exp(x)*exp(-x)"), Expr::one());
        assert_eq!(p("exp(x)^2"), p("exp(2*x)"));
        assert_eq!(p("ln(exp(t))"), Expr::t());
        assert_eq!(p("ln(t^k)"), p("k*ln(t)"));
    }

    #[test]
    fn content_is_pulled_out_of_sum_bases() {
        assert_eq!(p("(2*t+2)^(-1)"), p("(1/2)*(t+1)^(-1)"));
    }
}
