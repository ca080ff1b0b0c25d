//! Zero recognition.
//!
//! Three tiers, cheapest first:
//! 1. the canonical form is the literal `0`;
//! 2. the canonical form becomes `0` after multiplying through by powers of
//!    the sum bases that appear with negative or fractional exponents (the
//!    multiplier is generically nonzero, so the answer is still exact);
//! 3. randomized evaluation at a fixed-seed sample of points.

use std::collections::BTreeMap;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::eval::{eval_numeric, Point};
use super::expr::{Expr, Func, Node, Rational, Symbol};
use super::normalize::{normalize, split_exponent};
use super::KernelError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroTest {
    SymbolicZero,
    NumericZero,
    NonZero,
}

impl ZeroTest {
    pub fn is_zero(self) -> bool {
        self != ZeroTest::NonZero
    }
}

#[derive(Clone, Debug)]
pub struct ZeroConfig {
    pub samples: usize,
    pub rel_tol: f64,
    pub seed: u64,
    pub lo: f64,
    pub hi: f64,
    pub resamples: usize,
}

impl Default for ZeroConfig {
    fn default() -> Self {
        ZeroConfig {
            samples: 16,
            rel_tol: 1e-9,
            seed: 0x6b6d_6e73,
            lo: 0.5,
            hi: 2.0,
            resamples: 8,
        }
    }
}

pub fn is_zero(e: &Expr) -> Result<ZeroTest, KernelError> {
    is_zero_with(e, &ZeroConfig::default())
}

pub fn is_zero_with(e: &Expr, cfg: &ZeroConfig) -> Result<ZeroTest, KernelError> {
    let e = normalize(e);
    if e.is_zero_literal() {
        return Ok(ZeroTest::SymbolicZero);
    }
    if clear_denominators(&e).is_zero_literal() {
        return Ok(ZeroTest::SymbolicZero);
    }
    if e.terms().len() == 1 && nonvanishing_product(&e, cfg)? {
        return Ok(ZeroTest::NonZero);
    }
    numeric_zero(&e, cfg)
}

/// A product vanishes identically only through a factor that does; symbols,
/// `exp` and functions of non-constant arguments never do. Settles terms
/// whose samples underflow.
fn nonvanishing_product(term: &Expr, cfg: &ZeroConfig) -> Result<bool, KernelError> {
    for f in term.factors() {
        let base = match f.node() {
            Node::Pow(b, _) => b.clone(),
            _ => f.clone(),
        };
        let ok = match base.node() {
            Node::Num(q) => !q.is_zero(),
            Node::Sym(_) => true,
            Node::Func(Func::Exp, _) => true,
            Node::Func(_, arg) => !arg.is_constant(),
            Node::Add(_) => !is_zero_with(&base, cfg)?.is_zero(),
            Node::Mul(_) | Node::Pow(..) => false,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Multiplies by `P^(-lowest exponent)` for every sum base `P` whose
/// occurrences share one symbolic exponent part, repeating while that changes
/// the expression.
pub fn clear_denominators(e: &Expr) -> Expr {
    let mut cur = normalize(e);
    for _ in 0..4 {
        let mut lowest: BTreeMap<Expr, Option<(Expr, Rational)>> = BTreeMap::new();
        collect_sum_powers(&cur, &mut lowest);
        let mut factors = Vec::new();
        for (base, info) in lowest {
            if let Some((sym, c)) = info {
                if c < Rational::zero() || !sym.is_zero_literal() || !c.is_integer() {
                    let exp = normalize(&Expr::add_raw(vec![sym, Expr::rational(c)]));
                    factors.push(Expr::pow_raw(base, Expr::mul_raw(vec![Expr::int(-1), exp])));
                }
            }
        }
        if factors.is_empty() {
            break;
        }
        factors.push(cur.clone());
        let next = normalize(&Expr::mul_raw(factors));
        if next == cur {
            break;
        }
        cur = next;
        if cur.is_zero_literal() {
            break;
        }
    }
    cur
}

fn collect_sum_powers(e: &Expr, out: &mut BTreeMap<Expr, Option<(Expr, Rational)>>) {
    for term in e.terms() {
        for f in term.factors() {
            if let Node::Pow(b, x) = f.node() {
                if matches!(b.node(), Node::Add(_)) {
                    let (sym, c) = split_exponent(x);
                    let slot = out.entry(b.clone()).or_insert(Some((sym.clone(), c)));
                    if let Some((s0, c0)) = slot {
                        if *s0 != sym {
                            *slot = None;
                        } else if c < *c0 {
                            *c0 = c;
                        }
                    }
                }
            }
        }
    }
}

fn numeric_zero(e: &Expr, cfg: &ZeroConfig) -> Result<ZeroTest, KernelError> {
    let symbols: Vec<Symbol> = e.free_symbols().into_iter().collect();
    let terms = e.terms();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.samples {
        let mut attempt = 0;
        loop {
            let pt = sample_point(&symbols, cfg, &mut rng);
            match eval_terms(&terms, &pt) {
                Ok((sum, scale)) => {
                    if sum.abs() > cfg.rel_tol * scale {
                        return Ok(ZeroTest::NonZero);
                    }
                    break;
                }
                Err(KernelError::Domain(_)) if attempt < cfg.resamples => attempt += 1,
                Err(KernelError::Domain(msg)) => {
                    return Err(KernelError::EvalDomain(format!("{msg} while testing {e}")))
                }
                Err(other) => return Err(other),
            }
        }
    }
    Ok(ZeroTest::NumericZero)
}

pub(crate) fn sample_point(symbols: &[Symbol], cfg: &ZeroConfig, rng: &mut ChaCha8Rng) -> Point {
    symbols
        .iter()
        .map(|s| {
            let v = if s.is_eps() {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            } else {
                rng.gen_range(cfg.lo..cfg.hi)
            };
            (s.clone(), v)
        })
        .collect()
}

/// Sum and largest magnitude of the terms, with all terms rescaled by one
/// positive factor: exponential factors are kept in log space and shifted by
/// the largest exponent, so terms that would all underflow stay comparable.
fn eval_terms(terms: &[Expr], pt: &Point) -> Result<(f64, f64), KernelError> {
    let mut parts = Vec::with_capacity(terms.len());
    for t in terms {
        let mut log = 0.0;
        let mut rest = Vec::new();
        for f in t.factors() {
            match f.node() {
                Node::Func(Func::Exp, arg) => log += eval_numeric(arg, pt)?,
                Node::Pow(b, p) if matches!(b.node(), Node::Func(Func::Exp, _)) => {
                    let Node::Func(_, arg) = b.node() else { unreachable!() };
                    log += eval_numeric(p, pt)? * eval_numeric(arg, pt)?;
                }
                _ => rest.push(f),
            }
        }
        parts.push((eval_numeric(&Expr::product(rest), pt)?, log));
    }
    let shift = parts
        .iter()
        .filter(|(v, _)| *v != 0.0)
        .map(|(_, l)| *l)
        .fold(f64::NEG_INFINITY, f64::max);
    let shift = if shift.is_finite() { shift } else { 0.0 };
    let mut sum = 0.0;
    let mut scale: f64 = 0.0;
    for (v, l) in parts {
        let v = v * (l - shift).exp();
        sum += v;
        scale = scale.max(v.abs());
    }
    Ok((sum, scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::parse;

    fn z(s: &str) -> ZeroTest {
        is_zero(&parse(s).unwrap()).unwrap()
    }

    #[test]
    fn tiers() {
        assert_eq!(z("u*u_x - u_x*u"), ZeroTest::SymbolicZero);
        assert_eq!(z("t/(t+1) + 1/(t+1) - 1"), ZeroTest::SymbolicZero);
        assert_eq!(
            z("(t^2+1)^(1/2) - t^2*(t^2+1)^(-1/2) - (t^2+1)^(-1/2)"),
            ZeroTest::SymbolicZero
        );
        assert_eq!(z("sin(x)^2 + cos(x)^2 - 1"), ZeroTest::NumericZero);
        assert_eq!(z("sin(x)^2 - cos(x)^2"), ZeroTest::NonZero);
    }

    #[test]
    fn eps_is_a_sign() {
        assert_eq!(z("eps^2 - 1"), ZeroTest::SymbolicZero);
        assert_eq!(z("(eps*x)^2 - x^2"), ZeroTest::SymbolicZero);
        assert_eq!(z("eps - 1"), ZeroTest::NonZero);
    }

    #[test]
    fn domain_failures_are_reported() {
        let e = parse("ln(-1 - t^2) + x").unwrap();
        assert!(matches!(is_zero(&e), Err(KernelError::EvalDomain(_))));
    }
}
