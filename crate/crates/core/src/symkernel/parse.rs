//! Infix expression grammar.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := atom ("^" unary)?
//! atom    := number | name | func "(" expr ")" | "(" expr ")"
//! number  := digits ("." digits)?
//! name    := t | x | u | u_[tx]+ | f | f'... | f_t... | F | phi'... | omega | parameter
//! func    := exp | ln | log | sin | cos | arctan | atan | sqrt
//! ```
//!
//! Decimal literals are read as exact rationals. Parameters must be declared;
//! [`Grammar::default`] declares the names used by the K(m,n) tooling.

use std::collections::BTreeSet;

use super::expr::{Expr, Func, Rational, Symbol, MAX_JET_ORDER};
use super::normalize::normalize;
use super::KernelError;

const DEFAULT_PARAMS: &[&str] = &[
    "m", "n", "k", "eps", "sigma", "a", "b", "c", "beta", "gamma", "gammaAmp", "delta", "delta0",
    "delta1", "delta2", "delta3", "alpha", "kappa", "mu0", "mu1", "lambda", "c0", "c1", "c2", "s",
];

#[derive(Clone, Debug)]
pub struct Grammar {
    params: BTreeSet<String>,
}

impl Default for Grammar {
    fn default() -> Self {
        Grammar {
            params: DEFAULT_PARAMS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl Grammar {
    pub fn with_params<'a>(mut self, names: impl IntoIterator<Item = &'a str>) -> Self {
        self.params.extend(names.into_iter().map(str::to_string));
        self
    }

    pub fn declares(&self, name: &str) -> bool {
        self.params.contains(name)
    }

    /// Parses without normalizing.
    pub fn parse_raw(&self, text: &str) -> Result<Expr, KernelError> {
        let mut p = Parser {
            src: text,
            pos: 0,
            grammar: self,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < text.len() {
            return Err(p.unexpected());
        }
        Ok(e)
    }

    pub fn parse(&self, text: &str) -> Result<Expr, KernelError> {
        Ok(normalize(&self.parse_raw(text)?))
    }
}

/// Parses and normalizes `text` with the default parameter set.
pub fn parse(text: &str) -> Result<Expr, KernelError> {
    Grammar::default().parse(text)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    grammar: &'a Grammar,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err(&self, offset: usize, message: impl Into<String>) -> KernelError {
        KernelError::Syntax {
            offset,
            message: message.into(),
        }
    }

    fn unexpected(&self) -> KernelError {
        match self.peek() {
            Some(c) => self.err(self.pos, format!("unexpected `{c}`")),
            None => self.err(self.pos, "unexpected end of input"),
        }
    }

    fn expr(&mut self) -> Result<Expr, KernelError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                let t = self.term()?;
                terms.push(Expr::mul_raw(vec![Expr::int(-1), t]));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::add_raw(terms)
        })
    }

    fn term(&mut self) -> Result<Expr, KernelError> {
        let mut factors = vec![self.unary()?];
        loop {
            if self.eat('*') {
                factors.push(self.unary()?);
            } else if self.eat('/') {
                let d = self.unary()?;
                factors.push(Expr::pow_raw(d, Expr::int(-1)));
            } else {
                break;
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::mul_raw(factors)
        })
    }

    fn unary(&mut self) -> Result<Expr, KernelError> {
        if self.eat('-') {
            let inner = self.unary()?;
            return Ok(Expr::mul_raw(vec![Expr::int(-1), inner]));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, KernelError> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr::pow_raw(base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, KernelError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err(self.pos, "expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(start),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.name(start),
            _ => Err(self.unexpected()),
        }
    }

    fn number(&mut self, start: usize) -> Result<Expr, KernelError> {
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() && bytes[end].is_ascii_digit() {
            end += 1;
        }
        let int_part = &self.src[start..end];
        let mut frac_part = "";
        if end < bytes.len() && bytes[end] == b'.' {
            let fs = end + 1;
            end = fs;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
            frac_part = &self.src[fs..end];
        }
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(self.err(start, "malformed number"));
        }
        self.pos = end;
        let digits = format!("{int_part}{frac_part}");
        let num: i128 = digits
            .parse()
            .map_err(|_| self.err(start, "number literal too large"))?;
        let den = 10i128
            .checked_pow(frac_part.len() as u32)
            .ok_or_else(|| self.err(start, "number literal too long"))?;
        Ok(Expr::rational(Rational::new(num, den)))
    }

    fn name(&mut self, start: usize) -> Result<Expr, KernelError> {
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
            end += 1;
        }
        let ident = &self.src[start..end];
        let mut primes = 0u32;
        while end < bytes.len() && bytes[end] == b'\'' {
            primes += 1;
            end += 1;
        }
        self.pos = end;

        if let Some(func) = Func::from_name(ident) {
            if primes > 0 {
                return Err(self.err(start, format!("`{ident}` cannot carry primes")));
            }
            if !self.eat('(') {
                return Err(self.err(self.pos, format!("expected `(` after `{ident}`")));
            }
            let arg = self.expr()?;
            if !self.eat(')') {
                return Err(self.err(self.pos, "expected `)`"));
            }
            return Ok(Expr::func_raw(func, arg));
        }

        let sym = match (ident, primes) {
            ("f", r) => Symbol::FDeriv(r),
            ("phi", r) => Symbol::Phi(r as u8),
            (_, 0) => self.plain_symbol(ident, start)?,
            _ => return Err(self.err(start, format!("`{ident}` cannot carry primes"))),
        };
        Ok(Expr::sym(sym))
    }

    fn plain_symbol(&self, ident: &str, start: usize) -> Result<Symbol, KernelError> {
        Ok(match ident {
            "t" => Symbol::T,
            "x" => Symbol::X,
            "u" => Symbol::u(),
            "F" => Symbol::FInt,
            "omega" => Symbol::Omega,
            _ => {
                if let Some(idx) = ident.strip_prefix("u_") {
                    return self.jet(idx, start);
                }
                if let Some(idx) = ident.strip_prefix("f_") {
                    if !idx.is_empty() && idx.chars().all(|c| c == 't') {
                        return Ok(Symbol::FDeriv(idx.len() as u32));
                    }
                    return Err(self.err(start, format!("`{ident}`: f depends on t only")));
                }
                if self.grammar.declares(ident) {
                    Symbol::param(ident)
                } else {
                    return Err(KernelError::UnknownSymbol {
                        name: ident.to_string(),
                        offset: start,
                    });
                }
            }
        })
    }

    fn jet(&self, idx: &str, start: usize) -> Result<Symbol, KernelError> {
        if idx.is_empty() || !idx.chars().all(|c| c == 't' || c == 'x') {
            return Err(self.err(start, format!("malformed jet variable `u_{idx}`")));
        }
        let t = idx.chars().filter(|&c| c == 't').count();
        let x = idx.len() - t;
        if idx.len() > MAX_JET_ORDER as usize {
            return Err(self.err(
                start,
                format!("jet variable `u_{idx}` exceeds order {MAX_JET_ORDER}"),
            ));
        }
        Ok(Symbol::Jet {
            t: t as u8,
            x: x as u8,
        })
    }
}

impl std::str::FromStr for Expr {
    type Err = KernelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::expr::Node;

    #[test]
    fn power_of_symbol() {
        let e = parse("u^m").unwrap();
        assert_eq!(e, Expr::pow_raw(Expr::u(), Expr::param("m")).pipe_norm());
        assert!(matches!(e.node(), Node::Pow(_, _)));
    }

    #[test]
    fn rejects_derivative_of_expression() {
        let err = parse("u_t + eps*(u^2)_x").unwrap_err();
        match err {
            KernelError::Syntax { offset, .. } => assert_eq!(offset, 15),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("u_t + 2*eps*u*u_x").is_ok());
    }

    #[test]
    fn reduced_ode_is_a_two_term_sum() {
        let e = parse("3*phi''' + 6*eps*phi*phi'").unwrap();
        assert_eq!(e.terms().len(), 2);
        assert!(e.contains(&Symbol::Phi(3)));
    }

    #[test]
    fn unknown_symbol_reports_offset() {
        let err = parse("u + zeta").unwrap_err();
        assert_eq!(
            err,
            KernelError::UnknownSymbol {
                name: "zeta".into(),
                offset: 4
            }
        );
        assert!(Grammar::default().with_params(["zeta"]).parse("u + zeta").is_ok());
    }

    #[test]
    fn jet_indices_are_canonical() {
        assert_eq!(parse("u_tx").unwrap(), parse("u_xt").unwrap());
        assert!(parse("u_xxxxx").is_err());
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse("0.5").unwrap(), Expr::frac(1, 2));
        assert_eq!(parse("1.25*u").unwrap(), parse("5/4*u").unwrap());
    }

    #[test]
    fn f_notations_agree() {
        assert_eq!(parse("f''").unwrap(), parse("f_tt").unwrap());
    }

    #[test]
    fn malformed_inputs() {
        for bad in ["", "u +", "(u", "sin u", "u ** 2", "3 u", "x'"] {
            assert!(parse(bad).is_err(), "{bad:?} should fail");
        }
    }

    trait PipeNorm {
        fn pipe_norm(self) -> Expr;
    }
    impl PipeNorm for Expr {
        fn pipe_norm(self) -> Expr {
            normalize(&self)
        }
    }
}
