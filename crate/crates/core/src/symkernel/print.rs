//! Infix printing. The output is accepted by the parser and normalizes back to
//! the printed expression.

use std::fmt;

use num_traits::{One, Signed};

use super::expr::{Expr, Node, Rational};

const SUM: u8 = 1;
const PROD: u8 = 2;
const UNARY: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(self, f, SUM)
    }
}

fn num_prec(q: &Rational) -> u8 {
    match (q.is_integer(), q.is_negative()) {
        (true, false) => ATOM,
        (_, true) => UNARY,
        (false, false) => PROD,
    }
}

/// Leading rational coefficient of a product, if any.
fn leading_coeff(fs: &[Expr]) -> Option<Rational> {
    fs.first().and_then(Expr::as_rational)
}

fn prec(e: &Expr) -> u8 {
    match e.node() {
        Node::Num(q) => num_prec(q),
        Node::Sym(_) | Node::Func(..) => ATOM,
        Node::Pow(..) => POW,
        Node::Mul(fs) => match leading_coeff(fs) {
            Some(c) if c.is_negative() => UNARY,
            _ => PROD,
        },
        Node::Add(ts) if ts.len() <= 1 => ts.first().map_or(ATOM, prec),
        Node::Add(_) => SUM,
    }
}

fn write_prec(e: &Expr, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
    // Negative products and numbers start with '-', which also needs
    // parentheses where a product is otherwise fine (e.g. after '*').
    if prec(e) < min {
        f.write_str("(")?;
        write_node(e, f)?;
        return f.write_str(")");
    }
    write_node(e, f)
}

fn write_node(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e.node() {
        Node::Num(q) => write!(f, "{q}"),
        Node::Sym(s) => write!(f, "{s}"),
        Node::Func(func, a) => {
            write!(f, "{}(", func.name())?;
            write_prec(a, f, SUM)?;
            f.write_str(")")
        }
        Node::Pow(b, x) => {
            write_prec(b, f, ATOM)?;
            f.write_str("^")?;
            write_prec(x, f, ATOM)
        }
        Node::Mul(fs) => write_product(fs, f),
        Node::Add(ts) => {
            if ts.is_empty() {
                return f.write_str("0");
            }
            write_prec(&ts[0], f, SUM)?;
            for t in &ts[1..] {
                match negated(t) {
                    Some(pos) => {
                        f.write_str(" - ")?;
                        write_prec(&pos, f, PROD)?;
                    }
                    None => {
                        f.write_str(" + ")?;
                        write_prec(t, f, PROD)?;
                    }
                }
            }
            Ok(())
        }
    }
}

fn write_product(fs: &[Expr], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mut rest = fs;
    if let Some(c) = leading_coeff(fs) {
        rest = &fs[1..];
        if rest.is_empty() {
            return write!(f, "{c}");
        }
        if c == -Rational::one() {
            f.write_str("-")?;
        } else if !c.is_one() {
            write!(f, "{c}*")?;
        }
    }
    // Parameters read better in front of the variables.
    let (mut ordered, vars): (Vec<&Expr>, Vec<&Expr>) = rest.iter().partition(|x| x.is_constant());
    ordered.extend(vars);
    for (i, x) in ordered.into_iter().enumerate() {
        if i > 0 {
            f.write_str("*")?;
        }
        write_prec(x, f, POW)?;
    }
    Ok(())
}

/// For a term with a negative leading coefficient, the same term with the sign flipped.
fn negated(t: &Expr) -> Option<Expr> {
    match t.node() {
        Node::Num(q) if q.is_negative() => Some(Expr::rational(-q)),
        Node::Mul(fs) => {
            let c = leading_coeff(fs)?;
            if !c.is_negative() {
                return None;
            }
            let mut out = fs.to_vec();
            if c == -Rational::one() {
                out.remove(0);
            } else {
                out[0] = Expr::rational(-c);
            }
            Some(if out.len() == 1 {
                out.pop().unwrap()
            } else {
                Expr::raw(Node::Mul(out))
            })
        }
        _ => None,
    }
}
