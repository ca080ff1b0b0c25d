//! Equivalence transformations of the class and the auxiliary class maps.

use std::sync::Arc;

use num_traits::{Signed, Zero};

use super::fspec::{integrate_t, sign_of, split_constant};
use super::{EquationSpec, FSpec};
use crate::error::{Error, Result};
use crate::symkernel::{
    differentiate, is_zero, normalize, replace, Compiled, Expr, Func, Node, Rational, Symbol,
};

/// A point transformation from one of the equivalence families.
///
/// Sign choices `s` are explicit (+1 or -1); `time` is `T(t)` as an
/// expression in `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquivTransform {
    /// Usual group for fixed `(m, n)`:
    /// `t~ = s*d1*d3^(1-m)*t + d0`, `x~ = d1*x + d2`, `u~ = d3*u`,
    /// `f~ = s*d1^2*d3^(m-n)*f`, `eps~ = s*eps`.
    G { m: Expr, n: Expr, s: i8, d0: Expr, d1: Expr, d2: Expr, d3: Expr },
    /// `m = 0`: `t~ = T(t)`, `x~ = d1*x + d2`, `u~ = d3*u`,
    /// `f~ = d1^3*d3^(1-n)*f/T_t`.
    GN0 { n: Expr, time: Expr, d1: Expr, d2: Expr, d3: Expr },
    /// `m = 1`: as `GN0` but `x~ = d1*(x - eps*t) + s*eps*T(t) + d2` and
    /// `eps~ = s*eps`.
    GN1 { n: Expr, s: i8, time: Expr, d1: Expr, d2: Expr, d3: Expr },
    /// `n = 1, m = 2`: `t~ = (alpha*t + beta)/(gamma*t + delta)`,
    /// `x~ = (kappa*x + mu1*t + mu0)/(gamma*t + delta)`,
    /// `u~ = s*(2*eps*kappa*(gamma*t + delta)*u - kappa*gamma*x + mu1*delta - mu0*gamma)/(2*eps*det)`,
    /// `f~ = kappa^3/det * f/(gamma*t + delta)`, `eps~ = s*eps`.
    G12 {
        s: i8,
        alpha: Expr,
        beta: Expr,
        gamma: Expr,
        delta: Expr,
        kappa: Expr,
        mu0: Expr,
        mu1: Expr,
    },
    /// `x~ = x - eps*t` taking `m = 1` to `m = 0`; the inverse goes back.
    M1toM0 { inverse: bool },
    /// From `u_t + g(t)*(u^m)_x + f*(u^n)_xxx = 0`: `t~ = eps*G(t)` with
    /// `G' = g`, `f~ = eps*f/g`.
    GClassMap { g: Expr, g_int: Expr, eps: i8 },
    /// Steps applied first to last; the empty chain is the identity.
    Chain(Vec<EquivTransform>),
}

/// Images of `(t, x, u)` as expressions in the source variables.
#[derive(Clone, Debug, PartialEq)]
pub struct PointMap {
    pub t: Expr,
    pub x: Expr,
    pub u: Expr,
}

pub type Solution = Arc<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>;

fn equal(a: &Expr, b: &Expr) -> bool {
    is_zero(&(a - b)).map(|z| z.is_zero()).unwrap_or(false)
}

fn nonzero(e: &Expr) -> bool {
    is_zero(e).map(|z| !z.is_zero()).unwrap_or(false)
}

fn sign(s: i8) -> Expr {
    Expr::int(s as i128)
}

fn check_sign(s: i8) -> Result<()> {
    if s == 1 || s == -1 {
        Ok(())
    } else {
        Err(Error::NonInvertibleParameterization(format!("sign must be +1 or -1, got {s}")))
    }
}

fn mismatch(family: &str, reason: impl Into<String>) -> Error {
    Error::FamilyMismatch {
        family: family.into(),
        reason: reason.into(),
    }
}

fn with_t(e: &Expr, t: &Expr) -> Expr {
    replace(e, &|s| (*s == Symbol::T).then(|| t.clone()))
}

impl EquivTransform {
    pub fn identity() -> EquivTransform {
        EquivTransform::Chain(Vec::new())
    }

    /// Builds the `GClassMap` for a given `g`, integrating it in closed form.
    pub fn g_class(g: &Expr, eps: i8) -> Result<EquivTransform> {
        check_sign(eps)?;
        let g_int = integrate_t(g)
            .ok_or_else(|| Error::Unsupported(format!("no closed-form antiderivative of g = {g}")))?;
        Ok(EquivTransform::GClassMap {
            g: normalize(g),
            g_int,
            eps,
        })
    }

    pub fn family(&self) -> &'static str {
        match self {
            EquivTransform::G { .. } => "G",
            EquivTransform::GN0 { .. } => "G_n0",
            EquivTransform::GN1 { .. } => "G_n1",
            EquivTransform::G12 { .. } => "G_12",
            EquivTransform::M1toM0 { .. } => "M1toM0",
            EquivTransform::GClassMap { .. } => "GClassMap",
            EquivTransform::Chain(_) => "Chain",
        }
    }

    /// Non-degeneracy of the parameters.
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::NonInvertibleParameterization(what.into()));
        match self {
            EquivTransform::G { s, d1, d3, .. } => {
                check_sign(*s)?;
                if !nonzero(&(d1 * d3)) {
                    return bad("d1*d3 = 0");
                }
            }
            EquivTransform::GN0 { time, d1, d3, .. } | EquivTransform::GN1 { time, d1, d3, .. } => {
                if let EquivTransform::GN1 { s, .. } = self {
                    check_sign(*s)?;
                }
                if !nonzero(&(d1 * d3)) {
                    return bad("d1*d3 = 0");
                }
                if time.any_symbol(&|s| *s != Symbol::T && !matches!(s, Symbol::Param(_))) {
                    return bad("T must depend on t only");
                }
                if !nonzero(&differentiate(time, &Symbol::T)) {
                    return bad("T_t = 0");
                }
            }
            EquivTransform::G12 { s, alpha, beta, gamma, delta, kappa, .. } => {
                check_sign(*s)?;
                if !nonzero(&(kappa * (alpha * delta - beta * gamma))) {
                    return bad("kappa*(alpha*delta - beta*gamma) = 0");
                }
            }
            EquivTransform::M1toM0 { .. } => {}
            EquivTransform::GClassMap { g, eps, .. } => {
                check_sign(*eps)?;
                if !nonzero(g) {
                    return bad("g = 0");
                }
            }
            EquivTransform::Chain(steps) => steps.iter().try_for_each(|s| s.validate())?,
        }
        Ok(())
    }

    /// Forward map of `(t, x, u)` for a source equation with sign `eps`.
    pub fn point_map(&self, eps: &Expr) -> Result<PointMap> {
        let (t, x, u) = (Expr::t(), Expr::x(), Expr::u());
        Ok(match self {
            EquivTransform::G { m, s, d0, d1, d2, d3, .. } => PointMap {
                t: sign(*s) * d1 * d3.pow(&(1 - m)) * &t + d0,
                x: d1 * &x + d2,
                u: d3 * &u,
            },
            EquivTransform::GN0 { time, d1, d2, d3, .. } => PointMap {
                t: time.clone(),
                x: d1 * &x + d2,
                u: d3 * &u,
            },
            EquivTransform::GN1 { s, time, d1, d2, d3, .. } => PointMap {
                t: time.clone(),
                x: d1 * (&x - eps * &t) + sign(*s) * eps * time + d2,
                u: d3 * &u,
            },
            EquivTransform::G12 { s, alpha, beta, gamma, delta, kappa, mu0, mu1 } => {
                let den = gamma * &t + delta;
                let det = alpha * delta - beta * gamma;
                PointMap {
                    t: (alpha * &t + beta) / &den,
                    x: (kappa * &x + mu1 * &t + mu0) / &den,
                    u: sign(*s)
                        * (2 * eps * kappa * &den * &u - kappa * gamma * &x + mu1 * delta - mu0 * gamma)
                        / (2 * eps * det),
                }
            }
            EquivTransform::M1toM0 { inverse } => PointMap {
                t: t.clone(),
                x: if *inverse { &x + eps * &t } else { &x - eps * &t },
                u,
            },
            EquivTransform::GClassMap { g_int, eps: e, .. } => PointMap {
                t: sign(*e) * g_int,
                x,
                u,
            },
            EquivTransform::Chain(steps) => {
                let mut acc = PointMap { t, x, u };
                let mut e = eps.clone();
                for st in steps {
                    let pm = st.point_map(&e)?;
                    let sub = |expr: &Expr| {
                        replace(expr, &|s| match s {
                            Symbol::T => Some(acc.t.clone()),
                            Symbol::X => Some(acc.x.clone()),
                            s if *s == Symbol::u() => Some(acc.u.clone()),
                            _ => None,
                        })
                    };
                    acc = PointMap {
                        t: sub(&pm.t),
                        x: sub(&pm.x),
                        u: sub(&pm.u),
                    };
                    e = st.target_eps(&e);
                }
                acc
            }
        })
    }

    fn target_eps(&self, eps: &Expr) -> Expr {
        match self {
            EquivTransform::G { s, .. } | EquivTransform::GN1 { s, .. } | EquivTransform::G12 { s, .. } => {
                normalize(&(sign(*s) * eps))
            }
            EquivTransform::GClassMap { eps: e, .. } => sign(*e),
            EquivTransform::Chain(steps) => steps.iter().fold(eps.clone(), |e, s| s.target_eps(&e)),
            _ => eps.clone(),
        }
    }

    /// `f~(t~(t)) / f(t)` for a single (non-chain) step.
    fn f_factor(&self) -> Expr {
        let t = Expr::t();
        normalize(&match self {
            EquivTransform::G { m, n, s, d1, d3, .. } => sign(*s) * d1.powi(2) * d3.pow(&(m - n)),
            EquivTransform::GN0 { n, time, d1, d3, .. } | EquivTransform::GN1 { n, time, d1, d3, .. } => {
                d1.powi(3) * d3.pow(&(1 - n)) / differentiate(time, &Symbol::T)
            }
            EquivTransform::G12 { alpha, beta, gamma, delta, kappa, .. } => {
                kappa.powi(3) / (alpha * delta - beta * gamma) / (gamma * &t + delta)
            }
            EquivTransform::M1toM0 { .. } => Expr::one(),
            EquivTransform::GClassMap { g, eps, .. } => sign(*eps) / g,
            EquivTransform::Chain(_) => unreachable!("chains are applied step by step"),
        })
    }

    /// Old `t` as a function of the new one (written in `t`).
    fn time_inverse(&self) -> Result<Expr> {
        let t = Expr::t();
        match self {
            EquivTransform::G { m, s, d0, d1, d3, .. } => {
                Ok(normalize(&((&t - d0) / (sign(*s) * d1 * d3.pow(&(1 - m))))))
            }
            EquivTransform::GN0 { time, .. } | EquivTransform::GN1 { time, .. } => invert_time_map(time),
            EquivTransform::G12 { alpha, beta, gamma, delta, .. } => {
                Ok(normalize(&((delta * &t - beta) / (alpha - gamma * &t))))
            }
            EquivTransform::M1toM0 { .. } => Ok(t),
            EquivTransform::GClassMap { g_int, eps, .. } => invert_time_map(&(sign(*eps) * g_int)),
            EquivTransform::Chain(_) => Err(Error::Unsupported("time inverse of a chain".into())),
        }
    }

    fn check_applies(&self, spec: &EquationSpec) -> Result<()> {
        let fam = self.family();
        match self {
            EquivTransform::G { m, n, .. } => {
                if !equal(m, &spec.m) || !equal(n, &spec.n) {
                    return Err(mismatch(fam, format!("built for m = {m}, n = {n}")));
                }
            }
            EquivTransform::GN0 { n, .. } => {
                if !spec.m.is_zero_literal() || !equal(n, &spec.n) {
                    return Err(mismatch(fam, format!("needs m = 0, n = {n}")));
                }
            }
            EquivTransform::GN1 { n, .. } => {
                if !spec.m.is_one_literal() || !equal(n, &spec.n) {
                    return Err(mismatch(fam, format!("needs m = 1, n = {n}")));
                }
            }
            EquivTransform::G12 { .. } => {
                if !spec.n.is_one_literal() || spec.m != Expr::int(2) {
                    return Err(mismatch(fam, "needs n = 1, m = 2"));
                }
            }
            EquivTransform::M1toM0 { inverse } => {
                let want = if *inverse { Expr::zero() } else { Expr::one() };
                if spec.m != want {
                    return Err(mismatch(fam, format!("needs m = {want}")));
                }
            }
            EquivTransform::GClassMap { .. } | EquivTransform::Chain(_) => {}
        }
        Ok(())
    }

    fn target_m(&self, m: &Expr) -> Expr {
        match self {
            EquivTransform::M1toM0 { inverse: false } => Expr::zero(),
            EquivTransform::M1toM0 { inverse: true } => Expr::one(),
            _ => m.clone(),
        }
    }
}

/// Transformed equation, with `f~` written as a function of `t~`.
pub fn apply_equiv(tr: &EquivTransform, spec: &EquationSpec) -> Result<EquationSpec> {
    tr.validate()?;
    if let EquivTransform::Chain(steps) = tr {
        return steps.iter().try_fold(spec.clone(), |s, st| apply_equiv(st, &s));
    }
    tr.check_applies(spec)?;
    let f = match spec.f.expr() {
        None => FSpec::arbitrary(),
        Some(f) => {
            let in_old_t = normalize(&(tr.f_factor() * f));
            let new_f = if in_old_t.depends_on_t() {
                with_t(&in_old_t, &tr.time_inverse()?)
            } else {
                in_old_t
            };
            FSpec::from_expr_like(&new_f, &spec.f)?
        }
    };
    let eps = tr.target_eps(&spec.eps_expr());
    let eps = eps
        .as_integer()
        .ok_or_else(|| Error::InvalidSpec(format!("eps became {eps}")))? as i8;
    EquationSpec::new(tr.target_m(&spec.m), spec.n.clone(), eps, f)
}

/// Old `t` as a function of `t~ = T(t)` for the shapes `a*t^p + b`,
/// `a*exp(lambda*t) + b` and `a*ln(t) + b`, with `a`, `b`, `p`, `lambda`
/// constant. The result is written in `t`.
pub fn invert_time_map(time: &Expr) -> Result<Expr> {
    let time = normalize(time);
    let t = Expr::t();
    let fail = || Error::NonInvertibleParameterization(format!("cannot invert T(t) = {time}"));
    let (consts, vars): (Vec<Expr>, Vec<Expr>) = time.terms().into_iter().partition(|x| !x.depends_on_t());
    if vars.len() != 1 {
        return Err(fail());
    }
    let b = Expr::sum(consts);
    let (a, v) = split_constant(&vars[0]);
    let y = (&t - &b) / &a;
    let out = if v == t {
        y
    } else {
        match v.node() {
            Node::Pow(base, p) if *base == t && p.is_constant() => y.pow(&p.recip()),
            Node::Func(Func::Exp, arg) => {
                let lambda = normalize(&(arg / &t));
                if !lambda.is_constant() {
                    return Err(fail());
                }
                y.ln() / lambda
            }
            Node::Func(Func::Ln, arg) if *arg == t => y.exp(),
            _ => return Err(fail()),
        }
    };
    Ok(normalize(&out))
}

/// `u~(t~, x~)` for a solution given as an expression in `(t, x)`; the result
/// is written in `(t, x)` standing for the new variables.
pub fn push_solution_expr(tr: &EquivTransform, u: &Expr, eps: i8) -> Result<Expr> {
    tr.validate()?;
    if let EquivTransform::Chain(steps) = tr {
        let mut cur = normalize(u);
        let mut e = sign(eps);
        for st in steps {
            let ei = e.as_integer().unwrap_or(1) as i8;
            cur = push_solution_expr(st, &cur, ei)?;
            e = st.target_eps(&e);
        }
        return Ok(cur);
    }
    let pm = tr.point_map(&sign(eps))?;
    let (a, b) = x_affine(&pm.x)?;
    let t_old = tr.time_inverse()?;
    let x_old = normalize(&((Expr::x() - with_t(&b, &t_old)) / with_t(&a, &t_old)));
    let tx = |s: &Symbol| match s {
        Symbol::T => Some(t_old.clone()),
        Symbol::X => Some(x_old.clone()),
        _ => None,
    };
    let u_old = replace(u, &tx);
    Ok(replace(&pm.u, &|s| if *s == Symbol::u() { Some(u_old.clone()) } else { tx(s) }))
}

/// Splits `x~ = A(t)*x + B(t)`.
fn x_affine(x_map: &Expr) -> Result<(Expr, Expr)> {
    let a = differentiate(x_map, &Symbol::X);
    if a.contains(&Symbol::X) || a.contains(&Symbol::u()) {
        return Err(Error::Unsupported(format!("x map {x_map} is not affine in x")));
    }
    let b = replace(x_map, &|s| (*s == Symbol::X).then(Expr::zero));
    Ok((a, b))
}

/// Numeric counterpart of [`push_solution_expr`] for a solution given as a
/// closure.
pub fn push_solution(tr: &EquivTransform, sol: Solution, eps: i8) -> Result<Solution> {
    tr.validate()?;
    if let EquivTransform::Chain(steps) = tr {
        let mut cur = sol;
        let mut e = sign(eps);
        for st in steps {
            let ei = e.as_integer().unwrap_or(1) as i8;
            cur = push_solution(st, cur, ei)?;
            e = st.target_eps(&e);
        }
        return Ok(cur);
    }
    let pm = tr.point_map(&sign(eps))?;
    let (a, b) = x_affine(&pm.x)?;
    let slots_t = [Symbol::T];
    let slots_u = [Symbol::T, Symbol::X, Symbol::u()];
    let t_inv = Compiled::new(&tr.time_inverse()?, &slots_t)?;
    let a = Compiled::new(&a, &slots_t)?;
    let b = Compiled::new(&b, &slots_t)?;
    let um = Compiled::new(&pm.u, &slots_u)?;
    Ok(Arc::new(move |tn: f64, xn: f64| {
        let t = t_inv.eval(&[tn]);
        let av = a.eval(&[t]);
        if !t.is_finite() || !av.is_finite() || av == 0.0 {
            return Err(Error::Domain {
                at: tn,
                message: "inverse point map is singular".into(),
            });
        }
        let x = (xn - b.eval(&[t])) / av;
        let u = sol(t, x)?;
        let v = um.eval(&[t, x, u]);
        if !v.is_finite() {
            return Err(Error::Domain {
                at: tn,
                message: "u map is singular".into(),
            });
        }
        Ok(v)
    }))
}

/// `b` after `a`, in closed form when both lie in one family.
pub fn compose_equiv(a: &EquivTransform, b: &EquivTransform) -> Result<EquivTransform> {
    use EquivTransform as E;
    let out = match (a, b) {
        (E::Chain(x), E::Chain(y)) => E::Chain(x.iter().chain(y).cloned().collect()),
        (E::Chain(x), _) if x.is_empty() => b.clone(),
        (_, E::Chain(y)) if y.is_empty() => a.clone(),
        (
            E::G { m, n, s: sa, d0: d0a, d1: d1a, d2: d2a, d3: d3a },
            E::G { m: mb, n: nb, s: sb, d0: d0b, d1: d1b, d2: d2b, d3: d3b },
        ) => {
            if !equal(m, mb) || !equal(n, nb) {
                return Err(mismatch("G", "different (m, n)"));
            }
            E::G {
                m: m.clone(),
                n: n.clone(),
                s: sa * sb,
                d0: normalize(&(sign(*sb) * d1b * d3b.pow(&(1 - m)) * d0a + d0b)),
                d1: normalize(&(d1a * d1b)),
                d2: normalize(&(d1b * d2a + d2b)),
                d3: normalize(&(d3a * d3b)),
            }
        }
        (
            E::GN0 { n, time: ta, d1: d1a, d2: d2a, d3: d3a },
            E::GN0 { n: nb, time: tb, d1: d1b, d2: d2b, d3: d3b },
        ) => {
            if !equal(n, nb) {
                return Err(mismatch("G_n0", "different n"));
            }
            E::GN0 {
                n: n.clone(),
                time: with_t(tb, ta),
                d1: normalize(&(d1a * d1b)),
                d2: normalize(&(d1b * d2a + d2b)),
                d3: normalize(&(d3a * d3b)),
            }
        }
        (
            E::GN1 { n, s: sa, time: ta, d1: d1a, d2: d2a, d3: d3a },
            E::GN1 { n: nb, s: sb, time: tb, d1: d1b, d2: d2b, d3: d3b },
        ) => {
            if !equal(n, nb) {
                return Err(mismatch("G_n1", "different n"));
            }
            E::GN1 {
                n: n.clone(),
                s: sa * sb,
                time: with_t(tb, ta),
                d1: normalize(&(d1a * d1b)),
                d2: normalize(&(d1b * d2a + d2b)),
                d3: normalize(&(d3a * d3b)),
            }
        }
        (
            E::G12 { s: sa, alpha: aa, beta: ba, gamma: ga, delta: da, kappa: ka, mu0: m0a, mu1: m1a },
            E::G12 { s: sb, alpha: ab, beta: bb, gamma: gb, delta: db, kappa: kb, mu0: m0b, mu1: m1b },
        ) => E::G12 {
            s: sa * sb,
            alpha: normalize(&(ab * aa + bb * ga)),
            beta: normalize(&(ab * ba + bb * da)),
            gamma: normalize(&(gb * aa + db * ga)),
            delta: normalize(&(gb * ba + db * da)),
            kappa: normalize(&(ka * kb)),
            mu0: normalize(&(kb * m0a + m1b * ba + m0b * da)),
            mu1: normalize(&(kb * m1a + m1b * aa + m0b * ga)),
        },
        (E::G { .. }, E::GN0 { .. } | E::G12 { .. }) => return compose_equiv(&lift(a, b)?, b),
        (E::GN0 { .. } | E::G12 { .. }, E::G { .. }) => return compose_equiv(a, &lift(b, a)?),
        (E::M1toM0 { inverse: x }, E::M1toM0 { inverse: y }) if x != y => E::identity(),
        (_, E::GClassMap { .. }) => {
            return Err(mismatch("GClassMap", "the class map can only come first"));
        }
        (E::Chain(_) | E::M1toM0 { .. } | E::GClassMap { .. }, _) | (_, E::Chain(_) | E::M1toM0 { .. }) => {
            let mut steps = Vec::new();
            for t in [a, b] {
                match t {
                    E::Chain(s) => steps.extend(s.iter().cloned()),
                    other => steps.push(other.clone()),
                }
            }
            E::Chain(steps)
        }
        _ => {
            return Err(mismatch(
                a.family(),
                format!("cannot compose with {}", b.family()),
            ))
        }
    };
    out.validate()
        .map_err(|e| Error::DegenerateResult(e.to_string()))?;
    Ok(out)
}

/// Rewrites a usual-group element as a member of the conditional family of `like`.
fn lift(g: &EquivTransform, like: &EquivTransform) -> Result<EquivTransform> {
    let EquivTransform::G { m, n, s, d0, d1, d2, d3 } = g else {
        unreachable!()
    };
    let t = Expr::t();
    match like {
        EquivTransform::GN0 { n: nl, .. } if m.is_zero_literal() && equal(n, nl) => Ok(EquivTransform::GN0 {
            n: n.clone(),
            time: normalize(&(sign(*s) * d1 * d3 * t + d0)),
            d1: d1.clone(),
            d2: d2.clone(),
            d3: d3.clone(),
        }),
        EquivTransform::G12 { .. } if *m == Expr::int(2) && n.is_one_literal() => Ok(EquivTransform::G12 {
            s: *s,
            alpha: normalize(&(sign(*s) * d1 / d3)),
            beta: d0.clone(),
            gamma: Expr::zero(),
            delta: Expr::one(),
            kappa: d1.clone(),
            mu0: d2.clone(),
            mu1: Expr::zero(),
        }),
        _ => Err(mismatch("G", format!("(m, n) = ({m}, {n}) is not in {}", like.family()))),
    }
}

pub fn invert_equiv(a: &EquivTransform) -> Result<EquivTransform> {
    use EquivTransform as E;
    a.validate()?;
    let inv = |e: &Expr| normalize(&e.recip());
    Ok(match a {
        E::G { m, n, s, d0, d1, d2, d3 } => {
            let scale = sign(*s) * d1 * d3.pow(&(1 - m));
            E::G {
                m: m.clone(),
                n: n.clone(),
                s: *s,
                d0: normalize(&(-d0 / scale)),
                d1: inv(d1),
                d2: normalize(&(-d2 / d1)),
                d3: inv(d3),
            }
        }
        E::GN0 { n, time, d1, d2, d3 } => E::GN0 {
            n: n.clone(),
            time: invert_time_map(time)?,
            d1: inv(d1),
            d2: normalize(&(-d2 / d1)),
            d3: inv(d3),
        },
        E::GN1 { n, s, time, d1, d2, d3 } => E::GN1 {
            n: n.clone(),
            s: *s,
            time: invert_time_map(time)?,
            d1: inv(d1),
            d2: normalize(&(-d2 / d1)),
            d3: inv(d3),
        },
        E::G12 { s, alpha, beta, gamma, delta, kappa, mu0, mu1 } => {
            let det = alpha * delta - beta * gamma;
            E::G12 {
                s: *s,
                alpha: delta.clone(),
                beta: normalize(&-beta),
                gamma: normalize(&-gamma),
                delta: alpha.clone(),
                kappa: normalize(&(det / kappa)),
                mu0: normalize(&((mu1 * beta - mu0 * alpha) / kappa)),
                mu1: normalize(&((mu0 * gamma - mu1 * delta) / kappa)),
            }
        }
        E::M1toM0 { inverse } => E::M1toM0 { inverse: !inverse },
        E::GClassMap { .. } => return Err(mismatch("GClassMap", "maps between classes; no inverse in the family")),
        E::Chain(steps) => E::Chain(steps.iter().rev().map(invert_equiv).collect::<Result<_>>()?),
    })
}

/// Applies the normalizations: `m in {0, 1}` to `m = 0, f = 1`; `c*exp(lambda*t)`
/// to `+-exp(t)`; `c*t^k` to `+-t^k`. Anything else comes back unchanged with
/// the identity.
pub fn canonicalize(spec: &EquationSpec) -> Result<(EquationSpec, EquivTransform)> {
    spec.validate()?;
    let witness = canonical_witness(spec)?;
    let out = apply_equiv(&witness, spec)?;
    Ok((out, witness))
}

fn canonical_witness(spec: &EquationSpec) -> Result<EquivTransform> {
    let (m, n) = (&spec.m, &spec.n);
    let g = |s: i8, d0: Expr, d1: Expr, d3: Expr| EquivTransform::G {
        m: m.clone(),
        n: n.clone(),
        s,
        d0,
        d1,
        d2: Expr::zero(),
        d3,
    };
    if m.is_zero_literal() || m.is_one_literal() {
        if matches!(spec.f, FSpec::One) && m.is_zero_literal() {
            return Ok(EquivTransform::identity());
        }
        let Some(big_f) = spec.f.antiderivative() else {
            return Ok(EquivTransform::identity());
        };
        let gn0 = EquivTransform::GN0 {
            n: n.clone(),
            time: big_f,
            d1: Expr::one(),
            d2: Expr::zero(),
            d3: Expr::one(),
        };
        return Ok(if m.is_one_literal() {
            EquivTransform::Chain(vec![EquivTransform::M1toM0 { inverse: false }, gn0])
        } else {
            gn0
        });
    }
    match &spec.f {
        FSpec::Exp { c, lambda } => {
            if *c == 1.into() && *lambda == 1.into() {
                return Ok(EquivTransform::identity());
            }
            // t~ = lambda*t + d0 needs s*d1*d3^(1-m) = lambda; d3 = -1 is only
            // usable with integer m, n.
            let integral = m.as_integer().is_some() && n.as_integer().is_some();
            let mut choice = None;
            for d3 in [1i128, -1] {
                if d3 == -1 && !integral {
                    continue;
                }
                let d3e = Expr::int(d3);
                let tscale = d3e.pow(&(1 - m)).as_rational().unwrap_or_else(|| 1.into());
                let s = sign_of(&(*lambda * tscale));
                let fscale = d3e.pow(&(m - n)).as_rational().unwrap_or_else(|| 1.into());
                let big_c = Rational::from(s as i128) * lambda * lambda * fscale * c;
                if choice.is_none() || big_c.is_positive() {
                    choice = Some((s, d3e, big_c));
                }
                if big_c.is_positive() {
                    break;
                }
            }
            let (s, d3, big_c) = choice.expect("d3 = 1 is always tried");
            let d0 = Expr::rational(big_c.abs()).ln();
            Ok(g(s, d0, Expr::rational(lambda.abs()), d3))
        }
        FSpec::Power { c, k } if c.abs() != 1.into() => scale_power(spec, c, k, &g),
        FSpec::Const(c) if !c.is_zero() => scale_power(spec, c, &Expr::zero(), &g),
        _ => Ok(EquivTransform::identity()),
    }
}

fn scale_power(
    spec: &EquationSpec,
    c: &Rational,
    k: &Expr,
    g: &dyn Fn(i8, Expr, Expr, Expr) -> EquivTransform,
) -> Result<EquivTransform> {
    let mag = Expr::rational(c.abs());
    let two_minus_k = normalize(&(2 - k));
    if nonzero(&two_minus_k) {
        // f~ = c*d1^(2-k)*t~^k with t~ = d1*t.
        let d1 = mag.pow(&(-two_minus_k.recip()));
        return Ok(g(1, Expr::zero(), normalize(&d1), Expr::one()));
    }
    // k = 2: f~ = c*d3^(3m-n-2)*t~^2 with t~ = d3^(1-m)*t.
    let e = normalize(&(3 * &spec.m - &spec.n - 2));
    if !nonzero(&e) {
        return Ok(EquivTransform::identity());
    }
    let d3 = mag.pow(&(-e.recip()));
    Ok(g(1, Expr::zero(), Expr::one(), normalize(&d3)))
}

/// Maps `u_t + g(t)*(u^m)_x + f(t)*(u^n)_xxx = 0` into the class with sign `eps`.
pub fn reduce_g_class(m: &Expr, n: &Expr, g: &Expr, f: &FSpec, eps: i8) -> Result<(EquationSpec, EquivTransform)> {
    let tr = EquivTransform::g_class(g, eps)?;
    let source = EquationSpec::new(m.clone(), n.clone(), eps, f.clone())?;
    Ok((apply_equiv(&tr, &source)?, tr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::{eval_numeric, parse, Point};

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn spec(m: &str, n: &str, eps: i8, f: &str) -> EquationSpec {
        EquationSpec::parse(m, n, eps, f).unwrap()
    }

    fn g12(v: [i128; 7], s: i8) -> EquivTransform {
        let [alpha, beta, gamma, delta, kappa, mu0, mu1] = v.map(Expr::int);
        EquivTransform::G12 { s, alpha, beta, gamma, delta, kappa, mu0, mu1 }
    }

    fn g_scale(m: &str, n: &str, s: i8, d: [&str; 4]) -> EquivTransform {
        EquivTransform::G {
            m: p(m),
            n: p(n),
            s,
            d0: p(d[0]),
            d1: p(d[1]),
            d2: p(d[2]),
            d3: p(d[3]),
        }
    }

    #[test]
    fn usual_identity_fixes_specs() {
        for sp in [spec("3", "2", 1, "t^2"), spec("2", "1", -1, "exp(t)"), spec("m", "n", 1, "f")] {
            let id = EquivTransform::G {
                m: sp.m.clone(),
                n: sp.n.clone(),
                s: 1,
                d0: Expr::zero(),
                d1: Expr::one(),
                d2: Expr::zero(),
                d3: Expr::one(),
            };
            assert_eq!(apply_equiv(&id, &sp).unwrap(), sp);
        }
    }

    #[test]
    fn inversion_of_time_maps_t_squared_to_reciprocal() {
        let tr = g12([0, 1, 1, 0, -1, 0, 0], 1);
        let out = apply_equiv(&tr, &spec("2", "1", 1, "t^2")).unwrap();
        assert_eq!(out.f, FSpec::Power { c: 1.into(), k: Expr::int(-1) });
        assert_eq!(out.eps, 1);
        let pm = tr.point_map(&Expr::eps()).unwrap();
        assert_eq!(pm.t, p("1/t"));
        assert_eq!(pm.x, p("-x/t"));
        assert!(equal(&pm.u, &p("(2*eps*t*u - x)/(2*eps)")));
    }

    #[test]
    fn class_map_with_constant_g() {
        let (out, _) = reduce_g_class(&Expr::int(3), &Expr::int(2), &Expr::int(2), &FSpec::One, 1).unwrap();
        assert_eq!(out.f, FSpec::Const(Rational::new(1, 2)));
        let (out, tr) = reduce_g_class(&Expr::int(3), &Expr::int(2), &p("2*t"), &FSpec::Linear, -1).unwrap();
        // t~ = -t^2, f~ = -t/(2t) = -1/2.
        assert_eq!(out.f, FSpec::Const(Rational::new(-1, 2)));
        assert_eq!(out.eps, -1);
        assert!(invert_equiv(&tr).is_err());
    }

    #[test]
    fn group_laws_on_examples() {
        let inv = g12([0, 1, 1, 0, 1, 0, 0], 1);
        let sq = compose_equiv(&inv, &inv).unwrap();
        let EquivTransform::G12 { alpha, beta, gamma, delta, .. } = &sq else { panic!() };
        assert!(equal(&(beta.clone()), &Expr::zero()) && equal(gamma, &Expr::zero()));
        assert!(equal(alpha, delta));
        let a = g_scale("3", "2", 1, ["0", "2", "0", "1"]);
        let b = g_scale("3", "2", 1, ["0", "3", "0", "1"]);
        let EquivTransform::G { d1, .. } = compose_equiv(&a, &b).unwrap() else { panic!() };
        assert_eq!(d1, Expr::int(6));
        assert_eq!(invert_equiv(&EquivTransform::identity()).unwrap(), EquivTransform::identity());
    }

    fn acts_as_identity(tr: &EquivTransform, eps: i8) {
        let pm = tr.point_map(&sign(eps)).unwrap();
        assert!(equal(&pm.t, &Expr::t()), "{:?}", pm);
        assert!(equal(&pm.x, &Expr::x()), "{:?}", pm);
        assert!(equal(&pm.u, &Expr::u()), "{:?}", pm);
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let cases = [
            g_scale("3", "2", -1, ["1/2", "2", "-3", "5"]),
            EquivTransform::GN0 { n: p("2"), time: p("t^3/2 + 1"), d1: p("3"), d2: p("1"), d3: p("1/2") },
            EquivTransform::GN1 { n: p("3"), s: -1, time: p("2*exp(t/2)"), d1: p("-2"), d2: p("1"), d3: p("3") },
            g12([2, 1, 1, 3, -2, 1, 4], -1),
        ];
        for tr in cases {
            for eps in [1, -1] {
                let c = compose_equiv(&tr, &invert_equiv(&tr).unwrap()).unwrap();
                acts_as_identity(&c, eps);
                let c = compose_equiv(&invert_equiv(&tr).unwrap(), &tr).unwrap();
                acts_as_identity(&c, eps);
            }
        }
    }

    #[test]
    fn closed_form_composition_matches_sequential_maps() {
        let a = g12([2, 1, 1, 3, -2, 1, 4], -1);
        let b = g12([1, -1, 2, 1, 3, 0, -2], 1);
        let c = compose_equiv(&a, &b).unwrap();
        let chain = EquivTransform::Chain(vec![a, b]);
        for eps in [1, -1] {
            let x = c.point_map(&sign(eps)).unwrap();
            let y = chain.point_map(&sign(eps)).unwrap();
            assert!(equal(&x.t, &y.t) && equal(&x.x, &y.x) && equal(&x.u, &y.u));
        }
    }

    #[test]
    fn canonical_forms() {
        let sp = spec("0", "2", 1, "t");
        let (out, w) = canonicalize(&sp).unwrap();
        assert_eq!(out.f, FSpec::One);
        let EquivTransform::GN0 { time, .. } = &w else { panic!("{w:?}") };
        assert!(equal(time, &p("t^2/2")));

        let (out, w) = canonicalize(&spec("3", "2", 1, "5*exp(2*t)")).unwrap();
        assert_eq!(out.f, FSpec::Exp { c: 1.into(), lambda: 1.into() });
        assert_eq!(apply_equiv(&w, &spec("3", "2", 1, "5*exp(2*t)")).unwrap(), out);

        let (out, _) = canonicalize(&spec("3", "2", 1, "-3*exp(-t)")).unwrap();
        assert!(matches!(out.f, FSpec::Exp { lambda, .. } if lambda == 1.into()));

        let (out, _) = canonicalize(&spec("3", "2", 1, "7*t^(1/2)")).unwrap();
        assert_eq!(out.f, FSpec::Power { c: 1.into(), k: Expr::frac(1, 2) });
        let (out, _) = canonicalize(&spec("3", "2", 1, "-4*t^2")).unwrap();
        assert_eq!(out.f, FSpec::Power { c: (-1).into(), k: Expr::int(2) });
        let (out, _) = canonicalize(&spec("1", "2", -1, "3*t^2")).unwrap();
        assert_eq!((out.m.clone(), out.f.clone()), (Expr::zero(), FSpec::One));

        let sp = spec("2", "1", 1, "t^2+sin(t)+2");
        let (out, w) = canonicalize(&sp).unwrap();
        assert_eq!(out, sp);
        assert_eq!(w, EquivTransform::identity());
    }

    #[test]
    fn pushed_rational_solution_solves_the_target() {
        // u = (x + 1)/(2*eps*t + 3) solves n = 1, m = 2 for any f.
        for eps in [1i8, -1] {
            let src = spec("2", "1", eps, "t^2");
            let u = p(&format!("(x + 1)/(2*{eps}*t + 3)"));
            assert!(is_zero(&src.residual(&u).unwrap()).unwrap().is_zero());
            let tr = g12([0, 1, 1, 0, -1, 0, 0], 1);
            let dst = apply_equiv(&tr, &src).unwrap();
            let v = push_solution_expr(&tr, &u, eps).unwrap();
            let r = dst.residual(&v).unwrap();
            let mut pt = Point::new();
            for (tv, xv) in [(0.7, 0.3), (1.3, -2.0), (2.1, 5.0)] {
                pt.insert(Symbol::T, tv);
                pt.insert(Symbol::X, xv);
                assert!(eval_numeric(&r, &pt).unwrap().abs() < 1e-10);
            }
            let num = push_solution(&tr, Arc::new(move |t, x| Ok((x + 1.0) / (2.0 * eps as f64 * t + 3.0))), eps)
                .unwrap();
            pt.insert(Symbol::T, 0.9);
            pt.insert(Symbol::X, 0.4);
            let exact = eval_numeric(&v, &pt).unwrap();
            assert!((num(0.9, 0.4).unwrap() - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn galilean_map_sends_traveling_waves_to_static_frame() {
        let src = spec("1", "2", 1, "1");
        let tr = EquivTransform::M1toM0 { inverse: false };
        let dst = apply_equiv(&tr, &src).unwrap();
        assert!(dst.m.is_zero_literal());
        // u = (x - t)^(1/2)... a profile of x - eps*t becomes a function of x alone.
        let u = p("(x - t + 3)^2");
        let v = push_solution_expr(&tr, &u, 1).unwrap();
        assert!(!v.contains(&Symbol::T));
    }

    #[test]
    fn degenerate_parameters_are_rejected() {
        let bad = g12([1, 1, 1, 1, 1, 0, 0], 1);
        assert!(matches!(bad.validate(), Err(Error::NonInvertibleParameterization(_))));
        let bad = g_scale("3", "2", 1, ["0", "0", "0", "1"]);
        assert!(apply_equiv(&bad, &spec("3", "2", 1, "1")).is_err());
        let wrong = EquivTransform::GN0 { n: p("2"), time: p("t"), d1: p("1"), d2: p("0"), d3: p("1") };
        assert!(matches!(apply_equiv(&wrong, &spec("3", "2", 1, "1")), Err(Error::FamilyMismatch { .. })));
    }
}
