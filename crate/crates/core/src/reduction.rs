//! Similarity reductions: ansatzes from the characteristic system, reduced
//! ODEs, the optimal system of the `t^k` KdV case and the boundary-value
//! reduction of the `t^k` K(m,n) problem.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::classification::{EquationSpec, FSpec};
use crate::error::{Error, Result};
use crate::prolongation::{prolong3, VectorField};
use crate::symkernel::{differentiate, is_zero, normalize, replace, Expr, Func, Node, Rational, Symbol};

/// How the similarity variable relates to `(t, x)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Inverse {
    /// `omega` moves with `x`; `x` is recovered from `(t, omega)` by this expression.
    X(Expr),
    /// `tau = 0`: the orbits are lines `t = const` and `omega = t`.
    Time,
}

/// `u = shift(t, x) + shape(t, x) * phi(omega)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ansatz {
    pub field: VectorField,
    pub shift: Expr,
    pub shape: Expr,
    pub omega: Expr,
    pub inverse: Inverse,
}

impl Ansatz {
    pub fn u_of_phi(&self) -> Expr {
        normalize(&(&self.shift + &self.shape * Expr::phi(0)))
    }

    /// The function of `(t, x, u)` that the field leaves invariant besides `omega`.
    pub fn u_invariant(&self) -> Expr {
        normalize(&((Expr::u() - &self.shift) / &self.shape))
    }

    /// `u(t, x)` for a profile given as an expression in `omega`.
    pub fn reconstruct(&self, phi: &Expr) -> Expr {
        let p = replace(phi, &|s| (*s == Symbol::Omega).then(|| self.omega.clone()));
        normalize(&(&self.shift + &self.shape * p))
    }
}

impl fmt::Display for Ansatz {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u = {}, omega = {}", self.u_of_phi(), self.omega)
    }
}

/// `PDE residual under the ansatz = multiplier * lhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedODE {
    pub lhs: Expr,
    pub multiplier: Expr,
}

impl ReducedODE {
    /// Same equation with `lhs` multiplied by `c`.
    pub fn rescaled(&self, c: &Expr) -> ReducedODE {
        ReducedODE {
            lhs: normalize(&(&self.lhs * c)),
            multiplier: normalize(&(&self.multiplier / c)),
        }
    }

    pub fn order(&self) -> u8 {
        (0..=3).rev().find(|j| self.lhs.contains(&Symbol::Phi(*j))).unwrap_or(0)
    }

    /// Re-derives the residual and checks the factorization.
    pub fn verify(&self, ansatz: &Ansatz, spec: &EquationSpec) -> Result<bool> {
        let r = residual_in_reduced_vars(ansatz, spec)?;
        let m = match ansatz.inverse {
            Inverse::Time => to_omega(&self.multiplier),
            Inverse::X(_) => self.multiplier.clone(),
        };
        Ok(is_zero(&(r - m * &self.lhs))?.is_zero())
    }
}

impl fmt::Display for ReducedODE {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = 0 (multiplier {})", self.lhs, self.multiplier)
    }
}

/// `[d/dt, d/dx, d/du, constant]` parts of an expression affine in `(t, x, u)`.
fn affine_parts(e: &Expr, what: &str) -> Result<[Expr; 4]> {
    let vars = [Symbol::T, Symbol::X, Symbol::u()];
    let mut out: Vec<Expr> = Vec::with_capacity(4);
    let mut rest = e.clone();
    for v in &vars {
        let c = differentiate(e, v);
        if !c.is_constant() {
            return Err(Error::UnsupportedGenerator(format!("{what} = {e}")));
        }
        rest = rest - &c * Expr::sym(v.clone());
        out.push(c);
    }
    let rest = normalize(&rest);
    if !rest.is_constant() {
        return Err(Error::UnsupportedGenerator(format!("{what} = {e}")));
    }
    out.push(rest);
    Ok([out[0].clone(), out[1].clone(), out[2].clone(), out[3].clone()])
}

fn nonzero(e: &Expr) -> Result<bool> {
    if e.is_zero_literal() {
        return Ok(false);
    }
    Ok(!is_zero(e)?.is_zero())
}

/// First integrals of `dt/tau = dx/xi = du/eta` for
/// `tau = a1*t + a0`, `xi = b1*x + b2*t + b0`, `eta = c1*u + c0`.
pub fn similarity_ansatz(vf: &VectorField, spec: &EquationSpec) -> Result<Ansatz> {
    spec.validate()?;
    let vf = &with_eps(vf, spec.eps)?;
    let [a1, tx, tu, a0] = affine_parts(&vf.tau, "tau")?;
    let [b2, b1, bu, b0] = affine_parts(&vf.xi, "xi")?;
    let [ct, cx, c1, c0] = affine_parts(&vf.eta, "eta")?;
    for (c, what) in [(&tx, "tau"), (&tu, "tau"), (&bu, "xi"), (&ct, "eta"), (&cx, "eta")] {
        if nonzero(c)? {
            return Err(Error::UnsupportedGenerator(format!("{what} has a term outside the affine form")));
        }
    }
    let t = Expr::t();
    let x = Expr::x();
    let zero = Expr::zero();

    if !nonzero(&vf.tau)? {
        if !nonzero(&vf.xi)? {
            return Err(Error::TrivialOrbit);
        }
        if !nonzero(&b1)? && !nonzero(&b2)? && !nonzero(&vf.eta)? {
            return Err(Error::TrivialOrbit);
        }
        let beta = &b2 * &t + &b0;
        let (shift, shape) = if nonzero(&b1)? {
            let big_x = &x + &beta / &b1;
            let nu = normalize(&(&c1 / &b1));
            if nonzero(&nu)? {
                (-&c0 / &c1, big_x.pow(&nu))
            } else {
                (&c0 / &b1 * big_x.ln(), Expr::one())
            }
        } else if nonzero(&c1)? {
            (-&c0 / &c1, (&c1 * &x / &beta).exp())
        } else {
            (&c0 * &x / &beta, Expr::one())
        };
        return Ok(Ansatz {
            field: vf.clone(),
            shift: normalize(&shift),
            shape: normalize(&shape),
            omega: t,
            inverse: Inverse::Time,
        });
    }

    let (x_p, h, shift, shape);
    if nonzero(&a1)? {
        let tt = &t + &a0 / &a1;
        let lambda = normalize(&(&b1 / &a1));
        let mu = normalize(&(&c1 / &a1));
        let p = normalize(&(&b2 / &a1));
        let q = normalize(&((&b0 * &a1 - &b2 * &a0) / a1.powi(2)));
        let r = normalize(&(&c0 / &a1));
        let mut xp = zero.clone();
        if nonzero(&p)? {
            let one_minus = normalize(&(Expr::one() - &lambda));
            xp = xp
                + if nonzero(&one_minus)? {
                    &p / &one_minus * &tt
                } else {
                    &p * &tt * tt.ln()
                };
        }
        if nonzero(&q)? {
            xp = xp + if nonzero(&lambda)? { -&q / &lambda } else { &q * tt.ln() };
        }
        x_p = xp;
        h = tt.pow(&lambda);
        shift = if !nonzero(&r)? {
            zero.clone()
        } else if nonzero(&mu)? {
            -&r / &mu
        } else {
            &r * tt.ln()
        };
        shape = tt.pow(&mu);
    } else {
        let lambda = normalize(&(&b1 / &a0));
        let mu = normalize(&(&c1 / &a0));
        let p = normalize(&(&b2 / &a0));
        let q = normalize(&(&b0 / &a0));
        let r = normalize(&(&c0 / &a0));
        if nonzero(&lambda)? {
            let a = -&p / &lambda;
            let b = (&a - &q) / &lambda;
            x_p = a * &t + b;
            h = (&lambda * &t).exp();
        } else {
            x_p = &p * t.powi(2) / 2 + &q * &t;
            h = Expr::one();
        }
        if nonzero(&mu)? {
            shift = -&r / &mu;
            shape = (&mu * &t).exp();
        } else {
            shift = &r * &t;
            shape = Expr::one();
        }
    }
    let x_p = normalize(&x_p);
    let h = normalize(&h);
    Ok(Ansatz {
        field: vf.clone(),
        shift: normalize(&shift),
        shape: normalize(&shape),
        omega: normalize(&((&x - &x_p) / &h)),
        inverse: Inverse::X(normalize(&(&x_p + Expr::omega() * &h))),
    })
}

fn with_eps(vf: &VectorField, eps: i8) -> Result<VectorField> {
    let val = |s: &Symbol| s.is_eps().then(|| Expr::int(eps as i128));
    let [tau, xi, eta] = vf.components();
    VectorField::new(replace(tau, &val), replace(xi, &val), replace(eta, &val))
}

/// Total derivative of an expression in `(t, x, phi^(j))` where `phi` is
/// evaluated at `omega(t, x)`.
fn chain_derivative(e: &Expr, var: &Symbol, omega_d: &Expr) -> Expr {
    let mut acc = vec![differentiate(e, var)];
    for j in 0..3u8 {
        let s = Symbol::Phi(j);
        if e.contains(&s) {
            acc.push(differentiate(e, &s) * Expr::phi(j + 1) * omega_d);
        }
    }
    normalize(&Expr::sum(acc))
}

fn to_omega(e: &Expr) -> Expr {
    replace(e, &|s| (*s == Symbol::T).then(Expr::omega))
}

/// The left-hand side under the ansatz, in `(t, omega, phi^(j))` (or in
/// `(omega, phi^(j))` for `tau = 0`).
fn residual_in_reduced_vars(ansatz: &Ansatz, spec: &EquationSpec) -> Result<Expr> {
    let form = spec.form()?;
    let lhs = form.lhs_concrete()?;
    let om_t = differentiate(&ansatz.omega, &Symbol::T);
    let om_x = differentiate(&ansatz.omega, &Symbol::X);
    let u = ansatz.u_of_phi();
    let mut jets: BTreeMap<Symbol, Expr> = BTreeMap::new();
    jets.insert(Symbol::u(), u.clone());
    jets.insert(Symbol::Jet { t: 1, x: 0 }, chain_derivative(&u, &Symbol::T, &om_t));
    let mut d = u;
    for j in 1..=3u8 {
        d = chain_derivative(&d, &Symbol::X, &om_x);
        jets.insert(Symbol::Jet { t: 0, x: j }, d.clone());
    }
    if let Some(s) = lhs.free_symbols().into_iter().find(|s| s.jet_order().is_some() && !jets.contains_key(s)) {
        return Err(Error::Unsupported(format!("jet {s} in the equation")));
    }
    let r = normalize(&replace(&lhs, &|s| jets.get(s).cloned()));
    Ok(match &ansatz.inverse {
        Inverse::X(x_of) => normalize(&replace(&r, &|s| (*s == Symbol::X).then(|| x_of.clone()))),
        Inverse::Time => {
            if r.contains(&Symbol::X) {
                return Err(Error::ResidualHasX(r.to_string()));
            }
            normalize(&to_omega(&r))
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum BaseKey {
    Base(Expr),
    Exp,
}

/// `(base, exponent)` for a factor that depends on the multiplier variable.
fn factor_power(f: &Expr, depends: &dyn Fn(&Expr) -> bool) -> Option<(BaseKey, Expr)> {
    if !depends(f) {
        return None;
    }
    Some(match f.node() {
        Node::Pow(b, e) if depends(b) && !depends(e) => (BaseKey::Base(b.clone()), e.clone()),
        Node::Func(Func::Exp, a) => (BaseKey::Exp, a.clone()),
        _ => (BaseKey::Base(f.clone()), Expr::one()),
    })
}

fn key_factor(k: &BaseKey, e: &Expr) -> Expr {
    match k {
        BaseKey::Base(b) => b.pow(e),
        BaseKey::Exp => e.exp(),
    }
}

/// Common factor of the terms in the dependent bases: each base to the least
/// exponent it carries (0 where a term lacks it).
fn common_factor(r: &Expr, depends: &dyn Fn(&Expr) -> bool) -> Option<Expr> {
    let terms = r.terms();
    let mut per_term: Vec<BTreeMap<BaseKey, Expr>> = Vec::new();
    let mut keys: Vec<BaseKey> = Vec::new();
    for t in &terms {
        let mut m = BTreeMap::new();
        for f in t.factors() {
            if let Some((k, e)) = factor_power(&f, depends) {
                if !keys.contains(&k) {
                    keys.push(k.clone());
                }
                let cur = m.remove(&k).unwrap_or_else(Expr::zero);
                m.insert(k, normalize(&(cur + e)));
            }
        }
        per_term.push(m);
    }
    let mut out = Vec::new();
    for k in keys {
        let mut best: Option<Expr> = None;
        for m in &per_term {
            let e = m.get(&k).cloned().unwrap_or_else(Expr::zero);
            best = Some(match best {
                None => e,
                Some(b) => {
                    let d = normalize(&(&e - &b)).as_rational()?;
                    if d.is_negative() {
                        e
                    } else {
                        b
                    }
                }
            });
        }
        if let Some(e) = best {
            if !e.is_zero_literal() {
                out.push(key_factor(&k, &e));
            }
        }
    }
    Some(normalize(&Expr::product(out)))
}

fn divide_terms(r: &Expr, m: &Expr) -> Expr {
    let inv = m.recip();
    normalize(&Expr::sum(r.terms().iter().map(|t| normalize(&(t * &inv)))))
}

/// Rescales so the rational coefficients are coprime integers.
fn integer_content(lhs: &Expr) -> Rational {
    let mut den = 1i128;
    let mut num = 0i128;
    for t in lhs.terms() {
        let (c, _) = t.split_coefficient();
        den = den.lcm(c.denom());
    }
    for t in lhs.terms() {
        let (c, _) = t.split_coefficient();
        num = num.gcd(&(c * Rational::from(den)).to_integer());
    }
    if num == 0 {
        return Rational::one();
    }
    Rational::new(den, num.abs())
}

/// Substitutes the ansatz, changes to `(t, omega)` and splits off the
/// `t`-dependent multiplier.
pub fn reduce_pde(ansatz: &Ansatz, spec: &EquationSpec) -> Result<ReducedODE> {
    let r = residual_in_reduced_vars(ansatz, spec)?;
    if r.is_zero_literal() {
        return Ok(ReducedODE {
            lhs: Expr::zero(),
            multiplier: Expr::one(),
        });
    }
    let (var, is_static) = match ansatz.inverse {
        Inverse::X(_) => (Symbol::T, false),
        Inverse::Time => (Symbol::Omega, true),
    };
    let depends = |e: &Expr| {
        let has_var = if is_static {
            e.contains(&Symbol::Omega)
        } else {
            e.any_symbol(&Symbol::depends_on_t)
        };
        has_var && !e.any_symbol(&|s| matches!(s, Symbol::Phi(_)))
    };
    let survives = |e: &Expr| {
        if is_static {
            e.any_symbol(&|s| matches!(s, Symbol::X | Symbol::T))
        } else {
            e.any_symbol(&|s| s.depends_on_t() || *s == Symbol::X)
        }
    };
    let mut candidates = Vec::new();
    if let Some(m) = common_factor(&r, &depends) {
        candidates.push(m);
    }
    if let Some(first) = r.terms().first() {
        let m = Expr::product(first.factors().into_iter().filter(|f| depends(f)));
        candidates.push(normalize(&m));
    }
    let mut chosen = None;
    for m in candidates {
        let lhs = divide_terms(&r, &m);
        if !survives(&lhs) && (!is_static || !lhs.contains(&Symbol::T)) {
            chosen = Some((m, lhs));
            break;
        }
    }
    let (m, lhs) = chosen.ok_or_else(|| Error::ResidualHasX(format!("{} survives in {r}", Expr::sym(var.clone()))))?;
    let c = Expr::rational(integer_content(&lhs));
    let lhs = normalize(&(&lhs * &c));
    let m = normalize(&(&m / &c));
    if !is_zero(&(&r - &m * &lhs))?.is_zero() {
        return Err(Error::ResidualHasX(format!("factorization check failed for {r}")));
    }
    let multiplier = if is_static {
        normalize(&replace(&m, &|s| (*s == Symbol::Omega).then(Expr::t)))
    } else {
        m
    };
    Ok(ReducedODE { lhs, multiplier })
}

/// One conjugacy class of one-dimensional subalgebras.
#[derive(Clone, Debug)]
pub struct SubalgebraFamily {
    pub label: String,
    pub condition: String,
    /// Free parameters of the representative: `sigma` in {-1, 0, 1}, `a` real.
    pub params: Vec<String>,
    pub generator: VectorField,
}

impl SubalgebraFamily {
    pub fn instantiate(&self, sigma: i8, a: &Rational) -> Result<VectorField> {
        if !(-1..=1).contains(&sigma) {
            return Err(Error::GuardViolation(format!("sigma must be -1, 0 or 1, got {sigma}")));
        }
        let vals = |s: &Symbol| match s {
            Symbol::Param(p) if &**p == "sigma" => Some(Expr::int(sigma as i128)),
            Symbol::Param(p) if &**p == "a" => Some(Expr::rational(*a)),
            _ => None,
        };
        let [tau, xi, eta] = self.generator.components();
        VectorField::new(replace(tau, &vals), replace(xi, &vals), replace(eta, &vals))
    }
}

/// `Gamma1 = d_x`, `Gamma2 = 2*eps*t*d_x + d_u`,
/// `Gamma3 = 3t*d_t + (k+1)x*d_x + (k-2)u*d_u`.
pub fn case7_basis(k: &Expr) -> [VectorField; 3] {
    let eps = Expr::eps();
    let t = Expr::t();
    let one = Expr::one();
    [
        VectorField::d_x(),
        VectorField {
            tau: Expr::zero(),
            xi: normalize(&(Expr::int(2) * &eps * &t)),
            eta: one.clone(),
        },
        VectorField {
            tau: normalize(&(Expr::int(3) * &t)),
            xi: normalize(&((k + &one) * Expr::x())),
            eta: normalize(&((k - 2) * Expr::u())),
        },
    ]
}

pub fn optimal_system_case7(k: &Rational) -> Result<Vec<SubalgebraFamily>> {
    if k.is_zero() || k.is_one() {
        return Err(Error::GuardViolation(format!("the t^k case needs k != 0, 1; got {k}")));
    }
    let [g1, g2, g3] = case7_basis(&Expr::rational(*k));
    let sigma = Expr::param("sigma");
    let a = Expr::param("a");
    let fam = |label: &str, condition: &str, params: &[&str], generator: VectorField| SubalgebraFamily {
        label: label.into(),
        condition: condition.into(),
        params: params.iter().map(|s| s.to_string()).collect(),
        generator,
    };
    let (label, cond, third) = if *k == Rational::from(-1) {
        ("<G3 + a*G1>", "k = -1", g3.add(&g1.scale(&a)))
    } else if *k == Rational::from(2) {
        ("<G3 + a*G2>", "k = 2", g3.add(&g2.scale(&a)))
    } else {
        ("<G3>", "k != -1, 2", g3.clone())
    };
    let params: &[&str] = if *k == Rational::from(-1) || *k == Rational::from(2) { &["a"] } else { &[] };
    Ok(vec![
        fam("<G1>", "any k", &[], g1.clone()),
        fam("<G2 + sigma*G1>", "any k", &["sigma"], g2.add(&g1.scale(&sigma))),
        fam(label, cond, params, third),
    ])
}

/// `u = (x + c1)/(2*eps*t + sigma)`, a solution for `n = 1, m = 2` and any `f`.
pub fn exact_solution_case(spec: &EquationSpec, c1: &Rational, sigma: i8) -> Result<Expr> {
    if !(spec.n.is_one_literal() && spec.m.as_integer() == Some(2)) {
        return Err(Error::SpecMismatch(format!("needs n = 1, m = 2; got {spec}")));
    }
    if !(-1..=1).contains(&sigma) {
        return Err(Error::GuardViolation(format!("sigma must be -1, 0 or 1, got {sigma}")));
    }
    let den = Expr::int(2 * spec.eps as i128) * Expr::t() + Expr::int(sigma as i128);
    Ok(normalize(&((Expr::x() + Expr::rational(*c1)) / den)))
}

/// Reduction of `u_t + eps*(u^m)_x + t^k*(u^n)_xxx = 0` with
/// `u(0, t) = q(t)`, `u_x(0, t) = u_xx(0, t) = 0`.
#[derive(Clone, Debug)]
pub struct BVPReduction {
    pub spec: EquationSpec,
    pub k: Expr,
    pub gamma_amp: Rational,
    /// `(k*m - k + m - n)/(3m - n - 2)`
    pub c1: Expr,
    /// `(k - 2)/(3m - n - 2)`
    pub c2: Expr,
    pub required_q: Expr,
    pub field: VectorField,
    pub ansatz: Ansatz,
    /// `(phi^n)''' + eps*(phi^m)' - c1*omega*phi' + c2*phi`, multiplier `t^(c2 - 1)`.
    pub ode: ReducedODE,
    /// `phi(0), phi'(0), phi''(0)`
    pub initial: [Rational; 3],
}

/// `k` of a spec whose `f` is exactly `t^k`.
pub fn power_exponent(f: &FSpec) -> Option<Expr> {
    match f {
        FSpec::One => Some(Expr::zero()),
        FSpec::Linear => Some(Expr::one()),
        FSpec::Power { c, k } if c.is_one() => Some(k.clone()),
        _ => None,
    }
}

/// `(phi^n)'''` written with `phi^(j)`.
pub fn third_derivative_of_power(n: &Expr) -> Expr {
    let p = Expr::phi(0);
    let one = Expr::one();
    normalize(
        &(n * p.pow(&(n - &one)) * Expr::phi(3)
            + Expr::int(3) * n * (n - &one) * p.pow(&(n - 2)) * Expr::phi(1) * Expr::phi(2)
            + n * (n - &one) * (n - 2) * p.pow(&(n - 3)) * Expr::phi(1).powi(3)),
    )
}

pub fn bvp_reduce(spec: &EquationSpec, gamma_amp: &Rational) -> Result<BVPReduction> {
    spec.validate()?;
    let k = power_exponent(&spec.f).ok_or_else(|| Error::SpecMismatch(format!("needs f = t^k, got {}", spec.f)))?;
    if !gamma_amp.is_positive() {
        return Err(Error::GuardViolation(format!("gammaAmp must be positive, got {gamma_amp}")));
    }
    let (m, n) = (&spec.m, &spec.n);
    let d = normalize(&(Expr::int(3) * m - n - 2));
    if !nonzero(&d)? {
        return Err(Error::DegenerateScaling);
    }
    let b = normalize(&(&k * m - &k + m - n));
    let c1 = normalize(&(&b / &d));
    let c2 = normalize(&((&k - 2) / &d));
    let t = Expr::t();
    let required_q = normalize(&(Expr::rational(*gamma_amp) * t.pow(&c2)));
    let field = VectorField::new(
        normalize(&(&d * &t)),
        normalize(&(&b * Expr::x())),
        normalize(&((&k - 2) * Expr::u())),
    )?;
    let ansatz = similarity_ansatz(&field, spec)?;
    let p = Expr::phi(0);
    let w = Expr::omega();
    let lhs = normalize(
        &(third_derivative_of_power(n)
            + spec.eps_expr() * m * p.pow(&(m - 1)) * Expr::phi(1)
            - &c1 * &w * Expr::phi(1)
            + &c2 * &p),
    );
    let ode = ReducedODE {
        lhs,
        multiplier: normalize(&t.pow(&(&c2 - 1))),
    };
    if !ode.verify(&ansatz, spec)? {
        return Err(Error::ResidualHasX(format!("reduced problem does not factor for {spec}")));
    }
    Ok(BVPReduction {
        spec: spec.clone(),
        k,
        gamma_amp: *gamma_amp,
        c1,
        c2,
        required_q,
        field,
        ansatz,
        ode,
        initial: [*gamma_amp, Rational::zero(), Rational::zero()],
    })
}

/// Outcome for one boundary or initial condition.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionCheck {
    pub condition: String,
    pub passed: bool,
    /// The restricted coefficient that has to vanish.
    pub residue: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub checks: Vec<ConditionCheck>,
    /// The `q` forced by `tau*q' = eta(t, 0, q)` when the field is a pure
    /// scaling `a*t*d_t + ... + c*u*d_u`.
    pub induced_q: Option<String>,
}

impl InvarianceReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, condition: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.condition == condition)
    }
}

/// Infinitesimal invariance of `u(x, 0) = 0`, `x = 0`, `u(0, t) = q(t)`,
/// `u_x(0, t) = 0`, `u_xx(0, t) = 0` under `vf`.
pub fn bvp_invariance_check(spec: &EquationSpec, vf: &VectorField, q: &Expr) -> Result<InvarianceReport> {
    spec.validate()?;
    let q = normalize(q);
    let dq = differentiate(&q, &Symbol::T);
    let pr = prolong3(vf)?;
    let on_boundary = |e: &Expr| {
        normalize(&replace(e, &|s| match s {
            Symbol::X => Some(Expr::zero()),
            Symbol::Jet { t: 0, x: 0 } => Some(q.clone()),
            Symbol::Jet { t: 1, x: 0 } => Some(dq.clone()),
            Symbol::Jet { t: _, x: 1..=2 } => Some(Expr::zero()),
            _ => None,
        }))
    };
    let check = |name: &str, e: Expr| -> Result<ConditionCheck> {
        Ok(ConditionCheck {
            condition: name.into(),
            passed: !nonzero(&e)?,
            residue: e.to_string(),
        })
    };
    let tau0 = normalize(&replace(&vf.tau, &|s| (*s == Symbol::T).then(Expr::zero)));
    let eta0 = normalize(&replace(&vf.eta, &|s| match s {
        Symbol::T | Symbol::Jet { t: 0, x: 0 } => Some(Expr::zero()),
        _ => None,
    }));
    let mut checks = vec![check("initial: u(x, 0) = 0", normalize(&(tau0.powi(2) + eta0.powi(2))))?];
    checks.push(check("surface x = 0", on_boundary(&vf.xi))?);
    checks.push(check("u(0, t) = q(t)", on_boundary(&(&vf.eta - &vf.tau * &dq)))?);
    let cx = pr.coeff(0, 1).cloned().unwrap_or_else(Expr::zero);
    let cxx = pr.coeff(0, 2).cloned().unwrap_or_else(Expr::zero);
    checks.push(check("u_x(0, t) = 0", on_boundary(&cx))?);
    checks.push(check("u_xx(0, t) = 0", on_boundary(&cxx))?);

    let induced_q = scaling_profile(vf).map(|e| e.to_string());
    Ok(InvarianceReport { checks, induced_q })
}

/// `gammaAmp * t^(c/a)` for `tau = a*t`, `eta = c*u`.
fn scaling_profile(vf: &VectorField) -> Option<Expr> {
    let [a1, tx, tu, a0] = affine_parts(&vf.tau, "tau").ok()?;
    let [ct, cx, c, c0] = affine_parts(&vf.eta, "eta").ok()?;
    let zero = |e: &Expr| e.is_zero_literal();
    if a1.is_zero_literal() || ![&tx, &tu, &a0, &ct, &cx, &c0].into_iter().all(zero) {
        return None;
    }
    Some(normalize(&(Expr::param("gammaAmp") * Expr::t().pow(&(c / a1)))))
}
