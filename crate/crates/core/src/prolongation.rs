//! Third prolongation, symmetry defect modulo the equation, commutators and
//! span membership.

use std::collections::BTreeMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symkernel::{
    differentiate, eval_numeric, is_zero, is_zero_with, normalize, parse, rational_approx, substitute,
    substitute_f, total_derivative, Bindings, Direction, Expr, KernelError, Symbol, ZeroConfig,
    ZeroTest,
};

/// `tau*d_t + xi*d_x + eta*d_u` with coefficients in `(t, x, u)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    pub tau: Expr,
    pub xi: Expr,
    pub eta: Expr,
}

impl VectorField {
    pub fn new(tau: Expr, xi: Expr, eta: Expr) -> Result<VectorField> {
        let (tau, xi, eta) = (normalize(&tau), normalize(&xi), normalize(&eta));
        for c in [&tau, &xi, &eta] {
            if c.any_symbol(&|s| s.jet_order().is_some_and(|o| o > 0)) {
                return Err(Error::InvalidField(format!("coefficient {c} depends on derivatives of u")));
            }
            if c.any_symbol(&|s| matches!(s, Symbol::Omega | Symbol::Phi(_))) {
                return Err(Error::InvalidField(format!("coefficient {c} uses reduction variables")));
            }
        }
        Ok(VectorField { tau, xi, eta })
    }

    pub fn parse(tau: &str, xi: &str, eta: &str) -> Result<VectorField> {
        VectorField::new(parse(tau)?, parse(xi)?, parse(eta)?)
    }

    pub fn zero() -> VectorField {
        VectorField {
            tau: Expr::zero(),
            xi: Expr::zero(),
            eta: Expr::zero(),
        }
    }

    pub fn d_x() -> VectorField {
        VectorField {
            tau: Expr::zero(),
            xi: Expr::one(),
            eta: Expr::zero(),
        }
    }

    pub fn components(&self) -> [&Expr; 3] {
        [&self.tau, &self.xi, &self.eta]
    }

    fn map(&self, g: impl Fn(&Expr) -> Expr) -> VectorField {
        VectorField {
            tau: g(&self.tau),
            xi: g(&self.xi),
            eta: g(&self.eta),
        }
    }

    pub fn scale(&self, c: &Expr) -> VectorField {
        self.map(|e| c * e)
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField {
            tau: &self.tau + &other.tau,
            xi: &self.xi + &other.xi,
            eta: &self.eta + &other.eta,
        }
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        self.add(&other.scale(&Expr::int(-1)))
    }

    /// Applies the field as a derivation to a function of `(t, x, u)`.
    pub fn apply(&self, g: &Expr) -> Expr {
        let g = normalize(g);
        &self.tau * differentiate(&g, &Symbol::T)
            + &self.xi * differentiate(&g, &Symbol::X)
            + &self.eta * differentiate(&g, &Symbol::u())
    }

    /// Substitutes concrete values for symbols in every component.
    pub fn substitute(&self, b: &Bindings) -> Result<VectorField> {
        Ok(VectorField {
            tau: substitute(&self.tau, b)?,
            xi: substitute(&self.xi, b)?,
            eta: substitute(&self.eta, b)?,
        })
    }

    pub fn substitute_f(&self, f: &Expr, antiderivative: Option<&Expr>) -> Result<VectorField> {
        Ok(VectorField {
            tau: substitute_f(&self.tau, f, antiderivative)?,
            xi: substitute_f(&self.xi, f, antiderivative)?,
            eta: substitute_f(&self.eta, f, antiderivative)?,
        })
    }

    pub fn is_zero(&self) -> Result<bool> {
        for c in self.components() {
            if !is_zero(c)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (c, d) in [(&self.tau, "d_t"), (&self.xi, "d_x"), (&self.eta, "d_u")] {
            if c.is_zero_literal() {
                continue;
            }
            if c.is_one_literal() {
                parts.push(d.to_string());
            } else {
                parts.push(format!("({c})*{d}"));
            }
        }
        if parts.is_empty() {
            return f.write_str("0");
        }
        f.write_str(&parts.join(" + "))
    }
}

/// Serialized as three expression strings.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct FieldText {
    pub tau: String,
    pub xi: String,
    pub eta: String,
}

impl From<&VectorField> for FieldText {
    fn from(v: &VectorField) -> Self {
        FieldText {
            tau: v.tau.to_string(),
            xi: v.xi.to_string(),
            eta: v.eta.to_string(),
        }
    }
}

impl FieldText {
    pub fn field(&self) -> Result<VectorField> {
        VectorField::parse(&self.tau, &self.xi, &self.eta)
    }
}

/// `u_t + eps*(u^m)_x + f(t)*(u^n)_xxx`, expanded.
#[derive(Clone, Debug)]
pub struct EquationForm {
    pub m: Expr,
    pub n: Expr,
    pub eps: Expr,
    /// Concrete `f(t)`; `None` keeps `f` arbitrary.
    pub f: Option<Expr>,
    /// Antiderivative of the concrete `f`, needed when fields mention `F`.
    pub f_int: Option<Expr>,
    lhs: Expr,
    /// `lhs - u_t`.
    rest: Expr,
}

impl EquationForm {
    pub fn new(m: Expr, n: Expr, eps: Expr, f: Option<Expr>, f_int: Option<Expr>) -> Result<EquationForm> {
        let (m, n, eps) = (normalize(&m), normalize(&n), normalize(&eps));
        if n.is_zero_literal() {
            return Err(Error::InvalidSpec("n = 0".into()));
        }
        if n.is_one_literal() && (m.is_zero_literal() || m.is_one_literal()) {
            return Err(Error::LinearEquation {
                n: n.to_string(),
                m: m.to_string(),
            });
        }
        let u = Expr::u();
        let ux = Expr::jet(0, 1);
        let uxx = Expr::jet(0, 2);
        let uxxx = Expr::jet(0, 3);
        let one = Expr::one();
        let conv = &eps * &m * u.pow(&(&m - &one)) * &ux;
        let disp = &n
            * Expr::f()
            * (u.pow(&(&n - &one)) * &uxxx
                + Expr::int(3) * (&n - &one) * u.pow(&(&n - 2)) * &ux * &uxx
                + (&n - &one) * (&n - 2) * u.pow(&(&n - 3)) * ux.powi(3));
        let rest = conv + disp;
        let lhs = Expr::jet(1, 0) + &rest;
        Ok(EquationForm {
            m,
            n,
            eps,
            f: f.map(|e| normalize(&e)),
            f_int: f_int.map(|e| normalize(&e)),
            lhs,
            rest,
        })
    }

    /// Left-hand side with `f` kept as an opaque symbol.
    pub fn lhs(&self) -> &Expr {
        &self.lhs
    }

    /// Left-hand side with the concrete `f` substituted, if there is one.
    pub fn lhs_concrete(&self) -> Result<Expr> {
        self.concretize(&self.lhs)
    }

    pub fn concretize(&self, e: &Expr) -> Result<Expr> {
        match &self.f {
            Some(f) => Ok(substitute_f(e, f, self.f_int.as_ref())?),
            None => Ok(e.clone()),
        }
    }

    /// The solved form `u_t = -(...)`.
    pub fn u_t(&self) -> Expr {
        -&self.rest
    }
}

/// Coefficients of the prolonged field on the jet symbols used by the defect.
#[derive(Clone, Debug)]
pub struct ProlongedField {
    pub base: VectorField,
    pub coeffs: BTreeMap<Symbol, Expr>,
}

impl ProlongedField {
    pub fn coeff(&self, t: u8, x: u8) -> Option<&Expr> {
        self.coeffs.get(&Symbol::Jet { t, x })
    }
}

/// Jet symbols (t-order, x-order) covered by [`prolong3`], with the parent each
/// one is derived from and the direction of that step.
const PROLONG_STEPS: [((u8, u8), (u8, u8), Direction); 6] = [
    ((1, 0), (0, 0), Direction::T),
    ((0, 1), (0, 0), Direction::X),
    ((0, 2), (0, 1), Direction::X),
    ((0, 3), (0, 2), Direction::X),
    ((1, 1), (1, 0), Direction::X),
    ((1, 2), (1, 1), Direction::X),
];

pub fn prolong3(vf: &VectorField) -> Result<ProlongedField> {
    let mut coeffs: BTreeMap<Symbol, Expr> = BTreeMap::new();
    coeffs.insert(Symbol::u(), vf.eta.clone());
    for ((jt, jx), (pt, px), dir) in PROLONG_STEPS {
        let parent = coeffs[&Symbol::Jet { t: pt, x: px }].clone();
        let d_tau = total_derivative(&vf.tau, dir)?;
        let d_xi = total_derivative(&vf.xi, dir)?;
        let c = total_derivative(&parent, dir)?
            - d_tau * Expr::jet(pt + 1, px)
            - d_xi * Expr::jet(pt, px + 1);
        coeffs.insert(Symbol::Jet { t: jt, x: jx }, c);
    }
    coeffs.remove(&Symbol::u());
    Ok(ProlongedField {
        base: vf.clone(),
        coeffs,
    })
}

/// `Gamma^(3)[lhs]` with `u_t`, `u_tx`, `u_txx` eliminated via the equation, and
/// the concrete `f` (if any) substituted.
pub fn symmetry_defect(vf: &VectorField, eq: &EquationForm) -> Result<Expr> {
    let pr = prolong3(vf)?;
    let lhs = eq.lhs();
    let mut acc = vec![
        &vf.tau * differentiate(lhs, &Symbol::T),
        &vf.xi * differentiate(lhs, &Symbol::X),
        &vf.eta * differentiate(lhs, &Symbol::u()),
    ];
    for (sym, c) in &pr.coeffs {
        let d = differentiate(lhs, sym);
        if !d.is_zero_literal() {
            acc.push(c * d);
        }
    }
    let raw = Expr::sum(acc);
    let on_shell = eliminate_time_derivatives(&raw, eq)?;
    eq.concretize(&on_shell)
}

fn eliminate_time_derivatives(e: &Expr, eq: &EquationForm) -> Result<Expr> {
    let mut b = Bindings::new();
    let ut = eq.u_t();
    b.insert(Symbol::Jet { t: 1, x: 0 }, ut.clone());
    let mut d = ut;
    for x in 1..=3u8 {
        let sym = Symbol::Jet { t: 1, x };
        let needed = e.contains(&sym);
        // Later orders depend on earlier ones only through D_x; stop once
        // nothing higher is present.
        if !(x..=3).any(|j| e.contains(&Symbol::Jet { t: 1, x: j })) {
            break;
        }
        d = total_derivative(&d, Direction::X)?;
        if needed {
            b.insert(sym, d.clone());
        }
    }
    let out = substitute(e, &b)?;
    if out.any_symbol(&|s| matches!(s, Symbol::Jet { t, .. } if *t > 0)) {
        return Err(Error::Unsupported(
            "on-shell elimination of higher time derivatives (tau must depend on t only)".into(),
        ));
    }
    Ok(out)
}

pub fn is_symmetry(vf: &VectorField, eq: &EquationForm) -> Result<ZeroTest> {
    Ok(is_zero(&symmetry_defect(vf, eq)?)?)
}

/// As [`is_symmetry`] with an explicit zero-test configuration (sampling seed).
pub fn is_symmetry_with(vf: &VectorField, eq: &EquationForm, cfg: &ZeroConfig) -> Result<ZeroTest> {
    Ok(is_zero_with(&symmetry_defect(vf, eq)?, cfg)?)
}

/// `[a, b]` with components `a(b^i) - b(a^i)`.
pub fn commutator(a: &VectorField, b: &VectorField) -> VectorField {
    VectorField {
        tau: a.apply(&b.tau) - b.apply(&a.tau),
        xi: a.apply(&b.xi) - b.apply(&a.xi),
        eta: a.apply(&b.eta) - b.apply(&a.eta),
    }
}

/// Splits a normalized term into its constant factor (numbers and parameters)
/// and the remaining variable monomial.
fn split_constant(term: &Expr) -> (Expr, Expr) {
    let (c, mono) = term.split_coefficient();
    let mut consts = vec![Expr::rational(c)];
    let mut vars = Vec::new();
    for f in mono.factors() {
        if f.is_constant() {
            consts.push(f);
        } else {
            vars.push(f);
        }
    }
    (Expr::product(consts), Expr::product(vars))
}

fn nonzero(e: &Expr) -> Result<bool> {
    if e.is_zero_literal() {
        return Ok(false);
    }
    Ok(!is_zero(e)?.is_zero())
}

/// Finds constants `c_i` with `v = sum c_i basis_i`.
///
/// Coefficients are matched monomial by monomial; when that is inconsistent
/// (e.g. `sin^2 + cos^2` is not recognized as 1) a numeric least-squares fit is
/// rationalized and re-verified with the zero test.
pub fn span_membership(v: &VectorField, basis: &[VectorField]) -> Result<Option<Vec<Expr>>> {
    if basis.is_empty() {
        return Err(Error::InvalidField("empty basis".into()));
    }
    let nb = basis.len();
    let mut rows: BTreeMap<(usize, Expr), Vec<Expr>> = BTreeMap::new();
    let mut put = |comp: usize, e: &Expr, col: usize| {
        for term in e.terms() {
            let (c, key) = split_constant(&term);
            let row = rows
                .entry((comp, key))
                .or_insert_with(|| vec![Expr::zero(); nb + 1]);
            row[col] = &row[col] + &c;
        }
    };
    for (j, b) in basis.iter().enumerate() {
        for (comp, e) in b.components().into_iter().enumerate() {
            put(comp, e, j);
        }
    }
    for (comp, e) in v.components().into_iter().enumerate() {
        put(comp, e, nb);
    }
    let matrix: Vec<Vec<Expr>> = rows.into_values().collect();
    match solve_exact(matrix, nb)? {
        Some(c) => Ok(Some(c)),
        None => numeric_span(v, basis),
    }
}

fn solve_exact(mut rows: Vec<Vec<Expr>>, ncols: usize) -> Result<Option<Vec<Expr>>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let mut choice = None;
        for (i, row) in rows.iter().enumerate().skip(r) {
            if nonzero(&row[col])? {
                let numeric = row[col].as_rational().is_some();
                if choice.is_none() || numeric {
                    choice = Some(i);
                }
                if numeric {
                    break;
                }
            }
        }
        let Some(p) = choice else { continue };
        rows.swap(r, p);
        let inv = rows[r][col].recip();
        rows[r] = rows[r].iter().map(|e| e * &inv).collect();
        for i in 0..rows.len() {
            if i == r || rows[i][col].is_zero_literal() {
                continue;
            }
            let factor = rows[i][col].clone();
            let pivot_row = rows[r].clone();
            for (x, pr) in rows[i].iter_mut().zip(&pivot_row) {
                *x = &*x - &factor * pr;
            }
        }
        pivots.push(col);
        r += 1;
    }
    for row in &rows[r..] {
        if nonzero(&row[ncols])? {
            return Ok(None);
        }
    }
    if pivots.len() < ncols {
        return Err(Error::AmbiguousSpan);
    }
    Ok(Some((0..ncols).map(|i| rows[i][ncols].clone()).collect()))
}

fn numeric_span(v: &VectorField, basis: &[VectorField]) -> Result<Option<Vec<Expr>>> {
    let mut symbols = v.tau.free_symbols();
    for f in std::iter::once(v).chain(basis) {
        for c in f.components() {
            symbols.extend(c.free_symbols());
        }
    }
    // Coefficients that depend on parameters cannot be recovered by a rational fit.
    if symbols.iter().any(|s| matches!(s, Symbol::Param(_)) && !s.is_eps()) {
        return Ok(None);
    }
    let symbols: Vec<Symbol> = symbols.into_iter().collect();
    let nb = basis.len();
    let cfg = ZeroConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let mut a: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut attempts = 0;
    while a.len() < 3 * (nb + 6) && attempts < 200 {
        attempts += 1;
        let pt = crate::symkernel::sample_point(&symbols, &cfg, &mut rng);
        let mut block = Vec::new();
        let mut ok = true;
        for comp in 0..3 {
            let mut row = Vec::with_capacity(nb);
            for b in basis {
                match eval_numeric(b.components()[comp], &pt) {
                    Ok(val) => row.push(val),
                    Err(_) => ok = false,
                }
            }
            match eval_numeric(v.components()[comp], &pt) {
                Ok(val) => block.push((row, val)),
                Err(_) => ok = false,
            }
        }
        if ok {
            for (row, val) in block {
                a.push(row);
                rhs.push(val);
            }
        }
    }
    let Some(sol) = least_squares(&a, &rhs, nb) else {
        return Ok(None);
    };
    let mut coeffs = Vec::with_capacity(nb);
    for c in sol {
        match rational_approx(c, 10_000) {
            Some(q) if (crate::symkernel::rational_to_f64(&q).unwrap_or(f64::NAN) - c).abs() < 1e-7 => {
                coeffs.push(Expr::rational(q))
            }
            _ => return Ok(None),
        }
    }
    let mut combo = VectorField::zero();
    for (c, b) in coeffs.iter().zip(basis) {
        combo = combo.add(&b.scale(c));
    }
    match v.sub(&combo).is_zero() {
        Ok(true) => Ok(Some(coeffs)),
        Ok(false) => Ok(None),
        Err(Error::Kernel(KernelError::EvalDomain(_))) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Normal equations with partial pivoting; `None` when singular.
fn least_squares(a: &[Vec<f64>], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = vec![vec![0.0; n + 1]; n];
    for (row, &rhs) in a.iter().zip(b) {
        for i in 0..n {
            for j in 0..n {
                m[i][j] += row[i] * row[j];
            }
            m[i][n] += row[i] * rhs;
        }
    }
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[p][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, p);
        for i in 0..n {
            if i != col {
                let f = m[i][col] / m[col][col];
                for j in col..=n {
                    m[i][j] -= f * m[col][j];
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}
