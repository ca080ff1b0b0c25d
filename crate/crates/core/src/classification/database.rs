//! The bundled case tables, guard evaluation and the generator defect sweep.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EquationSpec, FSpec};
use crate::error::{Error, Result};
use crate::prolongation::{commutator, is_symmetry, span_membership, EquationForm, VectorField};
use crate::symkernel::{is_zero, parse, replace, Expr, Rational, Symbol, ZeroTest};

const BUNDLED: &str = include_str!("../../data/cases.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Table {
    T1,
    T2,
    R1,
    R2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FKind {
    Any,
    One,
    Power,
    Exp,
    ExpArctan,
    PowerShifted,
    TExpInv,
    Linear,
}

impl FKind {
    fn has_k(self) -> bool {
        matches!(self, FKind::Power | FKind::ExpArctan | FKind::PowerShifted)
    }

    fn admits(self, f: &FSpec, exact: bool) -> bool {
        let unit = |c: &Rational| !exact || *c == Rational::from(1);
        match (self, f) {
            (FKind::Any, _) => true,
            (FKind::One, FSpec::One) => true,
            (FKind::One, FSpec::Const(c)) => unit(c),
            (FKind::Power, FSpec::Power { c, .. }) => unit(c),
            (FKind::Power, FSpec::Linear) => true,
            (FKind::Exp, FSpec::Exp { c, lambda }) => unit(c) && *lambda == Rational::from(1),
            (FKind::ExpArctan, FSpec::ExpArctan { .. }) => true,
            (FKind::PowerShifted, FSpec::PowerShifted { .. }) => true,
            (FKind::TExpInv, FSpec::TExpInv) => true,
            (FKind::Linear, FSpec::Linear) => true,
            (FKind::Linear, FSpec::Power { c, k }) => {
                *c == Rational::from(1) && k.is_one_literal()
            }
            _ => false,
        }
    }

    /// Representative `f` with `k` and `beta` left as given.
    fn sample(self, k: &Expr, beta: &Expr) -> Option<Expr> {
        self.representative(k, beta)?.expr()
    }

    /// The row's `f` with `k` and `beta` filled in; `None` for `Any`.
    pub fn representative(self, k: &Expr, beta: &Expr) -> Option<FSpec> {
        Some(match self {
            FKind::Any => return None,
            FKind::One => FSpec::One,
            FKind::Power => FSpec::Power { c: 1.into(), k: k.clone() },
            FKind::Exp => FSpec::Exp { c: 1.into(), lambda: 1.into() },
            FKind::ExpArctan => FSpec::ExpArctan { k: k.clone() },
            FKind::PowerShifted => FSpec::PowerShifted { k: k.clone(), beta: beta.clone() },
            FKind::TExpInv => FSpec::TExpInv,
            FKind::Linear => FSpec::Linear,
        })
    }
}

/// Matching conditions of one row; `m` may mention `n`.
#[derive(Clone, Debug)]
pub struct Guard {
    pub n: Option<Expr>,
    pub n_ne: Vec<Expr>,
    pub m: Option<Expr>,
    pub m_ne: Vec<Expr>,
    pub f: FKind,
    pub k: Option<Expr>,
    pub k_ne: Vec<Expr>,
    pub eps: Option<i8>,
    /// The row requires `f` exactly, not up to a constant factor.
    pub f_exact: bool,
}

impl Guard {
    pub fn specificity(&self) -> usize {
        [
            self.n.is_some(),
            self.m.is_some(),
            self.f != FKind::Any,
            self.k.is_some(),
            self.eps.is_some(),
            self.f_exact,
        ]
        .iter()
        .filter(|b| **b)
        .count()
    }

    pub fn matches(&self, spec: &EquationSpec) -> Result<bool> {
        if self.eps.is_some_and(|e| e != spec.eps) {
            return Ok(false);
        }
        if !self.f.admits(&spec.f, self.f_exact) {
            return Ok(false);
        }
        let with_n = |e: &Expr| replace(e, &|s| (*s == Symbol::param("n")).then(|| spec.n.clone()));
        if !value_ok(&spec.n, self.n.as_ref(), &self.n_ne)? {
            return Ok(false);
        }
        let m_eq = self.m.as_ref().map(with_n);
        let m_ne: Vec<Expr> = self.m_ne.iter().map(with_n).collect();
        if !value_ok(&spec.m, m_eq.as_ref(), &m_ne)? {
            return Ok(false);
        }
        if self.f.has_k() {
            let k = spec.f.k().unwrap_or_else(Expr::zero);
            if !value_ok(&k, self.k.as_ref(), &self.k_ne)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn equal(a: &Expr, b: &Expr) -> Result<bool> {
    Ok(is_zero(&(a - b))?.is_zero())
}

fn value_ok(v: &Expr, eq: Option<&Expr>, ne: &[Expr]) -> Result<bool> {
    if let Some(e) = eq {
        if !equal(v, e)? {
            return Ok(false);
        }
    }
    for e in ne {
        if equal(v, e)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Hint {
    /// The hint applies when the numeric `k` lies below this value.
    pub k_below: String,
    pub text: String,
}

#[derive(Clone, Debug)]
pub struct CaseRecord {
    pub id: String,
    pub table: Table,
    pub label: String,
    pub guard: Guard,
    pub generators: Vec<VectorField>,
    pub notes: Option<String>,
    pub hint: Option<Hint>,
}

impl CaseRecord {
    /// Generators with the spec's parameters and, where possible, its `f`
    /// substituted.
    pub fn instantiate(&self, spec: &EquationSpec) -> Result<Vec<VectorField>> {
        let params = Params {
            n: spec.n.clone(),
            m: spec.m.clone(),
            eps: spec.eps_expr(),
            k: spec.f.k(),
            beta: match &spec.f {
                FSpec::PowerShifted { beta, .. } => Some(beta.clone()),
                _ => None,
            },
        };
        let (f, big_f) = (spec.f.expr(), spec.f.antiderivative());
        self.generators
            .iter()
            .map(|g| {
                let g = params.apply(g)?;
                let Some(f) = &f else { return Ok(g) };
                let needs_f_int = g.components().iter().any(|c| c.contains(&Symbol::FInt));
                if needs_f_int && big_f.is_none() {
                    return Ok(g);
                }
                g.substitute_f(f, big_f.as_ref())
            })
            .collect()
    }
}

struct Params {
    n: Expr,
    m: Expr,
    eps: Expr,
    k: Option<Expr>,
    beta: Option<Expr>,
}

impl Params {
    fn lookup(&self, s: &Symbol) -> Option<Expr> {
        let Symbol::Param(p) = s else { return None };
        match &**p {
            "n" => Some(self.n.clone()),
            "m" => Some(self.m.clone()),
            "eps" => Some(self.eps.clone()),
            "k" => self.k.clone(),
            "beta" => self.beta.clone(),
            _ => None,
        }
    }

    fn apply(&self, g: &VectorField) -> Result<VectorField> {
        let r = |e: &Expr| replace(e, &|s| self.lookup(s));
        VectorField::new(r(&g.tau), r(&g.xi), r(&g.eta))
    }
}

/// A looked-up row with its generators instantiated for the query.
#[derive(Clone, Debug)]
pub struct CaseMatch<'a> {
    pub record: &'a CaseRecord,
    pub generators: Vec<VectorField>,
    pub annotations: Vec<String>,
}

/// Outcome of one generator at one parameter setting.
#[derive(Clone, Debug)]
pub struct DefectCheck {
    pub case_id: String,
    pub generator: usize,
    pub setting: String,
    pub outcome: std::result::Result<ZeroTest, String>,
}

impl DefectCheck {
    pub fn passed(&self) -> bool {
        matches!(self.outcome, Ok(z) if z.is_zero())
    }
}

#[derive(Deserialize)]
struct RawDb {
    version: u32,
    cases: Vec<RawCase>,
}

#[derive(Deserialize)]
struct RawCase {
    id: String,
    table: Table,
    label: String,
    guard: RawGuard,
    generators: Vec<[String; 3]>,
    notes: Option<String>,
    hint: Option<Hint>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGuard {
    n: Option<String>,
    #[serde(default)]
    n_ne: Vec<String>,
    m: Option<String>,
    #[serde(default)]
    m_ne: Vec<String>,
    f: FKind,
    k: Option<String>,
    #[serde(default)]
    k_ne: Vec<String>,
    eps: Option<i8>,
    #[serde(default)]
    f_exact: bool,
}

#[derive(Debug)]
pub struct Database {
    pub version: u32,
    cases: Vec<CaseRecord>,
}

impl Database {
    /// The bundled tables; `validate` runs the full defect sweep first.
    pub fn load(validate: bool) -> Result<Database> {
        Database::from_json(BUNDLED, validate)
    }

    pub fn from_json(text: &str, validate: bool) -> Result<Database> {
        let raw: RawDb = serde_json::from_str(text)?;
        let cases = raw
            .cases
            .into_iter()
            .map(convert)
            .collect::<Result<Vec<_>>>()?;
        let db = Database {
            version: raw.version,
            cases,
        };
        if validate {
            if let Some(bad) = db.verify().into_iter().find(|c| !c.passed()) {
                return Err(Error::Database(format!(
                    "{} generator {} fails at {}: {:?}",
                    bad.case_id, bad.generator, bad.setting, bad.outcome
                )));
            }
        }
        Ok(db)
    }

    pub fn cases(&self) -> &[CaseRecord] {
        &self.cases
    }

    pub fn get(&self, id: &str) -> Option<&CaseRecord> {
        self.cases.iter().find(|c| c.id == id)
    }

    /// All matching rows, most specific first; ties keep table order.
    pub fn lookup(&self, spec: &EquationSpec) -> Result<Vec<CaseMatch<'_>>> {
        spec.validate()?;
        let mut hits = Vec::new();
        for (i, rec) in self.cases.iter().enumerate() {
            if rec.guard.matches(spec)? {
                hits.push((i, rec));
            }
        }
        hits.sort_by_key(|(i, rec)| (std::cmp::Reverse(rec.guard.specificity()), *i));
        hits.into_iter()
            .map(|(_, rec)| {
                let generators = rec.instantiate(spec)?;
                let mut annotations = Vec::new();
                for (i, g) in generators.iter().enumerate() {
                    if g.is_zero()? {
                        annotations.push(format!("generator {} vanishes for these parameters", i + 1));
                        if let Some(n) = &rec.notes {
                            annotations.push(n.clone());
                        }
                    }
                }
                if let (Some(h), Some(k)) = (&rec.hint, spec.f.k().and_then(|k| k.to_f64())) {
                    if let Some(below) = parse(&h.k_below)?.to_f64() {
                        if k < below {
                            annotations.push(h.text.clone());
                        }
                    }
                }
                if rec.table == Table::R1 {
                    if let Some(n) = &rec.notes {
                        annotations.push(n.clone());
                    }
                }
                Ok(CaseMatch {
                    record: rec,
                    generators,
                    annotations,
                })
            })
            .collect()
    }

    /// Defect of every generator over the parameter grid and at symbolic
    /// parameters.
    pub fn verify(&self) -> Vec<DefectCheck> {
        let jobs: Vec<(&CaseRecord, Setting)> = self
            .cases
            .iter()
            .flat_map(|c| settings(c).into_iter().map(move |s| (c, s)))
            .collect();
        jobs.par_iter()
            .flat_map_iter(|(rec, s)| run_setting(rec, s))
            .collect()
    }

    /// Pairwise commutators of every row's generators, tested for membership
    /// in the row's span at symbolic parameters and at the first
    /// `numeric` grid settings.
    pub fn closure(&self, numeric: usize) -> Vec<ClosureCheck> {
        let jobs: Vec<(&CaseRecord, Setting)> = self
            .cases
            .iter()
            .flat_map(|c| settings(c).into_iter().take(1 + numeric).map(move |s| (c, s)))
            .collect();
        jobs.par_iter()
            .flat_map_iter(|(rec, s)| closure_setting(rec, s))
            .collect()
    }

    /// Generators of a row at every setting of its verification sweep.
    pub fn instantiated(&self, id: &str) -> Option<Vec<(String, Vec<VectorField>)>> {
        let rec = self.get(id)?;
        Some(
            settings(rec)
                .iter()
                .filter_map(|s| Some((s.label.clone(), s.generators(rec).ok()?)))
                .collect(),
        )
    }

    /// Concrete specs from the numeric settings of a row's sweep.
    pub fn sample_specs(&self, id: &str) -> Option<Vec<EquationSpec>> {
        let rec = self.get(id)?;
        Some(settings(rec).iter().skip(1).filter_map(|s| s.spec(rec.guard.f).ok()).collect())
    }

    pub fn verify_case(&self, id: &str) -> Option<Vec<DefectCheck>> {
        let rec = self.get(id)?;
        Some(
            settings(rec)
                .par_iter()
                .flat_map_iter(|s| run_setting(rec, s))
                .collect(),
        )
    }
}

fn convert(c: RawCase) -> Result<CaseRecord> {
    let ctx = |e: crate::symkernel::KernelError| Error::Database(format!("{}: {e}", c.id));
    let p = |s: &String| parse(s).map_err(ctx);
    let opt = |s: &Option<String>| s.as_ref().map(p).transpose();
    let list = |v: &Vec<String>| v.iter().map(p).collect::<Result<Vec<_>>>();
    let g = &c.guard;
    let guard = Guard {
        n: opt(&g.n)?,
        n_ne: list(&g.n_ne)?,
        m: opt(&g.m)?,
        m_ne: list(&g.m_ne)?,
        f: g.f,
        k: opt(&g.k)?,
        k_ne: list(&g.k_ne)?,
        eps: g.eps,
        f_exact: g.f_exact,
    };
    if let Some(e) = guard.eps {
        if e != 1 && e != -1 {
            return Err(Error::Database(format!("{}: eps guard must be +1 or -1", c.id)));
        }
    }
    let generators = c
        .generators
        .iter()
        .map(|[a, b, d]| {
            VectorField::new(p(a)?, p(b)?, p(d)?)
                .map_err(|e| Error::Database(format!("{}: {e}", c.id)))
        })
        .collect::<Result<Vec<_>>>()?;
    if generators.is_empty() {
        return Err(Error::Database(format!("{}: no generators", c.id)));
    }
    Ok(CaseRecord {
        id: c.id,
        table: c.table,
        label: c.label,
        guard,
        generators,
        notes: c.notes,
        hint: c.hint,
    })
}

static DEFAULT: OnceLock<Database> = OnceLock::new();

/// The bundled tables, loaded once without the sweep.
pub fn default_database() -> &'static Database {
    DEFAULT.get_or_init(|| Database::load(false).expect("bundled case tables parse"))
}

pub fn lookup_case(spec: &EquationSpec) -> Result<Vec<CaseMatch<'static>>> {
    default_database().lookup(spec)
}

/// One instantiation of a row's free parameters.
#[derive(Clone, Debug)]
struct Setting {
    label: String,
    params: Params,
    f: Option<Expr>,
    f_int: Option<Expr>,
}

impl Clone for Params {
    fn clone(&self) -> Self {
        Params {
            n: self.n.clone(),
            m: self.m.clone(),
            eps: self.eps.clone(),
            k: self.k.clone(),
            beta: self.beta.clone(),
        }
    }
}

impl std::fmt::Debug for Params {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "n={}, m={}, eps={}", self.n, self.m, self.eps)?;
        if let Some(k) = &self.k {
            write!(f, ", k={k}")?;
        }
        if let Some(b) = &self.beta {
            write!(f, ", beta={b}")?;
        }
        Ok(())
    }
}

const N_GRID: [(i128, i128); 7] = [(2, 1), (3, 1), (-2, 1), (1, 2), (5, 2), (-1, 3), (1, 3)];
const M_GRID: [(i128, i128); 7] = [(3, 1), (-1, 1), (1, 2), (5, 2), (4, 3), (-3, 2), (2, 1)];
const K_GRID: [(i128, i128); 7] = [(2, 1), (3, 1), (-2, 1), (1, 2), (5, 2), (-1, 1), (1, 3)];
const BETA_GRID: [(i128, i128); 3] = [(1, 1), (2, 1), (-1, 2)];
const PER_PARAM: usize = 5;

/// Concrete `f` samples (with antiderivatives) for rows that allow any `f`
/// and whose generators mention it.
const F_SAMPLES: [(&str, &str); 3] = [("t^2+1", "t^3/3+t"), ("exp(t)", "exp(t)"), ("2+t^(-2)", "2*t-1/t")];

fn grid(points: &[(i128, i128)], excluded: &[Expr]) -> Vec<Expr> {
    points
        .iter()
        .map(|(p, q)| Expr::frac(*p, *q))
        .filter(|v| excluded.iter().all(|e| !equal(v, e).unwrap_or(true)))
        .take(PER_PARAM)
        .collect()
}

fn settings(rec: &CaseRecord) -> Vec<Setting> {
    let g = &rec.guard;
    let mentions_f = rec.generators.iter().any(|v| {
        v.components()
            .iter()
            .any(|c| c.any_symbol(&|s| matches!(s, Symbol::FDeriv(_) | Symbol::FInt)))
    });
    let mut out = Vec::new();

    // Fully symbolic parameters.
    let sym = |name: &str| Expr::param(name);
    let n_sym = g.n.clone().unwrap_or_else(|| sym("n"));
    let with_n = |e: &Expr, n: &Expr| replace(e, &|s| (*s == Symbol::param("n")).then(|| n.clone()));
    let params = Params {
        m: g.m.as_ref().map(|m| with_n(m, &n_sym)).unwrap_or_else(|| sym("m")),
        n: n_sym,
        eps: g.eps.map(|e| Expr::int(e as i128)).unwrap_or_else(Expr::eps),
        k: g.f.has_k().then(|| g.k.clone().unwrap_or_else(|| sym("k"))),
        beta: (g.f == FKind::PowerShifted).then(|| sym("beta")),
    };
    let f = g.f.sample(
        params.k.as_ref().unwrap_or(&Expr::zero()),
        params.beta.as_ref().unwrap_or(&Expr::zero()),
    );
    out.push(Setting {
        label: format!("{params:?} (symbolic)"),
        params,
        f,
        f_int: None,
    });

    // Numeric grid.
    let ns = match &g.n {
        Some(n) => vec![n.clone()],
        None => grid(&N_GRID, &[g.n_ne.clone(), vec![Expr::zero()]].concat()),
    };
    let epss: Vec<i8> = match g.eps {
        Some(e) => vec![e],
        None => vec![1, -1],
    };
    let ks: Vec<Option<Expr>> = if !g.f.has_k() {
        vec![None]
    } else if let Some(k) = &g.k {
        vec![Some(k.clone())]
    } else {
        grid(&K_GRID, &g.k_ne).into_iter().map(Some).collect()
    };
    let betas: Vec<Option<Expr>> = if g.f == FKind::PowerShifted {
        grid(&BETA_GRID, &[]).into_iter().map(Some).collect()
    } else {
        vec![None]
    };
    for n in &ns {
        let ms = match &g.m {
            Some(m) => vec![with_n(m, n)],
            None => {
                let mut excl: Vec<Expr> = g.m_ne.iter().map(|m| with_n(m, n)).collect();
                if n.is_one_literal() {
                    excl.extend([Expr::zero(), Expr::one()]);
                }
                grid(&M_GRID, &excl)
            }
        };
        for m in &ms {
            for eps in &epss {
                for k in &ks {
                    for beta in &betas {
                        let params = Params {
                            n: n.clone(),
                            m: m.clone(),
                            eps: Expr::int(*eps as i128),
                            k: k.clone(),
                            beta: beta.clone(),
                        };
                        let label = format!("{params:?}");
                        let f = g.f.sample(
                            k.as_ref().unwrap_or(&Expr::zero()),
                            beta.as_ref().unwrap_or(&Expr::zero()),
                        );
                        out.push(Setting {
                            label: label.clone(),
                            params: params.clone(),
                            f,
                            f_int: None,
                        });
                        if g.f == FKind::Any && mentions_f {
                            for (fs, fi) in F_SAMPLES {
                                out.push(Setting {
                                    label: format!("{label}, f={fs}"),
                                    params: params.clone(),
                                    f: Some(parse(fs).expect("sample parses")),
                                    f_int: Some(parse(fi).expect("sample parses")),
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

impl Setting {
    fn spec(&self, kind: FKind) -> Result<EquationSpec> {
        let eps = self.params.eps.as_integer().unwrap_or(1) as i8;
        let zero = Expr::zero();
        let structural = kind.representative(
            self.params.k.as_ref().unwrap_or(&zero),
            self.params.beta.as_ref().unwrap_or(&zero),
        );
        let f = match (&self.f, structural) {
            (_, Some(f)) => f,
            (Some(f), None) => FSpec::from_expr(f)?,
            (None, None) => FSpec::arbitrary(),
        };
        EquationSpec::new(self.params.m.clone(), self.params.n.clone(), eps, f)
    }

    fn generators(&self, rec: &CaseRecord) -> Result<Vec<VectorField>> {
        rec.generators
            .iter()
            .map(|g| {
                let g = self.params.apply(g)?;
                match &self.f {
                    Some(f) if self.f_int.is_some() => g.substitute_f(f, self.f_int.as_ref()),
                    _ => Ok(g),
                }
            })
            .collect()
    }
}

/// `[G_i, G_j]` against the span of a row's generators.
#[derive(Clone, Debug)]
pub struct ClosureCheck {
    pub case_id: String,
    pub setting: String,
    pub pair: (usize, usize),
    pub outcome: std::result::Result<Option<Vec<Expr>>, String>,
}

impl ClosureCheck {
    pub fn passed(&self) -> bool {
        matches!(self.outcome, Ok(Some(_)))
    }
}

fn closure_setting(rec: &CaseRecord, s: &Setting) -> Vec<ClosureCheck> {
    let check = |pair, outcome| ClosureCheck {
        case_id: rec.id.clone(),
        setting: s.label.clone(),
        pair,
        outcome,
    };
    let gens = match s.generators(rec) {
        Ok(g) => g,
        Err(e) => return vec![check((0, 0), Err(e.to_string()))],
    };
    let mut out = Vec::new();
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            let c = commutator(&gens[i], &gens[j]);
            out.push(check((i, j), span_membership(&c, &gens).map_err(|e| e.to_string())));
        }
    }
    out
}

fn run_setting(rec: &CaseRecord, s: &Setting) -> Vec<DefectCheck> {
    let form = EquationForm::new(
        s.params.m.clone(),
        s.params.n.clone(),
        s.params.eps.clone(),
        s.f.clone(),
        s.f_int.clone(),
    );
    rec.generators
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let outcome = form
                .as_ref()
                .map_err(|e| e.to_string())
                .and_then(|form| {
                    let g = s.params.apply(g).map_err(|e| e.to_string())?;
                    let g = match &s.f {
                        Some(f) if s.f_int.is_some() => {
                            g.substitute_f(f, s.f_int.as_ref()).map_err(|e| e.to_string())?
                        }
                        _ => g,
                    };
                    is_symmetry(&g, form).map_err(|e| e.to_string())
                });
            DefectCheck {
                case_id: rec.id.clone(),
                generator: i,
                setting: s.label.clone(),
                outcome,
            }
        })
        .collect()
}
