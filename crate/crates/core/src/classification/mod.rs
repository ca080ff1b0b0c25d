//! Case tables for the class `u_t + eps*(u^m)_x + f(t)*(u^n)_xxx = 0` and
//! its equivalence transformations.

mod database;
mod equiv;
mod fspec;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prolongation::EquationForm;
use crate::symkernel::{differentiate, normalize, parse, replace, Expr, Symbol};

pub use database::{
    default_database, lookup_case, CaseMatch, ClosureCheck, CaseRecord, Database, DefectCheck, FKind, Guard, Table,
};
pub use equiv::{
    apply_equiv, canonicalize, compose_equiv, invert_equiv, invert_time_map, push_solution,
    push_solution_expr, reduce_g_class, EquivTransform, PointMap, Solution,
};
pub use fspec::{integrate_t, FSpec};

/// One member `(m, n, eps, f)` of the class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationSpec {
    pub m: Expr,
    pub n: Expr,
    pub eps: i8,
    pub f: FSpec,
}

impl EquationSpec {
    /// For `m = 0` the convective term vanishes and `eps` is stored as +1.
    pub fn new(m: Expr, n: Expr, eps: i8, f: FSpec) -> Result<EquationSpec> {
        let m = normalize(&m);
        let eps = if m.is_zero_literal() && eps == -1 { 1 } else { eps };
        let spec = EquationSpec {
            m,
            n: normalize(&n),
            eps,
            f,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn parse(m: &str, n: &str, eps: i8, f: &str) -> Result<EquationSpec> {
        EquationSpec::new(parse(m)?, parse(n)?, eps, FSpec::parse(f)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps != 1 && self.eps != -1 {
            return Err(Error::InvalidSpec(format!("eps must be +1 or -1, got {}", self.eps)));
        }
        if self.n.is_zero_literal() {
            return Err(Error::InvalidSpec("n = 0".into()));
        }
        if self.n.is_one_literal() && (self.m.is_zero_literal() || self.m.is_one_literal()) {
            return Err(Error::LinearEquation {
                n: self.n.to_string(),
                m: self.m.to_string(),
            });
        }
        for (name, v) in [("m", &self.m), ("n", &self.n)] {
            if !v.is_constant() {
                return Err(Error::InvalidSpec(format!("{name} must be a constant, got {v}")));
            }
        }
        match &self.f {
            FSpec::Const(c) if *c == 0.into() => Err(Error::InvalidSpec("f = 0".into())),
            FSpec::Power { k, .. } if k.is_zero_literal() => {
                Err(Error::InvalidSpec("power form needs k != 0".into()))
            }
            FSpec::PowerShifted { beta, .. } if beta.is_zero_literal() => {
                Err(Error::InvalidSpec("shifted power form needs beta != 0".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn eps_expr(&self) -> Expr {
        Expr::int(self.eps as i128)
    }

    pub fn form(&self) -> Result<EquationForm> {
        EquationForm::new(
            self.m.clone(),
            self.n.clone(),
            self.eps_expr(),
            self.f.expr(),
            self.f.antiderivative(),
        )
    }

    /// Left-hand side of the equation evaluated on `u(t, x)`.
    pub fn residual(&self, u: &Expr) -> Result<Expr> {
        let f = self
            .f
            .expr()
            .ok_or_else(|| Error::InvalidSpec("residual needs a concrete f".into()))?;
        let lhs = self.form()?.lhs().clone();
        let lhs = crate::symkernel::substitute_f(&lhs, &f, None)?;
        let u = normalize(u);
        let mut derivs = std::collections::BTreeMap::new();
        for s in lhs.free_symbols() {
            if let Symbol::Jet { t, x } = s {
                let mut d = u.clone();
                for _ in 0..t {
                    d = differentiate(&d, &Symbol::T);
                }
                for _ in 0..x {
                    d = differentiate(&d, &Symbol::X);
                }
                derivs.insert(s, d);
            }
        }
        Ok(replace(&lhs, &|s| derivs.get(s).cloned()))
    }
}

impl fmt::Display for EquationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m = {}, n = {}, eps = {}, f = {}", self.m, self.n, self.eps, self.f)
    }
}

/// Serializable form used by the CLI and the FFI.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpecText {
    pub m: String,
    pub n: String,
    #[serde(default = "one_i8")]
    pub eps: i8,
    #[serde(default = "arbitrary_f")]
    pub f: String,
}

fn one_i8() -> i8 {
    1
}

fn arbitrary_f() -> String {
    "f".into()
}

impl SpecText {
    pub fn spec(&self) -> Result<EquationSpec> {
        EquationSpec::parse(&self.m, &self.n, self.eps, &self.f)
    }
}

impl From<&EquationSpec> for SpecText {
    fn from(s: &EquationSpec) -> Self {
        SpecText {
            m: s.m.to_string(),
            n: s.n.to_string(),
            eps: s.eps,
            f: s.f.to_string(),
        }
    }
}
