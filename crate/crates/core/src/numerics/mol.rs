//! Method of lines for `u_t + eps*(u^m)_x + f(t)*(u^n)_xxx = 0` on `[0, L]`.

use std::sync::Arc;

use serde_json::json;

use super::grid::FieldGrid;
use crate::classification::{EquationSpec, Solution};
use crate::error::{Error, Result};
use crate::symkernel::{Compiled, Expr, Symbol};

pub type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Stability constant above which a caller-fixed `dt` is rejected.
pub const CFL_MAX: f64 = 1.0;

#[derive(Clone)]
pub enum LeftBoundary {
    /// `u(0,t) = q(t)`, `u_x(0,t) = u_xx(0,t) = 0`; `dq` is `q'`.
    Bvp { q: Scalar, dq: Scalar },
    /// Node 0 and the ghost node taken from a known solution.
    Exact(Solution),
}

#[derive(Clone)]
pub enum RightBoundary {
    /// The last node evolves with `u = 0` beyond `L`.
    ZeroExtension,
    Exact(Solution),
}

#[derive(Clone)]
pub struct BoundarySpec {
    pub left: LeftBoundary,
    pub right: RightBoundary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PdeGrid {
    pub length: f64,
    /// Number of cells; nodes are `0..=n`.
    pub n: usize,
    pub t_span: (f64, f64),
    pub cfl: f64,
    /// Overrides the CFL-derived step.
    pub dt: Option<f64>,
    pub upwind: bool,
    /// Output times, evenly spaced over `t_span`.
    pub snapshots: usize,
}

impl PdeGrid {
    pub fn new(length: f64, n: usize, t_span: (f64, f64)) -> PdeGrid {
        PdeGrid {
            length,
            n,
            t_span,
            cfl: 0.4,
            dt: None,
            upwind: false,
            snapshots: 11,
        }
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..=self.n).map(|i| i as f64 * dx).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.n < 8 {
            return Err(Error::InvalidSpec(format!("need at least 8 cells, got {}", self.n)));
        }
        if !(self.length > 0.0) || !(self.t_span.1 > self.t_span.0) || self.snapshots < 2 {
            return Err(Error::InvalidSpec("empty space or time domain".into()));
        }
        if !(self.cfl > 0.0 && self.cfl <= CFL_MAX) {
            return Err(Error::InvalidSpec(format!("cfl {} outside (0, {CFL_MAX}]", self.cfl)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Power {
    Int(i32),
    Real(f64),
}

impl Power {
    fn new(e: &Expr) -> Result<Power> {
        if let Some(i) = e.as_integer() {
            return Ok(Power::Int(i as i32));
        }
        e.to_f64()
            .map(Power::Real)
            .ok_or_else(|| Error::InvalidSpec(format!("exponent {e} is not numeric")))
    }

    fn value(self) -> f64 {
        match self {
            Power::Int(i) => i as f64,
            Power::Real(r) => r,
        }
    }

    fn apply(self, u: f64) -> f64 {
        match self {
            Power::Int(i) => u.powi(i),
            Power::Real(r) => u.powf(r),
        }
    }

    fn map(self, src: &[f64], dst: &mut [f64]) {
        match self {
            Power::Int(1) => dst.copy_from_slice(src),
            Power::Int(2) => dst.iter_mut().zip(src).for_each(|(d, v)| *d = v * v),
            p => dst.iter_mut().zip(src).for_each(|(d, v)| *d = p.apply(*v)),
        }
    }

    fn needs_positive(self) -> bool {
        match self {
            Power::Int(i) => i < 0,
            Power::Real(_) => true,
        }
    }
}

struct Operator<'a> {
    m: Power,
    n: Power,
    eps: f64,
    f: Compiled,
    dx: f64,
    upwind: bool,
    bc: &'a BoundarySpec,
    source: Option<&'a (dyn Fn(f64, f64) -> f64 + Sync)>,
    xs: Vec<f64>,
    /// `u` on nodes with two ghosts on each side: index `i + 2` is node `i`.
    ext: Vec<f64>,
    w: Vec<f64>,
    c: Vec<f64>,
}

impl Operator<'_> {
    fn f(&self, t: f64) -> f64 {
        self.f.eval(&[t])
    }

    fn exact(sol: &Solution, t: f64, x: f64) -> Result<f64> {
        sol(t, x)
    }

    /// Fills ghosts and Dirichlet nodes of `u` at time `t`.
    fn close(&mut self, t: f64, u: &mut [f64]) -> Result<()> {
        let nn = u.len();
        let dx = self.dx;
        match &self.bc.left {
            LeftBoundary::Bvp { q, dq } => {
                let (qv, dqv) = (q(t), dq(t));
                u[0] = qv;
                // u_x = u_xx = u_xxxx = 0 at x = 0 and the equation give u_xxx.
                let ghost = if dqv == 0.0 {
                    qv
                } else {
                    let lead = self.f(t) * self.n.value() * Power::Real(self.n.value() - 1.0).apply(qv);
                    qv + dx.powi(3) * dqv / (6.0 * lead)
                };
                self.ext[1] = ghost;
                // Node 1 is the last one whose stencil reaches left; this ghost is unused.
                self.ext[0] = ghost;
            }
            LeftBoundary::Exact(s) => {
                u[0] = Self::exact(s, t, 0.0)?;
                self.ext[1] = Self::exact(s, t, -dx)?;
                self.ext[0] = Self::exact(s, t, -2.0 * dx)?;
            }
        }
        let last = nn + 2;
        match &self.bc.right {
            RightBoundary::ZeroExtension => {
                self.ext[last] = 0.0;
                self.ext[last + 1] = 0.0;
            }
            RightBoundary::Exact(s) => {
                let xl = self.xs[nn - 1];
                u[nn - 1] = Self::exact(s, t, xl)?;
                self.ext[last] = Self::exact(s, t, xl + dx)?;
                self.ext[last + 1] = Self::exact(s, t, xl + 2.0 * dx)?;
            }
        }
        self.ext[2..last].copy_from_slice(u);
        Ok(())
    }

    fn rhs(&mut self, t: f64, u: &mut [f64], du: &mut [f64]) -> Result<()> {
        self.close(t, u)?;
        if self.n.needs_positive() || self.m.needs_positive() {
            if let Some(j) = self.ext.iter().position(|v| *v <= 0.0) {
                return Err(Error::Domain {
                    at: t,
                    message: format!(
                        "u = {} at x = {} with a fractional or negative exponent",
                        self.ext[j],
                        (j as f64 - 2.0) * self.dx
                    ),
                });
            }
        }
        self.n.map(&self.ext, &mut self.w);
        self.m.map(&self.ext, &mut self.c);
        let ft = self.f(t);
        let k3 = -ft / (2.0 * self.dx.powi(3));
        let k1 = -self.eps / (2.0 * self.dx);
        let nn = u.len();
        let end = if matches!(self.bc.right, RightBoundary::Exact(_)) { nn - 1 } else { nn };
        du[0] = 0.0;
        du[nn - 1] = 0.0;
        let interior = (1..end).zip(self.w[1..].windows(5)).zip(self.c[2..].windows(3));
        if self.upwind {
            let mval = self.m.value();
            let up = Power::Real(mval - 1.0);
            for ((i, w), c) in interior {
                let speed = self.eps * mval * up.apply(self.ext[i + 2]);
                let conv = if speed >= 0.0 { c[1] - c[0] } else { c[2] - c[1] };
                du[i] = 2.0 * k1 * conv + k3 * (w[4] - 2.0 * w[3] + 2.0 * w[1] - w[0]);
            }
        } else {
            for ((i, w), c) in interior {
                du[i] = k1 * (c[2] - c[0]) + k3 * (w[4] - 2.0 * w[3] + 2.0 * w[1] - w[0]);
            }
        }
        if let Some(s) = self.source {
            for i in 1..end {
                du[i] += s(t, self.xs[i]);
            }
        }
        Ok(())
    }
}

/// Solves with the CFL step `dt = cfl*dx^3/(n*max|f|*max|u|^(n-1))`, also
/// capped by the convective limit `cfl*dx/(m*max|u|^(m-1))`.
pub fn mol_solve(spec: &EquationSpec, u0: &(dyn Fn(f64) -> f64 + Sync), bc: &BoundarySpec, grid: &PdeGrid) -> Result<FieldGrid> {
    mol_solve_with(spec, u0, bc, grid, None)
}

/// As [`mol_solve`] with a source term added to the right-hand side.
pub fn mol_solve_with(
    spec: &EquationSpec,
    u0: &(dyn Fn(f64) -> f64 + Sync),
    bc: &BoundarySpec,
    grid: &PdeGrid,
    source: Option<&(dyn Fn(f64, f64) -> f64 + Sync)>,
) -> Result<FieldGrid> {
    grid.validate()?;
    let f_expr = spec
        .f
        .expr()
        .ok_or_else(|| Error::InvalidSpec("the PDE solver needs a concrete f".into()))?;
    let f = Compiled::new(&f_expr, &[Symbol::T])?;
    let m = Power::new(&spec.m)?;
    let n = Power::new(&spec.n)?;
    let xs = grid.nodes();
    let dx = grid.dx();
    let nn = xs.len();
    let mut u: Vec<f64> = xs.iter().map(|x| u0(*x)).collect();
    if let Some(i) = u.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState {
            at: grid.t_span.0,
            state: format!("u0 = {} at x = {}", u[i], xs[i]),
        });
    }

    let (t0, t1) = grid.t_span;
    let samples = 64;
    let max_f = (0..=samples)
        .map(|i| f.eval(&[t0 + (t1 - t0) * i as f64 / samples as f64]).abs())
        .fold(0.0, f64::max);
    if !max_f.is_finite() {
        return Err(Error::InvalidSpec(format!("f is not finite on [{t0}, {t1}]")));
    }
    let max_u = u.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1e-300);
    let disp = n.value().abs() * max_f * max_u.powf(n.value() - 1.0);
    let conv = m.value().abs() * max_u.powf(m.value() - 1.0);
    let limit = |c: f64| {
        let a = if disp > 0.0 { c * dx.powi(3) / disp } else { f64::INFINITY };
        let b = if conv > 0.0 { c * dx / conv } else { f64::INFINITY };
        a.min(b)
    };
    let interval = (t1 - t0) / (grid.snapshots - 1) as f64;
    let dt_target = match grid.dt {
        Some(dt) => {
            let max = limit(CFL_MAX);
            if !(dt > 0.0) || dt > max {
                return Err(Error::CflViolation { dt, limit: max });
            }
            dt
        }
        None => limit(grid.cfl),
    };
    let steps_per = (interval / dt_target.min(interval)).ceil().max(1.0) as usize;
    let dt = interval / steps_per as f64;

    let mut op = Operator {
        m,
        n,
        eps: spec.eps as f64,
        f,
        dx,
        upwind: grid.upwind,
        bc,
        source,
        xs: xs.clone(),
        ext: vec![0.0; nn + 4],
        w: vec![0.0; nn + 4],
        c: vec![0.0; nn + 4],
    };
    let mut k = [vec![0.0; nn], vec![0.0; nn], vec![0.0; nn], vec![0.0; nn]];
    let mut stage = vec![0.0; nn];

    let mut times = vec![t0];
    op.close(t0, &mut u)?;
    let mut rows = vec![u.clone()];
    for s in 1..grid.snapshots {
        let ts = t0 + interval * (s - 1) as f64;
        for step in 0..steps_per {
            let t = ts + dt * step as f64;
            op.rhs(t, &mut u, &mut k[0])?;
            for i in 0..nn {
                stage[i] = u[i] + 0.5 * dt * k[0][i];
            }
            op.rhs(t + 0.5 * dt, &mut stage, &mut k[1])?;
            for i in 0..nn {
                stage[i] = u[i] + 0.5 * dt * k[1][i];
            }
            op.rhs(t + 0.5 * dt, &mut stage, &mut k[2])?;
            for i in 0..nn {
                stage[i] = u[i] + dt * k[2][i];
            }
            op.rhs(t + dt, &mut stage, &mut k[3])?;
            for i in 0..nn {
                u[i] += dt / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
            }
            if !u.iter().sum::<f64>().is_finite() {
                let i = u.iter().position(|v| !v.is_finite()).unwrap_or(0);
                return Err(Error::NonFiniteState {
                    at: t + dt,
                    state: format!("u = {} at x = {}", u[i], xs[i]),
                });
            }
        }
        let tn = if s + 1 == grid.snapshots { t1 } else { t0 + interval * s as f64 };
        op.close(tn, &mut u)?;
        times.push(tn);
        rows.push(u.clone());
    }
    let meta = json!({
        "solver": "mol-rk4",
        "dx": dx,
        "dt": dt,
        "steps": steps_per * (grid.snapshots - 1),
        "cfl": grid.cfl,
        "upwind": grid.upwind,
        "spec": spec.to_string(),
    });
    FieldGrid::new(times, xs, rows, meta)
}
