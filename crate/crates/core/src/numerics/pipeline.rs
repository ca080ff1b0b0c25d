//! Boundary-value problem end to end: reduce, integrate the profile,
//! reconstruct `u`, and cross-check against the method of lines.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::grid::{compare_grids, FieldGrid, Metrics, ProfileGrid, Region};
use super::ivp::{integrate_ivp, ODEProblem};
use super::mol::{mol_solve, BoundarySpec, LeftBoundary, PdeGrid, RightBoundary, Scalar};
use crate::classification::{EquationSpec, Solution};
use crate::error::{Error, Result};
use crate::reduction::{bvp_reduce, BVPReduction};
use crate::symkernel::{parse, rational_to_f64, Rational};

fn exponents(red: &BVPReduction) -> Result<(f64, f64)> {
    let c1 = red.c1.to_f64();
    let c2 = red.c2.to_f64();
    c1.zip(c2)
        .ok_or_else(|| Error::InvalidSpec("similarity exponents are not numeric".into()))
}

/// `u = t^c2 * phi(x * t^(-c1))` as a closure over the profile.
pub fn profile_solution(red: &BVPReduction, profile: Arc<ProfileGrid>) -> Result<Solution> {
    let (c1, c2) = exponents(red)?;
    Ok(Arc::new(move |t, x| {
        if !(t > 0.0) {
            return Err(Error::Domain {
                at: t,
                message: "reconstruction needs t > 0".into(),
            });
        }
        Ok(t.powf(c2) * profile.value(x * t.powf(-c1))?)
    }))
}

/// Samples the reconstructed field on `times` x `xs`.
pub fn reconstruct(red: &BVPReduction, profile: &ProfileGrid, times: &[f64], xs: &[f64]) -> Result<FieldGrid> {
    let sol = profile_solution(red, Arc::new(profile.clone()))?;
    let mut rows = Vec::with_capacity(times.len());
    for t in times {
        rows.push(xs.iter().map(|x| sol(*t, *x)).collect::<Result<Vec<_>>>()?);
    }
    let (c1, c2) = exponents(red)?;
    FieldGrid::new(times.to_vec(), xs.to_vec(), rows, json!({ "source": "reconstruction", "c1": c1, "c2": c2 }))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct PipelineConfig {
    pub m: String,
    pub n: String,
    pub k: String,
    pub eps: i8,
    pub gamma: String,
    pub tol: f64,
    pub grid_n: usize,
    pub cfl: f64,
    pub t_span: (f64, f64),
    pub x_span: (f64, f64),
    pub t_min: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            m: "2".into(),
            n: "1".into(),
            k: "1".into(),
            eps: 1,
            gamma: "1".into(),
            tol: 1e-8,
            grid_n: 400,
            cfl: 0.4,
            t_span: (1.0, 2.0),
            x_span: (0.0, 5.0),
            t_min: 0.5,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PipelineReport {
    pub config: PipelineConfig,
    pub c1: f64,
    pub c2: f64,
    pub omega_end: f64,
    pub profile_edge: Option<f64>,
    pub dx: f64,
    pub dt: f64,
    pub metrics: Metrics,
    /// Wall time; left out of the serialized report so runs compare byte for byte.
    #[serde(skip)]
    pub runtime_s: f64,
}

pub struct PipelineRun {
    pub report: PipelineReport,
    pub profile: ProfileGrid,
    pub reconstructed: FieldGrid,
    pub mol: FieldGrid,
}

pub fn bvp_pipeline(cfg: &PipelineConfig) -> Result<PipelineRun> {
    let start = Instant::now();
    if cfg.x_span.0 != 0.0 || !(cfg.x_span.1 > 0.0) {
        return Err(Error::InvalidSpec("the boundary sits at x = 0; x_span must be [0, L]".into()));
    }
    if !(cfg.t_span.0 > 0.0) {
        return Err(Error::InvalidSpec("t_span must start after t = 0".into()));
    }
    let spec = EquationSpec::parse(&cfg.m, &cfg.n, cfg.eps, &format!("t^({})", cfg.k))?;
    let gamma = parse(&cfg.gamma)?
        .as_rational()
        .ok_or_else(|| Error::InvalidSpec(format!("gamma must be rational, got {}", cfg.gamma)))?;
    if gamma <= Rational::from(0) {
        return Err(Error::InvalidSpec("gamma must be positive".into()));
    }
    let red = bvp_reduce(&spec, &gamma)?;
    let (c1, c2) = exponents(&red)?;
    let length = cfg.x_span.1;
    let mut grid = PdeGrid::new(length, cfg.grid_n, cfg.t_span);
    grid.cfl = cfg.cfl;
    let reach = length + 3.0 * grid.dx();
    let omega_end = 1.05 * [cfg.t_span.0, cfg.t_span.1].iter().map(|t| reach * t.powf(-c1)).fold(0.0, f64::max);

    let mut problem = ODEProblem::from_bvp(&red, omega_end)?;
    problem.samples = 2001;
    let profile = Arc::new(integrate_ivp(&problem, cfg.tol)?);
    let exact = profile_solution(&red, profile.clone())?;

    let g = rational_to_f64(&red.gamma_amp).unwrap_or(f64::NAN);
    let q: Scalar = Arc::new(move |t: f64| g * t.powf(c2));
    let dq: Scalar = Arc::new(move |t: f64| c2 * g * t.powf(c2 - 1.0));
    let bc = BoundarySpec {
        left: LeftBoundary::Bvp { q, dq },
        // The profile does not decay, so the far edge takes reconstructed data.
        right: RightBoundary::Exact(exact.clone()),
    };
    let t0 = cfg.t_span.0;
    let init_err = std::sync::Mutex::new(None);
    let u0 = |x: f64| match exact(t0, x) {
        Ok(v) => v,
        Err(e) => {
            init_err.lock().unwrap().get_or_insert(e);
            f64::NAN
        }
    };
    let mol = mol_solve(&spec, &u0, &bc, &grid);
    if let Some(e) = init_err.into_inner().unwrap() {
        return Err(e);
    }
    let mol = mol?;
    let reconstructed = reconstruct(&red, &profile, &mol.t, &mol.x)?;
    let region = Region {
        t: (cfg.t_span.0.max(cfg.t_min), cfg.t_span.1),
        x: cfg.x_span,
    };
    let metrics = compare_grids(&reconstructed, &mol, &region)?;
    let report = PipelineReport {
        config: cfg.clone(),
        c1,
        c2,
        omega_end,
        profile_edge: profile.edge,
        dx: grid.dx(),
        dt: mol.meta["dt"].as_f64().unwrap_or(f64::NAN),
        metrics,
        runtime_s: start.elapsed().as_secs_f64(),
    };
    Ok(PipelineRun {
        report,
        profile: Arc::try_unwrap(profile).unwrap_or_else(|p| (*p).clone()),
        reconstructed,
        mol,
    })
}
