//! Third-order reduced IVPs solved for `phi'''`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::json;

use super::grid::ProfileGrid;
use super::ode::{integrate, Event, StepControl, Trajectory};
use crate::error::{Error, Result};
use crate::reduction::{BVPReduction, ReducedODE};
use crate::symkernel::{differentiate, normalize, rational_to_f64, Compiled, Expr, Symbol};

pub type ThirdOrderRhs = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;

/// Default threshold below which a profile with singular leading coefficient
/// is considered to have reached a compacton edge.
pub const PHI_FLOOR: f64 = 1e-8;

#[derive(Clone)]
pub struct ODEProblem {
    /// `phi''' = rhs(omega, [phi, phi', phi''])`.
    pub rhs: ThirdOrderRhs,
    pub y0: [f64; 3],
    pub span: (f64, f64),
    /// The coefficient of `phi'''` vanishes at `phi = 0`.
    pub singular_at_zero: bool,
    pub phi_floor: f64,
    /// Uniform output samples over the integrated span.
    pub samples: usize,
    pub params: BTreeMap<String, f64>,
}

impl std::fmt::Debug for ODEProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ODEProblem")
            .field("y0", &self.y0)
            .field("span", &self.span)
            .field("singular_at_zero", &self.singular_at_zero)
            .field("params", &self.params)
            .finish()
    }
}

impl ODEProblem {
    pub fn custom(rhs: ThirdOrderRhs, y0: [f64; 3], span: (f64, f64)) -> ODEProblem {
        ODEProblem {
            rhs,
            y0,
            span,
            singular_at_zero: false,
            phi_floor: PHI_FLOOR,
            samples: 1001,
            params: BTreeMap::new(),
        }
    }

    /// Isolates `phi'''` in a reduced ODE with numeric coefficients:
    /// `lhs = A*phi''' + B`, `phi''' = -B/A`.
    pub fn from_reduced(ode: &ReducedODE, y0: [f64; 3], span: (f64, f64)) -> Result<ODEProblem> {
        let p3 = Symbol::Phi(3);
        let a = differentiate(&ode.lhs, &p3);
        let b = normalize(&(&ode.lhs - &a * Expr::phi(3)));
        if a.contains(&p3) || b.contains(&p3) || a.is_zero_literal() {
            return Err(Error::InvalidSpec(format!("reduced equation is not third order and linear in phi''': {}", ode.lhs)));
        }
        let slots = [Symbol::Omega, Symbol::Phi(0), Symbol::Phi(1), Symbol::Phi(2)];
        let rhs_expr = normalize(&(-&b / &a));
        let compiled = Compiled::new(&rhs_expr, &slots)
            .map_err(|e| Error::InvalidSpec(format!("reduced equation needs numeric parameters: {e}")))?;
        let singular_at_zero = a.contains(&Symbol::Phi(0));
        let rhs: ThirdOrderRhs = Arc::new(move |w, y| compiled.eval(&[w, y[0], y[1], y[2]]));
        Ok(ODEProblem {
            singular_at_zero,
            ..ODEProblem::custom(rhs, y0, span)
        })
    }

    /// The reduced boundary-value problem as an IVP from `omega = 0`.
    pub fn from_bvp(red: &BVPReduction, omega_end: f64) -> Result<ODEProblem> {
        let y0 = red.initial.map(|q| rational_to_f64(&q).unwrap_or(f64::NAN));
        let mut p = ODEProblem::from_reduced(&red.ode, y0, (0.0, omega_end))?;
        let num = |e: &Expr| e.to_f64().unwrap_or(f64::NAN);
        for (name, v) in [
            ("m", num(&red.spec.m)),
            ("n", num(&red.spec.n)),
            ("eps", red.spec.eps as f64),
            ("k", num(&red.k)),
            ("c1", num(&red.c1)),
            ("c2", num(&red.c2)),
            ("gammaAmp", y0[0]),
        ] {
            p.params.insert(name.into(), v);
        }
        Ok(p)
    }

    fn system(&self) -> impl Fn(f64, &[f64], &mut [f64]) + Sync + '_ {
        move |w, y, dy| {
            dy[0] = y[1];
            dy[1] = y[2];
            dy[2] = if self.singular_at_zero && y[0] <= 0.0 { f64::NAN } else { (self.rhs)(w, y) };
        }
    }

    pub fn trajectory(&self, control: StepControl) -> Result<Trajectory> {
        let sys = self.system();
        let floor = self.phi_floor;
        let g = move |_w: f64, y: &[f64]| y[0] - floor;
        let ev = Event {
            name: "CompactonEdge",
            g: &g,
        };
        let event = self.singular_at_zero.then_some(&ev);
        integrate(&sys, self.span.0, &self.y0, self.span.1, control, event)
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(1e-12..=1e-3).contains(&tol) {
        return Err(Error::InvalidSpec(format!("tolerance {tol} outside [1e-12, 1e-3]")));
    }
    Ok(())
}

/// Adaptive Dormand-Prince integration with `rtol = atol = tol`, sampled
/// uniformly over the integrated span.
pub fn integrate_ivp(p: &ODEProblem, tol: f64) -> Result<ProfileGrid> {
    check_tol(tol)?;
    let tr = p.trajectory(StepControl::Adaptive { rtol: tol, atol: tol })?;
    sample(p, &tr, json!({ "tol": tol, "mode": "adaptive" }))
}

/// Fixed steps of size `h`, for convergence studies.
pub fn integrate_ivp_fixed(p: &ODEProblem, h: f64) -> Result<ProfileGrid> {
    let tr = p.trajectory(StepControl::Fixed { h })?;
    sample(p, &tr, json!({ "h": h, "mode": "fixed" }))
}

fn sample(p: &ODEProblem, tr: &Trajectory, mut meta: serde_json::Value) -> Result<ProfileGrid> {
    let (a, b) = (p.span.0, tr.t_end);
    let n = p.samples.max(2);
    let mut omega = Vec::with_capacity(n);
    let mut phi = Vec::with_capacity(n);
    for i in 0..n {
        let w = if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 };
        let y = if i + 1 == n {
            tr.y_end.clone()
        } else {
            tr.eval(w).ok_or(Error::ExtrapolationRequest(w))?
        };
        omega.push(w);
        phi.push([y[0], y[1], y[2]]);
    }
    if b < a {
        omega.reverse();
        phi.reverse();
    }
    let edge = tr.event.map(|(_, w)| w);
    if let serde_json::Value::Object(m) = &mut meta {
        m.insert("accepted_steps".into(), tr.accepted().into());
        m.insert("rejected_steps".into(), tr.rejected.into());
        m.insert("event".into(), tr.event.map(|(n, _)| n).into());
        m.insert("params".into(), json!(p.params));
        m.insert("initial".into(), json!(p.y0));
    }
    ProfileGrid::new(omega, phi, edge, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classification::EquationSpec;
    use crate::reduction::bvp_reduce;
    use crate::symkernel::Rational;

    fn eq13(m: &str, n: &str, k: &str, eps: i8, end: f64) -> ODEProblem {
        let spec = EquationSpec::parse(m, n, eps, &format!("t^({k})")).unwrap();
        let red = bvp_reduce(&spec, &Rational::from(1)).unwrap();
        ODEProblem::from_bvp(&red, end).unwrap()
    }

    #[test]
    fn isolated_rhs_matches_the_hand_form() {
        let p = eq13("2", "1", "1", 1, 10.0);
        assert!(!p.singular_at_zero);
        let y = [1.3, -0.2, 0.7];
        let w = 0.9;
        let hand = -2.0 * y[0] * y[1] + 2.0 / 3.0 * w * y[1] + y[0] / 3.0;
        assert!(((p.rhs)(w, &y) - hand).abs() < 1e-14);
        assert_eq!(p.params["c1"], 2.0 / 3.0);
    }

    #[test]
    fn profile_is_finite_on_the_whole_span() {
        let p = eq13("2", "1", "1", 1, 10.0);
        let g = integrate_ivp(&p, 1e-8).unwrap();
        assert_eq!(g.span(), (0.0, 10.0));
        assert!(g.edge.is_none());
        assert_eq!(g.phi[0], [1.0, 0.0, 0.0]);
        // Reference value from an independent integration (scipy RK45, rtol 1e-10).
        assert!((g.value(5.0).unwrap() - 2.65698185).abs() < 1e-6);
    }

    #[test]
    fn compacton_edge_stops_cleanly() {
        let p = eq13("2", "1/2", "3", 1, 10.0);
        assert!(p.singular_at_zero);
        let g = integrate_ivp(&p, 1e-9).unwrap();
        let edge = g.edge.expect("edge");
        assert!((edge - 2.7767).abs() < 1e-3, "{edge}");
        assert!(g.phi.iter().flatten().all(|v| v.is_finite()));
        assert_eq!(g.value(edge + 1.0).unwrap(), 0.0);
        assert_eq!(g.meta["event"], "CompactonEdge");
    }

    #[test]
    fn tolerance_range_is_enforced() {
        let p = eq13("2", "1", "1", 1, 1.0);
        assert!(integrate_ivp(&p, 1e-2).is_err());
        assert!(integrate_ivp(&p, 1e-13).is_err());
    }

    #[test]
    fn blow_up_is_an_error() {
        let p = eq13("2", "1", "1", -1, 10.0);
        assert!(matches!(integrate_ivp(&p, 1e-8), Err(Error::StepUnderflow { .. }) | Err(Error::NonFiniteState { .. })));
    }
}
