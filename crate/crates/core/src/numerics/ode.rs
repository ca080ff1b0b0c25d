//! Dormand-Prince 5(4) with PI step control, a continuous extension for
//! dense output and a terminal event.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

/// Fifth-order weights minus the embedded fourth-order ones.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Continuous extension: `y(t + s*h) = y + h * sum_i k_i * sum_j P[i][j] s^(j+1)`.
const P: [[f64; 4]; 7] = [
    [1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0, -12715105075.0 / 11282082432.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0, 87487479700.0 / 32700410799.0],
    [0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0, -10690763975.0 / 1880347072.0],
    [0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0, 701980252875.0 / 199316789632.0],
    [0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0, -1453857185.0 / 822651844.0],
    [0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0, 69997945.0 / 29380423.0],
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const MAX_STEPS: usize = 2_000_000;

/// `dy = F(t, y)`; the closure writes into `dy`.
pub type Rhs<'a> = &'a (dyn Fn(f64, &[f64], &mut [f64]) + Sync);

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepControl {
    Adaptive { rtol: f64, atol: f64 },
    Fixed { h: f64 },
}

/// Stops the integration where `g(t, y)` first reaches zero from above.
pub struct Event<'a> {
    pub name: &'static str,
    pub g: &'a (dyn Fn(f64, &[f64]) -> f64 + Sync),
}

/// One accepted step with the data for its continuous extension.
#[derive(Clone, Debug)]
pub struct Step {
    pub t0: f64,
    pub h: f64,
    pub y0: Vec<f64>,
    k: Vec<[f64; 7]>,
}

impl Step {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// State at `t` inside the step (4th-order accurate).
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let s = (t - self.t0) / self.h;
        let pw = [s, s * s, s * s * s, s * s * s * s];
        let w: Vec<f64> = P.iter().map(|r| r.iter().zip(&pw).map(|(a, b)| a * b).sum()).collect();
        self.y0
            .iter()
            .zip(&self.k)
            .map(|(y, k)| y + self.h * k.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    pub t_end: f64,
    pub y_end: Vec<f64>,
    /// Event name and location when the integration stopped early.
    pub event: Option<(&'static str, f64)>,
    pub rejected: usize,
}

impl Trajectory {
    pub fn accepted(&self) -> usize {
        self.steps.len()
    }

    /// Dense evaluation anywhere inside the integrated span.
    pub fn eval(&self, t: f64) -> Option<Vec<f64>> {
        let first = self.steps.first()?;
        let dir = first.h.signum();
        if dir * (t - first.t0) < -1e-14 * first.t0.abs().max(1.0) || dir * (t - self.t_end) > 1e-12 * self.t_end.abs().max(1.0) {
            return None;
        }
        let i = self.steps.partition_point(|s| dir * (s.t1() - t) < 0.0);
        let st = &self.steps[i.min(self.steps.len() - 1)];
        Some(st.eval(t))
    }
}

fn state_text(y: &[f64]) -> String {
    let parts: Vec<String> = y.iter().map(|v| format!("{v:.6e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn all_finite(y: &[f64]) -> bool {
    y.iter().all(|v| v.is_finite())
}

struct Stages {
    k: Vec<[f64; 7]>,
    y_new: Vec<f64>,
    err: Vec<f64>,
}

fn dp_step(f: Rhs, t: f64, y: &[f64], k1: &[f64], h: f64) -> Option<Stages> {
    let d = y.len();
    let mut k = vec![[0.0; 7]; d];
    for (i, v) in k1.iter().enumerate() {
        k[i][0] = *v;
    }
    let mut ys = vec![0.0; d];
    let mut out = vec![0.0; d];
    for s in 1..7 {
        for i in 0..d {
            let mut acc = 0.0;
            for j in 0..s {
                acc += A[s][j] * k[i][j];
            }
            ys[i] = y[i] + h * acc;
        }
        if !all_finite(&ys) {
            return None;
        }
        f(t + C[s] * h, &ys, &mut out);
        if !all_finite(&out) {
            return None;
        }
        for i in 0..d {
            k[i][s] = out[i];
        }
    }
    // The last stage is evaluated at the fifth-order solution (FSAL).
    let y_new = ys;
    let err = (0..d).map(|i| h * (0..7).map(|j| E[j] * k[i][j]).sum::<f64>()).collect();
    Some(Stages { k, y_new, err })
}

fn error_norm(err: &[f64], y0: &[f64], y1: &[f64], rtol: f64, atol: f64) -> f64 {
    let s: f64 = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = atol + rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (s / err.len() as f64).sqrt()
}

fn initial_step(f: Rhs, t0: f64, y0: &[f64], f0: &[f64], dir: f64, rtol: f64, atol: f64) -> f64 {
    let norm = |v: &[f64]| {
        let s: f64 = v.iter().zip(y0).map(|(a, y)| (a / (atol + rtol * y.abs())).powi(2)).sum();
        (s / v.len() as f64).sqrt()
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, k)| y + dir * h0 * k).collect();
    let mut f1 = vec![0.0; y0.len()];
    f(t0 + dir * h0, &y1, &mut f1);
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 || !d2.is_finite() {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
pub fn integrate(f: Rhs, t0: f64, y0: &[f64], t1: f64, control: StepControl, event: Option<&Event>) -> Result<Trajectory> {
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let d = y0.len();
    if !all_finite(y0) {
        return Err(Error::NonFiniteState {
            at: t0,
            state: state_text(y0),
        });
    }
    let mut k1 = vec![0.0; d];
    f(t0, y0, &mut k1);
    if !all_finite(&k1) {
        return Err(Error::NonFiniteState {
            at: t0,
            state: state_text(y0),
        });
    }
    let span = (t1 - t0).abs();
    let (rtol, atol, mut h) = match control {
        StepControl::Adaptive { rtol, atol } => (rtol, atol, initial_step(f, t0, y0, &k1, dir, rtol, atol).min(span)),
        StepControl::Fixed { h } => {
            if !(h > 0.0) {
                return Err(Error::StepUnderflow {
                    at: t0,
                    state: format!("fixed step {h}"),
                });
            }
            (0.0, 0.0, h)
        }
    };
    let fixed = matches!(control, StepControl::Fixed { .. });
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut steps: Vec<Step> = Vec::new();
    let mut rejected = 0;
    let mut err_old = 1e-4f64;
    let mut g_old = event.map(|e| (e.g)(t, &y));
    let mut last_rejected = false;

    while dir * (t1 - t) > 1e-13 * t1.abs().max(1.0) {
        if steps.len() + rejected > MAX_STEPS {
            return Err(Error::StepUnderflow {
                at: t,
                state: format!("step budget exhausted at {}", state_text(&y)),
            });
        }
        let remaining = (t1 - t).abs();
        let h_try = if h >= remaining * (1.0 - 1e-12) { remaining } else { h };
        if h_try < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow {
                at: t,
                state: state_text(&y),
            });
        }
        let stages = dp_step(f, t, &y, &k1, dir * h_try);
        let Some(st) = stages else {
            if fixed {
                return Err(Error::NonFiniteState {
                    at: t,
                    state: state_text(&y),
                });
            }
            rejected += 1;
            h = h_try * 0.25;
            last_rejected = true;
            continue;
        };
        if !fixed {
            let err = error_norm(&st.err, &y, &st.y_new, rtol, atol);
            if !(err <= 1.0) {
                rejected += 1;
                let fac = if err.is_finite() { (err.powf(0.2 - 0.75 * BETA) / SAFETY).min(1.0 / FAC_MIN) } else { 4.0 };
                h = h_try / fac.max(1.0);
                last_rejected = true;
                continue;
            }
            let fac11 = err.max(1e-10).powf(0.2 - 0.75 * BETA);
            let fac = (fac11 / err_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h_try / fac;
            if last_rejected {
                h_new = h_new.min(h_try);
            }
            err_old = err.max(1e-4);
            h = h_new;
            last_rejected = false;
        }
        let step = Step {
            t0: t,
            h: dir * h_try,
            y0: y.clone(),
            k: st.k.clone(),
        };
        let t_new = if h_try == remaining { t1 } else { t + dir * h_try };
        if let (Some(ev), Some(go)) = (event, g_old) {
            let g_new = (ev.g)(t_new, &st.y_new);
            if go > 0.0 && !(g_new > 0.0) {
                let root = locate(&step, ev, t, t_new, go);
                let y_root = step.eval(root);
                // The step keeps its full length; `t_end` bounds dense evaluation.
                steps.push(step);
                return Ok(Trajectory {
                    steps,
                    t_end: root,
                    y_end: y_root,
                    event: Some((ev.name, root)),
                    rejected,
                });
            }
            g_old = Some(g_new);
        }
        steps.push(step);
        t = t_new;
        y = st.y_new;
        for i in 0..d {
            k1[i] = st.k[i][6];
        }
    }
    Ok(Trajectory {
        steps,
        t_end: t,
        y_end: y,
        event: None,
        rejected,
    })
}

/// Illinois false position on the continuous extension.
fn locate(step: &Step, ev: &Event, mut a: f64, mut b: f64, mut ga: f64) -> f64 {
    let mut gb = (ev.g)(b, &step.eval(b));
    if !gb.is_finite() {
        gb = -ga.abs();
    }
    let mut side = 0;
    for _ in 0..100 {
        if (b - a).abs() <= 1e-15 * a.abs().max(1.0) {
            break;
        }
        let c = (a * gb - b * ga) / (gb - ga);
        let c = if c.is_finite() && (c - a) * (c - b) < 0.0 { c } else { 0.5 * (a + b) };
        let gc = (ev.g)(c, &step.eval(c));
        if !gc.is_finite() || gc <= 0.0 {
            b = c;
            gb = if gc.is_finite() { gc } else { -ga.abs() };
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            ga = gc;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        }
        if gc == 0.0 {
            return c;
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuous_extension_ends_at_the_step() {
        for (i, row) in P.iter().enumerate() {
            let b = if i < 6 { A[6][i] } else { 0.0 };
            assert!((row.iter().sum::<f64>() - b).abs() < 1e-15);
        }
    }

    #[test]
    fn exponential_decay() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -y[0];
        for tol in [1e-4, 1e-8, 1e-11] {
            let tr = integrate(&f, 0.0, &[1.0], 1.0, StepControl::Adaptive { rtol: tol, atol: tol }, None).unwrap();
            assert!((tr.y_end[0] - (-1.0f64).exp()).abs() < 10.0 * tol, "{tol}: {}", tr.y_end[0]);
            assert!((tr.eval(0.37).unwrap()[0] - (-0.37f64).exp()).abs() < 10.0 * tol);
        }
        let back = integrate(&f, 1.0, &[(-1.0f64).exp()], 0.0, StepControl::Adaptive { rtol: 1e-10, atol: 1e-10 }, None).unwrap();
        assert!((back.y_end[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fixed_step_order() {
        // y'' = -y written as a system; exact solution cos t.
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let err = |h: f64| {
            let tr = integrate(&f, 0.0, &[1.0, 0.0], 2.0, StepControl::Fixed { h }, None).unwrap();
            (tr.y_end[0] - 2.0f64.cos()).abs()
        };
        let order = (err(0.1) / err(0.05)).log2();
        assert!(order > 4.5, "{order}");
    }

    #[test]
    fn terminal_event() {
        let f = |_t: f64, _y: &[f64], dy: &mut [f64]| dy[0] = -1.0;
        let g = |_t: f64, y: &[f64]| y[0] - 0.25;
        let ev = Event { name: "floor", g: &g };
        let tr = integrate(&f, 0.0, &[1.0], 5.0, StepControl::Adaptive { rtol: 1e-9, atol: 1e-9 }, Some(&ev)).unwrap();
        let (name, at) = tr.event.unwrap();
        assert_eq!(name, "floor");
        assert!((at - 0.75).abs() < 1e-12);
        assert!((tr.y_end[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn blow_up_is_reported() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0];
        let r = integrate(&f, 0.0, &[1.0], 2.0, StepControl::Adaptive { rtol: 1e-8, atol: 1e-8 }, None);
        assert!(matches!(r, Err(Error::StepUnderflow { .. }) | Err(Error::NonFiniteState { .. })), "{r:?}");
    }
}
