//! Sampled solutions, interpolation, comparison and serialization.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples of a reduced profile `(omega, phi, phi', phi'')` on a uniform,
/// strictly monotone `omega` grid.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ProfileGrid {
    pub omega: Vec<f64>,
    pub phi: Vec<[f64; 3]>,
    /// Where the integration stopped at a compacton edge, if it did.
    pub edge: Option<f64>,
    pub meta: serde_json::Value,
}

/// `u[j][i] = u(t[j], x[i])` on uniform grids.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FieldGrid {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub meta: serde_json::Value,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SolutionGrid {
    Profile(ProfileGrid),
    Field(FieldGrid),
}

/// Rectangle `t0 <= t <= t1`, `x0 <= x <= x1`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct Region {
    pub t: (f64, f64),
    pub x: (f64, f64),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct Metrics {
    pub linf_abs: f64,
    pub linf_rel: f64,
    pub l2_rel: f64,
    pub points: usize,
}

fn check_monotone(v: &[f64], what: &str) -> Result<()> {
    if v.len() < 2 || v.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidSpec(format!("{what} grid is not strictly increasing")));
    }
    Ok(())
}

/// Cubic Hermite interpolation of `phi` from `(phi, phi')` on sorted nodes.
fn hermite(xs: &[f64], ps: &[[f64; 3]], x: f64) -> f64 {
    let i = xs.partition_point(|v| *v <= x).clamp(1, xs.len() - 1) - 1;
    let h = xs[i + 1] - xs[i];
    let s = (x - xs[i]) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * ps[i][0] + h10 * h * ps[i][1] + h01 * ps[i + 1][0] + h11 * h * ps[i + 1][1]
}

/// Four-point Lagrange interpolation on a uniform grid.
fn lagrange4(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if n < 4 {
        let i = xs.partition_point(|v| *v <= x).clamp(1, n - 1) - 1;
        let s = (x - xs[i]) / (xs[i + 1] - xs[i]);
        return ys[i] * (1.0 - s) + ys[i + 1] * s;
    }
    let i = xs.partition_point(|v| *v <= x).clamp(2, n - 2) - 2;
    let mut acc = 0.0;
    for a in i..i + 4 {
        let mut w = 1.0;
        for b in i..i + 4 {
            if a != b {
                w *= (x - xs[b]) / (xs[a] - xs[b]);
            }
        }
        acc += w * ys[a];
    }
    acc
}

fn within(v: f64, lo: f64, hi: f64) -> bool {
    let tol = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
    v >= lo - tol && v <= hi + tol
}

impl ProfileGrid {
    pub fn new(omega: Vec<f64>, phi: Vec<[f64; 3]>, edge: Option<f64>, meta: serde_json::Value) -> Result<ProfileGrid> {
        check_monotone(&omega, "omega")?;
        if omega.len() != phi.len() {
            return Err(Error::InvalidSpec("omega and phi lengths differ".into()));
        }
        if let Some((i, p)) = phi.iter().enumerate().find(|(_, p)| p.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFiniteState {
                at: omega[i],
                state: format!("{p:?}"),
            });
        }
        Ok(ProfileGrid { omega, phi, edge, meta })
    }

    pub fn span(&self) -> (f64, f64) {
        (self.omega[0], *self.omega.last().unwrap())
    }

    /// `phi(omega)` by cubic Hermite interpolation of `(phi, phi')`; zero past
    /// a compacton edge.
    pub fn value(&self, omega: f64) -> Result<f64> {
        let (lo, hi) = self.span();
        if !within(omega, lo, hi) {
            if let Some(e) = self.edge {
                let past = if e >= lo { omega >= e } else { omega <= e };
                if past {
                    return Ok(0.0);
                }
            }
            return Err(Error::ExtrapolationRequest(omega));
        }
        Ok(hermite(&self.omega, &self.phi, omega.clamp(lo, hi)))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "omega,phi,dphi,ddphi")?;
        for (o, p) in self.omega.iter().zip(&self.phi) {
            writeln!(w, "{},{},{},{}", fmt17(*o), fmt17(p[0]), fmt17(p[1]), fmt17(p[2]))?;
        }
        w.flush()?;
        Ok(())
    }
}

impl FieldGrid {
    pub fn new(t: Vec<f64>, x: Vec<f64>, u: Vec<Vec<f64>>, meta: serde_json::Value) -> Result<FieldGrid> {
        check_monotone(&x, "x")?;
        if t.len() > 1 {
            check_monotone(&t, "t")?;
        }
        if u.len() != t.len() || u.iter().any(|r| r.len() != x.len()) {
            return Err(Error::InvalidSpec("field grid shape does not match its axes".into()));
        }
        for (j, row) in u.iter().enumerate() {
            if let Some(i) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState {
                    at: t[j],
                    state: format!("u = {} at x = {}", row[i], x[i]),
                });
            }
        }
        Ok(FieldGrid { t, x, u, meta })
    }

    /// Value at `(t, x)` by four-point Lagrange interpolation in each direction.
    pub fn value(&self, t: f64, x: f64) -> Option<f64> {
        let (t0, t1) = (self.t[0], *self.t.last()?);
        let (x0, x1) = (self.x[0], *self.x.last()?);
        if !within(t, t0, t1) || !within(x, x0, x1) {
            return None;
        }
        if self.t.len() == 1 {
            return Some(lagrange4(&self.x, &self.u[0], x));
        }
        let exact_t = self.t.iter().position(|v| (v - t).abs() <= 1e-12 * v.abs().max(1.0));
        if let Some(j) = exact_t {
            return Some(lagrange4(&self.x, &self.u[j], x));
        }
        let col: Vec<f64> = self.u.iter().map(|row| lagrange4(&self.x, row, x)).collect();
        Some(lagrange4(&self.t, &col, t))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "t,x,u")?;
        for (j, tv) in self.t.iter().enumerate() {
            for (i, xv) in self.x.iter().enumerate() {
                writeln!(w, "{},{},{}", fmt17(*tv), fmt17(*xv), fmt17(self.u[j][i]))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

impl SolutionGrid {
    pub fn meta(&self) -> &serde_json::Value {
        match self {
            SolutionGrid::Profile(p) => &p.meta,
            SolutionGrid::Field(f) => &f.meta,
        }
    }

    /// Writes `path` as CSV and `path` with extension `.json` as the metadata sidecar.
    pub fn write(&self, path: &Path) -> Result<()> {
        match self {
            SolutionGrid::Profile(p) => p.write_csv(path)?,
            SolutionGrid::Field(f) => f.write_csv(path)?,
        }
        let sidecar = path.with_extension("json");
        let mut meta = match self.meta() {
            serde_json::Value::Object(m) => serde_json::Value::Object(m.clone()),
            serde_json::Value::Null => serde_json::json!({}),
            other => serde_json::json!({ "meta": other }),
        };
        if let serde_json::Value::Object(m) = &mut meta {
            let (kind, extra) = match self {
                SolutionGrid::Profile(p) => (
                    "profile",
                    serde_json::json!({
                        "omega_span": [p.omega[0], p.omega[p.omega.len() - 1]],
                        "samples": p.omega.len(),
                        "spacing": spacing(&p.omega),
                        "edge": p.edge,
                    }),
                ),
                SolutionGrid::Field(f) => (
                    "field",
                    serde_json::json!({
                        "t_span": [f.t[0], f.t[f.t.len() - 1]],
                        "x_span": [f.x[0], f.x[f.x.len() - 1]],
                        "dt_out": spacing(&f.t),
                        "dx": spacing(&f.x),
                        "shape": [f.t.len(), f.x.len()],
                    }),
                ),
            };
            m.insert("kind".into(), kind.into());
            m.insert("grid".into(), extra);
            m.insert("csv".into(), path.file_name().map(|s| s.to_string_lossy().to_string()).into());
        }
        std::fs::write(sidecar, serde_json::to_string_pretty(&meta)? + "\n")?;
        Ok(())
    }
}

fn spacing(v: &[f64]) -> Option<f64> {
    (v.len() > 1).then(|| (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64)
}

/// Seventeen significant digits: enough to round-trip any `f64`.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Errors of `a` against `b` at the nodes of `a` inside `region`, with `b`
/// interpolated there when the grids differ.
pub fn compare_grids(a: &FieldGrid, b: &FieldGrid, region: &Region) -> Result<Metrics> {
    let mut num2 = 0.0;
    let mut den2 = 0.0;
    let mut max_diff = 0.0f64;
    let mut max_ref = 0.0f64;
    let mut points = 0;
    for (j, tv) in a.t.iter().enumerate() {
        if !within(*tv, region.t.0, region.t.1) {
            continue;
        }
        for (i, xv) in a.x.iter().enumerate() {
            if !within(*xv, region.x.0, region.x.1) {
                continue;
            }
            let Some(bv) = b.value(*tv, *xv) else {
                continue;
            };
            let d = a.u[j][i] - bv;
            max_diff = max_diff.max(d.abs());
            max_ref = max_ref.max(bv.abs());
            num2 += d * d;
            den2 += bv * bv;
            points += 1;
        }
    }
    if points == 0 {
        return Err(Error::NoOverlap);
    }
    let rel = |n: f64, d: f64| if d > 0.0 { n / d } else { n };
    Ok(Metrics {
        linf_abs: max_diff,
        linf_rel: rel(max_diff, max_ref),
        l2_rel: rel(num2.sqrt(), den2.sqrt()),
        points,
    })
}
