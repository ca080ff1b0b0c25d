//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.
//! Runs without the libtest harness so the lines always print.

use std::sync::Arc;
use std::time::Instant;

use kmnsym::classification::{
    apply_equiv, compose_equiv, default_database, invert_equiv, push_solution_expr, EquationSpec, EquivTransform, FSpec,
};
use kmnsym::numerics::{
    bvp_pipeline, integrate_ivp_fixed, mol_solve, BoundarySpec, FieldGrid, LeftBoundary, ODEProblem, PdeGrid,
    PipelineConfig, RightBoundary,
};
use kmnsym::prolongation::{commutator, span_membership, VectorField};
use kmnsym::reduction::{case7_basis, exact_solution_case, optimal_system_case7, reduce_pde, similarity_ansatz};
use kmnsym::symkernel::{
    differentiate, eval_numeric, is_zero, normalize, parse, replace, total_derivative, Compiled, Direction, Expr, Func,
    Point, Rational, Symbol, ZeroTest,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

type Verdict = (bool, String);

fn zero(e: &Expr) -> bool {
    is_zero(e).map(|z| z.is_zero()).unwrap_or(false)
}

fn runner(cases: u32) -> TestRunner {
    let cfg = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(cfg, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn c1_tables() -> Verdict {
    let start = Instant::now();
    let db = default_database();
    let checks = db.verify();
    let secs = start.elapsed().as_secs_f64();
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed()).collect();
    // Settings with trig atoms, or the shifted power with k = -2, may stop at
    // the sampled tier; everything else must cancel exactly.
    let inexact: Vec<_> = checks
        .iter()
        .filter(|c| !c.setting.contains("symbolic") && c.outcome != Ok(ZeroTest::SymbolicZero))
        .filter(|c| !(c.case_id == "T1-6a" || (c.case_id == "R2-1" && c.setting.contains("k=-2"))))
        .collect();
    let numeric = checks.iter().filter(|c| c.outcome == Ok(ZeroTest::NumericZero)).count();
    // Ten T1 rows (6a and 6b), nine T2, two R1 and three R2.
    let rows = db.cases().len();
    let ok = failed.is_empty() && inexact.is_empty() && rows == 24 && secs < 120.0;
    let mut detail = format!("{} checks over {rows} rows, {numeric} NumericZero, {:.1} s", checks.len(), secs);
    if let Some(f) = failed.first().or(inexact.first()) {
        detail += &format!("; first problem {} #{} [{}]: {:?}", f.case_id, f.generator, f.setting, f.outcome);
    }
    (ok, detail)
}

fn c2_closure() -> Verdict {
    let checks = default_database().closure(3);
    let bad = checks.iter().filter(|c| !c.passed()).count();
    let mut constants = true;
    for k in [Expr::param("k"), Expr::int(3), Expr::frac(1, 2), Expr::int(-4)] {
        let [g1, g2, g3] = case7_basis(&k);
        let basis = [g1.clone(), g2.clone(), g3.clone()];
        let expect = |a: &VectorField, b: &VectorField, want: [Expr; 3]| {
            match span_membership(&commutator(a, b), &basis) {
                Ok(Some(got)) => got.iter().zip(&want).all(|(g, w)| zero(&(g - w))),
                _ => false,
            }
        };
        let (o, z) = (Expr::one(), Expr::zero());
        constants &= expect(&g1, &g3, [&k + &o, z.clone(), z.clone()]);
        constants &= expect(&g2, &g3, [z.clone(), &k - Expr::int(2), z.clone()]);
        constants &= expect(&g1, &g2, [z.clone(), z.clone(), z]);
    }
    (
        bad == 0 && constants,
        format!("{} commutators, {bad} outside the span; case 7 constants {}", checks.len(), if constants { "match" } else { "differ" }),
    )
}

fn c3_reductions() -> Verdict {
    let mut good = 0;
    let mut notes = Vec::new();
    for eps in [1i8, -1] {
        let with_eps = |s: &str| normalize(&replace(&parse(s).unwrap(), &|v| v.is_eps().then(|| Expr::int(eps as i128))));
        let mut check = |label: &str, spec: &EquationSpec, vf: &VectorField, want: &str| {
            let ok = similarity_ansatz(vf, spec)
                .and_then(|a| Ok((reduce_pde(&a, spec)?, a)))
                .and_then(|(ode, a)| Ok(ode.verify(&a, spec)? && zero(&(&ode.lhs - with_eps(want)))))
                .unwrap_or(false);
            if ok {
                good += 1;
            } else {
                notes.push(format!("{label} eps={eps}"));
            }
        };
        let generic = EquationSpec::parse("2", "1", eps, "t^k").unwrap();
        for sigma in [1, -1] {
            let vf = VectorField::new(Expr::zero(), with_eps(&format!("2*eps*t + {sigma}")), Expr::one()).unwrap();
            check("galilean", &generic, &vf, &format!("(2*eps*omega + {sigma})*phi' + 2*eps*phi"));
        }
        let [_, _, g3] = case7_basis(&Expr::param("k"));
        check("scaling", &generic, &g3, "3*phi''' + 6*eps*phi*phi' - (k+1)*omega*phi' + (k-2)*phi");
        for (k, want) in [
            (-1, "3*phi''' + 6*eps*phi*phi' - a*phi' - 3*phi"),
            (2, "3*phi''' + 6*eps*phi*phi' - 3*omega*phi' - 2*a*eps*phi' + a"),
        ] {
            let spec = EquationSpec::parse("2", "1", eps, &format!("t^({k})")).unwrap();
            let vf = optimal_system_case7(&Rational::from(k)).unwrap()[2].generator.clone();
            let vf = VectorField::new(with_eps(&vf.tau.to_string()), with_eps(&vf.xi.to_string()), with_eps(&vf.eta.to_string())).unwrap();
            check(&format!("k={k}"), &spec, &vf, want);
        }
    }
    (notes.is_empty(), format!("{good} of 10 reductions reproduced with verified multipliers{}", if notes.is_empty() { String::new() } else { format!("; failed: {}", notes.join(", ")) }))
}

fn c4_exact_solution() -> Verdict {
    let mut symbolic = true;
    let mut worst: f64 = 0.0;
    let mut rng = rand_lcg(7);
    for f in ["f", "t^k", "exp(t)"] {
        for eps in [1i8, -1] {
            for sigma in [-1i8, 0, 1] {
                let spec = EquationSpec::parse("2", "1", eps, f).unwrap();
                let c1 = Rational::new(3, 2);
                let u = exact_solution_case(&spec, &c1, sigma).unwrap();
                let jets = |s: &Symbol| match s {
                    Symbol::Jet { t, x } => {
                        let mut d = u.clone();
                        (0..*t).for_each(|_| d = differentiate(&d, &Symbol::T));
                        (0..*x).for_each(|_| d = differentiate(&d, &Symbol::X));
                        Some(d)
                    }
                    _ => None,
                };
                let r = normalize(&replace(spec.form().unwrap().lhs(), &jets));
                symbolic &= r.is_zero_literal();
                // Numeric residual from the separately evaluated derivatives.
                let slots = [Symbol::T, Symbol::X, Symbol::param("k")];
                let c = |e: &Expr| Compiled::new(e, &slots).unwrap();
                let (cu, ut, ux, uxxx) = (
                    c(&u),
                    c(&differentiate(&u, &Symbol::T)),
                    c(&differentiate(&u, &Symbol::X)),
                    c(&differentiate(&differentiate(&differentiate(&u, &Symbol::X), &Symbol::X), &Symbol::X)),
                );
                for _ in 0..100 {
                    let t = 0.1 + 2.0 * rng();
                    let x = -3.0 + 6.0 * rng();
                    let k = -2.0 + 4.0 * rng();
                    let fv = match f {
                        "f" => 0.5 + rng(),
                        "t^k" => t.powf(k),
                        _ => t.exp(),
                    };
                    let p = [t, x, k];
                    if (2.0 * eps as f64 * t + sigma as f64).abs() < 0.05 {
                        continue;
                    }
                    let res = ut.eval(&p) + 2.0 * eps as f64 * cu.eval(&p) * ux.eval(&p) + fv * uxxx.eval(&p);
                    worst = worst.max(res.abs());
                }
            }
        }
    }
    (symbolic && worst < 1e-12, format!("symbolic residuals {}, max numeric residual {worst:.1e} over 1800 points", if symbolic { "all zero" } else { "nonzero" }))
}

fn rand_lcg(seed: u64) -> impl FnMut() -> f64 {
    use rand::{Rng, SeedableRng};
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    move || r.gen::<f64>()
}

fn q(p: i128, d: i128) -> Expr {
    Expr::rational(Rational::new(p, d))
}

fn nonzero_q() -> impl Strategy<Value = Expr> {
    (prop_oneof![-4i128..0, 1i128..5], 1i128..4).prop_map(|(p, d)| q(p, d))
}

fn any_q() -> impl Strategy<Value = Expr> {
    (-4i128..5, 1i128..4).prop_map(|(p, d)| q(p, d))
}

fn sign() -> impl Strategy<Value = i8> {
    prop_oneof![Just(1i8), Just(-1i8)]
}

fn time_map() -> impl Strategy<Value = Expr> {
    ((1i128..5, 1i128..4).prop_map(|(p, d)| q(p, d)), any_q(), 1i128..4, 0usize..2).prop_map(|(a, b, p, kind)| {
        let v = if kind == 0 { Expr::t().powi(p) } else { (Expr::int(p) * Expr::t()).exp() };
        a * v + b
    })
}

fn same_map(a: &EquivTransform, b: &EquivTransform, eps: i8) -> bool {
    let e = Expr::int(eps as i128);
    match (a.point_map(&e), b.point_map(&e)) {
        (Ok(x), Ok(y)) => zero(&(&x.t - &y.t)) && zero(&(&x.x - &y.x)) && zero(&(&x.u - &y.u)),
        _ => false,
    }
}

/// `a` then its inverse, and the inverse then `a`, are the identity.
fn round_trip(a: &EquivTransform) -> Result<(), TestCaseError> {
    let inv = invert_equiv(a).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let id = EquivTransform::identity();
    for eps in [1, -1] {
        for pair in [(a, &inv), (&inv, a)] {
            let c = compose_equiv(pair.0, pair.1).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert!(same_map(&c, &id, eps), "{a:?}");
        }
    }
    Ok(())
}

fn c5_equivalence() -> Verdict {
    let tr = EquivTransform::G12 {
        s: 1,
        alpha: Expr::zero(),
        beta: Expr::one(),
        gamma: Expr::one(),
        delta: Expr::zero(),
        kappa: Expr::int(-1),
        mu0: Expr::zero(),
        mu1: Expr::zero(),
    };
    let mut mapping = true;
    for eps in [1i8, -1] {
        let image = apply_equiv(&tr, &EquationSpec::parse("2", "1", eps, "t^2").unwrap()).unwrap();
        mapping &= image.f == FSpec::Power { c: 1.into(), k: Expr::int(-1) } && image.eps == eps;
        let pm = tr.point_map(&Expr::int(eps as i128)).unwrap();
        let want = |s: &str| normalize(&replace(&parse(s).unwrap(), &|v| v.is_eps().then(|| Expr::int(eps as i128))));
        mapping &= zero(&(&pm.t - want("1/t"))) && zero(&(&pm.x - want("-x/t"))) && zero(&(&pm.u - want("(2*eps*t*u - x)/(2*eps)")));
    }
    let mut failures = Vec::new();
    let mut run = |name: &str, r: Result<(), String>| {
        if let Err(e) = r {
            failures.push(format!("{name}: {e}"));
        }
    };
    let usual = || (sign(), any_q(), nonzero_q(), any_q(), prop_oneof![Just(q(1, 2)), Just(q(2, 1)), Just(q(3, 1))])
        .prop_map(|(s, d0, d1, d2, d3)| EquivTransform::G { m: Expr::int(3), n: Expr::int(2), s, d0, d1, d2, d3 });
    run("G", runner(100).run(&(usual(), usual()), |(a, b)| round_trip(&compose_equiv(&a, &b).unwrap())).map_err(|e| e.to_string()));
    let gn0 = (time_map(), nonzero_q(), any_q(), prop_oneof![Just(q(1, 2)), Just(q(2, 1))])
        .prop_map(|(time, d1, d2, d3)| EquivTransform::GN0 { n: Expr::int(2), time, d1, d2, d3 });
    run("G_n0", runner(100).run(&gn0, |a| round_trip(&a)).map_err(|e| e.to_string()));
    let gn1 = (sign(), time_map(), nonzero_q(), any_q(), prop_oneof![Just(q(1, 2)), Just(q(2, 1))])
        .prop_map(|(s, time, d1, d2, d3)| EquivTransform::GN1 { n: Expr::int(3), s, time, d1, d2, d3 });
    run("G_n1", runner(100).run(&gn1, |a| round_trip(&a)).map_err(|e| e.to_string()));
    let g12 = || (sign(), [-3i128..4, -3..4, -3..4, -3..4], nonzero_q(), any_q(), any_q())
        .prop_filter("det != 0", |(_, [a, b, c, d], ..)| a * d - b * c != 0)
        .prop_map(|(s, [a, b, c, d], kappa, mu0, mu1)| EquivTransform::G12 {
            s,
            alpha: Expr::int(a),
            beta: Expr::int(b),
            gamma: Expr::int(c),
            delta: Expr::int(d),
            kappa,
            mu0,
            mu1,
        });
    run("G_12", runner(100).run(&(g12(), g12()), |(a, b)| round_trip(&compose_equiv(&a, &b).unwrap())).map_err(|e| e.to_string()));
    (
        mapping && failures.is_empty(),
        format!(
            "t^2 -> 1/t mapping {}; round trips over 4 families x 100 draws: {}",
            if mapping { "exact" } else { "wrong" },
            if failures.is_empty() { "all identity".to_string() } else { failures.join("; ") }
        ),
    )
}

fn c6_pipeline() -> Verdict {
    let cfg = PipelineConfig::default();
    let start = Instant::now();
    let fine = match bvp_pipeline(&cfg) {
        Ok(r) => r,
        Err(e) => return (false, format!("pipeline failed: {e}")),
    };
    let secs = start.elapsed().as_secs_f64();
    let coarse = bvp_pipeline(&PipelineConfig { grid_n: cfg.grid_n / 2, ..cfg.clone() }).unwrap();
    let (e1, e2) = (coarse.report.metrics.linf_rel, fine.report.metrics.linf_rel);
    let order = (e1 / e2).log2();
    (
        e2 <= 1e-2 && secs < 60.0 && order >= 1.5,
        format!("N={}: rel Linf {e2:.2e} in {secs:.1} s; N={}: {e1:.2e}; observed order {order:.2}", cfg.grid_n, cfg.grid_n / 2),
    )
}

fn c7_convergence() -> Verdict {
    // u = -6/(x + 2)^2 solves the f = 1 equation; the fractional-linear map
    // (alpha, beta, gamma, delta, kappa) = (0, 1, -1, 2, 1) carries it to f = t.
    let tr = EquivTransform::G12 {
        s: 1,
        alpha: Expr::zero(),
        beta: Expr::one(),
        gamma: Expr::int(-1),
        delta: Expr::int(2),
        kappa: Expr::one(),
        mu0: Expr::zero(),
        mu1: Expr::zero(),
    };
    let exact = push_solution_expr(&tr, &parse("-6/(x + 2)^2").unwrap(), 1).unwrap();
    let spec = EquationSpec::parse("2", "1", 1, "t").unwrap();
    let oracle = zero(&spec.residual(&exact).unwrap());
    let c = Arc::new(Compiled::new(&exact, &[Symbol::T, Symbol::X]).unwrap());
    let sol: kmnsym::classification::Solution = {
        let c = c.clone();
        Arc::new(move |t, x| Ok(c.eval(&[t, x])))
    };
    let bc = BoundarySpec {
        left: LeftBoundary::Exact(sol.clone()),
        right: RightBoundary::Exact(sol),
    };
    let err = |g: &FieldGrid| {
        let mut e: f64 = 0.0;
        for (j, t) in g.t.iter().enumerate() {
            for (i, x) in g.x.iter().enumerate() {
                e = e.max((g.u[j][i] - c.eval(&[*t, *x])).abs());
            }
        }
        e
    };
    let errs: Vec<f64> = [25, 50, 100]
        .iter()
        .map(|n| {
            let grid = PdeGrid::new(5.0, *n, (0.5, 2.0));
            let u0 = |x: f64| c.eval(&[0.5, x]);
            mol_solve(&spec, &u0, &bc, &grid).map(|g| err(&g)).unwrap_or(f64::NAN)
        })
        .collect();
    let mol_orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();

    // phi''' = phi with phi = phi' = phi'' = 1 at 0 has solution exp(omega).
    let p = ODEProblem::custom(Arc::new(|_, y| y[0]), [1.0, 1.0, 1.0], (0.0, 2.0));
    let ivp_err = |h: f64| {
        let g = integrate_ivp_fixed(&p, h).unwrap();
        (g.phi.last().unwrap()[0] - 2.0f64.exp()).abs()
    };
    let ivp_errs = [ivp_err(0.2), ivp_err(0.1), ivp_err(0.05)];
    let ivp_orders: Vec<f64> = ivp_errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let ok = oracle && mol_orders.iter().all(|o| *o >= 1.9) && ivp_orders.iter().all(|o| *o >= 4.0);
    (
        ok,
        format!(
            "MoL max errors {} orders {mol_orders:.2?}; fixed-step IVP orders {ivp_orders:.2?}",
            errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-3i128..4).prop_map(Expr::int),
        (1i128..4, 2i128..5).prop_map(|(p, q)| Expr::frac(p, q)),
        Just(Expr::t()),
        Just(Expr::x()),
        Just(Expr::u()),
        Just(Expr::jet(0, 1)),
        Just(Expr::param("n")),
        Just(Expr::eps()),
        Just(Expr::f()),
    ]
}

fn raw_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(6, 32, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::add_raw),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::mul_raw),
            (inner.clone(), -2i128..4).prop_map(|(b, k)| Expr::pow_raw(b, Expr::int(k))),
            (inner.clone(), prop_oneof![Just(Expr::param("n")), Just(Expr::frac(1, 2))]).prop_map(|(b, e)| Expr::pow_raw(b, e)),
            inner.clone().prop_map(|a| Expr::func_raw(Func::Sin, a)),
            inner.clone().prop_map(|a| Expr::func_raw(Func::Exp, Expr::mul_raw(vec![Expr::frac(1, 3), a]))),
            inner.prop_map(|a| Expr::func_raw(Func::Arctan, a)),
        ]
    })
}

fn point(t: f64, x: f64, u: f64, n: f64) -> Point {
    [
        (Symbol::T, t),
        (Symbol::X, x),
        (Symbol::u(), u),
        (Symbol::Jet { t: 0, x: 1 }, 0.7),
        (Symbol::param("n"), n),
        (Symbol::param("eps"), 1.0),
        (Symbol::FDeriv(0), 1.3),
        (Symbol::FDeriv(1), 0.0),
    ]
    .into_iter()
    .collect()
}

fn c8_kernel() -> Verdict {
    let mut failures = Vec::new();
    let mut run = |name: &str, r: Result<(), String>| {
        if let Err(e) = r {
            failures.push(format!("{name}: {e}"));
        }
    };
    run(
        "idempotence",
        runner(1000)
            .run(&raw_expr(), |e| {
                let n1 = normalize(&e);
                prop_assert_eq!(normalize(&n1.to_raw()), n1);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    run(
        "round trip",
        runner(1000)
            .run(&raw_expr(), |e| {
                let n1 = normalize(&e);
                let back = parse(&n1.to_string()).map_err(|e| TestCaseError::fail(e.to_string()))?;
                prop_assert!(is_zero(&(&back - &n1)).map(|z| z.is_zero()).unwrap_or(true), "{} vs {}", n1, back);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    let pts = (0.6f64..1.9, 0.6f64..1.9, 0.6f64..1.9, 0.6f64..1.9);
    run(
        "finite differences",
        runner(1000)
            .run(&(raw_expr(), pts), |(e, (t, x, u, n))| {
                let ne = normalize(&e);
                let d = differentiate(&ne, &Symbol::X);
                let h = 1e-5;
                let at = |xv: f64| eval_numeric(&ne, &point(t, xv, u, n));
                if let (Ok(p), Ok(m), Ok(dv)) = (at(x + h), at(x - h), eval_numeric(&d, &point(t, x, u, n))) {
                    let fd = (p - m) / (2.0 * h);
                    prop_assume!(fd.abs() < 1e6);
                    prop_assert!((fd - dv).abs() <= 1e-6 * (1.0 + fd.abs().max(dv.abs())), "d/dx {}: {} vs {}", ne, dv, fd);
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    run(
        "mixed total derivatives",
        runner(1000)
            .run(&raw_expr(), |e| {
                let ne = normalize(&e);
                if let (Ok(dx), Ok(dt)) = (total_derivative(&ne, Direction::X), total_derivative(&ne, Direction::T)) {
                    if let (Ok(a), Ok(b)) = (total_derivative(&dx, Direction::T), total_derivative(&dt, Direction::X)) {
                        prop_assert!(is_zero(&(&a - &b)).map(|z| z.is_zero()).unwrap_or(true), "{}", ne);
                    }
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    let ok = failures.is_empty();
    (ok, if ok { "4 suites x 1000 cases".into() } else { failures.join("; ") })
}

fn main() {
    // libtest flags such as --nocapture or a name filter are accepted and ignored.
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("table coverage", c1_tables),
        ("algebra closure", c2_closure),
        ("reduction fidelity", c3_reductions),
        ("exact-solution oracle", c4_exact_solution),
        ("equivalence mapping", c5_equivalence),
        ("boundary-value pipeline", c6_pipeline),
        ("numerical convergence", c7_convergence),
        ("kernel soundness", c8_kernel),
    ];
    let mut all = true;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (ok, detail) = f();
        all &= ok;
        println!("criterion {} {name}: {} ({detail})", i + 1, if ok { "PASS" } else { "FAIL" });
    }
    if !all {
        std::process::exit(1);
    }
}
