use kmnsym::classification::{
    apply_equiv, compose_equiv, default_database, invert_equiv, lookup_case, EquationSpec, EquivTransform, FKind, FSpec,
};
use kmnsym::symkernel::{is_zero, Expr, Rational};
use proptest::prelude::*;

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

fn integral_mn() -> impl Strategy<Value = (Expr, Expr)> {
    prop_oneof![Just((3, 2)), Just((2, 3)), Just((4, 2)), Just((-1, 2)), Just((3, -1))]
        .prop_map(|(m, n)| (Expr::int(m), Expr::int(n)))
}

fn usual(m: Expr, n: Expr) -> impl Strategy<Value = EquivTransform> {
    (sign(), any_q(), nonzero_q(), any_q(), prop_oneof![Just(q(1, 2)), Just(q(1, 1)), Just(q(2, 1)), Just(q(3, 1))])
        .prop_map(move |(s, d0, d1, d2, d3)| EquivTransform::G { m: m.clone(), n: n.clone(), s, d0, d1, d2, d3 })
}

/// Time maps `a*t^p + b`, `a*exp(l*t) + b` with `a > 0`, invertible on `t > 0`.
fn time_map() -> impl Strategy<Value = Expr> {
    ((1i128..5, 1i128..4).prop_map(|(p, d)| q(p, d)), any_q(), prop_oneof![Just(1i128), Just(2), Just(3)], 0usize..2).prop_map(|(a, b, p, kind)| {
        let v = if kind == 0 { Expr::t().powi(p) } else { (Expr::int(p) * Expr::t()).exp() };
        a * v + b
    })
}

fn gn0() -> impl Strategy<Value = EquivTransform> {
    (time_map(), nonzero_q(), any_q(), prop_oneof![Just(q(1, 2)), Just(q(2, 1))])
        .prop_map(|(time, d1, d2, d3)| EquivTransform::GN0 { n: Expr::int(2), time, d1, d2, d3 })
}

fn gn1() -> impl Strategy<Value = EquivTransform> {
    (sign(), time_map(), nonzero_q(), any_q(), prop_oneof![Just(q(1, 2)), Just(q(2, 1))])
        .prop_map(|(s, time, d1, d2, d3)| EquivTransform::GN1 { n: Expr::int(3), s, time, d1, d2, d3 })
}

fn g12() -> impl Strategy<Value = EquivTransform> {
    (sign(), [-3i128..4, -3..4, -3..4, -3..4], nonzero_q(), any_q(), any_q())
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
        })
}

fn same_map(a: &EquivTransform, b: &EquivTransform, eps: i8) -> bool {
    let e = Expr::int(eps as i128);
    let (x, y) = (a.point_map(&e).unwrap(), b.point_map(&e).unwrap());
    [(x.t, y.t), (x.x, y.x), (x.u, y.u)]
        .iter()
        .all(|(p, q)| is_zero(&(p - q)).unwrap().is_zero())
}

fn is_identity(a: &EquivTransform, eps: i8) -> bool {
    same_map(a, &EquivTransform::identity(), eps)
}

fn group_laws(a: &EquivTransform, b: &EquivTransform, c: &EquivTransform) -> Result<(), TestCaseError> {
    let left = compose_equiv(&compose_equiv(a, b).unwrap(), c).unwrap();
    let right = compose_equiv(a, &compose_equiv(b, c).unwrap()).unwrap();
    for eps in [1, -1] {
        prop_assert!(same_map(&left, &right, eps), "associativity: {a:?} {b:?} {c:?}");
        let ab = compose_equiv(a, b).unwrap();
        let back = compose_equiv(&ab, &invert_equiv(&ab).unwrap()).unwrap();
        prop_assert!(is_identity(&back, eps), "inverse: {ab:?}");
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn usual_group_laws((a, b, c) in integral_mn().prop_flat_map(|(m, n)| (usual(m.clone(), n.clone()), usual(m.clone(), n.clone()), usual(m, n)))) {
        group_laws(&a, &b, &c)?;
    }

    #[test]
    fn m0_group_laws(a in gn0(), b in gn0(), c in gn0()) {
        // Compositions of time maps need not be invertible in closed form; only
        // a single member is inverted.
        let ab = compose_equiv(&a, &b).unwrap();
        let left = compose_equiv(&ab, &c);
        prop_assert!(left.is_ok(), "{ab:?} then {c:?}: {left:?}");
        let left = left.unwrap();
        let right = compose_equiv(&a, &compose_equiv(&b, &c).unwrap()).unwrap();
        prop_assert!(same_map(&left, &right, 1));
        prop_assert!(is_identity(&compose_equiv(&a, &invert_equiv(&a).unwrap()).unwrap(), 1));
        prop_assert!(is_identity(&compose_equiv(&invert_equiv(&a).unwrap(), &a).unwrap(), 1));
    }

    #[test]
    fn m1_group_laws(a in gn1(), b in gn1(), c in gn1()) {
        for eps in [1, -1] {
            let left = compose_equiv(&compose_equiv(&a, &b).unwrap(), &c).unwrap();
            let right = compose_equiv(&a, &compose_equiv(&b, &c).unwrap()).unwrap();
            prop_assert!(same_map(&left, &right, eps));
            prop_assert!(is_identity(&compose_equiv(&a, &invert_equiv(&a).unwrap()).unwrap(), eps));
        }
    }

    #[test]
    fn fractional_linear_group_laws(a in g12(), b in g12(), c in g12()) {
        group_laws(&a, &b, &c)?;
    }

    #[test]
    fn transforms_stay_in_the_class(
        (m, n) in integral_mn(),
        eps in sign(),
        fi in 0usize..5,
        g in integral_mn().prop_flat_map(|(m, n)| usual(m, n)),
    ) {
        let f = ["1", "t^2", "3*exp(t)", "t^2 + 1", "f"][fi];
        let spec = EquationSpec::parse(&m.to_string(), &n.to_string(), eps, f).unwrap();
        let EquivTransform::G { s, d0, d1, d2, d3, .. } = g else { unreachable!() };
        let g = EquivTransform::G { m: m.clone(), n: n.clone(), s, d0, d1, d2, d3 };
        let out = apply_equiv(&g, &spec).unwrap();
        prop_assert_eq!(&out.n, &spec.n);
        prop_assert!(out.validate().is_ok());
        let reparsed = EquationSpec::parse(&out.m.to_string(), &out.n.to_string(), out.eps, &out.f.to_string()).unwrap();
        prop_assert_eq!(reparsed.n, out.n);
    }

    #[test]
    fn fractional_linear_maps_stay_in_the_class(tr in g12(), eps in sign(), fi in 0usize..4) {
        let f = ["t^2", "t", "exp(t)", "f"][fi];
        let spec = EquationSpec::parse("2", "1", eps, f).unwrap();
        let out = apply_equiv(&tr, &spec).unwrap();
        prop_assert!(out.n.is_one_literal());
        prop_assert_eq!(out.m, Expr::int(2));
    }

    #[test]
    fn lookup_is_deterministic_and_contains_the_galilean_row(
        eps in sign(),
        fi in 0usize..7,
        k in (-5i128..6).prop_filter("k", |k| *k != 0),
    ) {
        let f = [format!("t^({k})"), "1".into(), "exp(t)".into(), format!("{k}*t^2 + 1"), "f".into(), "t".into(), "t*exp(1/t)".into()];
        let spec = EquationSpec::parse("2", "1", eps, &f[fi]).unwrap();
        let ids = |s: &EquationSpec| lookup_case(s).unwrap().iter().map(|m| m.record.id.clone()).collect::<Vec<_>>();
        let first = ids(&spec);
        prop_assert_eq!(&first, &ids(&spec));
        prop_assert!(first.iter().any(|i| i == "T2-5"), "{:?}", first);
    }

    #[test]
    fn classification_is_invariant_under_stabilizing_members(
        case in 0usize..64,
        pick in 0usize..64,
        s in sign(),
        d0 in any_q(),
        d1 in nonzero_q(),
        d2 in any_q(),
        d3 in prop_oneof![Just(q(1, 2)), Just(q(2, 1)), Just(q(3, 1))],
    ) {
        let db = default_database();
        let rec = &db.cases()[case % db.cases().len()];
        let specs = db.sample_specs(&rec.id).unwrap();
        let spec = &specs[pick % specs.len()];
        let integral = spec.m.as_integer().is_some() && spec.n.as_integer().is_some();
        let g = &rec.guard;
        let mut s = if g.eps.is_some() { 1 } else { s };
        let mut d3 = if integral { d3 } else { Expr::one() };
        let (mut d0, mut d1) = (d0, d1);
        let any_f = g.f == FKind::Any || matches!(spec.f, FSpec::One | FSpec::Const(_)) && !g.f_exact;
        if !any_f {
            if g.f_exact {
                s = 1;
                d1 = Expr::one();
                d3 = Expr::one();
                if g.f != FKind::One {
                    d0 = Expr::zero();
                }
            } else {
                // Time scale 1 and no shift: a shift turns exp(t) into
                // exp(-d0)*exp(t), whose coefficient is not rational.
                d1 = Expr::int(s as i128) * d3.pow(&(&spec.m - Expr::one()));
                d0 = Expr::zero();
            }
        }
        let tr = EquivTransform::G { m: spec.m.clone(), n: spec.n.clone(), s, d0, d1, d2, d3 };
        let image = apply_equiv(&tr, spec).unwrap();
        let ids: Vec<String> = lookup_case(&image).unwrap().iter().map(|m| m.record.id.clone()).collect();
        prop_assert!(ids.contains(&rec.id), "{} : {} -> {} gave {:?}", rec.id, spec, image, ids);
    }
}

#[test]
fn every_row_finds_its_own_samples() {
    let db = default_database();
    for rec in db.cases() {
        let specs = db.sample_specs(&rec.id).unwrap();
        assert!(!specs.is_empty(), "{}", rec.id);
        for spec in specs {
            let ids: Vec<String> = lookup_case(&spec).unwrap().iter().map(|m| m.record.id.clone()).collect();
            assert!(ids.contains(&rec.id), "{}: {spec} gave {ids:?}", rec.id);
        }
    }
}
