use kmnsym::classification::{default_database, EquationSpec};
use kmnsym::prolongation::{commutator, prolong3, span_membership, VectorField};
use kmnsym::reduction::case7_basis;
use kmnsym::symkernel::{is_zero, Expr, Rational, Symbol};
use proptest::prelude::*;

fn zero_field(v: &VectorField) -> bool {
    v.components().iter().all(|c| is_zero(c).unwrap().is_zero())
}

#[test]
fn every_case_closes_under_commutation() {
    let checks = default_database().closure(3);
    let bad: Vec<_> = checks.iter().filter(|c| !c.passed()).collect();
    for c in bad.iter().take(10) {
        eprintln!("{} {:?} [{}]: {:?}", c.case_id, c.pair, c.setting, c.outcome);
    }
    assert!(bad.is_empty(), "{} of {} commutators left the span", bad.len(), checks.len());
    let ids: std::collections::BTreeSet<_> = checks.iter().map(|c| c.case_id.as_str()).collect();
    // Rows with a single generator have no pairs.
    assert_eq!(ids.len(), default_database().cases().iter().filter(|c| c.generators.len() > 1).count());
}

#[test]
fn antisymmetry_and_jacobi_on_every_case() {
    let db = default_database();
    for case in db.cases() {
        let sets = db.instantiated(&case.id).unwrap();
        let (label, g) = &sets[0];
        for a in g {
            for b in g {
                let s = commutator(a, b).add(&commutator(b, a));
                assert!(zero_field(&s), "{} [{label}]", case.id);
                for c in g {
                    let j = commutator(a, &commutator(b, c))
                        .add(&commutator(b, &commutator(c, a)))
                        .add(&commutator(c, &commutator(a, b)));
                    assert!(zero_field(&j), "{} [{label}]", case.id);
                }
            }
        }
    }
}

#[test]
fn case_seven_structure_constants() {
    let ks = [Expr::param("k"), Expr::int(3), Expr::rational(Rational::new(1, 2)), Expr::int(-4)];
    for ke in ks {
        let [g1, g2, g3] = case7_basis(&ke);
        let basis = [g1.clone(), g2.clone(), g3.clone()];
        let c = |a: &VectorField, b: &VectorField| span_membership(&commutator(a, b), &basis).unwrap().unwrap();
        let expect = |got: Vec<Expr>, want: [Expr; 3]| {
            for (g, w) in got.iter().zip(&want) {
                assert!(is_zero(&(g - w)).unwrap().is_zero(), "{got:?} vs {want:?}");
            }
        };
        expect(c(&g1, &g3), [&ke + Expr::one(), Expr::zero(), Expr::zero()]);
        expect(c(&g2, &g3), [Expr::zero(), &ke - Expr::int(2), Expr::zero()]);
        expect(c(&g1, &g2), [Expr::zero(), Expr::zero(), Expr::zero()]);
    }
}

fn generator_pool() -> Vec<VectorField> {
    let db = default_database();
    let spec = EquationSpec::parse("2", "1", 1, "t^3").unwrap();
    let mut pool: Vec<VectorField> = db
        .cases()
        .iter()
        .flat_map(|c| db.instantiated(&c.id).unwrap().into_iter().nth(1).map(|(_, g)| g).unwrap_or_default())
        .collect();
    pool.extend(lookup_pool(&spec));
    pool
}

fn lookup_pool(spec: &EquationSpec) -> Vec<VectorField> {
    kmnsym::classification::lookup_case(spec)
        .unwrap()
        .into_iter()
        .flat_map(|m| m.generators)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn prolongation_is_linear(i in 0usize..1000, j in 0usize..1000, p in -5i128..6, q in 1i128..5) {
        let pool = generator_pool();
        let a = &pool[i % pool.len()];
        let b = &pool[j % pool.len()];
        let c = Expr::frac(p, q);
        let sum = prolong3(&a.add(&b.scale(&c))).unwrap();
        let (pa, pb) = (prolong3(a).unwrap(), prolong3(b).unwrap());
        for (s, e) in &sum.coeffs {
            let Symbol::Jet { t, x } = s else { continue };
            let rhs = pa.coeff(*t, *x).unwrap() + &c * pb.coeff(*t, *x).unwrap();
            prop_assert!(is_zero(&(e - &rhs)).unwrap().is_zero(), "{a} / {b} at {s:?}");
        }
    }
}
