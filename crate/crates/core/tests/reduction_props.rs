use kmnsym::classification::EquationSpec;
use kmnsym::numerics::{integrate_ivp, ODEProblem};
use kmnsym::reduction::{bvp_reduce, exact_solution_case, optimal_system_case7, reduce_pde, similarity_ansatz, Inverse};
use kmnsym::symkernel::{is_zero, normalize, parse, replace, Expr, Rational, Symbol};
use proptest::prelude::*;

fn rational_k() -> impl Strategy<Value = Rational> {
    (-6i128..7, 1i128..4)
        .prop_map(|(p, q)| Rational::new(p, q))
        .prop_filter("k != 0, 1", |k| *k != Rational::from(0) && *k != Rational::from(1))
}

fn zero(e: &Expr) -> bool {
    is_zero(e).unwrap().is_zero()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn reductions_factor_through_their_multiplier(
        k in rational_k(),
        eps in prop_oneof![Just(1i8), Just(-1i8)],
        sigma in -1i8..2,
        a in (-3i128..4, 1i128..3).prop_map(|(p, q)| Rational::new(p, q)),
    ) {
        let spec = EquationSpec::parse("2", "1", eps, &format!("t^({k})")).unwrap();
        for fam in optimal_system_case7(&k).unwrap() {
            let vf = fam.instantiate(sigma, &a).unwrap();
            let ans = match similarity_ansatz(&vf, &spec) {
                Ok(x) => x,
                Err(kmnsym::Error::TrivialOrbit) => continue,
                Err(e) => return Err(TestCaseError::fail(format!("{}: {e}", fam.label))),
            };
            let ode = reduce_pde(&ans, &spec).unwrap();
            prop_assert!(ode.verify(&ans, &spec).unwrap(), "{} k={k}", fam.label);
            // Both invariants are annihilated by the field.
            prop_assert!(zero(&ans.field.apply(&ans.omega)), "{}", fam.label);
            prop_assert!(zero(&ans.field.apply(&ans.u_invariant())), "{}", fam.label);
        }
    }

    #[test]
    fn galilean_profile_reconstructs_the_exact_solution(
        k in rational_k(),
        eps in prop_oneof![Just(1i8), Just(-1i8)],
        sigma in prop_oneof![Just(1i8), Just(-1i8)],
        c in (-4i128..5).prop_map(Rational::from),
    ) {
        let spec = EquationSpec::parse("2", "1", eps, &format!("t^({k})")).unwrap();
        let fam = &optimal_system_case7(&k).unwrap()[1];
        let vf = fam.instantiate(sigma, &Rational::from(0)).unwrap();
        let ans = similarity_ansatz(&vf, &spec).unwrap();
        let ode = reduce_pde(&ans, &spec).unwrap();
        let phi = parse(&format!("{c}/(2*{eps}*omega + {sigma})")).unwrap();
        let mut derivs = vec![phi.clone()];
        for _ in 0..3 {
            let d = kmnsym::symkernel::differentiate(derivs.last().unwrap(), &Symbol::Omega);
            derivs.push(d);
        }
        let lhs = replace(&ode.lhs, &|s| match s {
            Symbol::Phi(j) => Some(derivs[*j as usize].clone()),
            _ => None,
        });
        prop_assert!(zero(&lhs), "{}", ode.lhs);
        let u = ans.reconstruct(&phi);
        let exact = exact_solution_case(&spec, &c, sigma).unwrap();
        prop_assert!(zero(&(u - exact)));
    }

    #[test]
    fn bvp_for_n_one_has_a_regular_leading_coefficient(
        m in prop_oneof![Just("2"), Just("3"), Just("3/2"), Just("-1")],
        k in prop_oneof![Just("1"), Just("3"), Just("-1/2"), Just("5/2")],
        eps in prop_oneof![Just(1i8), Just(-1i8)],
    ) {
        let spec = EquationSpec::parse(m, "1", eps, &format!("t^({k})")).unwrap();
        let red = bvp_reduce(&spec, &Rational::from(1)).unwrap();
        let p = ODEProblem::from_bvp(&red, 1.0).unwrap();
        prop_assert!(!p.singular_at_zero);
        let lead = kmnsym::symkernel::differentiate(&red.ode.lhs, &Symbol::Phi(3));
        prop_assert!(lead.is_constant(), "{lead}");
    }
}

#[test]
fn the_time_orbit_case_is_reported() {
    let spec = EquationSpec::parse("2", "1", 1, "t^3").unwrap();
    let fam = &optimal_system_case7(&Rational::from(3)).unwrap()[1];
    let vf = fam.instantiate(0, &Rational::from(0)).unwrap();
    let ans = similarity_ansatz(&vf, &spec).unwrap();
    assert_eq!(ans.inverse, Inverse::Time);
}

/// Substituting the integrated profile back into the reduced equation, with
/// `phi'''` from finite differences of the sampled `phi''`.
#[test]
fn integrated_profile_satisfies_the_reduced_equation() {
    let spec = EquationSpec::parse("2", "1", 1, "t").unwrap();
    let red = bvp_reduce(&spec, &Rational::from(1)).unwrap();
    let tol = 1e-6;
    let mut p = ODEProblem::from_bvp(&red, 5.0).unwrap();
    p.samples = 4001;
    let g = integrate_ivp(&p, tol).unwrap();
    let h = g.omega[1] - g.omega[0];
    let terms: Vec<Expr> = normalize(&red.ode.lhs).terms();
    let slots = [Symbol::Omega, Symbol::Phi(0), Symbol::Phi(1), Symbol::Phi(2), Symbol::Phi(3)];
    let compiled: Vec<_> = terms.iter().map(|t| kmnsym::symkernel::Compiled::new(t, &slots).unwrap()).collect();
    let mut worst: f64 = 0.0;
    for i in 2..g.omega.len() - 2 {
        let d2 = |j: usize| g.phi[j][2];
        let d3 = (d2(i - 2) - 8.0 * d2(i - 1) + 8.0 * d2(i + 1) - d2(i + 2)) / (12.0 * h);
        let vals = [g.omega[i], g.phi[i][0], g.phi[i][1], g.phi[i][2], d3];
        let parts: Vec<f64> = compiled.iter().map(|c| c.eval(&vals)).collect();
        let scale = parts.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
        worst = worst.max(parts.iter().sum::<f64>().abs() / scale);
    }
    assert!(worst <= 10.0 * tol, "{worst}");
}
