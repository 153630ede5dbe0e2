use ctilde::baxter::{baxter_identity_residuals, cocycle_c, cocycle_word, point_as, transport_residuals, RepHandle};
use ctilde::koornwinder::compute_p;
use ctilde::linalg::{residual, vec_residual};
use ctilde::matchings::{enumerate_matchings, format_nu, intertwiner_psi, intertwining_residuals, matchmaker_matrices, parse_nu, Matching};
use ctilde::numerics::laurent::{divided_difference, laurent_mul, poly_residual, reflection_denominator};
use ctilde::numerics::params::Constraint;
use ctilde::numerics::sample_generic;
use ctilde::qkz::{build_polynomial_solution, check_mcondition, cm_alpha};
use ctilde::report::max_residual;
use ctilde::spinrep::{build_spin_rep, check_hecke_relations, check_tl_relations, highest_vector, murphy_y, zeta};
use ctilde::transfer::{hamiltonian_form_residuals, transfer_commutator};
use ctilde::{Error, LaurentPoly, ParamSet, WeylElem};
use num_complex::Complex64;
use proptest::prelude::*;

fn point(k: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((0.6f64..1.6, 0.0f64..std::f64::consts::TAU).prop_map(|(r, a)| Complex64::from_polar(r, a)), k)
}

fn poly(n: usize) -> impl Strategy<Value = LaurentPoly<f64>> {
    prop::collection::vec((prop::collection::vec(-2i32..=2, n), -1.0f64..1.0, -1.0f64..1.0), 1..6).prop_map(move |terms| {
        let mut f = LaurentPoly::zero(n);
        for (e, re, im) in terms {
            f.add_term(e, Complex64::new(re, im));
        }
        f
    })
}

fn word(n: usize, max_len: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..=n, 0..=max_len)
}

fn params(seed: u64, n: usize) -> ParamSet<f64> {
    sample_generic(seed, n, None).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn divided_difference_times_denominator(seed in 0u64..500, f in poly(2), j in 0usize..=2) {
        let p = params(seed, 2);
        let g = divided_difference(&f, j, &p).unwrap();
        let (c, delta) = reflection_denominator(j, 2, p.q());
        let den = LaurentPoly::one(2).sub(&LaurentPoly::monomial(delta, c));
        let lhs = g.mul(&den);
        let rhs = f.reflect(j, p.q()).sub(&f);
        prop_assert!(poly_residual(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn product_evaluates_multiplicatively(a in poly(3), b in poly(3), t in point(3)) {
        let ab = laurent_mul(&a, &b).unwrap();
        let lhs = ab.eval(&t).unwrap();
        let rhs = a.eval(&t).unwrap() * b.eval(&t).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn sampling_is_pure(seed in any::<u64>(), n in 1usize..=4) {
        prop_assert_eq!(sample_generic(seed, n, None).unwrap().to_json(), sample_generic(seed, n, None).unwrap().to_json());
    }

    #[test]
    fn action_is_a_homomorphism(g in word(3, 8), h in word(3, 8), t in point(3), seed in 0u64..100) {
        let p = params(seed, 3);
        let (g, h) = (WeylElem::from_word(&g, 3), WeylElem::from_word(&h, 3));
        let lhs = g.act_point(&h.act_point(&t, &p).unwrap(), &p).unwrap();
        let rhs = g.mul(&h).act_point(&t, &p).unwrap();
        prop_assert!(vec_residual(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn length_is_subadditive(g in word(3, 8), h in word(3, 8)) {
        let (g, h) = (WeylElem::from_word(&g, 3), WeylElem::from_word(&h, 3));
        prop_assert!(g.mul(&h).length() <= g.length() + h.length());
        prop_assert_eq!(WeylElem::from_word(&g.reduced_word(), 3), g.clone());
        prop_assert_eq!(g.reduced_word().len(), g.length());
    }

    #[test]
    fn translations_commute(i in 1usize..=4, j in 1usize..=4) {
        let (a, b) = (WeylElem::tau(i, 4), WeylElem::tau(j, 4));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
    }

    #[test]
    fn spin_relations_hold(seed in 0u64..1000, n in 2usize..=4) {
        let p = params(seed, n);
        let spin = build_spin_rep(&p).unwrap();
        prop_assert!(max_residual(&check_hecke_relations(&spin.hecke)) < 1e-10);
        prop_assert!(max_residual(&check_tl_relations(&spin.e, &spin.tl)) < 1e-10);
        let v = highest_vector(n);
        let z = zeta(&p);
        for i in 1..=n {
            let lhs = murphy_y(&spin.hecke, i).matvec(&v);
            let rhs: Vec<Complex64> = v.iter().map(|c| c * z[i - 1]).collect();
            prop_assert!(vec_residual(&lhs, &rhs) < 1e-10);
        }
    }

    #[test]
    fn generators_see_only_their_parameters(seed in 0u64..1000, other in point(6)) {
        let p = params(seed, 3);
        let keep0 = ParamSet::new(3, other[0], *p.kappa0(), other[2], other[3], other[4], other[5], *p.psi0(), other[1]).unwrap();
        let keepn = ParamSet::new(3, other[0], other[1], other[2], *p.kappan(), other[4], other[5], other[3], *p.psin()).unwrap();
        let keepk = ParamSet::new(3, other[0], other[1], *p.kappa_sqrt(), other[3], other[4], other[5], other[2], other[5]).unwrap();
        let t = |x: &ParamSet<f64>| build_spin_rep(x).unwrap().hecke.t;
        let (tp, t0, tn, tk) = (t(&p), t(&keep0), t(&keepn), t(&keepk));
        prop_assert!(residual(&tp[0], &t0[0]) < 1e-14);
        prop_assert!(residual(&tp[3], &tn[3]) < 1e-14);
        prop_assert!(residual(&tp[1], &tk[1]) < 1e-14);
        prop_assert!(residual(&tp[2], &tk[2]) < 1e-14);
    }

    #[test]
    fn matchmaker_intertwined(seed in 0u64..1000, n in 2usize..=4) {
        let p = params(seed, n);
        let tw = intertwiner_psi(&p).unwrap();
        let omega = matchmaker_matrices(n, &tw.tl, &tw.beta0, &tw.beta1).unwrap();
        prop_assert!(max_residual(&check_tl_relations(&omega, &tw.tl)) < 1e-10);
        let spin = build_spin_rep(&p).unwrap();
        prop_assert!(max_residual(&intertwining_residuals(&tw, &spin).unwrap()) < 1e-10);
    }

    #[test]
    fn baxterized_identities(seed in 0u64..1000, n in 2usize..=4, xy in point(2)) {
        let p = params(seed, n);
        let rep = RepHandle::spin(&p).unwrap();
        match baxter_identity_residuals(&rep, &xy[0], &xy[1]) {
            Ok(rs) => prop_assert!(max_residual(&rs) < 1e-9, "{rs:?}"),
            Err(Error::Pole { .. }) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn cocycle_independent_of_word(seed in 0u64..1000, w in word(2, 8), t in point(2)) {
        let p = params(seed, 2);
        let rep = RepHandle::spin(&p).unwrap();
        let g = WeylElem::from_word(&w, 2);
        let t = point_as::<f64>(&t);
        if let (Ok(a), Ok(b)) = (cocycle_word(&rep, &w, &t), cocycle_c(&rep, &g, &t)) {
            prop_assert!(residual(&a, &b) < 1e-9);
        }
    }

    #[test]
    fn transport_paths_agree(seed in 0u64..1000, n in 2usize..=3, t in point(3)) {
        let p = params(seed, n);
        let rep = RepHandle::spin(&p).unwrap();
        if let Ok(rs) = transport_residuals(&rep, &t[..n]) {
            prop_assert!(max_residual(&rs) < 1e-8, "{rs:?}");
        }
    }

    #[test]
    fn transfer_matrices_commute(seed in 0u64..1000, pt in point(4)) {
        let p = params(seed, 2);
        if let Ok(r) = transfer_commutator(&p, &pt[0], &pt[1], &pt[2..]) {
            prop_assert!(r.residual < 1e-8);
        }
    }

    #[test]
    fn hamiltonian_forms_agree(seed in 0u64..1000, n in 2usize..=3) {
        let p = params(seed, n);
        for r in hamiltonian_form_residuals(&p).unwrap() {
            let tol = if r.name.contains("transfer") { 1e-7 } else { 1e-9 };
            prop_assert!(r.residual < tol, "{} {}", r.name, r.residual);
        }
    }

    #[test]
    fn cm_alpha_is_linear(seed in 0u64..1000, f in poly(2), g in poly(2), c in point(1)) {
        let p = params(seed, 2);
        let lhs = cm_alpha(&f.scale(&c[0]).add(&g), &p).unwrap();
        let (af, ag) = (cm_alpha(&f, &p).unwrap(), cm_alpha(&g, &p).unwrap());
        for ((x, y), z) in lhs.components.iter().zip(&af.components).zip(&ag.components) {
            prop_assert!(poly_residual(x, &y.scale(&c[0]).add(z)) < 1e-10);
        }
    }

    #[test]
    fn refusal_iff_condition_fails(seed in 0u64..1000, m in -1i32..=1, constrained in any::<bool>()) {
        let constraint = constrained.then_some(Constraint::MCondition { m });
        let p = sample_generic(seed, 2, constraint).unwrap();
        let ok = check_mcondition(&p, m).satisfied;
        prop_assert_eq!(ok, constrained);
        match build_polynomial_solution(&p, m) {
            Ok(_) => prop_assert!(ok),
            Err(Error::ConditionUnsatisfied(_)) => prop_assert!(!ok),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn koornwinder_is_monic_and_supported(seed in 0u64..1000, lambda in prop::collection::vec(-1i32..=1, 2)) {
        let p = params(seed, 2);
        let f = compute_p(&lambda, &p).unwrap();
        prop_assert_eq!(f.coeff(&lambda), Complex64::new(1.0, 0.0));
        let norm = |e: &[i32]| e.iter().map(|x| x.abs()).sum::<i32>();
        prop_assert!(f.terms().keys().all(|e| norm(e) <= norm(&lambda)));
    }
}

#[test]
fn nu_is_a_bijection() {
    for n in 1..=6 {
        let ms = enumerate_matchings(n).unwrap();
        assert_eq!(ms.len(), 1 << n);
        for (k, m) in ms.iter().enumerate() {
            let nu = m.nu();
            assert_eq!(Matching::from_nu(&nu), *m);
            assert_eq!(ctilde::matchings::nu_index(&nu), k);
            assert_eq!(parse_nu(&format_nu(&nu)).unwrap(), nu);
        }
    }
}
