mod common;

use cfinsler_core::diffcore::{eval_first, eval_hessian_z};
use cfinsler_core::lagrangian::{
    check_ellipticity, check_euler_identities, check_homogeneity, check_infinitesimal_invariance,
};
use cfinsler_core::sampling::{random_jets, random_lambda, rng, JetRanges};
use cfinsler_core::tensors::{
    check_null_identity, check_zero_homogeneity, christoffel, energy_decomposition, metric_bundle,
    reconstruction_error,
};
use cfinsler_core::{Complex64, HolomorphicField, JetSample, Lagrangian};
use common::*;
use proptest::prelude::*;

fn conformal_frame() -> JetSample {
    JetSample::new(vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]).unwrap()
}

#[test]
fn quartic_first_derivatives_match_richardson() {
    let l = Lagrangian::quartic_ratio(2, 0.1);
    for s in [conformal_frame(), JetSample::new(vec![0.1, 0.2], vec![1.0, 0.3], vec![-0.4, 0.7]).unwrap()] {
        let jet = eval_first(&l, &s).unwrap();
        let got: Vec<f64> = jet.dfdz.row(0).iter().chain(jet.dfdz.row(1).iter()).copied().collect();
        assert!(max_abs_diff(&got, &richardson_grad_z(&l, &s)) <= 1e-6);
        assert!(jet.dfdy.amax() == 0.0);
    }
}

#[test]
fn quartic_hessian_matches_richardson() {
    let l = Lagrangian::quartic_ratio(2, 0.1);
    let s = conformal_frame();
    let h = eval_hessian_z(&l, &s).unwrap();
    let oracle = richardson_hessian_z(&l, &s);
    assert!((&h.matrix - &oracle).amax() <= 1e-5);
}

#[test]
fn closed_forms_agree_with_differences_on_random_jets() {
    for (name, l) in presets() {
        let numeric = value_only(&l);
        for s in random_jets(11, 2, 100, JetRanges::default()) {
            let a = eval_first(&l, &s).unwrap();
            let b = eval_first(&numeric, &s).unwrap();
            let scale = a.dfdz.amax().max(1.0);
            assert!((&a.dfdz - &b.dfdz).amax() <= 1e-5 * scale, "{name}");
            assert!((&a.dfdy - &b.dfdy).amax() <= 1e-5 * a.dfdy.amax().max(1.0), "{name}");
            let ha = eval_hessian_z(&l, &s).unwrap();
            let hb = eval_hessian_z(&numeric, &s).unwrap();
            assert!((&ha.matrix - &hb.matrix).amax() <= 1e-5 * ha.matrix.amax().max(1.0), "{name}");
            assert!(ha.asymmetry() <= 1e-8 && hb.asymmetry() <= 1e-8);
        }
    }
}

#[test]
fn invariant_presets_are_homogeneous_and_satisfy_euler_identities() {
    let mut r = rng(3);
    let lambdas: Vec<Complex64> = (0..8).map(|_| random_lambda(&mut r, (0.1, 10.0))).collect();
    for (name, l) in presets() {
        let samples = random_jets(5, 2, 200, JetRanges::default());
        assert!(check_homogeneity(&l, &samples, &lambdas).unwrap().max_rel_error <= 1e-9, "{name}");
        for s in &samples {
            let (r1, r2) = check_euler_identities(&l, s).unwrap();
            let tol = 1e-8 * (l.value(s).abs() + 1.0);
            assert!(r1.abs() <= tol && r2.abs() <= tol, "{name}: {r1} {r2}");
        }
    }
}

#[test]
fn control_is_flagged_by_both_checks() {
    let l = Lagrangian::non_invariant_control(2);
    let s = JetSample::new(vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
    let rep = check_homogeneity(&l, &[s], &[Complex64::new(0.0, 1.0)]).unwrap();
    assert!(rep.max_rel_error >= 0.5);
    let s = JetSample::new(vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 0.0]).unwrap();
    let (r1, r2) = check_euler_identities(&l, &s).unwrap();
    assert!((r1 - 0.0).abs() < 1e-9);
    assert!((r2 - 2.0).abs() < 1e-9);
}

#[test]
fn infinitesimal_invariance_for_holomorphic_generators() {
    let fields = [
        HolomorphicField::monomial(Complex64::new(1.0, 0.0), 0),
        HolomorphicField::monomial(Complex64::new(1.0, 0.0), 1),
        HolomorphicField::monomial(Complex64::new(1.0, 0.0), 2),
        HolomorphicField::monomial(Complex64::new(0.0, 1.0), 2),
    ];
    let mut r = rng(8);
    for (name, l) in presets() {
        for s in random_jets(9, 2, 50, JetRanges::default()) {
            let t = random_lambda(&mut r, (0.2, 2.0));
            for x in &fields {
                let res = check_infinitesimal_invariance(&l, x, t, &s).unwrap();
                let tol = 1e-8 * (l.value(&s).abs() + 1.0) * x.derivative(t).norm().max(1.0);
                assert!(res.abs() <= tol, "{name}");
            }
        }
    }
}

#[test]
fn ellipticity_scan() {
    let samples = random_jets(21, 2, 300, JetRanges::default());
    assert!((check_ellipticity(&Lagrangian::flat(2), &samples).unwrap().c_est - 1.0).abs() < 1e-12);
    let at_origin: Vec<JetSample> = samples.iter().map(|s| JetSample { y: vec![0.0, 0.0], ..s.clone() }).collect();
    let c = check_ellipticity(&Lagrangian::sphere_chart(2), &at_origin).unwrap().c_est;
    assert!((c - 4.0).abs() < 1e-10);
    assert!(check_ellipticity(&Lagrangian::quartic_ratio(2, 0.1), &samples).unwrap().is_elliptic());
    assert!(!check_ellipticity(&Lagrangian::quartic_ratio(2, 10.0), &samples).unwrap().is_elliptic());
}

#[test]
fn tensor_identities_on_random_jets() {
    let mut r = rng(17);
    for (name, l) in presets() {
        for s in random_jets(13, 2, 100, JetRanges::default()) {
            assert!(reconstruction_error(&l, &s).unwrap() <= 1e-8, "{name}");
            let lambda = random_lambda(&mut r, (0.1, 10.0));
            assert!(check_zero_homogeneity(&l, &s, lambda).unwrap() <= 1e-6, "{name}");
            let mb = metric_bundle(&l, &s).unwrap();
            let bound = 1e-7 * (mb.a.amax() + mb.b.amax() + 1.0) * s.z_norm();
            assert!(check_null_identity(&l, &s).unwrap() <= bound, "{name}");
            let d = energy_decomposition(&l, &s).unwrap();
            assert!(d.recomposition_error <= 1e-7 * (l.value(&s).abs() + 1.0), "{name}");
            assert!(d.hermitian_imaginary.abs() <= 1e-7, "{name}");
            assert!(mb.is_positive_definite().unwrap(), "{name}");
        }
    }
}

#[test]
fn hermitian_discrimination() {
    let s = conformal_frame();
    for l in [Lagrangian::flat(2), hermitian_half(), Lagrangian::sphere_chart(2)] {
        let mb = metric_bundle(&l, &s).unwrap();
        assert!(mb.a.amax() <= 1e-8 && mb.b.amax() <= 1e-8);
    }
    // At the isotropic point Σ(zʲ)² = 0 the quartic Hessian is itself hermitian.
    let q = Lagrangian::quartic_ratio(2, 0.1);
    let mb = metric_bundle(&q, &s).unwrap();
    assert!(mb.a.amax().max(mb.b.amax()) <= 1e-12);
    let off = JetSample::new(vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 0.5]).unwrap();
    let mb = metric_bundle(&q, &off).unwrap();
    assert!(mb.a.amax().max(mb.b.amax()) >= 1e-3);
    assert!(check_null_identity(&q, &off).unwrap() <= 1e-7);
}

#[test]
fn hermitian_energy_split_by_hand() {
    let s = conformal_frame();
    let d = energy_decomposition(&hermitian_half(), &s).unwrap();
    assert!((d.dirichlet - 1.0).abs() < 1e-12);
    assert!((d.omega - 0.5).abs() < 1e-12);
    assert!((hermitian_half().value(&s) - 1.5).abs() < 1e-12);
}

#[test]
fn sphere_christoffel_against_hand_formula() {
    let l = Lagrangian::sphere_chart(2);
    for y in [[0.3, 0.0], [0.2, -0.5], [-0.7, 0.4]] {
        let c = christoffel(&l, &y).unwrap();
        let r2 = y[0] * y[0] + y[1] * y[1];
        // g = φ δ with φ = 4/(1+r²)², so Γ^m_kl = (δ_mk ∂_l + δ_ml ∂_k − δ_kl ∂_m) log √φ.
        let dlog = [-2.0 * y[0] / (1.0 + r2), -2.0 * y[1] / (1.0 + r2)];
        for m in 0..2 {
            for k in 0..2 {
                for l2 in 0..2 {
                    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                    let want = d(m, k) * dlog[l2] + d(m, l2) * dlog[k] - d(k, l2) * dlog[m];
                    assert!((c.gamma(m, k, l2) - want).abs() <= 1e-7);
                }
            }
        }
        assert!(c.gamma_asymmetry() <= 1e-7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hessian_blocks_reconstruct(seed in 0u64..10_000, kappa in 0.0f64..0.3) {
        let l = Lagrangian::quartic_ratio(2, kappa);
        let s = &random_jets(seed, 2, 1, JetRanges::default())[0];
        prop_assert!(reconstruction_error(&l, s).unwrap() <= 1e-8);
        let mb = metric_bundle(&l, s).unwrap();
        prop_assert!(mb.symmetry_defect() <= 1e-8);
    }

    #[test]
    fn homogeneity_holds_for_any_lambda(seed in 0u64..10_000, m in 0.1f64..10.0, theta in 0.0f64..6.283) {
        let lambda = Complex64::from_polar(m, theta);
        for (_, l) in presets() {
            let s = random_jets(seed, 2, 1, JetRanges::default());
            prop_assert!(check_homogeneity(&l, &s, &[lambda]).unwrap().max_rel_error <= 1e-9);
        }
    }
}
