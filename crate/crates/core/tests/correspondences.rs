mod common;

use cfinsler_core::caratheodory::{
    cara_hamiltonian, comatrix_t, condensed_check, energy_momentum, forward, gauge_act, hermitian_closed_form,
    identity_residuals, pluecker, solve_z,
};
use cfinsler_core::sampling::{random_cotangent, random_jets, random_lambda, random_sl2, rng, JetRanges};
use cfinsler_core::weyl::{check_equivariance, legendre_forward, legendre_inverse, weyl_hamiltonian_with_point};
use cfinsler_core::{Complex64, CotangentSample, JetSample, Lagrangian, PlueckerA};
use common::*;
use nalgebra::{DMatrix, DVector, Matrix2};
use proptest::prelude::*;

fn jet_distance(a: &JetSample, b: &JetSample) -> f64 {
    max_abs_diff(&a.z_flat(), &b.z_flat())
}

fn cot_distance(a: &CotangentSample, b: &CotangentSample) -> f64 {
    max_abs_diff(&a.p1, &b.p1).max(max_abs_diff(&a.p2, &b.p2))
}

#[test]
fn weyl_round_trips_both_ways() {
    for (name, l) in presets() {
        for s in random_jets(31, 2, 100, JetRanges::default()) {
            let p = legendre_forward(&l, &s).unwrap();
            let back = legendre_inverse(&l, &p).unwrap();
            assert!(jet_distance(&back, &s) <= 1e-8, "{name}");
        }
        let mut r = rng(32);
        for _ in 0..100 {
            let p = random_cotangent(&mut r, 2, JetRanges::default());
            let z = legendre_inverse(&l, &p).unwrap();
            assert!(cot_distance(&legendre_forward(&l, &z).unwrap(), &p) <= 1e-8, "{name}");
        }
    }
}

#[test]
fn weyl_hamiltonian_identities() {
    let mut r = rng(41);
    for (name, l) in presets() {
        for _ in 0..100 {
            let p = random_cotangent(&mut r, 2, JetRanges::default());
            let (z, h) = weyl_hamiltonian_with_point(&l, &p).unwrap();
            assert!(h >= 0.0);
            assert!((h - l.value(&z)).abs() <= 1e-7 * (1.0 + h), "{name}");
            let lambda = random_lambda(&mut r, (0.1, 10.0));
            let (_, hl) = weyl_hamiltonian_with_point(&l, &p.scaled(lambda)).unwrap();
            assert!((hl - lambda.norm_sqr() * h).abs() <= 1e-7 * (1.0 + hl), "{name}: {hl} {h}");
        }
    }
}

/// `h = g − iω` for `g = I`, `ω₁₂ = ½`.
fn hermitian_half_matrix() -> DMatrix<Complex64> {
    let (one, half) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.5));
    DMatrix::from_row_slice(2, 2, &[one, -half, half, one])
}

#[test]
fn hermitian_hamiltonian_matches_inverse_metric_form() {
    let l = hermitian_half();
    let mut r = rng(43);
    for _ in 0..20 {
        let c = random_cotangent(&mut r, 2, JetRanges::default());
        let (z, h) = weyl_hamiltonian_with_point(&l, &c).unwrap();
        let hmat = hermitian_half_matrix();
        // Oracle: η = h⁻¹ by explicit 2×2 inversion, H = ½ p̄ᵀ η p.
        let det = hmat[(0, 0)] * hmat[(1, 1)] - hmat[(0, 1)] * hmat[(1, 0)];
        let eta = [
            [hmat[(1, 1)] / det, -hmat[(0, 1)] / det],
            [-hmat[(1, 0)] / det, hmat[(0, 0)] / det],
        ];
        let p = c.p();
        let zo = [eta[0][0] * p[0] + eta[0][1] * p[1], eta[1][0] * p[0] + eta[1][1] * p[1]];
        let q = p[0].conj() * zo[0] + p[1].conj() * zo[1];
        assert!((h - 0.5 * q.re).abs() <= 1e-10 && q.im.abs() <= 1e-12);
        let zc = z.z();
        assert!((zc[0] - zo[0]).norm() <= 1e-10 && (zc[1] - zo[1]).norm() <= 1e-10);
    }
}

#[test]
fn legendre_equivariance() {
    let s = JetSample::new(vec![0.2, -0.1], vec![0.7, -0.3], vec![0.4, 0.9]).unwrap();
    for (name, l) in presets() {
        for lambda in [Complex64::new(2.0, 1.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0)] {
            let (r1, r2) = check_equivariance(&l, &s, lambda).unwrap();
            assert!(r1 <= 1e-7 && r2 <= 1e-7, "{name}");
        }
    }
}

fn elliptic_samples() -> Vec<JetSample> {
    random_jets(51, 2, 60, JetRanges::default())
}

/// At `w = 0` the stationary point of `W` is a whole complex line for
/// conformal `z`; below this conformality defect `|f|/(2F)` it is too
/// flat to resolve. For flat `F` the defect is `√(1 − A₁₂²)`.
const MIN_CONFORMALITY_DEFECT: f64 = 0.14;

#[test]
fn cara_round_trips() {
    for (name, l) in presets() {
        for w in [0.0, 1.0, 5.0] {
            for s in elliptic_samples() {
                let m = forward(&l, &s, w, None).unwrap();
                assert!((m.determinant(&s) - (l.value(&s) + w)).abs() <= 1e-8 * (1.0 + w));
                let a = pluecker(&m);
                let defect = energy_momentum(&l, &s).unwrap().hopf().norm() / (2.0 * l.value(&s));
                if w == 0.0 && defect < MIN_CONFORMALITY_DEFECT {
                    continue;
                }
                let sol = cara_hamiltonian(&l, &s.y, &a).unwrap();
                assert!(jet_distance(&sol.z, &s) <= 1e-8, "{name} w={w}");
                assert!((sol.hamiltonian - w).abs() <= 1e-8, "{name} w={w}");
                assert!((sol.hamiltonian - sol.w_value).abs() <= 1e-8, "{name} w={w}");
                assert!(sol.side_residual.abs() <= 1e-8);
                assert!(identity_residuals(&l, &a, &sol.z, sol.hamiltonian).unwrap().max_abs() <= 1e-7);
                let (t, p) = comatrix_t(&m, &s).unwrap();
                assert!((t * p - Matrix2::identity()).amax() <= 1e-10);
            }
        }
    }
}

#[test]
fn gauge_orbits_share_plucker_coordinates() {
    let mut r = rng(61);
    let l = Lagrangian::quartic_ratio(2, 0.1);
    for s in elliptic_samples().iter().take(10) {
        let m = forward(&l, s, 1.0, None).unwrap();
        let a = pluecker(&m);
        for _ in 0..50 {
            let g = random_sl2(&mut r);
            assert!(pluecker(&gauge_act(&g, &m).unwrap()).distance(&a) <= 1e-12 * (1.0 + a.max_abs()));
        }
    }
}

#[test]
fn gauged_forward_map_keeps_invariants() {
    let l = Lagrangian::flat(2);
    let s = JetSample::new(vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
    let base = forward(&l, &s, 0.0, None).unwrap();
    assert!((base.pi.clone() - DMatrix::identity(2, 2)).amax() <= 1e-14 && base.eps.amax() <= 1e-14);
    let g = Matrix2::new(1.0, 1.0, 0.0, 1.0);
    let gauged = forward(&l, &s, 0.0, Some(g)).unwrap();
    assert_ne!(gauged, base);
    assert!(pluecker(&gauged).distance(&pluecker(&base)) <= 1e-14);
    let five = forward(&l, &s, 5.0, None).unwrap();
    assert!((five.determinant(&s) - 6.0).abs() <= 1e-12);
}

#[test]
fn hermitian_closed_form_matches_newton() {
    let l = hermitian_half();
    let h = hermitian_half_matrix();
    for w in [0.0, 1.0, 5.0] {
        for s in elliptic_samples().iter().take(30) {
            let a = pluecker(&forward(&l, s, w, None).unwrap());
            let cf = hermitian_closed_form(&h, &a).unwrap();
            let sol = cara_hamiltonian(&l, &s.y, &a).unwrap();
            let z = sol.z.z();
            for (p, q) in cf.z.iter().zip(&z) {
                assert!((p - q).norm() <= 1e-8);
            }
            assert!((cf.hamiltonian - sol.hamiltonian).abs() <= 1e-8);
            assert!(cf.imaginary.abs() <= 1e-10);
            let em = energy_momentum(&l, &sol.z).unwrap();
            let c = condensed_check(&h, &a, &z, sol.hamiltonian, &em).unwrap();
            assert!(c.residual <= 1e-7 * c.scale);
            let wrong = condensed_check(&h, &a, &z, sol.hamiltonian + 1.0, &em).unwrap();
            assert!(wrong.residual >= 0.1);
        }
    }
}

#[test]
fn cara_hamiltonian_scales_with_source() {
    let l = Lagrangian::sphere_chart(2);
    let vec_a = DMatrix::from_row_slice(2, 2, &[0.0, 0.1, -0.1, 0.0]);
    let a = PlueckerA::new(&vec_a, DVector::from_vec(vec![0.6, -0.2]), DVector::from_vec(vec![0.3, 0.5]), 0.25).unwrap();
    let y = [0.1, 0.3];
    let base = cara_hamiltonian(&l, &y, &a).unwrap();
    for lambda in [Complex64::new(2.0, 0.0), Complex64::new(0.3, 0.4), Complex64::new(0.0, -1.5)] {
        let scaled = cara_hamiltonian(&l, &y, &a.with_scaled_source(lambda)).unwrap();
        let want = lambda.norm_sqr() * (base.hamiltonian - a.scalar_a);
        assert!(((scaled.hamiltonian - a.scalar_a) - want).abs() <= 1e-7);
        for (p, q) in scaled.z.z().iter().zip(base.z.z()) {
            assert!((p - lambda * q).norm() <= 1e-7);
        }
    }
    let z = solve_z(&l, &y, &a).unwrap();
    assert!(jet_distance(&z, &base.z) == 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weyl_inverse_is_a_section(seed in 0u64..100_000, kappa in 0.0f64..0.2) {
        let l = Lagrangian::quartic_ratio(2, kappa);
        let mut r = rng(seed);
        let p = random_cotangent(&mut r, 2, JetRanges::default());
        let z = legendre_inverse(&l, &p).unwrap();
        prop_assert!(cot_distance(&legendre_forward(&l, &z).unwrap(), &p) <= 1e-8);
    }

    #[test]
    fn gauge_invariance_of_minors(seed in 0u64..100_000, w in 0.5f64..5.0) {
        let l = Lagrangian::sphere_chart(2);
        let s = &random_jets(seed, 2, 1, JetRanges::default())[0];
        let m = forward(&l, s, w, None).unwrap();
        let g = random_sl2(&mut rng(seed ^ 0x5a5a));
        let a = pluecker(&m);
        prop_assert!(pluecker(&gauge_act(&g, &m).unwrap()).distance(&a) <= 1e-12 * (1.0 + a.max_abs()));
    }
}
