use cfinsler_core::caratheodory::{forward, pluecker};
use cfinsler_core::hamjac::{
    calibration_1d, calibration_cara, calibration_weyl, hj_residual_1d, hj_residual_cara, hj_residual_weyl,
    mayer_field_1d, Lagrangian1d, ProductGrid, SlopeFunction,
};
use cfinsler_core::sampling::{random_jets, JetRanges};
use cfinsler_core::weyl::weyl_hamiltonian;
use cfinsler_core::{CotangentSample, JetSample, Lagrangian};

fn field_grid() -> ProductGrid {
    ProductGrid::new(&[(0.0, 1.0), (0.0, 1.0), (-0.5, 0.5), (-0.5, 0.5)], &[8, 8, 8, 8]).unwrap()
}

fn z_samples(count: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    random_jets(77, 2, count, JetRanges { y_radius: 0.0, z_norm: (0.01, 3.0) })
        .into_iter()
        .map(|s| (s.z1, s.z2))
        .collect()
}

/// Affine `S^α = π^α·y + ε^α_β t^β` from forward momenta of the linear map
/// with Jacobian columns `z1`, `z2`.
fn affine_cara_slope(l: &Lagrangian, z1: &[f64], z2: &[f64], w: f64) -> SlopeFunction {
    let m = forward(l, &JetSample::new(vec![0.0, 0.0], z1.to_vec(), z2.to_vec()).unwrap(), w, None).unwrap();
    SlopeFunction::sample(field_grid(), 2, |x| {
        (0..2)
            .map(|a| m.pi[(a, 0)] * x[2] + m.pi[(a, 1)] * x[3] + m.eps[(a, 0)] * x[0] + m.eps[(a, 1)] * x[1])
            .collect()
    })
    .unwrap()
}

#[test]
fn one_variable_theory() {
    let l = Lagrangian1d::quadratic();
    let g = ProductGrid::new(&[(1.0, 2.0), (-1.0, 1.0)], &[101, 21]).unwrap();
    let s = SlopeFunction::sample(g.clone(), 1, |x| vec![x[1] * x[1] / (2.0 * x[0])]).unwrap();
    assert!(hj_residual_1d(&l, &s).unwrap().max_abs() <= 1e-9);
    let psi = mayer_field_1d(&l, &s).unwrap();
    for (p, v) in psi.points.iter().zip(&psi.values) {
        assert!((v - p[1] / p[0]).abs() <= 1e-10);
    }
    let zs: Vec<f64> = (0..1000).map(|k| -3.0 + 6.0 * k as f64 / 999.0).collect();
    let cal = calibration_1d(&l, &s, &zs).unwrap();
    assert!(cal.min_slack >= -1e-9 && cal.equality_gap <= 1e-7, "{cal:?}");

    let zero = SlopeFunction::sample(g.clone(), 1, |_| vec![0.0]).unwrap();
    assert_eq!(hj_residual_1d(&l, &zero).unwrap().max_abs(), 0.0);
    assert!(mayer_field_1d(&l, &zero).unwrap().values.iter().all(|v| *v == 0.0));
    let lin = SlopeFunction::sample(g, 1, |x| vec![x[1]]).unwrap();
    assert!(hj_residual_1d(&l, &lin).unwrap().values.iter().all(|v| (v - 0.5).abs() <= 1e-12));
}

#[test]
fn numeric_one_variable_lagrangian_matches_closed_form() {
    let closed = Lagrangian1d::with_derivatives(
        |t, _, z| 0.5 * t * z * z + 0.25 * z.powi(4),
        |t, _, z| t * z + z.powi(3),
        |t, _, z| t + 3.0 * z * z,
    );
    let numeric = Lagrangian1d::new(|t, _, z| 0.5 * t * z * z + 0.25 * z.powi(4));
    for p in [-2.0, -0.3, 0.0, 0.7, 1.9] {
        let (a, ha) = closed.hamiltonian(1.3, 0.0, p).unwrap();
        let (b, hb) = numeric.hamiltonian(1.3, 0.0, p).unwrap();
        assert!((a - b).abs() <= 1e-8 && (ha - hb).abs() <= 1e-8);
        assert!((1.3 * a + a.powi(3) - p).abs() <= 1e-10);
    }
}

#[test]
fn weyl_theory() {
    let l = Lagrangian::flat(2);
    let zero = SlopeFunction::sample(field_grid(), 2, |_| vec![0.0, 0.0]).unwrap();
    assert_eq!(hj_residual_weyl(&l, &zero).unwrap().max_abs(), 0.0);
    let c = 0.7;
    let drift = SlopeFunction::sample(field_grid(), 2, |x| vec![c * x[0], c * x[1]]).unwrap();
    assert!(hj_residual_weyl(&l, &drift).unwrap().values.iter().all(|v| (v - 2.0 * c).abs() <= 1e-12));
    let a = 1.3;
    let tilt = SlopeFunction::sample(field_grid(), 2, |x| vec![a * x[2], a * x[3]]).unwrap();
    assert!(hj_residual_weyl(&l, &tilt).unwrap().values.iter().all(|v| (v - a * a).abs() <= 1e-12));

    // S¹ = p¹·y − H(p)t¹, S² = p²·y solves the equation for any constant p.
    let q = Lagrangian::quartic_ratio(2, 0.1);
    let p = CotangentSample::new(vec![0.0, 0.0], vec![0.4, -0.2], vec![0.1, 0.8]).unwrap();
    let h = weyl_hamiltonian(&q, &p).unwrap();
    let s = SlopeFunction::sample(field_grid(), 2, |x| {
        vec![p.p1[0] * x[2] + p.p1[1] * x[3] - h * x[0], p.p2[0] * x[2] + p.p2[1] * x[3]]
    })
    .unwrap();
    assert!(hj_residual_weyl(&q, &s).unwrap().max_abs() <= 1e-10);
    let cal = calibration_weyl(&q, &s, &z_samples(1000)).unwrap();
    assert!(cal.min_slack >= -1e-9 && cal.equality_gap <= 1e-6, "{cal:?}");
}

#[test]
fn caratheodory_theory() {
    let l = Lagrangian::flat(2);
    let (z1, z2) = ([1.0, 0.2], [0.3, 0.6]);
    let a = pluecker(&forward(&l, &JetSample::new(vec![0.0; 2], z1.to_vec(), z2.to_vec()).unwrap(), 0.0, None).unwrap());
    assert!(a.vec_a(0, 1).abs() < 0.9);

    let s0 = affine_cara_slope(&l, &z1, &z2, 0.0);
    assert!(hj_residual_cara(&l, &s0).unwrap().max_abs() <= 1e-7);
    let cal = calibration_cara(&l, &s0, &z_samples(1000)).unwrap();
    assert!(cal.min_slack >= -1e-9 && cal.equality_gap <= 1e-6, "{cal:?}");

    let s1 = affine_cara_slope(&l, &z1, &z2, 1.0);
    assert!(hj_residual_cara(&l, &s1).unwrap().values.iter().all(|v| (v - 1.0).abs() <= 1e-6));

    // Rank-one ε with π = 0.
    let r1 = SlopeFunction::sample(field_grid(), 2, |x| vec![(2.0 * x[0]).sin(), 0.4]).unwrap();
    assert!(hj_residual_cara(&l, &r1).unwrap().max_abs() <= 1e-12);
}
