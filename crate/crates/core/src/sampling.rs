//! Seeded random samples for property sweeps.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diffcore::JetSample;
use crate::weyl::CotangentSample;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Ranges that define a family of random jets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JetRanges {
    /// Each `yʲ` is uniform in `[-y_radius, y_radius]`.
    pub y_radius: f64,
    /// `‖z‖` is uniform in this interval.
    pub z_norm: (f64, f64),
}

impl Default for JetRanges {
    fn default() -> Self {
        JetRanges { y_radius: 1.0, z_norm: (0.5, 2.0) }
    }
}

fn direction(rng: &mut SampleRng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub fn random_jet(rng: &mut SampleRng, n: usize, ranges: JetRanges) -> JetSample {
    let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-ranges.y_radius..=ranges.y_radius)).collect();
    let r = rng.gen_range(ranges.z_norm.0..=ranges.z_norm.1);
    let d = direction(rng, 2 * n);
    let z1 = d[..n].iter().map(|v| v * r).collect();
    let z2 = d[n..].iter().map(|v| v * r).collect();
    JetSample { y, z1, z2 }
}

pub fn random_jets(seed: u64, n: usize, count: usize, ranges: JetRanges) -> Vec<JetSample> {
    let mut r = rng(seed);
    (0..count).map(|_| random_jet(&mut r, n, ranges)).collect()
}

pub fn random_cotangent(rng: &mut SampleRng, n: usize, ranges: JetRanges) -> CotangentSample {
    let j = random_jet(rng, n, ranges);
    CotangentSample { y: j.y, p1: j.z1, p2: j.z2 }
}

/// `λ` with `log|λ|` uniform over the modulus range and uniform argument.
pub fn random_lambda(rng: &mut SampleRng, modulus: (f64, f64)) -> Complex64 {
    let m = rng.gen_range(modulus.0.ln()..=modulus.1.ln()).exp();
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(m, theta)
}

/// A random element of SL(2, ℝ) with entries of moderate size.
pub fn random_sl2(rng: &mut SampleRng) -> Matrix2<f64> {
    loop {
        let a: f64 = rng.gen_range(-2.0..2.0);
        if a.abs() < 0.25 {
            continue;
        }
        let b: f64 = rng.gen_range(-2.0..2.0);
        let c: f64 = rng.gen_range(-2.0..2.0);
        let d = (1.0 + b * c) / a;
        return Matrix2::new(a, b, c, d);
    }
}
