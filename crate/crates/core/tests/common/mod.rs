#![allow(dead_code)]

use linsys_quanta::model::{NormalForm, TimeSignal};
use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.random_range(-scale..scale))
}

pub fn random_antisymmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DMatrix<f64> {
    let a = random_matrix(rng, n, scale);
    (&a - a.transpose()) * 0.5
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DMatrix<f64> {
    let a = random_matrix(rng, n, scale);
    (&a + a.transpose()) * 0.5
}

/// Normal form with `V + Ω²` positive definite, so every mode is real.
pub fn random_stable(rng: &mut ChaCha8Rng, n: usize) -> NormalForm {
    let mass = rng.random_range(0.5..2.0);
    let omega = random_antisymmetric(rng, n, 1.0);
    let b = random_matrix(rng, n, 1.0);
    let v = omega.transpose() * &omega + b.transpose() * &b + DMatrix::identity(n, n) * 0.3;
    NormalForm::new(mass, omega, v, TimeSignal::Zero).unwrap()
}

/// Normal form with arbitrary symmetric V; modes may be complex.
pub fn random_any(rng: &mut ChaCha8Rng, n: usize) -> NormalForm {
    let mass = rng.random_range(0.5..2.0);
    let omega = random_antisymmetric(rng, n, 1.0);
    let v = random_symmetric(rng, n, 2.0);
    NormalForm::new(mass, omega, v, TimeSignal::Zero).unwrap()
}

pub fn magnetic(q: f64, u: f64) -> NormalForm {
    NormalForm::new(
        1.0,
        DMatrix::from_row_slice(2, 2, &[0.0, q, -q, 0.0]),
        DMatrix::identity(2, 2) * u,
        TimeSignal::Zero,
    )
    .unwrap()
}

pub fn anisotropic() -> NormalForm {
    NormalForm::oscillator(1.0, &[1.0, 1.7])
}

pub fn sho() -> NormalForm {
    NormalForm::oscillator(1.0, &[1.0])
}

pub fn inverted() -> NormalForm {
    NormalForm::new(1.0, DMatrix::zeros(1, 1), DMatrix::from_element(1, 1, -1.0), TimeSignal::Zero).unwrap()
}
