//! Systems shared by the benchmarks in `benches/`.

use linsys_quanta::{NormalForm, TimeSignal};
use nalgebra::DMatrix;

/// Chain of `n` unit masses with nearest-neighbour springs and a uniform
/// magnetic-type coupling between neighbours.
pub fn chain(n: usize, coupling: f64) -> NormalForm {
    let v = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => 2.0 + 0.1 * i as f64,
        1 => -0.5,
        _ => 0.0,
    });
    let omega = DMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            coupling
        } else if i == j + 1 {
            -coupling
        } else {
            0.0
        }
    });
    NormalForm::new(1.0, omega, v, TimeSignal::Zero).expect("chain parameters are valid")
}
