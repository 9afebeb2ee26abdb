//! JSON shapes of command outputs.

use linsys_quanta::linalg::{CMatrix, CVector};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Serialize, Clone, Copy, Debug, PartialEq)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Complex {
    fn from(z: Complex64) -> Self {
        Complex { re: z.re, im: z.im }
    }
}

pub fn complexes(v: &CVector) -> Vec<Complex> {
    v.iter().map(|&z| z.into()).collect()
}

pub fn rows(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..a.nrows()).map(|i| a.row(i).iter().cloned().collect()).collect()
}

pub fn vector(v: &DVector<f64>) -> Vec<f64> {
    v.iter().cloned().collect()
}

#[derive(Serialize, Debug)]
pub struct SplitMatrix {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&CMatrix> for SplitMatrix {
    fn from(a: &CMatrix) -> Self {
        SplitMatrix {
            re: rows(&a.map(|z| z.re)),
            im: rows(&a.map(|z| z.im)),
        }
    }
}

#[derive(Serialize, Debug)]
pub struct Amplitude {
    #[serde(rename = "R")]
    pub r: Vec<Complex>,
    #[serde(rename = "P")]
    pub p: Vec<Complex>,
}

#[derive(Serialize, Debug)]
pub struct Modes {
    pub freqs: Vec<Complex>,
    pub amps: Vec<Amplitude>,
    pub pairing: Vec<usize>,
}

#[derive(Serialize, Debug)]
pub struct Ground {
    #[serde(rename = "K0")]
    pub k0: SplitMatrix,
    pub selection: Vec<usize>,
    pub residual: f64,
    pub min_eigenvalue_re: f64,
    pub trace_imag: f64,
    pub zero_point_energy: f64,
    pub physical_selections: usize,
}

#[derive(Serialize, Debug)]
pub struct Level {
    pub index: Vec<usize>,
    pub energy: f64,
}

#[derive(Serialize, Debug)]
pub struct Coefficient {
    pub index: Vec<usize>,
    pub re: f64,
    pub im: f64,
}

#[derive(Serialize, Debug)]
pub struct Center {
    #[serde(rename = "R")]
    pub r: Vec<f64>,
    #[serde(rename = "P")]
    pub p: Vec<f64>,
}

#[derive(Serialize, Debug)]
pub struct GridCheck {
    pub points: Vec<usize>,
    pub extent: Vec<f64>,
    /// Largest |direct − factored| relative to the largest |Ψ|.
    pub form_difference: f64,
    /// Largest |expansion − direct| relative to the largest |Ψ|.
    pub expansion_difference: f64,
}

#[derive(Serialize, Debug)]
pub struct Coherent {
    pub lambdas: Vec<Complex>,
    pub t: f64,
    pub center: Center,
    pub phase: f64,
    pub truncation: usize,
    pub coefficients: Vec<Coefficient>,
    pub grid_check: Option<GridCheck>,
}

#[derive(Serialize, Debug)]
pub struct StateCheck {
    pub index: Vec<usize>,
    pub energy: f64,
    pub residual: f64,
    pub norm_error: f64,
}

#[derive(Serialize, Debug)]
pub struct Verify {
    pub points: Vec<usize>,
    pub extent: Vec<f64>,
    pub tolerance: f64,
    pub states: Vec<StateCheck>,
    pub max_gram_offdiagonal: f64,
    pub pass: bool,
}

impl Verify {
    pub fn table(&self) -> String {
        let mut s = format!(
            "grid {:?} points, extent {:?}, tolerance {:e}\n{:<12} {:>14} {:>12} {:>12}\n",
            self.points, self.extent, self.tolerance, "index", "energy", "residual", "norm error"
        );
        for st in &self.states {
            let idx = st.index.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",");
            s += &format!(
                "{:<12} {:>14.8} {:>12.3e} {:>12.3e}\n",
                format!("({idx})"),
                st.energy,
                st.residual,
                st.norm_error
            );
        }
        s += &format!(
            "max Gram off-diagonal {:.3e}\n{}\n",
            self.max_gram_offdiagonal,
            if self.pass { "PASS" } else { "FAIL" }
        );
        s
    }
}

#[derive(Serialize, Debug)]
pub struct HermiteValues {
    pub x: Vec<Complex>,
    pub values: Vec<Coefficient>,
}
