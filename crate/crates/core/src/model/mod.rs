//! General linear Hamiltonians and their reduction to normal form.
//!
//! A general system is
//! `H = π·F·π/2m + ξ·Q·π + (m/2) ξ·U·ξ + m f(t)·ξ + h(t)·π/m`.
//! With `Oᵀ F O = I`, `W = O⁻¹ Q O = S + Ω` (S symmetric, Ω antisymmetric) and the
//! canonical map `r = Oᵀ ξ`, `p = O⁻¹ π + m S r + Oᵀ h(t)` it becomes
//! `H = p²/2m + r·Ω·p + (m/2) r·V·r + m g(t)·r + (time-only term)`.

mod signal;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{asymmetry, max_abs, sorted_symmetric_eigen, symmetrize};

pub use signal::TimeSignal;

/// Relative tolerance applied to the symmetry checks on input matrices.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct GeneralHamiltonian {
    pub dim: usize,
    pub mass: f64,
    /// Kinetic form F.
    pub kinetic: DMatrix<f64>,
    /// Cross coupling Q.
    pub coupling: DMatrix<f64>,
    /// Potential curvature U.
    pub potential: DMatrix<f64>,
    /// Force per unit mass f(t).
    pub force: TimeSignal,
    /// Momentum drive h(t).
    pub momentum_drive: TimeSignal,
}

/// On-disk model description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub dim: usize,
    pub mass: f64,
    #[serde(rename = "F")]
    pub f_matrix: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    pub q_matrix: Vec<Vec<f64>>,
    #[serde(rename = "U")]
    pub u_matrix: Vec<Vec<f64>>,
    #[serde(default)]
    pub f: TimeSignal,
    #[serde(default)]
    pub h: TimeSignal,
}

fn matrix_from_rows(name: &str, rows: &[Vec<f64>], dim: usize) -> Result<DMatrix<f64>> {
    if rows.len() != dim {
        return Err(Error::DimensionMismatch {
            what: format!("matrix {name} rows"),
            expected: dim,
            found: rows.len(),
        });
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            what: format!("matrix {name} columns"),
            expected: dim,
            found: bad.len(),
        });
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidModel(format!("matrix {name} has non-finite entries")));
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
}

fn rows_of(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..a.nrows()).map(|i| a.row(i).iter().cloned().collect()).collect()
}

impl GeneralHamiltonian {
    pub fn new(
        mass: f64,
        kinetic: DMatrix<f64>,
        coupling: DMatrix<f64>,
        potential: DMatrix<f64>,
        force: TimeSignal,
        momentum_drive: TimeSignal,
    ) -> Result<Self> {
        let ham = GeneralHamiltonian {
            dim: kinetic.nrows(),
            mass,
            kinetic,
            coupling,
            potential,
            force,
            momentum_drive,
        };
        ham.validate()?;
        Ok(ham)
    }

    pub fn from_model(file: &ModelFile) -> Result<Self> {
        if file.dim == 0 {
            return Err(Error::InvalidModel("dim must be positive".into()));
        }
        GeneralHamiltonian::new(
            file.mass,
            matrix_from_rows("F", &file.f_matrix, file.dim)?,
            matrix_from_rows("Q", &file.q_matrix, file.dim)?,
            matrix_from_rows("U", &file.u_matrix, file.dim)?,
            file.f.clone(),
            file.h.clone(),
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidModel(e.to_string()))?;
        GeneralHamiltonian::from_model(&file)
    }

    pub fn to_model(&self) -> ModelFile {
        ModelFile {
            dim: self.dim,
            mass: self.mass,
            f_matrix: rows_of(&self.kinetic),
            q_matrix: rows_of(&self.coupling),
            u_matrix: rows_of(&self.potential),
            f: self.force.clone(),
            h: self.momentum_drive.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim;
        if n == 0 {
            return Err(Error::InvalidModel("dim must be positive".into()));
        }
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(Error::InvalidModel(format!("mass must be positive, got {}", self.mass)));
        }
        for (name, a) in [("F", &self.kinetic), ("Q", &self.coupling), ("U", &self.potential)] {
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::DimensionMismatch {
                    what: format!("matrix {name}"),
                    expected: n,
                    found: if a.nrows() != n { a.nrows() } else { a.ncols() },
                });
            }
        }
        for (name, a) in [("F", &self.kinetic), ("U", &self.potential)] {
            let asym = asymmetry(a);
            if asym > SYMMETRY_TOLERANCE * max_abs(a).max(f64::MIN_POSITIVE) {
                return Err(Error::NonSymmetricInput {
                    matrix: name.into(),
                    asymmetry: asym,
                });
            }
        }
        self.force.validate(n)?;
        self.momentum_drive.validate(n)?;
        Ok(())
    }

    /// Hamilton's equations of the original variables: (dξ/dt, dπ/dt).
    pub fn equations_of_motion(
        &self,
        xi: &DVector<f64>,
        pi: &DVector<f64>,
        t: f64,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        let m = self.mass;
        let f = self.force.eval(t, self.dim)?;
        let h = self.momentum_drive.eval(t, self.dim)?;
        let dxi = &self.kinetic * pi / m + self.coupling.transpose() * xi + h / m;
        let dpi = -(&self.coupling * pi) - &self.potential * xi * m - f * m;
        Ok((dxi, dpi))
    }
}

/// Reduced system `p²/2m + r·Ω·p + (m/2) r·V·r + m g(t)·r`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm {
    pub dim: usize,
    pub mass: f64,
    /// Antisymmetric Ω.
    pub omega: DMatrix<f64>,
    /// Symmetric V.
    pub v: DMatrix<f64>,
    pub g: TimeSignal,
    /// Diagonalizing transform O with Oᵀ F O = I.
    pub transform: DMatrix<f64>,
    /// Symmetric part S of O⁻¹ Q O, needed to map momenta.
    pub stretch: DMatrix<f64>,
    /// Momentum shift Oᵀ h(t); the omitted time-only term is −|Oᵀh|²/2m.
    pub momentum_shift: TimeSignal,
}

impl NormalForm {
    /// A system given directly in normal form (O = I, no momentum shift).
    pub fn new(mass: f64, omega: DMatrix<f64>, v: DMatrix<f64>, g: TimeSignal) -> Result<Self> {
        let n = omega.nrows();
        // Reuse the general validation (mass, shapes, symmetry of V).
        GeneralHamiltonian::new(
            mass,
            DMatrix::identity(n, n),
            omega.clone(),
            v.clone(),
            g.clone(),
            TimeSignal::Zero,
        )?;
        let anti = max_abs(&(&omega + omega.transpose()));
        if anti > SYMMETRY_TOLERANCE * max_abs(&omega).max(f64::MIN_POSITIVE) {
            return Err(Error::NonSymmetricInput {
                matrix: "Omega (must be antisymmetric)".into(),
                asymmetry: anti,
            });
        }
        Ok(NormalForm {
            dim: n,
            mass,
            omega: (&omega - omega.transpose()) * 0.5,
            v: symmetrize(&v),
            g,
            transform: DMatrix::identity(n, n),
            stretch: DMatrix::zeros(n, n),
            momentum_shift: TimeSignal::Zero,
        })
    }

    /// Oscillator with `V = diag(freqs²)`, Ω = 0.
    pub fn oscillator(mass: f64, freqs: &[f64]) -> Self {
        let n = freqs.len();
        let v = DMatrix::from_diagonal(&DVector::from_iterator(n, freqs.iter().map(|w| w * w)));
        NormalForm::new(mass, DMatrix::zeros(n, n), v, TimeSignal::Zero)
            .expect("diagonal oscillator is always valid")
    }

    pub fn with_drive(mut self, g: TimeSignal) -> Result<Self> {
        g.validate(self.dim)?;
        self.g = g;
        Ok(self)
    }

    /// The omitted time-only Hamiltonian term.
    pub fn dropped_scalar(&self, t: f64) -> Result<f64> {
        let c = self.momentum_shift.eval(t, self.dim)?;
        Ok(-c.norm_squared() / (2.0 * self.mass))
    }

    /// Maps original canonical variables (ξ, π) to normal-form (r, p).
    pub fn to_normal_coordinates(
        &self,
        xi: &DVector<f64>,
        pi: &DVector<f64>,
        t: f64,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        let r = self.transform.transpose() * xi;
        let o_inv = self
            .transform
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidModel("transform O is singular".into()))?;
        let p = o_inv * pi + &self.stretch * &r * self.mass + self.momentum_shift.eval(t, self.dim)?;
        Ok((r, p))
    }

    /// Classical equations of motion (dr/dt, dp/dt).
    pub fn equations_of_motion(
        &self,
        r: &DVector<f64>,
        p: &DVector<f64>,
        t: f64,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        let m = self.mass;
        let g = self.g.eval(t, self.dim)?;
        let dr = p / m - &self.omega * r;
        let dp = -(&self.v * r * m) - &self.omega * p - g * m;
        Ok((dr, dp))
    }
}

/// Reduces a general linear Hamiltonian to normal form.
///
/// O is fixed as `E Λ^{-1/2}` from `F = E Λ Eᵀ` with ascending eigenvalues and
/// sign-fixed eigenvectors.
pub fn reduce(ham: &GeneralHamiltonian) -> Result<NormalForm> {
    ham.validate()?;
    let n = ham.dim;
    let m = ham.mass;
    let f = symmetrize(&ham.kinetic);
    let u = symmetrize(&ham.potential);

    let (lambda, e) = sorted_symmetric_eigen(&f);
    let lambda_max = lambda.iter().cloned().fold(0.0, f64::max);
    let lambda_min = lambda[0];
    if !(lambda_min > 1e-14 * lambda_max) {
        return Err(Error::NotPositiveDefinite {
            what: "kinetic matrix F".into(),
            min_eigenvalue: lambda_min,
        });
    }

    let scale = DMatrix::from_diagonal(&lambda.map(|x| x.sqrt()));
    let inv_scale = DMatrix::from_diagonal(&lambda.map(|x| 1.0 / x.sqrt()));
    let o = &e * &inv_scale;
    let o_inv = &scale * e.transpose();
    let o_inv_t = o_inv.transpose();

    let w = &o_inv * &ham.coupling * &o;
    let s = (&w + w.transpose()) * 0.5;
    let omega = (&w - w.transpose()) * 0.5;
    let v_raw = &o_inv * &u * &o_inv_t - &s * &s - (&omega * &s - &s * &omega);
    let v = symmetrize(&v_raw);

    let shift = ham.momentum_drive.map(&o.transpose());
    let g = TimeSignal::sum(vec![
        ham.force.map(&o_inv),
        ham.momentum_drive.map(&(&w * o.transpose() * (-1.0 / m))),
    ]);

    Ok(NormalForm {
        dim: n,
        mass: m,
        omega,
        v,
        g,
        transform: o,
        stretch: s,
        momentum_shift: shift,
    })
}

/// Value of the normal-form Hamiltonian (without the dropped time-only term).
pub fn hamiltonian_value(nf: &NormalForm, r: &DVector<f64>, p: &DVector<f64>, t: f64) -> Result<f64> {
    for (what, v) in [("position", r), ("momentum", p)] {
        if v.len() != nf.dim {
            return Err(Error::DimensionMismatch {
                what: what.into(),
                expected: nf.dim,
                found: v.len(),
            });
        }
    }
    let m = nf.mass;
    let g = nf.g.eval(t, nf.dim)?;
    Ok(p.norm_squared() / (2.0 * m)
        + r.dot(&(&nf.omega * p))
        + 0.5 * m * r.dot(&(&nf.v * r))
        + m * g.dot(r))
}
