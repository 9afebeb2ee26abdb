//! Tensor grids, finite-difference Hamiltonians and quadrature for checking states.
//!
//! `H = −(ħ²/2m)∇² + (ħ/i) r·Ω·∇ + (m/2) r·V·r (+ m g(t)·r)` is applied with
//! second-order central differences and second-order one-sided stencils on the
//! boundary. Residuals are measured on the interior, leaving out three layers.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, I};
use crate::model::NormalForm;
use crate::states::{psi_n, GroundState, SpectrumBasis, StationaryState};

pub const MAX_GRID_DIM: usize = 3;
/// Boundary layers excluded from residuals.
pub const EDGE_LAYERS: usize = 3;

pub fn default_points(dim: usize) -> usize {
    match dim {
        1 => 201,
        2 => 101,
        _ => 41,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    /// Half-widths L_j; axis j spans [−L_j, L_j].
    pub extent: Vec<f64>,
    pub points: Vec<usize>,
}

impl Grid {
    pub fn new(extent: Vec<f64>, points: Vec<usize>) -> Result<Self> {
        let dim = extent.len();
        if dim == 0 || dim > MAX_GRID_DIM {
            return Err(Error::InvalidGrid(format!(
                "grid dimension must be 1..={MAX_GRID_DIM}, got {dim}"
            )));
        }
        if points.len() != dim {
            return Err(Error::DimensionMismatch {
                what: "grid point counts".into(),
                expected: dim,
                found: points.len(),
            });
        }
        for (&l, &m) in extent.iter().zip(&points) {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidGrid(format!("extent must be positive, got {l}")));
            }
            if m < 5 || m % 2 == 0 {
                return Err(Error::InvalidGrid(format!("point count must be odd and at least 5, got {m}")));
            }
        }
        Ok(Grid { extent, points })
    }

    pub fn uniform(dim: usize, extent: f64, points: usize) -> Result<Self> {
        Grid::new(vec![extent; dim], vec![points; dim])
    }

    /// Extent `6 σ` with `σ = sqrt(ħ(1 + max_total)/(m λ_min(Re K₀)))` on every axis.
    pub fn auto(gs: &GroundState, max_total: usize, points: Option<usize>) -> Result<Self> {
        let dim = gs.dim();
        let lambda = gs.min_width_eigenvalue();
        let sigma = (gs.hbar * (1.0 + max_total as f64) / (gs.mass * lambda)).sqrt();
        Grid::uniform(dim, 6.0 * sigma, points.unwrap_or_else(|| default_points(dim)))
    }

    pub fn dim(&self) -> usize {
        self.extent.len()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.extent[axis] / (self.points[axis] - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn stride(&self, axis: usize) -> usize {
        self.points[axis + 1..].iter().product()
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            idx[axis] = flat % self.points[axis];
            flat /= self.points[axis];
        }
        idx
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(a, &i)| -self.extent[a] + i as f64 * self.spacing(a))
            .collect()
    }

    pub fn is_interior(&self, flat: usize) -> bool {
        self.multi_index(flat)
            .iter()
            .zip(&self.points)
            .all(|(&i, &m)| i >= EDGE_LAYERS && i + EDGE_LAYERS < m)
    }

    /// Trapezoid weight of a grid point.
    pub fn weight(&self, flat: usize) -> f64 {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(a, &i)| {
                let h = self.spacing(a);
                if i == 0 || i + 1 == self.points[a] {
                    0.5 * h
                } else {
                    h
                }
            })
            .product()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub points: Vec<usize>,
    pub values: Vec<Complex64>,
}

impl Field {
    fn zeros_like(grid: &Grid) -> Self {
        Field {
            points: grid.points.clone(),
            values: vec![c(0.0, 0.0); grid.len()],
        }
    }

    fn check(&self, grid: &Grid) -> Result<()> {
        if self.points != grid.points || self.values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

pub fn sample(f: impl Fn(&[f64]) -> Complex64, grid: &Grid) -> Field {
    Field {
        points: grid.points.clone(),
        values: (0..grid.len()).map(|k| f(&grid.point(k))).collect(),
    }
}

/// First and second derivatives of a line of samples.
fn line_derivatives(f: &[Complex64], h: f64, d1: &mut [Complex64], d2: &mut [Complex64]) {
    let m = f.len();
    for i in 1..m - 1 {
        d1[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
        d2[i] = (f[i + 1] - f[i] * 2.0 + f[i - 1]) / (h * h);
    }
    d1[0] = (f[0] * -3.0 + f[1] * 4.0 - f[2]) / (2.0 * h);
    d1[m - 1] = (f[m - 1] * 3.0 - f[m - 2] * 4.0 + f[m - 3]) / (2.0 * h);
    d2[0] = (f[0] * 2.0 - f[1] * 5.0 + f[2] * 4.0 - f[3]) / (h * h);
    d2[m - 1] = (f[m - 1] * 2.0 - f[m - 2] * 5.0 + f[m - 3] * 4.0 - f[m - 4]) / (h * h);
}

/// Gradient components and Laplacian of a field.
fn derivatives(f: &Field, grid: &Grid) -> (Vec<Vec<Complex64>>, Vec<Complex64>) {
    let dim = grid.dim();
    let n = grid.len();
    let mut grad = vec![vec![c(0.0, 0.0); n]; dim];
    let mut lap = vec![c(0.0, 0.0); n];
    for axis in 0..dim {
        let m = grid.points[axis];
        let stride = grid.stride(axis);
        let h = grid.spacing(axis);
        let mut line = vec![c(0.0, 0.0); m];
        let mut d1 = vec![c(0.0, 0.0); m];
        let mut d2 = vec![c(0.0, 0.0); m];
        for start in 0..n {
            if (start / stride) % m != 0 {
                continue;
            }
            for i in 0..m {
                line[i] = f.values[start + i * stride];
            }
            line_derivatives(&line, h, &mut d1, &mut d2);
            for i in 0..m {
                grad[axis][start + i * stride] = d1[i];
                lap[start + i * stride] += d2[i];
            }
        }
    }
    (grad, lap)
}

/// `Hf` without the drive term.
pub fn apply_hamiltonian(nf: &NormalForm, f: &Field, grid: &Grid, hbar: f64, mass: f64) -> Result<Field> {
    apply(nf, f, grid, hbar, mass, None)
}

/// `Hf` including `m g(t)·r`.
pub fn apply_hamiltonian_at(nf: &NormalForm, f: &Field, grid: &Grid, hbar: f64, mass: f64, t: f64) -> Result<Field> {
    apply(nf, f, grid, hbar, mass, Some(t))
}

fn apply(nf: &NormalForm, f: &Field, grid: &Grid, hbar: f64, mass: f64, t: Option<f64>) -> Result<Field> {
    f.check(grid)?;
    let dim = grid.dim();
    if nf.dim != dim {
        return Err(Error::DimensionMismatch {
            what: "grid".into(),
            expected: nf.dim,
            found: dim,
        });
    }
    let g = match t {
        Some(t) => Some(nf.g.eval(t, dim)?),
        None => None,
    };
    let (grad, lap) = derivatives(f, grid);
    let mut out = Field::zeros_like(grid);
    for k in 0..grid.len() {
        let r = grid.point(k);
        let mut v = lap[k] * (-hbar * hbar / (2.0 * mass));
        let mut rot = c(0.0, 0.0);
        let mut pot = 0.0;
        for a in 0..dim {
            for b in 0..dim {
                rot += grad[b][k] * (r[a] * nf.omega[(a, b)]);
                pot += r[a] * nf.v[(a, b)] * r[b];
            }
        }
        if let Some(g) = &g {
            pot += 2.0 * (0..dim).map(|a| g[a] * r[a]).sum::<f64>();
        }
        v += rot * (-I * hbar) + f.values[k] * (0.5 * mass * pot);
        out.values[k] = v;
    }
    Ok(out)
}

/// Trapezoid quadrature of `conj(a)·b`.
pub fn inner_product(a: &Field, b: &Field, grid: &Grid) -> Result<Complex64> {
    a.check(grid)?;
    b.check(grid)?;
    Ok((0..grid.len())
        .map(|k| a.values[k].conj() * b.values[k] * grid.weight(k))
        .sum())
}

fn interior_norm(f: &[Complex64], grid: &Grid) -> f64 {
    (0..grid.len())
        .filter(|&k| grid.is_interior(k))
        .map(|k| f[k].norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `‖Hψ − Eψ‖ / ‖Eψ‖` over interior points.
pub fn eigen_residual_field(nf: &NormalForm, psi: &Field, energy: f64, grid: &Grid, hbar: f64, mass: f64) -> Result<f64> {
    let h = apply_hamiltonian(nf, psi, grid, hbar, mass)?;
    let diff: Vec<Complex64> = h.values.iter().zip(&psi.values).map(|(a, b)| a - b * energy).collect();
    let scaled: Vec<Complex64> = psi.values.iter().map(|b| b * energy).collect();
    Ok(interior_norm(&diff, grid) / interior_norm(&scaled, grid))
}

fn sample_state(basis: &SpectrumBasis, st: &StationaryState, grid: &Grid) -> Result<Field> {
    if basis.dim != grid.dim() {
        return Err(Error::DimensionMismatch {
            what: "grid".into(),
            expected: basis.dim,
            found: grid.dim(),
        });
    }
    let values = (0..grid.len())
        .map(|k| psi_n(basis, st, &grid.point(k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Field {
        points: grid.points.clone(),
        values,
    })
}

pub fn eigen_residual(nf: &NormalForm, basis: &SpectrumBasis, st: &StationaryState, grid: &Grid) -> Result<f64> {
    let psi = sample_state(basis, st, grid)?;
    eigen_residual_field(nf, &psi, st.energy, grid, basis.hbar, basis.mass)
}

/// Gram matrix `⟨ψ_a, ψ_b⟩` of the given states.
pub fn gram(basis: &SpectrumBasis, states: &[StationaryState], grid: &Grid) -> Result<crate::linalg::CMatrix> {
    let fields = states
        .iter()
        .map(|s| sample_state(basis, s, grid))
        .collect::<Result<Vec<_>>>()?;
    let n = fields.len();
    let mut g = crate::linalg::CMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let v = inner_product(&fields[a], &fields[b], grid)?;
            g[(a, b)] = v;
            g[(b, a)] = v.conj();
        }
    }
    Ok(g)
}

/// `|⟨a, Hb⟩ − ⟨Ha, b⟩| / (‖a‖‖b‖)`.
pub fn hermiticity_defect(nf: &NormalForm, a: &Field, b: &Field, grid: &Grid, hbar: f64, mass: f64) -> Result<f64> {
    let ha = apply_hamiltonian(nf, a, grid, hbar, mass)?;
    let hb = apply_hamiltonian(nf, b, grid, hbar, mass)?;
    let lhs = inner_product(a, &hb, grid)?;
    let rhs = inner_product(&ha, b, grid)?;
    let na = inner_product(a, a, grid)?.re.sqrt();
    let nb = inner_product(b, b, grid)?.re.sqrt();
    Ok((lhs - rhs).norm() / (na * nb))
}

/// `‖iħ∂_tΨ − HΨ‖ / ‖HΨ‖` over interior points of the inner frames, with ∂_t by
/// centered differences of equally spaced frames.
pub fn schrodinger_residual(
    nf: &NormalForm,
    frames: &[(f64, Field)],
    grid: &Grid,
    hbar: f64,
    mass: f64,
) -> Result<f64> {
    if frames.len() < 3 {
        return Err(Error::InvalidGrid("need at least three time frames".into()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for w in frames.windows(3) {
        let (t0, f0) = &w[0];
        let (t1, f1) = &w[1];
        let (t2, f2) = &w[2];
        let dt = t2 - t0;
        if ((t1 - t0) - (t2 - t1)).abs() > 1e-9 * dt.abs() {
            return Err(Error::InvalidGrid("time frames must be equally spaced".into()));
        }
        let h = apply_hamiltonian_at(nf, f1, grid, hbar, mass, *t1)?;
        let res: Vec<Complex64> = (0..grid.len())
            .map(|k| I * hbar * (f2.values[k] - f0.values[k]) / dt - h.values[k])
            .collect();
        num += interior_norm(&res, grid).powi(2);
        den += interior_norm(&h.values, grid).powi(2);
    }
    Ok((num / den).sqrt())
}
