//! Stationary ground state, excited states, coherent states and their expansion.
//!
//! With the N modes that build K₀ labeled (R_i, P_i, ω_i), excitations use the
//! conjugate amplitudes R_i*. Positions are written `r = Σ x_i R_i*`, and with
//! `Â = K₀ + K₀*`, `γ_ij = (m/ħ) R_i*·Â·R_j*` the stationary states are
//! `ψ_n ∝ H^γ_n(x) ψ₀` with energy `ħ(Σ n_i ω_i + Ω₀)`, `Ω₀ = ¼ Tr Â`.

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::classical::{CoefficientVector, ModeSet};
use crate::error::{Error, Result};
use crate::hermite::{evaluate_box, HermiteContext, MultiIndex};
use crate::linalg::{c, checked_inverse, dot, max_abs_c, CMatrix, CVector, I};
use crate::packet::normalization_constant;
use crate::riccati::{require_physical, ModeSelection, ShapeMatrix};
use crate::verify::{inner_product, sample, Grid};

/// Residual above which the mode relations are reported as violated.
pub const RELATION_TOLERANCE: f64 = 1e-7;
pub const MAX_TRUNCATION: usize = 16;
const COORDINATE_CONDITION: f64 = 1e12;
const FORM_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct GroundState {
    pub k0: ShapeMatrix,
    pub norm: f64,
    pub hbar: f64,
    pub mass: f64,
}

impl GroundState {
    pub fn new(k0: ShapeMatrix, hbar: f64, mass: f64) -> Result<Self> {
        require_physical(&k0, "stationary shape K0")?;
        let norm = normalization_constant(&k0, hbar, mass)?;
        Ok(GroundState { k0, norm, hbar, mass })
    }

    pub fn dim(&self) -> usize {
        self.k0.nrows()
    }

    /// Smallest eigenvalue of Re K₀, which sets the Gaussian width.
    pub fn min_width_eigenvalue(&self) -> f64 {
        crate::riccati::min_real_eigenvalue(&self.k0)
    }
}

pub fn psi0(gs: &GroundState, r: &[f64]) -> Complex64 {
    let n = gs.dim();
    let rv = CVector::from_iterator(n, r.iter().map(|&x| c(x, 0.0)));
    let q = (rv.transpose() * &gs.k0 * &rv)[(0, 0)];
    (-q * (gs.mass / (2.0 * gs.hbar))).exp() * gs.norm
}

/// Largest relation residuals found while building a basis.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RelationReport {
    pub shape_relation: f64,
    pub cross_pairing: f64,
    pub diagonal_pairing: f64,
    pub momentum_relation: f64,
    pub sum_pairing: f64,
    pub difference_pairing: f64,
    pub gamma_asymmetry: f64,
}

impl RelationReport {
    pub fn max(&self) -> f64 {
        [
            self.shape_relation,
            self.cross_pairing,
            self.diagonal_pairing,
            self.momentum_relation,
            self.sum_pairing,
            self.difference_pairing,
            self.gamma_asymmetry,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumBasis {
    pub dim: usize,
    pub mass: f64,
    pub hbar: f64,
    pub selection: ModeSelection,
    /// Whether the selected mode of pair i is the partner (negated frequency) rather than mode i.
    pub partner_selected: Vec<bool>,
    /// Frequencies ω_i of the selected modes.
    pub freqs: Vec<Complex64>,
    /// Conjugate amplitudes R_i* used for excitation.
    pub excitation_r: Vec<CVector>,
    pub excitation_p: Vec<CVector>,
    pub a: CMatrix,
    pub omega0: f64,
    pub gamma: HermiteContext,
    pub ground: GroundState,
    pub relations: RelationReport,
    coordinate_map: CMatrix,
}

fn scale2(a: &CVector, b: &CVector) -> f64 {
    (a.norm() * b.norm()).max(f64::MIN_POSITIVE)
}

pub fn build_basis(ms: &ModeSet, sel: &ModeSelection, k0: &ShapeMatrix, mass: f64, hbar: f64) -> Result<SpectrumBasis> {
    sel.validate(ms)?;
    let n = ms.dim;
    let ground = GroundState::new(k0.clone(), hbar, mass)?;
    let rs: Vec<&CVector> = sel.chosen.iter().map(|&k| &ms.amps[k].r).collect();
    let ps: Vec<&CVector> = sel.chosen.iter().map(|&k| &ms.amps[k].p).collect();
    let freqs: Vec<Complex64> = sel.chosen.iter().map(|&k| ms.freqs[k]).collect();
    let real = freqs.iter().all(|w| w.im == 0.0);
    let omega = crate::linalg::complexify(&ms.omega);
    let v = crate::linalg::complexify(&ms.v);
    let m = c(mass, 0.0);
    let v_scale = max_abs_c(&v);

    let mut rep = RelationReport::default();
    for i in 0..n {
        let lhs = k0 * rs[i];
        let rhs = ps[i] * (-I / mass);
        rep.shape_relation = rep.shape_relation.max((lhs - &rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE));
        let lhs_c = k0.map(|z| z.conj()) * rs[i].map(|z| z.conj());
        let rhs_c = rhs.map(|z| z.conj());
        rep.shape_relation = rep.shape_relation.max((lhs_c - &rhs_c).norm() / rhs_c.norm().max(f64::MIN_POSITIVE));

        let pc = (&omega + CMatrix::identity(n, n) * (I * freqs[i])) * rs[i] * m;
        rep.momentum_relation = rep.momentum_relation.max((pc - ps[i]).norm() / ps[i].norm().max(f64::MIN_POSITIVE));

        for j in 0..n {
            let s = scale2(ps[i], ps[j]) + mass * mass * v_scale * scale2(rs[i], rs[j]);
            let lhs = I * m * (freqs[i] + freqs[j]) * dot(rs[i], ps[j]);
            let rhs = dot(ps[i], ps[j]) - dot(rs[i], &(&v * rs[j])) * (m * m);
            rep.sum_pairing = rep.sum_pairing.max((lhs - rhs).norm() / s);
            if real {
                let rjc = rs[j].map(|z| z.conj());
                let pjc = ps[j].map(|z| z.conj());
                let lhs = I * m * (freqs[i] - freqs[j]) * dot(rs[i], &pjc);
                let rhs = dot(ps[i], &pjc) - dot(rs[i], &(&v * &rjc)) * (m * m);
                rep.difference_pairing = rep.difference_pairing.max((lhs - rhs).norm() / s);

                let ric = rs[i].map(|z| z.conj());
                let pic = ps[i].map(|z| z.conj());
                let cross = (dot(&ric, ps[j]) - dot(rs[j], &pic)).norm() / scale2(rs[i], ps[j]);
                let diag = (dot(&ric, ps[i]) + dot(rs[i], &pic)).norm() / scale2(rs[i], ps[i]);
                if i != j {
                    rep.cross_pairing = rep.cross_pairing.max(cross);
                } else {
                    rep.diagonal_pairing = rep.diagonal_pairing.max(diag);
                }
            }
        }
    }

    let excitation_r: Vec<CVector> = rs.iter().map(|r| r.map(|z| z.conj())).collect();
    let excitation_p: Vec<CVector> = ps.iter().map(|p| p.map(|z| z.conj())).collect();
    let a = k0 + k0.map(|z| z.conj());
    let omega0 = 0.25 * a.trace().re;
    let gamma = CMatrix::from_fn(n, n, |i, j| dot(&excitation_r[i], &(&a * &excitation_r[j])) * (mass / hbar));
    rep.gamma_asymmetry = crate::linalg::asymmetry_c(&gamma) / max_abs_c(&gamma).max(f64::MIN_POSITIVE);
    let gamma = crate::linalg::symmetrize_c(&gamma);

    let worst = rep.max();
    if !(worst <= RELATION_TOLERANCE) {
        let relation = if rep.shape_relation == worst { "shape" } else { "pairing" };
        return Err(Error::RelationViolation {
            relation: relation.into(),
            residual: worst,
        });
    }

    let basis_matrix = CMatrix::from_columns(&excitation_r);
    let coordinate_map =
        checked_inverse(&basis_matrix, COORDINATE_CONDITION).map_err(|condition| Error::SingularBasis { condition })?;

    Ok(SpectrumBasis {
        dim: n,
        mass,
        hbar,
        partner_selected: sel.chosen.iter().enumerate().map(|(i, &k)| k != i).collect(),
        selection: sel.clone(),
        freqs,
        excitation_r,
        excitation_p,
        a,
        omega0,
        gamma: HermiteContext::new(gamma)?,
        ground,
        relations: rep,
        coordinate_map,
    })
}

/// Coefficients x with `r = Σ x_i R_i*`.
pub fn coordinates(basis: &SpectrumBasis, r: &[f64]) -> Result<Vec<Complex64>> {
    if r.len() != basis.dim {
        return Err(Error::DimensionMismatch {
            what: "position".into(),
            expected: basis.dim,
            found: r.len(),
        });
    }
    let rv = CVector::from_iterator(basis.dim, r.iter().map(|&x| c(x, 0.0)));
    Ok((&basis.coordinate_map * rv).iter().cloned().collect())
}

/// `ħ(Σ n_i ω_i + Ω₀)`.
pub fn energy_of(basis: &SpectrumBasis, n: &MultiIndex) -> Result<f64> {
    if let Some(w) = basis.freqs.iter().find(|w| w.im != 0.0) {
        return Err(Error::ComplexFrequency { re: w.re, im: w.im });
    }
    check_index(basis, n)?;
    let s: f64 = n.0.iter().zip(&basis.freqs).map(|(&k, w)| k as f64 * w.re).sum();
    Ok(basis.hbar * (s + basis.omega0))
}

fn check_index(basis: &SpectrumBasis, n: &MultiIndex) -> Result<()> {
    if n.dim() != basis.dim {
        return Err(Error::DimensionMismatch {
            what: "multi-index".into(),
            expected: basis.dim,
            found: n.dim(),
        });
    }
    Ok(())
}

/// Unnormalized `H^γ_n(x(r)) ψ₀(r)`.
pub fn hermite_gaussian(basis: &SpectrumBasis, n: &MultiIndex, r: &[f64]) -> Result<Complex64> {
    let x = coordinates(basis, r)?;
    let table = evaluate_box(&basis.gamma, &n.0, &x)?;
    Ok(table.get(&n.0).expect("index in its box") * psi0(&basis.ground, r))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationaryState {
    pub index: MultiIndex,
    pub energy: f64,
    pub norm: f64,
}

impl StationaryState {
    /// State with its norm fixed by trapezoid quadrature on the automatic grid.
    pub fn new(basis: &SpectrumBasis, index: MultiIndex) -> Result<Self> {
        let energy = energy_of(basis, &index)?;
        let norm = if index.total() == 0 {
            1.0
        } else {
            state_norm(basis, &index)?
        };
        Ok(StationaryState { index, energy, norm })
    }
}

/// `1/‖H_n ψ₀‖`. Trapezoid on the automatic grid up to three dimensions, tensor
/// Gauss–Hermite in whitened coordinates beyond (exact for the polynomial prefactor).
fn state_norm(basis: &SpectrumBasis, n: &MultiIndex) -> Result<f64> {
    let integral = if basis.dim <= 3 {
        let grid = Grid::auto(&basis.ground, n.total(), None)?;
        let f = sample(|r| hermite_gaussian(basis, n, r).unwrap_or(c(f64::NAN, 0.0)), &grid);
        inner_product(&f, &f, &grid)?.re
    } else {
        gauss_hermite_norm(basis, n)?
    };
    if !(integral > 0.0 && integral.is_finite()) {
        return Err(Error::NotNormalized { integral });
    }
    Ok(1.0 / integral.sqrt())
}

fn gauss_hermite_norm(basis: &SpectrumBasis, n: &MultiIndex) -> Result<f64> {
    use gauss_quad::GaussHermite;
    let dim = basis.dim;
    let re_k = crate::linalg::real_part(&basis.ground.k0);
    let chol = nalgebra::Cholesky::new(crate::linalg::symmetrize(&re_k)).ok_or_else(|| Error::NotPositiveDefinite {
        what: "real part of K0".into(),
        min_eigenvalue: crate::linalg::min_symmetric_eigenvalue(&re_k),
    })?;
    // (m/ħ) r·ReK·r = |y|² with r = sqrt(ħ/m) L⁻ᵀ y
    let l_inv_t = chol
        .l()
        .try_inverse()
        .expect("Cholesky factor is invertible")
        .transpose()
        * (basis.hbar / basis.mass).sqrt();
    let q = std::num::NonZeroUsize::new(n.total() + 2).expect("positive");
    let rule = GaussHermite::new(q);
    let nodes = rule.as_node_weight_pairs();
    let jac = l_inv_t.determinant().abs();
    let mut idx = vec![0usize; dim];
    let mut total = 0.0;
    for _ in 0..nodes.len().pow(dim as u32) {
        let y = DVector::from_iterator(dim, idx.iter().map(|&i| nodes[i].0));
        let w: f64 = idx.iter().map(|&i| nodes[i].1).product();
        let r = &l_inv_t * &y;
        let val = hermite_gaussian(basis, n, r.as_slice())?;
        // divide out e^{−|y|²} carried by the rule
        total += w * val.norm_sqr() * y.norm_squared().exp();
        for d in (0..dim).rev() {
            idx[d] += 1;
            if idx[d] < nodes.len() {
                break;
            }
            idx[d] = 0;
        }
    }
    Ok(total * jac)
}

pub fn psi_n(basis: &SpectrumBasis, st: &StationaryState, r: &[f64]) -> Result<Complex64> {
    Ok(hermite_gaussian(basis, &st.index, r)? * st.norm)
}

pub fn energy(basis: &SpectrumBasis, st: &StationaryState) -> Result<f64> {
    energy_of(basis, &st.index)
}

/// All stationary states with `Σ n_i ≤ max_total`, in index order.
pub fn spectrum(basis: &SpectrumBasis, max_total: usize) -> Result<Vec<StationaryState>> {
    MultiIndex::up_to_total(basis.dim, max_total)
        .into_iter()
        .map(|n| StationaryState::new(basis, n))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoherentState {
    /// Weights of the positive-branch modes, as produced by `fit_coefficients`.
    pub lambdas: CoefficientVector,
    pub phi0: f64,
}

impl CoherentState {
    pub fn new(lambdas: CoefficientVector, phi0: f64) -> Self {
        CoherentState { lambdas, phi0 }
    }

    /// Weights μ_i of the selected modes: λ_i, or λ_i* where the partner was selected.
    pub fn selected_weights(&self, basis: &SpectrumBasis) -> Result<Vec<Complex64>> {
        if self.lambdas.len() != basis.dim {
            return Err(Error::DimensionMismatch {
                what: "coefficient vector".into(),
                expected: basis.dim,
                found: self.lambdas.len(),
            });
        }
        if let Some(w) = basis.freqs.iter().find(|w| w.im != 0.0) {
            return Err(Error::ComplexFrequency { re: w.re, im: w.im });
        }
        Ok(self
            .lambdas
            .lambdas
            .iter()
            .zip(&basis.partner_selected)
            .map(|(l, &flip)| if flip { l.conj() } else { *l })
            .collect())
    }

    /// `z_i = μ_i* e^{−iω_i t}`.
    pub fn z(&self, basis: &SpectrumBasis, t: f64) -> Result<Vec<Complex64>> {
        Ok(self
            .selected_weights(basis)?
            .iter()
            .zip(&basis.freqs)
            .map(|(mu, w)| mu.conj() * (-I * w * t).exp())
            .collect())
    }

    /// Classical center `R(t) = 2 Re Σ z_i R_i*` and `P(t) = 2 Re Σ z_i P_i*`.
    pub fn center(&self, basis: &SpectrumBasis, t: f64) -> Result<(DVector<f64>, DVector<f64>)> {
        let z = self.z(basis, t)?;
        let mut r = DVector::zeros(basis.dim);
        let mut p = DVector::zeros(basis.dim);
        for (i, zi) in z.iter().enumerate() {
            r += (&basis.excitation_r[i] * *zi).map(|v| 2.0 * v.re);
            p += (&basis.excitation_p[i] * *zi).map(|v| 2.0 * v.re);
        }
        Ok((r, p))
    }

    /// Packet phase φ(t) from `dφ/dt = −ħΩ₀ − P²/2m + (m/2) R·V·R`, integrated in closed form.
    pub fn phase(&self, basis: &SpectrumBasis, v: &nalgebra::DMatrix<f64>, t: f64) -> Result<f64> {
        let z0 = self.z(basis, 0.0)?;
        let n = basis.dim;
        // R(t) = Σ_k b_k a_k e^{iν_k t} over the 2N terms z_i R_i* and their conjugates.
        let mut terms: Vec<(Complex64, &CVector, &CVector, f64, bool)> = Vec::with_capacity(2 * n);
        for i in 0..n {
            let w = basis.freqs[i].re;
            terms.push((z0[i], &basis.excitation_r[i], &basis.excitation_p[i], -w, false));
            terms.push((z0[i].conj(), &basis.excitation_r[i], &basis.excitation_p[i], w, true));
        }
        let vc = crate::linalg::complexify(v);
        let m = basis.mass;
        let conj = |x: &CVector, flip: bool| if flip { x.map(|z| z.conj()) } else { x.clone() };
        let mut integral = c(0.0, 0.0);
        for (bk, rk, pk, nk, fk) in &terms {
            let (rk, pk) = (conj(rk, *fk), conj(pk, *fk));
            for (bl, rl, pl, nl, fl) in &terms {
                let (rl, pl) = (conj(rl, *fl), conj(pl, *fl));
                let coef = -dot(&pk, &pl) / (2.0 * m) + dot(&rk, &(&vc * &rl)) * (0.5 * m);
                integral += bk * bl * coef * exp_integral(nk + nl, t);
            }
        }
        Ok(self.phi0 - basis.hbar * basis.omega0 * t + integral.re)
    }
}

/// `∫₀ᵗ e^{iντ} dτ`.
fn exp_integral(nu: f64, t: f64) -> Complex64 {
    let x = nu * t;
    if x.abs() < 1e-4 {
        // series of (e^{ix} − 1)/(ix)
        c(t, 0.0) * (c(1.0, 0.0) + I * x / 2.0 - x * x / 6.0 - I * x * x * x / 24.0)
    } else {
        ((I * x).exp() - 1.0) / (I * nu)
    }
}

/// Direct packet form `N e^{iφ/ħ} exp[−(m/2ħ)(r−R)K₀(r−R) + (i/ħ) P·r]`.
pub fn coherent_direct(
    cs: &CoherentState,
    basis: &SpectrumBasis,
    v: &nalgebra::DMatrix<f64>,
    t: f64,
    r: &[f64],
) -> Result<Complex64> {
    let (rc, pc) = cs.center(basis, t)?;
    let phase = cs.phase(basis, v, t)?;
    let gs = &basis.ground;
    let n = basis.dim;
    let y = CVector::from_iterator(n, r.iter().zip(rc.iter()).map(|(a, b)| c(a - b, 0.0)));
    let q = (y.transpose() * &gs.k0 * &y)[(0, 0)];
    let lin: f64 = r.iter().zip(pc.iter()).map(|(a, b)| a * b).sum();
    let hb = basis.hbar;
    Ok((-q * (basis.mass / (2.0 * hb)) + I * ((lin + phase) / hb)).exp() * gs.norm)
}

/// Constant prefactor C of the factored form, fixed by agreement at t = 0.
fn factored_prefactor(cs: &CoherentState, basis: &SpectrumBasis) -> Result<Complex64> {
    let (r0, _) = cs.center(basis, 0.0)?;
    let z0 = cs.z(basis, 0.0)?;
    let r0c = crate::linalg::complexify_vec(&r0);
    let q = (r0c.transpose() * &basis.ground.k0 * &r0c)[(0, 0)];
    let zgz = quadratic(&basis.gamma.gamma, &z0, &z0);
    Ok((I * (cs.phi0 / basis.hbar) - q * (basis.mass / (2.0 * basis.hbar)) + zgz * 0.5).exp())
}

fn quadratic(g: &CMatrix, a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let n = a.len();
    let mut s = c(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s += g[(i, j)] * a[i] * b[j];
        }
    }
    s
}

/// `C e^{−iΩ₀t} exp[−½ Σ γ_ij z_i z_j + Σ γ_ij x_i z_j] ψ₀(r)`.
pub fn coherent_factored(cs: &CoherentState, basis: &SpectrumBasis, t: f64, r: &[f64]) -> Result<Complex64> {
    let pre = factored_prefactor(cs, basis)?;
    let z = cs.z(basis, t)?;
    let x = coordinates(basis, r)?;
    let g = &basis.gamma.gamma;
    let expo = -quadratic(g, &z, &z) * 0.5 + quadratic(g, &x, &z) - I * (basis.omega0 * t);
    Ok(pre * expo.exp() * psi0(&basis.ground, r))
}

/// Both forms, failing with FormMismatch when they disagree beyond 1e−8.
pub fn coherent_value(
    cs: &CoherentState,
    basis: &SpectrumBasis,
    v: &nalgebra::DMatrix<f64>,
    t: f64,
    r: &[f64],
) -> Result<Complex64> {
    let direct = coherent_direct(cs, basis, v, t, r)?;
    let factored = coherent_factored(cs, basis, t, r)?;
    let difference = (direct - factored).norm();
    if !(difference <= FORM_TOLERANCE * direct.norm().max(basis.ground.norm)) {
        return Err(Error::FormMismatch { difference });
    }
    Ok(direct)
}

/// Expansion coefficients `C e^{−iΩ₀t} Π z_i^{n_i}/n_i!` over `Σ n_i ≤ truncation`.
pub fn expand_coherent(
    cs: &CoherentState,
    basis: &SpectrumBasis,
    truncation: usize,
    t: f64,
) -> Result<BTreeMap<MultiIndex, Complex64>> {
    if truncation > MAX_TRUNCATION {
        return Err(Error::TruncationTooLarge {
            order: truncation,
            max: MAX_TRUNCATION,
        });
    }
    let pre = factored_prefactor(cs, basis)? * (-I * (basis.omega0 * t)).exp();
    let z = cs.z(basis, t)?;
    Ok(MultiIndex::up_to_total(basis.dim, truncation)
        .into_iter()
        .map(|n| {
            let coeff = n.0.iter().zip(&z).fold(pre, |acc, (&k, zi)| {
                let fact: f64 = (1..=k).map(|j| j as f64).product();
                acc * zi.powu(k as u32) / fact
            });
            (n, coeff)
        })
        .collect())
}

/// Partial sum `Σ coeff(n) H^γ_n(x(r)) ψ₀(r)`.
pub fn expansion_value(
    coeffs: &BTreeMap<MultiIndex, Complex64>,
    basis: &SpectrumBasis,
    r: &[f64],
) -> Result<Complex64> {
    let max: Vec<usize> = (0..basis.dim)
        .map(|i| coeffs.keys().map(|n| n.0[i]).max().unwrap_or(0))
        .collect();
    let x = coordinates(basis, r)?;
    let table = evaluate_box(&basis.gamma, &max, &x)?;
    let sum: Complex64 = coeffs
        .iter()
        .map(|(n, a)| a * table.get(&n.0).expect("index in its box"))
        .sum();
    Ok(sum * psi0(&basis.ground, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::compute_modes;
    use crate::model::{NormalForm, TimeSignal};
    use crate::riccati::select_modes;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn basis_for(nf: &NormalForm, hbar: f64) -> SpectrumBasis {
        let ms = compute_modes(nf).unwrap();
        let g = select_modes(&ms, nf.mass).unwrap();
        build_basis(&ms, &g.shape.selection, &g.shape.k0, nf.mass, hbar).unwrap()
    }

    fn magnetic() -> NormalForm {
        NormalForm::new(
            1.0,
            DMatrix::from_row_slice(2, 2, &[0.0, 0.5, -0.5, 0.0]),
            DMatrix::identity(2, 2),
            TimeSignal::Zero,
        )
        .unwrap()
    }

    #[test]
    fn oscillator_basis_quantities() {
        let w = 1.4;
        let b = basis_for(&NormalForm::oscillator(1.0, &[w]), 1.0);
        assert_abs_diff_eq!(b.a[(0, 0)].re, 2.0 * w, epsilon = 1e-12);
        assert_abs_diff_eq!(b.omega0, w / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.gamma.gamma[(0, 0)].re, 2.0 * w, epsilon = 1e-12);
        assert_eq!(coordinates(&b, &[0.7]).unwrap()[0], c(0.7, 0.0));

        let iso = basis_for(&NormalForm::oscillator(1.0, &[0.8, 0.8]), 1.0);
        assert!(max_abs_c(&(&iso.gamma.gamma - CMatrix::identity(2, 2) * c(1.6, 0.0))) < 1e-12);
        assert_abs_diff_eq!(iso.omega0, 0.8, epsilon = 1e-12);
    }

    #[test]
    fn magnetic_relations_hold() {
        let b = basis_for(&magnetic(), 1.0);
        assert!(b.relations.max() < 1e-9, "{:?}", b.relations);
        assert!(max_abs_c(&(&b.gamma.gamma - CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(4.0, 0.0), c(4.0, 0.0), c(0.0, 0.0)]))) < 1e-9);
        let e = |n: Vec<usize>| energy_of(&b, &MultiIndex(n)).unwrap();
        assert_abs_diff_eq!(e(vec![0, 0]), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e(vec![1, 0]), 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(e(vec![0, 1]), 2.5, epsilon = 1e-12);
        let x = coordinates(&b, b.excitation_r[0].map(|z| z.re).as_slice());
        assert!(x.is_ok());
    }

    #[test]
    fn coordinates_of_basis_vectors() {
        let b = basis_for(&NormalForm::oscillator(1.0, &[1.0, 2.0]), 1.0);
        let r: Vec<f64> = b.excitation_r[0].iter().map(|z| z.re).collect();
        let x = coordinates(&b, &r).unwrap();
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-14 && x[1].norm() < 1e-14);
        assert!(coordinates(&b, &[0.0, 0.0]).unwrap().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn ground_state_values() {
        let b = basis_for(&NormalForm::oscillator(1.0, &[1.0]), 1.0);
        for &x in &[0.0, 0.5, -1.5] {
            let v = psi0(&b.ground, &[x]);
            assert_abs_diff_eq!(v.re, std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp(), epsilon = 1e-15);
            assert_eq!(v, psi0(&b.ground, &[-x]));
        }
    }

    #[test]
    fn excited_oscillator_states() {
        let b = basis_for(&NormalForm::oscillator(1.0, &[1.0]), 1.0);
        let s1 = StationaryState::new(&b, MultiIndex(vec![1])).unwrap();
        let s2 = StationaryState::new(&b, MultiIndex(vec![2])).unwrap();
        let pi4 = std::f64::consts::PI.powf(-0.25);
        for &x in &[0.3f64, -1.1, 2.0] {
            let g = (-x * x / 2.0).exp() * pi4;
            let e1 = 2f64.sqrt() * x * g;
            let e2 = (2.0 * x * x - 1.0) / 2f64.sqrt() * g;
            assert_abs_diff_eq!(psi_n(&b, &s1, &[x]).unwrap().re, e1, epsilon = 1e-9);
            assert_abs_diff_eq!(psi_n(&b, &s2, &[x]).unwrap().re, e2, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(s2.energy, 2.5, epsilon = 1e-14);
        assert_abs_diff_eq!(energy_of(&b, &MultiIndex(vec![3])).unwrap(), 3.5, epsilon = 1e-14);
    }

    #[test]
    fn gauss_hermite_norm_matches_grid() {
        let nf = NormalForm::new(
            1.0,
            DMatrix::from_row_slice(2, 2, &[0.0, 0.3, -0.3, 0.0]),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 2.0]),
            TimeSignal::Zero,
        )
        .unwrap();
        let b = basis_for(&nf, 1.0);
        let n = MultiIndex(vec![2, 1]);
        let grid = 1.0 / state_norm(&b, &n).unwrap().powi(2);
        let gh = gauss_hermite_norm(&b, &n).unwrap();
        assert_abs_diff_eq!(grid / gh, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn coherent_forms_agree() {
        let nf = magnetic();
        let ms = compute_modes(&nf).unwrap();
        let b = basis_for(&nf, 1.0);
        let cs = CoherentState::new(CoefficientVector::new(vec![c(0.3, -0.1), c(-0.2, 0.25)]), 0.4);
        for &t in &[0.0, 0.7, 3.1] {
            let (r, p) = cs.center(&b, t).unwrap();
            let (rc, pc) = crate::classical::trajectory(&ms, &cs.lambdas, t).unwrap();
            assert!((r - rc).amax() < 1e-12 && (p - pc).amax() < 1e-12);
            for pt in [[0.0, 0.0], [0.4, -0.9], [1.2, 0.3]] {
                coherent_value(&cs, &b, &nf.v, t, &pt).unwrap();
            }
        }
    }

    #[test]
    fn zero_weights_give_rotating_ground_state() {
        let b = basis_for(&NormalForm::oscillator(1.0, &[1.3]), 1.0);
        let cs = CoherentState::new(CoefficientVector::zeros(1), 0.0);
        let t = 0.9;
        let v = coherent_factored(&cs, &b, t, &[0.4]).unwrap();
        let g = psi0(&b.ground, &[0.4]) * (-I * (b.omega0 * t)).exp();
        assert!((v - g).norm() < 1e-15);
        let coeffs = expand_coherent(&cs, &b, 4, t).unwrap();
        for (n, a) in &coeffs {
            if n.total() > 0 {
                assert_eq!(*a, c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn coefficient_ladder_ratio() {
        let b = basis_for(&NormalForm::oscillator(1.0, &[0.9, 1.7]), 1.0);
        let cs = CoherentState::new(CoefficientVector::new(vec![c(0.2, 0.1), c(-0.3, 0.05)]), 0.0);
        let t = 0.6;
        let coeffs = expand_coherent(&cs, &b, 5, t).unwrap();
        let z = cs.z(&b, t).unwrap();
        let n = MultiIndex(vec![1, 2]);
        let up = MultiIndex(vec![2, 2]);
        let ratio = coeffs[&up] / coeffs[&n];
        assert!((ratio - z[0] / 2.0).norm() < 1e-14);
        assert!(matches!(expand_coherent(&cs, &b, 17, t), Err(Error::TruncationTooLarge { .. })));
    }
}
