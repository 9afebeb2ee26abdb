//! Matrix Riccati shape equation, its linearization, and the stationary shape K₀.
//!
//! The shape of a Gaussian packet obeys `dK/dt = −iK² + iV − [Ω, K]`. Writing
//! `K = −(i/m) N D⁻¹` turns it into the linear pair
//! `dN/dt = −mVD − ΩN`, `dD/dt = N/m − ΩD`, which is the classical flow applied
//! column by column. Stationary shapes are built from N classical modes.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::classical::ModeSet;
use crate::error::{Error, Result};
use crate::linalg::{
    asymmetry_c, c, checked_inverse, commutator, complexify, frobenius_c, max_abs_c, min_symmetric_eigenvalue,
    real_part, symmetrize_c, CMatrix, I,
};
use crate::model::NormalForm;
use crate::ode;

/// Complex symmetric N×N shape matrix K.
pub type ShapeMatrix = CMatrix;

/// Entries beyond this magnitude signal a finite-time Riccati singularity.
pub const BLOW_UP_LIMIT: f64 = 1e12;
pub const MAX_D_CONDITION: f64 = 1e12;
/// Relative threshold on the smallest eigenvalue of Re K.
pub const POSITIVITY_TOLERANCE: f64 = 1e-10;
const SYMMETRY_LIMIT: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearPair {
    pub n: CMatrix,
    pub d: CMatrix,
}

impl LinearPair {
    /// Pair with `D = I`, `N = imK`, so that `k_from_pair` returns K.
    pub fn from_shape(k: &ShapeMatrix, mass: f64) -> Self {
        let n = k.nrows();
        LinearPair {
            n: k * (I * mass),
            d: CMatrix::identity(n, n),
        }
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        LinearPair {
            n: &self.n * s,
            d: &self.d * s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModeSelection {
    /// One mode index per ± pair, in pair order.
    pub chosen: Vec<usize>,
}

impl ModeSelection {
    /// Selection encoded by a bit mask: bit i set picks the partner of positive mode i.
    pub fn from_mask(ms: &ModeSet, mask: u64) -> Self {
        let chosen = (0..ms.dim)
            .map(|i| if mask >> i & 1 == 1 { ms.pairing[i] } else { i })
            .collect();
        ModeSelection { chosen }
    }

    pub fn positive(ms: &ModeSet) -> Self {
        Self::from_mask(ms, 0)
    }

    pub fn validate(&self, ms: &ModeSet) -> Result<()> {
        if self.chosen.len() != ms.dim {
            return Err(Error::DimensionMismatch {
                what: "mode selection".into(),
                expected: ms.dim,
                found: self.chosen.len(),
            });
        }
        let mut seen = vec![false; ms.dim];
        for &k in &self.chosen {
            if k >= 2 * ms.dim {
                return Err(Error::InvalidModel(format!("mode index {k} out of range")));
            }
            let pair = k.min(ms.pairing[k]);
            if seen[pair] {
                return Err(Error::InvalidModel(format!("mode pair {pair} selected twice")));
            }
            seen[pair] = true;
        }
        Ok(())
    }
}

pub fn riccati_rhs(k: &ShapeMatrix, nf: &NormalForm) -> CMatrix {
    let v = complexify(&nf.v);
    let omega = complexify(&nf.omega);
    -(k * k) * I + v * I - commutator(&omega, k)
}

fn pair_rhs(lp: &LinearPair, v: &CMatrix, omega: &CMatrix, mass: f64) -> LinearPair {
    LinearPair {
        n: -(v * &lp.d) * c(mass, 0.0) - omega * &lp.n,
        d: &lp.n / c(mass, 0.0) - omega * &lp.d,
    }
}

impl ode::Rk4State for LinearPair {
    fn scaled_add(&self, h: f64, dy: &Self) -> Self {
        LinearPair {
            n: self.n.scaled_add(h, &dy.n),
            d: self.d.scaled_add(h, &dy.d),
        }
    }
}

/// Smallest eigenvalue of Re K.
pub fn min_real_eigenvalue(k: &ShapeMatrix) -> f64 {
    min_symmetric_eigenvalue(&real_part(k))
}

/// Whether Re K is positive definite at the relative threshold `POSITIVITY_TOLERANCE·‖K‖`.
pub fn is_physical(k: &ShapeMatrix) -> bool {
    min_real_eigenvalue(k) > POSITIVITY_TOLERANCE * max_abs_c(k)
}

pub fn require_physical(k: &ShapeMatrix, what: &str) -> Result<()> {
    if is_physical(k) {
        Ok(())
    } else {
        Err(Error::NotPositiveDefinite {
            what: format!("real part of {what}"),
            min_eigenvalue: min_real_eigenvalue(k),
        })
    }
}

/// RK4 path of the shape equation, re-symmetrized after every step.
pub fn integrate_riccati(
    k0: &ShapeMatrix,
    nf: &NormalForm,
    t_span: (f64, f64),
    dt: f64,
) -> Result<Vec<(f64, ShapeMatrix)>> {
    check_dt(dt)?;
    require_physical(k0, "initial shape K")?;
    ode::integrate(
        symmetrize_c(k0),
        t_span.0,
        t_span.1,
        dt,
        |_, k: &CMatrix| Ok(riccati_rhs(k, nf)),
        |t, k| {
            let k = symmetrize_c(&k);
            let magnitude = max_abs_c(&k);
            if !(magnitude <= BLOW_UP_LIMIT) {
                return Err(Error::BlowUp { t, magnitude });
            }
            Ok(k)
        },
    )
}

/// RK4 path of the linear pair (N, D).
pub fn integrate_linear_pair(
    p0: &LinearPair,
    nf: &NormalForm,
    t_span: (f64, f64),
    dt: f64,
) -> Result<Vec<(f64, LinearPair)>> {
    check_dt(dt)?;
    let v = complexify(&nf.v);
    let omega = complexify(&nf.omega);
    ode::integrate(
        p0.clone(),
        t_span.0,
        t_span.1,
        dt,
        |_, lp: &LinearPair| Ok(pair_rhs(lp, &v, &omega, nf.mass)),
        |_, lp| Ok(lp),
    )
}

pub(crate) fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("time step must be positive, got {dt}")))
    }
}

/// `K = −(i/m) N D⁻¹`.
pub fn k_from_pair(lp: &LinearPair, mass: f64) -> Result<ShapeMatrix> {
    let d_inv = checked_inverse(&lp.d, MAX_D_CONDITION).map_err(|condition| Error::SingularD { condition })?;
    Ok(&lp.n * d_inv * (-I / mass))
}

/// Step `(2π/ω_max)/200` from the largest mode frequency magnitude.
pub fn default_dt(ms: &ModeSet) -> f64 {
    let w = ms.freqs.iter().map(|w| w.norm()).fold(0.0, f64::max);
    if w > 0.0 {
        2.0 * std::f64::consts::PI / w / 200.0
    } else {
        1e-2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationaryShape {
    pub selection: ModeSelection,
    pub k0: ShapeMatrix,
    /// `‖−iK₀² + iV − [Ω, K₀]‖ / max(‖V‖, 1e-300)`, Frobenius norms.
    pub residual: f64,
    /// Asymmetry of K₀ before symmetrization.
    pub asymmetry: f64,
    pub min_real_eigenvalue: f64,
    pub trace_imag: f64,
    pub physical: bool,
}

/// Stationary shape from N selected modes: `D₀ = [R_i]`, `N₀ = [P_i]`.
pub fn solve_algebraic(ms: &ModeSet, sel: &ModeSelection, mass: f64) -> Result<StationaryShape> {
    sel.validate(ms)?;
    let n = ms.dim;
    let mut d0 = CMatrix::zeros(n, n);
    let mut n0 = CMatrix::zeros(n, n);
    for (col, &k) in sel.chosen.iter().enumerate() {
        d0.set_column(col, &ms.amps[k].r);
        n0.set_column(col, &ms.amps[k].p);
    }
    let raw = k_from_pair(&LinearPair { n: n0, d: d0 }, mass)?;
    let asym = asymmetry_c(&raw);
    let k0 = symmetrize_c(&raw);

    let v = complexify(&ms.v);
    let omega = complexify(&ms.omega);
    let res = -(&k0 * &k0) * I + &v * I - commutator(&omega, &k0);
    let v_norm = frobenius_c(&v).max(1e-300);
    let min_eig = min_real_eigenvalue(&k0);
    let scale = max_abs_c(&k0).max(f64::MIN_POSITIVE);
    Ok(StationaryShape {
        selection: sel.clone(),
        residual: frobenius_c(&res) / v_norm,
        asymmetry: asym,
        min_real_eigenvalue: min_eig,
        trace_imag: k0.trace().im,
        physical: asym <= SYMMETRY_LIMIT * scale.max(1.0) && min_eig > POSITIVITY_TOLERANCE * scale,
        k0,
    })
}

/// Every one-per-pair selection in mask order, with its shape where D₀ is invertible.
pub fn stationary_candidates(ms: &ModeSet, mass: f64) -> Result<Vec<(ModeSelection, Result<StationaryShape>)>> {
    if ms.dim > 20 {
        return Err(Error::InvalidModel(format!(
            "mode selection scan over 2^{} candidates is not supported",
            ms.dim
        )));
    }
    Ok((0..1u64 << ms.dim)
        .map(|mask| {
            let sel = ModeSelection::from_mask(ms, mask);
            let shape = solve_algebraic(ms, &sel, mass);
            (sel, shape)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundSelection {
    pub shape: StationaryShape,
    /// Every selection with a physical K₀, the returned one first.
    pub physical: Vec<ModeSelection>,
}

/// First selection (positive branch first) whose K₀ has positive-definite real part.
pub fn select_modes(ms: &ModeSet, mass: f64) -> Result<GroundSelection> {
    let candidates = stationary_candidates(ms, mass)?;
    let total = candidates.len();
    let mut physical: Vec<StationaryShape> = candidates
        .into_iter()
        .filter_map(|(_, shape)| shape.ok())
        .filter(|s| s.physical)
        .collect();
    if physical.is_empty() {
        return Err(Error::NoPhysicalState { candidates: total });
    }
    if physical.len() > 1 {
        log::info!("{} physical mode selections; using the first", physical.len());
    }
    let selections = physical.iter().map(|s| s.selection.clone()).collect();
    Ok(GroundSelection {
        shape: physical.swap_remove(0),
        physical: selections,
    })
}

/// General Riccati flow `dK/dt = αK² + KW + WᵀK + U` and its linear pair
/// `A' = UB + WᵀA`, `B' = −αA − WB` with `K = A B⁻¹`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralRiccati {
    pub alpha: Complex64,
    pub w: CMatrix,
    pub u: CMatrix,
}

impl GeneralRiccati {
    /// The shape equation of a normal-form system in this form.
    pub fn from_normal_form(nf: &NormalForm) -> Self {
        GeneralRiccati {
            alpha: -I,
            w: complexify(&nf.omega),
            u: complexify(&nf.v) * I,
        }
    }

    pub fn rhs(&self, k: &CMatrix) -> CMatrix {
        k * k * self.alpha + k * &self.w + self.w.transpose() * k + &self.u
    }

    pub fn pair_rhs(&self, a: &CMatrix, b: &CMatrix) -> (CMatrix, CMatrix) {
        (
            &self.u * b + self.w.transpose() * a,
            -(a * self.alpha) - &self.w * b,
        )
    }

    pub fn integrate(&self, k0: &CMatrix, t: f64, dt: f64) -> Result<CMatrix> {
        check_dt(dt)?;
        let path = ode::integrate(k0.clone(), 0.0, t, dt, |_, k: &CMatrix| Ok(self.rhs(k)), |_, k| Ok(k))?;
        Ok(path.last().expect("path has the initial point").1.clone())
    }

    /// K(t) from the linear pair started at `A = K₀`, `B = I`.
    pub fn integrate_pair(&self, k0: &CMatrix, t: f64, dt: f64) -> Result<CMatrix> {
        check_dt(dt)?;
        let n = k0.nrows();
        let path = ode::integrate(
            (k0.clone(), CMatrix::identity(n, n)),
            0.0,
            t,
            dt,
            |_, (a, b): &(CMatrix, CMatrix)| Ok::<_, Error>(self.pair_rhs(a, b)),
            |_, y| Ok(y),
        )?;
        let (a, b) = &path.last().expect("path has the initial point").1;
        let b_inv = checked_inverse(b, MAX_D_CONDITION).map_err(|condition| Error::SingularD { condition })?;
        Ok(a * b_inv)
    }
}

/// Shape of a real symmetric matrix as a physical K (zero imaginary part).
pub fn real_shape(a: &DMatrix<f64>) -> ShapeMatrix {
    complexify(a)
}
