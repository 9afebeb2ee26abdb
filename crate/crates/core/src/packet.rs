//! Gaussian wave packets
//! `Ψ(r) = N e^{iφ/ħ} exp[−(m/2ħ)(r−R)·K·(r−R) + (i/ħ) r·P]`
//! and the ODEs for their parameters.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, max_abs_c, real_part, symmetrize_c, CMatrix, I};
use crate::model::NormalForm;
use crate::ode::{self, Rk4State};
use crate::quad::adaptive_simpson;
use crate::riccati::{check_dt, require_physical, riccati_rhs, ShapeMatrix, BLOW_UP_LIMIT};

#[derive(Clone, Debug, PartialEq)]
pub struct PacketState {
    pub k: ShapeMatrix,
    pub r: DVector<f64>,
    pub p: DVector<f64>,
    pub norm: f64,
    /// Phase φ in action units, unwrapped.
    pub phase: f64,
    pub hbar: f64,
    pub mass: f64,
}

/// Time derivatives of the packet parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct PacketRates {
    pub dk: CMatrix,
    pub dr: DVector<f64>,
    pub dp: DVector<f64>,
    pub dnorm: f64,
    pub dphase: f64,
}

impl PacketState {
    /// Normalized packet with the given shape and center.
    pub fn new(k: ShapeMatrix, r: DVector<f64>, p: DVector<f64>, hbar: f64, mass: f64) -> Result<Self> {
        let n = k.nrows();
        if k.ncols() != n || r.len() != n || p.len() != n {
            return Err(Error::DimensionMismatch {
                what: "packet parameters".into(),
                expected: n,
                found: r.len().max(p.len()).max(k.ncols()),
            });
        }
        if !(hbar > 0.0 && mass > 0.0) {
            return Err(Error::InvalidModel("hbar and mass must be positive".into()));
        }
        normalize(&PacketState {
            k,
            r,
            p,
            norm: 1.0,
            phase: 0.0,
            hbar,
            mass,
        })
    }

    pub fn dim(&self) -> usize {
        self.r.len()
    }

    pub fn value(&self, x: &[f64]) -> Complex64 {
        let y = DVector::from_iterator(self.dim(), x.iter().zip(self.r.iter()).map(|(a, b)| c(a - b, 0.0)));
        let quad = (y.transpose() * &self.k * &y)[(0, 0)];
        let lin: f64 = x.iter().zip(self.p.iter()).map(|(a, b)| a * b).sum();
        let expo = -quad * (self.mass / (2.0 * self.hbar)) + I * ((lin + self.phase) / self.hbar);
        expo.exp() * self.norm
    }

    /// `N² det(Re K)^{−1/2}`, conserved by the exact flow.
    pub fn norm_invariant(&self) -> f64 {
        self.norm * self.norm / real_part(&self.k).determinant().sqrt()
    }
}

impl Rk4State for PacketState {
    fn scaled_add(&self, h: f64, dy: &Self) -> Self {
        PacketState {
            k: self.k.scaled_add(h, &dy.k),
            r: &self.r + &dy.r * h,
            p: &self.p + &dy.p * h,
            norm: self.norm + h * dy.norm,
            phase: self.phase + h * dy.phase,
            hbar: self.hbar,
            mass: self.mass,
        }
    }
}

pub fn packet_rhs(s: &PacketState, nf: &NormalForm, t: f64) -> Result<PacketRates> {
    let m = s.mass;
    let g = nf.g.eval(t, nf.dim)?;
    let dk = riccati_rhs(&s.k, nf);
    let dr = &s.p / m - &nf.omega * &s.r;
    let dp = -(&nf.v * &s.r * m) - &nf.omega * &s.p - g * m;
    let tr = s.k.trace();
    let dnorm = 0.5 * s.norm * tr.im;
    let dphase = -0.5 * s.hbar * tr.re - s.p.norm_squared() / (2.0 * m) + 0.5 * m * s.r.dot(&(&nf.v * &s.r));
    Ok(PacketRates { dk, dr, dp, dnorm, dphase })
}

fn check_dims(s: &PacketState, nf: &NormalForm) -> Result<()> {
    if s.dim() != nf.dim || s.k.nrows() != nf.dim {
        return Err(Error::DimensionMismatch {
            what: "packet".into(),
            expected: nf.dim,
            found: s.dim(),
        });
    }
    if (s.mass - nf.mass).abs() > 1e-12 * nf.mass {
        return Err(Error::InvalidModel(format!(
            "packet mass {} differs from system mass {}",
            s.mass, nf.mass
        )));
    }
    Ok(())
}

/// RK4 path of all packet parameters.
pub fn propagate(s0: &PacketState, nf: &NormalForm, t_span: (f64, f64), dt: f64) -> Result<Vec<(f64, PacketState)>> {
    check_dt(dt)?;
    check_dims(s0, nf)?;
    require_physical(&s0.k, "packet shape K")?;
    ode::integrate(
        s0.clone(),
        t_span.0,
        t_span.1,
        dt,
        |t, s: &PacketState| {
            let d = packet_rhs(s, nf, t)?;
            Ok(PacketState {
                k: d.dk,
                r: d.dr,
                p: d.dp,
                norm: d.dnorm,
                phase: d.dphase,
                hbar: s.hbar,
                mass: s.mass,
            })
        },
        |t, mut s| {
            s.k = symmetrize_c(&s.k);
            let magnitude = max_abs_c(&s.k).max(s.r.amax()).max(s.p.amax());
            if !(magnitude <= BLOW_UP_LIMIT) {
                return Err(Error::BlowUp { t, magnitude });
            }
            Ok(s)
        },
    )
}

/// Closed-form 1D oscillator shape `α(t) = ω(k cos ωt + i sin ωt)/(cos ωt + ik sin ωt)`
/// for `α(0) = kω`.
pub fn pulsating_shape(k: f64, omega: f64, t: f64) -> Complex64 {
    let (s, co) = (omega * t).sin_cos();
    c(k * co, s) / c(co, k * s) * omega
}

/// [`pulsating_shape`] together with the phase `−½∫₀ᵗ Re α` (that is φ/ħ).
pub fn oracle_1d(k: f64, omega: f64, t: f64) -> (Complex64, f64) {
    let phase = -0.5 * adaptive_simpson(|tau| pulsating_shape(k, omega, tau).re, 0.0, t, 1e-12);
    (pulsating_shape(k, omega, t), phase)
}

/// Packet normalization constant `(πħ/m)^{−N/4} det(Re K)^{1/4}`.
pub fn normalization_constant(k: &ShapeMatrix, hbar: f64, mass: f64) -> Result<f64> {
    require_physical(k, "shape K")?;
    let n = k.nrows() as f64;
    let det = real_part(k).determinant();
    Ok((std::f64::consts::PI * hbar / mass).powf(-n / 4.0) * det.powf(0.25))
}

pub fn normalize(s: &PacketState) -> Result<PacketState> {
    let mut out = s.clone();
    out.norm = normalization_constant(&s.k, s.hbar, s.mass)?;
    Ok(out)
}

/// Packet started with the given shape and center, zero phase.
pub fn coherent_packet(k0: &ShapeMatrix, r0: &DVector<f64>, p0: &DVector<f64>, hbar: f64, mass: f64) -> Result<PacketState> {
    PacketState::new(k0.clone(), r0.clone(), p0.clone(), hbar, mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TimeSignal;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use std::f64::consts::{PI, TAU};

    fn scalar(z: Complex64) -> CMatrix {
        CMatrix::from_element(1, 1, z)
    }

    fn v1(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    #[test]
    fn stationary_rates() {
        let w = 1.7;
        let nf = NormalForm::oscillator(1.0, &[w]);
        let s = PacketState::new(scalar(c(w, 0.0)), v1(0.0), v1(0.0), 1.0, 1.0).unwrap();
        let d = packet_rhs(&s, &nf, 0.0).unwrap();
        assert!(d.dk[(0, 0)].norm() < 1e-15);
        assert_eq!(d.dr[0], 0.0);
        assert_eq!(d.dp[0], 0.0);
        assert_eq!(d.dnorm, 0.0);
        assert_abs_diff_eq!(d.dphase, -w / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn center_rates() {
        let w = 1.3;
        let nf = NormalForm::oscillator(1.0, &[w]).with_drive(TimeSignal::constant(&[0.4])).unwrap();
        let s = PacketState::new(scalar(c(w, 0.0)), v1(0.7), v1(0.0), 1.0, 1.0).unwrap();
        let d = packet_rhs(&s, &nf, 0.0).unwrap();
        assert_eq!(d.dr[0], 0.0);
        assert_abs_diff_eq!(d.dp[0], -w * w * 0.7 - 0.4, epsilon = 1e-15);
    }

    #[test]
    fn oracle_examples() {
        let (a, ph) = oracle_1d(1.0, 2.0, 1.3);
        assert!((a - c(2.0, 0.0)).norm() < 1e-14);
        assert_abs_diff_eq!(ph, -1.3, epsilon = 1e-12);
        let (a0, _) = oracle_1d(2.0, 1.5, 0.0);
        assert!((a0 - c(3.0, 0.0)).norm() < 1e-14);
        let (aq, _) = oracle_1d(2.0, 1.0, PI / 2.0);
        assert!((aq - c(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn normalization_examples() {
        let n1 = normalization_constant(&scalar(c(1.0, 0.3)), 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(n1, PI.powf(-0.25), epsilon = 1e-15);
        let n2 = normalization_constant(&CMatrix::identity(2, 2), 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(n2, PI.powf(-0.5), epsilon = 1e-15);
        let n4 = normalization_constant(&scalar(c(4.0, 0.0)), 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(n4 / n1, 2f64.sqrt(), epsilon = 1e-14);
        assert!(normalization_constant(&scalar(c(-1.0, 0.0)), 1.0, 1.0).is_err());
    }

    #[test]
    fn normalization_matches_quadrature() {
        let k = CMatrix::from_row_slice(2, 2, &[c(1.2, 0.3), c(0.2, -0.4), c(0.2, -0.4), c(0.8, 0.1)]);
        let s = PacketState::new(k, DVector::from_vec(vec![0.3, -0.2]), DVector::from_vec(vec![1.0, 0.5]), 0.7, 1.3)
            .unwrap();
        let (m, l) = (241, 7.0);
        let h = 2.0 * l / (m - 1) as f64;
        let mut sum = 0.0;
        for i in 0..m {
            for j in 0..m {
                let x = [-l + i as f64 * h, -l + j as f64 * h];
                sum += s.value(&x).norm_sqr();
            }
        }
        assert_abs_diff_eq!(sum * h * h, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn pulsating_packet_matches_oracle() {
        let (w, k) = (1.0, 2.0);
        let nf = NormalForm::oscillator(1.0, &[w]);
        let s0 = PacketState::new(scalar(c(k * w, 0.0)), v1(0.0), v1(0.0), 1.0, 1.0).unwrap();
        let path = propagate(&s0, &nf, (0.0, TAU), TAU / 2000.0).unwrap();
        for (t, s) in path.iter().step_by(97) {
            let (alpha, phase) = oracle_1d(k, w, *t);
            assert!((s.k[(0, 0)] - alpha).norm() < 1e-8, "t={t} {}", (s.k[(0, 0)] - alpha).norm());
            assert_abs_diff_eq!(s.phase, phase, epsilon = 1e-8);
            assert_abs_diff_eq!(s.norm_invariant(), s0.norm_invariant(), epsilon = 1e-8);
        }
    }

    #[test]
    fn ground_packet_only_rotates_phase() {
        let nf = NormalForm::new(
            1.0,
            DMatrix::from_row_slice(2, 2, &[0.0, 0.5, -0.5, 0.0]),
            DMatrix::identity(2, 2),
            TimeSignal::Zero,
        )
        .unwrap();
        let s0 = PacketState::new(CMatrix::identity(2, 2), DVector::zeros(2), DVector::zeros(2), 1.0, 1.0).unwrap();
        let path = propagate(&s0, &nf, (0.0, 5.0), 0.01).unwrap();
        let (t, s) = path.last().unwrap();
        assert!(max_abs_c(&(&s.k - &s0.k)) < 1e-12);
        assert!(s.r.amax() == 0.0 && s.p.amax() == 0.0);
        // Ω₀ = ¼ Tr(K₀ + K₀*) = 1
        assert_abs_diff_eq!(s.phase, -t, epsilon = 1e-10);
    }
}
