//! Classical eigenmodes and (driven) classical dynamics of a normal-form system.
//!
//! Modes `(R, P) e^{iωt}` are eigenvectors of the stability matrix
//! `M = [[−Ω, I/m], [−mV, −Ω]]` with eigenvalue `iω`. The spectrum is symmetric
//! under ω → −ω. Mode sets list the N positive-branch modes first, followed by
//! their negated-frequency partners in the same order.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, checked_inverse, complexify, dominant_index, CMatrix, CVector, I};
use crate::model::{NormalForm, TimeSignal};

/// Relative tolerance for matching ω with its partner −ω.
pub const PAIRING_TOLERANCE: f64 = 1e-8;
/// Eigenvalues closer than this (relative) are treated as one degenerate cluster.
const CLUSTER_TOLERANCE: f64 = 1e-7;
/// Parts of ω below this (relative) are snapped to zero.
const SNAP_TOLERANCE: f64 = 1e-10;
const MAX_MODE_CONDITION: f64 = 1e10;
const MAX_SOLVE_CONDITION: f64 = 1e12;

#[derive(Clone, Debug, PartialEq)]
pub struct ModeAmplitude {
    pub r: CVector,
    pub p: CVector,
}

impl ModeAmplitude {
    pub fn conj(&self) -> Self {
        ModeAmplitude {
            r: self.r.map(|z| z.conj()),
            p: self.p.map(|z| z.conj()),
        }
    }

    /// Stacked phase-space vector (R, P).
    pub fn stacked(&self) -> CVector {
        let n = self.r.len();
        CVector::from_fn(2 * n, |k, _| if k < n { self.r[k] } else { self.p[k - n] })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeSet {
    pub dim: usize,
    pub mass: f64,
    pub omega: DMatrix<f64>,
    pub v: DMatrix<f64>,
    /// 2N frequencies: positive branch `0..N`, partners `N..2N`.
    pub freqs: Vec<Complex64>,
    pub amps: Vec<ModeAmplitude>,
    /// `pairing[k]` is the index of the mode with frequency `−freqs[k]`.
    pub pairing: Vec<usize>,
}

/// Mode weights λ_i of the positive-branch modes.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientVector {
    pub lambdas: Vec<Complex64>,
}

impl CoefficientVector {
    pub fn zeros(n: usize) -> Self {
        CoefficientVector {
            lambdas: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn new(lambdas: Vec<Complex64>) -> Self {
        CoefficientVector { lambdas }
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }
}

/// Mode components g_i(t) of a drive: `g_i(t) = Σ_j coeffs[i][j] g_j(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveProjection {
    pub coeffs: CMatrix,
    pub signal: TimeSignal,
}

impl DriveProjection {
    pub fn components(&self, t: f64) -> Result<Vec<Complex64>> {
        let g = self.signal.eval(t, self.coeffs.ncols())?;
        let gc = &self.coeffs * crate::linalg::complexify_vec(&g);
        Ok(gc.iter().cloned().collect())
    }
}

pub fn stability_matrix(nf: &NormalForm) -> DMatrix<f64> {
    let n = nf.dim;
    let m = nf.mass;
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    a.view_mut((0, 0), (n, n)).copy_from(&(-&nf.omega));
    a.view_mut((0, n), (n, n)).copy_from(&(DMatrix::identity(n, n) / m));
    a.view_mut((n, 0), (n, n)).copy_from(&(&nf.v * -m));
    a.view_mut((n, n), (n, n)).copy_from(&(-&nf.omega));
    a
}

/// Largest entry of `−Mᵀ − S M S⁻¹` with `S = [[0, I], [−I, 0]]`.
pub fn reflexivity_defect(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows() / 2;
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    s.view_mut((0, n), (n, n)).fill_with_identity();
    s.view_mut((n, 0), (n, n)).copy_from(&(-DMatrix::<f64>::identity(n, n)));
    let s_inv = -&s;
    let lhs = -a.transpose();
    let rhs = &s * a * &s_inv;
    crate::linalg::max_abs(&(lhs - rhs))
}

fn is_positive_branch(w: Complex64) -> bool {
    w.re > 0.0 || (w.re == 0.0 && w.im > 0.0)
}

fn snap(w: Complex64, scale: f64) -> Complex64 {
    let tol = SNAP_TOLERANCE * scale;
    c(
        if w.re.abs() <= tol { 0.0 } else { w.re },
        if w.im.abs() <= tol { 0.0 } else { w.im },
    )
}

struct Cluster {
    freq: Complex64,
    vectors: Vec<CVector>,
}

/// Null space of `M − iωI` spanning a cluster of multiplicity `k`.
fn null_space(mc: &CMatrix, freq: Complex64, k: usize, scale: f64) -> Result<Vec<CVector>> {
    let n2 = mc.nrows();
    let shifted = mc - CMatrix::identity(n2, n2) * (I * freq);
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..n2).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let worst = svd.singular_values[order[k - 1]];
    if worst > 1e-6 * scale {
        return Err(Error::DefectiveSpectrum(format!(
            "eigenvalue i·({freq}) has algebraic multiplicity {k} but fewer independent eigenvectors \
             (singular value {worst:.3e})"
        )));
    }
    Ok(order[..k]
        .iter()
        .map(|&i| v_t.row(i).transpose().map(|z| z.conj()))
        .collect())
}

/// Canonical basis of the span of `rs` (reduced row echelon form of the rows).
fn canonical_basis(rs: &[CVector]) -> Vec<CVector> {
    let k = rs.len();
    let n = rs[0].len();
    let mut rows: Vec<CVector> = rs.to_vec();
    let scale = rows.iter().map(|r| r.camax()).fold(0.0, f64::max);
    let mut lead = 0;
    for col in 0..n {
        if lead == k {
            break;
        }
        let (piv, mag) = (lead..k)
            .map(|r| (r, rows[r][col].norm()))
            .fold((lead, -1.0), |best, x| if x.1 > best.1 { x } else { best });
        if mag <= 1e-8 * scale {
            continue;
        }
        rows.swap(lead, piv);
        let p = rows[lead][col];
        rows[lead] /= p;
        for r in 0..k {
            if r != lead {
                let f = rows[r][col];
                let sub = &rows[lead] * f;
                rows[r] -= sub;
            }
        }
        lead += 1;
    }
    rows
}

/// Gram–Schmidt with the Hermitian form `⟨x, y⟩ = xᴴ (ωI − iΩ) y`.
///
/// This is the symplectic pairing of two modes of equal real frequency; it
/// reduces to the standard inner product when Ω vanishes.
fn symplectic_orthonormalize(rs: Vec<CVector>, freq: f64, omega: &DMatrix<f64>) -> Result<Vec<CVector>> {
    let n = omega.nrows();
    let form = CMatrix::identity(n, n) * c(freq, 0.0) - complexify(omega) * I;
    let inner = |x: &CVector, y: &CVector| (x.adjoint() * &form * y)[(0, 0)];
    let mut out: Vec<CVector> = Vec::with_capacity(rs.len());
    let mut sign = 0.0;
    for r in rs {
        let mut v = r.clone();
        for u in &out {
            let proj = inner(u, &v) / inner(u, u);
            v -= u * proj;
        }
        let nn = inner(&v, &v).re;
        let s = nn.signum();
        if nn.abs() <= 1e-12 * freq.abs().max(1.0) * v.norm_squared() || (sign != 0.0 && s != sign) {
            return Err(Error::DegenerateUnresolved(format!(
                "degenerate modes at frequency {freq} have an indefinite symplectic form"
            )));
        }
        sign = s;
        out.push(v / c(nn.abs().sqrt(), 0.0));
    }
    Ok(out)
}

/// Scales R so its largest-magnitude component is exactly 1 and recomputes P = m(Ω + iω)R.
fn normalized_amplitude(r: &CVector, freq: Complex64, nf: &NormalForm) -> ModeAmplitude {
    let k = dominant_index(r.as_slice(), |z: Complex64| z.norm());
    let mut r = r / r[k];
    r[k] = c(1.0, 0.0);
    let n = nf.dim;
    let gen = complexify(&nf.omega) + CMatrix::identity(n, n) * (I * freq);
    let p = gen * &r * c(nf.mass, 0.0);
    ModeAmplitude { r, p }
}

fn cluster_modes(nf: &NormalForm, cl: &Cluster) -> Result<Vec<ModeAmplitude>> {
    let n = nf.dim;
    let rs: Vec<CVector> = cl.vectors.iter().map(|v| v.rows(0, n).into_owned()).collect();
    let rs = if rs.len() > 1 {
        let basis = canonical_basis(&rs);
        if cl.freq.im == 0.0 {
            symplectic_orthonormalize(basis, cl.freq.re, &nf.omega)?
        } else {
            standard_orthonormalize(basis)
        }
    } else {
        rs
    };
    Ok(rs.iter().map(|r| normalized_amplitude(r, cl.freq, nf)).collect())
}

fn standard_orthonormalize(rs: Vec<CVector>) -> Vec<CVector> {
    let mut out: Vec<CVector> = Vec::with_capacity(rs.len());
    for r in rs {
        let mut v = r;
        for u in &out {
            let proj = u.dotc(&v);
            v -= u * proj;
        }
        let norm = v.norm();
        out.push(v / c(norm, 0.0));
    }
    out
}

/// Eigenmodes of the normal-form system.
pub fn compute_modes(nf: &NormalForm) -> Result<ModeSet> {
    let n = nf.dim;
    let a = stability_matrix(nf);
    let scale = a.amax().max(1.0);
    let mc = complexify(&a);

    // iω = λ  ⇒  ω = −iλ
    let mut freqs: Vec<Complex64> = a
        .complex_eigenvalues()
        .iter()
        .map(|l| snap(-I * l, scale))
        .collect();
    freqs.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));

    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for w in freqs {
        match groups
            .iter_mut()
            .find(|g| (g[0] - w).norm() <= CLUSTER_TOLERANCE * scale)
        {
            Some(g) => g.push(w),
            None => groups.push(vec![w]),
        }
    }

    let mut clusters = Vec::with_capacity(groups.len());
    for g in &groups {
        let mean = g.iter().sum::<Complex64>() / g.len() as f64;
        let freq = snap(mean, scale);
        let vectors = null_space(&mc, freq, g.len(), scale)?;
        clusters.push(Cluster { freq, vectors });
    }

    if clusters.iter().any(|cl| cl.freq.norm() == 0.0) {
        return Err(Error::DegenerateUnresolved(
            "zero frequency has no positive/negative branch".into(),
        ));
    }

    let mut positive: Vec<&Cluster> = clusters.iter().filter(|cl| is_positive_branch(cl.freq)).collect();
    positive.sort_by(|x, y| x.freq.re.total_cmp(&y.freq.re).then(x.freq.im.total_cmp(&y.freq.im)));

    let mut pos_freqs = Vec::with_capacity(n);
    let mut pos_amps = Vec::with_capacity(n);
    let mut neg_freqs = Vec::with_capacity(n);
    let mut neg_amps = Vec::with_capacity(n);
    for cl in positive {
        let partner = clusters
            .iter()
            .filter(|o| !is_positive_branch(o.freq) && o.vectors.len() == cl.vectors.len())
            .find(|o| (o.freq + cl.freq).norm() <= PAIRING_TOLERANCE * cl.freq.norm().max(1.0))
            .ok_or_else(|| {
                Error::DegenerateUnresolved(format!("no partner with frequency {}", -cl.freq))
            })?;
        let modes = cluster_modes(nf, cl)?;
        let partners = if cl.freq.im == 0.0 {
            modes.iter().map(ModeAmplitude::conj).collect()
        } else {
            cluster_modes(nf, partner)?
        };
        for (mode, part) in modes.into_iter().zip(partners) {
            pos_freqs.push(cl.freq);
            pos_amps.push(mode);
            neg_freqs.push(-cl.freq);
            neg_amps.push(part);
        }
    }
    if pos_freqs.len() != n {
        return Err(Error::DegenerateUnresolved(format!(
            "found {} positive-branch modes, expected {n}",
            pos_freqs.len()
        )));
    }

    let mut freqs = pos_freqs;
    freqs.extend(neg_freqs);
    let mut amps = pos_amps;
    amps.extend(neg_amps);
    let pairing = (0..2 * n).map(|k| (k + n) % (2 * n)).collect();
    let set = ModeSet {
        dim: n,
        mass: nf.mass,
        omega: nf.omega.clone(),
        v: nf.v.clone(),
        freqs,
        amps,
        pairing,
    };

    let cond = crate::linalg::condition_number(&set.eigenvector_matrix());
    if !(cond < MAX_MODE_CONDITION) {
        return Err(Error::DefectiveSpectrum(format!(
            "mode amplitudes are nearly dependent (condition number {cond:.3e})"
        )));
    }
    Ok(set)
}

impl ModeSet {
    pub fn positive_freqs(&self) -> &[Complex64] {
        &self.freqs[..self.dim]
    }

    pub fn has_real_spectrum(&self) -> bool {
        self.freqs.iter().all(|w| w.im == 0.0)
    }

    fn require_real(&self) -> Result<()> {
        match self.freqs.iter().find(|w| w.im != 0.0) {
            Some(w) => Err(Error::ComplexFrequency { re: w.re, im: w.im }),
            None => Ok(()),
        }
    }

    /// All 2N mode vectors as columns.
    pub fn eigenvector_matrix(&self) -> CMatrix {
        let n2 = 2 * self.dim;
        let mut out = CMatrix::zeros(n2, n2);
        for (k, a) in self.amps.iter().enumerate() {
            out.set_column(k, &a.stacked());
        }
        out
    }

    /// Columns `(R_i, P_i)` followed by their conjugates, i = 1..N.
    pub fn physical_basis(&self) -> CMatrix {
        let n = self.dim;
        let mut out = CMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            let s = self.amps[i].stacked();
            out.set_column(i, &s);
            out.set_column(i + n, &s.map(|z| z.conj()));
        }
        out
    }

    fn physical_basis_inverse(&self) -> Result<CMatrix> {
        checked_inverse(&self.physical_basis(), MAX_SOLVE_CONDITION)
            .map_err(|condition| Error::SingularModeBasis { condition })
    }

    /// ‖M u_k − iω_k u_k‖ / ‖u_k‖.
    pub fn residual(&self, k: usize) -> f64 {
        let nf_like = NormalForm {
            dim: self.dim,
            mass: self.mass,
            omega: self.omega.clone(),
            v: self.v.clone(),
            g: TimeSignal::Zero,
            transform: DMatrix::identity(self.dim, self.dim),
            stretch: DMatrix::zeros(self.dim, self.dim),
            momentum_shift: TimeSignal::Zero,
        };
        let mc = complexify(&stability_matrix(&nf_like));
        let u = self.amps[k].stacked();
        (mc * &u - &u * (I * self.freqs[k])).norm() / u.norm()
    }
}

/// Real phase-space point `Σ_i [λ_i (R_i, P_i) e^{iω_i t} + c.c.]`.
pub fn trajectory(ms: &ModeSet, c: &CoefficientVector, t: f64) -> Result<(DVector<f64>, DVector<f64>)> {
    ms.require_real()?;
    check_len(ms, c)?;
    let n = ms.dim;
    let mut r = DVector::zeros(n);
    let mut p = DVector::zeros(n);
    for i in 0..n {
        let phase = c.lambdas[i] * (I * ms.freqs[i] * t).exp();
        r += (&ms.amps[i].r * phase).map(|z| 2.0 * z.re);
        p += (&ms.amps[i].p * phase).map(|z| 2.0 * z.re);
    }
    Ok((r, p))
}

fn check_len(ms: &ModeSet, c: &CoefficientVector) -> Result<()> {
    if c.len() != ms.dim {
        return Err(Error::DimensionMismatch {
            what: "coefficient vector".into(),
            expected: ms.dim,
            found: c.len(),
        });
    }
    Ok(())
}

/// Mode weights reproducing the initial point (r0, p0) at t = 0.
pub fn fit_coefficients(ms: &ModeSet, r0: &DVector<f64>, p0: &DVector<f64>) -> Result<CoefficientVector> {
    let n = ms.dim;
    if r0.len() != n || p0.len() != n {
        return Err(Error::DimensionMismatch {
            what: "initial conditions".into(),
            expected: n,
            found: r0.len().max(p0.len()),
        });
    }
    let inv = ms.physical_basis_inverse()?;
    let z = CVector::from_fn(2 * n, |k, _| c(if k < n { r0[k] } else { p0[k - n] }, 0.0));
    let x = inv * z;
    Ok(CoefficientVector::new(x.rows(0, n).iter().cloned().collect()))
}

/// Expansion `(0, g(t)) = Σ_i [g_i(t)(R_i, P_i) + c.c.]` of a drive into mode components.
pub fn project_drive(ms: &ModeSet, g: &TimeSignal) -> Result<DriveProjection> {
    let n = ms.dim;
    g.validate(n)?;
    let inv = ms.physical_basis_inverse()?;
    Ok(DriveProjection {
        coeffs: inv.view((0, n), (n, n)).into_owned(),
        signal: g.clone(),
    })
}

/// Mode weights at time t under the drive:
/// `λ_i(t) = λ_i(0) − m ∫₀ᵗ g_i(τ) e^{−iω_i τ} dτ`.
pub fn evolve_driven(
    ms: &ModeSet,
    c0: &CoefficientVector,
    dp: &DriveProjection,
    t: f64,
) -> Result<CoefficientVector> {
    check_len(ms, c0)?;
    let mut out = c0.clone();
    for i in 0..ms.dim {
        let row = dp.coeffs.row(i).transpose();
        let integral = dp.signal.integrate_modulated(&row, ms.freqs[i], t)?;
        out.lambdas[i] -= integral * ms.mass;
    }
    Ok(out)
}

/// Combined evaluation of the driven physical solution at time t.
pub fn driven_trajectory(
    ms: &ModeSet,
    c0: &CoefficientVector,
    dp: &DriveProjection,
    t: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    trajectory(ms, &evolve_driven(ms, c0, dp, t)?, t)
}
