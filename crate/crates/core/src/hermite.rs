//! Multidimensional Hermite polynomials `H^γ_n` of a complex symmetric matrix γ.
//!
//! They are the Taylor coefficients of the generating function
//! `exp[Σ_ij γ_ij (x_i − z_i/2) z_j] = Σ_n H^γ_n(x) Π z_i^{n_i}/n_i!`.
//! Evaluation uses the three-term recurrence obtained by differentiating the
//! generating function in z_k:
//! `H_{n+e_k} = (γx)_k H_n − Σ_j γ_kj n_j H_{n−e_j}`.

use std::collections::BTreeMap;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{asymmetry_c, c, complexify, max_abs_c, min_symmetric_eigenvalue, CMatrix};

pub const GENERATING_ORACLE_MAX_ORDER: usize = 12;
pub const RODRIGUES_ORACLE_MAX_ORDER: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, k: usize) -> Self {
        let mut n = vec![0; dim];
        n[k] = 1;
        MultiIndex(n)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// All indices of the given dimension with total order ≤ `max_total`, by total order then
    /// lexicographically descending (so `(1,0)` precedes `(0,1)`).
    pub fn up_to_total(dim: usize, max_total: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for total in 0..=max_total {
            let mut level = Vec::new();
            compositions(dim, total, &mut Vec::with_capacity(dim), &mut level);
            out.extend(level.into_iter().map(MultiIndex));
        }
        out
    }
}

fn compositions(dim: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if prefix.len() + 1 == dim {
        prefix.push(left);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    if dim == 0 {
        out.push(Vec::new());
        return;
    }
    for first in (0..=left).rev() {
        prefix.push(first);
        compositions(dim, left - first, prefix, out);
        prefix.pop();
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HermiteContext {
    pub gamma: CMatrix,
}

impl HermiteContext {
    pub fn new(gamma: CMatrix) -> Result<Self> {
        if !gamma.is_square() {
            return Err(Error::DimensionMismatch {
                what: "gamma columns".into(),
                expected: gamma.nrows(),
                found: gamma.ncols(),
            });
        }
        let asym = asymmetry_c(&gamma);
        if asym > 1e-10 * max_abs_c(&gamma).max(1.0) {
            return Err(Error::NonSymmetricInput {
                matrix: "gamma".into(),
                asymmetry: asym,
            });
        }
        Ok(HermiteContext { gamma })
    }

    pub fn real(gamma: &DMatrix<f64>) -> Result<Self> {
        Self::new(complexify(gamma))
    }

    pub fn dim(&self) -> usize {
        self.gamma.nrows()
    }

    fn check(&self, n: &[usize], x: &[Complex64]) -> Result<()> {
        for (what, len) in [("multi-index", n.len()), ("point", x.len())] {
            if len != self.dim() {
                return Err(Error::DimensionMismatch {
                    what: what.into(),
                    expected: self.dim(),
                    found: len,
                });
            }
        }
        Ok(())
    }

    fn gamma_x(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n).map(|k| (0..n).map(|j| self.gamma[(k, j)] * x[j]).sum()).collect()
    }

    fn is_real(&self) -> bool {
        self.gamma.iter().all(|z| z.im == 0.0)
    }
}

/// Values of H^γ_n(x) for every n in the box `0 ≤ n_i ≤ max_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermiteTable {
    pub max: Vec<usize>,
    values: Vec<Complex64>,
}

impl HermiteTable {
    fn offset(max: &[usize], n: &[usize]) -> usize {
        n.iter().zip(max).fold(0, |acc, (&ni, &mi)| acc * (mi + 1) + ni)
    }

    pub fn get(&self, n: &[usize]) -> Option<Complex64> {
        if n.len() != self.max.len() || n.iter().zip(&self.max).any(|(a, b)| a > b) {
            return None;
        }
        Some(self.values[Self::offset(&self.max, n)])
    }
}

/// Fills the whole index box by the recurrence.
pub fn evaluate_box(ctx: &HermiteContext, max: &[usize], x: &[Complex64]) -> Result<HermiteTable> {
    ctx.check(max, x)?;
    let dim = ctx.dim();
    let gx = ctx.gamma_x(x);
    let size: usize = max.iter().map(|m| m + 1).product();
    let mut values = vec![c(0.0, 0.0); size];
    let mut n = vec![0usize; dim];
    for slot in 0..size {
        if slot == 0 {
            values[0] = c(1.0, 0.0);
        } else {
            let k = n.iter().position(|&v| v > 0).expect("nonzero index");
            let mut m = n.clone();
            m[k] -= 1;
            let mut h = gx[k] * values[HermiteTable::offset(max, &m)];
            for j in 0..dim {
                if m[j] > 0 {
                    let mj = m[j];
                    m[j] -= 1;
                    h -= ctx.gamma[(k, j)] * mj as f64 * values[HermiteTable::offset(max, &m)];
                    m[j] += 1;
                }
            }
            values[slot] = h;
        }
        // advance the mixed-radix counter (last digit fastest)
        for d in (0..dim).rev() {
            if n[d] < max[d] {
                n[d] += 1;
                break;
            }
            n[d] = 0;
        }
    }
    Ok(HermiteTable { max: max.to_vec(), values })
}

pub fn evaluate(ctx: &HermiteContext, n: &MultiIndex, x: &[Complex64]) -> Result<Complex64> {
    let table = evaluate_box(ctx, &n.0, x)?;
    Ok(table.get(&n.0).expect("index inside its own box"))
}

pub fn evaluate_real(ctx: &HermiteContext, n: &MultiIndex, x: &[f64]) -> Result<Complex64> {
    let xc: Vec<Complex64> = x.iter().map(|&v| c(v, 0.0)).collect();
    evaluate(ctx, n, &xc)
}

/// Sparse multivariate polynomial with complex coefficients.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Polynomial {
    pub terms: BTreeMap<Vec<usize>, Complex64>,
}

impl Polynomial {
    pub fn constant(dim: usize, v: Complex64) -> Self {
        let mut terms = BTreeMap::new();
        if v != c(0.0, 0.0) {
            terms.insert(vec![0; dim], v);
        }
        Polynomial { terms }
    }

    pub fn add_term(&mut self, exps: Vec<usize>, v: Complex64) {
        *self.terms.entry(exps).or_insert(c(0.0, 0.0)) += v;
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, v) in &other.terms {
            out.add_term(e.clone(), *v);
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * s)).collect(),
        }
    }

    /// Product, dropping monomials with any exponent above `limit` (when given).
    pub fn mul(&self, other: &Polynomial, limit: Option<&[usize]>) -> Polynomial {
        let mut out = Polynomial::default();
        for (ea, va) in &self.terms {
            for (eb, vb) in &other.terms {
                let e: Vec<usize> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                if let Some(lim) = limit {
                    if e.iter().zip(lim).any(|(a, b)| a > b) {
                        continue;
                    }
                }
                out.add_term(e, va * vb);
            }
        }
        out
    }

    pub fn derivative(&self, k: usize) -> Polynomial {
        let mut out = Polynomial::default();
        for (e, v) in &self.terms {
            if e[k] > 0 {
                let mut d = e.clone();
                d[k] -= 1;
                out.add_term(d, v * e[k] as f64);
            }
        }
        out
    }

    pub fn coefficient(&self, exps: &[usize]) -> Complex64 {
        self.terms.get(exps).copied().unwrap_or(c(0.0, 0.0))
    }

    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, v)| e.iter().zip(x).fold(*v, |acc, (&p, xi)| acc * xi.powu(p as u32)))
            .sum()
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Coefficient extraction from the truncated generating function.
pub fn generating_oracle(ctx: &HermiteContext, n: &MultiIndex, x: &[Complex64]) -> Result<Complex64> {
    ctx.check(&n.0, x)?;
    let order = n.total();
    if order > GENERATING_ORACLE_MAX_ORDER {
        return Err(Error::OrderTooLarge {
            order,
            max: GENERATING_ORACLE_MAX_ORDER,
        });
    }
    let dim = ctx.dim();
    let gx = ctx.gamma_x(x);
    // exponent p(z) = Σ_j (γx)_j z_j − ½ Σ_ij γ_ij z_i z_j
    let mut p = Polynomial::default();
    for j in 0..dim {
        let mut e = vec![0; dim];
        e[j] = 1;
        p.add_term(e, gx[j]);
        for i in 0..dim {
            let mut e = vec![0; dim];
            e[i] += 1;
            e[j] += 1;
            p.add_term(e, ctx.gamma[(i, j)] * -0.5);
        }
    }
    let limit = n.0.as_slice();
    let mut power = Polynomial::constant(dim, c(1.0, 0.0));
    let mut coeff = power.coefficient(limit);
    for k in 1..=order {
        power = power.mul(&p, Some(limit)).scale(c(1.0 / k as f64, 0.0));
        coeff += power.coefficient(limit);
    }
    Ok(coeff * n.0.iter().map(|&k| factorial(k)).product::<f64>())
}

/// `(−1)^{|n|} e^{½xγx} ∂^n e^{−½xγx}` by exact differentiation of the polynomial prefactor.
pub fn rodrigues_oracle(ctx: &HermiteContext, n: &MultiIndex, x: &[Complex64]) -> Result<Complex64> {
    ctx.check(&n.0, x)?;
    if !ctx.is_real() {
        return Err(Error::InvalidModel("Rodrigues form requires a real gamma".into()));
    }
    let order = n.total();
    if order > RODRIGUES_ORACLE_MAX_ORDER {
        return Err(Error::OrderTooLarge {
            order,
            max: RODRIGUES_ORACLE_MAX_ORDER,
        });
    }
    let dim = ctx.dim();
    // (γx)_k as linear polynomials in x
    let linear: Vec<Polynomial> = (0..dim)
        .map(|k| {
            let mut q = Polynomial::default();
            for j in 0..dim {
                let mut e = vec![0; dim];
                e[j] = 1;
                q.add_term(e, ctx.gamma[(k, j)]);
            }
            q
        })
        .collect();
    let mut poly = Polynomial::constant(dim, c(1.0, 0.0));
    for (k, &nk) in n.0.iter().enumerate() {
        for _ in 0..nk {
            // ∂_k (P G) = (∂_k P − (γx)_k P) G
            poly = poly.derivative(k).add(&poly.mul(&linear[k], None).scale(c(-1.0, 0.0)));
        }
    }
    let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
    Ok(poly.eval(x) * sign)
}

/// `∫ e^{−½xγx} H_n H_m dx` by tensor Gauss–Legendre on `[−10, 10]^N`, together with
/// `π^{N/2} Π 2^{n_i} n_i! δ_nm`.
pub fn orthogonality_check(
    ctx: &HermiteContext,
    n: &MultiIndex,
    m: &MultiIndex,
    points: usize,
) -> Result<(f64, f64)> {
    let dim = ctx.dim();
    let offdiag = (0..dim).any(|i| (0..dim).any(|j| i != j && ctx.gamma[(i, j)] != c(0.0, 0.0)));
    if offdiag || !ctx.is_real() {
        return Err(Error::NotDiagonal);
    }
    let diag: Vec<f64> = (0..dim).map(|i| ctx.gamma[(i, i)].re).collect();
    if min_symmetric_eigenvalue(&DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag.clone()))) <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            what: "gamma".into(),
            min_eigenvalue: diag.iter().cloned().fold(f64::INFINITY, f64::min),
        });
    }
    for idx in [n, m] {
        ctx.check(&idx.0, &vec![c(0.0, 0.0); dim])?;
    }
    let points = NonZeroUsize::new(points).ok_or_else(|| Error::InvalidGrid("zero quadrature points".into()))?;
    let rule = GaussLegendre::new(points);
    let half = 10.0;
    let nodes: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (x * half, w * half))
        .collect();
    let max: Vec<usize> = n.0.iter().zip(&m.0).map(|(a, b)| *a.max(b)).collect();

    let mut total = 0.0;
    let mut idx = vec![0usize; dim];
    let count = nodes.len().pow(dim as u32);
    for _ in 0..count {
        let x: Vec<Complex64> = idx.iter().map(|&i| c(nodes[i].0, 0.0)).collect();
        let w: f64 = idx.iter().map(|&i| nodes[i].1).product();
        let weight: f64 = (0..dim).map(|i| -0.5 * diag[i] * x[i].re * x[i].re).sum::<f64>().exp();
        let table = evaluate_box(ctx, &max, &x)?;
        let hn = table.get(&n.0).expect("inside box");
        let hm = table.get(&m.0).expect("inside box");
        total += w * weight * (hn * hm).re;
        for d in (0..dim).rev() {
            idx[d] += 1;
            if idx[d] < nodes.len() {
                break;
            }
            idx[d] = 0;
        }
    }
    let expected = if n == m {
        std::f64::consts::PI.powf(dim as f64 / 2.0)
            * n.0.iter().map(|&k| 2f64.powi(k as i32) * factorial(k)).product::<f64>()
    } else {
        0.0
    };
    Ok((total, expected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ctx1(g: f64) -> HermiteContext {
        HermiteContext::real(&DMatrix::from_element(1, 1, g)).unwrap()
    }

    fn re(x: &[f64]) -> Vec<Complex64> {
        x.iter().map(|&v| c(v, 0.0)).collect()
    }

    #[test]
    fn zero_order_is_one() {
        let ctx = HermiteContext::new(CMatrix::from_row_slice(2, 2, &[c(1.0, 0.5), c(0.2, 0.0), c(0.2, 0.0), c(3.0, -1.0)]))
            .unwrap();
        let x = [c(0.3, 0.1), c(-2.0, 0.4)];
        assert_eq!(evaluate(&ctx, &MultiIndex::zero(2), &x).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn classical_hermite_values() {
        let ctx = ctx1(2.0);
        let h = |n: usize, x: f64| evaluate(&ctx, &MultiIndex(vec![n]), &re(&[x])).unwrap().re;
        assert_eq!(h(1, 1.0), 2.0);
        assert_eq!(h(2, 1.0), 2.0);
        for &x in &[-1.3, 0.0, 0.4, 2.2] {
            assert_abs_diff_eq!(h(3, x), 8.0 * x.powi(3) - 12.0 * x, epsilon = 1e-12);
            for n in 1..10 {
                let classical = 2.0 * x * h(n, x) - 2.0 * n as f64 * h(n - 1, x);
                assert_abs_diff_eq!(h(n + 1, x), classical, epsilon = 1e-9 * classical.abs().max(1.0));
            }
        }
    }

    #[test]
    fn mixed_second_order() {
        let g = CMatrix::from_row_slice(2, 2, &[c(1.5, 0.2), c(0.7, -0.3), c(0.7, -0.3), c(0.9, 0.0)]);
        let ctx = HermiteContext::new(g.clone()).unwrap();
        let x = [c(0.4, -0.2), c(1.1, 0.5)];
        let gx0 = g[(0, 0)] * x[0] + g[(0, 1)] * x[1];
        let gx1 = g[(1, 0)] * x[0] + g[(1, 1)] * x[1];
        let got = evaluate(&ctx, &MultiIndex(vec![1, 1]), &x).unwrap();
        assert!((got - (gx0 * gx1 - g[(0, 1)])).norm() < 1e-14);
    }

    #[test]
    fn oracle_examples() {
        let ctx = ctx1(2.0);
        assert_eq!(generating_oracle(&ctx, &MultiIndex(vec![0]), &re(&[0.7])).unwrap(), c(1.0, 0.0));
        assert!(generating_oracle(&ctx, &MultiIndex(vec![3]), &re(&[0.0])).unwrap().norm() < 1e-15);
        let x = 0.8;
        let r = rodrigues_oracle(&ctx, &MultiIndex(vec![3]), &re(&[x])).unwrap();
        assert_abs_diff_eq!(r.re, 8.0 * x * x * x - 12.0 * x, epsilon = 1e-12);

        let g = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 1.5]);
        let ctx3 = HermiteContext::real(&g).unwrap();
        let x3 = re(&[0.3, -0.5, 1.2]);
        let r1 = rodrigues_oracle(&ctx3, &MultiIndex(vec![1, 0, 0]), &x3).unwrap();
        let expected = 2.0 * 0.3 + 0.3 * -0.5 + 0.1 * 1.2;
        assert_abs_diff_eq!(r1.re, expected, epsilon = 1e-14);
    }

    #[test]
    fn oracle_order_limits() {
        let ctx = ctx1(2.0);
        assert!(matches!(
            generating_oracle(&ctx, &MultiIndex(vec![13]), &re(&[0.1])),
            Err(Error::OrderTooLarge { order: 13, max: 12 })
        ));
        assert!(matches!(
            rodrigues_oracle(&ctx, &MultiIndex(vec![9]), &re(&[0.1])),
            Err(Error::OrderTooLarge { order: 9, max: 8 })
        ));
    }

    #[test]
    fn one_dimensional_orthogonality() {
        let ctx = ctx1(2.0);
        let (a, e) = orthogonality_check(&ctx, &MultiIndex(vec![0]), &MultiIndex(vec![0]), 200).unwrap();
        assert_abs_diff_eq!(a, std::f64::consts::PI.sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(e, std::f64::consts::PI.sqrt(), epsilon = 1e-15);
        let (a, e) = orthogonality_check(&ctx, &MultiIndex(vec![1]), &MultiIndex(vec![0]), 200).unwrap();
        assert!(a.abs() < 1e-12 && e == 0.0);
        let (a, e) = orthogonality_check(&ctx, &MultiIndex(vec![2]), &MultiIndex(vec![2]), 200).unwrap();
        assert_abs_diff_eq!(e, 8.0 * std::f64::consts::PI.sqrt(), epsilon = 1e-13);
        assert_abs_diff_eq!(a / e, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn orthogonality_requires_diagonal_gamma() {
        let ctx = HermiteContext::real(&DMatrix::from_row_slice(2, 2, &[2.0, 0.1, 0.1, 2.0])).unwrap();
        let n = MultiIndex::zero(2);
        assert_eq!(orthogonality_check(&ctx, &n, &n, 20), Err(Error::NotDiagonal));
    }

    #[test]
    fn index_enumeration() {
        let all = MultiIndex::up_to_total(2, 2);
        let shown: Vec<String> = all.iter().map(|n| n.to_string()).collect();
        assert_eq!(shown, ["(0,0)", "(1,0)", "(0,1)", "(2,0)", "(1,1)", "(0,2)"]);
        assert_eq!(MultiIndex::up_to_total(3, 3).len(), 20);
        assert_eq!(MultiIndex::up_to_total(1, 4).len(), 5);
    }

    #[test]
    fn asymmetric_gamma_rejected() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(HermiteContext::real(&g), Err(Error::NonSymmetricInput { .. })));
    }
}
