use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CVector, I};

/// A vector-valued function of time used for the drives f(t), h(t) and g(t).
///
/// The sinusoid is `a · cos(omega · t + phase)`; sampled signals interpolate
/// linearly between strictly increasing knots.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TimeSignal {
    #[default]
    Zero,
    Constant {
        v: Vec<f64>,
    },
    Sinusoid {
        a: Vec<f64>,
        omega: f64,
        phase: f64,
    },
    Sampled {
        t: Vec<f64>,
        v: Vec<Vec<f64>>,
    },
    /// Pointwise sum; produced when several drives are combined by a reduction.
    Sum {
        terms: Vec<TimeSignal>,
    },
}

impl TimeSignal {
    pub fn constant(v: &[f64]) -> Self {
        TimeSignal::Constant { v: v.to_vec() }
    }

    pub fn sinusoid(a: &[f64], omega: f64, phase: f64) -> Self {
        TimeSignal::Sinusoid {
            a: a.to_vec(),
            omega,
            phase,
        }
    }

    pub fn sampled(t: Vec<f64>, v: Vec<Vec<f64>>) -> Result<Self> {
        let s = TimeSignal::Sampled { t, v };
        s.check_knots()?;
        Ok(s)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            TimeSignal::Zero => true,
            TimeSignal::Constant { v } => v.iter().all(|x| *x == 0.0),
            TimeSignal::Sinusoid { a, .. } => a.iter().all(|x| *x == 0.0),
            TimeSignal::Sampled { v, .. } => v.iter().flatten().all(|x| *x == 0.0),
            TimeSignal::Sum { terms } => terms.iter().all(TimeSignal::is_zero),
        }
    }

    fn check_knots(&self) -> Result<()> {
        if let TimeSignal::Sampled { t, v } = self {
            if t.len() < 2 {
                return Err(Error::InvalidSignal("sampled signal needs at least two knots".into()));
            }
            if t.len() != v.len() {
                return Err(Error::InvalidSignal(format!(
                    "{} knots but {} sample vectors",
                    t.len(),
                    v.len()
                )));
            }
            if t.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidSignal("sample times must be strictly increasing".into()));
            }
        }
        Ok(())
    }

    /// Checks the signal produces vectors of length `dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let mismatch = |found: usize| Error::DimensionMismatch {
            what: "time signal".into(),
            expected: dim,
            found,
        };
        match self {
            TimeSignal::Zero => Ok(()),
            TimeSignal::Constant { v } if v.len() != dim => Err(mismatch(v.len())),
            TimeSignal::Sinusoid { a, omega, phase } => {
                if a.len() != dim {
                    return Err(mismatch(a.len()));
                }
                if !omega.is_finite() || !phase.is_finite() {
                    return Err(Error::InvalidSignal("non-finite sinusoid parameters".into()));
                }
                Ok(())
            }
            TimeSignal::Sampled { v, .. } => {
                self.check_knots()?;
                match v.iter().find(|row| row.len() != dim) {
                    Some(row) => Err(mismatch(row.len())),
                    None => Ok(()),
                }
            }
            TimeSignal::Sum { terms } => terms.iter().try_for_each(|s| s.validate(dim)),
            TimeSignal::Constant { .. } => Ok(()),
        }
    }

    /// Value at time `t` as a vector of length `dim`.
    pub fn eval(&self, t: f64, dim: usize) -> Result<DVector<f64>> {
        Ok(match self {
            TimeSignal::Zero => DVector::zeros(dim),
            TimeSignal::Constant { v } => DVector::from_column_slice(v),
            TimeSignal::Sinusoid { a, omega, phase } => {
                DVector::from_column_slice(a) * (omega * t + phase).cos()
            }
            TimeSignal::Sampled { t: knots, v } => {
                let (lo, hi) = (knots[0], knots[knots.len() - 1]);
                let slack = 1e-12 * (hi - lo).abs().max(1.0);
                if t < lo - slack || t > hi + slack {
                    return Err(Error::SignalDomainExceeded { t, lo, hi });
                }
                let t = t.clamp(lo, hi);
                let k = match knots.iter().position(|&x| x > t) {
                    Some(0) => 0,
                    Some(k) => k - 1,
                    None => knots.len() - 2,
                };
                let w = (t - knots[k]) / (knots[k + 1] - knots[k]);
                let a = DVector::from_column_slice(&v[k]);
                let b = DVector::from_column_slice(&v[k + 1]);
                a * (1.0 - w) + b * w
            }
            TimeSignal::Sum { terms } => {
                let mut acc = DVector::zeros(dim);
                for s in terms {
                    acc += s.eval(t, dim)?;
                }
                acc
            }
        })
    }

    /// The signal `A · s(t)`.
    pub fn map(&self, a: &DMatrix<f64>) -> TimeSignal {
        let apply = |v: &[f64]| (a * DVector::from_column_slice(v)).as_slice().to_vec();
        match self {
            TimeSignal::Zero => TimeSignal::Zero,
            TimeSignal::Constant { v } => TimeSignal::Constant { v: apply(v) },
            TimeSignal::Sinusoid { a: amp, omega, phase } => TimeSignal::Sinusoid {
                a: apply(amp),
                omega: *omega,
                phase: *phase,
            },
            TimeSignal::Sampled { t, v } => TimeSignal::Sampled {
                t: t.clone(),
                v: v.iter().map(|row| apply(row)).collect(),
            },
            TimeSignal::Sum { terms } => TimeSignal::Sum {
                terms: terms.iter().map(|s| s.map(a)).collect(),
            },
        }
    }

    /// Sum of signals, dropping identically-zero terms.
    pub fn sum(parts: Vec<TimeSignal>) -> TimeSignal {
        let mut terms: Vec<TimeSignal> = parts.into_iter().filter(|s| !s.is_zero()).collect();
        match terms.len() {
            0 => TimeSignal::Zero,
            1 => terms.remove(0),
            _ => TimeSignal::Sum { terms },
        }
    }

    /// ∫₀ᵗ (c · s(τ)) e^{−iωτ} dτ for a complex linear functional `c` (ω may be complex).
    ///
    /// Closed form for zero, constant and sinusoidal signals; composite Simpson
    /// over the knot intervals for sampled ones.
    pub fn integrate_modulated(&self, c: &CVector, omega: Complex64, t: f64) -> Result<Complex64> {
        let functional = |v: &[f64]| -> Complex64 {
            c.iter().zip(v.iter()).map(|(ci, vi)| ci * *vi).sum()
        };
        let rate = -I * omega;
        Ok(match self {
            TimeSignal::Zero => Complex64::new(0.0, 0.0),
            TimeSignal::Constant { v } => functional(v) * exp_integral(rate, t),
            TimeSignal::Sinusoid { a, omega: nu, phase } => {
                let amp = functional(a);
                let plus = Complex64::from_polar(1.0, *phase) * exp_integral(rate + I * *nu, t);
                let minus = Complex64::from_polar(1.0, -*phase) * exp_integral(rate - I * *nu, t);
                amp * 0.5 * (plus + minus)
            }
            TimeSignal::Sampled { t: knots, .. } => {
                let (lo, hi) = (knots[0], knots[knots.len() - 1]);
                let (a, b) = (t.min(0.0), t.max(0.0));
                let slack = 1e-12 * (hi - lo).abs().max(1.0);
                if a < lo - slack || b > hi + slack {
                    return Err(Error::SignalDomainExceeded { t, lo, hi });
                }
                let mut breaks = vec![a];
                breaks.extend(knots.iter().cloned().filter(|&k| k > a && k < b));
                breaks.push(b);
                let dim = c.len();
                let f = |tau: f64| -> Result<Complex64> {
                    let v = self.eval(tau.clamp(lo, hi), dim)?;
                    Ok(functional(v.as_slice()) * (rate * tau).exp())
                };
                let mut total = Complex64::new(0.0, 0.0);
                for w in breaks.windows(2) {
                    let len = w[1] - w[0];
                    if len <= 0.0 {
                        continue;
                    }
                    let mut panels = ((omega.norm() * len / 0.02).ceil() as usize).max(2);
                    panels += panels % 2;
                    let h = len / panels as f64;
                    let mut acc = f(w[0])? + f(w[1])?;
                    for k in 1..panels {
                        let weight = if k % 2 == 1 { 4.0 } else { 2.0 };
                        acc += f(w[0] + k as f64 * h)? * weight;
                    }
                    total += acc * (h / 3.0);
                }
                if t < 0.0 {
                    -total
                } else {
                    total
                }
            }
            TimeSignal::Sum { terms } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for s in terms {
                    acc += s.integrate_modulated(c, omega, t)?;
                }
                acc
            }
        })
    }
}

/// ∫₀ᵗ e^{μτ} dτ, with a series near μt = 0.
fn exp_integral(mu: Complex64, t: f64) -> Complex64 {
    let x = mu * t;
    if x.norm() < 1e-3 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut acc = term;
        for k in 1..8 {
            term *= x / (k as f64 + 1.0);
            acc += term;
        }
        acc * t
    } else {
        (x.exp() - 1.0) / mu
    }
}
