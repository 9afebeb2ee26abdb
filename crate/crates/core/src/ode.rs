//! Classical fixed-step fourth-order Runge–Kutta.

use nalgebra::{DMatrix, DVector, Scalar};
use num_complex::Complex64;

/// State that can be advanced by `y + h·dy` where the derivative has the same shape.
pub trait Rk4State: Clone {
    fn scaled_add(&self, h: f64, dy: &Self) -> Self;
}

impl Rk4State for DMatrix<Complex64> {
    fn scaled_add(&self, h: f64, dy: &Self) -> Self {
        self + dy * Complex64::new(h, 0.0)
    }
}

impl Rk4State for DVector<f64> {
    fn scaled_add(&self, h: f64, dy: &Self) -> Self {
        self + dy * h
    }
}

impl<A: Rk4State, B: Rk4State> Rk4State for (A, B) {
    fn scaled_add(&self, h: f64, dy: &Self) -> Self {
        (self.0.scaled_add(h, &dy.0), self.1.scaled_add(h, &dy.1))
    }
}

/// Number of uniform steps covering `span` with step at most `dt`, and the step itself.
pub fn step_plan(span: f64, dt: f64) -> (usize, f64) {
    let steps = ((span.abs() / dt).ceil() as usize).max(1);
    (steps, span / steps as f64)
}

pub fn rk4_step<S, E>(
    t: f64,
    y: &S,
    h: f64,
    rhs: &mut impl FnMut(f64, &S) -> Result<S, E>,
) -> Result<S, E>
where
    S: Rk4State,
{
    let k1 = rhs(t, y)?;
    let k2 = rhs(t + 0.5 * h, &y.scaled_add(0.5 * h, &k1))?;
    let k3 = rhs(t + 0.5 * h, &y.scaled_add(0.5 * h, &k2))?;
    let k4 = rhs(t + h, &y.scaled_add(h, &k3))?;
    let incr = k1
        .scaled_add(2.0, &k2)
        .scaled_add(2.0, &k3)
        .scaled_add(1.0, &k4);
    Ok(y.scaled_add(h / 6.0, &incr))
}

/// Integrates from `t0` to `t1`, returning every step (including the initial point).
///
/// `post` runs after each step, e.g. to re-symmetrize or to detect blow-up.
pub fn integrate<S, E>(
    y0: S,
    t0: f64,
    t1: f64,
    dt: f64,
    mut rhs: impl FnMut(f64, &S) -> Result<S, E>,
    mut post: impl FnMut(f64, S) -> Result<S, E>,
) -> Result<Vec<(f64, S)>, E>
where
    S: Rk4State,
{
    let (steps, h) = step_plan(t1 - t0, dt);
    let mut path = Vec::with_capacity(steps + 1);
    let mut y = y0;
    path.push((t0, y.clone()));
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let next = rk4_step(t, &y, h, &mut rhs)?;
        let t_next = if k + 1 == steps { t1 } else { t0 + (k + 1) as f64 * h };
        y = post(t_next, next)?;
        path.push((t_next, y.clone()));
    }
    Ok(path)
}

/// Largest entry magnitude of a complex matrix, used by blow-up guards.
pub fn max_entry<T: Scalar + Copy>(a: &DMatrix<T>, abs: impl Fn(T) -> f64) -> f64 {
    a.iter().fold(0.0, |m, &x| m.max(abs(x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    #[test]
    fn fourth_order_convergence_on_oscillator() {
        let err = |dt: f64| {
            let path = integrate(
                (DVector::from_element(1, 1.0), DVector::from_element(1, 0.0)),
                0.0,
                2.0,
                dt,
                |_, y: &(DVector<f64>, DVector<f64>)| Ok::<_, Infallible>((y.1.clone(), -&y.0)),
                |_, y| Ok(y),
            )
            .unwrap();
            (path.last().unwrap().1 .0[0] - 2.0f64.cos()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn plan_lands_on_endpoint() {
        let (n, h) = step_plan(1.0, 0.3);
        assert_eq!(n, 4);
        assert!((h - 0.25).abs() < 1e-15);
    }
}
