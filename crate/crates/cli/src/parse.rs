//! Parsing of list-valued flags.

use linsys_quanta::linalg::CMatrix;
use linsys_quanta::MultiIndex;
use num_complex::Complex64;

use crate::error::CliError;

fn real(flag: &str, s: &str) -> Result<f64, CliError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::argument(flag, format!("`{s}` is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::argument(flag, format!("`{s}` is not finite")));
    }
    Ok(v)
}

pub fn reals(flag: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(|x| real(flag, x)).collect()
}

/// `re` or `re:im`.
pub fn complex(flag: &str, s: &str) -> Result<Complex64, CliError> {
    match s.split_once(':') {
        Some((re, im)) => Ok(Complex64::new(real(flag, re)?, real(flag, im)?)),
        None => Ok(Complex64::new(real(flag, s)?, 0.0)),
    }
}

pub fn complexes(flag: &str, s: &str) -> Result<Vec<Complex64>, CliError> {
    s.split(',').map(|x| complex(flag, x)).collect()
}

/// Rows separated by `;`.
pub fn matrix(flag: &str, s: &str) -> Result<CMatrix, CliError> {
    let rows: Vec<Vec<Complex64>> = s.split(';').map(|r| complexes(flag, r)).collect::<Result<_, _>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(CliError::argument(flag, "matrix must be square"));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn index(flag: &str, s: &str) -> Result<MultiIndex, CliError> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| CliError::argument(flag, format!("`{x}` is not a non-negative integer")))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(MultiIndex)
}
