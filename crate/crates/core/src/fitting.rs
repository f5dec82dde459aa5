//! Ordinary least squares for the entropy scaling law
//! `S(L) = a·L + b·log2(L) + c`.
//!
//! The solution goes through a QR factorization of the design matrix, never
//! through the normal equations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::Real;

/// Coefficients of the scaling law with residual diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit<T> {
    /// Volume coefficient, bits per site.
    pub a: T,
    /// Coefficient of `log2(L)`, bits per log2-site.
    pub b: T,
    /// Constant term, bits.
    pub c: T,
    /// Root-mean-square residual over the fitted points, bits.
    pub rms_residual: T,
    /// Inclusive block-length range the fit used.
    pub fit_range: (usize, usize),
}

impl<T: Real> ScalingFit<T> {
    /// Model prediction at block length `len`.
    pub fn predict(&self, len: usize) -> T {
        let lf = T::of(len as f64);
        self.a * lf + self.b * lf.log2() + self.c
    }
}

/// Least-squares solve of `design · x = y` through QR. `design` is destroyed.
fn ols<T: Real>(design: DMatrix<T>, y: DVector<T>) -> Result<Vec<T>> {
    let cols = design.ncols();
    let qr = design.qr();
    let r = qr.r();
    let scale = r[(0, 0)].abs();
    for i in 0..cols {
        if r[(i, i)].abs() <= T::of(1e-12) * scale.max(T::of(1e-12)) {
            return Err(Error::RankDeficient(format!(
                "column {i} of the design matrix is numerically dependent"
            )));
        }
    }
    let qtb = qr.q().transpose() * y;
    let x = r
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::RankDeficient("triangular solve failed".into()))?;
    Ok(x.iter().copied().collect())
}

/// Fits `S(L) = a·L + b·log2(L) + c` over the block lengths inside `range`
/// (inclusive). Needs at least 4 points with 3 distinct lengths.
pub fn fit_scaling<T: Real>(
    block_lens: &[usize],
    values: &[T],
    range: (usize, usize),
) -> Result<ScalingFit<T>> {
    if block_lens.len() != values.len() {
        return Err(Error::InvalidParams(
            "block lengths and values differ in length".into(),
        ));
    }
    if range.0 == 0 || range.0 > range.1 {
        return Err(Error::InvalidParams(format!(
            "invalid fit range {:?}; needs 1 <= lo <= hi",
            range
        )));
    }
    let selected: Vec<(usize, T)> = block_lens
        .iter()
        .zip(values)
        .filter(|(&len, _)| len >= range.0 && len <= range.1)
        .map(|(&len, &v)| (len, v))
        .collect();
    if selected.len() < 4 {
        return Err(Error::InvalidParams(format!(
            "fit range {:?} selects {} points, needs at least 4",
            range,
            selected.len()
        )));
    }
    let mut distinct: Vec<usize> = selected.iter().map(|&(len, _)| len).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::RankDeficient(format!(
            "only {} distinct block lengths in the fit range",
            distinct.len()
        )));
    }

    let n = selected.len();
    let design = DMatrix::from_fn(n, 3, |i, j| {
        let lf = T::of(selected[i].0 as f64);
        match j {
            0 => lf,
            1 => lf.log2(),
            _ => T::one(),
        }
    });
    let y = DVector::from_fn(n, |i, _| selected[i].1);
    let x = ols(design, y)?;
    let fit = ScalingFit {
        a: x[0],
        b: x[1],
        c: x[2],
        rms_residual: T::zero(),
        fit_range: (range.0, range.1),
    };
    let mut sum_sq = T::zero();
    for &(len, value) in &selected {
        let r = value - fit.predict(len);
        sum_sq += r * r;
    }
    Ok(ScalingFit {
        rms_residual: (sum_sq / T::of(n as f64)).sqrt(),
        ..fit
    })
}

/// Per-point residuals `S(L) − fit(L)` for whatever points are handed in.
pub fn residuals<T: Real>(fit: &ScalingFit<T>, block_lens: &[usize], values: &[T]) -> Vec<T> {
    block_lens
        .iter()
        .zip(values)
        .map(|(&len, &v)| v - fit.predict(len))
        .collect()
}

/// Two-parameter fit `S(L) = slope·log2(L) + intercept`, used for the
/// logarithmic growth of the entanglement entropy.
pub fn fit_log<T: Real>(block_lens: &[usize], values: &[T]) -> Result<(T, T)> {
    if block_lens.len() != values.len() || block_lens.len() < 2 {
        return Err(Error::InvalidParams(
            "log fit needs at least two matched points".into(),
        ));
    }
    let n = block_lens.len();
    let design = DMatrix::from_fn(n, 2, |i, j| {
        if j == 0 {
            T::of(block_lens[i] as f64).log2()
        } else {
            T::one()
        }
    });
    let y = DVector::from_fn(n, |i, _| values[i]);
    let x = ols(design, y)?;
    Ok((x[0], x[1]))
}
