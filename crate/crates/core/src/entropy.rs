//! Diagonal entropy, entanglement entropy, and relative entropy of coherence
//! for a block of contiguous sites. All entropies are in bits.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::guard_tol;
use crate::kernel::{CorrelationTable, MajoranaMatrix, ModelParams};
use crate::measure::{diag_distribution, DiagonalDistribution};
use crate::Real;

/// Probabilities below this contribute nothing that double precision can
/// resolve in the entropy sum.
const ENTROPY_CUTOFF: f64 = 1e-14;

/// Shannon entropy of the diagonal distribution, in bits.
pub fn diagonal_entropy<T: Real>(dist: &DiagonalDistribution<T>) -> T {
    let cutoff = T::of(ENTROPY_CUTOFF);
    let mut h = T::zero();
    for &p in dist.probabilities() {
        if p >= cutoff {
            h -= p * p.log2();
        }
    }
    h
}

fn binary_entropy_bits<T: Real>(p: T) -> T {
    let q = T::one() - p;
    let mut h = T::zero();
    if p > T::zero() {
        h -= p * p.log2();
    }
    if q > T::zero() {
        h -= q * q.log2();
    }
    h
}

const SPECTRUM_NORM_TOL: f64 = 1e-8;
const NU_OVERSHOOT: f64 = 1e-9;

/// The pair magnitudes `ν_k` of the `±iν_k` eigenvalues of the antisymmetric
/// Majorana matrix, sorted ascending.
///
/// The matrix is brought to its real Schur (skew-tridiagonal) form by
/// Householder similarity transforms; an odd-even permutation turns that form
/// into an off-diagonal bidiagonal block `B`, whose singular values are the
/// `ν_k`. The whole path stays in real orthogonal arithmetic — unstructured
/// QR iterations are not reliable on skew-symmetric input.
pub fn majorana_spectrum<T: Real>(gm: &MajoranaMatrix<T>) -> Result<Vec<T>> {
    let n = 2 * gm.block_len();
    let mut a: Vec<T> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            a.push(gm.matrix()[(i, j)]);
        }
    }
    let frob_before = a.iter().fold(T::zero(), |acc, &v| acc + v * v);
    let sub = skew_tridiagonalize(&mut a, n);
    // orthogonal similarity preserves the Frobenius norm; the skew-tridiagonal
    // form carries each subdiagonal entry twice
    let frob_after = sub.iter().fold(T::zero(), |acc, &v| acc + v * v + v * v);
    let norm_tol = guard_tol::<T>(SPECTRUM_NORM_TOL, 4.0 * (n * n) as f64);
    if (frob_after - frob_before).abs() > norm_tol * (T::one() + frob_before) {
        return Err(Error::SpectrumInvalid(format!(
            "tridiagonal reduction lost norm: {} -> {}",
            frob_before.approx_f64(),
            frob_after.approx_f64()
        )));
    }
    // odd-even permutation of the skew-tridiagonal form leaves the m×m lower
    // bidiagonal block B with diagonal sub[0], sub[2], … and subdiagonal
    // sub[1], sub[3], …; the ν_k are its singular values
    let m = gm.block_len();
    let mut btb = DMatrix::<T>::zeros(m, m);
    let diag = |k: usize| sub[2 * k];
    let lower = |k: usize| sub[2 * k - 1];
    for i in 0..m {
        // (BᵀB)[i][j] = Σ_k B[k][i]·B[k][j]
        btb[(i, i)] = diag(i) * diag(i);
        if i + 1 < m {
            btb[(i, i)] += lower(i + 1) * lower(i + 1);
            let off = lower(i + 1) * diag(i + 1);
            btb[(i, i + 1)] = off;
            btb[(i + 1, i)] = off;
        }
    }
    let eigen = SymmetricEigen::new(btb);
    let mut nus: Vec<T> = eigen
        .eigenvalues
        .iter()
        .map(|&v| v.max(T::zero()).sqrt())
        .collect();
    nus.sort_by(|x, y| x.partial_cmp(y).expect("finite singular values"));
    Ok(nus)
}

/// Householder reduction of the antisymmetric `n×n` matrix in `a` (row-major,
/// destroyed) to skew-tridiagonal form; returns the `n−1` subdiagonal
/// entries.
fn skew_tridiagonalize<T: Real>(a: &mut [T], n: usize) -> Vec<T> {
    let mut v = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    for k in 0..n.saturating_sub(2) {
        let mut norm_sq = T::zero();
        for i in (k + 1)..n {
            norm_sq += a[i * n + k] * a[i * n + k];
        }
        let alpha = norm_sq.sqrt();
        if alpha == T::zero() {
            continue;
        }
        let pivot = a[(k + 1) * n + k];
        let signed = if pivot >= T::zero() { alpha } else { -alpha };
        // v = x + sign(x_1)·||x||·e_1, restricted to rows k+1..n
        for slot in v.iter_mut() {
            *slot = T::zero();
        }
        v[k + 1] = pivot + signed;
        for i in (k + 2)..n {
            v[i] = a[i * n + k];
        }
        let vtv = norm_sq + alpha * alpha + T::of(2.0) * pivot.abs() * alpha;
        if vtv == T::zero() {
            continue;
        }
        let beta = T::of(2.0) / vtv;
        // A ← (I − β v vᵀ) A: subtract β v (vᵀA)
        for j in 0..n {
            let mut acc = T::zero();
            for i in (k + 1)..n {
                acc += v[i] * a[i * n + j];
            }
            w[j] = beta * acc;
        }
        for i in (k + 1)..n {
            let vi = v[i];
            if vi != T::zero() {
                for j in 0..n {
                    a[i * n + j] -= vi * w[j];
                }
            }
        }
        // A ← A (I − β v vᵀ): subtract β (Av) vᵀ
        for (i, slot) in w.iter_mut().enumerate().take(n) {
            let mut acc = T::zero();
            for j in (k + 1)..n {
                acc += a[i * n + j] * v[j];
            }
            *slot = beta * acc;
        }
        for i in 0..n {
            let wi = w[i];
            if wi != T::zero() {
                for j in (k + 1)..n {
                    a[i * n + j] -= wi * v[j];
                }
            }
        }
    }
    (0..n - 1).map(|i| a[(i + 1) * n + i]).collect()
}

/// Entanglement entropy of the block, in bits: each eigenvalue pair `±iν_k`
/// of the Majorana matrix contributes the binary entropy of `(1 + ν_k)/2`.
pub fn entanglement_entropy<T: Real>(gm: &MajoranaMatrix<T>) -> Result<T> {
    let nus = majorana_spectrum(gm)?;
    let nu_cap = T::one() + guard_tol::<T>(NU_OVERSHOOT, 16.0);
    let mut ee = T::zero();
    for nu in nus {
        if nu > nu_cap {
            return Err(Error::SpectrumInvalid(format!(
                "ν = {} above 1 + 1e-9",
                nu.approx_f64()
            )));
        }
        let nu = nu.min(T::one());
        ee += binary_entropy_bits((T::one() + nu) * T::of(0.5));
    }
    Ok(ee)
}

/// Relative entropy of coherence: diagonal entropy minus entanglement
/// entropy.
pub fn coherence<T: Real>(diagonal: T, entanglement: T) -> T {
    diagonal - entanglement
}

const MONOTONE_TOL: f64 = 1e-9;
const COHERENCE_TOL: f64 = 1e-9;

/// Diagonal entropy, entanglement entropy, and coherence for every block
/// length `1..=L`.
#[derive(Debug, Clone)]
pub struct EntropyCurve<T> {
    params: ModelParams<T>,
    block_lens: Vec<usize>,
    de: Vec<T>,
    ee: Vec<T>,
    coherence: Vec<T>,
}

impl<T: Real> EntropyCurve<T> {
    /// Builds the correlation table and computes the curve up to `max_len`.
    pub fn compute(params: &ModelParams<T>, max_len: usize) -> Result<Self> {
        let table = CorrelationTable::build(params, max_len.saturating_sub(1).max(1))?;
        Self::from_table(&table, max_len)
    }

    /// Computes the curve from an existing table (shared across sweep
    /// points).
    pub fn from_table(table: &CorrelationTable<T>, max_len: usize) -> Result<Self> {
        if max_len == 0 {
            return Err(Error::InvalidParams("curve needs max block length >= 1".into()));
        }
        let mut block_lens = Vec::with_capacity(max_len);
        let mut de = Vec::with_capacity(max_len);
        let mut ee = Vec::with_capacity(max_len);
        let mut coh = Vec::with_capacity(max_len);
        for len in 1..=max_len {
            let dist = diag_distribution(table, len)?;
            let d = diagonal_entropy(&dist);
            let gm = MajoranaMatrix::from_table(table, len)?;
            let e = entanglement_entropy(&gm)?;
            block_lens.push(len);
            de.push(d);
            ee.push(e);
            coh.push(coherence(d, e));
        }
        let curve = EntropyCurve {
            params: *table.params(),
            block_lens,
            de,
            ee,
            coherence: coh,
        };
        curve.validate()?;
        Ok(curve)
    }

    fn validate(&self) -> Result<()> {
        let mono = guard_tol::<T>(MONOTONE_TOL, 512.0);
        let coh_floor = -guard_tol::<T>(COHERENCE_TOL, 512.0);
        for (i, &len) in self.block_lens.iter().enumerate() {
            let de = self.de[i];
            if !de.is_finite() || de < T::zero() {
                return Err(Error::CurveInvariant(format!(
                    "diagonal entropy {} at L={len} is not a nonnegative real",
                    de.approx_f64()
                )));
            }
            if de > T::of(len as f64) + mono {
                return Err(Error::CurveInvariant(format!(
                    "diagonal entropy {} exceeds the {len}-bit bound",
                    de.approx_f64()
                )));
            }
            if !self.ee[i].is_finite() || self.ee[i] < T::zero() {
                return Err(Error::CurveInvariant(format!(
                    "entanglement entropy {} at L={len} is not a nonnegative real",
                    self.ee[i].approx_f64()
                )));
            }
            if self.coherence[i] < coh_floor {
                return Err(Error::CurveInvariant(format!(
                    "coherence {} at L={len} below -1e-9",
                    self.coherence[i].approx_f64()
                )));
            }
            if i > 0 && de < self.de[i - 1] - mono {
                return Err(Error::CurveInvariant(format!(
                    "diagonal entropy decreases from {} to {} at L={len}",
                    self.de[i - 1].approx_f64(),
                    de.approx_f64()
                )));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn block_lens(&self) -> &[usize] {
        &self.block_lens
    }

    pub fn diagonal(&self) -> &[T] {
        &self.de
    }

    pub fn entanglement(&self) -> &[T] {
        &self.ee
    }

    pub fn coherence_values(&self) -> &[T] {
        &self.coherence
    }
}
