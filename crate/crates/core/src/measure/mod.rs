//! Multi-site `σ^z` correlators and the diagonal of the block reduced density
//! matrix.
//!
//! In the Gaussian ground state every `σ^z` correlator collapses to a
//! determinant: `⟨∏_{j∈A} σ^z_j⟩ = det(G_A)` where `G` is the Toeplitz matrix
//! `G[j,k] = g_{k−j}` and `G_A` its principal submatrix on the sites `A`. The
//! full diagonal distribution of an `L`-site block then follows from the
//! principal-minor generating identity
//!
//! ```text
//! p(s) = 2^{-L} Σ_{A ⊆ {1..L}} (∏_{j∈A} s_j) det(G_A) = 2^{-L} det(I + S·G)
//! ```
//!
//! which turns the `2^L`-term expansion into a single determinant per sign
//! string. The subset-expansion form survives verbatim in
//! [`crate::oracle::wick_bruteforce`] and gates this fast path in the tests.
//!
//! String indexing: bit `b` of a string index holds the `σ^z` outcome of site
//! `b + 1`, with bit 0 for `+1` and bit 1 for `−1`.

mod det;

use crate::error::{Error, Result};
use crate::guard_tol;
use crate::kernel::CorrelationTable;
use crate::Real;

/// Largest block length accepted by default; the distribution holds `2^L`
/// probabilities.
pub const DEFAULT_BLOCK_CAP: usize = 20;

/// Probabilities in `[-CLAMP_FLOOR, 0)` are rounding noise and clamp to zero;
/// anything lower is a pipeline bug.
const CLAMP_FLOOR: f64 = 1e-10;
const NORMALIZATION_TOL: f64 = 1e-9;
const REFLECTION_TOL: f64 = 1e-10;

/// Which determinant engine backs [`diag_distribution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetEngine {
    /// Fresh LU factorization per sign string, `O(2^L · L³)`.
    Lu,
    /// Gray-code walk with rank-1 determinant updates, `O(2^L · L²)`.
    GrayCode,
}

/// Toeplitz matrix of kernel coefficients, `entry(j, k) = g_{k−j}`.
#[derive(Debug, Clone)]
pub struct ZCorrelationMatrix<T> {
    block_len: usize,
    entries: Vec<T>,
}

impl<T: Real> ZCorrelationMatrix<T> {
    pub fn from_table(table: &CorrelationTable<T>, block_len: usize) -> Result<Self> {
        if block_len == 0 {
            return Err(Error::InvalidParams("block length must be >= 1".into()));
        }
        if block_len > table.max_block_len() {
            return Err(Error::TableTooSmall {
                l_max: table.l_max(),
                block_len,
                needed: block_len - 1,
            });
        }
        let mut entries = Vec::with_capacity(block_len * block_len);
        for j in 0..block_len {
            for k in 0..block_len {
                entries.push(table.coeff(k as i64 - j as i64));
            }
        }
        Ok(ZCorrelationMatrix { block_len, entries })
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn entry(&self, j: usize, k: usize) -> T {
        self.entries[j * self.block_len + k]
    }

    /// Row-major storage, used by the determinant engines.
    pub fn as_slice(&self) -> &[T] {
        &self.entries
    }
}

/// `⟨∏_{j∈sites} σ^z_j⟩` for 1-based, strictly increasing sites.
pub fn z_correlator<T: Real>(table: &CorrelationTable<T>, sites: &[usize]) -> Result<T> {
    if sites.is_empty() {
        return Err(Error::InvalidSites("site set is empty".into()));
    }
    if sites[0] == 0 {
        return Err(Error::InvalidSites("sites are 1-based".into()));
    }
    for pair in sites.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::InvalidSites(format!(
                "sites must be strictly increasing, got {} after {}",
                pair[1], pair[0]
            )));
        }
    }
    let last = *sites.last().unwrap();
    if last > table.max_block_len() {
        return Err(Error::InvalidSites(format!(
            "site {last} exceeds the table range (max {})",
            table.max_block_len()
        )));
    }
    let k = sites.len();
    let mut m = Vec::with_capacity(k * k);
    for &row in sites {
        for &col in sites {
            m.push(table.coeff(col as i64 - row as i64));
        }
    }
    Ok(det::lu_det(&mut m, k))
}

/// The `2^L` diagonal probabilities of an `L`-site block.
#[derive(Debug, Clone)]
pub struct DiagonalDistribution<T> {
    block_len: usize,
    p: Vec<T>,
}

impl<T: Real> DiagonalDistribution<T> {
    /// Wraps raw probabilities, clamping rounding-level negatives and
    /// enforcing normalization. Reflection symmetry is a property of the
    /// translation-invariant pipeline, not of arbitrary distributions, so it
    /// is checked in [`diag_distribution`] instead.
    pub fn new(block_len: usize, mut p: Vec<T>) -> Result<Self> {
        if block_len == 0 {
            return Err(Error::InvalidParams("block length must be >= 1".into()));
        }
        if p.len() != 1usize << block_len {
            return Err(Error::DistributionInvariant(format!(
                "expected {} probabilities for a {}-site block, got {}",
                1usize << block_len,
                block_len,
                p.len()
            )));
        }
        let floor = -guard_tol::<T>(CLAMP_FLOOR, 64.0);
        let mut clamped = 0usize;
        for (index, value) in p.iter_mut().enumerate() {
            if !value.is_finite() {
                return Err(Error::DistributionInvariant(format!(
                    "probability at index {index} is not finite"
                )));
            }
            if *value < T::zero() {
                if *value < floor {
                    return Err(Error::NegativeProbability {
                        index,
                        p: value.approx_f64(),
                    });
                }
                *value = T::zero();
                clamped += 1;
            }
        }
        if clamped > 0 {
            log::warn!("clamped {clamped} rounding-level negative probabilities to zero");
        }
        let total: T = p.iter().fold(T::zero(), |acc, &v| acc + v);
        if (total - T::one()).abs() > guard_tol::<T>(NORMALIZATION_TOL, 4.0 * p.len() as f64) {
            return Err(Error::DistributionInvariant(format!(
                "probabilities sum to {}, expected 1",
                total.approx_f64()
            )));
        }
        Ok(DiagonalDistribution { block_len, p })
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn probabilities(&self) -> &[T] {
        &self.p
    }

    /// Index of the spatially reflected string.
    pub fn reflect_index(&self, index: usize) -> usize {
        reflect_bits(index, self.block_len)
    }

    /// Largest deviation from reflection symmetry, `max_s |p(s) − p(rev s)|`.
    pub fn reflection_defect(&self) -> T {
        let mut worst = T::zero();
        for (i, &v) in self.p.iter().enumerate() {
            let r = self.reflect_index(i);
            worst = worst.max((v - self.p[r]).abs());
        }
        worst
    }
}

fn reflect_bits(index: usize, len: usize) -> usize {
    let mut out = 0usize;
    for b in 0..len {
        if index >> b & 1 == 1 {
            out |= 1 << (len - 1 - b);
        }
    }
    out
}

/// The diagonal distribution through the default (Gray-code) engine.
pub fn diag_distribution<T: Real>(
    table: &CorrelationTable<T>,
    block_len: usize,
) -> Result<DiagonalDistribution<T>> {
    diag_distribution_with(table, block_len, DetEngine::GrayCode, DEFAULT_BLOCK_CAP)
}

/// The diagonal distribution with an explicit engine and block cap.
pub fn diag_distribution_with<T: Real>(
    table: &CorrelationTable<T>,
    block_len: usize,
    engine: DetEngine,
    cap: usize,
) -> Result<DiagonalDistribution<T>> {
    if block_len == 0 {
        return Err(Error::InvalidParams("block length must be >= 1".into()));
    }
    if block_len > cap {
        return Err(Error::BlockTooLarge { block_len, cap });
    }
    if block_len > table.max_block_len() {
        return Err(Error::TableTooSmall {
            l_max: table.l_max(),
            block_len,
            needed: block_len - 1,
        });
    }
    let g = ZCorrelationMatrix::from_table(table, block_len)?;
    let count = 1usize << block_len;
    let norm = T::one() / T::of(count as f64);
    let mut p = vec![T::zero(); count];
    match engine {
        DetEngine::Lu => {
            let n = block_len;
            let mut m = vec![T::zero(); n * n];
            for (string, slot) in p.iter_mut().enumerate() {
                for i in 0..n {
                    let s = if string >> i & 1 == 0 { T::one() } else { -T::one() };
                    for j in 0..n {
                        m[i * n + j] = s * g.entry(i, j);
                    }
                    m[i * n + i] += T::one();
                }
                *slot = det::lu_det(&mut m, n) * norm;
            }
        }
        DetEngine::GrayCode => {
            let mut walker = det::GrayWalker::new(g.as_slice().to_vec(), block_len);
            for k in 0..count {
                p[k ^ (k >> 1)] = walker.det() * norm;
                if k + 1 < count {
                    walker.flip((k + 1).trailing_zeros() as usize);
                }
            }
        }
    }
    let dist = DiagonalDistribution::new(block_len, p)?;
    let defect = dist.reflection_defect();
    if defect > guard_tol::<T>(REFLECTION_TOL, 128.0) {
        return Err(Error::DistributionInvariant(format!(
            "reflection symmetry violated by {}",
            defect.approx_f64()
        )));
    }
    Ok(dist)
}

/// Sums out the last site, producing the `(L−1)`-site marginal.
pub fn marginalize<T: Real>(dist: &DiagonalDistribution<T>) -> Result<DiagonalDistribution<T>> {
    let len = dist.block_len();
    if len < 2 {
        return Err(Error::InvalidParams(
            "marginalizing needs a block of at least 2 sites".into(),
        ));
    }
    let half = 1usize << (len - 1);
    let p = dist.probabilities();
    let merged: Vec<T> = (0..half).map(|i| p[i] + p[i + half]).collect();
    DiagonalDistribution::new(len - 1, merged)
}
