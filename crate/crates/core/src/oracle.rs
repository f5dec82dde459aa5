//! Independent slow-path reference implementations.
//!
//! Everything here deliberately avoids the production code paths it is used
//! to validate: determinants are cofactor expansions instead of LU, the
//! quadrature is a fixed composite midpoint rule instead of adaptive panels,
//! and the finite-ring ground state comes from a Lanczos eigensolver on the
//! full spin Hamiltonian rather than from free-fermion correlators.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::kernel::{CorrelationTable, ModelParams};
use crate::Real;

/// Subset expansions beyond this block length cost more than they teach.
pub const BRUTEFORCE_CAP: usize = 8;

/// Laplace (cofactor) expansion along the first row; algorithmically
/// independent of the pivoted LU used in production.
fn laplace_det<T: Real>(m: &[T], n: usize) -> T {
    match n {
        0 => T::one(),
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        _ => {
            let mut det = T::zero();
            let mut minor = vec![T::zero(); (n - 1) * (n - 1)];
            let mut sign = T::one();
            for col in 0..n {
                if m[col] != T::zero() {
                    let mut idx = 0;
                    for row in 1..n {
                        for c in 0..n {
                            if c != col {
                                minor[idx] = m[row * n + c];
                                idx += 1;
                            }
                        }
                    }
                    det += sign * m[col] * laplace_det(&minor, n - 1);
                }
                sign = -sign;
            }
            det
        }
    }
}

/// `p(s)` by literal subset expansion:
/// `2^{-L} Σ_{A ⊆ {1..L}} (∏_{j∈A} s_j) · det(G_A)`.
pub fn wick_bruteforce<T: Real>(
    table: &CorrelationTable<T>,
    block_len: usize,
    string_index: usize,
) -> Result<T> {
    if block_len == 0 {
        return Err(Error::InvalidParams("block length must be >= 1".into()));
    }
    if block_len > BRUTEFORCE_CAP {
        return Err(Error::BlockTooLarge {
            block_len,
            cap: BRUTEFORCE_CAP,
        });
    }
    if block_len > table.max_block_len() {
        return Err(Error::TableTooSmall {
            l_max: table.l_max(),
            block_len,
            needed: block_len - 1,
        });
    }
    if string_index >= 1usize << block_len {
        return Err(Error::InvalidParams(format!(
            "string index {string_index} out of range for {block_len} sites"
        )));
    }
    let mut sum = T::zero();
    let mut sites = Vec::with_capacity(block_len);
    let mut minor = vec![T::zero(); block_len * block_len];
    for subset in 0..(1usize << block_len) {
        sites.clear();
        let mut sign = T::one();
        for j in 0..block_len {
            if subset >> j & 1 == 1 {
                sites.push(j as i64);
                if string_index >> j & 1 == 1 {
                    sign = -sign;
                }
            }
        }
        let k = sites.len();
        for (a, &ra) in sites.iter().enumerate() {
            for (b, &cb) in sites.iter().enumerate() {
                minor[a * k + b] = table.coeff(cb - ra);
            }
        }
        sum += sign * laplace_det(&minor[..k * k], k);
    }
    Ok(sum / T::of((1usize << block_len) as f64))
}

/// All `2^L` probabilities through [`wick_bruteforce`].
pub fn wick_distribution<T: Real>(
    table: &CorrelationTable<T>,
    block_len: usize,
) -> Result<Vec<T>> {
    (0..1usize << block_len)
        .map(|s| wick_bruteforce(table, block_len, s))
        .collect()
}

const DENSE_NODES: usize = 1_000_000;

/// Fixed composite midpoint rule for the kernel coefficient, `10^6` nodes,
/// compensated summation. Reference for the adaptive quadrature.
pub fn dense_quadrature<T: Real>(params: &ModelParams<T>, l: i64) -> T {
    assert!(l.unsigned_abs() <= 32, "dense oracle covers |l| <= 32");
    let gamma = params.gamma;
    let lambda = params.lambda;
    let lf = T::of(l as f64);
    let h = T::two_pi() / T::of(DENSE_NODES as f64);
    let mut sum = T::zero();
    let mut carry = T::zero();
    for k in 0..DENSE_NODES {
        let phi = (T::of(k as f64) + T::of(0.5)) * h;
        let (s, c) = phi.sin_cos();
        let a = c - lambda;
        let b = gamma * s;
        let r = (a * a + b * b).sqrt();
        if r == T::zero() {
            continue;
        }
        let (sl, cl) = (lf * phi).sin_cos();
        let term = (cl * a - sl * b) / r;
        // Kahan update
        let y = term - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum / T::of(DENSE_NODES as f64)
}

/// A finite periodic ring small enough for exact diagonalization.
#[derive(Debug, Clone, Copy)]
pub struct FiniteChainSpec<T> {
    pub sites: usize,
    pub gamma: T,
    pub lambda: T,
}

impl<T: Real> FiniteChainSpec<T> {
    pub fn new(sites: usize, gamma: T, lambda: T) -> Result<Self> {
        if !(2..=16).contains(&sites) {
            return Err(Error::InvalidChain(format!(
                "ring size {sites} outside the supported range 2..=16"
            )));
        }
        if sites % 2 == 1 {
            log::warn!("odd ring size {sites}: the parity-sector checks are sharp only for even rings");
        }
        if !gamma.is_finite() || !lambda.is_finite() {
            return Err(Error::InvalidChain("couplings must be finite".into()));
        }
        Ok(FiniteChainSpec {
            sites,
            gamma,
            lambda,
        })
    }
}

/// Diagonal of the reduced density matrix of the ring ground state, plus the
/// spectral bookkeeping used to resolve degeneracies.
#[derive(Debug, Clone)]
pub struct EdDiagonal<T> {
    pub probs: Vec<T>,
    pub energy: T,
    /// `|E_even − E_odd|` between the lowest states of the two spin-flip
    /// parity sectors.
    pub sector_gap: T,
    pub degenerate: bool,
}

/// Ground state of the ring by sector-restricted Lanczos, reduced to the
/// diagonal probabilities of the first `block_len` sites.
///
/// When the two parity sectors are degenerate to `1e-10`, the even-sector
/// state (the symmetric combination) is selected deterministically.
pub fn ed_ground_state<T: Real>(
    spec: &FiniteChainSpec<T>,
    block_len: usize,
) -> Result<EdDiagonal<T>> {
    if block_len == 0 || block_len > spec.sites / 2 {
        return Err(Error::InvalidChain(format!(
            "block length {block_len} outside 1..={} for a {}-site ring",
            spec.sites / 2,
            spec.sites
        )));
    }
    let (e_even, v_even) = lanczos_lowest(spec, 0);
    let (e_odd, v_odd) = lanczos_lowest(spec, 1);
    let gap = (e_even - e_odd).abs();
    let degenerate = gap < T::of(1e-10);
    if degenerate {
        log::warn!(
            "degenerate ground space (sector gap {:.3e}); selecting the even-parity state",
            gap.approx_f64()
        );
    }
    let (energy, psi) = if e_even <= e_odd + T::of(1e-10) {
        (e_even, v_even)
    } else {
        (e_odd, v_odd)
    };
    let mask = (1usize << block_len) - 1;
    let mut probs = vec![T::zero(); 1 << block_len];
    for (basis_index, &amp) in psi.iter().enumerate() {
        probs[basis_index & mask] += amp * amp;
    }
    Ok(EdDiagonal {
        probs,
        energy,
        sector_gap: gap,
        degenerate,
    })
}

/// `out = H·v` for the ring Hamiltonian
/// `H = −Σ_l [(1+γ)/2 σˣσˣ + (1−γ)/2 σʸσʸ] + λ Σ_l σᶻ`.
///
/// Basis: bit `l` of the index is the `σ^z` outcome of site `l`, bit 0 for
/// `+1`. Flipping the two bits of a bond contributes `−γ` when the bits agree
/// (the XX and YY terms interfere) and `−1` when they differ.
fn apply_hamiltonian<T: Real>(gamma: T, lambda: T, sites: usize, v: &[T], out: &mut [T]) {
    let dim = 1usize << sites;
    for slot in out.iter_mut() {
        *slot = T::zero();
    }
    for (index, &amp) in v.iter().enumerate() {
        if amp == T::zero() {
            continue;
        }
        let down = index.count_ones() as i64;
        let sz_sum = sites as i64 - 2 * down;
        out[index] += lambda * T::of(sz_sum as f64) * amp;
        for l in 0..sites {
            let l2 = (l + 1) % sites;
            let flipped = index ^ (1 << l) ^ (1 << l2);
            let coef = if (index >> l ^ index >> l2) & 1 == 0 {
                -gamma
            } else {
                -T::one()
            };
            out[flipped] += coef * amp;
        }
    }
    let _ = dim;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn axpy<T: Real>(y: &mut [T], alpha: T, x: &[T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn normalize<T: Real>(v: &mut [T]) -> T {
    let norm = dot(v, v).sqrt();
    if norm > T::zero() {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

/// Lowest eigenpair of the ring Hamiltonian inside one spin-flip parity
/// sector (`parity` = popcount mod 2 of the basis strings that carry weight).
///
/// The Hamiltonian never mixes parity sectors, so a start vector supported on
/// one sector keeps the whole Krylov space there. Full reorthogonalization
/// keeps the basis clean; the iteration stops when the lowest Ritz value
/// stalls.
fn lanczos_lowest<T: Real>(spec: &FiniteChainSpec<T>, parity: u32) -> (T, Vec<T>) {
    let dim = 1usize << spec.sites;
    let mut seed = 0x243F_6A88_85A3_08D3u64 ^ ((parity as u64) << 32) ^ (spec.sites as u64);
    let mut start = vec![T::zero(); dim];
    for (index, slot) in start.iter_mut().enumerate() {
        let draw = splitmix64(&mut seed);
        if index.count_ones() % 2 == parity {
            *slot = T::of((draw >> 11) as f64 / (1u64 << 53) as f64 - 0.5);
        }
    }
    normalize(&mut start);

    let max_iter = dim.min(256);
    let mut basis: Vec<Vec<T>> = vec![start];
    let mut alphas: Vec<T> = Vec::new();
    let mut betas: Vec<T> = Vec::new();
    let mut w = vec![T::zero(); dim];
    let mut previous_theta: Option<T> = None;
    let mut stalls = 0usize;
    for j in 0..max_iter {
        apply_hamiltonian(spec.gamma, spec.lambda, spec.sites, &basis[j], &mut w);
        let alpha = dot(&w, &basis[j]);
        axpy(&mut w, -alpha, &basis[j]);
        if j > 0 {
            axpy(&mut w, -betas[j - 1], &basis[j - 1]);
        }
        for _ in 0..2 {
            for q in &basis {
                let overlap = dot(&w, q);
                if overlap != T::zero() {
                    axpy(&mut w, -overlap, q);
                }
            }
        }
        alphas.push(alpha);
        let scale = alphas.iter().fold(T::zero(), |m, a| m.max(a.abs()))
            + betas.iter().fold(T::zero(), |m, b| m.max(b.abs()))
            + T::one();
        let beta = normalize(&mut w);
        if beta <= T::of(1e-13) * scale {
            break; // exact invariant subspace
        }
        if j % 4 == 3 || j + 1 == max_iter {
            let (theta, _) = tridiagonal_lowest(&alphas, &betas);
            if let Some(prev) = previous_theta {
                if (theta - prev).abs() <= T::of(1e-13) * (T::one() + theta.abs()) {
                    stalls += 1;
                    if stalls >= 2 {
                        break;
                    }
                } else {
                    stalls = 0;
                }
            }
            previous_theta = Some(theta);
        }
        betas.push(beta);
        basis.push(w.clone());
    }

    let (theta, y) = tridiagonal_lowest(&alphas, &betas);
    let mut ground = vec![T::zero(); dim];
    for (coef, q) in y.iter().zip(&basis) {
        axpy(&mut ground, *coef, q);
    }
    normalize(&mut ground);
    (theta, ground)
}

/// Lowest eigenpair of the symmetric tridiagonal matrix with diagonal
/// `alphas` and off-diagonal `betas`.
fn tridiagonal_lowest<T: Real>(alphas: &[T], betas: &[T]) -> (T, Vec<T>) {
    let k = alphas.len();
    assert!(k > 0);
    let mut m = DMatrix::<T>::zeros(k, k);
    for (i, &a) in alphas.iter().enumerate() {
        m[(i, i)] = a;
    }
    for (i, &b) in betas.iter().take(k.saturating_sub(1)).enumerate() {
        m[(i, i + 1)] = b;
        m[(i + 1, i)] = b;
    }
    let eig = SymmetricEigen::new(m);
    let mut best = 0;
    for i in 1..k {
        if eig.eigenvalues[i] < eig.eigenvalues[best] {
            best = i;
        }
    }
    (
        eig.eigenvalues[best],
        eig.eigenvectors.column(best).iter().copied().collect(),
    )
}
