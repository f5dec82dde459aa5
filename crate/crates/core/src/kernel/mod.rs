//! Thermodynamic-limit correlation kernel of the XY chain.
//!
//! The kernel coefficient `g_l` is the Fourier coefficient of the unimodular
//! symbol `(cos φ − λ − iγ sin φ) / |cos φ − λ − iγ sin φ|`:
//!
//! ```text
//! g_l = (1/2π) ∫₀^{2π} e^{-ilφ} (cos φ − λ − iγ sin φ) / |…| dφ
//! ```
//!
//! Conjugate symmetry of the integrand makes `g_l` real; the imaginary part of
//! the quadrature is checked against the tolerance and discarded. The
//! coefficients populate a [`CorrelationTable`], from which the antisymmetric
//! 2L×2L Majorana correlation matrix of an `L`-site block is assembled from
//! 2×2 blocks `Π_l = [[0, g_l], [−g_{−l}, 0]]` placed at block offset `n − m`.

mod quad;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::Real;

/// Couplings of the chain plus the quadrature tolerance used for `g_l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    /// Anisotropy between the two in-plane couplings (dimensionless).
    pub gamma: T,
    /// Transverse field (dimensionless).
    pub lambda: T,
    /// Absolute tolerance for each kernel coefficient.
    pub quad_tol: T,
}

impl<T: Real> ModelParams<T> {
    pub const DEFAULT_QUAD_TOL: f64 = 1e-12;

    /// Parameters with the default quadrature tolerance of `1e-12`.
    pub fn new(gamma: T, lambda: T) -> Result<Self> {
        Self::with_quad_tol(gamma, lambda, T::of(Self::DEFAULT_QUAD_TOL))
    }

    pub fn with_quad_tol(gamma: T, lambda: T, quad_tol: T) -> Result<Self> {
        if !gamma.is_finite() || !lambda.is_finite() {
            return Err(Error::InvalidParams(format!(
                "gamma and lambda must be finite, got gamma={}, lambda={}",
                gamma.approx_f64(),
                lambda.approx_f64()
            )));
        }
        if quad_tol <= T::zero() || !quad_tol.is_finite() {
            return Err(Error::InvalidParams(format!(
                "quad_tol must be a positive finite real, got {}",
                quad_tol.approx_f64()
            )));
        }
        Ok(ModelParams {
            gamma,
            lambda,
            quad_tol,
        })
    }
}

/// Real and imaginary part of the `l`-th Fourier coefficient of the symbol.
///
/// The imaginary part vanishes analytically; it is returned unchecked so the
/// property tests can watch it. Production callers use [`coefficient`].
pub fn coefficient_parts<T: Real>(params: &ModelParams<T>, l: i64) -> Result<(T, T)> {
    let gamma = params.gamma;
    let lambda = params.lambda;
    let lf = T::of(l as f64);
    let integrand = move |phi: T| {
        let (s, c) = phi.sin_cos();
        let a = c - lambda;
        let b = gamma * s;
        let r = (a * a + b * b).sqrt();
        if r == T::zero() {
            // Only reachable if a node coincides with a zero of the modulus on
            // the critical manifold; the symbol is undefined there and the
            // point has measure zero.
            return (T::zero(), T::zero());
        }
        let (sl, cl) = (lf * phi).sin_cos();
        ((cl * a - sl * b) / r, -(cl * b + sl * a) / r)
    };

    let edges = panel_edges(params);
    let two_pi = T::two_pi();
    match quad::adaptive_complex(&integrand, &edges, params.quad_tol) {
        Ok(q) => Ok((q.re / two_pi, q.im / two_pi)),
        Err(fail) => Err(Error::QuadratureNonconvergence {
            gamma: gamma.approx_f64(),
            lambda: lambda.approx_f64(),
            l,
            requested: params.quad_tol.approx_f64(),
            achieved: fail.err.approx_f64(),
        }),
    }
}

/// The kernel coefficient `g_l`, asserted real to within the tolerance.
pub fn coefficient<T: Real>(params: &ModelParams<T>, l: i64) -> Result<T> {
    let (re, im) = coefficient_parts(params, l)?;
    if im.abs() > params.quad_tol {
        return Err(Error::ImaginaryResidual {
            gamma: params.gamma.approx_f64(),
            lambda: params.lambda.approx_f64(),
            l,
            imag: im.approx_f64(),
            tol: params.quad_tol.approx_f64(),
        });
    }
    Ok(re)
}

/// Interior panel boundaries for the quadrature.
///
/// For `γ = 0`, `|λ| ≤ 1` the symbol degenerates to `sgn(cos φ − λ)` with jump
/// discontinuities at `±arccos λ`; panels are split exactly there. For `γ ≠ 0`
/// the modulus vanishes only at `φ = 0` when `λ = 1` (a panel endpoint) and at
/// `φ = π` when `λ = −1`; the latter needs an explicit split. The midpoint `π`
/// is always included, which keeps the initial panels short against the
/// oscillation of `e^{-ilφ}`.
fn panel_edges<T: Real>(params: &ModelParams<T>) -> Vec<T> {
    let two_pi = T::two_pi();
    let pi = T::pi();
    let mut edges = vec![T::zero(), pi, two_pi];
    if params.gamma == T::zero() && params.lambda.abs() <= T::one() {
        let phi_c = params.lambda.acos();
        edges.push(phi_c);
        edges.push(two_pi - phi_c);
    }
    edges.sort_by(|a, b| a.partial_cmp(b).expect("finite edges"));
    edges.dedup_by(|a, b| *a == *b);
    edges
}

/// The sequence `g_l` for `|l| ≤ l_max`, with the parameters that produced it.
#[derive(Debug, Clone)]
pub struct CorrelationTable<T> {
    params: ModelParams<T>,
    l_max: usize,
    g: Vec<T>,
}

impl<T: Real> CorrelationTable<T> {
    /// Computes every coefficient for `|l| ≤ l_max` (`l_max ≥ 1`).
    pub fn build(params: &ModelParams<T>, l_max: usize) -> Result<Self> {
        if l_max == 0 {
            return Err(Error::InvalidParams(
                "correlation table needs l_max >= 1".into(),
            ));
        }
        let bound = T::one() + T::of(1e-9);
        let mut g = Vec::with_capacity(2 * l_max + 1);
        for l in -(l_max as i64)..=(l_max as i64) {
            let value = coefficient(params, l)?;
            if !value.is_finite() || value.abs() > bound {
                return Err(Error::DistributionInvariant(format!(
                    "g_{} = {} falls outside the unit-modulus bound",
                    l,
                    value.approx_f64()
                )));
            }
            g.push(value);
        }
        Ok(CorrelationTable {
            params: *params,
            l_max,
            g,
        })
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// Largest block length the table can serve (`l_max + 1`).
    pub fn max_block_len(&self) -> usize {
        self.l_max + 1
    }

    /// The coefficient `g_l`. Panics if `|l| > l_max`; operations validate
    /// their block length against [`Self::max_block_len`] first.
    pub fn coeff(&self, l: i64) -> T {
        assert!(
            l.unsigned_abs() as usize <= self.l_max,
            "g_{l} outside table range |l| <= {}",
            self.l_max
        );
        self.g[(l + self.l_max as i64) as usize]
    }

    /// `(l, g_l)` pairs in increasing `l`, the serialization order.
    pub fn entries(&self) -> impl Iterator<Item = (i64, T)> + '_ {
        let l_max = self.l_max as i64;
        self.g.iter().enumerate().map(move |(i, &v)| (i as i64 - l_max, v))
    }
}

/// Antisymmetric 2L×2L Majorana correlation matrix of an `L`-site block.
#[derive(Debug, Clone)]
pub struct MajoranaMatrix<T> {
    block_len: usize,
    mat: DMatrix<T>,
}

impl<T: Real> MajoranaMatrix<T> {
    /// Assembles the matrix from the 2×2 blocks `Π_{n−m}`.
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
        let n = 2 * block_len;
        let mut mat = DMatrix::zeros(n, n);
        for m in 0..block_len {
            for k in 0..block_len {
                let l = k as i64 - m as i64;
                mat[(2 * m, 2 * k + 1)] = table.coeff(l);
                mat[(2 * m + 1, 2 * k)] = -table.coeff(-l);
            }
        }
        Ok(MajoranaMatrix { block_len, mat })
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.mat
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn params(gamma: f64, lambda: f64) -> ModelParams<f64> {
        ModelParams::new(gamma, lambda).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ModelParams::new(f64::NAN, 0.0).is_err());
        assert!(ModelParams::new(0.1, f64::INFINITY).is_err());
        assert!(ModelParams::with_quad_tol(0.1, 0.1, 0.0).is_err());
        assert!(ModelParams::with_quad_tol(0.1, 0.1, -1e-9).is_err());
    }

    #[test]
    fn ising_zero_field_kernel_is_a_single_fourier_mode() {
        // the symbol is exactly e^{-iφ}, so only l = -1 survives
        let p = params(1.0, 0.0);
        assert_abs_diff_eq!(coefficient(&p, -1).unwrap(), 1.0, epsilon = 1e-12);
        for l in [-3, -2, 0, 1, 2, 3] {
            assert_abs_diff_eq!(coefficient(&p, l).unwrap(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn strong_field_polarizes_the_kernel() {
        let p = params(0.3, 1000.0);
        for l in -4..=4 {
            let expect = if l == 0 { -1.0 } else { 0.0 };
            assert_abs_diff_eq!(coefficient(&p, l).unwrap(), expect, epsilon = 1e-3);
        }
    }

    #[test]
    fn isotropic_zero_field_kernel_is_the_square_wave_series() {
        // sgn(cos φ): odd harmonics 2/π, -2/(3π), 2/(5π), …; even ones vanish
        let p = params(0.0, 0.0);
        let two_over_pi = std::f64::consts::FRAC_2_PI;
        assert_abs_diff_eq!(coefficient(&p, 0).unwrap(), 0.0, epsilon = 1e-12);
        for l in [1i64, -1] {
            assert_abs_diff_eq!(coefficient(&p, l).unwrap(), two_over_pi, epsilon = 1e-11);
        }
        for l in [2i64, -2] {
            assert_abs_diff_eq!(coefficient(&p, l).unwrap(), 0.0, epsilon = 1e-11);
        }
        for l in [3i64, -3] {
            assert_abs_diff_eq!(
                coefficient(&p, l).unwrap(),
                -two_over_pi / 3.0,
                epsilon = 1e-11
            );
        }
    }

    #[test]
    fn matches_dense_quadrature_oracle() {
        let p = params(0.5, 0.5);
        for l in -3..=3 {
            let fast = coefficient(&p, l).unwrap();
            let slow = oracle::dense_quadrature(&p, l);
            assert_abs_diff_eq!(fast, slow, epsilon = 1e-10);
        }
    }

    #[test]
    fn critical_point_is_evaluable() {
        // λ = 1 has a removable-modulus singularity at φ = 0; the panels never
        // sample it and the value stays consistent with the dense oracle.
        let p = params(1.0, 1.0);
        for l in -2..=2 {
            let fast = coefficient(&p, l).unwrap();
            let slow = oracle::dense_quadrature(&p, l);
            assert_abs_diff_eq!(fast, slow, epsilon = 1e-8);
        }
    }

    #[test]
    fn negative_unit_field_is_evaluable() {
        // the mirror singularity sits at φ = π, which is always a panel edge
        let p = params(0.5, -1.0);
        for l in -2..=2 {
            let fast = coefficient(&p, l).unwrap();
            let slow = oracle::dense_quadrature(&p, l);
            assert_abs_diff_eq!(fast, slow, epsilon = 1e-8);
        }
    }

    #[test]
    fn steep_transition_at_tiny_anisotropy_converges() {
        // γ = 1e-4 smooths the square-wave jump into a transition of width
        // ~1e-4; the adaptive refinement has to chase it down
        let p = params(1e-4, 0.5);
        for l in [0i64, 1, -3, 7] {
            let fast = coefficient(&p, l).unwrap();
            let slow = oracle::dense_quadrature(&p, l);
            assert_abs_diff_eq!(fast, slow, epsilon = 5e-8);
        }
    }

    #[test]
    fn imaginary_part_stays_below_tolerance() {
        let mut rng = StdRng::seed_from_u64(0x9a7f_0001);
        for _ in 0..100 {
            let p = params(rng.random::<f64>(), rng.random::<f64>() * 1.5);
            let l = rng.random_range(-10..=10);
            let (_, im) = coefficient_parts(&p, l).unwrap();
            assert!(
                im.abs() <= 10.0 * p.quad_tol,
                "imag residual {im:e} too large at gamma={}, lambda={}, l={l}",
                p.gamma,
                p.lambda
            );
        }
    }

    #[test]
    fn negating_the_integration_variable_preserves_the_value() {
        // φ → −φ conjugates the integrand, which is the same as flipping the
        // signs of both l and γ.
        let mut rng = StdRng::seed_from_u64(0x9a7f_0002);
        for _ in 0..25 {
            let gamma = rng.random::<f64>();
            let lambda = rng.random::<f64>() * 1.5;
            let l = rng.random_range(-8..=8);
            let direct = coefficient(&params(gamma, lambda), l).unwrap();
            let reflected = coefficient(&params(-gamma, lambda), -l).unwrap();
            assert!((direct - reflected).abs() <= 2.0 * 1e-12);
        }
    }

    #[test]
    fn large_field_limit_over_a_range_of_l() {
        let p = params(0.7, 1000.0);
        for l in -8i64..=8 {
            let expect = if l == 0 { -1.0 } else { 0.0 };
            assert!((coefficient(&p, l).unwrap() - expect).abs() < 2e-3);
        }
    }

    #[test]
    fn xx_kernel_is_even_in_l() {
        for lambda in [0.0, 0.5, 1.2] {
            let p = params(0.0, lambda);
            for l in 1..=10i64 {
                let plus = coefficient(&p, l).unwrap();
                let minus = coefficient(&p, -l).unwrap();
                assert!(
                    (plus - minus).abs() < 1e-12,
                    "asymmetry at lambda={lambda}, l={l}"
                );
            }
        }
    }

    #[test]
    fn unreachable_tolerance_reports_nonconvergence() {
        let p = ModelParams::with_quad_tol(0.4, 0.3, 1e-30).unwrap();
        match coefficient(&p, 2) {
            Err(Error::QuadratureNonconvergence { l: 2, .. }) => {}
            other => panic!("expected nonconvergence, got {other:?}"),
        }
    }

    #[test]
    fn table_covers_the_requested_range() {
        let table = CorrelationTable::build(&params(1.0, 0.0), 3).unwrap();
        assert_eq!(table.l_max(), 3);
        assert_eq!(table.max_block_len(), 4);
        assert_abs_diff_eq!(table.coeff(-1), 1.0, epsilon = 1e-12);
        for l in [-3i64, -2, 0, 1, 2, 3] {
            assert_abs_diff_eq!(table.coeff(l), 0.0, epsilon = 1e-12);
        }
        let ls: Vec<i64> = table.entries().map(|(l, _)| l).collect();
        assert_eq!(ls, vec![-3, -2, -1, 0, 1, 2, 3]);
    }

    #[test]
    fn xx_table_matches_the_square_wave_series() {
        let table = CorrelationTable::build(&params(0.0, 0.0), 2).unwrap();
        let two_over_pi = std::f64::consts::FRAC_2_PI;
        let expect = [0.0, two_over_pi, 0.0, two_over_pi, 0.0];
        for ((_, got), want) in table.entries().zip(expect) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-11);
        }
    }

    #[test]
    fn table_matches_dense_oracle_at_generic_point() {
        let p = params(0.5, 0.5);
        let table = CorrelationTable::build(&p, 1).unwrap();
        for l in -1..=1 {
            assert_abs_diff_eq!(
                table.coeff(l),
                oracle::dense_quadrature(&p, l),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn majorana_matrix_is_antisymmetric_for_random_parameters() {
        let mut rng = StdRng::seed_from_u64(0x9a7f_0003);
        for _ in 0..10 {
            let p = params(rng.random::<f64>(), rng.random::<f64>() * 1.5);
            let table = CorrelationTable::build(&p, 4).unwrap();
            let gm = MajoranaMatrix::from_table(&table, 4).unwrap();
            let m = gm.matrix();
            for i in 0..8 {
                for j in 0..8 {
                    assert_eq!(m[(i, j)], -m[(j, i)], "antisymmetry at ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn majorana_matrix_single_site_block() {
        let p = params(0.6, 0.8);
        let table = CorrelationTable::build(&p, 1).unwrap();
        let g0 = table.coeff(0);
        let gm = MajoranaMatrix::from_table(&table, 1).unwrap();
        let m = gm.matrix();
        assert_eq!(m[(0, 1)], g0);
        assert_eq!(m[(1, 0)], -g0);
        assert_eq!(m[(0, 0)], 0.0);
        assert_eq!(m[(1, 1)], 0.0);
    }

    #[test]
    fn majorana_matrix_ising_zero_field_blocks() {
        let table = CorrelationTable::build(&params(1.0, 0.0), 3).unwrap();
        let gm = MajoranaMatrix::from_table(&table, 2).unwrap();
        let m = gm.matrix();
        // only Π_{-1} = [[0, 1], [0, 0]] survives: Γ[2,1] = 1, Γ[1,2] = -1
        for i in 0..4 {
            for j in 0..4 {
                let expect = match (i, j) {
                    (2, 1) => 1.0,
                    (1, 2) => -1.0,
                    _ => 0.0,
                };
                assert_abs_diff_eq!(m[(i, j)], expect, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn majorana_matrix_validates_block_length() {
        let table = CorrelationTable::build(&params(0.2, 0.3), 2).unwrap();
        assert!(MajoranaMatrix::from_table(&table, 3).is_ok());
        match MajoranaMatrix::from_table(&table, 4) {
            Err(Error::TableTooSmall { needed: 3, .. }) => {}
            other => panic!("expected TableTooSmall, got {other:?}"),
        }
    }

    #[test]
    fn single_precision_kernel_is_usable() {
        let p = ModelParams::<f32>::with_quad_tol(1.0, 0.0, 1e-5).unwrap();
        assert!((coefficient(&p, -1).unwrap() - 1.0).abs() < 1e-4);
        assert!(coefficient(&p, 0).unwrap().abs() < 1e-4);
    }
}
