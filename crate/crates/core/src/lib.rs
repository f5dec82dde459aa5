//! Diagonal-entropy scaling for the infinite anisotropic XY spin chain.
//!
//! The chain is the spin-1/2 model with anisotropy `gamma`, transverse field
//! `lambda`, and periodic boundary conditions, taken directly in the
//! thermodynamic limit. Everything downstream is driven by a single real
//! sequence: the free-fermion correlation kernel `g_l`, obtained by quadrature
//! of its Fourier integral. From it the crate builds
//!
//! * multi-site `σ^z` correlators and the full diagonal of the reduced density
//!   matrix of an `L`-site block ([`measure`]),
//! * the Shannon entropy of that diagonal, the entanglement entropy of the
//!   block via the Majorana correlation-matrix spectrum, and their difference,
//!   the relative entropy of coherence ([`entropy`]),
//! * least-squares fits of the entropy to `a·L + b·log2(L) + c` ([`fitting`]),
//! * parameter sweeps that track the fitted coefficients across the transverse
//!   field, locate the derivative peak at the critical point, and find the
//!   `c(lambda) = 0` boundary between the two ferromagnetic phases ([`scan`]).
//!
//! Slow independent reference implementations (subset-expansion Wick sums,
//! dense quadrature, exact diagonalization of small rings) live in [`oracle`]
//! and back the test suite.
//!
//! All numeric code is generic over the scalar type through the [`Real`]
//! trait; `f64` is the working precision (see the `*64` aliases at the crate
//! root) and `f32` is supported for quick low-precision experiments.

use std::fmt;

pub mod entropy;
pub mod error;
pub mod fitting;
pub mod kernel;
pub mod measure;
pub mod oracle;
pub mod scan;

pub use error::{Error, Result};
pub use kernel::{CorrelationTable, MajoranaMatrix, ModelParams};
pub use measure::{
    diag_distribution, marginalize, z_correlator, DetEngine, DiagonalDistribution,
    ZCorrelationMatrix,
};
pub use entropy::{coherence, diagonal_entropy, entanglement_entropy, majorana_spectrum, EntropyCurve};
pub use fitting::{fit_log, fit_scaling, residuals, ScalingFit};
pub use scan::{find_boundary, grid_scan, ising_scan, sweep, BoundaryPoint, SweepConfig, SweepResult};

/// Floating-point scalar the whole pipeline is generic over.
///
/// `f32` and `f64` implement it. The bound pulls in `nalgebra`'s field
/// operations for the dense linear algebra plus the `num-traits` conversions
/// used to inject literal constants.
pub trait Real:
    nalgebra::RealField
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + Copy
    + fmt::LowerExp
{
    /// Injects an `f64` literal into the scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable in scalar type")
    }

    /// Lossy view of the scalar as `f64`, for diagnostics and error reports.
    fn approx_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Tolerance for an internal invariant check: the double-precision budget
/// `base`, widened to `ulps` machine epsilons when the scalar type is too
/// coarse to meet it (`f32` runs).
pub(crate) fn guard_tol<T: Real>(base: f64, ulps: f64) -> T {
    T::of(base).max(T::default_epsilon() * T::of(ulps))
}

/// Canonical 17-significant-digit decimal rendering used by every text
/// output. Locale-independent and stable across runs, so equal values always
/// serialize to equal bytes.
pub fn sig17<T: Real>(value: T) -> String {
    if value.is_finite() {
        format!("{value:.16e}")
    } else {
        format!("{}", value.approx_f64())
    }
}

/// Working precision of the command-line tools and the acceptance suite.
pub type Real64 = f64;
/// Reduced precision, available for fast exploratory runs.
pub type Real32 = f32;

pub type ModelParams64 = ModelParams<f64>;
pub type CorrelationTable64 = CorrelationTable<f64>;
pub type MajoranaMatrix64 = MajoranaMatrix<f64>;
pub type ZCorrelationMatrix64 = ZCorrelationMatrix<f64>;
pub type DiagonalDistribution64 = DiagonalDistribution<f64>;
pub type EntropyCurve64 = EntropyCurve<f64>;
pub type ScalingFit64 = ScalingFit<f64>;
pub type SweepResult64 = SweepResult<f64>;
pub type BoundaryPoint64 = BoundaryPoint<f64>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig17_is_stable_and_17_digits() {
        assert_eq!(sig17(1.0f64), "1.0000000000000000e0");
        assert_eq!(sig17(-0.125f64), "-1.2500000000000000e-1");
        assert_eq!(sig17(std::f64::consts::PI), "3.1415926535897931e0");
        assert_eq!(sig17(f64::NAN), "NaN");
        assert_eq!(sig17(0.25f32), "2.5000000000000000e-1");
    }

    #[test]
    fn real_of_injects_literals() {
        assert_eq!(<f64 as Real>::of(0.5), 0.5);
        assert_eq!(<f32 as Real>::of(0.5), 0.5f32);
        assert_eq!(0.75f64.approx_f64(), 0.75);
    }
}
