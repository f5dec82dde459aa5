//! Parameter sweeps over the transverse field and detection of the phase
//! structure from the fitted scaling coefficients.
//!
//! A sweep fixes the anisotropy, walks a uniform field grid, fits the
//! diagonal-entropy curve at every point, and differentiates the coefficient
//! arrays with central differences (one-sided at the ends and next to failed
//! points). The critical point shows up as a growing peak in the coefficient
//! derivatives; the boundary between the two ferromagnetic phases is the zero
//! of the constant coefficient `c(λ)`.
//!
//! Grid points are embarrassingly parallel; results are reduced by grid index
//! so the output is bit-identical for any worker count.

use rayon::prelude::*;

use crate::entropy::EntropyCurve;
use crate::error::{Error, Result};
use crate::fitting::{fit_scaling, ScalingFit};
use crate::kernel::{CorrelationTable, ModelParams};
use crate::Real;

/// One sweep configuration. `fit_block_min..=block_len_max` is the fit range
/// of the per-point scaling fits.
#[derive(Debug, Clone, Copy)]
pub struct SweepConfig<T> {
    pub gamma: T,
    pub lambda_lo: T,
    pub lambda_hi: T,
    pub steps: usize,
    pub block_len_max: usize,
    pub fit_block_min: usize,
    pub quad_tol: T,
}

impl<T: Real> SweepConfig<T> {
    /// Field range `[0, 1.5]`, 151 steps, blocks up to 14 sites.
    pub fn new(gamma: T) -> Self {
        SweepConfig {
            gamma,
            lambda_lo: T::zero(),
            lambda_hi: T::of(1.5),
            steps: 151,
            block_len_max: 14,
            fit_block_min: 1,
            quad_tol: T::of(ModelParams::<T>::DEFAULT_QUAD_TOL),
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.gamma.is_finite() || !self.lambda_lo.is_finite() || !self.lambda_hi.is_finite() {
            return Err(Error::InvalidParams("sweep bounds must be finite".into()));
        }
        if self.steps == 0 {
            return Err(Error::InvalidParams("sweep needs at least one step".into()));
        }
        if self.steps > 1 && self.lambda_hi <= self.lambda_lo {
            return Err(Error::InvalidParams(
                "sweep range must satisfy lambda_lo < lambda_hi".into(),
            ));
        }
        if self.fit_block_min == 0 {
            return Err(Error::InvalidParams("fit_block_min must be >= 1".into()));
        }
        if self.block_len_max < self.fit_block_min + 3 {
            return Err(Error::InvalidParams(format!(
                "fit range {}..={} carries fewer than 4 points",
                self.fit_block_min, self.block_len_max
            )));
        }
        Ok(())
    }

    fn grid(&self) -> Vec<T> {
        if self.steps == 1 {
            return vec![self.lambda_lo];
        }
        let h = (self.lambda_hi - self.lambda_lo) / T::of((self.steps - 1) as f64);
        (0..self.steps)
            .map(|i| self.lambda_lo + T::of(i as f64) * h)
            .collect()
    }
}

/// A grid point that could not be evaluated (quadrature nonconvergence at or
/// extremely near the critical manifold). The sweep records it and carries
/// on.
#[derive(Debug, Clone)]
pub struct SweepFailure {
    pub index: usize,
    pub lambda: f64,
    pub message: String,
}

/// Coefficient curves and their finite-difference derivatives over a field
/// grid. Failed points hold NaN in every column.
#[derive(Debug, Clone)]
pub struct SweepResult<T> {
    pub gamma: T,
    pub lambda: Vec<T>,
    pub a: Vec<T>,
    pub b: Vec<T>,
    pub c: Vec<T>,
    pub rms: Vec<T>,
    pub da: Vec<T>,
    pub db: Vec<T>,
    pub dc: Vec<T>,
    pub failures: Vec<SweepFailure>,
}

impl<T: Real> SweepResult<T> {
    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    /// Whether the point carries fit coefficients.
    pub fn is_valid(&self, index: usize) -> bool {
        self.a[index].is_finite()
    }
}

/// Scaling fit at a single `(γ, λ)` point.
pub fn fit_at_point<T: Real>(
    gamma: T,
    lambda: T,
    quad_tol: T,
    block_len_max: usize,
    fit_block_min: usize,
) -> Result<ScalingFit<T>> {
    let params = ModelParams::with_quad_tol(gamma, lambda, quad_tol)?;
    let table = CorrelationTable::build(&params, block_len_max.saturating_sub(1).max(1))?;
    let curve = EntropyCurve::from_table(&table, block_len_max)?;
    fit_scaling(
        curve.block_lens(),
        curve.diagonal(),
        (fit_block_min, block_len_max),
    )
}

/// Sweeps the field grid at fixed anisotropy.
pub fn sweep<T: Real>(config: &SweepConfig<T>) -> Result<SweepResult<T>> {
    config.validate()?;
    let grid = config.grid();
    let fits: Vec<Result<ScalingFit<T>>> = grid
        .par_iter()
        .map(|&lambda| {
            fit_at_point(
                config.gamma,
                lambda,
                config.quad_tol,
                config.block_len_max,
                config.fit_block_min,
            )
        })
        .collect();

    let nan = T::of(f64::NAN);
    let n = grid.len();
    let mut result = SweepResult {
        gamma: config.gamma,
        lambda: grid,
        a: vec![nan; n],
        b: vec![nan; n],
        c: vec![nan; n],
        rms: vec![nan; n],
        da: vec![nan; n],
        db: vec![nan; n],
        dc: vec![nan; n],
        failures: Vec::new(),
    };
    for (i, fit) in fits.into_iter().enumerate() {
        match fit {
            Ok(f) => {
                result.a[i] = f.a;
                result.b[i] = f.b;
                result.c[i] = f.c;
                result.rms[i] = f.rms_residual;
            }
            Err(err) => result.failures.push(SweepFailure {
                index: i,
                lambda: result.lambda[i].approx_f64(),
                message: err.to_string(),
            }),
        }
    }
    if result.failures.len() == n {
        return Err(Error::SweepEmpty {
            first: result.failures[0].message.clone(),
        });
    }
    result.da = difference_quotients(&result.lambda, &result.a);
    result.db = difference_quotients(&result.lambda, &result.b);
    result.dc = difference_quotients(&result.lambda, &result.c);
    Ok(result)
}

/// Central differences over the nearest valid neighbour on each side:
/// plain central differences in the interior of a clean grid, one-sided at
/// the ends and next to failed points (which the stencil skips), NaN when no
/// valid neighbour remains.
fn difference_quotients<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    let n = x.len();
    let nan = T::of(f64::NAN);
    let valid = |i: usize| y[i].is_finite();
    (0..n)
        .map(|i| {
            if !valid(i) {
                return nan;
            }
            let left = (0..i).rev().find(|&j| valid(j));
            let right = ((i + 1)..n).find(|&j| valid(j));
            match (left, right) {
                (Some(l), Some(r)) => (y[r] - y[l]) / (x[r] - x[l]),
                (None, Some(r)) => (y[r] - y[i]) / (x[r] - x[i]),
                (Some(l), None) => (y[i] - y[l]) / (x[i] - x[l]),
                (None, None) => nan,
            }
        })
        .collect()
}

/// Transverse-field Ising sweep: the anisotropy pinned to 1.
pub fn ising_scan<T: Real>(config: &SweepConfig<T>) -> Result<SweepResult<T>> {
    let mut config = *config;
    config.gamma = T::one();
    sweep(&config)
}

/// Independent sweeps for several anisotropies, returned in ascending `γ`
/// order regardless of input or execution order. Per-`γ` failures are
/// isolated in their slot.
pub fn grid_scan<T: Real>(
    gammas: &[T],
    template: &SweepConfig<T>,
) -> Vec<(T, Result<SweepResult<T>>)> {
    let mut output: Vec<(T, Result<SweepResult<T>>)> = gammas
        .iter()
        .map(|&gamma| {
            let mut config = *template;
            config.gamma = gamma;
            (gamma, sweep(&config))
        })
        .collect();
    // total order so that invalid (non-finite) anisotropies sort stably
    // instead of poisoning the whole grid
    output.sort_by(|lhs, rhs| lhs.0.approx_f64().total_cmp(&rhs.0.approx_f64()));
    output
}

/// Zero of `c(λ)` with the bracket that pinned it down.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryPoint<T> {
    pub gamma: T,
    pub lambda_star: T,
    pub bracket: (T, T),
    pub residual_c: T,
}

const BOUNDARY_COARSE_STEPS: usize = 33;
const BOUNDARY_WIDTH: f64 = 1e-3;
const BOUNDARY_RESIDUAL: f64 = 1e-3;
const BISECTION_LIMIT: usize = 100;

/// Locates the zero of `c(λ)` for `γ ∈ (0, 1]` inside `search`
/// (within `[0, 1)`).
///
/// A coarse scan looks for a sign change, which bisection then refines below
/// `1e-3` in width and `1e-3` bits in residual. In the ferromagnetic region
/// `c` is typically nonnegative and merely *touches* zero quadratically on
/// the product-state locus, so when no sign change exists the minimum of
/// `|c|` is refined by golden-section search instead and accepted as the
/// boundary when the residual is below the same `1e-3` target.
pub fn find_boundary<T: Real>(
    gamma: T,
    block_len_max: usize,
    search: (T, T),
    quad_tol: T,
) -> Result<BoundaryPoint<T>> {
    if !(gamma > T::zero() && gamma <= T::one()) {
        return Err(Error::InvalidParams(format!(
            "boundary search needs gamma in (0, 1], got {}",
            gamma.approx_f64()
        )));
    }
    let (lo, hi) = search;
    if !(lo >= T::zero() && lo < hi && hi < T::one()) {
        return Err(Error::InvalidParams(format!(
            "search range [{}, {}] must sit inside [0, 1)",
            lo.approx_f64(),
            hi.approx_f64()
        )));
    }
    let c_at = |lambda: T| -> Result<T> {
        fit_at_point(gamma, lambda, quad_tol, block_len_max, 1).map(|f| f.c)
    };

    let h = (hi - lo) / T::of((BOUNDARY_COARSE_STEPS - 1) as f64);
    let grid: Vec<T> = (0..BOUNDARY_COARSE_STEPS)
        .map(|i| lo + T::of(i as f64) * h)
        .collect();
    let coarse: Vec<Option<T>> = grid
        .par_iter()
        .map(|&lambda| match c_at(lambda) {
            Ok(c) => Some(c),
            Err(err) => {
                log::warn!(
                    "boundary scan point lambda={} failed: {err}",
                    lambda.approx_f64()
                );
                None
            }
        })
        .collect();

    let residual_target = T::of(BOUNDARY_RESIDUAL);

    // strict sign change between consecutive evaluable points
    let mut bracket: Option<(usize, usize)> = None;
    let mut previous: Option<usize> = None;
    for (i, c) in coarse.iter().enumerate() {
        if c.is_none() {
            continue;
        }
        if let Some(p) = previous {
            let (cp, ci) = (coarse[p].unwrap(), c.unwrap());
            if cp * ci < T::zero() {
                bracket = Some((p, i));
                break;
            }
        }
        previous = Some(i);
    }
    if let Some((il, ir)) = bracket {
        return bisect_crossing(gamma, grid[il], grid[ir], coarse[il].unwrap(), &c_at);
    }

    // no crossing: refine the minimum of |c| (tangential zero on the
    // product-state locus)
    let mut best: Option<(usize, T)> = None;
    for (i, c) in coarse.iter().enumerate() {
        if let Some(c) = *c {
            if best.is_none_or(|(_, bc): (usize, T)| c.abs() < bc.abs()) {
                best = Some((i, c));
            }
        }
    }
    let Some((best_index, coarse_c)) = best else {
        return Err(Error::SweepEmpty {
            first: "every coarse boundary point failed".into(),
        });
    };
    let (lambda_star, bracket, residual) = if best_index == 0 || best_index + 1 == grid.len() {
        // pinned at a range endpoint; nothing to bracket
        (
            grid[best_index],
            (grid[best_index], grid[best_index]),
            coarse_c,
        )
    } else {
        golden_min_abs(
            grid[best_index - 1],
            grid[best_index + 1],
            (grid[best_index], coarse_c),
            &c_at,
        )?
    };
    if residual.abs() <= residual_target {
        Ok(BoundaryPoint {
            gamma,
            lambda_star,
            bracket,
            residual_c: residual,
        })
    } else {
        Err(Error::NoSignChange {
            gamma: gamma.approx_f64(),
            lo: lo.approx_f64(),
            hi: hi.approx_f64(),
            min_abs_c: residual.abs().approx_f64(),
            at: lambda_star.approx_f64(),
        })
    }
}

fn bisect_crossing<T: Real>(
    gamma: T,
    mut blo: T,
    mut bhi: T,
    mut clo: T,
    c_at: &impl Fn(T) -> Result<T>,
) -> Result<BoundaryPoint<T>> {
    let width_target = T::of(BOUNDARY_WIDTH);
    let residual_target = T::of(BOUNDARY_RESIDUAL);
    let mut mid = (blo + bhi) * T::of(0.5);
    let mut cmid = c_at(mid)?;
    for _ in 0..BISECTION_LIMIT {
        if bhi - blo < width_target && cmid.abs() < residual_target {
            return Ok(BoundaryPoint {
                gamma,
                lambda_star: mid,
                bracket: (blo, bhi),
                residual_c: cmid,
            });
        }
        if clo * cmid <= T::zero() {
            bhi = mid;
        } else {
            blo = mid;
            clo = cmid;
        }
        mid = (blo + bhi) * T::of(0.5);
        cmid = c_at(mid)?;
    }
    Err(Error::BoundaryRefinement {
        gamma: gamma.approx_f64(),
        detail: format!(
            "bisection stalled with width {} and residual {}",
            (bhi - blo).approx_f64(),
            cmid.approx_f64()
        ),
    })
}

/// Golden-section minimization of `|c|` on `[a, b]`, seeded with one interior
/// evaluation. Returns the best point, the final interval, and `c` there.
fn golden_min_abs<T: Real>(
    mut a: T,
    mut b: T,
    seed: (T, T),
    c_at: &impl Fn(T) -> Result<T>,
) -> Result<(T, (T, T), T)> {
    let ratio = T::of(0.618_033_988_749_894_9);
    let width_target = T::of(BOUNDARY_WIDTH);
    let mut best = seed;
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = c_at(x1)?;
    let mut f2 = c_at(x2)?;
    for _ in 0..BISECTION_LIMIT {
        if f1.abs() < best.1.abs() {
            best = (x1, f1);
        }
        if f2.abs() < best.1.abs() {
            best = (x2, f2);
        }
        if b - a < width_target {
            break;
        }
        if f1.abs() <= f2.abs() {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = c_at(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = c_at(x2)?;
        }
    }
    Ok((best.0, (a, b), best.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn quick_config(gamma: f64) -> SweepConfig<f64> {
        SweepConfig {
            gamma,
            lambda_lo: 0.0,
            lambda_hi: 1.5,
            steps: 16,
            block_len_max: 8,
            fit_block_min: 1,
            quad_tol: 1e-12,
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = quick_config(1.0);
        cfg.steps = 0;
        assert!(sweep(&cfg).is_err());
        let mut cfg = quick_config(1.0);
        cfg.lambda_hi = cfg.lambda_lo;
        cfg.steps = 5;
        assert!(sweep(&cfg).is_err());
        let mut cfg = quick_config(1.0);
        cfg.block_len_max = 3;
        assert!(sweep(&cfg).is_err());
    }

    #[test]
    fn single_point_sweep_at_the_uniform_limit() {
        let mut cfg = quick_config(1.0);
        cfg.steps = 1;
        cfg.lambda_lo = 0.0;
        cfg.block_len_max = 10;
        let result = sweep(&cfg).unwrap();
        assert_eq!(result.len(), 1);
        assert_abs_diff_eq!(result.a[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(result.b[0], 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(result.c[0], 0.0, epsilon = 1e-6);
    }

    #[test]
    fn derivative_arrays_are_the_difference_quotients() {
        let cfg = quick_config(1.0);
        let result = sweep(&cfg).unwrap();
        assert!(result.failures.is_empty());
        let n = result.len();
        for i in 0..n {
            let expect = if i == 0 {
                (result.a[1] - result.a[0]) / (result.lambda[1] - result.lambda[0])
            } else if i == n - 1 {
                (result.a[n - 1] - result.a[n - 2])
                    / (result.lambda[n - 1] - result.lambda[n - 2])
            } else {
                (result.a[i + 1] - result.a[i - 1])
                    / (result.lambda[i + 1] - result.lambda[i - 1])
            };
            assert_abs_diff_eq!(result.da[i], expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn difference_quotients_skip_failed_points() {
        let x = vec![0.0, 1.0, 2.0, 3.0];
        let y = vec![0.0, f64::NAN, 4.0, 9.0];
        let d = difference_quotients(&x, &y);
        assert_abs_diff_eq!(d[0], 2.0, epsilon = 1e-12); // reaches across the gap
        assert!(d[1].is_nan());
        assert_abs_diff_eq!(d[2], 3.0, epsilon = 1e-12); // central over the gap
        assert_abs_diff_eq!(d[3], 5.0, epsilon = 1e-12); // one-sided at the end
    }

    #[test]
    fn c_varies_continuously_away_from_criticality() {
        let cfg: SweepConfig<f64> = SweepConfig {
            gamma: 1.0,
            lambda_lo: 0.0,
            lambda_hi: 1.5,
            steps: 61,
            block_len_max: 8,
            fit_block_min: 1,
            quad_tol: 1e-12,
        };
        let result = sweep(&cfg).unwrap();
        let h = result.lambda[1] - result.lambda[0];
        let max_dc = result
            .dc
            .iter()
            .filter(|v| v.is_finite())
            .fold(0.0f64, |m, &v| m.max(v.abs()));
        for i in 1..result.len() {
            if (result.lambda[i] - 1.0).abs() <= 0.05 || (result.lambda[i - 1] - 1.0).abs() <= 0.05
            {
                continue;
            }
            let jump = (result.c[i] - result.c[i - 1]).abs();
            assert!(
                jump < 10.0 * h * max_dc,
                "c jumps by {jump} at lambda={}",
                result.lambda[i]
            );
        }
    }

    #[test]
    fn ising_scan_pins_gamma_to_one() {
        let mut cfg = quick_config(0.3);
        cfg.steps = 8;
        cfg.lambda_hi = 0.7;
        let direct = {
            let mut c = cfg;
            c.gamma = 1.0;
            sweep(&c).unwrap()
        };
        let ising = ising_scan(&cfg).unwrap();
        assert_eq!(ising.gamma, 1.0);
        for i in 0..ising.len() {
            assert_eq!(ising.a[i], direct.a[i]);
        }
    }

    #[test]
    fn grid_scan_orders_by_gamma_and_matches_single_sweeps() {
        let mut cfg = quick_config(0.0);
        cfg.steps = 8;
        cfg.lambda_hi = 0.9;
        let gammas = [1.0, 0.5];
        let grid = grid_scan(&gammas, &cfg);
        assert_eq!(grid.len(), 2);
        assert_eq!(grid[0].0, 0.5);
        assert_eq!(grid[1].0, 1.0);
        let mut single = cfg;
        single.gamma = 0.5;
        let reference = sweep(&single).unwrap();
        let from_grid = grid[0].1.as_ref().unwrap();
        for i in 0..reference.len() {
            assert_eq!(reference.a[i], from_grid.a[i]);
            assert_eq!(reference.c[i], from_grid.c[i]);
        }
    }

    #[test]
    fn sweep_with_unreachable_tolerance_reports_emptiness() {
        let mut cfg = quick_config(0.5);
        cfg.steps = 4;
        cfg.quad_tol = 1e-30;
        match sweep(&cfg) {
            Err(Error::SweepEmpty { .. }) => {}
            other => panic!("expected SweepEmpty, got {other:?}"),
        }
    }

    #[test]
    fn grid_scan_isolates_a_bad_anisotropy() {
        let mut cfg = quick_config(0.0);
        cfg.steps = 8;
        cfg.lambda_hi = 0.5;
        let outcomes = grid_scan(&[0.5, f64::NAN], &cfg);
        assert_eq!(outcomes.len(), 2);
        let good = outcomes
            .iter()
            .find(|(g, _)| g.is_finite())
            .expect("finite gamma present");
        assert!(good.1.is_ok());
        let bad = outcomes.iter().find(|(g, _)| g.is_nan()).unwrap();
        assert!(matches!(bad.1, Err(Error::InvalidParams(_))));
    }

    #[test]
    fn boundary_rejects_bad_inputs() {
        assert!(find_boundary::<f64>(0.0, 8, (0.1, 0.9), 1e-12).is_err());
        assert!(find_boundary::<f64>(1.2, 8, (0.1, 0.9), 1e-12).is_err());
        assert!(find_boundary::<f64>(0.5, 8, (0.9, 0.1), 1e-12).is_err());
        assert!(find_boundary::<f64>(0.5, 8, (0.1, 1.0), 1e-12).is_err());
    }

    #[test]
    fn boundary_for_moderate_anisotropy_lands_on_the_circle() {
        // γ = 0.6: the product-state circle γ² + λ² = 1 passes through
        // λ = 0.8, where c(λ) touches zero quadratically
        let point = find_boundary::<f64>(0.6, 10, (0.05, 0.95), 1e-12).unwrap();
        assert!(
            (point.lambda_star - 0.8).abs() < 0.05,
            "lambda_star = {}",
            point.lambda_star
        );
        assert!(point.residual_c.abs() < 1e-3);
        assert!(point.bracket.0 <= point.lambda_star && point.lambda_star <= point.bracket.1);
    }

    #[test]
    fn boundary_for_the_ising_line_sits_at_zero_field() {
        // γ = 1: the circle touches λ = 0, where c vanishes identically; the
        // zero-residual grid shortcut must pick the endpoint up
        let point = find_boundary::<f64>(1.0, 10, (0.0, 0.5), 1e-12).unwrap();
        assert!(point.lambda_star < 0.05, "lambda_star = {}", point.lambda_star);
        assert!(point.residual_c.abs() < 1e-3);
    }
}
