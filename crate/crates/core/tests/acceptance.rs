//! Acceptance suite: one test per release criterion, each printing a PASS
//! line with the measured numbers (visible with `--nocapture`).
//!
//! Run with `cargo test -p xy-entropy --test acceptance -- --nocapture`.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::ThreadPoolBuilder;

use xy_entropy::{
    diag_distribution, entanglement_entropy, find_boundary, fit_log, fit_scaling, marginalize,
    oracle, scan::SweepConfig, sig17, sweep, z_correlator, CorrelationTable, EntropyCurve,
    MajoranaMatrix, ModelParams, SweepResult,
};

fn table(gamma: f64, lambda: f64, l_max: usize) -> CorrelationTable<f64> {
    CorrelationTable::build(&ModelParams::new(gamma, lambda).unwrap(), l_max).unwrap()
}

/// Uniform case at (γ=1, λ=0): flat distribution, DE(L) = L, fit (1, 0, 0).
#[test]
fn uniform_case() {
    let t = table(1.0, 0.0, 13);

    let dist = diag_distribution(&t, 10).unwrap();
    let flat = 1.0 / 1024.0;
    let max_dev = dist
        .probabilities()
        .iter()
        .fold(0.0f64, |m, &p| m.max((p - flat).abs()));
    assert!(max_dev < 1e-10, "max |p - 2^-10| = {max_dev:e}");

    let params = ModelParams::new(1.0, 0.0).unwrap();
    let curve = EntropyCurve::compute(&params, 14).unwrap();
    let mut max_de_dev = 0.0f64;
    for (i, &len) in curve.block_lens().iter().enumerate() {
        max_de_dev = max_de_dev.max((curve.diagonal()[i] - len as f64).abs());
    }
    assert!(max_de_dev < 1e-8, "max |DE(L) - L| = {max_de_dev:e}");

    let fit = fit_scaling(curve.block_lens(), curve.diagonal(), (1, 14)).unwrap();
    assert!((fit.a - 1.0).abs() < 1e-6, "a = {}", fit.a);
    assert!(fit.b.abs() < 1e-6, "b = {}", fit.b);
    assert!(fit.c.abs() < 1e-6, "c = {}", fit.c);

    println!(
        "PASS uniform_case: max|p-2^-L|={max_dev:.2e}, max|DE-L|={max_de_dev:.2e}, \
         (a,b,c)=({:.2e},{:.2e},{:.2e}) from (1,0,0)",
        fit.a - 1.0,
        fit.b,
        fit.c
    );
}

/// Determinant-identity probabilities equal the literal subset Wick
/// expansion entrywise to 1e-10 for L ≤ 6 over 20 random parameter draws.
#[test]
fn oracle_equivalence() {
    let mut rng = StdRng::seed_from_u64(0xacce_0002);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let gamma: f64 = rng.random();
        let lambda: f64 = rng.random::<f64>() * 1.5;
        let t = table(gamma, lambda, 6);
        for block_len in 1..=6 {
            let fast = diag_distribution(&t, block_len).unwrap();
            let slow = oracle::wick_distribution(&t, block_len).unwrap();
            for (index, (&a, &b)) in fast.probabilities().iter().zip(&slow).enumerate() {
                let dev = (a - b).abs();
                worst = worst.max(dev);
                assert!(
                    dev < 1e-10,
                    "gamma={gamma}, lambda={lambda}, L={block_len}, string={index:b}: \
                     determinant {a} vs subset expansion {b}"
                );
            }
        }
    }
    println!("PASS oracle_equivalence: worst entrywise deviation {worst:.2e} over 20 draws");
}

/// The determinant correlator reproduces the printed two- and three-site
/// coefficient expansions to 1e-12 on 50 random draws.
#[test]
fn printed_formula_agreement() {
    let mut rng = StdRng::seed_from_u64(0xacce_0003);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let gamma: f64 = rng.random();
        let lambda: f64 = rng.random::<f64>() * 1.5;
        let t = table(gamma, lambda, 8);
        let g = |l: i64| t.coeff(l);

        let mut sites = [0usize; 3];
        loop {
            for s in sites.iter_mut() {
                *s = rng.random_range(1..=9);
            }
            sites.sort_unstable();
            if sites[0] < sites[1] && sites[1] < sites[2] {
                break;
            }
        }
        let (l, m, n) = (sites[0], sites[1], sites[2]);
        let (li, mi, ni) = (l as i64, m as i64, n as i64);

        let two = z_correlator(&t, &[m, n]).unwrap();
        let two_printed = g(0) * g(0) - g(ni - mi) * g(mi - ni);
        let dev2 = (two - two_printed).abs();

        let three = z_correlator(&t, &[l, m, n]).unwrap();
        let three_printed = g(0) * g(0) * g(0)
            - g(0) * (g(mi - li) * g(li - mi) + g(ni - mi) * g(mi - ni) + g(li - ni) * g(ni - li))
            + g(li - mi) * g(mi - ni) * g(ni - li)
            + g(mi - li) * g(ni - mi) * g(li - ni);
        let dev3 = (three - three_printed).abs();

        worst = worst.max(dev2).max(dev3);
        assert!(
            dev2 < 1e-12 && dev3 < 1e-12,
            "gamma={gamma}, lambda={lambda}, sites={sites:?}: deviations {dev2:e}, {dev3:e}"
        );
    }
    println!("PASS printed_formula_agreement: worst deviation {worst:.2e} over 50 draws");
}

/// The thermodynamic-limit pipeline agrees with exact diagonalization of a
/// 14-site ring at (γ=1, λ=0.5) to 5e-3 entrywise for a 3-site block.
#[test]
fn ed_cross_check() {
    let t = table(1.0, 0.5, 3);
    let pipeline = diag_distribution(&t, 3).unwrap();
    let spec = oracle::FiniteChainSpec::new(14, 1.0, 0.5).unwrap();
    let ed = oracle::ed_ground_state(&spec, 3).unwrap();
    let mut worst = 0.0f64;
    for (index, (&a, &b)) in pipeline.probabilities().iter().zip(&ed.probs).enumerate() {
        let dev = (a - b).abs();
        worst = worst.max(dev);
        assert!(
            dev < 5e-3,
            "string {index:03b}: pipeline {a} vs exact diagonalization {b}"
        );
    }
    println!("PASS ed_cross_check: worst entrywise deviation {worst:.2e} (finite-size dominated)");
}

/// Diagonal-entropy curves at (γ=0, λ=0) and (γ=1, λ=1) for L = 1..16 follow
/// the volume-plus-log law with RMS residual below 0.02 bits.
#[test]
fn scaling_law_reproduction() {
    for (gamma, lambda) in [(0.0, 0.0), (1.0, 1.0)] {
        let params = ModelParams::new(gamma, lambda).unwrap();
        let curve = EntropyCurve::compute(&params, 16).unwrap();
        let fit = fit_scaling(curve.block_lens(), curve.diagonal(), (1, 16)).unwrap();
        assert!(
            fit.rms_residual < 0.02,
            "gamma={gamma}, lambda={lambda}: rms residual {} bits",
            fit.rms_residual
        );
        println!(
            "PASS scaling_law_reproduction: ({gamma}, {lambda}) rms={:.5} bits, \
             (a,b,c)=({:.4},{:.4},{:.4})",
            fit.rms_residual, fit.a, fit.b, fit.c
        );
    }
}

fn max_abs_finite(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|v| v.is_finite())
        .fold(0.0f64, |m, &v| m.max(v.abs()))
}

/// Coefficient derivatives peak at the critical field and sharpen with block
/// length: a desk-scale rendering of the divergence at λ = 1.
#[test]
fn derivative_peak_at_critical_field() {
    let sweep_at = |block_len_max: usize| -> SweepResult<f64> {
        let config = SweepConfig {
            gamma: 1.0,
            lambda_lo: 0.8,
            lambda_hi: 1.2,
            steps: 41,
            block_len_max,
            fit_block_min: 1,
            quad_tol: 1e-12,
        };
        sweep(&config).unwrap()
    };

    let result = sweep_at(12);
    let argmax = |values: &[f64]| -> f64 {
        let mut best = (0usize, 0.0f64);
        for (i, &v) in values.iter().enumerate() {
            if v.is_finite() && v.abs() > best.1 {
                best = (i, v.abs());
            }
        }
        result.lambda[best.0]
    };
    let peak_dc = argmax(&result.dc);
    let peak_da = argmax(&result.da);
    assert!(
        (0.97..=1.03).contains(&peak_dc),
        "argmax |dc/dλ| at {peak_dc}"
    );
    assert!(
        (0.97..=1.03).contains(&peak_da),
        "argmax |da/dλ| at {peak_da}"
    );

    let heights: Vec<f64> = [8, 10, 12]
        .into_iter()
        .map(|len| max_abs_finite(&sweep_at(len).da))
        .collect();
    assert!(
        heights[0] <= heights[1] && heights[1] <= heights[2],
        "peak |da/dλ| not nondecreasing: {heights:?}"
    );
    println!(
        "PASS derivative_peak_at_critical_field: argmax|dc|={peak_dc:.2}, \
         argmax|da|={peak_da:.2}, peak|da| over L_max 8/10/12 = {heights:?}"
    );
}

/// The c(λ) = 0 locus reproduces the product-state circle γ² + λ² = 1.
#[test]
fn boundary_circle_reproduction() {
    for gamma in [0.2f64, 0.5, 0.7] {
        let point = find_boundary(gamma, 12, (0.05, 0.995), 1e-12).unwrap();
        let circle_dev = (gamma * gamma + point.lambda_star * point.lambda_star - 1.0).abs();
        assert!(
            circle_dev < 0.05,
            "gamma={gamma}: lambda_star={} misses the circle by {circle_dev}",
            point.lambda_star
        );
        println!(
            "PASS boundary_circle_reproduction: gamma={gamma}, lambda_star={:.4}, \
             |γ²+λ²-1|={circle_dev:.4}, residual c={:.2e}",
            point.lambda_star, point.residual_c
        );
    }
}

/// Normalization, reflection symmetry, marginal consistency, DE monotonicity,
/// the DE ≤ L bound, and coherence nonnegativity across a 5×7 parameter grid.
#[test]
fn invariant_suite() {
    let gammas = [0.0, 0.25, 0.5, 0.75, 1.0];
    let lambdas = [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5];
    for &gamma in &gammas {
        for &lambda in &lambdas {
            let params = ModelParams::new(gamma, lambda).unwrap();
            let t = CorrelationTable::build(&params, 7).unwrap();

            let mut previous: Option<xy_entropy::DiagonalDistribution<f64>> = None;
            for block_len in 1..=8usize {
                let dist = diag_distribution(&t, block_len).unwrap();
                let total: f64 = dist.probabilities().iter().sum();
                assert!(
                    (total - 1.0).abs() < 1e-9,
                    "normalization off by {:e} at ({gamma}, {lambda}), L={block_len}",
                    total - 1.0
                );
                assert!(
                    dist.reflection_defect() < 1e-10,
                    "reflection defect {:e} at ({gamma}, {lambda}), L={block_len}",
                    dist.reflection_defect()
                );
                if let Some(prev) = &previous {
                    let merged = marginalize(&dist).unwrap();
                    for (a, b) in merged.probabilities().iter().zip(prev.probabilities()) {
                        assert!(
                            (a - b).abs() < 1e-9,
                            "marginal inconsistency at ({gamma}, {lambda}), L={block_len}"
                        );
                    }
                }
                previous = Some(dist);
            }

            let curve = EntropyCurve::compute(&params, 8).unwrap();
            for (i, &len) in curve.block_lens().iter().enumerate() {
                assert!(curve.diagonal()[i] <= len as f64 + 1e-9);
                assert!(curve.coherence_values()[i] >= -1e-9);
                if i > 0 {
                    assert!(curve.diagonal()[i] >= curve.diagonal()[i - 1] - 1e-9);
                }
            }
        }
    }
    println!(
        "PASS invariant_suite: {} grid points, L <= 8",
        gammas.len() * lambdas.len()
    );
}

/// The log-growth coefficient of the entanglement entropy matches the
/// conformal prediction: ~1/6 at (γ=1, λ=1) and ~1/3 at (γ=0, λ=0).
#[test]
fn entanglement_log_coefficient() {
    let cases = [((1.0, 1.0), (0.15, 0.19)), ((0.0, 0.0), (0.30, 0.37))];
    for ((gamma, lambda), (lo, hi)) in cases {
        let t = table(gamma, lambda, 15);
        let lens: Vec<usize> = (6..=16).collect();
        let ees: Vec<f64> = lens
            .iter()
            .map(|&len| {
                let gm = MajoranaMatrix::from_table(&t, len).unwrap();
                entanglement_entropy(&gm).unwrap()
            })
            .collect();
        let (slope, intercept) = fit_log(&lens, &ees).unwrap();
        assert!(
            (lo..=hi).contains(&slope),
            "gamma={gamma}, lambda={lambda}: EE log slope {slope} outside [{lo}, {hi}]"
        );
        println!(
            "PASS entanglement_log_coefficient: ({gamma}, {lambda}) slope={slope:.4} \
             (intercept {intercept:.4})"
        );
    }
}

fn sweep_csv(result: &SweepResult<f64>) -> String {
    let mut out = String::from("lambda,a,b,c,da,db,dc,rms\n");
    for i in 0..result.len() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            sig17(result.lambda[i]),
            sig17(result.a[i]),
            sig17(result.b[i]),
            sig17(result.c[i]),
            sig17(result.da[i]),
            sig17(result.db[i]),
            sig17(result.dc[i]),
            sig17(result.rms[i]),
        ));
    }
    out
}

/// A full-grid sweep serializes to byte-identical CSV under 1, 4, and 8
/// worker threads.
#[test]
fn determinism_across_thread_counts() {
    let config = SweepConfig {
        gamma: 1.0,
        lambda_lo: 0.0,
        lambda_hi: 1.5,
        steps: 151,
        block_len_max: 10,
        fit_block_min: 1,
        quad_tol: 1e-12,
    };
    let mut renderings = Vec::new();
    for threads in [1usize, 4, 8] {
        let pool = ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let result = pool.install(|| sweep(&config)).unwrap();
        assert!(result.failures.is_empty(), "failures: {:?}", result.failures);
        renderings.push(sweep_csv(&result));
    }
    assert_eq!(renderings[0], renderings[1], "1-thread vs 4-thread CSV differ");
    assert_eq!(renderings[0], renderings[2], "1-thread vs 8-thread CSV differ");
    println!(
        "PASS determinism_across_thread_counts: {} bytes of CSV identical at 1/4/8 threads",
        renderings[0].len()
    );
}
