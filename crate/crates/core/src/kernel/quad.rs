//! Globally adaptive panel Gauss-Legendre quadrature for complex-valued
//! integrands that are analytic inside every panel.
//!
//! Callers supply the interior points where the integrand is discontinuous or
//! singular; panels never straddle them and Gauss nodes never touch panel
//! ends, so one-sided limits at pre-split points are enough. Refinement
//! always bisects the panel with the largest error estimate until the summed
//! estimate drops below the requested absolute tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::Real;

const GL_ORDER: usize = 15;
const MAX_PANELS: usize = 1 << 20;
/// When the summed error estimate sits at this multiple of machine epsilon,
/// further bisection cannot help and the requested tolerance is unreachable.
const ROUNDOFF_ULPS: f64 = 64.0;

/// Nodes and weights of the `GL_ORDER`-point rule on [-1, 1], computed once by
/// Newton iteration on the Legendre recurrence.
fn gauss_legendre_f64() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut xs = vec![0.0; n];
        let mut ws = vec![0.0; n];
        for i in 0..n {
            // Chebyshev-flavored initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..60 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            xs[i] = x;
            ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (xs, ws)
    })
}

/// Value and derivative of the Legendre polynomial `P_n` at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

struct Rule<T> {
    x: Vec<T>,
    w: Vec<T>,
}

impl<T: Real> Rule<T> {
    fn new() -> Self {
        let (xs, ws) = gauss_legendre_f64();
        Rule {
            x: xs.iter().map(|&v| T::of(v)).collect(),
            w: ws.iter().map(|&v| T::of(v)).collect(),
        }
    }

    fn apply<F: Fn(T) -> (T, T)>(&self, f: &F, a: T, b: T) -> (T, T) {
        let half = T::of(0.5) * (b - a);
        let mid = T::of(0.5) * (a + b);
        let mut re = T::zero();
        let mut im = T::zero();
        for (&x, &w) in self.x.iter().zip(&self.w) {
            let (fr, fi) = f(mid + half * x);
            re += w * fr;
            im += w * fi;
        }
        (re * half, im * half)
    }
}

/// Outcome of [`adaptive_complex`].
pub(crate) struct Quadrature<T> {
    pub re: T,
    pub im: T,
}

/// What the summed error estimate was when refinement gave up.
#[derive(Debug)]
pub(crate) struct QuadratureFailure<T> {
    pub err: T,
}

/// A refined panel: the two-half estimate of its integral and the deviation
/// from the single-panel estimate. Ordered by error (ties by position) so a
/// max-heap always pops the worst panel, deterministically.
struct Panel<T> {
    a: T,
    b: T,
    re: T,
    im: T,
    err: T,
}

impl<T: Real> Panel<T> {
    fn evaluate<F: Fn(T) -> (T, T)>(rule: &Rule<T>, f: &F, a: T, b: T) -> Self {
        let (wr, wi) = rule.apply(f, a, b);
        let mid = T::of(0.5) * (a + b);
        let (lr, li) = rule.apply(f, a, mid);
        let (rr, ri) = rule.apply(f, mid, b);
        Panel {
            a,
            b,
            re: lr + rr,
            im: li + ri,
            err: (lr + rr - wr).abs() + (li + ri - wi).abs(),
        }
    }
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.a == other.a
    }
}

impl<T: Real> Eq for Panel<T> {}

impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .partial_cmp(&other.err)
            .unwrap_or(Ordering::Equal)
            .then_with(|| {
                self.a
                    .partial_cmp(&other.a)
                    .unwrap_or(Ordering::Equal)
                    .reverse()
            })
    }
}

/// Integrates `f` over `[edges[0], edges[last]]` with panels pre-split at the
/// interior `edges`, bisecting the worst panel until the absolute error
/// estimate is below `tol`.
pub(crate) fn adaptive_complex<T: Real, F: Fn(T) -> (T, T)>(
    f: &F,
    edges: &[T],
    tol: T,
) -> Result<Quadrature<T>, QuadratureFailure<T>> {
    debug_assert!(edges.len() >= 2);
    let rule = Rule::new();

    let mut heap: BinaryHeap<Panel<T>> = BinaryHeap::with_capacity(64);
    let mut total_err = T::zero();
    let mut magnitude = T::zero();
    for pair in edges.windows(2) {
        if pair[1] > pair[0] {
            let panel = Panel::evaluate(&rule, f, pair[0], pair[1]);
            total_err += panel.err;
            magnitude += panel.re.abs() + panel.im.abs() + (panel.b - panel.a);
            heap.push(panel);
        }
    }

    loop {
        if total_err <= tol {
            // incremental bookkeeping can drift; confirm with a fresh sum
            total_err = heap.iter().fold(T::zero(), |acc, p| acc + p.err);
            if total_err <= tol {
                break;
            }
        }
        // the tolerance is unreachable once the estimate sits at the
        // roundoff floor of the accumulated values
        if total_err <= T::default_epsilon() * T::of(ROUNDOFF_ULPS) * (T::one() + magnitude)
            || heap.len() >= MAX_PANELS
        {
            return Err(QuadratureFailure { err: total_err });
        }
        let worst = heap.pop().expect("non-empty panel heap");
        let mid = T::of(0.5) * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // the panel has collapsed to adjacent floats
            return Err(QuadratureFailure { err: total_err });
        }
        let left = Panel::evaluate(&rule, f, worst.a, mid);
        let right = Panel::evaluate(&rule, f, mid, worst.b);
        total_err += left.err + right.err - worst.err;
        magnitude += left.re.abs() + left.im.abs() + right.re.abs() + right.im.abs()
            - worst.re.abs()
            - worst.im.abs();
        heap.push(left);
        heap.push(right);
    }

    // deterministic final summation: panels in position order
    let mut panels: Vec<Panel<T>> = heap.into_vec();
    panels.sort_by(|x, y| x.a.partial_cmp(&y.a).expect("finite panel edges"));
    let mut re = T::zero();
    let mut im = T::zero();
    for p in &panels {
        re += p.re;
        im += p.im;
    }
    Ok(Quadrature { re, im })
}
