//! Dense determinant machinery for the probability pipeline.
//!
//! Two interchangeable engines compute `det(I + S·G)` for every sign matrix
//! `S = diag(s)`:
//!
//! * a plain LU factorization per sign string, and
//! * a Gray-code walker that flips one sign at a time and tracks the
//!   determinant and inverse through rank-1 (Sherman-Morrison) updates,
//!   refreshing from a fresh factorization periodically and whenever an
//!   update denominator gets small.

use crate::Real;

/// In-place LU with partial pivoting on a row-major `n×n` buffer; returns the
/// determinant (0 on breakdown).
pub(crate) fn lu_det<T: Real>(a: &mut [T], n: usize) -> T {
    debug_assert_eq!(a.len(), n * n);
    let mut det = T::one();
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for row in (col + 1)..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == T::zero() {
            return T::zero();
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            det = -det;
        }
        let d = a[col * n + col];
        det *= d;
        for row in (col + 1)..n {
            let f = a[row * n + col] / d;
            if f != T::zero() {
                for k in (col + 1)..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
            }
        }
    }
    det
}

/// Pivots below this are treated as a numerically singular matrix when
/// building an inverse.
const PIVOT_FLOOR: f64 = 1e-250;

/// Gauss-Jordan inverse of the row-major matrix in `work` (destroyed), written
/// to `inv`. Returns the determinant, or `None` when a pivot collapses.
pub(crate) fn invert<T: Real>(work: &mut [T], n: usize, inv: &mut [T]) -> Option<T> {
    debug_assert_eq!(work.len(), n * n);
    debug_assert_eq!(inv.len(), n * n);
    inv.fill(T::zero());
    for i in 0..n {
        inv[i * n + i] = T::one();
    }
    let floor = T::of(PIVOT_FLOOR);
    let mut det = T::one();
    for col in 0..n {
        let mut piv = col;
        let mut best = work[col * n + col].abs();
        for row in (col + 1)..n {
            let v = work[row * n + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best <= floor {
            return None;
        }
        if piv != col {
            for k in 0..n {
                work.swap(col * n + k, piv * n + k);
                inv.swap(col * n + k, piv * n + k);
            }
            det = -det;
        }
        let d = work[col * n + col];
        det *= d;
        for k in 0..n {
            work[col * n + k] /= d;
            inv[col * n + k] /= d;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = work[row * n + col];
            if f != T::zero() {
                for k in 0..n {
                    work[row * n + k] -= f * work[col * n + k];
                    inv[row * n + k] -= f * inv[col * n + k];
                }
            }
        }
    }
    Some(det)
}

/// Rebuild the inverse after this many consecutive rank-1 updates.
const REFRESH_PERIOD: usize = 32;
/// Fall back to a fresh factorization when `|1 + δ·w|` drops below this.
const DENOMINATOR_FLOOR: f64 = 0.05;
/// Inverses with a larger condition estimate are not trusted for rank-1
/// updates; the walker then factorizes from scratch at every string until
/// the matrices leave the near-singular regime.
const CONDITION_CAP: f64 = 1e7;

pub(crate) struct GrayWalker<T> {
    n: usize,
    g: Vec<T>,
    signs: Vec<T>,
    inv: Vec<T>,
    det: T,
    inv_usable: bool,
    steps_since_refresh: usize,
    work: Vec<T>,
    col_buf: Vec<T>,
    row_buf: Vec<T>,
}

impl<T: Real> GrayWalker<T> {
    /// Starts at the all-plus sign string.
    pub fn new(g: Vec<T>, n: usize) -> Self {
        debug_assert_eq!(g.len(), n * n);
        let mut walker = GrayWalker {
            n,
            g,
            signs: vec![T::one(); n],
            inv: vec![T::zero(); n * n],
            det: T::zero(),
            inv_usable: false,
            steps_since_refresh: 0,
            work: vec![T::zero(); n * n],
            col_buf: vec![T::zero(); n],
            row_buf: vec![T::zero(); n],
        };
        walker.refresh();
        walker
    }

    pub fn det(&self) -> T {
        self.det
    }

    fn fill_m(&mut self) {
        let n = self.n;
        for i in 0..n {
            let s = self.signs[i];
            for j in 0..n {
                self.work[i * n + j] = s * self.g[i * n + j];
            }
            self.work[i * n + i] += T::one();
        }
    }

    fn refresh(&mut self) {
        self.fill_m();
        let scale_m = self
            .work
            .iter()
            .fold(T::zero(), |m, &v| m.max(v.abs()))
            .max(T::one());
        match invert(&mut self.work, self.n, &mut self.inv) {
            Some(det) => {
                self.det = det;
                let scale_inv = self.inv.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
                let condition = scale_m * scale_inv * T::of(self.n as f64);
                self.inv_usable = condition <= T::of(CONDITION_CAP);
            }
            None => {
                // numerically singular at this string: the determinant is
                // still well defined, the inverse is not
                self.fill_m();
                self.det = lu_det(&mut self.work, self.n);
                self.inv_usable = false;
            }
        }
        self.steps_since_refresh = 0;
    }

    /// Flips one sign; the determinant afterwards is `det(I + S'·G)`.
    pub fn flip(&mut self, bit: usize) {
        let n = self.n;
        let old = self.signs[bit];
        let delta = -old - old;
        if self.inv_usable && self.steps_since_refresh < REFRESH_PERIOD {
            let mut w = T::zero();
            for j in 0..n {
                w += self.g[bit * n + j] * self.inv[j * n + bit];
            }
            let den = T::one() + delta * w;
            if den.abs() >= T::of(DENOMINATOR_FLOOR) {
                for (i, slot) in self.col_buf.iter_mut().enumerate() {
                    *slot = self.inv[i * n + bit];
                }
                for j in 0..n {
                    let mut acc = T::zero();
                    for i in 0..n {
                        acc += self.g[bit * n + i] * self.inv[i * n + j];
                    }
                    self.row_buf[j] = acc;
                }
                let scale = delta / den;
                for i in 0..n {
                    let ci = self.col_buf[i] * scale;
                    if ci != T::zero() {
                        for j in 0..n {
                            self.inv[i * n + j] -= ci * self.row_buf[j];
                        }
                    }
                }
                self.det *= den;
                self.signs[bit] = -old;
                self.steps_since_refresh += 1;
                return;
            }
        }
        self.signs[bit] = -old;
        self.refresh();
    }
}
