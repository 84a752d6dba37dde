//! Shared numeric primitives: nearest-integer distance, closed intervals with
//! a guarded membership test, and a pivoted 3×3 solver.

use crate::fx;
use crate::{Error, Result};

/// Absolute guard for boundary decisions.
///
/// Strict inequalities in the point-counting predicate are evaluated as
/// "strictly inside by more than this", and closed interval membership as
/// "inside up to this". Both counting routes and every verification layer on
/// top of them share the constant, so a point within 1e-12 of a boundary is
/// classified identically everywhere.
pub const TIE_GUARD: f64 = 1e-12;

/// Distance from `x` to the nearest integer, in [0, 1/2].
///
/// Computed from the fractional part rather than `round` so that the result
/// is exact whenever `x` is representable: `frac` is exact for |x| < 2^52 and
/// the smaller of `frac` and `1 - frac` is returned.
#[inline]
pub fn dist_to_nearest_int(x: f64) -> f64 {
    let frac = x - fx::floor(x);
    if frac <= 0.5 {
        frac
    } else {
        1.0 - frac
    }
}

/// A nonempty closed interval [lo, hi] with finite endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::Domain("interval endpoints must be finite with lo <= hi"));
        }
        Ok(Interval { lo, hi })
    }

    /// Like [`Interval::new`] but orders the endpoints first.
    pub fn spanning(a: f64, b: f64) -> Result<Self> {
        if a <= b {
            Interval::new(a, b)
        } else {
            Interval::new(b, a)
        }
    }

    #[inline]
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    #[inline]
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Closed membership with an absolute tolerance at both endpoints.
    #[inline]
    pub fn contains_guarded(&self, x: f64, guard: f64) -> bool {
        self.lo - guard <= x && x <= self.hi + guard
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo <= hi {
            Some(Interval { lo, hi })
        } else {
            None
        }
    }

    /// The concentric subinterval with `factor` times the length.
    pub fn shrink(&self, factor: f64) -> Interval {
        let mid = self.midpoint();
        let half = 0.5 * factor * self.len();
        Interval { lo: mid - half, hi: mid + half }
    }

    #[inline]
    pub fn clamp(&self, x: f64) -> f64 {
        x.max(self.lo).min(self.hi)
    }
}

/// Solves `a · x = b` for a 3×3 system by Gaussian elimination with partial
/// pivoting. Fails with [`Error::Conditioning`] when the best available pivot
/// is smaller than `1e-14` times the largest entry of the original matrix.
pub fn solve3(a: &[[f64; 3]; 3], b: &[f64; 3]) -> Result<[f64; 3]> {
    let mut m = *a;
    let mut rhs = *b;
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |acc, &v| acc.max(fx::abs(v)));
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Conditioning("zero or non-finite matrix"));
    }
    let tol = 1e-14 * scale;

    for col in 0..3 {
        let mut pivot_row = col;
        let mut pivot_abs = fx::abs(m[col][col]);
        for row in col + 1..3 {
            let cand = fx::abs(m[row][col]);
            if cand > pivot_abs {
                pivot_abs = cand;
                pivot_row = row;
            }
        }
        if pivot_abs < tol {
            return Err(Error::Conditioning("pivot below tolerance"));
        }
        if pivot_row != col {
            m.swap(col, pivot_row);
            rhs.swap(col, pivot_row);
        }
        for row in col + 1..3 {
            let factor = m[row][col] / m[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..3 {
                m[row][k] -= factor * m[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }

    let mut x = [0.0f64; 3];
    for row in (0..3).rev() {
        let mut acc = rhs[row];
        for k in row + 1..3 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_int_distance_basics() {
        assert_eq!(dist_to_nearest_int(0.0), 0.0);
        assert_eq!(dist_to_nearest_int(3.0), 0.0);
        assert_eq!(dist_to_nearest_int(-2.0), 0.0);
        assert_eq!(dist_to_nearest_int(0.5), 0.5);
        assert_eq!(dist_to_nearest_int(-0.5), 0.5);
        assert_eq!(dist_to_nearest_int(2.25), 0.25);
        assert_eq!(dist_to_nearest_int(-2.25), 0.25);
        assert_eq!(dist_to_nearest_int(7.75), 0.25);
    }

    #[test]
    fn nearest_int_distance_is_exact_near_integers() {
        // The distance must be bit-exact for whatever offset the float sum
        // actually lands on, never 1 - (1 - offset).
        let above = 5.0 + 1e-13;
        assert_eq!(dist_to_nearest_int(above), above - 5.0);
        let below = 5.0 - 1e-13;
        assert_eq!(dist_to_nearest_int(below), 5.0 - below);
        let neg = -5.0 + 1e-13;
        assert_eq!(dist_to_nearest_int(neg), neg + 5.0);
    }

    #[test]
    fn interval_construction_and_membership() {
        assert!(Interval::new(1.0, 0.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
        let j = Interval::new(0.25, 0.75).unwrap();
        assert!(j.contains(0.25));
        assert!(j.contains(0.75));
        assert!(!j.contains(0.75 + 1e-9));
        assert!(j.contains_guarded(0.75 + 1e-13, TIE_GUARD));
        assert!(!j.contains_guarded(0.75 + 1e-9, TIE_GUARD));
        assert_eq!(j.len(), 0.5);
        assert_eq!(j.midpoint(), 0.5);
    }

    #[test]
    fn interval_shrink_is_concentric() {
        let j = Interval::new(0.0, 1.0).unwrap();
        let inner = j.shrink(0.75);
        assert!((inner.lo - 0.125).abs() < 1e-15);
        assert!((inner.hi - 0.875).abs() < 1e-15);
    }

    #[test]
    fn solve3_recovers_known_solution() {
        let a = [[2.0, 1.0, -1.0], [-3.0, -1.0, 2.0], [-2.0, 1.0, 2.0]];
        let b = [8.0, -11.0, -3.0];
        let x = solve3(&a, &b).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
        assert!((x[2] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn solve3_rejects_singular() {
        let a = [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 1.0]];
        let b = [1.0, 2.0, 1.0];
        assert!(matches!(solve3(&a, &b), Err(Error::Conditioning(_))));
    }

    #[test]
    fn solve3_needs_pivoting() {
        // Leading zero forces a row swap.
        let a = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        let b = [5.0, 7.0, 9.0];
        let x = solve3(&a, &b).unwrap();
        assert_eq!(x, [7.0, 5.0, 9.0]);
    }
}
