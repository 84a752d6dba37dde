//! Fejér-kernel smoothing of the point count.
//!
//! K_M(x) = (sin(πMx) / (M·sin(πx)))² is 1-periodic, nonnegative, equals 1 at
//! integers, and on the band ‖x‖ ≤ 1/(2M) stays at least 4/π². Summing it
//! over every numerator in the window therefore majorizes the sharp count:
//! with M = ⌊1/(2δ)⌋ every counted point contributes at least 4/π², and all
//! other numerators contribute nonnegatively.

use crate::counting::{self, CountQuery};
use crate::curve::PlanarCurve;
use crate::fx;
use crate::{Error, Result};

/// Guaranteed lower bound for K_M on ‖x‖ ≤ 1/(2M): sin(πx) ≤ πx and
/// sin(u)/u ≥ 2/π on [0, π/2] give K_M ≥ (2/π)² there.
pub const BAND_FLOOR: f64 = 4.0 / (core::f64::consts::PI * core::f64::consts::PI);

/// Kernel order matched to a band half-width: M = ⌊1/(2δ)⌋.
pub fn kernel_order(delta: f64) -> Result<u64> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::Domain("delta must lie in (0, 1/2]"));
    }
    Ok(fx::floor(1.0 / (2.0 * delta)) as u64)
}

/// K_M(x), evaluated at the reduced argument x − round(x). The only special
/// case is an argument exactly on the lattice, where the limit is 1.
pub fn fejer_eval(order: u64, x: f64) -> f64 {
    debug_assert!(order >= 1);
    let r = x - fx::round(x);
    if r == 0.0 {
        return 1.0;
    }
    let m = order as f64;
    let num = fx::sin(core::f64::consts::PI * m * r);
    let den = m * fx::sin(core::f64::consts::PI * r);
    let ratio = num / den;
    ratio * ratio
}

/// Σ K_M(q·f(x) − θ₂) over every numerator in the window, M = ⌊1/(2δ)⌋.
/// Shares the candidate walk (and budget accounting) with the naive count,
/// so the two sums range over identical index sets.
pub fn smoothed_count(curve: &PlanarCurve, query: &CountQuery) -> Result<f64> {
    let order = kernel_order(query.delta)?;
    let mut total = 0.0f64;
    counting::for_each_in_window(curve, query, &mut |_q, qf, _p1, x| {
        total += fejer_eval(order, qf * curve.eval(x) - query.shift.y);
    })?;
    Ok(total)
}
