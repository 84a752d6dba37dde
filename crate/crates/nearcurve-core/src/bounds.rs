//! Ratio reports for the counting laws over `(Q, δ)` grids.
//!
//! The upper law says the band count on a curved graph stays within a
//! constant of `δQ² + δ^{-1/2}Q`; the lower law says admissible cells keep
//! `N/(δQ²)` above a constant. Neither law names its constant, so the
//! checkable surrogate is boundedness and scale stability of the ratios,
//! evaluated cell by cell and reported with an admissibility mask.

use alloc::vec::Vec;

use crate::counting::{count_fast, CountQuery, Shift};
use crate::curve::PlanarCurve;
use crate::error::{Error, Result};
use crate::fx;
use crate::num::{solve3, Interval};

/// Evaluation grid: the cross product of denominator scales and half-widths.
#[derive(Clone, Debug)]
pub struct Grid {
    q_values: Vec<f64>,
    delta_values: Vec<f64>,
}

impl Grid {
    /// Builds a grid from explicit axis values. Both lists are sorted
    /// ascending and deduplicated; scales must be ≥ 1 and half-widths in
    /// (0, 1/2].
    pub fn new(q_values: &[f64], delta_values: &[f64]) -> Result<Grid> {
        if q_values.is_empty() || delta_values.is_empty() {
            return Err(Error::Domain("grid axes must be nonempty"));
        }
        for &q in q_values {
            if !q.is_finite() || q < 1.0 {
                return Err(Error::Domain("grid q values must be finite and at least 1"));
            }
        }
        for &d in delta_values {
            if !(d > 0.0 && d <= 0.5) {
                return Err(Error::Domain("grid delta values must lie in (0, 1/2]"));
            }
        }
        let mut q = q_values.to_vec();
        let mut d = delta_values.to_vec();
        q.sort_by(f64::total_cmp);
        q.dedup();
        d.sort_by(f64::total_cmp);
        d.dedup();
        Ok(Grid {
            q_values: q,
            delta_values: d,
        })
    }

    /// Dyadic grid: `Q = 2^e` for `e` in `q_exps`, `δ = 2^-e` for `e` in
    /// `delta_exps`.
    pub fn dyadic(
        q_exps: core::ops::RangeInclusive<u32>,
        delta_exps: core::ops::RangeInclusive<u32>,
    ) -> Result<Grid> {
        let q: Vec<f64> = q_exps.map(|e| (1u64 << e) as f64).collect();
        let d: Vec<f64> = delta_exps.map(|e| 1.0 / (1u64 << e.min(63)) as f64).collect();
        Grid::new(&q, &d)
    }

    pub fn q_values(&self) -> &[f64] {
        &self.q_values
    }

    pub fn delta_values(&self) -> &[f64] {
        &self.delta_values
    }
}

/// One evaluated grid cell.
#[derive(Clone, Copy, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundCell {
    pub q_scale: f64,
    pub delta: f64,
    pub count: u64,
    /// Value of the comparison formula at this cell.
    pub bound: f64,
    /// `count / bound`.
    pub ratio: f64,
    /// Whether the cell satisfies `k1/Q ≤ δ ≤ k2` and `Q > Q0` for the
    /// constants the report was built with (always true when the formula
    /// has no admissibility notion).
    pub admissible: bool,
}

/// Ratio report over a grid, cells ordered by (Q, δ) ascending.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundReport {
    pub cells: Vec<BoundCell>,
    /// Largest ratio over all cells.
    pub sup_ratio: f64,
    /// Smallest ratio over admissible cells.
    pub inf_ratio: f64,
    /// Largest ratio over cells whose Q lies in the lower half of the Q
    /// axis. With an odd number of Q values the middle column counts toward
    /// both halves.
    pub sup_small_q: f64,
    /// Largest ratio over cells in the upper half of the Q axis.
    pub sup_large_q: f64,
}

fn build_report(cells: Vec<BoundCell>, grid: &Grid) -> BoundReport {
    let qs = grid.q_values();
    let mid_lo = qs[(qs.len() - 1) / 2];
    let mid_hi = qs[qs.len() / 2];
    let mut sup_ratio: f64 = 0.0;
    let mut inf_ratio = f64::INFINITY;
    let mut sup_small_q: f64 = 0.0;
    let mut sup_large_q: f64 = 0.0;
    for c in &cells {
        sup_ratio = sup_ratio.max(c.ratio);
        if c.admissible {
            inf_ratio = inf_ratio.min(c.ratio);
        }
        if c.q_scale <= mid_lo {
            sup_small_q = sup_small_q.max(c.ratio);
        }
        if c.q_scale >= mid_hi {
            sup_large_q = sup_large_q.max(c.ratio);
        }
    }
    BoundReport {
        cells,
        sup_ratio,
        inf_ratio,
        sup_small_q,
        sup_large_q,
    }
}

fn evaluate(
    curve: &PlanarCurve,
    shift: Shift,
    grid: &Grid,
    window: Option<Interval>,
    bound: impl Fn(f64, f64) -> f64,
    admissible: impl Fn(f64, f64) -> bool,
) -> Result<BoundReport> {
    let mut cells = Vec::with_capacity(grid.q_values().len() * grid.delta_values().len());
    for &q in grid.q_values() {
        for &d in grid.delta_values() {
            let mut query = CountQuery::new(q, d).with_shift(shift);
            if let Some(j) = window {
                query = query.with_window(j);
            }
            let count = count_fast(curve, &query)?;
            let b = bound(q, d);
            debug_assert!(b > 0.0, "comparison formula must be positive on the grid");
            cells.push(BoundCell {
                q_scale: q,
                delta: d,
                count,
                bound: b,
                ratio: count as f64 / b,
                admissible: admissible(q, d),
            });
        }
    }
    Ok(build_report(cells, grid))
}

fn refuse_flat(curve: &PlanarCurve) -> Result<()> {
    curve.curvature_bounds().map(|_| ()).map_err(|_| {
        Error::Domain(
            "curve has no curvature floor, so the bound law does not apply; \
             run the negative-control mode (forced / --allow-degenerate) to \
             watch the ratios grow instead",
        )
    })
}

/// Upper-law report: per-cell ratio `N / (δQ² + δ^{-1/2}Q)`.
///
/// Flat curves are refused, because for them the count is δ-independent and
/// the ratio grows without bound as δ shrinks; [`verify_upper_forced`] runs
/// the same evaluation anyway, as a negative control.
pub fn verify_upper(
    curve: &PlanarCurve,
    shift: Shift,
    grid: &Grid,
    window: Option<Interval>,
) -> Result<BoundReport> {
    refuse_flat(curve)?;
    verify_upper_forced(curve, shift, grid, window)
}

/// Negative-control variant of [`verify_upper`]: skips the curvature refusal
/// so flat curves can demonstrate the blowup the law forbids elsewhere.
pub fn verify_upper_forced(
    curve: &PlanarCurve,
    shift: Shift,
    grid: &Grid,
    window: Option<Interval>,
) -> Result<BoundReport> {
    evaluate(
        curve,
        shift,
        grid,
        window,
        |q, d| d * q * q + q / fx::sqrt(d),
        |_, _| true,
    )
}

/// Upper-law report under a Hölder assumption on the second derivative:
/// per-cell ratio against
/// `δQ² + δ^{-1/2}Q^{1/2+ε} + δ^{(φ-1)/2}Q^{(3-φ)/2}`,
/// with the third term replaced by `Q·ln(Q/δ)` at φ = 1.
pub fn verify_upper_lip(
    curve: &PlanarCurve,
    shift: Shift,
    grid: &Grid,
    window: Option<Interval>,
    phi: f64,
    epsilon: f64,
) -> Result<BoundReport> {
    refuse_flat(curve)?;
    if !(phi > 0.0 && phi <= 1.0) {
        return Err(Error::Domain("Hölder exponent must lie in (0, 1]"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Domain("epsilon must be positive"));
    }
    let (curve_phi, holder_const) = curve.d2_holder();
    if !holder_const.is_finite() || phi > curve_phi + 1e-12 {
        return Err(Error::Domain(
            "curve does not certify the requested Hölder class",
        ));
    }
    let at_one = (phi - 1.0).abs() <= 1e-12;
    evaluate(
        curve,
        shift,
        grid,
        window,
        move |q, d| {
            let head = d * q * q + fx::powf(q, 0.5 + epsilon) / fx::sqrt(d);
            let tail = if at_one {
                q * fx::ln(q / d)
            } else {
                fx::powf(d, (phi - 1.0) / 2.0) * fx::powf(q, (3.0 - phi) / 2.0)
            };
            head + tail
        },
        |_, _| true,
    )
}

/// Lower-law report: per-cell ratio `N/(δQ²)`, with the admissibility mask
/// `k1/Q ≤ δ ≤ k2` and `Q > q0`. `inf_ratio` is taken over admissible cells
/// only; a grid with none is refused.
pub fn verify_lower(
    curve: &PlanarCurve,
    shift: Shift,
    grid: &Grid,
    window: Option<Interval>,
    k1: f64,
    k2: f64,
    q0: f64,
) -> Result<BoundReport> {
    refuse_flat(curve)?;
    if !(k1 > 0.0 && k1.is_finite()) || !(k2 > 0.0 && k2 <= 0.5) || !(q0 >= 0.0) {
        return Err(Error::Domain(
            "lower-law constants must satisfy k1 > 0, 0 < k2 <= 1/2, q0 >= 0",
        ));
    }
    let report = evaluate(
        curve,
        shift,
        grid,
        window,
        |q, d| d * q * q,
        |q, d| d * q >= k1 * (1.0 - 1e-12) && d <= k2 * (1.0 + 1e-12) && q > q0,
    )?;
    if report.cells.iter().all(|c| !c.admissible) {
        return Err(Error::Insufficient("no admissible cells in grid"));
    }
    Ok(report)
}

/// Least-squares exponents `(α_Q, α_δ)` in
/// `log N ≈ α_Q·log Q + α_δ·log δ + const`, over admissible cells with at
/// least 100 points. Requires 16 such cells; a grid that varies only one
/// axis leaves the design rank-deficient and is reported as a conditioning
/// error.
pub fn fit_exponents(cells: &[BoundCell]) -> Result<(f64, f64)> {
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    let mut used = 0usize;
    for c in cells {
        if !c.admissible || c.count < 100 {
            continue;
        }
        used += 1;
        let row = [fx::ln(c.q_scale), fx::ln(c.delta), 1.0];
        let y = fx::ln(c.count as f64);
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += row[i] * row[j];
            }
            rhs[i] += row[i] * y;
        }
    }
    if used < 16 {
        return Err(Error::Insufficient(
            "need at least 16 admissible cells with 100 or more points",
        ));
    }
    let sol = solve3(&m, &rhs)
        .map_err(|_| Error::Conditioning("exponent fit design is rank-deficient"))?;
    Ok((sol[0], sol[1]))
}
