//! Coverage of a window by balls around near-curve rational points, and
//! calibration of the constants that make the coverage statement testable.
//!
//! Around every counted point (p₁+θ₁)/q place a ball of radius C₁/(Q²δ).
//! The claim under test: once the cell (Q, δ) is admissible — k₁/Q ≤ δ ≤ k₂
//! and Q is past a threshold Q₀ — the union of those balls fills at least
//! half of any window, for every shift. The constants k₁, k₂, C₁, Q₀ are not
//! god-given; [`calibrate`] searches a logarithmic lattice for values that
//! make every admissible cell pass and records the evidence.

use alloc::string::String;
use alloc::vec::Vec;

use crate::bounds::Grid;
use crate::counting::{enumerate_points, CountQuery, Shift};
use crate::curve::PlanarCurve;
use crate::error::{Error, Result};
use crate::num::Interval;

/// Ten shifts exercised by the coverage checks: the zero shift, integer
/// shifts (coverage is shift-periodic only in θ₁, not θ₂), simple rationals,
/// and irrational pairs. A finite stand-in for "every shift".
pub const CANONICAL_SHIFTS: [Shift; 10] = [
    Shift { x: 0.0, y: 0.0 },
    Shift { x: 1.0, y: 0.0 },
    Shift { x: 0.0, y: 1.0 },
    Shift { x: 3.0, y: -2.0 },
    Shift { x: -1.0, y: 2.0 },
    Shift { x: 0.5, y: 0.25 },
    Shift { x: 0.25, y: 0.75 },
    Shift { x: 0.7, y: -0.3 },
    Shift { x: 0.41421356, y: 0.57735027 },
    Shift { x: 0.6180339887, y: 0.2360679775 },
];

/// Shrink factors tried by [`calibrate`], best first. All sit below 1/6,
/// the ceiling the witness-side arithmetic imposes.
const C0_LATTICE: [f64; 4] = [0.165, 0.15, 0.125, 0.1];

/// Coverage of one window at one cell: the merged ball union and its share.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoverReport {
    pub q_scale: f64,
    pub delta: f64,
    pub window: Interval,
    /// Ball-radius constant: each ball has radius `c1_const`/(Q²δ).
    pub c1_const: f64,
    /// Number of counted points the balls are centered on.
    pub count: u64,
    /// Sorted, pairwise disjoint intervals covering ∪ balls ∩ window.
    pub merged: Vec<Interval>,
    /// Total length of `merged`.
    pub measure: f64,
    /// measure / |window|, in [0, 1].
    pub ratio: f64,
}

impl CoverReport {
    /// The count bound the coverage implies: N ≥ measure·Q²δ/(2C₁), because
    /// N balls of radius C₁/(Q²δ) cannot cover more than N·2C₁/(Q²δ).
    pub fn implied_count_floor(&self) -> f64 {
        self.measure * self.q_scale * self.q_scale * self.delta / (2.0 * self.c1_const)
    }
}

/// Merge a family of intervals clipped to `window`: sort by left end and
/// sweep, coalescing touching pieces. Returns the merged list and its total
/// length.
pub(crate) fn sweep_union(mut pieces: Vec<Interval>, window: Interval) -> (Vec<Interval>, f64) {
    pieces.retain(|p| p.hi > window.lo && p.lo < window.hi);
    for p in &mut pieces {
        *p = Interval {
            lo: p.lo.max(window.lo),
            hi: p.hi.min(window.hi),
        };
    }
    pieces.sort_unstable_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
    let mut merged: Vec<Interval> = Vec::new();
    for p in pieces {
        match merged.last_mut() {
            Some(last) if p.lo <= last.hi => {
                if p.hi > last.hi {
                    last.hi = p.hi;
                }
            }
            _ => merged.push(p),
        }
    }
    let measure = merged.iter().map(Interval::len).sum();
    (merged, measure)
}

/// Measure the part of `window` covered by balls of radius `c1_const`/(Q²δ)
/// around every counted point of the cell.
pub fn union_measure(
    curve: &PlanarCurve,
    shift: Shift,
    q_scale: f64,
    delta: f64,
    window: Interval,
    c1_const: f64,
) -> Result<CoverReport> {
    if !(c1_const.is_finite() && c1_const > 0.0) {
        return Err(Error::Domain("ball constant must be positive and finite"));
    }
    if window.len() <= 0.0 {
        return Err(Error::Domain("window must have positive length"));
    }
    let dom = curve.domain();
    if !(dom.contains(window.lo) && dom.contains(window.hi)) {
        return Err(Error::Domain("window must lie inside the curve domain"));
    }
    let query = CountQuery::new(q_scale, delta)
        .with_shift(shift)
        .with_window(window);
    let points = enumerate_points(curve, &query)?;
    let radius = c1_const / (q_scale * q_scale * delta);
    let balls: Vec<Interval> = points
        .iter()
        .map(|p| Interval {
            lo: p.x - radius,
            hi: p.x + radius,
        })
        .collect();
    let count = points.len() as u64;
    let (merged, measure) = sweep_union(balls, window);
    debug_assert!(measure <= count as f64 * 2.0 * radius * (1.0 + 1e-9) + 1e-300);
    let ratio = measure / window.len();
    Ok(CoverReport {
        q_scale,
        delta,
        window,
        c1_const,
        count,
        merged,
        measure,
        ratio,
    })
}

/// One grid cell's worth of calibration evidence.
#[derive(Clone, Copy, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvidenceCell {
    pub q_scale: f64,
    pub delta: f64,
    /// Whether the cell is in the regime the record promises anything about:
    /// k₁/Q ≤ δ ≤ k₂ and Q > Q₀.
    pub required: bool,
    /// Worst coverage ratio across the shift set; evaluated only on
    /// required cells.
    pub min_ratio: Option<f64>,
    /// Required cells pass when min_ratio ≥ 1/2; others pass vacuously.
    pub pass: bool,
}

/// Calibrated coverage constants for one curve, with per-cell evidence.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CalibrationRecord {
    /// Printable identity of the curve the record was calibrated on.
    pub curve_id: String,
    /// Admissibility window: cells need k₁/Q ≤ δ ≤ k₂.
    pub k1: f64,
    pub k2: f64,
    /// Ball-radius constant 3c₂/(c₁·c₀⁸), derived from c₀.
    pub c1_const: f64,
    /// Cells must have Q > Q₀. Always at least k₁/k₂ so that admissible
    /// cells exist past it.
    pub q0: f64,
    /// Shrink factor the witness machinery runs at.
    pub c0: f64,
    /// Window the evidence was gathered on.
    pub window: Interval,
    pub evidence: Vec<EvidenceCell>,
}

impl CalibrationRecord {
    /// Re-check everything the record asserts about itself: the arithmetic
    /// constraints tying c₀, k₁, and C₁ to the curve's curvature range, the
    /// admissibility geometry, and the evidence verdicts.
    pub fn check_constraints(&self, curve: &PlanarCurve) -> Result<()> {
        let (c1, c2) = curve.curvature_bounds()?;
        if !(self.c0 > 0.0 && self.c0 < 1.0 / 6.0) {
            return Err(Error::Calibration("shrink factor must lie below 1/6"));
        }
        let c0_2 = self.c0 * self.c0;
        let c0_4 = c0_2 * c0_2;
        let expect = 3.0 * c2 / (c1 * c0_4 * c0_4);
        if !((self.c1_const - expect).abs() <= 1e-9 * expect) {
            return Err(Error::Calibration("ball constant does not match the curvature data"));
        }
        if !(self.k1 > 0.0 && self.k2 > 0.0 && self.k2 <= 0.5) {
            return Err(Error::Calibration("admissibility constants are out of range"));
        }
        // Rounding must leave the residual inequality strict: c₂C₁² < k₁³.
        if !(c2 * self.c1_const * self.c1_const / (2.0 * self.k1 * self.k1 * self.k1) < 0.5) {
            return Err(Error::Calibration("k1 is too small for the ball constant"));
        }
        if !(self.k1 / self.q0 <= self.k2 * (1.0 + 1e-12)) {
            return Err(Error::Calibration("no admissible accuracy exists at the threshold scale"));
        }
        if self.evidence.iter().any(|c| !c.pass) {
            return Err(Error::Calibration("record contains failing evidence cells"));
        }
        Ok(())
    }
}

/// Search for coverage constants that make every admissible cell of `grid`
/// reach ratio ≥ 1/2 on `window` for every shift in `shifts`.
///
/// The search walks shrink factors downward and k₁ upward over a
/// half-dyadic lattice, discards combinations whose arithmetic constraints
/// already fail (no enumeration spent), then evaluates coverage on the
/// surviving cells, raising Q₀ past failing scales when possible. The first
/// fully passing combination wins; exhausting the lattice is a genuine
/// falsification signal and errors out.
pub fn calibrate(
    curve: &PlanarCurve,
    shifts: &[Shift],
    window: Interval,
    grid: &Grid,
) -> Result<CalibrationRecord> {
    if shifts.is_empty() {
        return Err(Error::Domain("calibration needs at least one shift"));
    }
    let (c1, c2) = curve.curvature_bounds()?;
    let qs = grid.q_values();
    let q_min = qs[0];
    let q_max = qs[qs.len() - 1];
    if !(q_max >= 8.0 * q_min * (1.0 - 1e-12)) {
        return Err(Error::Precondition(
            "calibration grid must span at least three doublings of Q",
        ));
    }
    let dom = curve.domain();
    if !(dom.contains(window.lo) && dom.contains(window.hi)) || window.len() <= 0.0 {
        return Err(Error::Domain("window must lie inside the curve domain"));
    }

    let k2 = 0.5;
    for &c0 in &C0_LATTICE {
        let c0_2 = c0 * c0;
        let c0_4 = c0_2 * c0_2;
        let c1_const = 3.0 * c2 / (c1 * c0_4 * c0_4);
        for j in 10..=22u32 {
            for k1 in [(1u64 << j) as f64, 1.5 * (1u64 << j) as f64] {
                if !(c2 * c1_const * c1_const / (2.0 * k1 * k1 * k1) < 0.5) {
                    continue;
                }
                if let Some(record) =
                    try_constants(curve, shifts, window, grid, c0, k1, k2, c1_const)?
                {
                    return Ok(record);
                }
                // Larger k1 only shrinks the admissible region further once
                // coverage itself is what failed; move to the next shrink
                // factor unless nothing was admissible at all.
                if k1 / k2 > q_max {
                    break;
                }
            }
            if k1_exhausted(q_max, j, k2) {
                break;
            }
        }
    }
    Err(Error::Calibration(
        "no covering constants found within the search lattice",
    ))
}

fn k1_exhausted(q_max: f64, j: u32, k2: f64) -> bool {
    (1u64 << j) as f64 / k2 > q_max
}

/// Evaluate one (c₀, k₁, k₂) candidate: find the least Q₀ whose surviving
/// admissible cells all pass, or `None` when coverage fails everywhere.
#[allow(clippy::too_many_arguments)]
fn try_constants(
    curve: &PlanarCurve,
    shifts: &[Shift],
    window: Interval,
    grid: &Grid,
    c0: f64,
    k1: f64,
    k2: f64,
    c1_const: f64,
) -> Result<Option<CalibrationRecord>> {
    let qs = grid.q_values();
    let ds = grid.delta_values();
    let admissible =
        |q: f64, d: f64| -> bool { d * q >= k1 * (1.0 - 1e-12) && d <= k2 * (1.0 + 1e-12) };

    // Worst ratio per admissible cell, computed lazily and cached across
    // threshold candidates.
    let mut cache: Vec<Vec<Option<Option<f64>>>> = alloc::vec![alloc::vec![None; ds.len()]; qs.len()];
    let mut min_ratio = |qi: usize, di: usize| -> Result<Option<f64>> {
        if cache[qi][di].is_none() {
            let mut worst: Option<f64> = None;
            for &shift in shifts {
                let rep = union_measure(curve, shift, qs[qi], ds[di], window, c1_const)?;
                worst = Some(worst.map_or(rep.ratio, |w: f64| w.min(rep.ratio)));
                if rep.ratio < 0.5 - 1e-12 {
                    break;
                }
            }
            cache[qi][di] = Some(worst);
        }
        Ok(cache[qi][di].expect("just filled"))
    };

    let mut thresholds: Vec<f64> = alloc::vec![k1 / k2];
    thresholds.extend(qs.iter().copied().filter(|&q| q > k1 / k2));
    for q0 in thresholds {
        let mut any_required = false;
        let mut all_pass = true;
        for (qi, &q) in qs.iter().enumerate() {
            if q <= q0 {
                continue;
            }
            for (di, &d) in ds.iter().enumerate() {
                if !admissible(q, d) {
                    continue;
                }
                any_required = true;
                match min_ratio(qi, di)? {
                    Some(r) if r >= 0.5 - 1e-12 => {}
                    _ => {
                        all_pass = false;
                    }
                }
            }
            if !all_pass {
                break;
            }
        }
        if !any_required {
            // Nothing left above this threshold; larger thresholds only
            // shrink the evidence further.
            return Ok(None);
        }
        if !all_pass {
            continue;
        }
        let mut evidence = Vec::with_capacity(qs.len() * ds.len());
        for (qi, &q) in qs.iter().enumerate() {
            for (di, &d) in ds.iter().enumerate() {
                let required = q > q0 && admissible(q, d);
                let ratio = if required { min_ratio(qi, di)? } else { None };
                evidence.push(EvidenceCell {
                    q_scale: q,
                    delta: d,
                    required,
                    min_ratio: ratio,
                    pass: !required || ratio.is_some_and(|r| r >= 0.5 - 1e-12),
                });
            }
        }
        return Ok(Some(CalibrationRecord {
            curve_id: curve.describe(),
            k1,
            k2,
            c1_const,
            q0,
            c0,
            window,
            evidence,
        }));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_and_saturated_covers() {
        let c = PlanarCurve::parse("parabola@[0,2]").unwrap();
        // Q = 1 leaves only q = 2, and [0.51, 0.74] holds no half-integer.
        let rep = union_measure(
            &c,
            Shift::ZERO,
            1.0,
            0.25,
            Interval::new(0.51, 0.74).unwrap(),
            1.0,
        )
        .unwrap();
        assert_eq!(rep.count, 0);
        assert!(rep.merged.is_empty());
        assert_eq!(rep.measure, 0.0);
        assert_eq!(rep.ratio, 0.0);

        // A single point at the window midpoint with radius = |window| covers
        // everything: x = 1 is the only counted abscissa in [0.9, 1.1].
        let j = Interval::new(0.9, 1.1).unwrap();
        let rep = union_measure(&c, Shift::ZERO, 1.0, 0.25, j, 0.25 * 0.2).unwrap();
        assert_eq!(rep.count, 1);
        assert_eq!(rep.merged.len(), 1);
        assert!((rep.measure - j.len()).abs() < 1e-15);
        assert!((rep.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_clips_merges_and_respects_the_ball_total() {
        let c = PlanarCurve::parse("parabola@[0,2]").unwrap();
        let j = Interval::new(0.0, 2.0).unwrap();
        // Counted points sit at x = 0, 1, 2 (even p1 with q = 2). Radius 0.3
        // keeps the balls disjoint after clipping.
        let rep = union_measure(&c, Shift::ZERO, 1.0, 0.26, j, 0.26 * 0.3).unwrap();
        assert_eq!(rep.count, 3);
        assert_eq!(rep.merged.len(), 3);
        assert!((rep.measure - 1.2).abs() < 1e-12);
        assert!((rep.ratio - 0.6).abs() < 1e-12);
        for w in rep.merged.windows(2) {
            assert!(w[0].hi < w[1].lo);
        }
        for m in &rep.merged {
            assert!(m.lo >= j.lo - 1e-15 && m.hi <= j.hi + 1e-15);
        }
        assert!(rep.count as f64 * 2.0 * 0.3 >= rep.measure - 1e-12);
        assert!(rep.implied_count_floor() <= rep.count as f64 + 1e-9);

        // Radius 0.6 makes neighbors touch and the union saturate.
        let rep = union_measure(&c, Shift::ZERO, 1.0, 0.26, j, 0.26 * 0.6).unwrap();
        assert_eq!(rep.merged.len(), 1);
        assert!((rep.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn union_measure_validates_its_inputs() {
        let c = PlanarCurve::parse("parabola@[0,1]").unwrap();
        let j = Interval::new(0.2, 0.4).unwrap();
        assert!(matches!(
            union_measure(&c, Shift::ZERO, 16.0, 0.25, j, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            union_measure(&c, Shift::ZERO, 16.0, 0.25, Interval::new(0.9, 1.2).unwrap(), 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            union_measure(&c, Shift::ZERO, 16.0, 0.7, j, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn sweep_measure_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        let window = Interval::new(0.0, 1.0).unwrap();
        for _ in 0..12 {
            let n_ivals = rng.random_range(1..40usize);
            let pieces: Vec<Interval> = (0..n_ivals)
                .map(|_| {
                    let c: f64 = rng.random_range(-0.1..1.1);
                    let r: f64 = rng.random_range(0.001..0.15);
                    Interval {
                        lo: c - r,
                        hi: c + r,
                    }
                })
                .collect();
            let (merged, measure) = sweep_union(pieces.clone(), window);
            for w in merged.windows(2) {
                assert!(w[0].hi < w[1].lo);
            }

            let samples = 1_000_000u32;
            let mut hits = 0u32;
            for _ in 0..samples {
                let x: f64 = rng.random_range(0.0..1.0);
                if pieces.iter().any(|p| p.lo <= x && x <= p.hi) {
                    hits += 1;
                }
            }
            let p = hits as f64 / samples as f64;
            let se = (p * (1.0 - p) / samples as f64).sqrt().max(1e-6);
            assert!(
                (p * window.len() - measure).abs() <= 3.0 * se * window.len() + 1e-9,
                "MC {p} vs sweep {measure}"
            );
        }
    }

    #[test]
    fn calibration_finds_the_frozen_constants_for_the_default_curve() {
        let c = PlanarCurve::parse("poly:[0,0,0.005]@[0,1]").unwrap();
        let shifts = [
            Shift::ZERO,
            Shift::new(0.41421356, 0.57735027),
            Shift::new(0.5, 0.25),
        ];
        let window = Interval::new(0.45, 0.4505).unwrap();
        let grid = Grid::dyadic(13..=16, 1..=3).unwrap();
        let rec = calibrate(&c, &shifts, window, &grid).unwrap();
        assert_eq!(rec.c0, 0.165);
        assert_eq!(rec.k1, 8192.0);
        assert_eq!(rec.k2, 0.5);
        assert_eq!(rec.q0, 16384.0);
        let c0_8 = rec.c0.powi(8);
        assert!((rec.c1_const - 3.0 / c0_8).abs() < 1e-9 * rec.c1_const);
        rec.check_constraints(&c).unwrap();
        let required: Vec<_> = rec.evidence.iter().filter(|e| e.required).collect();
        assert_eq!(required.len(), 5);
        for cell in required {
            assert!(cell.pass);
            assert!(cell.min_ratio.unwrap() >= 0.5);
        }
    }

    #[test]
    fn calibration_refusals() {
        let line = PlanarCurve::parse("line@[0,1]").unwrap();
        let grid = Grid::dyadic(4..=7, 1..=3).unwrap();
        let j = Interval::new(0.2, 0.4).unwrap();
        assert!(matches!(
            calibrate(&line, &[Shift::ZERO], j, &grid),
            Err(Error::DegenerateCurvature)
        ));

        let c = PlanarCurve::parse("parabola@[0,1]").unwrap();
        // Span of Q too small to say anything about scaling.
        let narrow = Grid::dyadic(8..=10, 1..=3).unwrap();
        assert!(matches!(
            calibrate(&c, &[Shift::ZERO], j, &narrow),
            Err(Error::Precondition(_))
        ));
        // Wide enough span, but every k1 in the lattice exceeds the grid's
        // reach: nothing is ever admissible.
        assert!(matches!(
            calibrate(&c, &[Shift::ZERO], j, &grid),
            Err(Error::Calibration(_))
        ));
        assert!(matches!(
            calibrate(&c, &[], j, &grid),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn canonical_shift_set_is_mixed() {
        assert_eq!(CANONICAL_SHIFTS.len(), 10);
        assert_eq!(CANONICAL_SHIFTS[0], Shift::ZERO);
        let integral = CANONICAL_SHIFTS
            .iter()
            .filter(|s| s.x.fract() == 0.0 && s.y.fract() == 0.0)
            .count();
        assert!(integral >= 3);
        assert!(integral < CANONICAL_SHIFTS.len());
    }
}
