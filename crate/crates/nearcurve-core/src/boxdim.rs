//! Diagnostic box-counting estimate for the dimension of the set of points
//! on the curve that are simultaneously well approximable.
//!
//! For an exponent v the set of interest collects the x where both ‖qx − θ₁‖
//! and ‖q·f(x) − θ₂‖ drop below q^{−v} for infinitely many q. Its dimension
//! is (2 − v)/(1 + v) on a nondegenerate curve, the value exposed here as
//! `target`. A computer only ever sees finitely many q, so this module counts
//! boxes over a finite snapshot instead: the union of the approximation
//! windows for q in the top dyadic block (⌊Q/2⌋, ⌊Q⌋]. Denominators far below
//! the cutoff carry no scaling information — their windows are so wide they
//! blanket the whole interval (every x satisfies ‖qx − θ₁‖ < q^{−v} once
//! q^{−v} > 1/2) — while a single dyadic block is exactly the scale layer the
//! limsup structure refines through, with window widths comparable to
//! Q^{−(1+v)}.
//!
//! Each window is resolved per numerator: inside the x-interval where
//! ‖qx − θ₁‖ < q^{−v}, the ordinate condition is linearized around the
//! interval midpoint and widened by the rigorous remainder bound
//! ½·q·sup|f″|·w², so the produced sub-intervals always cover the true set.
//! The widening is smaller than the window by a factor of order q^{−(1+v)}
//! and never moves a box count materially.
//!
//! The slope of log N(ε) against log(1/ε) is a diagnostic, not a
//! certification: finite truncations of a limsup set bias box counts upward,
//! and the regression averages across a crossover from the saturated coarse
//! scales to the resolved fine ones. Treat the numbers as a consistency
//! check against `target`, nothing stronger. Box counts are guaranteed
//! monotone only along nested scale refinements (each scale an integer
//! multiple of the next); the tests and the command line stick to
//! halving ladders.

use alloc::vec::Vec;

use crate::covering::sweep_union;
use crate::curve::PlanarCurve;
use crate::counting::Shift;
use crate::fx;
use crate::num::Interval;
use crate::psi::dimension_formula;
use crate::{Error, Result};

/// Work budget: numerator candidates, level probes, and per-scale interval
/// visits all charge against it.
pub const BOX_BUDGET: u64 = 2_000_000_000;

/// Cap on the number of cover sub-intervals held in memory at once.
const MAX_COVER_PIECES: usize = 10_000_000;

/// Result of one box-counting run.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DimensionDiagnostic {
    /// Approximation exponent (ψ(q) = q^{−v}).
    pub v: f64,
    /// Box side lengths, strictly decreasing.
    pub scales: Vec<f64>,
    /// Mesh boxes hit at each scale, aligned with `scales`.
    pub counts: Vec<u64>,
    /// Least-squares slope of log N(ε) against log(1/ε).
    pub slope: f64,
    /// The dimension formula value (2 − v)/(1 + v).
    pub target: f64,
}

/// Count mesh boxes over the top-block approximation windows at each scale
/// and regress the log-log slope.
///
/// `q_max` fixes the block (⌊q_max/2⌋, ⌊q_max⌋]. Every scale must lie in
/// [q_max^{−(1+v)}, 10⁻¹]: below the lower end the snapshot is not resolved,
/// above the upper end the counts only measure the window J. At least two
/// scales are required for the regression.
pub fn boxdim_diagnostic(
    curve: &PlanarCurve,
    shift: Shift,
    v: f64,
    q_max: f64,
    scales: &[f64],
) -> Result<DimensionDiagnostic> {
    let (_, c2) = curve.curvature_bounds()?;
    if !shift.x.is_finite() || !shift.y.is_finite() {
        return Err(Error::Domain("shift components must be finite"));
    }
    let target =
        dimension_formula(v).map_err(|_| Error::Domain("exponent v must lie in [1/2, 1)"))?;
    if !(q_max.is_finite() && q_max >= 2.0) {
        return Err(Error::Domain("q_max must be finite and at least 2"));
    }
    if scales.len() < 2 {
        return Err(Error::Insufficient("slope regression needs at least two scales"));
    }
    let fine_end = fx::powf(q_max, -(1.0 + v));
    for pair in scales.windows(2) {
        if pair[1] >= pair[0] {
            return Err(Error::Domain("scales must be strictly decreasing"));
        }
    }
    for &s in scales {
        if !(s.is_finite() && s >= fine_end * (1.0 - 1e-12) && s <= 0.1 * (1.0 + 1e-12)) {
            return Err(Error::Domain("scales must lie in [q_max^-(1+v), 1e-1]"));
        }
    }

    let merged = block_cover(curve, shift, v, q_max, c2)?;
    if merged.is_empty() {
        return Err(Error::Insufficient(
            "no approximation window met both conditions in the top block",
        ));
    }

    let mut counts = Vec::with_capacity(scales.len());
    for &eps in scales {
        counts.push(count_boxes(&merged, eps));
    }
    let us: Vec<f64> = scales.iter().map(|&e| -fx::ln(e)).collect();
    let ws: Vec<f64> = counts.iter().map(|&n| fx::ln(n as f64)).collect();
    let slope = ls_slope(&us, &ws);

    Ok(DimensionDiagnostic {
        v,
        scales: scales.to_vec(),
        counts,
        slope,
        target,
    })
}

/// The merged x-intervals where some q in (⌊q_max/2⌋, ⌊q_max⌋] satisfies both
/// approximation conditions, covering the true set from outside.
pub(crate) fn block_cover(
    curve: &PlanarCurve,
    shift: Shift,
    v: f64,
    q_max: f64,
    c2: f64,
) -> Result<Vec<Interval>> {
    let dom = curve.domain();
    let q_hi = fx::floor(q_max) as i64;
    let q_lo = q_hi / 2;

    // Upfront work estimate: about |I|·q + 3 numerator candidates per q.
    let span = (q_hi * q_hi + q_hi - q_lo * q_lo - q_lo) as f64 / 2.0;
    let est = dom.len() * span + 3.0 * (q_hi - q_lo) as f64;
    if est > BOX_BUDGET as f64 {
        return Err(Error::Budget {
            needed: est as u64,
            budget: BOX_BUDGET,
        });
    }

    let mut work: u64 = 0;
    let mut pieces: Vec<Interval> = Vec::new();
    for q in (q_lo + 1)..=q_hi {
        let qf = q as f64;
        let psi_q = fx::powf(qf, -v);
        let r = psi_q / qf;
        let p_lo = fx::ceil(qf * (dom.lo - r) - shift.x) as i64;
        let p_hi = fx::floor(qf * (dom.hi + r) - shift.x) as i64;
        for p1 in p_lo..=p_hi {
            work += 1;
            let x_c = (p1 as f64 + shift.x) / qf;
            let xlo = (x_c - r).max(dom.lo);
            let xhi = (x_c + r).min(dom.hi);
            if !(xlo < xhi) {
                continue;
            }
            let xm = 0.5 * (xlo + xhi);
            let w = (xhi - xm).max(xm - xlo);
            let g = qf * curve.eval(xm) - shift.y;
            let s = qf * curve.d1(xm);
            let slop = 0.5 * qf * c2 * w * w;
            let psi_eff = psi_q + slop;
            let spread = fx::abs(s) * w + psi_eff;
            let m_lo = fx::ceil(g - spread) as i64;
            let m_hi = fx::floor(g + spread) as i64;
            for m in m_lo..=m_hi {
                work += 1;
                let u = g - m as f64;
                if fx::abs(s) * w <= 1e-9 * psi_eff {
                    // The ordinate barely moves across the window: the whole
                    // window is in or out.
                    if fx::abs(u) < psi_eff {
                        pieces.push(Interval { lo: xlo, hi: xhi });
                    }
                    continue;
                }
                let t1 = (-u - psi_eff) / s;
                let t2 = (-u + psi_eff) / s;
                let blo = (xm + t1.min(t2)).max(xlo);
                let bhi = (xm + t1.max(t2)).min(xhi);
                if blo < bhi {
                    pieces.push(Interval { lo: blo, hi: bhi });
                }
            }
            if pieces.len() > MAX_COVER_PIECES {
                return Err(Error::Budget {
                    needed: pieces.len() as u64,
                    budget: MAX_COVER_PIECES as u64,
                });
            }
        }
        if work > BOX_BUDGET {
            return Err(Error::Budget {
                needed: work,
                budget: BOX_BUDGET,
            });
        }
    }
    let (merged, _) = sweep_union(pieces, dom);
    Ok(merged)
}

/// Mesh boxes of side `eps` hit by a sorted list of disjoint intervals.
pub(crate) fn count_boxes(merged: &[Interval], eps: f64) -> u64 {
    let mut n: u64 = 0;
    let mut last: Option<i64> = None;
    for itv in merged {
        let ilo = fx::floor(itv.lo / eps) as i64;
        let ihi = fx::floor(itv.hi / eps) as i64;
        let start = match last {
            Some(p) => ilo.max(p + 1),
            None => ilo,
        };
        if ihi >= start {
            n += (ihi - start + 1) as u64;
            last = Some(ihi);
        }
    }
    n
}

fn ls_slope(us: &[f64], ws: &[f64]) -> f64 {
    let n = us.len() as f64;
    let um = us.iter().sum::<f64>() / n;
    let wm = ws.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&u, &w) in us.iter().zip(ws) {
        num += (u - um) * (w - wm);
        den += (u - um) * (u - um);
    }
    num / den
}
