//! Counting shifted rational points near a curve, two independent ways.
//!
//! For a query (Q, δ, θ, J) the count is over integer pairs (p₁, q) with
//! ⌊Q⌋ < q ≤ ⌊2Q⌋ whose abscissa x = (p₁+θ₁)/q lies in J and whose residual
//! ‖q·f(x) − θ₂‖ (distance to the nearest integer) is below δ.
//!
//! [`count_naive`] walks every candidate numerator in the window — the
//! transparent route that other code is checked against. [`count_fast`]
//! instead walks the integer levels m crossed by q·f(x) − θ₂ on each strictly
//! monotone piece, inverts f to find where each level's δ-band lives, and
//! scans only the handful of numerators near it. Both routes classify every
//! candidate they touch with the same shared predicate ([`TIE_GUARD`]-guarded
//! window membership, residual strictly below δ with the same guard), and the
//! fast route widens every inverted window enough to swallow inversion error
//! before handing candidates to that predicate. The two routes therefore
//! agree exactly, not approximately, and `count_fast` degrades gracefully:
//! when level windows blanket the whole window J it does the same work as
//! `count_naive`, never more than a constant factor of it.
//!
//! Counts over disjoint denominator ranges add up exactly, so
//! [`count_in_qrange`] is safe to fan out over threads and sum.

use alloc::vec::Vec;

use crate::curve::{MonotonePiece, PlanarCurve};
use crate::fx;
use crate::num::{dist_to_nearest_int, Interval, TIE_GUARD};
use crate::{Error, Result};

/// Default work budget: candidate evaluations plus level iterations.
pub const DEFAULT_BUDGET: u64 = 10_000_000_000;

/// Hard cap on materialized point lists.
pub const MAX_POINTS: usize = 10_000_000;

/// The inhomogeneous shift θ = (θ₁, θ₂): θ₁ shifts the numerator of the
/// abscissa, θ₂ shifts the ordinate residual.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Shift {
    pub x: f64,
    pub y: f64,
}

impl Shift {
    pub const ZERO: Shift = Shift { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Shift {
        Shift { x, y }
    }
}

/// One counting request. `q_scale` is the dyadic scale Q: denominators run
/// over the integers in (⌊Q⌋, ⌊2Q⌋]. `window` defaults to the curve's whole
/// interval and is intersected with it otherwise.
#[derive(Clone, Copy, Debug)]
pub struct CountQuery {
    pub q_scale: f64,
    pub delta: f64,
    pub shift: Shift,
    pub window: Option<Interval>,
    pub budget: u64,
}

impl CountQuery {
    pub fn new(q_scale: f64, delta: f64) -> CountQuery {
        CountQuery {
            q_scale,
            delta,
            shift: Shift::ZERO,
            window: None,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn with_shift(mut self, shift: Shift) -> CountQuery {
        self.shift = shift;
        self
    }

    pub fn with_window(mut self, window: Interval) -> CountQuery {
        self.window = Some(window);
        self
    }

    pub fn with_budget(mut self, budget: u64) -> CountQuery {
        self.budget = budget;
        self
    }
}

/// One counted point, in the order (q, p₁) ascending.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CountedPoint {
    pub q: i64,
    pub p1: i64,
    /// Abscissa (p₁+θ₁)/q.
    pub x: f64,
    /// ‖q·f(x) − θ₂‖.
    pub residual: f64,
}

pub(crate) struct Checked {
    pub q_lo: i64,
    pub q_hi: i64,
    pub j: Interval,
}

pub(crate) fn validate(curve: &PlanarCurve, query: &CountQuery) -> Result<Checked> {
    if !query.q_scale.is_finite() || query.q_scale < 1.0 {
        return Err(Error::Domain("q_scale must be finite and at least 1"));
    }
    if !(query.delta > 0.0 && query.delta <= 0.5) {
        return Err(Error::Domain("delta must lie in (0, 1/2]"));
    }
    if !query.shift.x.is_finite() || !query.shift.y.is_finite() {
        return Err(Error::Domain("shift components must be finite"));
    }
    let j = match query.window {
        None => curve.domain(),
        Some(w) => w
            .intersect(&curve.domain())
            .ok_or(Error::Domain("window does not meet the curve's interval"))?,
    };
    let q_lo = fx::floor(query.q_scale) as i64;
    let q_hi = fx::floor(2.0 * query.q_scale) as i64;
    Ok(Checked { q_lo, q_hi, j })
}

/// The shared admission predicate. Returns (x, residual) when the candidate
/// (q, p₁) is counted: x within J up to the guard, residual strictly below
/// δ by more than the guard. Every route funnels through here.
#[inline]
pub(crate) fn admit(
    curve: &PlanarCurve,
    shift: Shift,
    delta: f64,
    j: &Interval,
    qf: f64,
    p1: i64,
) -> Option<(f64, f64)> {
    let x = (p1 as f64 + shift.x) / qf;
    if x < j.lo - TIE_GUARD || x > j.hi + TIE_GUARD {
        return None;
    }
    let r = dist_to_nearest_int(qf * curve.eval(x) - shift.y);
    if r + TIE_GUARD < delta {
        Some((x, r))
    } else {
        None
    }
}

#[inline]
fn window_p_range(qf: f64, j: &Interval, theta1: f64) -> (i64, i64) {
    // One extra numerator on each side; `admit` discards the overshoot.
    let lo = fx::ceil(qf * j.lo - theta1) as i64 - 1;
    let hi = fx::floor(qf * j.hi - theta1) as i64 + 1;
    (lo, hi)
}

/// Exhaustive reference count: every numerator in the window is evaluated.
pub fn count_naive(curve: &PlanarCurve, query: &CountQuery) -> Result<u64> {
    let chk = validate(curve, query)?;
    let mut estimate = 0.0f64;
    for q in chk.q_lo + 1..=chk.q_hi {
        estimate += q as f64 * chk.j.len() + 4.0;
    }
    if estimate > query.budget as f64 {
        return Err(Error::Budget { needed: estimate as u64, budget: query.budget });
    }

    let mut n = 0u64;
    for q in chk.q_lo + 1..=chk.q_hi {
        let qf = q as f64;
        let (p_lo, p_hi) = window_p_range(qf, &chk.j, query.shift.x);
        for p1 in p_lo..=p_hi {
            if admit(curve, query.shift, query.delta, &chk.j, qf, p1).is_some() {
                n += 1;
            }
        }
    }
    Ok(n)
}

/// Level-walking count over the full denominator range.
pub fn count_fast(curve: &PlanarCurve, query: &CountQuery) -> Result<u64> {
    let chk = validate(curve, query)?;
    count_fast_checked(curve, query, &chk, chk.q_lo, chk.q_hi)
}

/// Level-walking count restricted to denominators in (q_from, q_to]. The
/// range is clipped to the query's own (⌊Q⌋, ⌊2Q⌋]; disjoint ranges sum to
/// exactly the full count, which makes this the unit of parallel work.
pub fn count_in_qrange(
    curve: &PlanarCurve,
    query: &CountQuery,
    q_from: i64,
    q_to: i64,
) -> Result<u64> {
    let chk = validate(curve, query)?;
    let lo = q_from.max(chk.q_lo);
    let hi = q_to.min(chk.q_hi);
    if lo >= hi {
        return Ok(0);
    }
    count_fast_checked(curve, query, &chk, lo, hi)
}

fn count_fast_checked(
    curve: &PlanarCurve,
    query: &CountQuery,
    chk: &Checked,
    q_lo: i64,
    q_hi: i64,
) -> Result<u64> {
    let mut sink = CountSink(0);
    fast_scan(curve, query, chk, q_lo, q_hi, &mut sink)?;
    Ok(sink.0)
}

/// Materializes the counted points, ascending in (q, p₁). Refuses to build
/// lists beyond [`MAX_POINTS`].
pub fn enumerate_points(curve: &PlanarCurve, query: &CountQuery) -> Result<Vec<CountedPoint>> {
    let chk = validate(curve, query)?;
    let mut sink = VecSink(Vec::new());
    fast_scan(curve, query, &chk, chk.q_lo, chk.q_hi, &mut sink)?;
    Ok(sink.0)
}

/// Streams the counted points to a visitor without materializing them.
pub fn for_each_point(
    curve: &PlanarCurve,
    query: &CountQuery,
    visit: &mut dyn FnMut(i64, i64, f64, f64),
) -> Result<()> {
    let chk = validate(curve, query)?;
    let mut sink = FnSink(visit);
    fast_scan(curve, query, &chk, chk.q_lo, chk.q_hi, &mut sink)
}

/// Streams every numerator in the window (no residual test) to a visitor.
/// This is the candidate walk the kernel-smoothed count shares with
/// [`count_naive`].
pub(crate) fn for_each_in_window(
    curve: &PlanarCurve,
    query: &CountQuery,
    visit: &mut dyn FnMut(i64, f64, i64, f64),
) -> Result<()> {
    let chk = validate(curve, query)?;
    let mut estimate = 0.0f64;
    for q in chk.q_lo + 1..=chk.q_hi {
        estimate += q as f64 * chk.j.len() + 4.0;
    }
    if estimate > query.budget as f64 {
        return Err(Error::Budget { needed: estimate as u64, budget: query.budget });
    }
    for q in chk.q_lo + 1..=chk.q_hi {
        let qf = q as f64;
        let (p_lo, p_hi) = window_p_range(qf, &chk.j, query.shift.x);
        for p1 in p_lo..=p_hi {
            let x = (p1 as f64 + query.shift.x) / qf;
            if x < chk.j.lo - TIE_GUARD || x > chk.j.hi + TIE_GUARD {
                continue;
            }
            visit(q, qf, p1, x);
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Fast route internals
// ---------------------------------------------------------------------------

/// Slack in numerator units added on both sides of every inverted level
/// window. It must dominate the x-inversion tolerance times q (0.02) plus
/// all float slop in the window arithmetic; candidates in the slack are
/// simply evaluated and rejected by `admit`.
const WINDOW_SLACK: f64 = 0.06;

/// X-space inversion tolerance, in units of 1/q.
const XTOL_OVER_Q: f64 = 0.02;

trait Sink {
    fn point(&mut self, q: i64, p1: i64, x: f64, r: f64) -> Result<()>;
    /// A run of consecutive numerators, all counted, all sharing one
    /// residual (flat pieces). Default: visit each.
    fn run(&mut self, q: i64, qf: f64, theta1: f64, p_lo: i64, p_hi: i64, r: f64) -> Result<()> {
        for p1 in p_lo..=p_hi {
            let x = (p1 as f64 + theta1) / qf;
            self.point(q, p1, x, r)?;
        }
        Ok(())
    }
}

struct CountSink(u64);

impl Sink for CountSink {
    #[inline]
    fn point(&mut self, _q: i64, _p1: i64, _x: f64, _r: f64) -> Result<()> {
        self.0 += 1;
        Ok(())
    }

    fn run(&mut self, _q: i64, _qf: f64, _t1: f64, p_lo: i64, p_hi: i64, _r: f64) -> Result<()> {
        self.0 += (p_hi - p_lo + 1) as u64;
        Ok(())
    }
}

struct VecSink(Vec<CountedPoint>);

impl Sink for VecSink {
    fn point(&mut self, q: i64, p1: i64, x: f64, r: f64) -> Result<()> {
        if self.0.len() >= MAX_POINTS {
            return Err(Error::Budget {
                needed: self.0.len() as u64 + 1,
                budget: MAX_POINTS as u64,
            });
        }
        self.0.push(CountedPoint { q, p1, x, residual: r });
        Ok(())
    }
}

struct FnSink<'a>(&'a mut dyn FnMut(i64, i64, f64, f64));

impl Sink for FnSink<'_> {
    fn point(&mut self, q: i64, p1: i64, x: f64, r: f64) -> Result<()> {
        (self.0)(q, p1, x, r);
        Ok(())
    }
}

/// Per-(q, piece) closed-form level inverter for quadratics a·x² + b·x + c.
/// Solving q·f(x) − θ₁-shifted numerator directly in numerator units:
/// y(t) = q·x(t) − θ₁ with E(t) = q²·(b² − 4ac) + 4a·q·(q·t), so that for
/// t = (m + const)/q the argument of the square root is affine in m and is
/// recomputed from the closed form at every level (no drift).
struct QuadLevels {
    inv_two_a: f64,
    neg_b_qf: f64,
    e0: f64,
    e_step: f64,
    plus_branch: bool,
}

impl QuadLevels {
    fn new(co: [f64; 3], qf: f64, piece: &MonotonePiece) -> QuadLevels {
        let (c, b, a) = (co[0], co[1], co[2]);
        let vertex = -b / (2.0 * a);
        QuadLevels {
            inv_two_a: 1.0 / (2.0 * a),
            neg_b_qf: -b * qf,
            e0: qf * qf * (b * b - 4.0 * a * c),
            e_step: 4.0 * a * qf,
            plus_branch: piece.x.midpoint() >= vertex,
        }
    }

    /// Numerator-space positions of the two band edges at level m, sorted.
    #[inline]
    fn y_pair(&self, m_f: f64, off_lo: f64, off_hi: f64, theta1: f64) -> (f64, f64) {
        let e1 = (self.e0 + self.e_step * (m_f + off_lo)).max(0.0);
        let e2 = (self.e0 + self.e_step * (m_f + off_hi)).max(0.0);
        let (r1, r2) = (fx::sqrt(e1), fx::sqrt(e2));
        let (y1, y2) = if self.plus_branch {
            (
                (self.neg_b_qf + r1) * self.inv_two_a - theta1,
                (self.neg_b_qf + r2) * self.inv_two_a - theta1,
            )
        } else {
            (
                (self.neg_b_qf - r1) * self.inv_two_a - theta1,
                (self.neg_b_qf - r2) * self.inv_two_a - theta1,
            )
        };
        if y1 <= y2 {
            (y1, y2)
        } else {
            (y2, y1)
        }
    }
}

/// Linear specialization b·x + c, b ≠ 0.
struct LinLevels {
    inv_b_qf_signed: f64,
    base: f64,
}

impl LinLevels {
    fn new(co: [f64; 3], qf: f64) -> LinLevels {
        // y(t) = q·(t − c)/b − θ₁ = (q·t − q·c)/b − θ₁ and q·t = m + const.
        LinLevels { inv_b_qf_signed: 1.0 / co[1], base: qf * co[0] }
    }

    #[inline]
    fn y_pair(&self, m_f: f64, off_lo: f64, off_hi: f64, theta1: f64) -> (f64, f64) {
        let y1 = (m_f + off_lo - self.base) * self.inv_b_qf_signed - theta1;
        let y2 = (m_f + off_hi - self.base) * self.inv_b_qf_signed - theta1;
        if y1 <= y2 {
            (y1, y2)
        } else {
            (y2, y1)
        }
    }
}

enum LevelInverter {
    Quad(QuadLevels),
    Lin(LinLevels),
    Generic,
}

fn fast_scan<S: Sink>(
    curve: &PlanarCurve,
    query: &CountQuery,
    chk: &Checked,
    q_lo: i64,
    q_hi: i64,
    sink: &mut S,
) -> Result<()> {
    let shift = query.shift;
    let delta = query.delta;
    let j = chk.j;

    // Points outside J are excluded by the p-range, so levels over the image
    // of piece ∖ J are dead work. Clip each piece to the window up front; the
    // clipped image is exact from the endpoint values by monotonicity.
    let pieces: Vec<MonotonePiece> = curve
        .pieces()
        .iter()
        .filter_map(|p| {
            let x = p.x.intersect(&j)?;
            let (fa, fb) = (curve.eval(x.lo), curve.eval(x.hi));
            Some(MonotonePiece {
                x,
                increasing: p.increasing,
                f_range: Interval { lo: fa.min(fb), hi: fa.max(fb) },
            })
        })
        .collect();

    // Work estimate: levels per (q, piece) ≈ q·|f-range| + O(1).
    let f_span: f64 = pieces.iter().map(|p| p.f_range.len()).sum();
    let nq = (q_hi - q_lo).max(0) as f64;
    let sum_q = 0.5 * ((q_hi as f64) * (q_hi as f64 + 1.0) - (q_lo as f64) * (q_lo as f64 + 1.0));
    let estimate = f_span * sum_q + nq * (5.0 * pieces.len() as f64 + 2.0);
    if estimate > query.budget as f64 {
        return Err(Error::Budget { needed: estimate as u64, budget: query.budget });
    }

    let quad = curve.as_quadratic();

    for q in q_lo + 1..=q_hi {
        let qf = q as f64;
        let (pj_lo, pj_hi) = window_p_range(qf, &j, shift.x);
        if pj_lo > pj_hi {
            continue;
        }
        let xtol = XTOL_OVER_Q / qf;

        for (k, piece) in pieces.iter().enumerate() {
            // Each piece owns a numerator range; the cut at an interior piece
            // boundary x_k is ceil(q·x_k − θ₁), computed identically for the
            // piece on each side, so the ranges tile without overlap.
            let p_start = if k == 0 {
                pj_lo
            } else {
                (fx::ceil(qf * piece.x.lo - shift.x) as i64).max(pj_lo)
            };
            let p_end = if k + 1 == pieces.len() {
                pj_hi
            } else {
                (fx::ceil(qf * pieces[k + 1].x.lo - shift.x) as i64 - 1).min(pj_hi)
            };
            if p_start > p_end {
                continue;
            }

            if piece.f_range.len() == 0.0 {
                scan_flat(shift, delta, &j, q, qf, piece, p_start, p_end, sink)?;
                continue;
            }

            let inverter = match quad {
                Some(co) if co[2] != 0.0 => LevelInverter::Quad(QuadLevels::new(co, qf, piece)),
                Some(co) if co[1] != 0.0 => LevelInverter::Lin(LinLevels::new(co, qf)),
                Some(_) => unreachable!("constant quadratic handled as flat piece"),
                None => LevelInverter::Generic,
            };

            // Levels m with the band (m + θ₂ ± δ)/q meeting the piece's range.
            let m_lo = fx::ceil(qf * piece.f_range.lo - shift.y - delta) as i64 - 1;
            let m_hi = fx::floor(qf * piece.f_range.hi - shift.y + delta) as i64 + 1;
            if m_lo > m_hi {
                continue;
            }

            let (off_lo, off_hi) = (shift.y - delta, shift.y + delta);
            let mut next_p = p_start;
            let mut hint = if piece.increasing { piece.x.lo } else { piece.x.hi };

            // Walk levels in ascending-x order so `next_p` only moves right.
            let (m_first, m_step) = if piece.increasing { (m_lo, 1i64) } else { (m_hi, -1i64) };
            let m_count = (m_hi - m_lo + 1) as u64;

            let mut m = m_first;
            for _ in 0..m_count {
                let m_f = m as f64;
                let (y_lo, y_hi) = match &inverter {
                    LevelInverter::Quad(ql) => ql.y_pair(m_f, off_lo, off_hi, shift.x),
                    LevelInverter::Lin(ll) => ll.y_pair(m_f, off_lo, off_hi, shift.x),
                    LevelInverter::Generic => {
                        let t1 = (m_f + off_lo) / qf;
                        let t2 = (m_f + off_hi) / qf;
                        let x1 = curve.invert_on_piece(piece, t1, hint, xtol);
                        let x2 = curve.invert_on_piece(piece, t2, hint, xtol);
                        hint = if piece.increasing { x1.max(x2) } else { x1.min(x2) };
                        let (ya, yb) = (qf * x1 - shift.x, qf * x2 - shift.x);
                        if ya <= yb {
                            (ya, yb)
                        } else {
                            (yb, ya)
                        }
                    }
                };
                m += m_step;

                let p_first = (fx::ceil(y_lo - WINDOW_SLACK) as i64).max(next_p);
                let p_last = (fx::floor(y_hi + WINDOW_SLACK) as i64).min(p_end);
                if p_first > p_last {
                    continue;
                }
                for p1 in p_first..=p_last {
                    if let Some((x, r)) = admit(curve, shift, delta, &j, qf, p1) {
                        sink.point(q, p1, x, r)?;
                    }
                }
                next_p = p_last + 1;
            }
        }
    }
    Ok(())
}

/// Flat pieces: one residual decides the whole run; membership boundaries
/// are found by probing inward from the ends (the numerator window already
/// overshoots J by at most a couple of candidates).
#[allow(clippy::too_many_arguments)]
fn scan_flat<S: Sink>(
    shift: Shift,
    delta: f64,
    j: &Interval,
    q: i64,
    qf: f64,
    piece: &MonotonePiece,
    p_start: i64,
    p_end: i64,
    sink: &mut S,
) -> Result<()> {
    let r = dist_to_nearest_int(qf * piece.f_range.lo - shift.y);
    if r + TIE_GUARD >= delta {
        return Ok(());
    }
    let probe = |p1: i64| -> bool {
        let x = (p1 as f64 + shift.x) / qf;
        x >= j.lo - TIE_GUARD && x <= j.hi + TIE_GUARD
    };
    let mut lo = p_start;
    while lo <= p_end && !probe(lo) {
        lo += 1;
    }
    let mut hi = p_end;
    while hi >= lo && !probe(hi) {
        hi -= 1;
    }
    if lo > hi {
        return Ok(());
    }
    // x is monotone in the numerator, so membership is contiguous.
    sink.run(q, qf, shift.x, lo, hi, r)
}
