//! Planar curves x ↦ (x, f(x)) with exact derivatives, certified curvature
//! bounds, and a decomposition into strictly monotone pieces.
//!
//! The family is deliberately closed: five analytic builtins plus arbitrary
//! real polynomials up to degree 16. Every curve knows its first three
//! derivatives in closed form, which buys two things downstream. First,
//! curvature bounds 0 < c1 ≤ |f''| ≤ c2 are certified by a dense grid whose
//! spacing is chosen against an analytic bound on sup |f'''|, so the reported
//! interval carries an explicit widening margin instead of a hope. Second,
//! the monotone pieces expose closed-form or Newton inverses, which the fast
//! counting route uses to jump straight to candidate numerators.
//!
//! Curves are built either programmatically ([`PlanarCurve::new`]) or from a
//! compact text form ([`PlanarCurve::parse`]):
//!
//! ```text
//! parabola@[0,1]      line@[0,1]      cubic@[-1,1]
//! exp@[0,1]           circle-arc@[-0.7,0.7]
//! poly:[0,0,0.05]@[2,3]        (coefficients in ascending degree)
//! ```
//!
//! Construction runs a derivative consistency check (closed forms against
//! finite differences at a few hundred interior points), so a typo in a
//! hand-added derivative cannot survive into the counting layers.

use alloc::string::String;
use alloc::vec::Vec;

use crate::fx;
use crate::num::Interval;
use crate::{Error, Result};

/// Hard cap on the number of strictly monotone pieces.
pub const MAX_PIECES: usize = 64;

/// Hard cap on polynomial degree.
pub const MAX_POLY_DEGREE: usize = 16;

/// Largest curvature grid: 2^22 + 1 sample points.
const MAX_CURVATURE_GRID: usize = (1 << 22) + 1;
const MIN_CURVATURE_GRID: usize = 4097;

/// Target widening margin for curvature certification. The actual margin can
/// exceed this when the grid cap binds; it is reported either way.
const CURVATURE_MARGIN_TARGET: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum CurveKind {
    /// f(x) = x²
    Parabola,
    /// f(x) = x
    Line,
    /// f(x) = x³
    Cubic,
    /// f(x) = eˣ
    Exp,
    /// f(x) = √(1 − x²), the upper unit circle
    CircleArc,
    /// Coefficients in ascending degree: c[0] + c[1]·x + …
    Poly(Vec<f64>),
}

/// Certified two-sided curvature bounds, or the refusal to certify them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Curvature {
    /// 0 < c1 ≤ |f''(x)| ≤ c2 holds on the whole interval, with f'' of one
    /// sign. `margin` is the grid-widening slack already folded into the
    /// bounds; `grid` is the number of sample points used.
    Certified { c1: f64, c2: f64, margin: f64, grid: usize },
    /// f'' vanishes, changes sign, or cannot be bounded away from zero.
    Degenerate,
}

/// One maximal interval on which f is strictly monotone (or constant, for the
/// degenerate case of a constant polynomial).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonotonePiece {
    pub x: Interval,
    pub increasing: bool,
    /// Image f(x-interval), endpoints sorted.
    pub f_range: Interval,
}

#[derive(Clone, Debug)]
pub struct PlanarCurve {
    kind: CurveKind,
    domain: Interval,
    curvature: Curvature,
    pieces: Vec<MonotonePiece>,
    /// Analytic bound on sup |f'''| over the domain.
    d3_bound: f64,
    /// Poly only: derivative coefficient arrays, ascending degree.
    dc: [Vec<f64>; 3],
}

#[inline]
fn horner(c: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &ck in c.iter().rev() {
        acc = acc * x + ck;
    }
    acc
}

fn poly_derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &ck)| ck * k as f64)
        .collect()
}

impl PlanarCurve {
    pub fn new(kind: CurveKind, domain: Interval) -> Result<Self> {
        if domain.len() <= 0.0 {
            return Err(Error::Domain("curve interval must have positive length"));
        }
        match &kind {
            CurveKind::Exp => {
                if domain.hi > 700.0 {
                    return Err(Error::Domain("exp curve interval must stay below 700"));
                }
            }
            CurveKind::CircleArc => {
                if domain.lo < -1.0 + 1e-9 || domain.hi > 1.0 - 1e-9 {
                    return Err(Error::Domain(
                        "circle arc interval must lie strictly inside (-1, 1)",
                    ));
                }
            }
            CurveKind::Poly(c) => {
                if c.len() > MAX_POLY_DEGREE + 1 {
                    return Err(Error::Domain("polynomial degree above 16"));
                }
                if c.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Domain("polynomial coefficients must be finite"));
                }
            }
            _ => {}
        }

        let dc = match &kind {
            CurveKind::Poly(c) => {
                let d1 = poly_derivative(c);
                let d2 = poly_derivative(&d1);
                let d3 = poly_derivative(&d2);
                [d1, d2, d3]
            }
            _ => [Vec::new(), Vec::new(), Vec::new()],
        };

        let mut curve = PlanarCurve {
            kind,
            domain,
            curvature: Curvature::Degenerate,
            pieces: Vec::new(),
            d3_bound: 0.0,
            dc,
        };
        curve.d3_bound = curve.compute_d3_bound();
        curve.check_derivative_consistency()?;
        curve.curvature = curve.certify_curvature();
        curve.pieces = curve.split_monotone()?;
        Ok(curve)
    }

    /// Parses the compact text form, e.g. `parabola@[0,1]` or
    /// `poly:[0,0,0.05]@[2,3]`.
    pub fn parse(expr: &str) -> Result<Self> {
        let expr = expr.trim();
        let (head, dom) = expr
            .rsplit_once('@')
            .ok_or_else(|| Error::Parse(String::from("expected `name@[a,b]`")))?;
        let domain = parse_interval(dom.trim())?;
        let head = head.trim();
        let kind = if let Some(list) = head.strip_prefix("poly:") {
            CurveKind::Poly(parse_number_list(list.trim())?)
        } else {
            match head {
                "parabola" => CurveKind::Parabola,
                "line" => CurveKind::Line,
                "cubic" => CurveKind::Cubic,
                "exp" => CurveKind::Exp,
                "circle-arc" | "circle_arc" => CurveKind::CircleArc,
                other => {
                    let mut msg = String::from("unknown curve name `");
                    msg.push_str(other);
                    msg.push('`');
                    return Err(Error::Parse(msg));
                }
            }
        };
        PlanarCurve::new(kind, domain)
    }

    #[inline]
    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    #[inline]
    pub fn domain(&self) -> Interval {
        self.domain
    }

    #[inline]
    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    /// The certified bounds (c1, c2), or [`Error::DegenerateCurvature`].
    pub fn curvature_bounds(&self) -> Result<(f64, f64)> {
        match self.curvature {
            Curvature::Certified { c1, c2, .. } => Ok((c1, c2)),
            Curvature::Degenerate => Err(Error::DegenerateCurvature),
        }
    }

    #[inline]
    pub fn pieces(&self) -> &[MonotonePiece] {
        &self.pieces
    }

    /// Hölder data (exponent, constant) for f'' on the domain. Every curve in
    /// the family has bounded f''', so the exponent is 1 and the constant is
    /// the analytic bound on sup |f'''|.
    pub fn d2_holder(&self) -> (f64, f64) {
        (1.0, self.d3_bound)
    }

    /// Quadratic coefficients [c₀, c₁, c₂] when f is a polynomial of degree
    /// at most two; used to pick a closed-form path in hot loops.
    pub(crate) fn as_quadratic(&self) -> Option<[f64; 3]> {
        match &self.kind {
            CurveKind::Parabola => Some([0.0, 0.0, 1.0]),
            CurveKind::Line => Some([0.0, 1.0, 0.0]),
            CurveKind::Poly(c) if c.len() <= 3 => {
                let mut q = [0.0; 3];
                q[..c.len()].copy_from_slice(c);
                Some(q)
            }
            _ => None,
        }
    }

    /// Human-readable tag, e.g. for report headers.
    pub fn describe(&self) -> String {
        use core::fmt::Write;
        let mut s = String::new();
        match &self.kind {
            CurveKind::Parabola => s.push_str("parabola"),
            CurveKind::Line => s.push_str("line"),
            CurveKind::Cubic => s.push_str("cubic"),
            CurveKind::Exp => s.push_str("exp"),
            CurveKind::CircleArc => s.push_str("circle-arc"),
            CurveKind::Poly(c) => {
                s.push_str("poly:[");
                for (i, v) in c.iter().enumerate() {
                    if i > 0 {
                        s.push(',');
                    }
                    let _ = write!(s, "{v}");
                }
                s.push(']');
            }
        }
        let _ = write!(s, "@[{},{}]", self.domain.lo, self.domain.hi);
        s
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            CurveKind::Parabola => x * x,
            CurveKind::Line => x,
            CurveKind::Cubic => x * x * x,
            CurveKind::Exp => fx::exp(x),
            CurveKind::CircleArc => fx::sqrt(1.0 - x * x),
            CurveKind::Poly(c) => horner(c, x),
        }
    }

    #[inline]
    pub fn d1(&self, x: f64) -> f64 {
        match &self.kind {
            CurveKind::Parabola => 2.0 * x,
            CurveKind::Line => 1.0,
            CurveKind::Cubic => 3.0 * x * x,
            CurveKind::Exp => fx::exp(x),
            CurveKind::CircleArc => -x / fx::sqrt(1.0 - x * x),
            CurveKind::Poly(_) => horner(&self.dc[0], x),
        }
    }

    #[inline]
    pub fn d2(&self, x: f64) -> f64 {
        match &self.kind {
            CurveKind::Parabola => 2.0,
            CurveKind::Line => 0.0,
            CurveKind::Cubic => 6.0 * x,
            CurveKind::Exp => fx::exp(x),
            CurveKind::CircleArc => {
                let s = fx::sqrt(1.0 - x * x);
                -1.0 / (s * s * s)
            }
            CurveKind::Poly(_) => horner(&self.dc[1], x),
        }
    }

    #[inline]
    pub fn d3(&self, x: f64) -> f64 {
        match &self.kind {
            CurveKind::Parabola | CurveKind::Line => 0.0,
            CurveKind::Cubic => 6.0,
            CurveKind::Exp => fx::exp(x),
            CurveKind::CircleArc => {
                let s2 = 1.0 - x * x;
                -3.0 * x / (s2 * s2 * fx::sqrt(s2))
            }
            CurveKind::Poly(_) => horner(&self.dc[2], x),
        }
    }

    fn compute_d3_bound(&self) -> f64 {
        let r = fx::abs(self.domain.lo).max(fx::abs(self.domain.hi));
        match &self.kind {
            CurveKind::Parabola | CurveKind::Line => 0.0,
            CurveKind::Cubic => 6.0,
            CurveKind::Exp => fx::exp(self.domain.hi),
            CurveKind::CircleArc => {
                let s2 = 1.0 - r * r;
                3.0 * r / (s2 * s2 * fx::sqrt(s2))
            }
            CurveKind::Poly(c) => {
                let mut bound = 0.0;
                let mut rk = 1.0;
                for (k, &ck) in c.iter().enumerate().skip(3) {
                    let kf = k as f64;
                    bound += fx::abs(ck) * kf * (kf - 1.0) * (kf - 2.0) * rk;
                    rk *= r;
                }
                bound
            }
        }
    }

    /// Closed forms against central differences at interior sample points.
    /// Step sizes are tuned per derivative order; tolerances are loose enough
    /// for finite-difference noise yet catch any wrong factor or sign.
    fn check_derivative_consistency(&self) -> Result<()> {
        let (a, b) = (self.domain.lo, self.domain.hi);
        let len = b - a;
        let n = 251;
        for i in 0..n {
            let t = (i as f64 + 0.5) / n as f64;
            let x = a + t * len;
            let scale = fx::abs(x).max(1.0);
            let h1 = 6e-6 * scale;
            let h2 = 1.2e-4 * scale;
            let h3 = 7e-4 * scale;
            if x - 2.0 * h3 < a || x + 2.0 * h3 > b {
                continue;
            }
            let f = |u: f64| self.eval(u);
            let mag = fx::abs(f(x)).max(1.0);

            let fd1 = (f(x + h1) - f(x - h1)) / (2.0 * h1);
            if fx::abs(fd1 - self.d1(x)) > 1e-5 * mag.max(fx::abs(self.d1(x))) {
                return Err(Error::Domain("first derivative disagrees with finite difference"));
            }
            let fd2 = (f(x + h2) - 2.0 * f(x) + f(x - h2)) / (h2 * h2);
            if fx::abs(fd2 - self.d2(x)) > 1e-4 * mag.max(fx::abs(self.d2(x))) {
                return Err(Error::Domain("second derivative disagrees with finite difference"));
            }
            let fd3 = (0.5 * f(x + 2.0 * h3) - f(x + h3) + f(x - h3) - 0.5 * f(x - 2.0 * h3))
                / (h3 * h3 * h3);
            if fx::abs(fd3 - self.d3(x)) > 1e-3 * mag.max(fx::abs(self.d3(x))) {
                return Err(Error::Domain("third derivative disagrees with finite difference"));
            }
        }
        Ok(())
    }

    /// Grid certification of 0 < c1 ≤ |f''| ≤ c2. Spacing h is chosen so the
    /// Lipschitz widening sup|f'''|·h/2 meets the margin target where the
    /// grid cap allows; the margin actually achieved is recorded.
    fn certify_curvature(&self) -> Curvature {
        let len = self.domain.len();
        let m3 = self.d3_bound;

        let n = if m3 == 0.0 {
            MIN_CURVATURE_GRID
        } else {
            let want = m3 * len / (2.0 * CURVATURE_MARGIN_TARGET);
            if want >= (MAX_CURVATURE_GRID - 1) as f64 {
                MAX_CURVATURE_GRID
            } else {
                (want as usize + 2).max(MIN_CURVATURE_GRID)
            }
        };

        let step = len / (n - 1) as f64;
        let mut min_signed = f64::INFINITY;
        let mut max_signed = f64::NEG_INFINITY;
        for i in 0..n {
            let x = if i + 1 == n {
                self.domain.hi
            } else {
                self.domain.lo + i as f64 * step
            };
            let v = self.d2(x);
            if !v.is_finite() {
                return Curvature::Degenerate;
            }
            min_signed = min_signed.min(v);
            max_signed = max_signed.max(v);
        }
        if min_signed <= 0.0 && max_signed >= 0.0 {
            return Curvature::Degenerate;
        }
        let (lo_abs, hi_abs) = if min_signed > 0.0 {
            (min_signed, max_signed)
        } else {
            (-max_signed, -min_signed)
        };
        let margin = 0.5 * m3 * step;
        let c1 = lo_abs - margin;
        if c1 <= 0.0 {
            return Curvature::Degenerate;
        }
        Curvature::Certified { c1, c2: hi_abs + margin, margin, grid: n }
    }

    /// Cuts the domain at sign changes of f'. Grid scan plus bisection; a
    /// zero of f' without a sign change (e.g. the cubic at the origin) does
    /// not break strict monotonicity and produces no cut.
    fn split_monotone(&self) -> Result<Vec<MonotonePiece>> {
        let (a, b) = (self.domain.lo, self.domain.hi);
        let n = 2048usize;
        let step = (b - a) / n as f64;

        let mut cuts: Vec<f64> = Vec::new();
        let mut all_zero = true;
        let mut prev_x = a;
        let mut prev_v = self.d1(a);
        for i in 1..=n {
            let x = if i == n { b } else { a + i as f64 * step };
            let v = self.d1(x);
            if v != 0.0 || prev_v != 0.0 {
                all_zero = false;
            }
            if prev_v == 0.0 && prev_x > a {
                // Exact zero at an interior grid point: cut only if the
                // neighbours straddle it in sign.
                let before = self.d1(prev_x - 0.5 * step);
                if before * v < 0.0 && !cuts.last().is_some_and(|&c| c == prev_x) {
                    cuts.push(prev_x);
                }
            } else if prev_v * v < 0.0 {
                cuts.push(bisect_zero(|u| self.d1(u), prev_x, x));
            }
            prev_x = x;
            prev_v = v;
        }

        if all_zero {
            // Constant function: one flat piece covering the domain.
            let y = self.eval(a);
            return Ok(alloc::vec![MonotonePiece {
                x: self.domain,
                increasing: true,
                f_range: Interval { lo: y, hi: y },
            }]);
        }

        if cuts.len() + 1 > MAX_PIECES {
            return Err(Error::TooManyPieces(MAX_PIECES));
        }

        let mut pieces = Vec::with_capacity(cuts.len() + 1);
        let mut lo = a;
        for k in 0..=cuts.len() {
            let hi = if k == cuts.len() { b } else { cuts[k] };
            if hi <= lo {
                continue;
            }
            let flo = self.eval(lo);
            let fhi = self.eval(hi);
            pieces.push(MonotonePiece {
                x: Interval { lo, hi },
                increasing: fhi >= flo,
                f_range: Interval { lo: flo.min(fhi), hi: flo.max(fhi) },
            });
            lo = hi;
        }
        Ok(pieces)
    }

    /// Solves f(x) = t on a monotone piece, to within `xtol` in x. Closed
    /// forms where the kind admits one, otherwise warm-started Newton with a
    /// bisection fallback. `t` is clamped into the piece's range, so the
    /// result always lands inside the piece.
    pub(crate) fn invert_on_piece(
        &self,
        piece: &MonotonePiece,
        t: f64,
        hint: f64,
        xtol: f64,
    ) -> f64 {
        if t <= piece.f_range.lo {
            return if piece.increasing { piece.x.lo } else { piece.x.hi };
        }
        if t >= piece.f_range.hi {
            return if piece.increasing { piece.x.hi } else { piece.x.lo };
        }
        match &self.kind {
            CurveKind::Line => t,
            CurveKind::Parabola => {
                let r = fx::sqrt(t.max(0.0));
                if piece.x.lo >= 0.0 {
                    r
                } else {
                    -r
                }
            }
            CurveKind::Cubic => fx::cbrt(t),
            CurveKind::Exp => fx::ln(t),
            CurveKind::CircleArc => {
                let r = fx::sqrt((1.0 - t * t).max(0.0));
                if piece.increasing {
                    -r
                } else {
                    r
                }
            }
            CurveKind::Poly(_) => self.newton_invert(piece, t, hint, xtol),
        }
    }

    fn newton_invert(&self, piece: &MonotonePiece, t: f64, hint: f64, xtol: f64) -> f64 {
        let mut x = piece.x.clamp(hint);
        for _ in 0..12 {
            let err = self.eval(x) - t;
            let slope = self.d1(x);
            if fx::abs(slope) < 1e-300 {
                break;
            }
            let step = err / slope;
            let next = piece.x.clamp(x - step);
            let moved = fx::abs(next - x);
            x = next;
            if moved <= xtol {
                // One verification round: accept only if the residual in f is
                // consistent with being within xtol of the root.
                let res = fx::abs(self.eval(x) - t);
                if res <= fx::abs(self.d1(x)) * xtol * 4.0 + 1e-300 {
                    return x;
                }
            }
        }
        // Bisection fallback; the piece brackets the root by construction.
        let (mut lo, mut hi) = (piece.x.lo, piece.x.hi);
        let rising = piece.increasing;
        for _ in 0..80 {
            if hi - lo <= xtol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let below = self.eval(mid) < t;
            if below == rising {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn bisect_zero(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..90 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn parse_interval(s: &str) -> Result<Interval> {
    let inner = s
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(String::from("expected interval `[a,b]`")))?;
    let mut parts = inner.splitn(2, ',');
    let a = parse_f64(parts.next().unwrap_or(""))?;
    let b = parse_f64(parts.next().ok_or_else(|| {
        Error::Parse(String::from("interval needs two comma-separated endpoints"))
    })?)?;
    Interval::new(a, b)
}

fn parse_number_list(s: &str) -> Result<Vec<f64>> {
    let inner = s
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(String::from("expected coefficient list `[c0,c1,...]`")))?;
    let inner = inner.trim();
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    inner.split(',').map(parse_f64).collect()
}

fn parse_f64(s: &str) -> Result<f64> {
    let s = s.trim();
    s.parse::<f64>().map_err(|_| {
        let mut msg = String::from("invalid number `");
        msg.push_str(s);
        msg.push('`');
        Error::Parse(msg)
    })
}
