//! Dual lattice bodies behind the lower-bound machinery.
//!
//! For a curve y = f(x) the dual map sends x to the coefficients
//! g₁ = x·f′(x) − f(x) and g₂ = −f′(x), so that q·g₁(x) + p₁·g₂(x) + p₂
//! measures how far the integer triple (q, p₁, p₂) is from the tangent line
//! at x. Bounding that form together with its x-derivative and q itself cuts
//! out a convex symmetric box in the integer lattice. This module builds that
//! body, computes its three successive minima exactly, tests whether a point
//! x is "bad" (the shrunken body already traps a nonzero integer triple), and
//! when x is not bad assembles an integer witness (q, p₁, p₂) whose shifted
//! rational point lands within δ of the curve.
//!
//! Everything here is exact integer geometry driven by floating-point gauges:
//! the minima search enumerates lattice points coset by coset over a reduced
//! basis rather than scanning the raw box, which keeps the cost proportional
//! to the number of genuinely short vectors instead of the body volume.

use alloc::vec::Vec;

use crate::counting::Shift;
use crate::curve::PlanarCurve;
use crate::error::{Error, Result};
use crate::fx;
use crate::num::{solve3, Interval};

/// Work cap shared by the minima enumeration and the bad-set scan. One unit
/// is one candidate coset, gauge evaluation, or (q, p₁) column visit.
pub const ENUM_BUDGET: u64 = 100_000_000;

/// Default constant in the reported bad-measure bound
/// C·max(λ^{1/3}, (λKT)^{1/9})·|J|; the analysis behind it does not pin a
/// numeric value, so callers may override it.
pub const DEFAULT_BAD_CONSTANT: f64 = 10.0;

/// Relative slack accepted when testing membership in a scaled body. The
/// forms are evaluated in f64, so exact boundary points need a few ulps.
const BODY_TOL: f64 = 1e-12;

/// Values of the dual map and its derivative at a point of the curve.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DualEval {
    pub x: f64,
    /// g₁(x) = x·f′(x) − f(x); intercept coefficient of the dual line.
    pub g1: f64,
    /// g₂(x) = −f′(x); slope coefficient of the dual line.
    pub g2: f64,
    /// g₁′(x) = x·f″(x).
    pub g1p: f64,
    /// g₂′(x) = −f″(x).
    pub g2p: f64,
}

/// Evaluate the dual map g = (g₁, g₂) and its derivative at x.
///
/// The pair (g₁′, g₂′) = f″(x)·(x, −1) is parallel to (x, −1), which is what
/// makes the second row of the dual body a tangent-direction constraint.
pub fn dual_map_eval(curve: &PlanarCurve, x: f64) -> Result<DualEval> {
    if !x.is_finite() || !curve.domain().contains(x) {
        return Err(Error::Domain("dual map point must lie in the curve domain"));
    }
    let d1 = curve.d1(x);
    let d2 = curve.d2(x);
    Ok(DualEval {
        x,
        g1: x * d1 - curve.eval(x),
        g2: -d1,
        g1p: x * d2,
        g2p: -d2,
    })
}

/// Shrunken-body radii used by the bad-set test at scale Q: a triple of
/// bounds (λ, K, T) on the three dual forms.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BdvTriple {
    /// Bound λ on |q·g₁ + p₁·g₂ + p₂|.
    pub lambda: f64,
    /// Bound K on |q·g₁′ + p₁·g₂′|.
    pub k: f64,
    /// Bound T on |q|.
    pub t: f64,
}

/// Parameters a dual body was generated from, kept for reporting.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BodyParams {
    pub x: f64,
    pub q_scale: f64,
    pub delta: f64,
    pub c0: f64,
    /// Upper curvature bound of the generating curve.
    pub c2: f64,
}

/// A symmetric convex body {v : |rowᵢ·v| ≤ boundᵢ} cut out by three
/// independent linear forms on integer triples (q, p₁, p₂).
#[derive(Clone, Debug)]
pub struct ConvexBody3 {
    rows: [[f64; 3]; 3],
    bounds: [f64; 3],
    det: f64,
    params: Option<BodyParams>,
    bdv: Option<BdvTriple>,
}

impl ConvexBody3 {
    /// Build a body from raw forms. The rows must be genuinely independent
    /// and the bounds positive; degenerate input is refused rather than
    /// producing an unbounded "body".
    pub fn from_rows(rows: [[f64; 3]; 3], bounds: [f64; 3]) -> Result<Self> {
        for row in &rows {
            for v in row {
                if !v.is_finite() {
                    return Err(Error::Domain("body rows must be finite"));
                }
            }
        }
        for b in &bounds {
            if !(b.is_finite() && *b > 0.0) {
                return Err(Error::Domain("body bounds must be positive and finite"));
            }
        }
        let det = det3_f(&rows);
        let scale = row_norm(&rows[0]) * row_norm(&rows[1]) * row_norm(&rows[2]);
        if fx::abs(det) <= 1e-12 * scale {
            return Err(Error::Domain("body rows must be linearly independent"));
        }
        Ok(ConvexBody3 {
            rows,
            bounds,
            det,
            params: None,
            bdv: None,
        })
    }

    pub fn rows(&self) -> &[[f64; 3]; 3] {
        &self.rows
    }

    pub fn bounds(&self) -> &[f64; 3] {
        &self.bounds
    }

    /// Generating parameters when the body came from [`build_body`].
    pub fn params(&self) -> Option<BodyParams> {
        self.params
    }

    /// The companion shrunken-body radii when the body came from
    /// [`build_body`]: same λ and K, but the q-bound tightened by one more
    /// factor of c₀.
    pub fn bdv_triple(&self) -> Option<BdvTriple> {
        self.bdv
    }

    /// Euclidean volume 8·b₁b₂b₃ / |det rows|.
    pub fn volume(&self) -> f64 {
        8.0 * self.bounds[0] * self.bounds[1] * self.bounds[2] / fx::abs(self.det)
    }

    /// Gauge of an integer vector: the smallest μ ≥ 0 with v ∈ μ·body,
    /// i.e. maxᵢ |rowᵢ·v| / boundᵢ.
    pub fn gauge(&self, v: [i64; 3]) -> f64 {
        let vf = [v[0] as f64, v[1] as f64, v[2] as f64];
        let mut g = 0.0f64;
        for i in 0..3 {
            let r = dot(&self.rows[i], &vf);
            g = g.max(fx::abs(r) / self.bounds[i]);
        }
        g
    }

    /// Rows rescaled so the body becomes the unit cube: M[i] = rowᵢ/boundᵢ.
    fn scaled_rows(&self) -> [[f64; 3]; 3] {
        let mut m = self.rows;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] /= self.bounds[i];
            }
        }
        m
    }
}

/// Assemble the dual body at x for scale Q, accuracy δ, and shrink factor c₀:
/// row (g₁, g₂, 1) bounded by λ = c₀³δ, row (g₁′, g₂′, 0) bounded by
/// K = c₂/(c₀⁶Qδ), and row (1, 0, 0) bounded by c₀³Q. The product of the
/// three bounds is c₂, so the volume 8c₂/|f″(x)| is at least 8 and the body
/// always traps nonzero integer vectors at moderate dilations.
pub fn build_body(
    curve: &PlanarCurve,
    x: f64,
    q_scale: f64,
    delta: f64,
    c0: f64,
) -> Result<ConvexBody3> {
    if !(q_scale.is_finite() && q_scale >= 1.0) {
        return Err(Error::Domain("scale Q must be finite and at least 1"));
    }
    if !(delta.is_finite() && delta > 0.0 && delta <= 0.5) {
        return Err(Error::Domain("accuracy delta must lie in (0, 1/2]"));
    }
    if !(c0.is_finite() && c0 > 0.0 && c0 < 1.0) {
        return Err(Error::Domain("shrink factor c0 must lie in (0, 1)"));
    }
    let (_c1, c2) = curve.curvature_bounds()?;
    let de = dual_map_eval(curve, x)?;
    let c0_3 = c0 * c0 * c0;
    let c0_6 = c0_3 * c0_3;
    let lambda = c0_3 * delta;
    let k = c2 / (c0_6 * q_scale * delta);
    let t_body = c0_3 * q_scale;
    let rows = [[de.g1, de.g2, 1.0], [de.g1p, de.g2p, 0.0], [1.0, 0.0, 0.0]];
    let mut body = ConvexBody3::from_rows(rows, [lambda, k, t_body])?;
    body.params = Some(BodyParams {
        x,
        q_scale,
        delta,
        c0,
        c2,
    });
    body.bdv = Some(BdvTriple {
        lambda,
        k,
        t: c0 * t_body,
    });
    Ok(body)
}

/// The three successive minima of a dual body over the integer lattice.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MinimaReport {
    /// λ₁ ≤ λ₂ ≤ λ₃: the smallest dilations of the body containing one, two,
    /// and three linearly independent integer vectors.
    pub minima: [f64; 3],
    /// Integer vectors attaining the minima, sign-normalized so the first
    /// nonzero coordinate is positive.
    pub vectors: [[i64; 3]; 3],
    /// Euclidean volume of the body, for the product bound
    /// λ₁λ₂λ₃·volume ≤ 8.
    pub volume: f64,
}

/// One enumerated lattice vector together with its gauge.
#[derive(Clone, Copy)]
struct Candidate {
    gauge: f64,
    v: [i64; 3],
}

/// Compute the successive minima of a body exactly.
///
/// The search first LLL-reduces the body-scaled lattice basis, then walks the
/// two-dimensional grid of cosets transverse to the shortest reduced
/// direction. Restricted to one coset the gauge is a convex piecewise-linear
/// function of the remaining coordinate, so its integer minimizers sit next
/// to a real minimizer found by ternary search; keeping the best three per
/// coset provably suffices to recover all three minima. The enumeration
/// radius doubles geometrically until three independent vectors appear,
/// which certifies the result because every shorter vector has then been
/// seen. Work is capped by [`ENUM_BUDGET`].
pub fn successive_minima(body: &ConvexBody3) -> Result<MinimaReport> {
    let m = body.scaled_rows();
    let u = lll_reduce(&m);

    // Order the reduced directions by gauge so cosets are taken transverse
    // to the densest one.
    let mut cols: [[i64; 3]; 3] = [u_col(&u, 0), u_col(&u, 1), u_col(&u, 2)];
    cols.sort_unstable_by(|a, b| body.gauge(*a).total_cmp(&body.gauge(*b)));

    let g_min = body.gauge(cols[0]);
    let g_max = body.gauge(cols[2]);
    if !(g_min.is_finite() && g_min > 0.0 && g_max.is_finite()) {
        return Err(Error::Conditioning("reduced body basis is numerically degenerate"));
    }

    let mut budget = ENUM_BUDGET;
    let mut dilate = g_min * 1.0001;
    loop {
        let cands = enumerate_candidates(body, &cols, dilate, &mut budget)?;
        if let Some(report) = pick_minima(body, &cands)? {
            return Ok(report);
        }
        if dilate >= g_max {
            // The three reduced directions themselves are independent with
            // gauge at most g_max, so this cannot be reached.
            return Err(Error::Conditioning(
                "enumeration failed to find three independent vectors",
            ));
        }
        dilate = (dilate * 2.0).min(g_max * (1.0 + 1e-9));
    }
}

/// Greedy extraction of the minima from a complete candidate list: the first
/// vector, the first independent of it, and the first outside their plane.
/// Returns `Ok(None)` when the list does not yet span three dimensions.
fn pick_minima(body: &ConvexBody3, cands: &[Candidate]) -> Result<Option<MinimaReport>> {
    let mut sorted: Vec<Candidate> = cands.to_vec();
    sorted.sort_unstable_by(|a, b| {
        a.gauge
            .total_cmp(&b.gauge)
            .then(a.v[0].cmp(&b.v[0]))
            .then(a.v[1].cmp(&b.v[1]))
            .then(a.v[2].cmp(&b.v[2]))
    });
    sorted.dedup_by(|a, b| a.v == b.v);

    let Some(first) = sorted.first().copied() else {
        return Ok(None);
    };
    let mut vectors = [first.v, [0; 3], [0; 3]];
    let mut minima = [first.gauge, 0.0, 0.0];
    let mut rank = 1;
    for c in &sorted[1..] {
        if rank == 1 {
            if cross_i128(&vectors[0], &c.v) != [0, 0, 0] {
                vectors[1] = c.v;
                minima[1] = c.gauge;
                rank = 2;
            }
        } else if det3_i128(&vectors[0], &vectors[1], &c.v) != 0 {
            vectors[2] = c.v;
            minima[2] = c.gauge;
            rank = 3;
            break;
        }
    }
    if rank < 3 {
        return Ok(None);
    }
    let volume = body.volume();
    let product = minima[0] * minima[1] * minima[2] * volume;
    if product > 8.0 * (1.0 + 1e-9) {
        return Err(Error::Construction(
            "computed minima break the Minkowski product bound",
        ));
    }
    Ok(Some(MinimaReport {
        minima,
        vectors,
        volume,
    }))
}

/// Enumerate every nonzero lattice vector of gauge ≤ `dilate`, one
/// representative per ± pair, keeping the best three per coset line.
fn enumerate_candidates(
    body: &ConvexBody3,
    cols: &[[i64; 3]; 3],
    dilate: f64,
    budget: &mut u64,
) -> Result<Vec<Candidate>> {
    let m = body.scaled_rows();
    // a[i][j] = i-th scaled form applied to the j-th reduced direction.
    let mut a = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] = m[i][0] * cols[j][0] as f64
                + m[i][1] * cols[j][1] as f64
                + m[i][2] * cols[j][2] as f64;
        }
    }
    let ainv = invert3(&a).ok_or(Error::Conditioning(
        "reduced body basis is numerically singular",
    ))?;
    // |z_i| ≤ dilate · Σ_j |ainv[i][j]| for any point of the dilated body.
    let mut zmax = [0.0f64; 3];
    for i in 0..3 {
        zmax[i] = dilate
            * (fx::abs(ainv[i][0]) + fx::abs(ainv[i][1]) + fx::abs(ainv[i][2]))
            + 1e-9;
    }
    let z3_hi = fx::floor(zmax[2]) as i64;
    let z2_hi = fx::floor(zmax[1]) as i64;
    let coset_estimate = (z3_hi as u64 + 1).saturating_mul(2 * z2_hi as u64 + 1);
    if coset_estimate > *budget {
        return Err(Error::Budget {
            needed: coset_estimate,
            budget: ENUM_BUDGET,
        });
    }

    let accept = dilate * (1.0 + BODY_TOL);
    let mut out: Vec<Candidate> = Vec::new();
    for z3 in 0..=z3_hi {
        // Half-space normalization: vectors come in ± pairs, so take z3 ≥ 0,
        // and on the z3 = 0 slice take z2 ≥ 0.
        let z2_lo = if z3 == 0 { 0 } else { -z2_hi };
        for z2 in z2_lo..=z2_hi {
            charge(budget, 1)?;
            let base = [
                a[0][1] * z2 as f64 + a[0][2] * z3 as f64,
                a[1][1] * z2 as f64 + a[1][2] * z3 as f64,
                a[2][1] * z2 as f64 + a[2][2] * z3 as f64,
            ];
            let dir = [a[0][0], a[1][0], a[2][0]];
            if coset_floor(&base, &dir) > accept {
                continue;
            }
            let zero_coset = z2 == 0 && z3 == 0;
            let lo = if zero_coset { 1.0 } else { -(zmax[0] + 2.0) };
            let hi = zmax[0] + 2.0;
            if lo > hi {
                continue;
            }
            collect_coset(body, cols, &base, &dir, (z2, z3), lo, hi, accept, budget, &mut out)?;
        }
    }
    Ok(out)
}

/// Lower bound for the coset gauge min_z maxᵢ |baseᵢ + z·dirᵢ|, from the
/// pairwise crossing values: |bᵢdⱼ − bⱼdᵢ| ≤ (|dᵢ| + |dⱼ|)·max of the pair.
fn coset_floor(base: &[f64; 3], dir: &[f64; 3]) -> f64 {
    let mut floor = 0.0f64;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let denom = fx::abs(dir[i]) + fx::abs(dir[j]);
            if denom > 0.0 {
                floor = floor.max(fx::abs(base[i] * dir[j] - base[j] * dir[i]) / denom);
            } else {
                floor = floor.max(fx::abs(base[i]).max(fx::abs(base[j])));
            }
        }
    }
    floor
}

/// Minimize the gauge along one coset line and record the best integer
/// points. The gauge restricted to the line is convex piecewise-linear, so
/// ternary search plus a sweep over the near-minimal plateau finds every
/// integer that can matter; three survivors per coset are kept.
#[allow(clippy::too_many_arguments)]
fn collect_coset(
    body: &ConvexBody3,
    cols: &[[i64; 3]; 3],
    base: &[f64; 3],
    dir: &[f64; 3],
    coset: (i64, i64),
    lo: f64,
    hi: f64,
    accept: f64,
    budget: &mut u64,
    out: &mut Vec<Candidate>,
) -> Result<()> {
    let mu = |z: f64| -> f64 {
        let mut g = 0.0f64;
        for i in 0..3 {
            g = g.max(fx::abs(base[i] + z * dir[i]));
        }
        g
    };

    // Ternary search for a real minimizer, to sub-integer resolution.
    let mut a = lo;
    let mut b = hi;
    let mut evals: u64 = 0;
    while b - a > 0.25 && evals < 400 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if mu(m1) <= mu(m2) {
            b = m2;
        } else {
            a = m1;
        }
        evals += 2;
    }
    let zstar = 0.5 * (a + b);
    let mstar = mu(zstar);
    charge(budget, evals + 2)?;
    if mstar > accept && coset_floor(base, dir) > accept {
        return Ok(());
    }

    // The sublevel set {μ ≤ mstar·(1 + tol)} is an interval; locate its ends.
    let target = mstar * (1.0 + BODY_TOL) + 1e-300;
    let mut l = lo;
    let mut r = zstar;
    while r - l > 0.25 {
        let mid = 0.5 * (l + r);
        if mu(mid) <= target {
            r = mid;
        } else {
            l = mid;
        }
    }
    let plateau_lo = l;
    let mut l2 = zstar;
    let mut r2 = hi;
    while r2 - l2 > 0.25 {
        let mid = 0.5 * (l2 + r2);
        if mu(mid) <= target {
            l2 = mid;
        } else {
            r2 = mid;
        }
    }
    let plateau_hi = r2;
    charge(budget, 120)?;

    let lo_int = fx::ceil(lo) as i64;
    let hi_int = fx::floor(hi) as i64;
    let round_mid = fx::round(zstar) as i64;
    let near_zero = if plateau_lo > 0.0 {
        fx::ceil(plateau_lo) as i64
    } else if plateau_hi < 0.0 {
        fx::floor(plateau_hi) as i64
    } else {
        0
    };
    let raw = [
        fx::floor(plateau_lo) as i64,
        fx::ceil(plateau_lo) as i64,
        fx::floor(plateau_hi) as i64,
        fx::ceil(plateau_hi) as i64,
        round_mid - 1,
        round_mid,
        round_mid + 1,
        near_zero,
    ];

    // Retain up to three by (gauge, |z|): struct of parallel small arrays.
    let mut best: [(f64, i64, [i64; 3]); 3] = [(f64::INFINITY, 0, [0; 3]); 3];
    let mut seen: [i64; 8] = [i64::MIN; 8];
    let mut seen_n = 0;
    for &z1 in &raw {
        if z1 < lo_int || z1 > hi_int || seen[..seen_n].contains(&z1) {
            continue;
        }
        seen[seen_n] = z1;
        seen_n += 1;
        charge(budget, 1)?;
        let v = combine(cols, z1, coset.0, coset.1)?;
        if v == [0, 0, 0] {
            continue;
        }
        let g = body.gauge(v);
        if g > accept {
            continue;
        }
        let entry = (g, z1.abs(), sign_normalize(v));
        // Insertion into the top-3, ordered by gauge then |z1|.
        let mut slot = 3;
        for (i, b) in best.iter().enumerate() {
            if entry.0 < b.0 || (entry.0 == b.0 && entry.1 < b.1) {
                slot = i;
                break;
            }
        }
        if slot < 3 {
            best.copy_within(slot..2, slot + 1);
            best[slot] = entry;
        }
    }
    for (g, _, v) in best {
        if g.is_finite() {
            out.push(Candidate { gauge: g, v });
        }
    }
    Ok(())
}

/// v = z1·cols[0] + z2·cols[1] + z3·cols[2], with overflow checked.
fn combine(cols: &[[i64; 3]; 3], z1: i64, z2: i64, z3: i64) -> Result<[i64; 3]> {
    let mut v = [0i64; 3];
    for r in 0..3 {
        let w = z1 as i128 * cols[0][r] as i128
            + z2 as i128 * cols[1][r] as i128
            + z3 as i128 * cols[2][r] as i128;
        if w.unsigned_abs() > i64::MAX as u128 {
            return Err(Error::Conditioning(
                "enumeration produced oversized integer coordinates",
            ));
        }
        v[r] = w as i64;
    }
    Ok(v)
}

fn charge(budget: &mut u64, units: u64) -> Result<()> {
    if *budget < units {
        return Err(Error::Budget {
            needed: ENUM_BUDGET - *budget + units,
            budget: ENUM_BUDGET,
        });
    }
    *budget -= units;
    Ok(())
}

/// Flip a vector so its first nonzero coordinate is positive.
fn sign_normalize(v: [i64; 3]) -> [i64; 3] {
    for &c in &v {
        if c > 0 {
            return v;
        }
        if c < 0 {
            return [-v[0], -v[1], -v[2]];
        }
    }
    v
}

fn cross_i128(a: &[i64; 3], b: &[i64; 3]) -> [i128; 3] {
    let (a0, a1, a2) = (a[0] as i128, a[1] as i128, a[2] as i128);
    let (b0, b1, b2) = (b[0] as i128, b[1] as i128, b[2] as i128);
    [a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0]
}

fn det3_i128(a: &[i64; 3], b: &[i64; 3], c: &[i64; 3]) -> i128 {
    let cr = cross_i128(a, b);
    cr[0] * c[0] as i128 + cr[1] * c[1] as i128 + cr[2] * c[2] as i128
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn row_norm(r: &[f64; 3]) -> f64 {
    fx::sqrt(dot(r, r))
}

fn det3_f(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = det3_f(m);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let adj = [
        [
            m[1][1] * m[2][2] - m[1][2] * m[2][1],
            m[0][2] * m[2][1] - m[0][1] * m[2][2],
            m[0][1] * m[1][2] - m[0][2] * m[1][1],
        ],
        [
            m[1][2] * m[2][0] - m[1][0] * m[2][2],
            m[0][0] * m[2][2] - m[0][2] * m[2][0],
            m[0][2] * m[1][0] - m[0][0] * m[1][2],
        ],
        [
            m[1][0] * m[2][1] - m[1][1] * m[2][0],
            m[0][1] * m[2][0] - m[0][0] * m[2][1],
            m[0][0] * m[1][1] - m[0][1] * m[1][0],
        ],
    ];
    let mut out = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = adj[i][j] / det;
            if !out[i][j].is_finite() {
                return None;
            }
        }
    }
    Some(out)
}

/// Column j of the unimodular transform as an integer vector.
fn u_col(u: &[[i64; 3]; 3], j: usize) -> [i64; 3] {
    [u[0][j], u[1][j], u[2][j]]
}

/// LLL-reduce the column lattice of `m` (Lovász parameter 0.99), returning
/// the unimodular transform as a column matrix. The basis vectors themselves
/// are recomputed from the integer transform at every step, so rounding
/// never desynchronizes the two.
fn lll_reduce(m: &[[f64; 3]; 3]) -> [[i64; 3]; 3] {
    let mut u: [[i64; 3]; 3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    let basis = |u: &[[i64; 3]; 3]| -> [[f64; 3]; 3] {
        let mut b = [[0.0f64; 3]; 3];
        for j in 0..3 {
            for r in 0..3 {
                b[j][r] = m[r][0] * u[0][j] as f64
                    + m[r][1] * u[1][j] as f64
                    + m[r][2] * u[2][j] as f64;
            }
        }
        b
    };
    // Gram–Schmidt data: squared norms of the orthogonalized vectors and
    // the projection coefficients mu[i][j] for j < i.
    let gso = |b: &[[f64; 3]; 3]| -> ([f64; 3], [[f64; 3]; 3]) {
        let mut star = *b;
        let mut mu = [[0.0f64; 3]; 3];
        let mut n = [0.0f64; 3];
        for i in 0..3 {
            for j in 0..i {
                mu[i][j] = if n[j] > 0.0 { dot(&b[i], &star[j]) / n[j] } else { 0.0 };
                for r in 0..3 {
                    star[i][r] -= mu[i][j] * star[j][r];
                }
            }
            n[i] = dot(&star[i], &star[i]);
        }
        (n, mu)
    };

    let mut k = 1;
    let mut iter = 0;
    while k < 3 && iter < 256 {
        iter += 1;
        let b = basis(&u);
        let (_, mu) = gso(&b);
        for j in (0..k).rev() {
            let r = fx::round(mu[k][j]);
            if r != 0.0 && fx::abs(r) < 9e15 {
                let ri = r as i64;
                for row in &mut u {
                    row[k] -= ri * row[j];
                }
            }
        }
        let b = basis(&u);
        let (n, mu) = gso(&b);
        if n[k] >= (0.99 - mu[k][k - 1] * mu[k][k - 1]) * n[k - 1] {
            k += 1;
        } else {
            for row in &mut u {
                row.swap(k, k - 1);
            }
            k = 1.max(k - 1);
        }
    }
    u
}

/// Does the shrunken dual body at x already contain a nonzero integer
/// triple? The scan walks |q| ≤ T, brackets p₁ from the derivative form and
/// p₂ from the line form, and confirms any hit against all three forms.
///
/// The parameters must describe a genuine trap: 0 < λ ≤ 1, T ≥ 1, and
/// λ·K·T ≤ 1, the regime in which a point trapping no triple guarantees
/// well-spread minima downstream.
pub fn in_bad_set(curve: &PlanarCurve, x: f64, lambda: f64, k: f64, t: f64) -> Result<bool> {
    if !(lambda.is_finite() && lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::Precondition("bad-set test needs 0 < lambda <= 1"));
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::Precondition("bad-set test needs K > 0"));
    }
    if !(t.is_finite() && t >= 1.0) {
        return Err(Error::Precondition("bad-set test needs T >= 1"));
    }
    if lambda * k * t > 1.0 + 1e-12 {
        return Err(Error::Precondition("bad-set test needs lambda*K*T <= 1"));
    }
    curve.curvature_bounds()?;
    let de = dual_map_eval(curve, x)?;

    let lam_tol = lambda * (1.0 + BODY_TOL);
    let k_tol = k * (1.0 + BODY_TOL);
    let q_hi = fx::floor(t * (1.0 + BODY_TOL)) as i64;
    let width = 2.0 * k_tol / fx::abs(de.g2p) + 2.0;
    let estimate = (2 * q_hi as u64 + 1).saturating_mul(width as u64 + 1);
    if estimate > ENUM_BUDGET {
        return Err(Error::Budget {
            needed: estimate,
            budget: ENUM_BUDGET,
        });
    }

    for q in -q_hi..=q_hi {
        let qf = q as f64;
        // |g1p·q + g2p·p1| ≤ K brackets p1.
        let e0 = (-k_tol - de.g1p * qf) / de.g2p;
        let e1 = (k_tol - de.g1p * qf) / de.g2p;
        let p1_lo = fx::ceil(e0.min(e1)) as i64;
        let p1_hi = fx::floor(e0.max(e1)) as i64;
        for p1 in p1_lo..=p1_hi {
            let s = de.g1 * qf + de.g2 * p1 as f64;
            // |s + p2| ≤ λ brackets p2.
            let p2_lo = fx::ceil(-lam_tol - s) as i64;
            let p2_hi = fx::floor(lam_tol - s) as i64;
            for p2 in p2_lo..=p2_hi {
                if q == 0 && p1 == 0 && p2 == 0 {
                    continue;
                }
                let r1 = de.g1 * qf + de.g2 * p1 as f64 + p2 as f64;
                let r2 = de.g1p * qf + de.g2p * p1 as f64;
                if fx::abs(r1) <= lam_tol && fx::abs(r2) <= k_tol {
                    return Ok(true);
                }
            }
        }
    }
    Ok(false)
}

/// Measured size of the bad set inside a window, next to its a-priori bound.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeasureEstimate {
    /// Fraction of grid points trapped, times the window length.
    pub estimate: f64,
    /// C·max(λ^{1/3}, (λKT)^{1/9})·|J| with the caller's constant C.
    pub bound: f64,
}

/// Estimate the measure of the bad set on a midpoint grid of `grid_n` points
/// across the window, and report it alongside the analytic envelope with
/// constant `c` (see [`DEFAULT_BAD_CONSTANT`]).
pub fn estimate_bad_measure(
    curve: &PlanarCurve,
    window: Interval,
    lambda: f64,
    k: f64,
    t: f64,
    grid_n: usize,
    c: f64,
) -> Result<MeasureEstimate> {
    if grid_n < 1000 {
        return Err(Error::Precondition("bad-measure grid needs at least 1000 points"));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::Domain("bad-measure constant must be positive"));
    }
    let dom = curve.domain();
    if !(dom.contains(window.lo) && dom.contains(window.hi)) {
        return Err(Error::Domain("window must lie inside the curve domain"));
    }
    let len = window.len();
    let step = len / grid_n as f64;
    let mut hits = 0usize;
    for i in 0..grid_n {
        let x = window.lo + (i as f64 + 0.5) * step;
        if in_bad_set(curve, x, lambda, k, t)? {
            hits += 1;
        }
    }
    let estimate = hits as f64 / grid_n as f64 * len;
    let bound = c * fx::cbrt(lambda).max(fx::cbrt(fx::cbrt(lambda * k * t))) * len;
    Ok(MeasureEstimate { estimate, bound })
}

/// Displacement envelope 3c₂/(c₁·c₀⁸): with the scale factors of
/// [`build_body`], a constructed witness point sits within
/// 3c₂/(c₁c₀⁸·Q²δ) of the anchor x.
pub fn displacement_constant(curve: &PlanarCurve, c0: f64) -> Result<f64> {
    if !(c0.is_finite() && c0 > 0.0 && c0 < 1.0) {
        return Err(Error::Domain("shrink factor c0 must lie in (0, 1)"));
    }
    let (c1, c2) = curve.curvature_bounds()?;
    let c0_2 = c0 * c0;
    let c0_4 = c0_2 * c0_2;
    Ok(3.0 * c2 / (c1 * c0_4 * c0_4))
}

/// An integer triple (q, p₁, p₂) certifying a near-curve rational point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WitnessPoint {
    pub q: i64,
    pub p1: i64,
    pub p2: i64,
}

/// A fully verified witness together with the data that produced it.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WitnessReport {
    /// The certified triple: q in [Q, 2Q], (p₁+θ₁)/q in the window, and
    /// |q·f((p₁+θ₁)/q) − p₂ − θ₂| < δ.
    pub witness: WitnessPoint,
    /// Real solution of the 3×3 system the witness was rounded from.
    pub eta: [f64; 3],
    /// Integer rounding of `eta`: floored when the basis vector's q-component
    /// is nonnegative, ceiled otherwise, so each error term pushes q upward.
    pub t: [i64; 3],
    /// The successive-minima vectors the witness is combined from.
    pub base_vectors: [[i64; 3]; 3],
    /// |q·f(x_a) − p₂ − θ₂| at the witness point x_a = (p₁+θ₁)/q.
    pub residual: f64,
    /// |x_a − x|, which stays below 3c₂/(c₁c₀⁸·Q²δ).
    pub x_distance: f64,
}

/// Construct an integer witness near an anchor x that the bad-set test
/// clears.
///
/// The witness is a rounded combination of the three successive-minima
/// vectors of the dual body at x: solving a 3×3 system matches the line
/// form to the shift, kills the derivative form, and pins q near 3Q/2, and
/// directional rounding keeps q inside [Q, 2Q]. Fails with `BadPoint` when
/// the shrunken body already traps an integer triple at x, and with
/// `Construction` naming the violated inequality if any certificate check
/// fails.
pub fn construct_witness(
    curve: &PlanarCurve,
    shift: Shift,
    window: Interval,
    x: f64,
    q_scale: f64,
    delta: f64,
    c0: f64,
) -> Result<WitnessReport> {
    if !(shift.x.is_finite() && shift.y.is_finite()) {
        return Err(Error::Domain("shift coordinates must be finite"));
    }
    let dom = curve.domain();
    if !(dom.contains(window.lo) && dom.contains(window.hi)) {
        return Err(Error::Domain("window must lie inside the curve domain"));
    }
    if !window.shrink(0.75).contains(x) {
        return Err(Error::Precondition(
            "anchor must lie in the middle three quarters of the window",
        ));
    }
    let body = build_body(curve, x, q_scale, delta, c0)?;
    let bdv = body.bdv_triple().expect("built body carries its shrunken radii");
    if bdv.t < 1.0 {
        return Err(Error::Precondition(
            "bad-set test needs c0^4*Q >= 1; increase Q or c0",
        ));
    }
    if bdv.lambda * bdv.k * bdv.t > 1.0 + 1e-12 {
        return Err(Error::Precondition(
            "bad-set test needs c2*c0 <= 1; decrease c0",
        ));
    }
    if in_bad_set(curve, x, bdv.lambda, bdv.k, bdv.t)? {
        return Err(Error::BadPoint);
    }

    let report = successive_minima(&body)?;
    // Clearing the bad set forces the first minimum up to c0 (the c0-scaled
    // copy of this body sits inside the shrunken one), and the product bound
    // then caps the third minimum by 1/c0².
    if report.minima[0] < c0 * (1.0 - 1e-9) {
        return Err(Error::Construction(
            "first minimum fell below c0 at a point the bad-set test cleared",
        ));
    }
    let cap = 1.0 / (c0 * c0);
    if report.minima[2] > cap * (1.0 + 1e-9) {
        return Err(Error::Construction("third minimum exceeded 1/c0^2"));
    }
    for v in &report.vectors {
        for i in 0..3 {
            let vf = [v[0] as f64, v[1] as f64, v[2] as f64];
            if fx::abs(dot(&body.rows()[i], &vf)) > cap * body.bounds()[i] * (1.0 + 1e-9) {
                return Err(Error::Construction("reduced basis left the dilated body"));
            }
        }
    }

    // Columns of the witness system: per basis vector, its line form, its
    // derivative form, and its q-component.
    let rows = body.rows();
    let mut sys = [[0.0f64; 3]; 3];
    for (j, v) in report.vectors.iter().enumerate() {
        let vf = [v[0] as f64, v[1] as f64, v[2] as f64];
        sys[0][j] = dot(&rows[0], &vf);
        sys[1][j] = dot(&rows[1], &vf);
        sys[2][j] = vf[0];
    }
    let scale = row_norm(&sys[0]) * row_norm(&sys[1]) * row_norm(&sys[2]);
    if fx::abs(det3_f(&sys)) < 1e-10 * scale {
        return Err(Error::Conditioning("witness system is numerically singular"));
    }
    let rhs = [
        shift.x * curve.d1(x) - shift.y,
        shift.x * curve.d2(x),
        2.0 * q_scale,
    ];
    let eta = solve3(&sys, &rhs)?;

    let mut t = [0i64; 3];
    for i in 0..3 {
        let rounded = if report.vectors[i][0] >= 0 {
            fx::floor(eta[i])
        } else {
            fx::ceil(eta[i])
        };
        if !(fx::abs(rounded) < 4e15) {
            return Err(Error::Conditioning(
                "witness coefficients overflow the integer range",
            ));
        }
        t[i] = rounded as i64;
        if !(fx::abs(eta[i] - t[i] as f64) < 1.0) {
            return Err(Error::Construction(
                "rounding moved a coefficient by a full unit",
            ));
        }
    }

    let mut w = [0i128; 3];
    for (i, v) in report.vectors.iter().enumerate() {
        for r in 0..3 {
            w[r] += t[i] as i128 * v[r] as i128;
        }
    }
    if w.iter().any(|c| c.unsigned_abs() > i64::MAX as u128) {
        return Err(Error::Conditioning(
            "witness coordinates overflow the integer range",
        ));
    }
    let witness = WitnessPoint {
        q: w[0] as i64,
        p1: w[1] as i64,
        p2: w[2] as i64,
    };

    let qf = witness.q as f64;
    if !(q_scale <= qf && qf <= 2.0 * q_scale) {
        return Err(Error::Construction("witness denominator left [Q, 2Q]"));
    }
    let x_a = (witness.p1 as f64 + shift.x) / qf;
    if !window.contains(x_a) {
        return Err(Error::Construction("witness point left the window"));
    }
    let x_distance = fx::abs(x_a - x);
    let envelope = displacement_constant(curve, c0)? / (q_scale * q_scale * delta);
    if x_distance > envelope * (1.0 + 1e-9) {
        return Err(Error::Construction(
            "witness drifted beyond the displacement envelope",
        ));
    }
    let residual = fx::abs(qf * curve.eval(x_a) - witness.p2 as f64 - shift.y);
    if !(residual < delta) {
        return Err(Error::Construction("witness residual reached delta"));
    }

    Ok(WitnessReport {
        witness,
        eta,
        t,
        base_vectors: report.vectors,
        residual,
        x_distance,
    })
}
