//! Acceptance gate: thirteen criteria, one printed PASS/FAIL line each.
//!
//! Run with `cargo test --test acceptance -- --test-threads=1 --nocapture`
//! to see the lines in order; the numeric assertions hold either way.
//!
//! Three criteria contain clauses this implementation does not meet, and
//! the suite reports them as FAIL lines while asserting the measured
//! behavior so regressions are still caught:
//!
//! * c04: the line-curve negative control grows by exactly 3.4x (not the
//!   claimed 4x) when delta drops from 2^-4 to 2^-8 at Q = 2^10, because
//!   the line's count does not thin with delta and the comparison bound
//!   still carries a delta^{-1/2}Q term at this scale.
//! * c09: the kernel value at the band edge |x| = delta dips to ~0.409,
//!   below the claimed 2/pi = 0.6366; the provable band floor is
//!   (2/pi)^2 = 4/pi^2, which is what the kernel module pins.
//! * c12: a full-domain fast count at Q = 1e5 needs ~1.5e10 level
//!   inversions, so the counter refuses it against the default work
//!   budget instead of finishing under a second.

use std::time::{Duration, Instant};

use nearcurve_cli::config::ScanConfig;
use nearcurve_cli::scan::run_scan;
use nearcurve_core::bounds::{
    fit_exponents, verify_lower, verify_upper, verify_upper_forced, Grid,
};
use nearcurve_core::boxdim::boxdim_diagnostic;
use nearcurve_core::counting::{count_fast, count_naive, enumerate_points, CountQuery, Shift};
use nearcurve_core::covering::{calibrate, CANONICAL_SHIFTS};
use nearcurve_core::curve::PlanarCurve;
use nearcurve_core::kernel::{fejer_eval, kernel_order, smoothed_count, BAND_FLOOR};
use nearcurve_core::lattice::{build_body, construct_witness, successive_minima};
use nearcurve_core::num::Interval;
use nearcurve_core::psi::{dimension_formula, Psi, SeriesMode, Verdict};
use nearcurve_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Reproduction tolerance for frozen measured values.
const FROZEN_REL: f64 = 1e-9;
// Tolerance for closed-form spot values.
const EXACT_ABS: f64 = 1e-12;

// c01
const ORACLE_QUERIES: usize = 200;
const ORACLE_SEED: u64 = 1776;
const ORACLE_TIME: Duration = Duration::from_secs(60);

// c04
const UPPER_SUP_CAP: f64 = 10.0;
const UPPER_GROWTH_CAP: f64 = 1.5;
const UPPER_SUP_FROZEN: f64 = 3.06666181390623827;
const UPPER_SMALL_FROZEN: f64 = 3.05364530155811398;
const NEG_CONTROL_CLAIM: f64 = 4.0;
const NEG_CONTROL_GROWTH_FROZEN: f64 = 3.39999999999999991;
const UPPER_TIME: Duration = Duration::from_secs(300);

// c05
const LOWER_INF_FLOOR: f64 = 0.5;
const LOWER_INF_FROZEN: f64 = 0.75001377239823341;
const DENSITY_LO: f64 = 0.4;
const DENSITY_HI: f64 = 2.5;
const DENSITY_GATE: f64 = 1e4;
const LOWER_COUNTS_FROZEN: [(f64, f64, u64); 4] = [
    (16384.0, 0.25, 50345926),
    (16384.0, 0.5, 100667023),
    (32768.0, 0.25, 201331832),
    (32768.0, 0.5, 402660578),
];

// c06: frozen constants a fresh calibration must reproduce per curve.
const COVER_FLOOR: f64 = 0.5;
struct CalibFixture {
    spec: &'static str,
    j: (f64, f64),
    q_exps: (u32, u32),
    k1: f64,
    q0: f64,
    c1_const: f64,
}
const CALIB_FIXTURES: [CalibFixture; 3] = [
    CalibFixture {
        spec: "parabola@[0,1]",
        j: (0.45, 0.4502),
        q_exps: (14, 17),
        k1: 49152.0,
        q0: 98304.0,
        c1_const: 5.46071739065805729e6,
    },
    CalibFixture {
        spec: "cubic@[1,2]",
        j: (1.31, 1.31002),
        q_exps: (16, 19),
        k1: 131072.0,
        q0: 262144.0,
        c1_const: 1.09214375116743557e7,
    },
    CalibFixture {
        spec: "exp@[0,1]",
        j: (0.3, 0.30005),
        q_exps: (15, 18),
        k1: 98304.0,
        q0: 196608.0,
        c1_const: 1.48437891578813568e7,
    },
];

// c07
const BODY_SAMPLES: usize = 1000;
const BODY_SEED: u64 = 7001;
const MINKOWSKI_CAP: f64 = 8.0;
const MINKOWSKI_FLOOR: f64 = 8.0 / 6.0;
const VOLUME_REL: f64 = 1e-9;

// c08
const WITNESS_ANCHORS: usize = 1000;
const WITNESS_BAD_FROZEN: usize = 494;
const WITNESS_BUILT_FROZEN: usize = 506;

// c09
const KERNEL_SAMPLES: usize = 100_000;
const KERNEL_SEED: u64 = 90210;
const KERNEL_CLAIM: f64 = 2.0 / core::f64::consts::PI;
const KERNEL_MIN_FROZEN: f64 = 0.40896816033458855;
const SMOOTHED_SEED: u64 = 424242;
const SMOOTHED_WORST_FROZEN: f64 = 1.35703484636912064;

// c10
const SERIES_OFF_BAND: f64 = 0.02;
const SERIES_CHECKED_FROZEN: usize = 773;

// c11
const ALPHA_Q_BAND: (f64, f64) = (1.9, 2.1);
const ALPHA_DELTA_BAND: (f64, f64) = (0.9, 1.1);
const ALPHA_Q_FROZEN: f64 = 1.99173634555179446;
const ALPHA_DELTA_FROZEN: f64 = 0.96681752216961137;

// c12
const FAST_REFUSAL_NEEDED: u64 = 15000750000;
const FAST_REFUSAL_BUDGET: u64 = 10000000000;
const NAIVE_COUNT_FROZEN: u64 = 462627;
const NAIVE_TIME: Duration = Duration::from_secs(10);
const SCAN_TIME: Duration = Duration::from_secs(120);

// c13
const BOX_TOL: f64 = 0.2;
const BOX_SLOPES_FROZEN: [(f64, f64); 4] = [
    (0.5, 0.99554195253489808),
    (0.6, 0.96839652706902291),
    (0.7, 0.88322984597895737),
    (0.8, 0.76765641412866092),
];

fn verdict_line(tag: &str, pass: bool, detail: &str) {
    println!("{tag} {} - {detail}", if pass { "PASS" } else { "FAIL" });
}

fn close(x: f64, want: f64, rel: f64) -> bool {
    (x - want).abs() <= rel * want.abs().max(1.0)
}

fn curve(spec: &str) -> PlanarCurve {
    PlanarCurve::parse(spec).unwrap()
}

#[test]
fn c01_fast_and_naive_counters_agree_on_random_queries() {
    let t = Instant::now();
    let curves = [
        curve("parabola@[0,1]"),
        curve("cubic@[0.5,1.5]"),
        curve("exp@[0,1]"),
        curve("circle-arc@[-0.7,0.7]"),
    ];
    let shifts = [
        Shift::ZERO,
        Shift::new(1.0, 0.0),
        Shift::new(0.0, 1.0),
        Shift::new(3.0, -2.0),
        Shift::new(-1.0, 2.0),
        Shift::new(0.5, 0.25),
        Shift::new(0.25, 0.75),
        Shift::new(0.7, -0.3),
        Shift::new(0.41421356, 0.57735027),
        Shift::new(0.6180339887, 0.2360679775),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(ORACLE_SEED);
    for i in 0..ORACLE_QUERIES {
        let curve = &curves[i % curves.len()];
        let qs: f64 = rng.random_range(1.0..=2000.0);
        let exp: f64 = rng.random_range(1.0..=10.0);
        let delta = 0.5f64.powf(exp);
        let shift = shifts[rng.random_range(0..shifts.len())];
        let dom = curve.domain();
        let a = rng.random_range(dom.lo..dom.hi);
        let b = rng.random_range(a..=dom.hi);
        let mut query = CountQuery::new(qs, delta).with_shift(shift);
        if i % 2 == 0 {
            query = query.with_window(Interval::new(a, b.max(a + 1e-9)).unwrap());
        }
        let nf = count_fast(curve, &query).unwrap();
        let nn = count_naive(curve, &query).unwrap();
        assert_eq!(nf, nn, "counter mismatch at i={i} Q={qs} delta={delta}");
    }
    let elapsed = t.elapsed();
    assert!(elapsed < ORACLE_TIME, "oracle sweep took {elapsed:?}");
    verdict_line(
        "C1",
        true,
        &format!("{ORACLE_QUERIES} randomized queries: fast == naive exactly, {elapsed:.2?} < 60s"),
    );
}

#[test]
fn c02_hand_checkable_counts_are_exact() {
    let line = curve("line@[0,1]");
    let parabola = curve("parabola@[0,1]");
    let q_line = CountQuery::new(10.0, 0.1);
    let q_par = CountQuery::new(1.0, 0.25);
    for (name, curve, query, want) in [
        ("line Q=10 d=0.1", &line, &q_line, 165u64),
        ("parabola Q=1 d=0.25", &parabola, &q_par, 2u64),
    ] {
        assert_eq!(count_fast(curve, query).unwrap(), want, "fast count for {name}");
        assert_eq!(count_naive(curve, query).unwrap(), want, "naive count for {name}");
    }
    verdict_line("C2", true, "hand counts exact: line/Q=10/d=0.1 -> 165, parabola/Q=1/d=0.25 -> 2");
}

#[test]
fn c03_integer_shifts_leave_counts_unchanged() {
    let curves = [
        curve("parabola@[0,1]"),
        curve("cubic@[0.5,1.5]"),
        curve("exp@[0,1]"),
    ];
    let int_shifts = [(1.0, 0.0), (0.0, 1.0), (3.0, -2.0)];
    let mut rng = ChaCha8Rng::seed_from_u64(2718);
    for i in 0..50 {
        let curve = &curves[i % 3];
        let qs: f64 = rng.random_range(1.0..=500.0);
        let u: f64 = rng.random_range(1.0..=8.0);
        let delta = 0.5f64.powf(u);
        let dom = curve.domain();
        let a = rng.random_range(dom.lo..dom.hi);
        let b = rng.random_range(a..=dom.hi);
        let window = Interval::new(a, b.max(a + 1e-9)).unwrap();
        let mut base = CountQuery::new(qs, delta);
        if i % 2 == 0 {
            base = base.with_window(window);
        }
        let n0 = count_fast(curve, &base).unwrap();
        for (tx, ty) in int_shifts {
            let mut q = CountQuery::new(qs, delta).with_shift(Shift::new(tx, ty));
            if i % 2 == 0 {
                q = q.with_window(window);
            }
            let n = count_fast(curve, &q).unwrap();
            assert_eq!(n, n0, "shift ({tx},{ty}) changed the count at i={i} Q={qs} delta={delta}");
        }
    }
    verdict_line("C3", true, "50 queries x shifts {(1,0),(0,1),(3,-2)}: counts equal the unshifted count exactly");
}

#[test]
fn c04_upper_bound_envelope_and_line_negative_control() {
    let t = Instant::now();
    let parabola = curve("parabola@[0,1]");
    let grid = Grid::dyadic(6..=12, 1..=8).unwrap();
    let rep = verify_upper(&parabola, Shift::ZERO, &grid, None).unwrap();
    let growth = rep.sup_large_q / rep.sup_small_q;
    assert!(rep.sup_ratio <= UPPER_SUP_CAP, "sup ratio {} above cap", rep.sup_ratio);
    assert!(growth <= UPPER_GROWTH_CAP, "sup grew {growth}x across Q decades");
    assert!(close(rep.sup_ratio, UPPER_SUP_FROZEN, FROZEN_REL), "sup drifted: {}", rep.sup_ratio);
    assert!(
        close(rep.sup_small_q, UPPER_SMALL_FROZEN, FROZEN_REL),
        "small-Q sup drifted: {}",
        rep.sup_small_q
    );

    // Zero-curvature negative control: the bound check itself refuses the
    // line, and forcing it through shows the ratio growing with 1/delta.
    let line = curve("line@[0,1]");
    assert!(verify_upper(&line, Shift::ZERO, &grid, None).is_err());
    let g2 = Grid::new(&[1024.0], &[0.0625, 0.00390625]).unwrap();
    let forced = verify_upper_forced(&line, Shift::ZERO, &g2, None).unwrap();
    let r_lo = forced.cells.iter().find(|c| c.delta > 0.01).unwrap().ratio;
    let r_hi = forced.cells.iter().find(|c| c.delta < 0.01).unwrap().ratio;
    let control_growth = r_hi / r_lo;
    assert!(
        close(control_growth, NEG_CONTROL_GROWTH_FROZEN, FROZEN_REL),
        "control growth drifted: {control_growth}"
    );
    let elapsed = t.elapsed();
    assert!(elapsed < UPPER_TIME, "upper sweep took {elapsed:?}");

    let control_ok = control_growth >= NEG_CONTROL_CLAIM;
    verdict_line(
        "C4",
        control_ok,
        &format!(
            "parabola sup {:.4} <= 10 and decade growth {:.4} <= 1.5 in {elapsed:.2?}; \
             line control grew {control_growth:.4}x (claimed >= {NEG_CONTROL_CLAIM}x)",
            rep.sup_ratio, growth
        ),
    );
    assert!(
        control_growth > 3.0 && control_growth < NEG_CONTROL_CLAIM,
        "control growth left its measured regime: {control_growth}"
    );
}

#[test]
fn c05_windowed_lower_density_floor() {
    let t = Instant::now();
    let flat = curve("poly:[0,0,0.005]@[0,1]");
    let grid = Grid::dyadic(14..=15, 1..=2).unwrap();
    let window = Interval::new(0.375, 0.625).unwrap();
    let rep = verify_lower(&flat, Shift::ZERO, &grid, Some(window), 8192.0, 0.5, 16384.0).unwrap();
    assert!(rep.inf_ratio >= LOWER_INF_FLOOR, "inf ratio {} below floor", rep.inf_ratio);
    assert!(close(rep.inf_ratio, LOWER_INF_FROZEN, FROZEN_REL), "inf drifted: {}", rep.inf_ratio);

    let mut densities = Vec::new();
    for (q_scale, delta, count) in LOWER_COUNTS_FROZEN {
        let cell = rep
            .cells
            .iter()
            .find(|c| c.q_scale == q_scale && c.delta == delta)
            .expect("frozen cell present");
        assert_eq!(cell.count, count, "count drifted at Q={q_scale} delta={delta}");
        let dq2 = delta * q_scale * q_scale;
        if dq2 >= DENSITY_GATE {
            let dens = cell.count as f64 / (3.0 * window.len() * dq2);
            assert!(
                (DENSITY_LO..=DENSITY_HI).contains(&dens),
                "density {dens} outside band at Q={q_scale} delta={delta}"
            );
            densities.push(dens);
        }
    }
    assert_eq!(densities.len(), 4);
    verdict_line(
        "C5",
        true,
        &format!(
            "inf admissible N/(dQ^2) = {:.5} >= 0.5; densities within [0.4, 2.5] on all 4 cells, {:.2?}",
            rep.inf_ratio,
            t.elapsed()
        ),
    );
}

#[test]
fn c06_calibration_succeeds_and_covers_on_three_curves() {
    let t = Instant::now();
    let mut k1s = Vec::new();
    for fx in &CALIB_FIXTURES {
        let c = curve(fx.spec);
        let j = Interval::new(fx.j.0, fx.j.1).unwrap();
        let grid = Grid::dyadic(fx.q_exps.0..=fx.q_exps.1, 1..=3).unwrap();
        let rec = calibrate(&c, &CANONICAL_SHIFTS, j, &grid)
            .unwrap_or_else(|e| panic!("calibration failed for {}: {e}", fx.spec));
        assert_eq!(rec.k1, fx.k1, "k1 drifted for {}", fx.spec);
        assert_eq!(rec.k2, 0.5, "k2 drifted for {}", fx.spec);
        assert_eq!(rec.q0, fx.q0, "q0 drifted for {}", fx.spec);
        assert_eq!(rec.c0, 0.165, "c0 drifted for {}", fx.spec);
        assert!(
            close(rec.c1_const, fx.c1_const, FROZEN_REL),
            "ball constant drifted for {}: {}",
            fx.spec,
            rec.c1_const
        );
        let mut required = 0usize;
        for cell in &rec.evidence {
            if cell.required {
                required += 1;
                assert!(cell.pass, "required cell failed for {}", fx.spec);
                let ratio = cell.min_ratio.expect("required cell carries a ratio");
                assert!(
                    ratio >= COVER_FLOOR,
                    "cover ratio {ratio} below 1/2 at Q={} delta={} for {}",
                    cell.q_scale,
                    cell.delta,
                    fx.spec
                );
            }
        }
        assert!(required > 0, "no required cells for {}", fx.spec);
        k1s.push(rec.k1);
    }
    verdict_line(
        "C6",
        true,
        &format!(
            "calibration converged on parabola/cubic/exp (k1 = {:?}) and every required cell covers >= 1/2 \
             across all 10 shifts, {:.2?}",
            k1s,
            t.elapsed()
        ),
    );
}

#[test]
fn c07_minkowski_product_and_body_volume() {
    let curves = [
        curve("parabola@[0,1]"),
        curve("cubic@[0.5,1.5]"),
        curve("exp@[0,1]"),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(BODY_SEED);
    let mut prod_range = (f64::INFINITY, 0.0f64);
    for i in 0..BODY_SAMPLES {
        let curve = &curves[i % 3];
        let dom = curve.domain();
        let u: f64 = rng.random_range(0.05..=0.95);
        let x = dom.lo + u * (dom.hi - dom.lo);
        let q: f64 = 2f64.powf(rng.random_range(10.0..=12.0));
        let delta: f64 = 2f64.powf(-rng.random_range(1.0..=4.0));
        let c0: f64 = rng.random_range(0.2..=0.35);
        let body = build_body(curve, x, q, delta, c0).unwrap();
        let rep = successive_minima(&body).unwrap();
        let prod = rep.minima[0] * rep.minima[1] * rep.minima[2] * rep.volume;
        prod_range = (prod_range.0.min(prod), prod_range.1.max(prod));
        assert!(prod <= MINKOWSKI_CAP * (1.0 + 1e-9), "minima product {prod} above 8 at i={i}");
        assert!(prod >= MINKOWSKI_FLOOR * (1.0 - 1e-9), "minima product {prod} below 4/3 at i={i}");
        let c2 = curve.curvature_bounds().unwrap().1;
        let want = 8.0 * c2 / curve.d2(x).abs();
        assert!(
            close(rep.volume, want, VOLUME_REL),
            "volume {} != 8*c2/|f''(x)| = {want} at i={i}",
            rep.volume
        );
    }
    verdict_line(
        "C7",
        true,
        &format!(
            "1000 sampled bodies: minima product in [{:.3}, {:.3}] <= 8, volume matches 8*c2/|f''(x)| to 1e-9",
            prod_range.0, prod_range.1
        ),
    );
}

#[test]
fn c08_witnesses_verify_and_appear_in_enumeration() {
    let t = Instant::now();
    let parabola = curve("parabola@[0,1]");
    let window = Interval::new(0.43, 0.57).unwrap();
    let inner = window.shrink(0.75);
    let shift = Shift::new(0.41421356, 0.57735027);
    let (q_scale, delta, c0) = (131072.0, 0.5, 0.165);
    let mut bad = 0usize;
    let mut built = 0usize;
    for i in 0..WITNESS_ANCHORS {
        let x = inner.lo + (i as f64 + 0.5) * inner.len() / WITNESS_ANCHORS as f64;
        match construct_witness(&parabola, shift, window, x, q_scale, delta, c0) {
            Err(Error::BadPoint) => bad += 1,
            Err(e) => panic!("witness construction failed at anchor {x}: {e}"),
            Ok(rep) => {
                built += 1;
                let w = rep.witness;
                let xa = (w.p1 as f64 + shift.x) / w.q as f64;
                let jq = CountQuery::new(q_scale, delta)
                    .with_shift(shift)
                    .with_window(Interval::new(xa - 1e-7, xa + 1e-7).unwrap());
                let pts = enumerate_points(&parabola, &jq).unwrap();
                assert!(
                    pts.iter().any(|p| p.q == w.q && p.p1 == w.p1),
                    "witness ({}, {}) missing from enumeration near {xa}",
                    w.q,
                    w.p1
                );
            }
        }
    }
    assert_eq!(bad, WITNESS_BAD_FROZEN, "bad-anchor count drifted");
    assert_eq!(built, WITNESS_BUILT_FROZEN, "witness count drifted");
    verdict_line(
        "C8",
        true,
        &format!(
            "{built}/{} non-bad anchors produced verified witnesses, all present in enumeration \
             ({bad} bad anchors), {:.2?}",
            WITNESS_ANCHORS,
            t.elapsed()
        ),
    );
}

#[test]
fn c09_kernel_band_floor_and_smoothed_domination() {
    let mut rng = ChaCha8Rng::seed_from_u64(KERNEL_SEED);
    let mut min_k = f64::INFINITY;
    for _ in 0..KERNEL_SAMPLES {
        let delta: f64 = rng.random_range(0.001..=0.5);
        let x = rng.random_range(-delta..=delta);
        let m = kernel_order(delta).unwrap();
        min_k = min_k.min(fejer_eval(m, x));
    }
    assert!(close(min_k, KERNEL_MIN_FROZEN, FROZEN_REL), "kernel band minimum drifted: {min_k}");
    assert!(
        min_k > BAND_FLOOR && min_k < KERNEL_CLAIM,
        "kernel band minimum {min_k} left ({BAND_FLOOR}, {KERNEL_CLAIM})"
    );

    let curves = [
        curve("parabola@[0,1]"),
        curve("cubic@[0.5,1.5]"),
        curve("exp@[0,1]"),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(SMOOTHED_SEED);
    let mut worst = f64::INFINITY;
    for i in 0..50 {
        let curve = &curves[i % 3];
        let qs: f64 = rng.random_range(8.0..512.0);
        let delta: f64 = rng.random_range(0.01..=0.5);
        let shift = Shift::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let query = CountQuery::new(qs, delta).with_shift(shift);
        let n = count_fast(curve, &query).unwrap();
        let s = smoothed_count(curve, &query).unwrap();
        let margin = if n == 0 {
            f64::INFINITY
        } else {
            core::f64::consts::FRAC_PI_2 * s / n as f64
        };
        worst = worst.min(margin);
    }
    assert!(worst >= 1.0, "smoothed count fell below the true count: margin {worst}");
    assert!(close(worst, SMOOTHED_WORST_FROZEN, FROZEN_REL), "worst margin drifted: {worst}");

    let floor_ok = min_k >= KERNEL_CLAIM;
    verdict_line(
        "C9",
        floor_ok,
        &format!(
            "band kernel min {min_k:.5} vs claimed 2/pi = {KERNEL_CLAIM:.5} (provable floor 4/pi^2 = {BAND_FLOOR:.5}); \
             (pi/2)*smoothed/N worst margin {worst:.4} >= 1 on 50 queries"
        ),
    );
}

#[test]
fn c10_series_thresholds_and_dimension_spot_values() {
    let mut checked = 0usize;
    for iv in 0..20 {
        let v = 0.5 + 0.9 * iv as f64 / 19.0;
        let psi = Psi::power(v).unwrap();
        for is in 0..20 {
            let s = 0.51 + (1.0 - 0.51) * is as f64 / 19.0;
            let star = (2.0 - v) / (1.0 + v);
            if (s - star).abs() >= SERIES_OFF_BAND {
                let rep = psi.series_classify(s, SeriesMode::Curve).unwrap();
                let want = if s > star { Verdict::Converges } else { Verdict::Diverges };
                assert_eq!(rep.verdict, want, "curve-mode verdict at v={v} s={s}");
                checked += 1;
            }
            let sp = 0.1 + (2.0 - 0.1) * is as f64 / 19.0;
            let star_p = 3.0 / (1.0 + v);
            if (sp - star_p).abs() >= SERIES_OFF_BAND {
                let rep = psi.series_classify(sp, SeriesMode::Planar).unwrap();
                let want = if sp > star_p { Verdict::Converges } else { Verdict::Diverges };
                assert_eq!(rep.verdict, want, "planar-mode verdict at v={v} s={sp}");
                checked += 1;
            }
        }
    }
    assert_eq!(checked, SERIES_CHECKED_FROZEN, "off-band cell count drifted");

    for (lam, want) in [(0.5, 1.0), (0.8, 2.0 / 3.0), (0.75, 5.0 / 7.0)] {
        let d = dimension_formula(lam).unwrap();
        assert!((d - want).abs() <= EXACT_ABS, "dimension at {lam}: {d} != {want}");
    }
    verdict_line(
        "C10",
        true,
        &format!("{checked} off-band verdicts match the threshold in both modes; dimension spots 1, 2/3, 5/7 exact"),
    );
}

#[test]
fn c11_count_scaling_exponents() {
    let t = Instant::now();
    let parabola = curve("parabola@[0,1]");
    let grid = Grid::dyadic(6..=12, 1..=8).unwrap();
    let rep = verify_lower(&parabola, Shift::ZERO, &grid, None, 64.0, 0.5, 64.0).unwrap();
    let (aq, ad) = fit_exponents(&rep.cells).unwrap();
    assert!(
        (ALPHA_Q_BAND.0..=ALPHA_Q_BAND.1).contains(&aq),
        "alpha_Q {aq} outside [1.9, 2.1]"
    );
    assert!(
        (ALPHA_DELTA_BAND.0..=ALPHA_DELTA_BAND.1).contains(&ad),
        "alpha_delta {ad} outside [0.9, 1.1]"
    );
    assert!(close(aq, ALPHA_Q_FROZEN, FROZEN_REL), "alpha_Q drifted: {aq}");
    assert!(close(ad, ALPHA_DELTA_FROZEN, FROZEN_REL), "alpha_delta drifted: {ad}");
    verdict_line(
        "C11",
        true,
        &format!("fitted growth exponents (alpha_Q, alpha_delta) = ({aq:.4}, {ad:.4}) inside the bands, {:.2?}", t.elapsed()),
    );
}

#[test]
fn c12_performance_envelope() {
    // Full-domain fast count at Q = 1e5: the work estimate exceeds the
    // default budget, so the counter refuses instead of running.
    let parabola = curve("parabola@[0,1]");
    let big = CountQuery::new(1e5, 1e-3);
    let refusal = count_fast(&parabola, &big);
    let fast_ok = refusal.is_ok();
    match refusal {
        Err(Error::Budget { needed, budget }) => {
            assert_eq!(needed, FAST_REFUSAL_NEEDED, "work estimate drifted");
            assert_eq!(budget, FAST_REFUSAL_BUDGET, "default budget drifted");
        }
        other => panic!("expected a budget refusal at Q=1e5, got {other:?}"),
    }

    let t = Instant::now();
    let n = count_naive(&parabola, &CountQuery::new(1e4, 1e-3)).unwrap();
    let naive_elapsed = t.elapsed();
    assert_eq!(n, NAIVE_COUNT_FROZEN);
    assert!(naive_elapsed < NAIVE_TIME, "naive count took {naive_elapsed:?}");

    // Grid scan over the full upper-bound grid, 8 threads vs serial;
    // artifacts must match byte for byte outside the config echo.
    let t = Instant::now();
    let dir = std::env::temp_dir().join("nearcurve-acceptance-c12");
    let cfg_json = |threads: u32| {
        let out = dir.join(format!("scan-t{threads}.csv"));
        format!(
            r#"{{
                "curve": "parabola@[0,1]",
                "shifts": [[0.0, 0.0]],
                "q_values": [64, 128, 256, 512, 1024, 2048, 4096],
                "delta_values": [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625],
                "modes": ["upper"],
                "threads": {threads},
                "out_csv": "{}"
            }}"#,
            out.display()
        )
    };
    let strip_config = |csv: &str| -> String {
        csv.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
    };
    let par = run_scan(&ScanConfig::from_json(&cfg_json(8)).unwrap()).unwrap();
    let ser = run_scan(&ScanConfig::from_json(&cfg_json(1)).unwrap()).unwrap();
    let scan_elapsed = t.elapsed();
    assert!(par.summary.pass, "scan thresholds failed");
    let par_csv = std::fs::read_to_string(par.csv_path.as_ref().unwrap()).unwrap();
    let ser_csv = std::fs::read_to_string(ser.csv_path.as_ref().unwrap()).unwrap();
    assert_eq!(
        strip_config(&par_csv),
        strip_config(&ser_csv),
        "parallel and serial scans differ"
    );
    assert!(scan_elapsed < SCAN_TIME, "scan pair took {scan_elapsed:?}");

    verdict_line(
        "C12",
        fast_ok,
        &format!(
            "fast count at Q=1e5 refused (needs {FAST_REFUSAL_NEEDED} level steps > budget {FAST_REFUSAL_BUDGET}) \
             instead of finishing < 1s; naive Q=1e4 -> {n} in {naive_elapsed:.2?} < 10s; \
             8-thread scan byte-identical to serial in {scan_elapsed:.2?} < 120s"
        ),
    );
}

#[test]
fn c13_box_dimension_slope_trend() {
    let t = Instant::now();
    let parabola = curve("parabola@[0,1]");
    let shift = Shift::new(0.41421356, 0.57735027);
    let q_max = 16384.0f64;
    let mut slopes = Vec::new();
    for (v, frozen) in BOX_SLOPES_FROZEN {
        let floor = q_max.powf(-(1.0 + v));
        let mut scales = vec![0.1];
        while scales.last().unwrap() * 0.5 >= floor {
            let s = scales.last().unwrap() * 0.5;
            scales.push(s);
        }
        let d = boxdim_diagnostic(&parabola, shift, v, q_max, &scales).unwrap();
        assert!(close(d.slope, frozen, FROZEN_REL), "slope drifted at v={v}: {}", d.slope);
        if v == 0.5 || v == 0.8 {
            assert!(
                (d.slope - d.target).abs() <= BOX_TOL,
                "slope {} at v={v} misses target {} by more than {BOX_TOL}",
                d.slope,
                d.target
            );
        }
        slopes.push(d.slope);
    }
    for w in slopes.windows(2) {
        assert!(w[1] < w[0], "slope not strictly decreasing in v: {slopes:?}");
    }
    verdict_line(
        "C13",
        true,
        &format!(
            "box-count slopes {:.4?} decrease in v; v=0.5 and v=0.8 within 0.2 of (2-v)/(1+v), {:.2?}",
            slopes,
            t.elapsed()
        ),
    );
}
