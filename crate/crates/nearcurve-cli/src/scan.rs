//! Grid scans: cells fan out over a thread pool, results merge through one
//! collector in (mode, Q, δ, shift) order, so serial and parallel runs emit
//! byte-identical artifacts.

use std::path::PathBuf;
use std::time::Instant;

use nearcurve_core::bounds::{fit_exponents, BoundCell};
use nearcurve_core::counting::{count_fast, CountQuery};
use nearcurve_core::covering::union_measure;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Mode, ResolvedScan, ScanConfig};
use crate::report;

/// Surrogate thresholds the summary verdicts are judged against. The upper
/// law must stay bounded and stop growing across the Q axis; the lower law
/// and the covering measure must not dip below half; the fitted exponents
/// must bracket N ~ δQ².
pub const UPPER_SUP_CAP: f64 = 10.0;
pub const UPPER_GROWTH_CAP: f64 = 1.5;
pub const LOWER_INF_FLOOR: f64 = 0.5;
pub const COVER_RATIO_FLOOR: f64 = 0.5;
pub const ALPHA_Q_BAND: (f64, f64) = (1.9, 2.1);
pub const ALPHA_DELTA_BAND: (f64, f64) = (0.9, 1.1);

/// One evaluated (mode, Q, δ, shift) cell. `value` is the mode's headline
/// number: count/bound ratio for the bound modes, covered fraction for the
/// covering mode.
#[derive(Clone, Debug, Serialize)]
pub struct CellRow {
    pub mode: Mode,
    pub q_scale: f64,
    pub delta: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub count: Option<u64>,
    pub value: Option<f64>,
    pub admissible: bool,
    pub error: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// No cell produced a usable number (all refused or none admissible).
    NoData,
}

#[derive(Clone, Debug, Serialize)]
pub struct UpperSummary {
    pub sup_ratio: f64,
    pub sup_small_q: f64,
    pub sup_large_q: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerSummary {
    pub inf_ratio: f64,
    pub admissible_cells: usize,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoveringSummary {
    pub min_ratio: f64,
    pub admissible_cells: usize,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentSummary {
    pub alpha_q: Option<f64>,
    pub alpha_delta: Option<f64>,
    pub error: Option<String>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanSummary {
    pub cells: usize,
    pub cell_errors: usize,
    pub upper: Option<UpperSummary>,
    pub lower: Option<LowerSummary>,
    pub covering: Option<CoveringSummary>,
    pub exponents: Option<ExponentSummary>,
    /// True only when every requested surrogate verdict is `Pass`.
    pub pass: bool,
    /// True when some requested surrogate is `Fail` (as opposed to merely
    /// lacking data); drives the falsification exit code.
    pub falsified: bool,
}

pub struct ScanOutcome {
    pub rows: Vec<CellRow>,
    pub summary: ScanSummary,
    pub elapsed_s: f64,
    pub csv_path: Option<PathBuf>,
    pub json_path: Option<PathBuf>,
}

/// Run every requested mode over the grid and write the configured
/// artifacts. Cell evaluation errors are recorded in their rows; only
/// configuration problems and IO failures error out of the scan itself.
pub fn run_scan(cfg: &ScanConfig) -> anyhow::Result<ScanOutcome> {
    let rt = cfg.resolve()?;
    let t0 = Instant::now();

    let mut items: Vec<(Mode, f64, f64, usize)> = Vec::new();
    for &mode in &rt.cell_modes {
        for &q in rt.grid.q_values() {
            for &d in rt.grid.delta_values() {
                for si in 0..rt.shifts.len() {
                    items.push((mode, q, d, si));
                }
            }
        }
    }

    let rows: Vec<CellRow> = if rt.threads == 1 {
        items.iter().map(|it| eval_cell(&rt, *it)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(rt.threads)
            .build()
            .map_err(|e| anyhow::anyhow!("thread pool: {e}"))?;
        // Indexed parallel collect preserves item order, so the merge is the
        // identity and scheduling can never reorder the artifact.
        pool.install(|| items.par_iter().map(|it| eval_cell(&rt, *it)).collect())
    };

    let summary = summarize(&rt, &rows);
    let elapsed_s = t0.elapsed().as_secs_f64();

    let config_json = serde_json::to_value(cfg)?;
    let config_line = serde_json::to_string(cfg)?;
    if let Some(path) = &cfg.out_csv {
        let body: Vec<String> = rows.iter().map(csv_row).collect();
        let text = report::render_csv(&config_line, CSV_HEADER, &body);
        report::write_text(path, &text)?;
    }
    if let Some(path) = &cfg.out_json {
        #[derive(Serialize)]
        struct Payload<'a> {
            summary: &'a ScanSummary,
            rows: &'a [CellRow],
        }
        report::write_json(path, config_json, Payload { summary: &summary, rows: &rows })?;
    }

    Ok(ScanOutcome {
        rows,
        summary,
        elapsed_s,
        csv_path: cfg.out_csv.clone(),
        json_path: cfg.out_json.clone(),
    })
}

pub const CSV_HEADER: &str = "mode,q_scale,delta,theta1,theta2,count,value,admissible,error";

fn csv_row(r: &CellRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        r.mode.name(),
        report::sig17(r.q_scale),
        report::sig17(r.delta),
        report::sig17(r.theta1),
        report::sig17(r.theta2),
        r.count.map(|c| c.to_string()).unwrap_or_default(),
        r.value.map(report::sig17).unwrap_or_default(),
        r.admissible,
        report::csv_field(r.error.as_deref().unwrap_or("")),
    )
}

fn eval_cell(rt: &ResolvedScan, (mode, q, d, si): (Mode, f64, f64, usize)) -> CellRow {
    let shift = rt.shifts[si];
    let admissible = d * q >= rt.k1 * (1.0 - 1e-12) && d <= rt.k2 * (1.0 + 1e-12) && q > rt.q0;
    let mut row = CellRow {
        mode,
        q_scale: q,
        delta: d,
        theta1: shift.x,
        theta2: shift.y,
        count: None,
        value: None,
        admissible,
        error: None,
    };
    match mode {
        Mode::Upper | Mode::Lower => {
            if mode == Mode::Upper {
                // The upper law is meaningless without curvature; record the
                // refusal per cell so the scan still completes.
                if let Err(e) = rt.curve.curvature_bounds() {
                    row.error = Some(e.to_string());
                    return row;
                }
                row.admissible = true;
            }
            let mut query = CountQuery::new(q, d).with_shift(shift).with_budget(rt.budget);
            if let Some(w) = rt.window {
                query = query.with_window(w);
            }
            match count_fast(&rt.curve, &query) {
                Ok(n) => {
                    row.count = Some(n);
                    let bound = match mode {
                        Mode::Upper => d * q * q + q / d.sqrt(),
                        _ => d * q * q,
                    };
                    row.value = Some(n as f64 / bound);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
        }
        Mode::Covering => {
            let window = rt.window.unwrap_or_else(|| rt.curve.domain());
            let c1 = rt.c1_const.expect("resolve() pins a ball constant for covering scans");
            match union_measure(&rt.curve, shift, q, d, window, c1) {
                Ok(rep) => {
                    row.count = Some(rep.count);
                    row.value = Some(rep.ratio);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
        }
        Mode::Exponents => unreachable!("exponents is folded into lower cells"),
    }
    row
}

fn summarize(rt: &ResolvedScan, rows: &[CellRow]) -> ScanSummary {
    let qs = rt.grid.q_values();
    let mid_lo = qs[(qs.len() - 1) / 2];
    let mid_hi = qs[qs.len() / 2];

    let mut upper: Option<UpperSummary> = None;
    if rt.cell_modes.contains(&Mode::Upper) {
        let mut sup: f64 = 0.0;
        let mut sup_small: f64 = 0.0;
        let mut sup_large: f64 = 0.0;
        let mut seen = false;
        for r in rows.iter().filter(|r| r.mode == Mode::Upper) {
            if let Some(v) = r.value {
                seen = true;
                sup = sup.max(v);
                if r.q_scale <= mid_lo {
                    sup_small = sup_small.max(v);
                }
                if r.q_scale >= mid_hi {
                    sup_large = sup_large.max(v);
                }
            }
        }
        let verdict = if !seen {
            Verdict::NoData
        } else if sup <= UPPER_SUP_CAP && sup_large <= UPPER_GROWTH_CAP * sup_small {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        upper = Some(UpperSummary { sup_ratio: sup, sup_small_q: sup_small, sup_large_q: sup_large, verdict });
    }

    let mut lower: Option<LowerSummary> = None;
    if rt.cell_modes.contains(&Mode::Lower) {
        let mut inf = f64::INFINITY;
        let mut n_adm = 0usize;
        for r in rows.iter().filter(|r| r.mode == Mode::Lower && r.admissible) {
            if let Some(v) = r.value {
                inf = inf.min(v);
                n_adm += 1;
            }
        }
        let verdict = if n_adm == 0 {
            Verdict::NoData
        } else if inf >= LOWER_INF_FLOOR {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        lower = Some(LowerSummary { inf_ratio: inf, admissible_cells: n_adm, verdict });
    }

    let mut covering: Option<CoveringSummary> = None;
    if rt.cell_modes.contains(&Mode::Covering) {
        let mut min = f64::INFINITY;
        let mut n_adm = 0usize;
        for r in rows.iter().filter(|r| r.mode == Mode::Covering && r.admissible) {
            if let Some(v) = r.value {
                min = min.min(v);
                n_adm += 1;
            }
        }
        let verdict = if n_adm == 0 {
            Verdict::NoData
        } else if min >= COVER_RATIO_FLOOR {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        covering = Some(CoveringSummary { min_ratio: min, admissible_cells: n_adm, verdict });
    }

    let mut exponents: Option<ExponentSummary> = None;
    if rt.fit_exponents {
        let cells: Vec<BoundCell> = rows
            .iter()
            .filter(|r| r.mode == Mode::Lower)
            .filter_map(|r| {
                Some(BoundCell {
                    q_scale: r.q_scale,
                    delta: r.delta,
                    count: r.count?,
                    bound: r.delta * r.q_scale * r.q_scale,
                    ratio: r.value?,
                    admissible: r.admissible,
                })
            })
            .collect();
        exponents = Some(match fit_exponents(&cells) {
            Ok((aq, ad)) => {
                let ok = (ALPHA_Q_BAND.0..=ALPHA_Q_BAND.1).contains(&aq)
                    && (ALPHA_DELTA_BAND.0..=ALPHA_DELTA_BAND.1).contains(&ad);
                ExponentSummary {
                    alpha_q: Some(aq),
                    alpha_delta: Some(ad),
                    error: None,
                    verdict: if ok { Verdict::Pass } else { Verdict::Fail },
                }
            }
            Err(e) => ExponentSummary {
                alpha_q: None,
                alpha_delta: None,
                error: Some(e.to_string()),
                verdict: Verdict::NoData,
            },
        });
    }

    let verdicts: Vec<Verdict> = [
        upper.as_ref().map(|s| s.verdict),
        lower.as_ref().map(|s| s.verdict),
        covering.as_ref().map(|s| s.verdict),
        exponents.as_ref().map(|s| s.verdict),
    ]
    .into_iter()
    .flatten()
    .collect();

    ScanSummary {
        cells: rows.len(),
        cell_errors: rows.iter().filter(|r| r.error.is_some()).count(),
        upper,
        lower,
        covering,
        exponents,
        pass: verdicts.iter().all(|v| *v == Verdict::Pass),
        falsified: verdicts.iter().any(|v| *v == Verdict::Fail),
    }
}

/// Exit code a finished scan maps to: 0 all requested surrogates pass, 2 any
/// falsified, 1 otherwise (missing data counts as failure to verify, not as
/// falsification).
pub fn scan_exit_code(summary: &ScanSummary) -> i32 {
    if summary.pass {
        0
    } else if summary.falsified {
        2
    } else {
        1
    }
}

/// One line for humans; artifacts carry the full precision.
pub fn scan_headline(summary: &ScanSummary) -> String {
    fn v(tag: &str, v: Option<Verdict>) -> String {
        match v {
            None => format!("{tag}=skip"),
            Some(Verdict::Pass) => format!("{tag}=pass"),
            Some(Verdict::Fail) => format!("{tag}=FAIL"),
            Some(Verdict::NoData) => format!("{tag}=no-data"),
        }
    }
    format!(
        "scan: cells={} errors={} {} {} {} {} -> {}",
        summary.cells,
        summary.cell_errors,
        v("upper", summary.upper.as_ref().map(|s| s.verdict)),
        v("lower", summary.lower.as_ref().map(|s| s.verdict)),
        v("covering", summary.covering.as_ref().map(|s| s.verdict)),
        v("exponents", summary.exponents.as_ref().map(|s| s.verdict)),
        if summary.pass {
            "pass"
        } else if summary.falsified {
            "FALSIFIED"
        } else {
            "incomplete"
        }
    )
}
