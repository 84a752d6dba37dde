//! `nearcurve` — count shifted rational points near planar curves and check
//! the counting laws from the command line.
//!
//! Exit codes: 0 success, 1 domain/input errors (including refusals and
//! bad-point reports), 2 falsification — a result that contradicts a law the
//! run was supposed to verify (failed construction postcondition, failed
//! calibration, or a verify/scan whose summary misses its thresholds).

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use nearcurve_core::boxdim::{boxdim_diagnostic, DimensionDiagnostic};
use nearcurve_core::bounds::{verify_lower, verify_upper, verify_upper_forced, verify_upper_lip, BoundReport, Grid};
use nearcurve_core::counting::{count_fast, count_naive, enumerate_points, CountQuery, Shift, DEFAULT_BUDGET};
use nearcurve_core::covering::{calibrate, union_measure, CANONICAL_SHIFTS};
use nearcurve_core::curve::PlanarCurve;
use nearcurve_core::lattice::construct_witness;
use nearcurve_core::psi::{Psi, SeriesMode, Verdict};
use nearcurve_core::{Error, Interval};

use nearcurve_cli::config::{derived_ball_constant, ScanConfig, DEFAULT_C0};
use nearcurve_cli::report::sig17;
use nearcurve_cli::scan::{run_scan, scan_exit_code, scan_headline, UPPER_GROWTH_CAP, UPPER_SUP_CAP};
use nearcurve_cli::{report, scan};

#[derive(Parser)]
#[command(
    name = "nearcurve",
    version,
    about = "Counts shifted rational points near planar curves and checks the counting laws",
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

/// Shared curve/shift flags.
#[derive(Args)]
struct CurveArgs {
    /// Curve spec: parabola@[0,1], line@[0,1], cubic@[1,2], exp@[0,1],
    /// circle-arc@[-0.7,0.7], poly:[c0,c1,...]@[a,b].
    #[arg(long)]
    curve: String,
    /// Shift theta as "a,b".
    #[arg(long, value_parser = parse_pair, default_value = "0,0", allow_hyphen_values = true)]
    theta: (f64, f64),
}

impl CurveArgs {
    fn parse(&self) -> anyhow::Result<(PlanarCurve, Shift)> {
        let curve = PlanarCurve::parse(&self.curve)?;
        Ok((curve, Shift::new(self.theta.0, self.theta.1)))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SeriesModeArg {
    Planar,
    Curve,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum UpperModeArg {
    /// Refuse curves without two-sided curvature bounds.
    Strict,
    /// Negative-control override: evaluate the ratios anyway.
    Force,
}

#[derive(Subcommand)]
enum Cmd {
    /// Count points for one (Q, delta) cell; prints the count.
    Count {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long = "Q")]
        q: f64,
        #[arg(long)]
        delta: f64,
        /// Window "a,b" (default: the whole curve domain).
        #[arg(long = "J", value_parser = parse_pair, allow_hyphen_values = true)]
        window: Option<(f64, f64)>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Also run the transparent counter and insist the two agree.
        #[arg(long)]
        check: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the counted points as "q p1 x residual" lines.
    Points {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long = "Q")]
        q: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long = "J", value_parser = parse_pair, allow_hyphen_values = true)]
        window: Option<(f64, f64)>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Print at most this many points (the artifact always holds all).
        #[arg(long, default_value_t = 50)]
        limit: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check N <= C(delta Q^2 + delta^{-1/2} Q) over a (Q, delta) grid.
    VerifyUpper {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long = "Q", value_delimiter = ',', required = true)]
        q: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        delta: Vec<f64>,
        #[arg(long = "J", value_parser = parse_pair, allow_hyphen_values = true)]
        window: Option<(f64, f64)>,
        #[arg(long, value_enum, default_value_t = UpperModeArg::Strict)]
        mode: UpperModeArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Upper check with the Holder-refined comparison formula.
    VerifyUpperLip {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long = "Q", value_delimiter = ',', required = true)]
        q: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        delta: Vec<f64>,
        #[arg(long = "J", value_parser = parse_pair, allow_hyphen_values = true)]
        window: Option<(f64, f64)>,
        /// Holder exponent of f'' (1 = Lipschitz).
        #[arg(long)]
        phi: f64,
        /// Exponent slack in the middle term.
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check N >= c delta Q^2 on admissible cells (k1/Q <= delta <= k2, Q > q0).
    VerifyLower {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long = "Q", value_delimiter = ',', required = true)]
        q: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        delta: Vec<f64>,
        #[arg(long = "J", value_parser = parse_pair, allow_hyphen_values = true)]
        window: Option<(f64, f64)>,
        #[arg(long, default_value_t = 64.0)]
        k1: f64,
        #[arg(long, default_value_t = 0.5)]
        k2: f64,
        #[arg(long, default_value_t = 64.0)]
        q0: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure how much of a window the radius-C1/(Q^2 delta) balls cover.
    Covering {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long = "Q")]
        q: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long = "J", value_parser = parse_pair, allow_hyphen_values = true)]
        window: Option<(f64, f64)>,
        /// Ball constant; derived from the curvature range when omitted.
        #[arg(long = "C1")]
        c1: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for coverage constants over a grid; exit 2 when none exist.
    Calibrate {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long = "Q", value_delimiter = ',', required = true)]
        q: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        delta: Vec<f64>,
        #[arg(long = "J", value_parser = parse_pair, allow_hyphen_values = true, required = true)]
        window: Option<(f64, f64)>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a verified integer witness near an anchor x.
    Witness {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long = "J", value_parser = parse_pair, allow_hyphen_values = true, required = true)]
        window: Option<(f64, f64)>,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long = "Q")]
        q: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = DEFAULT_C0)]
        c0: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify the approximation series; prints converges/diverges/undecided.
    Series {
        /// Approximating function: pow:v or powlog:v,a.
        #[arg(long)]
        psi: String,
        /// Series exponent s.
        #[arg(long)]
        s: f64,
        #[arg(long, value_enum)]
        mode: SeriesModeArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Box-counting dimension diagnostic for the psi(t)=t^{-v} trap set.
    Dim {
        #[command(flatten)]
        curve: CurveArgs,
        /// Decay exponent v in [1/2, 1).
        #[arg(long)]
        s: f64,
        /// Largest denominator scale Q_max.
        #[arg(long = "Q")]
        q: f64,
        /// Box scales (comma list, strictly decreasing); a halving ladder
        /// from 0.1 down to Q_max^{-(1+v)} when omitted.
        #[arg(long, value_delimiter = ',')]
        scales: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a JSON-configured grid scan; exit 0 only if all surrogates pass.
    Scan {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's thread count.
        #[arg(long)]
        threads: Option<usize>,
        /// Override the config's work budget.
        #[arg(long)]
        budget: Option<u64>,
        /// Override the config's JSON report path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config's CSV path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected two comma-separated numbers")?;
    let a: f64 = a.trim().parse().map_err(|e| format!("first component: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("second component: {e}"))?;
    Ok((a, b))
}

fn interval(p: (f64, f64)) -> anyhow::Result<Interval> {
    Ok(Interval::new(p.0, p.1)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let kind = e.kind();
            if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

/// Falsification-class library errors exit 2; everything else is a plain
/// input/domain failure.
fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Construction(_)) | Some(Error::Calibration(_)) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.cmd {
        Cmd::Count { curve, q, delta, window, budget, check, out } => {
            let (c, shift) = curve.parse()?;
            let query = build_query(q, delta, shift, window, budget)?;
            let n = count_fast(&c, &query)?;
            if check {
                let slow = count_naive(&c, &query)?;
                anyhow::ensure!(n == slow, "fast count {n} disagrees with naive count {slow}");
            }
            if let Some(path) = &out {
                report::write_json(
                    path,
                    json!({
                        "op": "count", "curve": c.describe(), "theta": [shift.x, shift.y],
                        "q_scale": q, "delta": delta, "window": window.map(|w| [w.0, w.1]),
                        "budget": budget, "checked": check,
                    }),
                    json!({ "count": n }),
                )?;
            }
            println!("{n}");
            Ok(0)
        }
        Cmd::Points { curve, q, delta, window, budget, limit, out } => {
            let (c, shift) = curve.parse()?;
            let query = build_query(q, delta, shift, window, budget)?;
            let pts = enumerate_points(&c, &query)?;
            if let Some(path) = &out {
                report::write_json(
                    path,
                    json!({
                        "op": "points", "curve": c.describe(), "theta": [shift.x, shift.y],
                        "q_scale": q, "delta": delta, "window": window.map(|w| [w.0, w.1]),
                        "budget": budget,
                    }),
                    &pts,
                )?;
            }
            println!("points: {}", pts.len());
            for p in pts.iter().take(limit) {
                println!("{} {} {} {}", p.q, p.p1, sig17(p.x), sig17(p.residual));
            }
            if pts.len() > limit {
                println!("... {} more (use --out for the full list)", pts.len() - limit);
            }
            Ok(0)
        }
        Cmd::VerifyUpper { curve, q, delta, window, mode, out } => {
            let (c, shift) = curve.parse()?;
            let grid = Grid::new(&q, &delta)?;
            let window = window.map(interval).transpose()?;
            let rep = match mode {
                UpperModeArg::Strict => verify_upper(&c, shift, &grid, window)?,
                UpperModeArg::Force => verify_upper_forced(&c, shift, &grid, window)?,
            };
            let pass = rep.sup_ratio <= UPPER_SUP_CAP
                && rep.sup_large_q <= UPPER_GROWTH_CAP * rep.sup_small_q;
            if let Some(path) = &out {
                report::write_json(
                    path,
                    json!({
                        "op": "verify-upper", "curve": c.describe(), "theta": [shift.x, shift.y],
                        "q_values": q, "delta_values": delta,
                        "window": window.map(|w| [w.lo, w.hi]),
                        "mode": if mode == UpperModeArg::Force { "force" } else { "strict" },
                        "sup_cap": UPPER_SUP_CAP, "growth_cap": UPPER_GROWTH_CAP,
                    }),
                    &rep,
                )?;
            }
            print_bound_line("upper", &rep, pass);
            Ok(if pass { 0 } else { 2 })
        }
        Cmd::VerifyUpperLip { curve, q, delta, window, phi, epsilon, out } => {
            let (c, shift) = curve.parse()?;
            let grid = Grid::new(&q, &delta)?;
            let window = window.map(interval).transpose()?;
            let rep = verify_upper_lip(&c, shift, &grid, window, phi, epsilon)?;
            let pass = rep.sup_ratio <= UPPER_SUP_CAP
                && rep.sup_large_q <= UPPER_GROWTH_CAP * rep.sup_small_q;
            if let Some(path) = &out {
                report::write_json(
                    path,
                    json!({
                        "op": "verify-upper-lip", "curve": c.describe(),
                        "theta": [shift.x, shift.y], "q_values": q, "delta_values": delta,
                        "window": window.map(|w| [w.lo, w.hi]), "phi": phi, "epsilon": epsilon,
                        "sup_cap": UPPER_SUP_CAP, "growth_cap": UPPER_GROWTH_CAP,
                    }),
                    &rep,
                )?;
            }
            print_bound_line("upper-lip", &rep, pass);
            Ok(if pass { 0 } else { 2 })
        }
        Cmd::VerifyLower { curve, q, delta, window, k1, k2, q0, out } => {
            let (c, shift) = curve.parse()?;
            let grid = Grid::new(&q, &delta)?;
            let window = window.map(interval).transpose()?;
            let rep = verify_lower(&c, shift, &grid, window, k1, k2, q0)?;
            let pass = rep.inf_ratio >= scan::LOWER_INF_FLOOR;
            if let Some(path) = &out {
                report::write_json(
                    path,
                    json!({
                        "op": "verify-lower", "curve": c.describe(), "theta": [shift.x, shift.y],
                        "q_values": q, "delta_values": delta,
                        "window": window.map(|w| [w.lo, w.hi]),
                        "k1": k1, "k2": k2, "q0": q0, "inf_floor": scan::LOWER_INF_FLOOR,
                    }),
                    &rep,
                )?;
            }
            let adm = rep.cells.iter().filter(|c| c.admissible).count();
            println!(
                "lower: inf={} admissible_cells={adm} verdict={}",
                sig17(rep.inf_ratio),
                if pass { "pass" } else { "FAIL" }
            );
            Ok(if pass { 0 } else { 2 })
        }
        Cmd::Covering { curve, q, delta, window, c1, out } => {
            let (c, shift) = curve.parse()?;
            let window = match window {
                Some(w) => interval(w)?,
                None => c.domain(),
            };
            let c1 = match c1 {
                Some(v) => v,
                None => {
                    let (lo, hi) = c.curvature_bounds().map_err(|_| {
                        Error::Domain("covering on a flat curve needs an explicit --C1")
                    })?;
                    derived_ball_constant(lo, hi)
                }
            };
            let rep = union_measure(&c, shift, q, delta, window, c1)?;
            if let Some(path) = &out {
                report::write_json(
                    path,
                    json!({
                        "op": "covering", "curve": c.describe(), "theta": [shift.x, shift.y],
                        "q_scale": q, "delta": delta, "window": [window.lo, window.hi],
                        "c1_const": c1,
                    }),
                    &rep,
                )?;
            }
            println!(
                "covering: ratio={} measure={} count={} implied_floor={}",
                sig17(rep.ratio),
                sig17(rep.measure),
                rep.count,
                sig17(rep.implied_count_floor())
            );
            Ok(0)
        }
        Cmd::Calibrate { curve, q, delta, window, out } => {
            let (c, _) = curve.parse()?;
            let grid = Grid::new(&q, &delta)?;
            let window = interval(window.expect("clap enforces --J"))?;
            let record = calibrate(&c, &CANONICAL_SHIFTS, window, &grid)?;
            if let Some(path) = &out {
                report::write_json(
                    path,
                    json!({
                        "op": "calibrate", "curve": c.describe(),
                        "q_values": q, "delta_values": delta, "window": [window.lo, window.hi],
                        "shifts": "canonical-10",
                    }),
                    &record,
                )?;
            }
            println!(
                "calibrated: c0={} k1={} k2={} q0={} C1={}",
                record.c0,
                record.k1,
                record.k2,
                record.q0,
                sig17(record.c1_const)
            );
            Ok(0)
        }
        Cmd::Witness { curve, window, x, q, delta, c0, out } => {
            let (c, shift) = curve.parse()?;
            let window = interval(window.expect("clap enforces --J"))?;
            let rep = construct_witness(&c, shift, window, x, q, delta, c0)?;
            if let Some(path) = &out {
                report::write_json(
                    path,
                    json!({
                        "op": "witness", "curve": c.describe(), "theta": [shift.x, shift.y],
                        "window": [window.lo, window.hi], "x": x, "q_scale": q,
                        "delta": delta, "c0": c0,
                    }),
                    &rep,
                )?;
            }
            println!(
                "witness: q={} p1={} p2={} residual={} x_distance={}",
                rep.witness.q,
                rep.witness.p1,
                rep.witness.p2,
                sig17(rep.residual),
                sig17(rep.x_distance)
            );
            Ok(0)
        }
        Cmd::Series { psi, s, mode, out } => {
            let f = Psi::parse(&psi)?;
            let mode = match mode {
                SeriesModeArg::Planar => SeriesMode::Planar,
                SeriesModeArg::Curve => SeriesMode::Curve,
            };
            let rep = f.series_classify(s, mode)?;
            if let Some(path) = &out {
                report::write_json(
                    path,
                    json!({ "op": "series", "psi": psi, "s": s,
                        "mode": if mode == SeriesMode::Planar { "planar" } else { "curve" } }),
                    &rep,
                )?;
            }
            let word = match rep.verdict {
                Verdict::Converges => "converges",
                Verdict::Diverges => "diverges",
                Verdict::Undecided => "undecided",
            };
            println!("{word}");
            Ok(0)
        }
        Cmd::Dim { curve, s, q, scales, out } => {
            let (c, shift) = curve.parse()?;
            let scales = match scales {
                Some(v) => v,
                None => default_ladder(s, q),
            };
            let rep: DimensionDiagnostic = boxdim_diagnostic(&c, shift, s, q, &scales)?;
            if let Some(path) = &out {
                report::write_json(
                    path,
                    json!({
                        "op": "dim", "curve": c.describe(), "theta": [shift.x, shift.y],
                        "v": s, "q_max": q, "scales": &rep.scales,
                    }),
                    &rep,
                )?;
            }
            println!(
                "dim: slope={} target={} scales={} (diagnostic only)",
                sig17(rep.slope),
                sig17(rep.target),
                rep.scales.len()
            );
            Ok(0)
        }
        Cmd::Scan { config, threads, budget, out, csv } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let mut cfg = ScanConfig::from_json(&text)?;
            if let Some(t) = threads {
                cfg.threads = t;
            }
            if let Some(b) = budget {
                cfg.budget = b;
            }
            if let Some(p) = out {
                cfg.out_json = Some(p);
            }
            if let Some(p) = csv {
                cfg.out_csv = Some(p);
            }
            let outcome = run_scan(&cfg)?;
            println!("{}", scan_headline(&outcome.summary));
            Ok(scan_exit_code(&outcome.summary) as u8)
        }
    }
}

fn build_query(
    q: f64,
    delta: f64,
    shift: Shift,
    window: Option<(f64, f64)>,
    budget: u64,
) -> anyhow::Result<CountQuery> {
    let mut query = CountQuery::new(q, delta).with_shift(shift).with_budget(budget);
    if let Some(w) = window {
        query = query.with_window(interval(w)?);
    }
    Ok(query)
}

fn print_bound_line(tag: &str, rep: &BoundReport, pass: bool) {
    println!(
        "{tag}: sup={} small_q={} large_q={} verdict={}",
        sig17(rep.sup_ratio),
        sig17(rep.sup_small_q),
        sig17(rep.sup_large_q),
        if pass { "pass" } else { "FAIL" }
    );
}

/// Halving ladder from 0.1 down to the finest admissible scale.
fn default_ladder(v: f64, q_max: f64) -> Vec<f64> {
    let mut scales = vec![0.1];
    if !(v.is_finite() && q_max.is_finite() && q_max > 1.0) {
        return scales;
    }
    let floor = q_max.powf(-(1.0 + v));
    while scales.last().copied().unwrap_or(0.0) * 0.5 >= floor {
        let next = scales.last().unwrap() * 0.5;
        scales.push(next);
    }
    scales
}
