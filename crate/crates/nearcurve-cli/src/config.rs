//! JSON-mirrored scan configuration and its validated, parsed form.

use std::path::PathBuf;

use nearcurve_core::bounds::Grid;
use nearcurve_core::counting::{Shift, DEFAULT_BUDGET};
use nearcurve_core::curve::PlanarCurve;
use nearcurve_core::{Error, Interval, Result};
use serde::{Deserialize, Serialize};

/// Reference shrink factor used when a covering ball constant has to be
/// derived from the curve alone.
pub const DEFAULT_C0: f64 = 0.165;

/// Per-cell evaluations a scan can run. `Exponents` is not a cell mode: it
/// fits a power law to the lower-mode cells after the grid completes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Upper,
    Lower,
    Covering,
    Exponents,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Upper => "upper",
            Mode::Lower => "lower",
            Mode::Covering => "covering",
            Mode::Exponents => "exponents",
        }
    }
}

/// One scan request, as read from `--config`. Flags override fields after
/// deserialization; the artifact writers embed the struct back out so every
/// output names the exact configuration that produced it.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    /// Curve spec string, e.g. `parabola@[0,1]` or `poly:[0,0,0.005]@[0,1]`.
    pub curve: String,
    /// Shift list as `[theta1, theta2]` pairs.
    pub shifts: Vec<[f64; 2]>,
    /// Scale axis (each Q spans denominators Q < q <= 2Q).
    pub q_values: Vec<f64>,
    /// Accuracy axis.
    pub delta_values: Vec<f64>,
    /// Optional window `[a, b]`; the whole domain when absent.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    pub modes: Vec<Mode>,
    #[serde(default)]
    pub out_csv: Option<PathBuf>,
    #[serde(default)]
    pub out_json: Option<PathBuf>,
    /// Per-cell work cap handed to the counting routines.
    #[serde(default = "defaults::budget")]
    pub budget: u64,
    /// Recorded in artifacts for reproducibility of any future sampled mode;
    /// the current modes are deterministic and ignore it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::threads")]
    pub threads: usize,
    /// Lower-law admissibility: cells need k1/Q <= delta <= k2 and Q > q0.
    #[serde(default = "defaults::k1")]
    pub k1: f64,
    #[serde(default = "defaults::k2")]
    pub k2: f64,
    #[serde(default = "defaults::q0")]
    pub q0: f64,
    /// Covering ball constant; when absent it is derived from the curve's
    /// curvature range at the reference shrink factor [`DEFAULT_C0`].
    #[serde(default)]
    pub c1_const: Option<f64>,
}

mod defaults {
    pub fn budget() -> u64 {
        super::DEFAULT_BUDGET
    }
    pub fn threads() -> usize {
        8
    }
    pub fn k1() -> f64 {
        64.0
    }
    pub fn k2() -> f64 {
        0.5
    }
    pub fn q0() -> f64 {
        64.0
    }
}

/// A config with every string parsed and every invariant checked.
pub struct ResolvedScan {
    pub curve: PlanarCurve,
    pub shifts: Vec<Shift>,
    pub grid: Grid,
    pub window: Option<Interval>,
    /// Cell modes in fixed order (exponents folded into lower).
    pub cell_modes: Vec<Mode>,
    pub fit_exponents: bool,
    pub budget: u64,
    pub threads: usize,
    pub k1: f64,
    pub k2: f64,
    pub q0: f64,
    /// Resolved ball constant, present whenever covering cells run.
    pub c1_const: Option<f64>,
}

impl ScanConfig {
    pub fn from_json(text: &str) -> Result<ScanConfig> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    pub fn resolve(&self) -> Result<ResolvedScan> {
        let curve = PlanarCurve::parse(&self.curve)?;
        if self.shifts.is_empty() {
            return Err(Error::Domain("scan needs at least one shift"));
        }
        let mut shifts = Vec::with_capacity(self.shifts.len());
        for &[a, b] in &self.shifts {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::Domain("shift components must be finite"));
            }
            shifts.push(Shift::new(a, b));
        }
        let grid = Grid::new(&self.q_values, &self.delta_values)?;
        let window = match self.window {
            None => None,
            Some([a, b]) => {
                let w = Interval::new(a, b)?;
                if w.len() <= 0.0 {
                    return Err(Error::Domain("window must have positive length"));
                }
                Some(w)
            }
        };
        if self.budget == 0 {
            return Err(Error::Domain("budget must be positive"));
        }
        if self.threads == 0 || self.threads > 512 {
            return Err(Error::Domain("threads must lie in 1..=512"));
        }
        if !(self.k1 > 0.0 && self.k1.is_finite())
            || !(self.k2 > 0.0 && self.k2 <= 0.5)
            || !(self.q0 >= 0.0)
        {
            return Err(Error::Domain(
                "lower-law constants must satisfy k1 > 0, 0 < k2 <= 1/2, q0 >= 0",
            ));
        }

        let mut cell_modes: Vec<Mode> = self
            .modes
            .iter()
            .copied()
            .map(|m| if m == Mode::Exponents { Mode::Lower } else { m })
            .collect();
        cell_modes.sort();
        cell_modes.dedup();
        let fit = self.modes.contains(&Mode::Exponents);

        let c1_const = match self.c1_const {
            Some(c) => {
                if !(c.is_finite() && c > 0.0) {
                    return Err(Error::Domain("ball constant must be positive and finite"));
                }
                Some(c)
            }
            None if cell_modes.contains(&Mode::Covering) => {
                let (c1, c2) = curve.curvature_bounds().map_err(|_| {
                    Error::Domain("covering on a flat curve needs an explicit c1_const")
                })?;
                Some(derived_ball_constant(c1, c2))
            }
            None => None,
        };

        Ok(ResolvedScan {
            curve,
            shifts,
            grid,
            window,
            cell_modes,
            fit_exponents: fit,
            budget: self.budget,
            threads: self.threads,
            k1: self.k1,
            k2: self.k2,
            q0: self.q0,
            c1_const,
        })
    }
}

/// Ball constant 3c2/(c1·c0⁸) at the reference shrink factor — the same
/// arithmetic a calibration record pins down, usable before one exists.
pub fn derived_ball_constant(c1: f64, c2: f64) -> f64 {
    let c0_2 = DEFAULT_C0 * DEFAULT_C0;
    let c0_4 = c0_2 * c0_2;
    3.0 * c2 / (c1 * c0_4 * c0_4)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ScanConfig {
        ScanConfig {
            curve: "parabola@[0,1]".into(),
            shifts: vec![[0.0, 0.0]],
            q_values: vec![64.0, 128.0],
            delta_values: vec![0.5, 0.25],
            window: None,
            modes: vec![Mode::Upper],
            out_csv: None,
            out_json: None,
            budget: DEFAULT_BUDGET,
            seed: 0,
            threads: 2,
            k1: 64.0,
            k2: 0.5,
            q0: 64.0,
            c1_const: None,
        }
    }

    #[test]
    fn json_round_trip_preserves_fields() {
        let cfg = base();
        let text = serde_json::to_string(&cfg).unwrap();
        let back = ScanConfig::from_json(&text).unwrap();
        assert_eq!(back.curve, cfg.curve);
        assert_eq!(back.modes, cfg.modes);
        assert_eq!(back.threads, 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{"curve":"parabola@[0,1]","shifts":[[0,0]],"q_values":[64],
            "delta_values":[0.5],"modes":[],"typo_field":1}"#;
        assert!(ScanConfig::from_json(text).is_err());
    }

    #[test]
    fn exponents_implies_lower_cells() {
        let mut cfg = base();
        cfg.modes = vec![Mode::Exponents];
        let rt = cfg.resolve().unwrap();
        assert_eq!(rt.cell_modes, vec![Mode::Lower]);
        assert!(rt.fit_exponents);
    }

    #[test]
    fn covering_derives_a_ball_constant_from_curvature() {
        let mut cfg = base();
        cfg.modes = vec![Mode::Covering];
        let rt = cfg.resolve().unwrap();
        // Parabola: c1 = c2 = 2, so the constant is 3/c0^8.
        let expect = 3.0 / DEFAULT_C0.powi(8);
        assert!((rt.c1_const.unwrap() - expect).abs() < 1e-6 * expect);

        cfg.curve = "line@[0,1]".into();
        assert!(cfg.resolve().is_err());
        cfg.c1_const = Some(0.25);
        assert!(cfg.resolve().is_ok());
    }

    #[test]
    fn bad_fields_are_refused() {
        let mut cfg = base();
        cfg.shifts = vec![];
        assert!(cfg.resolve().is_err());

        let mut cfg = base();
        cfg.window = Some([0.5, 0.5]);
        assert!(cfg.resolve().is_err());

        let mut cfg = base();
        cfg.threads = 0;
        assert!(cfg.resolve().is_err());

        let mut cfg = base();
        cfg.curve = "hyperbola@[0,1]".into();
        assert!(cfg.resolve().is_err());
    }
}
