//! Approximating functions ψ, their lower order, the two associated
//! convergence series, and the dimension formula they feed.
//!
//! A ψ here is a positive non-increasing function on [2, ∞). The two series
//! that decide everything downstream are
//!
//! * planar mode: Σ_t t^{2−s} ψ(t)^s,
//! * curve mode:  Σ_t t^{1−s} ψ(t)^{s+1},
//!
//! classified analytically for the power and power-log families (including
//! the boundary cases, where a harmonic or log-harmonic tail diverges) and
//! by a condensation probe with an honest `Undecided` band for everything
//! else.

use alloc::sync::Arc;

use crate::fx;
use crate::{Error, Result};

/// ψ(t) families. `Custom` carries any positive non-increasing function;
/// construction probes a sample ladder and refuses obvious violations.
#[derive(Clone)]
pub enum Psi {
    /// ψ(t) = t^{−v}, v > 0.
    Power { v: f64 },
    /// ψ(t) = t^{−v} (ln t)^a, v > 0, evaluated for t ≥ 2 (clamped below).
    PowerLog { v: f64, a: f64 },
    /// Arbitrary ψ; classified numerically, never analytically.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl core::fmt::Debug for Psi {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Psi::Power { v } => write!(f, "Power {{ v: {v} }}"),
            Psi::PowerLog { v, a } => write!(f, "PowerLog {{ v: {v}, a: {a} }}"),
            Psi::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// How a reported number was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Method {
    Analytic,
    Sampled,
}

/// The lower order λ = liminf_{t→∞} −ln ψ(t) / ln t.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LowerOrder {
    pub value: f64,
    pub method: Method,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Verdict {
    Converges,
    Diverges,
    /// The numeric probe saw condensation ratios too close to 1 to call.
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SeriesMode {
    /// Σ t^{2−s} ψ(t)^s
    Planar,
    /// Σ t^{1−s} ψ(t)^{s+1}
    Curve,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeriesReport {
    pub mode: SeriesMode,
    pub s: f64,
    pub verdict: Verdict,
    pub method: Method,
    /// Power of t in the general term, when known analytically.
    pub exponent: Option<f64>,
    /// Power of ln t in the general term, when known analytically.
    pub log_exponent: Option<f64>,
}

/// Tolerance around analytic boundary exponents: an exponent within this of
/// the harmonic edge is classified as sitting on the edge.
const EDGE_TOL: f64 = 1e-12;

impl Psi {
    pub fn power(v: f64) -> Result<Psi> {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain("power decay exponent must be positive"));
        }
        Ok(Psi::Power { v })
    }

    pub fn power_log(v: f64, a: f64) -> Result<Psi> {
        if !(v > 0.0) || !v.is_finite() || !a.is_finite() {
            return Err(Error::Domain("power-log parameters must be finite, v > 0"));
        }
        Ok(Psi::PowerLog { v, a })
    }

    /// Wraps an arbitrary function after checking positivity and monotone
    /// decrease on a dyadic ladder up to 2^40.
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Psi> {
        let f: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(f);
        let mut prev = f64::INFINITY;
        for k in 1..=40 {
            let t = (1u64 << k) as f64;
            let y = f(t);
            if !(y > 0.0) || !y.is_finite() {
                return Err(Error::Domain("custom psi must be positive and finite"));
            }
            if y > prev * (1.0 + 1e-9) {
                return Err(Error::Domain("custom psi must be non-increasing"));
            }
            prev = y;
        }
        Ok(Psi::Custom(f))
    }

    /// Parses `pow:V` or `powlog:V,A`.
    pub fn parse(expr: &str) -> Result<Psi> {
        let expr = expr.trim();
        if let Some(v) = expr.strip_prefix("pow:") {
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(alloc::string::String::from("bad pow:V exponent")))?;
            return Psi::power(v);
        }
        if let Some(rest) = expr.strip_prefix("powlog:") {
            let mut it = rest.splitn(2, ',');
            let v: f64 = it
                .next()
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|_| Error::Parse(alloc::string::String::from("bad powlog:V,A")))?;
            let a: f64 = it
                .next()
                .ok_or_else(|| Error::Parse(alloc::string::String::from("powlog needs V,A")))?
                .trim()
                .parse()
                .map_err(|_| Error::Parse(alloc::string::String::from("bad powlog:V,A")))?;
            return Psi::power_log(v, a);
        }
        Err(Error::Parse(alloc::string::String::from("expected `pow:V` or `powlog:V,A`")))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Psi::Power { v } => fx::powf(t, -v),
            Psi::PowerLog { v, a } => {
                let t = t.max(2.0);
                fx::powf(t, -v) * fx::powf(fx::ln(t), *a)
            }
            Psi::Custom(f) => f(t),
        }
    }

    /// λ = liminf −ln ψ / ln t: exact for the analytic families (the log
    /// factor contributes nothing in the limit), a tail minimum over a
    /// dyadic ladder otherwise.
    pub fn lower_order(&self) -> LowerOrder {
        match self {
            Psi::Power { v } => LowerOrder { value: *v, method: Method::Analytic },
            Psi::PowerLog { v, .. } => LowerOrder { value: *v, method: Method::Analytic },
            Psi::Custom(f) => {
                let mut lam = f64::INFINITY;
                for k in 30..=48 {
                    let t = (1u64 << k) as f64;
                    let y = f(t);
                    lam = lam.min(-fx::ln(y) / fx::ln(t));
                }
                LowerOrder { value: lam, method: Method::Sampled }
            }
        }
    }

    /// Classifies the chosen series at exponent `s`. Each mode owns an
    /// admissible range: planar needs s ∈ (0, 2], curve needs s ∈ (1/2, 1].
    pub fn series_classify(&self, s: f64, mode: SeriesMode) -> Result<SeriesReport> {
        let admissible = match mode {
            SeriesMode::Planar => s > 0.0 && s <= 2.0,
            SeriesMode::Curve => s > 0.5 && s <= 1.0,
        };
        if !admissible || !s.is_finite() {
            return Err(Error::Domain("series exponent s is outside the mode's range"));
        }
        // Powers of ψ and t in the general term.
        let (t_pow, psi_pow) = match mode {
            SeriesMode::Planar => (2.0 - s, s),
            SeriesMode::Curve => (1.0 - s, s + 1.0),
        };
        match self {
            Psi::Power { v } => {
                let e = t_pow - v * psi_pow;
                let verdict = classify_exponents(e, 0.0);
                Ok(SeriesReport {
                    mode,
                    s,
                    verdict,
                    method: Method::Analytic,
                    exponent: Some(e),
                    log_exponent: Some(0.0),
                })
            }
            Psi::PowerLog { v, a } => {
                let e = t_pow - v * psi_pow;
                let b = a * psi_pow;
                let verdict = classify_exponents(e, b);
                Ok(SeriesReport {
                    mode,
                    s,
                    verdict,
                    method: Method::Analytic,
                    exponent: Some(e),
                    log_exponent: Some(b),
                })
            }
            Psi::Custom(f) => {
                let term = |t: f64| fx::powf(t, t_pow) * fx::powf(f(t), psi_pow);
                Ok(SeriesReport {
                    mode,
                    s,
                    verdict: condensation_probe(term),
                    method: Method::Sampled,
                    exponent: None,
                    log_exponent: None,
                })
            }
        }
    }
}

/// Σ t^e (ln t)^b: converges iff e < −1, or e = −1 and b < −1. Exponents
/// within [`EDGE_TOL`] of the edges are classified as on the edge.
fn classify_exponents(e: f64, b: f64) -> Verdict {
    if e < -1.0 - EDGE_TOL {
        return Verdict::Converges;
    }
    if e > -1.0 + EDGE_TOL {
        return Verdict::Diverges;
    }
    if b < -1.0 - EDGE_TOL {
        Verdict::Converges
    } else {
        Verdict::Diverges
    }
}

/// Cauchy condensation on a dyadic ladder: with g_k = 2^k·term(2^k), the
/// series behaves like Σ g_k; geometric decay or growth of the tail ratios
/// decides it, ratios pinned near 1 stay undecided.
fn condensation_probe(term: impl Fn(f64) -> f64) -> Verdict {
    const MARGIN: f64 = 0.02;
    let mut ratios_hi = f64::NEG_INFINITY;
    let mut ratios_lo = f64::INFINITY;
    let mut prev = None;
    for k in 24..=46u32 {
        let t = (1u64 << k) as f64;
        let g = t * term(t);
        if !g.is_finite() {
            return Verdict::Undecided;
        }
        if let Some(p) = prev {
            if p <= 0.0 {
                return Verdict::Undecided;
            }
            let r = g / p;
            ratios_hi = ratios_hi.max(r);
            ratios_lo = ratios_lo.min(r);
        }
        prev = Some(g);
    }
    if ratios_hi <= 1.0 - MARGIN {
        Verdict::Converges
    } else if ratios_lo >= 1.0 + MARGIN {
        Verdict::Diverges
    } else {
        Verdict::Undecided
    }
}

/// Hausdorff-dimension value (2 − λ)/(1 + λ) for lower orders λ ∈ [1/2, 1).
pub fn dimension_formula(lambda: f64) -> Result<f64> {
    if !(lambda >= 0.5 && lambda < 1.0) {
        return Err(Error::Domain("dimension formula needs lambda in [1/2, 1)"));
    }
    Ok((2.0 - lambda) / (1.0 + lambda))
}
