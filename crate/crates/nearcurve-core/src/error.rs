use alloc::string::String;
use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong across the crate.
///
/// The variants split into three families: bad input (`Domain`, `Parse`,
/// `Precondition`), resource refusal (`Budget`, `TooManyPieces`), and honest
/// negative outcomes of a construction or search (`BadPoint`, `Construction`,
/// `Calibration`, `Conditioning`, `Insufficient`). The last family is not a
/// caller mistake; it reports that the mathematics declined to cooperate at
/// the requested parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// An argument is outside the documented domain (NaN, empty interval,
    /// δ out of (0, 1/2], a curve evaluated off its interval, ...).
    Domain(&'static str),
    /// The second derivative changes sign or cannot be certified away from
    /// zero on the curve's interval, so curvature-based routines refuse.
    DegenerateCurvature,
    /// Splitting the curve into strictly monotone pieces exceeded the cap.
    TooManyPieces(usize),
    /// The work estimate for a request exceeds its admitted budget.
    Budget { needed: u64, budget: u64 },
    /// A structural precondition of a lattice or witness routine fails
    /// (for example the body's third bound dropping below 1).
    Precondition(&'static str),
    /// A linear system was too close to singular to trust.
    Conditioning(&'static str),
    /// The requested base point lies in the bad set, where short dual
    /// vectors exist and the witness construction is not attempted.
    BadPoint,
    /// A witness was assembled but a stated postcondition failed; the
    /// message names the first inequality that broke.
    Construction(&'static str),
    /// No admissible constants were found in the calibration search space.
    Calibration(&'static str),
    /// Not enough usable data for a fit or summary.
    Insufficient(&'static str),
    /// A curve or ψ expression failed to parse.
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::DegenerateCurvature => {
                write!(f, "curvature is degenerate on this interval")
            }
            Error::TooManyPieces(n) => {
                write!(f, "curve splits into more than {n} monotone pieces")
            }
            Error::Budget { needed, budget } => {
                write!(f, "work estimate {needed} exceeds budget {budget}")
            }
            Error::Precondition(what) => write!(f, "precondition failed: {what}"),
            Error::Conditioning(what) => write!(f, "ill-conditioned system: {what}"),
            Error::BadPoint => write!(f, "base point lies in the bad set"),
            Error::Construction(what) => {
                write!(f, "witness postcondition failed: {what}")
            }
            Error::Calibration(what) => write!(f, "calibration failed: {what}"),
            Error::Insufficient(what) => write!(f, "insufficient data: {what}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
