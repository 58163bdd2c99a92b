use thiserror::Error;

/// Errors raised by the soliton library.
///
/// Variants are grouped loosely: parameter validation, unsupported physics
/// (no exact theory for the requested regime) and numerical diagnostics
/// raised after a computation ran but failed a quality check.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no bound state: soliton requires b*c < 0 (got b = {b}, c = {c})")]
    NoBoundState { b: f64, c: f64 },

    #[error("self-phase modulation coefficient c is zero: no width scale")]
    ZeroNonlinearity,

    #[error("dispersion coefficient b is zero")]
    ZeroDispersion,

    #[error("photon number must be at least 1 (n = {n}, m = {m})")]
    NoPhotons { n: usize, m: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ansatz is an eigenstate only for B = 0 or B = 1 (got B = {0})")]
    NotEigenstate(f64),

    #[error("normalization unknown for B = {0}")]
    NormalizationUnknown(f64),

    #[error("configuration has {got_n}+{got_m} photons, parameters expect {n}+{m}")]
    ConfigurationMismatch {
        n: usize,
        m: usize,
        got_n: usize,
        got_m: usize,
    },

    #[error("schedule crosses or touches c = 0 in segment {segment}")]
    ScheduleCrossesZero { segment: usize },

    #[error("grid too large: n + m = {0} exceeds 3")]
    GridTooLarge(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("acceptance rate {rate:.3} outside [0.15, 0.7] after tuning (chain {chain})")]
    AcceptanceOutOfRange { rate: f64, chain: usize },

    #[error("insufficient sampling: effective sample size {ess:.0} < {min:.0}")]
    InsufficientSampling { ess: f64, min: f64 },

    #[error("q fixed point did not converge after {iterations} iterations; trace {trace:?}")]
    FixedPointDiverged { iterations: usize, trace: Vec<f64> },

    #[error("dispersion not compensated: residual phase {0:e}")]
    NotCompensated(f64),

    #[error("dispersion management medium has the same sign as the accumulated dispersion")]
    SameSignDispersion,

    #[error("propagation failed at step {step}: {reason}")]
    Propagation { step: usize, reason: String },

    #[error("fit failed: {0}")]
    Fit(String),
}

impl Error {
    /// True for failures detected after a computation ran (sampling quality,
    /// divergence, propagation blow-up, failed fits); false for invalid or
    /// unsupported inputs.
    pub fn is_diagnostic(&self) -> bool {
        matches!(
            self,
            Error::AcceptanceOutOfRange { .. }
                | Error::InsufficientSampling { .. }
                | Error::FixedPointDiverged { .. }
                | Error::NotCompensated(_)
                | Error::Propagation { .. }
                | Error::Fit(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
