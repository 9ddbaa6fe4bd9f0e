use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("potential is not finite at x = {x}")]
    NonFinitePotential { x: f64 },

    #[error("truncated mass deficit {deficit:.3e} exceeds 1e-6; widen the domain")]
    MassDeficit { deficit: f64 },

    #[error("point {x} outside the measure domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("negative input where a nonnegative function is required (min = {min:.3e})")]
    NegativeInput { min: f64 },

    #[error("point {x} is within grid resolution of the median {median}")]
    AtMedian { x: f64, median: f64 },

    #[error("{what}: need {needed}, got {got}")]
    InsufficientRange {
        what: &'static str,
        needed: String,
        got: String,
    },

    #[error("zero derivative of the potential at scanned point x = {x}")]
    ZeroDerivative { x: f64 },

    #[error("map not strictly monotone on the sampled range; cannot invert {what}")]
    NotInvertible { what: &'static str },

    #[error("time {t} outside the admissible range ({lo}, {hi})")]
    TimeOutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("tail integral of 2V dν diverges on the truncated domain")]
    TailIntegralDiverges,

    #[error("every family member has Dirichlet energy below 1e-14")]
    DegenerateFamily,

    #[error("solver instability detected at t = {t}: {reason}")]
    Instability { t: f64, reason: String },

    #[error("no decay certificate supplied (need a Poincaré constant or a weak log-Sobolev rate)")]
    NoCertificate,

    #[error("rate function violates its shape conditions: {what}")]
    ShapeViolation { what: String },

    #[error("conversion not supported for certificate kind {kind}")]
    UnsupportedKind { kind: &'static str },

    #[error("missing derivative: {what}")]
    DerivativeMissing { what: &'static str },

    #[error("premise violated: {what}")]
    PremiseViolated { what: String },

    #[error("invalid configuration: {0}")]
    Config(String),
}
