use thiserror::Error;

/// Errors produced anywhere in the simulation and compilation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("spin index {spin} out of range for {n} spins")]
    SpinOutOfRange { spin: usize, n: usize },
    #[error("negative duration {0} s")]
    NegativeTime(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("molecule has no spins")]
    NoSpins,
    #[error("molecule field `{field}` has {got} entries, expected {expected}")]
    FieldLength { field: &'static str, expected: usize, got: usize },
    #[error("missing molecule field `{0}`")]
    MissingField(String),
    #[error("J coupling is not symmetric: J[{i}][{j}] = {a} but J[{j}][{i}] = {b}")]
    AsymmetricCoupling { i: usize, j: usize, a: f64, b: f64 },
    #[error("J coupling diagonal entry J[{0}][{0}] must be zero")]
    SelfCoupling(usize),
    #[error("spin {spin}: {which} must be positive, got {value}")]
    NonPositiveRelaxation { spin: usize, which: &'static str, value: f64 },
    #[error("spin {spin}: T2 = {t2} s exceeds 2*T1 = {} s", 2.0 * .t1)]
    UnphysicalRelaxation { spin: usize, t1: f64, t2: f64 },
    #[error("temperature must be positive, got {0} K")]
    NonPositiveTemperature(f64),
    #[error("cannot parse molecule file: {0}")]
    MoleculeParse(String),

    #[error("invalid base a = {0}: need 2 <= a <= 14 and gcd(a, 15) = 1")]
    InvalidBase(u64),
    #[error("malformed gate: {0}")]
    MalformedGate(String),
    #[error("circuit parse error on line {line}: {msg}")]
    CircuitParse { line: usize, msg: String },
    #[error("pulse program parse error on line {line}: {msg}")]
    PulseParse { line: usize, msg: String },
    #[error("gate `{0}` cannot be lowered to pulses")]
    NotLowerable(String),
    #[error("spins {0} and {1} are not coupled (J = 0)")]
    MissingCoupling(usize, usize),
    #[error("infeasible refocusing: {0}")]
    InfeasibleRefocusing(String),
    #[error("unsupported pulse: {0}")]
    UnsupportedPulse(String),

    #[error("Nyquist violation: sampling rate {rate_hz} Hz must exceed {needed_hz} Hz")]
    Nyquist { rate_hz: f64, needed_hz: f64 },
    #[error("spectrum reference integral is zero; calibrate against a polarized reference")]
    Uncalibrated,

    #[error("unsupported preparation partition: {0}")]
    UnsupportedPartition(String),
    #[error("empty support: no period information")]
    NoPeriodInformation,
    #[error("invalid configuration field `{field}`: {msg}")]
    Config { field: &'static str, msg: String },
    #[error("stage `{stage}` failed: {source}")]
    Stage { stage: &'static str, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at(self, stage: &'static str) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }
}
