use thiserror::Error;

/// Every failure the library reports. Variants carry the location that
/// triggered them so callers can print something actionable.
#[derive(Debug, Error)]
pub enum SheetError {
    #[error("curve is not immersed near s = {s} (|c'| = {speed:e})")]
    NotImmersed { s: f64, speed: f64 },
    #[error("velocity is not timelike near s = {s} (|v| = {speed})")]
    NotTimelike { s: f64, speed: f64 },
    #[error("sample grid too coarse for the angular lift: jump {jump} rad between s = {s0} and s = {s1}")]
    GridTooCoarse { s0: f64, s1: f64, jump: f64 },
    #[error("parameter {s} outside the computational window [{min}, {max}]")]
    DomainExceeded { s: f64, min: f64, max: f64 },
    #[error("characteristic from s0 = {seed} left the window at t = {t}")]
    WindowExit { seed: f64, t: f64 },
    #[error("characteristics from s0 = {a} and s0 = {b} cross near t = {t}")]
    CharacteristicsCross { a: f64, b: f64, t: f64 },
    #[error("velocity is not uniformly timelike (sup |v| = {sup})")]
    NotUniformlyTimelike { sup: f64 },
    #[error("sin(beta/2) does not change sign on the requested interval at t = {t}")]
    NoSignChange { t: f64 },
    #[error("no sign change of sin(beta/2) found for t in [{t0}, {t1}]")]
    NotFound { t0: f64, t1: f64 },
    #[error("({s}, {t}) is not a singular anchor (|gamma_s| = {speed:e})")]
    NotSingularAnchor { s: f64, t: f64, speed: f64 },
    #[error("operation requires closed periodic cross sections")]
    RequiresPeriodic,
    #[error("ray meets the singular set at t = {t} before reaching the end of its interval")]
    SingularOnPath { t: f64 },
    #[error("graph margin violated at (s, t) = ({s}, {t}): {margin}")]
    MarginViolated { s: f64, t: f64, margin: f64 },
    #[error("unknown gallery entry '{0}'")]
    UnknownName(String),
    #[error("gallery entry '{name}' is not C1 at s = {s} (jump {jump:e})")]
    NotC1 { name: String, s: f64, jump: f64 },
    #[error("quantity undefined at (s, t) = ({s}, {t}): {what}")]
    Undefined { s: f64, t: f64, what: &'static str },
    #[error("ODE integration failed: {0}")]
    Ode(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SheetError>;
