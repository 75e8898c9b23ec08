use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("mode index ({n}, {m}) out of range for {dim} modes per axis")]
    IndexOutOfRange { n: usize, m: usize, dim: usize },

    #[error("expected vector of length {expected}, got {actual}")]
    WrongLength { expected: usize, actual: usize },

    #[error("quadrature did not reach tolerance {tolerance:e}: relative error estimate {estimate:e}")]
    Accuracy { estimate: f64, tolerance: f64 },

    /// No sign change of the fixed-point residual was found on the scan.
    /// The scan table holds `(x, residual)` pairs.
    #[error("no solution in window [{lo:e}, {hi:e}]")]
    NoSolution {
        lo: f64,
        hi: f64,
        scan: Vec<(f64, f64)>,
    },

    #[error("SPADE curve never exceeds the direct-imaging curve on [{lo:e}, {hi:e}]")]
    NoThreshold { lo: f64, hi: f64 },

    #[error("target fraction {fraction} unreachable on scan grid (best {max_achieved})")]
    Unreachable { fraction: f64, max_achieved: f64 },

    #[error("empty input")]
    EmptyInput,
}

pub(crate) fn check_param(
    name: &'static str,
    value: f64,
    ok: bool,
    reason: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}
