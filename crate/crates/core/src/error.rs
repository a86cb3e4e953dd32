use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A named input is outside its domain (NaN, infinite, or out of range).
    #[error("{name} out of range: {value} ({reason})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Raw fidelity at or below 1/2 cannot be purified.
    #[error("unpurifiable fidelity F = {0} (purification requires F > 0.5)")]
    Unpurifiable(f64),

    /// The requested operation needs a different noise model.
    #[error("unsupported noise model: {0}")]
    UnsupportedNoise(&'static str),

    /// A pumping step whose comparison can never come out equal.
    #[error("{0} pumping step has zero acceptance probability")]
    NeverAccepted(String),

    /// Some transient state can never be left, so absorption never happens.
    #[error("Markov chain does not converge: {0}")]
    NonConvergent(String),

    #[error("required raw-pair budget exceeds cap of {cap}")]
    BudgetExceeded { cap: u64 },

    /// The density-matrix oracle produced a state that violates its own
    /// invariants, which means the circuit convention is broken.
    #[error("oracle consistency failure: {0}")]
    Inconsistent(String),
}

impl Error {
    /// Name of the offending input, if the error is tied to one.
    pub fn field(&self) -> Option<&'static str> {
        match self {
            Error::OutOfRange { name, .. } => Some(name),
            Error::Unpurifiable(_) => Some("F"),
            _ => None,
        }
    }
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::OutOfRange {
            name,
            value,
            reason: "not finite",
        });
    }
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::OutOfRange {
            name,
            value,
            reason: "must lie in [0, 1]",
        });
    }
    Ok(value)
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::OutOfRange {
            name,
            value,
            reason: "not finite",
        });
    }
    if value <= 0.0 {
        return Err(Error::OutOfRange {
            name,
            value,
            reason: "must be > 0",
        });
    }
    Ok(value)
}
