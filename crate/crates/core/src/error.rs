use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed user input: unknown symbol, wrong dimensions, bad file.
    #[error("input error: {0}")]
    Input(String),

    /// A model failed one of its structural invariants.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Conditioning on (or normalizing) something with vanishing probability.
    #[error("degenerate condition: {what} (value {value:.3e})")]
    DegenerateCondition { what: String, value: f64 },

    /// The operation is not defined for this kind of model.
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// Unit eigenvalue of the net transition matrix is not simple.
    #[error("unit eigenvalue has multiplicity {multiplicity}; steady state is not unique")]
    DegenerateEigenspace {
        multiplicity: usize,
        /// Basis of the left unit eigenspace, one row each.
        basis: Vec<Vec<f64>>,
    },

    /// A matrix that must be inverted is too badly conditioned.
    #[error("ill-conditioned {what}: condition number {cond:.3e} exceeds cap {cap:.1e}")]
    Conditioning { what: String, cond: f64, cap: f64 },

    /// Numerical residue above tolerance, e.g. a complex trace with a
    /// non-negligible imaginary part.
    #[error("numerical integrity: {0}")]
    NumericalIntegrity(String),

    /// A bound that holds as a theorem was violated.
    #[error("internal consistency violation: {0}")]
    AlgorithmBug(String),

    /// An exhaustive enumeration would exceed the configured cap.
    #[error("enumeration of {needed} words exceeds cap {cap}; {hint}")]
    ResourceCap { needed: u128, cap: u128, hint: String },
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_)
            | Error::InvalidModel(_)
            | Error::DegenerateCondition { .. }
            | Error::UnsupportedModel(_) => 2,
            Error::DegenerateEigenspace { .. }
            | Error::Conditioning { .. }
            | Error::NumericalIntegrity(_)
            | Error::AlgorithmBug(_) => 4,
            Error::ResourceCap { .. } => 5,
        }
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidModel(msg.into())
    }

    pub(crate) fn degenerate(what: impl Into<String>, value: f64) -> Self {
        Error::DegenerateCondition { what: what.into(), value }
    }
}
