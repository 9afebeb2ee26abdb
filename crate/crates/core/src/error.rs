use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix {matrix} is not symmetric (max asymmetry {asymmetry:.3e})")]
    NonSymmetricInput { matrix: String, asymmetry: f64 },

    #[error("{what} is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { what: String, min_eigenvalue: f64 },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid time signal: {0}")]
    InvalidSignal(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("time {t} lies outside the sampled signal domain [{lo}, {hi}]")]
    SignalDomainExceeded { t: f64, lo: f64, hi: f64 },

    #[error("stability matrix is defective: {0}")]
    DefectiveSpectrum(String),

    #[error("could not pair eigenfrequencies: {0}")]
    DegenerateUnresolved(String),

    #[error("mode frequency {re}{im:+}i is not real; real trajectories are undefined for unstable systems")]
    ComplexFrequency { re: f64, im: f64 },

    #[error("mode basis is singular (condition number {condition:.3e})")]
    SingularModeBasis { condition: f64 },

    #[error("Riccati solution blew up at t = {t} (entry magnitude {magnitude:.3e})")]
    BlowUp { t: f64, magnitude: f64 },

    #[error("position matrix D is singular (condition number {condition:.3e})")]
    SingularD { condition: f64 },

    #[error(
        "no mode selection yields a shape matrix with positive definite real part \
         ({candidates} candidates scanned): the system does not have integrable quantum states"
    )]
    NoPhysicalState { candidates: usize },

    #[error("order {order} exceeds the oracle limit {max}")]
    OrderTooLarge { order: usize, max: usize },

    #[error("relation {relation} violated (residual {residual:.3e})")]
    RelationViolation { relation: String, residual: f64 },

    #[error("excitation amplitudes do not form a basis (condition number {condition:.3e})")]
    SingularBasis { condition: f64 },

    #[error("direct and factored coherent-state forms disagree by {difference:.3e}")]
    FormMismatch { difference: f64 },

    #[error("truncation order {order} exceeds the limit {max}")]
    TruncationTooLarge { order: usize, max: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("matrix gamma must be diagonal for the orthogonality check")]
    NotDiagonal,

    #[error("packet is not normalized (norm integral {integral:.12})")]
    NotNormalized { integral: f64 },
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonSymmetricInput { .. } => "NonSymmetricInput",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidSignal(_) => "InvalidSignal",
            Error::InvalidModel(_) => "InvalidModel",
            Error::SignalDomainExceeded { .. } => "SignalDomainExceeded",
            Error::DefectiveSpectrum(_) => "DefectiveSpectrum",
            Error::DegenerateUnresolved(_) => "DegenerateUnresolved",
            Error::ComplexFrequency { .. } => "ComplexFrequency",
            Error::SingularModeBasis { .. } => "SingularModeBasis",
            Error::BlowUp { .. } => "BlowUp",
            Error::SingularD { .. } => "SingularD",
            Error::NoPhysicalState { .. } => "NoPhysicalState",
            Error::OrderTooLarge { .. } => "OrderTooLarge",
            Error::RelationViolation { .. } => "RelationViolation",
            Error::SingularBasis { .. } => "SingularBasis",
            Error::FormMismatch { .. } => "FormMismatch",
            Error::TruncationTooLarge { .. } => "TruncationTooLarge",
            Error::GridMismatch => "GridMismatch",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::NotDiagonal => "NotDiagonal",
            Error::NotNormalized { .. } => "NotNormalized",
        }
    }

    /// Process exit status: 2 no physical state, 3 input validation, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoPhysicalState { .. } => 2,
            Error::NonSymmetricInput { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::DimensionMismatch { .. }
            | Error::InvalidSignal(_)
            | Error::InvalidModel(_)
            | Error::OrderTooLarge { .. }
            | Error::TruncationTooLarge { .. }
            | Error::GridMismatch
            | Error::InvalidGrid(_)
            | Error::NotDiagonal => 3,
            _ => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
