use thiserror::Error;

/// Errors are split into two families: malformed input (`Parse`,
/// `Invalid`) and mathematical failures (everything else). The CLI maps the
/// families onto distinct exit codes via [`Error::is_input_error`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("no boundary in dimension 0")]
    BoundaryOfPoint,
    #[error("chain dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("not a chain in the model simplex")]
    NotInModelSimplex,
    #[error("pushforward requires affine simplices")]
    NotAffine,
    #[error("homotopy chain mu_{0} requested; dimensions above {max} are not supported", max = crate::chains::MAX_MU_DIM)]
    MuTooLarge(usize),
    #[error("linearly dependent lattice basis")]
    DependentBasis,
    #[error("dimension {0} too large for this operation (limit {1})")]
    DimensionTooLarge(usize, usize),
    #[error("simplex too large to lift")]
    TooLargeToLift,
    #[error("simplex is not certified small")]
    NotSmall,
    #[error("subtorus not totally geodesic in the lattice sense: {0}")]
    NotPrimitive(String),
    #[error("chain is not a cycle")]
    NotACycle,
    #[error("not null-homologous in the affine complex (homology class {0})")]
    NotNullHomologous(String),
    #[error("simplex is not a face of the triangulation: {0}")]
    NotInComplex(String),
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("coefficients not rational-representable: {0}")]
    NotRational(String),
    #[error("regular ideal simplex volume v_{0} unknown: supply v_n")]
    MissingVn(usize),
    #[error("degenerate simplices should have cancelled: {0}")]
    BoundaryNotFundamental(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl Error {
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Parse(_) | Error::Invalid(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
