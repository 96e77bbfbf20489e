use thiserror::Error;

/// Failure modes shared across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("enumerated moduli fail to tend to zero: {0}")]
    NonDecayingSystem(String),
    #[error("system contains a zero modulus at an index where a nonzero one is required: {0}")]
    ZeroEntry(String),
    #[error("enumeration budget exceeded: needed more than {budget} indices ({context})")]
    BudgetExceeded { budget: usize, context: String },
    #[error("integer overflow: {0}")]
    Overflow(String),
    #[error("division by an undeclared zero multiplier at index {0}")]
    ZeroDivisor(String),
    #[error("tail sum has no certified convergent bound: {0}")]
    DivergentTail(String),
    #[error("supremum scan found no certified finite value: {0}")]
    NoFiniteSup(String),
    #[error("operation requires moduli non-increasing in the natural index order: {0}")]
    NonMonotoneSystem(String),
    #[error("unsupported constraint family: {0}")]
    UnsupportedFamily(String),
    #[error("root bracketing failed: {0}")]
    RootBracketFailure(String),
    #[error("order-formula precondition not met: {0}")]
    BranchPreconditionFailed(String),
    #[error("parameter regime does not select a theorem branch: {0}")]
    RegimeMismatch(String),
    #[error("quadrature failed to reach requested accuracy: {0}")]
    QuadratureFailure(String),
    #[error("series converges too slowly for the term budget: {0}")]
    SlowConvergence(String),
    #[error("element support violates the required index cone: {0}")]
    SupportViolation(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid element: {0}")]
    InvalidElement(String),
}

pub type Result<T> = std::result::Result<T, Error>;
