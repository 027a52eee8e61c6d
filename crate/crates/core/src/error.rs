use alloc::string::String;

/// Errors produced by the algebra, norm, and hierarchy routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("modulus {0} is not a prime")]
    NotPrime(u32),

    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u32, right: u32 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix has {found} entries, expected {expected}")]
    BadShape { expected: usize, found: usize },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("operator is not unitary (defect {defect:e} exceeds tolerance {tolerance:e})")]
    NotUnitary { defect: f64, tolerance: f64 },

    #[error(
        "exact evaluation needs {required} base-case evaluations but the budget is {budget}; \
         use sampled mode instead"
    )]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("phase extraction failed: entry ratio deviates by {deviation:e} from every root")]
    PhaseExtraction { deviation: f64 },

    #[error("level set is empty")]
    EmptyLevelSet,

    #[error("level set is for level {found}, expected {expected}")]
    LevelMismatch { expected: u32, found: u32 },

    #[error("out of scope: {0}")]
    OutOfScope(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
