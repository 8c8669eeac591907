use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("nonlinearity table has a zero entry at n = {index}")]
    ZeroInTable { index: usize },
    #[error("nonlinearity table has a non-finite entry at n = {index}")]
    NonFiniteInTable { index: usize },
    #[error("n = {n} is outside the nonlinearity table (length {len})")]
    OutOfTableRange { n: usize, len: usize },
    #[error("cannot parse nonlinearity function `{0}`")]
    ParseNonlinearity(String),
    #[error("cutoff {cutoff} is too small, at least {required} is required")]
    CutoffTooSmall { cutoff: usize, required: usize },
    #[error("ladder kinds {lower} and {dual} have different steps")]
    IncompatibleKinds { lower: &'static str, dual: &'static str },
    #[error("{family} series diverges: |z|^2 = {z_sq} is not below the convergence bound {bound}")]
    Divergent { family: &'static str, z_sq: f64, bound: f64 },
    #[error("cutoff {cutoff} too small: truncated tail {tail:e} exceeds tolerance {tolerance:e}")]
    InsufficientCutoff { cutoff: usize, tail: f64, tolerance: f64 },
    #[error("tabulated nonlinearity has no asymptotics to take a limit of")]
    NoAsymptotics,
    #[error("invalid atomic preparation: {0}")]
    InvalidAtom(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("leakage {leakage:e} exceeds budget {budget:e} after atom {step}")]
    LeakBudgetExceeded { step: usize, leakage: f64, budget: f64 },
    #[error("recursion and unitary paths disagree by {deviation:e} after atom {step}")]
    PathMismatch { step: usize, deviation: f64 },
    #[error("phase-independent transform is singular: sin(g tau sqrt(lambda({index}))) vanishes")]
    SingularTransform { index: usize },
}
