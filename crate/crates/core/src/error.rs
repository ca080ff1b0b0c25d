use crate::symkernel::KernelError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Kernel(#[from] KernelError),

    #[error("invalid vector field: {0}")]
    InvalidField(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("basis is linearly dependent; coefficients are not unique")]
    AmbiguousSpan,

    #[error("linear equation excluded from the class: n = {n}, m = {m}")]
    LinearEquation { n: String, m: String },
    #[error("invalid equation: {0}")]
    InvalidSpec(String),
    #[error("transformation family {family} does not apply: {reason}")]
    FamilyMismatch { family: String, reason: String },
    #[error("degenerate transformation parameters: {0}")]
    NonInvertibleParameterization(String),
    #[error("composition is degenerate: {0}")]
    DegenerateResult(String),
    #[error("case database: {0}")]
    Database(String),

    #[error("generator is not affine: {0}")]
    UnsupportedGenerator(String),
    #[error("generator only moves u; no reduction")]
    TrivialOrbit,
    #[error("explicit x survives the ansatz: {0}")]
    ResidualHasX(String),
    #[error("guard violated: {0}")]
    GuardViolation(String),
    #[error("spec mismatch: {0}")]
    SpecMismatch(String),
    #[error("degenerate scaling: 3m - n - 2 = 0")]
    DegenerateScaling,

    #[error("step size underflow at {at}: {state}")]
    StepUnderflow { at: f64, state: String },
    #[error("non-finite state at {at}: {state}")]
    NonFiniteState { at: f64, state: String },
    #[error("time step {dt} exceeds the stability limit {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("domain error at {at}: {message}")]
    Domain { at: f64, message: String },
    #[error("interpolation outside the profile span at omega = {0}")]
    ExtrapolationRequest(f64),
    #[error("grids do not overlap on the requested region")]
    NoOverlap,

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
