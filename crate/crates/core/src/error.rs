use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("p-box bounds cross at x = {x}: lower {lower} > upper {upper}")]
    CrossingBounds { x: f64, lower: f64, upper: f64 },
    #[error("{curve} CDF decreases at x = {x}")]
    NonMonotone { curve: &'static str, x: f64 },
    #[error("{curve} CDF has wrong limit: {detail}")]
    BadLimits { curve: &'static str, detail: String },
    #[error("coordinate `{name}` has unbounded support after truncation")]
    UnboundedSupport { name: String },

    #[error("representative points {first} and {second} coincide")]
    DuplicatePoints { first: usize, second: usize },

    #[error("time step {dt} exceeds the stability limit {limit}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("non-finite state at t = {time}")]
    NonFiniteState { time: f64 },
    #[error("spectral integral did not converge")]
    DivergentSpectrum,
    #[error("external model failed: {0}")]
    AdapterFailure(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("kernel centred at {value} leaks off the grid [{lower}, {upper}]")]
    OffGrid { value: f64, lower: f64, upper: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dense materialization is limited to 3 dimensions, requested {0}")]
    DenseTooLarge(usize),
    #[error("pseudo marginal {value:e} below threshold at the requested epistemic point")]
    ZeroMarginal { value: f64 },
    #[error("injected density is invalid: {0}")]
    BadDensity(String),
    #[error("epistemic point outside the admissible evaluation region: {0}")]
    OutsideSupport(String),

    #[error("conditional family is empty")]
    EmptyFamily,
    #[error("too few representative points: effective sample size {effective:.2} < {required}")]
    InsufficientPoints { effective: f64, required: f64 },
    #[error("projected {projected} model runs exceed the budget of {cap}")]
    BudgetExceeded { projected: u64, cap: u64 },
    #[error("{0} interval dimensions give too many vertices")]
    TooManyVertices(usize),
    #[error("unsupported problem: {0}")]
    Unsupported(String),

    #[error("quadrature failed to reach tolerance")]
    QuadratureFailure,
    #[error("argument must be positive, got {0}")]
    NonPositive(f64),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
