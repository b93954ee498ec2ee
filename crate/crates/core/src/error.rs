use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("parameter {name} must be finite and positive, got {value}")]
    NonPositive { name: String, value: f64 },
    #[error("unknown parameter key `{0}`")]
    UnknownKey(String),
    #[error("missing parameter key `{0}`")]
    MissingKey(String),
    #[error("parameter key `{0}` given twice")]
    DuplicateKey(String),
    #[error("line {line}: expected `name = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("invalid JSON parameter file: {0}")]
    Json(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// Evaluation outside the domain of a model function.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{what} requires {requirement}, got {value}")]
    Domain {
        what: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("{0} is singular at this point")]
    Singular(&'static str),
}

impl ModelError {
    pub(crate) fn domain(what: &'static str, requirement: &'static str, value: f64) -> Self {
        Self::Domain {
            what,
            requirement,
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error(
        "step size underflow at t = {t} (h = {h:e}); problem too stiff for the requested tolerance"
    )]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("step budget of {max_steps} steps exhausted at t = {t}")]
    BudgetExceeded { max_steps: usize, t: f64 },
    #[error("event {index}: sign change reported but root bracketing failed on [{t_lo}, {t_hi}]")]
    EventBracket { index: usize, t_lo: f64, t_hi: f64 },
    #[error("invalid integrator input: {0}")]
    InvalidInput(String),
    #[error("vector field failed at the initial state: {0}")]
    Field(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("no positive equilibrium: alpha K_h = {alpha_kh} <= K_s = {k_s}")]
    NoPositiveEquilibrium { alpha_kh: f64, k_s: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("analytic and finite-difference {quantity} disagree: {analytic} vs {numeric}")]
    Consistency {
        quantity: String,
        analytic: f64,
        numeric: f64,
    },
    #[error("no section crossing before t = {t_max} (eps = {eps})")]
    NoHit { eps: f64, t_max: f64 },
    #[error("parameters are not oscillatory: trajectories converge to the equilibrium ({0})")]
    ConvergesToEquilibrium(String),
    #[error("cycle not converged after {periods} transient periods (last return difference {last_diff:e})")]
    NotConverged { periods: usize, last_diff: f64 },
    #[error("malformed cycle: {0}")]
    MalformedCycle(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Param(#[from] ParamError),
}
