use thiserror::Error;

/// A single invalid parameter, reported with its scenario field path.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{field} {message}")]
pub struct ParamError {
    pub field: String,
    pub message: String,
}

impl ParamError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ParamError {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstitutiveError {
    #[error("resolvent root did not converge for |z| = {norm} (lambda = {lambda}, p = {p})")]
    RootNotConverged { norm: f64, lambda: f64, p: f64 },
    #[error("Yosida gradient requires lambda > 0, got {0}")]
    NonPositiveLambda(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinearError {
    #[error("triangle {0} has non-positive area")]
    DegenerateTriangle(usize),
    #[error("{0} matrix is not positive definite")]
    NotPositiveDefinite(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error(
        "inner visco-elastic iteration did not converge in {iterations} iterations at t = {t} \
         (last increment {increment:.3e}); reduce time.dt"
    )]
    InnerNotConverged {
        t: f64,
        iterations: usize,
        increment: f64,
    },
    #[error(
        "outer thermal iteration did not converge in {iterations} iterations at t = {t} \
         (last increment {increment:.3e}); reduce time.dt"
    )]
    OuterNotConverged {
        t: f64,
        iterations: usize,
        increment: f64,
    },
    #[error(
        "plastic sub-step {h:.3e} exceeds the stability limit {limit:.3e}; \
         increase solver.substeps to at least {min_substeps} or increase material.yosida_lambda"
    )]
    StabilityGuard {
        h: f64,
        limit: f64,
        min_substeps: usize,
    },
    #[error("initial data not admissible: flow rule not finite on element {0}")]
    InadmissibleInitialData(usize),
    #[error("non-finite state produced at t = {0}")]
    NonFinite(f64),
    #[error(transparent)]
    Constitutive(#[from] ConstitutiveError),
    #[error(transparent)]
    Linear(#[from] LinearError),
    #[error(transparent)]
    Param(#[from] ParamError),
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{field}: unknown preset `{name}`")]
    UnknownPreset { field: String, name: String },
    #[error("{0}")]
    Invalid(#[from] ParamError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
