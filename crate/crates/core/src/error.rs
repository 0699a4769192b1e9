use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysicsError {
    #[error("{quantity} outside the admissible domain: {value}")]
    Domain { quantity: &'static str, value: f64 },
    #[error("temperature inversion failed to converge (v = {v}, e = {e})")]
    NoConvergence { v: f64, e: f64 },
}

/// Failure of a single time step.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error("positivity lost: {field}[{index}] = {value}")]
    Positivity { field: &'static str, index: usize, value: f64 },
    #[error("cell {index}: {source}")]
    Physics {
        index: usize,
        #[source]
        source: PhysicsError,
    },
    #[error("singular tridiagonal system in the {field} solve")]
    Singular { field: &'static str },
    #[error("time step {dt:e} fell below dt_min = {dt_min:e}")]
    DtCollapse { dt: f64, dt_min: f64 },
    #[error("observer stopped the run: {0}")]
    Observer(String),
}

/// A step failure together with the simulation time at which it happened.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("simulation aborted at t = {t}: {source}")]
pub struct SimError {
    pub t: f64,
    #[source]
    pub source: StepError,
}

/// A configuration problem tied to a key path such as `physics.q`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {reason}")]
pub struct ConfigIssue {
    pub path: String,
    pub reason: String,
}

impl ConfigIssue {
    pub fn new(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Self { path: path.into(), reason: reason.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("invalid configuration:\n{}", format_issues(.0))]
    Invalid(Vec<ConfigIssue>),
}

fn format_issues(issues: &[ConfigIssue]) -> String {
    issues.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n")
}

impl ConfigError {
    pub fn issues(&self) -> &[ConfigIssue] {
        match self {
            ConfigError::Invalid(v) => v,
            ConfigError::Syntax { .. } => &[],
        }
    }
}
