use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ControllerError {
    #[error("controller is not engaged")]
    NotEngaged,
    #[error("non-finite input in field `{0}`")]
    NonFinite(&'static str),
    #[error("lead-speed buffer is empty; controller not initialized")]
    Uninitialized,
    #[error("deceleration branch called with a_lead = {a_lead} (needs a_lead < -{eps_a})")]
    BranchSelection { a_lead: f64, eps_a: f64 },
}

#[derive(Debug, Error, PartialEq)]
#[error("collision between {follower} and {leader} at t = {t:.3} s (gap {gap:.4} m)")]
pub struct Collision {
    pub follower: String,
    pub leader: String,
    pub t: f64,
    pub gap: f64,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("{collision}\nlast 5 s:\n{dump}")]
    Collision { collision: Collision, dump: String },
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("cut-in at t = {t:.3} s rejected: {reason}")]
    CutIn { t: f64, reason: String },
    #[error(transparent)]
    Controller(#[from] ControllerError),
}

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("AV trajectory `{0}` not found")]
    MissingAv(String),
    #[error("no temporal overlap between the AV and any other trajectory")]
    NoOverlap,
    #[error("need at least 2 speed samples, got {0}")]
    TooFewSamples(usize),
    #[error("box is empty")]
    EmptyBox,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("line {line}: {msg}")]
    Row { line: u64, msg: String },
    #[error("missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("vehicle {vehicle}: time not increasing at line {line}")]
    NonMonotone { vehicle: String, line: u64 },
    #[error("no trajectories in input")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
