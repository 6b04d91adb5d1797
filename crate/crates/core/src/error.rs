use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pipeline specification: {0}")]
    InvalidSpec(String),

    #[error("stage {stage} produced decision {value}, outside its domain {domain}")]
    DomainViolation {
        stage: usize,
        value: u32,
        domain: String,
    },

    #[error("record `{record}` has no truth value for stage {stage}")]
    MissingTruth { record: String, stage: usize },

    #[error("empty population: no rates can be estimated")]
    EmptyPopulation,

    #[error("unknown group `{0}`")]
    UnknownGroup(String),

    #[error("invalid group set: {0}")]
    InvalidGroups(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("conditional probability undefined: Pr{{{condition}}} = 0")]
    UndefinedConditional { condition: String },

    #[error("slack undefined for group `{group}`: majority true-positive rate is 0")]
    InfeasibleSlack { group: String },

    #[error("epsilon {eps:?} infeasible for group `{group}`: (1+eps) * majority rate = {scaled:?} lies outside [0, 1]")]
    InfeasibleEpsilon {
        group: String,
        eps: f64,
        scaled: f64,
    },

    #[error("decoupling ratio undefined for group `{group}`: denominator is 0")]
    UndefinedRatio { group: String },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("infeasible scenario: {0}")]
    InfeasibleScenario(String),

    #[error("invalid incentive rule: {0}")]
    InvalidRule(String),

    #[error("trajectory left (0, 1) at step {step}; last valid share {last:?}")]
    Divergence { step: usize, last: f64 },

    #[error("{r:?} is not a fixed point: step maps it to {image:?}")]
    NotFixedPoint { r: f64, image: f64 },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn undefined(condition: impl Into<String>) -> Self {
        Error::UndefinedConditional {
            condition: condition.into(),
        }
    }
}
