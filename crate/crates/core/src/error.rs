use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("position ({x}, {z}) lies outside the field [0, {x_max}] x [0, {z_max}]")]
    OutOfBounds {
        x: f64,
        z: f64,
        x_max: f64,
        z_max: f64,
    },

    #[error("ball move rejected: target leaves the field")]
    MoveRejected,

    #[error("player {0} is missing from the state pair")]
    MissingEntity(u32),

    #[error("ball moved along both x and z between the two previous states")]
    SingleAxisViolation,

    #[error("prediction needs two committed states")]
    NotEnoughHistory,

    #[error("state pair is inconsistent: {0}")]
    InconsistentPair(String),

    #[error("no latency samples observed yet")]
    NotReady,

    #[error("snapshot decode failed: {0}")]
    Snapshot(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
