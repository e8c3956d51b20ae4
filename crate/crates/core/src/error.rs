use thiserror::Error;

/// Preconditions that a decomposer or checker may refuse to work without.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precondition {
    Bistochastic,
    SdEnvyFree,
    ThreeAgents,
    TwoTypes,
    RowsIdenticalWithinType,
    UniformMatrix,
}

impl Precondition {
    pub fn name(self) -> &'static str {
        match self {
            Precondition::Bistochastic => "bistochastic",
            Precondition::SdEnvyFree => "sd-ef",
            Precondition::ThreeAgents => "three-agents",
            Precondition::TwoTypes => "at-most-two-types",
            Precondition::RowsIdenticalWithinType => "rows-identical-within-type",
            Precondition::UniformMatrix => "uniform-matrix",
        }
    }
}

impl std::fmt::Display for Precondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("precondition failed: {0}")]
    Precondition(Precondition),
    #[error("{what} = {requested} exceeds the limit of {limit}")]
    Resource {
        what: &'static str,
        requested: usize,
        limit: usize,
    },
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
