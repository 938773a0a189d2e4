use thiserror::Error;

/// Errors produced by the toolkit.
///
/// The variants split into two families that the CLI maps onto different
/// exit codes: input problems (bad ids, bad parameters, malformed files) and
/// domain problems (a disconnected graph, a search that does not bracket).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("graph not connected")]
    NotConnected,

    #[error("generation failed after {attempts} attempts: {message}")]
    Generation { attempts: usize, message: String },

    #[error("search failed: {0}")]
    Search(String),

    #[error("sweep incomplete (completed sizes {completed:?}): {source}")]
    PartialSweep {
        completed: Vec<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors about the state of the world rather than the caller's
    /// arguments.
    pub fn is_domain(&self) -> bool {
        match self {
            Error::NotConnected | Error::Search(_) | Error::Generation { .. } => true,
            Error::PartialSweep { source, .. } => source.is_domain(),
            _ => false,
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Input(_) => "input",
            Error::Parse { .. } => "parse",
            Error::Parameter(_) => "parameter",
            Error::NotConnected => "not_connected",
            Error::Generation { .. } => "generation",
            Error::Search(_) => "search",
            Error::PartialSweep { .. } => "partial_sweep",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
