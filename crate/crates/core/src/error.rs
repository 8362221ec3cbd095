use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("index error: {0}")]
    Index(String),

    #[error("inconsistent duplicate entry at line {line}: {message}")]
    Consistency { line: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("eigensolver did not converge (best residual {best_residual:.3e})")]
    Convergence { best_residual: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("oracle budget exceeded: {requested} applications requested, limit {limit}")]
    Budget { requested: u128, limit: u128 },

    #[error("no phase branch lands in window [{lo}, {hi}]")]
    Window { lo: f64, hi: f64 },

    #[error("window width {width} exceeds unambiguous range {max}")]
    Ambiguity { width: f64, max: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("shot {shot}: {source}")]
    Shot {
        shot: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Innermost error, looking through shot annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Shot { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for errors caused by user input or configuration rather than
    /// by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self.root(),
            Error::Parse { .. }
                | Error::Index(_)
                | Error::Consistency { .. }
                | Error::Domain(_)
                | Error::Config(_)
                | Error::Io(_)
                | Error::Json(_)
                | Error::Ambiguity { .. }
        )
    }
}
