use std::io;
use std::path::PathBuf;

use projgraph::ErrorKind;

#[derive(Debug)]
pub enum CliError {
    Core(projgraph::Error),
    Io { path: PathBuf, source: io::Error },
    /// Bad flag values or inconsistent inputs.
    #[cfg_attr(not(feature = "parallel"), allow(dead_code))]
    Invalid(String),
    /// Valid inputs that admit no result.
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 2,
            CliError::Invalid(_) => 3,
            CliError::Infeasible(_) => 4,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Io => 2,
                ErrorKind::Validation => 3,
                ErrorKind::Infeasible => 4,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Invalid(msg) | CliError::Infeasible(msg) => f.write_str(msg),
        }
    }
}

macro_rules! from_core {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(e.into())
            }
        }
    )*};
}

from_core!(
    projgraph::Error,
    projgraph::graph::GraphError,
    projgraph::community::CommunityError,
    projgraph::centrality::CentralityError,
    projgraph::analysis::AnalysisError,
    projgraph::search::SearchError
);
