//! Projection graphs of social networks onto peer-to-peer overlays.
//!
//! Users of a social graph are grouped into peers by community detection;
//! the peers and the bundles of social edges between them form a weighted
//! projection graph. The crate computes centrality on both graphs, estimates
//! peer scores from user scores, correlates the two across community sizes,
//! and simulates socially informed search on either layer.
//!
//! Heavy loops (betweenness sources, search queries) run on rayon when the
//! `parallel` feature is on; [`Execution::Sequential`] gives the same output
//! on one thread.

pub mod analysis;
pub mod centrality;
pub mod community;
pub mod fixtures;
pub mod graph;
pub mod par;
pub mod projection;
pub mod search;
pub mod synth;

pub use centrality::{CentralityVector, DistanceMode, Metric, Scope};
pub use community::{Mapping, PeerId};
pub use graph::{EdgeKey, Layer, SocialGraph, Topology, UserId};
pub use par::Execution;
pub use projection::{build_projection, ProjectionGraph};

use thiserror::Error;

/// Any error the crate reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
    #[error(transparent)]
    Community(#[from] community::CommunityError),
    #[error(transparent)]
    Centrality(#[from] centrality::CentralityError),
    #[error(transparent)]
    Analysis(#[from] analysis::AnalysisError),
    #[error(transparent)]
    Search(#[from] search::SearchError),
}

/// Coarse error classes, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Io,
    Validation,
    /// Valid input for which the request cannot be met.
    Infeasible,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use centrality::CentralityError as C;
        use community::CommunityError as M;
        use search::SearchError as S;
        let community = |e: &M| match e {
            M::Io(_) => ErrorKind::Io,
            M::TargetBelowMean { .. } => ErrorKind::Infeasible,
            _ => ErrorKind::Validation,
        };
        let centrality = |e: &C| match e {
            C::TooFewNodes { .. } => ErrorKind::Infeasible,
            _ => ErrorKind::Validation,
        };
        match self {
            Error::Graph(graph::GraphError::Io { .. }) => ErrorKind::Io,
            Error::Graph(_) => ErrorKind::Validation,
            Error::Community(e) => community(e),
            Error::Centrality(e) => centrality(e),
            Error::Analysis(analysis::AnalysisError::Community(e)) => community(e),
            Error::Analysis(analysis::AnalysisError::Centrality(e)) => centrality(e),
            Error::Analysis(_) => ErrorKind::Validation,
            Error::Search(S::Community(e)) => community(e),
            Error::Search(S::Centrality(e)) => centrality(e),
            Error::Search(S::NoQueries(..) | S::TooFewUsers) => ErrorKind::Infeasible,
            Error::Search(_) => ErrorKind::Validation,
        }
    }
}
