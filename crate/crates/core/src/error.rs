use thiserror::Error;

use crate::hypergraph::Stage;
use crate::tree::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("corrupt edge: top {top} is not an ancestor-or-self of bottom {bottom}")]
    CorruptEdge { top: NodeId, bottom: NodeId },

    #[error("unsupported k = {k}: {reason}")]
    UnsupportedK { k: u32, reason: String },

    #[error("pipeline order: expected stage {expected}, found {found}")]
    PipelineOrder { expected: Stage, found: Stage },

    #[error("construction bug: {0}")]
    ConstructionBug(String),

    #[error("node {0} carries no literal")]
    Lookup(NodeId),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("budget: {0}")]
    Budget(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
