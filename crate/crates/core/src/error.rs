use thiserror::Error;

use crate::graph::Vertex;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: Vertex, n: usize },

    #[error("self-arc at vertex {0}")]
    SelfArc(Vertex),

    #[error("duplicate arc ({0}, {1})")]
    DuplicateArc(Vertex, Vertex),

    #[error("antiparallel arcs ({0}, {1}) and ({1}, {0}) would induce a multi-edge")]
    AntiparallelArcs(Vertex, Vertex),

    #[error("invalid move for agent {agent}: {reason}")]
    InvalidMove { agent: Vertex, reason: String },

    #[error("invalid strategy for agent {agent}: {reason}")]
    InvalidStrategy { agent: Vertex, reason: String },

    #[error("edge price must be positive, got {0}")]
    NonPositiveAlpha(String),

    #[error(
        "instance too large: {space} candidate strategies exceed the enumeration limit of {limit}; \
         set a budget cap or raise the limit"
    )]
    TooLarge { space: u128, limit: u128 },

    #[error("graph is not a tree")]
    NotATree,

    #[error("graph is disconnected")]
    Disconnected,

    #[error("network is not in greedy equilibrium (agent {agent} has an improving greedy move)")]
    NotGreedyEquilibrium { agent: Vertex },

    #[error("operation requires the {0} objective")]
    WrongObjective(&'static str),

    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("facility location solution opens no facility")]
    EmptyOpenSet,

    #[error("invalid facility location data: {0}")]
    InvalidInstance(String),

    #[error("cannot parse rational {0:?}")]
    ParseRational(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
