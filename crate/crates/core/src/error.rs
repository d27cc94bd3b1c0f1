use alloc::string::String;
use core::fmt;

use crate::graph::VertexId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Adjacency list is not a valid simple undirected graph.
    InvalidGraph(String),
    VertexOutOfRange { vertex: VertexId, vertex_count: usize },
    DuplicateStart { first: usize, second: usize, vertex: VertexId },
    DuplicateGoal { first: usize, second: usize, vertex: VertexId },
    /// The agent's goal cannot be reached from its start.
    Unsolvable { agent: usize },
    MalformedPath { agent: usize, step: usize, reason: &'static str },
    SocBelowLowerBound { soc: u64, lower_bound: u64 },
    /// The SAT backend failed to answer.
    Backend(String),
    /// An internal invariant of the encoding did not hold. Always a bug.
    Encoding(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGraph(msg) => write!(f, "invalid graph: {msg}"),
            Error::VertexOutOfRange { vertex, vertex_count } => {
                write!(f, "vertex {vertex} out of range (graph has {vertex_count} vertices)")
            }
            Error::DuplicateStart { first, second, vertex } => {
                write!(f, "agents {first} and {second} share start vertex {vertex}")
            }
            Error::DuplicateGoal { first, second, vertex } => {
                write!(f, "agents {first} and {second} share goal vertex {vertex}")
            }
            Error::Unsolvable { agent } => {
                write!(f, "goal of agent {agent} is unreachable from its start")
            }
            Error::MalformedPath { agent, step, reason } => {
                write!(f, "malformed path for agent {agent} at step {step}: {reason}")
            }
            Error::SocBelowLowerBound { soc, lower_bound } => {
                write!(f, "sum-of-costs bound {soc} is below the lower bound {lower_bound}")
            }
            Error::Backend(msg) => write!(f, "SAT backend failure: {msg}"),
            Error::Encoding(msg) => write!(f, "internal encoding error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
