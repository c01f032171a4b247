//! Calculus on resistance networks.
//!
//! A resistance network is a simple, connected, locally finite graph whose
//! edges carry positive resistances `R(u,v)`; the reciprocal `C(u,v) = 1/R(u,v)`
//! is the edge conductance.  This crate builds such networks (finite edge
//! lists or lazy infinite generators), computes the resistance path metric,
//! assembles Dirichlet energy forms and weighted Laplacians, solves boundary
//! value problems on truncation towers, and evolves continuous-time Markov
//! chains driven by the Laplacian under absorbing or reflecting conditions at
//! the network's ends.
//!
//! The module layout follows the pipeline:
//!
//! * [`graph`]: vertex addresses, finite graphs, vertex weights, generators
//! * [`metric`]: shortest resistance paths, truncations, cuts and separation
//! * [`forms`]: energy form, Laplacian, Q-matrix, Sobolev-type norms
//! * [`dirichlet`]: harmonic functions, spectral gap bounds, towers
//! * [`semigroup`]: generators with boundary conditions, heat evolution
//! * [`sampling`]: seeded random hosts and functions for randomized checks

pub mod dirichlet;
pub mod forms;
pub mod graph;
pub mod metric;
pub mod sampling;
pub mod semigroup;
mod solver;

use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("duplicate edge {0}")]
    DuplicateEdge(String),
    #[error("self loop at {0}")]
    SelfLoopEdge(String),
    #[error("edge {edge} has non-positive resistance {resistance}")]
    NonPositiveResistance { edge: String, resistance: f64 },
    #[error("vertex {0} is declared but carries no edge")]
    IsolatedVertexSpecMismatch(String),
    #[error("bad generator spec: {0}")]
    BadSpec(String),
    #[error("bad truncation depth {0}")]
    BadDepth(usize),
    #[error("edge {0} is not in the graph")]
    EdgeNotInGraph(String),
    #[error("witness edge {0} lies outside the truncation")]
    WitnessOutsideTruncation(String),
    #[error("cannot separate: {0}")]
    NotSeparable(String),
    #[error("metric dominance violated at pair ({u}, {v}): d1 = {d1} > d0 = {d0}")]
    DominanceViolated { u: String, v: String, d0: f64, d1: f64 },
    #[error("function domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("solver diverged after {iterations} iterations (residual {residual})")]
    SolverDiverged { iterations: usize, residual: f64 },
    #[error("interior region has no path to a boundary vertex: {0}")]
    DisconnectedFromBoundary(String),
    #[error("host size {size} exceeds cap {cap}")]
    HostTooLarge { size: usize, cap: usize },
    #[error("not a reducible chain: {0}")]
    NotAChain(String),
    #[error("no boundary datum for {0}")]
    MissingBoundaryDatum(String),
    #[error("boundary condition does not cover {0}")]
    IncompleteBoundaryCondition(String),
    #[error("method cap exceeded: {size} unknowns > {cap}")]
    MethodCapExceeded { size: usize, cap: usize },
    #[error("time stepping failed: {0}")]
    StepFailure(String),
    #[error("invalid time grid: {0}")]
    InvalidTimes(String),
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("decay bound violated: {0}")]
    BoundViolated(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
