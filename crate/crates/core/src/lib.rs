//! Semilinear heat equation `u_t = Δu + u^p` on weighted locally finite graphs.
//!
//! The crate builds weighted graphs, applies the graph Laplacian and its
//! carré du champ calculus, solves Dirichlet ground-state problems, computes
//! heat kernels, integrates the evolution up to blow-up, and evaluates the
//! analytic lifespan bounds that a simulated lifespan must respect.

pub mod bounds;
pub mod error;
pub mod evolution;
pub mod expm;
pub mod graph;
pub mod heat_kernel;
pub mod initial_data;
pub mod operators;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{
    build_graph, graph_constants, DomainSubset, GraphConstants, GraphError, GraphSpec,
    WeightedGraph,
};
pub use operators::VertexFunction;
