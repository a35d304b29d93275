//! Discrete nonlinear potential theory on connected graphs of bounded degree.
//!
//! The crate solves p-harmonic Dirichlet problems by nonlinear Gauss–Seidel,
//! estimates p-capacities by exhaustion, computes p-modulus of path families
//! by dual coordinate ascent with constraint generation, and assembles
//! numerical certificates for pairwise disjoint D_p-massive subsets.
//!
//! Infinite graphs are represented by finite truncations ([`TruncatedFamily`])
//! whose outermost distance shell stands in for "infinity".

pub mod calculus;
pub mod capacity;
pub mod cli;
pub mod dirichlet;
pub mod error;
pub mod extrapolate;
pub mod generators;
pub mod graph;
pub mod io;
pub mod massive;
pub mod modulus;

pub use calculus::{EdgeDensity, PExponent, VertexFunction};
pub use error::{Error, Result};
pub use generators::{FamilyKind, TruncatedFamily};
pub use graph::{EdgePath, Graph, Region};

/// Version string stamped on every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
