//! Metric graphs with self-adjoint vertex conditions.
//!
//! The crate builds topological, metric and periodic graphs (including the
//! Kagome lattice), computes spectra of Schrödinger operators `-f'' + q f`
//! with vertex conditions in `(Q, R)` form, and estimates integrated
//! densities of states for periodic and random-length models.
//!
//! Everything here is `no_std` with `alloc`. File formats, parallel
//! executors and the command line live in the `qgraph` crate.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(a < b)` also rejects NaN

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod comb;
pub mod conditions;
pub mod error;
pub mod exec;
pub mod graph;
pub mod ids;
pub mod lattice;
pub mod linalg;
pub mod random;
pub mod spectra;

pub use conditions::{ConditionAssignment, ConditionKind, ValidationReport, VertexCondition};
pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use graph::{EdgeId, End, HalfEdge, MetricGraph, Subgraph, TopologicalGraph, VertexId};
pub use lattice::{EdgeKey, LatticePatch, LatticeWindow, PeriodicGraph, VertexKey};
pub use spectra::{OperatorSpec, Spectrum};
