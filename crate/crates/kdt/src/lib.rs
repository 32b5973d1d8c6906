//! Kinetic Delaunay triangulation of moving points.
//!
//! The library maintains a valid Delaunay triangulation of a point set
//! across discrete time steps. The plane is partitioned into quad-tree
//! blocks; each step every non-empty block moves one randomly chosen point
//! one axis-aligned step of bounded length, and the mesh is repaired by
//! deleting and re-inserting the moved vertices, block-parallel where the
//! affected regions allow it.
//!
//! Modules:
//! - [`geometry`] — exact-sign predicates and scalar helpers.
//! - [`triangulation`] — the triangle mesh store with incremental
//!   insertion, vertex deletion, point location and validation.
//! - [`partition`] — quad-tree blocks with neighbor links.
//! - [`kinetics`] — the per-step update pipeline and movement model.
//! - [`runtime`] — bulk-synchronous phase execution with deterministic
//!   results for any worker count.
//! - [`oracle`] — independent brute-force references for tests.
//! - [`cli`] — the `gen` / `run` / `validate` / `bench` commands behind
//!   the `kdt` binary.
//!
//! See the crate `examples/` directory for one runnable example per major
//! capability.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod kinetics;
pub mod metrics;
pub mod oracle;
pub mod partition;
pub mod points_io;
pub mod runtime;
pub mod triangulation;

pub use error::{Error, Result};
pub use geometry::{Point, Sign};
pub use triangulation::{TriangleId, Triangulation, VertexId};
