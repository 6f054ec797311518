// SPDX-License-Identifier: MIT OR Apache-2.0

//! Delaunay refinement mesh generation in the plane.
//!
//! The crate triangulates two kinds of domains and refines the result until
//! every triangle passes a quality rule:
//!
//! * planar straight-line graphs (vertices plus non-crossing input segments
//!   meeting at angles of 90 degrees or more), refined so no triangle has a
//!   circumradius-to-shortest-edge ratio above a bound `beta >= sqrt(2)`;
//! * periodic point sets on the unit torus, where the triangulation wraps
//!   around in both directions.
//!
//! Refinement runs sequentially (one Steiner point at a time) or in rounds
//! that insert a maximal independent set of candidate points at once. Round
//! logs replay through the sequential engine to confirm the batched runs
//! produce a mesh some sequential run could also have produced, and the
//! analysis module measures round counts, point counts, and edge-length
//! statistics against their expected bounds.

pub mod analysis;
pub mod domain;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod mesh;
pub mod refine;
pub mod tol;
pub mod triangulation;

pub use error::{Error, Result};
pub use geometry::{Circle, Orientation, Point};
