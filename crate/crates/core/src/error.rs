// SPDX-License-Identifier: MIT OR Apache-2.0

//! Error type shared by every module in the crate.

use thiserror::Error;

/// Unified error for geometry, domain, triangulation, and refinement failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Three collinear (or coincident) points where a proper triangle is required.
    #[error("degenerate triangle: vertices are collinear or coincident")]
    DegenerateTriangle,

    /// Segment endpoints coincide.
    #[error("degenerate segment: endpoints coincide")]
    DegenerateSegment,

    /// Input contains fewer distinct points than the operation needs, or all
    /// points are collinear.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Point to insert coincides exactly with vertex `existing`.
    #[error("duplicate vertex: point coincides with vertex {existing}")]
    DuplicateVertex { existing: usize },

    /// Query or insertion point lies outside the triangulated convex hull.
    #[error("point lies outside the convex hull")]
    OutsideHull,

    /// Segment id is stale or was never issued.
    #[error("no such segment: {0}")]
    NoSuchSegment(usize),

    /// Local feature size is undefined: fewer than two mutually non-incident features.
    #[error("no non-incident feature pair; local feature size is undefined")]
    NoFeaturePair,

    /// Domain failed validation; the report lists every violation.
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    /// Operation needs a non-empty mesh.
    #[error("mesh has no triangles")]
    EmptyMesh,

    /// Numeric argument outside the documented range.
    #[error("argument out of range: {0}")]
    OutOfRange(String),

    /// Edge length below the class floor in strict mode.
    #[error("edge length {len} below class floor {floor}")]
    BelowFloor { len: f64, floor: f64 },

    /// Refinement produced an edge shorter than the stall-guard floor,
    /// indicating runaway point generation.
    #[error("refinement stalled: created edge of length {edge}, floor is {floor}")]
    RefinementStalled { edge: f64, floor: f64 },

    /// Boundary preprocessing exceeded its iteration cap.
    #[error("boundary preprocessing did not converge within {cap} iterations")]
    PreprocessDiverged { cap: u32 },

    /// A logged insertion is invalid against the state replay reconstructed.
    #[error("log entry {step} is not sequentially valid: {reason}")]
    NotSequentializable { step: usize, reason: String },

    /// A structural invariant failed while strict checks were enabled.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
