// SPDX-License-Identifier: MIT OR Apache-2.0

//! Delaunay triangulation of planar point sets and of the unit torus.
//!
//! [`Triangulation`] is the mode-dispatching entry point; the engines are
//! [`planar::PlanarTriangulation`] (incremental Bowyer-Watson with ghost
//! triangles and index-ordered symbolic tie-breaking) and
//! [`periodic::PeriodicTriangulation`] (lifted copies with canonical
//! orbit-class extraction). Both are exact: every structural decision goes
//! through adaptive-precision predicates, so identical inputs give
//! identical triangulations.

pub mod periodic;
pub mod planar;

use std::collections::BTreeSet;

use crate::error::Result;
use crate::geometry::{Circle, Point};

pub use periodic::{PeriodicInsertion, PeriodicTriangulation};
pub use planar::PlanarTriangulation;

/// Domain kind a triangulation operates over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Convex-hull-bounded triangulation of points in the plane.
    Planar,
    /// Triangulation of the unit torus `[0,1)^2` with wraparound.
    Periodic,
}

/// Where a query point landed.
///
/// Handles are planar triangle ids in planar mode and torus class ids in
/// periodic mode; `Vertex` carries the vertex (or orbit) id. `Edge` names
/// the triangle and the index of the vertex opposite the edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Triangle(usize),
    Edge(usize, usize),
    Vertex(usize),
}

/// Triangles destroyed and created by one insertion.
///
/// `vertex` is the new vertex (planar) or orbit (periodic) id. The removed
/// and created lists carry triangle handles in deterministic order; planar
/// lists include ghost triangles when the hull changes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InsertionOutcome {
    pub vertex: usize,
    pub removed: Vec<usize>,
    pub created: Vec<usize>,
}

#[derive(Debug, Clone)]
enum Inner {
    Planar(PlanarTriangulation),
    Periodic(PeriodicTriangulation),
}

/// Mode-dispatching Delaunay triangulation with constrained-edge marks.
///
/// Segment marks are bookkeeping only: they flag vertex pairs as boundary
/// subsegments for the refinement layer, which keeps conformity by
/// splitting rather than constrained flipping.
#[derive(Debug, Clone)]
pub struct Triangulation {
    inner: Inner,
    marks: BTreeSet<(usize, usize)>,
}

/// Builds the Delaunay triangulation of `points` under the given mode.
pub fn build_delaunay(points: &[Point], mode: Mode) -> Result<Triangulation> {
    let inner = match mode {
        Mode::Planar => Inner::Planar(PlanarTriangulation::build(points)?),
        Mode::Periodic => Inner::Periodic(PeriodicTriangulation::build(points)?),
    };
    Ok(Triangulation {
        inner,
        marks: BTreeSet::new(),
    })
}

impl Triangulation {
    pub fn mode(&self) -> Mode {
        match &self.inner {
            Inner::Planar(_) => Mode::Planar,
            Inner::Periodic(_) => Mode::Periodic,
        }
    }

    pub fn as_planar(&self) -> Option<&PlanarTriangulation> {
        match &self.inner {
            Inner::Planar(t) => Some(t),
            Inner::Periodic(_) => None,
        }
    }

    pub fn as_planar_mut(&mut self) -> Option<&mut PlanarTriangulation> {
        match &mut self.inner {
            Inner::Planar(t) => Some(t),
            Inner::Periodic(_) => None,
        }
    }

    pub fn as_periodic(&self) -> Option<&PeriodicTriangulation> {
        match &self.inner {
            Inner::Planar(_) => None,
            Inner::Periodic(t) => Some(t),
        }
    }

    pub fn as_periodic_mut(&mut self) -> Option<&mut PeriodicTriangulation> {
        match &mut self.inner {
            Inner::Planar(_) => None,
            Inner::Periodic(t) => Some(t),
        }
    }

    /// Number of vertices (planar) or orbits (periodic).
    pub fn vertex_count(&self) -> usize {
        match &self.inner {
            Inner::Planar(t) => t.vertex_count(),
            Inner::Periodic(t) => t.orbit_count(),
        }
    }

    /// Coordinates of a vertex or orbit.
    pub fn vertex_point(&self, id: usize) -> Point {
        match &self.inner {
            Inner::Planar(t) => t.point(id as u32),
            Inner::Periodic(t) => t.orbit_point(id),
        }
    }

    /// Inserts one point; periodic mode expects it in `[0,1)^2`.
    pub fn insert_point(&mut self, p: Point) -> Result<InsertionOutcome> {
        match &mut self.inner {
            Inner::Planar(t) => t.insert_point(p),
            Inner::Periodic(t) => {
                let out = t.insert_orbit(p)?;
                Ok(InsertionOutcome {
                    vertex: out.orbit,
                    removed: out.removed_classes,
                    created: out.created_classes,
                })
            }
        }
    }

    /// Inserts points in order; stops at the first failure, leaving prior
    /// insertions applied.
    pub fn insert_batch(&mut self, points: &[Point]) -> Result<Vec<InsertionOutcome>> {
        let mut out = Vec::with_capacity(points.len());
        for &p in points {
            out.push(self.insert_point(p)?);
        }
        Ok(out)
    }

    /// Live triangle handles in deterministic order.
    pub fn triangles(&self) -> Vec<usize> {
        match &self.inner {
            Inner::Planar(t) => t.real_triangles().map(|(id, _, _)| id).collect(),
            Inner::Periodic(t) => t.classes(),
        }
    }

    pub fn triangle_count(&self) -> usize {
        match &self.inner {
            Inner::Planar(t) => t.real_triangle_count(),
            Inner::Periodic(t) => t.class_count(),
        }
    }

    /// Vertex (or orbit) ids of a live triangle, CCW.
    pub fn triangle_vertices(&self, handle: usize) -> [usize; 3] {
        match &self.inner {
            Inner::Planar(t) => t.tri_vertices(handle).map(|v| v as usize),
            Inner::Periodic(t) => t.class_vertices(handle).map(|(o, _)| o),
        }
    }

    /// Corner coordinates of a live triangle, CCW. Periodic handles give
    /// the canonical lifted copy, so edge lengths and angles are real.
    pub fn triangle_points(&self, handle: usize) -> [Point; 3] {
        match &self.inner {
            Inner::Planar(t) => t.tri_vertices(handle).map(|v| t.point(v)),
            Inner::Periodic(t) => t.class_points(handle),
        }
    }

    pub fn circumcircle(&self, handle: usize) -> Circle {
        match &self.inner {
            Inner::Planar(t) => t.circumcircle_of(handle),
            Inner::Periodic(t) => t.class_circle(handle),
        }
    }

    /// Length of the shortest edge in the current triangulation.
    pub fn shortest_edge(&self) -> f64 {
        match &self.inner {
            Inner::Planar(t) => t
                .edges()
                .iter()
                .map(|&(a, b)| t.point(a).dist(t.point(b)))
                .fold(f64::INFINITY, f64::min),
            Inner::Periodic(t) => t.shortest_edge(),
        }
    }

    pub fn locate(&self, p: Point) -> Result<Location> {
        match &self.inner {
            Inner::Planar(t) => t.locate(p),
            Inner::Periodic(t) => t.locate(p),
        }
    }

    /// Exhaustive structural and empty-circle validity check.
    pub fn delaunay_check(&self) -> bool {
        match &self.inner {
            Inner::Planar(t) => t.delaunay_check(),
            Inner::Periodic(t) => t.delaunay_check(),
        }
    }

    /// Marks the undirected vertex pair as a boundary subsegment.
    pub fn mark_segment(&mut self, u: usize, v: usize) {
        self.marks.insert(norm_pair(u, v));
    }

    pub fn unmark_segment(&mut self, u: usize, v: usize) {
        self.marks.remove(&norm_pair(u, v));
    }

    pub fn is_marked(&self, u: usize, v: usize) -> bool {
        self.marks.contains(&norm_pair(u, v))
    }

    pub fn marked_segments(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.marks.iter().copied()
    }
}

fn norm_pair(u: usize, v: usize) -> (usize, usize) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}
