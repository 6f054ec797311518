// SPDX-License-Identifier: MIT OR Apache-2.0

//! Final mesh representation produced by the refinement drivers.
//!
//! A [`Mesh`] is a plain value: vertices in insertion order, triangles and
//! boundary subsegments in a canonical order, and (for periodic meshes) the
//! integer translations that place each triangle corner relative to its base
//! vertex. Two runs produced the same mesh exactly when their
//! [`Mesh::canonical_form`] bytes are equal.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::triangulation::Mode;

/// Triangle as vertex indices plus per-corner integer translations.
///
/// Planar meshes use zero shifts. Periodic meshes interpret corner `k` as
/// `vertices[v[k]] + shift[k]`, one consistent unwrapping of the triangle
/// onto the plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshTriangle {
    pub v: [usize; 3],
    pub shift: [[i8; 2]; 3],
}

impl MeshTriangle {
    fn corner_key(&self, k: usize) -> (usize, i8, i8) {
        (self.v[k], self.shift[k][0], self.shift[k][1])
    }

    /// Rotate so the lexicographically smallest corner comes first. Keeps
    /// orientation.
    fn canonical(mut self) -> Self {
        let lead = (0..3).min_by_key(|&k| self.corner_key(k)).unwrap();
        self.v.rotate_left(lead);
        self.shift.rotate_left(lead);
        self
    }

    fn sort_key(&self) -> [(usize, i8, i8); 3] {
        [self.corner_key(0), self.corner_key(1), self.corner_key(2)]
    }
}

/// Piece of an input segment that survived to the final mesh, with the id of
/// the input segment it descends from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshSubsegment {
    pub a: usize,
    pub b: usize,
    pub original: usize,
}

/// Undirected mesh edge; `shift` translates vertex `b` relative to `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct MeshEdge {
    pub a: usize,
    pub b: usize,
    pub shift: [i8; 2],
}

/// A refined triangulation as a plain value.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub mode: Mode,
    /// All vertices, input first, inserted points after, in insertion order.
    pub vertices: Vec<Point>,
    pub input_vertex_count: usize,
    pub triangles: Vec<MeshTriangle>,
    /// Live subsegments (empty for periodic meshes).
    pub subsegments: Vec<MeshSubsegment>,
}

impl Mesh {
    /// Assemble a mesh, canonicalizing triangle rotations and element order.
    pub fn new(
        mode: Mode,
        vertices: Vec<Point>,
        input_vertex_count: usize,
        triangles: Vec<MeshTriangle>,
        subsegments: Vec<MeshSubsegment>,
    ) -> Self {
        let mut triangles: Vec<MeshTriangle> =
            triangles.into_iter().map(MeshTriangle::canonical).collect();
        triangles.sort_by_key(MeshTriangle::sort_key);
        let mut subsegments: Vec<MeshSubsegment> = subsegments
            .into_iter()
            .map(|s| {
                if s.a <= s.b {
                    s
                } else {
                    MeshSubsegment {
                        a: s.b,
                        b: s.a,
                        original: s.original,
                    }
                }
            })
            .collect();
        subsegments.sort_by_key(|s| (s.a, s.b, s.original));
        Mesh {
            mode,
            vertices,
            input_vertex_count,
            triangles,
            subsegments,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Corner coordinates of a triangle with shifts applied.
    pub fn triangle_points(&self, t: &MeshTriangle) -> [Point; 3] {
        let corner = |k: usize| {
            let p = self.vertices[t.v[k]];
            Point::new(
                p.x + t.shift[k][0] as f64,
                p.y + t.shift[k][1] as f64,
            )
        };
        [corner(0), corner(1), corner(2)]
    }

    /// Unique undirected edges. Each triangle contributes its three sides;
    /// shared sides appear once.
    pub fn edges(&self) -> Vec<MeshEdge> {
        let mut set = std::collections::BTreeSet::new();
        for t in &self.triangles {
            for k in 0..3 {
                let j = (k + 1) % 3;
                let (a, b) = (t.v[k], t.v[j]);
                let ds = [
                    t.shift[j][0] - t.shift[k][0],
                    t.shift[j][1] - t.shift[k][1],
                ];
                set.insert(normalize_edge(a, b, ds));
            }
        }
        set.into_iter().collect()
    }

    pub fn edge_length(&self, e: &MeshEdge) -> f64 {
        let pa = self.vertices[e.a];
        let pb = self.vertices[e.b];
        let qb = Point::new(pb.x + e.shift[0] as f64, pb.y + e.shift[1] as f64);
        pa.dist(qb)
    }

    /// Shortest and longest edge lengths.
    pub fn edge_extremes(&self) -> Result<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for e in self.edges() {
            let len = self.edge_length(&e);
            lo = lo.min(len);
            hi = hi.max(len);
        }
        if !lo.is_finite() {
            return Err(Error::EmptyMesh);
        }
        Ok((lo, hi))
    }

    /// Byte encoding that two meshes share exactly when they are the same
    /// mesh: mode, exact vertex bits in order, and the canonical element
    /// lists.
    pub fn canonical_form(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(
            33 + self.vertices.len() * 16 + self.triangles.len() * 30 + self.subsegments.len() * 24,
        );
        out.push(match self.mode {
            Mode::Planar => 0u8,
            Mode::Periodic => 1u8,
        });
        out.extend_from_slice(&(self.vertices.len() as u64).to_le_bytes());
        out.extend_from_slice(&(self.input_vertex_count as u64).to_le_bytes());
        out.extend_from_slice(&(self.triangles.len() as u64).to_le_bytes());
        out.extend_from_slice(&(self.subsegments.len() as u64).to_le_bytes());
        for p in &self.vertices {
            out.extend_from_slice(&p.x.to_bits().to_le_bytes());
            out.extend_from_slice(&p.y.to_bits().to_le_bytes());
        }
        for t in &self.triangles {
            for k in 0..3 {
                out.extend_from_slice(&(t.v[k] as u64).to_le_bytes());
                out.push(t.shift[k][0] as u8);
                out.push(t.shift[k][1] as u8);
            }
        }
        for s in &self.subsegments {
            out.extend_from_slice(&(s.a as u64).to_le_bytes());
            out.extend_from_slice(&(s.b as u64).to_le_bytes());
            out.extend_from_slice(&(s.original as u64).to_le_bytes());
        }
        out
    }
}

fn normalize_edge(a: usize, b: usize, ds: [i8; 2]) -> MeshEdge {
    let flipped = MeshEdge {
        a: b,
        b: a,
        shift: [-ds[0], -ds[1]],
    };
    let forward = MeshEdge { a, b, shift: ds };
    if (a, b, ds) <= (b, a, [-ds[0], -ds[1]]) {
        forward
    } else {
        flipped
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planar_tri(v: [usize; 3]) -> MeshTriangle {
        MeshTriangle {
            v,
            shift: [[0, 0]; 3],
        }
    }

    #[test]
    fn canonicalization_is_rotation_invariant() {
        let vertices = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        let a = Mesh::new(
            Mode::Planar,
            vertices.clone(),
            3,
            vec![planar_tri([1, 2, 0])],
            vec![],
        );
        let b = Mesh::new(Mode::Planar, vertices, 3, vec![planar_tri([0, 1, 2])], vec![]);
        assert_eq!(a, b);
        assert_eq!(a.canonical_form(), b.canonical_form());
    }

    #[test]
    fn edges_dedupe_shared_sides() {
        let vertices = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let m = Mesh::new(
            Mode::Planar,
            vertices,
            4,
            vec![planar_tri([0, 1, 2]), planar_tri([0, 2, 3])],
            vec![],
        );
        assert_eq!(m.edges().len(), 5);
        let (lo, hi) = m.edge_extremes().unwrap();
        assert_eq!(lo, 1.0);
        assert!((hi - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn periodic_self_edge_normalizes() {
        // One vertex on the unit torus: edges connect the vertex to its own
        // translates; (a, a, ds) and (a, a, -ds) are the same edge.
        let e1 = normalize_edge(0, 0, [1, 0]);
        let e2 = normalize_edge(0, 0, [-1, 0]);
        assert_eq!(e1, e2);
    }

    #[test]
    fn empty_mesh_reports_empty() {
        let m = Mesh::new(Mode::Planar, vec![], 0, vec![], vec![]);
        assert!(m.is_empty());
        assert!(matches!(m.edge_extremes(), Err(Error::EmptyMesh)));
    }
}
