// SPDX-License-Identifier: MIT OR Apache-2.0

//! Incremental planar Delaunay triangulation.
//!
//! Bowyer-Watson insertion over exact predicates. The convex hull is fenced
//! by ghost triangles (one per hull edge, sharing the [`GHOST`] vertex), so
//! every edge has two triangles and cavity digging never special-cases the
//! boundary. Cocircular ties are broken by symbolic perturbation ordered by
//! vertex index, which makes every run of the same insertion sequence
//! bit-identical.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::{circumcircle, in_circle_raw, orient_raw, Circle, Point};

use super::{InsertionOutcome, Location};

pub(crate) const GHOST: u32 = u32::MAX;

const NO_TRI: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Tri {
    /// Vertex ids, counterclockwise; ghosts have one [`GHOST`] entry.
    v: [u32; 3],
    /// `nbr[i]` shares the edge opposite `v[i]`.
    nbr: [u32; 3],
    alive: bool,
    /// Cached circumcircle; `None` for ghosts.
    circ: Option<Circle>,
}

impl Tri {
    fn ghost_pos(&self) -> Option<usize> {
        self.v.iter().position(|&v| v == GHOST)
    }

    fn pos_of(&self, vertex: u32) -> usize {
        self.v
            .iter()
            .position(|&v| v == vertex)
            .expect("vertex in triangle")
    }
}

#[derive(Debug, Clone)]
pub struct PlanarTriangulation {
    points: Vec<Point>,
    linked: Vec<bool>,
    tris: Vec<Tri>,
    /// Bit-pattern point index for exact duplicate detection.
    index: BTreeMap<(u64, u64), u32>,
    /// Some alive triangle incident to each linked vertex.
    vertex_tri: Vec<u32>,
    walk_start: u32,
    visit: Vec<u32>,
    visit_stamp: u32,
}

fn point_key(p: Point) -> (u64, u64) {
    // Adding +0.0 collapses -0.0 and +0.0 to one key.
    ((p.x + 0.0).to_bits(), (p.y + 0.0).to_bits())
}

impl PlanarTriangulation {
    /// Builds the Delaunay triangulation of `points`; vertex ids equal input
    /// positions. Errors when all points are collinear or any coincide.
    pub fn build(points: &[Point]) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::DegenerateInput(format!(
                "{} points, need at least 3",
                points.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(Error::DegenerateInput(format!(
                    "point {i} has non-finite coordinates"
                )));
            }
        }
        // Bootstrap triangle: the first point, the first distinct point, and
        // the first point off their line.
        let i0 = 0usize;
        let Some(i1) = points.iter().position(|&p| p != points[i0]) else {
            return Err(Error::DuplicateVertex { existing: 0 });
        };
        let Some(i2) = points
            .iter()
            .position(|&p| orient_raw(points[i0], points[i1], p) != 0.0)
        else {
            return Err(Error::DegenerateInput("all points collinear".into()));
        };

        let mut t = PlanarTriangulation {
            points: points.to_vec(),
            linked: vec![false; points.len()],
            tris: Vec::new(),
            index: BTreeMap::new(),
            vertex_tri: vec![NO_TRI; points.len()],
            walk_start: 0,
            visit: Vec::new(),
            visit_stamp: 0,
        };
        t.bootstrap(i0 as u32, i1 as u32, i2 as u32);
        for i in 0..points.len() {
            if i == i0 || i == i1 || i == i2 {
                continue;
            }
            t.link(i as u32)?;
        }
        Ok(t)
    }

    fn bootstrap(&mut self, a: u32, b: u32, c: u32) {
        let (a, b, c) = if orient_raw(self.points[a as usize], self.points[b as usize], self.points[c as usize])
            > 0.0
        {
            (a, b, c)
        } else {
            (a, c, b)
        };
        let circ = circumcircle(
            self.points[a as usize],
            self.points[b as usize],
            self.points[c as usize],
        )
        .expect("bootstrap triple is non-collinear");
        // Real triangle 0 plus one ghost per hull edge. Ghost [q, p, GHOST]
        // fences the hull edge p -> q (interior on its left).
        self.tris.push(Tri {
            v: [a, b, c],
            nbr: [2, 3, 1],
            alive: true,
            circ: Some(circ),
        });
        for (i, (p, q)) in [(a, b), (b, c), (c, a)].into_iter().enumerate() {
            // Ghost i+1 fences hull edge (p, q); around the ghost fan, the
            // neighbor opposite GHOST is the real triangle, and the ghosts
            // chain to each other across their (vertex, GHOST) edges.
            let next = 1 + ((i + 1) % 3) as u32;
            let prev = 1 + ((i + 2) % 3) as u32;
            self.tris.push(Tri {
                v: [q, p, GHOST],
                nbr: [prev, next, 0],
                alive: true,
                circ: None,
            });
        }
        for (vid, tri) in [(a, 0u32), (b, 0), (c, 0)] {
            self.vertex_tri[vid as usize] = tri;
        }
        for vid in [a, b, c] {
            self.linked[vid as usize] = true;
            self.index.insert(point_key(self.points[vid as usize]), vid);
        }
        self.visit = vec![0; 4];
        self.walk_start = 0;
    }

    pub fn vertex_count(&self) -> usize {
        self.points.len()
    }

    pub fn point(&self, id: u32) -> Point {
        self.points[id as usize]
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Vertex id holding exactly these coordinates, if present.
    pub fn vertex_at(&self, p: Point) -> Option<u32> {
        self.index.get(&point_key(p)).copied()
    }

    pub fn is_real_alive(&self, id: usize) -> bool {
        self.tris
            .get(id)
            .is_some_and(|t| t.alive && t.ghost_pos().is_none())
    }

    pub fn tri_vertices(&self, id: usize) -> [u32; 3] {
        self.tris[id].v
    }

    /// Cached circumcircle of an alive real triangle.
    pub fn circumcircle_of(&self, id: usize) -> Circle {
        self.tris[id].circ.expect("real triangle")
    }

    pub fn real_triangles(&self) -> impl Iterator<Item = (usize, [u32; 3], Circle)> + '_ {
        self.tris.iter().enumerate().filter_map(|(i, t)| {
            if t.alive && t.ghost_pos().is_none() {
                Some((i, t.v, t.circ.expect("real triangle")))
            } else {
                None
            }
        })
    }

    pub fn real_triangle_count(&self) -> usize {
        self.real_triangles().count()
    }

    pub fn hull_edge_count(&self) -> usize {
        self.tris
            .iter()
            .filter(|t| t.alive && t.ghost_pos().is_some())
            .count()
    }

    /// In-circle with symbolic perturbation: is `p` strictly inside the
    /// circumcircle of the counterclockwise triangle `(a, b, c)` after all
    /// vertices are lifted by per-index infinitesimals? Exact cocircular
    /// ties resolve by the first deciding vertex in index order (smaller
    /// index carries the larger perturbation), so the answer is consistent
    /// across every query touching the same four points.
    pub(crate) fn in_circle_sos(&self, a: u32, b: u32, c: u32, p: u32) -> bool {
        let (pa, pb, pc, pp) = (
            self.points[a as usize],
            self.points[b as usize],
            self.points[c as usize],
            self.points[p as usize],
        );
        let d = in_circle_raw(pa, pb, pc, pp);
        if d != 0.0 {
            return d > 0.0;
        }
        // The determinant is linear in each lifted coordinate, so the
        // first-order expansion below is exact. Coefficients are the
        // third-column cofactors; the query point's is -orient(a,b,c),
        // which is nonzero, so some term always decides.
        let mut order = [(a, 0u8), (b, 1), (c, 2), (p, 3)];
        order.sort_by_key(|&(id, _)| id);
        for (_, role) in order {
            let coeff = match role {
                0 => orient_raw(pp, pb, pc),
                1 => orient_raw(pp, pc, pa),
                2 => orient_raw(pp, pa, pb),
                _ => -orient_raw(pa, pb, pc),
            };
            if coeff != 0.0 {
                return coeff > 0.0;
            }
        }
        unreachable!("triangle in triangulation is non-degenerate")
    }

    /// Does inserting `p` (vertex id `pid`) destroy triangle `t`?
    fn in_cavity(&self, t: u32, pid: u32) -> bool {
        let tri = &self.tris[t as usize];
        match tri.ghost_pos() {
            None => self.in_circle_sos(tri.v[0], tri.v[1], tri.v[2], pid),
            Some(g) => {
                // Ghost over hull edge (b, a): dead when p is strictly
                // outside that edge, or exactly on its open interior (the
                // hull edge must then split).
                let a = tri.v[(g + 1) % 3];
                let b = tri.v[(g + 2) % 3];
                let (pa, pb) = (self.points[a as usize], self.points[b as usize]);
                let pp = self.points[pid as usize];
                let o = orient_raw(pa, pb, pp);
                if o != 0.0 {
                    return o > 0.0;
                }
                // For collinear points, strict betweenness reduces to exact
                // per-axis interval tests.
                let within_x = pa.x.min(pb.x) <= pp.x && pp.x <= pa.x.max(pb.x);
                let within_y = pa.y.min(pb.y) <= pp.y && pp.y <= pa.y.max(pb.y);
                within_x && within_y && pp != pa && pp != pb
            }
        }
    }

    /// Visibility walk to a triangle whose closed region holds `p`, or a
    /// ghost whose outer halfplane does.
    fn find_containing(&self, p: Point) -> u32 {
        let start_ok = self
            .tris
            .get(self.walk_start as usize)
            .is_some_and(|t| t.alive && t.ghost_pos().is_none());
        let mut cur = if start_ok {
            self.walk_start
        } else {
            self.tris
                .iter()
                .position(|t| t.alive && t.ghost_pos().is_none())
                .expect("alive triangle exists") as u32
        };
        let mut steps = 0usize;
        'walk: loop {
            steps += 1;
            assert!(
                steps <= 4 * self.tris.len() + 16,
                "point location walk failed to terminate"
            );
            let tri = &self.tris[cur as usize];
            if tri.ghost_pos().is_some() {
                return cur;
            }
            for j in 0..3 {
                let a = tri.v[(j + 1) % 3];
                let b = tri.v[(j + 2) % 3];
                if orient_raw(self.points[a as usize], self.points[b as usize], p) < 0.0 {
                    cur = tri.nbr[j];
                    continue 'walk;
                }
            }
            return cur;
        }
    }

    /// Exact point location. Errors with [`Error::OutsideHull`] when `p`
    /// falls outside the convex hull.
    pub fn locate(&self, p: Point) -> Result<Location> {
        let t = self.find_containing(p);
        let tri = &self.tris[t as usize];
        if let Some(g) = tri.ghost_pos() {
            // The walk only enters a ghost when p is strictly beyond its
            // hull edge; points exactly on the hull settle in a real
            // triangle first.
            let _ = g;
            return Err(Error::OutsideHull);
        }
        for j in 0..3 {
            if self.points[tri.v[j] as usize] == p {
                return Ok(Location::Vertex(tri.v[j] as usize));
            }
        }
        for j in 0..3 {
            let a = tri.v[(j + 1) % 3];
            let b = tri.v[(j + 2) % 3];
            if orient_raw(self.points[a as usize], self.points[b as usize], p) == 0.0 {
                return Ok(Location::Edge(t as usize, j));
            }
        }
        Ok(Location::Triangle(t as usize))
    }

    /// Inserts a new point, retriangulating its cavity. The outcome lists
    /// removed and created triangle ids in deterministic order.
    pub fn insert_point(&mut self, p: Point) -> Result<InsertionOutcome> {
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(Error::DegenerateInput("non-finite point".into()));
        }
        if let Some(&existing) = self.index.get(&point_key(p)) {
            return Err(Error::DuplicateVertex {
                existing: existing as usize,
            });
        }
        let id = self.points.len() as u32;
        self.points.push(p);
        self.linked.push(false);
        self.vertex_tri.push(NO_TRI);
        self.link(id)
    }

    /// Links an already-stored vertex into the triangulation.
    fn link(&mut self, pid: u32) -> Result<InsertionOutcome> {
        let p = self.points[pid as usize];
        if let Some(&existing) = self.index.get(&point_key(p)) {
            return Err(Error::DuplicateVertex {
                existing: existing as usize,
            });
        }
        let seed = self.find_containing(p);
        debug_assert!(self.in_cavity(seed, pid), "walk target must be dead");

        // Grow the dead set breadth-first.
        self.visit.resize(self.tris.len(), self.visit_stamp);
        self.visit_stamp += 1;
        let stamp = self.visit_stamp;
        let mut dead: Vec<u32> = vec![seed];
        self.visit[seed as usize] = stamp;
        let mut head = 0;
        while head < dead.len() {
            let t = dead[head];
            head += 1;
            for j in 0..3 {
                let n = self.tris[t as usize].nbr[j];
                if self.visit[n as usize] == stamp {
                    continue;
                }
                if self.in_cavity(n, pid) {
                    self.visit[n as usize] = stamp;
                    dead.push(n);
                }
            }
        }

        // Directed boundary edges (a -> b) of the cavity, each with its
        // surviving neighbor; they form one cycle around the cavity.
        let mut first_start = GHOST;
        let mut ring: BTreeMap<u32, (u32, u32)> = BTreeMap::new();
        for &t in &dead {
            let tri = self.tris[t as usize].clone();
            for j in 0..3 {
                let n = tri.nbr[j];
                if self.visit[n as usize] == stamp {
                    continue;
                }
                let a = tri.v[(j + 1) % 3];
                let b = tri.v[(j + 2) % 3];
                if first_start == GHOST {
                    first_start = a;
                }
                let dup = ring.insert(a, (b, n)).is_some();
                debug_assert!(!dup, "cavity boundary must be a simple cycle");
            }
        }

        // Walk the cycle, creating one triangle per boundary edge.
        let base = self.tris.len() as u32;
        let count = ring.len() as u32;
        let mut created: Vec<u32> = Vec::with_capacity(count as usize);
        let mut start = first_start;
        let mut k = 0u32;
        loop {
            let (b, keeper) = ring[&start];
            let a = start;
            let id = base + k;
            let circ = if a != GHOST && b != GHOST {
                Some(
                    circumcircle(
                        self.points[a as usize],
                        self.points[b as usize],
                        p,
                    )
                    .expect("cavity boundary edge is never collinear with the new point"),
                )
            } else {
                None
            };
            // Neighbors: opposite p is the keeper; opposite a is the next
            // new triangle (sharing edge (b, p)); opposite b the previous.
            let next = base + (k + 1) % count;
            let prev = base + (k + count - 1) % count;
            self.tris.push(Tri {
                v: [a, b, pid],
                nbr: [next, prev, keeper],
                alive: true,
                circ,
            });
            // Back-link the keeper at its edge (b, a).
            let kt = &mut self.tris[keeper as usize];
            let kj = (0..3)
                .find(|&j| kt.v[(j + 1) % 3] == b && kt.v[(j + 2) % 3] == a)
                .expect("keeper shares the boundary edge");
            kt.nbr[kj] = id;
            for vid in [a, b] {
                if vid != GHOST {
                    self.vertex_tri[vid as usize] = id;
                }
            }
            created.push(id);
            k += 1;
            start = b;
            if start == first_start {
                break;
            }
        }
        assert_eq!(k, count, "cavity boundary cycle covered every edge");

        for &t in &dead {
            self.tris[t as usize].alive = false;
        }
        self.visit.resize(self.tris.len(), 0);
        self.linked[pid as usize] = true;
        self.vertex_tri[pid as usize] = base;
        self.index.insert(point_key(p), pid);
        self.walk_start = base;
        Ok(InsertionOutcome {
            vertex: pid as usize,
            removed: dead.iter().map(|&t| t as usize).collect(),
            created: created.iter().map(|&t| t as usize).collect(),
        })
    }

    /// Finds the alive triangle having directed edge `(u, v)`; returns the
    /// triangle id and the edge's opposite-vertex position.
    pub fn find_edge(&self, u: u32, v: u32) -> Option<(usize, usize)> {
        let start = self.vertex_tri[u as usize];
        if start == NO_TRI || !self.tris[start as usize].alive {
            return self.find_edge_scan(u, v);
        }
        // Rotate around u; the star is a closed fan thanks to ghosts.
        let mut cur = start;
        loop {
            let tri = &self.tris[cur as usize];
            let i = tri.pos_of(u);
            if tri.v[(i + 1) % 3] == v {
                return Some((cur as usize, (i + 2) % 3));
            }
            cur = tri.nbr[(i + 2) % 3];
            if cur == start {
                return None;
            }
        }
    }

    fn find_edge_scan(&self, u: u32, v: u32) -> Option<(usize, usize)> {
        for (i, t) in self.tris.iter().enumerate() {
            if !t.alive {
                continue;
            }
            for j in 0..3 {
                if t.v[(j + 1) % 3] == u && t.v[(j + 2) % 3] == v {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Is the undirected edge `(u, v)` present?
    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.find_edge(u, v).is_some()
    }

    /// The two vertices opposite edge `(u, v)`, skipping ghosts.
    pub fn edge_apexes(&self, u: u32, v: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(2);
        for (t, j) in [self.find_edge(u, v), self.find_edge(v, u)]
            .into_iter()
            .flatten()
        {
            let w = self.tris[t].v[j];
            if w != GHOST {
                out.push(w);
            }
        }
        out
    }

    /// Undirected edges of all real alive triangles, each reported once.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for (_, v, _) in self.real_triangles() {
            for j in 0..3 {
                let a = v[j];
                let b = v[(j + 1) % 3];
                out.push(if a < b { (a, b) } else { (b, a) });
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Directed hull edges, interior on the left, sorted.
    pub fn hull_edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for t in self.tris.iter().filter(|t| t.alive) {
            if let Some(g) = t.ghost_pos() {
                out.push((t.v[(g + 2) % 3], t.v[(g + 1) % 3]));
            }
        }
        out.sort_unstable();
        out
    }

    pub(crate) fn tri_slot_count(&self) -> usize {
        self.tris.len()
    }

    pub fn tri_is_ghost(&self, id: usize) -> bool {
        self.tris[id].ghost_pos().is_some()
    }

    /// Structural soundness plus the empty-circumcircle property for every
    /// real triangle against every linked vertex. Exact and exhaustive.
    pub fn delaunay_check(&self) -> bool {
        self.structure_ok() && self.empty_circles_ok()
    }

    fn structure_ok(&self) -> bool {
        for (i, t) in self.tris.iter().enumerate() {
            if !t.alive {
                continue;
            }
            if let Some(g) = t.ghost_pos() {
                let a = t.v[(g + 1) % 3];
                let b = t.v[(g + 2) % 3];
                if a == GHOST || b == GHOST {
                    return false;
                }
            } else if orient_raw(
                self.points[t.v[0] as usize],
                self.points[t.v[1] as usize],
                self.points[t.v[2] as usize],
            ) <= 0.0
            {
                return false;
            }
            for j in 0..3 {
                let n = t.nbr[j];
                let nt = &self.tris[n as usize];
                if !nt.alive {
                    return false;
                }
                let a = t.v[(j + 1) % 3];
                let b = t.v[(j + 2) % 3];
                // The neighbor holds the reversed edge.
                let found = (0..3)
                    .any(|k| nt.v[(k + 1) % 3] == b && nt.v[(k + 2) % 3] == a && nt.nbr[k] == i as u32);
                if !found {
                    return false;
                }
            }
        }
        true
    }

    fn empty_circles_ok(&self) -> bool {
        let linked: Vec<u32> = (0..self.points.len() as u32)
            .filter(|&v| self.linked[v as usize])
            .collect();
        // Grid over the points; each circumcircle only tests points in the
        // cells its bounding box overlaps, which keeps the scan near-linear
        // without giving up exactness.
        let (mut lo, mut hi) = (
            Point::new(f64::INFINITY, f64::INFINITY),
            Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for &v in &linked {
            let p = self.points[v as usize];
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let dim = ((linked.len() as f64).sqrt().ceil() as usize).clamp(1, 512);
        let span_x = (hi.x - lo.x).max(f64::MIN_POSITIVE);
        let span_y = (hi.y - lo.y).max(f64::MIN_POSITIVE);
        let cell_of = |p: Point| {
            let cx = (((p.x - lo.x) / span_x) * dim as f64) as usize;
            let cy = (((p.y - lo.y) / span_y) * dim as f64) as usize;
            (cx.min(dim - 1), cy.min(dim - 1))
        };
        let mut grid: Vec<Vec<u32>> = vec![Vec::new(); dim * dim];
        for &v in &linked {
            let (cx, cy) = cell_of(self.points[v as usize]);
            grid[cy * dim + cx].push(v);
        }
        for (_, tv, circ) in self.real_triangles() {
            let r = circ.radius;
            let (clo, chi) = (
                Point::new(circ.center.x - r, circ.center.y - r),
                Point::new(circ.center.x + r, circ.center.y + r),
            );
            let (x0, y0) = cell_of(Point::new(clo.x.max(lo.x), clo.y.max(lo.y)));
            let (x1, y1) = cell_of(Point::new(chi.x.min(hi.x), chi.y.min(hi.y)));
            for cy in y0..=y1 {
                for cx in x0..=x1 {
                    for &w in &grid[cy * dim + cx] {
                        if tv.contains(&w) {
                            continue;
                        }
                        if self.in_circle_sos(tv[0], tv[1], tv[2], w) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}
