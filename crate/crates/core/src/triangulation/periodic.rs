// SPDX-License-Identifier: MIT OR Apache-2.0

//! Delaunay triangulation of the unit torus.
//!
//! Each orbit point in `[0,1)^2` is lifted to a `w x w` grid of translates
//! (`w` is 3, widening to 5 while any triangle's circumradius reaches 1/2,
//! narrowing back under hysteresis) and triangulated in the plane. Torus
//! triangles are recovered as orbit classes: a planar triangle represents
//! its class exactly when its translate equals the class's canonical copy,
//! the one whose circumcenter falls in `[0,1)^2`. The circumradius of any
//! torus Delaunay triangle is at most `sqrt(2)/2`, so every such disk fits
//! inside the lifted window and planar emptiness certifies torus emptiness.
//!
//! Coordinates are quantized to multiples of `2^-49` on entry (at most
//! `2^-50` of motion) so that adding small integer shifts is exact; all
//! translates of a point are then bit-exact, which keeps class extraction
//! free of rounding ambiguity.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::{circumcircle, in_circle_raw, orient_raw, Circle, Point};

use super::planar::PlanarTriangulation;
use super::Location;

/// Orbit triangle identity: per vertex `(orbit, dx, dy)` with shifts
/// relative to the first vertex, normalized to the lexicographically
/// smallest of the three cyclic rotations.
pub(crate) type CanonKey = [(u32, i8, i8); 3];

const LIFT_QUANTUM_BITS: i32 = 49;

/// Rounds into the exact-translation grid: multiples of `2^-49` wrap to
/// `[0,1)`. Sums with integers up to 8 in magnitude are then exact.
pub fn snap_unit_coord(x: f64) -> f64 {
    let scale = (1u64 << LIFT_QUANTUM_BITS) as f64;
    let s = (x * scale).round() / scale;
    if s >= 1.0 {
        0.0
    } else {
        s
    }
}

#[derive(Debug, Clone)]
struct CanonClass {
    id: usize,
    /// Circumcircle of the canonical copy; center in `[0,1)^2`.
    circ: Circle,
    /// Canonical copy vertices as `(orbit, shift_x, shift_y)`, CCW.
    verts: [(u32, i8, i8); 3],
}

/// Outcome of adding one orbit: net torus-triangle churn by class id.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicInsertion {
    pub orbit: usize,
    pub removed_classes: Vec<usize>,
    pub created_classes: Vec<usize>,
    pub rebuilt: bool,
}

#[derive(Debug, Clone)]
pub struct PeriodicTriangulation {
    orbits: Vec<Point>,
    window: u32,
    planar: PlanarTriangulation,
    canon: BTreeMap<CanonKey, CanonClass>,
    /// Per planar triangle: the class it canonically represents.
    side: Vec<Option<CanonKey>>,
    /// Class id to key; `None` once the class has died.
    class_keys: Vec<Option<CanonKey>>,
    rebuilds: u32,
}

const MAX_REBUILDS: u32 = 32;

impl PeriodicTriangulation {
    /// Triangulates orbit points, which must be distinct and in `[0,1)^2`.
    /// Coordinates are snapped to the lifting grid first; points that
    /// collide after snapping are rejected.
    pub fn build(points: &[Point]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidDomain("no orbit points".into()));
        }
        let mut orbits = Vec::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if !(0.0..1.0).contains(&p.x) || !(0.0..1.0).contains(&p.y) {
                return Err(Error::OutOfRange(format!(
                    "orbit point {i} outside the half-open unit square"
                )));
            }
            let s = Point::new(snap_unit_coord(p.x), snap_unit_coord(p.y));
            if let Some(j) = orbits.iter().position(|&q| q == s) {
                return Err(Error::InvalidDomain(format!(
                    "orbit points {j} and {i} coincide on the lifting grid"
                )));
            }
            orbits.push(s);
        }
        let mut t = PeriodicTriangulation {
            planar: PlanarTriangulation::build(&lift_all(&orbits, 3))?,
            orbits,
            window: 3,
            canon: BTreeMap::new(),
            side: Vec::new(),
            class_keys: Vec::new(),
            rebuilds: 0,
        };
        t.extract(None);
        t.apply_window_policy()?;
        Ok(t)
    }

    pub fn orbit_count(&self) -> usize {
        self.orbits.len()
    }

    pub fn orbit_point(&self, orbit: usize) -> Point {
        self.orbits[orbit]
    }

    pub fn orbits(&self) -> &[Point] {
        &self.orbits
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    pub fn rebuild_count(&self) -> u32 {
        self.rebuilds
    }

    pub fn class_count(&self) -> usize {
        self.canon.len()
    }

    /// Live class ids, ascending.
    pub fn classes(&self) -> Vec<usize> {
        self.class_keys
            .iter()
            .enumerate()
            .filter_map(|(id, k)| k.as_ref().map(|_| id))
            .collect()
    }

    fn class(&self, id: usize) -> &CanonClass {
        let key = self.class_keys[id]
            .as_ref()
            .expect("class id refers to a live class");
        &self.canon[key]
    }

    /// Circumcircle of the class's canonical copy; center in `[0,1)^2`.
    pub fn class_circle(&self, id: usize) -> Circle {
        self.class(id).circ
    }

    /// Lifted coordinates of the canonical copy, CCW. Exact translates.
    pub fn class_points(&self, id: usize) -> [Point; 3] {
        let c = self.class(id);
        c.verts.map(|(o, sx, sy)| lift(self.orbits[o as usize], sx as i32, sy as i32))
    }

    /// Canonical copy vertices as `(orbit, shift)`.
    pub fn class_vertices(&self, id: usize) -> [(usize, (i32, i32)); 3] {
        self.class(id)
            .verts
            .map(|(o, sx, sy)| (o as usize, (sx as i32, sy as i32)))
    }

    /// Shortest edge over all torus triangles, measured on lifted copies.
    pub fn shortest_edge(&self) -> f64 {
        let mut best = f64::INFINITY;
        for c in self.canon.values() {
            let p = c
                .verts
                .map(|(o, sx, sy)| lift(self.orbits[o as usize], sx as i32, sy as i32));
            for j in 0..3 {
                best = best.min(p[j].dist(p[(j + 1) % 3]));
            }
        }
        best
    }

    /// Adds one orbit (snapped to the lifting grid) and reports the net
    /// change in torus triangle classes.
    pub fn insert_orbit(&mut self, p: Point) -> Result<PeriodicInsertion> {
        if !(0.0..1.0).contains(&p.x) || !(0.0..1.0).contains(&p.y) {
            return Err(Error::OutOfRange(
                "orbit point outside the half-open unit square".into(),
            ));
        }
        let p = Point::new(snap_unit_coord(p.x), snap_unit_coord(p.y));
        if let Some(existing) = self.orbits.iter().position(|&q| q == p) {
            return Err(Error::DuplicateVertex { existing });
        }
        let before: BTreeMap<CanonKey, usize> = self
            .canon
            .iter()
            .map(|(k, c)| (*k, c.id))
            .collect();
        let rebuilds_before = self.rebuilds;

        let w = self.window as i32;
        let orbit = self.orbits.len();
        self.orbits.push(p);
        for rank in 0..(w * w) as usize {
            let (sx, sy) = shift_of_rank(rank, w);
            let out = self.planar.insert_point(lift(p, sx, sy))?;
            debug_assert_eq!(out.vertex, orbit * (w * w) as usize + rank);
            self.side.resize(self.planar.tri_slot_count(), None);
            for &t in &out.removed {
                if let Some(key) = self.side[t].take() {
                    let class = self.canon.remove(&key).expect("side entry is canonical");
                    self.class_keys[class.id] = None;
                }
            }
            for &t in &out.created {
                self.adopt_if_canonical(t, None);
            }
        }
        self.apply_window_policy()?;

        let mut removed_classes: Vec<usize> = before
            .iter()
            .filter(|(k, _)| !self.canon.contains_key(*k))
            .map(|(_, &id)| id)
            .collect();
        let mut created_classes: Vec<usize> = self
            .canon
            .iter()
            .filter(|(k, _)| !before.contains_key(*k))
            .map(|(_, c)| c.id)
            .collect();
        removed_classes.sort_unstable();
        created_classes.sort_unstable();
        Ok(PeriodicInsertion {
            orbit,
            removed_classes,
            created_classes,
            rebuilt: self.rebuilds != rebuilds_before,
        })
    }

    /// Registers planar triangle `t` as a class representative when its
    /// translate is the canonical one. `reuse` supplies ids that survive a
    /// window rebuild.
    fn adopt_if_canonical(&mut self, t: usize, reuse: Option<&BTreeMap<CanonKey, CanonClass>>) {
        if !self.planar.is_real_alive(t) {
            return;
        }
        let circ = self.planar.circumcircle_of(t);
        // Canonical copies have centers in [0,1)^2 and radius at most
        // sqrt(2)/2; anything well beyond that cannot be one.
        if circ.radius >= 0.75
            || circ.center.x < -1.0
            || circ.center.x >= 2.0
            || circ.center.y < -1.0
            || circ.center.y >= 2.0
        {
            return;
        }
        let (key, base_shift) = self.key_of(t);
        let (canon_circ, canon_translate, verts) = self.class_data(&key);
        if base_shift != canon_translate {
            return;
        }
        let id = match reuse.and_then(|old| old.get(&key)) {
            Some(old_class) => {
                let id = old_class.id;
                self.class_keys[id] = Some(key);
                id
            }
            None => {
                let id = self.class_keys.len();
                self.class_keys.push(Some(key));
                id
            }
        };
        let prev = self.canon.insert(
            key,
            CanonClass {
                id,
                circ: canon_circ,
                verts,
            },
        );
        debug_assert!(prev.is_none(), "one canonical copy per class");
        self.side[t] = Some(key);
    }

    fn decode(&self, vid: u32) -> (u32, i32, i32) {
        let w = self.window as i32;
        let ww = (w * w) as u32;
        let orbit = vid / ww;
        let rank = (vid % ww) as usize;
        let (sx, sy) = shift_of_rank(rank, w);
        (orbit, sx, sy)
    }

    /// Rotation-normalized key of a real planar triangle, plus the absolute
    /// shift of the key's base vertex in this copy.
    fn key_of(&self, t: usize) -> (CanonKey, (i32, i32)) {
        let v = self.planar.tri_vertices(t);
        let dec = v.map(|vid| self.decode(vid));
        let mut best: Option<(CanonKey, (i32, i32))> = None;
        for j in 0..3 {
            let (bo, bx, by) = dec[j];
            let rot: CanonKey = [0, 1, 2].map(|i| {
                let (o, sx, sy) = dec[(j + i) % 3];
                (o, (sx - bx) as i8, (sy - by) as i8)
            });
            debug_assert_eq!(rot[0], (bo, 0, 0));
            if best.as_ref().map_or(true, |(k, _)| rot < *k) {
                best = Some((rot, (bx, by)));
            }
        }
        best.expect("triangle has three rotations")
    }

    /// Canonical circumcircle, base translate, and canonical-copy vertices
    /// for a class key.
    fn class_data(&self, key: &CanonKey) -> (Circle, (i32, i32), [(u32, i8, i8); 3]) {
        let pts = key.map(|(o, sx, sy)| lift(self.orbits[o as usize], sx as i32, sy as i32));
        let circ = circumcircle(pts[0], pts[1], pts[2])
            .expect("triangulation triangle is not degenerate");
        let tx = -circ.center.x.floor();
        let ty = -circ.center.y.floor();
        let center = Point::new(circ.center.x + tx, circ.center.y + ty);
        let (tx, ty) = (tx as i32, ty as i32);
        let verts = key.map(|(o, sx, sy)| (o, (sx as i32 + tx) as i8, (sy as i32 + ty) as i8));
        (
            Circle::new(center, circ.radius),
            (tx, ty),
            verts,
        )
    }

    /// Rebuilds the planar lifting at the given window width, carrying
    /// class ids across for classes that persist.
    fn rebuild(&mut self, window: u32) -> Result<()> {
        self.rebuilds += 1;
        if self.rebuilds > MAX_REBUILDS {
            return Err(Error::InvariantViolation(format!(
                "periodic lifting rebuilt more than {MAX_REBUILDS} times"
            )));
        }
        self.window = window;
        self.planar = PlanarTriangulation::build(&lift_all(&self.orbits, window))?;
        let old = std::mem::take(&mut self.canon);
        self.extract(Some(&old));
        Ok(())
    }

    /// Rebuilds `canon`/`side` from the current planar triangulation.
    fn extract(&mut self, old: Option<&BTreeMap<CanonKey, CanonClass>>) {
        self.canon.clear();
        for k in self.class_keys.iter_mut() {
            *k = None;
        }
        self.side = vec![None; self.planar.tri_slot_count()];
        let real: Vec<usize> = self.planar.real_triangles().map(|(t, _, _)| t).collect();
        for t in real {
            self.adopt_if_canonical(t, old);
        }
    }

    /// Widens the lifting when a circumradius reaches 1/2 and narrows it
    /// back when all have dropped below 0.4; the gap prevents flapping.
    fn apply_window_policy(&mut self) -> Result<()> {
        loop {
            let max_r = self
                .canon
                .values()
                .map(|c| c.circ.radius)
                .fold(0.0_f64, f64::max);
            let target = if self.window == 3 && max_r >= 0.5 {
                5
            } else if self.window == 5 && max_r < 0.4 {
                3
            } else {
                return Ok(());
            };
            self.rebuild(target)?;
        }
    }

    /// Locates `p` (snapped to the lifting grid) on the torus. Classifies
    /// against canonical copies, scanning classes in id order.
    pub fn locate(&self, p: Point) -> Result<Location> {
        if !(0.0..1.0).contains(&p.x) || !(0.0..1.0).contains(&p.y) {
            return Err(Error::OutOfRange(
                "query point outside the half-open unit square".into(),
            ));
        }
        let q = Point::new(snap_unit_coord(p.x), snap_unit_coord(p.y));
        for id in self.classes() {
            let c = self.class(id);
            let tri = c
                .verts
                .map(|(o, sx, sy)| lift(self.orbits[o as usize], sx as i32, sy as i32));
            for kx in -1..=1 {
                for ky in -1..=1 {
                    let qt = lift(q, kx, ky);
                    for j in 0..3 {
                        if tri[j] == qt {
                            return Ok(Location::Vertex(c.verts[j].0 as usize));
                        }
                    }
                    let o: [f64; 3] = [0, 1, 2].map(|j| {
                        orient_raw(tri[(j + 1) % 3], tri[(j + 2) % 3], qt)
                    });
                    if o.iter().all(|&s| s >= 0.0) {
                        if let Some(j) = (0..3).find(|&j| o[j] == 0.0) {
                            return Ok(Location::Edge(id, j));
                        }
                        return Ok(Location::Triangle(id));
                    }
                }
            }
        }
        Err(Error::InvariantViolation(
            "torus classes fail to cover the query point".into(),
        ))
    }

    /// Full torus validity: the lifted triangulation is Delaunay, classes
    /// count `2n` and tile the torus once, every class disk is empty of
    /// all nearby orbit translates, and the representative bookkeeping is
    /// consistent.
    pub fn delaunay_check(&self) -> bool {
        if !self.planar.delaunay_check() {
            return false;
        }
        if self.canon.len() != 2 * self.orbits.len() {
            return false;
        }
        let mut area = 0.0;
        let mut dir_edges: BTreeMap<(u32, u32, i32, i32), u32> = BTreeMap::new();
        for c in self.canon.values() {
            let pts = c
                .verts
                .map(|(o, sx, sy)| lift(self.orbits[o as usize], sx as i32, sy as i32));
            area += orient_raw(pts[0], pts[1], pts[2]) / 2.0;
            for j in 0..3 {
                let (oa, ax, ay) = c.verts[j];
                let (ob, bx, by) = c.verts[(j + 1) % 3];
                *dir_edges
                    .entry((oa, ob, (bx - ax) as i32, (by - ay) as i32))
                    .or_insert(0) += 1;
            }
            for (q, orbit_pt) in self.orbits.iter().enumerate() {
                for kx in -1..=1 {
                    for ky in -1..=1 {
                        let is_vertex = c.verts.iter().any(|&(o, sx, sy)| {
                            o as usize == q && sx as i32 == kx && sy as i32 == ky
                        });
                        if is_vertex {
                            continue;
                        }
                        if in_circle_raw(pts[0], pts[1], pts[2], lift(*orbit_pt, kx, ky)) > 0.0 {
                            return false;
                        }
                    }
                }
            }
        }
        if (area - 1.0).abs() > 1e-9 {
            return false;
        }
        if dir_edges.values().any(|&n| n != 1) {
            return false;
        }
        // Representative bookkeeping: each class has exactly one alive
        // planar triangle claiming it.
        let mut claims: BTreeMap<CanonKey, u32> = BTreeMap::new();
        for (t, slot) in self.side.iter().enumerate() {
            if let Some(key) = slot {
                if !self.planar.is_real_alive(t) || !self.canon.contains_key(key) {
                    return false;
                }
                *claims.entry(*key).or_insert(0) += 1;
            }
        }
        claims.len() == self.canon.len() && claims.values().all(|&n| n == 1)
    }
}

fn lift(p: Point, sx: i32, sy: i32) -> Point {
    Point::new(p.x + sx as f64, p.y + sy as f64)
}

fn shift_of_rank(rank: usize, w: i32) -> (i32, i32) {
    let m = (w - 1) / 2;
    let sx = (rank as i32) / w - m;
    let sy = (rank as i32) % w - m;
    (sx, sy)
}

fn lift_all(orbits: &[Point], w: u32) -> Vec<Point> {
    let w = w as i32;
    let mut out = Vec::with_capacity(orbits.len() * (w * w) as usize);
    for &p in orbits {
        for rank in 0..(w * w) as usize {
            let (sx, sy) = shift_of_rank(rank, w);
            out.push(lift(p, sx, sy));
        }
    }
    out
}
