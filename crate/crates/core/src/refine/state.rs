// SPDX-License-Identifier: MIT OR Apache-2.0

//! Shared incremental engine behind the refinement drivers.
//!
//! [`RefineState`] owns the evolving triangulation plus every index a driver
//! queries per step: which triangles are poor and which subsegments their
//! circumcenters encroach, which subsegments have a vertex inside their
//! diametral circle, which midpoints have been forced by blocked
//! circumcenters, and the multiset of edge lengths backing the
//! global-shortest-edge rule. Everything updates incrementally per
//! insertion; drivers never rescan the mesh.

use std::collections::{BTreeMap, BTreeSet};

use crate::domain::{min_vertex_lfs, torus_distance, DomainDiameter};
use crate::error::{Error, Result};
use crate::geometry::{circumcircle, diametral_circle, encroaches, Circle, Point};
use crate::mesh::{Mesh, MeshSubsegment, MeshTriangle};
use crate::tol::STALL_SHRINK_EXP;
use crate::triangulation::{build_delaunay, Mode, Triangulation};

use super::{
    Candidate, CandidateKind, EncroachEvent, InsertionLog, LogEntry, QualityRule, RefineDomain,
    RuleKind, SourceId,
};
#[cfg(test)]
use super::CandidateSets;

/// Queue key ordering candidates by larger radius first, then location, then
/// id. `first()` on a set of these is the pick the priority policy makes.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CandKey {
    pub r: f64,
    pub x: f64,
    pub y: f64,
    pub id: usize,
}

impl Ord for CandKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .r
            .total_cmp(&self.r)
            .then(self.x.total_cmp(&other.x))
            .then(self.y.total_cmp(&other.y))
            .then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for CandKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for CandKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl Eq for CandKey {}

/// Watch-list key for the global-shortest-edge rule: largest radius first.
#[derive(Debug, Clone, Copy)]
struct WatchKey {
    r: f64,
    slot: usize,
}

impl Ord for WatchKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.r.total_cmp(&self.r).then(self.slot.cmp(&other.slot))
    }
}

impl PartialOrd for WatchKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for WatchKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl Eq for WatchKey {}

/// Per-triangle geometry captured at creation time so removal never needs to
/// query a handle the triangulation may already have retired. The circle is
/// recomputed from the canonically rotated corners, so any later recompute
/// from the extracted mesh reproduces it bit for bit.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TriInfo {
    pub circle: Circle,
    pub min_edge: f64,
    elens: [f64; 3],
}

/// Subsegment of an input segment. `diam` is its diametral circle;
/// `encroached` caches whether some mesh vertex other than the endpoints
/// lies strictly inside it.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Subseg {
    pub a: usize,
    pub b: usize,
    pub original: usize,
    pub live: bool,
    pub encroached: bool,
    pub diam: Circle,
}

/// Undirected edge key: endpoint ids plus the relative unit-cell shift of
/// the second endpoint (zero in planar mode).
pub(crate) type EdgeKey = (usize, usize, i8, i8);

fn normalize_ekey(a: usize, b: usize, ds: [i8; 2]) -> EdgeKey {
    if (a, b, ds) <= (b, a, [-ds[0], -ds[1]]) {
        (a, b, ds[0], ds[1])
    } else {
        (b, a, -ds[0], -ds[1])
    }
}

pub(crate) struct RefineState {
    pub tri: Triangulation,
    rule: QualityRule,
    mode: Mode,
    subs: Vec<Subseg>,
    /// Midpoint bits of live subsegments; midpoints are unique among live
    /// subsegments in a valid domain.
    sub_by_mid: BTreeMap<(u64, u64), usize>,
    /// Vertex-encroached subsegments, ordered for picking.
    dt_queue: BTreeSet<CandKey>,
    /// Subsegments whose midpoints were forced by a blocked circumcenter.
    /// They stay here until split, even if every witness has since died.
    carried_db: BTreeSet<usize>,
    db_queue: BTreeSet<CandKey>,
    cache: BTreeMap<usize, TriInfo>,
    /// Poor triangle -> subsegments its circumcenter strictly encroaches.
    /// Empty set means the circumcenter is insertable.
    poor: BTreeMap<usize, BTreeSet<usize>>,
    c_queue: BTreeSet<CandKey>,
    /// Subsegment -> live poor triangles whose circumcenters encroach it.
    rev_witness: BTreeMap<usize, BTreeSet<usize>>,
    /// Global-shortest-edge rule only: good triangles by descending radius,
    /// migrated to poor as the shortest edge shrinks.
    watch: BTreeSet<WatchKey>,
    /// Edge length bits -> multiplicity; three entries per live triangle.
    edge_mult: BTreeMap<u64, u32>,
    stall_floor: f64,
    pub log: InsertionLog,
    pub encroach_events: Vec<EncroachEvent>,
    input_vertex_count: usize,
    pub domain_l: f64,
}

impl RefineState {
    pub fn new(domain: &RefineDomain, rule: QualityRule) -> Result<Self> {
        let (tri, mode, stall_base, domain_l) = match domain {
            RefineDomain::Pslg(d) => {
                let tri = build_delaunay(&d.vertices, Mode::Planar)?;
                let base = min_vertex_lfs(d)?;
                (tri, Mode::Planar, base, DomainDiameter::of_pslg(d).l)
            }
            RefineDomain::Periodic(p) => {
                let tri = build_delaunay(p.points(), Mode::Periodic)?;
                let pts = p.points();
                let mut gap = f64::INFINITY;
                for (i, &a) in pts.iter().enumerate() {
                    for &b in &pts[i + 1..] {
                        gap = gap.min(torus_distance(a, b));
                    }
                }
                let base = gap.min(1.0);
                (tri, Mode::Periodic, base, DomainDiameter::of_periodic(p).l)
            }
        };

        let mut state = RefineState {
            input_vertex_count: tri.vertex_count(),
            tri,
            rule,
            mode,
            subs: Vec::new(),
            sub_by_mid: BTreeMap::new(),
            dt_queue: BTreeSet::new(),
            carried_db: BTreeSet::new(),
            db_queue: BTreeSet::new(),
            cache: BTreeMap::new(),
            poor: BTreeMap::new(),
            c_queue: BTreeSet::new(),
            rev_witness: BTreeMap::new(),
            watch: BTreeSet::new(),
            edge_mult: BTreeMap::new(),
            stall_floor: stall_base / 2f64.powi(STALL_SHRINK_EXP),
            log: InsertionLog::default(),
            encroach_events: Vec::new(),
            domain_l,
        };

        if let RefineDomain::Pslg(d) = domain {
            for (_, seg) in d.live_segments() {
                state.push_subseg(seg.a, seg.b, seg.original)?;
            }
        }

        let slots = state.tri.triangles();
        for &slot in &slots {
            state.cache_triangle(slot);
        }
        for &slot in &slots {
            state.classify_triangle(slot);
        }
        Ok(state)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn iteration(&self) -> usize {
        self.log.entries.len()
    }

    /// Length of the shortest edge in the current triangulation.
    pub fn shortest_edge(&self) -> f64 {
        self.edge_mult
            .first_key_value()
            .map_or(f64::INFINITY, |(&bits, _)| f64::from_bits(bits))
    }

    /// Largest circumradius over live triangles, 0 for an empty cache.
    pub fn max_circumradius(&self) -> f64 {
        self.cache
            .values()
            .map(|i| i.circle.radius)
            .fold(0.0, f64::max)
    }

    pub fn has_poor(&self) -> bool {
        !self.poor.is_empty()
    }

    pub fn has_encroached(&self) -> bool {
        !self.dt_queue.is_empty()
    }

    /// Sequential loop head: poor triangles or vertex-encroached
    /// subsegments remain.
    pub fn has_work(&self) -> bool {
        self.has_poor() || self.has_encroached()
    }

    /// Priority pick: vertex-forced midpoints, then carried midpoints, then
    /// insertable circumcenters; within each kind larger radius first, then
    /// location.
    pub fn best(&self) -> Option<(CandidateKind, usize)> {
        if let Some(k) = self.dt_queue.first() {
            return Some((CandidateKind::Dt, k.id));
        }
        if let Some(k) = self.db_queue.first() {
            return Some((CandidateKind::Db, k.id));
        }
        self.c_queue.first().map(|k| (CandidateKind::C, k.id))
    }

    /// Builds the candidate for a queue pick or a snapshot entry.
    pub fn materialize(&self, kind: CandidateKind, id: usize, birth_round: usize) -> Candidate {
        match kind {
            CandidateKind::C | CandidateKind::B => {
                let info = &self.cache[&id];
                Candidate {
                    location: info.circle.center,
                    circle: info.circle,
                    kind,
                    source: SourceId::Triangle(id),
                    birth_round,
                }
            }
            CandidateKind::Dt | CandidateKind::Db => {
                let s = &self.subs[id];
                debug_assert!(s.live);
                Candidate {
                    location: s.diam.center,
                    circle: s.diam,
                    kind,
                    source: SourceId::Segment(id),
                    birth_round,
                }
            }
        }
    }

    /// Current candidate sets as explicit lists, each in source-id order.
    #[cfg(test)]
    pub fn candidate_sets(&self, birth_round: usize) -> CandidateSets {
        let mut sets = CandidateSets::default();
        for (&slot, witnesses) in &self.poor {
            let kind = if witnesses.is_empty() {
                CandidateKind::C
            } else {
                CandidateKind::B
            };
            let cand = self.materialize(kind, slot, birth_round);
            if witnesses.is_empty() {
                sets.insertable.push(cand);
            } else {
                sets.blocked.push(cand);
            }
        }
        for key in &self.dt_queue {
            sets.vertex_splits
                .push(self.materialize(CandidateKind::Dt, key.id, birth_round));
        }
        for &id in &self.carried_db {
            sets.center_splits
                .push(self.materialize(CandidateKind::Db, id, birth_round));
        }
        sets.vertex_splits.sort_by_key(|c| c.source);
        sets.center_splits.sort_by_key(|c| c.source);
        sets
    }

    /// Applies one insertion: the point enters the triangulation, caches and
    /// queues absorb the triangle churn, splits retire their subsegment, and
    /// the log grows by one entry.
    pub fn apply(&mut self, cand: &Candidate) -> Result<()> {
        let split_target = match cand.kind {
            CandidateKind::C => None,
            CandidateKind::Dt | CandidateKind::Db => match cand.source {
                SourceId::Segment(id) => Some(id),
                SourceId::Triangle(_) => {
                    return Err(Error::InvariantViolation(
                        "midpoint candidate with a triangle source".into(),
                    ))
                }
            },
            CandidateKind::B => {
                return Err(Error::InvariantViolation(
                    "blocked circumcenters are never inserted".into(),
                ))
            }
        };
        if let Some(id) = split_target {
            let s = self
                .subs
                .get(id)
                .filter(|s| s.live)
                .ok_or(Error::NoSuchSegment(id))?;
            debug_assert_eq!(s.diam.center.bits(), cand.location.bits());
        }

        let insert_at = match self.mode {
            Mode::Planar => cand.location,
            // Canonical centers sit in [0,1)^2 up to rounding; wrap the
            // stray ulp back into range.
            Mode::Periodic => Point::new(wrap_unit(cand.location.x), wrap_unit(cand.location.y)),
        };
        let out = self.tri.insert_point(insert_at)?;
        let vid = out.vertex;

        for &slot in &out.removed {
            // Planar removal lists include ghosts; only cached slots are real.
            if self.cache.contains_key(&slot) {
                self.remove_triangle(slot);
            }
        }
        let created: Vec<usize> = out
            .created
            .iter()
            .copied()
            .filter(|&s| self.slot_is_real(s))
            .collect();
        let mut min_new = f64::INFINITY;
        for &slot in &created {
            min_new = min_new.min(self.cache_triangle(slot));
        }
        if min_new < self.stall_floor {
            return Err(Error::RefinementStalled {
                edge: min_new,
                floor: self.stall_floor,
            });
        }
        for &slot in &created {
            self.classify_triangle(slot);
        }
        self.chew_migrate();

        if let Some(id) = split_target {
            self.split_subseg(id, vid)?;
        }
        self.scan_vertex_encroach(vid);

        self.log.entries.push(LogEntry {
            candidate: *cand,
            iteration: self.log.entries.len(),
        });
        Ok(())
    }

    /// Termination postcondition: nothing poor, nothing encroached, and
    /// every live subsegment present as a Delaunay edge.
    pub fn assert_done(&self) -> Result<()> {
        if self.has_poor() {
            return Err(Error::InvariantViolation(format!(
                "refinement finished with {} poor triangles",
                self.poor.len()
            )));
        }
        if self.has_encroached() {
            return Err(Error::InvariantViolation(format!(
                "refinement finished with {} encroached subsegments",
                self.dt_queue.len()
            )));
        }
        if self.mode == Mode::Planar {
            let planar = self.tri.as_planar().expect("planar mode");
            for (id, s) in self.subs.iter().enumerate().filter(|(_, s)| s.live) {
                if !planar.has_edge(s.a as u32, s.b as u32) {
                    return Err(Error::InvariantViolation(format!(
                        "live subsegment {id} ({} - {}) is not a Delaunay edge",
                        s.a, s.b
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn extract_mesh(&self) -> Mesh {
        let vertices: Vec<Point> = (0..self.tri.vertex_count())
            .map(|v| self.tri.vertex_point(v))
            .collect();
        let triangles: Vec<MeshTriangle> = self
            .cache
            .keys()
            .map(|&slot| self.mesh_triangle(slot))
            .collect();
        let subsegments: Vec<MeshSubsegment> = self
            .subs
            .iter()
            .filter(|s| s.live)
            .map(|s| MeshSubsegment {
                a: s.a,
                b: s.b,
                original: s.original,
            })
            .collect();
        Mesh::new(
            self.mode,
            vertices,
            self.input_vertex_count,
            triangles,
            subsegments,
        )
    }

    // ------------------------------------------------------------------
    // Replay lookups.

    /// Live subsegment whose midpoint has these coordinate bits.
    pub fn sub_at_mid(&self, bits: (u64, u64)) -> Option<usize> {
        self.sub_by_mid.get(&bits).copied()
    }

    pub fn sub_encroached(&self, id: usize) -> bool {
        self.subs[id].encroached
    }

    pub fn sub_carried(&self, id: usize) -> bool {
        self.carried_db.contains(&id)
    }

    pub fn sub_diam(&self, id: usize) -> Circle {
        self.subs[id].diam
    }

    /// Insertable circumcenter matching the circle key exactly, if any.
    pub fn find_c(&self, circle: &Circle) -> Option<usize> {
        let lo = CandKey {
            r: circle.radius,
            x: circle.center.x,
            y: circle.center.y,
            id: 0,
        };
        let hi = CandKey {
            id: usize::MAX,
            ..lo
        };
        self.c_queue
            .range(lo..=hi)
            .next()
            .map(|k| k.id)
    }

    // ------------------------------------------------------------------
    // Driver snapshots.

    /// Live poor triangles and whether each circumcenter is blocked.
    pub fn poor_slots(&self) -> Vec<(usize, bool)> {
        self.poor
            .iter()
            .map(|(&slot, witnesses)| (slot, !witnesses.is_empty()))
            .collect()
    }

    /// Witnesses of a blocked circumcenter, for midpoint derivation.
    pub fn witnesses_of(&self, slot: usize) -> Vec<usize> {
        self.poor
            .get(&slot)
            .map(|w| w.iter().copied().collect())
            .unwrap_or_default()
    }

    pub fn triangle_info(&self, slot: usize) -> Option<&TriInfo> {
        self.cache.get(&slot)
    }

    pub fn drain_encroach_events(&mut self) -> Vec<EncroachEvent> {
        std::mem::take(&mut self.encroach_events)
    }

    /// Live subsegments as `(id, (endpoint, endpoint))`, ascending by id.
    #[cfg(test)]
    pub fn live_subs(&self) -> Vec<(usize, (usize, usize))> {
        self.subs
            .iter()
            .enumerate()
            .filter(|(_, s)| s.live)
            .map(|(id, s)| (id, (s.a, s.b)))
            .collect()
    }

    /// Unique undirected edges of the live triangulation with lengths.
    pub fn edge_set(&self) -> BTreeMap<EdgeKey, f64> {
        let mut out = BTreeMap::new();
        for (&slot, info) in &self.cache {
            let corners = self.corner_keys(slot);
            for k in 0..3 {
                let j = (k + 1) % 3;
                let (a, sa) = corners[k];
                let (b, sb) = corners[j];
                let key = normalize_ekey(a, b, [sb[0] - sa[0], sb[1] - sa[1]]);
                out.insert(key, info.elens[k]);
            }
        }
        out
    }

    /// Edge -> worst radius-edge ratio among its incident live triangles.
    pub fn edge_ratio_map(&self) -> BTreeMap<EdgeKey, f64> {
        let mut out: BTreeMap<EdgeKey, f64> = BTreeMap::new();
        for (&slot, info) in &self.cache {
            let ratio = info.circle.radius / info.min_edge;
            let corners = self.corner_keys(slot);
            for k in 0..3 {
                let j = (k + 1) % 3;
                let (a, sa) = corners[k];
                let (b, sb) = corners[j];
                let key = normalize_ekey(a, b, [sb[0] - sa[0], sb[1] - sa[1]]);
                let entry = out.entry(key).or_insert(0.0);
                *entry = entry.max(ratio);
            }
        }
        out
    }

    // ------------------------------------------------------------------
    // Internals.

    fn slot_is_real(&self, slot: usize) -> bool {
        match self.mode {
            Mode::Planar => self
                .tri
                .as_planar()
                .expect("planar mode")
                .is_real_alive(slot),
            Mode::Periodic => true,
        }
    }

    /// Corner `(vertex, shift)` keys in canonical rotation (smallest key
    /// first, cyclic order kept).
    fn corner_keys(&self, slot: usize) -> [(usize, [i8; 2]); 3] {
        canonical_corner_keys(&self.tri, slot)
    }

    fn mesh_triangle(&self, slot: usize) -> MeshTriangle {
        let corners = self.corner_keys(slot);
        MeshTriangle {
            v: [corners[0].0, corners[1].0, corners[2].0],
            shift: [corners[0].1, corners[1].1, corners[2].1],
        }
    }

    /// Corner points in the same canonical rotation as [`corner_keys`].
    fn corner_points(&self, slot: usize) -> [Point; 3] {
        canonical_corner_points(&self.tri, slot)
    }

    /// Caches geometry for a new live triangle and returns its shortest
    /// edge length (the stall guard watches the minimum over a batch).
    fn cache_triangle(&mut self, slot: usize) -> f64 {
        let pts = self.corner_points(slot);
        let circle = circumcircle(pts[0], pts[1], pts[2])
            .expect("live triangles are never collinear");
        let elens = [
            pts[0].dist(pts[1]),
            pts[1].dist(pts[2]),
            pts[2].dist(pts[0]),
        ];
        let min_edge = elens[0].min(elens[1]).min(elens[2]);
        for len in elens {
            *self.edge_mult.entry(len.to_bits()).or_insert(0) += 1;
        }
        let prev = self.cache.insert(
            slot,
            TriInfo {
                circle,
                min_edge,
                elens,
            },
        );
        debug_assert!(prev.is_none(), "slot {slot} cached twice");
        min_edge
    }

    fn remove_triangle(&mut self, slot: usize) {
        let info = self.cache.remove(&slot).expect("removing uncached slot");
        for len in info.elens {
            let count = self
                .edge_mult
                .get_mut(&len.to_bits())
                .expect("edge length missing from multiset");
            *count -= 1;
            if *count == 0 {
                self.edge_mult.remove(&len.to_bits());
            }
        }
        if let Some(witnesses) = self.poor.remove(&slot) {
            if witnesses.is_empty() {
                self.c_queue.remove(&self.c_key(slot, &info));
            } else {
                for sub in witnesses {
                    if let Some(set) = self.rev_witness.get_mut(&sub) {
                        set.remove(&slot);
                        if set.is_empty() {
                            self.rev_witness.remove(&sub);
                        }
                    }
                }
            }
        } else if self.rule.kind() == RuleKind::Chew {
            self.watch.remove(&WatchKey {
                r: info.circle.radius,
                slot,
            });
        }
    }

    fn is_poor_info(&self, info: &TriInfo) -> bool {
        match self.rule.kind() {
            RuleKind::Ruppert => info.circle.radius / info.min_edge > self.rule.beta(),
            RuleKind::Chew => info.circle.radius / self.shortest_edge() > self.rule.beta(),
        }
    }

    fn classify_triangle(&mut self, slot: usize) {
        let info = self.cache[&slot];
        if self.is_poor_info(&info) {
            self.insert_poor(slot, &info);
        } else if self.rule.kind() == RuleKind::Chew {
            self.watch.insert(WatchKey {
                r: info.circle.radius,
                slot,
            });
        }
    }

    /// Registers a poor triangle: find the subsegments its circumcenter
    /// encroaches, fold forced midpoints into the carried set, and queue the
    /// circumcenter when nothing blocks it.
    fn insert_poor(&mut self, slot: usize, info: &TriInfo) {
        let mut witnesses = BTreeSet::new();
        for (id, s) in self.subs.iter().enumerate() {
            if s.live && encroaches(info.circle.center, &s.diam) {
                witnesses.insert(id);
            }
        }
        for &sub in &witnesses {
            self.encroach_events.push(EncroachEvent {
                r_center: info.circle.radius,
                r_diametral: self.subs[sub].diam.radius,
            });
            self.rev_witness.entry(sub).or_default().insert(slot);
            self.fold_carried(sub);
        }
        if witnesses.is_empty() {
            self.c_queue.insert(self.c_key(slot, info));
        }
        self.poor.insert(slot, witnesses);
    }

    fn fold_carried(&mut self, sub: usize) {
        if self.carried_db.insert(sub) {
            self.db_queue.insert(self.sub_key(sub));
        }
    }

    /// Moves watch-list triangles whose ratio crossed the bound as the
    /// global shortest edge shrank. The shortest edge never grows, so
    /// migration is one-directional.
    fn chew_migrate(&mut self) {
        if self.rule.kind() != RuleKind::Chew {
            return;
        }
        let beta = self.rule.beta();
        loop {
            let Some(&top) = self.watch.first() else {
                return;
            };
            if top.r / self.shortest_edge() > beta {
                self.watch.pop_first();
                let info = self.cache[&top.slot];
                self.insert_poor(top.slot, &info);
            } else {
                return;
            }
        }
    }

    fn c_key(&self, slot: usize, info: &TriInfo) -> CandKey {
        CandKey {
            r: info.circle.radius,
            x: info.circle.center.x,
            y: info.circle.center.y,
            id: slot,
        }
    }

    fn sub_key(&self, id: usize) -> CandKey {
        let s = &self.subs[id];
        CandKey {
            r: s.diam.radius,
            x: s.diam.center.x,
            y: s.diam.center.y,
            id,
        }
    }

    /// Appends a live subsegment, computing its diametral circle and its
    /// vertex-encroachment flag against all current vertices (the
    /// subsegment's own endpoints excluded by id).
    fn push_subseg(&mut self, a: usize, b: usize, original: usize) -> Result<usize> {
        let pa = self.tri.vertex_point(a);
        let pb = self.tri.vertex_point(b);
        let diam = diametral_circle(pa, pb)?;
        let mut encroached = false;
        for v in 0..self.tri.vertex_count() {
            if v != a && v != b && encroaches(self.tri.vertex_point(v), &diam) {
                encroached = true;
                break;
            }
        }
        let id = self.subs.len();
        self.subs.push(Subseg {
            a,
            b,
            original,
            live: true,
            encroached,
            diam,
        });
        let prev = self.sub_by_mid.insert(diam.center.bits(), id);
        if prev.is_some() {
            return Err(Error::InvariantViolation(format!(
                "two live subsegments share midpoint ({}, {})",
                diam.center.x, diam.center.y
            )));
        }
        if encroached {
            self.dt_queue.insert(self.sub_key(id));
        }
        Ok(id)
    }

    /// Retires a split subsegment and wires in its halves: carried and
    /// encroached markers move out, the halves get fresh flags, and every
    /// blocked circumcenter that witnessed the parent is retested against
    /// the halves (reverting to insertable when nothing is left).
    fn split_subseg(&mut self, id: usize, mid_vertex: usize) -> Result<()> {
        let parent = self.subs[id];
        debug_assert!(parent.live);
        self.subs[id].live = false;
        self.sub_by_mid.remove(&parent.diam.center.bits());
        if parent.encroached {
            self.dt_queue.remove(&self.key_of_retired(id, &parent));
        }
        if self.carried_db.remove(&id) {
            self.db_queue.remove(&self.key_of_retired(id, &parent));
        }
        let watchers: Vec<usize> = self
            .rev_witness
            .remove(&id)
            .map(|s| s.into_iter().collect())
            .unwrap_or_default();
        for &t in &watchers {
            self.poor
                .get_mut(&t)
                .expect("witness index points at a poor triangle")
                .remove(&id);
        }

        let first = self.push_subseg(parent.a, mid_vertex, parent.original)?;
        let second = self.push_subseg(mid_vertex, parent.b, parent.original)?;

        for &t in &watchers {
            let info = self.cache[&t];
            for child in [first, second] {
                if encroaches(info.circle.center, &self.subs[child].diam) {
                    self.encroach_events.push(EncroachEvent {
                        r_center: info.circle.radius,
                        r_diametral: self.subs[child].diam.radius,
                    });
                    self.poor.get_mut(&t).expect("still poor").insert(child);
                    self.rev_witness.entry(child).or_default().insert(t);
                    self.fold_carried(child);
                }
            }
            if self.poor[&t].is_empty() {
                // The last blocking subsegment is gone: the circumcenter
                // becomes insertable.
                self.c_queue.insert(self.c_key(t, &info));
            }
        }
        Ok(())
    }

    fn key_of_retired(&self, id: usize, s: &Subseg) -> CandKey {
        CandKey {
            r: s.diam.radius,
            x: s.diam.center.x,
            y: s.diam.center.y,
            id,
        }
    }

    /// Marks live subsegments whose diametral circle strictly contains the
    /// new vertex. The vertex is never an endpoint of a preexisting
    /// subsegment, and split halves already exclude it by id.
    fn scan_vertex_encroach(&mut self, vid: usize) {
        let p = self.tri.vertex_point(vid);
        let hits: Vec<usize> = self
            .subs
            .iter()
            .enumerate()
            .filter(|(_, s)| {
                s.live && !s.encroached && s.a != vid && s.b != vid && encroaches(p, &s.diam)
            })
            .map(|(id, _)| id)
            .collect();
        for id in hits {
            self.subs[id].encroached = true;
            self.dt_queue.insert(self.sub_key(id));
        }
    }
}

fn wrap_unit(x: f64) -> f64 {
    let w = x - x.floor();
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Corner `(vertex, shift)` keys of a live triangle rotated so the smallest
/// key leads, cyclic order kept. All circumcircle recomputation in the crate
/// starts from this rotation so the same triangle always yields the same
/// circle bits, no matter which representation it came from.
pub(crate) fn canonical_corner_keys(tri: &Triangulation, slot: usize) -> [(usize, [i8; 2]); 3] {
    let mut corners: [(usize, [i8; 2]); 3] = match tri.mode() {
        Mode::Planar => tri.triangle_vertices(slot).map(|v| (v, [0i8, 0i8])),
        Mode::Periodic => tri
            .as_periodic()
            .expect("periodic mode")
            .class_vertices(slot)
            .map(|(o, (sx, sy))| (o, [sx as i8, sy as i8])),
    };
    let lead = (0..3).min_by_key(|&k| corners[k]).unwrap();
    corners.rotate_left(lead);
    corners
}

/// Corner points in the rotation of [`canonical_corner_keys`], shifts applied.
pub(crate) fn canonical_corner_points(tri: &Triangulation, slot: usize) -> [Point; 3] {
    canonical_corner_keys(tri, slot).map(|(v, s)| {
        let p = tri.vertex_point(v);
        Point::new(p.x + f64::from(s[0]), p.y + f64::from(s[1]))
    })
}
