// SPDX-License-Identifier: MIT OR Apache-2.0

//! Input domains: planar straight-line graphs and periodic point sets.
//!
//! A [`Pslg`] is a set of vertices plus non-crossing segments between them;
//! refinement treats the segments as boundary features that must appear in
//! the final mesh. A [`PeriodicPointSet`] lives on the unit torus. Both are
//! immutable; [`Pslg::split_segment`] returns a new copy.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{orientation, Orientation, Point};
use crate::tol;

/// Segment of a [`Pslg`]. Splitting retires a segment and adds two halves,
/// so every segment remembers the original input segment it subdivides.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment {
    pub a: usize,
    pub b: usize,
    /// Root input segment this one subdivides (itself for input segments).
    pub original: usize,
    /// Segment this one was split from, if any.
    pub parent: Option<usize>,
    live: bool,
}

impl Segment {
    pub fn is_live(&self) -> bool {
        self.live
    }

    pub fn endpoints(&self) -> [usize; 2] {
        [self.a, self.b]
    }

    /// Unordered endpoint pair, usable as a set key.
    pub fn key(&self) -> (usize, usize) {
        (self.a.min(self.b), self.a.max(self.b))
    }
}

/// Planar straight-line graph: vertices plus segments between them.
///
/// Construction checks only structural soundness (indices in range,
/// endpoints distinct). Geometric soundness is reported by
/// [`validate_pslg`]; operations that assume it say so.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pslg {
    pub vertices: Vec<Point>,
    segments: Vec<Segment>,
}

impl Pslg {
    pub fn new(vertices: Vec<Point>, segments: &[[usize; 2]]) -> Result<Pslg> {
        for (i, &[a, b]) in segments.iter().enumerate() {
            if a >= vertices.len() || b >= vertices.len() {
                return Err(Error::OutOfRange(format!(
                    "segment {i} references vertex {} but there are {} vertices",
                    a.max(b),
                    vertices.len()
                )));
            }
            if a == b {
                return Err(Error::DegenerateSegment);
            }
        }
        Ok(Pslg {
            vertices,
            segments: segments
                .iter()
                .enumerate()
                .map(|(i, &[a, b])| Segment {
                    a,
                    b,
                    original: i,
                    parent: None,
                    live: true,
                })
                .collect(),
        })
    }

    /// All segment slots ever created, including retired ones.
    pub fn all_segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment(&self, id: usize) -> Option<&Segment> {
        self.segments.get(id).filter(|s| s.live)
    }

    pub fn live_segments(&self) -> impl Iterator<Item = (usize, &Segment)> {
        self.segments
            .iter()
            .enumerate()
            .filter(|(_, s)| s.live)
    }

    pub fn live_segment_count(&self) -> usize {
        self.segments.iter().filter(|s| s.live).count()
    }

    pub fn segment_points(&self, s: &Segment) -> (Point, Point) {
        (self.vertices[s.a], self.vertices[s.b])
    }

    /// Splits segment `id` at its midpoint: the midpoint joins the vertex
    /// list, `id` is retired, and two half-segments are appended. Returns
    /// the new domain and the new vertex's index.
    pub fn split_segment(&self, id: usize) -> Result<(Pslg, usize)> {
        let seg = self.segment(id).ok_or(Error::NoSuchSegment(id))?.clone();
        let mid = self.vertices[seg.a].mid(self.vertices[seg.b]);
        let mut out = self.clone();
        let v = out.vertices.len();
        out.vertices.push(mid);
        out.segments[id].live = false;
        out.segments.push(Segment {
            a: seg.a,
            b: v,
            original: seg.original,
            parent: Some(id),
            live: true,
        });
        out.segments.push(Segment {
            a: v,
            b: seg.b,
            original: seg.original,
            parent: Some(id),
            live: true,
        });
        Ok((out, v))
    }

    /// Diameter of the vertex set (largest pairwise distance).
    pub fn diameter(&self) -> f64 {
        let hull = convex_hull(&self.vertices);
        let mut best: f64 = 0.0;
        for (i, &p) in hull.iter().enumerate() {
            for &q in &hull[i + 1..] {
                best = best.max(self.vertices[p].dist(self.vertices[q]));
            }
        }
        best
    }

    /// Checks geometric validity and returns `self`, or an error carrying
    /// the validation report's summary.
    pub fn validated(self) -> Result<Pslg> {
        let report = validate_pslg(&self);
        if report.is_valid() {
            Ok(self)
        } else {
            Err(Error::InvalidDomain(report.summary()))
        }
    }
}

/// Pair of adjacent segments meeting below the 90-degree floor.
#[derive(Debug, Clone, Serialize)]
pub struct SharpAngle {
    pub segments: (usize, usize),
    pub vertex: usize,
    pub angle_rad: f64,
}

/// Everything [`validate_pslg`] can object to. The domain is geometrically
/// sound iff the report is empty.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    /// Segment pairs whose interiors properly cross.
    pub crossings: Vec<(usize, usize)>,
    /// (vertex, segment) pairs where the vertex lies strictly inside the
    /// segment; covers collinear segment overlaps as well.
    pub vertex_on_segment: Vec<(usize, usize)>,
    /// Adjacent segments meeting at less than 90 degrees (tolerance
    /// [`tol::ANGLE_TOL_RAD`]).
    pub sharp_angles: Vec<SharpAngle>,
    /// Vertex index pairs with exactly equal coordinates.
    pub duplicate_vertices: Vec<(usize, usize)>,
    /// Segment index pairs with the same endpoints.
    pub duplicate_segments: Vec<(usize, usize)>,
    /// Consecutive convex-hull vertex pairs not covered by an input
    /// segment. Refinement needs the hull fenced so circumcenters stay
    /// inside the domain.
    pub hull_gaps: Vec<(usize, usize)>,
    /// Fewer than three non-collinear vertices: nothing to triangulate.
    pub not_two_dimensional: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.crossings.is_empty()
            && self.vertex_on_segment.is_empty()
            && self.sharp_angles.is_empty()
            && self.duplicate_vertices.is_empty()
            && self.duplicate_segments.is_empty()
            && self.hull_gaps.is_empty()
            && !self.not_two_dimensional
    }

    pub fn summary(&self) -> String {
        if self.is_valid() {
            return "valid".to_string();
        }
        let mut parts = Vec::new();
        let mut count = |n: usize, what: &str| {
            if n > 0 {
                parts.push(format!("{n} {what}"));
            }
        };
        count(self.crossings.len(), "segment crossings");
        count(self.vertex_on_segment.len(), "vertices inside segments");
        count(self.sharp_angles.len(), "angles below 90 degrees");
        count(self.duplicate_vertices.len(), "duplicate vertices");
        count(self.duplicate_segments.len(), "duplicate segments");
        count(self.hull_gaps.len(), "unfenced hull edges");
        if self.not_two_dimensional {
            parts.push("fewer than 3 non-collinear vertices".to_string());
        }
        parts.join(", ")
    }
}

fn strictly_between(a: Point, b: Point, p: Point) -> bool {
    debug_assert!(orientation(a, b, p).is_collinear());
    let t = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
    let len2 = a.dist2(b);
    t > 0.0 && t < len2 && p != a && p != b
}

/// Checks a domain's geometric invariants; see [`ValidationReport`].
pub fn validate_pslg(d: &Pslg) -> ValidationReport {
    let mut report = ValidationReport::default();
    let segs: Vec<(usize, &Segment)> = d.live_segments().collect();

    let mut sorted: Vec<usize> = (0..d.vertices.len()).collect();
    sorted.sort_by(|&i, &j| d.vertices[i].lex_cmp(d.vertices[j]).then(i.cmp(&j)));
    for w in sorted.windows(2) {
        if d.vertices[w[0]] == d.vertices[w[1]] {
            report.duplicate_vertices.push((w[0], w[1]));
        }
    }

    for (n, &(i, si)) in segs.iter().enumerate() {
        for &(j, sj) in &segs[n + 1..] {
            if si.key() == sj.key() {
                report.duplicate_segments.push((i, j));
            }
        }
    }

    for &(i, si) in &segs {
        let (a, b) = d.segment_points(si);
        for (v, &p) in d.vertices.iter().enumerate() {
            if v == si.a || v == si.b {
                continue;
            }
            if orientation(a, b, p).is_collinear() && strictly_between(a, b, p) {
                report.vertex_on_segment.push((v, i));
            }
        }
    }

    for (n, &(i, si)) in segs.iter().enumerate() {
        let (a, b) = d.segment_points(si);
        for &(j, sj) in &segs[n + 1..] {
            if si.a == sj.a || si.a == sj.b || si.b == sj.a || si.b == sj.b {
                continue;
            }
            let (c, e) = d.segment_points(sj);
            let o1 = orientation(a, b, c);
            let o2 = orientation(a, b, e);
            let o3 = orientation(c, e, a);
            let o4 = orientation(c, e, b);
            let opposite = |x: Orientation, y: Orientation| {
                (x == Orientation::Clockwise && y == Orientation::CounterClockwise)
                    || (x == Orientation::CounterClockwise && y == Orientation::Clockwise)
            };
            if opposite(o1, o2) && opposite(o3, o4) {
                report.crossings.push((i, j));
            }
        }
    }

    for (n, &(i, si)) in segs.iter().enumerate() {
        for &(j, sj) in &segs[n + 1..] {
            let shared: Vec<usize> = [si.a, si.b]
                .into_iter()
                .filter(|v| *v == sj.a || *v == sj.b)
                .collect();
            let [vertex] = shared[..] else { continue };
            let other = |s: &Segment| if s.a == vertex { s.b } else { s.a };
            let v = d.vertices[vertex];
            let (u, w) = (d.vertices[other(si)], d.vertices[other(sj)]);
            let dot = (u.x - v.x) * (w.x - v.x) + (u.y - v.y) * (w.y - v.y);
            let norms = v.dist(u) * v.dist(w);
            if norms == 0.0 {
                continue;
            }
            let angle = (dot / norms).clamp(-1.0, 1.0).acos();
            if angle < std::f64::consts::FRAC_PI_2 - tol::ANGLE_TOL_RAD {
                report.sharp_angles.push(SharpAngle {
                    segments: (i, j),
                    vertex,
                    angle_rad: angle,
                });
            }
        }
    }

    let hull = convex_hull(&d.vertices);
    if hull.len() < 3 {
        report.not_two_dimensional = true;
        return report;
    }
    let covered: std::collections::BTreeSet<(usize, usize)> =
        segs.iter().map(|(_, s)| s.key()).collect();
    for k in 0..hull.len() {
        let p = hull[k];
        let q = hull[(k + 1) % hull.len()];
        let (pp, qq) = (d.vertices[p], d.vertices[q]);
        // Vertices on the hull edge split it into stretches that must each
        // be an input segment.
        let mut on_edge: Vec<usize> = (0..d.vertices.len())
            .filter(|&v| {
                v == p
                    || v == q
                    || (orientation(pp, qq, d.vertices[v]).is_collinear()
                        && strictly_between(pp, qq, d.vertices[v]))
            })
            .collect();
        on_edge.sort_by(|&u, &v| {
            let t = |w: usize| {
                (d.vertices[w].x - pp.x) * (qq.x - pp.x) + (d.vertices[w].y - pp.y) * (qq.y - pp.y)
            };
            t(u).total_cmp(&t(v)).then(u.cmp(&v))
        });
        for w in on_edge.windows(2) {
            let key = (w[0].min(w[1]), w[0].max(w[1]));
            if !covered.contains(&key) {
                report.hull_gaps.push(key);
            }
        }
    }
    report
}

/// Strict convex hull (collinear boundary points dropped), counterclockwise,
/// as indices into `points`. Duplicate coordinates collapse to one index.
pub(crate) fn convex_hull(points: &[Point]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&i, &j| points[i].lex_cmp(points[j]).then(i.cmp(&j)));
    idx.dedup_by(|&mut i, &mut j| points[i] == points[j]);
    if idx.len() < 3 {
        return idx;
    }
    let mut hull: Vec<usize> = Vec::with_capacity(idx.len() * 2);
    let build = |order: &mut dyn Iterator<Item = usize>, hull: &mut Vec<usize>| {
        let start = hull.len();
        for i in order {
            while hull.len() >= start + 2 {
                let a = points[hull[hull.len() - 2]];
                let b = points[hull[hull.len() - 1]];
                if orientation(a, b, points[i]) == Orientation::CounterClockwise {
                    break;
                }
                hull.pop();
            }
            hull.push(i);
        }
        hull.pop();
    };
    build(&mut idx.iter().copied(), &mut hull);
    build(&mut idx.iter().rev().copied(), &mut hull);
    if hull.len() < 3 {
        // All points collinear: the two sweeps collapse.
        return hull;
    }
    hull
}

/// Distance from `p` to the closed segment `(a, b)`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.dist(Point::new(a.x + t * dx, a.y + t * dy))
}

/// Input feature of a domain: a vertex or a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Feature {
    Vertex(usize),
    Segment(usize),
}

/// Incidence between features: a vertex is incident to a segment iff it is
/// an endpoint; two segments are incident iff they share an endpoint;
/// distinct vertices are never incident.
fn incident(d: &Pslg, f: Feature, g: Feature) -> bool {
    match (f, g) {
        (Feature::Vertex(i), Feature::Vertex(j)) => i == j,
        (Feature::Vertex(i), Feature::Segment(s)) | (Feature::Segment(s), Feature::Vertex(i)) => {
            let s = &d.all_segments()[s];
            s.a == i || s.b == i
        }
        (Feature::Segment(s), Feature::Segment(t)) => {
            if s == t {
                return true;
            }
            let (s, t) = (&d.all_segments()[s], &d.all_segments()[t]);
            s.a == t.a || s.a == t.b || s.b == t.a || s.b == t.b
        }
    }
}

fn feature_distance(d: &Pslg, x: Point, f: Feature) -> f64 {
    match f {
        Feature::Vertex(i) => x.dist(d.vertices[i]),
        Feature::Segment(s) => {
            let (a, b) = d.segment_points(&d.all_segments()[s]);
            point_segment_distance(x, a, b)
        }
    }
}

/// Local feature size at `x`: the radius of the smallest disk centered at
/// `x` that meets two mutually non-incident features. Equivalently, the
/// minimum over non-incident feature pairs of the larger of their two
/// distances from `x`.
///
/// Requires a geometrically valid domain.
pub fn local_feature_size(d: &Pslg, x: Point) -> Result<f64> {
    let mut feats: Vec<(f64, Feature)> = (0..d.vertices.len())
        .map(Feature::Vertex)
        .chain(d.live_segments().map(|(i, _)| Feature::Segment(i)))
        .map(|f| (feature_distance(d, x, f), f))
        .collect();
    feats.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    // Walking outward by distance, the answer is the first feature not
    // incident to some strictly-nearer-or-tied feature already seen: that
    // pair realizes the minimum of max(d1, d2) over non-incident pairs.
    let mut seen: Vec<Feature> = Vec::new();
    for &(dist, f) in &feats {
        if seen.iter().any(|&g| !incident(d, f, g)) {
            return Ok(dist);
        }
        seen.push(f);
    }
    Err(Error::NoFeaturePair)
}

/// Smallest local feature size over the input vertices.
pub fn min_vertex_lfs(d: &Pslg) -> Result<f64> {
    d.vertices
        .iter()
        .map(|&v| local_feature_size(d, v))
        .try_fold(f64::INFINITY, |acc, r| Ok(acc.min(r?)))
}

fn segment_gap(d: &Pslg, f: Feature, g: Feature) -> f64 {
    match (f, g) {
        (Feature::Vertex(i), Feature::Vertex(j)) => d.vertices[i].dist(d.vertices[j]),
        (Feature::Vertex(i), Feature::Segment(s)) | (Feature::Segment(s), Feature::Vertex(i)) => {
            let (a, b) = d.segment_points(&d.all_segments()[s]);
            point_segment_distance(d.vertices[i], a, b)
        }
        (Feature::Segment(s), Feature::Segment(t)) => {
            let (a, b) = d.segment_points(&d.all_segments()[s]);
            let (c, e) = d.segment_points(&d.all_segments()[t]);
            // Valid domains have non-crossing segments, so endpoint-to-
            // segment distances realize the gap.
            point_segment_distance(a, c, e)
                .min(point_segment_distance(b, c, e))
                .min(point_segment_distance(c, a, b))
                .min(point_segment_distance(e, a, b))
        }
    }
}

/// Smallest local feature size over the whole plane: half the smallest gap
/// between two non-incident features.
pub fn min_domain_lfs(d: &Pslg) -> Result<f64> {
    let feats: Vec<Feature> = (0..d.vertices.len())
        .map(Feature::Vertex)
        .chain(d.live_segments().map(|(i, _)| Feature::Segment(i)))
        .collect();
    let mut best = f64::INFINITY;
    for (n, &f) in feats.iter().enumerate() {
        for &g in &feats[n + 1..] {
            if !incident(d, f, g) {
                best = best.min(segment_gap(d, f, g));
            }
        }
    }
    if best.is_infinite() {
        return Err(Error::NoFeaturePair);
    }
    Ok(best * 0.5)
}

/// Point set on the unit torus; all coordinates in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicPointSet {
    points: Vec<Point>,
}

impl PeriodicPointSet {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidDomain("empty periodic point set".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if !(0.0..1.0).contains(&p.x) || !(0.0..1.0).contains(&p.y) {
                return Err(Error::OutOfRange(format!(
                    "point {i} = ({}, {}) outside [0,1) x [0,1)",
                    p.x, p.y
                )));
            }
        }
        let mut sorted: Vec<usize> = (0..points.len()).collect();
        sorted.sort_by(|&i, &j| points[i].lex_cmp(points[j]).then(i.cmp(&j)));
        for w in sorted.windows(2) {
            if points[w[0]] == points[w[1]] {
                return Err(Error::DuplicateVertex { existing: w[0] });
            }
        }
        Ok(PeriodicPointSet { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Largest pairwise torus distance; zero for a single point.
    pub fn diameter(&self) -> f64 {
        let mut best: f64 = 0.0;
        for (i, &p) in self.points.iter().enumerate() {
            for &q in &self.points[i + 1..] {
                best = best.max(torus_displacement(p, q).1);
            }
        }
        best
    }
}

/// Shortest displacement from `p` to any integer translate of `q`, and its
/// length. Both points must lie in `[0,1)^2`, so translates from
/// `{-1,0,1}^2` suffice. Ties break toward the lexicographically smallest
/// displacement vector.
pub fn torus_displacement(p: Point, q: Point) -> ((f64, f64), f64) {
    let mut best = ((f64::INFINITY, f64::INFINITY), f64::INFINITY);
    for sx in [-1.0, 0.0, 1.0] {
        for sy in [-1.0, 0.0, 1.0] {
            let dx = q.x + sx - p.x;
            let dy = q.y + sy - p.y;
            let dist = (dx * dx + dy * dy).sqrt();
            let better = dist < best.1
                || (dist == best.1
                    && (dx, dy) < (best.0 .0, best.0 .1));
            if better {
                best = ((dx, dy), dist);
            }
        }
    }
    best
}

/// Torus metric distance between two points of `[0,1)^2`.
pub fn torus_distance(p: Point, q: Point) -> f64 {
    torus_displacement(p, q).1
}

/// Domain scale used by round-count bounds; the diameter of the input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainDiameter {
    pub l: f64,
}

impl DomainDiameter {
    pub fn of_pslg(d: &Pslg) -> Self {
        DomainDiameter { l: d.diameter() }
    }

    /// The torus diameter never exceeds sqrt(2) (half the unit square's
    /// period in each axis).
    pub fn of_periodic(p: &PeriodicPointSet) -> Self {
        DomainDiameter { l: p.diameter() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn unit_square() -> Pslg {
        Pslg::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
            ],
            &[[0, 1], [1, 2], [2, 3], [3, 0]],
        )
        .unwrap()
    }

    #[test]
    fn unit_square_is_valid() {
        let report = validate_pslg(&unit_square());
        assert!(report.is_valid(), "{}", report.summary());
    }

    #[test]
    fn sharp_corner_is_reported() {
        // 60-degree wedge at the origin.
        let d = Pslg::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.5, 3f64.sqrt() / 2.0),
            ],
            &[[0, 1], [1, 2], [2, 0]],
        )
        .unwrap();
        let report = validate_pslg(&d);
        assert_eq!(report.sharp_angles.len(), 3, "{}", report.summary());
        let a = report.sharp_angles[0].angle_rad;
        assert!((a - std::f64::consts::FRAC_PI_3).abs() < 1e-12);
    }

    #[test]
    fn crossing_segments_are_reported() {
        let d = Pslg::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
                Point::new(1.0, 0.0),
            ],
            &[[0, 1], [2, 3]],
        )
        .unwrap();
        let report = validate_pslg(&d);
        assert_eq!(report.crossings, vec![(0, 1)]);
    }

    #[test]
    fn vertex_inside_segment_is_reported() {
        let d = Pslg::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(2.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
                Point::new(2.0, 1.0),
            ],
            &[[0, 1], [1, 4], [4, 3], [3, 0]],
        )
        .unwrap();
        let report = validate_pslg(&d);
        assert!(report
            .vertex_on_segment
            .contains(&(2, 0)));
    }

    #[test]
    fn duplicate_vertex_is_reported() {
        let mut sq = unit_square();
        sq.vertices.push(Point::new(1.0, 0.0));
        let report = validate_pslg(&sq);
        assert_eq!(report.duplicate_vertices, vec![(1, 4)]);
    }

    #[test]
    fn uncovered_hull_edge_is_reported() {
        let d = Pslg::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
            ],
            &[[0, 1], [1, 2], [2, 3]],
        )
        .unwrap();
        let report = validate_pslg(&d);
        assert_eq!(report.hull_gaps, vec![(0, 3)]);
    }

    #[test]
    fn collinear_input_is_not_two_dimensional() {
        let d = Pslg::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(2.0, 0.0),
            ],
            &[[0, 1], [1, 2]],
        )
        .unwrap();
        assert!(validate_pslg(&d).not_two_dimensional);
    }

    #[test]
    fn hull_edge_covered_by_collinear_chain_is_accepted() {
        let d = Pslg::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(0.5, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
            ],
            &[[0, 1], [1, 2], [2, 3], [3, 4], [4, 0]],
        )
        .unwrap();
        let report = validate_pslg(&d);
        assert!(report.is_valid(), "{}", report.summary());
    }

    #[test]
    fn lfs_unit_square_center() {
        let d = unit_square();
        let v = local_feature_size(&d, Point::new(0.5, 0.5)).unwrap();
        assert!((v - 0.5).abs() < 1e-15, "got {v}");
    }

    #[test]
    fn lfs_unit_square_corner() {
        // At a corner the triplet {corner, its two segments} is mutually
        // incident; the nearest feature outside it is an opposite vertex or
        // segment at distance 1.
        let d = unit_square();
        let v = local_feature_size(&d, Point::new(0.0, 0.0)).unwrap();
        assert!((v - 1.0).abs() < 1e-15, "got {v}");
    }

    #[test]
    fn lfs_unit_square_edge_midpoint() {
        // The disk of radius 1/2 at (0.5, 0) touches the left and right
        // sides, which share no endpoint, and the two bottom corners, which
        // are distinct vertices; either pair puts the value at 1/2.
        let d = unit_square();
        let v = local_feature_size(&d, Point::new(0.5, 0.0)).unwrap();
        assert!((v - 0.5).abs() < 1e-15, "got {v}");
    }

    #[test]
    fn lfs_single_segment_pairs_its_endpoints() {
        // The two endpoint vertices are disjoint features, so the smallest
        // disk touching both of them gives the value.
        let d = Pslg::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)],
            &[[0, 1]],
        )
        .unwrap();
        let v = local_feature_size(&d, Point::new(0.5, 0.5)).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-15, "got {v}");
    }

    #[test]
    fn lfs_isolated_vertex_has_no_pair() {
        let d = Pslg::new(vec![Point::new(0.0, 0.0)], &[]).unwrap();
        assert_eq!(
            local_feature_size(&d, Point::new(0.5, 0.5)).unwrap_err(),
            Error::NoFeaturePair
        );
    }

    #[test]
    fn min_lfs_values_on_unit_square() {
        let d = unit_square();
        assert!((min_vertex_lfs(&d).unwrap() - 1.0).abs() < 1e-15);
        assert!((min_domain_lfs(&d).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn split_segment_makes_quarter_points() {
        let d = Pslg::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)],
            &[[0, 1]],
        )
        .unwrap();
        let (d, v) = d.split_segment(0).unwrap();
        assert_eq!(d.vertices[v], Point::new(0.5, 0.0));
        assert_eq!(d.live_segment_count(), 2);
        // Split both halves; ids 1 and 2 are the halves.
        let (d, a) = d.split_segment(1).unwrap();
        let (d, b) = d.split_segment(2).unwrap();
        assert_eq!(d.vertices[a], Point::new(0.25, 0.0));
        assert_eq!(d.vertices[b], Point::new(0.75, 0.0));
        for (_, s) in d.live_segments() {
            assert_eq!(s.original, 0);
        }
    }

    #[test]
    fn split_segment_stale_id_errors() {
        let d = unit_square();
        let (d2, _) = d.split_segment(0).unwrap();
        assert_eq!(d2.split_segment(0).unwrap_err(), Error::NoSuchSegment(0));
        assert_eq!(d2.split_segment(99).unwrap_err(), Error::NoSuchSegment(99));
    }

    #[test]
    fn provenance_chain_reaches_input_segment() {
        let mut d = unit_square();
        for _ in 0..4 {
            let id = d.live_segments().next().unwrap().0;
            d = d.split_segment(id).unwrap().0;
        }
        for (_, s) in d.live_segments() {
            let mut cur = s.clone();
            let mut hops = 0;
            while let Some(p) = cur.parent {
                cur = d.all_segments()[p].clone();
                hops += 1;
                assert!(hops <= 8);
            }
            assert_eq!(cur.parent, None);
            assert_eq!(cur.original, s.original);
        }
    }

    #[test]
    fn pslg_diameter_is_max_pairwise_distance() {
        assert!((unit_square().diameter() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn torus_displacement_wraps() {
        let (v, dist) = torus_displacement(Point::new(0.1, 0.5), Point::new(0.9, 0.5));
        assert!((v.0 + 0.2).abs() < 1e-15 && v.1 == 0.0, "got {v:?}");
        assert!((dist - 0.2).abs() < 1e-15);
    }

    #[test]
    fn torus_displacement_identity_and_diagonal() {
        let p = Point::new(0.3, 0.7);
        assert_eq!(torus_displacement(p, p).1, 0.0);
        let d = torus_distance(Point::new(0.25, 0.25), Point::new(0.75, 0.75));
        assert!((d - 0.5f64.sqrt()).abs() < 1e-12, "got {d}");
    }

    #[test]
    fn periodic_point_set_rejects_bad_input() {
        assert!(matches!(
            PeriodicPointSet::new(vec![]),
            Err(Error::InvalidDomain(_))
        ));
        assert!(matches!(
            PeriodicPointSet::new(vec![Point::new(1.0, 0.5)]),
            Err(Error::OutOfRange(_))
        ));
        assert!(matches!(
            PeriodicPointSet::new(vec![Point::new(0.5, 0.5), Point::new(0.5, 0.5)]),
            Err(Error::DuplicateVertex { existing: 0 })
        ));
    }

    #[test]
    fn periodic_diameter_and_domain_diameter() {
        let p = PeriodicPointSet::new(vec![
            Point::new(0.25, 0.25),
            Point::new(0.75, 0.75),
        ])
        .unwrap();
        let l = DomainDiameter::of_periodic(&p).l;
        assert!((l - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(l <= 2f64.sqrt());
    }
}
