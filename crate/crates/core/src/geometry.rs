// SPDX-License-Identifier: MIT OR Apache-2.0

//! Planar geometric primitives and predicates.
//!
//! Sign decisions (`orientation`, `in_circle`) are exact for every finite
//! `f64` input; they delegate to adaptive-precision arithmetic and never
//! return a rounded-off sign. Constructions (`circumcircle`,
//! `diametral_circle`) are evaluated in floating point with compensated
//! determinants, and their consumers compare against the guards in [`crate::tol`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

/// Point in the plane. Coordinates are finite `f64`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist2(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(self, other: Point) -> f64 {
        self.dist2(other).sqrt()
    }

    /// Midpoint of the segment from `self` to `other`.
    pub fn mid(self, other: Point) -> Point {
        Point::new((self.x + other.x) * 0.5, (self.y + other.y) * 0.5)
    }

    /// Lexicographic comparison by (x, y); total over finite coordinates.
    pub fn lex_cmp(self, other: Point) -> std::cmp::Ordering {
        self.x
            .total_cmp(&other.x)
            .then_with(|| self.y.total_cmp(&other.y))
    }

    /// Bit-exact identity key, usable as a hash/ordering key.
    pub fn bits(self) -> (u64, u64) {
        (self.x.to_bits(), self.y.to_bits())
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

fn coord(p: Point) -> robust::Coord<f64> {
    robust::Coord { x: p.x, y: p.y }
}

/// Circle given by center and radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Point, radius: f64) -> Self {
        Circle { center, radius }
    }

    pub fn radius2(self) -> f64 {
        self.radius * self.radius
    }
}

/// Sign of a determinant test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Clockwise,
    Collinear,
    CounterClockwise,
}

impl Orientation {
    pub fn from_det(det: f64) -> Self {
        if det > 0.0 {
            Orientation::CounterClockwise
        } else if det < 0.0 {
            Orientation::Clockwise
        } else {
            Orientation::Collinear
        }
    }

    pub fn is_collinear(self) -> bool {
        self == Orientation::Collinear
    }
}

/// Exact orientation of the triple `(a, b, c)`.
///
/// `CounterClockwise` means `c` lies strictly left of the directed line
/// `a -> b`. The sign is exact for all finite inputs.
pub fn orientation(a: Point, b: Point, c: Point) -> Orientation {
    Orientation::from_det(robust::orient2d(coord(a), coord(b), coord(c)))
}

/// Exact in-circle test.
///
/// Returns `CounterClockwise` when `p` lies strictly inside the circle
/// through `a`, `b`, `c`; `Clockwise` when strictly outside; `Collinear`
/// when exactly on it. The result does not depend on the orientation of
/// `(a, b, c)`. Errors with [`Error::DegenerateTriangle`] when the three
/// points fail to define a circle.
pub fn in_circle(a: Point, b: Point, c: Point, p: Point) -> Result<Orientation> {
    let orient = robust::orient2d(coord(a), coord(b), coord(c));
    if orient == 0.0 {
        return Err(Error::DegenerateTriangle);
    }
    let det = robust::incircle(coord(a), coord(b), coord(c), coord(p));
    Ok(Orientation::from_det(if orient > 0.0 { det } else { -det }))
}

/// In-circle sign assuming `(a, b, c)` is counterclockwise; no degeneracy check.
pub(crate) fn in_circle_raw(a: Point, b: Point, c: Point, p: Point) -> f64 {
    robust::incircle(coord(a), coord(b), coord(c), coord(p))
}

pub(crate) fn orient_raw(a: Point, b: Point, c: Point) -> f64 {
    robust::orient2d(coord(a), coord(b), coord(c))
}

// Compensated (double-word) arithmetic for the circumcenter construction.
// The three determinants in the circumcenter solve suffer catastrophic
// cancellation for skinny triangles; two-term expansions keep the
// construction error near machine precision so the accuracy contract in
// `tol::CIRCUMCIRCLE_REL_ERR` holds through `tol::SKINNY_LIMIT`.
mod dd {
    const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1

    #[derive(Clone, Copy)]
    pub struct Dd {
        pub hi: f64,
        pub lo: f64,
    }

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bv = s - a;
        let av = s - bv;
        (s, (a - av) + (b - bv))
    }

    fn two_diff(a: f64, b: f64) -> (f64, f64) {
        let s = a - b;
        let bv = a - s;
        let av = s + bv;
        (s, (a - av) + (bv - b))
    }

    fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        (s, b - (s - a))
    }

    fn split(a: f64) -> (f64, f64) {
        let c = SPLITTER * a;
        let hi = c - (c - a);
        (hi, a - hi)
    }

    fn two_product(a: f64, b: f64) -> (f64, f64) {
        let p = a * b;
        let (ahi, alo) = split(a);
        let (bhi, blo) = split(b);
        let err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo;
        (p, err)
    }

    impl Dd {
        /// Exact difference of two doubles.
        pub fn diff(a: f64, b: f64) -> Dd {
            let (hi, lo) = two_diff(a, b);
            Dd { hi, lo }
        }

        pub fn add(self, other: Dd) -> Dd {
            let (s, e) = two_sum(self.hi, other.hi);
            let (hi, lo) = quick_two_sum(s, e + self.lo + other.lo);
            Dd { hi, lo }
        }

        pub fn sub(self, other: Dd) -> Dd {
            self.add(Dd {
                hi: -other.hi,
                lo: -other.lo,
            })
        }

        pub fn mul(self, other: Dd) -> Dd {
            let (p, e) = two_product(self.hi, other.hi);
            let e = e + (self.hi * other.lo + self.lo * other.hi) + self.lo * other.lo;
            let (hi, lo) = quick_two_sum(p, e);
            Dd { hi, lo }
        }

        /// Exact scaling by a power of two.
        pub fn scale2(self, k: f64) -> Dd {
            Dd {
                hi: self.hi * k,
                lo: self.lo * k,
            }
        }

        pub fn value(self) -> f64 {
            self.hi + self.lo
        }
    }
}

/// Circumcircle of the triangle `(a, b, c)`.
///
/// The center is accurate to a few ulps even for skinny triangles; the
/// returned radius is consistent with the center to within
/// [`tol::CIRCUMCIRCLE_REL_ERR`] for radius-edge ratios up to
/// [`tol::SKINNY_LIMIT`]. Errors on exactly collinear input.
pub fn circumcircle(a: Point, b: Point, c: Point) -> Result<Circle> {
    if orientation(a, b, c).is_collinear() {
        return Err(Error::DegenerateTriangle);
    }
    use dd::Dd;
    let bx = Dd::diff(b.x, a.x);
    let by = Dd::diff(b.y, a.y);
    let cx = Dd::diff(c.x, a.x);
    let cy = Dd::diff(c.y, a.y);

    let bl = bx.mul(bx).add(by.mul(by));
    let cl = cx.mul(cx).add(cy.mul(cy));
    let det = bx.mul(cy).sub(by.mul(cx)).scale2(2.0);
    let ux = bl.mul(cy).sub(cl.mul(by));
    let uy = cl.mul(bx).sub(bl.mul(cx));

    let d = det.value();
    let ox = ux.value() / d;
    let oy = uy.value() / d;
    let radius = (ox * ox + oy * oy).sqrt();
    Ok(Circle::new(Point::new(a.x + ox, a.y + oy), radius))
}

/// Circle whose diameter is the segment `(a, b)`. Errors when `a == b`.
pub fn diametral_circle(a: Point, b: Point) -> Result<Circle> {
    if a == b {
        return Err(Error::DegenerateSegment);
    }
    let center = a.mid(b);
    Ok(Circle::new(center, a.dist(b) * 0.5))
}

/// Strict-interior test: does `p` lie strictly inside `circle`?
///
/// Points exactly on the boundary do not encroach.
pub fn encroaches(p: Point, circle: &Circle) -> bool {
    p.dist2(circle.center) < circle.radius2()
}

fn inside_guarded(p: Point, circle: &Circle) -> bool {
    let lim = circle.radius * (1.0 - tol::CONFLICT_GUARD);
    p.dist2(circle.center) < lim * lim
}

/// Conflict between two circumcircles: each strictly contains the other's
/// center. Containment must clear the boundary by [`tol::CONFLICT_GUARD`];
/// ties resolve to "independent" (no conflict).
pub fn circles_conflict(a: &Circle, b: &Circle) -> bool {
    inside_guarded(b.center, a) && inside_guarded(a.center, b)
}

/// Conflict between a circumcircle and a diametral circle: the diametral
/// center lies strictly inside the circumcircle and the circumcircle radius
/// is below `sqrt(2)` times the diametral radius. Ties resolve to
/// "independent".
pub fn circumcenter_diametral_conflict(circum: &Circle, diam: &Circle) -> bool {
    inside_guarded(diam.center, circum)
        && circum.radius < std::f64::consts::SQRT_2 * diam.radius * (1.0 - tol::CONFLICT_GUARD)
}

/// Circumradius divided by shortest side. Errors on degenerate triangles.
pub fn radius_edge_ratio(a: Point, b: Point, c: Point) -> Result<f64> {
    let circ = circumcircle(a, b, c)?;
    let shortest = a.dist(b).min(b.dist(c)).min(c.dist(a));
    Ok(circ.radius / shortest)
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: Point = Point::new(0.0, 0.0);
    const B: Point = Point::new(2.0, 0.0);
    const C: Point = Point::new(1.0, 1.0);

    #[test]
    fn orientation_signs() {
        assert_eq!(
            orientation(A, B, C),
            Orientation::CounterClockwise,
            "left turn"
        );
        assert_eq!(orientation(A, C, B), Orientation::Clockwise, "right turn");
        assert_eq!(
            orientation(A, B, Point::new(1.0, 0.0)),
            Orientation::Collinear
        );
    }

    #[test]
    fn orientation_is_exact_near_collinearity() {
        // 2^-60 displacements are far below any float-filter threshold.
        let p = Point::new(0.5, 2f64.powi(-60));
        assert_eq!(
            orientation(A, Point::new(1.0, 0.0), p),
            Orientation::CounterClockwise
        );
        let q = Point::new(0.5, -(2f64.powi(-60)));
        assert_eq!(orientation(A, Point::new(1.0, 0.0), q), Orientation::Clockwise);
    }

    #[test]
    fn in_circle_unit_example() {
        let d_in = Point::new(1.0, 0.5);
        let d_out = Point::new(5.0, 5.0);
        assert_eq!(in_circle(A, B, C, d_in).unwrap(), Orientation::CounterClockwise);
        assert_eq!(in_circle(A, B, C, d_out).unwrap(), Orientation::Clockwise);
        // On-circle: (1, -1) lies on the circle centered (1,0) radius 1.
        assert_eq!(
            in_circle(A, B, C, Point::new(1.0, -1.0)).unwrap(),
            Orientation::Collinear
        );
    }

    #[test]
    fn in_circle_ignores_vertex_order() {
        let p = Point::new(1.0, 0.5);
        assert_eq!(in_circle(A, C, B, p).unwrap(), in_circle(A, B, C, p).unwrap());
    }

    #[test]
    fn in_circle_rejects_collinear_triple() {
        let err = in_circle(A, B, Point::new(1.0, 0.0), C).unwrap_err();
        assert_eq!(err, Error::DegenerateTriangle);
    }

    #[test]
    fn circumcircle_example() {
        let c = circumcircle(A, B, C).unwrap();
        assert_eq!(c.center, Point::new(1.0, 0.0));
        assert_eq!(c.radius, 1.0);
    }

    #[test]
    fn circumcircle_rejects_collinear() {
        assert_eq!(
            circumcircle(A, B, Point::new(4.0, 0.0)).unwrap_err(),
            Error::DegenerateTriangle
        );
    }

    #[test]
    fn diametral_circle_example() {
        let c = diametral_circle(A, Point::new(1.0, 0.0)).unwrap();
        assert_eq!(c.center, Point::new(0.5, 0.0));
        assert_eq!(c.radius, 0.5);
        assert_eq!(
            diametral_circle(A, A).unwrap_err(),
            Error::DegenerateSegment
        );
    }

    #[test]
    fn encroachment_is_strict() {
        let c = diametral_circle(A, Point::new(1.0, 0.0)).unwrap();
        assert!(encroaches(Point::new(0.5, 0.25), &c));
        // Exactly on the boundary: distance^2 and radius^2 are both 0.25.
        assert!(!encroaches(Point::new(0.5, 0.5), &c));
        assert!(!encroaches(Point::new(2.0, 0.0), &c));
    }

    #[test]
    fn conflict_requires_mutual_containment() {
        let c1 = Circle::new(Point::new(0.0, 0.0), 1.0);
        let c2 = Circle::new(Point::new(0.5, 0.0), 1.0);
        let far = Circle::new(Point::new(3.0, 0.0), 1.0);
        let small = Circle::new(Point::new(0.9, 0.0), 0.05);
        assert!(circles_conflict(&c1, &c2));
        assert!(!circles_conflict(&c1, &far));
        // c1 contains small's center, but small does not contain c1's center.
        assert!(!circles_conflict(&c1, &small));
        assert!(circles_conflict(&c2, &c1), "symmetric");
    }

    #[test]
    fn conflict_tie_resolves_independent() {
        // Centers exactly on each other's boundaries.
        let c1 = Circle::new(Point::new(0.0, 0.0), 1.0);
        let c2 = Circle::new(Point::new(1.0, 0.0), 1.0);
        assert!(!circles_conflict(&c1, &c2));
    }

    #[test]
    fn circumcenter_diametral_conflict_needs_radius_band() {
        let diam = Circle::new(Point::new(0.0, 0.0), 1.0);
        let circ_near = Circle::new(Point::new(0.5, 0.0), 1.2);
        assert!(circumcenter_diametral_conflict(&circ_near, &diam));
        // Radius at sqrt(2) times the diametral radius: tie, independent.
        let circ_eq = Circle::new(Point::new(0.5, 0.0), std::f64::consts::SQRT_2);
        assert!(!circumcenter_diametral_conflict(&circ_eq, &diam));
        // Diametral center outside the circumcircle.
        let circ_far = Circle::new(Point::new(2.0, 0.0), 1.0);
        assert!(!circumcenter_diametral_conflict(&circ_far, &diam));
    }

    #[test]
    fn radius_edge_ratio_example() {
        let r = radius_edge_ratio(A, Point::new(1.0, 0.0), Point::new(0.5, 0.05)).unwrap();
        assert!((r - 5.0249378).abs() < 1e-6, "got {r}");
        // Equilateral triangle: ratio 1/sqrt(3).
        let eq = radius_edge_ratio(
            A,
            Point::new(1.0, 0.0),
            Point::new(0.5, 3f64.sqrt() / 2.0),
        )
        .unwrap();
        assert!((eq - 1.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn skinny_circumcircle_stays_consistent() {
        // Flat triangle: ratio around 2.5e3.
        let a = Point::new(0.0, 0.0);
        let b = Point::new(1.0, 0.0);
        let c = Point::new(0.5, 1e-4);
        let circ = circumcircle(a, b, c).unwrap();
        for v in [a, b, c] {
            let err = (circ.center.dist(v) - circ.radius).abs();
            assert!(
                err <= tol::CIRCUMCIRCLE_REL_ERR * circ.radius,
                "err {err} radius {}",
                circ.radius
            );
        }
    }
}
