// SPDX-License-Identifier: MIT OR Apache-2.0

//! Named input domains used by the test suite, the benchmarks, and the
//! acceptance runs. Every planar fixture keeps adjacent segments at ninety
//! degrees or more and fences its convex hull, so each one is a legal
//! refinement input as handed out. Randomized fixtures draw from a fixed
//! seed and are identical on every call.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{torus_distance, PeriodicPointSet, Pslg};
use crate::geometry::Point;

const FIXTURE_SEED: u64 = 0xf1c5_0de5;

fn square_with(mut extra_vertices: Vec<Point>, extra_segments: &[[usize; 2]]) -> Pslg {
    let mut vertices = vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(1.0, 1.0),
        Point::new(0.0, 1.0),
    ];
    vertices.append(&mut extra_vertices);
    let mut segments = vec![[0, 1], [1, 2], [2, 3], [3, 0]];
    segments.extend_from_slice(extra_segments);
    Pslg::new(vertices, &segments).expect("fixture construction is static")
}

/// The unit square, boundary only.
pub fn unit_square() -> Pslg {
    square_with(Vec::new(), &[])
}

/// Unit square with a free vertex at its center.
pub fn square_center_vertex() -> Pslg {
    square_with(vec![Point::new(0.5, 0.5)], &[])
}

/// Unit square with a free vertex near the bottom edge, forcing grading
/// between the close boundary and the far one.
pub fn square_offset_vertex() -> Pslg {
    square_with(vec![Point::new(0.5, 0.1)], &[])
}

/// Unit square with a short interior segment (length 0.04) pinning a small
/// feature scale in the middle.
pub fn square_short_segment() -> Pslg {
    square_with(vec![Point::new(0.48, 0.5), Point::new(0.52, 0.5)], &[[4, 5]])
}

/// Unit square with a concentric inner square (side 0.4) of segments.
pub fn nested_frame() -> Pslg {
    square_with(
        vec![
            Point::new(0.3, 0.3),
            Point::new(0.7, 0.3),
            Point::new(0.7, 0.7),
            Point::new(0.3, 0.7),
        ],
        &[[4, 5], [5, 6], [6, 7], [7, 4]],
    )
}

/// Unit square with two interior segments joined at a right angle.
pub fn square_interior_l() -> Pslg {
    square_with(
        vec![Point::new(0.3, 0.3), Point::new(0.7, 0.3), Point::new(0.3, 0.7)],
        &[[4, 5], [4, 6]],
    )
}

/// Unit square with four interior spokes meeting at the center, adjacent
/// spokes at right angles.
pub fn square_interior_star() -> Pslg {
    square_with(
        vec![
            Point::new(0.5, 0.5),
            Point::new(0.8, 0.5),
            Point::new(0.5, 0.8),
            Point::new(0.2, 0.5),
            Point::new(0.5, 0.2),
        ],
        &[[4, 5], [4, 6], [4, 7], [4, 8]],
    )
}

/// Thin 1 x 0.2 rectangle with an interior wall along its midline.
pub fn rect_with_wall() -> Pslg {
    let vertices = vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(1.0, 0.2),
        Point::new(0.0, 0.2),
        Point::new(0.3, 0.1),
        Point::new(0.7, 0.1),
    ];
    Pslg::new(vertices, &[[0, 1], [1, 2], [2, 3], [3, 0], [4, 5]])
        .expect("fixture construction is static")
}

/// Unit square with three parallel interior teeth.
pub fn comb() -> Pslg {
    square_with(
        vec![
            Point::new(0.3, 0.2),
            Point::new(0.3, 0.8),
            Point::new(0.5, 0.2),
            Point::new(0.5, 0.8),
            Point::new(0.7, 0.2),
            Point::new(0.7, 0.8),
        ],
        &[[4, 5], [6, 7], [8, 9]],
    )
}

/// Unit square with twelve seeded free vertices, pairwise at least 0.08
/// apart and at least 0.1 from the boundary.
pub fn seeded_square() -> Pslg {
    let mut rng = ChaCha8Rng::seed_from_u64(FIXTURE_SEED);
    let mut placed: Vec<Point> = Vec::new();
    while placed.len() < 12 {
        let p = Point::new(rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9));
        if placed.iter().all(|q| q.dist(p) >= 0.08) {
            placed.push(p);
        }
    }
    square_with(placed, &[])
}

/// The ten-domain planar corpus, each with a stable name.
pub fn pslg_corpus() -> Vec<(&'static str, Pslg)> {
    vec![
        ("unit_square", unit_square()),
        ("square_center_vertex", square_center_vertex()),
        ("square_offset_vertex", square_offset_vertex()),
        ("square_short_segment", square_short_segment()),
        ("nested_frame", nested_frame()),
        ("square_interior_l", square_interior_l()),
        ("square_interior_star", square_interior_star()),
        ("rect_with_wall", rect_with_wall()),
        ("comb", comb()),
        ("seeded_square", seeded_square()),
    ]
}

/// Unit square with one short segment (length 0.05) near a corner. The
/// feature scale varies by a factor of twenty across the domain, so rules
/// that grade toward local feature size produce far fewer elements here
/// than rules that refine toward the global minimum edge.
pub fn graded_square() -> Pslg {
    square_with(vec![Point::new(0.2, 0.2), Point::new(0.25, 0.2)], &[[4, 5]])
}

/// Unit square with a row of free vertices whose gaps grow geometrically
/// from `eps` by a factor of sqrt(2), so every edge-length scale between
/// `eps` and the domain size carries a feature. Shrinking `eps` stretches
/// the ratio of domain diameter to smallest feature scale while keeping
/// refinement work at every intermediate scale.
pub fn shrinking_square(eps: f64) -> Pslg {
    assert!(eps > 0.0 && eps <= 0.1, "smallest gap {eps} out of range");
    let mut pts = vec![Point::new(0.1, 0.5)];
    let mut x = 0.1;
    let mut gap = eps;
    while x + gap <= 0.9 {
        x += gap;
        pts.push(Point::new(x, 0.5));
        gap *= std::f64::consts::SQRT_2;
    }
    square_with(pts, &[])
}

/// One orbit: the triangulation is the flat lattice and nothing is poor.
pub fn periodic_single() -> PeriodicPointSet {
    PeriodicPointSet::new(vec![Point::new(0.5, 0.5)]).expect("fixture construction is static")
}

/// Two orbits much closer than the lattice spacing, forcing real work.
pub fn periodic_pair() -> PeriodicPointSet {
    PeriodicPointSet::new(vec![Point::new(0.3, 0.3), Point::new(0.34, 0.31)])
        .expect("fixture construction is static")
}

/// Twenty seeded orbits, pairwise at least 0.05 apart on the torus.
pub fn periodic_uniform_20() -> PeriodicPointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(FIXTURE_SEED ^ 0x20);
    let mut placed: Vec<Point> = Vec::new();
    while placed.len() < 20 {
        let p = Point::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        if placed.iter().all(|q| torus_distance(*q, p) >= 0.05) {
            placed.push(p);
        }
    }
    PeriodicPointSet::new(placed).expect("fixture construction is static")
}

/// A tight cluster of four orbits plus four spread far from it.
pub fn periodic_clustered() -> PeriodicPointSet {
    PeriodicPointSet::new(vec![
        Point::new(0.50, 0.50),
        Point::new(0.53, 0.50),
        Point::new(0.50, 0.53),
        Point::new(0.52, 0.52),
        Point::new(0.05, 0.05),
        Point::new(0.95, 0.10),
        Point::new(0.10, 0.90),
        Point::new(0.90, 0.95),
    ])
    .expect("fixture construction is static")
}

/// A 4 x 4 lattice with each orbit jittered by up to 0.02 per axis.
pub fn periodic_perturbed_lattice() -> PeriodicPointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(FIXTURE_SEED ^ 0x44);
    let mut points = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            let x = (i as f64 + 0.5) / 4.0 + rng.gen_range(-0.02..0.02);
            let y = (j as f64 + 0.5) / 4.0 + rng.gen_range(-0.02..0.02);
            points.push(Point::new(x.rem_euclid(1.0), y.rem_euclid(1.0)));
        }
    }
    PeriodicPointSet::new(points).expect("fixture construction is static")
}

/// The periodic corpus, each with a stable name.
pub fn periodic_corpus() -> Vec<(&'static str, PeriodicPointSet)> {
    vec![
        ("periodic_single", periodic_single()),
        ("periodic_pair", periodic_pair()),
        ("periodic_uniform_20", periodic_uniform_20()),
        ("periodic_clustered", periodic_clustered()),
        ("periodic_perturbed_lattice", periodic_perturbed_lattice()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{min_domain_lfs, validate_pslg};

    #[test]
    fn corpus_has_ten_valid_uniquely_named_domains() {
        let corpus = pslg_corpus();
        assert_eq!(corpus.len(), 10);
        let mut names: Vec<&str> = corpus.iter().map(|(n, _)| *n).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 10);
        for (name, d) in &corpus {
            let report = validate_pslg(d);
            assert!(report.is_valid(), "{name}: {}", report.summary());
        }
    }

    #[test]
    fn extra_domains_are_valid_too() {
        for (name, d) in [
            ("graded_square", graded_square()),
            ("shrinking_square(0.1)", shrinking_square(0.1)),
            ("shrinking_square(0.01)", shrinking_square(0.01)),
            ("shrinking_square(0.001)", shrinking_square(0.001)),
        ] {
            let report = validate_pslg(&d);
            assert!(report.is_valid(), "{name}: {}", report.summary());
        }
    }

    #[test]
    fn seeded_fixtures_are_deterministic() {
        assert_eq!(seeded_square(), seeded_square());
        assert_eq!(periodic_uniform_20(), periodic_uniform_20());
        assert_eq!(periodic_perturbed_lattice(), periodic_perturbed_lattice());
    }

    #[test]
    fn shrinking_square_sets_the_feature_scale() {
        for eps in [0.1, 0.01, 0.001] {
            let lfs = min_domain_lfs(&shrinking_square(eps)).expect("feature size");
            let expected = eps / 2.0;
            assert!(
                (lfs - expected).abs() <= expected * 1e-9,
                "eps {eps}: smallest feature scale {lfs}, expected {expected}"
            );
        }
    }

    #[test]
    fn periodic_corpus_has_five_separated_domains() {
        let corpus = periodic_corpus();
        assert_eq!(corpus.len(), 5);
        for (name, p) in &corpus {
            let pts = p.points();
            for (i, a) in pts.iter().enumerate() {
                for b in &pts[i + 1..] {
                    assert!(torus_distance(*a, *b) > 0.0, "{name} has coincident orbits");
                }
            }
        }
    }

    #[test]
    fn uniform_orbits_keep_their_spacing() {
        let p = periodic_uniform_20();
        let pts = p.points();
        assert_eq!(pts.len(), 20);
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                assert!(torus_distance(*a, *b) >= 0.05);
            }
        }
    }
}
