// SPDX-License-Identifier: MIT OR Apache-2.0

//! Post-run measurement: mesh quality reports, round-count ceilings, and
//! checkers that scan recorded traces for violations of the guarantees the
//! refinement engine is supposed to maintain.
//!
//! Everything here recomputes its answer from the finished [`Mesh`], the
//! recorded [`Trace`], or the input domain. Nothing reaches back into the
//! engine's internal state, so a report disagreeing with the engine is a
//! finding, not a tautology.

use serde::Serialize;

use crate::domain::{local_feature_size, torus_distance, PeriodicPointSet, Pslg};
use crate::error::{Error, Result};
use crate::geometry::{circumcircle, radius_edge_ratio, Point};
use crate::mesh::Mesh;
use crate::triangulation::Mode;
use crate::refine::mis::{conflict_with_metric, ConflictMetric};
use crate::refine::{LfsSample, Trace};
use crate::tol::{LEMMA_CHECK_GUARD, LFS_RATIO_TOL};

/// Diameter of the unit torus: the farthest apart two points can be when
/// coordinates wrap modulo one in each axis.
pub const UNIT_TORUS_DIAMETER: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Shape and size statistics of a finished mesh.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityReport {
    pub triangle_count: usize,
    pub vertex_count: usize,
    /// Smallest corner angle over all triangles, in degrees.
    pub min_angle_deg: f64,
    /// Largest circumradius-to-own-shortest-edge ratio over all triangles.
    pub max_radius_edge_ratio: f64,
    /// Largest circumradius over all triangles.
    pub max_circumradius: f64,
    pub shortest_edge: f64,
    pub longest_edge: f64,
    /// Longest edge divided by shortest edge.
    pub quasi_uniformity: f64,
    /// Range of edge length divided by local feature size at the edge
    /// midpoint, measured against the domain passed to [`quality_report`].
    /// `None` when no domain was supplied.
    pub edge_lfs_range: Option<(f64, f64)>,
}

impl QualityReport {
    /// Flat key-value view for plain-text output.
    pub fn to_kv(&self) -> Vec<(String, String)> {
        let mut kv = vec![
            ("triangle_count".to_string(), self.triangle_count.to_string()),
            ("vertex_count".to_string(), self.vertex_count.to_string()),
            ("min_angle_deg".to_string(), self.min_angle_deg.to_string()),
            (
                "max_radius_edge_ratio".to_string(),
                self.max_radius_edge_ratio.to_string(),
            ),
            ("max_circumradius".to_string(), self.max_circumradius.to_string()),
            ("shortest_edge".to_string(), self.shortest_edge.to_string()),
            ("longest_edge".to_string(), self.longest_edge.to_string()),
            ("quasi_uniformity".to_string(), self.quasi_uniformity.to_string()),
        ];
        if let Some((lo, hi)) = self.edge_lfs_range {
            kv.push(("edge_lfs_min".to_string(), lo.to_string()));
            kv.push(("edge_lfs_max".to_string(), hi.to_string()));
        }
        kv
    }
}

/// Smallest corner angle of the triangle `a`, `b`, `c`, in radians.
fn min_corner_angle(a: Point, b: Point, c: Point) -> f64 {
    let corner = |p: Point, q: Point, r: Point| {
        let (ux, uy) = (q.x - p.x, q.y - p.y);
        let (vx, vy) = (r.x - p.x, r.y - p.y);
        let cross = ux * vy - uy * vx;
        let dot = ux * vx + uy * vy;
        cross.abs().atan2(dot)
    };
    corner(a, b, c).min(corner(b, c, a)).min(corner(c, a, b))
}

/// Measure a finished mesh. Pass the input domain to also profile edge
/// lengths against local feature size; periodic meshes take `None`.
pub fn quality_report(mesh: &Mesh, domain: Option<&Pslg>) -> Result<QualityReport> {
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let mut min_angle = f64::INFINITY;
    let mut max_ratio: f64 = 0.0;
    let mut max_radius: f64 = 0.0;
    for tri in &mesh.triangles {
        let [a, b, c] = mesh.triangle_points(tri);
        min_angle = min_angle.min(min_corner_angle(a, b, c));
        max_ratio = max_ratio.max(radius_edge_ratio(a, b, c)?);
        max_radius = max_radius.max(circumcircle(a, b, c)?.radius);
    }
    let (shortest_edge, longest_edge) = mesh.edge_extremes()?;
    let edge_lfs_range = match domain {
        Some(d) => {
            let profile = edge_lfs_profile(mesh, d)?;
            let lo = profile.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = profile.iter().cloned().fold(0.0, f64::max);
            Some((lo, hi))
        }
        None => None,
    };
    Ok(QualityReport {
        triangle_count: mesh.triangle_count(),
        vertex_count: mesh.vertex_count(),
        min_angle_deg: min_angle.to_degrees(),
        max_radius_edge_ratio: max_ratio,
        max_circumradius: max_radius,
        shortest_edge,
        longest_edge,
        quasi_uniformity: longest_edge / shortest_edge,
        edge_lfs_range,
    })
}

/// Edge length divided by local feature size at the edge midpoint, one entry
/// per mesh edge. Large values flag edges that outgrew the feature scale
/// around them; the profile staying bounded is what graded meshes promise.
pub fn edge_lfs_profile(mesh: &Mesh, domain: &Pslg) -> Result<Vec<f64>> {
    if mesh.mode != Mode::Planar {
        return Err(Error::InvalidDomain(
            "edge feature-size profiles need a planar mesh".to_string(),
        ));
    }
    let mut profile = Vec::new();
    for edge in mesh.edges() {
        let a = mesh.vertices[edge.a];
        let b = mesh.vertices[edge.b];
        let lfs = local_feature_size(domain, a.mid(b))?;
        profile.push(mesh.edge_length(&edge) / lfs);
    }
    Ok(profile)
}

/// A run's round count next to the ceiling its driver promises.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub rounds_used: usize,
    pub ceiling: usize,
    /// Domain diameter the ceiling was computed from.
    pub l: f64,
    /// Smallest feature scale the ceiling was computed from.
    pub s: f64,
    /// Largest live circumradius after each round.
    pub max_radius_series: Vec<f64>,
}

impl BoundReport {
    pub fn within(&self) -> bool {
        self.rounds_used <= self.ceiling
    }

    /// Flat key-value view for plain-text output (series omitted).
    pub fn to_kv(&self) -> Vec<(String, String)> {
        vec![
            ("rounds_used".to_string(), self.rounds_used.to_string()),
            ("round_ceiling".to_string(), self.ceiling.to_string()),
            ("scale_l".to_string(), self.l.to_string()),
            ("scale_s".to_string(), self.s.to_string()),
            ("within_ceiling".to_string(), self.within().to_string()),
        ]
    }
}

fn check_scales(l: f64, s: f64) -> Result<()> {
    if !(l.is_finite() && s.is_finite() && l > 0.0 && s > 0.0) {
        return Err(Error::OutOfRange(format!(
            "round ceilings need positive finite scales, got l = {l}, s = {s}"
        )));
    }
    Ok(())
}

/// `log base (4/3) of l/s`, floored at zero.
fn log_four_thirds(l: f64, s: f64) -> f64 {
    if l <= s {
        return 0.0;
    }
    ((l / s).ln() / (4.0f64 / 3.0).ln()).max(0.0)
}

/// `ceil(log base sqrt(2) of l/s)`, floored at zero.
fn log_sqrt2_ceil(l: f64, s: f64) -> usize {
    if l <= s {
        return 0;
    }
    (2.0 * (l / s).log2()).ceil().max(0.0) as usize
}

/// Round ceiling for parallel circumradius-driven refinement of a periodic
/// point set: `ceil(98 * log_{4/3}(l / s))` with `l` the torus diameter and
/// `s` the closest-pair distance of the input orbits.
///
/// The scales are recomputed here from the input, independent of anything
/// the run recorded.
pub fn chew_pps_bound_report(p: &PeriodicPointSet, trace: &Trace) -> Result<BoundReport> {
    let l = UNIT_TORUS_DIAMETER;
    let pts = p.points();
    let mut s = 1.0f64;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            s = s.min(torus_distance(*a, *b));
        }
    }
    check_scales(l, s)?;
    Ok(BoundReport {
        rounds_used: trace.rounds_used(),
        ceiling: (98.0 * log_four_thirds(l, s)).ceil() as usize,
        l,
        s,
        max_radius_series: trace.max_radius_series(),
    })
}

/// Round ceiling for class-laddered parallel refinement:
/// `ceil(log_sqrt2(l/s)) * (81 + 98 * ceil(log_{4/3}(l/s)))`. The ladder
/// walks one edge class per rung and each rung's inner rounds geometrically
/// shrink the largest circumradius, which is where the two factors come
/// from. Callers supply the scales: domain diameter `l` and the smallest
/// feature scale `s` the run refined toward.
pub fn ruppert_bound_report(l: f64, s: f64, trace: &Trace) -> Result<BoundReport> {
    check_scales(l, s)?;
    let rungs = log_sqrt2_ceil(l, s);
    let per_rung =
        81usize.saturating_add(98usize.saturating_mul(log_four_thirds(l, s).ceil() as usize));
    Ok(BoundReport {
        rounds_used: trace.rounds_used(),
        ceiling: rungs.saturating_mul(per_rung),
        l,
        s,
        max_radius_series: trace.max_radius_series(),
    })
}

/// Check every recorded selection conflict kept radii within a factor of
/// two: `r_dropped / 2 < r_kept < 2 * r_dropped`, with a relative guard for
/// roundoff. Returns one line per violation.
pub fn check_conflict_lemma(trace: &Trace) -> Vec<String> {
    let mut violations = Vec::new();
    for (i, pair) in trace.conflict_pairs.iter().enumerate() {
        let lo = pair.r_dropped / 2.0 * (1.0 - LEMMA_CHECK_GUARD);
        let hi = pair.r_dropped * 2.0 * (1.0 + LEMMA_CHECK_GUARD);
        if !(pair.r_kept > lo && pair.r_kept < hi) {
            violations.push(format!(
                "conflict pair {i}: kept radius {} outside ({}, {}) around dropped radius {}",
                pair.r_kept, lo, hi, pair.r_dropped
            ));
        }
    }
    violations
}

/// Check every recorded encroachment kept the diametral radius at least the
/// blocked circumradius over sqrt(2). Returns one line per violation.
pub fn check_encroach_lemma(trace: &Trace) -> Vec<String> {
    let mut violations = Vec::new();
    for (i, ev) in trace.encroach_events.iter().enumerate() {
        let floor = ev.r_center / std::f64::consts::SQRT_2 * (1.0 - LEMMA_CHECK_GUARD);
        if ev.r_diametral < floor {
            violations.push(format!(
                "encroach event {i}: diametral radius {} below {} (circumradius {})",
                ev.r_diametral, floor, ev.r_center
            ));
        }
    }
    violations
}

/// Check the recorded max-circumradius series shrinks by `factor` across
/// every stretch of `window` rounds. Returns one line per violation; a run
/// shorter than the window passes vacuously.
pub fn check_shrinkage(trace: &Trace, window: usize, factor: f64) -> Vec<String> {
    let series = trace.max_radius_series();
    let mut violations = Vec::new();
    if window == 0 {
        return violations;
    }
    for i in 0..series.len() {
        let j = i + window;
        if j >= series.len() {
            break;
        }
        let cap = factor * series[i] * (1.0 + LEMMA_CHECK_GUARD);
        if series[j] > cap {
            violations.push(format!(
                "rounds {i}..{j}: max circumradius {} did not shrink below {} (from {})",
                series[j], cap, series[i]
            ));
        }
    }
    violations
}

/// Check preprocessing shrank local feature size nowhere by more than a
/// factor of three, and grew it nowhere. Returns one line per violation.
pub fn check_lfs_ratio(samples: &[LfsSample]) -> Vec<String> {
    let mut violations = Vec::new();
    for (i, sample) in samples.iter().enumerate() {
        let hi = sample.lfs_before * (1.0 + LFS_RATIO_TOL);
        let lo = sample.lfs_before / 3.0 * (1.0 - LFS_RATIO_TOL);
        if !(sample.lfs_after <= hi && sample.lfs_after >= lo) {
            violations.push(format!(
                "sample {i} at ({}, {}): feature size went {} -> {}, outside [{}, {}]",
                sample.at.x, sample.at.y, sample.lfs_before, sample.lfs_after, lo, hi
            ));
        }
    }
    violations
}

/// Check every round's inserted set is pairwise independent under the
/// conflict relation the selector used. Returns one line per conflicting
/// pair found.
pub fn check_round_independence(trace: &Trace, periodic: bool) -> Vec<String> {
    let metric = if periodic { ConflictMetric::UnitTorus } else { ConflictMetric::Planar };
    let mut violations = Vec::new();
    for record in &trace.rounds {
        let chosen = &record.chosen_mis;
        for (i, a) in chosen.iter().enumerate() {
            for (j, b) in chosen.iter().enumerate().skip(i + 1) {
                if conflict_with_metric(metric, a, b) {
                    violations.push(format!(
                        "round {}: chosen candidates {i} and {j} conflict (radii {}, {})",
                        record.round_index, a.circle.radius, b.circle.radius
                    ));
                }
            }
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refine::{
        parallel_chew_pps, parallel_ruppert_pslg, ruppert_pslg_domain, seq_refine, ParOptions,
        PickPolicy, QualityRule, RefineDomain, RoundRecord, BETA_MIN,
    };

    fn unit_square() -> Pslg {
        let pts = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        Pslg::new(pts, &[[0, 1], [1, 2], [2, 3], [3, 0]]).expect("square is a valid input")
    }

    fn trace_with_radii(radii: &[f64]) -> Trace {
        let mut trace = Trace::default();
        for (i, r) in radii.iter().enumerate() {
            trace.rounds.push(RoundRecord {
                round_index: i,
                label: None,
                candidate_count: 1,
                chosen_mis: Vec::new(),
                conflict_pairs_observed: 0,
                inserted_count: 1,
                max_circumradius_after: *r,
            });
        }
        trace
    }

    #[test]
    fn quality_report_measures_a_refined_square() {
        let rule = QualityRule::ruppert(BETA_MIN).expect("valid rule");
        let domain = ruppert_pslg_domain(&unit_square()).expect("preprocess");
        let (mesh, _) =
            seq_refine(&RefineDomain::Pslg(domain.clone()), &rule, PickPolicy::SplitsFirst)
                .expect("refine");
        let report = quality_report(&mesh, Some(&domain)).expect("report");
        assert_eq!(report.triangle_count, mesh.triangle_count());
        assert!(report.max_radius_edge_ratio <= BETA_MIN * (1.0 + 1e-12));
        assert!(report.min_angle_deg >= rule.min_angle_deg() - 1e-6);
        assert!(report.shortest_edge > 0.0);
        assert!(report.longest_edge >= report.shortest_edge);
        assert!(report.quasi_uniformity >= 1.0);
        let (lo, hi) = report.edge_lfs_range.expect("planar run profiles feature size");
        assert!(lo > 0.0 && hi >= lo);
        assert!(report.max_circumradius > 0.0);
    }

    #[test]
    fn quality_report_rejects_an_empty_mesh() {
        let mesh = Mesh {
            mode: Mode::Planar,
            vertices: Vec::new(),
            input_vertex_count: 0,
            triangles: Vec::new(),
            subsegments: Vec::new(),
        };
        assert!(matches!(quality_report(&mesh, None), Err(Error::EmptyMesh)));
    }

    #[test]
    fn min_corner_angle_matches_known_triangles() {
        let right = min_corner_angle(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        );
        assert!((right.to_degrees() - 45.0).abs() < 1e-12);
        let equilateral = min_corner_angle(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.5, 3.0f64.sqrt() / 2.0),
        );
        assert!((equilateral.to_degrees() - 60.0).abs() < 1e-9);
    }

    #[test]
    fn chew_ceiling_matches_hand_computation() {
        let p = PeriodicPointSet::new(vec![Point::new(0.0, 0.0), Point::new(0.5, 0.0)])
            .expect("valid orbits");
        let report = chew_pps_bound_report(&p, &Trace::default()).expect("report");
        // l / s = (sqrt(2)/2) / 0.5 = sqrt(2); 98 * log_{4/3}(sqrt(2)) = 118.06...
        assert_eq!(report.ceiling, 119);
        assert!((report.s - 0.5).abs() < 1e-15);
        assert!(report.within());
    }

    #[test]
    fn chew_ceiling_holds_on_a_real_run() {
        let p = PeriodicPointSet::new(vec![Point::new(0.3, 0.3), Point::new(0.34, 0.31)])
            .expect("valid orbits");
        let (_, trace) = parallel_chew_pps(&p, BETA_MIN, &ParOptions::default()).expect("refine");
        let report = chew_pps_bound_report(&p, &trace).expect("report");
        assert!(report.rounds_used > 0);
        assert!(report.within(), "rounds {} over ceiling {}", report.rounds_used, report.ceiling);
    }

    #[test]
    fn ruppert_ceiling_matches_hand_computation() {
        // l / s = 4: ceil(log_sqrt2 4) = 4 rungs, ceil(log_{4/3} 4) = 5.
        let report = ruppert_bound_report(4.0, 1.0, &Trace::default()).expect("report");
        assert_eq!(report.ceiling, 4 * (81 + 98 * 5));
        // Equal scales need no rounds at all.
        let flat = ruppert_bound_report(1.0, 1.0, &Trace::default()).expect("report");
        assert_eq!(flat.ceiling, 0);
        assert!(ruppert_bound_report(1.0, 0.0, &Trace::default()).is_err());
    }

    #[test]
    fn shrinkage_checker_flags_a_stalled_series() {
        let mut radii = vec![1.0; 4];
        radii.extend([0.9, 0.9]);
        let trace = trace_with_radii(&radii);
        // Window 3, factor 3/4: rounds 0..3 stay at 1.0, a violation; rounds
        // 2..5 drop to 0.9, still above 0.75.
        let violations = check_shrinkage(&trace, 3, 0.75);
        assert_eq!(violations.len(), 3);
        let ok = trace_with_radii(&[1.0, 0.8, 0.6, 0.4, 0.2]);
        assert!(check_shrinkage(&ok, 1, 0.85).is_empty());
        assert!(check_shrinkage(&trace, 10, 0.75).is_empty(), "short runs pass vacuously");
    }

    #[test]
    fn conflict_checker_flags_radii_outside_the_band() {
        let mut trace = Trace::default();
        trace.conflict_pairs.push(crate::refine::ConflictPair { r_kept: 1.0, r_dropped: 1.5 });
        trace.conflict_pairs.push(crate::refine::ConflictPair { r_kept: 1.0, r_dropped: 2.5 });
        trace.conflict_pairs.push(crate::refine::ConflictPair { r_kept: 4.0, r_dropped: 1.5 });
        let violations = check_conflict_lemma(&trace);
        assert_eq!(violations.len(), 2);
    }

    #[test]
    fn encroach_checker_flags_small_diametral_radii() {
        let mut trace = Trace::default();
        trace
            .encroach_events
            .push(crate::refine::EncroachEvent { r_center: 1.0, r_diametral: 0.8 });
        trace
            .encroach_events
            .push(crate::refine::EncroachEvent { r_center: 1.0, r_diametral: 0.5 });
        let violations = check_encroach_lemma(&trace);
        assert_eq!(violations.len(), 1);
        assert!(violations[0].contains("event 1"));
    }

    #[test]
    fn lfs_checker_accepts_bounded_shrink_only() {
        let at = Point::new(0.5, 0.5);
        let samples = vec![
            LfsSample { at, lfs_before: 0.9, lfs_after: 0.9 },
            LfsSample { at, lfs_before: 0.9, lfs_after: 0.3 },
            LfsSample { at, lfs_before: 0.9, lfs_after: 0.29 },
            LfsSample { at, lfs_before: 0.9, lfs_after: 1.2 },
        ];
        let violations = check_lfs_ratio(&samples);
        assert_eq!(violations.len(), 2);
    }

    #[test]
    fn round_independence_holds_on_a_real_run() {
        let (_, trace) =
            parallel_ruppert_pslg(&unit_square(), BETA_MIN, &ParOptions::default()).expect("refine");
        assert!(check_round_independence(&trace, false).is_empty());
        assert!(check_conflict_lemma(&trace).is_empty());
        assert!(check_encroach_lemma(&trace).is_empty());
    }

    #[test]
    fn reports_serialize_and_flatten() {
        let report = ruppert_bound_report(4.0, 1.0, &Trace::default()).expect("report");
        let json = serde_json::to_string(&report).expect("serialize");
        assert!(json.contains("\"ceiling\""));
        let kv = report.to_kv();
        assert!(kv.iter().any(|(k, v)| k == "within_ceiling" && v == "true"));
    }
}
