// SPDX-License-Identifier: MIT OR Apache-2.0

//! Deterministic grid-based maximal independent set over candidate circles.
//!
//! Candidates are partitioned by radius class, bucketed on a per-class grid
//! whose cell size matches the class's radius cap, and selected by repeated
//! lexicographic leader election inside 3x3 bucket neighborhoods. The output
//! depends only on the candidate set, not on input order or thread count.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::{circles_conflict, circumcenter_diametral_conflict};
use crate::refine::{Candidate, ConflictPair};

/// Radius class of `r` relative to the scale bound `l`: the unique `h >= 0`
/// with `l / 2^(h+1) < r <= l / 2^h`.
///
/// Errors with [`Error::OutOfRange`] unless `0 < r <= l`.
pub fn radius_class(r: f64, l: f64) -> Result<u32> {
    if !r.is_finite() || !l.is_finite() || r <= 0.0 || l <= 0.0 {
        return Err(Error::OutOfRange(format!(
            "radius class needs finite 0 < r <= l, got r = {r}, l = {l}"
        )));
    }
    if r > l {
        return Err(Error::OutOfRange(format!(
            "radius {r} exceeds the scale bound {l}"
        )));
    }
    let mut h = 0u32;
    // Invariant: r <= l / 2^h. Each step narrows from above; l / 2^(h+1)
    // eventually underflows to 0 < r, so the loop terminates.
    while r <= l / 2f64.powi(h as i32 + 1) {
        h += 1;
    }
    Ok(h)
}

/// Edge class of a length relative to the floor `s`: the unique `i >= 1`
/// with `sqrt(2)^(i-1) * s <= len < sqrt(2)^i * s`.
///
/// Errors with [`Error::BelowFloor`] when `len < s`, and
/// [`Error::OutOfRange`] on non-positive or non-finite input.
pub fn edge_class(len: f64, s: f64) -> Result<u32> {
    if !len.is_finite() || !s.is_finite() || len <= 0.0 || s <= 0.0 {
        return Err(Error::OutOfRange(format!(
            "edge class needs finite positive len and s, got len = {len}, s = {s}"
        )));
    }
    if len < s {
        return Err(Error::BelowFloor { len, floor: s });
    }
    let mut i = 1u32;
    // Invariant: len >= sqrt(2)^(i-1) * s.
    while len >= std::f64::consts::SQRT_2.powi(i as i32) * s {
        i += 1;
    }
    Ok(i)
}

/// Geometry the conflict tests run in. Periodic candidates live on the unit
/// torus, where circles near the seam overlap circles near the far side;
/// their conflicts are evaluated over the nine unit translates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ConflictMetric {
    Planar,
    UnitTorus,
}

/// Conflict predicate for a candidate pair: mutual center containment for
/// same-shape pairs, the asymmetric circumcenter-in-diametral test for mixed
/// pairs.
pub(crate) fn candidates_conflict(a: &Candidate, b: &Candidate) -> bool {
    match (a.kind.is_circumcenter(), b.kind.is_circumcenter()) {
        (true, false) => circumcenter_diametral_conflict(&a.circle, &b.circle),
        (false, true) => circumcenter_diametral_conflict(&b.circle, &a.circle),
        _ => circles_conflict(&a.circle, &b.circle),
    }
}

/// [`candidates_conflict`] under a metric. Mixed kinds never occur on the
/// torus (periodic domains have no subsegments), so only the circle-circle
/// test is translated.
pub(crate) fn conflict_with_metric(metric: ConflictMetric, a: &Candidate, b: &Candidate) -> bool {
    match metric {
        ConflictMetric::Planar => candidates_conflict(a, b),
        ConflictMetric::UnitTorus => {
            debug_assert!(
                a.kind.is_circumcenter() && b.kind.is_circumcenter(),
                "torus candidates are circumcenters"
            );
            unit_translates().any(|(dx, dy)| {
                let moved = crate::geometry::Circle::new(
                    crate::geometry::Point::new(a.circle.center.x + dx, a.circle.center.y + dy),
                    a.circle.radius,
                );
                circles_conflict(&moved, &b.circle)
            })
        }
    }
}

fn unit_translates() -> impl Iterator<Item = (f64, f64)> {
    (-1..=1).flat_map(|dx| (-1..=1).map(move |dy| (dx as f64, dy as f64)))
}

/// Brute-force independence and maximality audit of a selection over planar
/// candidates: quadratic in the candidate count, the reference verifier for
/// [`grid_mis`]. Returns one line per violation; empty means the selection
/// is a maximal independent set of `candidates`.
pub fn brute_check(candidates: &[Candidate], selected: &[usize]) -> Vec<String> {
    brute_check_metric(candidates, selected, ConflictMetric::Planar)
}

/// Brute-force independence and maximality audit under a metric. Returns one
/// line per violation; empty means the selection is an MIS of `candidates`.
pub(crate) fn brute_check_metric(
    candidates: &[Candidate],
    selected: &[usize],
    metric: ConflictMetric,
) -> Vec<String> {
    let mut chosen = vec![false; candidates.len()];
    for &i in selected {
        chosen[i] = true;
    }
    let mut findings = Vec::new();
    for i in 0..candidates.len() {
        for j in (i + 1)..candidates.len() {
            if chosen[i]
                && chosen[j]
                && conflict_with_metric(metric, &candidates[i], &candidates[j])
            {
                findings.push(format!("selected candidates {i} and {j} conflict"));
            }
        }
        if !chosen[i]
            && !(0..candidates.len())
                .any(|j| chosen[j] && conflict_with_metric(metric, &candidates[j], &candidates[i]))
        {
            findings.push(format!(
                "candidate {i} was dropped but conflicts with no selected candidate"
            ));
        }
    }
    findings
}

/// Selection result with the conflicts that were observed while selecting.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MisOutcome {
    /// Indices into the input slice, ascending.
    pub selected: Vec<usize>,
    /// One entry per elimination. Only circumcenter-circumcenter pairs are
    /// recorded; they are the pairs the radius-ratio check applies to.
    pub conflict_pairs: Vec<ConflictPair>,
}

/// Maximal independent set of `candidates` under the conflict predicate.
///
/// Requires every radius to lie in `(0, l]`. The selection is a pure
/// function of the candidate set: permuting the input permutes nothing but
/// the order in which equal decisions are discovered.
pub fn grid_mis(candidates: &[Candidate], l: f64) -> Result<Vec<Candidate>> {
    let outcome = grid_mis_detailed(candidates, l)?;
    Ok(outcome.selected.iter().map(|&i| candidates[i]).collect())
}

/// [`grid_mis`] plus the observed conflict pairs.
pub fn grid_mis_detailed(candidates: &[Candidate], l: f64) -> Result<MisOutcome> {
    grid_mis_metric(candidates, l, ConflictMetric::Planar)
}

pub(crate) fn grid_mis_metric(
    candidates: &[Candidate],
    l: f64,
    metric: ConflictMetric,
) -> Result<MisOutcome> {
    if candidates.is_empty() {
        return Ok(MisOutcome::default());
    }
    let classes: Vec<u32> = candidates
        .iter()
        .map(|c| radius_class(c.circle.radius, l))
        .collect::<Result<_>>()?;

    // Process classes in a fixed global order: even classes ascending, then
    // odd classes ascending. Conflicting circles never differ by more than a
    // factor of two in radius when they come from one triangulation
    // snapshot, so the split keeps adjacent classes in separate phases; the
    // pre-screen below stays correct for arbitrary inputs regardless.
    let mut order: Vec<u32> = classes.clone();
    order.sort_unstable();
    order.dedup();
    let mut phases: Vec<u32> = order.iter().copied().filter(|h| h % 2 == 0).collect();
    phases.extend(order.iter().copied().filter(|h| h % 2 == 1));

    let mut alive = vec![true; candidates.len()];
    let mut selected_flags = vec![false; candidates.len()];
    let mut selected: Vec<usize> = Vec::new();
    let mut pairs: Vec<ConflictPair> = Vec::new();

    // On the torus the realizing translate of any conflict lies in the nine
    // unit offsets, so probing each offset's cell neighborhood sees every
    // wrapped threat.
    let probes: Vec<(f64, f64)> = match metric {
        ConflictMetric::Planar => vec![(0.0, 0.0)],
        ConflictMetric::UnitTorus => unit_translates().collect(),
    };

    for &h in &phases {
        let scale = 2f64.powi(h as i32) / l;
        let cell_at = |x: f64, y: f64| -> (i64, i64) {
            ((x * scale).floor() as i64, (y * scale).floor() as i64)
        };
        let cell = |idx: usize| -> (i64, i64) {
            let c = candidates[idx].circle.center;
            cell_at(c.x, c.y)
        };

        // Everything selected so far, bucketed on this class's grid. A
        // same-shape conflict with a class-h candidate puts the centers
        // closer than the smaller radius, at most one cell; a selected
        // circumcenter conflicting with a class-h midpoint can reach
        // sqrt(2) times the midpoint's radius, up to two cells away. The
        // 5x5 neighborhood around the candidate's cell sees both.
        let mut chosen_grid: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
        for &s in &selected {
            chosen_grid.entry(cell(s)).or_default().push(s);
        }

        let mut members: Vec<usize> = (0..candidates.len())
            .filter(|&i| classes[i] == h && alive[i])
            .collect();
        // Pre-screen against earlier selections.
        members.retain(|&i| {
            let c = candidates[i].circle.center;
            for &(zx, zy) in &probes {
                let (cx, cy) = cell_at(c.x + zx, c.y + zy);
                for dx in -2..=2 {
                    for dy in -2..=2 {
                        if let Some(bucket) = chosen_grid.get(&(cx + dx, cy + dy)) {
                            for &s in bucket {
                                if conflict_with_metric(metric, &candidates[s], &candidates[i]) {
                                    alive[i] = false;
                                    record_pair(&mut pairs, &candidates[s], &candidates[i]);
                                    return false;
                                }
                            }
                        }
                    }
                }
            }
            true
        });

        let mut buckets: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
        for &i in &members {
            buckets.entry(cell(i)).or_default().push(i);
        }
        for bucket in buckets.values_mut() {
            bucket.sort_by(|&a, &b| candidates[a].lex_cmp(&candidates[b]));
        }

        // Nine colors; same-color buckets are two cells apart, farther than
        // any same-class conflict reaches, so election order among them does
        // not matter.
        for color in 0..9i64 {
            let (mx, my) = (color / 3, color % 3);
            let keys: Vec<(i64, i64)> = buckets
                .keys()
                .copied()
                .filter(|&(x, y)| x.rem_euclid(3) == mx && y.rem_euclid(3) == my)
                .collect();
            for key in keys {
                loop {
                    let Some(&leader) = buckets
                        .get(&key)
                        .into_iter()
                        .flatten()
                        .find(|&&i| alive[i] && !selected_flags[i])
                    else {
                        break;
                    };
                    selected_flags[leader] = true;
                    selected.push(leader);
                    chosen_grid.entry(key).or_default().push(leader);
                    let lc = candidates[leader].circle.center;
                    for &(zx, zy) in &probes {
                        let (cx, cy) = cell_at(lc.x + zx, lc.y + zy);
                        for dx in -1..=1 {
                            for dy in -1..=1 {
                                let Some(neighbors) = buckets.get(&(cx + dx, cy + dy)) else {
                                    continue;
                                };
                                for &n in neighbors {
                                    if alive[n]
                                        && !selected_flags[n]
                                        && conflict_with_metric(
                                            metric,
                                            &candidates[leader],
                                            &candidates[n],
                                        )
                                    {
                                        alive[n] = false;
                                        record_pair(
                                            &mut pairs,
                                            &candidates[leader],
                                            &candidates[n],
                                        );
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    selected.sort_unstable();
    Ok(MisOutcome {
        selected,
        conflict_pairs: pairs,
    })
}

pub(crate) fn record_pair(pairs: &mut Vec<ConflictPair>, kept: &Candidate, dropped: &Candidate) {
    if kept.kind.is_circumcenter() && dropped.kind.is_circumcenter() {
        pairs.push(ConflictPair {
            r_kept: kept.circle.radius,
            r_dropped: dropped.circle.radius,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Circle, Point};
    use crate::refine::{CandidateKind, SourceId};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn center_candidate(x: f64, y: f64, r: f64, id: usize) -> Candidate {
        let center = Point::new(x, y);
        Candidate {
            location: center,
            circle: Circle::new(center, r),
            kind: CandidateKind::C,
            source: SourceId::Triangle(id),
            birth_round: 0,
        }
    }

    #[test]
    fn radius_class_brackets() {
        assert_eq!(radius_class(1.0, 1.0).unwrap(), 0);
        assert_eq!(radius_class(0.5, 1.0).unwrap(), 1);
        assert_eq!(radius_class(0.3, 1.0).unwrap(), 1);
        assert_eq!(radius_class(0.25, 1.0).unwrap(), 2);
        assert_eq!(radius_class(1e-300, 1.0).unwrap(), 996);
        assert!(matches!(
            radius_class(1.1, 1.0),
            Err(Error::OutOfRange(_))
        ));
        assert!(matches!(
            radius_class(0.0, 1.0),
            Err(Error::OutOfRange(_))
        ));
        assert!(matches!(
            radius_class(0.5, 0.0),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn radius_class_scales_with_l() {
        assert_eq!(radius_class(1.0, 2.0).unwrap(), 1);
        assert_eq!(radius_class(2.0, 2.0).unwrap(), 0);
        assert_eq!(radius_class(0.6, 2.0).unwrap(), 1);
    }

    #[test]
    fn edge_class_brackets() {
        assert_eq!(edge_class(0.1, 0.1).unwrap(), 1);
        assert_eq!(edge_class(0.15, 0.1).unwrap(), 2);
        assert_eq!(edge_class(0.2, 0.1).unwrap(), 2);
        assert_eq!(edge_class(1.0, 0.1).unwrap(), 7);
        assert!(matches!(
            edge_class(0.05, 0.1),
            Err(Error::BelowFloor { .. })
        ));
        assert!(matches!(edge_class(0.0, 0.1), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn singleton_is_selected() {
        let c = center_candidate(0.25, 0.25, 0.5, 0);
        let out = grid_mis(&[c], 1.0).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0], c);
    }

    #[test]
    fn three_unit_circles_on_a_line() {
        // Middle circle conflicts with both neighbors; the outer pair is
        // independent and maximal.
        let cands = vec![
            center_candidate(0.0, 0.0, 1.0, 0),
            center_candidate(0.8, 0.0, 1.0, 1),
            center_candidate(1.6, 0.0, 1.0, 2),
        ];
        let out = grid_mis(&cands, 2.0).unwrap();
        let xs: Vec<f64> = out.iter().map(|c| c.location.x).collect();
        assert_eq!(xs, vec![0.0, 1.6]);
    }

    #[test]
    fn output_ignores_input_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut cands: Vec<Candidate> = (0..60)
            .map(|i| {
                center_candidate(
                    rng.gen_range(0.0..4.0),
                    rng.gen_range(0.0..4.0),
                    rng.gen_range(0.05..0.4),
                    i,
                )
            })
            .collect();
        let baseline = grid_mis(&cands, 4.0).unwrap();
        let mut baseline_sorted = baseline.clone();
        baseline_sorted.sort_by(|a, b| a.lex_cmp(b));
        for _ in 0..10 {
            cands.shuffle(&mut rng);
            let mut out = grid_mis(&cands, 4.0).unwrap();
            out.sort_by(|a, b| a.lex_cmp(b));
            assert_eq!(out, baseline_sorted);
        }
    }

    #[test]
    fn random_sets_verify_against_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let n = rng.gen_range(1..=120);
            let cands: Vec<Candidate> = (0..n)
                .map(|i| {
                    center_candidate(
                        rng.gen_range(0.0..1.0),
                        rng.gen_range(0.0..1.0),
                        rng.gen_range(0.01..0.25),
                        i,
                    )
                })
                .collect();
            let out = grid_mis_detailed(&cands, 1.0).unwrap();
            let chosen: Vec<bool> = {
                let mut v = vec![false; cands.len()];
                for &i in &out.selected {
                    v[i] = true;
                }
                v
            };
            for i in 0..cands.len() {
                for j in (i + 1)..cands.len() {
                    if chosen[i] && chosen[j] {
                        assert!(
                            !candidates_conflict(&cands[i], &cands[j]),
                            "selected pair {i},{j} conflicts"
                        );
                    }
                }
                if !chosen[i] {
                    assert!(
                        (0..cands.len())
                            .any(|j| chosen[j] && candidates_conflict(&cands[j], &cands[i])),
                        "dropped candidate {i} conflicts with no selection"
                    );
                }
            }
        }
    }

    #[test]
    fn torus_metric_sees_across_the_seam() {
        // Centers 0.1 apart through the seam, 0.9 apart in the plane.
        let cands = vec![
            center_candidate(0.05, 0.5, 0.2, 0),
            center_candidate(0.95, 0.5, 0.2, 1),
        ];
        let planar = grid_mis_metric(&cands, 1.0, ConflictMetric::Planar).unwrap();
        assert_eq!(planar.selected.len(), 2);
        let torus = grid_mis_metric(&cands, 1.0, ConflictMetric::UnitTorus).unwrap();
        assert_eq!(torus.selected.len(), 1);
        assert_eq!(torus.conflict_pairs.len(), 1);
        assert!(brute_check_metric(&cands, &torus.selected, ConflictMetric::UnitTorus).is_empty());
    }

    #[test]
    fn cross_class_conflicts_are_respected() {
        // Big circle (class 0) swallowing a small one (class 4): radii far
        // apart, still mutually containing, must not both be selected.
        let cands = vec![
            center_candidate(0.5, 0.5, 1.0, 0),
            center_candidate(0.52, 0.5, 0.05, 1),
        ];
        let out = grid_mis(&cands, 1.0).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].circle.radius, 1.0);
    }
}
