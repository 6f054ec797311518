// SPDX-License-Identifier: MIT OR Apache-2.0

//! Sequential refinement driver, pure candidate classification, and log
//! replay.
//!
//! [`seq_refine`] runs the one-insertion-at-a-time loop to completion and
//! returns the mesh together with the full insertion log. [`replay`] runs a
//! log (from any driver) against a fresh state, checking each entry for
//! validity at its own step; a parallel schedule is sequentializable exactly
//! when its flattened log replays without error. [`classify_candidates`] is
//! an independent full-scan implementation of the candidate taxonomy used by
//! tests to cross-check the incremental state.

use std::collections::BTreeSet;

use crate::domain::Pslg;
use crate::error::{Error, Result};
use crate::geometry::{circumcircle, diametral_circle, encroaches, Circle};
use crate::mesh::Mesh;
use crate::triangulation::Triangulation;

use super::state::{canonical_corner_points, RefineState};
use super::{
    Candidate, CandidateKind, InsertionLog, PickPolicy, QualityRule, RefineDomain, RuleKind,
    SourceId,
};

/// The four candidate sets of one refinement snapshot, each sorted by
/// source id.
#[derive(Debug, Clone, Default)]
pub struct CandidateSets {
    /// Circumcenters of poor triangles that encroach no subsegment.
    pub insertable: Vec<Candidate>,
    /// Circumcenters of poor triangles blocked by at least one subsegment.
    pub blocked: Vec<Candidate>,
    /// Midpoints of subsegments with a mesh vertex inside the diametral
    /// circle.
    pub vertex_splits: Vec<Candidate>,
    /// Midpoints forced by blocked circumcenters, past or present.
    pub center_splits: Vec<Candidate>,
}

impl CandidateSets {
    pub fn is_empty(&self) -> bool {
        self.insertable.is_empty()
            && self.blocked.is_empty()
            && self.vertex_splits.is_empty()
            && self.center_splits.is_empty()
    }

    pub fn len(&self) -> usize {
        self.insertable.len()
            + self.blocked.len()
            + self.vertex_splits.len()
            + self.center_splits.len()
    }
}

/// Circumcircle and shortest edge of a live triangle, recomputed from the
/// canonically rotated corners.
fn triangle_metrics(tri: &Triangulation, slot: usize) -> (Circle, f64) {
    let pts = canonical_corner_points(tri, slot);
    let circle =
        circumcircle(pts[0], pts[1], pts[2]).expect("live triangles are never collinear");
    let min_edge = pts[0]
        .dist(pts[1])
        .min(pts[1].dist(pts[2]))
        .min(pts[2].dist(pts[0]));
    (circle, min_edge)
}

/// Whether a live triangle violates the quality rule: circumradius over its
/// own shortest edge for the local rule, over the global shortest edge for
/// the global rule.
pub fn is_poor(tri: &Triangulation, slot: usize, rule: &QualityRule) -> bool {
    let (circle, min_edge) = triangle_metrics(tri, slot);
    match rule.kind() {
        RuleKind::Ruppert => circle.radius / min_edge > rule.beta(),
        RuleKind::Chew => circle.radius / tri.shortest_edge() > rule.beta(),
    }
}

/// Classifies every current candidate by a full scan of the triangulation
/// against the domain's live segments.
///
/// `domain` must describe the subsegments of the same run `tri` came from:
/// segment endpoint ids index triangulation vertices with identical
/// coordinates. `carried` holds ids of live segments whose midpoints were
/// forced by blocked circumcenters earlier; they stay candidates until
/// split, so they are folded into the result alongside midpoints forced by
/// the blocked circumcenters visible right now.
pub fn classify_candidates(
    tri: &Triangulation,
    domain: &Pslg,
    rule: &QualityRule,
    carried: &BTreeSet<usize>,
    birth_round: usize,
) -> Result<CandidateSets> {
    let mut subs: Vec<(usize, Circle)> = Vec::with_capacity(domain.live_segment_count());
    for (id, seg) in domain.live_segments() {
        let (a, b) = domain.segment_points(seg);
        subs.push((id, diametral_circle(a, b)?));
    }

    let mut sets = CandidateSets::default();
    let mut forced: BTreeSet<usize> = carried.clone();

    for slot in tri.triangles() {
        if !is_poor(tri, slot, rule) {
            continue;
        }
        let (circle, _) = triangle_metrics(tri, slot);
        let mut blocked = false;
        for &(id, diam) in &subs {
            if encroaches(circle.center, &diam) {
                blocked = true;
                forced.insert(id);
            }
        }
        let kind = if blocked {
            CandidateKind::B
        } else {
            CandidateKind::C
        };
        let cand = Candidate {
            location: circle.center,
            circle,
            kind,
            source: SourceId::Triangle(slot),
            birth_round,
        };
        if blocked {
            sets.blocked.push(cand);
        } else {
            sets.insertable.push(cand);
        }
    }

    for &(id, diam) in &subs {
        let seg = domain.segment(id).expect("listed segment is live");
        let (a, b) = domain.segment_points(seg);
        let encroached = (0..tri.vertex_count()).any(|v| {
            let p = tri.vertex_point(v);
            p.bits() != a.bits() && p.bits() != b.bits() && encroaches(p, &diam)
        });
        if encroached {
            sets.vertex_splits.push(Candidate {
                location: diam.center,
                circle: diam,
                kind: CandidateKind::Dt,
                source: SourceId::Segment(id),
                birth_round,
            });
        }
    }

    for &id in &forced {
        let diam = subs
            .binary_search_by_key(&id, |&(i, _)| i)
            .map(|k| subs[k].1)
            .map_err(|_| Error::NoSuchSegment(id))?;
        sets.center_splits.push(Candidate {
            location: diam.center,
            circle: diam,
            kind: CandidateKind::Db,
            source: SourceId::Segment(id),
            birth_round,
        });
    }

    sets.insertable.sort_by_key(|c| c.source);
    sets.blocked.sort_by_key(|c| c.source);
    sets.vertex_splits.sort_by_key(|c| c.source);
    Ok(sets)
}

/// Runs refinement one insertion at a time until no poor triangle and no
/// vertex-encroached subsegment remains.
///
/// The pick order is fixed: vertex-forced midpoints first, then midpoints
/// forced by blocked circumcenters, then insertable circumcenters, each
/// queue by descending radius. Returns the final mesh and the complete
/// insertion log.
pub fn seq_refine(
    domain: &RefineDomain,
    rule: &QualityRule,
    policy: PickPolicy,
) -> Result<(Mesh, InsertionLog)> {
    match policy {
        PickPolicy::SplitsFirst => {}
    }
    let mut state = RefineState::new(domain, *rule)?;
    while state.has_work() {
        let (kind, id) = state
            .best()
            .expect("a queue is nonempty while work remains");
        let cand = state.materialize(kind, id, state.iteration());
        state.apply(&cand)?;
    }
    state.assert_done()?;
    let log = state.log.clone();
    Ok((state.extract_mesh(), log))
}

/// Re-executes an insertion log against a fresh state, verifying that every
/// entry is a valid candidate at its own step.
///
/// Validity is checked against the state's live candidate sets, not against
/// the sequential pick order, so any interleaving of independent insertions
/// that reaches each entry with its source intact replays cleanly.
/// Violations surface as [`Error::NotSequentializable`] with the failing
/// step.
pub fn replay(domain: &RefineDomain, rule: &QualityRule, log: &InsertionLog) -> Result<Mesh> {
    let mut state = RefineState::new(domain, *rule)?;
    for (step, entry) in log.entries.iter().enumerate() {
        let cand = &entry.candidate;
        if cand.location.bits() != cand.circle.center.bits() {
            return Err(Error::NotSequentializable {
                step,
                reason: "candidate location differs from its circle center".into(),
            });
        }
        let own = match cand.kind {
            CandidateKind::B => {
                return Err(Error::NotSequentializable {
                    step,
                    reason: "blocked circumcenters are never inserted".into(),
                });
            }
            CandidateKind::C => {
                let Some(slot) = state.find_c(&cand.circle) else {
                    return Err(Error::NotSequentializable {
                        step,
                        reason: format!(
                            "no insertable circumcenter at ({}, {}) with radius {}",
                            cand.location.x, cand.location.y, cand.circle.radius
                        ),
                    });
                };
                Candidate {
                    source: SourceId::Triangle(slot),
                    ..*cand
                }
            }
            CandidateKind::Dt | CandidateKind::Db => {
                let Some(id) = state.sub_at_mid(cand.location.bits()) else {
                    return Err(Error::NotSequentializable {
                        step,
                        reason: format!(
                            "no live subsegment with midpoint ({}, {})",
                            cand.location.x, cand.location.y
                        ),
                    });
                };
                let diam = state.sub_diam(id);
                if diam.radius.to_bits() != cand.circle.radius.to_bits() {
                    return Err(Error::NotSequentializable {
                        step,
                        reason: format!(
                            "radius mismatch at subsegment {id}: log has {}, state has {}",
                            cand.circle.radius, diam.radius
                        ),
                    });
                }
                if cand.kind == CandidateKind::Dt && !state.sub_encroached(id) {
                    return Err(Error::NotSequentializable {
                        step,
                        reason: format!("subsegment {id} has no vertex in its diametral circle"),
                    });
                }
                if cand.kind == CandidateKind::Db && !state.sub_carried(id) {
                    return Err(Error::NotSequentializable {
                        step,
                        reason: format!(
                            "midpoint of subsegment {id} was never forced by a blocked circumcenter"
                        ),
                    });
                }
                Candidate {
                    source: SourceId::Segment(id),
                    ..*cand
                }
            }
        };
        state.apply(&own)?;
    }
    Ok(state.extract_mesh())
}
