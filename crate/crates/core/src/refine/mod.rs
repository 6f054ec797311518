// SPDX-License-Identifier: MIT OR Apache-2.0

//! Delaunay refinement: sequential and round-based parallel drivers.
//!
//! The submodules share a small vocabulary defined here:
//!
//! * [`QualityRule`] says which triangles are poor (radius-edge ratio for
//!   Ruppert, circumradius over global shortest edge for Chew).
//! * [`Candidate`] is a point that refinement may insert, tagged with the
//!   circle that justifies it and the kind of event that produced it.
//! * [`Trace`] records everything a parallel run did: per-round records,
//!   the flattened insertion log, and the conflict/encroachment events the
//!   analysis checkers consume.

use serde::{Deserialize, Serialize};

use crate::domain::{PeriodicPointSet, Pslg};
use crate::error::{Error, Result};
use crate::geometry::{Circle, Point};
use crate::tol::BETA_FLOOR_TOL;

pub mod mis;
pub mod par;
pub mod preprocess;
pub mod seq;

pub(crate) mod state;

pub use mis::{brute_check, edge_class, grid_mis, grid_mis_detailed, radius_class, MisOutcome};
pub use par::{
    chew_pslg_domain, parallel_chew_pps, parallel_chew_pslg, parallel_generic_pps,
    parallel_generic_pslg, parallel_ruppert_pps, parallel_ruppert_pslg, ruppert_pslg_domain,
    FEATURE_CONFORMING_ALPHA,
};
pub use preprocess::{
    is_feature_conforming, is_strongly_conforming, preprocess_boundary,
    preprocess_feature_conforming,
};
pub use seq::{classify_candidates, is_poor, replay, seq_refine, CandidateSets};

/// Smallest admissible ratio bound. Below this the refinement loops are not
/// guaranteed to terminate.
pub const BETA_MIN: f64 = std::f64::consts::SQRT_2;

/// Which measure decides that a triangle is poor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleKind {
    /// Circumradius over the triangle's own shortest edge.
    Ruppert,
    /// Circumradius over the shortest edge of the whole current mesh.
    Chew,
}

/// A quality rule: the measure kind plus the bound `beta`.
///
/// A triangle is poor when its measure strictly exceeds `beta`. Construction
/// rejects `beta` below [`BETA_MIN`] (minus a small tolerance so that decimal
/// spellings of sqrt(2) on a command line are accepted).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityRule {
    kind: RuleKind,
    beta: f64,
}

impl QualityRule {
    pub fn new(kind: RuleKind, beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta < BETA_MIN - BETA_FLOOR_TOL {
            return Err(Error::OutOfRange(format!(
                "beta must be a finite value >= sqrt(2) ~ {BETA_MIN:.8}, got {beta}"
            )));
        }
        Ok(QualityRule { kind, beta })
    }

    pub fn ruppert(beta: f64) -> Result<Self> {
        Self::new(RuleKind::Ruppert, beta)
    }

    pub fn chew(beta: f64) -> Result<Self> {
        Self::new(RuleKind::Chew, beta)
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Lower bound on the smallest angle implied by the ratio bound, in
    /// degrees: `arcsin(1 / (2 beta))`.
    pub fn min_angle_deg(&self) -> f64 {
        (1.0 / (2.0 * self.beta)).asin().to_degrees()
    }
}

/// What kind of event produced a candidate.
///
/// The variant order doubles as the tie-break order in leader election and in
/// the sequential picker, so it is semantic: midpoints forced by an existing
/// vertex outrank midpoints forced by a blocked circumcenter, which outrank
/// free circumcenters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CandidateKind {
    /// Midpoint of a subsegment whose diametral circle strictly contains a
    /// mesh vertex.
    Dt,
    /// Midpoint of a subsegment whose diametral circle is encroached by the
    /// circumcenter of a poor triangle. Once derived, such a midpoint stays
    /// live until its subsegment is split.
    Db,
    /// Circumcenter of a poor triangle that encroaches no subsegment.
    C,
    /// Circumcenter of a poor triangle that encroaches at least one
    /// subsegment. Blocked candidates are never inserted; they exist to
    /// derive `Db` midpoints and to take part in independence.
    B,
}

impl CandidateKind {
    /// True for circumcenter kinds, false for midpoint kinds. Decides which
    /// conflict predicate applies to a pair.
    pub fn is_circumcenter(self) -> bool {
        matches!(self, CandidateKind::C | CandidateKind::B)
    }
}

/// Which mesh entity produced a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SourceId {
    /// Triangle handle in the triangulation the candidate was derived from.
    Triangle(usize),
    /// Subsegment id in the refinement state's subsegment store.
    Segment(usize),
}

/// A point that refinement may insert.
///
/// `location` always equals `circle.center`: circumcenter for the center
/// kinds, subsegment midpoint (= diametral-circle center) for the split
/// kinds. `(kind, source)` is unique within one classification snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub location: Point,
    pub circle: Circle,
    pub kind: CandidateKind,
    pub source: SourceId,
    /// Round (parallel) or iteration (sequential) that produced the
    /// candidate.
    pub birth_round: usize,
}

impl Candidate {
    /// Ordering used by leader election and by deterministic set output:
    /// location, then radius, then kind, then source.
    pub fn lex_cmp(&self, other: &Candidate) -> std::cmp::Ordering {
        self.location
            .lex_cmp(other.location)
            .then(self.circle.radius.total_cmp(&other.circle.radius))
            .then(self.kind.cmp(&other.kind))
            .then(self.source.cmp(&other.source))
    }

    /// Ordering used for insertion within a round: larger radius first, then
    /// location, then kind, then source.
    pub fn insertion_cmp(&self, other: &Candidate) -> std::cmp::Ordering {
        other
            .circle
            .radius
            .total_cmp(&self.circle.radius)
            .then(self.location.lex_cmp(other.location))
            .then(self.kind.cmp(&other.kind))
            .then(self.source.cmp(&other.source))
    }
}

/// One inserted point, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub candidate: Candidate,
    /// Global insertion index, starting at 0.
    pub iteration: usize,
}

/// Flat record of every insertion a run performed, in execution order.
/// A parallel trace flattens each round in decreasing-radius order, which is
/// exactly the order the round actually inserted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InsertionLog {
    pub entries: Vec<LogEntry>,
}

impl InsertionLog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// What one parallel round did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round_index: usize,
    /// `(outer, inner)` labels for class-driven runs; the outer value one
    /// past the last class marks cleanup rounds. `None` for flat drivers.
    pub label: Option<(usize, usize)>,
    /// Size of the full candidate set the round selected from.
    pub candidate_count: usize,
    /// The independent set the round inserted, in insertion order. Maximal
    /// within the round's candidate set under the mixed conflict relation.
    pub chosen_mis: Vec<Candidate>,
    /// Circumcenter-circumcenter conflicts observed while selecting.
    pub conflict_pairs_observed: usize,
    pub inserted_count: usize,
    /// Largest circumradius over live triangles after the round.
    pub max_circumradius_after: f64,
}

/// Radii of a circumcenter-circumcenter conflict pair: `r_kept` is the
/// selected candidate, `r_dropped` the one it eliminated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConflictPair {
    pub r_kept: f64,
    pub r_dropped: f64,
}

/// Radii recorded when a poor triangle's circumcenter was found strictly
/// inside a subsegment's diametral circle: circumradius `r_center`,
/// diametral radius `r_diametral`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncroachEvent {
    pub r_center: f64,
    pub r_diametral: f64,
}

/// Everything a parallel run recorded.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub rounds: Vec<RoundRecord>,
    pub log: InsertionLog,
    pub conflict_pairs: Vec<ConflictPair>,
    pub encroach_events: Vec<EncroachEvent>,
    /// Strict-mode findings: an edge class changed membership while its
    /// class was being refined.
    pub conservation_violations: Vec<String>,
    /// Strict-mode findings: the worst ratio among triangles on an
    /// already-refined edge class increased.
    pub upgrade_violations: Vec<String>,
}

impl Trace {
    /// Per-round series of the largest circumradius after the round.
    pub fn max_radius_series(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.max_circumradius_after).collect()
    }

    pub fn rounds_used(&self) -> usize {
        self.rounds.len()
    }
}

/// Point sample comparing local feature size before and after a
/// preprocessing pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LfsSample {
    pub at: Point,
    pub lfs_before: f64,
    pub lfs_after: f64,
}

/// Summary of a boundary preprocessing run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessReport {
    pub iterations_used: usize,
    pub segments_split: usize,
    /// Feature-size samples at seeded random points over the input's
    /// bounding box. Splitting may shrink feature size by at most 3x.
    pub lfs_ratio_samples: Vec<LfsSample>,
}

/// How a flat parallel round picks its independent set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MisPolicy {
    /// Grid-based maximal independent set.
    Maximal,
    /// Any nonempty independent set; implemented as a greedy first-fit over
    /// at most the first half of the candidates in insertion order. Exists
    /// to show round bounds degrade gracefully without maximality.
    AnyIndependent,
}

/// How the sequential loop picks among simultaneous candidates. There is one
/// policy; the enum names it so logs and configs can state it explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PickPolicy {
    /// Segment midpoints before circumcenters (vertex-forced splits first),
    /// then larger radius first, then lexicographic location.
    SplitsFirst,
}

/// Input domain for refinement.
#[derive(Debug, Clone, PartialEq)]
pub enum RefineDomain {
    Pslg(Pslg),
    Periodic(PeriodicPointSet),
}

impl RefineDomain {
    pub fn is_periodic(&self) -> bool {
        matches!(self, RefineDomain::Periodic(_))
    }
}

/// Options for the parallel drivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParOptions {
    /// Worker threads for round-level classification. `0` uses the ambient
    /// rayon pool. Results are identical for every thread count.
    pub threads: usize,
    /// Re-verify per-round invariants with brute force and fail fast on
    /// violation. Intended for tests; quadratic in round size.
    pub strict_checks: bool,
}

impl Default for ParOptions {
    fn default() -> Self {
        ParOptions {
            threads: 0,
            strict_checks: false,
        }
    }
}
