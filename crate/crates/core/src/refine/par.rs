// SPDX-License-Identifier: MIT OR Apache-2.0

//! Round-based parallel refinement drivers.
//!
//! Every driver runs the same loop shape: snapshot the current candidates,
//! select an independent subset, insert it in decreasing-radius order, and
//! append a [`RoundRecord`]. Selection is a pure function of the candidate
//! set and the insertion order within a round is fixed, so the mesh and the
//! trace depend only on the input, never on the worker-thread count.
//!
//! Periodic point sets have no boundary, so their rounds handle
//! circumcenters only. PSLG rounds first pick an independent set among all
//! poor circumcenters, blocked and insertable alike, then derive the
//! midpoints the selected blocked centers force, drop insertable winners
//! that conflict with a derived midpoint, and insert the rest. Blocked
//! centers themselves are never inserted.
//!
//! The flat drivers take every poor triangle each round. The class-driven
//! drivers (`parallel_ruppert_*`) instead refine edge classes in ascending
//! order, so each round works on near-uniform triangle sizes; a trailing
//! flat phase finishes anything the class ladder never covered.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::domain::{min_domain_lfs, PeriodicPointSet, Pslg};
use crate::error::{Error, Result};
use crate::geometry::encroaches;
use crate::mesh::Mesh;
use crate::tol::LEMMA_CHECK_GUARD;
use crate::triangulation::Mode;

use super::mis::{
    brute_check_metric, candidates_conflict, conflict_with_metric, edge_class, grid_mis_metric,
    radius_class, record_pair, ConflictMetric, MisOutcome,
};
use super::preprocess::{
    is_strongly_conforming, preprocess_boundary, preprocess_feature_conforming,
};
use super::state::{EdgeKey, RefineState};
use super::{
    Candidate, CandidateKind, MisPolicy, ParOptions, QualityRule, RefineDomain, RoundRecord,
    SourceId, Trace,
};

/// Segment-length bound used when preparing a PSLG for the class-driven
/// driver: boundary segments are split until none is longer than this factor
/// times the feature size at its midpoint. Values of 2 or less are rejected
/// by the preprocessor; 3 keeps the extra boundary splits sparse.
pub const FEATURE_CONFORMING_ALPHA: f64 = 3.0;

/// The domain [`parallel_chew_pslg`] actually refines: the input with its
/// boundary preprocessed to strong conformity. Exposed so a flattened log
/// can be replayed against the same starting point.
pub fn chew_pslg_domain(d: &Pslg) -> Result<Pslg> {
    Ok(preprocess_boundary(d)?.0)
}

/// The domain [`parallel_ruppert_pslg`] actually refines: boundary
/// preprocessing followed by feature-conforming splitting with
/// [`FEATURE_CONFORMING_ALPHA`].
pub fn ruppert_pslg_domain(d: &Pslg) -> Result<Pslg> {
    let (prepared, _) = preprocess_boundary(d)?;
    preprocess_feature_conforming(&prepared, FEATURE_CONFORMING_ALPHA)
}

// ----------------------------------------------------------------------
// Round plumbing.

fn build_pool(threads: usize) -> Result<Option<rayon::ThreadPool>> {
    if threads == 0 {
        return Ok(None);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map(Some)
        .map_err(|e| Error::InvariantViolation(format!("thread pool construction failed: {e}")))
}

fn with_pool<T: Send>(pool: &Option<rayon::ThreadPool>, f: impl FnOnce() -> T + Send) -> T {
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

fn metric_of(state: &RefineState) -> ConflictMetric {
    match state.mode() {
        Mode::Planar => ConflictMetric::Planar,
        Mode::Periodic => ConflictMetric::UnitTorus,
    }
}

/// Restricts a round's poor-triangle candidates to one edge class.
#[derive(Debug, Clone, Copy)]
struct ClassFilter {
    class: u32,
    s_ref: f64,
    /// Fail on triangles whose shortest edge fell below the class floor
    /// instead of clamping them into class 1.
    strict_floor: bool,
}

/// Edge class of a triangle, keyed by its shortest edge. Lengths below the
/// floor `s_ref` clamp to class 1 unless `strict_floor` is set; on a
/// periodic point set no refinement step shortens the shortest edge, so a
/// below-floor length there is an error worth surfacing.
fn tri_class(min_edge: f64, s_ref: f64, strict_floor: bool) -> Result<u32> {
    match edge_class(min_edge, s_ref) {
        Ok(c) => Ok(c),
        Err(Error::BelowFloor { len, floor }) => {
            if strict_floor {
                Err(Error::InvariantViolation(format!(
                    "edge length {len} fell below the class floor {floor}"
                )))
            } else {
                Ok(1)
            }
        }
        Err(e) => Err(e),
    }
}

/// Number of edge classes needed to cover lengths up to `l` when the floor
/// is `s`: class `i` holds lengths in `[sqrt(2)^(i-1) s, sqrt(2)^i s)`.
/// Zero when `l <= s`. Undercounting is harmless: the drivers finish with
/// flat rounds for anything outside the ladder.
fn class_count(l: f64, s: f64) -> u32 {
    if !(s > 0.0) || !(l > s) {
        return 0;
    }
    (2.0 * (l / s).log2()).ceil().max(0.0) as u32
}

/// Materializes the poor-triangle candidates, blocked and insertable, in
/// `poor_slots` order. The scan is fanned out over the worker pool; an
/// indexed collect keeps the output order independent of scheduling.
fn assemble_poor_candidates(
    state: &RefineState,
    pool: &Option<rayon::ThreadPool>,
    birth_round: usize,
    filter: Option<ClassFilter>,
) -> Result<Vec<Candidate>> {
    let slots = state.poor_slots();
    let collected: Result<Vec<Option<Candidate>>> = with_pool(pool, || {
        slots
            .par_iter()
            .map(|&(slot, blocked)| {
                if let Some(f) = filter {
                    let info = state.triangle_info(slot).ok_or_else(|| {
                        Error::InvariantViolation("poor slot with no cached geometry".into())
                    })?;
                    if tri_class(info.min_edge, f.s_ref, f.strict_floor)? != f.class {
                        return Ok(None);
                    }
                }
                let kind = if blocked {
                    CandidateKind::B
                } else {
                    CandidateKind::C
                };
                Ok(Some(state.materialize(kind, slot, birth_round)))
            })
            .collect()
    });
    Ok(collected?.into_iter().flatten().collect())
}

/// Grid scale for a round: the domain diameter, widened to cover any
/// circumradius that exceeds it.
fn scale_bound(state: &RefineState, candidates: &[Candidate]) -> f64 {
    candidates
        .iter()
        .map(|c| c.circle.radius)
        .fold(state.domain_l, f64::max)
}

fn select(
    candidates: &[Candidate],
    l: f64,
    policy: MisPolicy,
    metric: ConflictMetric,
) -> Result<MisOutcome> {
    match policy {
        MisPolicy::Maximal => grid_mis_metric(candidates, l, metric),
        MisPolicy::AnyIndependent => any_independent(candidates, metric),
    }
}

/// Greedy first-fit over at most the first half of the candidates in
/// insertion order: always independent, nonempty whenever the input is,
/// deliberately not maximal.
fn any_independent(candidates: &[Candidate], metric: ConflictMetric) -> Result<MisOutcome> {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| candidates[a].insertion_cmp(&candidates[b]));
    let limit = (candidates.len() + 1) / 2;
    let mut selected: Vec<usize> = Vec::new();
    let mut pairs = Vec::new();
    for &i in order.iter().take(limit) {
        let clash = selected
            .iter()
            .find(|&&j| conflict_with_metric(metric, &candidates[i], &candidates[j]))
            .copied();
        match clash {
            Some(j) => record_pair(&mut pairs, &candidates[j], &candidates[i]),
            None => selected.push(i),
        }
    }
    selected.sort_unstable();
    Ok(MisOutcome {
        selected,
        conflict_pairs: pairs,
    })
}

/// Strict-mode audit of one round's selection: independence (and maximality
/// where promised) by brute force, plus the rule that conflicting
/// circumcircles from one snapshot sit within one radius class of each
/// other.
fn audit_selection(
    candidates: &[Candidate],
    outcome: &MisOutcome,
    policy: MisPolicy,
    metric: ConflictMetric,
    l: f64,
) -> Result<()> {
    match policy {
        MisPolicy::Maximal => {
            let findings = brute_check_metric(candidates, &outcome.selected, metric);
            if !findings.is_empty() {
                return Err(Error::InvariantViolation(format!(
                    "independent-set audit failed: {}",
                    findings.join("; ")
                )));
            }
        }
        MisPolicy::AnyIndependent => {
            for (pos, &a) in outcome.selected.iter().enumerate() {
                for &b in &outcome.selected[pos + 1..] {
                    if conflict_with_metric(metric, &candidates[a], &candidates[b]) {
                        return Err(Error::InvariantViolation(format!(
                            "selected candidates {a} and {b} conflict"
                        )));
                    }
                }
            }
        }
    }
    for pair in &outcome.conflict_pairs {
        let ca = radius_class(pair.r_kept, l)?;
        let cb = radius_class(pair.r_dropped, l)?;
        if ca.abs_diff(cb) > 1 {
            return Err(Error::InvariantViolation(format!(
                "conflict pair spans radius classes {ca} and {cb}"
            )));
        }
    }
    Ok(())
}

/// One round on a periodic point set: snapshot the poor triangles, select
/// an independent set of their circumcenters, insert it largest-radius
/// first. Returns the number of points inserted; an empty snapshot inserts
/// nothing and records nothing.
fn pps_round(
    state: &mut RefineState,
    pool: &Option<rayon::ThreadPool>,
    policy: MisPolicy,
    opts: &ParOptions,
    trace: &mut Trace,
    label: Option<(usize, usize)>,
    filter: Option<ClassFilter>,
) -> Result<usize> {
    let round_index = trace.rounds.len();
    let candidates = assemble_poor_candidates(state, pool, round_index, filter)?;
    if candidates.is_empty() {
        return Ok(0);
    }
    debug_assert!(
        candidates.iter().all(|c| c.kind == CandidateKind::C),
        "periodic domains have no segments to block a circumcenter"
    );
    let metric = metric_of(state);
    let l_round = scale_bound(state, &candidates);
    let outcome = select(&candidates, l_round, policy, metric)?;
    if opts.strict_checks {
        audit_selection(&candidates, &outcome, policy, metric, l_round)?;
    }
    let mut chosen: Vec<Candidate> = outcome.selected.iter().map(|&i| candidates[i]).collect();
    chosen.sort_by(Candidate::insertion_cmp);
    for cand in &chosen {
        state.apply(cand)?;
    }
    trace.conflict_pairs.extend(outcome.conflict_pairs.iter());
    trace.rounds.push(RoundRecord {
        round_index,
        label,
        candidate_count: candidates.len(),
        conflict_pairs_observed: outcome.conflict_pairs.len(),
        inserted_count: chosen.len(),
        max_circumradius_after: state.max_circumradius(),
        chosen_mis: chosen,
    });
    Ok(trace.rounds.last().map_or(0, |r| r.inserted_count))
}

/// One round on a PSLG. Stage one selects an independent subset of all poor
/// circumcenters. Stage two derives the midpoints the selected blocked
/// centers force and drops any insertable winner that conflicts with one of
/// them. The surviving circumcenters and all derived midpoints go in
/// together. No inserted point may land inside a subsegment's diametral
/// circle; the round fails if one does.
fn pslg_round(
    state: &mut RefineState,
    pool: &Option<rayon::ThreadPool>,
    policy: MisPolicy,
    opts: &ParOptions,
    trace: &mut Trace,
    label: Option<(usize, usize)>,
    filter: Option<ClassFilter>,
) -> Result<usize> {
    if state.has_encroached() {
        return Err(Error::InvariantViolation(
            "a vertex-encroached subsegment survived into a round".into(),
        ));
    }
    let round_index = trace.rounds.len();
    let candidates = assemble_poor_candidates(state, pool, round_index, filter)?;
    if candidates.is_empty() {
        return Ok(0);
    }
    let l_round = scale_bound(state, &candidates);
    let outcome = select(&candidates, l_round, policy, ConflictMetric::Planar)?;
    if opts.strict_checks {
        audit_selection(&candidates, &outcome, policy, ConflictMetric::Planar, l_round)?;
    }

    let mut kept_c: Vec<Candidate> = Vec::new();
    let mut derived: Vec<Candidate> = Vec::new();
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    for &i in &outcome.selected {
        let cand = candidates[i];
        match cand.kind {
            CandidateKind::C => kept_c.push(cand),
            CandidateKind::B => {
                let slot = match cand.source {
                    SourceId::Triangle(t) => t,
                    SourceId::Segment(_) => {
                        return Err(Error::InvariantViolation(
                            "blocked candidate with a segment source".into(),
                        ))
                    }
                };
                for sub in state.witnesses_of(slot) {
                    if seen.insert(sub) {
                        derived.push(state.materialize(CandidateKind::Db, sub, round_index));
                    }
                }
            }
            CandidateKind::Dt | CandidateKind::Db => {
                return Err(Error::InvariantViolation(
                    "midpoint candidate in a circumcenter snapshot".into(),
                ))
            }
        }
    }

    if opts.strict_checks {
        // Midpoints forced in one round go in together, which is sound
        // because no forced midpoint lies inside another's diametral
        // circle: subsegments of one input segment have nested-or-disjoint
        // circles, adjacent input segments meet at a right angle or wider,
        // and preprocessing keeps foreign features out.
        for (pos, a) in derived.iter().enumerate() {
            for b in &derived[pos + 1..] {
                if encroaches(a.location, &b.circle) || encroaches(b.location, &a.circle) {
                    return Err(Error::InvariantViolation(format!(
                        "derived midpoints ({}, {}) and ({}, {}) encroach each other's circles",
                        a.location.x, a.location.y, b.location.x, b.location.y
                    )));
                }
            }
        }
    }

    kept_c.retain(|c| derived.iter().all(|d| !candidates_conflict(c, d)));

    let mut chosen = kept_c;
    chosen.extend(derived);
    chosen.sort_by(Candidate::insertion_cmp);
    for cand in &chosen {
        state.apply(cand)?;
    }
    if state.has_encroached() {
        return Err(Error::InvariantViolation(
            "an insertion landed inside a diametral circle".into(),
        ));
    }
    trace.conflict_pairs.extend(outcome.conflict_pairs.iter());
    trace.rounds.push(RoundRecord {
        round_index,
        label,
        candidate_count: candidates.len(),
        conflict_pairs_observed: outcome.conflict_pairs.len(),
        inserted_count: chosen.len(),
        max_circumradius_after: state.max_circumradius(),
        chosen_mis: chosen,
    });
    Ok(trace.rounds.last().map_or(0, |r| r.inserted_count))
}

// ----------------------------------------------------------------------
// Class-ladder bookkeeping.

type ClassSnapshot = (BTreeMap<EdgeKey, f64>, BTreeMap<EdgeKey, f64>);

/// `(edges of exactly this class -> length, edges of this class or lower ->
/// worst incident radius-edge ratio)`.
fn class_snapshots(state: &RefineState, s_ref: f64, class: u32) -> Result<ClassSnapshot> {
    let ratios = state.edge_ratio_map();
    let mut class_edges = BTreeMap::new();
    let mut low_ratios = BTreeMap::new();
    for (key, len) in state.edge_set() {
        let c = tri_class(len, s_ref, false)?;
        if c == class {
            class_edges.insert(key, len);
        }
        if c <= class {
            if let Some(&r) = ratios.get(&key) {
                low_ratios.insert(key, r);
            }
        }
    }
    Ok((class_edges, low_ratios))
}

/// Compares the class snapshot taken before a round against the state after
/// it. While class `i` is being refined, the set of class-`i` edges must not
/// change, and no edge of class `i` or lower may see the worst ratio among
/// its triangles increase.
fn record_lemma_findings(
    state: &RefineState,
    s_ref: f64,
    class: u32,
    label: (usize, usize),
    before: ClassSnapshot,
    trace: &mut Trace,
) -> Result<()> {
    let (before_edges, before_ratios) = before;
    let (after_edges, after_ratios) = class_snapshots(state, s_ref, class)?;
    if !before_edges.keys().eq(after_edges.keys()) {
        let added = after_edges
            .keys()
            .filter(|k| !before_edges.contains_key(*k))
            .count();
        let removed = before_edges
            .keys()
            .filter(|k| !after_edges.contains_key(*k))
            .count();
        trace.conservation_violations.push(format!(
            "round ({}, {}): class {} edge set changed: {} added, {} removed",
            label.0, label.1, class, added, removed
        ));
    }
    for (key, r_after) in &after_ratios {
        if let Some(r_before) = before_ratios.get(key) {
            if *r_after > r_before * (1.0 + LEMMA_CHECK_GUARD) {
                trace.upgrade_violations.push(format!(
                    "round ({}, {}): edge ({}, {}, {}, {}) worst ratio rose from {} to {}",
                    label.0, label.1, key.0, key.1, key.2, key.3, r_before, r_after
                ));
            }
        }
    }
    Ok(())
}

fn finish(mut state: RefineState, mut trace: Trace) -> Result<(Mesh, Trace)> {
    state.assert_done()?;
    trace.encroach_events = state.drain_encroach_events();
    trace.log = state.log.clone();
    Ok((state.extract_mesh(), trace))
}

fn no_progress() -> Error {
    Error::InvariantViolation("a round with poor triangles inserted nothing".into())
}

// ----------------------------------------------------------------------
// Drivers.

/// Flat parallel refinement of a periodic point set under any rule and
/// selection policy.
pub fn parallel_generic_pps(
    p: &PeriodicPointSet,
    rule: QualityRule,
    policy: MisPolicy,
    opts: &ParOptions,
) -> Result<(Mesh, Trace)> {
    let pool = build_pool(opts.threads)?;
    let domain = RefineDomain::Periodic(p.clone());
    let mut state = RefineState::new(&domain, rule)?;
    let mut trace = Trace::default();
    while state.has_poor() {
        if pps_round(&mut state, &pool, policy, opts, &mut trace, None, None)? == 0 {
            return Err(no_progress());
        }
    }
    finish(state, trace)
}

/// Parallel refinement of a periodic point set under the
/// shortest-current-edge rule, with maximal independent sets each round.
pub fn parallel_chew_pps(
    p: &PeriodicPointSet,
    beta: f64,
    opts: &ParOptions,
) -> Result<(Mesh, Trace)> {
    parallel_generic_pps(p, QualityRule::chew(beta)?, MisPolicy::Maximal, opts)
}

/// Class-driven parallel refinement of a periodic point set under the
/// radius-edge rule: edge classes are refined in ascending order, then a
/// flat phase finishes whatever the ladder never covered (on a torus the
/// longest lifted edges can exceed the domain diameter). Round labels are
/// `(class, round within class)`; the flat phase uses class count plus one.
pub fn parallel_ruppert_pps(
    p: &PeriodicPointSet,
    beta: f64,
    opts: &ParOptions,
) -> Result<(Mesh, Trace)> {
    let rule = QualityRule::ruppert(beta)?;
    let pool = build_pool(opts.threads)?;
    let domain = RefineDomain::Periodic(p.clone());
    let mut state = RefineState::new(&domain, rule)?;
    let mut trace = Trace::default();
    let s_ref = state.shortest_edge();
    let classes = class_count(state.domain_l, s_ref);
    for class in 1..=classes {
        let filter = ClassFilter {
            class,
            s_ref,
            strict_floor: opts.strict_checks,
        };
        for inner in 0.. {
            let label = (class as usize, inner);
            let snap = if opts.strict_checks {
                Some(class_snapshots(&state, s_ref, class)?)
            } else {
                None
            };
            let inserted = pps_round(
                &mut state,
                &pool,
                MisPolicy::Maximal,
                opts,
                &mut trace,
                Some(label),
                Some(filter),
            )?;
            if inserted == 0 {
                break;
            }
            if let Some(snap) = snap {
                record_lemma_findings(&state, s_ref, class, label, snap, &mut trace)?;
            }
        }
    }
    let mut k = 0usize;
    while state.has_poor() {
        let label = Some((classes as usize + 1, k));
        if pps_round(
            &mut state,
            &pool,
            MisPolicy::Maximal,
            opts,
            &mut trace,
            label,
            None,
        )? == 0
        {
            return Err(no_progress());
        }
        k += 1;
    }
    finish(state, trace)
}

/// Flat parallel refinement of a PSLG under any rule and selection policy.
/// The boundary must already be strongly conforming; [`preprocess_boundary`]
/// establishes that.
pub fn parallel_generic_pslg(
    d: &Pslg,
    rule: QualityRule,
    policy: MisPolicy,
    opts: &ParOptions,
) -> Result<(Mesh, Trace)> {
    if !is_strongly_conforming(d) {
        return Err(Error::InvalidDomain(
            "parallel refinement needs a strongly conforming boundary; \
             run preprocess_boundary first"
                .into(),
        ));
    }
    let pool = build_pool(opts.threads)?;
    let domain = RefineDomain::Pslg(d.clone());
    let mut state = RefineState::new(&domain, rule)?;
    let mut trace = Trace::default();
    while state.has_poor() {
        if pslg_round(&mut state, &pool, policy, opts, &mut trace, None, None)? == 0 {
            return Err(no_progress());
        }
    }
    finish(state, trace)
}

/// Parallel refinement of a PSLG under the shortest-current-edge rule:
/// preprocesses the boundary to strong conformity, then runs flat rounds
/// with maximal independent sets.
pub fn parallel_chew_pslg(d: &Pslg, beta: f64, opts: &ParOptions) -> Result<(Mesh, Trace)> {
    let rule = QualityRule::chew(beta)?;
    let prepared = chew_pslg_domain(d)?;
    parallel_generic_pslg(&prepared, rule, MisPolicy::Maximal, opts)
}

/// Class-driven parallel refinement of a PSLG under the radius-edge rule.
/// The boundary is preprocessed to strong conformity and then split until
/// feature conforming; the class floor is the smallest feature size of that
/// prepared domain. Classes are refined in ascending order and a flat phase
/// finishes the rest. The class filter applies to circumcenters only:
/// midpoints forced by a selected blocked center always go in with it.
pub fn parallel_ruppert_pslg(d: &Pslg, beta: f64, opts: &ParOptions) -> Result<(Mesh, Trace)> {
    let rule = QualityRule::ruppert(beta)?;
    let prepared = ruppert_pslg_domain(d)?;
    let s_ref = min_domain_lfs(&prepared)?;
    let pool = build_pool(opts.threads)?;
    let domain = RefineDomain::Pslg(prepared);
    let mut state = RefineState::new(&domain, rule)?;
    let mut trace = Trace::default();
    let classes = class_count(state.domain_l, s_ref);
    for class in 1..=classes {
        let filter = ClassFilter {
            class,
            s_ref,
            strict_floor: false,
        };
        for inner in 0.. {
            let label = (class as usize, inner);
            let snap = if opts.strict_checks {
                Some(class_snapshots(&state, s_ref, class)?)
            } else {
                None
            };
            let inserted = pslg_round(
                &mut state,
                &pool,
                MisPolicy::Maximal,
                opts,
                &mut trace,
                Some(label),
                Some(filter),
            )?;
            if inserted == 0 {
                break;
            }
            if let Some(snap) = snap {
                record_lemma_findings(&state, s_ref, class, label, snap, &mut trace)?;
            }
        }
    }
    let mut k = 0usize;
    while state.has_poor() {
        let label = Some((classes as usize + 1, k));
        if pslg_round(
            &mut state,
            &pool,
            MisPolicy::Maximal,
            opts,
            &mut trace,
            label,
            None,
        )? == 0
        {
            return Err(no_progress());
        }
        k += 1;
    }
    finish(state, trace)
}
