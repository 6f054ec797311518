// SPDX-License-Identifier: MIT OR Apache-2.0

//! Input conditioning ahead of boundary-respecting refinement.
//!
//! [`preprocess_boundary`] splits input segments until every live
//! subsegment is strongly conforming: its open diametral disk contains no
//! vertex and stays clear of every non-incident input feature. Parallel
//! rounds rely on this to keep midpoint insertions from encroaching on each
//! other. [`preprocess_feature_conforming`] further splits segments until
//! none is longer than `alpha` times the local feature size at its
//! midpoint, which the class-by-class driver needs so segment lengths track
//! the local scale.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{local_feature_size, min_domain_lfs, point_segment_distance, Pslg, Segment};
use crate::error::{Error, Result};
use crate::geometry::{diametral_circle, encroaches, Point};

use super::{LfsSample, PreprocessReport};

/// Number of random points sampled for the before/after feature-size report.
const LFS_SAMPLE_COUNT: usize = 1000;
/// Fixed seed so the sample set, and thus the report, is reproducible.
const LFS_SAMPLE_SEED: u64 = 0x05ca_1a_b1e;

/// Does some current vertex other than the endpoints sit strictly inside
/// this live segment's diametral disk?
fn vertex_encroaches(d: &Pslg, seg: &Segment) -> Result<bool> {
    let (a, b) = d.segment_points(seg);
    let diam = diametral_circle(a, b)?;
    Ok(d.vertices
        .iter()
        .enumerate()
        .any(|(v, &p)| v != seg.a && v != seg.b && encroaches(p, &diam)))
}

/// Do two root segments of `input` share an endpoint?
fn roots_share_endpoint(input: &Pslg, i: usize, j: usize) -> bool {
    let (si, sj) = (&input.all_segments()[i], &input.all_segments()[j]);
    si.a == sj.a || si.a == sj.b || si.b == sj.a || si.b == sj.b
}

/// Does a non-incident input segment pass strictly through this live
/// segment's open diametral disk? Incidence is judged between input
/// segments: the one this subsegment descends from versus each other input
/// segment, incident when they share an endpoint.
fn foreign_feature_intrudes(d: &Pslg, seg: &Segment, input: &Pslg) -> Result<bool> {
    let (a, b) = d.segment_points(seg);
    let diam = diametral_circle(a, b)?;
    for (j, root) in input.live_segments() {
        if j == seg.original || roots_share_endpoint(input, seg.original, j) {
            continue;
        }
        let (ra, rb) = input.segment_points(root);
        if point_segment_distance(diam.center, ra, rb) < diam.radius {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Reconstructs the original input domain from a split descendant: root
/// segments are the ones without a parent, and they keep their slots.
fn input_view(d: &Pslg) -> Result<Pslg> {
    let roots: Vec<[usize; 2]> = d
        .all_segments()
        .iter()
        .filter(|s| s.parent.is_none())
        .map(|s| [s.a, s.b])
        .collect();
    Pslg::new(d.vertices.clone(), &roots)
}

/// Is every live segment's open diametral disk free of vertices and of
/// non-incident input features?
///
/// This is exactly the fixpoint [`preprocess_boundary`] drives the domain
/// to, phrased as a standalone scan so callers can check a domain they did
/// not preprocess themselves.
pub fn is_strongly_conforming(d: &Pslg) -> bool {
    let Ok(input) = input_view(d) else {
        return false;
    };
    for (_, seg) in d.live_segments() {
        match (
            vertex_encroaches(d, seg),
            foreign_feature_intrudes(d, seg, &input),
        ) {
            (Ok(false), Ok(false)) => {}
            _ => return false,
        }
    }
    true
}

/// Is every live segment at most `alpha` times the local feature size at
/// its own midpoint?
pub fn is_feature_conforming(d: &Pslg, alpha: f64) -> Result<bool> {
    for (_, seg) in d.live_segments() {
        let (a, b) = d.segment_points(seg);
        if a.dist(b) > alpha * local_feature_size(d, a.mid(b))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Iteration cap: splitting halves segment lengths, so the number of
/// rounds is logarithmic in the span between the domain diameter and the
/// smallest feature gap; the slack term absorbs small domains.
fn split_rounds_cap(d: &Pslg) -> Result<u32> {
    let l = d.diameter();
    let s = min_domain_lfs(d)?;
    let doublings = (l / s).log2().ceil().max(0.0) as u32;
    Ok(4 * doublings + 16)
}

/// Splits input segments until the domain is strongly conforming.
///
/// Each round collects every live segment whose open diametral disk
/// contains a current vertex (other than its own endpoints) or comes
/// within its radius of a non-incident input segment, then splits them all
/// at their midpoints. Returns the refined domain and a report with the
/// round count, the split count, and seeded feature-size samples
/// contrasting the input with the result.
pub fn preprocess_boundary(d: &Pslg) -> Result<(Pslg, PreprocessReport)> {
    let cap = if d.live_segment_count() == 0 {
        0
    } else {
        split_rounds_cap(d)?
    };
    preprocess_boundary_with_cap(d, cap)
}

pub(crate) fn preprocess_boundary_with_cap(
    d: &Pslg,
    cap: u32,
) -> Result<(Pslg, PreprocessReport)> {
    // Root segments keep their leading slots through splits, so this view
    // shares ids with `seg.original` even when `d` arrives pre-split.
    let input = input_view(d)?;
    let mut cur = d.clone();
    let mut iterations: u32 = 0;
    let mut segments_split = 0usize;
    loop {
        let mut offenders = Vec::new();
        for (id, seg) in cur.live_segments() {
            if vertex_encroaches(&cur, seg)? || foreign_feature_intrudes(&cur, seg, &input)? {
                offenders.push(id);
            }
        }
        if offenders.is_empty() {
            break;
        }
        if iterations == cap {
            return Err(Error::PreprocessDiverged { cap });
        }
        for id in offenders {
            let (next, _) = cur.split_segment(id)?;
            cur = next;
            segments_split += 1;
        }
        iterations += 1;
    }

    if !is_strongly_conforming(&cur) {
        return Err(Error::InvariantViolation(
            "boundary conditioning reached a fixpoint that fails the conformity scan".into(),
        ));
    }
    let lfs_ratio_samples = sample_lfs_ratio(d, &cur)?;
    Ok((
        cur,
        PreprocessReport {
            iterations_used: iterations as usize,
            segments_split,
            lfs_ratio_samples,
        },
    ))
}

/// Splits segments of a strongly conforming domain until each live segment
/// is at most `alpha` times the local feature size at its midpoint,
/// measured against the evolving domain. Requires `alpha > 2`; below that
/// the halves can keep violating the bound forever.
pub fn preprocess_feature_conforming(d: &Pslg, alpha: f64) -> Result<Pslg> {
    if !(alpha.is_finite() && alpha > 2.0) {
        return Err(Error::OutOfRange(format!(
            "segment-to-feature-size factor must be finite and exceed 2, got {alpha}"
        )));
    }
    if !is_strongly_conforming(d) {
        return Err(Error::InvalidDomain(
            "feature-size conditioning requires a strongly conforming domain".into(),
        ));
    }
    let cap = if d.live_segment_count() == 0 {
        0
    } else {
        split_rounds_cap(d)?
    };

    let mut cur = d.clone();
    let mut iterations: u32 = 0;
    loop {
        let mut offenders = Vec::new();
        for (id, seg) in cur.live_segments() {
            let (a, b) = cur.segment_points(seg);
            if a.dist(b) > alpha * local_feature_size(&cur, a.mid(b))? {
                offenders.push(id);
            }
        }
        if offenders.is_empty() {
            break;
        }
        if iterations == cap {
            return Err(Error::PreprocessDiverged { cap });
        }
        for id in offenders {
            let (next, _) = cur.split_segment(id)?;
            cur = next;
        }
        iterations += 1;
    }

    if !is_strongly_conforming(&cur) {
        return Err(Error::InvariantViolation(
            "splitting broke strong conformity, which halving should preserve".into(),
        ));
    }
    Ok(cur)
}

/// Local feature size before and after preprocessing at seeded random
/// points spread over the input's bounding box.
fn sample_lfs_ratio(before: &Pslg, after: &Pslg) -> Result<Vec<LfsSample>> {
    let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
    let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &before.vertices {
        min_x = min_x.min(p.x);
        min_y = min_y.min(p.y);
        max_x = max_x.max(p.x);
        max_y = max_y.max(p.y);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(LFS_SAMPLE_SEED);
    let mut samples = Vec::with_capacity(LFS_SAMPLE_COUNT);
    for _ in 0..LFS_SAMPLE_COUNT {
        let at = Point::new(
            rng.gen_range(min_x..=max_x),
            rng.gen_range(min_y..=max_y),
        );
        samples.push(LfsSample {
            at,
            lfs_before: local_feature_size(before, at)?,
            lfs_after: local_feature_size(after, at)?,
        });
    }
    Ok(samples)
}
