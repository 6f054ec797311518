// SPDX-License-Identifier: MIT OR Apache-2.0

//! Reproduces a selection conflict found by the acceptance random tester
//! and prints the offending pair.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use roundel::geometry::{Circle, Point};
use roundel::refine::{brute_check, grid_mis_detailed, Candidate, CandidateKind, SourceId};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x415);
    for set_index in 0..=99 {
        let n = rng.gen_range(1..=200);
        let candidates: Vec<Candidate> = (0..n)
            .map(|i| {
                let center = Point::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
                let radius = 10f64.powf(rng.gen_range(-3.0..0.0f64)) * 0.5;
                let (kind, source) = if rng.gen_bool(0.7) {
                    (CandidateKind::C, SourceId::Triangle(i))
                } else {
                    let kind = if rng.gen_bool(0.5) { CandidateKind::Dt } else { CandidateKind::Db };
                    (kind, SourceId::Segment(i))
                };
                Candidate {
                    location: center,
                    circle: Circle::new(center, radius),
                    kind,
                    source,
                    birth_round: 0,
                }
            })
            .collect();
        if set_index < 99 {
            continue;
        }
        let outcome = grid_mis_detailed(&candidates, 1.0).expect("selection");
        let violations = brute_check(&candidates, &outcome.selected);
        println!("set {set_index}: n themes={n} violations={violations:?}");
        let (a, b) = (&candidates[169], &candidates[177]);
        for (tag, c) in [("169", a), ("177", b)] {
            println!(
                "cand {tag}: kind={:?} center=({:.17}, {:.17}) r={:.17}",
                c.kind, c.circle.center.x, c.circle.center.y, c.circle.radius
            );
        }
        let d = a.circle.center.dist(b.circle.center);
        println!(
            "center distance {d:.17}; r169+r177 = {:.17}",
            a.circle.radius + b.circle.radius
        );
        println!("selected contains 169: {}", outcome.selected.contains(&169));
        println!("selected contains 177: {}", outcome.selected.contains(&177));
    }
}
