// SPDX-License-Identifier: MIT OR Apache-2.0

//! End-to-end exercise of the public API: refine a PSLG and a periodic
//! point set with the sequential and parallel drivers, replay every
//! parallel log, and confirm the meshes match bit for bit. Exits nonzero
//! on any mismatch, so it doubles as a smoke test for release checks.

use roundel::domain::{PeriodicPointSet, Pslg};
use roundel::geometry::Point;
use roundel::refine::par::{chew_pslg_domain, ruppert_pslg_domain};
use roundel::refine::{
    parallel_chew_pps, parallel_chew_pslg, parallel_ruppert_pps, parallel_ruppert_pslg, replay,
    seq_refine, ParOptions, PickPolicy, QualityRule, RefineDomain, BETA_MIN,
};

fn main() {
    let pslg = Pslg::new(
        vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
            Point::new(0.5, 0.08),
        ],
        &[[0, 1], [1, 2], [2, 3], [3, 0]],
    )
    .expect("valid PSLG");
    let torus = PeriodicPointSet::new(vec![Point::new(0.3, 0.3), Point::new(0.34, 0.31)])
        .expect("valid periodic set");
    let opts = ParOptions {
        threads: 0,
        strict_checks: true,
    };

    let ruppert = QualityRule::ruppert(BETA_MIN).expect("valid beta");
    let chew = QualityRule::chew(BETA_MIN).expect("valid beta");

    let (mesh, log) = seq_refine(
        &RefineDomain::Pslg(ruppert_pslg_domain(&pslg).expect("preparation")),
        &ruppert,
        PickPolicy::SplitsFirst,
    )
    .expect("sequential run");
    println!(
        "seq ruppert pslg: {} insertions, {} triangles",
        log.len(),
        mesh.triangle_count()
    );

    let (mesh, trace) = parallel_ruppert_pslg(&pslg, BETA_MIN, &opts).expect("parallel run");
    let prepared = ruppert_pslg_domain(&pslg).expect("preparation");
    let replayed = replay(&RefineDomain::Pslg(prepared), &ruppert, &trace.log).expect("replay");
    assert_eq!(mesh, replayed, "parallel ruppert pslg replay diverged");
    println!(
        "par ruppert pslg: {} rounds, {} triangles, replay ok",
        trace.rounds_used(),
        mesh.triangle_count()
    );

    let (mesh, trace) = parallel_chew_pslg(&pslg, BETA_MIN, &opts).expect("parallel run");
    let prepared = chew_pslg_domain(&pslg).expect("preparation");
    let replayed = replay(&RefineDomain::Pslg(prepared), &chew, &trace.log).expect("replay");
    assert_eq!(mesh, replayed, "parallel chew pslg replay diverged");
    println!(
        "par chew pslg: {} rounds, {} triangles, replay ok",
        trace.rounds_used(),
        mesh.triangle_count()
    );

    let (mesh, trace) = parallel_ruppert_pps(&torus, BETA_MIN, &opts).expect("parallel run");
    let replayed =
        replay(&RefineDomain::Periodic(torus.clone()), &ruppert, &trace.log).expect("replay");
    assert_eq!(mesh, replayed, "parallel ruppert pps replay diverged");
    println!(
        "par ruppert pps: {} rounds, {} triangles, replay ok",
        trace.rounds_used(),
        mesh.triangle_count()
    );

    let (mesh, trace) = parallel_chew_pps(&torus, BETA_MIN, &opts).expect("parallel run");
    let replayed =
        replay(&RefineDomain::Periodic(torus.clone()), &chew, &trace.log).expect("replay");
    assert_eq!(mesh, replayed, "parallel chew pps replay diverged");
    println!(
        "par chew pps: {} rounds, {} triangles, replay ok",
        trace.rounds_used(),
        mesh.triangle_count()
    );

    println!("verify drive complete");
}
