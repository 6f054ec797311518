// SPDX-License-Identifier: MIT OR Apache-2.0

//! Central numeric tolerances.
//!
//! Every approximate comparison in the crate routes through one of these
//! constants so a reader can audit the numeric policy in one place.
//! Sign decisions (orientation, in-circle) are exact and take no tolerance.

/// Relative guard for conflict tests between constructed circles.
/// Containment must clear the boundary by this relative margin;
/// anything closer counts as a tie and ties resolve to "independent".
pub const CONFLICT_GUARD: f64 = 1e-12;

/// Relative slack for checking recorded conflict radii against the
/// factor-two band, and encroachment events against the 1/sqrt(2) floor.
pub const LEMMA_CHECK_GUARD: f64 = 1e-12;

/// Circumcircle construction accuracy: max |dist(center, vertex) - radius|
/// as a fraction of the radius, for triangles up to `SKINNY_LIMIT`.
pub const CIRCUMCIRCLE_REL_ERR: f64 = 1e-12;

/// Radius-edge ratio ceiling up to which `CIRCUMCIRCLE_REL_ERR` is promised.
pub const SKINNY_LIMIT: f64 = 1e6;

/// Absolute tolerance (radians) for the right-angle floor between adjacent
/// input segments during domain validation.
pub const ANGLE_TOL_RAD: f64 = 1e-9;

/// Relative tolerance for local-feature-size ratio checks between a domain
/// and its preprocessed refinement.
pub const LFS_RATIO_TOL: f64 = 1e-9;

/// Quality rules reject a ratio bound more than this far below sqrt(2).
pub const BETA_FLOOR_TOL: f64 = 1e-6;

/// Slack (degrees) allowed when asserting the minimum-angle floor that a
/// ratio bound implies.
pub const MIN_ANGLE_SLACK_DEG: f64 = 1e-6;

/// Stall guard: abort refinement if an edge drops below
/// `min vertex feature size / 2^STALL_SHRINK_EXP`.
pub const STALL_SHRINK_EXP: i32 = 10;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guards_are_positive_and_small() {
        for &t in &[
            CONFLICT_GUARD,
            LEMMA_CHECK_GUARD,
            CIRCUMCIRCLE_REL_ERR,
            ANGLE_TOL_RAD,
            LFS_RATIO_TOL,
            BETA_FLOOR_TOL,
            MIN_ANGLE_SLACK_DEG,
        ] {
            assert!(t > 0.0 && t < 1e-3, "tolerance {t} out of expected band");
        }
    }

    #[test]
    fn conflict_guard_is_coarser_than_machine_epsilon() {
        assert!(CONFLICT_GUARD > f64::EPSILON);
        assert!(CIRCUMCIRCLE_REL_ERR > 4.0 * f64::EPSILON);
    }

    #[test]
    fn stall_floor_shrinks_by_ten_doublings() {
        assert_eq!(STALL_SHRINK_EXP, 10);
        assert!((1.0f64 / f64::powi(2.0, STALL_SHRINK_EXP)) > 0.0);
    }
}
