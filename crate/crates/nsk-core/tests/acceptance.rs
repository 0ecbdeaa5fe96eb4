//! The ten acceptance criteria, one test each. Every test prints a single
//! PASS/FAIL line (visible under --nocapture) and fails if the criterion
//! misses its science check or its wall-clock budget.

use nsk_core::verify;

fn check(id: usize) {
    let r = verify::criterion(id);
    println!(
        "ACCEPTANCE {:>2} {:<34} {}: {}",
        r.id,
        r.name,
        if r.passed { "PASS" } else { "FAIL" },
        r.detail
    );
    assert!(r.passed, "criterion {} ({}) failed: {}", r.id, r.name, r.detail);
}

#[test]
fn criterion_01_quantum_saturation() {
    check(1);
}

#[test]
fn criterion_02_minimum_state_saturation() {
    check(2);
}

#[test]
fn criterion_03_minimum_curve_landmarks() {
    check(3);
}

#[test]
fn criterion_04_improvement_phase_diagram() {
    check(4);
}

#[test]
fn criterion_05_media_magnitude_estimates() {
    check(5);
}

#[test]
fn criterion_06_stationary_profile_fidelity() {
    check(6);
}

#[test]
fn criterion_07_viscous_trajectory_diagnostics() {
    check(7);
}

#[test]
fn criterion_08_ensemble_relaxation_statistics() {
    check(8);
}

#[test]
fn criterion_09_transport_structural_identities() {
    check(9);
}

#[test]
fn criterion_10_kinematic_lower_bounds() {
    check(10);
}
