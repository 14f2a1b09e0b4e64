//! Projective-space geometry of the evolution: speed equals energy
//! uncertainty, acceleration decomposes into centripetal and uncertainty
//! parts, and both are conserved along Schroedinger motion.

mod common;

use qclab::{
    acceleration_decomposition, fubini_study_distance, omega, projective_speed,
    projective_speed_fd, propagate, sample_coherent, CoherentParams, EvolveOptions, GridSpec,
    LinearOperator, PotentialSpec,
};

fn grid() -> GridSpec {
    GridSpec::new_1d(2048, 40.0).unwrap()
}

// Frozen from the moment oracle below: free packet sigma = 0.5, v0 = 1 has
// Delta h = sqrt(<p^4>/4 - E^2) = sqrt(2.5 - 1) = sqrt(1.5).
const FREE_ENERGY_UNCERTAINTY: f64 = 1.224744871391589;
// sigma = 0.5, v0 = 0: Delta(h^2) = sqrt(<p^8> - <p^4>^2) / 4 = sqrt(6).
const FREE_H2_UNCERTAINTY: f64 = 2.449489742783178;

#[test]
fn oracle_backs_frozen_uncertainties() {
    let dp = 1.0; // hbar / 2 sigma at sigma = 0.5
    let e_mean = 0.5 + 0.5; // kinetic + zero point, v0 = 1
    let h2 = common::p4_moment(1.0, dp) / 4.0;
    assert!(((h2 - e_mean * e_mean).sqrt() - FREE_ENERGY_UNCERTAINTY).abs() < 1e-12);
    let h2_mean = common::p4_moment(0.0, dp) / 4.0;
    let h4_mean = common::p8_moment(0.0, dp) / 16.0;
    assert!(((h4_mean - h2_mean * h2_mean).sqrt() - FREE_H2_UNCERTAINTY).abs() < 1e-12);
}

#[test]
fn projective_speed_equals_energy_uncertainty() {
    let g = grid();
    let phi = omega(&CoherentParams::new_1d(0.0, 1.0, 0.5).unwrap(), &g).unwrap();
    let h = LinearOperator::hamiltonian(1.0, 1.0, PotentialSpec::free());
    let geometric = projective_speed(&phi, &h, 1.0).unwrap();
    assert!(
        (geometric - FREE_ENERGY_UNCERTAINTY).abs() <= 1e-8,
        "geometric {geometric:.10}"
    );
    let fd = projective_speed_fd(&phi, &h, 1.0, 1e-3).unwrap();
    assert!(
        (fd - geometric).abs() <= 1e-5,
        "fd {fd:.8} vs geometric {geometric:.8}"
    );
}

#[test]
fn stationary_state_moves_only_in_phase() {
    // Oscillator ground state: sigma = sqrt(hbar / 2 m omega), E = omega / 2.
    let g = grid();
    let sigma = (0.5f64).sqrt();
    let phi = omega(&CoherentParams::new_1d(0.0, 0.0, sigma).unwrap(), &g).unwrap();
    let h = LinearOperator::hamiltonian(1.0, 1.0, PotentialSpec::harmonic_1d(1.0));
    let projective = projective_speed(&phi, &h, 1.0).unwrap();
    assert!(projective <= 1e-6, "projective speed {projective:.3e}");
    let h_phi = h.apply(&phi).unwrap();
    let full_speed = h_phi.l2_norm();
    assert!((full_speed - 0.5).abs() <= 1e-8, "full speed {full_speed:.10}");
    // A wide sample interval keeps the arccos noise floor (~sqrt(eps)/dt)
    // below the tolerance; the state only turns its phase, so no truncation
    // error is traded away.
    let fd = projective_speed_fd(&phi, &h, 1.0, 0.1).unwrap();
    assert!(fd <= 1e-6, "fd projective speed {fd:.3e}");
}

#[test]
fn acceleration_decomposition_matches_moment_oracle() {
    let g = grid();
    let phi = omega(&CoherentParams::new_1d(0.0, 0.0, 0.5).unwrap(), &g).unwrap();
    let h = LinearOperator::hamiltonian(1.0, 1.0, PotentialSpec::free());
    let acc = acceleration_decomposition(&phi, &h, 1.0).unwrap();
    assert!(acc.phase_tangential.abs() <= 1e-10);
    // Radial magnitude is the squared speed <h^2> = <p^4>/4 = 0.75.
    assert!((acc.radial_magnitude - 0.75).abs() <= 1e-8);
    let relative = (acc.orthogonal_norm - FREE_H2_UNCERTAINTY).abs() / FREE_H2_UNCERTAINTY;
    assert!(relative <= 1e-6, "orthogonal norm {:.10}", acc.orthogonal_norm);
}

#[test]
fn stationary_state_has_no_orthogonal_acceleration() {
    let g = grid();
    let sigma = (0.5f64).sqrt();
    let phi = omega(&CoherentParams::new_1d(0.0, 0.0, sigma).unwrap(), &g).unwrap();
    let h = LinearOperator::hamiltonian(1.0, 1.0, PotentialSpec::harmonic_1d(1.0));
    let acc = acceleration_decomposition(&phi, &h, 1.0).unwrap();
    assert!(acc.orthogonal_norm <= 1e-6, "orthogonal {:.3e}", acc.orthogonal_norm);
    // Radial magnitude = speed^2 = E^2 = 0.25.
    assert!((acc.radial_magnitude - 0.25).abs() <= 1e-8);
}

#[test]
fn embedded_points_at_unit_reduced_separation() {
    // (a - b)^2 / 4 sigma^2 = 1 gives distance arccos(e^{-1/2}).
    let g = grid();
    let sigma = 1.0;
    let a = sample_coherent(&CoherentParams::new_1d(-1.0, 0.0, sigma).unwrap(), &g).unwrap();
    let b = sample_coherent(&CoherentParams::new_1d(1.0, 0.0, sigma).unwrap(), &g).unwrap();
    let rho = fubini_study_distance(&a, &b).unwrap();
    let expected = (-0.5f64).exp().acos();
    assert!((rho - expected).abs() <= 1e-9, "rho {rho:.10} vs {expected:.10}");
    assert!((expected - 0.9191066572935884).abs() < 1e-12);
}

#[test]
fn fubini_study_distance_is_unitarily_invariant() {
    let g = grid();
    let a0 = omega(&CoherentParams::new_1d(-1.0, 0.5, 0.7).unwrap(), &g).unwrap();
    let b0 = omega(&CoherentParams::new_1d(1.0, -0.5, 0.7).unwrap(), &g).unwrap();
    let before = fubini_study_distance(&a0, &b0).unwrap();
    let potential = PotentialSpec::harmonic_1d(1.0);
    let opts = EvolveOptions::default();
    let ta = propagate(&a0, &potential, 1.0, 1.0, 2e-3, 100, opts).unwrap();
    let tb = propagate(&b0, &potential, 1.0, 1.0, 2e-3, 100, opts).unwrap();
    let after = fubini_study_distance(
        ta.final_state().unwrap(),
        tb.final_state().unwrap(),
    )
    .unwrap();
    assert!((before - after).abs() <= 1e-8, "before {before} after {after}");
}

#[test]
fn energy_mean_and_uncertainty_conserved_along_evolution() {
    let g = grid();
    let phi = omega(&CoherentParams::new_1d(1.0, 0.0, 0.5).unwrap(), &g).unwrap();
    // The splitting conserves a modified energy; dt is chosen so its O(dt^2)
    // distance from the true one sits below the drift tolerance.
    let traj = propagate(
        &phi,
        &PotentialSpec::harmonic_1d(1.0),
        1.0,
        1.0,
        5e-4,
        1000,
        EvolveOptions::default(),
    )
    .unwrap();
    let e0 = traj.diagnostics[0].energy_mean;
    let u0 = traj.diagnostics[0].energy_uncertainty;
    for d in &traj.diagnostics {
        assert!((d.energy_mean - e0).abs() <= 1e-8 * e0.abs());
        assert!((d.energy_uncertainty - u0).abs() <= 1e-8 * u0.abs());
    }
}
