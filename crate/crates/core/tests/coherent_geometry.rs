//! Velocity decomposition at packet states and the isometry of the
//! phase-space embedding. Expected component values are frozen from the
//! Gaussian-moment oracle evaluated in `oracle_moments_back_the_frozen_values`.

mod common;

use num_complex::Complex64;
use qclab::{
    decompose_velocity, l2_inner, omega, phase_space_speed_sq, state_velocity, tangent_frame,
    CoherentParams, GridSpec, PotentialSpec, ScheduleForm, TimeDependence,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid() -> GridSpec {
    GridSpec::new_1d(2048, 40.0).unwrap()
}

const FREE_PHASE: f64 = 1.0; // (K + hbar^2 / 8 m sigma^2) / hbar = 0.5 + 0.5
const FREE_SPATIAL: f64 = 1.0; // v0 / 2 sigma
const FREE_SPREADING: f64 = std::f64::consts::SQRT_2 / 2.0; // sqrt(2) hbar / 8 sigma^2 m
const FREE_SPEED_SQ: f64 = 2.5; // <h^2> / hbar^2 = <p^4> / 4
const LINEAR_MOMENTUM: f64 = 1.0; // F sigma / hbar with F = 2, sigma = 0.5

#[test]
fn oracle_moments_back_the_frozen_values() {
    // sigma = 0.5, v0 = 1, hbar = m = 1: dp = hbar / 2 sigma = 1.
    let (sigma, v0) = (0.5, 1.0);
    let dp = 1.0 / (2.0 * sigma);
    let kinetic = 0.5 * v0 * v0;
    let zero_point = 1.0 / (8.0 * sigma * sigma);
    assert!((FREE_PHASE - (kinetic + zero_point)).abs() < 1e-15);
    assert!((FREE_SPATIAL - v0 / (2.0 * sigma)).abs() < 1e-15);
    assert!((FREE_SPREADING - std::f64::consts::SQRT_2 / (8.0 * sigma * sigma)).abs() < 1e-15);
    // ||d phi / dt||^2 = <p^4> / (4 m^2 hbar^2) for the free packet.
    assert!((FREE_SPEED_SQ - common::p4_moment(v0, dp) / 4.0).abs() < 1e-12);
    // Consistency of the component sum with the squared speed.
    let sum = FREE_PHASE * FREE_PHASE
        + FREE_SPATIAL * FREE_SPATIAL
        + FREE_SPREADING * FREE_SPREADING;
    assert!((sum - FREE_SPEED_SQ).abs() < 1e-12);
}

#[test]
fn free_packet_decomposition() {
    let g = grid();
    let params = CoherentParams::new_1d(0.0, 1.0, 0.5).unwrap();
    let phi = omega(&params, &g).unwrap();
    let frame = tangent_frame(&params, &g).unwrap();
    let vel = state_velocity(&phi, &PotentialSpec::free(), 1.0, 1.0, 0.0).unwrap();
    let dec = decompose_velocity(&vel, &frame).unwrap();
    assert!((dec.phase - FREE_PHASE).abs() <= 1e-8, "phase {}", dec.phase);
    assert!((dec.spatial[0] - FREE_SPATIAL).abs() <= 1e-8);
    assert!(dec.momentum[0].abs() <= 1e-8);
    assert!((dec.spreading - FREE_SPREADING).abs() <= 1e-8);
    assert!((dec.speed_sq - FREE_SPEED_SQ).abs() <= 1e-8);
    assert!(dec.residual_norm <= 1e-8, "residual {:.3e}", dec.residual_norm);
    assert!(dec.completeness_defect() <= 1e-10);
}

#[test]
fn linear_potential_adds_momentum_component() {
    let g = grid();
    let params = CoherentParams::new_1d(0.0, 1.0, 0.5).unwrap();
    let potential = PotentialSpec::linear_1d(2.0);
    let phi = omega(&params, &g).unwrap();
    let frame = tangent_frame(&params, &g).unwrap();
    let vel = state_velocity(&phi, &potential, 1.0, 1.0, 0.0).unwrap();
    let dec = decompose_velocity(&vel, &frame).unwrap();
    assert!((dec.momentum[0] - LINEAR_MOMENTUM).abs() <= 1e-8);
    assert!((dec.spatial[0] - FREE_SPATIAL).abs() <= 1e-8);
    assert!((dec.spreading - FREE_SPREADING).abs() <= 1e-8);
    // V(0) = 0 leaves the phase component at the free value.
    assert!((dec.phase - FREE_PHASE).abs() <= 1e-8);
    // Speed picks up exactly the new component: 2.5 + 1.
    assert!((dec.speed_sq - 3.5).abs() <= 1e-8, "speed_sq {}", dec.speed_sq);
    assert!(dec.residual_norm <= 1e-8);
}

#[test]
fn frozen_time_dependent_potential_matches_static_at_zero() {
    let g = grid();
    let params = CoherentParams::new_1d(0.0, 0.0, 0.5).unwrap();
    let base = PotentialSpec::linear_1d(2.0);
    let scheduled = PotentialSpec::linear_1d(2.0).with_time_dependence(
        TimeDependence::Multiplicative {
            schedule: ScheduleForm::Cosine { omega: 3.0 },
        },
    );
    let phi = omega(&params, &g).unwrap();
    let frame = tangent_frame(&params, &g).unwrap();
    let dec_static = decompose_velocity(
        &state_velocity(&phi, &base, 1.0, 1.0, 0.0).unwrap(),
        &frame,
    )
    .unwrap();
    let dec_scheduled = decompose_velocity(
        &state_velocity(&phi, &scheduled, 1.0, 1.0, 0.0).unwrap(),
        &frame,
    )
    .unwrap();
    assert!((dec_static.momentum[0] - dec_scheduled.momentum[0]).abs() <= 1e-12);
    assert!((dec_static.phase - dec_scheduled.phase).abs() <= 1e-12);
    assert!((dec_static.spreading - dec_scheduled.spreading).abs() <= 1e-12);
}

#[test]
fn quadratic_potential_keeps_decomposition_complete() {
    // The four directions span the velocity exactly for quadratic
    // potentials; component values approach the linear-approximation formulas
    // only in the small-sigma regime.
    let g = grid();
    let k = 1.0;
    let params = CoherentParams::new_1d(1.0, 0.0, 0.1).unwrap();
    let phi = omega(&params, &g).unwrap();
    let frame = tangent_frame(&params, &g).unwrap();
    let vel = state_velocity(&phi, &PotentialSpec::harmonic_1d(k), 1.0, 1.0, 0.0).unwrap();
    let dec = decompose_velocity(&vel, &frame).unwrap();
    assert!(dec.residual_norm <= 1e-8, "residual {:.3e}", dec.residual_norm);
    // Momentum component: m w sigma / hbar with m w = -k a = -1.
    let expected_momentum = -k * 1.0 * 0.1;
    assert!(
        (dec.momentum[0] - expected_momentum).abs() <= 1e-4 * expected_momentum.abs(),
        "momentum {} vs {}",
        dec.momentum[0],
        expected_momentum
    );
}

#[test]
fn random_phase_space_paths_are_isometric() {
    // Horizontal (projective) finite-difference speed on the grid against the
    // closed-form metric, sigma fixed: 20 random paths.
    let g = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let dt = 1e-4;
    for _ in 0..20 {
        let a0 = rng.random_range(-2.0..2.0);
        let p0 = rng.random_range(-1.5..1.5);
        let sigma = rng.random_range(0.5..1.0);
        let da = rng.random_range(-1.0..1.0);
        let dp = rng.random_range(-1.0..1.0);
        let params_at = |t: f64| {
            CoherentParams::new_1d(a0 + da * t, p0 + dp * t, sigma).unwrap()
        };
        let measured = horizontal_speed_sq(&params_at, dt, &g);
        let expected =
            phase_space_speed_sq(&[da], &[dp], 0.0, &params_at(0.0)).unwrap();
        assert!(
            (measured - expected).abs() <= 1e-6 * expected.max(1.0),
            "measured {measured:.9} expected {expected:.9}"
        );
    }
}

#[test]
fn width_varying_paths_follow_extended_metric() {
    let g = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(123);
    let dt = 1e-4;
    for _ in 0..10 {
        let a0 = rng.random_range(-1.5..1.5);
        let p0 = rng.random_range(-1.0..1.0);
        let s0 = rng.random_range(0.6..1.0);
        let da = rng.random_range(-1.0..1.0);
        let dp = rng.random_range(-1.0..1.0);
        let ds = rng.random_range(-0.3..0.3);
        let params_at = |t: f64| {
            CoherentParams::new_1d(a0 + da * t, p0 + dp * t, s0 + ds * t).unwrap()
        };
        let measured = horizontal_speed_sq(&params_at, dt, &g);
        let expected = phase_space_speed_sq(&[da], &[dp], ds, &params_at(0.0)).unwrap();
        assert!(
            (measured - expected).abs() <= 1e-6 * expected.max(1.0),
            "measured {measured:.9} expected {expected:.9}"
        );
    }
}

/// Squared speed of the projected (ray-space) motion: the finite-difference
/// derivative of the packet path with its phase-circle component removed.
fn horizontal_speed_sq(
    params_at: &dyn Fn(f64) -> CoherentParams,
    dt: f64,
    g: &GridSpec,
) -> f64 {
    let plus = omega(&params_at(dt), g).unwrap();
    let minus = omega(&params_at(-dt), g).unwrap();
    let base = omega(&params_at(0.0), g).unwrap();
    let derivative = plus
        .add_scaled(Complex64::new(-1.0, 0.0), &minus)
        .unwrap()
        .scaled(Complex64::new(1.0 / (2.0 * dt), 0.0));
    let phase_component = l2_inner(&derivative, &base.scaled(-Complex64::I)).unwrap().re;
    derivative.l2_norm_sq() - phase_component * phase_component
}
