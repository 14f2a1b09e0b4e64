//! Evolution-level identities: the free-spreading law, constancy of the
//! transported spreading component, the time-dilated spatial projection,
//! Ehrenfest residuals over long runs, and the projection-rate identity with
//! and without explicit time dependence.

mod common;

use num_complex::Complex64;
use qclab::{
    ehrenfest_residuals, l2_inner, newton_integrate, omega, projection_rate_check, propagate,
    state_velocity, tangent_frame, tangent_frame_for_state, CoherentParams, EvolveOptions,
    GridSpec, PotentialSpec, ScheduleForm, SplitStepPropagator, TimeDependence, WaveFunction,
};

fn grid() -> GridSpec {
    GridSpec::new_1d(1024, 40.0).unwrap()
}

#[test]
fn transported_spreading_component_is_constant() {
    // The spreading direction carried along the (unitary) evolution keeps a
    // constant projection sqrt(2) hbar / 8 m sigma^2 under free motion,
    // tested over one natural spreading time 2 m sigma^2 / hbar.
    let g = grid();
    let sigma = 0.5;
    let params = CoherentParams::new_1d(0.0, 0.0, sigma).unwrap();
    let potential = PotentialSpec::free();
    let expected = std::f64::consts::SQRT_2 / (8.0 * sigma * sigma);
    let mut phi = omega(&params, &g).unwrap();
    let frame0 = tangent_frame(&params, &g).unwrap();
    let mut spread_dir = frame0.spreading.clone();
    let horizon = 2.0 * sigma * sigma;
    let dt = 1e-3;
    let steps = (horizon / dt).round() as usize;
    let stepper = SplitStepPropagator::new(g, potential.clone(), 1.0, 1.0, dt).unwrap();
    let mut worst = 0.0f64;
    for step in 0..steps {
        let t = step as f64 * dt;
        if step % 50 == 0 {
            let vel = state_velocity(&phi, &potential, 1.0, 1.0, t).unwrap();
            let projection = l2_inner(&vel, &spread_dir).unwrap().re;
            worst = worst.max((projection - expected).abs());
        }
        phi = stepper.step(&phi, t).unwrap();
        spread_dir = stepper.step(&spread_dir, t).unwrap();
    }
    assert!(worst <= 1e-4, "spreading drift {worst:.3e} (target {expected:.6})");
}

#[test]
fn spatial_component_scales_with_measured_width() {
    // At t > 0 the spatial projection (frame taken from the state itself at
    // the measured center and width) equals v_g / 2 sigma_t.
    let g = grid();
    let params = CoherentParams::new_1d(-2.0, 1.0, 0.5).unwrap();
    let potential = PotentialSpec::free();
    let traj = propagate(
        &phi0(&params, &g),
        &potential,
        1.0,
        1.0,
        1e-3,
        1000,
        EvolveOptions {
            snapshot_stride: 250,
            ..EvolveOptions::default()
        },
    )
    .unwrap();
    for (step, state) in &traj.snapshots {
        if *step == 0 {
            continue;
        }
        let t = *step as f64 * traj.dt;
        let center = state.position_mean(0);
        let sigma_t = state.sigma_measured(0);
        let frame = tangent_frame_for_state(state, &[center], sigma_t, 1.0).unwrap();
        let vel = state_velocity(state, &potential, 1.0, 1.0, t).unwrap();
        let measured = l2_inner(&vel, &frame.spatial[0]).unwrap().re;
        let expected = 1.0 / (2.0 * sigma_t);
        assert!(
            (measured - expected).abs() <= 1e-4,
            "t {t}: spatial {measured:.6} vs {expected:.6}"
        );
    }
}

fn phi0(params: &CoherentParams, g: &GridSpec) -> WaveFunction {
    omega(params, g).unwrap()
}

#[test]
fn ehrenfest_residuals_free_linear_harmonic() {
    let g = grid();
    // Free: ten natural times of the packet.
    let free = propagate(
        &phi0(&CoherentParams::new_1d(-2.0, 1.0, 1.0).unwrap(), &g),
        &PotentialSpec::free(),
        1.0,
        1.0,
        2e-3,
        1500,
        EvolveOptions::default(),
    )
    .unwrap();
    let r_free = ehrenfest_residuals(&free, 1.0).unwrap();
    assert!(r_free.max_r1() <= 1e-8 && r_free.max_r2() <= 1e-8);

    // Linear force: the packet accelerates, so keep the run inside the box.
    let linear = propagate(
        &phi0(&CoherentParams::new_1d(-4.0, 0.0, 1.0).unwrap(), &g),
        &PotentialSpec::linear_1d(2.0),
        1.0,
        1.0,
        2e-3,
        1250,
        EvolveOptions::default(),
    )
    .unwrap();
    let r_linear = ehrenfest_residuals(&linear, 1.0).unwrap();
    assert!(
        r_linear.max_r1() <= 1e-6 && r_linear.max_r2() <= 1e-6,
        "linear residuals {:.3e} {:.3e}",
        r_linear.max_r1(),
        r_linear.max_r2()
    );
    // d<p>/dt equals the constant force.
    let k = r_linear.times.len() / 2;
    let mid = &linear.diagnostics;
    let dpdt = (mid[k + 1].p_mean[0] - mid[k - 1].p_mean[0]) / (2.0 * linear.dt);
    assert!((dpdt - 2.0).abs() <= 1e-6, "dp/dt {dpdt:.8}");

    // Harmonic: ten periods.
    let dt = 2e-3;
    let steps = (10.0 * std::f64::consts::TAU / dt).round() as usize;
    let harmonic = propagate(
        &phi0(&CoherentParams::new_1d(1.0, 0.0, 0.5).unwrap(), &g),
        &PotentialSpec::harmonic_1d(1.0),
        1.0,
        1.0,
        dt,
        steps,
        EvolveOptions::default(),
    )
    .unwrap();
    let r_harm = ehrenfest_residuals(&harmonic, 1.0).unwrap();
    assert!(
        r_harm.max_r1() <= 1e-6 && r_harm.max_r2() <= 1e-6,
        "harmonic residuals {:.3e} {:.3e}",
        r_harm.max_r1(),
        r_harm.max_r2()
    );
    assert!(harmonic.norm_drift() <= 1e-8);
}

#[test]
fn harmonic_center_tracks_newton_oracle_over_ten_periods() {
    let g = GridSpec::new_1d(512, 20.0).unwrap();
    let dt = 4e-4;
    let period = std::f64::consts::TAU;
    let steps = (10.0 * period / dt).round() as usize;
    let traj = propagate(
        &phi0(&CoherentParams::new_1d(1.0, 0.0, 0.5).unwrap(), &g),
        &PotentialSpec::harmonic_1d(1.0),
        1.0,
        1.0,
        dt,
        steps,
        EvolveOptions::default(),
    )
    .unwrap();
    let oracle = newton_integrate(1.0, &PotentialSpec::harmonic_1d(1.0), &[1.0], &[0.0], dt, steps)
        .unwrap();
    let mut worst = 0.0f64;
    for (k, d) in traj.diagnostics.iter().enumerate() {
        worst = worst.max((d.x_mean[0] - oracle.positions[k][0]).abs());
    }
    assert!(worst <= 1e-6, "max |<x> - newton| = {worst:.3e}");
}

#[test]
fn projection_rate_with_time_dependent_force() {
    let g = grid();
    let params = CoherentParams::new_1d(0.0, 0.0, 0.5).unwrap();
    // V(x, t) = -F(t) x with F(0) = 2 for both schedules.
    for schedule in [
        ScheduleForm::Cosine { omega: 1.5 },
        ScheduleForm::Ramp { rate: -0.7 },
    ] {
        let potential = PotentialSpec::linear_1d(2.0)
            .with_time_dependence(TimeDependence::Multiplicative { schedule });
        let check = projection_rate_check(&params, &potential, 1.0, &g, 1e-3).unwrap();
        assert!((check.expected - 2.0).abs() <= 1e-12);
        assert!(
            check.residual <= 1e-5,
            "schedule {schedule:?}: residual {:.3e}",
            check.residual
        );
    }
}

#[test]
fn renormalization_events_are_logged_not_hidden() {
    let g = grid();
    let traj = propagate(
        &phi0(&CoherentParams::new_1d(0.0, 1.0, 0.5).unwrap(), &g),
        &PotentialSpec::free(),
        1.0,
        1.0,
        1e-3,
        2000,
        EvolveOptions::default(),
    )
    .unwrap();
    // Whether or not rounding ever crossed the threshold, every logged event
    // must carry the actual pre-correction drift.
    for (step, drift) in &traj.renormalizations {
        assert!(*step > 0 && *drift > 1e-10 && *drift < 1e-6);
    }
    assert!(traj.norm_drift() <= 1e-8);
}

#[test]
fn boundary_leak_aborts_run() {
    let g = GridSpec::new_1d(256, 20.0).unwrap();
    // Fast packet: reaches the edge well inside the run.
    let params = CoherentParams::new_1d(0.0, 6.0, 0.7).unwrap();
    let phi = omega(&params, &g).unwrap();
    let result = propagate(
        &phi,
        &PotentialSpec::free(),
        1.0,
        1.0,
        1e-3,
        3000,
        EvolveOptions::default(),
    );
    assert!(matches!(result, Err(qclab::Error::BoundaryLeak { .. })));
}

#[test]
fn additive_schedule_shifts_only_the_phase() {
    let g = grid();
    let params = CoherentParams::new_1d(0.0, 0.5, 0.7).unwrap();
    let base = PotentialSpec::free();
    let shifted = PotentialSpec::free().with_time_dependence(TimeDependence::Additive {
        schedule: ScheduleForm::Ramp { rate: 0.4 },
    });
    let steps = 200;
    let t_a = propagate(&phi0(&params, &g), &base, 1.0, 1.0, 1e-3, steps, EvolveOptions::default())
        .unwrap();
    let t_b =
        propagate(&phi0(&params, &g), &shifted, 1.0, 1.0, 1e-3, steps, EvolveOptions::default())
            .unwrap();
    let a = t_a.final_state().unwrap();
    let b = t_b.final_state().unwrap();
    // Same ray: the overlap modulus is 1 even though the phases differ.
    let overlap = l2_inner(a, b).unwrap();
    assert!((overlap.norm() - 1.0).abs() <= 1e-10);
    let relative_phase = overlap.arg();
    assert!(relative_phase.abs() > 1e-3, "phase {relative_phase:.3e}");
    let _ = Complex64::default();
}
