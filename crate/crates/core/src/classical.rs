//! Newtonian reference dynamics and the constrained-to-manifold evolution:
//! at every step the Schroedinger velocity of the packet is projected onto
//! the spatial and momentum tangent directions, converted back to phase-space
//! rates, and integrated; everything orthogonal to the manifold is discarded
//! (its norm is logged). The width sigma stays frozen, since the spreading
//! direction is orthogonal to the fixed-width manifold.
//!
//! Also here: the action functional on constrained delta paths, evaluated
//! through the closed-form distributional pairings, which reduces to the
//! classical action in 2 sigma = 1 units.

use crate::coherent::{omega, tangent_frame, CoherentParams};
use crate::error::{Error, Result};
use crate::evolve::state_velocity;
use crate::grid::{l2_inner, GridSpec};
use crate::kernel::{delta_path_projections, KernelSpace};
use crate::potential::PotentialSpec;

/// Sampled solution of the Newton equations.
#[derive(Debug, Clone)]
pub struct ClassicalTrajectory {
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
}

/// Classic fourth-order Runge-Kutta on (a, v) with a' = v, v' = -grad V / m.
pub fn newton_integrate(
    mass: f64,
    potential: &PotentialSpec,
    a0: &[f64],
    v0: &[f64],
    dt: f64,
    steps: usize,
) -> Result<ClassicalTrajectory> {
    if a0.len() != v0.len() {
        return Err(Error::DimensionMismatch {
            expected: a0.len(),
            got: v0.len(),
        });
    }
    let d = a0.len();
    let accel = |a: &[f64], t: f64| -> Vec<f64> {
        potential
            .gradient(a, t)
            .into_iter()
            .map(|g| -g / mass)
            .collect()
    };
    let mut times = Vec::with_capacity(steps + 1);
    let mut positions = Vec::with_capacity(steps + 1);
    let mut velocities = Vec::with_capacity(steps + 1);
    let mut a = a0.to_vec();
    let mut v = v0.to_vec();
    times.push(0.0);
    positions.push(a.clone());
    velocities.push(v.clone());
    for step in 1..=steps {
        let t = (step - 1) as f64 * dt;
        let (ka1, kv1) = (v.clone(), accel(&a, t));
        let a2: Vec<f64> = (0..d).map(|i| a[i] + 0.5 * dt * ka1[i]).collect();
        let v2: Vec<f64> = (0..d).map(|i| v[i] + 0.5 * dt * kv1[i]).collect();
        let (ka2, kv2) = (v2.clone(), accel(&a2, t + 0.5 * dt));
        let a3: Vec<f64> = (0..d).map(|i| a[i] + 0.5 * dt * ka2[i]).collect();
        let v3: Vec<f64> = (0..d).map(|i| v[i] + 0.5 * dt * kv2[i]).collect();
        let (ka3, kv3) = (v3.clone(), accel(&a3, t + 0.5 * dt));
        let a4: Vec<f64> = (0..d).map(|i| a[i] + dt * ka3[i]).collect();
        let v4: Vec<f64> = (0..d).map(|i| v[i] + dt * kv3[i]).collect();
        let (ka4, kv4) = (v4.clone(), accel(&a4, t + dt));
        for i in 0..d {
            a[i] += dt / 6.0 * (ka1[i] + 2.0 * ka2[i] + 2.0 * ka3[i] + ka4[i]);
            v[i] += dt / 6.0 * (kv1[i] + 2.0 * kv2[i] + 2.0 * kv3[i] + kv4[i]);
            if !(a[i].is_finite() && v[i].is_finite()) {
                return Err(Error::StepInstability { step });
            }
        }
        times.push(step as f64 * dt);
        positions.push(a.clone());
        velocities.push(v.clone());
    }
    Ok(ClassicalTrajectory {
        times,
        positions,
        velocities,
    })
}

/// Phase-space rates obtained by projecting the packet's Schroedinger
/// velocity on the spatial and momentum frame directions:
/// da/dt = 2 sigma c_spatial, dp/dt = (hbar / sigma) c_momentum.
pub fn constrained_rates(
    params: &CoherentParams,
    potential: &PotentialSpec,
    mass: f64,
    grid: &GridSpec,
    t: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let phi = omega(params, grid)?;
    let frame = tangent_frame(params, grid)?;
    let vel = state_velocity(&phi, potential, mass, params.hbar, t)?;
    let d = params.dim();
    let mut a_dot = Vec::with_capacity(d);
    let mut p_dot = Vec::with_capacity(d);
    for axis in 0..d {
        let c_x = l2_inner(&vel, &frame.spatial[axis])?.re;
        let c_p = l2_inner(&vel, &frame.momentum[axis])?.re;
        a_dot.push(2.0 * params.sigma * c_x);
        p_dot.push(params.hbar / params.sigma * c_p);
    }
    Ok((a_dot, p_dot))
}

/// Parameter trajectory of the constrained evolution, with the per-step norm
/// of the discarded velocity component (orthogonal to the manifold tangent,
/// global-phase motion excluded).
#[derive(Debug, Clone)]
pub struct ConstrainedTrajectory {
    pub times: Vec<f64>,
    pub centers: Vec<Vec<f64>>,
    pub momenta: Vec<Vec<f64>>,
    pub discarded_norm: Vec<f64>,
}

/// Evolve (a, p) by RK4 on the projected rates; sigma stays fixed.
pub fn constrained_evolve(
    params0: &CoherentParams,
    potential: &PotentialSpec,
    mass: f64,
    grid: &GridSpec,
    dt: f64,
    steps: usize,
) -> Result<ConstrainedTrajectory> {
    let sigma = params0.sigma;
    let hbar = params0.hbar;
    let d = params0.dim();
    let at = |center: &[f64], momentum: &[f64]| -> Result<CoherentParams> {
        Ok(CoherentParams {
            center: center.to_vec(),
            momentum: momentum.to_vec(),
            sigma,
            global_phase: 0.0,
            hbar,
        })
    };
    let rates = |a: &[f64], p: &[f64], t: f64| -> Result<(Vec<f64>, Vec<f64>)> {
        constrained_rates(&at(a, p)?, potential, mass, grid, t)
    };
    let mut a = params0.center.clone();
    let mut p = params0.momentum.clone();
    let mut times = Vec::with_capacity(steps + 1);
    let mut centers = Vec::with_capacity(steps + 1);
    let mut momenta = Vec::with_capacity(steps + 1);
    let mut discarded = Vec::with_capacity(steps + 1);
    let log_discarded = |a: &[f64], p: &[f64], t: f64| -> Result<f64> {
        let params = at(a, p)?;
        potential.require_force_linearity(a, sigma, t)?;
        let phi = omega(&params, grid)?;
        let frame = tangent_frame(&params, grid)?;
        let vel = state_velocity(&phi, potential, mass, hbar, t)?;
        let mut captured = l2_inner(&vel, &frame.phase)?.re.powi(2);
        for axis in 0..d {
            captured += l2_inner(&vel, &frame.spatial[axis])?.re.powi(2);
            captured += l2_inner(&vel, &frame.momentum[axis])?.re.powi(2);
        }
        Ok((vel.l2_norm_sq() - captured).max(0.0).sqrt())
    };
    times.push(0.0);
    centers.push(a.clone());
    momenta.push(p.clone());
    discarded.push(log_discarded(&a, &p, 0.0)?);
    for step in 1..=steps {
        let t = (step - 1) as f64 * dt;
        let (ka1, kp1) = rates(&a, &p, t)?;
        let half = |base: &[f64], k: &[f64]| -> Vec<f64> {
            base.iter().zip(k).map(|(b, ki)| b + 0.5 * dt * ki).collect()
        };
        let (ka2, kp2) = rates(&half(&a, &ka1), &half(&p, &kp1), t + 0.5 * dt)?;
        let (ka3, kp3) = rates(&half(&a, &ka2), &half(&p, &kp2), t + 0.5 * dt)?;
        let full_a: Vec<f64> = a.iter().zip(&ka3).map(|(b, k)| b + dt * k).collect();
        let full_p: Vec<f64> = p.iter().zip(&kp3).map(|(b, k)| b + dt * k).collect();
        let (ka4, kp4) = rates(&full_a, &full_p, t + dt)?;
        for i in 0..d {
            a[i] += dt / 6.0 * (ka1[i] + 2.0 * ka2[i] + 2.0 * ka3[i] + ka4[i]);
            p[i] += dt / 6.0 * (kp1[i] + 2.0 * kp2[i] + 2.0 * kp3[i] + kp4[i]);
            if !(a[i].is_finite() && p[i].is_finite()) {
                return Err(Error::StepInstability { step });
            }
        }
        times.push(step as f64 * dt);
        centers.push(a.clone());
        momenta.push(p.clone());
        discarded.push(log_discarded(&a, &p, step as f64 * dt)?);
    }
    Ok(ConstrainedTrajectory {
        times,
        centers,
        momenta,
        discarded_norm: discarded,
    })
}

/// Action of a delta path in the kernel space: the kinetic term comes from
/// the closed-form H-speed of the path, the potential term from the sifting
/// property, integrated by the trapezoid rule. Reduces to the classical
/// action in 2 sigma = 1 units.
pub fn action_functional(
    times: &[f64],
    path: &[Vec<f64>],
    mass: f64,
    potential: &PotentialSpec,
    space: &KernelSpace,
) -> Result<f64> {
    let proj = delta_path_projections(times, path, space)?;
    let lagrangian: Vec<f64> = (0..times.len())
        .map(|k| {
            let kinetic = 0.5 * mass * proj.h_speed[k] * proj.h_speed[k];
            kinetic - potential.value(&path[k], times[k])
        })
        .collect();
    Ok(trapezoid(times, &lagrangian))
}

/// The discretized classical action with the same velocity stencils and the
/// same quadrature; the direct route the kernel-space action must match.
pub fn classical_action(
    times: &[f64],
    path: &[Vec<f64>],
    mass: f64,
    potential: &PotentialSpec,
) -> Result<f64> {
    // Euclidean speed from the unit-embedding projections: at 2 sigma = 1 the
    // frame vectors are unit, so the H-speed equals |da/dt|. To stay
    // independent, differentiate directly here.
    if times.len() != path.len() || times.len() < 3 {
        return Err(Error::InvalidGrid(format!(
            "path needs >= 3 samples ({} given)",
            times.len()
        )));
    }
    let dt = times[1] - times[0];
    let spread = times
        .windows(2)
        .map(|w| ((w[1] - w[0]) - dt).abs())
        .fold(0.0f64, f64::max);
    if !dt.is_finite() || dt <= 0.0 || spread > 1e-9 * dt.abs() {
        return Err(Error::NonUniformTimeGrid { spread });
    }
    let m = path.len();
    let d = path[0].len();
    let speed_sq = |k: usize| -> f64 {
        (0..d)
            .map(|i| {
                let v = if k == 0 {
                    (-3.0 * path[0][i] + 4.0 * path[1][i] - path[2][i]) / (2.0 * dt)
                } else if k == m - 1 {
                    (3.0 * path[m - 1][i] - 4.0 * path[m - 2][i] + path[m - 3][i]) / (2.0 * dt)
                } else {
                    (path[k + 1][i] - path[k - 1][i]) / (2.0 * dt)
                };
                v * v
            })
            .sum()
    };
    let lagrangian: Vec<f64> = (0..m)
        .map(|k| 0.5 * mass * speed_sq(k) - potential.value(&path[k], times[k]))
        .collect();
    Ok(trapezoid(times, &lagrangian))
}

fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (v[0] + v[1]) * (t[1] - t[0]))
        .sum()
}
