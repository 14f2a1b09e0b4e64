//! Schroedinger propagation by second-order operator splitting and the
//! evolution-level checks built on it: moment dynamics (Ehrenfest residuals),
//! the free-spreading law, and the rate identity for the spatial projection.
//!
//! The stepper alternates half potential kicks and a full spectral kinetic
//! step; time-dependent potentials are sampled at the midpoint of each step,
//! keeping the scheme second order. Unitarity is exact per factor, so norm
//! drift only measures rounding; it is corrected (and logged) when it
//! exceeds a threshold.

use crate::coherent::{tangent_frame_for_state, CoherentParams};
use crate::error::{Error, Result};
use crate::grid::{l2_inner, GridSpec, WaveFunction};
use crate::potential::PotentialSpec;
use crate::spectral::{transform_axis, SpectralEngine};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Maximum phase advance (radians) per step allowed by the dt gate.
pub const PHASE_STEP_LIMIT: f64 = 0.1;

/// Norm drift above which the state is renormalized mid-run.
pub const RENORM_THRESHOLD: f64 = 1e-10;

/// Boundary shell mass at which a run aborts.
pub const LEAK_LIMIT: f64 = 1e-10;

/// One Strang step: exp(-i V dt/2) exp(-i K dt) exp(-i V dt/2).
pub struct SplitStepPropagator {
    grid: GridSpec,
    hbar: f64,
    dt: f64,
    potential: PotentialSpec,
    engine: SpectralEngine,
    kinetic_factor: Vec<Complex64>,
    static_kick: Option<Vec<Complex64>>,
}

impl SplitStepPropagator {
    pub fn new(
        grid: GridSpec,
        potential: PotentialSpec,
        mass: f64,
        hbar: f64,
        dt: f64,
    ) -> Result<Self> {
        if !(dt.is_finite() && dt != 0.0) {
            return Err(Error::InvalidGrid(format!("dt {dt} must be nonzero")));
        }
        let n = grid.points_per_axis();
        let kappa = grid.axis_wavenumbers();
        let kinetic_phase = |k2: f64| -hbar * k2 * dt / (2.0 * mass);
        let kinetic_factor: Vec<Complex64> = match grid.dim() {
            1 => kappa
                .iter()
                .map(|k| Complex64::from_polar(1.0, kinetic_phase(k * k)))
                .collect(),
            2 => (0..n * n)
                .map(|idx| {
                    let k1 = kappa[idx / n];
                    let k2 = kappa[idx % n];
                    Complex64::from_polar(1.0, kinetic_phase(k1 * k1 + k2 * k2))
                })
                .collect(),
            _ => unreachable!(),
        };
        let static_kick = if potential.is_time_dependent() {
            None
        } else {
            Some(
                potential
                    .sample(&grid, 0.0)
                    .into_iter()
                    .map(|v| Complex64::from_polar(1.0, -v * dt / (2.0 * hbar)))
                    .collect(),
            )
        };
        Ok(Self {
            grid,
            hbar,
            dt,
            potential,
            engine: SpectralEngine::new(n),
            kinetic_factor,
            static_kick,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advance one step from time t. The potential is frozen at t + dt/2.
    pub fn step(&self, phi: &WaveFunction, t: f64) -> Result<WaveFunction> {
        if phi.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let mut buf = phi.values().to_vec();
        let owned_kick;
        let kick: &[Complex64] = match &self.static_kick {
            Some(k) => k,
            None => {
                let mid = t + self.dt / 2.0;
                owned_kick = self
                    .potential
                    .sample(&self.grid, mid)
                    .into_iter()
                    .map(|v| Complex64::from_polar(1.0, -v * self.dt / (2.0 * self.hbar)))
                    .collect::<Vec<_>>();
                &owned_kick
            }
        };
        for (v, k) in buf.iter_mut().zip(kick) {
            *v *= k;
        }
        let n = self.grid.points_per_axis();
        match self.grid.dim() {
            1 => {
                transform_axis(&self.engine, &mut buf, 1, n, 1, false);
                for (v, f) in buf.iter_mut().zip(&self.kinetic_factor) {
                    *v *= f;
                }
                transform_axis(&self.engine, &mut buf, 1, n, 1, true);
            }
            2 => {
                transform_axis(&self.engine, &mut buf, n, n, 1, false);
                transform_axis(&self.engine, &mut buf, n, n, 0, false);
                for (v, f) in buf.iter_mut().zip(&self.kinetic_factor) {
                    *v *= f;
                }
                transform_axis(&self.engine, &mut buf, n, n, 0, true);
                transform_axis(&self.engine, &mut buf, n, n, 1, true);
            }
            _ => unreachable!(),
        }
        for (v, k) in buf.iter_mut().zip(kick) {
            *v *= k;
        }
        WaveFunction::from_values(self.grid, buf)
    }
}

/// Per-step diagnostics sampled along a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub t: f64,
    pub norm: f64,
    pub energy_mean: f64,
    pub energy_uncertainty: f64,
    pub x_mean: Vec<f64>,
    pub p_mean: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Expectation of -dV/dx per axis at this time.
    pub force_mean: Vec<f64>,
}

/// A propagation record: diagnostics at every step, strided state snapshots,
/// renormalization log.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub snapshots: Vec<(usize, WaveFunction)>,
    pub renormalizations: Vec<(usize, f64)>,
}

impl Trajectory {
    pub fn final_state(&self) -> Option<&WaveFunction> {
        self.snapshots.last().map(|(_, wf)| wf)
    }

    pub fn norm_drift(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| (d.norm - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    /// Keep a state snapshot every this many steps (0 keeps only endpoints).
    pub snapshot_stride: usize,
    pub leak_check_interval: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            snapshot_stride: 0,
            leak_check_interval: 64,
        }
    }
}

/// dt gate: kinetic and potential phase advance per step must stay below
/// `PHASE_STEP_LIMIT`, evaluated at the packet's own momentum bandwidth and
/// over its spatial support.
pub fn validate_time_step(
    phi0: &WaveFunction,
    potential: &PotentialSpec,
    mass: f64,
    hbar: f64,
    dt: f64,
) -> Result<()> {
    let d = phi0.grid().dim();
    let mut kappa_eff: f64 = 0.0;
    for axis in 0..d {
        let p_mean = phi0.momentum_mean(axis, hbar);
        let p_sd = phi0.momentum_variance(axis, hbar).sqrt();
        kappa_eff = kappa_eff.max((p_mean.abs() + 5.0 * p_sd) / hbar);
    }
    let kinetic_phase = hbar * kappa_eff * kappa_eff * dt.abs() / (2.0 * mass);
    if kinetic_phase > PHASE_STEP_LIMIT {
        return Err(Error::PhaseStepTooLarge {
            phase: kinetic_phase,
            limit: PHASE_STEP_LIMIT,
        });
    }
    // Potential range over the support of the density.
    let v = potential.sample(phi0.grid(), 0.0);
    let peak = phi0
        .values()
        .iter()
        .fold(0.0f64, |m, z| m.max(z.norm_sqr()));
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for (z, vi) in phi0.values().iter().zip(&v) {
        if z.norm_sqr() > 1e-12 * peak {
            vmin = vmin.min(*vi);
            vmax = vmax.max(*vi);
        }
    }
    let potential_phase = (vmax - vmin).abs() * dt.abs() / hbar;
    if potential_phase > PHASE_STEP_LIMIT {
        return Err(Error::PhaseStepTooLarge {
            phase: potential_phase,
            limit: PHASE_STEP_LIMIT,
        });
    }
    Ok(())
}

/// Propagate for `steps` steps of size dt, recording diagnostics at every
/// step. Aborts on boundary leakage.
pub fn propagate(
    phi0: &WaveFunction,
    potential: &PotentialSpec,
    mass: f64,
    hbar: f64,
    dt: f64,
    steps: usize,
    options: EvolveOptions,
) -> Result<Trajectory> {
    validate_time_step(phi0, potential, mass, hbar, dt)?;
    let leak0 = phi0.boundary_mass();
    if leak0 > LEAK_LIMIT {
        return Err(Error::BoundaryLeak {
            step: 0,
            mass: leak0,
            limit: LEAK_LIMIT,
        });
    }
    let stepper = SplitStepPropagator::new(*phi0.grid(), potential.clone(), mass, hbar, dt)?;
    let mut state = phi0.clone();
    let mut times = Vec::with_capacity(steps + 1);
    let mut diagnostics = Vec::with_capacity(steps + 1);
    let mut snapshots = Vec::new();
    let mut renormalizations = Vec::new();
    let observer = DiagnosticsObserver::new(*phi0.grid(), potential.clone(), mass, hbar);
    times.push(0.0);
    diagnostics.push(observer.measure(&state, 0.0)?);
    snapshots.push((0, state.clone()));
    for step in 1..=steps {
        let t_prev = (step - 1) as f64 * dt;
        let mut next = stepper.step(&state, t_prev)?;
        let norm = next.l2_norm();
        if (norm - 1.0).abs() > RENORM_THRESHOLD {
            let drift = next.normalize();
            renormalizations.push((step, drift));
        }
        if step % options.leak_check_interval == 0 || step == steps {
            let mass_out = next.boundary_mass();
            if mass_out > LEAK_LIMIT {
                return Err(Error::BoundaryLeak {
                    step,
                    mass: mass_out,
                    limit: LEAK_LIMIT,
                });
            }
        }
        let t = step as f64 * dt;
        times.push(t);
        diagnostics.push(observer.measure(&next, t)?);
        let keep = options.snapshot_stride > 0 && step % options.snapshot_stride == 0;
        if keep || step == steps {
            snapshots.push((step, next.clone()));
        }
        state = next;
    }
    Ok(Trajectory {
        dt,
        times,
        diagnostics,
        snapshots,
        renormalizations,
    })
}

/// Computes the full diagnostic row with one forward and one inverse
/// transform per call.
struct DiagnosticsObserver {
    grid: GridSpec,
    potential: PotentialSpec,
    mass: f64,
    hbar: f64,
    engine: SpectralEngine,
    static_v: Option<Vec<f64>>,
}

impl DiagnosticsObserver {
    fn new(grid: GridSpec, potential: PotentialSpec, mass: f64, hbar: f64) -> Self {
        let static_v = if potential.is_time_dependent() {
            None
        } else {
            Some(potential.sample(&grid, 0.0))
        };
        Self {
            grid,
            potential,
            mass,
            hbar,
            engine: SpectralEngine::new(grid.points_per_axis()),
            static_v,
        }
    }

    fn measure(&self, state: &WaveFunction, t: f64) -> Result<StepDiagnostics> {
        let d = self.grid.dim();
        let n = self.grid.points_per_axis();
        let norm_sq = state.l2_norm_sq();
        let mut x_mean = Vec::with_capacity(d);
        let mut sigma = Vec::with_capacity(d);
        for axis in 0..d {
            x_mean.push(state.position_mean(axis));
            sigma.push(state.sigma_measured(axis));
        }
        // One spectrum for the momentum moments and the kinetic application.
        let mut spectrum = state.values().to_vec();
        match d {
            1 => transform_axis(&self.engine, &mut spectrum, 1, n, 1, false),
            2 => {
                transform_axis(&self.engine, &mut spectrum, n, n, 1, false);
                transform_axis(&self.engine, &mut spectrum, n, n, 0, false);
            }
            _ => unreachable!(),
        }
        let kappa = self.grid.axis_wavenumbers();
        let mut p_mean = vec![0.0; d];
        let mut spec_weight = 0.0;
        for (idx, z) in spectrum.iter().enumerate() {
            let w = z.norm_sqr();
            spec_weight += w;
            match d {
                1 => p_mean[0] += self.hbar * kappa[idx] * w,
                2 => {
                    p_mean[0] += self.hbar * kappa[idx / n] * w;
                    p_mean[1] += self.hbar * kappa[idx % n] * w;
                }
                _ => unreachable!(),
            }
        }
        for pm in p_mean.iter_mut() {
            *pm /= spec_weight;
        }
        // h phi = IFFT(K spectrum) + V phi.
        let mut kin = spectrum;
        for (idx, z) in kin.iter_mut().enumerate() {
            let k2 = match d {
                1 => kappa[idx] * kappa[idx],
                2 => {
                    let k1 = kappa[idx / n];
                    let k2v = kappa[idx % n];
                    k1 * k1 + k2v * k2v
                }
                _ => unreachable!(),
            };
            *z *= self.hbar * self.hbar * k2 / (2.0 * self.mass);
        }
        match d {
            1 => transform_axis(&self.engine, &mut kin, 1, n, 1, true),
            2 => {
                transform_axis(&self.engine, &mut kin, n, n, 0, true);
                transform_axis(&self.engine, &mut kin, n, n, 1, true);
            }
            _ => unreachable!(),
        }
        let owned_v;
        let v: &[f64] = match &self.static_v {
            Some(v) => v,
            None => {
                owned_v = self.potential.sample(&self.grid, t);
                &owned_v
            }
        };
        let h_values: Vec<Complex64> = kin
            .iter()
            .zip(state.values())
            .zip(v)
            .map(|((k, s), vi)| k + s * *vi)
            .collect();
        let h_phi = WaveFunction::from_values(self.grid, h_values)?;
        let energy_mean = l2_inner(&h_phi, state)?.re / norm_sq;
        let h2 = h_phi.l2_norm_sq() / norm_sq;
        let energy_uncertainty = (h2 - energy_mean * energy_mean).max(0.0).sqrt();
        let mut force_mean = vec![0.0; d];
        let w = self.grid.cell_volume();
        for axis in 0..d {
            let force = self.potential.force_samples(&self.grid, axis, t);
            force_mean[axis] = state
                .values()
                .iter()
                .zip(&force)
                .map(|(z, f)| z.norm_sqr() * f)
                .sum::<f64>()
                * w
                / norm_sq;
        }
        Ok(StepDiagnostics {
            t,
            norm: norm_sq.sqrt(),
            energy_mean,
            energy_uncertainty,
            x_mean,
            p_mean,
            sigma,
            force_mean,
        })
    }
}

/// Schroedinger velocity of a state: -(i/hbar) h phi, evaluated spectrally.
pub fn state_velocity(
    phi: &WaveFunction,
    potential: &PotentialSpec,
    mass: f64,
    hbar: f64,
    t: f64,
) -> Result<WaveFunction> {
    let tail = phi.spectral_tail_fraction();
    if tail > 1e-10 {
        return Err(Error::SpectralTail { fraction: tail });
    }
    let observer = DiagnosticsObserver::new(*phi.grid(), potential.clone(), mass, hbar);
    // Reuse the kinetic path of the observer: build h phi directly.
    let h_phi = apply_hamiltonian(&observer, phi, t)?;
    Ok(h_phi.scaled(-Complex64::I / hbar))
}

fn apply_hamiltonian(
    obs: &DiagnosticsObserver,
    state: &WaveFunction,
    t: f64,
) -> Result<WaveFunction> {
    let d = obs.grid.dim();
    let n = obs.grid.points_per_axis();
    let kappa = obs.grid.axis_wavenumbers();
    let mut kin = state.values().to_vec();
    match d {
        1 => transform_axis(&obs.engine, &mut kin, 1, n, 1, false),
        2 => {
            transform_axis(&obs.engine, &mut kin, n, n, 1, false);
            transform_axis(&obs.engine, &mut kin, n, n, 0, false);
        }
        _ => unreachable!(),
    }
    for (idx, z) in kin.iter_mut().enumerate() {
        let k2 = match d {
            1 => kappa[idx] * kappa[idx],
            2 => {
                let k1 = kappa[idx / n];
                let k2v = kappa[idx % n];
                k1 * k1 + k2v * k2v
            }
            _ => unreachable!(),
        };
        *z *= obs.hbar * obs.hbar * k2 / (2.0 * obs.mass);
    }
    match d {
        1 => transform_axis(&obs.engine, &mut kin, 1, n, 1, true),
        2 => {
            transform_axis(&obs.engine, &mut kin, n, n, 0, true);
            transform_axis(&obs.engine, &mut kin, n, n, 1, true);
        }
        _ => unreachable!(),
    }
    let v = obs.potential.sample(&obs.grid, t);
    let values = kin
        .iter()
        .zip(state.values())
        .zip(&v)
        .map(|((k, s), vi)| k + s * *vi)
        .collect();
    WaveFunction::from_values(obs.grid, values)
}

/// Residuals of the moment equations along a trajectory, by centered
/// fourth-order differences of the per-step diagnostics:
/// r1 = |d<x>/dt - <p>/m|, r2 = |d<p>/dt - <-grad V>|.
#[derive(Debug, Clone)]
pub struct EhrenfestResiduals {
    pub times: Vec<f64>,
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
}

impl EhrenfestResiduals {
    pub fn max_r1(&self) -> f64 {
        self.r1.iter().fold(0.0f64, |m, v| m.max(*v))
    }

    pub fn max_r2(&self) -> f64 {
        self.r2.iter().fold(0.0f64, |m, v| m.max(*v))
    }
}

pub fn ehrenfest_residuals(traj: &Trajectory, mass: f64) -> Result<EhrenfestResiduals> {
    let m = traj.diagnostics.len();
    if m < 5 {
        return Err(Error::StrideTooCoarse);
    }
    let d = traj.diagnostics[0].x_mean.len();
    let dt = traj.dt;
    let deriv4 = |f: &dyn Fn(usize) -> f64, k: usize| -> f64 {
        (f(k - 2) - 8.0 * f(k - 1) + 8.0 * f(k + 1) - f(k + 2)) / (12.0 * dt)
    };
    let mut times = Vec::with_capacity(m - 4);
    let mut r1 = Vec::with_capacity(m - 4);
    let mut r2 = Vec::with_capacity(m - 4);
    for k in 2..m - 2 {
        times.push(traj.diagnostics[k].t);
        let mut worst1 = 0.0f64;
        let mut worst2 = 0.0f64;
        for axis in 0..d {
            let x = |i: usize| traj.diagnostics[i].x_mean[axis];
            let p = |i: usize| traj.diagnostics[i].p_mean[axis];
            let dxdt = deriv4(&x, k);
            let dpdt = deriv4(&p, k);
            worst1 = worst1.max((dxdt - traj.diagnostics[k].p_mean[axis] / mass).abs());
            worst2 = worst2.max((dpdt - traj.diagnostics[k].force_mean[axis]).abs());
        }
        r1.push(worst1);
        r2.push(worst2);
    }
    Ok(EhrenfestResiduals { times, r1, r2 })
}

/// Result of the projection-rate identity check at t = 0: the time derivative
/// of the spatial projection equals -(1/m) dV/dx at the center, over 2 sigma.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RateCheck {
    pub measured: f64,
    pub expected: f64,
    pub residual: f64,
}

/// Finite-difference the spatial projection of the state velocity around
/// t = 0 (five-point stencil, one split step per sample) and compare with the
/// closed-form rate.
pub fn projection_rate_check(
    params: &CoherentParams,
    potential: &PotentialSpec,
    mass: f64,
    grid: &GridSpec,
    dt: f64,
) -> Result<RateCheck> {
    potential.require_linear_gate(&params.center, params.sigma, 0.0)?;
    let hbar = params.hbar;
    let phi0 = crate::coherent::omega(params, grid)?;
    validate_time_step(&phi0, potential, mass, hbar, dt)?;
    let spatial_proj = |state: &WaveFunction, t: f64| -> Result<f64> {
        let d = grid.dim();
        let center: Vec<f64> = (0..d).map(|ax| state.position_mean(ax)).collect();
        let sigma_t = state.sigma_measured(0);
        let frame = tangent_frame_for_state(state, &center, sigma_t, hbar)?;
        let vel = state_velocity(state, potential, mass, hbar, t)?;
        Ok(l2_inner(&vel, &frame.spatial[0])?.re)
    };
    // Centered five-point stencil around t = 0; backward steps run dt < 0.
    let forward = SplitStepPropagator::new(*grid, potential.clone(), mass, hbar, dt)?;
    let backward = SplitStepPropagator::new(*grid, potential.clone(), mass, hbar, -dt)?;
    let f1 = forward.step(&phi0, 0.0)?;
    let f2 = forward.step(&f1, dt)?;
    let b1 = backward.step(&phi0, 0.0)?;
    let b2 = backward.step(&b1, -dt)?;
    let c = [
        spatial_proj(&b2, -2.0 * dt)?,
        spatial_proj(&b1, -dt)?,
        spatial_proj(&f1, dt)?,
        spatial_proj(&f2, 2.0 * dt)?,
    ];
    let measured = (c[0] - 8.0 * c[1] + 8.0 * c[2] - c[3]) / (12.0 * dt);
    let grad = potential.gradient(&params.center, 0.0);
    let expected = -grad[0] / mass / (2.0 * params.sigma);
    Ok(RateCheck {
        measured,
        expected,
        residual: (measured - expected).abs(),
    })
}
