//! Two-particle states: tensor products of 1D packets on a 2D grid, the
//! two-mass product Hamiltonian, per-particle tangent frames, and the
//! constrained two-body evolution driven by per-particle 1D projections with
//! coupled forces.

use crate::coherent::{CoherentParams, VelocityDecomposition};
use crate::error::{Error, Result};
use crate::evolve::StepDiagnostics;
use crate::grid::{
    l2_inner, sample_gaussian_packet, spectral_derivative, GridSpec, WaveFunction,
};
use crate::potential::PotentialSpec;
use crate::spectral::{transform_axis, SpectralEngine};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Interaction V(x1, x2, t) = V1(x1, t) + V2(x2, t) + (coupling/2)(x1 - x2)^2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoBodyPotential {
    pub first: PotentialSpec,
    pub second: PotentialSpec,
    #[serde(default)]
    pub coupling: f64,
}

impl TwoBodyPotential {
    pub fn separable(first: PotentialSpec, second: PotentialSpec) -> Self {
        Self {
            first,
            second,
            coupling: 0.0,
        }
    }

    pub fn free() -> Self {
        Self::separable(PotentialSpec::free(), PotentialSpec::free())
    }

    pub fn harmonic_coupling(k: f64) -> Self {
        Self {
            first: PotentialSpec::free(),
            second: PotentialSpec::free(),
            coupling: k,
        }
    }

    pub fn is_separable(&self) -> bool {
        self.coupling == 0.0
    }

    pub fn value(&self, x1: f64, x2: f64, t: f64) -> f64 {
        let rel = x1 - x2;
        self.first.value(&[x1], t) + self.second.value(&[x2], t)
            + 0.5 * self.coupling * rel * rel
    }

    /// (dV/dx1, dV/dx2).
    pub fn gradient(&self, x1: f64, x2: f64, t: f64) -> [f64; 2] {
        let rel = x1 - x2;
        [
            self.first.gradient(&[x1], t)[0] + self.coupling * rel,
            self.second.gradient(&[x2], t)[0] - self.coupling * rel,
        ]
    }

    pub fn sample(&self, grid: &GridSpec, t: f64) -> Vec<f64> {
        let n = grid.points_per_axis();
        let coords = grid.axis_coords();
        (0..n * n)
            .map(|idx| self.value(coords[idx / n], coords[idx % n], t))
            .collect()
    }

    /// The 1D potential seen by one particle when the partner sits at
    /// `partner`: samples on the axis grid.
    pub fn restricted_samples(
        &self,
        grid1d: &GridSpec,
        axis: usize,
        partner: f64,
        t: f64,
    ) -> Vec<f64> {
        grid1d
            .axis_coords()
            .iter()
            .map(|&x| match axis {
                0 => self.value(x, partner, t),
                1 => self.value(partner, x, t),
                _ => unreachable!("two particles"),
            })
            .collect()
    }
}

/// A two-particle state on a 2D grid (axis 0 is particle 1). Product-built
/// states carry their factor parameters as a certificate.
#[derive(Debug, Clone)]
pub struct TwoBodyState {
    state: WaveFunction,
    certificate: Option<(CoherentParams, CoherentParams)>,
}

impl TwoBodyState {
    pub fn from_wavefunction(state: WaveFunction) -> Result<Self> {
        if state.grid().dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: state.grid().dim(),
            });
        }
        Ok(Self {
            state,
            certificate: None,
        })
    }

    pub fn wavefunction(&self) -> &WaveFunction {
        &self.state
    }

    pub fn grid(&self) -> &GridSpec {
        self.state.grid()
    }

    pub fn certificate(&self) -> Option<&(CoherentParams, CoherentParams)> {
        self.certificate.as_ref()
    }

    /// Schmidt participation number 1 / Tr(rho_1^2); equals 1 exactly for
    /// product states and grows with entanglement.
    pub fn schmidt_number(&self) -> f64 {
        let n = self.grid().points_per_axis();
        let w = self.grid().cell_volume();
        let values = self.state.values();
        let norm_sq: f64 = values.iter().map(|z| z.norm_sqr()).sum::<f64>() * w;
        // rho_1 = A A^dagger with A the (scaled) coefficient matrix.
        let mut purity = 0.0;
        for i in 0..n {
            for k in 0..n {
                let mut elem = Complex64::default();
                for j in 0..n {
                    elem += values[i * n + j] * values[k * n + j].conj();
                }
                let elem = elem * w / norm_sq;
                purity += elem.norm_sqr();
            }
        }
        1.0 / purity
    }
}

/// Outer product of two 1D packets on a shared-axis 2D grid.
pub fn tensor_state(
    params1: &CoherentParams,
    params2: &CoherentParams,
    grid: &GridSpec,
) -> Result<TwoBodyState> {
    if grid.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: grid.dim(),
        });
    }
    if params1.dim() != 1 || params2.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: params1.dim().max(params2.dim()),
        });
    }
    let axis = GridSpec::new_1d(grid.points_per_axis(), grid.box_length())?;
    let build = |p: &CoherentParams| -> Result<WaveFunction> {
        let mut wf = sample_gaussian_packet(&axis, &p.center, &p.momentum, p.sigma, p.hbar)?;
        if p.global_phase != 0.0 {
            wf = wf.scaled(Complex64::from_polar(1.0, p.global_phase));
        }
        Ok(wf)
    };
    let phi1 = build(params1)?;
    let phi2 = build(params2)?;
    let n = grid.points_per_axis();
    let mut values = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            values.push(phi1.values()[i] * phi2.values()[j]);
        }
    }
    let mut state = WaveFunction::from_values(*grid, values)?;
    state.normalize();
    Ok(TwoBodyState {
        state,
        certificate: Some((params1.clone(), params2.clone())),
    })
}

/// Schroedinger velocity under the two-mass Hamiltonian.
pub fn two_body_velocity(
    psi: &TwoBodyState,
    m1: f64,
    m2: f64,
    hbar: f64,
    potential: &TwoBodyPotential,
    t: f64,
) -> Result<WaveFunction> {
    let grid = *psi.grid();
    let n = grid.points_per_axis();
    let kappa = grid.axis_wavenumbers();
    let engine = SpectralEngine::new(n);
    let mut kin = psi.state.values().to_vec();
    transform_axis(&engine, &mut kin, n, n, 1, false);
    transform_axis(&engine, &mut kin, n, n, 0, false);
    for (idx, z) in kin.iter_mut().enumerate() {
        let k1 = kappa[idx / n];
        let k2 = kappa[idx % n];
        *z *= hbar * hbar * (k1 * k1 / (2.0 * m1) + k2 * k2 / (2.0 * m2));
    }
    transform_axis(&engine, &mut kin, n, n, 0, true);
    transform_axis(&engine, &mut kin, n, n, 1, true);
    let v = potential.sample(&grid, t);
    let values: Vec<Complex64> = kin
        .iter()
        .zip(psi.state.values())
        .zip(&v)
        .map(|((k, s), vi)| (k + s * *vi) * (-Complex64::I / hbar))
        .collect();
    WaveFunction::from_values(grid, values)
}

/// The per-particle tangent directions at a product state: for each particle
/// its spatial, momentum, and spreading unit vectors (the partner factor
/// rides along), plus the shared phase direction. Order:
/// [spatial1, momentum1, spreading1, spatial2, momentum2, spreading2, phase].
pub fn two_body_frame(
    psi: &TwoBodyState,
    params1: &CoherentParams,
    params2: &CoherentParams,
) -> Result<Vec<WaveFunction>> {
    let mut frame = Vec::with_capacity(7);
    for (axis, p) in [(0usize, params1), (1usize, params2)] {
        let a = p.center[0];
        let sigma = p.sigma;
        let profile = psi.state.mul_real(|x| (x[axis] - a) / sigma);
        let mut spatial = profile.clone();
        let drift = spatial.normalize();
        if drift == 0.0 && spatial.l2_norm() == 0.0 {
            return Err(Error::FrameDegenerate { norm: 0.0 });
        }
        let mut momentum = profile.scaled(Complex64::I);
        momentum.normalize();
        let mut spreading = psi
            .state
            .mul_real(|x| {
                let u = x[axis] - a;
                u * u / (sigma * sigma) - 1.0
            })
            .scaled(Complex64::I);
        spreading.normalize();
        frame.push(spatial);
        frame.push(momentum);
        frame.push(spreading);
    }
    frame.push(psi.state.scaled(-Complex64::I));
    Ok(frame)
}

/// Velocity components of each particle at a certified product state.
/// The phase component, squared speed, and residual describe the joint state
/// and are repeated in both decompositions.
pub fn per_particle_components(
    psi: &TwoBodyState,
    params1: &CoherentParams,
    params2: &CoherentParams,
    m1: f64,
    m2: f64,
    potential: &TwoBodyPotential,
) -> Result<(VelocityDecomposition, VelocityDecomposition)> {
    let schmidt = psi.schmidt_number();
    if schmidt > 1.0 + 1e-6 {
        return Err(Error::EntangledState { schmidt });
    }
    let hbar = params1.hbar;
    let vel = two_body_velocity(psi, m1, m2, hbar, potential, 0.0)?;
    let frame = two_body_frame(psi, params1, params2)?;
    let proj = |k: usize| -> Result<f64> { Ok(l2_inner(&vel, &frame[k])?.re) };
    let comps: Vec<f64> = (0..7).map(proj).collect::<Result<Vec<_>>>()?;
    let mut residual = vel.clone();
    for (c, f) in comps.iter().zip(&frame) {
        residual = residual.add_scaled(Complex64::new(-c, 0.0), f)?;
    }
    let residual_norm = residual.l2_norm();
    let speed_sq = vel.l2_norm_sq();
    let make = |offset: usize| VelocityDecomposition {
        phase: comps[6],
        spatial: vec![comps[offset]],
        momentum: vec![comps[offset + 1]],
        spreading: comps[offset + 2],
        residual_norm,
        speed_sq,
    };
    Ok((make(0), make(3)))
}

/// Propagation record for the two-body state.
#[derive(Debug, Clone)]
pub struct TwoBodyTrajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub snapshots: Vec<(usize, TwoBodyState)>,
    pub renormalizations: Vec<(usize, f64)>,
}

impl TwoBodyTrajectory {
    pub fn final_state(&self) -> Option<&TwoBodyState> {
        self.snapshots.last().map(|(_, s)| s)
    }
}

/// Split-step propagation with the two-mass kinetic factor.
pub fn two_body_propagate(
    psi0: &TwoBodyState,
    m1: f64,
    m2: f64,
    hbar: f64,
    potential: &TwoBodyPotential,
    dt: f64,
    steps: usize,
    snapshot_stride: usize,
) -> Result<TwoBodyTrajectory> {
    let grid = *psi0.grid();
    let n = grid.points_per_axis();
    let kappa = grid.axis_wavenumbers();
    let engine = SpectralEngine::new(n);
    let leak0 = psi0.state.boundary_mass();
    if leak0 > crate::evolve::LEAK_LIMIT {
        return Err(Error::BoundaryLeak {
            step: 0,
            mass: leak0,
            limit: crate::evolve::LEAK_LIMIT,
        });
    }
    let kinetic_factor: Vec<Complex64> = (0..n * n)
        .map(|idx| {
            let k1 = kappa[idx / n];
            let k2 = kappa[idx % n];
            let phase = -hbar * dt * (k1 * k1 / (2.0 * m1) + k2 * k2 / (2.0 * m2));
            Complex64::from_polar(1.0, phase)
        })
        .collect();
    let time_dependent =
        potential.first.is_time_dependent() || potential.second.is_time_dependent();
    let make_kick = |t: f64| -> Vec<Complex64> {
        potential
            .sample(&grid, t)
            .into_iter()
            .map(|v| Complex64::from_polar(1.0, -v * dt / (2.0 * hbar)))
            .collect()
    };
    let static_kick = if time_dependent { None } else { Some(make_kick(0.0)) };
    let mut state = psi0.state.clone();
    let mut times = Vec::with_capacity(steps + 1);
    let mut diagnostics = Vec::with_capacity(steps + 1);
    let mut snapshots = Vec::new();
    let mut renormalizations = Vec::new();
    let measure = |s: &WaveFunction, t: f64| -> Result<StepDiagnostics> {
        two_body_diagnostics(s, m1, m2, hbar, potential, t)
    };
    times.push(0.0);
    diagnostics.push(measure(&state, 0.0)?);
    snapshots.push((
        0,
        TwoBodyState {
            state: state.clone(),
            certificate: psi0.certificate.clone(),
        },
    ));
    for step in 1..=steps {
        let t_prev = (step - 1) as f64 * dt;
        let mut buf = state.values().to_vec();
        let owned;
        let kick: &[Complex64] = match &static_kick {
            Some(k) => k,
            None => {
                owned = make_kick(t_prev + dt / 2.0);
                &owned
            }
        };
        for (z, k) in buf.iter_mut().zip(kick) {
            *z *= k;
        }
        transform_axis(&engine, &mut buf, n, n, 1, false);
        transform_axis(&engine, &mut buf, n, n, 0, false);
        for (z, f) in buf.iter_mut().zip(&kinetic_factor) {
            *z *= f;
        }
        transform_axis(&engine, &mut buf, n, n, 0, true);
        transform_axis(&engine, &mut buf, n, n, 1, true);
        for (z, k) in buf.iter_mut().zip(kick) {
            *z *= k;
        }
        let mut next = WaveFunction::from_values(grid, buf)?;
        let norm = next.l2_norm();
        if (norm - 1.0).abs() > crate::evolve::RENORM_THRESHOLD {
            let drift = next.normalize();
            renormalizations.push((step, drift));
        }
        if step % 32 == 0 || step == steps {
            let mass_out = next.boundary_mass();
            if mass_out > crate::evolve::LEAK_LIMIT {
                return Err(Error::BoundaryLeak {
                    step,
                    mass: mass_out,
                    limit: crate::evolve::LEAK_LIMIT,
                });
            }
        }
        let t = step as f64 * dt;
        times.push(t);
        diagnostics.push(measure(&next, t)?);
        if (snapshot_stride > 0 && step % snapshot_stride == 0) || step == steps {
            snapshots.push((
                step,
                TwoBodyState {
                    state: next.clone(),
                    certificate: None,
                },
            ));
        }
        state = next;
    }
    Ok(TwoBodyTrajectory {
        dt,
        times,
        diagnostics,
        snapshots,
        renormalizations,
    })
}

fn two_body_diagnostics(
    state: &WaveFunction,
    m1: f64,
    m2: f64,
    hbar: f64,
    potential: &TwoBodyPotential,
    t: f64,
) -> Result<StepDiagnostics> {
    let grid = *state.grid();
    let n = grid.points_per_axis();
    let norm_sq = state.l2_norm_sq();
    let x_mean = vec![state.position_mean(0), state.position_mean(1)];
    let sigma = vec![state.sigma_measured(0), state.sigma_measured(1)];
    let kappa = grid.axis_wavenumbers();
    let engine = SpectralEngine::new(n);
    let mut spec = state.values().to_vec();
    transform_axis(&engine, &mut spec, n, n, 1, false);
    transform_axis(&engine, &mut spec, n, n, 0, false);
    let mut p_mean = vec![0.0; 2];
    let mut weight = 0.0;
    for (idx, z) in spec.iter().enumerate() {
        let w = z.norm_sqr();
        weight += w;
        p_mean[0] += hbar * kappa[idx / n] * w;
        p_mean[1] += hbar * kappa[idx % n] * w;
    }
    p_mean[0] /= weight;
    p_mean[1] /= weight;
    let mut kin = spec;
    for (idx, z) in kin.iter_mut().enumerate() {
        let k1 = kappa[idx / n];
        let k2 = kappa[idx % n];
        *z *= hbar * hbar * (k1 * k1 / (2.0 * m1) + k2 * k2 / (2.0 * m2));
    }
    transform_axis(&engine, &mut kin, n, n, 0, true);
    transform_axis(&engine, &mut kin, n, n, 1, true);
    let v = potential.sample(&grid, t);
    let h_values: Vec<Complex64> = kin
        .iter()
        .zip(state.values())
        .zip(&v)
        .map(|((k, s), vi)| k + s * *vi)
        .collect();
    let h_psi = WaveFunction::from_values(grid, h_values)?;
    let energy_mean = l2_inner(&h_psi, state)?.re / norm_sq;
    let h2 = h_psi.l2_norm_sq() / norm_sq;
    let energy_uncertainty = (h2 - energy_mean * energy_mean).max(0.0).sqrt();
    let coords = grid.axis_coords();
    let w_cell = grid.cell_volume();
    let mut force_mean = vec![0.0; 2];
    for (idx, z) in state.values().iter().enumerate() {
        let g = potential.gradient(coords[idx / n], coords[idx % n], t);
        let w = z.norm_sqr() * w_cell;
        force_mean[0] -= g[0] * w;
        force_mean[1] -= g[1] * w;
    }
    force_mean[0] /= norm_sq;
    force_mean[1] /= norm_sq;
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

/// Projected phase-space rates of one particle on its 1D axis grid, with the
/// partner's influence entering through the restricted potential samples.
fn projected_rates_1d(
    center: f64,
    momentum: f64,
    sigma: f64,
    mass: f64,
    hbar: f64,
    v_samples: &[f64],
    grid: &GridSpec,
) -> Result<(f64, f64)> {
    let phi = sample_gaussian_packet(grid, &[center], &[momentum], sigma, hbar)?;
    let lap = spectral_derivative(&phi, 0, 2)?;
    let values: Vec<Complex64> = lap
        .values()
        .iter()
        .zip(phi.values())
        .zip(v_samples)
        .map(|((l, s), v)| (-hbar * hbar / (2.0 * mass) * l + s * *v) * (-Complex64::I / hbar))
        .collect();
    let vel = WaveFunction::from_values(*grid, values)?;
    let profile = phi.mul_real(|x| (x[0] - center) / sigma);
    let mut spatial = profile.clone();
    spatial.normalize();
    let mut momentum_dir = profile.scaled(Complex64::I);
    momentum_dir.normalize();
    let c_x = l2_inner(&vel, &spatial)?.re;
    let c_p = l2_inner(&vel, &momentum_dir)?.re;
    Ok((2.0 * sigma * c_x, hbar / sigma * c_p))
}

/// Constrained two-body dynamics: RK4 on (a1, p1, a2, p2) with per-particle
/// projected rates and coupled forces (each particle sees the potential with
/// the partner frozen at its current center).
#[derive(Debug, Clone)]
pub struct TwoBodyConstrained {
    pub times: Vec<f64>,
    pub centers: Vec<[f64; 2]>,
    pub momenta: Vec<[f64; 2]>,
}

#[allow(clippy::too_many_arguments)]
pub fn constrained_two_body(
    params1: &CoherentParams,
    params2: &CoherentParams,
    m1: f64,
    m2: f64,
    potential: &TwoBodyPotential,
    grid1d: &GridSpec,
    dt: f64,
    steps: usize,
) -> Result<TwoBodyConstrained> {
    let hbar = params1.hbar;
    let sig = [params1.sigma, params2.sigma];
    let mass = [m1, m2];
    let rates = |a: [f64; 2], p: [f64; 2], t: f64| -> Result<([f64; 2], [f64; 2])> {
        let mut a_dot = [0.0; 2];
        let mut p_dot = [0.0; 2];
        for i in 0..2 {
            let partner = a[1 - i];
            let v = potential.restricted_samples(grid1d, i, partner, t);
            let (ad, pd) = projected_rates_1d(a[i], p[i], sig[i], mass[i], hbar, &v, grid1d)?;
            a_dot[i] = ad;
            p_dot[i] = pd;
        }
        Ok((a_dot, p_dot))
    };
    let mut a = [params1.center[0], params2.center[0]];
    let mut p = [params1.momentum[0], params2.momentum[0]];
    let mut times = Vec::with_capacity(steps + 1);
    let mut centers = Vec::with_capacity(steps + 1);
    let mut momenta = Vec::with_capacity(steps + 1);
    times.push(0.0);
    centers.push(a);
    momenta.push(p);
    let add = |x: [f64; 2], k: [f64; 2], s: f64| [x[0] + s * k[0], x[1] + s * k[1]];
    for step in 1..=steps {
        let t = (step - 1) as f64 * dt;
        let (ka1, kp1) = rates(a, p, t)?;
        let (ka2, kp2) = rates(add(a, ka1, dt / 2.0), add(p, kp1, dt / 2.0), t + dt / 2.0)?;
        let (ka3, kp3) = rates(add(a, ka2, dt / 2.0), add(p, kp2, dt / 2.0), t + dt / 2.0)?;
        let (ka4, kp4) = rates(add(a, ka3, dt), add(p, kp3, dt), t + dt)?;
        for i in 0..2 {
            a[i] += dt / 6.0 * (ka1[i] + 2.0 * ka2[i] + 2.0 * ka3[i] + ka4[i]);
            p[i] += dt / 6.0 * (kp1[i] + 2.0 * kp2[i] + 2.0 * kp3[i] + kp4[i]);
            if !(a[i].is_finite() && p[i].is_finite()) {
                return Err(Error::StepInstability { step });
            }
        }
        times.push(step as f64 * dt);
        centers.push(a);
        momenta.push(p);
    }
    Ok(TwoBodyConstrained {
        times,
        centers,
        momenta,
    })
}
