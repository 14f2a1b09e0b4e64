//! The phase-space manifold of minimum-uncertainty Gaussian packets, its
//! orthonormal tangent frames, and the decomposition of the Schroedinger
//! velocity into phase, spatial, momentum, and spreading components.
//!
//! Writing a state as phi = r e^(i theta), the frame at a packet
//! (center a, momentum p, width sigma) consists of unit vectors
//!
//! - spatial (per axis):   -d(r)/dx_a * e^(i theta), normalized;
//! - momentum (per axis):  i (x_a - a_a) / sigma * phi;
//! - spreading:            i * d(phi)/d(sigma), normalized;
//! - phase:                the tangent of the global-phase circle, oriented
//!   so the velocity projection equals mean energy / hbar.
//!
//! All pairs are orthogonal in the Riemannian metric Re(.,.) at the base
//! point, so projections decompose the velocity without cross terms.

use crate::error::{Error, Result};
use crate::grid::{l2_inner, sample_gaussian_packet, spectral_derivative, GridSpec, WaveFunction};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Coordinates on the packet manifold: center, momentum, width, global phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherentParams {
    pub center: Vec<f64>,
    pub momentum: Vec<f64>,
    pub sigma: f64,
    #[serde(default)]
    pub global_phase: f64,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
}

fn default_hbar() -> f64 {
    1.0
}

impl CoherentParams {
    pub fn new(center: Vec<f64>, momentum: Vec<f64>, sigma: f64) -> Result<Self> {
        if center.len() != momentum.len() {
            return Err(Error::DimensionMismatch {
                expected: center.len(),
                got: momentum.len(),
            });
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidGrid(format!("sigma {sigma} <= 0")));
        }
        Ok(Self {
            center,
            momentum,
            sigma,
            global_phase: 0.0,
            hbar: 1.0,
        })
    }

    pub fn new_1d(center: f64, momentum: f64, sigma: f64) -> Result<Self> {
        Self::new(vec![center], vec![momentum], sigma)
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.global_phase = phase;
        self
    }

    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar = hbar;
        self
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }
}

/// Grid samples of the packet, without the global phase factor.
pub fn sample_coherent(params: &CoherentParams, grid: &GridSpec) -> Result<WaveFunction> {
    if params.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: params.dim(),
        });
    }
    sample_gaussian_packet(grid, &params.center, &params.momentum, params.sigma, params.hbar)
}

/// The diffeomorphism from phase space onto the packet manifold: the sampled
/// packet including the global phase factor.
pub fn omega(params: &CoherentParams, grid: &GridSpec) -> Result<WaveFunction> {
    let wf = sample_coherent(params, grid)?;
    if params.global_phase == 0.0 {
        Ok(wf)
    } else {
        Ok(wf.scaled(Complex64::from_polar(1.0, params.global_phase)))
    }
}

/// Orthonormal tangent directions at a packet (or at a packet-like state).
#[derive(Debug, Clone)]
pub struct TangentFrame {
    pub spatial: Vec<WaveFunction>,
    pub momentum: Vec<WaveFunction>,
    pub spreading: WaveFunction,
    pub phase: WaveFunction,
    params: CoherentParams,
}

impl TangentFrame {
    pub fn params(&self) -> &CoherentParams {
        &self.params
    }

    /// All frame vectors in a fixed order (spatial, momentum, spreading, phase).
    pub fn vectors(&self) -> Vec<&WaveFunction> {
        let mut v: Vec<&WaveFunction> = self.spatial.iter().collect();
        v.extend(self.momentum.iter());
        v.push(&self.spreading);
        v.push(&self.phase);
        v
    }

    /// Largest pairwise Riemannian inner product (orthogonality defect).
    pub fn orthogonality_defect(&self) -> f64 {
        let vs = self.vectors();
        let mut worst = 0.0f64;
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                let ip = l2_inner(vs[i], vs[j]).expect("shared grid").re;
                worst = worst.max(ip.abs());
            }
        }
        worst
    }
}

fn normalized_or_err(mut wf: WaveFunction) -> Result<WaveFunction> {
    let norm = wf.l2_norm();
    if norm < 1e-6 {
        return Err(Error::FrameDegenerate { norm });
    }
    wf.normalize();
    Ok(wf)
}

/// Frame at a manifold point, built from the analytic formulas for r and
/// theta (no finite differences), then unit-normalized numerically.
pub fn tangent_frame(params: &CoherentParams, grid: &GridSpec) -> Result<TangentFrame> {
    let base = omega(params, grid)?;
    let d = params.dim();
    let sigma = params.sigma;
    let mut spatial = Vec::with_capacity(d);
    let mut momentum = Vec::with_capacity(d);
    for axis in 0..d {
        let profile = base.mul_real(|x| (x[axis] - params.center[axis]) / sigma);
        spatial.push(normalized_or_err(profile.clone())?);
        momentum.push(normalized_or_err(profile.scaled(Complex64::I))?);
    }
    let spread_profile = base
        .mul_real(|x| {
            let q: f64 = x
                .iter()
                .zip(&params.center)
                .map(|(xi, a)| (xi - a) * (xi - a))
                .sum();
            q / (sigma * sigma) - d as f64
        })
        .scaled(Complex64::I);
    let spreading = normalized_or_err(spread_profile)?;
    let phase = base.scaled(-Complex64::I);
    Ok(TangentFrame {
        spatial,
        momentum,
        spreading,
        phase,
        params: params.clone(),
    })
}

/// Frame for an arbitrary (not necessarily coherent) state at measured packet
/// parameters: r and theta are taken from the state itself, so the spatial
/// direction follows the actual modulus and carries the actual local phase.
pub fn tangent_frame_for_state(
    state: &WaveFunction,
    center: &[f64],
    sigma: f64,
    hbar: f64,
) -> Result<TangentFrame> {
    let grid = *state.grid();
    let d = grid.dim();
    if center.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: center.len(),
        });
    }
    let modulus = WaveFunction::from_values(
        grid,
        state
            .values()
            .iter()
            .map(|v| Complex64::new(v.norm(), 0.0))
            .collect(),
    )?;
    let peak = state.values().iter().fold(0.0f64, |m, v| m.max(v.norm()));
    // e^{i theta} = phi / r where the modulus is resolvable, zero in the tail.
    let unit_phase: Vec<Complex64> = state
        .values()
        .iter()
        .map(|v| {
            let r = v.norm();
            if r > 1e-13 * peak {
                v / r
            } else {
                Complex64::default()
            }
        })
        .collect();
    let mut spatial = Vec::with_capacity(d);
    let mut momentum = Vec::with_capacity(d);
    for axis in 0..d {
        let dr = spectral_derivative(&modulus, axis, 1)?;
        let vals: Vec<Complex64> = dr
            .values()
            .iter()
            .zip(&unit_phase)
            .map(|(g, u)| -g.re * u)
            .collect();
        spatial.push(normalized_or_err(WaveFunction::from_values(grid, vals)?)?);
        let profile = state.mul_real(|x| (x[axis] - center[axis]) / sigma);
        momentum.push(normalized_or_err(profile.scaled(Complex64::I))?);
    }
    let spread_profile = state
        .mul_real(|x| {
            let q: f64 = x
                .iter()
                .zip(center)
                .map(|(xi, a)| (xi - a) * (xi - a))
                .sum();
            q / (sigma * sigma) - d as f64
        })
        .scaled(Complex64::I);
    let spreading = normalized_or_err(spread_profile)?;
    let phase = state.scaled(-Complex64::I);
    let params = CoherentParams {
        center: center.to_vec(),
        momentum: vec![0.0; d],
        sigma,
        global_phase: 0.0,
        hbar,
    };
    Ok(TangentFrame {
        spatial,
        momentum,
        spreading,
        phase,
        params,
    })
}

/// Components of the state velocity in a tangent frame, plus the norm of
/// whatever the frame does not capture. The residual is reported, never
/// folded into a component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityDecomposition {
    pub phase: f64,
    pub spatial: Vec<f64>,
    pub momentum: Vec<f64>,
    pub spreading: f64,
    pub residual_norm: f64,
    pub speed_sq: f64,
}

impl VelocityDecomposition {
    /// Sum of squared components (excluding the residual).
    pub fn component_sum_sq(&self) -> f64 {
        self.phase * self.phase
            + self.spatial.iter().map(|c| c * c).sum::<f64>()
            + self.momentum.iter().map(|c| c * c).sum::<f64>()
            + self.spreading * self.spreading
    }

    /// Relative defect of ||v||^2 = sum of squares + residual^2.
    pub fn completeness_defect(&self) -> f64 {
        let total = self.component_sum_sq() + self.residual_norm * self.residual_norm;
        if self.speed_sq == 0.0 {
            total.abs()
        } else {
            (total - self.speed_sq).abs() / self.speed_sq
        }
    }
}

/// Riemannian projections of a velocity vector onto the frame.
pub fn decompose_velocity(
    velocity: &WaveFunction,
    frame: &TangentFrame,
) -> Result<VelocityDecomposition> {
    let proj = |f: &WaveFunction| -> Result<f64> { Ok(l2_inner(velocity, f)?.re) };
    let phase = proj(&frame.phase)?;
    let spatial = frame.spatial.iter().map(&proj).collect::<Result<Vec<_>>>()?;
    let momentum = frame.momentum.iter().map(&proj).collect::<Result<Vec<_>>>()?;
    let spreading = proj(&frame.spreading)?;
    let mut residual = velocity.clone();
    let remove = |c: f64, f: &WaveFunction, residual: &WaveFunction| {
        residual.add_scaled(Complex64::new(-c, 0.0), f)
    };
    residual = remove(phase, &frame.phase, &residual)?;
    for (c, f) in spatial.iter().zip(&frame.spatial) {
        residual = remove(*c, f, &residual)?;
    }
    for (c, f) in momentum.iter().zip(&frame.momentum) {
        residual = remove(*c, f, &residual)?;
    }
    residual = remove(spreading, &frame.spreading, &residual)?;
    Ok(VelocityDecomposition {
        phase,
        spatial,
        momentum,
        spreading,
        residual_norm: residual.l2_norm(),
        speed_sq: velocity.l2_norm_sq(),
    })
}

/// Squared speed of a phase-space path per the induced metric:
/// |dA|^2 / 4 sigma^2 + sigma^2 |dP|^2 / hbar^2 + d |d sigma|^2 / 2 sigma^2.
///
/// The width coefficient is per-dimension: each axis contributes 1/2 sigma^2.
pub fn phase_space_speed_sq(
    d_center: &[f64],
    d_momentum: &[f64],
    d_sigma: f64,
    params: &CoherentParams,
) -> Result<f64> {
    let d = params.dim();
    if d_center.len() != d || d_momentum.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: d_center.len().max(d_momentum.len()),
        });
    }
    let sigma = params.sigma;
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidGrid(format!("sigma {sigma} <= 0")));
    }
    let da: f64 = d_center.iter().map(|v| v * v).sum();
    let dp: f64 = d_momentum.iter().map(|v| v * v).sum();
    Ok(da / (4.0 * sigma * sigma)
        + sigma * sigma * dp / (params.hbar * params.hbar)
        + d as f64 * d_sigma * d_sigma / (2.0 * sigma * sigma))
}

/// Speed (not squared) of a phase-space path.
pub fn phase_space_speed(
    d_center: &[f64],
    d_momentum: &[f64],
    d_sigma: f64,
    params: &CoherentParams,
) -> Result<f64> {
    Ok(phase_space_speed_sq(d_center, d_momentum, d_sigma, params)?.sqrt())
}
