//! Transition probabilities on embedded classical states and their identity
//! with the normal distribution: |<da~, db~>|^2 = exp(-(a-b)^2 / 4 sigma^2)
//! = cos^2 of the Fubini-Study distance between the embedded points, plus
//! the sharp-probe limit connecting transition probabilities to the
//! probability density.

use crate::coherent::{sample_coherent, CoherentParams};
use crate::error::{Error, Result};
use crate::grid::{l2_inner, GridSpec, WaveFunction};
use crate::observables::fubini_study_distance;
use serde::{Deserialize, Serialize};

/// Position density |Omega(a, p, sigma)(b)|^2: the normal density with mean
/// a and standard deviation sigma (the momentum drops out of the modulus).
pub fn born_density(params: &CoherentParams, b: &[f64]) -> Result<f64> {
    let d = params.dim();
    if b.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: b.len(),
        });
    }
    let sigma = params.sigma;
    let q: f64 = params
        .center
        .iter()
        .zip(b)
        .map(|(a, bi)| (a - bi) * (a - bi))
        .sum();
    Ok((2.0 * std::f64::consts::PI * sigma * sigma).powf(-(d as f64) / 2.0)
        * (-q / (2.0 * sigma * sigma)).exp())
}

/// Transition probability |<phi, psi>|^2 between rays (normalization-safe).
pub fn transition_probability(phi: &WaveFunction, psi: &WaveFunction) -> Result<f64> {
    let overlap = l2_inner(phi, psi)?.norm_sqr();
    let scale = phi.l2_norm_sq() * psi.l2_norm_sq();
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok((overlap / scale).clamp(0.0, 1.0))
}

/// The isotropic law P = cos^2 rho: the unique extension of the normal law
/// on embedded points to arbitrary rays that depends only on the
/// Fubini-Study distance.
pub fn isotropic_probability_law(rho: f64) -> f64 {
    let c = rho.cos();
    c * c
}

/// One row of the equivalence sweep.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EquivalenceRow {
    pub separation: f64,
    /// exp(-(a-b)^2 / 4 sigma^2), the squared Gaussian overlap.
    pub normal_side: f64,
    /// cos^2 of the grid-state Fubini-Study distance.
    pub born_side: f64,
    pub residual: f64,
}

/// Compare the closed-form normal expression with cos^2 of the measured
/// distance between grid states centered at a and b. Separations beyond
/// 6 sigma underflow the grid inner product and are rejected.
pub fn born_normal_equivalence(
    a: f64,
    b: f64,
    sigma: f64,
    grid: &GridSpec,
) -> Result<EquivalenceRow> {
    let separation = (a - b).abs();
    if separation > 6.0 * sigma {
        return Err(Error::SeparationTooLarge {
            separation,
            limit: 6.0 * sigma,
        });
    }
    let pa = CoherentParams::new_1d(a, 0.0, sigma)?;
    let pb = CoherentParams::new_1d(b, 0.0, sigma)?;
    let da = sample_coherent(&pa, grid)?;
    let db = sample_coherent(&pb, grid)?;
    let rho = fubini_study_distance(&da, &db)?;
    let born_side = isotropic_probability_law(rho);
    let normal_side = (-separation * separation / (4.0 * sigma * sigma)).exp();
    Ok(EquivalenceRow {
        separation,
        normal_side,
        born_side,
        residual: (normal_side - born_side).abs(),
    })
}

/// Sweep the equivalence over a list of separations around center a.
pub fn equivalence_sweep(
    a: f64,
    sigma: f64,
    separations: &[f64],
    grid: &GridSpec,
) -> Result<Vec<EquivalenceRow>> {
    separations
        .iter()
        .map(|s| born_normal_equivalence(a, a + s, sigma, grid))
        .collect()
}

/// One probe width in the sharp-state limit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SharpProbeRow {
    pub sigma_probe: f64,
    /// |<target, probe>|^2 from the grid inner product.
    pub transition: f64,
    /// f(b) (Delta x)^d with the probe's effective width.
    pub density_times_cell: f64,
    pub ratio: f64,
    /// Peak height of the probe (h in the cell-size relation).
    pub peak_height: f64,
}

/// Convergence report of the sharp-probe limit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SharpStateReport {
    pub rows: Vec<SharpProbeRow>,
    /// Observed convergence order of |1 - ratio| between successive rows
    /// (expected near 2 when widths halve).
    pub observed_orders: Vec<f64>,
}

/// Pair the target packet with narrowing probe packets at b and compare the
/// transition probability against density times effective probe cell.
///
/// The probe's effective cell side is defined through its integral,
/// Delta x = (integral of probe)^(2/d), under which a unit-height idealized
/// probe satisfies both h^2 (Delta x)^d = 1 and <target, probe> ~
/// target(b) (Delta x)^(d/2); the ratio then tends to 1 with error of order
/// (sigma_probe / sigma)^2.
pub fn sharp_state_limit(
    a: f64,
    b: f64,
    sigma: f64,
    probe_sigmas: &[f64],
    grid: &GridSpec,
) -> Result<SharpStateReport> {
    let dx = grid.spacing();
    let target = sample_coherent(&CoherentParams::new_1d(a, 0.0, sigma)?, grid)?;
    let density = born_density(&CoherentParams::new_1d(a, 0.0, sigma)?, &[b])?;
    let mut rows = Vec::with_capacity(probe_sigmas.len());
    for &sp in probe_sigmas {
        if sp < 3.0 * dx {
            return Err(Error::ProbeUnderResolved {
                sigma: sp,
                min: 3.0 * dx,
            });
        }
        let probe = sample_coherent(&CoherentParams::new_1d(b, 0.0, sp)?, grid)?;
        let transition = l2_inner(&target, &probe)?.norm_sqr();
        let integral: f64 = probe.values().iter().map(|z| z.re).sum::<f64>() * grid.cell_volume();
        let peak_height = probe.values().iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let density_times_cell = density * integral * integral;
        rows.push(SharpProbeRow {
            sigma_probe: sp,
            transition,
            density_times_cell,
            ratio: transition / density_times_cell,
            peak_height,
        });
    }
    let mut observed_orders = Vec::new();
    for w in rows.windows(2) {
        let e0 = (1.0 - w[0].ratio).abs();
        let e1 = (1.0 - w[1].ratio).abs();
        let shrink = w[0].sigma_probe / w[1].sigma_probe;
        if e1 > 0.0 && shrink > 1.0 {
            observed_orders.push((e0 / e1).ln() / shrink.ln());
        }
    }
    Ok(SharpStateReport {
        rows,
        observed_orders,
    })
}

/// Binary-search a separation whose embedded-point distance hits the target.
/// The map separation -> distance is monotone, increasing to pi/2.
pub fn separation_for_distance(
    target_rho: f64,
    sigma: f64,
    grid: &GridSpec,
) -> Result<(f64, f64)> {
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&target_rho) {
        return Err(Error::InvalidGrid(format!(
            "target distance {target_rho} outside [0, pi/2)"
        )));
    }
    let state_at = |s: f64| -> Result<WaveFunction> {
        sample_coherent(&CoherentParams::new_1d(s / 2.0, 0.0, sigma)?, grid)
    };
    let distance = |s: f64| -> Result<f64> {
        let left = state_at(-s)?;
        let right = state_at(s)?;
        fubini_study_distance(&left, &right)
    };
    let mut lo = 0.0f64;
    // Distance exceeds any target < pi/2 once the overlap is deeply
    // suppressed; 14 sigma gives cos rho ~ 2e-11.
    let mut hi = 14.0 * sigma;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if distance(mid)? < target_rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sep = 0.5 * (lo + hi);
    Ok((sep, distance(sep)?))
}
