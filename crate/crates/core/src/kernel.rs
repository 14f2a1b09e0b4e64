//! The Hilbert space H whose metric has the Gaussian kernel
//! k(x, y) = exp(-(x-y)^2 / 8 sigma^2), together with:
//!
//! - exact closed-form pairings of delta functions and their derivatives
//!   (the kernel is smooth, so <d^a delta_a, d^b delta_b>_H reduces to a
//!   mixed kernel derivative at (a, b));
//! - the smoothing map rho_sigma with kernel
//!   (1 / 2 pi sigma^2)^(d/4) exp(-(x-y)^2 / 4 sigma^2), which sends delta_a
//!   to the unit-norm Gaussian centered at a and factorizes the metric,
//!   k = rho* rho;
//! - a spectrally accurate H-inner product for grid states.
//!
//! Distributional elements are first-class symbolic objects: grid quadrature
//! cannot represent delta' stably, while the closed forms are exact.

use crate::error::{Error, Result};
use crate::grid::{l2_inner, GridSpec, WaveFunction};
use crate::spectral::{transform_axis, SpectralEngine};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Kernel width for which distance is measured in units of 2 sigma, so the
/// delta-path speed in H equals the Euclidean speed.
pub const UNIT_EMBEDDING_SIGMA: f64 = 0.5;

/// The Gaussian-kernel Hilbert metric, parameterized by its width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpace {
    sigma: f64,
}

impl KernelSpace {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidGrid(format!("kernel width {sigma} <= 0")));
        }
        Ok(Self { sigma })
    }

    /// The width preset realizing the 2 sigma = 1 unit convention.
    pub fn unit_embedding() -> Self {
        Self {
            sigma: UNIT_EMBEDDING_SIGMA,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Metric kernel k(x, y) for d-vectors x, y.
    pub fn kernel(&self, x: &[f64], y: &[f64]) -> f64 {
        let q: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        (-q / (8.0 * self.sigma * self.sigma)).exp()
    }
}

/// One delta term: a point, a per-axis derivative multi-index, and a weight.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaTerm {
    pub point: Vec<f64>,
    pub orders: Vec<u8>,
    pub weight: Complex64,
}

impl DeltaTerm {
    pub fn total_order(&self) -> u8 {
        self.orders.iter().sum()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TermRepr {
    point: Vec<f64>,
    multi_index: Vec<u8>,
    weight_re: f64,
    weight_im: f64,
}

/// Finite linear combination of deltas and their first/second derivatives.
///
/// Serializes as a JSON list of `{point, multi_index, weight_re, weight_im}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<TermRepr>", into = "Vec<TermRepr>")]
pub struct DistributionalElement {
    terms: Vec<DeltaTerm>,
}

impl From<Vec<TermRepr>> for DistributionalElement {
    fn from(reprs: Vec<TermRepr>) -> Self {
        Self {
            terms: reprs
                .into_iter()
                .map(|r| DeltaTerm {
                    point: r.point,
                    orders: r.multi_index,
                    weight: Complex64::new(r.weight_re, r.weight_im),
                })
                .collect(),
        }
    }
}

impl From<DistributionalElement> for Vec<TermRepr> {
    fn from(e: DistributionalElement) -> Self {
        e.terms
            .into_iter()
            .map(|t| TermRepr {
                point: t.point,
                multi_index: t.orders,
                weight_re: t.weight.re,
                weight_im: t.weight.im,
            })
            .collect()
    }
}

impl DistributionalElement {
    pub fn new(terms: Vec<DeltaTerm>) -> Result<Self> {
        for t in &terms {
            if t.orders.len() != t.point.len() {
                return Err(Error::DimensionMismatch {
                    expected: t.point.len(),
                    got: t.orders.len(),
                });
            }
            let order = t.total_order();
            if order > 2 {
                return Err(Error::UnsupportedDerivativeOrder { order });
            }
        }
        Ok(Self { terms })
    }

    /// A single delta at `point`.
    pub fn delta(point: &[f64]) -> Self {
        Self {
            terms: vec![DeltaTerm {
                point: point.to_vec(),
                orders: vec![0; point.len()],
                weight: Complex64::new(1.0, 0.0),
            }],
        }
    }

    /// The derivative term d^order/dx_axis^order delta_point, weighted.
    pub fn delta_derivative(point: &[f64], axis: usize, order: u8, weight: Complex64) -> Result<Self> {
        if order > 2 {
            return Err(Error::UnsupportedDerivativeOrder { order });
        }
        if axis >= point.len() {
            return Err(Error::DimensionMismatch {
                expected: point.len(),
                got: axis + 1,
            });
        }
        let mut orders = vec![0u8; point.len()];
        orders[axis] = order;
        Ok(Self {
            terms: vec![DeltaTerm {
                point: point.to_vec(),
                orders,
                weight,
            }],
        })
    }

    pub fn terms(&self) -> &[DeltaTerm] {
        &self.terms
    }

    pub fn dim(&self) -> Option<usize> {
        self.terms.first().map(|t| t.point.len())
    }

    /// Linear combination c1 * self + c2 * other.
    pub fn combine(&self, c1: Complex64, other: &Self, c2: Complex64) -> Self {
        let mut terms: Vec<DeltaTerm> = self
            .terms
            .iter()
            .map(|t| DeltaTerm {
                weight: c1 * t.weight,
                ..t.clone()
            })
            .collect();
        terms.extend(other.terms.iter().map(|t| DeltaTerm {
            weight: c2 * t.weight,
            ..t.clone()
        }));
        Self { terms }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| DeltaTerm {
                    weight: c * t.weight,
                    ..t.clone()
                })
                .collect(),
        }
    }
}

/// The embedding a -> delta_a of classical space into H. Parameter-level
/// addition of embedded points reproduces vector addition by construction.
pub fn embed_point(a: &[f64], _space: &KernelSpace) -> DistributionalElement {
    DistributionalElement::delta(a)
}

/// Derivatives 0..=4 of g(u) = exp(-c u^2 / 2); c = 1 / 4 sigma^2 makes g the
/// per-axis metric kernel.
fn gaussian_derivative(c: f64, u: f64, order: u8) -> f64 {
    let g = (-0.5 * c * u * u).exp();
    match order {
        0 => g,
        1 => -c * u * g,
        2 => c * (c * u * u - 1.0) * g,
        3 => c * c * u * (3.0 - c * u * u) * g,
        4 => c * c * (3.0 - 6.0 * c * u * u + c * c * u * u * u * u) * g,
        _ => unreachable!("pairings need at most order 4"),
    }
}

/// Closed-form pairing of one pair of terms:
/// <d^a delta_p, d^b delta_q>_H = prod_axis (-1)^(a_i) g^(a_i + b_i)(p_i - q_i).
fn term_pairing(space: &KernelSpace, left: &DeltaTerm, right: &DeltaTerm) -> Result<f64> {
    if left.point.len() != right.point.len() {
        return Err(Error::DimensionMismatch {
            expected: left.point.len(),
            got: right.point.len(),
        });
    }
    let c = 1.0 / (4.0 * space.sigma * space.sigma);
    let mut value = 1.0;
    for i in 0..left.point.len() {
        let u = left.point[i] - right.point[i];
        let sign = if left.orders[i] % 2 == 1 { -1.0 } else { 1.0 };
        value *= sign * gaussian_derivative(c, u, left.orders[i] + right.orders[i]);
    }
    Ok(value)
}

/// Exact H-inner product of two distributional elements, bilinear over terms
/// (conjugate-linear in the second argument's weights).
pub fn delta_h_inner(
    e1: &DistributionalElement,
    e2: &DistributionalElement,
    space: &KernelSpace,
) -> Result<Complex64> {
    for t in e1.terms().iter().chain(e2.terms()) {
        let order = t.total_order();
        if order > 2 {
            return Err(Error::UnsupportedDerivativeOrder { order });
        }
    }
    let mut acc = Complex64::default();
    for l in e1.terms() {
        for r in e2.terms() {
            acc += l.weight * r.weight.conj() * term_pairing(space, l, r)?;
        }
    }
    Ok(acc)
}

/// Derivatives 0..=2 of the rho kernel profile exp(-u^2 / 4 sigma^2).
fn rho_profile_derivative(sigma: f64, u: f64, order: u8) -> f64 {
    let c = 1.0 / (2.0 * sigma * sigma);
    let g = (-0.5 * c * u * u).exp();
    match order {
        0 => g,
        1 => -c * u * g,
        2 => c * (c * u * u - 1.0) * g,
        _ => unreachable!("elements carry at most second derivatives"),
    }
}

/// Apply the smoothing map to a distributional element, producing its grid
/// representation in L2. delta_a maps to the unit Gaussian centered at a;
/// derivative terms map to derivatives of Gaussians.
pub fn rho_sigma(
    element: &DistributionalElement,
    space: &KernelSpace,
    grid: &GridSpec,
) -> Result<WaveFunction> {
    let sigma = space.sigma;
    let dx = grid.spacing();
    if sigma < 3.0 * dx {
        return Err(Error::KernelUnderResolved {
            sigma,
            min: 3.0 * dx,
        });
    }
    let d = grid.dim();
    let guard = grid.box_length() / 2.0 - 10.0 * sigma;
    for t in element.terms() {
        if t.point.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: t.point.len(),
            });
        }
        for &a in &t.point {
            if a.abs() > guard {
                return Err(Error::OutOfBox {
                    coordinate: a,
                    limit: guard,
                });
            }
        }
    }
    let prefactor = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-(d as f64) / 4.0);
    let wf = WaveFunction::from_fn(*grid, |x| {
        let mut acc = Complex64::default();
        for t in element.terms() {
            let mut profile = prefactor;
            for i in 0..d {
                profile *= rho_profile_derivative(sigma, x[i] - t.point[i], t.orders[i]);
            }
            acc += t.weight * profile;
        }
        acc
    });
    Ok(wf)
}

/// Per-axis spectral multiplier of the metric kernel:
/// FT of exp(-u^2 / 8 sigma^2) is sqrt(8 pi) sigma exp(-2 sigma^2 kappa^2).
fn metric_multiplier(sigma: f64, kappa: f64) -> f64 {
    (8.0 * std::f64::consts::PI).sqrt() * sigma * (-2.0 * sigma * sigma * kappa * kappa).exp()
}

/// Per-axis spectral multiplier of the smoothing kernel:
/// FT of (2 pi sigma^2)^(-1/4) exp(-u^2 / 4 sigma^2).
fn rho_multiplier(sigma: f64, kappa: f64) -> f64 {
    (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25)
        * 2.0
        * sigma
        * std::f64::consts::PI.sqrt()
        * (-sigma * sigma * kappa * kappa).exp()
}

fn convolve_with_multiplier(
    phi: &WaveFunction,
    multiplier: impl Fn(f64) -> f64,
) -> WaveFunction {
    let grid = *phi.grid();
    let n = grid.points_per_axis();
    let kappa = grid.axis_wavenumbers();
    let engine = SpectralEngine::new(n);
    let mut buf = phi.values().to_vec();
    match grid.dim() {
        1 => {
            transform_axis(&engine, &mut buf, 1, n, 1, false);
            for (m, v) in buf.iter_mut().enumerate() {
                *v *= multiplier(kappa[m]);
            }
            transform_axis(&engine, &mut buf, 1, n, 1, true);
        }
        2 => {
            transform_axis(&engine, &mut buf, n, n, 1, false);
            transform_axis(&engine, &mut buf, n, n, 0, false);
            for (idx, v) in buf.iter_mut().enumerate() {
                *v *= multiplier(kappa[idx / n]) * multiplier(kappa[idx % n]);
            }
            transform_axis(&engine, &mut buf, n, n, 0, true);
            transform_axis(&engine, &mut buf, n, n, 1, true);
        }
        _ => unreachable!(),
    }
    WaveFunction::from_values(grid, buf).expect("same length")
}

/// H-inner product of grid states: <phi, psi>_H = (phi, k * psi)_L2 with the
/// convolution done spectrally (the kernel transform is known exactly).
pub fn h_inner_grid(
    phi: &WaveFunction,
    psi: &WaveFunction,
    space: &KernelSpace,
) -> Result<Complex64> {
    if phi.grid() != psi.grid() {
        return Err(Error::GridMismatch);
    }
    let dx = phi.grid().spacing();
    if space.sigma < 3.0 * dx {
        return Err(Error::KernelUnderResolved {
            sigma: space.sigma,
            min: 3.0 * dx,
        });
    }
    let smoothed = convolve_with_multiplier(psi, |k| metric_multiplier(space.sigma, k));
    l2_inner(phi, &smoothed)
}

/// Apply the smoothing map to a grid state (spectral convolution). Satisfies
/// <phi, psi>_H = (rho phi, rho psi)_L2, the factorization of the metric.
pub fn rho_sigma_apply(phi: &WaveFunction, space: &KernelSpace) -> Result<WaveFunction> {
    let dx = phi.grid().spacing();
    if space.sigma < 3.0 * dx {
        return Err(Error::KernelUnderResolved {
            sigma: space.sigma,
            min: 3.0 * dx,
        });
    }
    Ok(convolve_with_multiplier(phi, |k| rho_multiplier(space.sigma, k)))
}

/// Velocity and acceleration of the delta path t -> delta_a(t), projected on
/// the frame vectors -d/dx_i delta_a(t), via the closed-form calculus, plus
/// the H-speed of the path.
#[derive(Debug, Clone)]
pub struct PathProjections {
    pub times: Vec<f64>,
    /// Per time, per axis: <d phi / dt, -d_i delta_a>_H.
    pub velocity: Vec<Vec<f64>>,
    /// Per time, per axis: <d^2 phi / dt^2, -d_i delta_a>_H.
    pub acceleration: Vec<Vec<f64>>,
    /// Per time: || d phi / dt ||_H.
    pub h_speed: Vec<f64>,
}

/// Differentiate a sampled path twice (second-order stencils, one-sided at
/// the ends) and form the distributional projections at every sample.
pub fn delta_path_projections(
    times: &[f64],
    points: &[Vec<f64>],
    space: &KernelSpace,
) -> Result<PathProjections> {
    if times.len() != points.len() || times.len() < 3 {
        return Err(Error::InvalidGrid(format!(
            "path needs >= 3 samples with matching times ({} vs {})",
            times.len(),
            points.len(),
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
    let d = points[0].len();
    let m = points.len();
    let diff1 = |k: usize, i: usize| -> f64 {
        if k == 0 {
            (-3.0 * points[0][i] + 4.0 * points[1][i] - points[2][i]) / (2.0 * dt)
        } else if k == m - 1 {
            (3.0 * points[m - 1][i] - 4.0 * points[m - 2][i] + points[m - 3][i]) / (2.0 * dt)
        } else {
            (points[k + 1][i] - points[k - 1][i]) / (2.0 * dt)
        }
    };
    let diff2 = |k: usize, i: usize| -> f64 {
        let at = |k: usize| points[k][i];
        if k == 0 {
            (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3.min(m - 1))) / (dt * dt)
        } else if k == m - 1 {
            (2.0 * at(m - 1) - 5.0 * at(m - 2) + 4.0 * at(m - 3) - at(m.saturating_sub(4))) / (dt * dt)
        } else {
            (at(k + 1) - 2.0 * at(k) + at(k - 1)) / (dt * dt)
        }
    };
    let one = Complex64::new(1.0, 0.0);
    let mut velocity = Vec::with_capacity(m);
    let mut acceleration = Vec::with_capacity(m);
    let mut h_speed = Vec::with_capacity(m);
    for k in 0..m {
        let a = &points[k];
        // d/dt delta_a = -sum_i d_i delta_a da_i/dt
        let mut vel_elem = DistributionalElement::default();
        for i in 0..d {
            let term = DistributionalElement::delta_derivative(
                a,
                i,
                1,
                Complex64::new(-diff1(k, i), 0.0),
            )?;
            vel_elem = vel_elem.combine(one, &term, one);
        }
        // d^2/dt^2 delta_a = sum_ij d_i d_j delta_a da_i da_j - sum_i d_i delta_a d2a_i
        let mut acc_elem = DistributionalElement::default();
        for i in 0..d {
            for j in 0..d {
                let mut orders = vec![0u8; d];
                orders[i] += 1;
                orders[j] += 1;
                let term = DistributionalElement::new(vec![DeltaTerm {
                    point: a.clone(),
                    orders,
                    weight: Complex64::new(diff1(k, i) * diff1(k, j), 0.0),
                }])?;
                acc_elem = acc_elem.combine(one, &term, one);
            }
            let term =
                DistributionalElement::delta_derivative(a, i, 1, Complex64::new(-diff2(k, i), 0.0))?;
            acc_elem = acc_elem.combine(one, &term, one);
        }
        let mut vel_proj = Vec::with_capacity(d);
        let mut acc_proj = Vec::with_capacity(d);
        for i in 0..d {
            let frame =
                DistributionalElement::delta_derivative(a, i, 1, Complex64::new(-1.0, 0.0))?;
            vel_proj.push(delta_h_inner(&vel_elem, &frame, space)?.re);
            acc_proj.push(delta_h_inner(&acc_elem, &frame, space)?.re);
        }
        velocity.push(vel_proj);
        acceleration.push(acc_proj);
        h_speed.push(delta_h_inner(&vel_elem, &vel_elem, space)?.re.sqrt());
    }
    Ok(PathProjections {
        times: times.to_vec(),
        velocity,
        acceleration,
        h_speed,
    })
}
