//! Discretized wavefunctions on a periodic uniform grid with spectral
//! differentiation. States are complex samples phi_j on x_j = -L/2 + j dx;
//! every inner product is the Riemann sum with weight dx^d.

use crate::error::{Error, Result};
use crate::spectral::{transform_axis, wavenumbers, SpectralEngine};
use num_complex::Complex64;

/// Hard cap on total grid points, n^d.
pub const DEFAULT_POINT_CAP: usize = 1 << 22;

/// Norm drift above which a state is no longer flagged normalized.
pub const NORMALIZED_TOL: f64 = 1e-12;

/// Mass allowed in the outer 5% shell for states fed to evolution routines.
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-10;

/// Uniform periodic grid: `dim` in {1, 2}, `points_per_axis` a power of two,
/// `box_length` per axis. Coordinates run over [-L/2, L/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dim: usize,
    points_per_axis: usize,
    box_length: f64,
}

impl GridSpec {
    pub fn new(dim: usize, points_per_axis: usize, box_length: f64) -> Result<Self> {
        Self::with_cap(dim, points_per_axis, box_length, DEFAULT_POINT_CAP)
    }

    pub fn new_1d(points_per_axis: usize, box_length: f64) -> Result<Self> {
        Self::new(1, points_per_axis, box_length)
    }

    pub fn new_2d(points_per_axis: usize, box_length: f64) -> Result<Self> {
        Self::new(2, points_per_axis, box_length)
    }

    /// Full constructor with an explicit total-point cap.
    pub fn with_cap(dim: usize, points_per_axis: usize, box_length: f64, cap: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dim {dim} not in {{1, 2}}")));
        }
        if points_per_axis < 64 {
            return Err(Error::InvalidGrid(format!(
                "points_per_axis {points_per_axis} < 64"
            )));
        }
        if !points_per_axis.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points_per_axis {points_per_axis} is not a power of two"
            )));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::InvalidGrid(format!("box_length {box_length} <= 0")));
        }
        let total = points_per_axis.pow(dim as u32);
        if total > cap {
            return Err(Error::InvalidGrid(format!(
                "total points {total} exceed cap {cap}"
            )));
        }
        Ok(Self {
            dim,
            points_per_axis,
            box_length,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.points_per_axis as f64
    }

    pub fn total_points(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    /// Quadrature weight dx^d of a single cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Coordinates along one axis, x_j = -L/2 + j dx.
    pub fn axis_coords(&self) -> Vec<f64> {
        let dx = self.spacing();
        let half = self.box_length / 2.0;
        (0..self.points_per_axis).map(|j| -half + j as f64 * dx).collect()
    }

    /// Wavenumbers along one axis in FFT bin order.
    pub fn axis_wavenumbers(&self) -> Vec<f64> {
        wavenumbers(self.points_per_axis, self.box_length)
    }

    /// Coordinate vector of the flat index `idx` (row-major).
    pub fn coords_of(&self, idx: usize) -> Vec<f64> {
        let n = self.points_per_axis;
        let dx = self.spacing();
        let half = self.box_length / 2.0;
        match self.dim {
            1 => vec![-half + idx as f64 * dx],
            2 => vec![
                -half + (idx / n) as f64 * dx,
                -half + (idx % n) as f64 * dx,
            ],
            _ => unreachable!(),
        }
    }
}

/// Complex amplitudes on a grid. Immutable after construction; operations
/// produce new states.
#[derive(Debug, Clone)]
pub struct WaveFunction {
    grid: GridSpec,
    values: Vec<Complex64>,
    normalized: bool,
}

impl WaveFunction {
    pub fn from_values(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.total_points() {
            return Err(Error::InvalidGrid(format!(
                "value count {} does not match grid ({} points)",
                values.len(),
                grid.total_points()
            )));
        }
        let mut wf = Self {
            grid,
            values,
            normalized: false,
        };
        wf.normalized = (wf.l2_norm() - 1.0).abs() <= NORMALIZED_TOL;
        Ok(wf)
    }

    /// Sample a coordinate function on the grid.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..grid.total_points())
            .map(|idx| f(&grid.coords_of(idx)))
            .collect();
        Self::from_values(grid, values).expect("length matches by construction")
    }

    pub fn zero(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![Complex64::default(); grid.total_points()],
            normalized: false,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn l2_norm_sq(&self) -> f64 {
        let w = self.grid.cell_volume();
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * w
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Rescale to unit norm; returns the drift |norm - 1| before rescaling.
    pub fn normalize(&mut self) -> f64 {
        let norm = self.l2_norm();
        let drift = (norm - 1.0).abs();
        if norm > 0.0 {
            let s = 1.0 / norm;
            for v in self.values.iter_mut() {
                *v *= s;
            }
            self.normalized = true;
        }
        drift
    }

    /// Mass in the outer 5% shell (union over axes).
    pub fn boundary_mass(&self) -> f64 {
        let n = self.grid.points_per_axis();
        let shell = (n as f64 * 0.05).ceil() as usize;
        let in_shell = |j: usize| j < shell || j >= n - shell;
        let w = self.grid.cell_volume();
        let mut mass = 0.0;
        match self.grid.dim() {
            1 => {
                for (j, v) in self.values.iter().enumerate() {
                    if in_shell(j) {
                        mass += v.norm_sqr();
                    }
                }
            }
            2 => {
                for (idx, v) in self.values.iter().enumerate() {
                    let (i, j) = (idx / n, idx % n);
                    if in_shell(i) || in_shell(j) {
                        mass += v.norm_sqr();
                    }
                }
            }
            _ => unreachable!(),
        }
        mass * w
    }

    /// Pointwise linear combination self + c * other.
    pub fn add_scaled(&self, c: Complex64, other: &WaveFunction) -> Result<WaveFunction> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + c * b)
            .collect();
        WaveFunction::from_values(self.grid, values)
    }

    pub fn scaled(&self, c: Complex64) -> WaveFunction {
        let values = self.values.iter().map(|v| c * v).collect();
        WaveFunction::from_values(self.grid, values).expect("same length")
    }

    /// Multiply pointwise by a real-valued coordinate function.
    pub fn mul_real(&self, f: impl Fn(&[f64]) -> f64) -> WaveFunction {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, v)| v * f(&self.grid.coords_of(idx)))
            .collect();
        WaveFunction::from_values(self.grid, values).expect("same length")
    }

    /// Mean of x_alpha in the density |phi|^2 (state need not be normalized).
    pub fn position_mean(&self, axis: usize) -> f64 {
        self.density_moment(axis, 1) / self.l2_norm_sq()
    }

    /// Variance of x_alpha in the density |phi|^2.
    pub fn position_variance(&self, axis: usize) -> f64 {
        let norm = self.l2_norm_sq();
        let mean = self.density_moment(axis, 1) / norm;
        self.density_moment(axis, 2) / norm - mean * mean
    }

    /// Measured packet width sqrt(<x^2> - <x>^2) along an axis.
    pub fn sigma_measured(&self, axis: usize) -> f64 {
        self.position_variance(axis).sqrt()
    }

    fn density_moment(&self, axis: usize, power: i32) -> f64 {
        assert!(axis < self.grid.dim(), "axis out of range");
        let n = self.grid.points_per_axis();
        let coords = self.grid.axis_coords();
        let w = self.grid.cell_volume();
        let mut acc = 0.0;
        match self.grid.dim() {
            1 => {
                for (j, v) in self.values.iter().enumerate() {
                    acc += coords[j].powi(power) * v.norm_sqr();
                }
            }
            2 => {
                for (idx, v) in self.values.iter().enumerate() {
                    let j = if axis == 0 { idx / n } else { idx % n };
                    acc += coords[j].powi(power) * v.norm_sqr();
                }
            }
            _ => unreachable!(),
        }
        acc * w
    }

    /// Momentum-space moments <p^k> along an axis for k = 1, 2 (hbar-scaled).
    pub fn momentum_moment(&self, axis: usize, power: i32, hbar: f64) -> f64 {
        assert!(axis < self.grid.dim(), "axis out of range");
        let spectrum = self.spectrum();
        let n = self.grid.points_per_axis();
        let kappa = self.grid.axis_wavenumbers();
        let mut acc = 0.0;
        let mut norm = 0.0;
        match self.grid.dim() {
            1 => {
                for (m, v) in spectrum.iter().enumerate() {
                    let p = hbar * kappa[m];
                    acc += p.powi(power) * v.norm_sqr();
                    norm += v.norm_sqr();
                }
            }
            2 => {
                for (idx, v) in spectrum.iter().enumerate() {
                    let m = if axis == 0 { idx / n } else { idx % n };
                    let p = hbar * kappa[m];
                    acc += p.powi(power) * v.norm_sqr();
                    norm += v.norm_sqr();
                }
            }
            _ => unreachable!(),
        }
        acc / norm
    }

    pub fn momentum_mean(&self, axis: usize, hbar: f64) -> f64 {
        self.momentum_moment(axis, 1, hbar)
    }

    pub fn momentum_variance(&self, axis: usize, hbar: f64) -> f64 {
        let mean = self.momentum_moment(axis, 1, hbar);
        self.momentum_moment(axis, 2, hbar) - mean * mean
    }

    /// Unnormalized DFT of the samples (bin order as `axis_wavenumbers`).
    pub fn spectrum(&self) -> Vec<Complex64> {
        let n = self.grid.points_per_axis();
        let engine = SpectralEngine::new(n);
        let mut buf = self.values.clone();
        match self.grid.dim() {
            1 => transform_axis(&engine, &mut buf, 1, n, 1, false),
            2 => {
                transform_axis(&engine, &mut buf, n, n, 1, false);
                transform_axis(&engine, &mut buf, n, n, 0, false);
            }
            _ => unreachable!(),
        }
        buf
    }

    /// Largest tail-band spectral amplitude relative to the peak amplitude.
    /// The tail band is |kappa| >= 0.9 kappa_max.
    pub fn spectral_tail_fraction(&self) -> f64 {
        let spectrum = self.spectrum();
        let n = self.grid.points_per_axis();
        let kappa = self.grid.axis_wavenumbers();
        let kmax = std::f64::consts::PI * n as f64 / self.grid.box_length();
        let cut = 0.9 * kmax;
        let mut peak = 0.0f64;
        let mut tail = 0.0f64;
        for (idx, v) in spectrum.iter().enumerate() {
            let a = v.norm();
            peak = peak.max(a);
            let in_tail = match self.grid.dim() {
                1 => kappa[idx].abs() >= cut,
                2 => kappa[idx / n].abs() >= cut || kappa[idx % n].abs() >= cut,
                _ => unreachable!(),
            };
            if in_tail {
                tail = tail.max(a);
            }
        }
        if peak == 0.0 {
            0.0
        } else {
            tail / peak
        }
    }
}

/// Riemann-sum inner product, linear in the first argument:
/// (phi, psi) = sum phi conj(psi) dx^d.
pub fn l2_inner(phi: &WaveFunction, psi: &WaveFunction) -> Result<Complex64> {
    if phi.grid != psi.grid {
        return Err(Error::GridMismatch);
    }
    let w = phi.grid.cell_volume();
    let sum: Complex64 = phi
        .values
        .iter()
        .zip(&psi.values)
        .map(|(a, b)| a * b.conj())
        .sum();
    Ok(sum * w)
}

/// Same inner product evaluated in spectral space (Parseval route).
pub fn l2_inner_spectral(phi: &WaveFunction, psi: &WaveFunction) -> Result<Complex64> {
    if phi.grid != psi.grid {
        return Err(Error::GridMismatch);
    }
    let a = phi.spectrum();
    let b = psi.spectrum();
    let w = phi.grid.cell_volume() / phi.grid.total_points() as f64;
    let sum: Complex64 = a.iter().zip(&b).map(|(x, y)| x * y.conj()).sum();
    Ok(sum * w)
}

/// Real Riemannian pairing Re(phi, psi) on the realification of L2.
pub fn riemannian_inner(phi: &WaveFunction, psi: &WaveFunction) -> Result<f64> {
    Ok(l2_inner(phi, psi)?.re)
}

/// Spectral derivative d^order/dx_axis^order. Exact for band-limited input;
/// errors out when the spectrum carries mass at the resolution limit.
pub fn spectral_derivative(phi: &WaveFunction, axis: usize, order: u8) -> Result<WaveFunction> {
    if !(1..=2).contains(&order) {
        return Err(Error::UnsupportedDerivativeOrder { order });
    }
    if axis >= phi.grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: phi.grid.dim(),
            got: axis + 1,
        });
    }
    let tail = phi.spectral_tail_fraction();
    if tail > 1e-10 {
        return Err(Error::SpectralTail { fraction: tail });
    }
    let n = phi.grid.points_per_axis();
    let kappa = phi.grid.axis_wavenumbers();
    let engine = SpectralEngine::new(n);
    let mut buf = phi.values.clone();
    let (rows, cols) = match phi.grid.dim() {
        1 => (1, n),
        2 => (n, n),
        _ => unreachable!(),
    };
    let fft_axis = if phi.grid.dim() == 1 { 1 } else { axis };
    transform_axis(&engine, &mut buf, rows, cols, fft_axis, false);
    let nyquist = n / 2;
    let multiplier = |m: usize| -> Complex64 {
        match order {
            // Zero the Nyquist bin for odd derivatives: it has no signed ik.
            1 => {
                if m == nyquist {
                    Complex64::default()
                } else {
                    Complex64::new(0.0, kappa[m])
                }
            }
            2 => Complex64::new(-kappa[m] * kappa[m], 0.0),
            _ => unreachable!(),
        }
    };
    match (phi.grid.dim(), fft_axis) {
        (1, _) => {
            for (m, v) in buf.iter_mut().enumerate() {
                *v *= multiplier(m);
            }
        }
        (2, 1) => {
            for idx in 0..buf.len() {
                buf[idx] *= multiplier(idx % n);
            }
        }
        (2, 0) => {
            for idx in 0..buf.len() {
                buf[idx] *= multiplier(idx / n);
            }
        }
        _ => unreachable!(),
    }
    transform_axis(&engine, &mut buf, rows, cols, fft_axis, true);
    WaveFunction::from_values(phi.grid, buf)
}

/// Sample the minimum-uncertainty packet
/// (2 pi sigma^2)^(-d/4) exp(-(x-a)^2 / 4 sigma^2) exp(i p (x-a) / hbar)
/// and renormalize away the (tiny) quadrature drift.
pub fn sample_gaussian_packet(
    grid: &GridSpec,
    center: &[f64],
    momentum: &[f64],
    sigma: f64,
    hbar: f64,
) -> Result<WaveFunction> {
    let d = grid.dim();
    if center.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: center.len(),
        });
    }
    if momentum.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: momentum.len(),
        });
    }
    let dx = grid.spacing();
    if sigma < 3.0 * dx {
        return Err(Error::PacketTooNarrow {
            sigma,
            min: 3.0 * dx,
        });
    }
    let half = grid.box_length() / 2.0;
    for &a in center {
        if half - a.abs() < 10.0 * sigma {
            return Err(Error::PacketNearBoundary {
                center: a,
                required: 10.0 * sigma,
            });
        }
    }
    let prefactor = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-(d as f64) / 4.0);
    let mut wf = WaveFunction::from_fn(*grid, |x| {
        let mut q = 0.0;
        let mut phase = 0.0;
        for i in 0..d {
            let u = x[i] - center[i];
            q += u * u;
            phase += momentum[i] * u / hbar;
        }
        Complex64::from_polar(prefactor * (-q / (4.0 * sigma * sigma)).exp(), phase)
    });
    let drift = wf.normalize();
    debug_assert!(drift <= 1e-10, "sampling drift {drift:.3e}");
    Ok(wf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid() -> GridSpec {
        GridSpec::new_1d(512, 40.0).unwrap()
    }

    #[test]
    fn grid_invariants_enforced() {
        assert!(GridSpec::new_1d(32, 40.0).is_err());
        assert!(GridSpec::new_1d(100, 40.0).is_err());
        assert!(GridSpec::new_1d(128, -1.0).is_err());
        assert!(GridSpec::new(3, 128, 10.0).is_err());
        // 2048^2 == 2^22 is the cap boundary; 4096^2 exceeds it.
        assert!(GridSpec::new_2d(2048, 40.0).is_ok());
        assert!(GridSpec::new_2d(4096, 40.0).is_err());
    }

    #[test]
    fn normalized_gaussian_inner_is_one() {
        let g = grid();
        let wf = sample_gaussian_packet(&g, &[0.0], &[0.0], 1.0, 1.0).unwrap();
        let ip = l2_inner(&wf, &wf).unwrap();
        assert_abs_diff_eq!(ip.re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ip.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn even_odd_states_are_orthogonal() {
        let g = grid();
        let even = WaveFunction::from_fn(g, |x| Complex64::new((-x[0] * x[0] / 4.0).exp(), 0.0));
        let odd = WaveFunction::from_fn(g, |x| {
            Complex64::new(x[0] * (-x[0] * x[0] / 4.0).exp(), 0.0)
        });
        let ip = l2_inner(&even, &odd).unwrap();
        assert_abs_diff_eq!(ip.norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn gaussian_overlap_matches_closed_form() {
        // centers 0 and 2, sigma = 1: overlap e^{-4/8}.
        let g = grid();
        let a = sample_gaussian_packet(&g, &[0.0], &[0.0], 1.0, 1.0).unwrap();
        let b = sample_gaussian_packet(&g, &[2.0], &[0.0], 1.0, 1.0).unwrap();
        let ip = l2_inner(&a, &b).unwrap();
        assert_abs_diff_eq!(ip.re, (-0.5f64).exp(), epsilon = 1e-10);
        assert_abs_diff_eq!(ip.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn mismatched_grids_error() {
        let a = sample_gaussian_packet(&grid(), &[0.0], &[0.0], 1.0, 1.0).unwrap();
        let g2 = GridSpec::new_1d(256, 40.0).unwrap();
        let b = sample_gaussian_packet(&g2, &[0.0], &[0.0], 1.0, 1.0).unwrap();
        assert!(matches!(l2_inner(&a, &b), Err(Error::GridMismatch)));
    }

    #[test]
    fn plane_wave_derivative_is_exact() {
        let g = grid();
        let k = g.axis_wavenumbers()[5];
        let wf = WaveFunction::from_fn(g, |x| Complex64::from_polar(1.0, k * x[0]));
        let d = spectral_derivative(&wf, 0, 1).unwrap();
        for (dv, v) in d.values().iter().zip(wf.values()) {
            let expected = Complex64::new(0.0, k) * v;
            assert_abs_diff_eq!((dv - expected).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn gaussian_derivative_vanishes_at_center() {
        let g = grid();
        let wf = sample_gaussian_packet(&g, &[0.0], &[0.0], 1.0, 1.0).unwrap();
        let d = spectral_derivative(&wf, 0, 1).unwrap();
        let j0 = g.points_per_axis() / 2; // x = 0
        assert_abs_diff_eq!(d.values()[j0].norm(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn kinetic_quadratic_form_matches_momentum_variance() {
        // <phi, -d^2/dx^2 phi> = <p^2>/hbar^2 = 1/(4 sigma^2) at p0 = 0.
        let g = grid();
        let wf = sample_gaussian_packet(&g, &[0.0], &[0.0], 0.5, 1.0).unwrap();
        let lap = spectral_derivative(&wf, 0, 2).unwrap();
        let form = -l2_inner(&lap, &wf).unwrap().re;
        assert_abs_diff_eq!(form, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn packet_preconditions() {
        let g = grid();
        assert!(matches!(
            sample_gaussian_packet(&g, &[0.0], &[0.0], 0.1, 1.0),
            Err(Error::PacketTooNarrow { .. })
        ));
        assert!(matches!(
            sample_gaussian_packet(&g, &[16.0], &[0.0], 1.0, 1.0),
            Err(Error::PacketNearBoundary { .. })
        ));
    }

    #[test]
    fn sampled_packet_recovers_parameters() {
        let g = grid();
        let wf = sample_gaussian_packet(&g, &[1.5], &[2.0], 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(wf.position_mean(0), 1.5, epsilon = 1e-8);
        assert_abs_diff_eq!(wf.momentum_mean(0, 1.0), 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(wf.sigma_measured(0), 1.0, epsilon = 1e-8);
        assert!(wf.is_normalized());
        assert!(wf.boundary_mass() <= BOUNDARY_MASS_LIMIT);
    }

    #[test]
    fn parseval_holds() {
        let g = grid();
        let a = sample_gaussian_packet(&g, &[1.0], &[1.0], 1.0, 1.0).unwrap();
        let b = sample_gaussian_packet(&g, &[-2.0], &[0.5], 0.8, 1.0).unwrap();
        let pos = l2_inner(&a, &b).unwrap();
        let spec = l2_inner_spectral(&a, &b).unwrap();
        assert_abs_diff_eq!((pos - spec).norm(), 0.0, epsilon = 1e-12);
    }
}
