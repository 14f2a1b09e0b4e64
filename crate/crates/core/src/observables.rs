//! Observables as vector fields on the sphere of states.
//!
//! A self-adjoint operator A defines the linear field phi -> -i A phi,
//! tangent to the unit sphere. Its projection on the phase direction is the
//! expectation of A, the squared norm of the orthogonal part is the variance,
//! and for the Hamiltonian the orthogonal norm is the speed of evolution in
//! the projective space.

use crate::error::{Error, Result};
use crate::grid::{l2_inner, WaveFunction};
use crate::potential::PotentialSpec;
use crate::spectral::{transform_axis, SpectralEngine};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Operator descriptors: diagonal in position, diagonal in spectrum, and
/// their sums, scalings, and compositions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LinearOperator {
    Identity,
    /// Multiplication by x_axis^power.
    Position { axis: usize, power: u8 },
    /// Spectral multiplication by (hbar kappa_axis)^power.
    Momentum { axis: usize, power: u8, hbar: f64 },
    /// Total kinetic energy sum_axes p_axis^2 / 2m.
    Kinetic { mass: f64, hbar: f64 },
    /// Multiplication by V(x, t).
    Potential { potential: PotentialSpec },
    /// Kinetic + potential.
    Hamiltonian {
        mass: f64,
        hbar: f64,
        potential: PotentialSpec,
    },
    Scaled {
        re: f64,
        im: f64,
        inner: Box<LinearOperator>,
    },
    Sum { terms: Vec<LinearOperator> },
    /// Operator product: (Compose a b) phi = a (b phi).
    Compose {
        first: Box<LinearOperator>,
        second: Box<LinearOperator>,
    },
}

impl LinearOperator {
    pub fn position() -> Self {
        LinearOperator::Position { axis: 0, power: 1 }
    }

    pub fn momentum(hbar: f64) -> Self {
        LinearOperator::Momentum {
            axis: 0,
            power: 1,
            hbar,
        }
    }

    pub fn hamiltonian(mass: f64, hbar: f64, potential: PotentialSpec) -> Self {
        LinearOperator::Hamiltonian {
            mass,
            hbar,
            potential,
        }
    }

    /// A + c I.
    pub fn shifted(self, c: f64) -> Self {
        LinearOperator::Sum {
            terms: vec![
                self,
                LinearOperator::Scaled {
                    re: c,
                    im: 0.0,
                    inner: Box::new(LinearOperator::Identity),
                },
            ],
        }
    }

    /// Operator square A A (self-adjoint whenever A is).
    pub fn squared(&self) -> Self {
        LinearOperator::Compose {
            first: Box::new(self.clone()),
            second: Box::new(self.clone()),
        }
    }

    /// Structural self-adjointness: real diagonal multipliers, real scalings,
    /// sums of self-adjoint terms, and squares A A.
    pub fn is_self_adjoint(&self) -> bool {
        match self {
            LinearOperator::Identity
            | LinearOperator::Position { .. }
            | LinearOperator::Momentum { .. }
            | LinearOperator::Kinetic { .. }
            | LinearOperator::Potential { .. }
            | LinearOperator::Hamiltonian { .. } => true,
            LinearOperator::Scaled { im, inner, .. } => *im == 0.0 && inner.is_self_adjoint(),
            LinearOperator::Sum { terms } => terms.iter().all(|t| t.is_self_adjoint()),
            LinearOperator::Compose { first, second } => {
                first == second && first.is_self_adjoint()
            }
        }
    }

    /// Apply the operator at time t (time enters only through potentials).
    pub fn apply_at(&self, phi: &WaveFunction, t: f64) -> Result<WaveFunction> {
        match self {
            LinearOperator::Identity => Ok(phi.clone()),
            LinearOperator::Position { axis, power } => {
                let axis = *axis;
                let power = *power as i32;
                if axis >= phi.grid().dim() {
                    return Err(Error::DimensionMismatch {
                        expected: phi.grid().dim(),
                        got: axis + 1,
                    });
                }
                Ok(phi.mul_real(|x| x[axis].powi(power)))
            }
            LinearOperator::Momentum { axis, power, hbar } => spectral_multiply(
                phi,
                |kappa| (hbar * kappa[*axis]).powi(*power as i32),
                *power % 2 == 1,
                *axis,
            ),
            LinearOperator::Kinetic { mass, hbar } => {
                let m = *mass;
                let hb = *hbar;
                spectral_multiply(
                    phi,
                    |kappa| kappa.iter().map(|k| hb * hb * k * k).sum::<f64>() / (2.0 * m),
                    false,
                    0,
                )
            }
            LinearOperator::Potential { potential } => {
                let v = potential.sample(phi.grid(), t);
                let values = phi
                    .values()
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| a * *b)
                    .collect();
                WaveFunction::from_values(*phi.grid(), values)
            }
            LinearOperator::Hamiltonian {
                mass,
                hbar,
                potential,
            } => {
                let kin = LinearOperator::Kinetic {
                    mass: *mass,
                    hbar: *hbar,
                }
                .apply_at(phi, t)?;
                let pot = LinearOperator::Potential {
                    potential: potential.clone(),
                }
                .apply_at(phi, t)?;
                kin.add_scaled(Complex64::new(1.0, 0.0), &pot)
            }
            LinearOperator::Scaled { re, im, inner } => {
                Ok(inner.apply_at(phi, t)?.scaled(Complex64::new(*re, *im)))
            }
            LinearOperator::Sum { terms } => {
                let mut acc = WaveFunction::zero(*phi.grid());
                for term in terms {
                    acc = acc.add_scaled(Complex64::new(1.0, 0.0), &term.apply_at(phi, t)?)?;
                }
                Ok(acc)
            }
            LinearOperator::Compose { first, second } => {
                first.apply_at(&second.apply_at(phi, t)?, t)
            }
        }
    }

    pub fn apply(&self, phi: &WaveFunction) -> Result<WaveFunction> {
        self.apply_at(phi, 0.0)
    }
}

/// Multiply the spectrum by a real function of the wavenumber vector.
/// `odd_axis` requests zeroing the Nyquist bin along `axis` so odd powers
/// keep the operator symmetric on the discrete space.
fn spectral_multiply(
    phi: &WaveFunction,
    f: impl Fn(&[f64]) -> f64,
    odd: bool,
    axis: usize,
) -> Result<WaveFunction> {
    let grid = *phi.grid();
    let n = grid.points_per_axis();
    let kappa = grid.axis_wavenumbers();
    let nyquist = n / 2;
    let engine = SpectralEngine::new(n);
    let mut buf = phi.values().to_vec();
    match grid.dim() {
        1 => {
            transform_axis(&engine, &mut buf, 1, n, 1, false);
            for (m, v) in buf.iter_mut().enumerate() {
                if odd && m == nyquist {
                    *v = Complex64::default();
                } else {
                    *v *= f(&[kappa[m]]);
                }
            }
            transform_axis(&engine, &mut buf, 1, n, 1, true);
        }
        2 => {
            transform_axis(&engine, &mut buf, n, n, 1, false);
            transform_axis(&engine, &mut buf, n, n, 0, false);
            for (idx, v) in buf.iter_mut().enumerate() {
                let mi = [idx / n, idx % n];
                if odd && mi[axis] == nyquist {
                    *v = Complex64::default();
                } else {
                    *v *= f(&[kappa[mi[0]], kappa[mi[1]]]);
                }
            }
            transform_axis(&engine, &mut buf, n, n, 0, true);
            transform_axis(&engine, &mut buf, n, n, 1, true);
        }
        _ => unreachable!(),
    }
    WaveFunction::from_values(grid, buf)
}

/// The vector field associated with an observable: phi -> -i A phi.
pub fn vector_field(op: &LinearOperator, phi: &WaveFunction) -> Result<WaveFunction> {
    if !op.is_self_adjoint() {
        return Err(Error::NotSelfAdjoint);
    }
    Ok(op.apply(phi)?.scaled(-Complex64::I))
}

/// Expectation and variance as geometry: the mean is the projection of
/// -i A phi on the phase direction -i phi, the variance is the squared norm
/// of the orthogonal rest.
pub fn expectation_variance(op: &LinearOperator, phi: &WaveFunction) -> Result<(f64, f64)> {
    let field = vector_field(op, phi)?;
    let phase_dir = phi.scaled(-Complex64::I);
    let mean = l2_inner(&field, &phase_dir)?.re;
    let orth = field.add_scaled(Complex64::new(-mean, 0.0), &phase_dir)?;
    Ok((mean, orth.l2_norm_sq()))
}

/// The same two numbers from the quadratic forms (phi, A phi) and
/// (A phi, A phi) - mean^2; the dual route for cross-checking.
pub fn expectation_variance_direct(
    op: &LinearOperator,
    phi: &WaveFunction,
) -> Result<(f64, f64)> {
    let a_phi = op.apply(phi)?;
    let mean = l2_inner(&a_phi, phi)?.re;
    let second = l2_inner(&a_phi, &a_phi)?.re;
    Ok((mean, second - mean * mean))
}

/// Result of comparing the numerical Lie bracket of two operator fields with
/// the commutator applied directly.
#[derive(Debug, Clone, Copy)]
pub struct BracketCheck {
    /// || numerical [A_phi, B_phi] - [A, B] phi ||.
    pub residual: f64,
    /// || [A, B] phi ||, the scale for relative comparison.
    pub reference: f64,
    /// Difference between the step and half-step evaluations (Richardson).
    pub step_sensitivity: f64,
}

/// Evaluate the bracket of the fields by directional central differences and
/// compare against (A B - B A) phi. The relative step defaults to 1e-4.
pub fn lie_bracket_check(
    a: &LinearOperator,
    b: &LinearOperator,
    phi: &WaveFunction,
    relative_step: f64,
) -> Result<BracketCheck> {
    let field_a = vector_field(a, phi)?;
    let field_b = vector_field(b, phi)?;
    let bracket_at = |eps: f64| -> Result<WaveFunction> {
        let d_b_along_a = directional_derivative(b, phi, &field_a, eps)?;
        let d_a_along_b = directional_derivative(a, phi, &field_b, eps)?;
        d_b_along_a.add_scaled(Complex64::new(-1.0, 0.0), &d_a_along_b)
    };
    let base = phi.l2_norm();
    let eps = relative_step * base;
    let num1 = bracket_at(eps)?;
    let num2 = bracket_at(eps / 2.0)?;
    let step_sensitivity = num1
        .add_scaled(Complex64::new(-1.0, 0.0), &num2)?
        .l2_norm();
    // [A, B] phi applied directly.
    let ab = a.apply(&b.apply(phi)?)?;
    let ba = b.apply(&a.apply(phi)?)?;
    let direct = ab.add_scaled(Complex64::new(-1.0, 0.0), &ba)?;
    let residual = num2
        .add_scaled(Complex64::new(-1.0, 0.0), &direct)?
        .l2_norm();
    Ok(BracketCheck {
        residual,
        reference: direct.l2_norm(),
        step_sensitivity,
    })
}

/// Central difference of the field phi -> -i Op phi along direction v.
fn directional_derivative(
    op: &LinearOperator,
    phi: &WaveFunction,
    direction: &WaveFunction,
    eps: f64,
) -> Result<WaveFunction> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidGrid(format!("step {eps} <= 0")));
    }
    let plus = phi.add_scaled(Complex64::new(eps, 0.0), direction)?;
    let minus = phi.add_scaled(Complex64::new(-eps, 0.0), direction)?;
    let f_plus = vector_field(op, &plus)?;
    let f_minus = vector_field(op, &minus)?;
    Ok(f_plus
        .add_scaled(Complex64::new(-1.0, 0.0), &f_minus)?
        .scaled(Complex64::new(1.0 / (2.0 * eps), 0.0)))
}

/// Fubini-Study distance between rays: arccos of the clamped overlap modulus.
/// Phase- and normalization-invariant.
pub fn fubini_study_distance(phi: &WaveFunction, psi: &WaveFunction) -> Result<f64> {
    let overlap = l2_inner(phi, psi)?.norm();
    let scale = phi.l2_norm() * psi.l2_norm();
    let cosine = if scale == 0.0 { 0.0 } else { overlap / scale };
    Ok(cosine.clamp(0.0, 1.0).acos())
}

/// Speed of the projected evolution: Delta h / hbar = || h_perp phi || / hbar.
pub fn projective_speed(phi: &WaveFunction, h: &LinearOperator, hbar: f64) -> Result<f64> {
    let (_, variance) = expectation_variance(h, phi)?;
    Ok(variance.sqrt() / hbar)
}

/// Full speed of the state itself: || h phi || / hbar = sqrt(<h^2>) / hbar.
pub fn full_speed(phi: &WaveFunction, h: &LinearOperator, hbar: f64) -> Result<f64> {
    let h_phi = h.apply(phi)?;
    Ok(h_phi.l2_norm() / hbar)
}

/// Finite-difference route to the projective speed: evolve a short interval
/// under d phi / dt = -(i/hbar) h phi and Richardson-extrapolate the
/// Fubini-Study distance per unit time.
pub fn projective_speed_fd(
    phi: &WaveFunction,
    h: &LinearOperator,
    hbar: f64,
    dt: f64,
) -> Result<f64> {
    let d1 = fs_distance_after(phi, h, hbar, dt)? / dt;
    let d2 = fs_distance_after(phi, h, hbar, 2.0 * dt)? / (2.0 * dt);
    // distance/t = speed (1 + c t^2 + ...): eliminate the quadratic term.
    Ok((4.0 * d1 - d2) / 3.0)
}

fn fs_distance_after(
    phi: &WaveFunction,
    h: &LinearOperator,
    hbar: f64,
    t: f64,
) -> Result<f64> {
    // Hamiltonian-form generators get the unconditionally stable splitting;
    // anything else falls back to RK4 with a stability-capped inner step
    // (explicit RK4 tolerates |lambda| dt of a few at most, and the grid
    // kinetic spectrum reaches hbar kappa_max^2 / 2m).
    if let LinearOperator::Hamiltonian {
        mass, potential, ..
    } = h
    {
        let steps = 8usize;
        let stepper = crate::evolve::SplitStepPropagator::new(
            *phi.grid(),
            potential.clone(),
            *mass,
            hbar,
            t / steps as f64,
        )?;
        let mut state = phi.clone();
        for k in 0..steps {
            state = stepper.step(&state, k as f64 * t / steps as f64)?;
        }
        return fubini_study_distance(phi, &state);
    }
    let bound = spectral_radius_bound(h, phi.grid()) / hbar;
    let steps = ((t.abs() * bound / 1.5).ceil() as usize).max(4);
    let dt = t / steps as f64;
    let mut state = phi.clone();
    for _ in 0..steps {
        state = rk4_step(&state, h, hbar, dt)?;
    }
    fubini_study_distance(phi, &state)
}

/// Crude upper bound on the operator norm over the grid-representable space.
fn spectral_radius_bound(op: &LinearOperator, grid: &crate::grid::GridSpec) -> f64 {
    let kappa_max = std::f64::consts::PI * grid.points_per_axis() as f64 / grid.box_length();
    let x_max = grid.box_length() / 2.0;
    match op {
        LinearOperator::Identity => 1.0,
        LinearOperator::Position { power, .. } => x_max.powi(*power as i32).abs(),
        LinearOperator::Momentum { power, hbar, .. } => {
            (hbar * kappa_max).powi(*power as i32).abs()
        }
        LinearOperator::Kinetic { mass, hbar } => {
            hbar * hbar * kappa_max * kappa_max * grid.dim() as f64 / (2.0 * mass)
        }
        LinearOperator::Potential { potential } => potential
            .sample(grid, 0.0)
            .into_iter()
            .fold(0.0f64, |m, v| m.max(v.abs())),
        LinearOperator::Hamiltonian {
            mass,
            hbar,
            potential,
        } => {
            spectral_radius_bound(
                &LinearOperator::Kinetic {
                    mass: *mass,
                    hbar: *hbar,
                },
                grid,
            ) + spectral_radius_bound(
                &LinearOperator::Potential {
                    potential: potential.clone(),
                },
                grid,
            )
        }
        LinearOperator::Scaled { re, im, inner } => {
            Complex64::new(*re, *im).norm() * spectral_radius_bound(inner, grid)
        }
        LinearOperator::Sum { terms } => terms
            .iter()
            .map(|t| spectral_radius_bound(t, grid))
            .sum(),
        LinearOperator::Compose { first, second } => {
            spectral_radius_bound(first, grid) * spectral_radius_bound(second, grid)
        }
    }
}

/// One classical RK4 step of d phi / dt = -(i/hbar) h phi.
fn rk4_step(phi: &WaveFunction, h: &LinearOperator, hbar: f64, dt: f64) -> Result<WaveFunction> {
    let rate = |state: &WaveFunction| -> Result<WaveFunction> {
        Ok(h.apply(state)?.scaled(-Complex64::I / hbar))
    };
    let one = Complex64::new(1.0, 0.0);
    let k1 = rate(phi)?;
    let k2 = rate(&phi.add_scaled(Complex64::new(dt / 2.0, 0.0), &k1)?)?;
    let k3 = rate(&phi.add_scaled(Complex64::new(dt / 2.0, 0.0), &k2)?)?;
    let k4 = rate(&phi.add_scaled(Complex64::new(dt, 0.0), &k3)?)?;
    let mut incr = k1;
    incr = incr.add_scaled(Complex64::new(2.0, 0.0), &k2)?;
    incr = incr.add_scaled(Complex64::new(2.0, 0.0), &k3)?;
    incr = incr.add_scaled(one, &k4)?;
    phi.add_scaled(Complex64::new(dt / 6.0, 0.0), &incr)
}

/// Decomposition of the second derivative of Schroedinger evolution,
/// d^2 phi / dt^2 = -h^2 phi / hbar^2, at a state phi.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AccelerationDecomposition {
    /// Projection on the phase direction; vanishes identically.
    pub phase_tangential: f64,
    /// Magnitude of the radial (centripetal) component; equals the squared
    /// speed of evolution <h^2> / hbar^2.
    pub radial_magnitude: f64,
    /// Norm of the tangential component orthogonal to the phase direction:
    /// the uncertainty of h^2 over hbar^2.
    pub orthogonal_norm: f64,
}

pub fn acceleration_decomposition(
    phi: &WaveFunction,
    h: &LinearOperator,
    hbar: f64,
) -> Result<AccelerationDecomposition> {
    let h_phi = h.apply(phi)?;
    let tail = h_phi.spectral_tail_fraction();
    if tail > 1e-8 {
        return Err(Error::SpectralTail { fraction: tail });
    }
    let h2_phi = h.apply(&h_phi)?;
    let accel = h2_phi.scaled(Complex64::new(-1.0 / (hbar * hbar), 0.0));
    let radial = l2_inner(&accel, phi)?;
    let phase_dir = phi.scaled(-Complex64::I);
    let phase_tangential = l2_inner(&accel, &phase_dir)?.re;
    let mut rest = accel.add_scaled(-radial, phi)?;
    rest = rest.add_scaled(Complex64::new(-phase_tangential, 0.0), &phase_dir)?;
    Ok(AccelerationDecomposition {
        phase_tangential,
        radial_magnitude: radial.norm(),
        orthogonal_norm: rest.l2_norm(),
    })
}
