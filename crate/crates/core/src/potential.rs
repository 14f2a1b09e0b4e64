//! Potential families with analytic gradients, optional time dependence, and
//! the linear-approximation gates used before projecting packet dynamics.

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use serde::{Deserialize, Serialize};

/// Threshold for both linear-approximation gates.
pub const LINEARITY_GATE_THRESHOLD: f64 = 1e-3;

/// Scalar schedule s(t) with s(0) = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum ScheduleForm {
    /// s(t) = 1 + rate * t
    Ramp { rate: f64 },
    /// s(t) = cos(omega * t)
    Cosine { omega: f64 },
}

impl ScheduleForm {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            ScheduleForm::Ramp { rate } => 1.0 + rate * t,
            ScheduleForm::Cosine { omega } => (omega * t).cos(),
        }
    }
}

/// How the schedule enters: V(x, t) = s(t) V0(x) or V0(x) + s(t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeDependence {
    Multiplicative { schedule: ScheduleForm },
    Additive { schedule: ScheduleForm },
}

/// Potential families. `Custom` tables are sampled on the axis
/// x_j = -L/2 + j L/n with n = table.len().
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PotentialFamily {
    Free,
    /// V = -F . x (constant force F).
    Linear { force: Vec<f64> },
    /// V = (k/2) |x - center|^2.
    Harmonic { k: f64, center: Vec<f64> },
    /// Tabulated 1D potential and its gradient on a private uniform axis.
    Custom {
        box_length: f64,
        table: Vec<f64>,
        gradient: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    #[serde(flatten)]
    pub family: PotentialFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_dependence: Option<TimeDependence>,
}

impl PotentialSpec {
    pub fn free() -> Self {
        Self {
            family: PotentialFamily::Free,
            time_dependence: None,
        }
    }

    pub fn linear_1d(force: f64) -> Self {
        Self {
            family: PotentialFamily::Linear { force: vec![force] },
            time_dependence: None,
        }
    }

    pub fn harmonic_1d(k: f64) -> Self {
        Self {
            family: PotentialFamily::Harmonic {
                k,
                center: vec![0.0],
            },
            time_dependence: None,
        }
    }

    /// Validates a custom table: gradient must match centered differences of
    /// the values to 1e-4 (away from the wrap-around ends).
    pub fn custom_1d(box_length: f64, table: Vec<f64>, gradient: Vec<f64>) -> Result<Self> {
        if table.len() != gradient.len() || table.len() < 8 {
            return Err(Error::InvalidGrid(format!(
                "custom table/gradient lengths mismatch ({} vs {})",
                table.len(),
                gradient.len()
            )));
        }
        let dx = box_length / table.len() as f64;
        let scale = gradient
            .iter()
            .fold(0.0f64, |m, g| m.max(g.abs()))
            .max(1.0);
        for j in 1..table.len() - 1 {
            let fd = (table[j + 1] - table[j - 1]) / (2.0 * dx);
            if (fd - gradient[j]).abs() > 1e-4 * scale + 1e-4 * dx * dx {
                return Err(Error::InvalidGrid(format!(
                    "custom gradient inconsistent with table at index {j}: fd {fd:.6e} vs {:.6e}",
                    gradient[j]
                )));
            }
        }
        Ok(Self {
            family: PotentialFamily::Custom {
                box_length,
                table,
                gradient,
            },
            time_dependence: None,
        })
    }

    pub fn with_time_dependence(mut self, dep: TimeDependence) -> Self {
        self.time_dependence = Some(dep);
        self
    }

    pub fn is_time_dependent(&self) -> bool {
        self.time_dependence.is_some()
    }

    fn schedule_factor(&self, t: f64) -> (f64, f64) {
        // (multiplier on V0, additive offset)
        match &self.time_dependence {
            None => (1.0, 0.0),
            Some(TimeDependence::Multiplicative { schedule }) => (schedule.value(t), 0.0),
            Some(TimeDependence::Additive { schedule }) => (1.0, schedule.value(t)),
        }
    }

    fn base_value(&self, x: &[f64]) -> f64 {
        match &self.family {
            PotentialFamily::Free => 0.0,
            PotentialFamily::Linear { force } => {
                -force.iter().zip(x).map(|(f, xi)| f * xi).sum::<f64>()
            }
            PotentialFamily::Harmonic { k, center } => {
                0.5 * k
                    * x.iter()
                        .zip(center)
                        .map(|(xi, c)| (xi - c) * (xi - c))
                        .sum::<f64>()
            }
            PotentialFamily::Custom {
                box_length, table, ..
            } => interpolate(table, *box_length, x[0]),
        }
    }

    fn base_gradient(&self, x: &[f64]) -> Vec<f64> {
        match &self.family {
            PotentialFamily::Free => vec![0.0; x.len()],
            PotentialFamily::Linear { force } => force.iter().map(|f| -f).collect(),
            PotentialFamily::Harmonic { k, center } => x
                .iter()
                .zip(center)
                .map(|(xi, c)| k * (xi - c))
                .collect(),
            PotentialFamily::Custom {
                box_length,
                gradient,
                ..
            } => vec![interpolate(gradient, *box_length, x[0])],
        }
    }

    pub fn value(&self, x: &[f64], t: f64) -> f64 {
        let (mult, add) = self.schedule_factor(t);
        mult * self.base_value(x) + add
    }

    pub fn gradient(&self, x: &[f64], t: f64) -> Vec<f64> {
        let (mult, _) = self.schedule_factor(t);
        self.base_gradient(x).into_iter().map(|g| mult * g).collect()
    }

    /// Potential samples on every grid point at time t.
    pub fn sample(&self, grid: &GridSpec, t: f64) -> Vec<f64> {
        (0..grid.total_points())
            .map(|idx| self.value(&grid.coords_of(idx), t))
            .collect()
    }

    /// -dV/dx_axis on every grid point at time t.
    pub fn force_samples(&self, grid: &GridSpec, axis: usize, t: f64) -> Vec<f64> {
        (0..grid.total_points())
            .map(|idx| -self.gradient(&grid.coords_of(idx), t)[axis])
            .collect()
    }

    /// Second derivative along `axis` (diagonal of the Hessian).
    pub fn second_derivative(&self, x: &[f64], axis: usize, t: f64) -> f64 {
        let (mult, _) = self.schedule_factor(t);
        let base = match &self.family {
            PotentialFamily::Free | PotentialFamily::Linear { .. } => 0.0,
            PotentialFamily::Harmonic { k, .. } => *k,
            PotentialFamily::Custom {
                box_length,
                gradient,
                ..
            } => {
                let dx = box_length / gradient.len() as f64;
                (interpolate(gradient, *box_length, x[0] + dx)
                    - interpolate(gradient, *box_length, x[0] - dx))
                    / (2.0 * dx)
            }
        };
        let _ = axis;
        mult * base
    }

    fn third_derivative(&self, x: &[f64], t: f64) -> f64 {
        let (mult, _) = self.schedule_factor(t);
        let base = match &self.family {
            PotentialFamily::Free
            | PotentialFamily::Linear { .. }
            | PotentialFamily::Harmonic { .. } => 0.0,
            PotentialFamily::Custom { box_length, .. } => {
                let n = match &self.family {
                    PotentialFamily::Custom { table, .. } => table.len(),
                    _ => unreachable!(),
                };
                let dx = box_length / n as f64;
                let d2 = |xi: f64| self.second_derivative(&[xi], 0, 0.0);
                (d2(x[0] + dx) - d2(x[0] - dx)) / (2.0 * dx)
            }
        };
        mult * base
    }

    /// Size of the quadratic term of V relative to the linear term across one
    /// sigma interval: |V''(a)| sigma / |V'(a)|. Zero numerator passes, zero
    /// denominator with curvature present fails.
    pub fn curvature_ratio(&self, center: &[f64], sigma: f64, t: f64) -> f64 {
        let grad = self.gradient(center, t);
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let curv = (0..center.len())
            .map(|ax| self.second_derivative(center, ax, t).abs())
            .fold(0.0f64, f64::max);
        if curv == 0.0 {
            0.0
        } else if gnorm == 0.0 {
            f64::INFINITY
        } else {
            curv * sigma / gnorm
        }
    }

    /// Nonlinearity of the force across one sigma interval:
    /// |V'''(a)| sigma / max(|V''(a)|, |V'(a)| / sigma). Exactly zero for
    /// free, linear, and harmonic potentials.
    pub fn force_linearity_ratio(&self, center: &[f64], sigma: f64, t: f64) -> f64 {
        let v3 = self.third_derivative(center, t).abs();
        if v3 == 0.0 {
            return 0.0;
        }
        let grad = self.gradient(center, t);
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let curv = (0..center.len())
            .map(|ax| self.second_derivative(center, ax, t).abs())
            .fold(0.0f64, f64::max);
        let reference = curv.max(gnorm / sigma);
        if reference == 0.0 {
            f64::INFINITY
        } else {
            v3 * sigma / reference
        }
    }

    /// Enforce the strict gate (quadratic correction small within sigma).
    pub fn require_linear_gate(&self, center: &[f64], sigma: f64, t: f64) -> Result<()> {
        let ratio = self.curvature_ratio(center, sigma, t);
        if ratio > LINEARITY_GATE_THRESHOLD {
            return Err(Error::LinearityGateFailed {
                ratio,
                threshold: LINEARITY_GATE_THRESHOLD,
            });
        }
        Ok(())
    }

    /// Enforce the force-linearity gate (projection rates exact when the
    /// force is linear in x).
    pub fn require_force_linearity(&self, center: &[f64], sigma: f64, t: f64) -> Result<()> {
        let ratio = self.force_linearity_ratio(center, sigma, t);
        if ratio > LINEARITY_GATE_THRESHOLD {
            return Err(Error::LinearityGateFailed {
                ratio,
                threshold: LINEARITY_GATE_THRESHOLD,
            });
        }
        Ok(())
    }
}

/// Linear interpolation on the periodic axis x_j = -L/2 + j dx.
fn interpolate(table: &[f64], box_length: f64, x: f64) -> f64 {
    let n = table.len();
    let dx = box_length / n as f64;
    let pos = (x + box_length / 2.0) / dx;
    let j = pos.floor();
    let frac = pos - j;
    let j0 = (j.rem_euclid(n as f64)) as usize % n;
    let j1 = (j0 + 1) % n;
    table[j0] * (1.0 - frac) + table[j1] * frac
}
