//! FFT plumbing: cached plans, wavenumber layouts, and in-place transforms
//! along either axis of a row-major 1D/2D array.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Forward/inverse FFT pair for a fixed length, with scratch reuse.
pub(crate) struct SpectralEngine {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl SpectralEngine {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// In-place unnormalized forward DFT.
    pub fn forward(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.forward.process(buf);
    }

    /// In-place inverse DFT including the 1/n normalization.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.inverse.process(buf);
        let scale = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }
}

/// Wavenumbers in FFT bin order: 2*pi*m/L with m = 0..n/2-1, -n/2..-1.
///
/// The Nyquist bin (index n/2) carries -pi*n/L; callers applying odd-order
/// derivative multipliers must zero it to preserve conjugate symmetry.
pub(crate) fn wavenumbers(n: usize, length: f64) -> Vec<f64> {
    let base = 2.0 * std::f64::consts::PI / length;
    (0..n)
        .map(|m| {
            let signed = if m <= n / 2 { m as isize } else { m as isize - n as isize };
            base * signed as f64
        })
        .collect()
}

/// Apply `engine` along `axis` of a row-major `rows x cols` array.
///
/// For axis 0 the transform runs down columns (stride `cols`), for axis 1
/// along contiguous rows. `inverse` selects the normalized inverse DFT.
pub(crate) fn transform_axis(
    engine: &SpectralEngine,
    values: &mut [Complex64],
    rows: usize,
    cols: usize,
    axis: usize,
    inverse: bool,
) {
    debug_assert_eq!(values.len(), rows * cols);
    match axis {
        1 => {
            debug_assert_eq!(engine.len(), cols);
            for r in 0..rows {
                let row = &mut values[r * cols..(r + 1) * cols];
                if inverse {
                    engine.inverse(row);
                } else {
                    engine.forward(row);
                }
            }
        }
        0 => {
            debug_assert_eq!(engine.len(), rows);
            let mut column = vec![Complex64::default(); rows];
            for c in 0..cols {
                for r in 0..rows {
                    column[r] = values[r * cols + c];
                }
                if inverse {
                    engine.inverse(&mut column);
                } else {
                    engine.forward(&mut column);
                }
                for r in 0..rows {
                    values[r * cols + c] = column[r];
                }
            }
        }
        _ => unreachable!("axis must be 0 or 1"),
    }
}
