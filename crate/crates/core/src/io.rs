//! Serialization of grid states and diagnostics.
//!
//! Binary state layout: header of three little-endian 64-bit values
//! (dim, points_per_axis, box_length), then interleaved re/im f64 pairs in
//! row-major order.

use crate::error::{Error, Result};
use crate::evolve::StepDiagnostics;
use crate::grid::{GridSpec, WaveFunction};
use num_complex::Complex64;
use std::io::{Read, Write};
use std::path::Path;

pub fn write_wavefunction(wf: &WaveFunction, out: &mut impl Write) -> Result<()> {
    let grid = wf.grid();
    out.write_all(&(grid.dim() as u64).to_le_bytes())?;
    out.write_all(&(grid.points_per_axis() as u64).to_le_bytes())?;
    out.write_all(&grid.box_length().to_le_bytes())?;
    for v in wf.values() {
        out.write_all(&v.re.to_le_bytes())?;
        out.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_wavefunction(input: &mut impl Read) -> Result<WaveFunction> {
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let dim = u64::from_le_bytes(word) as usize;
    input.read_exact(&mut word)?;
    let n = u64::from_le_bytes(word) as usize;
    input.read_exact(&mut word)?;
    let length = f64::from_le_bytes(word);
    let grid = GridSpec::new(dim, n, length)?;
    let mut values = Vec::with_capacity(grid.total_points());
    for _ in 0..grid.total_points() {
        input.read_exact(&mut word)?;
        let re = f64::from_le_bytes(word);
        input.read_exact(&mut word)?;
        let im = f64::from_le_bytes(word);
        values.push(Complex64::new(re, im));
    }
    WaveFunction::from_values(grid, values)
}

pub fn save_wavefunction(wf: &WaveFunction, path: impl AsRef<Path>) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_wavefunction(wf, &mut file)
}

pub fn load_wavefunction(path: impl AsRef<Path>) -> Result<WaveFunction> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    read_wavefunction(&mut file)
}

/// Plot-ready samples: `x,re,im,abs2` rows (1D) or `x1,x2,re,im,abs2` (2D).
pub fn wavefunction_csv(wf: &WaveFunction, out: &mut impl Write) -> Result<()> {
    let grid = wf.grid();
    match grid.dim() {
        1 => {
            writeln!(out, "x,re,im,abs2")?;
            for (idx, v) in wf.values().iter().enumerate() {
                let x = grid.coords_of(idx);
                writeln!(out, "{},{},{},{}", x[0], v.re, v.im, v.norm_sqr())?;
            }
        }
        2 => {
            writeln!(out, "x1,x2,re,im,abs2")?;
            for (idx, v) in wf.values().iter().enumerate() {
                let x = grid.coords_of(idx);
                writeln!(out, "{},{},{},{},{}", x[0], x[1], v.re, v.im, v.norm_sqr())?;
            }
        }
        _ => unreachable!(),
    }
    Ok(())
}

/// |psi|^2 as a matrix (one row per x1 sample) for heat maps.
pub fn density_matrix_csv(wf: &WaveFunction, out: &mut impl Write) -> Result<()> {
    let grid = wf.grid();
    if grid.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: grid.dim(),
        });
    }
    let n = grid.points_per_axis();
    for i in 0..n {
        let row: Vec<String> = (0..n)
            .map(|j| format!("{}", wf.values()[i * n + j].norm_sqr()))
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// One row per step: time, norm, energy, uncertainty, then per-axis moments.
pub fn diagnostics_csv(diagnostics: &[StepDiagnostics], out: &mut impl Write) -> Result<()> {
    let Some(first) = diagnostics.first() else {
        return Ok(());
    };
    let d = first.x_mean.len();
    let mut header = vec![
        "t".to_string(),
        "norm".to_string(),
        "e_mean".to_string(),
        "e_uncertainty".to_string(),
    ];
    for axis in 0..d {
        header.push(format!("x_mean_{axis}"));
        header.push(format!("p_mean_{axis}"));
        header.push(format!("sigma_{axis}"));
        header.push(format!("force_mean_{axis}"));
    }
    writeln!(out, "{}", header.join(","))?;
    for row in diagnostics {
        let mut cells = vec![
            format!("{}", row.t),
            format!("{}", row.norm),
            format!("{}", row.energy_mean),
            format!("{}", row.energy_uncertainty),
        ];
        for axis in 0..d {
            cells.push(format!("{}", row.x_mean[axis]));
            cells.push(format!("{}", row.p_mean[axis]));
            cells.push(format!("{}", row.sigma[axis]));
            cells.push(format!("{}", row.force_mean[axis]));
        }
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Aligned multi-series CSV (e.g. constrained vs reference trajectories).
pub fn aligned_series_csv(
    headers: &[&str],
    columns: &[&[f64]],
    out: &mut impl Write,
) -> Result<()> {
    if headers.len() != columns.len() {
        return Err(Error::DimensionMismatch {
            expected: headers.len(),
            got: columns.len(),
        });
    }
    let rows = columns.first().map_or(0, |c| c.len());
    for c in columns {
        if c.len() != rows {
            return Err(Error::DimensionMismatch {
                expected: rows,
                got: c.len(),
            });
        }
    }
    writeln!(out, "{}", headers.join(","))?;
    for r in 0..rows {
        let cells: Vec<String> = columns.iter().map(|c| format!("{}", c[r])).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sample_gaussian_packet;

    #[test]
    fn binary_round_trip() {
        let grid = GridSpec::new_1d(128, 20.0).unwrap();
        let wf = sample_gaussian_packet(&grid, &[0.5], &[1.0], 0.7, 1.0).unwrap();
        let mut buf = Vec::new();
        write_wavefunction(&wf, &mut buf).unwrap();
        assert_eq!(buf.len(), 24 + 16 * 128);
        let back = read_wavefunction(&mut buf.as_slice()).unwrap();
        assert_eq!(back.grid(), wf.grid());
        assert_eq!(back.values(), wf.values());
    }

    #[test]
    fn header_is_little_endian_words() {
        let grid = GridSpec::new_1d(64, 10.0).unwrap();
        let wf = WaveFunction::zero(grid);
        let mut buf = Vec::new();
        write_wavefunction(&wf, &mut buf).unwrap();
        assert_eq!(u64::from_le_bytes(buf[0..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 64);
        assert_eq!(f64::from_le_bytes(buf[16..24].try_into().unwrap()), 10.0);
    }

    #[test]
    fn csv_has_expected_shape() {
        let grid = GridSpec::new_1d(128, 20.0).unwrap();
        let wf = sample_gaussian_packet(&grid, &[0.0], &[0.0], 0.6, 1.0).unwrap();
        let mut buf = Vec::new();
        wavefunction_csv(&wf, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 129);
        assert!(text.starts_with("x,re,im,abs2"));
    }
}
