//! Forward and inverse transforms between [`Field`] and [`Spectrum`].

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Spectrum};

/// Imaginary residue tolerated after an inverse transform, relative to the
/// largest real sample.
pub const IMAG_RESIDUE_TOL: f64 = 1e-9;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

pub(crate) fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

fn parity(i: usize) -> f64 {
    if i % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Raw forward transform of real samples into normalised coefficients.
pub(crate) fn forward_raw(grid: &Grid, values: &[f64], out: &mut Vec<Complex64>) {
    let n = grid.len();
    out.clear();
    out.extend(values.iter().map(|&v| Complex64::new(v, 0.0)));
    forward_plan(n).process(out);
    let scale = grid.dx() / (2.0 * PI).sqrt();
    for (i, c) in out.iter_mut().enumerate() {
        *c *= scale * parity(i);
    }
}

/// Raw inverse transform; `buf` is consumed as scratch and holds complex
/// samples on return.
pub(crate) fn inverse_raw(grid: &Grid, buf: &mut [Complex64]) {
    let n = grid.len();
    let scale = (2.0 * PI).sqrt() / (2.0 * grid.half_length());
    for (i, c) in buf.iter_mut().enumerate() {
        *c *= scale * parity(i);
    }
    inverse_plan(n).process(buf);
}

/// Checks the imaginary residue of `buf` and returns the real parts.
pub(crate) fn take_real(buf: &[Complex64], what: &str) -> Result<Vec<f64>> {
    let mut max_re = 0.0_f64;
    let mut max_im = 0.0_f64;
    for c in buf {
        max_re = max_re.max(c.re.abs());
        max_im = max_im.max(c.im.abs());
    }
    if max_im > IMAG_RESIDUE_TOL * max_re && max_im > 1e-300 {
        return Err(Error::Consistency(format!(
            "{what}: imaginary residue {max_im:e} exceeds {IMAG_RESIDUE_TOL:e} of field norm {max_re:e}"
        )));
    }
    Ok(buf.iter().map(|c| c.re).collect())
}

/// Discrete transform: coefficient `k` approximates `(1/√2π)∫e^{-ixξ_k} f dx`.
pub fn transform(field: &Field) -> Spectrum {
    let mut coeffs = Vec::with_capacity(field.grid().len());
    forward_raw(field.grid(), field.values(), &mut coeffs);
    Spectrum::new(*field.grid(), coeffs).expect("length matches grid")
}

/// Inverse of [`transform`]. Fails when the spectrum does not represent a
/// real field (imaginary residue above [`IMAG_RESIDUE_TOL`]).
pub fn inverse_transform(spectrum: &Spectrum) -> Result<Field> {
    let grid = *spectrum.grid();
    let mut buf = spectrum.coeffs().to_vec();
    inverse_raw(&grid, &mut buf);
    let values = take_real(&buf, "inverse transform")?;
    Field::new(grid, values)
}
