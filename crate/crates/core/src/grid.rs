//! Physical parameters, the periodic grid, and sampled fields.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Physical parameters of the equation
/// `u_t + (|u|^{p-1}u)_x + ∫B e^{-b|x-y|} u_y dy = μ u_xx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub p: f64,
    pub big_b: f64,
    pub b: f64,
    pub mu: f64,
}

impl Params {
    pub fn new(p: f64, big_b: f64, b: f64, mu: f64) -> Result<Self> {
        let params = Params { p, big_b, b, mu };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(self.p.is_finite() && self.p > 2.0) {
            return Err(Error::Config(format!("p must exceed 2, got {}", self.p)));
        }
        if !ok(self.big_b) || !ok(self.b) || !ok(self.mu) {
            return Err(Error::Config(format!(
                "B, b, mu must be positive, got B={} b={} mu={}",
                self.big_b, self.b, self.mu
            )));
        }
        Ok(())
    }

    /// Drift speed `2B/b` of the modified heat kernel.
    pub fn drift(&self) -> f64 {
        2.0 * self.big_b / self.b
    }

    /// Coefficient `2B/b³` of the third-derivative dispersive correction.
    pub fn cubic_coeff(&self) -> f64 {
        2.0 * self.big_b / self.b.powi(3)
    }
}

impl Default for Params {
    fn default() -> Self {
        Params {
            p: 3.0,
            big_b: 1.0,
            b: 1.0,
            mu: 1.0,
        }
    }
}

/// Coordinate frame of a grid. In the co-moving frame node `x_j` stands for
/// the lab position `x_j + (2B/b) t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    Lab,
    Comoving,
}

impl Frame {
    pub fn to_byte(self) -> u8 {
        match self {
            Frame::Lab => 0,
            Frame::Comoving => 1,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(Frame::Lab),
            1 => Some(Frame::Comoving),
            _ => None,
        }
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Frame::Lab => "lab",
            Frame::Comoving => "comoving",
        })
    }
}

impl FromStr for Frame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "lab" => Ok(Frame::Lab),
            "comoving" => Ok(Frame::Comoving),
            other => Err(Error::Config(format!("unknown frame '{other}'"))),
        }
    }
}

/// Uniform periodic grid on `[-L, L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_length: f64,
    n: usize,
    frame: Frame,
}

impl Grid {
    pub fn new(half_length: f64, n: usize, frame: Frame) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::Config(format!(
                "grid half-length must be positive, got {half_length}"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid size must be a power of two >= 8, got {n}"
            )));
        }
        Ok(Grid {
            half_length,
            n,
            frame,
        })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn with_frame(&self, frame: Frame) -> Grid {
        Grid { frame, ..*self }
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.dx()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.x(j))
    }

    /// Lab-frame position of node `j` at time `t`.
    pub fn lab_x(&self, j: usize, t: f64, params: &Params) -> f64 {
        match self.frame {
            Frame::Lab => self.x(j),
            Frame::Comoving => self.x(j) + params.drift() * t,
        }
    }

    /// Position of node `j` relative to the drifting centre `(2B/b) t`.
    pub fn centered_x(&self, j: usize, t: f64, params: &Params) -> f64 {
        match self.frame {
            Frame::Lab => self.x(j) - params.drift() * t,
            Frame::Comoving => self.x(j),
        }
    }

    /// Signed mode number of storage index `i` (FFT order).
    pub fn mode(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Storage index of signed mode `k`, `-N/2 <= k < N/2`.
    pub fn index_of_mode(&self, k: i64) -> Option<usize> {
        let n = self.n as i64;
        if k < -n / 2 || k >= n / 2 {
            return None;
        }
        Some(if k >= 0 { k as usize } else { (k + n) as usize })
    }

    /// Wavenumber `ξ = πk/L` at storage index `i`.
    pub fn xi(&self, i: usize) -> f64 {
        PI * self.mode(i) as f64 / self.half_length
    }

    pub fn xi_max(&self) -> f64 {
        PI * (self.n / 2) as f64 / self.half_length
    }

    /// True for the unpaired Nyquist mode `k = -N/2`.
    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    /// Samples `f(x_j)` on the grid.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: *self,
            values: self.nodes().map(f).collect(),
        }
    }
}

/// Real samples `u(x_j)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "field has {} values for a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite field value at node {j}")));
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise `self + c·other`. Grids must agree.
    pub fn axpy(&self, c: f64, other: &Field) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::Config("fields live on different grids".into()));
        }
        Ok(Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.axpy(-1.0, other)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Discrete Fourier coefficients in FFT storage order, normalised so that
/// coefficient `k` approximates `(1/√2π)∫ e^{-ixξ_k} f(x) dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Config(format!(
                "spectrum has {} coefficients for a grid of {}",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(Spectrum { grid, coeffs })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of signed mode `k`.
    pub fn coeff(&self, k: i64) -> Option<Complex64> {
        self.grid.index_of_mode(k).map(|i| self.coeffs[i])
    }

    /// Multiplies every coefficient by `m(ξ_k, i)`.
    pub fn multiply(&mut self, m: impl Fn(f64, usize) -> Complex64) {
        let grid = self.grid;
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            *c *= m(grid.xi(i), i);
        }
    }

    /// Applies `∂ₓ^l` as multiplication by `(iξ)^l`; the Nyquist mode is
    /// dropped for odd `l` so the result stays real.
    pub fn differentiate(&mut self, l: u32) {
        if l == 0 {
            return;
        }
        let grid = self.grid;
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            if l % 2 == 1 && grid.is_nyquist(i) {
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c *= Complex64::new(0.0, grid.xi(i)).powu(l);
            }
        }
    }
}
