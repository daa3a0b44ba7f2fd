//! The linear semigroup `T(t)`, heat kernels, and kernel-gap norms.
//!
//! `T(x,t)` has Fourier symbol `exp(-μtξ² - i2Bbtξ/(b²+ξ²))` and is never
//! tabulated directly: it is synthesized on a grid from its symbol. The
//! modified heat kernel `G₀(x,t) = G(x - (2B/b)t, t)` is its first-order
//! asymptotic profile, and `G₀ - (2B/b³) t ∂ₓ³G₀` the second-order one.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Field, Frame, Grid, Params, Spectrum};
use crate::norms::lq_norm;
use crate::spectral::{inverse_transform, transform};

/// Minimum `μ t ξ_max²` for a grid to resolve `e^{-μtξ²}`.
pub const RESOLUTION_EXPONENT: f64 = 30.0;

/// The three algebraically equivalent ways of writing the lab-frame symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolForm {
    /// `exp(-μtξ² - i2Bbtξ/(b²+ξ²))`
    Full,
    /// `exp(-μtξ² - i(2B/b)tξ + i2Btξ³/(b(b²+ξ²)))`
    DriftExtracted,
    /// `exp(-μtξ² - i(2B/b)tξ + i(2B/b³)tξ³ - i2Btξ⁵/(b³(b²+ξ²)))`
    CubicExtracted,
}

/// Lab-frame symbol written in the given form.
pub fn symbol_form(form: SymbolForm, xi: f64, t: f64, params: &Params) -> Complex64 {
    let Params { big_b, b, mu, .. } = *params;
    let denom = b * b + xi * xi;
    let phase = match form {
        SymbolForm::Full => -2.0 * big_b * b * t * xi / denom,
        SymbolForm::DriftExtracted => {
            -2.0 * big_b * t * xi / b + 2.0 * big_b * t * xi.powi(3) / (b * denom)
        }
        SymbolForm::CubicExtracted => {
            -2.0 * big_b * t * xi / b + 2.0 * big_b * t * xi.powi(3) / b.powi(3)
                - 2.0 * big_b * t * xi.powi(5) / (b.powi(3) * denom)
        }
    };
    Complex64::from_polar((-mu * t * xi * xi).exp(), phase)
}

/// Phase of the co-moving symbol, `2Btξ³/(b(b²+ξ²))`.
fn comoving_phase(xi: f64, t: f64, params: &Params) -> f64 {
    let b = params.b;
    2.0 * params.big_b * t * xi.powi(3) / (b * (b * b + xi * xi))
}

fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    Ok(())
}

/// Fourier symbol of `T(t)`; the co-moving frame multiplies by
/// `e^{i(2B/b)tξ}`. `|symbol| = e^{-μtξ²}` in both frames.
pub fn symbol(xi: f64, t: f64, params: &Params, frame: Frame) -> Result<Complex64> {
    check_time(t)?;
    Ok(match frame {
        Frame::Lab => symbol_form(SymbolForm::Full, xi, t, params),
        Frame::Comoving => Complex64::from_polar(
            (-params.mu * t * xi * xi).exp(),
            comoving_phase(xi, t, params),
        ),
    })
}

/// Symbol at storage index `i` of `grid`, with the unpaired Nyquist mode
/// replaced by its (real) modulus so real fields stay real.
pub(crate) fn grid_symbol(grid: &Grid, i: usize, t: f64, params: &Params) -> Complex64 {
    let xi = grid.xi(i);
    if grid.is_nyquist(i) {
        return Complex64::new((-params.mu * t * xi * xi).exp(), 0.0);
    }
    symbol(xi, t, params, grid.frame()).expect("t checked by caller")
}

/// `T(t) * f`, evaluated spectrally in the frame of `f`'s grid.
pub fn apply_semigroup(f: &Field, t: f64, params: &Params) -> Result<Field> {
    check_time(t)?;
    let grid = *f.grid();
    let mut s = transform(f);
    s.multiply(|_, i| grid_symbol(&grid, i, t, params));
    inverse_transform(&s)
}

/// Physicists' Hermite polynomial `H_l(z)`.
fn hermite(l: u32, z: f64) -> f64 {
    match l {
        0 => 1.0,
        1 => 2.0 * z,
        2 => 4.0 * z * z - 2.0,
        3 => 8.0 * z.powi(3) - 12.0 * z,
        _ => {
            let (mut h0, mut h1) = (4.0 * z * z - 2.0, 8.0 * z.powi(3) - 12.0 * z);
            for k in 3..l {
                let h2 = 2.0 * z * h1 - 2.0 * k as f64 * h0;
                h0 = h1;
                h1 = h2;
            }
            h1
        }
    }
}

/// `∂ₓ^l G(x,t)` for the heat kernel `G(x,t) = (4πμt)^{-1/2} e^{-x²/(4μt)}`.
pub fn gauss_deriv(x: f64, t: f64, mu: f64, l: u32) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("heat kernel needs t > 0, got {t}")));
    }
    let s = (4.0 * mu * t).sqrt();
    let z = x / s;
    let g = (-z * z).exp() / (PI * s * s).sqrt();
    Ok((-1.0 / s).powi(l as i32) * hermite(l, z) * g)
}

/// `∂ₓ^l G₀(x,t) = ∂ₓ^l G(x - (2B/b)t, t)` in lab coordinates.
pub fn g0_deriv(x: f64, t: f64, params: &Params, l: u32) -> Result<f64> {
    gauss_deriv(x - params.drift() * t, t, params.mu, l)
}

/// `∂_t^k ∂ₓ^l G₀(x,t)` for `k ∈ {0,1}`, using `∂_t G₀ = μ∂ₓ²G₀ - (2B/b)∂ₓG₀`.
pub fn g0_time_deriv(x: f64, t: f64, params: &Params, k: u32, l: u32) -> Result<f64> {
    match k {
        0 => g0_deriv(x, t, params, l),
        1 => Ok(params.mu * g0_deriv(x, t, params, l + 2)?
            - params.drift() * g0_deriv(x, t, params, l + 1)?),
        _ => Err(Error::Domain(format!(
            "time derivative order {k} unsupported"
        ))),
    }
}

/// `∂ₓ^l G₀(·,t)` sampled on `grid` (frame-aware).
pub fn sample_g0(grid: &Grid, t: f64, params: &Params, l: u32) -> Result<Field> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("heat kernel needs t > 0, got {t}")));
    }
    let values = (0..grid.len())
        .map(|j| gauss_deriv(grid.centered_x(j, t, params), t, params.mu, l))
        .collect::<Result<Vec<_>>>()?;
    Field::new(*grid, values)
}

/// Checks that `grid` resolves and contains a kernel of age `t`.
pub fn check_kernel_resolution(grid: &Grid, t: f64, params: &Params) -> Result<()> {
    let resolved = params.mu * t * grid.xi_max().powi(2);
    if !(resolved > RESOLUTION_EXPONENT) {
        return Err(Error::Resolution(format!(
            "mu*t*xi_max^2 = {resolved:.3} <= {RESOLUTION_EXPONENT} at t = {t}; refine the grid"
        )));
    }
    // distance from the kernel centre to the nearer box edge
    let centre = match grid.frame() {
        Frame::Lab => params.drift() * t,
        Frame::Comoving => 0.0,
    };
    let l = grid.half_length();
    let reach = (l - centre.abs()).max(0.0);
    // e^{-d²/(4μt)} below 1e-10 needs d² > 4μt·ln(1e10)
    if reach * reach <= 4.0 * params.mu * t * 1e10_f64.ln() {
        return Err(Error::Resolution(format!(
            "box half-length {l} too small for kernel spread at t = {t}"
        )));
    }
    Ok(())
}

/// Which asymptotic expansion of `T` a gap measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapOrder {
    /// `T - G₀`
    First,
    /// `T - G₀ + (2B/b³) t ∂ₓ³G₀`
    Second,
}

impl GapOrder {
    pub fn as_u8(self) -> u8 {
        match self {
            GapOrder::First => 1,
            GapOrder::Second => 2,
        }
    }

    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            1 => Ok(GapOrder::First),
            2 => Ok(GapOrder::Second),
            _ => Err(Error::Config(format!("gap order must be 1 or 2, got {v}"))),
        }
    }

    /// Predicted decay exponent (negative) of `‖∂ₓ^l(gap)‖_q`.
    pub fn predicted_slope(self, q: f64, l: u32) -> f64 {
        let base = -0.5 * (1.0 - 1.0 / q) - 0.5 * l as f64;
        match self {
            GapOrder::First => base - 0.5,
            GapOrder::Second => base - 1.0,
        }
    }
}

/// `sin φ - φ` without cancellation for small `φ`.
fn sin_minus_id(phi: f64) -> f64 {
    if phi.abs() < 0.1 {
        let p2 = phi * phi;
        -phi * p2 / 6.0 * (1.0 - p2 / 20.0 * (1.0 - p2 / 42.0 * (1.0 - p2 / 72.0)))
    } else {
        phi.sin() - phi
    }
}

/// Spectrum of `∂ₓ^l` of the kernel gap at time `t`.
fn gap_spectrum(t: f64, l: u32, order: GapOrder, params: &Params, grid: &Grid) -> Spectrum {
    let alpha = params.drift();
    let coeffs = (0..grid.len())
        .map(|i| {
            if grid.is_nyquist(i) {
                return Complex64::new(0.0, 0.0);
            }
            let xi = grid.xi(i);
            let phi = comoving_phase(xi, t, params);
            let half = (0.5 * phi).sin();
            let re = -2.0 * half * half;
            let im = match order {
                GapOrder::First => phi.sin(),
                GapOrder::Second => {
                    let b = params.b;
                    // φ - (2B/b³)tξ³ = -2Btξ⁵/(b³(b²+ξ²))
                    let tail =
                        -2.0 * params.big_b * t * xi.powi(5) / (b.powi(3) * (b * b + xi * xi));
                    sin_minus_id(phi) + tail
                }
            };
            let mut c =
                Complex64::new(re, im) * (-params.mu * t * xi * xi).exp() / (2.0 * PI).sqrt();
            if grid.frame() == Frame::Lab {
                c *= Complex64::from_polar(1.0, -alpha * t * xi);
            }
            c * Complex64::new(0.0, xi).powu(l)
        })
        .collect();
    Spectrum::new(*grid, coeffs).expect("length matches grid")
}

/// The kernel gap `∂ₓ^l(T - G₀ [+ (2B/b³)t∂ₓ³G₀])(·,t)` as a grid field.
pub fn kernel_gap_field(
    t: f64,
    l: u32,
    order: GapOrder,
    params: &Params,
    grid: &Grid,
) -> Result<Field> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("kernel gap needs t > 0, got {t}")));
    }
    check_kernel_resolution(grid, t, params)?;
    inverse_transform(&gap_spectrum(t, l, order, params, grid))
}

/// `‖∂ₓ^l(T - G₀ [+ (2B/b³)t∂ₓ³G₀])(·,t)‖_q`.
pub fn kernel_gap(
    t: f64,
    l: u32,
    q: f64,
    order: GapOrder,
    params: &Params,
    grid: &Grid,
) -> Result<f64> {
    lq_norm(&kernel_gap_field(t, l, order, params, grid)?, q)
}

/// `∂ₓ^l T(·,t)` synthesized from its symbol.
pub fn synthesize_t(t: f64, l: u32, params: &Params, grid: &Grid) -> Result<Field> {
    check_time(t)?;
    let coeffs = (0..grid.len())
        .map(|i| {
            if l % 2 == 1 && grid.is_nyquist(i) {
                return Complex64::new(0.0, 0.0);
            }
            grid_symbol(grid, i, t, params) / (2.0 * PI).sqrt()
                * Complex64::new(0.0, grid.xi(i)).powu(l)
        })
        .collect();
    inverse_transform(&Spectrum::new(*grid, coeffs)?)
}

/// Formats an `L^q` exponent the way the CSV and report files do.
pub fn format_q(q: f64) -> String {
    if q.is_infinite() {
        "inf".to_string()
    } else {
        format!("{q}")
    }
}

/// Parses `"inf"`/`"infinity"`/`"∞"` or a number `>= 1`.
pub fn parse_q(s: &str) -> Result<f64> {
    let s = s.trim();
    let q = match s {
        "inf" | "infinity" | "Inf" | "∞" => f64::INFINITY,
        _ => s
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("invalid q '{s}'")))?,
    };
    if q.is_nan() || q < 1.0 {
        return Err(Error::Config(format!("q must be >= 1, got '{s}'")));
    }
    Ok(q)
}

/// One row of the kernel-gap CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelGapRow {
    pub t: f64,
    pub l: u32,
    pub q: f64,
    pub order: GapOrder,
    pub gap: f64,
    /// `gap · t^{-predicted slope}`; bounded when the predicted rate holds.
    pub scaled_gap: f64,
}

impl KernelGapRow {
    pub const CSV_HEADER: &'static str = "t,l,q,order,gap,scaled_gap";
}

impl fmt::Display for KernelGapRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:e},{},{},{},{:e},{:e}",
            self.t,
            self.l,
            format_q(self.q),
            self.order.as_u8(),
            self.gap,
            self.scaled_gap
        )
    }
}

/// Kernel gaps over a list of times, evaluated in parallel.
pub fn kernel_gap_table(
    times: &[f64],
    l: u32,
    q: f64,
    order: GapOrder,
    params: &Params,
    grid: &Grid,
) -> Result<Vec<KernelGapRow>> {
    let slope = order.predicted_slope(q, l);
    times
        .par_iter()
        .map(|&t| {
            let gap = kernel_gap(t, l, q, order, params, grid)?;
            Ok(KernelGapRow {
                t,
                l,
                q,
                order,
                gap,
                scaled_gap: gap * t.powf(-slope),
            })
        })
        .collect()
}
