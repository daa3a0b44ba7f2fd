//! Asymptotic profiles: the self-similar profile `w_p`, its scaled form
//! `W_p`, the regime-dependent second-order profiles, and the Duhamel
//! self-similarity check.
//!
//! `w_p` is evaluated through the Gaussian-power reduction
//! `G^p(·,s) = (4πμs)^{-(p-1)/2} p^{-1/2} G(·, s/p)`, which collapses
//! `G(1-s) * G^p(s)` into the single Gaussian `G(·, 1 - s + s/p)`. The
//! reduction is validated against the definitional nested quadrature in
//! [`oracle`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Field, Frame, Grid, Params, Spectrum};
use crate::kernel::{g0_deriv, gauss_deriv};
use crate::norms::lq_norm;
use crate::quad::{Adaptive, GaussLegendre};
use crate::spectral::{inverse_transform, transform};

/// Absolute tolerance of one profile evaluation.
pub const PROFILE_ABS_TOL: f64 = 1e-10;

/// The three nonlinearity regimes of the asymptotic expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `2 < p < 3`
    Subcritical,
    /// `p = 3`
    Critical,
    /// `p > 3`
    Supercritical,
}

impl Regime {
    pub fn of(p: f64) -> Result<Regime> {
        if !(p > 2.0) || !p.is_finite() {
            return Err(Error::Config(format!("no regime for p = {p}; need p > 2")));
        }
        Ok(if p < 3.0 {
            Regime::Subcritical
        } else if p == 3.0 {
            Regime::Critical
        } else {
            Regime::Supercritical
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::Subcritical => "subcritical",
            Regime::Critical => "critical",
            Regime::Supercritical => "supercritical",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "subcritical" => Ok(Regime::Subcritical),
            "critical" => Ok(Regime::Critical),
            "supercritical" => Ok(Regime::Supercritical),
            other => Err(Error::Config(format!("unknown regime '{other}'"))),
        }
    }
}

/// Everything needed to evaluate the second-order profile of a solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSpec {
    pub params: Params,
    /// `M = ∫u₀`
    pub mass: f64,
    /// `m = ∫x u₀`
    pub first_moment: f64,
    /// `ℳ = ∫₀^∞∫|u|^{p-1}u`, required in the supercritical regime.
    pub nonlinear_mass: Option<f64>,
    pub regime: Regime,
}

impl ProfileSpec {
    pub fn new(
        params: Params,
        mass: f64,
        first_moment: f64,
        nonlinear_mass: Option<f64>,
    ) -> Result<Self> {
        params.validate()?;
        let regime = Regime::of(params.p)?;
        if regime == Regime::Supercritical && !nonlinear_mass.is_some_and(f64::is_finite) {
            return Err(Error::Config(
                "supercritical profile needs a finite nonlinear mass".into(),
            ));
        }
        if !mass.is_finite() || !first_moment.is_finite() {
            return Err(Error::Config("moments must be finite".into()));
        }
        Ok(ProfileSpec {
            params,
            mass,
            first_moment,
            nonlinear_mass,
            regime,
        })
    }

    /// `|M|^{p-1} M`
    pub fn signed_power(&self) -> f64 {
        self.mass.abs().powf(self.params.p - 1.0) * self.mass
    }

    /// `M³/(4√3πμ)`, the critical log-correction coefficient.
    pub fn critical_coeff(&self) -> f64 {
        self.mass.powi(3) / (4.0 * 3f64.sqrt() * PI * self.params.mu)
    }
}

/// `∫ G^p(η, s) dη = (4πμs)^{-(p-1)/2} p^{-1/2}`.
pub fn gaussian_power_mass(p: f64, s: f64, mu: f64) -> f64 {
    (4.0 * PI * mu * s).powf(-(p - 1.0) / 2.0) / p.sqrt()
}

/// Which derivative of `∫₀¹ (G(1-s) * G^p(s)) ds` to evaluate.
fn reduced_integrand(x: f64, s: f64, p: f64, mu: f64, deriv: u32) -> f64 {
    gauss_deriv(x, 1.0 - s + s / p, mu, deriv).expect("positive time")
}

/// `∂ₓ^deriv ∫_{s_min}^1 (G(1-s) * G^p(s))(x) ds` by the reduced 1D integral.
fn reduced_profile(x: f64, params: &Params, deriv: u32, s_min: f64) -> Result<f64> {
    let p = params.p;
    let mu = params.mu;
    let quad = Adaptive::new(PROFILE_ABS_TOL, 1e-12);
    let prefactor = (4.0 * PI * mu).powf(-(p - 1.0) / 2.0) / p.sqrt();
    if p < 3.0 && s_min == 0.0 {
        // s = σ^k with k = 2/(3-p) makes s^{-(p-1)/2} ds = k dσ
        let k = 2.0 / (3.0 - p);
        let r = quad.integrate(0.0, 1.0, |sigma| {
            reduced_integrand(x, sigma.powf(k), p, mu, deriv)
        })?;
        return Ok(prefactor * k * r.value);
    }
    if !(s_min > 0.0 && s_min < 1.0) {
        return Err(Error::Domain(format!(
            "lower s cutoff must lie in (0, 1) for p >= 3, got {s_min}"
        )));
    }
    let split = 0.5_f64.max(s_min);
    // log substitution on the singular end: s^{-(p-1)/2} ds = s^{(3-p)/2} dv
    let near = if s_min < split {
        quad.integrate(s_min.ln(), split.ln(), |v| {
            let s = v.exp();
            s.powf((3.0 - p) / 2.0) * reduced_integrand(x, s, p, mu, deriv)
        })?
        .value
    } else {
        0.0
    };
    let far = quad
        .integrate(split, 1.0, |s| {
            s.powf(-(p - 1.0) / 2.0) * reduced_integrand(x, s, p, mu, deriv)
        })?
        .value;
    Ok(prefactor * (near + far))
}

/// Self-similar profile `w_p(x) = d/dx ∫₀¹ (G(1-s) * G^p(s))(x) ds`.
///
/// The `s → 0` endpoint behaves like `s^{-(p-1)/2}`, so the integral exists
/// only for `p < 3`; for `p >= 3` only the trivial value `w_p(0) = 0`
/// exists and any other point yields [`Error::Divergence`].
pub fn w_p(x: f64, params: &Params) -> Result<f64> {
    if params.p >= 3.0 {
        if x == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::Divergence(format!(
            "w_p diverges for p = {} >= 3 (s^{{-(p-1)/2}} is not integrable at s = 0)",
            params.p
        )));
    }
    reduced_profile(x, params, 1, 0.0)
}

/// `w_p` with the `s`-integral cut to `[s_min, 1]`; finite for every `p > 2`.
pub fn w_p_truncated(x: f64, params: &Params, s_min: f64) -> Result<f64> {
    reduced_profile(x, params, 1, s_min)
}

/// `V_p(x) = ∫₀¹ (G(1-s) * G^p(s))(x) ds`, the antiderivative of `w_p`
/// (subcritical only).
pub fn v_p(x: f64, params: &Params) -> Result<f64> {
    if params.p >= 3.0 {
        return Err(Error::Divergence(format!(
            "V_p diverges for p = {} >= 3",
            params.p
        )));
    }
    reduced_profile(x, params, 0, 0.0)
}

/// `W_p(x,t) = t^{-(p-1)/2} w_p((x - (2B/b)t)/√t)` at lab position `x`.
pub fn big_w_p(x: f64, t: f64, spec: &ProfileSpec) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("W_p needs t > 0, got {t}")));
    }
    let p = spec.params.p;
    let y = (x - spec.params.drift() * t) / t.sqrt();
    Ok(t.powf(-(p - 1.0) / 2.0) * w_p(y, &spec.params)?)
}

/// The large-time asymptotic profile in the regime of `spec.params` at lab position `x`:
///
/// * subcritical: `MG₀ - |M|^{p-1}M W_p`
/// * critical: `MG₀ - (M³/(4√3πμ)) log t ∂ₓG₀`
/// * supercritical: `MG₀ - (m+ℳ)∂ₓG₀ - (2BM/b³) t ∂ₓ³G₀`
pub fn theorem_profile(x: f64, t: f64, spec: &ProfileSpec) -> Result<f64> {
    let params = &spec.params;
    if Regime::of(params.p)? != spec.regime {
        return Err(Error::Config(format!(
            "regime {} does not match p = {}",
            spec.regime, params.p
        )));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("profile needs t > 0, got {t}")));
    }
    let lead = spec.mass * g0_deriv(x, t, params, 0)?;
    let correction = match spec.regime {
        Regime::Subcritical => {
            if spec.mass == 0.0 {
                0.0
            } else {
                spec.signed_power() * big_w_p(x, t, spec)?
            }
        }
        Regime::Critical => {
            if !(t > 1.0) {
                return Err(Error::Domain(format!(
                    "critical profile needs t > 1 (log t > 0), got {t}"
                )));
            }
            spec.critical_coeff() * t.ln() * g0_deriv(x, t, params, 1)?
        }
        Regime::Supercritical => {
            let calm = spec.nonlinear_mass.ok_or_else(|| {
                Error::Config("supercritical profile needs the nonlinear mass".into())
            })?;
            (spec.first_moment + calm) * g0_deriv(x, t, params, 1)?
                + params.cubic_coeff() * spec.mass * t * g0_deriv(x, t, params, 3)?
        }
    };
    Ok(lead - correction)
}

/// Lab position of every node of `grid` at time `t`.
fn lab_positions(grid: &Grid, t: f64, params: &Params) -> Vec<f64> {
    (0..grid.len()).map(|j| grid.lab_x(j, t, params)).collect()
}

/// [`theorem_profile`] sampled on `grid` at time `t` (parallel over nodes).
pub fn theorem_profile_field(grid: &Grid, t: f64, spec: &ProfileSpec) -> Result<Field> {
    let values = lab_positions(grid, t, &spec.params)
        .par_iter()
        .map(|&x| theorem_profile(x, t, spec))
        .collect::<Result<Vec<_>>>()?;
    Field::new(*grid, values)
}

/// `W_p(·,t)` sampled on `grid`.
pub fn big_w_p_field(grid: &Grid, t: f64, spec: &ProfileSpec) -> Result<Field> {
    let values = lab_positions(grid, t, &spec.params)
        .par_iter()
        .map(|&x| big_w_p(x, t, spec))
        .collect::<Result<Vec<_>>>()?;
    Field::new(*grid, values)
}

/// `w_p` sampled at the nodes of `grid` (grid coordinates taken as the
/// similarity variable).
pub fn w_p_field(grid: &Grid, params: &Params) -> Result<Field> {
    let xs: Vec<f64> = grid.nodes().collect();
    let values = xs
        .par_iter()
        .map(|&x| w_p(x, params))
        .collect::<Result<Vec<_>>>()?;
    Field::new(*grid, values)
}

/// `‖w_p‖_q` on the given similarity-variable grid.
pub fn w_p_norm(params: &Params, q: f64, grid: &Grid) -> Result<f64> {
    lq_norm(&w_p_field(grid, params)?, q)
}

/// Outcome of [`duhamel_selfsim_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimCheck {
    pub t: f64,
    /// `‖numeric - |M|^{p-1}M W_p(·,t)‖₂`
    pub distance: f64,
    /// `‖|M|^{p-1}M W_p(·,t)‖₂`
    pub reference_norm: f64,
    /// `distance / reference_norm` (0 when both vanish)
    pub relative: f64,
    /// Set when the `τ → 0` endpoint needed the moment-expansion
    /// sub-quadrature.
    pub warning: Option<String>,
}

/// Quadrature settings for the τ-integral of the Duhamel check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuhamelQuadrature {
    pub panels: usize,
    pub nodes_per_panel: usize,
}

impl Default for DuhamelQuadrature {
    fn default() -> Self {
        DuhamelQuadrature {
            panels: 24,
            nodes_per_panel: 12,
        }
    }
}

/// Spectral evaluation of `∫₀^t ∂ₓ^deriv G(t-τ) * (|M G(τ)|^{p-1} M G(τ)) dτ`
/// in drift-centred coordinates on `grid` (drift is a pure translation and
/// cancels between the two factors).
pub fn duhamel_selfsim_spectral(
    t: f64,
    spec: &ProfileSpec,
    grid: &Grid,
    deriv: u32,
    quad: DuhamelQuadrature,
) -> Result<(Field, Option<String>)> {
    let params = &spec.params;
    let p = params.p;
    let mu = params.mu;
    if !(t > 0.0) {
        return Err(Error::Domain(format!("Duhamel check needs t > 0, got {t}")));
    }
    if p >= 3.0 {
        return Err(Error::Divergence(format!(
            "the tau-integral of |G|^p diverges at tau = 0 for p = {p} >= 3"
        )));
    }
    let grid = grid.with_frame(Frame::Comoving);
    let n = grid.len();
    let amp = spec.signed_power();
    if amp == 0.0 {
        return Ok((Field::zeros(grid), None));
    }
    let dx = grid.dx();
    // G^p(·,τ) has variance 2μτ/p; resolve it with at least four nodes per σ.
    let tau_min = (p * (4.0 * dx).powi(2) / (2.0 * mu)).min(0.5 * t);
    let kernel = |xi: f64, lag: f64| -> Complex64 {
        Complex64::new(0.0, xi).powu(deriv) * (-mu * lag * xi * xi).exp()
    };

    let mut acc = vec![Complex64::new(0.0, 0.0); n];

    // τ ∈ [τ_min, t]: τ = t σ^k, k = 2/(3-p), smooth in σ.
    let k = 2.0 / (3.0 - p);
    let sigma_min = (tau_min / t).powf(1.0 / k);
    let rule = GaussLegendre::new(quad.nodes_per_panel);
    let width = (1.0 - sigma_min) / quad.panels as f64;
    let nodes: Vec<(f64, f64)> = (0..quad.panels)
        .flat_map(|i| {
            let a = sigma_min + i as f64 * width;
            rule.mapped(a, a + width).collect::<Vec<_>>()
        })
        .collect();
    let contributions: Vec<Vec<Complex64>> = nodes
        .par_iter()
        .map(|&(sigma, w)| {
            let tau = t * sigma.powf(k);
            let jac = t * k * sigma.powf(k - 1.0);
            let f = grid.sample(|x| {
                let g = gauss_deriv(x, tau, mu, 0).expect("tau > 0");
                g.powf(p)
            });
            let s = transform(&f);
            s.coeffs()
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if deriv % 2 == 1 && grid.is_nyquist(i) {
                        Complex64::new(0.0, 0.0)
                    } else {
                        c * kernel(grid.xi(i), t - tau) * (w * jac)
                    }
                })
                .collect()
        })
        .collect();
    for c in contributions {
        for (a, v) in acc.iter_mut().zip(c) {
            *a += v;
        }
    }

    // τ ∈ [0, τ_min]: G^p(·,τ) is narrower than the grid. Its transform is
    // replaced by the even-moment expansion m₀ - ξ²m₂/2 + ξ⁴m₄/24, with
    // m_j(τ) = τ^{(j+1-p)/2} m_j(1) by self-similarity and m_j(1) from the
    // resolved profile at τ = 1.
    let unit = Grid::new(40.0, 8192, Frame::Comoving)?;
    let g1p = unit.sample(|x| gauss_deriv(x, 1.0, mu, 0).unwrap().powf(p));
    let m = |j: i32| -> f64 {
        g1p.values()
            .iter()
            .enumerate()
            .map(|(idx, v)| unit.x(idx).powi(j) * v)
            .sum::<f64>()
            * unit.dx()
    };
    let (m0, m2, m4) = (m(0), m(2), m(4));
    let small = GaussLegendre::new(24);
    let sig_hi = (tau_min / t).powf(1.0 / k);
    for (i, a) in acc.iter_mut().enumerate() {
        if deriv % 2 == 1 && grid.is_nyquist(i) {
            continue;
        }
        let xi = grid.xi(i);
        let v = small.integrate(0.0, sig_hi, |sigma| {
            let tau = t * sigma.powf(k);
            let jac = t * k * sigma.powf(k - 1.0);
            // τ^{(1-p)/2}·jac is bounded in σ
            let base = tau.powf((1.0 - p) / 2.0) * jac;
            let series = m0 - xi * xi * m2 * tau / 2.0 + xi.powi(4) * m4 * tau * tau / 24.0;
            (-mu * (t - tau) * xi * xi).exp() * base * series
        });
        *a += Complex64::new(0.0, xi).powu(deriv) * v / (2.0 * PI).sqrt();
    }
    let warning = Some(format!(
        "tau in [0, {tau_min:.3e}] handled by moment-expansion sub-quadrature"
    ));

    for a in &mut acc {
        *a *= amp;
    }
    let field = inverse_transform(&Spectrum::new(grid, acc)?)?;
    Ok((field, warning))
}

/// Compares the spectral Duhamel integral against `|M|^{p-1}M W_p(·,t)`.
pub fn duhamel_selfsim_check(t: f64, spec: &ProfileSpec, grid: &Grid) -> Result<SelfSimCheck> {
    duhamel_selfsim_check_with(t, spec, grid, DuhamelQuadrature::default())
}

pub fn duhamel_selfsim_check_with(
    t: f64,
    spec: &ProfileSpec,
    grid: &Grid,
    quad: DuhamelQuadrature,
) -> Result<SelfSimCheck> {
    let (numeric, warning) = duhamel_selfsim_spectral(t, spec, grid, 1, quad)?;
    let grid = *numeric.grid();
    let amp = spec.signed_power();
    let p = spec.params.p;
    let scale = t.powf(-(p - 1.0) / 2.0);
    let xs: Vec<f64> = grid.nodes().collect();
    let reference = if amp == 0.0 {
        Field::zeros(grid)
    } else {
        let values = xs
            .par_iter()
            .map(|&y| Ok(amp * scale * w_p(y / t.sqrt(), &spec.params)?))
            .collect::<Result<Vec<_>>>()?;
        Field::new(grid, values)?
    };
    let distance = lq_norm(&numeric.sub(&reference)?, 2.0)?;
    let reference_norm = lq_norm(&reference, 2.0)?;
    let relative = if reference_norm == 0.0 {
        if distance == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        distance / reference_norm
    };
    Ok(SelfSimCheck {
        t,
        distance,
        reference_norm,
        relative,
        warning: if amp == 0.0 { None } else { warning },
    })
}

/// Definitional evaluation of `w_p` by nested quadrature of
/// `d/dx ∫₀¹∫ G(x-y, 1-s) G(y, s)^p dy ds`, with no Gaussian-power
/// reduction. Independent of [`w_p`]; used to validate it.
pub mod oracle {
    use super::*;

    fn inner(x: f64, s: f64, params: &Params) -> Result<f64> {
        let p = params.p;
        let mu = params.mu;
        let quad = Adaptive::new(1e-15, 1e-12);
        let g = |y: f64, t: f64| gauss_deriv(y, t, mu, 0).expect("positive time");
        let dg = |y: f64, t: f64| gauss_deriv(y, t, mu, 1).expect("positive time");
        if s <= 0.5 {
            // y = √s v concentrates on the narrow factor G(·,s)^p
            let reach = (4.0 * mu * 45.0 / p).sqrt();
            let root = s.sqrt();
            Ok(quad
                .integrate(-reach, reach, |v| {
                    dg(x - root * v, 1.0 - s) * g(root * v, s).powf(p) * root
                })?
                .value)
        } else {
            // y = x - √(1-s) v, with the derivative moved onto G(·,s)^p
            let reach = (4.0 * mu * 45.0).sqrt();
            let root = (1.0 - s).sqrt();
            Ok(quad
                .integrate(-reach, reach, |v| {
                    let y = x - root * v;
                    let dgp = p * g(y, s).powf(p - 1.0) * dg(y, s);
                    g(root * v, 1.0 - s) * root * dgp
                })?
                .value)
        }
    }

    /// `∫_{s_min}^1` of the definitional integrand; `s_min = 0` is allowed
    /// only for `p < 3`.
    pub fn w_p_definitional(x: f64, params: &Params, s_min: f64) -> Result<f64> {
        let p = params.p;
        let quad = Adaptive::new(1e-11, 1e-11);
        let upper = if s_min == 0.0 {
            if p >= 3.0 {
                return Err(Error::Divergence(format!(
                    "definitional w_p integral diverges for p = {p}"
                )));
            }
            // s = σ^k regularises s^{-(p-1)/2}
            let k = 2.0 / (3.0 - p);
            quad.integrate(0.0, 0.5f64.powf(1.0 / k), |sigma| {
                if sigma == 0.0 {
                    return 0.0;
                }
                let s = sigma.powf(k);
                inner(x, s, params).unwrap_or(f64::NAN) * k * sigma.powf(k - 1.0)
            })?
            .value
        } else {
            quad.integrate(s_min.ln(), 0.5f64.ln().max(s_min.ln()), |v| {
                let s = v.exp();
                inner(x, s, params).unwrap_or(f64::NAN) * s
            })?
            .value
        };
        let lower = quad
            .integrate(0.5f64.max(s_min), 1.0, |s| {
                if s >= 1.0 {
                    // the s → 1 limit of the inner integral is ∂ₓ(G(·,1)^p)(x)
                    let g = gauss_deriv(x, 1.0, params.mu, 0).unwrap();
                    return p * g.powf(p - 1.0) * gauss_deriv(x, 1.0, params.mu, 1).unwrap();
                }
                inner(x, s, params).unwrap_or(f64::NAN)
            })?
            .value;
        Ok(upper + lower)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: f64) -> Params {
        Params::new(p, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn regimes() {
        assert_eq!(Regime::of(2.5).unwrap(), Regime::Subcritical);
        assert_eq!(Regime::of(3.0).unwrap(), Regime::Critical);
        assert_eq!(Regime::of(4.0).unwrap(), Regime::Supercritical);
        assert!(Regime::of(2.0).is_err());
    }

    #[test]
    fn gaussian_cube_mass() {
        for tau in [0.5, 1.0, 2.0] {
            let exact = 1.0 / (tau * 4.0 * 3f64.sqrt() * PI);
            let v = gaussian_power_mass(3.0, tau, 1.0);
            assert!(((v - exact) / exact).abs() < 1e-14);
        }
    }

    #[test]
    fn w_p_is_odd_and_vanishes_at_origin() {
        let p = params(2.5);
        assert_eq!(w_p(0.0, &p).unwrap(), 0.0);
        for x in [0.3, 1.0, 2.7] {
            let a = w_p(x, &p).unwrap();
            let b = w_p(-x, &p).unwrap();
            assert!((a + b).abs() < 1e-14, "{a} {b}");
            assert!(a != 0.0);
        }
        for pp in [3.0, 4.0] {
            assert_eq!(w_p(0.0, &params(pp)).unwrap(), 0.0);
            assert!(matches!(w_p(1.0, &params(pp)), Err(Error::Divergence(_))));
        }
    }

    #[test]
    fn w_p_integrates_to_zero() {
        let p = params(2.5);
        let grid = Grid::new(30.0, 1024, Frame::Comoving).unwrap();
        let w = w_p_field(&grid, &p).unwrap();
        let total: f64 = w.values().iter().sum::<f64>() * grid.dx();
        assert!(total.abs() < 1e-12, "{total}");
    }

    #[test]
    fn w_p_matches_derivative_of_v_p() {
        let p = params(2.5);
        let h = 1e-4;
        for x in [-1.3, 0.4, 2.0] {
            let fd = (v_p(x + h, &p).unwrap() - v_p(x - h, &p).unwrap()) / (2.0 * h);
            assert!((fd - w_p(x, &p).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn reduced_matches_definitional_at_one() {
        let p = params(2.5);
        let reduced = w_p(1.0, &p).unwrap();
        let direct = oracle::w_p_definitional(1.0, &p, 0.0).unwrap();
        assert!((reduced - direct).abs() < 1e-7, "{reduced} vs {direct}");
    }

    #[test]
    fn big_w_p_scaling() {
        let spec = ProfileSpec::new(params(2.5), 0.1, 0.0, None).unwrap();
        // t = 1 at the centre reproduces w_p
        let centre = spec.params.drift();
        assert_eq!(big_w_p(centre, 1.0, &spec).unwrap(), 0.0);
        for y in [-0.8, 0.5, 1.9] {
            let a = big_w_p(centre + y, 1.0, &spec).unwrap();
            assert!((a - w_p(y, &spec.params).unwrap()).abs() < 1e-15);
        }
        // exact self-similarity W_p(x, λt) λ^{(p-1)/2} = w_p((x-αλt)/√(λt))
        let lambda: f64 = 6.25;
        let x = 3.0;
        let lhs = big_w_p(x, lambda, &spec).unwrap() * lambda.powf(0.75);
        let rhs = w_p((x - centre * lambda) / lambda.sqrt(), &spec.params).unwrap();
        assert!((lhs - rhs).abs() < 1e-15);
    }

    #[test]
    fn zero_mass_profile_vanishes_everywhere() {
        for pp in [2.5, 3.0, 4.0] {
            let spec = ProfileSpec::new(params(pp), 0.0, 0.0, Some(0.0)).unwrap();
            for x in [-3.0, 0.0, 2.0, 7.5] {
                assert_eq!(theorem_profile(x, 5.0, &spec).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn supercritical_cancellation_leaves_heat_kernel() {
        let pr = Params::new(4.0, 1e-12, 1.0, 1.0).unwrap();
        let spec = ProfileSpec::new(pr, 0.3, 0.2, Some(-0.2)).unwrap();
        for x in [-2.0, 0.5, 3.0] {
            let v = theorem_profile(x, 4.0, &spec).unwrap();
            let g = 0.3 * g0_deriv(x, 4.0, &pr, 0).unwrap();
            assert!((v - g).abs() < 1e-12);
        }
    }

    #[test]
    fn critical_correction_peak() {
        let pr = params(3.0);
        let spec = ProfileSpec::new(pr, 1.0, 0.0, None).unwrap();
        let t = std::f64::consts::E;
        // ∂ₓG(·,t) peaks at |x - αt| = √(2μt) with value (2μt)^{-1/2} e^{-1/2}/√(4πμt)
        let peak_dg = (2.0 * t).powf(-0.5) * (-0.5f64).exp() / (4.0 * PI * t).sqrt();
        let expected = peak_dg / (4.0 * 3f64.sqrt() * PI);
        let x = pr.drift() * t - (2.0 * t).sqrt();
        let corr =
            spec.mass * g0_deriv(x, t, &pr, 0).unwrap() - theorem_profile(x, t, &spec).unwrap();
        assert!((corr.abs() - expected).abs() < 1e-15);
        assert!(theorem_profile(0.0, 1.0, &spec).is_err());
    }

    #[test]
    fn regime_mismatch_is_config_error() {
        let mut spec = ProfileSpec::new(params(2.5), 1.0, 0.0, None).unwrap();
        spec.regime = Regime::Critical;
        assert!(matches!(
            theorem_profile(0.0, 2.0, &spec),
            Err(Error::Config(_))
        ));
        assert!(ProfileSpec::new(params(4.0), 1.0, 0.0, None).is_err());
    }

    #[test]
    fn duhamel_zero_mass() {
        let spec = ProfileSpec::new(params(2.5), 0.0, 0.0, None).unwrap();
        let grid = Grid::new(30.0, 1024, Frame::Comoving).unwrap();
        let c = duhamel_selfsim_check(2.0, &spec, &grid).unwrap();
        assert_eq!(c.distance, 0.0);
        assert_eq!(c.relative, 0.0);
    }
}
