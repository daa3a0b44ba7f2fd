//! Time evolution of the full nonlinear problem.
//!
//! [`integrate`] is a pseudo-spectral ETDRK4 integrator: the linear part
//! (viscosity and nonlocal dispersion) is applied exactly through the kernel
//! symbol, the nonlinearity `-(|u|^{p-1}u)_x` is treated by fourth-order
//! exponential time differencing. [`picard_solve`] iterates the Duhamel
//! integral equation directly and serves as an independent cross-check.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Frame, Grid, Params};
use crate::norms::lq_norm_slice;
use crate::snapshot::Snapshot;
use crate::spectral::{forward_raw, inverse_raw, take_real};

/// Growth of `‖u‖_∞` between consecutive steps treated as an instability.
pub const GROWTH_LIMIT: f64 = 10.0;
/// Relative mass drift tolerated over a run.
pub const MASS_DRIFT_REL: f64 = 1e-8;
/// Absolute mass drift floor.
pub const MASS_DRIFT_ABS: f64 = 1e-12;
/// Spectral tail (relative to the peak coefficient) above which initial data
/// count as under-resolved.
pub const SPECTRAL_TAIL_TOL: f64 = 1e-12;
/// Points on the contour used to evaluate the ETDRK4 φ-functions.
const CONTOUR_POINTS: usize = 32;

/// Everything a solve needs besides the initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub params: Params,
    pub grid: Grid,
    pub t_end: f64,
    pub dt: f64,
    /// Fraction of the half-spectrum kept by the dealiasing mask.
    pub dealias: f64,
    /// Sorted times in `[0, t_end]` at which snapshots are stored.
    pub snapshot_times: Vec<f64>,
    /// Accumulate `∫₀^t∫|u|^{p-1}u dy dτ`.
    pub accumulate_calm: bool,
    /// Test hook: drop the nonlinear term.
    pub linear_only: bool,
}

impl SolveConfig {
    pub fn new(params: Params, grid: Grid, t_end: f64, dt: f64) -> Self {
        SolveConfig {
            params,
            grid,
            t_end,
            dt,
            dealias: 2.0 / 3.0,
            snapshot_times: vec![t_end],
            accumulate_calm: false,
            linear_only: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if !(self.dt > 0.0 && self.dt <= self.t_end) {
            return Err(Error::Config(format!(
                "dt must lie in (0, t_end], got {}",
                self.dt
            )));
        }
        if !(self.dealias > 0.5 && self.dealias <= 1.0) {
            return Err(Error::Config(format!(
                "dealias fraction must lie in (0.5, 1], got {}",
                self.dealias
            )));
        }
        if self
            .snapshot_times
            .iter()
            .any(|&t| !(0.0..=self.t_end).contains(&t))
        {
            return Err(Error::Config(
                "snapshot times must lie in [0, t_end]".into(),
            ));
        }
        if self.snapshot_times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "snapshot times must be strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostic {
    pub t: f64,
    pub mass: f64,
    pub l2: f64,
    pub linf: f64,
    pub calm_partial: f64,
}

impl Diagnostic {
    pub const CSV_HEADER: &'static str = "t,mass,l2,linf,calM_partial";

    pub fn to_csv(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e}",
            self.t, self.mass, self.l2, self.linf, self.calm_partial
        )
    }

    pub fn from_csv(line: &str) -> Result<Self> {
        let cols: Vec<&str> = line.trim().split(',').collect();
        if cols.len() != 5 {
            return Err(Error::Format(format!(
                "diagnostics row needs 5 columns, got {}",
                cols.len()
            )));
        }
        let mut v = [0.0; 5];
        for (slot, c) in v.iter_mut().zip(&cols) {
            *slot = c
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Format(format!("bad number '{c}' in diagnostics")))?;
        }
        Ok(Diagnostic {
            t: v[0],
            mass: v[1],
            l2: v[2],
            linf: v[3],
            calm_partial: v[4],
        })
    }
}

/// Time-ordered output of a solve.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: SolveConfig,
    pub snapshots: Vec<Snapshot>,
    /// `∫₀^{t_end}∫|u|^{p-1}u dy dτ` by the trapezoid rule.
    pub calm_partial: f64,
    /// Analytic tail `∫_{t_end}^∞ C τ^{-(p-1)/2} dτ` (only for `p > 3`).
    pub calm_tail: Option<f64>,
    pub diagnostics: Vec<Diagnostic>,
    /// `(τ, ∫|u|^{p-1}u dy)` at every step start.
    pub nonlinear_mass_history: Vec<(f64, f64)>,
}

impl Trajectory {
    /// `ℳ = calm_partial + tail`, when the tail exists.
    pub fn nonlinear_mass(&self) -> Option<f64> {
        self.calm_tail.map(|tail| self.calm_partial + tail)
    }

    pub fn snapshot_at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots
            .iter()
            .find(|s| (s.t - t).abs() <= 1e-12 * t.abs().max(1.0))
    }

    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }
}

/// `|u|^{p-1}u` evaluated as `sign(u)·|u|^p`, with `0 ↦ 0`.
pub fn signed_power(u: f64, p: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u.signum() * u.abs().powf(p)
    }
}

fn linear_operator(grid: &Grid, params: &Params) -> Vec<Complex64> {
    let Params { big_b, b, mu, .. } = *params;
    (0..grid.len())
        .map(|i| {
            let xi = grid.xi(i);
            let damping = -mu * xi * xi;
            if grid.is_nyquist(i) {
                return Complex64::new(damping, 0.0);
            }
            let disp = match grid.frame() {
                Frame::Lab => -2.0 * big_b * b * xi / (b * b + xi * xi),
                Frame::Comoving => 2.0 * big_b * xi.powi(3) / (b * (b * b + xi * xi)),
            };
            Complex64::new(damping, disp)
        })
        .collect()
}

/// `-iξ` on kept modes, 0 on masked ones (and on the Nyquist mode).
fn derivative_mask(grid: &Grid, dealias: f64) -> Vec<Complex64> {
    let cutoff = dealias * (grid.len() / 2) as f64;
    (0..grid.len())
        .map(|i| {
            if grid.is_nyquist(i) || (grid.mode(i).unsigned_abs() as f64) > cutoff {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -grid.xi(i))
            }
        })
        .collect()
}

/// Nonlinear right-hand side evaluated on spectra.
struct Nonlinearity {
    grid: Grid,
    p: f64,
    mask: Vec<Complex64>,
    enabled: bool,
    work: Vec<Complex64>,
    real: Vec<f64>,
    fwd: Vec<Complex64>,
}

/// Physical-space quantities seen while evaluating the nonlinearity.
#[derive(Debug, Clone, Copy)]
struct StateSummary {
    linf: f64,
    l2: f64,
    /// `∫|u|^{p-1}u dx`
    power_mass: f64,
}

impl Nonlinearity {
    fn new(grid: Grid, p: f64, dealias: f64, enabled: bool) -> Self {
        let n = grid.len();
        Nonlinearity {
            grid,
            p,
            mask: derivative_mask(&grid, dealias),
            enabled,
            work: vec![Complex64::new(0.0, 0.0); n],
            real: vec![0.0; n],
            fwd: Vec::with_capacity(n),
        }
    }

    /// Writes `N(v̂)` into `out` and summarises the physical state.
    fn eval(&mut self, v: &[Complex64], out: &mut [Complex64]) -> StateSummary {
        self.work.copy_from_slice(v);
        inverse_raw(&self.grid, &mut self.work);
        let dx = self.grid.dx();
        let mut linf = 0.0_f64;
        let mut power_mass = 0.0;
        for (r, c) in self.real.iter_mut().zip(&self.work) {
            let u = c.re;
            linf = linf.max(u.abs());
            let f = signed_power(u, self.p);
            power_mass += f;
            *r = f;
        }
        let l2 = lq_norm_slice(&self.work.iter().map(|c| c.re).collect::<Vec<_>>(), dx, 2.0)
            .unwrap_or(f64::NAN);
        if self.enabled {
            forward_raw(&self.grid, &self.real, &mut self.fwd);
            for ((o, f), m) in out.iter_mut().zip(&self.fwd).zip(&self.mask) {
                *o = f * m;
            }
        } else {
            out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        }
        StateSummary {
            linf,
            l2,
            power_mass: power_mass * dx,
        }
    }

    fn to_field(&mut self, v: &[Complex64]) -> Result<Field> {
        self.work.copy_from_slice(v);
        inverse_raw(&self.grid, &mut self.work);
        Field::new(self.grid, take_real(&self.work, "solver state")?)
    }
}

/// ETDRK4 coefficients for one step length.
struct EtdCoefficients {
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
}

impl EtdCoefficients {
    /// φ-function combinations by contour averaging, which avoids the
    /// cancellation of the closed forms near `Lh = 0`.
    fn new(lin: &[Complex64], h: f64) -> Self {
        let n = lin.len();
        let roots: Vec<Complex64> = (0..CONTOUR_POINTS)
            .map(|j| {
                Complex64::from_polar(1.0, 2.0 * PI * (j as f64 + 0.5) / CONTOUR_POINTS as f64)
            })
            .collect();
        let mut c = EtdCoefficients {
            e: Vec::with_capacity(n),
            e2: Vec::with_capacity(n),
            q: Vec::with_capacity(n),
            f1: Vec::with_capacity(n),
            f2: Vec::with_capacity(n),
            f3: Vec::with_capacity(n),
        };
        let m = CONTOUR_POINTS as f64;
        for &l in lin {
            let z = l * h;
            c.e.push(z.exp());
            c.e2.push((z / 2.0).exp());
            let (mut q, mut f1, mut f2, mut f3) = (
                Complex64::default(),
                Complex64::default(),
                Complex64::default(),
                Complex64::default(),
            );
            for r in &roots {
                let w = z + r;
                let ew = w.exp();
                let w3 = w * w * w;
                q += ((w / 2.0).exp() - 1.0) / w;
                f1 += (-4.0 - w + ew * (4.0 - 3.0 * w + w * w)) / w3;
                f2 += (2.0 + w + ew * (w - 2.0)) / w3;
                f3 += (-4.0 - 3.0 * w - w * w + ew * (4.0 - w)) / w3;
            }
            c.q.push(q * (h / m));
            c.f1.push(f1 * (h / m));
            c.f2.push(f2 * (h / m));
            c.f3.push(f3 * (h / m));
        }
        c
    }
}

/// Propagator state shared by all steps of one solve.
struct Stepper {
    lin: Vec<Complex64>,
    cache: HashMap<u64, EtdCoefficients>,
    nl: Nonlinearity,
    na: Vec<Complex64>,
    nb: Vec<Complex64>,
    nc: Vec<Complex64>,
    nv: Vec<Complex64>,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    c: Vec<Complex64>,
}

impl Stepper {
    fn new(config: &SolveConfig) -> Self {
        let grid = config.grid;
        let n = grid.len();
        let zero = vec![Complex64::new(0.0, 0.0); n];
        Stepper {
            lin: linear_operator(&grid, &config.params),
            cache: HashMap::new(),
            nl: Nonlinearity::new(grid, config.params.p, config.dealias, !config.linear_only),
            na: zero.clone(),
            nb: zero.clone(),
            nc: zero.clone(),
            nv: zero.clone(),
            a: zero.clone(),
            b: zero.clone(),
            c: zero,
        }
    }

    /// One ETDRK4 step of length `h`; returns the summary of the state at
    /// the start of the step.
    fn step(&mut self, v: &mut [Complex64], h: f64) -> StateSummary {
        let summary = self.nl.eval(v, &mut self.nv);
        let lin = &self.lin;
        let co = self
            .cache
            .entry(h.to_bits())
            .or_insert_with(|| EtdCoefficients::new(lin, h));
        let n = v.len();
        for k in 0..n {
            self.a[k] = co.e2[k] * v[k] + co.q[k] * self.nv[k];
        }
        self.nl.eval(&self.a, &mut self.na);
        for k in 0..n {
            self.b[k] = co.e2[k] * v[k] + co.q[k] * self.na[k];
        }
        self.nl.eval(&self.b, &mut self.nb);
        for k in 0..n {
            self.c[k] = co.e2[k] * self.a[k] + co.q[k] * (2.0 * self.nb[k] - self.nv[k]);
        }
        self.nl.eval(&self.c, &mut self.nc);
        for k in 0..n {
            v[k] = co.e[k] * v[k]
                + co.f1[k] * self.nv[k]
                + 2.0 * co.f2[k] * (self.na[k] + self.nb[k])
                + co.f3[k] * self.nc[k];
        }
        summary
    }
}

/// `-∂ₓ(sign(u)|u|^p)` computed pseudo-spectrally with the dealiasing mask.
pub fn nonlinear_term(u: &Field, params: &Params, dealias: f64) -> Result<Field> {
    let grid = *u.grid();
    let f: Vec<f64> = u
        .values()
        .iter()
        .map(|&v| signed_power(v, params.p))
        .collect();
    if let Some(j) = f.iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!(
            "nonlinearity overflows at node {j} (u = {})",
            u.values()[j]
        )));
    }
    let mut spec = Vec::new();
    forward_raw(&grid, &f, &mut spec);
    for (c, m) in spec.iter_mut().zip(derivative_mask(&grid, dealias)) {
        *c *= m;
    }
    inverse_raw(&grid, &mut spec);
    Field::new(grid, take_real(&spec, "nonlinear term")?)
}

/// Checks that `u0`'s spectrum has decayed beyond the dealiasing cutoff.
pub fn check_spectral_resolution(u0: &Field, dealias: f64) -> Result<()> {
    let grid = u0.grid();
    let mut coeffs = Vec::new();
    forward_raw(grid, u0.values(), &mut coeffs);
    let peak = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
    if peak == 0.0 {
        return Ok(());
    }
    let cutoff = dealias * (grid.len() / 2) as f64;
    let tail = coeffs
        .iter()
        .enumerate()
        .filter(|(i, _)| grid.mode(*i).unsigned_abs() as f64 > cutoff)
        .fold(0.0_f64, |m, (_, c)| m.max(c.norm()));
    if tail > SPECTRAL_TAIL_TOL * peak {
        return Err(Error::Resolution(format!(
            "initial spectrum tail {:.2e} of peak exceeds {SPECTRAL_TAIL_TOL:e}; refine the grid",
            tail / peak
        )));
    }
    Ok(())
}

/// Integrates from `u0` to `config.t_end` and stores the requested
/// snapshots.
pub fn integrate(u0: &Field, config: &SolveConfig) -> Result<Trajectory> {
    config.validate()?;
    if *u0.grid() != config.grid {
        return Err(Error::Config(
            "initial data grid differs from solve grid".into(),
        ));
    }
    check_spectral_resolution(u0, config.dealias)?;
    let grid = config.grid;
    let p = config.params.p;
    let mut v = Vec::new();
    forward_raw(&grid, u0.values(), &mut v);
    let mut stepper = Stepper::new(config);
    let mass0 = u0.values().iter().sum::<f64>() * grid.dx();
    let mass_of = |v: &[Complex64]| v[0].re * (2.0 * PI).sqrt();

    let mut snapshots = Vec::with_capacity(config.snapshot_times.len());
    let mut diagnostics = Vec::new();
    let mut history = Vec::new();
    let mut calm = 0.0;
    let mut prev_power: Option<f64> = None;
    let mut prev_linf: Option<f64> = None;
    let mut t = 0.0;

    let mut targets: Vec<f64> = config.snapshot_times.clone();
    if targets.last().copied() != Some(config.t_end) {
        targets.push(config.t_end);
    }
    let mut wanted = config.snapshot_times.iter().peekable();
    if wanted.peek() == Some(&&0.0) {
        snapshots.push(Snapshot::new(0.0, u0.clone()));
        wanted.next();
    }

    for &target in targets.iter().filter(|&&s| s > 0.0) {
        let span = target - t;
        let steps = ((span / config.dt) - 1e-9).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for _ in 0..steps {
            let mass_start = mass_of(&v);
            let s = stepper.step(&mut v, h);
            if !s.linf.is_finite() {
                return Err(Error::Stability {
                    t,
                    reason: "solution became non-finite".into(),
                    suggested_dt: h / 4.0,
                });
            }
            if let Some(prev) = prev_linf {
                if prev > 0.0 && s.linf > GROWTH_LIMIT * prev {
                    return Err(Error::Stability {
                        t,
                        reason: format!("sup norm grew {:.1}x in one step", s.linf / prev),
                        suggested_dt: h / 4.0,
                    });
                }
            }
            prev_linf = Some(s.linf);
            if let Some(prev) = prev_power {
                calm += 0.5 * h * (prev + s.power_mass);
            }
            prev_power = Some(s.power_mass);
            history.push((t, s.power_mass));
            diagnostics.push(Diagnostic {
                t,
                mass: mass_start,
                l2: s.l2,
                linf: s.linf,
                calm_partial: calm,
            });
            t += h;
        }
        t = target;
        if v.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Stability {
                t,
                reason: "solution became non-finite".into(),
                suggested_dt: h / 4.0,
            });
        }
        let mass = mass_of(&v);
        if (mass - mass0).abs() > MASS_DRIFT_REL * mass0.abs() + MASS_DRIFT_ABS {
            return Err(Error::Consistency(format!(
                "mass drifted from {mass0:e} to {mass:e} by t = {t}"
            )));
        }
        if wanted.peek().is_some_and(|&&w| w == target) {
            snapshots.push(Snapshot::new(t, stepper.nl.to_field(&v)?));
            wanted.next();
        }
    }

    // close the trapezoid sum at t_end
    let mut scratch = vec![Complex64::new(0.0, 0.0); grid.len()];
    let end = stepper.nl.eval(&v, &mut scratch);
    if !end.linf.is_finite() {
        return Err(Error::Stability {
            t,
            reason: "solution became non-finite".into(),
            suggested_dt: config.dt / 4.0,
        });
    }
    if let Some(prev) = prev_power {
        let last_h = history.last().map(|(tl, _)| t - tl).unwrap_or(0.0);
        calm += 0.5 * last_h * (prev + end.power_mass);
    }
    history.push((t, end.power_mass));
    diagnostics.push(Diagnostic {
        t,
        mass: mass_of(&v),
        l2: end.l2,
        linf: end.linf,
        calm_partial: calm,
    });

    let calm_tail = if config.accumulate_calm && p > 3.0 {
        Some(nonlinear_mass_tail(&history, p, config.t_end))
    } else {
        None
    };

    Ok(Trajectory {
        config: config.clone(),
        snapshots,
        calm_partial: if config.accumulate_calm { calm } else { 0.0 },
        calm_tail,
        diagnostics,
        nonlinear_mass_history: history,
    })
}

/// `∫_{t_end}^∞ C τ^{-(p-1)/2} dτ` with `C` fitted (in log space, exponent
/// fixed) to the samples of `∫|u|^{p-1}u` over the last decade.
pub fn nonlinear_mass_tail(history: &[(f64, f64)], p: f64, t_end: f64) -> f64 {
    let decay = (p - 1.0) / 2.0;
    let window: Vec<&(f64, f64)> = history
        .iter()
        .filter(|(tau, _)| *tau >= t_end / 10.0 && *tau > 0.0)
        .collect();
    if window.is_empty() || p <= 3.0 {
        return 0.0;
    }
    let sign = window[0].1.signum();
    if window.iter().any(|(_, v)| v.signum() != sign || *v == 0.0) {
        return 0.0;
    }
    let log_c = window
        .iter()
        .map(|(tau, v)| v.abs().ln() + decay * tau.ln())
        .sum::<f64>()
        / window.len() as f64;
    sign * log_c.exp() * t_end.powf(1.0 - decay) / (decay - 1.0)
}

/// Options of [`picard_solve_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    /// Uniform τ-steps on `[0, t]`.
    pub steps: usize,
    /// Relative `L²` change at which iteration stops.
    pub tol: f64,
    pub dealias: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions {
            steps: 200,
            tol: 1e-9,
            dealias: 2.0 / 3.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PicardResult {
    pub field: Field,
    pub iterations: usize,
    /// Successive change ratios `‖u^{n+1}-u^n‖ / ‖u^n-u^{n-1}‖`.
    pub contraction: Vec<f64>,
    /// The first iterate `N[T(·)u₀]` at the final time.
    pub first_iterate: Field,
}

/// Quadrature weights for `∫₀^{jh}` on `j+1` uniform nodes: composite
/// Simpson, with a 3/8 panel in front when `j` is odd.
fn uniform_weights(j: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; j + 1];
    match j {
        0 => {}
        1 => {
            w[0] = 0.5 * h;
            w[1] = 0.5 * h;
        }
        _ => {
            let start = if j % 2 == 1 {
                let c = 3.0 * h / 8.0;
                w[0] += c;
                w[1] += 3.0 * c;
                w[2] += 3.0 * c;
                w[3] += c;
                3
            } else {
                0
            };
            let mut i = start;
            while i + 2 <= j {
                w[i] += h / 3.0;
                w[i + 1] += 4.0 * h / 3.0;
                w[i + 2] += h / 3.0;
                i += 2;
            }
        }
    }
    w
}

/// Fixed point of the Duhamel map
/// `N[u](t) = T(t)u₀ - ∫₀^t ∂ₓT(t-τ)(|u|^{p-1}u)(τ) dτ`.
pub fn picard_solve(
    u0: &Field,
    t: f64,
    params: &Params,
    grid: &Grid,
    max_iter: usize,
) -> Result<PicardResult> {
    picard_solve_with(u0, t, params, grid, max_iter, PicardOptions::default())
}

pub fn picard_solve_with(
    u0: &Field,
    t: f64,
    params: &Params,
    grid: &Grid,
    max_iter: usize,
    opts: PicardOptions,
) -> Result<PicardResult> {
    params.validate()?;
    if *u0.grid() != *grid {
        return Err(Error::Config(
            "initial data grid differs from solve grid".into(),
        ));
    }
    if !(t > 0.0) || opts.steps == 0 || max_iter == 0 {
        return Err(Error::Config(
            "picard solve needs t > 0, at least one step and one iteration".into(),
        ));
    }
    let n = grid.len();
    let k = opts.steps;
    let h = t / k as f64;
    let lin = linear_operator(grid, params);
    // e^{L m h}, m = 0..=K
    let props: Vec<Vec<Complex64>> = (0..=k)
        .map(|m| lin.iter().map(|l| (l * (m as f64 * h)).exp()).collect())
        .collect();
    let mut u0_hat = Vec::new();
    forward_raw(grid, u0.values(), &mut u0_hat);
    let linear: Vec<Vec<Complex64>> = props
        .iter()
        .map(|e| e.iter().zip(&u0_hat).map(|(a, b)| a * b).collect())
        .collect();
    let weights: Vec<Vec<f64>> = (0..=k).map(|j| uniform_weights(j, h)).collect();
    let mut nl = Nonlinearity::new(*grid, params.p, opts.dealias, true);

    let mut current = linear.clone();
    let mut contraction = Vec::new();
    let mut prev_change: Option<f64> = None;
    let mut rising = 0;
    let mut first_iterate = None;
    let mut nhat = vec![vec![Complex64::new(0.0, 0.0); n]; k + 1];
    for iter in 1..=max_iter {
        for (j, slot) in nhat.iter_mut().enumerate() {
            let s = nl.eval(&current[j], slot);
            if !s.linf.is_finite() {
                return Err(Error::Divergence(format!(
                    "picard iterate became non-finite at iteration {iter}"
                )));
            }
        }
        let next: Vec<Vec<Complex64>> = (0..=k)
            .map(|j| {
                let mut acc = linear[j].clone();
                for (i, w) in weights[j].iter().enumerate() {
                    if *w == 0.0 {
                        continue;
                    }
                    let e = &props[j - i];
                    for ((a, ei), ni) in acc.iter_mut().zip(e).zip(&nhat[i]) {
                        *a += ei * ni * *w;
                    }
                }
                acc
            })
            .collect();
        // change measured over all τ-nodes, relative to the new iterate
        let mut diff = 0.0_f64;
        let mut size = 0.0_f64;
        for (a, b) in next.iter().zip(&current) {
            let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
            let s: f64 = a.iter().map(|x| x.norm_sqr()).sum();
            diff = diff.max(d.sqrt());
            size = size.max(s.sqrt());
        }
        current = next;
        if first_iterate.is_none() {
            first_iterate = Some(nl.to_field(&current[k])?);
        }
        let change = if size > 0.0 { diff / size } else { 0.0 };
        if let Some(prev) = prev_change {
            let ratio = if prev > 0.0 { change / prev } else { 0.0 };
            contraction.push(ratio);
            if ratio >= 1.0 {
                rising += 1;
                if rising >= 3 {
                    return Err(Error::Divergence(format!(
                        "picard map not contracting: ratio >= 1 for 3 iterations (last {ratio:.3})"
                    )));
                }
            } else {
                rising = 0;
            }
        }
        prev_change = Some(change);
        if change < opts.tol {
            return Ok(PicardResult {
                field: nl.to_field(&current[k])?,
                iterations: iter,
                contraction,
                first_iterate: first_iterate.expect("set on first iteration"),
            });
        }
    }
    Err(Error::Divergence(format!(
        "picard iteration did not converge in {max_iter} iterations"
    )))
}
