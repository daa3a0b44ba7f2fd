//! Constants, decay-rate regression and theorem-verification reports.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::{Field, Frame, Grid, Params};
use crate::kernel::{format_q, gauss_deriv, sample_g0};
use crate::norms::{lq_norm, moment};
use crate::profiles::{theorem_profile_field, w_p_norm, ProfileSpec, Regime};
use crate::solver::Trajectory;
use crate::spectral::{inverse_transform, transform};

/// Fewest samples a rate fit accepts.
pub const MIN_FIT_POINTS: usize = 8;
/// Default per-decade decrease required of limit-to-zero sequences.
pub const DEFAULT_DECADE_FRACTION: f64 = 0.5;
/// Default relative tolerance on the optimal-rate constants.
pub const DEFAULT_CONSTANT_TOL: f64 = 0.2;
/// Snapshots before this time count as transient.
pub const TRANSIENT_END: f64 = 10.0;
/// Largest log-log slope still read as "bounded".
pub const BOUNDED_SLOPE: f64 = 0.1;

/// `M`, `m` and (for `p > 3`) `ℳ` with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub mass: f64,
    pub first_moment: f64,
    pub nonlinear_mass: Option<NonlinearMass>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearMass {
    /// Trapezoid sum up to `t_end`.
    pub partial: f64,
    /// Fitted power-law tail beyond `t_end`.
    pub tail: f64,
    pub t_end: f64,
}

impl NonlinearMass {
    pub fn value(&self) -> f64 {
        self.partial + self.tail
    }
}

impl Constants {
    pub fn profile_spec(&self, params: Params) -> Result<ProfileSpec> {
        ProfileSpec::new(
            params,
            self.mass,
            self.first_moment,
            self.nonlinear_mass.map(|n| n.value()),
        )
    }
}

/// `M = ∫u₀`, `m = ∫x u₀` and, when a trajectory is supplied,
/// `ℳ = ∫₀^∞∫|u|^{p-1}u`.
pub fn compute_constants(
    u0: &Field,
    traj: Option<&Trajectory>,
    params: &Params,
) -> Result<Constants> {
    params.validate()?;
    let m0 = moment(u0, 0)?;
    let m1 = moment(u0, 1)?;
    if m0.truncated || m1.truncated {
        return Err(Error::Resolution(
            "initial data do not decay inside the box; moments would be truncated".into(),
        ));
    }
    let nonlinear_mass = match traj {
        None => None,
        Some(_) if params.p <= 3.0 => {
            return Err(Error::Config(format!(
                "the nonlinear mass diverges for p = {} <= 3",
                params.p
            )))
        }
        Some(tr) => {
            let tail = tr.calm_tail.ok_or_else(|| {
                Error::Config("trajectory was run without nonlinear-mass accumulation".into())
            })?;
            Some(NonlinearMass {
                partial: tr.calm_partial,
                tail,
                t_end: tr.config.t_end,
            })
        }
    };
    Ok(Constants {
        mass: m0.value,
        first_moment: m1.value,
        nonlinear_mass,
    })
}

/// Least-squares fit of `log v = intercept + slope·log t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    pub residual_rms: f64,
    pub with_log_factor: bool,
    pub points: usize,
}

impl RateFit {
    pub fn predict(&self, t: f64) -> f64 {
        let v = (self.intercept + self.slope * t.ln()).exp();
        if self.with_log_factor {
            v * t.ln()
        } else {
            v
        }
    }
}

/// Fits the samples whose time lies in `window` (inclusive). With
/// `with_log_factor` each value is divided by `log t` first.
pub fn rate_fit(
    samples: &[(f64, f64)],
    window: (f64, f64),
    with_log_factor: bool,
) -> Result<RateFit> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::Domain(format!("empty fit window [{lo}, {hi}]")));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(t, v) in samples.iter().filter(|(t, _)| *t >= lo && *t <= hi) {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("fit needs t > 0, got {t}")));
        }
        let v = if with_log_factor {
            if !(t > 1.0) {
                return Err(Error::Domain(format!(
                    "log-factor fit needs t > 1, got {t}"
                )));
            }
            v / t.ln()
        } else {
            v
        };
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!(
                "fit needs positive values, got {v} at t = {t}"
            )));
        }
        xs.push(t.ln());
        ys.push(v.ln());
    }
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_POINTS,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all fit samples share one time".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_rms = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(RateFit {
        slope,
        intercept,
        window,
        residual_rms,
        with_log_factor,
        points: xs.len(),
    })
}

/// Decay exponent of `‖·‖_q` for heat-like data: `(1/2)(1 - 1/q)`.
pub fn heat_exponent(q: f64) -> f64 {
    if q.is_infinite() {
        0.5
    } else {
        0.5 * (1.0 - 1.0 / q)
    }
}

/// Result of [`heat_expansion_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct HeatExpansion {
    /// Fit of `‖G₀(t)*u₀ - MG₀ + m∂ₓG₀‖_q`.
    pub fit: RateFit,
    pub predicted_slope: f64,
    /// `max_t t^{(1/2)(1-1/q)+1/2}‖G₀(t)*u₀ - MG₀‖_q / ‖xu₀‖₁`.
    pub first_order_ratio: f64,
    /// `(t, second-order residual norm)` for every requested time.
    pub residuals: Vec<(f64, f64)>,
}

/// `G₀(t) * f` computed spectrally on `f`'s grid.
pub fn heat_convolve(f: &Field, t: f64, params: &Params) -> Result<Field> {
    let grid = *f.grid();
    let drift = params.drift();
    let mut spec = transform(f);
    spec.multiply(|xi, i| {
        let damp = (-params.mu * t * xi * xi).exp();
        match grid.frame() {
            Frame::Comoving => num_complex::Complex64::new(damp, 0.0),
            Frame::Lab if grid.is_nyquist(i) => num_complex::Complex64::new(damp, 0.0),
            Frame::Lab => num_complex::Complex64::from_polar(damp, -drift * t * xi),
        }
    });
    inverse_transform(&spec)
}

/// Two-term heat expansion `G₀(t)*u₀ ≈ MG₀ - m∂ₓG₀`: fits the decay of the
/// residual over `times` and measures the first-order bound ratio.
pub fn heat_expansion_check(
    u0: &Field,
    params: &Params,
    times: &[f64],
    q: f64,
) -> Result<HeatExpansion> {
    let c = compute_constants(u0, None, params)?;
    let grid = *u0.grid();
    let abs_x: f64 = u0
        .values()
        .iter()
        .enumerate()
        .map(|(j, v)| (grid.x(j) * v).abs())
        .sum::<f64>()
        * grid.dx();
    let rate = heat_exponent(q);
    let mut residuals = Vec::with_capacity(times.len());
    let mut first_order_ratio = 0.0_f64;
    for &t in times {
        let conv = heat_convolve(u0, t, params)?;
        let g0 = sample_g0(&grid, t, params, 0)?;
        let dg0 = sample_g0(&grid, t, params, 1)?;
        let first = conv.axpy(-c.mass, &g0)?;
        let second = first.axpy(c.first_moment, &dg0)?;
        if abs_x > 0.0 {
            let r = lq_norm(&first, q)? * t.powf(rate + 0.5) / abs_x;
            first_order_ratio = first_order_ratio.max(r);
        }
        residuals.push((t, lq_norm(&second, q)?));
    }
    let lo = times.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let fit = rate_fit(&residuals, (lo, hi), false)?;
    Ok(HeatExpansion {
        fit,
        predicted_slope: -rate - 1.0,
        first_order_ratio,
        residuals,
    })
}

/// Decay fit of `‖u(·,t)‖_q` over the snapshots of `traj` inside `window`.
pub fn norm_decay_fit(traj: &Trajectory, q: f64, window: (f64, f64)) -> Result<RateFit> {
    let samples = traj
        .snapshots
        .iter()
        .map(|s| Ok((s.t, lq_norm(&s.field, q)?)))
        .collect::<Result<Vec<_>>>()?;
    rate_fit(&samples, window, false)
}

/// Time weight of the scaled profile distance: `t^{(1/2)(1-1/q)+(p-2)/2}`
/// for `p < 3`, `t^{(1/2)(1-1/q)+1/2}` (over `log t` at `p = 3`) otherwise.
pub fn scale_factor(regime: Regime, p: f64, q: f64, t: f64) -> f64 {
    let h = heat_exponent(q);
    match regime {
        Regime::Subcritical => t.powf(h + (p - 2.0) / 2.0),
        Regime::Critical => t.powf(h + 0.5) / t.ln(),
        Regime::Supercritical => t.powf(h + 0.5),
    }
}

/// Optimal-rate slope for `log ‖u - MG₀‖_q` (the `log t` factor
/// at `p = 3` is removed before fitting).
pub fn corollary_slope(regime: Regime, p: f64, q: f64) -> f64 {
    let h = heat_exponent(q);
    match regime {
        Regime::Subcritical => -h - (p - 2.0) / 2.0,
        Regime::Critical | Regime::Supercritical => -h - 0.5,
    }
}

/// Grid used to evaluate similarity-variable norms (`x ∈ [-40, 40)`).
fn similarity_grid() -> Grid {
    Grid::new(40.0, 4096, Frame::Lab).expect("fixed grid is valid")
}

/// Limit constant of the scaled `‖u - MG₀‖_q` for `spec` and `q`.
pub fn corollary_constant(spec: &ProfileSpec, q: f64) -> Result<f64> {
    let params = spec.params;
    let grid = similarity_grid();
    let mu = params.mu;
    let m = spec.mass;
    let sample = |f: &dyn Fn(f64) -> Result<f64>| -> Result<Field> {
        let values = grid.nodes().map(f).collect::<Result<Vec<_>>>()?;
        Field::new(grid, values)
    };
    match spec.regime {
        Regime::Subcritical => Ok(m.abs().powf(params.p) * w_p_norm(&params, q, &grid)?),
        Regime::Critical => {
            let dg = sample(&|x| gauss_deriv(x, 1.0, mu, 1))?;
            Ok(m.abs().powi(3) / (4.0 * 3f64.sqrt() * PI * mu) * lq_norm(&dg, q)?)
        }
        Regime::Supercritical => {
            let calm = spec.nonlinear_mass.ok_or_else(|| {
                Error::Config("supercritical constant needs the nonlinear mass".into())
            })?;
            let a = spec.first_moment + calm;
            let c = params.cubic_coeff() * m;
            let f =
                sample(&|x| Ok(a * gauss_deriv(x, 1.0, mu, 1)? + c * gauss_deriv(x, 1.0, mu, 3)?))?;
            lq_norm(&f, q)
        }
    }
}

/// Knobs of [`theorem_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    /// Required `final/initial` ratio over the last decade; `None` picks
    /// the regime default (0.5, or plain decrease at `p = 3`).
    pub decade_fraction: Option<f64>,
    pub constant_tol: f64,
    /// Verify the limit statement (last-decade decrease).
    pub check_limit: bool,
    /// Check the optimal-rate constant.
    pub check_constant: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            decade_fraction: None,
            constant_tol: DEFAULT_CONSTANT_TOL,
            check_limit: true,
            check_constant: true,
        }
    }
}

/// Regime default for the last-decade decrease ratio.
pub fn default_decade_fraction(regime: Regime) -> f64 {
    match regime {
        // the critical o(1) is only ~1/log t
        Regime::Critical => 1.0,
        _ => DEFAULT_DECADE_FRACTION,
    }
}

/// "Tends to zero" proxy over the last decade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitCheck {
    pub initial: f64,
    pub final_value: f64,
    pub ratio: f64,
    pub monotone: bool,
    pub fraction: f64,
    pub pass: bool,
}

/// Scaled `‖u - MG₀‖_q` compared with its predicted limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantCheck {
    pub predicted: f64,
    pub measured: f64,
    pub rel_error: f64,
    pub pass: bool,
}

/// Boundedness of the critical distance without the `log t` division.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub slope: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QReport {
    pub q: f64,
    pub times: Vec<f64>,
    /// `‖u - profile‖_q`
    pub raw: Vec<f64>,
    /// `raw` times the theorem's weight.
    pub scaled: Vec<f64>,
    /// Scaled `‖u - MG₀‖_q`.
    pub corollary_scaled: Vec<f64>,
    pub measured_slope: f64,
    pub predicted_slope: f64,
    pub limit: LimitCheck,
    pub constant: Option<ConstantCheck>,
    pub bound: Option<BoundCheck>,
    pub pass: bool,
}

/// Which checks entered a verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckSelection {
    pub limit: bool,
    pub constant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    pub params: Params,
    pub constants: Constants,
    pub degenerate: bool,
    pub window: (f64, f64),
    pub checks: CheckSelection,
    pub per_q: Vec<QReport>,
    pub pass: bool,
}

/// Fit/limit window: the last two decades, without transients.
pub fn report_window(t_end: f64) -> (f64, f64) {
    ((t_end / 100.0).max(TRANSIENT_END), t_end)
}

fn limit_check(times: &[f64], scaled: &[f64], t_end: f64, fraction: f64) -> Result<LimitCheck> {
    let idx: Vec<usize> = (0..times.len())
        .filter(|&i| times[i] >= t_end / 10.0 * (1.0 - 1e-12))
        .collect();
    if idx.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: idx.len(),
        });
    }
    let initial = scaled[idx[0]];
    let final_value = scaled[*idx.last().unwrap()];
    let monotone = idx.windows(2).all(|w| scaled[w[1]] < scaled[w[0]]);
    let ratio = final_value / initial;
    Ok(LimitCheck {
        initial,
        final_value,
        ratio,
        monotone,
        fraction,
        pass: monotone && ratio <= fraction,
    })
}

/// Compares a trajectory with the theorem's profile for each `q`.
pub fn theorem_report(
    traj: &Trajectory,
    spec: &ProfileSpec,
    q_list: &[f64],
    opts: ReportOptions,
) -> Result<RegimeReport> {
    let params = spec.params;
    let regime = Regime::of(params.p)?;
    if regime != spec.regime || params != traj.config.params {
        return Err(Error::Config(
            "profile spec does not match the trajectory's parameters".into(),
        ));
    }
    if q_list.is_empty() {
        return Err(Error::Config("no q values requested".into()));
    }
    let t_end = traj.config.t_end;
    let window = report_window(t_end);
    let snaps: Vec<_> = traj
        .snapshots
        .iter()
        .filter(|s| s.t >= window.0 && s.t <= window.1)
        .collect();
    if snaps.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_POINTS,
            got: snaps.len(),
        });
    }
    let degenerate = spec.mass == 0.0;
    let fraction = opts
        .decade_fraction
        .unwrap_or_else(|| default_decade_fraction(regime));
    let grid = traj.config.grid;
    // profile and MG₀ do not depend on q
    let pieces = snaps
        .iter()
        .map(|s| {
            let prof = theorem_profile_field(&grid, s.t, spec)?;
            let lead = sample_g0(&grid, s.t, &params, 0)?.scaled(spec.mass);
            Ok((s.t, s.field.sub(&prof)?, s.field.sub(&lead)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let times: Vec<f64> = pieces.iter().map(|p| p.0).collect();

    let mut per_q = Vec::with_capacity(q_list.len());
    for &q in q_list {
        let raw = pieces
            .iter()
            .map(|(_, d, _)| lq_norm(d, q))
            .collect::<Result<Vec<_>>>()?;
        let lead_raw = pieces
            .iter()
            .map(|(_, _, d)| lq_norm(d, q))
            .collect::<Result<Vec<_>>>()?;
        let weight: Vec<f64> = times
            .iter()
            .map(|&t| scale_factor(regime, params.p, q, t))
            .collect();
        let scaled: Vec<f64> = raw.iter().zip(&weight).map(|(r, w)| r * w).collect();
        let corollary_scaled: Vec<f64> = lead_raw.iter().zip(&weight).map(|(r, w)| r * w).collect();
        let limit = limit_check(&times, &scaled, t_end, fraction)?;
        let samples: Vec<(f64, f64)> = times
            .iter()
            .copied()
            .zip(lead_raw.iter().copied())
            .collect();
        let with_log = regime == Regime::Critical;
        let (measured_slope, predicted_slope) = if degenerate {
            (f64::NAN, corollary_slope(regime, params.p, q))
        } else {
            (
                rate_fit(&samples, window, with_log)?.slope,
                corollary_slope(regime, params.p, q),
            )
        };
        let constant = if degenerate {
            None
        } else {
            let predicted = corollary_constant(spec, q)?;
            let measured = *corollary_scaled.last().unwrap();
            let rel_error = (measured - predicted) / predicted;
            Some(ConstantCheck {
                predicted,
                measured,
                rel_error,
                pass: rel_error.abs() <= opts.constant_tol,
            })
        };
        let bound = if regime == Regime::Critical {
            let unlogged: Vec<(f64, f64)> = times
                .iter()
                .zip(&scaled)
                .filter(|(t, _)| **t >= t_end / 10.0 * (1.0 - 1e-12))
                .map(|(&t, &s)| (t, s * t.ln()))
                .collect();
            let lo = unlogged.first().map(|s| s.0).unwrap_or(t_end);
            let slope = if unlogged.len() >= 2 && lo < t_end {
                // at least two points suffice here: the window is the last decade
                ols_slope(&unlogged)?
            } else {
                f64::NAN
            };
            Some(BoundCheck {
                slope,
                pass: slope <= BOUNDED_SLOPE,
            })
        } else {
            None
        };
        let pass = (!opts.check_limit || limit.pass)
            && (!opts.check_constant || constant.is_none_or(|c| c.pass))
            && bound.is_none_or(|b| b.pass);
        per_q.push(QReport {
            q,
            times: times.clone(),
            raw,
            scaled,
            corollary_scaled,
            measured_slope,
            predicted_slope,
            limit,
            constant,
            bound,
            pass,
        });
    }
    let pass = per_q.iter().all(|r| r.pass);
    Ok(RegimeReport {
        regime,
        params,
        constants: Constants {
            mass: spec.mass,
            first_moment: spec.first_moment,
            nonlinear_mass: None,
        },
        degenerate,
        window,
        checks: CheckSelection {
            limit: opts.check_limit,
            constant: opts.check_constant,
        },
        per_q,
        pass,
    })
}

fn ols_slope(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.iter().any(|(_, v)| !(*v > 0.0)) {
        return Err(Error::Domain("bound check needs positive values".into()));
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

impl RegimeReport {
    /// Attaches `ℳ` provenance for the report text.
    pub fn with_constants(mut self, constants: Constants) -> Self {
        self.constants = constants;
        self
    }

    /// Key-value report text.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        let _ = writeln!(s, "report.regime = {}", self.regime);
        let _ = writeln!(s, "report.p = {}", p.p);
        let _ = writeln!(s, "report.big_b = {}", p.big_b);
        let _ = writeln!(s, "report.b = {}", p.b);
        let _ = writeln!(s, "report.mu = {}", p.mu);
        let _ = writeln!(s, "report.mass = {:e}", self.constants.mass);
        let _ = writeln!(s, "report.first_moment = {:e}", self.constants.first_moment);
        if let Some(n) = self.constants.nonlinear_mass {
            let _ = writeln!(s, "report.nonlinear_mass = {:e}", n.value());
            let _ = writeln!(s, "report.nonlinear_mass.partial = {:e}", n.partial);
            let _ = writeln!(s, "report.nonlinear_mass.tail = {:e}", n.tail);
            let _ = writeln!(s, "report.nonlinear_mass.t_end = {}", n.t_end);
        }
        let _ = writeln!(s, "report.degenerate = {}", self.degenerate);
        let _ = writeln!(s, "report.window = {},{}", self.window.0, self.window.1);
        let qs: Vec<String> = self.per_q.iter().map(|r| format_q(r.q)).collect();
        let _ = writeln!(s, "report.q_list = {}", qs.join(","));
        for r in &self.per_q {
            let k = format!("q.{}", format_q(r.q));
            let _ = writeln!(s, "{k}.measured_slope = {}", r.measured_slope);
            let _ = writeln!(s, "{k}.predicted_slope = {}", r.predicted_slope);
            let _ = writeln!(s, "{k}.limit.initial = {:e}", r.limit.initial);
            let _ = writeln!(s, "{k}.limit.final = {:e}", r.limit.final_value);
            let _ = writeln!(s, "{k}.limit.ratio = {}", r.limit.ratio);
            let _ = writeln!(s, "{k}.limit.fraction = {}", r.limit.fraction);
            let _ = writeln!(s, "{k}.limit.monotone = {}", r.limit.monotone);
            let limit = if self.checks.limit {
                verdict(r.limit.pass)
            } else {
                "SKIPPED"
            };
            let _ = writeln!(s, "{k}.limit.verdict = {limit}");
            if let Some(c) = r.constant {
                let _ = writeln!(s, "{k}.constant.predicted = {:e}", c.predicted);
                let _ = writeln!(s, "{k}.constant.measured = {:e}", c.measured);
                let _ = writeln!(s, "{k}.constant.rel_error = {}", c.rel_error);
            }
            let constant = match r.constant {
                Some(c) if self.checks.constant => verdict(c.pass),
                _ => "SKIPPED",
            };
            let _ = writeln!(s, "{k}.constant.verdict = {constant}");
            if let Some(b) = r.bound {
                let _ = writeln!(s, "{k}.bound.slope = {}", b.slope);
                let _ = writeln!(s, "{k}.bound.verdict = {}", verdict(b.pass));
            }
            let _ = writeln!(s, "{k}.verdict = {}", verdict(r.pass));
        }
        let _ = writeln!(s, "report.verdict = {}", verdict(self.pass));
        s
    }

    /// `t,q,raw_norm,scaled_norm` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,q,raw_norm,scaled_norm\n");
        for r in &self.per_q {
            for ((t, raw), scaled) in r.times.iter().zip(&r.raw).zip(&r.scaled) {
                let _ = writeln!(s, "{t:e},{},{raw:e},{scaled:e}", format_q(r.q));
            }
        }
        s
    }
}
