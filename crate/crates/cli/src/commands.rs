//! The subcommands. Each writes its files into the output directory and
//! returns an [`Outcome`]; `main` turns that into an exit code.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fwdiss::analysis::rate_fit;
use fwdiss::analysis::{compute_constants, theorem_report, Constants, RegimeReport, ReportOptions};
use fwdiss::kernel::{format_q, gauss_deriv, kernel_gap_table, KernelGapRow};
use fwdiss::kv::KeyValues;
use fwdiss::profiles::{
    duhamel_selfsim_check, oracle, theorem_profile_field, w_p, w_p_field, w_p_truncated,
    ProfileSpec,
};
use fwdiss::quad::Adaptive;
use fwdiss::snapshot::{ProfileTag, Snapshot};
use fwdiss::solver::{integrate, SolveConfig, Trajectory};
use fwdiss::store::{read_trajectory, write_trajectory};
use fwdiss::{Error, Field, Frame, Grid, Params, Result};

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    KernelVerify,
    ProfileVerify,
    Simulate,
    TheoremVerify,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::KernelVerify => "kernel-verify",
            Command::ProfileVerify => "profile-verify",
            Command::Simulate => "simulate",
            Command::TheoremVerify => "theorem-verify",
            Command::Report => "report",
        }
    }

    /// Preset used when neither `--preset` nor a config names one.
    pub fn default_preset(self) -> &'static str {
        match self {
            Command::KernelVerify => "kernel",
            _ => "default",
        }
    }
}

/// What a command found.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    /// One line per check or artifact, for the terminal.
    pub lines: Vec<String>,
    /// Names of failed checks.
    pub failures: Vec<String>,
}

impl Outcome {
    fn check(&mut self, name: String, pass: bool, detail: String) {
        self.lines.push(format!(
            "{} {name}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        ));
        if !pass {
            self.failures.push(name);
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Exit codes: 0 pass, 1 I/O, 2 verification failure, 3 configuration
/// error, 4 numerical-stability error.
pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(o) if o.passed() => 0,
        Ok(_) => 2,
        Err(e) if e.is_config() => 3,
        Err(Error::Domain(_) | Error::Resolution(_)) => 3,
        Err(e) if e.is_stability() => 4,
        Err(Error::Accuracy(_)) => 4,
        Err(Error::InsufficientData { .. }) => 2,
        Err(_) => 1,
    }
}

pub fn run(cmd: Command, cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    fs::create_dir_all(out)?;
    let mut manifest = manifest_base(cmd, cfg);
    fs::write(out.join("manifest.txt"), manifest.to_string())?;
    let outcome = match cmd {
        Command::KernelVerify => kernel_verify(cfg, out, &mut manifest),
        Command::ProfileVerify => profile_verify(cfg, out, &mut manifest),
        Command::Simulate => simulate(cfg, out, &mut manifest).map(|(_, _, o)| o),
        Command::TheoremVerify => theorem_verify(cfg, out, &mut manifest),
        Command::Report => report(cfg, out, &mut manifest),
    };
    match &outcome {
        Ok(o) => {
            manifest.set("result.verdict", if o.passed() { "PASS" } else { "FAIL" });
        }
        Err(e) => manifest.set("result.error", e.to_string().replace('\n', " ")),
    }
    fs::write(out.join("manifest.txt"), manifest.to_string())?;
    outcome
}

fn manifest_base(cmd: Command, cfg: &RunConfig) -> KeyValues {
    let mut kv = KeyValues::new();
    kv.set("run.command", cmd.name());
    kv.merge(&cfg.to_kv());
    kv
}

fn kernel_verify(cfg: &RunConfig, out: &Path, manifest: &mut KeyValues) -> Result<Outcome> {
    let k = &cfg.kernel;
    let times = cfg.kernel_times();
    let mut csv = String::from(KernelGapRow::CSV_HEADER);
    csv.push('\n');
    let mut report = KeyValues::new();
    let mut outcome = Outcome::default();
    for &order in &k.orders {
        for &l in &k.l_list {
            for &q in &k.q_list {
                let rows = kernel_gap_table(&times, l, q, order, &cfg.params, &cfg.grid)?;
                for r in &rows {
                    let _ = writeln!(csv, "{r}");
                }
                let samples: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.gap)).collect();
                let fit = rate_fit(&samples, (k.t_min, k.t_max), false)?;
                let predicted = order.predicted_slope(q, l);
                let err = fit.slope - predicted;
                let pass = err.abs() <= k.tolerance;
                let name = format!("order{}.l{l}.q{}", order.as_u8(), format_q(q));
                report.set(&format!("check.{name}.slope"), fit.slope);
                report.set(&format!("check.{name}.predicted"), predicted);
                report.set(&format!("check.{name}.residual_rms"), fit.residual_rms);
                report.set(
                    &format!("check.{name}.verdict"),
                    if pass { "PASS" } else { "FAIL" },
                );
                outcome.check(
                    format!("kernel-gap {name}"),
                    pass,
                    format!(
                        "slope {:.4} predicted {predicted:.4} (|err| {:.4} vs tol {})",
                        fit.slope,
                        err.abs(),
                        k.tolerance
                    ),
                );
            }
        }
    }
    fs::write(out.join("kernel_gaps.csv"), csv)?;
    fs::write(out.join("kernel_report.txt"), report.to_string())?;
    manifest.set("result.checks", outcome.lines.len());
    manifest.set("result.failures", outcome.failures.len());
    Ok(outcome)
}

/// `∫G(η,τ)³dη` by adaptive quadrature.
pub fn gaussian_cube_mass(tau: f64, mu: f64) -> Result<f64> {
    let reach = (4.0 * mu * tau * 40.0).sqrt();
    let q = Adaptive::new(1e-300, 1e-14);
    Ok(q.integrate(-reach, reach, |x| {
        gauss_deriv(x, tau, mu, 0).expect("tau > 0").powi(3)
    })?
    .value)
}

fn with_p(params: &Params, p: f64) -> Result<Params> {
    Params::new(p, params.big_b, params.b, params.mu)
}

fn profile_verify(cfg: &RunConfig, out: &Path, manifest: &mut KeyValues) -> Result<Outcome> {
    let pc = &cfg.profile;
    let mu = cfg.params.mu;
    let mut outcome = Outcome::default();
    let mut csv = String::from("check,p,x,reference,candidate,abs_error,verdict\n");
    let verdict = |pass: bool| if pass { "PASS" } else { "FAIL" };

    for &tau in &pc.power_taus {
        let numeric = gaussian_cube_mass(tau, mu)?;
        let exact = 1.0 / (tau * 4.0 * 3f64.sqrt() * PI * mu);
        let rel = (numeric - exact).abs() / exact;
        let pass = rel <= pc.power_tolerance;
        let _ = writeln!(
            csv,
            "gaussian_cube,3,{tau},{exact:e},{numeric:e},{:e},{}",
            (numeric - exact).abs(),
            verdict(pass)
        );
        outcome.check(
            format!("gaussian-cube tau={tau}"),
            pass,
            format!("relative error {rel:.2e}"),
        );
    }

    for &p in &pc.p_list {
        let params = with_p(&cfg.params, p)?;
        for &x in &pc.x_list {
            let (reduced, definitional, label) = if p < 3.0 {
                (
                    w_p(x, &params)?,
                    oracle::w_p_definitional(x, &params, 0.0)?,
                    "w_p",
                )
            } else {
                (
                    w_p_truncated(x, &params, pc.s_min)?,
                    oracle::w_p_definitional(x, &params, pc.s_min)?,
                    "w_p_truncated",
                )
            };
            let err = (reduced - definitional).abs();
            let pass = err <= pc.tolerance;
            let _ = writeln!(
                csv,
                "{label},{p},{x},{definitional:e},{reduced:e},{err:e},{}",
                verdict(pass)
            );
            outcome.check(
                format!("{label} p={p} x={x}"),
                pass,
                format!("|reduced - definitional| = {err:.2e}"),
            );
            if p >= 3.0 && x != 0.0 {
                // both routes must agree that the full s-integral diverges
                let full = matches!(w_p(x, &params), Err(Error::Divergence(_)));
                let def = matches!(
                    oracle::w_p_definitional(x, &params, 0.0),
                    Err(Error::Divergence(_))
                );
                outcome.check(
                    format!("w_p divergence p={p} x={x}"),
                    full && def,
                    "full s-integral reported divergent by both routes".into(),
                );
            }
        }
        if p < 3.0 {
            let grid = Grid::new(pc.half_length, pc.n, Frame::Lab)?;
            let mut snap = Snapshot::new(1.0, w_p_field(&grid, &params)?);
            snap.profile = Some(ProfileTag::SelfSimilar);
            snap.write(out.join(format!("w_p_{p}.fws")))?;
        }
    }

    let params = with_p(&cfg.params, pc.selfsim_p)?;
    let spec = ProfileSpec::new(params, pc.selfsim_mass, 0.0, None)?;
    let grid = Grid::new(pc.half_length, pc.n, Frame::Comoving)?;
    for &t in &pc.selfsim_times {
        let c = duhamel_selfsim_check(t, &spec, &grid)?;
        let pass = c.relative <= pc.selfsim_tolerance;
        let _ = writeln!(
            csv,
            "duhamel_selfsim,{},{t},{:e},{:e},{:e},{}",
            pc.selfsim_p,
            c.reference_norm,
            c.distance,
            c.relative,
            verdict(pass)
        );
        let note = c.warning.map(|w| format!(" [{w}]")).unwrap_or_default();
        outcome.check(
            format!("duhamel-selfsim t={t}"),
            pass,
            format!("relative L2 distance {:.2e}{note}", c.relative),
        );
    }
    fs::write(out.join("profile_checks.csv"), csv)?;
    manifest.set("result.checks", outcome.lines.len());
    manifest.set("result.failures", outcome.failures.len());
    Ok(outcome)
}

/// `M·G(·, width_time)` on the configured grid.
pub fn initial_data(cfg: &RunConfig, amplitude: f64) -> Field {
    let mu = cfg.params.mu;
    let t0 = cfg.initial.width_time;
    cfg.grid
        .sample(|x| amplitude * gauss_deriv(x, t0, mu, 0).expect("width_time > 0"))
}

pub fn solve_config(cfg: &RunConfig) -> SolveConfig {
    SolveConfig {
        params: cfg.params,
        grid: cfg.grid,
        t_end: cfg.solve.t_end,
        dt: cfg.solve.dt,
        dealias: cfg.solve.dealias,
        snapshot_times: cfg.snapshot_times(),
        accumulate_calm: cfg.params.p > 3.0,
        linear_only: false,
    }
}

const MAX_HALVINGS: u32 = 4;

fn simulate(
    cfg: &RunConfig,
    out: &Path,
    manifest: &mut KeyValues,
) -> Result<(Trajectory, Field, Outcome)> {
    let sc = solve_config(cfg);
    let mut amplitude = cfg.initial.amplitude;
    let mut halvings = 0;
    let (traj, u0) = loop {
        let u0 = initial_data(cfg, amplitude);
        match integrate(&u0, &sc) {
            Ok(t) => break (t, u0),
            Err(e @ Error::Stability { .. }) if cfg.solve.auto_halve && halvings < MAX_HALVINGS => {
                eprintln!("warning: {e}; halving the amplitude");
                amplitude /= 2.0;
                halvings += 1;
            }
            Err(e) => return Err(e),
        }
    };
    write_trajectory(&out.join("trajectory"), &traj)?;
    let traj_ref = (cfg.params.p > 3.0).then_some(&traj);
    let c = compute_constants(&u0, traj_ref, &cfg.params)?;
    record_constants(manifest, &c);
    manifest.set("result.amplitude", amplitude);
    manifest.set("result.halvings", halvings);
    let drift = traj
        .diagnostics
        .iter()
        .map(|d| (d.mass - c.mass).abs())
        .fold(0.0, f64::max);
    manifest.set("result.max_mass_drift", format!("{drift:e}"));
    let mut outcome = Outcome::default();
    outcome.lines.push(format!(
        "simulated t in [0, {}] with {} snapshots (M = {:e}, m = {:e}{})",
        sc.t_end,
        traj.snapshots.len(),
        c.mass,
        c.first_moment,
        c.nonlinear_mass
            .map(|n| format!(", calM = {:e}", n.value()))
            .unwrap_or_default()
    ));
    Ok((traj, u0, outcome))
}

fn record_constants(manifest: &mut KeyValues, c: &Constants) {
    manifest.set("result.mass", format!("{:e}", c.mass));
    manifest.set("result.first_moment", format!("{:e}", c.first_moment));
    if let Some(n) = c.nonlinear_mass {
        manifest.set("result.nonlinear_mass", format!("{:e}", n.value()));
        manifest.set("result.nonlinear_mass.partial", format!("{:e}", n.partial));
        manifest.set("result.nonlinear_mass.tail", format!("{:e}", n.tail));
    }
}

fn report_options(cfg: &RunConfig) -> ReportOptions {
    ReportOptions {
        decade_fraction: cfg.analysis.fraction,
        constant_tol: cfg.analysis.tolerance,
        check_limit: cfg.analysis.check_limit,
        check_constant: cfg.analysis.check_constant,
    }
}

/// Constants, profile and checks for a finished trajectory.
pub fn build_report(
    cfg: &RunConfig,
    traj: &Trajectory,
    u0: &Field,
) -> Result<(RegimeReport, ProfileSpec)> {
    let params = traj.config.params;
    let traj_ref = (params.p > 3.0).then_some(traj);
    let c = compute_constants(u0, traj_ref, &params)?;
    let spec = c.profile_spec(params)?;
    let rep =
        theorem_report(traj, &spec, &cfg.analysis.q_list, report_options(cfg))?.with_constants(c);
    Ok((rep, spec))
}

/// Integrates from the configured data and checks it, without writing files.
pub fn solve_and_report(cfg: &RunConfig) -> Result<(Trajectory, RegimeReport)> {
    let u0 = initial_data(cfg, cfg.initial.amplitude);
    let traj = integrate(&u0, &solve_config(cfg))?;
    let (rep, _) = build_report(cfg, &traj, &u0)?;
    Ok((traj, rep))
}

fn emit_report(
    cfg: &RunConfig,
    traj: &Trajectory,
    u0: &Field,
    out: &Path,
    manifest: &mut KeyValues,
) -> Result<Outcome> {
    let (rep, spec) = build_report(cfg, traj, u0)?;
    record_constants(manifest, &rep.constants);
    fs::write(out.join("report.txt"), rep.to_kv())?;
    fs::write(out.join("report.csv"), rep.to_csv())?;
    if let Some(last) = traj.last() {
        let prof = theorem_profile_field(&traj.config.grid, last.t, &spec)?;
        let residual = last.field.sub(&prof)?;
        for (field, tag, name) in [
            (prof, ProfileTag::TheoremProfile, "profile_t_end.fws"),
            (residual, ProfileTag::Residual, "residual_t_end.fws"),
        ] {
            let mut s = Snapshot::new(last.t, field);
            s.profile = Some(tag);
            s.write(out.join(name))?;
        }
    }
    let mut outcome = Outcome::default();
    if rep.degenerate {
        outcome
            .lines
            .push("note: M = 0, optimal-rate constants skipped (degenerate profile)".into());
    }
    for r in &rep.per_q {
        let q = format_q(r.q);
        let regime = rep.regime;
        if rep.checks.limit {
            outcome.check(
                format!("{regime} q={q} limit"),
                r.limit.pass,
                format!(
                    "scaled distance ratio {:.3} over last decade (need <= {}, monotone {})",
                    r.limit.ratio, r.limit.fraction, r.limit.monotone
                ),
            );
        }
        if let (true, Some(c)) = (rep.checks.constant, r.constant) {
            outcome.check(
                format!("{regime} q={q} corollary-constant"),
                c.pass,
                format!(
                    "measured {:.4e} predicted {:.4e} (rel {:+.3})",
                    c.measured, c.predicted, c.rel_error
                ),
            );
        }
        if let Some(b) = r.bound {
            outcome.check(
                format!("{regime} q={q} bound"),
                b.pass,
                format!("unlogged scaled distance slope {:.3}", b.slope),
            );
        }
        outcome.lines.push(format!(
            "info {regime} q={q}: corollary slope {:.3} (predicted {:.3})",
            r.measured_slope, r.predicted_slope
        ));
    }
    Ok(outcome)
}

fn theorem_verify(cfg: &RunConfig, out: &Path, manifest: &mut KeyValues) -> Result<Outcome> {
    let (traj, u0, mut first) = simulate(cfg, out, manifest)?;
    let rest = emit_report(cfg, &traj, &u0, out, manifest)?;
    first.lines.extend(rest.lines);
    first.failures.extend(rest.failures);
    Ok(first)
}

fn report(cfg: &RunConfig, out: &Path, manifest: &mut KeyValues) -> Result<Outcome> {
    let traj = read_trajectory(&out.join("trajectory"))?;
    let u0 = traj
        .snapshot_at(0.0)
        .ok_or_else(|| Error::Format("trajectory has no t = 0 snapshot".into()))?
        .field
        .clone();
    emit_report(cfg, &traj, &u0, out, manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_contract() {
        assert_eq!(exit_code(&Ok(Outcome::default())), 0);
        let failed = Outcome {
            lines: vec![],
            failures: vec!["x".into()],
        };
        assert_eq!(exit_code(&Ok(failed)), 2);
        assert_eq!(exit_code(&Err(Error::Config("x".into()))), 3);
        assert_eq!(exit_code(&Err(Error::Format("x".into()))), 3);
        let stab = Error::Stability {
            t: 1.0,
            reason: "x".into(),
            suggested_dt: 0.1,
        };
        assert_eq!(exit_code(&Err(stab)), 4);
        assert_eq!(
            exit_code(&Err(Error::InsufficientData { needed: 8, got: 1 })),
            2
        );
        assert_eq!(exit_code(&Err(Error::Io(std::io::Error::other("disk")))), 1);
    }

    #[test]
    fn gaussian_cube_closed_form() {
        for tau in [0.5, 1.0, 2.0] {
            let exact = 1.0 / (tau * 4.0 * 3f64.sqrt() * PI);
            assert!((gaussian_cube_mass(tau, 1.0).unwrap() - exact).abs() < 1e-12 * exact);
        }
    }
}
