//! Acceptance suite: one PASS/FAIL line per criterion, process fails if any
//! criterion fails. Run with `cargo test -p fwdiss-cli --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use fwdiss::analysis::rate_fit;
use fwdiss::analysis::{norm_decay_fit, RegimeReport};
use fwdiss::kernel::{apply_semigroup, gauss_deriv, kernel_gap_table, GapOrder};
use fwdiss::norms::lq_norm;
use fwdiss::profiles::{duhamel_selfsim_check, oracle, w_p, w_p_truncated, ProfileSpec};
use fwdiss::solver::{integrate, picard_solve, SolveConfig};
use fwdiss::{Field, Frame, Grid, Params, Result};
use fwdiss_cli::commands::{gaussian_cube_mass, solve_and_report};
use fwdiss_cli::RunConfig;

const Q_LIST: [f64; 2] = [2.0, f64::INFINITY];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn preset(name: &str) -> RunConfig {
    RunConfig::resolve(Some(name), None).expect("preset resolves")
}

fn rel_l2(a: &Field, b: &Field) -> f64 {
    let d = lq_norm(&a.sub(b).unwrap(), 2.0).unwrap();
    d / lq_norm(b, 2.0).unwrap()
}

fn qname(q: f64) -> String {
    if q.is_infinite() {
        "inf".into()
    } else {
        format!("{q}")
    }
}

fn kernel_rates(order: GapOrder) -> Result<Verdict> {
    let cfg = preset("kernel");
    let times = cfg.kernel_times();
    let mut pass = true;
    let mut parts = Vec::new();
    for l in [0, 1] {
        for q in Q_LIST {
            let rows = kernel_gap_table(&times, l, q, order, &cfg.params, &cfg.grid)?;
            let samples: Vec<_> = rows.iter().map(|r| (r.t, r.gap)).collect();
            let fit = rate_fit(&samples, (10.0, 1000.0), false)?;
            let want = order.predicted_slope(q, l);
            pass &= (fit.slope - want).abs() <= 0.05;
            parts.push(format!(
                "l={l} q={}: {:.3} vs {want:.3}",
                qname(q),
                fit.slope
            ));
        }
    }
    Ok(verdict(pass, parts.join("; ")))
}

fn gaussian_cube() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    for tau in [0.5, 1.0, 2.0] {
        let exact = 1.0 / (tau * 4.0 * 3f64.sqrt() * PI);
        worst = worst.max((gaussian_cube_mass(tau, 1.0)? - exact).abs() / exact);
    }
    Ok(verdict(
        worst <= 1e-10,
        format!("max relative error {worst:.2e}"),
    ))
}

fn w_p_oracle() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    let s_min = preset("default").profile.s_min;
    for p in [2.5, 3.0, 4.0] {
        let params = Params::new(p, 1.0, 1.0, 1.0)?;
        for x in [0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0] {
            let err = if p < 3.0 {
                (w_p(x, &params)? - oracle::w_p_definitional(x, &params, 0.0)?).abs()
            } else {
                (w_p_truncated(x, &params, s_min)? - oracle::w_p_definitional(x, &params, s_min)?)
                    .abs()
            };
            worst = worst.max(err);
        }
    }
    Ok(verdict(
        worst <= 1e-7,
        format!("max |reduced - definitional| {worst:.2e} (p >= 3 compared on s >= {s_min})"),
    ))
}

fn duhamel() -> Result<Verdict> {
    let cfg = preset("default");
    let spec = ProfileSpec::new(Params::new(2.5, 1.0, 1.0, 1.0)?, 1.0, 0.0, None)?;
    let grid = Grid::new(cfg.profile.half_length, cfg.profile.n, Frame::Comoving)?;
    let mut worst: f64 = 0.0;
    for t in [1.0, 4.0, 16.0] {
        worst = worst.max(duhamel_selfsim_check(t, &spec, &grid)?.relative);
    }
    Ok(verdict(
        worst <= 1e-4,
        format!("max relative L2 distance {worst:.2e}"),
    ))
}

fn decay() -> Result<Verdict> {
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [2.5, 3.0, 4.0] {
        let mut cfg = preset("decay");
        cfg.params.p = p;
        let u0 = fwdiss_cli::commands::initial_data(&cfg, cfg.initial.amplitude);
        let traj = integrate(&u0, &fwdiss_cli::commands::solve_config(&cfg))?;
        let inf = norm_decay_fit(&traj, f64::INFINITY, (10.0, 500.0))?.slope;
        let two = norm_decay_fit(&traj, 2.0, (10.0, 500.0))?.slope;
        pass &= (inf + 0.5).abs() <= 0.05 && (two + 0.25).abs() <= 0.05;
        parts.push(format!("p={p}: inf {inf:.3}, 2 {two:.3}"));
    }
    Ok(verdict(pass, parts.join("; ")))
}

fn limit_line(rep: &RegimeReport, bound: bool) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in &rep.per_q {
        pass &= r.limit.pass;
        let mut s = format!(
            "q={}: ratio {:.3} (<= {}), monotone {}",
            qname(r.q),
            r.limit.ratio,
            r.limit.fraction,
            r.limit.monotone
        );
        if bound {
            let b = r.bound.expect("critical report carries a bound check");
            pass &= b.pass;
            s.push_str(&format!(", unlogged slope {:.3}", b.slope));
        }
        parts.push(s);
    }
    verdict(pass, parts.join("; "))
}

fn constant_line(reports: &[(&str, &RegimeReport)]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, rep) in reports {
        for r in &rep.per_q {
            let c = r.constant.expect("constant computed");
            pass &= c.rel_error.abs() <= 0.2;
            parts.push(format!("{name} q={}: {:+.3}", qname(r.q), c.rel_error));
        }
    }
    verdict(pass, parts.join("; "))
}

fn structural(reports: &[(&str, &RegimeReport)]) -> Result<Verdict> {
    let mut parts = Vec::new();
    let mut pass = true;

    // mass drift over the long runs
    let mut drift: f64 = 0.0;
    for (name, _) in reports {
        let cfg = preset(name);
        let u0 = fwdiss_cli::commands::initial_data(&cfg, cfg.initial.amplitude);
        let sc = SolveConfig::new(cfg.params, cfg.grid, 50.0, cfg.solve.dt);
        let traj = integrate(&u0, &sc)?;
        let m0 = traj.diagnostics[0].mass;
        for d in &traj.diagnostics {
            drift = drift.max((d.mass - m0).abs() / m0.abs());
        }
    }
    pass &= drift <= 1e-8;
    parts.push(format!("mass drift {drift:.1e}"));

    // T(t)T(s) = T(t+s)
    let cfg = preset("default");
    let f = cfg
        .grid
        .sample(|x| 0.05 * gauss_deriv(x, 1.0, 1.0, 0).unwrap());
    let composed = apply_semigroup(&apply_semigroup(&f, 3.0, &cfg.params)?, 7.0, &cfg.params)?;
    let direct = apply_semigroup(&f, 10.0, &cfg.params)?;
    let semi = rel_l2(&composed, &direct);
    pass &= semi <= 1e-12;
    parts.push(format!("semigroup {semi:.1e}"));

    // Picard vs ETDRK4 at t = 2
    let grid = Grid::new(64.0, 1024, Frame::Comoving)?;
    let mut cross: f64 = 0.0;
    for p in [2.5, 3.0, 4.0] {
        let params = Params::new(p, 1.0, 1.0, 1.0)?;
        let u0 = grid.sample(|x| 0.05 * gauss_deriv(x, 1.0, 1.0, 0).unwrap());
        let picard = picard_solve(&u0, 2.0, &params, &grid, 50)?;
        let etd = integrate(&u0, &SolveConfig::new(params, grid, 2.0, 0.05))?;
        cross = cross.max(rel_l2(&etd.last().unwrap().field, &picard.field));
    }
    pass &= cross <= 1e-5;
    parts.push(format!("Picard/ETD {cross:.1e}"));

    // fourth order in time
    let params = Params::new(3.0, 1.0, 1.0, 1.0)?;
    let u0 = grid.sample(|x| gauss_deriv(x, 1.0, 1.0, 0).unwrap());
    let run = |dt: f64| -> Result<Field> {
        Ok(integrate(&u0, &SolveConfig::new(params, grid, 4.0, dt))?
            .last()
            .unwrap()
            .field
            .clone())
    };
    let reference = run(0.025)?;
    let e1 = lq_norm(&run(0.4)?.sub(&reference)?, 2.0)?;
    let e2 = lq_norm(&run(0.2)?.sub(&reference)?, 2.0)?;
    let ratio = e1 / e2;
    pass &= (ratio - 16.0).abs() <= 4.0;
    parts.push(format!("step-halving ratio {ratio:.2}"));

    // verdicts stable under N -> 2N and L -> 2L
    let mut stable = true;
    for (name, base) in reports {
        for (scale_l, scale_n) in [(1.0, 2), (2.0, 2)] {
            let mut cfg = preset(name);
            cfg.grid = Grid::new(
                cfg.grid.half_length() * scale_l,
                cfg.grid.len() * scale_n,
                cfg.grid.frame(),
            )?;
            let (_, rep) = solve_and_report(&cfg)?;
            let same = rep.pass == base.pass
                && rep.per_q.iter().zip(&base.per_q).all(|(a, b)| {
                    a.limit.pass == b.limit.pass
                        && a.constant.map(|c| c.pass) == b.constant.map(|c| c.pass)
                        && a.bound.map(|c| c.pass) == b.bound.map(|c| c.pass)
                });
            stable &= same;
        }
    }
    pass &= stable;
    parts.push(format!("grid-refinement verdicts stable {stable}"));
    Ok(verdict(pass, parts.join("; ")))
}

fn report(name: &str) -> RegimeReport {
    solve_and_report(&preset(name)).expect("run completes").1
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut emit = |id: u32, title: &str, started: Instant, v: Result<Verdict>| {
        let v = v.unwrap_or_else(|e| verdict(false, format!("error: {e}")));
        failed += usize::from(!v.pass);
        println!(
            "{} criterion {id:>2} {title}: {} [{:.1}s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            started.elapsed().as_secs_f64()
        );
    };

    let t = Instant::now();
    emit(
        1,
        "kernel first-order gap rate",
        t,
        kernel_rates(GapOrder::First),
    );
    let t = Instant::now();
    emit(
        2,
        "kernel second-order gap rate",
        t,
        kernel_rates(GapOrder::Second),
    );
    let t = Instant::now();
    emit(3, "Gaussian-power constant", t, gaussian_cube());
    let t = Instant::now();
    emit(4, "w_p oracle equivalence", t, w_p_oracle());
    let t = Instant::now();
    emit(5, "Duhamel self-similarity", t, duhamel());
    let t = Instant::now();
    emit(6, "solution decay", t, decay());

    let t = Instant::now();
    let sub = report("p2.5");
    emit(
        7,
        "subcritical asymptotics (p=2.5)",
        t,
        Ok(limit_line(&sub, false)),
    );
    let t = Instant::now();
    let crit = report("p3");
    emit(
        8,
        "critical asymptotics (p=3)",
        t,
        Ok(limit_line(&crit, true)),
    );
    let t = Instant::now();
    let sup = report("p4");
    emit(
        9,
        "supercritical asymptotics (p=4)",
        t,
        Ok(limit_line(&sup, false)),
    );
    let t = Instant::now();
    let sub_c = report("p2.5-corollary");
    emit(
        10,
        "optimal-rate constants",
        t,
        Ok(constant_line(&[
            ("p=2.5", &sub_c),
            ("p=3", &crit),
            ("p=4", &sup),
        ])),
    );
    let t = Instant::now();
    emit(
        11,
        "structural suite",
        t,
        structural(&[("p2.5", &sub), ("p3", &crit), ("p4", &sup)]),
    );

    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        eprintln!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
