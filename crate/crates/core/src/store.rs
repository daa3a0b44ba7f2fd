//! Trajectory directories.
//!
//! ```text
//! <dir>/config.txt        solve configuration (key-value)
//! <dir>/result.txt        accumulated nonlinear mass
//! <dir>/diagnostics.csv   t,mass,l2,linf,calM_partial
//! <dir>/snapshots/NNNN.fws
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Frame, Grid, Params};
use crate::kv::{join_list, KeyValues};
use crate::snapshot::Snapshot;
use crate::solver::{Diagnostic, SolveConfig, Trajectory};

/// Writes `params.*` keys.
pub fn params_to_kv(params: &Params, kv: &mut KeyValues) {
    kv.set("params.p", params.p);
    kv.set("params.big_b", params.big_b);
    kv.set("params.b", params.b);
    kv.set("params.mu", params.mu);
}

pub fn params_from_kv(kv: &KeyValues) -> Result<Params> {
    Params::new(
        kv.require("params.p")?,
        kv.require("params.big_b")?,
        kv.require("params.b")?,
        kv.require("params.mu")?,
    )
    .map_err(|e| Error::Config(e.to_string()))
}

pub fn grid_to_kv(grid: &Grid, kv: &mut KeyValues) {
    kv.set("grid.half_length", grid.half_length());
    kv.set("grid.n", grid.len());
    kv.set("grid.frame", grid.frame());
}

pub fn grid_from_kv(kv: &KeyValues) -> Result<Grid> {
    let frame: Frame = kv.require("grid.frame")?;
    Grid::new(
        kv.require("grid.half_length")?,
        kv.require("grid.n")?,
        frame,
    )
    .map_err(|e| Error::Config(e.to_string()))
}

pub fn solve_config_to_kv(cfg: &SolveConfig) -> KeyValues {
    let mut kv = KeyValues::new();
    params_to_kv(&cfg.params, &mut kv);
    grid_to_kv(&cfg.grid, &mut kv);
    kv.set("solve.t_end", cfg.t_end);
    kv.set("solve.dt", cfg.dt);
    kv.set("solve.dealias", cfg.dealias);
    kv.set("solve.snapshot_times", join_list(&cfg.snapshot_times));
    kv.set("solve.accumulate_calm", cfg.accumulate_calm);
    kv
}

pub fn solve_config_from_kv(kv: &KeyValues) -> Result<SolveConfig> {
    let cfg = SolveConfig {
        params: params_from_kv(kv)?,
        grid: grid_from_kv(kv)?,
        t_end: kv.require("solve.t_end")?,
        dt: kv.require("solve.dt")?,
        dealias: kv.require("solve.dealias")?,
        snapshot_times: kv.get_list("solve.snapshot_times")?.unwrap_or_default(),
        accumulate_calm: kv.require("solve.accumulate_calm")?,
        linear_only: false,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `diagnostics.csv` text.
pub fn parse_diagnostics(text: &str) -> Result<Vec<Diagnostic>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == Diagnostic::CSV_HEADER => {}
        _ => {
            return Err(Error::Format(format!(
                "diagnostics must start with '{}'",
                Diagnostic::CSV_HEADER
            )))
        }
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(Diagnostic::from_csv)
        .collect()
}

pub fn render_diagnostics(rows: &[Diagnostic]) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str(Diagnostic::CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

/// Persists `traj` under `dir` (created if missing).
pub fn write_trajectory(dir: &Path, traj: &Trajectory) -> Result<()> {
    let snap_dir = dir.join("snapshots");
    fs::create_dir_all(&snap_dir)?;
    fs::write(
        dir.join("config.txt"),
        solve_config_to_kv(&traj.config).to_string(),
    )?;
    let mut result = KeyValues::new();
    result.set("result.calm_partial", traj.calm_partial);
    if let Some(tail) = traj.calm_tail {
        result.set("result.calm_tail", tail);
    }
    result.set("result.snapshots", traj.snapshots.len());
    fs::write(dir.join("result.txt"), result.to_string())?;
    fs::write(
        dir.join("diagnostics.csv"),
        render_diagnostics(&traj.diagnostics),
    )?;
    for (i, s) in traj.snapshots.iter().enumerate() {
        s.write(snap_dir.join(format!("{i:04}.fws")))?;
    }
    Ok(())
}

/// Reads a directory written by [`write_trajectory`].
pub fn read_trajectory(dir: &Path) -> Result<Trajectory> {
    let config = solve_config_from_kv(&KeyValues::parse(&fs::read_to_string(
        dir.join("config.txt"),
    )?)?)?;
    let result = KeyValues::parse(&fs::read_to_string(dir.join("result.txt"))?)?;
    let count: usize = result.require("result.snapshots")?;
    let diagnostics = parse_diagnostics(&fs::read_to_string(dir.join("diagnostics.csv"))?)?;
    let snapshots = (0..count)
        .map(|i| Snapshot::read(dir.join("snapshots").join(format!("{i:04}.fws"))))
        .collect::<Result<Vec<_>>>()?;
    if snapshots.windows(2).any(|w| w[0].t >= w[1].t) {
        return Err(Error::Format("snapshot times are not increasing".into()));
    }
    if snapshots.iter().any(|s| *s.field.grid() != config.grid) {
        return Err(Error::Format(
            "snapshot grid differs from the configured grid".into(),
        ));
    }
    let history = diagnostics.iter().map(|d| (d.t, f64::NAN)).collect();
    Ok(Trajectory {
        config,
        snapshots,
        calm_partial: result.require("result.calm_partial")?,
        calm_tail: result.get_parsed("result.calm_tail")?,
        diagnostics,
        nonlinear_mass_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::integrate;

    #[test]
    fn diagnostics_round_trip() {
        let rows = vec![
            Diagnostic {
                t: 0.0,
                mass: 0.05,
                l2: 1.0 / 3.0,
                linf: 1e-300,
                calm_partial: -2.5e-7,
            },
            Diagnostic {
                t: 0.125,
                mass: 0.05,
                l2: 0.3,
                linf: 0.2,
                calm_partial: 0.0,
            },
        ];
        assert_eq!(parse_diagnostics(&render_diagnostics(&rows)).unwrap(), rows);
        assert!(parse_diagnostics("t,mass\n").is_err());
        assert!(parse_diagnostics(&format!("{}\n1,2,3\n", Diagnostic::CSV_HEADER)).is_err());
    }

    #[test]
    fn trajectory_directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid::new(30.0, 256, Frame::Comoving).unwrap();
        let params = Params::new(4.0, 1.0, 1.0, 1.0).unwrap();
        let u0 = grid.sample(|x| 0.2 * (-x * x / 4.0).exp());
        let mut cfg = SolveConfig::new(params, grid, 2.0, 0.1);
        cfg.snapshot_times = vec![0.0, 0.5, 2.0];
        cfg.accumulate_calm = true;
        let traj = integrate(&u0, &cfg).unwrap();
        write_trajectory(dir.path(), &traj).unwrap();
        let back = read_trajectory(dir.path()).unwrap();
        assert_eq!(back.config, traj.config);
        assert_eq!(back.snapshots, traj.snapshots);
        assert_eq!(back.diagnostics, traj.diagnostics);
        assert_eq!(back.calm_partial, traj.calm_partial);
        assert_eq!(back.calm_tail, traj.calm_tail);
    }

    #[test]
    fn missing_key_is_config_error() {
        let kv = KeyValues::parse("params.p = 3\nparams.big_b = 1\nparams.b = 1").unwrap();
        assert!(matches!(params_from_kv(&kv), Err(Error::Config(_))));
    }
}
