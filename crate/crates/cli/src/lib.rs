//! Command-line front end: run configuration, presets and subcommands.

pub mod commands;
pub mod config;

pub use commands::{exit_code, run, Command, Outcome};
pub use config::RunConfig;

use std::fs;
use std::path::Path;

use fwdiss::kv::KeyValues;
use fwdiss::{Error, Result};

/// Builds the effective configuration for `cmd`.
///
/// Precedence, lowest first: defaults, preset, config file, `--tolerance`.
/// `report` without a config or preset reuses the manifest in `out`.
pub fn load_config(
    cmd: Command,
    config: Option<&Path>,
    preset: Option<&str>,
    tolerance: Option<f64>,
    out: &Path,
) -> Result<RunConfig> {
    let mut overlay = match config {
        Some(path) => Some(KeyValues::parse(&fs::read_to_string(path)?)?),
        None => None,
    };
    if overlay.is_none() && preset.is_none() && cmd == Command::Report {
        let manifest = out.join("manifest.txt");
        if manifest.exists() {
            overlay = Some(KeyValues::parse(&fs::read_to_string(manifest)?)?);
        }
    }
    let file_preset = overlay.as_ref().and_then(|o| o.get("run.preset"));
    let name = preset
        .or(file_preset)
        .unwrap_or(cmd.default_preset())
        .to_string();
    let mut cfg = RunConfig::resolve(Some(&name), overlay.as_ref())?;
    if let Some(tol) = tolerance {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::Config(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        match cmd {
            Command::KernelVerify => cfg.kernel.tolerance = tol,
            Command::ProfileVerify => cfg.profile.tolerance = tol,
            Command::TheoremVerify | Command::Report => cfg.analysis.tolerance = tol,
            Command::Simulate => {}
        }
    }
    cfg.validate()?;
    Ok(cfg)
}
