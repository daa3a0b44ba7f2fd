//! Run configuration: defaults, presets and the flat key-value file format.

use fwdiss::kernel::{format_q, parse_q, GapOrder};
use fwdiss::kv::{join_list, KeyValues};
use fwdiss::store::{grid_from_kv, grid_to_kv, params_from_kv, params_to_kv};
use fwdiss::{Error, Frame, Grid, Params, Result};

/// Sections a manifest may carry that are not configuration.
const PASSIVE_SECTIONS: [&str; 2] = ["run.", "result."];

#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    /// Mass `M` of the Gaussian `M·G(·, width_time)`.
    pub amplitude: f64,
    pub width_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveSettings {
    pub t_end: f64,
    pub dt: f64,
    pub dealias: f64,
    /// Log-spaced snapshots on `[snapshot_start, t_end]` (plus `t = 0`).
    pub snapshot_count: usize,
    pub snapshot_start: f64,
    /// Halve the amplitude and retry after a stability error.
    pub auto_halve: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSettings {
    pub q_list: Vec<f64>,
    pub tolerance: f64,
    pub fraction: Option<f64>,
    pub check_limit: bool,
    pub check_constant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSettings {
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    pub l_list: Vec<u32>,
    pub q_list: Vec<f64>,
    pub orders: Vec<GapOrder>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSettings {
    pub p_list: Vec<f64>,
    pub x_list: Vec<f64>,
    /// Lower `s` cutoff used to compare the two routes when `p >= 3`.
    pub s_min: f64,
    pub tolerance: f64,
    pub power_taus: Vec<f64>,
    pub power_tolerance: f64,
    pub selfsim_p: f64,
    pub selfsim_mass: f64,
    pub selfsim_times: Vec<f64>,
    pub selfsim_tolerance: f64,
    pub half_length: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: String,
    pub params: Params,
    pub grid: Grid,
    pub initial: InitialData,
    pub solve: SolveSettings,
    pub analysis: AnalysisSettings,
    pub kernel: KernelSettings,
    pub profile: ProfileSettings,
}

pub const PRESETS: [&str; 7] = [
    "default",
    "kernel",
    "decay",
    "p2.5",
    "p2.5-corollary",
    "p3",
    "p4",
];

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            preset: "default".into(),
            params: Params::new(3.0, 1.0, 1.0, 1.0).expect("valid"),
            grid: Grid::new(256.0, 4096, Frame::Comoving).expect("valid"),
            initial: InitialData {
                amplitude: 0.05,
                width_time: 1.0,
            },
            solve: SolveSettings {
                t_end: 500.0,
                dt: 0.05,
                dealias: 2.0 / 3.0,
                snapshot_count: 41,
                snapshot_start: 5.0,
                auto_halve: false,
            },
            analysis: AnalysisSettings {
                q_list: vec![2.0, f64::INFINITY],
                tolerance: 0.2,
                fraction: None,
                check_limit: true,
                check_constant: true,
            },
            kernel: KernelSettings {
                t_min: 10.0,
                t_max: 1000.0,
                samples: 30,
                l_list: vec![0, 1],
                q_list: vec![2.0, f64::INFINITY],
                orders: vec![GapOrder::First, GapOrder::Second],
                tolerance: 0.05,
            },
            profile: ProfileSettings {
                p_list: vec![2.5, 3.0, 4.0],
                x_list: vec![0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0],
                s_min: 1e-3,
                tolerance: 1e-7,
                power_taus: vec![0.5, 1.0, 2.0],
                power_tolerance: 1e-10,
                selfsim_p: 2.5,
                selfsim_mass: 1.0,
                selfsim_times: vec![1.0, 4.0, 16.0],
                selfsim_tolerance: 1e-4,
                half_length: 60.0,
                n: 8192,
            },
        }
    }
}

/// Overrides each preset applies on top of [`RunConfig::default`].
fn preset_overlay(name: &str) -> Result<&'static str> {
    Ok(match name {
        "default" => "",
        // mu = B = b = 1 is pre-asymptotic on [10, 1e3]
        "kernel" => "params.big_b = 8\nparams.b = 4\ngrid.half_length = 512\ngrid.n = 8192\n",
        "decay" => "grid.n = 16384\n",
        "p2.5" => "params.p = 2.5\nparams.big_b = 0.001\ninitial.amplitude = 0.5\n",
        "p2.5-corollary" => {
            "params.p = 2.5\nparams.big_b = 0.001\ninitial.amplitude = 0.5\n\
             initial.width_time = 0.1\ngrid.n = 8192\nanalysis.checks = constant\n"
        }
        "p3" => "params.big_b = 0.001\ninitial.amplitude = 1\ninitial.width_time = 2\n",
        "p4" => "params.p = 4\n",
        other => {
            return Err(Error::Config(format!(
                "unknown preset '{other}' (known: {})",
                PRESETS.join(", ")
            )))
        }
    })
}

fn parse_q_list(kv: &KeyValues, key: &str) -> Result<Option<Vec<f64>>> {
    match kv.get_list::<String>(key)? {
        None => Ok(None),
        Some(items) => items
            .iter()
            .map(|s| parse_q(s))
            .collect::<Result<_>>()
            .map(Some),
    }
}

fn q_list_text(qs: &[f64]) -> String {
    qs.iter()
        .map(|&q| format_q(q))
        .collect::<Vec<_>>()
        .join(",")
}

impl RunConfig {
    /// Defaults, then the preset, then `overlay`.
    pub fn resolve(preset: Option<&str>, overlay: Option<&KeyValues>) -> Result<Self> {
        let mut kv = RunConfig::default().to_kv();
        let file_preset = overlay.and_then(|o| o.get("run.preset"));
        let name = preset.or(file_preset).unwrap_or("default");
        kv.merge(&KeyValues::parse(preset_overlay(name)?)?);
        kv.set("run.preset", name);
        if let Some(o) = overlay {
            for (k, v) in o.iter() {
                if k != "run.preset" {
                    kv.set(k, v);
                }
            }
        }
        RunConfig::from_kv(&kv)
    }

    /// Every key must be known; `run.*` and `result.*` are ignored except
    /// `run.preset`.
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let known = RunConfig::default().to_kv();
        for key in kv.keys() {
            let passive = PASSIVE_SECTIONS.iter().any(|s| key.starts_with(s));
            if !passive && known.get(key).is_none() && key != "analysis.fraction" {
                return Err(Error::Config(format!("unknown configuration key '{key}'")));
            }
        }
        let mut full = known;
        full.merge(kv);
        let kv = &full;
        let checks: Vec<String> = kv.get_list("analysis.checks")?.unwrap_or_default();
        if let Some(bad) = checks.iter().find(|c| *c != "limit" && *c != "constant") {
            return Err(Error::Config(format!("unknown analysis check '{bad}'")));
        }
        let orders = kv
            .get_list::<u8>("kernel.orders")?
            .unwrap_or_default()
            .into_iter()
            .map(GapOrder::from_u8)
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Config(e.to_string()))?;
        let cfg = RunConfig {
            preset: kv.get("run.preset").unwrap_or("default").to_string(),
            params: params_from_kv(kv)?,
            grid: grid_from_kv(kv)?,
            initial: InitialData {
                amplitude: kv.require("initial.amplitude")?,
                width_time: kv.require("initial.width_time")?,
            },
            solve: SolveSettings {
                t_end: kv.require("solve.t_end")?,
                dt: kv.require("solve.dt")?,
                dealias: kv.require("solve.dealias")?,
                snapshot_count: kv.require("solve.snapshot_count")?,
                snapshot_start: kv.require("solve.snapshot_start")?,
                auto_halve: kv.require("solve.auto_halve")?,
            },
            analysis: AnalysisSettings {
                q_list: parse_q_list(kv, "analysis.q_list")?.unwrap_or_default(),
                tolerance: kv.require("analysis.tolerance")?,
                fraction: kv.get_parsed("analysis.fraction")?,
                check_limit: checks.iter().any(|c| c == "limit"),
                check_constant: checks.iter().any(|c| c == "constant"),
            },
            kernel: KernelSettings {
                t_min: kv.require("kernel.t_min")?,
                t_max: kv.require("kernel.t_max")?,
                samples: kv.require("kernel.samples")?,
                l_list: kv.get_list("kernel.l_list")?.unwrap_or_default(),
                q_list: parse_q_list(kv, "kernel.q_list")?.unwrap_or_default(),
                orders,
                tolerance: kv.require("kernel.tolerance")?,
            },
            profile: ProfileSettings {
                p_list: kv.get_list("profile.p_list")?.unwrap_or_default(),
                x_list: kv.get_list("profile.x_list")?.unwrap_or_default(),
                s_min: kv.require("profile.s_min")?,
                tolerance: kv.require("profile.tolerance")?,
                power_taus: kv.get_list("profile.power_taus")?.unwrap_or_default(),
                power_tolerance: kv.require("profile.power_tolerance")?,
                selfsim_p: kv.require("profile.selfsim_p")?,
                selfsim_mass: kv.require("profile.selfsim_mass")?,
                selfsim_times: kv.get_list("profile.selfsim_times")?.unwrap_or_default(),
                selfsim_tolerance: kv.require("profile.selfsim_tolerance")?,
                half_length: kv.require("profile.half_length")?,
                n: kv.require("profile.n")?,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_kv(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        kv.set("run.preset", &self.preset);
        params_to_kv(&self.params, &mut kv);
        grid_to_kv(&self.grid, &mut kv);
        kv.set("initial.amplitude", self.initial.amplitude);
        kv.set("initial.width_time", self.initial.width_time);
        let s = &self.solve;
        kv.set("solve.t_end", s.t_end);
        kv.set("solve.dt", s.dt);
        kv.set("solve.dealias", s.dealias);
        kv.set("solve.snapshot_count", s.snapshot_count);
        kv.set("solve.snapshot_start", s.snapshot_start);
        kv.set("solve.auto_halve", s.auto_halve);
        let a = &self.analysis;
        kv.set("analysis.q_list", q_list_text(&a.q_list));
        kv.set("analysis.tolerance", a.tolerance);
        if let Some(f) = a.fraction {
            kv.set("analysis.fraction", f);
        }
        let mut checks = Vec::new();
        if a.check_limit {
            checks.push("limit");
        }
        if a.check_constant {
            checks.push("constant");
        }
        kv.set("analysis.checks", checks.join(","));
        let k = &self.kernel;
        kv.set("kernel.t_min", k.t_min);
        kv.set("kernel.t_max", k.t_max);
        kv.set("kernel.samples", k.samples);
        kv.set("kernel.l_list", join_list(&k.l_list));
        kv.set("kernel.q_list", q_list_text(&k.q_list));
        let orders: Vec<u8> = k.orders.iter().map(|o| o.as_u8()).collect();
        kv.set("kernel.orders", join_list(&orders));
        kv.set("kernel.tolerance", k.tolerance);
        let p = &self.profile;
        kv.set("profile.p_list", join_list(&p.p_list));
        kv.set("profile.x_list", join_list(&p.x_list));
        kv.set("profile.s_min", p.s_min);
        kv.set("profile.tolerance", p.tolerance);
        kv.set("profile.power_taus", join_list(&p.power_taus));
        kv.set("profile.power_tolerance", p.power_tolerance);
        kv.set("profile.selfsim_p", p.selfsim_p);
        kv.set("profile.selfsim_mass", p.selfsim_mass);
        kv.set("profile.selfsim_times", join_list(&p.selfsim_times));
        kv.set("profile.selfsim_tolerance", p.selfsim_tolerance);
        kv.set("profile.half_length", p.half_length);
        kv.set("profile.n", p.n);
        kv
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        self.params
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if !(self.initial.amplitude.is_finite() && self.initial.width_time > 0.0) {
            return bad("initial data need a finite amplitude and width_time > 0".into());
        }
        let s = &self.solve;
        if !(s.t_end > 0.0 && s.dt > 0.0 && s.dt <= s.t_end) {
            return bad(format!(
                "need 0 < dt <= t_end, got dt = {}, t_end = {}",
                s.dt, s.t_end
            ));
        }
        if !(s.dealias > 0.5 && s.dealias <= 1.0) {
            return bad(format!("dealias must lie in (0.5, 1], got {}", s.dealias));
        }
        if s.snapshot_count < 2 || !(s.snapshot_start > 0.0 && s.snapshot_start < s.t_end) {
            return bad("need >= 2 snapshots starting inside (0, t_end)".into());
        }
        let a = &self.analysis;
        if a.q_list.is_empty() || !(a.tolerance > 0.0) {
            return bad("analysis needs a q list and a positive tolerance".into());
        }
        if a.fraction.is_some_and(|f| !(f > 0.0 && f <= 1.0)) {
            return bad("analysis.fraction must lie in (0, 1]".into());
        }
        let k = &self.kernel;
        if !(k.t_min > 0.0 && k.t_min <= k.t_max)
            || k.samples == 0
            || k.l_list.is_empty()
            || k.q_list.is_empty()
            || k.orders.is_empty()
            || !(k.tolerance > 0.0)
        {
            return bad(
                "kernel settings need 0 < t_min <= t_max, samples, l/q/order lists and a tolerance"
                    .into(),
            );
        }
        let p = &self.profile;
        if p.p_list.iter().any(|&v| !(v > 2.0)) || !(p.selfsim_p > 2.0) {
            return bad("profile exponents must exceed 2".into());
        }
        if !(p.s_min > 0.0 && p.s_min < 1.0) || p.selfsim_times.iter().any(|&t| !(t > 0.0)) {
            return bad(
                "profile.s_min must lie in (0, 1) and self-similarity times be positive".into(),
            );
        }
        if p.power_taus.iter().any(|&t| !(t > 0.0)) {
            return bad("gaussian-power times must be positive".into());
        }
        Grid::new(p.half_length, p.n, Frame::Comoving).map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    /// `0` followed by `snapshot_count` log-spaced times ending at `t_end`.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let s = &self.solve;
        let n = s.snapshot_count;
        let ratio = s.t_end / s.snapshot_start;
        let mut times = vec![0.0];
        times.extend((0..n).map(|i| {
            if i + 1 == n {
                s.t_end
            } else {
                s.snapshot_start * ratio.powf(i as f64 / (n - 1) as f64)
            }
        }));
        times
    }

    /// Log-spaced kernel sample times.
    pub fn kernel_times(&self) -> Vec<f64> {
        let k = &self.kernel;
        if k.samples == 1 {
            return vec![k.t_min];
        }
        let ratio = k.t_max / k.t_min;
        (0..k.samples)
            .map(|i| k.t_min * ratio.powf(i as f64 / (k.samples - 1) as f64))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_kv(&cfg.to_kv()).unwrap(), cfg);
    }

    #[test]
    fn every_preset_resolves_and_round_trips() {
        for name in PRESETS {
            let cfg = RunConfig::resolve(Some(name), None).unwrap();
            assert_eq!(cfg.preset, name);
            let text = cfg.to_kv().to_string();
            let back = RunConfig::resolve(None, Some(&KeyValues::parse(&text).unwrap())).unwrap();
            assert_eq!(back, cfg, "{name}");
        }
    }

    #[test]
    fn overlay_beats_preset() {
        let kv = KeyValues::parse("params.mu = 0.5\nsolve.dt = 0.01").unwrap();
        let cfg = RunConfig::resolve(Some("p4"), Some(&kv)).unwrap();
        assert_eq!(cfg.params.p, 4.0);
        assert_eq!(cfg.params.mu, 0.5);
        assert_eq!(cfg.solve.dt, 0.01);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        let kv = KeyValues::parse("params.pp = 3").unwrap();
        assert!(matches!(
            RunConfig::resolve(None, Some(&kv)),
            Err(Error::Config(_))
        ));
        let kv = KeyValues::parse("grid.n = 1000").unwrap();
        assert!(matches!(
            RunConfig::resolve(None, Some(&kv)),
            Err(Error::Config(_))
        ));
        let kv = KeyValues::parse("params.p = 2").unwrap();
        assert!(matches!(
            RunConfig::resolve(None, Some(&kv)),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RunConfig::resolve(Some("nope"), None),
            Err(Error::Config(_))
        ));
        let kv = KeyValues::parse("analysis.checks = limit,vibes").unwrap();
        assert!(RunConfig::resolve(None, Some(&kv)).is_err());
    }

    #[test]
    fn manifest_sections_are_ignored() {
        let kv = KeyValues::parse("result.mass = 0.05\nrun.command = simulate").unwrap();
        assert!(RunConfig::resolve(None, Some(&kv)).is_ok());
    }

    #[test]
    fn snapshot_schedule() {
        let cfg = RunConfig::default();
        let t = cfg.snapshot_times();
        assert_eq!(t.len(), 42);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[1], 5.0);
        assert_eq!(*t.last().unwrap(), 500.0);
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        let k = RunConfig::resolve(Some("kernel"), None)
            .unwrap()
            .kernel_times();
        assert_eq!(k.len(), 30);
        assert!((k[29] - 1000.0).abs() < 1e-9);
    }
}
