use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fwdiss::kv::KeyValues;
use fwdiss::snapshot::{ProfileTag, Snapshot};
use fwdiss_cli::RunConfig;

const SMALL: &str = "\
grid.half_length = 32
grid.n = 256
solve.t_end = 20
solve.snapshot_count = 12
solve.snapshot_start = 10
";

fn fwdiss(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fwdiss"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.txt");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn kernel_verify_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "grid.half_length = 128\ngrid.n = 2048\nkernel.t_min = 2\nkernel.t_max = 20\nkernel.samples = 10\nkernel.tolerance = 1\n",
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let out = fwdiss(&["kernel-verify", "--config", &cfg], &a);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    fwdiss(&["kernel-verify", "--config", &cfg], &b);
    for f in ["kernel_gaps.csv", "kernel_report.txt", "manifest.txt"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let csv = fs::read_to_string(a.join("kernel_gaps.csv")).unwrap();
    // 2 orders x 2 l x 2 q x 10 samples, plus header
    assert_eq!(csv.lines().count(), 81);
}

#[test]
fn degenerate_window_is_insufficient_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "kernel.samples = 1\n");
    let out = fwdiss(&["kernel-verify", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("insufficient data"));
}

#[test]
fn tolerance_flag_can_fail_a_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = fwdiss(&["profile-verify", "--tolerance", "1e-30"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL w_p p=2.5 x=0.5"), "{stdout}");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("w_p p=2.5 x=0.5"));
}

#[test]
fn profile_verify_dumps_tagged_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = fwdiss(&["profile-verify"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let snap = Snapshot::read(dir.path().join("w_p_2.5.fws")).unwrap();
    assert_eq!(snap.profile, Some(ProfileTag::SelfSimilar));
}

#[test]
fn config_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "params.q = 3\n");
    assert_eq!(
        fwdiss(&["simulate", "--config", &cfg], dir.path())
            .status
            .code(),
        Some(3)
    );
    let cfg = write_config(dir.path(), "params.p = 1.5\n");
    assert_eq!(
        fwdiss(&["simulate", "--config", &cfg], dir.path())
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        fwdiss(&["simulate", "--preset", "nope"], dir.path())
            .status
            .code(),
        Some(3)
    );
    let cfg = write_config(dir.path(), "garbage line\n");
    assert_eq!(
        fwdiss(&["simulate", "--config", &cfg], dir.path())
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn blow_up_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("{SMALL}params.p = 4\ninitial.amplitude = 200\nsolve.dt = 2\n"),
    );
    let out = fwdiss(&["simulate", "--config", &cfg], dir.path());
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let manifest =
        KeyValues::parse(&fs::read_to_string(dir.path().join("manifest.txt")).unwrap()).unwrap();
    assert!(manifest.get("result.error").unwrap().contains("stability"));
}

#[test]
fn theorem_verify_then_report_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("{SMALL}solve.dt = 0.1\nparams.p = 4\n"),
    );
    let out = fwdiss(&["theorem-verify", "--config", &cfg], dir.path());
    let code = out.status.code().unwrap();
    assert!(
        code == 0 || code == 2,
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in [
        "report.txt",
        "report.csv",
        "profile_t_end.fws",
        "residual_t_end.fws",
        "trajectory/config.txt",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let first = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    let kv = KeyValues::parse(&manifest).unwrap();
    assert!(kv.get("result.nonlinear_mass").is_some());
    assert_eq!(kv.get("run.command"), Some("theorem-verify"));

    // the manifest is itself a valid config for the same run
    assert_eq!(
        RunConfig::from_kv(&kv).unwrap(),
        RunConfig::resolve(
            None,
            Some(&KeyValues::parse(&fs::read_to_string(&cfg).unwrap()).unwrap())
        )
        .unwrap()
    );

    let again = fwdiss(&["report"], dir.path());
    assert_eq!(again.status.code(), Some(code));
    assert_eq!(
        fs::read_to_string(dir.path().join("report.txt")).unwrap(),
        first
    );
    let snap = Snapshot::read(dir.path().join("residual_t_end.fws")).unwrap();
    assert_eq!(snap.profile, Some(ProfileTag::Residual));
    assert_eq!(snap.t, 20.0);
}

#[test]
fn report_without_trajectory_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fwdiss(&["report"], dir.path()).status.code(), Some(1));
}
