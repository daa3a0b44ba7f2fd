use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fwdiss_cli::{exit_code, load_config, run, Command};

#[derive(Parser)]
#[command(
    name = "fwdiss",
    version,
    about = "Dissipative Fornberg-Whitham simulation and verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    /// Key-value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the tolerance of the command's primary check.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Named parameter preset.
    #[arg(long, global = true)]
    preset: Option<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Heat-kernel approximation rates of the linear propagator.
    KernelVerify,
    /// Self-similar profile identities and the reduced integral formula.
    ProfileVerify,
    /// Integrate from Gaussian data and store the trajectory.
    Simulate,
    /// Simulate, then check the asymptotic profile for each q.
    TheoremVerify,
    /// Re-run the checks on a stored trajectory.
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = match cli.command {
        Sub::KernelVerify => Command::KernelVerify,
        Sub::ProfileVerify => Command::ProfileVerify,
        Sub::Simulate => Command::Simulate,
        Sub::TheoremVerify => Command::TheoremVerify,
        Sub::Report => Command::Report,
    };
    let result = load_config(
        cmd,
        cli.config.as_deref(),
        cli.preset.as_deref(),
        cli.tolerance,
        &cli.out,
    )
    .and_then(|cfg| run(cmd, &cfg, &cli.out));
    match &result {
        Ok(o) => {
            for line in &o.lines {
                println!("{line}");
            }
            if !o.passed() {
                eprintln!("failed checks: {}", o.failures.join(", "));
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
