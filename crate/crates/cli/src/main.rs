use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use susy_cli::{config::ScenarioConfig, output, runner, CliError};
use susy_core::systems::SystemKind;

#[derive(Parser)]
#[command(name = "susy", about = "Supersymmetric partner Hamiltonians: spectra, ladders and integrals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write its report files.
    Run { config: PathBuf },
    /// List the available systems.
    List,
    /// Print the spectrum of a system as CSV.
    Spectrum {
        #[arg(long)]
        system: String,
        #[arg(long)]
        levels: Option<usize>,
        /// Base config; the flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        a0: Option<f64>,
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long = "alpha-p4", allow_negative_numbers = true)]
        alpha_p4: Option<f64>,
        #[arg(long = "beta-p4", allow_negative_numbers = true)]
        beta_p4: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        eps: Option<i8>,
    },
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::List => {
            print!("{}", susy_cli::list_scenarios());
            Ok(0)
        }
        Command::Run { config } => {
            let (report, code) = susy_cli::run_file(&config)?;
            for c in &report.checks {
                let tag = match c.pass {
                    Some(true) => "PASS",
                    Some(false) => "FAIL",
                    None => "----",
                };
                let m = c.measured.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into());
                println!("{tag} {} {m}", c.name);
            }
            println!("{} passed, {} failed", report.passed(), report.failed());
            Ok(code)
        }
        Command::Spectrum { system, levels, config, gamma, a0, omega, alpha_p4, beta_p4, eps } => {
            let kind = SystemKind::parse(&system)
                .ok_or_else(|| CliError::Config(format!("unknown system {system:?}")))?;
            let mut cfg = match config {
                Some(p) => susy_cli::load_config(&p)?,
                None => ScenarioConfig::for_system(kind),
            };
            cfg.system = kind;
            let p = &mut cfg.params;
            p.gamma = gamma.or(p.gamma);
            p.a0 = a0.or(p.a0);
            p.omega = omega.or(p.omega);
            p.alpha_p4 = alpha_p4.or(p.alpha_p4);
            p.beta_p4 = beta_p4.or(p.beta_p4);
            p.eps = eps.or(p.eps);
            if let Some(l) = levels {
                cfg.levels = l;
            }
            cfg.apply_env()?;
            print!("{}", output::spectrum_csv(&runner::spectrum(&cfg)?));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("susy: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
