use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use tripod_cli::fit::{fit_table, read_profile_table, FitRequest};
use tripod_cli::scenario::{MediumSpec, Mode, Scenario};
use tripod_cli::sweep::{parse_set, sweep};
use tripod_cli::{execute, load_scenario, summary_lines, write_outcome, CliError};
use tripod_core::analytic::Family;
use tripod_core::units::{estimate, MediumParams, MW_PER_CM2};

#[derive(Parser)]
#[command(name = "tripod", version, about = "Adiabatic pulse propagation in tripod-level media")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Suppress the summary on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    /// Accepted for interface stability; every algorithm is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run { scenario: PathBuf },
    /// Run a scenario with both solvers and compare them (exit 4 above tolerance).
    Compare { scenario: PathBuf },
    /// Fit a slow or fast family to a profile table written by `run`.
    Fit {
        profile: PathBuf,
        #[arg(long)]
        family: Family,
        /// Initial superposition angle of the run that wrote the table.
        #[arg(long)]
        beta: f64,
        /// Slice to fit (default: last).
        #[arg(long)]
        zeta: Option<f64>,
        #[arg(long, requires = "w_hi")]
        w_lo: Option<f64>,
        #[arg(long, requires = "w_lo")]
        w_hi: Option<f64>,
    },
    /// Physical estimates from CGS medium parameters.
    Units {
        /// Dipole moment, esu cm.
        #[arg(long)]
        d: f64,
        /// Wave number, 1/cm.
        #[arg(long)]
        k: f64,
        /// Number density, 1/cm^3.
        #[arg(long)]
        n: f64,
        /// Total laser intensity, mW/cm^2.
        #[arg(long)]
        intensity: f64,
        /// Medium length, cm.
        #[arg(long)]
        length: f64,
    },
    /// Run a scenario over a grid of scalar parameters.
    Sweep {
        scenario: PathBuf,
        /// key=v1,v2,... (repeatable).
        #[arg(long = "set", required = true)]
        set: Vec<String>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

fn run_scenario(s: &Scenario, cli: &Cli) -> Result<(), CliError> {
    let t = Instant::now();
    let out = execute(s)?;
    write_outcome(&cli.out, &out)?;
    if !cli.quiet {
        for line in summary_lines(&out) {
            println!("{line}");
        }
        println!("wrote {} files to {}", out.artifacts.len(), cli.out.display());
        eprintln!("elapsed {:.2} s", t.elapsed().as_secs_f64());
    }
    match out.failure {
        Some(msg) => Err(CliError::Threshold(msg)),
        None => Ok(()),
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run { scenario } => run_scenario(&load_scenario(scenario)?, cli),
        Command::Compare { scenario } => {
            let mut s = load_scenario(scenario)?;
            if s.mode == Mode::Units {
                return Err(CliError::Input("units scenarios have nothing to compare".into()));
            }
            s.mode = Mode::Compare;
            s.check()?;
            run_scenario(&s, cli)
        }
        Command::Fit { profile, family, beta, zeta, w_lo, w_hi } => {
            let text = std::fs::read_to_string(profile).map_err(|e| CliError::io(profile.display(), e))?;
            let slices = read_profile_table(&text)?;
            let req = FitRequest { family: *family, beta: *beta, zeta: *zeta, range: w_lo.zip(*w_hi) };
            let out = fit_table(&slices, &req)?;
            println!("{}", serde_json::to_string_pretty(&out).expect("fit output is serializable"));
            Ok(())
        }
        Command::Units { d, k, n, intensity, length } => {
            let m = MediumSpec { d: *d, k: *k, n: *n, intensity: *intensity, length: *length };
            let ctx = |e| CliError::solver("units estimate", e);
            let p = MediumParams::new(m.d, m.k, m.n).map_err(ctx)?;
            let u = estimate(&p, m.intensity * MW_PER_CM2, m.length).map_err(ctx)?;
            println!("{}", serde_json::to_string_pretty(&u).expect("estimates are serializable"));
            Ok(())
        }
        Command::Sweep { scenario, set, workers } => {
            let s = load_scenario(scenario)?;
            let params = set.iter().map(|a| parse_set(a)).collect::<Result<Vec<_>, _>>()?;
            let report = sweep(&s, &params, *workers)?;
            std::fs::create_dir_all(&cli.out).map_err(|e| CliError::io(cli.out.display(), e))?;
            let path = cli.out.join(format!("{}.sweep.json", s.name));
            std::fs::write(&path, report.to_json()).map_err(|e| CliError::io(path.display(), e))?;
            if !cli.quiet {
                for c in &report.cells {
                    let params: Vec<String> = c.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    let status = c.error.as_deref().unwrap_or("ok");
                    println!("{} exit {}: {status}", params.join(" "), c.exit_code);
                }
                println!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
