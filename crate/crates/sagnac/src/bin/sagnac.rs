use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sagnac::commands::{run, Command, Context, Format};
use sagnac::config::LoadedConfig;

/// Spin-echo Sagnac/OAM pipeline: prediction, OAM decomposition,
/// simulation, calibration, fitting and reporting.
#[derive(Parser, Debug)]
#[command(name = "sagnac", version, about)]
struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory; overrides `output_dir` in the configuration.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Seed override for simulation.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Format of summary documents.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Spin-echo length, a2, c_OAM and the OAM slope for the instrument.
    Predict,
    /// OAM distributions and vortex-mode radial profiles of wave packets.
    Decompose,
    /// Seeded synthetic datasets for both polarities and a grating scan.
    Simulate,
    /// Spin-echo constant from a grating scan.
    Calibrate,
    /// Quadratic and wobble fits per polarity.
    Fit,
    /// Corrected coefficients, c_OAM, OAM slope and rotational sensitivity.
    Report,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let command = match cli.command {
        Cmd::Predict => Command::Predict,
        Cmd::Decompose => Command::Decompose,
        Cmd::Simulate => Command::Simulate,
        Cmd::Calibrate => Command::Calibrate,
        Cmd::Fit => Command::Fit,
        Cmd::Report => Command::Report,
    };
    let format = match cli.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    };
    let outcome = LoadedConfig::load(cli.config.as_deref())
        .and_then(|cfg| run(command, &Context::new(cfg, cli.out, cli.seed, format)));
    match outcome {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("sagnac: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
