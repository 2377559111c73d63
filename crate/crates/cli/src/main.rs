//! `curvop`: geometry, effective operators, spin tensors, spectra and
//! closed-form verification for thin-layer quantum systems on surfaces.

mod commands;
mod config;
mod error;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{CommonArgs, RunConfig, SpectrumArgs};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "curvop", version, about = "Thin-layer geometry and effective operators on parametrized surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Curvatures, metrics, rescaled factor and geometric potential on a grid.
    Geometry(CommonArgs),
    /// Normal-ordered effective operators as coefficient grids.
    Operators(CommonArgs),
    /// Curvilinear Pauli matrices and reduced spin-orbit tensors.
    Tensors(CommonArgs),
    /// Low-lying spectrum on a surface of revolution.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        spectrum: SpectrumArgs,
    },
    /// Compare the pipeline against the cone's closed forms.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Relative tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<Vec<std::path::PathBuf>, CliError> {
    let none = SpectrumArgs::default();
    match &cli.command {
        Command::Geometry(c) => commands::geometry(&RunConfig::resolve(c, &none, None)?),
        Command::Operators(c) => {
            commands::operators(&RunConfig::resolve(c, &none, None)?, &mut |w| eprintln!("curvop: warning: {w}"))
        }
        Command::Tensors(c) => commands::tensors(&RunConfig::resolve(c, &none, None)?),
        Command::Spectrum { common, spectrum } => commands::spectrum(&RunConfig::resolve(common, spectrum, None)?),
        Command::Verify { common, tol } => commands::verify(&RunConfig::resolve(common, &none, *tol)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let mut lines = text.lines();
            let first = lines.next().unwrap_or_default().trim_start_matches("error: ");
            eprintln!("{}", CliError::config(first));
            for line in lines {
                eprintln!("{line}");
            }
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.category.exit_code() as u8)
        }
    }
}
