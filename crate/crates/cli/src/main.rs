mod chain;
mod evolve;
mod fail;
mod linear;
mod opts;
mod reconstruct;
mod source;
mod stationary;

use std::path::Path;
use std::process::ExitCode;

use binormal::plot::SvgPlot;
use binormal::DerivScheme;
use clap::Parser;
use serde::Serialize;

use fail::{invalid, numerical, CliError};
use opts::{resolve, Cli, Command, Output};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Stationary(args) => {
            let common = args.common.clone();
            resolve("stationary", args, &common).and_then(|(a, o)| stationary::run(a, &o))
        }
        Command::Evolve(args) => {
            let common = args.common.clone();
            resolve("evolve", args, &common).and_then(|(a, o)| evolve::run(a, &o))
        }
        Command::Linear(args) => {
            let common = args.common.clone();
            resolve("linear", args, &common).and_then(|(a, o)| linear::run(a, &o))
        }
        Command::Chain(args) => {
            let common = args.common.clone();
            resolve("chain", args, &common).and_then(|(a, o)| chain::run(a, &o))
        }
        Command::Reconstruct(args) => {
            let common = args.common.clone();
            resolve("reconstruct", args, &common).and_then(|(a, o)| reconstruct::run(a, &o))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("binormal: {e}");
            e.exit_code()
        }
    }
}

impl Output {
    pub fn prepare(&self) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.dir)
            .map_err(|e| invalid(format!("cannot create output directory {}: {e}", self.dir.display())))
    }

    pub fn report<S: Serialize>(&self, report: &S) -> Result<(), CliError> {
        binormal::io::write_json(report, &self.dir.join("report.json")).map_err(CliError::from)
    }

    pub fn svg(&self, name: &str, plot: &SvgPlot) -> Result<(), CliError> {
        if self.plot {
            self.text(name, &plot.render())?;
        }
        Ok(())
    }

    pub fn text(&self, name: &str, text: &str) -> Result<(), CliError> {
        write_file(&self.dir.join(name), text.as_bytes())
    }

    /// Opens `name` for a CSV writer.
    pub fn create(&self, name: &str) -> Result<std::fs::File, CliError> {
        let path = self.dir.join(name);
        std::fs::File::create(&path).map_err(|e| numerical(format!("cannot write {}: {e}", path.display())))
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| numerical(format!("cannot write {}: {e}", path.display())))
}

pub fn parse_scheme(text: Option<&str>) -> Result<DerivScheme, CliError> {
    Ok(text.unwrap_or("fd4").parse()?)
}

/// Rejects non-finite or non-positive values of a named option.
pub fn positive(name: &str, x: f64) -> Result<f64, CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(format!("--{name} must be positive, got {x}")))
    }
}
