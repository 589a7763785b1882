//! Command-line and config-file options.
//!
//! Every option is optional at parse time. Precedence is flag, then the
//! subcommand's table in the `--config` TOML file, then the built-in default.
//! The output directory may also come from `BINORMAL_OUT`, which ranks below
//! the flag and above the config file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::fail::{invalid, CliError};

#[derive(Debug, Parser)]
#[command(name = "binormal", version, about = "Experiments with the binormal torsion flow X_t = tau^{-1/2} B")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stationary torsion profiles and their residuals.
    Stationary(Stationary),
    /// Time evolution of the torsion equation.
    Evolve(Evolve),
    /// Linearized flow about a helix: exact multiplier vs finite differences.
    Linear(Linear),
    /// Refinement study of the substitution chain.
    Chain(Chain),
    /// Curve reconstruction from (kappa, tau).
    Reconstruct(Reconstruct),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Output directory.
    #[arg(long, env = "BINORMAL_OUT")]
    pub out: Option<PathBuf>,
    /// TOML file whose [<subcommand>] table supplies defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Skip SVG output.
    #[arg(long)]
    pub no_plot: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Stationary {
    /// Integration constant A.
    #[arg(long = "A", allow_hyphen_values = true)]
    #[serde(rename = "A")]
    pub a: Option<f64>,
    /// Integration constant C.
    #[arg(long = "C", allow_hyphen_values = true)]
    #[serde(rename = "C")]
    pub c: Option<f64>,
    /// Phase shift k.
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    /// Branch sign: + or -.
    #[arg(long, allow_hyphen_values = true)]
    pub branch: Option<String>,
    /// Grid points.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<usize>,
    /// Number of profile periods on the grid.
    #[arg(long)]
    pub periods: Option<usize>,
    /// Starting amplitude u(0) for A != 0 (default: lower turning point).
    #[arg(long)]
    pub u0: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Evolve {
    /// Initial data: constant:<c>, explicit:C=<c>[,k=<k>][,branch=-], or file:<csv>.
    #[arg(long, allow_hyphen_values = true)]
    pub init: Option<String>,
    /// Final time.
    #[arg(long = "t-end")]
    #[serde(rename = "t-end")]
    pub t_end: Option<f64>,
    /// Grid points (ignored for file input).
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<usize>,
    /// Domain length (default pi; ignored for file input).
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<f64>,
    /// Time-step safety factor sigma in dt = sigma h^3 / b.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Derivative scheme: fd2, fd4 or spectral.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Steps between snapshots.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Positivity floor.
    #[arg(long)]
    pub floor: Option<f64>,
    /// Constant curvature.
    #[arg(long)]
    pub kappa: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Linear {
    /// Background torsion of the helix.
    #[arg(long, allow_hyphen_values = true)]
    pub tau0: Option<f64>,
    /// Initial perturbation: mode:<k>, zero, or file:<csv>.
    #[arg(long)]
    pub init: Option<String>,
    /// Final time.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<usize>,
    /// Domain length (default 2 pi).
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub scheme: Option<String>,
    /// Points in the norm history.
    #[arg(long)]
    pub samples: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Chain {
    /// Coarsest grid of the refinement ladder.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<usize>,
    /// Manufactured profiles: smooth or constant.
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long)]
    pub scheme: Option<String>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Reconstruct {
    /// Torsion: constant:<c>, explicit:C=<c>[,k=<k>][,branch=-], file:<csv>,
    /// or snapshot:<trajectory dir or snapshot csv>.
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<String>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Arc length to integrate.
    #[arg(long)]
    pub span: Option<f64>,
    /// Output samples along the span.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// RK4 steps per output interval.
    #[arg(long)]
    pub substeps: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

/// Resolved output directory and plot toggle.
#[derive(Debug, Clone)]
pub struct Output {
    pub dir: PathBuf,
    pub plot: bool,
}

/// Options common to the config file table.
#[derive(Debug, Default, Deserialize)]
struct FileCommon {
    out: Option<PathBuf>,
    plot: Option<bool>,
}

/// Overlays `flags` on the `[name]` table of the config file.
pub fn resolve<T>(name: &str, flags: T, common: &Common) -> Result<(T, Output), CliError>
where
    T: Serialize + DeserializeOwned,
{
    let mut table = match &common.config {
        Some(path) => load_table(path, name)?,
        None => serde_json::Map::new(),
    };
    let file_common = FileCommon {
        out: table
            .remove("out")
            .map(|v| serde_json::from_value(v).map_err(|e| invalid(format!("config `out`: {e}"))))
            .transpose()?,
        plot: table
            .remove("plot")
            .map(|v| serde_json::from_value(v).map_err(|e| invalid(format!("config `plot`: {e}"))))
            .transpose()?,
    };
    let flag_values = match serde_json::to_value(&flags) {
        Ok(serde_json::Value::Object(map)) => map,
        _ => unreachable!("option structs serialize to maps"),
    };
    for (key, value) in flag_values {
        if !value.is_null() {
            table.insert(key, value);
        }
    }
    let merged: T = serde_json::from_value(serde_json::Value::Object(table))
        .map_err(|e| invalid(format!("config [{name}]: {e}")))?;
    let dir = common
        .out
        .clone()
        .or(file_common.out)
        .unwrap_or_else(|| PathBuf::from("binormal-out").join(name));
    let plot = !common.no_plot && file_common.plot.unwrap_or(true);
    Ok((merged, Output { dir, plot }))
}

fn load_table(path: &Path, name: &str) -> Result<serde_json::Map<String, serde_json::Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
    let doc: toml::Table =
        toml::from_str(&text).map_err(|e| invalid(format!("config {}: {e}", path.display())))?;
    match doc.get(name) {
        None => Ok(serde_json::Map::new()),
        Some(toml::Value::Table(t)) => match serde_json::to_value(t) {
            Ok(serde_json::Value::Object(map)) => Ok(map),
            _ => Err(invalid(format!("config [{name}] is not a table"))),
        },
        Some(_) => Err(invalid(format!("config `{name}` must be a table"))),
    }
}
