//! Torsion specifications such as `constant:1` or `explicit:C=3,k=0.2,branch=-`.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use binormal::io::load_field;
use binormal::{Branch, Field64, Grid, Torsion};
use serde::Serialize;

use crate::fail::{input, invalid, CliError};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TorsionSpec {
    Constant { value: f64 },
    Explicit { c: f64, k: f64, branch: Branch },
    File { path: PathBuf },
    /// A trajectory directory (last snapshot) or a single snapshot CSV.
    Snapshot { path: PathBuf },
}

impl FromStr for TorsionSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        match kind {
            "constant" => Ok(TorsionSpec::Constant {
                value: number("constant", rest)?,
            }),
            "explicit" => {
                let (mut c, mut k, mut branch) = (None, 0.0, Branch::Plus);
                for item in rest.split(',').filter(|x| !x.is_empty()) {
                    let (key, val) = item
                        .split_once('=')
                        .ok_or_else(|| invalid(format!("expected key=value in `{item}`")))?;
                    match key.trim() {
                        "C" | "c" => c = Some(number("C", val)?),
                        "k" => k = number("k", val)?,
                        "branch" => branch = val.trim().parse().map_err(CliError::from)?,
                        other => return Err(invalid(format!("unknown explicit parameter `{other}`"))),
                    }
                }
                let c = c.ok_or_else(|| invalid("explicit profile needs C, e.g. explicit:C=3"))?;
                Ok(TorsionSpec::Explicit { c, k, branch })
            }
            "file" if !rest.is_empty() => Ok(TorsionSpec::File { path: rest.into() }),
            "snapshot" if !rest.is_empty() => Ok(TorsionSpec::Snapshot { path: rest.into() }),
            _ => Err(invalid(format!(
                "unrecognized torsion `{s}` (expected constant:<c>, explicit:C=<c>[,k=..][,branch=..], file:<csv> or snapshot:<path>)"
            ))),
        }
    }
}

fn number(name: &str, text: &str) -> Result<f64, CliError> {
    let x: f64 = text
        .trim()
        .parse()
        .map_err(|_| invalid(format!("{name}: `{text}` is not a number")))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(format!("{name} must be finite, got {x}")))
    }
}

impl TorsionSpec {
    /// Explicit profile `2 / (C + b sqrt(C^2 - 4) sin 2(s + k))`, after the
    /// same validation `explicit_a0` applies.
    pub fn explicit_fn(c: f64, k: f64, branch: Branch) -> Result<impl Fn(f64) -> f64, CliError> {
        if !(c >= 2.0) {
            return Err(invalid(format!("explicit profile requires C >= 2, got C = {c}")));
        }
        let amp = branch.sign::<f64>() * (c * c - 4.0).sqrt();
        Ok(move |s: f64| 2.0 / (c + amp * (2.0 * (s + k)).sin()))
    }

    /// Reads the samples of a file or snapshot source.
    pub fn load(&self) -> Result<Option<Field64>, CliError> {
        match self {
            TorsionSpec::File { path } => Ok(Some(load_field(path).map_err(input)?)),
            TorsionSpec::Snapshot { path } => Ok(Some(load_field(&snapshot_path(path)?).map_err(input)?)),
            _ => Ok(None),
        }
    }

    /// Samples the specification on `grid`; file sources bring their own grid.
    pub fn sample(&self, grid: Grid) -> Result<Torsion, CliError> {
        match self {
            TorsionSpec::Constant { value } => Ok(Torsion::constant(grid, *value)?),
            TorsionSpec::Explicit { c, k, branch } => Ok(binormal::explicit_a0(
                &binormal::StationaryParams::explicit(*c, *k, *branch),
                &grid,
            )?),
            _ => Ok(Torsion::new(self.load()?.expect("file sources load"))?),
        }
    }
}

/// Resolves `snapshot:` paths: a directory means its last listed snapshot.
fn snapshot_path(path: &Path) -> Result<PathBuf, CliError> {
    if !path.is_dir() {
        return Ok(path.to_path_buf());
    }
    let meta = path.join("meta.json");
    let text = std::fs::read_to_string(&meta)
        .map_err(|e| invalid(format!("cannot read {}: {e}", meta.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", meta.display())))?;
    let last = value["snapshots"]
        .as_array()
        .and_then(|a| a.last())
        .and_then(|v| v.as_str())
        .ok_or_else(|| invalid(format!("{} lists no snapshots", meta.display())))?;
    Ok(path.join(last))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_specs() {
        assert_eq!("constant:1.5".parse::<TorsionSpec>().unwrap(), TorsionSpec::Constant { value: 1.5 });
        assert_eq!(
            "explicit:C=3,k=0.25,branch=-".parse::<TorsionSpec>().unwrap(),
            TorsionSpec::Explicit { c: 3.0, k: 0.25, branch: Branch::Minus }
        );
        assert_eq!(
            "explicit:C=5".parse::<TorsionSpec>().unwrap(),
            TorsionSpec::Explicit { c: 5.0, k: 0.0, branch: Branch::Plus }
        );
        assert!(matches!("file:a.csv".parse::<TorsionSpec>().unwrap(), TorsionSpec::File { .. }));
        for bad in ["constant:x", "explicit:k=1", "explicit:C=3,q=1", "file:", "helix", "constant:inf"] {
            assert!(matches!(bad.parse::<TorsionSpec>(), Err(CliError::Invalid(_))), "{bad}");
        }
    }

    #[test]
    fn explicit_fn_matches_the_sampled_profile() {
        let g = Grid::new(std::f64::consts::PI, 64).unwrap();
        let spec = TorsionSpec::Explicit { c: 3.0, k: 0.3, branch: Branch::Minus };
        let sampled = spec.sample(g).unwrap();
        let f = TorsionSpec::explicit_fn(3.0, 0.3, Branch::Minus).unwrap();
        for (s, v) in g.nodes().zip(sampled.values()) {
            assert_eq!(f(s), *v);
        }
        assert!(TorsionSpec::explicit_fn(1.0, 0.0, Branch::Plus).is_err());
    }
}
