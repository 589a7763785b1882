use std::f64::consts::PI;

use binormal::evolve::DEFAULT_DT_SAFETY;
use binormal::io::write_trajectory;
use binormal::plot::{Series, SvgPlot};
use binormal::{evolve, Controls, Curvature, Grid, RunStatus, Torsion};
use serde::Serialize;

use crate::fail::{invalid, numerical, CliError};
use crate::opts::{Evolve, Output};
use crate::source::TorsionSpec;
use crate::{parse_scheme, positive};

#[derive(Debug, Serialize)]
struct Report {
    init: TorsionSpec,
    n: usize,
    length: f64,
    kappa: f64,
    controls: Controls,
    steps: usize,
    final_time: f64,
    status: RunStatus,
    complete: bool,
    snapshots: usize,
    /// max-norm distance of the last snapshot from the initial state
    final_deviation: f64,
    max_deviation: f64,
    i1_drift: f64,
    i2_drift: f64,
    min_tau: f64,
}

pub fn run(args: Evolve, out: &Output) -> Result<(), CliError> {
    let spec: TorsionSpec = args.init.as_deref().unwrap_or("explicit:C=3").parse()?;
    let tau0 = match spec {
        TorsionSpec::File { .. } | TorsionSpec::Snapshot { .. } => {
            let tau = Torsion::new(spec.load()?.expect("file sources load"))?;
            if args.n.is_some_and(|n| n != tau.grid().len()) {
                return Err(invalid(format!("--N conflicts with the {} samples of the input file", tau.grid().len())));
            }
            if args.l.is_some_and(|l| (l - tau.grid().length()).abs() > 1e-9 * l.abs()) {
                return Err(invalid(format!("--L conflicts with the input file length {}", tau.grid().length())));
            }
            tau
        }
        _ => {
            let l = positive("L", args.l.unwrap_or(PI))?;
            spec.sample(Grid::new(l, args.n.unwrap_or(256))?)?
        }
    };
    let kappa = Curvature::new(args.kappa.unwrap_or(1.0))?;
    let mut controls = Controls::new(args.t_end.unwrap_or(0.5))
        .with_safety(args.sigma.unwrap_or(DEFAULT_DT_SAFETY))
        .with_scheme(parse_scheme(args.scheme.as_deref())?)
        .with_stride(args.stride.unwrap_or(1000));
    if let Some(floor) = args.floor {
        controls.positivity_floor = floor;
    }

    let traj = evolve(&tau0, kappa, &controls)?;
    let last = traj.last().field();
    let report = Report {
        init: spec,
        n: traj.grid.len(),
        length: traj.grid.length(),
        kappa: traj.kappa,
        controls,
        steps: *traj.steps.last().expect("initial step recorded"),
        final_time: traj.final_time(),
        status: traj.status.clone(),
        complete: traj.is_complete(),
        snapshots: traj.states.len(),
        final_deviation: last.max_diff(traj.initial().field())?,
        max_deviation: traj.max_deviation(),
        i1_drift: traj.i1_drift(),
        i2_drift: traj.i2_drift(),
        min_tau: traj.min_tau(),
    };

    out.prepare()?;
    write_trajectory(&traj, &out.dir)?;
    let t: Vec<f64> = traj.diagnostics.iter().map(|d| d.t).collect();
    let column = |f: fn(&binormal::evolve::Diagnostics<f64>) -> f64| -> Vec<f64> {
        traj.diagnostics.iter().map(f).collect()
    };
    let plot = SvgPlot::new("torsion flow diagnostics", "t", "value")
        .with_series(Series::new("I1 = int sqrt(tau)", &t, &column(|d| d.i1)))
        .with_series(Series::new("I2 = int tau", &t, &column(|d| d.i2)))
        .with_series(Series::new("min tau", &t, &column(|d| d.min_tau)));
    out.svg("diagnostics.svg", &plot)?;
    out.report(&report)?;

    match &traj.status {
        RunStatus::Completed => Ok(()),
        RunStatus::Aborted { time, reason } => Err(numerical(format!(
            "run aborted after the step ending at t = {time}: {reason} (partial trajectory written to {})",
            out.dir.display()
        ))),
    }
}
