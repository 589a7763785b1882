use binormal::figures::{projection_plot, FIGURE_NODES, FIGURE_SPAN, FIGURE_SUBSTEPS};
use binormal::geometry::{drift, fit_helix, helix_deviation, helix_radius_pitch, project_along};
use binormal::io::{write_curve, write_polyline};
use binormal::{
    estimate_kappa_tau, frenet_integrate, project, Curvature, FrenetState, Plane, Torsion,
    TorsionSource,
};
use serde::Serialize;

use crate::fail::{invalid, CliError};
use crate::opts::{Output, Reconstruct};
use crate::positive;
use crate::source::TorsionSpec;

#[derive(Debug, Serialize)]
struct HelixReport {
    radius: f64,
    pitch: f64,
    expected_radius: f64,
    expected_pitch: f64,
    /// max distance to the closed-form helix through the same initial frame
    deviation: f64,
}

#[derive(Debug, Serialize)]
struct RoundTrip {
    samples: usize,
    kappa_error: f64,
    tau_error: f64,
}

#[derive(Debug, Serialize)]
struct Report {
    tau: TorsionSpec,
    kappa: f64,
    span: f64,
    nodes: usize,
    substeps: usize,
    orthonormality_error: f64,
    chord_defect: f64,
    drift: [f64; 3],
    round_trip: RoundTrip,
    helix: Option<HelixReport>,
}

pub fn run(args: Reconstruct, out: &Output) -> Result<(), CliError> {
    let spec: TorsionSpec = args.tau.as_deref().unwrap_or("explicit:C=3").parse()?;
    let kappa = Curvature::new(args.kappa.unwrap_or(1.0))?;
    let span = positive("span", args.span.unwrap_or(FIGURE_SPAN))?;
    let nodes = args.nodes.unwrap_or(FIGURE_NODES);
    let substeps = args.substeps.unwrap_or(FIGURE_SUBSTEPS);
    if nodes < 6 {
        return Err(invalid(format!("--nodes must be at least 6, got {nodes}")));
    }

    let source = match &spec {
        TorsionSpec::Constant { value } => {
            if !(*value > 0.0) {
                return Err(invalid(format!("torsion must be strictly positive, got {value}")));
            }
            TorsionSource::Constant(*value)
        }
        TorsionSpec::Explicit { c, k, branch } => TorsionSource::function(TorsionSpec::explicit_fn(*c, *k, *branch)?),
        _ => TorsionSource::sampled(&Torsion::new(spec.load()?.expect("file sources load"))?)?,
    };
    let curve = frenet_integrate(kappa, &source, span, nodes, substeps, FrenetState::default())?;

    let est = estimate_kappa_tau(&curve)?;
    let max_err = |xs: &[f64], exact: &dyn Fn(f64) -> f64| {
        xs.iter()
            .zip(&est.s)
            .map(|(&x, &s)| (x - exact(s)).abs())
            .fold(0.0, f64::max)
    };
    let round_trip = RoundTrip {
        samples: est.s.len(),
        kappa_error: max_err(&est.kappa, &|_| kappa.get()),
        tau_error: max_err(&est.tau, &|s| source.eval(s)),
    };
    let helix = match spec {
        TorsionSpec::Constant { value } => {
            let fit = fit_helix(&curve, kappa.get(), value)?;
            let (r, p) = helix_radius_pitch(kappa.get(), value);
            Some(HelixReport {
                radius: fit.radius,
                pitch: fit.pitch,
                expected_radius: r,
                expected_pitch: p,
                deviation: helix_deviation(&curve, kappa.get(), value),
            })
        }
        _ => None,
    };
    let d = drift(&curve);
    let report = Report {
        tau: spec,
        kappa: kappa.get(),
        span,
        nodes,
        substeps,
        orthonormality_error: curve.max_orthonormality_error(),
        chord_defect: curve.max_chord_defect(),
        drift: d.to_array(),
        round_trip,
        helix,
    };

    out.prepare()?;
    write_curve(&curve, out.create("curve.csv")?)?;
    for plane in Plane::ALL {
        let line = project(&curve, plane);
        let name = plane.name();
        write_polyline(&line, out.create(&format!("projection_{name}.csv"))?)?;
        out.svg(
            &format!("projection_{name}.svg"),
            &projection_plot(&line, &format!("reconstructed curve, {name} projection"), plane.axes()),
        )?;
    }
    // Closed curves have no drift axis to look down.
    if d.norm() > 1e-9 * span {
        let line = project_along(&curve, d)?;
        write_polyline(&line, out.create("view_drift.csv")?)?;
        out.svg(
            "view_drift.svg",
            &projection_plot(&line, "reconstructed curve, view along the drift axis", ("e1", "e2")),
        )?;
    }
    out.report(&report)
}
