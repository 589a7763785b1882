//! Reference renderings of the stationary torsion `tau_1` and its curve.

use crate::error::Result;
use crate::flowops::{CurvatureConstant, TorsionField};
use crate::geometry::{
    drift, frenet_integrate, project, project_along, Curve3D, FrenetState, Plane, Polyline2D,
    TorsionSource,
};
use crate::grid::PeriodicGrid;
use crate::plot::{Series, SvgPlot};
use crate::stationary::{explicit_a0, Branch, StationaryParams};

/// Arc span of the reference curve (ten periods of `tau_1`).
pub const FIGURE_SPAN: f64 = 20.0 * std::f64::consts::PI;
pub const FIGURE_NODES: usize = 4096;
pub const FIGURE_SUBSTEPS: usize = 2;
/// Samples per period in the torsion graph.
pub const FIGURE_SAMPLES: usize = 256;

/// `tau_1(s) = 2 / (3 + sqrt(5) sin 2s)`.
pub fn tau1(s: f64) -> f64 {
    2.0 / (3.0 + 5f64.sqrt() * (2.0 * s).sin())
}

pub fn torsion_plot(tau: &TorsionField<f64>, title: &str) -> SvgPlot {
    let s: Vec<f64> = tau.grid().nodes().collect();
    SvgPlot::new(title, "s", "tau").with_series(Series::new("tau", &s, tau.values()))
}

pub fn projection_plot(line: &Polyline2D<f64>, title: &str, axes: (&str, &str)) -> SvgPlot {
    SvgPlot::new(title, axes.0, axes.1)
        .equal_aspect()
        .with_series(Series::new("curve", &line.u, &line.v))
}

/// `tau_1` over two periods.
pub fn figure1() -> Result<String> {
    let grid = PeriodicGrid::new(2.0 * std::f64::consts::PI, 2 * FIGURE_SAMPLES)?;
    let tau = explicit_a0(&StationaryParams::explicit(3.0, 0.0, Branch::Plus), &grid)?;
    Ok(torsion_plot(&tau, "torsion tau_1 over two periods").render())
}

/// The curve of `tau_1` with `kappa = 1` from the canonical frame.
pub fn reference_curve() -> Result<Curve3D<f64>> {
    frenet_integrate(
        CurvatureConstant::unit(),
        &TorsionSource::function(tau1),
        FIGURE_SPAN,
        FIGURE_NODES,
        FIGURE_SUBSTEPS,
        FrenetState::default(),
    )
}

/// Projection of the reference curve into the xy plane.
pub fn figure2() -> Result<String> {
    let curve = reference_curve()?;
    Ok(projection_plot(&project(&curve, Plane::Xy), "curve of tau_1, xy projection", ("x", "y")).render())
}

/// The reference curve viewed down its drift axis.
pub fn figure3() -> Result<String> {
    let curve = reference_curve()?;
    let line = project_along(&curve, drift(&curve))?;
    Ok(projection_plot(&line, "curve of tau_1, view along the drift axis", ("e1", "e2")).render())
}
