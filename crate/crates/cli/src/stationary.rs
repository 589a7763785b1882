use std::f64::consts::PI;

use binormal::io::write_field;
use binormal::plot::{Series, SvgPlot};
use binormal::stationary::TurningPoints;
use binormal::{
    explicit_a0, half_period, profile_samples, rhs_torsion, turning_points, Branch, Curvature,
    DerivScheme, Grid, StationaryParams, Torsion,
};
use serde::Serialize;

use crate::fail::{invalid, CliError};
use crate::opts::{Output, Stationary};

#[derive(Debug, Serialize)]
struct Report {
    params: StationaryParams<f64>,
    method: &'static str,
    n: usize,
    length: f64,
    periods: usize,
    half_period: Option<f64>,
    turning_points: Option<TurningPoints<f64>>,
    u0: Option<f64>,
    tau_at_zero: f64,
    tau_min: f64,
    tau_max: f64,
    /// max |u'^2 - 2Au + u^2 + u^-2 - C| with u = tau^{-1/2}
    energy_residual: f64,
    /// max |rhs of the torsion equation| with kappa = 1
    rhs_residual: f64,
    rhs_scheme: DerivScheme,
}

pub fn run(args: Stationary, out: &Output) -> Result<(), CliError> {
    let a = args.a.unwrap_or(0.0);
    let c = args.c.unwrap_or(3.0);
    let k = args.k.unwrap_or(0.0);
    let branch: Branch = args.branch.as_deref().unwrap_or("+").parse()?;
    let n = args.n.unwrap_or(256);
    let periods = args.periods.unwrap_or(1);
    if !(a.is_finite() && c.is_finite() && k.is_finite()) {
        return Err(invalid("A, C and k must be finite"));
    }
    if periods == 0 {
        return Err(invalid("--periods must be at least 1"));
    }
    let params = StationaryParams { a, c, k, branch };

    let (tau, energy, method, hp, tp, u0) = if a == 0.0 {
        if args.u0.is_some() {
            return Err(invalid("--u0 applies to A != 0; the A = 0 family is selected by k and branch"));
        }
        let grid = Grid::new(periods as f64 * PI, n)?;
        let tau = explicit_a0(&params, &grid)?;
        let energy = explicit_energy(&tau, c)?;
        (tau, energy, "explicit", None, None, None)
    } else {
        if k != 0.0 || branch == Branch::Minus {
            return Err(invalid("k and branch select members of the A = 0 family; use --u0 for A != 0"));
        }
        let tp = turning_points(a, c)?;
        let hp = half_period(a, c)?;
        let u0 = args.u0.unwrap_or(tp.u_min);
        let grid = Grid::new(2.0 * hp * periods as f64, n)?;
        let samples = profile_samples(&params, u0, &grid)?;
        let energy = samples
            .energy(a)
            .iter()
            .map(|e| (e - c).abs())
            .fold(0.0, f64::max);
        (samples.torsion()?, energy, "ode", Some(hp), Some(tp), Some(u0))
    };

    let scheme = DerivScheme::Fd4;
    let rhs = rhs_torsion(&tau, Curvature::unit(), scheme)?;
    let report = Report {
        params,
        method,
        n,
        length: tau.grid().length(),
        periods,
        half_period: hp,
        turning_points: tp,
        u0,
        tau_at_zero: tau.values()[0],
        tau_min: tau.field().min(),
        tau_max: tau.field().max(),
        energy_residual: energy,
        rhs_residual: rhs.max_abs(),
        rhs_scheme: scheme,
    };

    out.prepare()?;
    write_field(tau.field(), out.create("profile.csv")?)?;
    out.svg("profile.svg", &two_period_plot(&tau, &params))?;
    out.report(&report)
}

/// Energy defect of the explicit profile, with `u'` from the spectral
/// derivative when the grid allows it.
fn explicit_energy(tau: &Torsion, c: f64) -> Result<f64, CliError> {
    let u = tau.field().pointwise(|t| t.sqrt().recip())?;
    let scheme = if tau.grid().len() % 2 == 0 {
        DerivScheme::Spectral
    } else {
        DerivScheme::Fd4
    };
    let du = u.deriv(1, scheme)?;
    Ok(u
        .values()
        .iter()
        .zip(du.values())
        .map(|(&u, &d)| (d * d + u * u + (u * u).recip() - c).abs())
        .fold(0.0, f64::max))
}

fn two_period_plot(tau: &Torsion, params: &StationaryParams<f64>) -> SvgPlot {
    let grid = tau.grid();
    let period = grid.length();
    let mut s: Vec<f64> = grid.nodes().collect();
    s.extend(grid.nodes().map(|x| x + period));
    s.push(2.0 * period);
    let mut v = tau.values().to_vec();
    v.extend_from_slice(tau.values());
    v.push(tau.values()[0]);
    let title = format!(
        "stationary torsion, A = {}, C = {}, k = {}, branch {}",
        params.a, params.c, params.k, params.branch
    );
    SvgPlot::new(title, "s", "tau").with_series(Series::new("tau", &s, &v))
}

