use std::f64::consts::PI;

use binormal::evolve::DEFAULT_DT_SAFETY;
use binormal::io::{load_field, write_columns, write_field};
use binormal::plot::{Series, SvgPlot};
use binormal::{
    evolve_linear_exact, evolve_linear_fd, linearize_coeffs, stability_certificate, Controls,
    DerivScheme, Field64, Grid, LinearCoefficients,
};
use serde::Serialize;

use crate::fail::{input, invalid, numerical, CliError};
use crate::opts::{Linear, Output};
use crate::{parse_scheme, positive};

/// Relative tolerance on the constancy of the exact norm history.
const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Serialize)]
struct Report {
    tau0: f64,
    coefficients: LinearCoefficients<f64>,
    init: String,
    n: usize,
    length: f64,
    t: f64,
    sigma: f64,
    scheme: DerivScheme,
    w0_norm: f64,
    certificate: f64,
    /// max_k | ||w(t_k)|| - ||w0|| | for the exact multiplier solution
    exact_norm_drift: f64,
    fd_norm_drift: f64,
    difference_l2: f64,
    difference_max: f64,
    norm_constant: bool,
    within_certificate: bool,
    pass: bool,
}

fn initial(spec: &str, n: usize, l: f64) -> Result<Field64, CliError> {
    if spec == "zero" {
        return Ok(Field64::zeros(Grid::new(l, n)?));
    }
    if let Some(k) = spec.strip_prefix("mode:") {
        let k: i64 = k
            .trim()
            .parse()
            .map_err(|_| invalid(format!("mode number must be an integer, got `{k}`")))?;
        return Ok(Field64::from_fn(Grid::new(l, n)?, |s| (2.0 * PI * k as f64 * s / l).cos())?);
    }
    if let Some(path) = spec.strip_prefix("file:") {
        return load_field(path.as_ref()).map_err(input);
    }
    Err(invalid(format!("unrecognized perturbation `{spec}` (expected mode:<k>, zero or file:<csv>)")))
}

pub fn run(args: Linear, out: &Output) -> Result<(), CliError> {
    let tau0 = args.tau0.unwrap_or(1.0);
    let coeffs = linearize_coeffs(tau0)?;
    let init = args.init.clone().unwrap_or_else(|| "mode:1".into());
    let l = positive("L", args.l.unwrap_or(2.0 * PI))?;
    let w0 = initial(&init, args.n.unwrap_or(256), l)?;
    let t = args.t.unwrap_or(1.0);
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(format!("--t must be non-negative, got {t}")));
    }
    let samples = args.samples.unwrap_or(11);
    if samples < 2 {
        return Err(invalid("--samples must be at least 2"));
    }
    let sigma = args.sigma.unwrap_or(DEFAULT_DT_SAFETY);
    let scheme = parse_scheme(args.scheme.as_deref())?;
    let controls = Controls::new(t.max(f64::MIN_POSITIVE))
        .with_safety(sigma)
        .with_scheme(scheme);
    controls.validate()?;

    let times: Vec<f64> = (0..samples).map(|k| t * k as f64 / (samples - 1) as f64).collect();
    let w0_norm = w0.l2_norm();
    let (mut exact_norms, mut fd_norms, mut diffs) = (Vec::new(), Vec::new(), Vec::new());
    let mut fd = w0.clone();
    let mut exact = w0.clone();
    for (k, &tk) in times.iter().enumerate() {
        if k > 0 {
            fd = evolve_linear_fd(&fd, tk - times[k - 1], &coeffs, &controls)?;
            exact = evolve_linear_exact(&w0, tk, &coeffs)?;
        }
        exact_norms.push(exact.l2_norm());
        fd_norms.push(fd.l2_norm());
        diffs.push(exact.zip_with(&fd, |a, b| a - b)?.l2_norm());
    }
    let drift = |norms: &[f64]| norms.iter().map(|x| (x - w0_norm).abs()).fold(0.0, f64::max);
    let certificate = stability_certificate(w0_norm)?;
    let scale = w0_norm.max(1.0);
    let exact_norm_drift = drift(&exact_norms);
    let norm_constant = exact_norm_drift <= NORM_TOLERANCE * scale;
    let within_certificate = exact_norms.iter().all(|&x| x <= certificate + NORM_TOLERANCE * scale);
    let report = Report {
        tau0,
        coefficients: coeffs,
        init,
        n: w0.len(),
        length: w0.grid().length(),
        t,
        sigma,
        scheme,
        w0_norm,
        certificate,
        exact_norm_drift,
        fd_norm_drift: drift(&fd_norms),
        difference_l2: *diffs.last().expect("at least two samples"),
        difference_max: exact.max_diff(&fd)?,
        norm_constant,
        within_certificate,
        pass: norm_constant && within_certificate,
    };

    out.prepare()?;
    write_field(&exact, out.create("exact.csv")?)?;
    write_field(&fd, out.create("fd.csv")?)?;
    write_columns(
        &["t", "exact_norm", "fd_norm", "difference_norm"],
        &[&times, &exact_norms, &fd_norms, &diffs],
        out.create("norm_history.csv")?,
    )?;
    let s: Vec<f64> = w0.grid().nodes().collect();
    out.svg(
        "solution.svg",
        &SvgPlot::new(format!("linearized flow about tau0 = {tau0} at t = {t}"), "s", "w")
            .with_series(Series::new("w0", &s, w0.values()))
            .with_series(Series::new("exact", &s, exact.values()))
            .with_series(Series::new("finite differences", &s, fd.values())),
    )?;
    out.svg(
        "norm_history.svg",
        &SvgPlot::new("L2 norm of the perturbation", "t", "||w||")
            .with_series(Series::new("exact", &times, &exact_norms))
            .with_series(Series::new("finite differences", &times, &fd_norms)),
    )?;
    out.report(&report)?;
    if report.pass {
        Ok(())
    } else {
        Err(numerical(format!("exact norm drifted by {exact_norm_drift:e}")))
    }
}
