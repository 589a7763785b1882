use binormal::chain::{NOISE_FLOOR, MIN_RELIABLE_N};
use binormal::plot::{Series, SvgPlot};
use binormal::{run_chain, ChainProfileSet};

use crate::fail::{invalid, numerical, CliError};
use crate::opts::{Chain, Output};
use crate::parse_scheme;

pub fn run(args: Chain, out: &Output) -> Result<(), CliError> {
    let n = args.n.unwrap_or(MIN_RELIABLE_N);
    if n < 4 {
        return Err(invalid(format!("--N must be at least 4, got {n}")));
    }
    let set: ChainProfileSet = args.profile.as_deref().unwrap_or("smooth").parse()?;
    let scheme = parse_scheme(args.scheme.as_deref())?;
    let report = run_chain(set, n, scheme)?;

    for s in &report.steps {
        let order = s.fitted_order.map_or_else(|| "exact".to_string(), |o| format!("{o:.2}"));
        println!(
            "{:<10} N = {:?} residual = {:?} order = {} (floor {}) {}{}",
            s.label,
            s.n,
            s.residual.iter().map(|r| format!("{r:.2e}")).collect::<Vec<_>>(),
            order,
            s.order_floor,
            if s.pass { "PASS" } else { "FAIL" },
            if s.note.is_empty() { String::new() } else { format!(": {}", s.note) },
        );
    }
    for c in &report.closed_form {
        println!("{:<10} residual = {:.2e} {}", c.name, c.residual, if c.pass { "PASS" } else { "FAIL" });
    }

    out.prepare()?;
    let mut plot = SvgPlot::new("refinement ladder", "log10 N", "log10 residual");
    for s in &report.steps {
        let x: Vec<f64> = s.n.iter().map(|&n| (n as f64).log10()).collect();
        let y: Vec<f64> = s.residual.iter().map(|r| r.max(NOISE_FLOOR * 1e-4).log10()).collect();
        plot = plot.with_series(Series::new(s.label.clone(), &x, &y));
    }
    out.svg("ladder.svg", &plot)?;
    out.report(&report)?;
    if report.pass {
        Ok(())
    } else {
        let failed: Vec<&str> = report
            .steps
            .iter()
            .filter(|s| !s.pass)
            .map(|s| s.label.as_str())
            .chain(report.closed_form.iter().filter(|c| !c.pass).map(|c| c.name.as_str()))
            .collect();
        Err(numerical(format!("chain checks failed: {}", failed.join(", "))))
    }
}
