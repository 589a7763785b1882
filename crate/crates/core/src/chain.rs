//! Residual verification of the transformation chain linking the torsion
//! equation to the Calogero–Degasperis–Fokas equation.
//!
//! ```text
//! EQ4  tau_t = D(tau^{-1/2} - tau^{3/2} + D^2 tau^{-1/2})
//! EQ5  v_t   = D(1/(4v^2) - 3v^2/4 + 3v_s^2/(4v^4) - v_ss/(2v^3))        tau = v^2
//! EQ6  w_t   = -1/(2w_s^2) + 3w_s^2/2 - 3w_ss^2/(2w_s^4) + w_sss/w_s^3  v = w_s, t -> -t/2
//! EQ7  eta_t = eta_xxx - 3eta_xx^2/(2eta_x) + eta_x^3/2 - 3/(2eta_x)     xi = w(s), s = eta(xi)
//! EQ8  z_t   = z_sss - (3/2)(z_s^2/z)_s + 3z^2 z_s/2 + 3z_s/(2z^2)       z = eta_s
//! EQ9  u_t   = u_sss - u_s^3/2 + (3u_s/2)(e^{2u} + e^{-2u})              z = e^u
//! ```
//!
//! Each step is checked as an identity between right-hand sides evaluated
//! on a manufactured profile; the discrete residual must vanish under grid
//! refinement at the order of the derivative scheme.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DerivScheme, Field, PeriodicGrid};
use crate::interp::{MonotoneCubic, TrigInterpolant};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EquationId {
    #[serde(rename = "EQ4")]
    Eq4,
    #[serde(rename = "EQ5")]
    Eq5,
    #[serde(rename = "EQ6")]
    Eq6,
    #[serde(rename = "EQ7")]
    Eq7,
    #[serde(rename = "EQ8")]
    Eq8,
    #[serde(rename = "EQ9")]
    Eq9,
}

impl fmt::Display for EquationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            EquationId::Eq4 => 4,
            EquationId::Eq5 => 5,
            EquationId::Eq6 => 6,
            EquationId::Eq7 => 7,
            EquationId::Eq8 => 8,
            EquationId::Eq9 => 9,
        };
        write!(f, "EQ{n}")
    }
}

/// Sampled profile that can be differentiated on its grid.
pub trait Profile<T: Real> {
    fn grid(&self) -> &PeriodicGrid<T>;
    fn values(&self) -> &[T];
    fn derivative(&self, order: u32, scheme: DerivScheme) -> Result<Field<T>>;
}

impl<T: Real> Profile<T> for Field<T> {
    fn grid(&self) -> &PeriodicGrid<T> {
        Field::grid(self)
    }

    fn values(&self) -> &[T] {
        Field::values(self)
    }

    fn derivative(&self, order: u32, scheme: DerivScheme) -> Result<Field<T>> {
        self.deriv(order, scheme)
    }
}

/// Strictly increasing potential with winding: `w(s + L) = w(s) + W`.
///
/// Stored as samples of the full function; derivatives act on the periodic
/// part `w(s) - W s / L` and add the mean slope `W / L` to the first one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneProfile<T> {
    grid: PeriodicGrid<T>,
    values: Vec<T>,
    winding: T,
}

impl<T: Real> MonotoneProfile<T> {
    pub fn new(grid: PeriodicGrid<T>, values: Vec<T>, winding: T) -> Result<Self> {
        if !(winding > T::zero() && winding.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "winding must be positive, got {winding}"
            )));
        }
        // Validates length and finiteness.
        let values = Field::new(grid, values)?.into_values();
        let n = values.len();
        if let Some(i) = values.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NotMonotone { index: i + 1 });
        }
        if !(values[0] + winding > values[n - 1]) {
            return Err(Error::NotMonotone { index: 0 });
        }
        Ok(Self {
            grid,
            values,
            winding,
        })
    }

    /// Samples `w` at the nodes; `w` must satisfy `w(s + L) = w(s) + winding`.
    pub fn from_fn(grid: PeriodicGrid<T>, winding: T, w: impl Fn(T) -> T) -> Result<Self> {
        Self::new(grid, grid.nodes().map(w).collect(), winding)
    }

    pub fn winding(&self) -> T {
        self.winding
    }

    /// Mean slope `W / L`.
    pub fn slope(&self) -> T {
        self.winding / self.grid.length()
    }

    /// `w(s) - W s / L` on the grid.
    pub fn periodic_part(&self) -> Field<T> {
        let slope = self.slope();
        let values = self
            .grid
            .nodes()
            .zip(&self.values)
            .map(|(s, &w)| w - slope * s)
            .collect();
        Field::new(self.grid, values).expect("finite samples")
    }

    /// Evaluates the band-limited interpolant of the profile and its slope at `s`.
    fn spectral(&self) -> SpectralPotential<T> {
        SpectralPotential {
            slope: self.slope(),
            periodic: TrigInterpolant::new(&self.periodic_part()),
        }
    }
}

impl<T: Real> Profile<T> for MonotoneProfile<T> {
    fn grid(&self) -> &PeriodicGrid<T> {
        &self.grid
    }

    fn values(&self) -> &[T] {
        &self.values
    }

    fn derivative(&self, order: u32, scheme: DerivScheme) -> Result<Field<T>> {
        let d = self.periodic_part().deriv(order, scheme)?;
        if order == 1 {
            let slope = self.slope();
            Ok(d.map_total(|v| v + slope))
        } else {
            Ok(d)
        }
    }
}

struct SpectralPotential<T> {
    slope: T,
    periodic: TrigInterpolant<T>,
}

impl<T: Real> SpectralPotential<T> {
    fn eval_with_deriv(&self, s: T) -> (T, T) {
        let (p, dp) = self.periodic.eval_with_deriv(s);
        (self.slope * s + p, self.slope + dp)
    }
}

fn require_positive<T: Real>(eq: EquationId, values: &[T]) -> Result<()> {
    match values.iter().position(|v| !(*v > T::zero())) {
        Some(index) => Err(Error::Constraint {
            eq,
            index,
            value: values[index].as_f64(),
        }),
        None => Ok(()),
    }
}

fn build<T: Real>(grid: PeriodicGrid<T>, n: usize, f: impl Fn(usize) -> T) -> Result<Field<T>> {
    Field::new(grid, (0..n).map(f).collect())
}

/// Right-hand side of equation `eq` evaluated on `f` with discrete derivatives.
pub fn rhs_of<T: Real, P: Profile<T> + ?Sized>(
    eq: EquationId,
    f: &P,
    scheme: DerivScheme,
) -> Result<Field<T>> {
    let grid = *f.grid();
    let n = grid.len();
    let x = f.values();
    let two = lit::<T>(2.0);
    let three = lit::<T>(3.0);
    let four = lit::<T>(4.0);
    let half = lit::<T>(0.5);
    match eq {
        EquationId::Eq4 => {
            require_positive(eq, x)?;
            let g = build(grid, n, |j| x[j].sqrt().recip())?;
            let g2 = g.deriv(2, scheme)?;
            let g2 = g2.values();
            let inner = build(grid, n, |j| g.values()[j] - x[j] * x[j].sqrt() + g2[j])?;
            inner.deriv(1, scheme)
        }
        EquationId::Eq5 => {
            require_positive(eq, x)?;
            let d1 = f.derivative(1, scheme)?;
            let d2 = f.derivative(2, scheme)?;
            let (d1, d2) = (d1.values(), d2.values());
            let inner = build(grid, n, |j| {
                let v = x[j];
                let v2 = v * v;
                (four * v2).recip() - three * v2 / four + three * d1[j] * d1[j] / (four * v2 * v2)
                    - d2[j] / (two * v2 * v)
            })?;
            inner.deriv(1, scheme)
        }
        EquationId::Eq6 | EquationId::Eq7 => {
            let d1 = f.derivative(1, scheme)?;
            require_positive(eq, d1.values())?;
            let d2 = f.derivative(2, scheme)?;
            let d3 = f.derivative(3, scheme)?;
            let (d1, d2, d3) = (d1.values(), d2.values(), d3.values());
            build(grid, n, |j| {
                let p = d1[j];
                let p2 = p * p;
                if eq == EquationId::Eq6 {
                    -(two * p2).recip() + three * p2 / two - three * d2[j] * d2[j] / (two * p2 * p2)
                        + d3[j] / (p2 * p)
                } else {
                    d3[j] - three * d2[j] * d2[j] / (two * p) + p2 * p / two - three / (two * p)
                }
            })
        }
        EquationId::Eq8 => {
            require_positive(eq, x)?;
            let d1 = f.derivative(1, scheme)?;
            let d3 = f.derivative(3, scheme)?;
            let flux = build(grid, n, |j| d1.values()[j] * d1.values()[j] / x[j])?;
            let dflux = flux.deriv(1, scheme)?;
            let (d1, d3, dflux) = (d1.values(), d3.values(), dflux.values());
            build(grid, n, |j| {
                let z = x[j];
                d3[j] - three * half * dflux[j] + three * z * z * d1[j] / two
                    + three * d1[j] / (two * z * z)
            })
        }
        EquationId::Eq9 => {
            check_exp_range(x)?;
            let d1 = f.derivative(1, scheme)?;
            let d3 = f.derivative(3, scheme)?;
            let (d1, d3) = (d1.values(), d3.values());
            build(grid, n, |j| {
                let us = d1[j];
                let cosh2 = (two * x[j]).exp() + (-two * x[j]).exp();
                d3[j] - us * us * us / two + three * us / two * cosh2
            })
        }
    }
}

/// Cap on `|u|` before exponentiating.
pub const EXP_GUARD: f64 = 30.0;

fn check_exp_range<T: Real>(u: &[T]) -> Result<()> {
    match u.iter().position(|v| !(v.abs() <= lit(EXP_GUARD))) {
        Some(index) => Err(Error::ExpOverflow {
            index,
            value: u[index].as_f64(),
        }),
        None => Ok(()),
    }
}

/// `max |EQ4(v^2) - 2 v EQ5(v)|`: the substitution `tau = v^2`.
pub fn check_sub_tau_v<T: Real>(v: &Field<T>, scheme: DerivScheme) -> Result<T> {
    let tau = v.map_total(|x| x * x);
    let r4 = rhs_of(EquationId::Eq4, &tau, scheme)?;
    let r5 = rhs_of(EquationId::Eq5, v, scheme)?;
    let two = lit::<T>(2.0);
    let diff = r4.zip_with(&r5.zip_with(v, |r, v| two * v * r)?, |a, b| a - b)?;
    Ok(diff.max_abs())
}

/// `max |D EQ6(w) + 2 EQ5(w_s)|`: the potentiation `v = w_s` with `t -> -t/2`.
pub fn check_sub_w_v<T: Real>(w: &MonotoneProfile<T>, scheme: DerivScheme) -> Result<T> {
    let r6 = rhs_of(EquationId::Eq6, w, scheme)?;
    let dr6 = r6.deriv(1, scheme)?;
    let v = w.derivative(1, scheme)?;
    let r5 = rhs_of(EquationId::Eq5, &v, scheme)?;
    let two = lit::<T>(2.0);
    Ok(dr6.zip_with(&r5, |a, b| a + two * b)?.max_abs())
}

fn check_xi_grid<T: Real>(w: &MonotoneProfile<T>, xi_grid: &PeriodicGrid<T>) -> Result<()> {
    let tol = lit::<T>(1e3) * T::epsilon() * w.winding();
    if (xi_grid.length() - w.winding()).abs() > tol {
        return Err(Error::InvalidParameter(format!(
            "xi grid length {} must equal the winding {}",
            xi_grid.length(),
            w.winding()
        )));
    }
    Ok(())
}

/// Inverse graph `{(w_j + mW, s_j + mL)}` covering `[0, W]` with margin.
fn inverse_graph<T: Real>(w: &MonotoneProfile<T>) -> (Vec<T>, Vec<T>) {
    let grid = w.grid;
    let (big_w, big_l) = (w.winding, grid.length());
    let m_lo = (-w.values[0] / big_w).floor().to_i64().unwrap_or(0) - 1;
    let mut xs = Vec::with_capacity(3 * grid.len());
    let mut ys = Vec::with_capacity(3 * grid.len());
    for m in m_lo..m_lo + 3 {
        let mf = T::from_i64(m).expect("period index fits scalar");
        for (s, &v) in grid.nodes().zip(&w.values) {
            xs.push(v + mf * big_w);
            ys.push(s + mf * big_l);
        }
    }
    (xs, ys)
}

/// Hodograph inversion: samples `eta` with `s = eta(xi)` on `xi_grid` by
/// monotone cubic interpolation of the inverse graph. The result has winding `L`.
pub fn hodograph_invert<T: Real>(
    w: &MonotoneProfile<T>,
    xi_grid: &PeriodicGrid<T>,
) -> Result<MonotoneProfile<T>> {
    check_xi_grid(w, xi_grid)?;
    let (xs, ys) = inverse_graph(w);
    let cubic = MonotoneCubic::new(xs, ys)?;
    let eta = xi_grid.nodes().map(|xi| cubic.eval(xi)).collect();
    MonotoneProfile::new(*xi_grid, eta, w.grid.length())
}

/// Hodograph inversion polished by Newton iteration on the band-limited
/// interpolant of `w`, accurate to round-off for smooth profiles.
///
/// The monotone cubic alone is third order in the samples; its error is not
/// smooth across the xi grid and would be amplified by the third
/// derivatives of EQ7.
pub fn hodograph_invert_refined<T: Real>(
    w: &MonotoneProfile<T>,
    xi_grid: &PeriodicGrid<T>,
) -> Result<MonotoneProfile<T>> {
    let rough = hodograph_invert(w, xi_grid)?;
    let spectral = w.spectral();
    let tol = lit::<T>(4.0) * T::epsilon() * (T::one() + w.grid.length());
    let eta: Vec<T> = xi_grid
        .nodes()
        .zip(&rough.values)
        .map(|(xi, &s0)| {
            let mut s = s0;
            for _ in 0..30 {
                let (ws, dws) = spectral.eval_with_deriv(s);
                let step = (ws - xi) / dws;
                s = s - step;
                if step.abs() <= tol {
                    break;
                }
            }
            s
        })
        .collect();
    MonotoneProfile::new(*xi_grid, eta, w.grid.length())
}

/// Residual of the hodograph step, `max_j |EQ6(w)(s_j) + EQ7(eta)(w(s_j)) / eta_xi(w(s_j))|`.
///
/// This is the chain rule `w_t = -eta_t / eta_xi` at `xi = w(s)`. EQ7 and
/// `eta_xi` are evaluated off-grid by trigonometric interpolation.
pub fn check_hodograph<T: Real>(w: &MonotoneProfile<T>, scheme: DerivScheme) -> Result<T> {
    let xi_grid = PeriodicGrid::new(w.winding, w.grid.len())?;
    let eta = hodograph_invert_refined(w, &xi_grid)?;
    let r6 = rhs_of(EquationId::Eq6, w, scheme)?;
    let r7 = TrigInterpolant::new(&rhs_of(EquationId::Eq7, &eta, scheme)?);
    let eta_xi = TrigInterpolant::new(&eta.derivative(1, scheme)?);
    let worst = w
        .values
        .iter()
        .zip(r6.values())
        .map(|(&xi, &lhs)| (lhs + r7.eval(xi) / eta_xi.eval(xi)).abs())
        .fold(T::zero(), T::max);
    Ok(worst)
}

/// `max |D EQ7(eta) - EQ8(eta_s)|`: the anti-potentiation `z = eta_s`.
pub fn check_sub_eta_z<T: Real>(eta: &MonotoneProfile<T>, scheme: DerivScheme) -> Result<T> {
    let r7 = rhs_of(EquationId::Eq7, eta, scheme)?;
    let dr7 = r7.deriv(1, scheme)?;
    let z = eta.derivative(1, scheme)?;
    let r8 = rhs_of(EquationId::Eq8, &z, scheme)?;
    Ok(dr7.zip_with(&r8, |a, b| a - b)?.max_abs())
}

/// `max |EQ8(e^u) - e^u EQ9(u)|`: the substitution `z = e^u`.
pub fn check_sub_z_u<T: Real>(u: &Field<T>, scheme: DerivScheme) -> Result<T> {
    check_exp_range(u.values())?;
    let z = u.map_total(T::exp);
    let r8 = rhs_of(EquationId::Eq8, &z, scheme)?;
    let r9 = rhs_of(EquationId::Eq9, u, scheme)?;
    let scaled = r9.zip_with(&z, |r, z| r * z)?;
    Ok(r8.zip_with(&scaled, |a, b| a - b)?.max_abs())
}

/// The five substitution steps of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainStep {
    TauV,
    WV,
    Hodograph,
    EtaZ,
    ZU,
}

impl ChainStep {
    pub const ALL: [ChainStep; 5] = [
        ChainStep::TauV,
        ChainStep::WV,
        ChainStep::Hodograph,
        ChainStep::EtaZ,
        ChainStep::ZU,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ChainStep::TauV => "tau = v^2",
            ChainStep::WV => "v = w_s, t -> -t/2",
            ChainStep::Hodograph => "hodograph xi = w(s), s = eta(xi)",
            ChainStep::EtaZ => "eta_s = z",
            ChainStep::ZU => "z = e^u",
        }
    }

    /// Minimum fitted convergence order accepted for this step.
    pub fn order_floor(self) -> f64 {
        match self {
            ChainStep::Hodograph => HODOGRAPH_ORDER_FLOOR,
            _ => FD_ORDER_FLOOR,
        }
    }
}

pub const FD_ORDER_FLOOR: f64 = 3.5;
pub const HODOGRAPH_ORDER_FLOOR: f64 = 2.0;
/// Residuals at or below this are round-off.
pub const NOISE_FLOOR: f64 = 1e-12;
/// Coarsest ladder start considered to resolve the manufactured profiles.
pub const MIN_RELIABLE_N: usize = 32;
/// Largest spread between consecutive observed orders of an asymptotic ladder.
pub const MAX_ORDER_SPREAD: f64 = 0.5;
/// Resolutions per ladder. A fourth rung reaches round-off in the
/// four-derivative checks.
pub const LADDER_RUNGS: usize = 3;

/// Built-in manufactured profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainProfileSet {
    /// Smooth single-mode perturbations of the trivial states.
    #[default]
    Smooth,
    /// The trivial states themselves; every residual vanishes.
    Constant,
}

impl std::str::FromStr for ChainProfileSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smooth" | "default" => Ok(ChainProfileSet::Smooth),
            "constant" => Ok(ChainProfileSet::Constant),
            other => Err(Error::InvalidParameter(format!(
                "unknown chain profile set `{other}` (expected smooth or constant)"
            ))),
        }
    }
}

/// Residual of one step on the manufactured profile at resolution `n`.
pub fn step_residual(
    step: ChainStep,
    set: ChainProfileSet,
    n: usize,
    scheme: DerivScheme,
) -> Result<f64> {
    use std::f64::consts::PI;
    let l = 2.0 * PI;
    let grid = PeriodicGrid::new(l, n)?;
    let amp = match set {
        ChainProfileSet::Smooth => 1.0,
        ChainProfileSet::Constant => 0.0,
    };
    let mode = move |s: f64| (2.0 * PI * s / l).sin();
    match step {
        ChainStep::TauV => {
            let v = Field::from_fn(grid, |s| 1.0 + 0.1 * amp * mode(s))?;
            check_sub_tau_v(&v, scheme)
        }
        ChainStep::WV => {
            let w = MonotoneProfile::from_fn(grid, l, |s| s + 0.05 * amp * mode(s))?;
            check_sub_w_v(&w, scheme)
        }
        ChainStep::Hodograph => {
            let w = MonotoneProfile::from_fn(grid, l, |s| s + 0.05 * amp * s.sin())?;
            check_hodograph(&w, scheme)
        }
        ChainStep::EtaZ => {
            let eta = MonotoneProfile::from_fn(grid, l, |s| s + 0.05 * amp * mode(s))?;
            check_sub_eta_z(&eta, scheme)
        }
        ChainStep::ZU => {
            let u = Field::from_fn(grid, |s| 0.1 * amp * mode(s))?;
            check_sub_z_u(&u, scheme)
        }
    }
}

/// Refinement-ladder result for one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub step: ChainStep,
    pub label: String,
    pub order_floor: f64,
    pub n: Vec<usize>,
    pub residual: Vec<f64>,
    /// `log2(r_k / r_{k+1})` for consecutive ladder rungs.
    pub pairwise_order: Vec<f64>,
    /// Least-squares slope of `-log r` against `log N`.
    pub fitted_order: Option<f64>,
    /// Every residual is at round-off.
    pub exact: bool,
    pub reliable: bool,
    pub pass: bool,
    pub note: String,
}

/// A constant-slope case whose residual vanishes in closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormCase {
    pub name: String,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub scheme: DerivScheme,
    pub profiles: ChainProfileSet,
    pub steps: Vec<StepReport>,
    pub closed_form: Vec<ClosedFormCase>,
    pub pass: bool,
}

/// Fits the convergence order of a step over `base_n * 2^k`, `k < rungs`.
pub fn ladder(
    step: ChainStep,
    set: ChainProfileSet,
    base_n: usize,
    rungs: usize,
    scheme: DerivScheme,
) -> Result<StepReport> {
    let n: Vec<usize> = (0..rungs).map(|k| base_n << k).collect();
    let residual = n
        .iter()
        .map(|&n| step_residual(step, set, n, scheme))
        .collect::<Result<Vec<_>>>()?;
    let pairwise_order: Vec<f64> = residual
        .windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .collect();
    let exact = residual.iter().all(|&r| r <= NOISE_FLOOR);
    let floor = step.order_floor();
    let mut notes = Vec::new();
    let (fitted_order, reliable) = if exact {
        notes.push("all residuals at round-off".to_string());
        (None, true)
    } else {
        let fitted = fit_order(&n, &residual);
        let mut reliable = true;
        if base_n < MIN_RELIABLE_N {
            reliable = false;
            notes.push(format!("ladder starts below N = {MIN_RELIABLE_N}: under-resolved"));
        }
        if residual.iter().any(|&r| r <= NOISE_FLOOR) {
            reliable = false;
            notes.push("ladder reaches round-off; fit polluted".to_string());
        }
        let spread = pairwise_order.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - pairwise_order.iter().copied().fold(f64::INFINITY, f64::min);
        if !(spread <= MAX_ORDER_SPREAD) {
            reliable = false;
            notes.push(format!("observed orders spread by {spread:.2}: not asymptotic"));
        }
        (Some(fitted), reliable)
    };
    let pass = exact || (reliable && fitted_order.is_some_and(|p| p >= floor));
    if !exact && fitted_order.is_some_and(|p| p < floor) {
        notes.push(format!("fitted order below floor {floor}"));
    }
    Ok(StepReport {
        step,
        label: step.label().to_string(),
        order_floor: floor,
        n,
        residual,
        pairwise_order,
        fitted_order,
        exact,
        reliable,
        pass,
        note: notes.join("; "),
    })
}

/// Least-squares slope of `-ln r` against `ln N`.
pub fn fit_order(n: &[usize], r: &[f64]) -> f64 {
    let xs: Vec<f64> = n.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = r.iter().map(|&r| -r.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Constant-slope and constant-state cases, which vanish identically.
pub fn closed_form_cases(scheme: DerivScheme) -> Result<Vec<ClosedFormCase>> {
    use std::f64::consts::PI;
    let l = 2.0 * PI;
    let grid = PeriodicGrid::new(l, 32)?;
    let mut cases = Vec::new();
    let mut push = |name: &str, residual: f64| {
        cases.push(ClosedFormCase {
            name: name.to_string(),
            residual,
            pass: residual <= NOISE_FLOOR,
        })
    };
    push("tau = v^2 at v = 1", check_sub_tau_v(&Field::constant(grid, 1.0), scheme)?);
    for slope in [1.0, 2.0] {
        let w = MonotoneProfile::from_fn(grid, slope * l, |s| slope * s)?;
        push(&format!("v = w_s at w = {slope}s"), check_sub_w_v(&w, scheme)?);
        push(&format!("hodograph at w = {slope}s"), check_hodograph(&w, scheme)?);
        push(&format!("eta_s = z at eta = {slope}s"), check_sub_eta_z(&w, scheme)?);
    }
    push("z = e^u at u = 0", check_sub_z_u(&Field::zeros(grid), scheme)?);
    push("z = e^u at u = 0.7", check_sub_z_u(&Field::constant(grid, 0.7), scheme)?);
    Ok(cases)
}

/// Runs every step over the ladder `base_n, 2 base_n, 4 base_n`.
pub fn run_chain(set: ChainProfileSet, base_n: usize, scheme: DerivScheme) -> Result<ChainReport> {
    let steps = ChainStep::ALL
        .iter()
        .map(|&s| ladder(s, set, base_n, LADDER_RUNGS, scheme))
        .collect::<Result<Vec<_>>>()?;
    let closed_form = closed_form_cases(scheme)?;
    let pass = steps.iter().all(|s| s.pass) && closed_form.iter().all(|c| c.pass);
    Ok(ChainReport {
        scheme,
        profiles: set,
        steps,
        closed_form,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> PeriodicGrid<f64> {
        PeriodicGrid::new(2.0 * PI, n).unwrap()
    }

    #[test]
    fn constant_slope_values_by_hand() {
        // w = 2s: EQ6 = -1/8 + 6 = 47/8; eta = xi/2: EQ7 = 1/16 - 3 = -47/16.
        let g = grid(16);
        let w = MonotoneProfile::from_fn(g, 4.0 * PI, |s| 2.0 * s).unwrap();
        let r6 = rhs_of(EquationId::Eq6, &w, DerivScheme::Fd4).unwrap();
        assert!(r6.values().iter().all(|&v| (v - 47.0 / 8.0).abs() < 1e-13));
        let xi = PeriodicGrid::new(4.0 * PI, 16).unwrap();
        let eta = MonotoneProfile::from_fn(xi, 2.0 * PI, |x| 0.5 * x).unwrap();
        let r7 = rhs_of(EquationId::Eq7, &eta, DerivScheme::Fd4).unwrap();
        assert!(r7.values().iter().all(|&v| (v + 47.0 / 16.0).abs() < 1e-13));
        // w = s: EQ6 = 1, EQ7 = -1
        let w = MonotoneProfile::from_fn(g, 2.0 * PI, |s| s).unwrap();
        assert!(rhs_of(EquationId::Eq6, &w, DerivScheme::Fd4)
            .unwrap()
            .values()
            .iter()
            .all(|&v| (v - 1.0).abs() < 1e-14));
        assert!(rhs_of(EquationId::Eq7, &w, DerivScheme::Fd4)
            .unwrap()
            .values()
            .iter()
            .all(|&v| (v + 1.0).abs() < 1e-14));
    }

    #[test]
    fn closed_form_cases_vanish() {
        for case in closed_form_cases(DerivScheme::Fd4).unwrap() {
            assert!(case.pass, "{}: {}", case.name, case.residual);
        }
    }

    #[test]
    fn eq9_vanishes_at_zero() {
        let r = rhs_of(EquationId::Eq9, &Field::zeros(grid(32)), DerivScheme::Fd4).unwrap();
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn constraints_name_the_equation() {
        let g = grid(16);
        let mut v = vec![1.0; 16];
        v[4] = -1.0;
        let f = Field::new(g, v).unwrap();
        match rhs_of(EquationId::Eq5, &f, DerivScheme::Fd4) {
            Err(Error::Constraint { eq: EquationId::Eq5, index: 4, .. }) => {}
            other => panic!("{other:?}"),
        }
        // A periodic field cannot have a positive derivative everywhere.
        let p = Field::from_fn(g, |s| s.sin()).unwrap();
        assert!(matches!(
            rhs_of(EquationId::Eq6, &p, DerivScheme::Fd4),
            Err(Error::Constraint { eq: EquationId::Eq6, .. })
        ));
        let big = Field::constant(g, 31.0);
        assert!(matches!(check_sub_z_u(&big, DerivScheme::Fd4), Err(Error::ExpOverflow { .. })));
    }

    #[test]
    fn monotone_profile_validation() {
        let g = grid(8);
        assert!(MonotoneProfile::new(g, vec![0.0, 1.0, 2.0, 2.0, 3.0, 4.0, 5.0, 6.0], 8.0).is_err());
        // Wrap-around step must also be positive.
        assert!(MonotoneProfile::new(g, (0..8).map(|j| j as f64).collect(), 7.0).is_err());
        assert!(MonotoneProfile::new(g, (0..8).map(|j| j as f64).collect(), 8.0).is_ok());
        assert!(MonotoneProfile::new(g, (0..8).map(|j| j as f64).collect(), -1.0).is_err());
    }

    #[test]
    fn hodograph_of_lines() {
        let g = grid(32);
        let w = MonotoneProfile::from_fn(g, 2.0 * PI, |s| s).unwrap();
        let eta = hodograph_invert(&w, &grid(32)).unwrap();
        for (x, e) in grid(32).nodes().zip(eta.values()) {
            assert!((x - e).abs() < 1e-13);
        }
        let w2 = MonotoneProfile::from_fn(g, 4.0 * PI, |s| 2.0 * s).unwrap();
        let xi = PeriodicGrid::new(4.0 * PI, 32).unwrap();
        let eta = hodograph_invert(&w2, &xi).unwrap();
        assert_eq!(eta.winding(), 2.0 * PI);
        for (x, e) in xi.nodes().zip(eta.values()) {
            assert!((x / 2.0 - e).abs() < 1e-13);
        }
        assert!(hodograph_invert(&w2, &grid(32)).is_err());
    }

    #[test]
    fn refined_inverse_is_exact_to_round_off() {
        let g = grid(64);
        let w = MonotoneProfile::from_fn(g, 2.0 * PI, |s| s + 0.3 * s.sin() + 0.4).unwrap();
        let eta = hodograph_invert_refined(&w, &grid(64)).unwrap();
        for (xi, &s) in grid(64).nodes().zip(eta.values()) {
            assert!((s + 0.3 * s.sin() + 0.4 - xi).abs() < 1e-13);
        }
    }

    #[test]
    fn fit_recovers_power_law() {
        let n = [32, 64, 128, 256];
        let r: Vec<f64> = n.iter().map(|&n| 3.0 * (n as f64).powf(-4.0)).collect();
        assert!((fit_order(&n, &r) - 4.0).abs() < 1e-12);
    }
}
