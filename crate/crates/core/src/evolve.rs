//! Method-of-lines time integration of the torsion evolution.
//!
//! Classical RK4 in time with the spatial operator of
//! [`rhs_torsion`](crate::flowops::rhs_torsion). The step is recomputed every
//! step from the current minimum torsion, since the dispersive coefficient
//! `tau^{-3/2}/2` is largest where the torsion is smallest. Positivity is
//! monitored, never enforced.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flowops::{
    check_positive, conserved_densities, rhs_torsion_into, CurvatureConstant, RhsWorkspace,
    TorsionField,
};
use crate::grid::{DerivScheme, Field, PeriodicGrid};
use crate::scalar::{lit, Real};

pub const DEFAULT_DT_SAFETY: f64 = 0.05;
pub const DEFAULT_POSITIVITY_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveControls<T> {
    pub scheme: DerivScheme,
    /// Safety factor `sigma` in `dt = sigma h^3 / b_max`.
    pub dt_safety: T,
    pub t_end: T,
    pub snapshot_stride: usize,
    pub positivity_floor: T,
}

impl<T: Real> EvolveControls<T> {
    pub fn new(t_end: T) -> Self {
        Self {
            scheme: DerivScheme::default(),
            dt_safety: lit(DEFAULT_DT_SAFETY),
            t_end,
            snapshot_stride: 1000,
            positivity_floor: lit(DEFAULT_POSITIVITY_FLOOR),
        }
    }

    pub fn with_safety(mut self, sigma: T) -> Self {
        self.dt_safety = sigma;
        self
    }

    pub fn with_scheme(mut self, scheme: DerivScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_safety > T::zero() && self.dt_safety <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "dt safety factor must lie in (0, 1], got {}",
                self.dt_safety
            )));
        }
        if !(self.t_end > T::zero() && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidParameter("snapshot stride must be at least 1".into()));
        }
        if !(self.positivity_floor >= T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "positivity floor must be non-negative, got {}",
                self.positivity_floor
            )));
        }
        Ok(())
    }
}

/// Dispersive step `sigma h^3 / b` for a third-order term with coefficient `b`.
pub fn dispersive_dt<T: Real>(h: T, b: T, sigma: T) -> T {
    sigma * h.powi(3) / b
}

/// Largest dispersive coefficient `b_max = (min tau)^{-3/2} / 2`.
fn max_dispersion<T: Real>(min_tau: T) -> T {
    lit::<T>(0.5) * min_tau.powf(lit(-1.5))
}

/// Stable explicit step for the current torsion, never exceeding `t_end`.
pub fn stable_dt<T: Real>(tau: &TorsionField<T>, controls: &EvolveControls<T>) -> T {
    let b = max_dispersion(tau.field().min());
    dispersive_dt(tau.grid().spacing(), b, controls.dt_safety).min(controls.t_end)
}

/// Reusable RK4 integrator for the torsion equation on one grid.
#[derive(Debug, Clone)]
pub struct Rk4Stepper<T> {
    grid: PeriodicGrid<T>,
    kappa: T,
    scheme: DerivScheme,
    floor: T,
    ws: RhsWorkspace<T>,
    k: [Vec<T>; 4],
    stage: Vec<T>,
}

impl<T: Real> Rk4Stepper<T> {
    pub fn new(
        grid: PeriodicGrid<T>,
        kappa: CurvatureConstant<T>,
        scheme: DerivScheme,
        positivity_floor: T,
    ) -> Self {
        let n = grid.len();
        Self {
            grid,
            kappa: kappa.get(),
            scheme,
            floor: positivity_floor,
            ws: RhsWorkspace::new(n),
            k: std::array::from_fn(|_| vec![T::zero(); n]),
            stage: vec![T::zero(); n],
        }
    }

    /// Evaluates the right-hand side at the current stage into `k[which]`.
    fn rhs(&mut self, which: usize, time: T) -> Result<()> {
        rhs_torsion_into(
            &self.stage,
            &self.grid,
            self.kappa,
            self.scheme,
            &mut self.ws,
            &mut self.k[which],
        )
        .map_err(|e| stage_error(e, time))
    }

    /// Advances `state` (torsion samples at time `t`) by `dt` in place.
    pub fn step(&mut self, state: &mut [T], t: T, dt: T) -> Result<()> {
        let half = lit::<T>(0.5) * dt;
        self.stage.copy_from_slice(state);
        self.rhs(0, t)?;
        for (st, (&y, &k)) in self.stage.iter_mut().zip(state.iter().zip(&self.k[0])) {
            *st = y + half * k;
        }
        self.rhs(1, t + half)?;
        for (st, (&y, &k)) in self.stage.iter_mut().zip(state.iter().zip(&self.k[1])) {
            *st = y + half * k;
        }
        self.rhs(2, t + half)?;
        for (st, (&y, &k)) in self.stage.iter_mut().zip(state.iter().zip(&self.k[2])) {
            *st = y + dt * k;
        }
        self.rhs(3, t + dt)?;
        let sixth = dt / lit(6.0);
        let two = lit::<T>(2.0);
        let t_new = t + dt;
        for (j, y) in state.iter_mut().enumerate() {
            let incr = self.k[0][j] + two * (self.k[1][j] + self.k[2][j]) + self.k[3][j];
            *y = *y + sixth * incr;
            if !y.is_finite() {
                return Err(Error::NonFiniteState {
                    time: t_new.as_f64(),
                    index: j,
                });
            }
        }
        if let Some((index, &value)) = state
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > self.floor))
        {
            return Err(Error::PositivityViolation {
                time: t_new.as_f64(),
                index,
                value: value.as_f64(),
                floor: self.floor.as_f64(),
            });
        }
        Ok(())
    }
}

fn stage_error(e: Error, time: impl Real) -> Error {
    match e {
        Error::NonPositive { index, value, .. } if value.is_finite() => Error::PositivityViolation {
            time: time.as_f64(),
            index,
            value,
            floor: 0.0,
        },
        Error::NonPositive { index, .. } => Error::NonFiniteState {
            time: time.as_f64(),
            index,
        },
        other => other,
    }
}

/// One RK4 step of size `dt` from `tau`.
pub fn step_rk4<T: Real>(
    tau: &TorsionField<T>,
    dt: T,
    kappa: CurvatureConstant<T>,
    scheme: DerivScheme,
    positivity_floor: T,
) -> Result<TorsionField<T>> {
    if !(dt > T::zero() && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    let mut stepper = Rk4Stepper::new(*tau.grid(), kappa, scheme, positivity_floor);
    let mut state = tau.values().to_vec();
    stepper.step(&mut state, T::zero(), dt)?;
    TorsionField::new(Field::new(*tau.grid(), state)?)
}

/// Per-snapshot diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics<T> {
    pub t: T,
    /// `int sqrt(tau) ds`
    pub i1: T,
    /// `int tau ds`
    pub i2: T,
    pub min_tau: T,
    pub max_rhs: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum RunStatus {
    Completed,
    Aborted { time: f64, reason: String },
}

/// Time-stamped torsion states with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub grid: PeriodicGrid<T>,
    pub kappa: T,
    pub controls: EvolveControls<T>,
    pub times: Vec<T>,
    /// Step count at each snapshot.
    pub steps: Vec<usize>,
    pub states: Vec<TorsionField<T>>,
    pub diagnostics: Vec<Diagnostics<T>>,
    pub status: RunStatus,
}

impl<T: Real> Trajectory<T> {
    pub fn is_complete(&self) -> bool {
        self.status == RunStatus::Completed
    }

    pub fn initial(&self) -> &TorsionField<T> {
        &self.states[0]
    }

    pub fn last(&self) -> &TorsionField<T> {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn final_time(&self) -> T {
        *self.times.last().expect("trajectory holds the initial time")
    }

    /// Largest `|I2(t) - I2(0)| / |I2(0)|` over the snapshots.
    pub fn i2_drift(&self) -> T {
        relative_drift(self.diagnostics.iter().map(|d| d.i2))
    }

    /// Largest `|I1(t) - I1(0)| / |I1(0)|` over the snapshots.
    pub fn i1_drift(&self) -> T {
        relative_drift(self.diagnostics.iter().map(|d| d.i1))
    }

    pub fn min_tau(&self) -> T {
        self.diagnostics
            .iter()
            .map(|d| d.min_tau)
            .fold(T::infinity(), T::min)
    }

    /// Max-norm deviation of each snapshot from the initial state.
    pub fn max_deviation(&self) -> T {
        let first = self.initial().field();
        self.states
            .iter()
            .map(|s| s.field().max_diff(first).expect("states share one grid"))
            .fold(T::zero(), T::max)
    }
}

fn relative_drift<T: Real>(mut values: impl Iterator<Item = T>) -> T {
    let Some(first) = values.next() else {
        return T::zero();
    };
    values.fold(T::zero(), |m, v| m.max(((v - first) / first).abs()))
}

fn diagnose<T: Real>(
    tau: &TorsionField<T>,
    t: T,
    kappa: CurvatureConstant<T>,
    scheme: DerivScheme,
    ws: &mut RhsWorkspace<T>,
    scratch: &mut [T],
) -> Diagnostics<T> {
    let (i1, i2) = conserved_densities(tau);
    let max_rhs = match rhs_torsion_into(tau.values(), tau.grid(), kappa.get(), scheme, ws, scratch) {
        Ok(()) => scratch.iter().fold(T::zero(), |m, v| m.max(v.abs())),
        Err(_) => T::nan(),
    };
    Diagnostics {
        t,
        i1,
        i2,
        min_tau: tau.field().min(),
        max_rhs,
    }
}

/// Evolves `tau0` to `controls.t_end`.
///
/// Invalid controls are an error. A numerical failure mid-run (positivity
/// loss or a non-finite state) is not: the trajectory up to the last good
/// step is returned with [`RunStatus::Aborted`].
pub fn evolve<T: Real>(
    tau0: &TorsionField<T>,
    kappa: CurvatureConstant<T>,
    controls: &EvolveControls<T>,
) -> Result<Trajectory<T>> {
    controls.validate()?;
    check_positive("torsion", tau0.values())?;
    let grid = *tau0.grid();
    let n = grid.len();
    let mut stepper = Rk4Stepper::new(grid, kappa, controls.scheme, controls.positivity_floor);
    let mut ws = RhsWorkspace::new(n);
    let mut scratch = vec![T::zero(); n];

    let mut traj = Trajectory {
        grid,
        kappa: kappa.get(),
        controls: *controls,
        times: vec![T::zero()],
        steps: vec![0],
        states: vec![tau0.clone()],
        diagnostics: vec![diagnose(tau0, T::zero(), kappa, controls.scheme, &mut ws, &mut scratch)],
        status: RunStatus::Completed,
    };

    let mut state = tau0.values().to_vec();
    let mut t = T::zero();
    let mut step = 0usize;
    let h3 = grid.spacing().powi(3);
    let end_tol = lit::<T>(1e-12) * controls.t_end;
    while controls.t_end - t > end_tol {
        let min_tau = state.iter().copied().fold(T::infinity(), T::min);
        let mut dt = dispersive_dt(T::one(), max_dispersion(min_tau), controls.dt_safety) * h3;
        let last = t + dt >= controls.t_end - end_tol;
        if last {
            dt = controls.t_end - t;
        }
        let backup = state.clone();
        if let Err(e) = stepper.step(&mut state, t, dt) {
            traj.status = RunStatus::Aborted {
                time: t.as_f64(),
                reason: e.to_string(),
            };
            state = backup;
            if traj.steps.last() != Some(&step) {
                record(&mut traj, &state, t, step, kappa, &mut ws, &mut scratch);
            }
            return Ok(traj);
        }
        step += 1;
        t = if last { controls.t_end } else { t + dt };
        if last || step % controls.snapshot_stride == 0 {
            record(&mut traj, &state, t, step, kappa, &mut ws, &mut scratch);
        }
    }
    Ok(traj)
}

fn record<T: Real>(
    traj: &mut Trajectory<T>,
    state: &[T],
    t: T,
    step: usize,
    kappa: CurvatureConstant<T>,
    ws: &mut RhsWorkspace<T>,
    scratch: &mut [T],
) {
    let tau = TorsionField::new(Field::new(traj.grid, state.to_vec()).expect("finite state"))
        .expect("positive state");
    let d = diagnose(&tau, t, kappa, traj.controls.scheme, ws, scratch);
    traj.times.push(t);
    traj.steps.push(step);
    traj.states.push(tau);
    traj.diagnostics.push(d);
}
