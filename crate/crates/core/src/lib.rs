//! Binormal flow of constant-curvature space curves.
//!
//! The flow `X_t = tau^{-1/2} B` keeps the curvature fixed and moves the
//! torsion by a third-order dispersive equation. This crate evolves that
//! equation, builds its stationary solutions, checks the chain of
//! substitutions that links it to the Calogero–Degasperis–Fokas equation,
//! studies the linearization about helices and reconstructs curves from
//! `(kappa, tau)`.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod error;
pub mod evolve;
pub mod figures;
pub mod flowops;
pub mod geometry;
pub mod grid;
pub mod interp;
pub mod io;
pub mod linear;
pub mod plot;
pub mod scalar;
pub mod stationary;

pub use chain::{
    check_hodograph, check_sub_eta_z, check_sub_tau_v, check_sub_w_v, check_sub_z_u,
    hodograph_invert, hodograph_invert_refined, rhs_of, run_chain, ChainProfileSet, ChainReport,
    ChainStep, EquationId, MonotoneProfile, Profile,
};
pub use error::{Error, Result};
pub use evolve::{evolve, stable_dt, step_rk4, EvolveControls, RunStatus, Trajectory};
pub use flowops::{apply_p, rhs_torsion, CurvatureConstant, FlowCoefficients, TorsionField};
pub use geometry::{
    estimate_kappa_tau, frenet_integrate, project, Curve3D, FrenetState, Plane, Polyline2D,
    TorsionSource, Vec3,
};
pub use grid::{deriv, integrate, pointwise, DerivScheme, Field, PeriodicGrid};
pub use linear::{
    evolve_linear_exact, evolve_linear_fd, linearize_coeffs, multiplier_value,
    stability_certificate, LinearCoefficients,
};
pub use scalar::Real;
pub use stationary::{
    explicit_a0, half_period, profile_samples, turning_points, Branch, StationaryParams,
};

pub type Grid = PeriodicGrid<f64>;
pub type Field64 = Field<f64>;
pub type Torsion = TorsionField<f64>;
pub type Curvature = CurvatureConstant<f64>;
pub type Controls = EvolveControls<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type Curve = Curve3D<f64>;
pub type Frenet = FrenetState<f64>;
pub type Monotone = MonotoneProfile<f64>;
