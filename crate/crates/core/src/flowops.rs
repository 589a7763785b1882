//! Differential operators of the binormal flow `X_t = tau^{-1/2} B`.
//!
//! For an arc-length preserving flow `X_t = h1 T + h2 N + h3 B` the
//! curvature and torsion evolve by a 2x2 matrix operator acting on
//! `(h3, h1)`. With `h1 = h2 = 0` and `h3 = tau^{-1/2}` curvature is frozen
//! and the torsion obeys
//!
//! ```text
//! tau_t = kappa D(tau^{-1/2}) + D((D^2(tau^{-1/2}) - tau^{3/2}) / kappa)
//! ```
//!
//! whose right-hand side is a perfect derivative, so `int tau ds` is
//! conserved exactly by any telescoping discretization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{deriv_into, DerivScheme, Field, PeriodicGrid};
use crate::scalar::Real;

/// Strictly positive torsion samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TorsionField<T>(Field<T>);

impl<T: Real> TorsionField<T> {
    pub fn new(field: Field<T>) -> Result<Self> {
        check_positive("torsion", field.values())?;
        Ok(Self(field))
    }

    pub fn from_fn(grid: PeriodicGrid<T>, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(Field::from_fn(grid, f)?)
    }

    pub fn constant(grid: PeriodicGrid<T>, c: T) -> Result<Self> {
        Self::new(Field::constant(grid, c))
    }

    pub fn field(&self) -> &Field<T> {
        &self.0
    }

    pub fn into_field(self) -> Field<T> {
        self.0
    }

    pub fn grid(&self) -> &PeriodicGrid<T> {
        self.0.grid()
    }

    pub fn values(&self) -> &[T] {
        self.0.values()
    }
}

impl<T> AsRef<Field<T>> for TorsionField<T> {
    fn as_ref(&self) -> &Field<T> {
        &self.0
    }
}

pub(crate) fn check_positive<T: Real>(what: &'static str, values: &[T]) -> Result<()> {
    match values.iter().position(|v| !(*v > T::zero())) {
        Some(index) => Err(Error::NonPositive {
            what,
            index,
            value: values[index].as_f64(),
        }),
        None => Ok(()),
    }
}

/// Constant curvature `kappa > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CurvatureConstant<T>(T);

impl<T: Real> CurvatureConstant<T> {
    pub fn new(kappa: T) -> Result<Self> {
        if kappa > T::zero() && kappa.is_finite() {
            Ok(Self(kappa))
        } else {
            Err(Error::NonPositive {
                what: "curvature",
                index: 0,
                value: kappa.as_f64(),
            })
        }
    }

    /// The normalized curvature `kappa = 1`.
    pub fn unit() -> Self {
        Self(T::one())
    }

    pub fn get(self) -> T {
        self.0
    }
}

/// Tangential and binormal coefficients `(h1, h3)` of a flow. The normal
/// coefficient `h2` is identically zero for arc-length preserving flows
/// without tangential reparametrization.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowCoefficients<T> {
    pub h1: Field<T>,
    pub h3: Field<T>,
}

impl<T: Real> FlowCoefficients<T> {
    pub fn new(h1: Field<T>, h3: Field<T>) -> Result<Self> {
        if h1.grid() != h3.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { h1, h3 })
    }

    /// The curvature-preserving binormal flow: `h1 = 0`, `h3 = tau^{-1/2}`.
    pub fn binormal(tau: &TorsionField<T>) -> Self {
        Self {
            h1: Field::zeros(*tau.grid()),
            h3: tau.field().map_total(|t| t.sqrt().recip()),
        }
    }
}

/// Scratch buffers for repeated right-hand side evaluations on one grid.
#[derive(Debug, Clone)]
pub(crate) struct RhsWorkspace<T> {
    g: Vec<T>,
    dg: Vec<T>,
    inner: Vec<T>,
}

impl<T: Real> RhsWorkspace<T> {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            g: vec![T::zero(); n],
            dg: vec![T::zero(); n],
            inner: vec![T::zero(); n],
        }
    }
}

/// Allocation-free core of [`rhs_torsion`].
pub(crate) fn rhs_torsion_into<T: Real>(
    tau: &[T],
    grid: &PeriodicGrid<T>,
    kappa: T,
    scheme: DerivScheme,
    ws: &mut RhsWorkspace<T>,
    out: &mut [T],
) -> Result<()> {
    for (j, &t) in tau.iter().enumerate() {
        if !(t > T::zero()) {
            return Err(Error::NonPositive {
                what: "torsion",
                index: j,
                value: t.as_f64(),
            });
        }
        ws.g[j] = t.sqrt().recip();
    }
    deriv_into(&ws.g, grid, 2, scheme, &mut ws.dg)?;
    let inv_kappa = kappa.recip();
    for j in 0..tau.len() {
        ws.inner[j] = (ws.dg[j] - tau[j] * tau[j].sqrt()) * inv_kappa;
    }
    deriv_into(&ws.g, grid, 1, scheme, &mut ws.dg)?;
    deriv_into(&ws.inner, grid, 1, scheme, out)?;
    for (o, &d) in out.iter_mut().zip(&ws.dg) {
        *o = *o + kappa * d;
    }
    Ok(())
}

/// Right-hand side of the torsion evolution at constant curvature.
///
/// Composed as `g = tau^{-1/2}`, `inner = (D^2 g - tau^{3/2}) / kappa`,
/// `result = kappa D g + D inner`, every derivative taken with `scheme`.
pub fn rhs_torsion<T: Real>(
    tau: &TorsionField<T>,
    kappa: CurvatureConstant<T>,
    scheme: DerivScheme,
) -> Result<Field<T>> {
    let n = tau.values().len();
    let mut ws = RhsWorkspace::new(n);
    let mut out = vec![T::zero(); n];
    rhs_torsion_into(tau.values(), tau.grid(), kappa.get(), scheme, &mut ws, &mut out)?;
    Field::new(*tau.grid(), out)
}

/// Applies the curvature/torsion evolution operator `P` of an arc-length
/// preserving flow to `(h3, h1)`.
///
/// Products are read as operators acting right to left: `tau D` is
/// `h -> tau * D h` and `D tau` is `h -> D(tau * h)`. `kappa` may vary
/// along the curve but must stay positive.
///
/// ```text
/// kappa_t = -tau D h3 - D(tau h3) + D^2((1/kappa) D h1) - (tau^2/kappa) D h1 + D(kappa h1)
/// tau_t   = D((1/kappa) D^2 h3) - D((tau^2/kappa) h3) + kappa D h3
///         + D[(tau/kappa^2) D(D h1) + D((tau/kappa^2) D h1)] + tau D h1 + D(tau h1)
/// ```
pub fn apply_p<T: Real>(
    coeffs: &FlowCoefficients<T>,
    kappa: &Field<T>,
    tau: &Field<T>,
    scheme: DerivScheme,
) -> Result<(Field<T>, Field<T>)> {
    check_positive("curvature", kappa.values())?;
    let grid = *tau.grid();
    if kappa.grid() != &grid || coeffs.h1.grid() != &grid || coeffs.h3.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    let d = |f: &Field<T>| f.deriv(1, scheme);
    let d2 = |f: &Field<T>| f.deriv(2, scheme);
    let mul = |a: &Field<T>, b: &Field<T>| a.zip_with(b, |x, y| x * y);
    let add = |a: &Field<T>, b: &Field<T>| a.zip_with(b, |x, y| x + y);
    let sub = |a: &Field<T>, b: &Field<T>| a.zip_with(b, |x, y| x - y);

    let (h1, h3) = (&coeffs.h1, &coeffs.h3);
    let inv_kappa = kappa.map_total(|k| k.recip());
    let tau2_over_kappa = tau.zip_with(kappa, |t, k| t * t / k)?;
    let tau_over_kappa2 = tau.zip_with(kappa, |t, k| t / (k * k))?;

    let dh3 = d(h3)?;
    let dh1 = d(h1)?;

    // kappa_t row
    let k_h3 = sub(&mul(tau, &dh3)?.scale(-T::one()), &d(&mul(tau, h3)?)?)?;
    let k_h1 = add(
        &sub(&d2(&mul(&inv_kappa, &dh1)?)?, &mul(&tau2_over_kappa, &dh1)?)?,
        &d(&mul(kappa, h1)?)?,
    )?;
    let kappa_t = add(&k_h3, &k_h1)?;

    // tau_t row
    let t_h3 = add(
        &sub(&d(&mul(&inv_kappa, &d2(h3)?)?)?, &d(&mul(&tau2_over_kappa, h3)?)?)?,
        &mul(kappa, &dh3)?,
    )?;
    let bracket = add(
        &mul(&tau_over_kappa2, &d(&dh1)?)?,
        &d(&mul(&tau_over_kappa2, &dh1)?)?,
    )?;
    let t_h1 = add(&add(&d(&bracket)?, &mul(tau, &dh1)?)?, &d(&mul(tau, h1)?)?)?;
    let tau_t = add(&t_h3, &t_h1)?;

    Ok((kappa_t, tau_t))
}

/// The first two conserved densities `(int sqrt(tau) ds, int tau ds)`.
pub fn conserved_densities<T: Real>(tau: &TorsionField<T>) -> (T, T) {
    let f = tau.field();
    (f.map_total(|t| t.sqrt()).integrate(), f.integrate())
}
