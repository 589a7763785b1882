//! Linearized flow around helices (constant torsion `tau0`).
//!
//! Substituting `tau = tau0 + eps w` and keeping first order terms gives
//! `w_t + a w_s + b w_sss = 0` with
//!
//! ```text
//! a = (3/2) tau0^{1/2} + (1/2) tau0^{-3/2},   b = (1/2) tau0^{-3/2}
//! ```
//!
//! so `(a, b) = (2, 1/2)` for `tau0 = 1`. Under `f^(xi) = int f e^{-2 pi i s xi} ds`
//! each mode is multiplied by `exp(i (8 pi^3 b xi^3 - 2 pi a xi) t)`, a unit
//! modulus factor, so the L2 norm is preserved exactly.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{dispersive_dt, EvolveControls};
use crate::grid::{deriv_into, Field, PeriodicGrid};
use crate::scalar::{lit, Real};

/// Coefficients of `w_t + a w_s + b w_sss = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearCoefficients<T> {
    pub a: T,
    pub b: T,
}

pub fn linearize_coeffs<T: Real>(tau0: T) -> Result<LinearCoefficients<T>> {
    if !(tau0 > T::zero() && tau0.is_finite()) {
        return Err(Error::NonPositive {
            what: "background torsion",
            index: 0,
            value: tau0.as_f64(),
        });
    }
    let half = lit::<T>(0.5);
    let b = half * tau0.powf(lit(-1.5));
    let a = lit::<T>(1.5) * tau0.sqrt() + b;
    Ok(LinearCoefficients { a, b })
}

/// Phase rate `8 pi^3 b xi^3 - 2 pi a xi` of mode `xi`.
fn phase_rate<T: Real>(coeffs: &LinearCoefficients<T>, xi: T) -> T {
    let pi = T::PI();
    lit::<T>(8.0) * pi * pi * pi * coeffs.b * xi * xi * xi - lit::<T>(2.0) * pi * coeffs.a * xi
}

/// The helix multiplier `F_t(xi) = exp(i (4 pi^3 xi^3 - 4 pi xi) t)`.
pub fn multiplier_value<T: Real>(xi: T, t: T) -> Complex<T> {
    let coeffs = LinearCoefficients {
        a: lit(2.0),
        b: lit(0.5),
    };
    Complex::from_polar(T::one(), phase_rate(&coeffs, xi) * t)
}

/// Fourier amplitudes `w^_n ≈ f^(n / L)` of a sampled field, with the
/// normalization `w^_n = h sum_j w_j e^{-2 pi i n j / N}` so that
/// `sum_j |w_j|^2 h = (1/L) sum_n |w^_n|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum<T> {
    grid: PeriodicGrid<T>,
    /// FFT bin order: `n = 0, 1, ..., N/2, -N/2+1, ..., -1`.
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> ComplexSpectrum<T> {
    pub fn forward(field: &Field<T>) -> Self {
        let grid = *field.grid();
        let mut buf: Vec<Complex<T>> = field
            .values()
            .iter()
            .map(|&v| Complex::new(v, T::zero()))
            .collect();
        FftPlanner::<T>::new().plan_fft_forward(grid.len()).process(&mut buf);
        let h = grid.spacing();
        for c in &mut buf {
            *c = *c * h;
        }
        Self {
            grid,
            amplitudes: buf,
        }
    }

    /// Inverse transform, returning the real part after checking that the
    /// imaginary residue stays below round-off.
    pub fn inverse(&self) -> Result<Field<T>> {
        let mut buf = self.amplitudes.clone();
        FftPlanner::<T>::new()
            .plan_fft_inverse(self.grid.len())
            .process(&mut buf);
        let scale = (self.grid.spacing() * T::from_usize_exact(self.grid.len())).recip();
        let mut max_re = T::zero();
        let mut max_im = T::zero();
        let values: Vec<T> = buf
            .iter()
            .map(|c| {
                let c = *c * scale;
                max_re = max_re.max(c.re.abs());
                max_im = max_im.max(c.im.abs());
                c.re
            })
            .collect();
        let tol = lit::<T>(1e-12).max(lit::<T>(1e3) * T::epsilon()) * max_re.max(T::one());
        if max_im > tol {
            return Err(Error::ImaginaryResidue {
                residue: max_im.as_f64(),
            });
        }
        Field::new(self.grid, values)
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    /// Frequencies `xi_n = n / L` in bin order.
    pub fn frequencies(&self) -> Vec<T> {
        (0..self.grid.len()).map(|k| self.grid.frequency(k)).collect()
    }

    /// `sqrt((1/L) sum |w^_n|^2)`, equal to the discrete L2 norm of the field.
    pub fn l2_norm(&self) -> T {
        let sum = self
            .amplitudes
            .iter()
            .fold(T::zero(), |acc, c| acc + c.norm_sqr());
        (sum / self.grid.length()).sqrt()
    }
}

/// Exact evolution of the linearized equation by the Fourier multiplier.
///
/// The unpaired Nyquist mode of an even grid has no sign for its frequency;
/// the odd-order operator annihilates it and it is left unchanged.
pub fn evolve_linear_exact<T: Real>(
    w0: &Field<T>,
    t: T,
    coeffs: &LinearCoefficients<T>,
) -> Result<Field<T>> {
    let grid = *w0.grid();
    if grid.len() % 2 != 0 {
        return Err(Error::OddSpectral(grid.len()));
    }
    if !(t >= T::zero() && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("time must be non-negative, got {t}")));
    }
    let mut spec = ComplexSpectrum::forward(w0);
    for (k, c) in spec.amplitudes.iter_mut().enumerate() {
        if grid.is_nyquist(k) {
            continue;
        }
        let phase = phase_rate(coeffs, grid.frequency(k)) * t;
        *c = *c * Complex::from_polar(T::one(), phase);
    }
    spec.inverse()
}

/// Method-of-lines RK4 solution of `w_t = -a w_s - b w_sss`.
///
/// The third derivative is taken as `D(D^2 w)`, the same composition the
/// nonlinear right-hand side uses, so this is the tangent of the nonlinear
/// discretization about a constant state. Steps are `dt = sigma h^3 / b`.
pub fn evolve_linear_fd<T: Real>(
    w0: &Field<T>,
    t: T,
    coeffs: &LinearCoefficients<T>,
    controls: &EvolveControls<T>,
) -> Result<Field<T>> {
    if !(t >= T::zero() && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("time must be non-negative, got {t}")));
    }
    if !(controls.dt_safety > T::zero() && controls.dt_safety <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "dt safety factor must lie in (0, 1], got {}",
            controls.dt_safety
        )));
    }
    let grid = *w0.grid();
    let n = grid.len();
    let scheme = controls.scheme;
    let (a, b) = (coeffs.a, coeffs.b);
    let mut d1 = vec![T::zero(); n];
    let mut d2 = vec![T::zero(); n];
    let mut d3 = vec![T::zero(); n];
    let mut rhs = |w: &[T], out: &mut [T]| -> Result<()> {
        deriv_into(w, &grid, 1, scheme, &mut d1)?;
        deriv_into(w, &grid, 2, scheme, &mut d2)?;
        deriv_into(&d2, &grid, 1, scheme, &mut d3)?;
        for j in 0..n {
            out[j] = -(a * d1[j] + b * d3[j]);
        }
        Ok(())
    };

    let base_dt = dispersive_dt(grid.spacing(), b, controls.dt_safety);
    let steps = (t / base_dt).ceil().to_usize().unwrap_or(0).max(1);
    let dt = t / T::from_usize_exact(steps);
    let mut w = w0.values().to_vec();
    if t == T::zero() {
        return Field::new(grid, w);
    }
    let mut k: [Vec<T>; 4] = std::array::from_fn(|_| vec![T::zero(); n]);
    let mut stage = vec![T::zero(); n];
    let half = lit::<T>(0.5) * dt;
    let sixth = dt / lit(6.0);
    let two = lit::<T>(2.0);
    for step in 0..steps {
        rhs(&w, &mut k[0])?;
        for j in 0..n {
            stage[j] = w[j] + half * k[0][j];
        }
        rhs(&stage, &mut k[1])?;
        for j in 0..n {
            stage[j] = w[j] + half * k[1][j];
        }
        rhs(&stage, &mut k[2])?;
        for j in 0..n {
            stage[j] = w[j] + dt * k[2][j];
        }
        rhs(&stage, &mut k[3])?;
        for j in 0..n {
            w[j] = w[j] + sixth * (k[0][j] + two * (k[1][j] + k[2][j]) + k[3][j]);
            if !w[j].is_finite() {
                return Err(Error::NonFiniteState {
                    time: (dt * T::from_usize_exact(step + 1)).as_f64(),
                    index: j,
                });
            }
        }
    }
    Field::new(grid, w)
}

/// Guaranteed bound on `sup_t ||w(t)||_2` for initial data of norm `w0_norm`:
/// the multiplier has unit modulus, so the bound is the initial norm itself.
pub fn stability_certificate<T: Real>(w0_norm: T) -> Result<T> {
    if !(w0_norm >= T::zero() && w0_norm.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "norm must be non-negative, got {w0_norm}"
        )));
    }
    Ok(w0_norm)
}
