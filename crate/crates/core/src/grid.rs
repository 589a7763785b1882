//! Periodic uniform grids, sampled fields, discrete derivatives and quadrature.
//!
//! Every field lives on a circle of circumference `L` sampled at `N` equally
//! spaced nodes `s_j = j h`, `h = L / N`. Indexing is modulo `N`. Finite
//! difference stencils wrap around the seam; the spectral scheme uses the
//! transform convention `f^(xi) = int f(s) exp(-2 pi i s xi) ds`, so mode `n`
//! has frequency `xi_n = n / L`.

use std::fmt;
use std::str::FromStr;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Smallest node count accepted by [`PeriodicGrid::new`].
pub const MIN_NODES: usize = 8;

/// Uniform sampling of a circle of circumference `length` with `count` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicGrid<T> {
    length: T,
    count: usize,
}

impl<T: Real> PeriodicGrid<T> {
    pub fn new(length: T, count: usize) -> Result<Self> {
        if !(length.is_finite() && length > T::zero()) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        if count < MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_NODES} nodes, got {count}"
            )));
        }
        Ok(Self { length, count })
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> T {
        self.length / T::from_usize_exact(self.count)
    }

    pub fn node(&self, j: usize) -> T {
        T::from_usize_exact(j) * self.spacing()
    }

    pub fn nodes(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.count).map(move |j| self.node(j))
    }

    /// Signed mode number of FFT bin `k`, in `-N/2+1 ..= N/2`.
    pub fn mode_number(&self, k: usize) -> i64 {
        let n = self.count as i64;
        let k = k as i64;
        if k <= n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Frequency `xi = n / L` of FFT bin `k`.
    pub fn frequency(&self, k: usize) -> T {
        T::from_i64(self.mode_number(k)).expect("mode number fits scalar") / self.length
    }

    /// True when bin `k` is the unpaired Nyquist mode of an even grid.
    pub fn is_nyquist(&self, k: usize) -> bool {
        self.count % 2 == 0 && k == self.count / 2
    }

    /// Maps an arbitrary index onto `0..N`.
    pub fn wrap(&self, j: isize) -> usize {
        j.rem_euclid(self.count as isize) as usize
    }
}

/// Discretization of `D_s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivScheme {
    /// Second-order central differences.
    Fd2,
    /// Fourth-order central differences.
    #[default]
    Fd4,
    /// Discrete Fourier differentiation (even `N` only).
    Spectral,
}

impl DerivScheme {
    /// Formal order of accuracy on smooth periodic data. `None` for spectral.
    pub fn order(self) -> Option<u32> {
        match self {
            DerivScheme::Fd2 => Some(2),
            DerivScheme::Fd4 => Some(4),
            DerivScheme::Spectral => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DerivScheme::Fd2 => "fd2",
            DerivScheme::Fd4 => "fd4",
            DerivScheme::Spectral => "spectral",
        }
    }
}

impl fmt::Display for DerivScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DerivScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fd2" => Ok(DerivScheme::Fd2),
            "fd4" => Ok(DerivScheme::Fd4),
            "spectral" => Ok(DerivScheme::Spectral),
            other => Err(Error::InvalidParameter(format!(
                "unknown derivative scheme `{other}` (expected fd2, fd4 or spectral)"
            ))),
        }
    }
}

/// Real samples of a function on a [`PeriodicGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field<T> {
    grid: PeriodicGrid<T>,
    values: Vec<T>,
}

impl<T: Real> Field<T> {
    pub fn new(grid: PeriodicGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some((index, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                index,
                value: v.as_f64(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at the grid nodes. Fails if any sample is non-finite.
    pub fn from_fn(grid: PeriodicGrid<T>, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    pub fn constant(grid: PeriodicGrid<T>, c: T) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: PeriodicGrid<T>) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn grid(&self) -> &PeriodicGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn deriv(&self, order: u32, scheme: DerivScheme) -> Result<Self> {
        deriv(self, order, scheme)
    }

    pub fn integrate(&self) -> T {
        integrate(self)
    }

    pub fn pointwise(&self, map: impl Fn(T) -> T) -> Result<Self> {
        pointwise(self, map)
    }

    /// Sample-wise map without a finiteness check, for maps that are total.
    pub(crate) fn map_total(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Combines two fields on the same grid sample by sample.
    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, a: T) -> Self {
        self.map_total(|v| a * v)
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, &v| if v.abs() > m { v.abs() } else { m })
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Index and value of the smallest sample.
    pub fn argmin(&self) -> (usize, T) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, T::infinity()), |acc, (j, v)| if v < acc.1 { (j, v) } else { acc })
    }

    /// Discrete L2 norm `sqrt(h sum f_j^2)`.
    pub fn l2_norm(&self) -> T {
        (self.values.iter().fold(T::zero(), |acc, &v| acc + v * v) * self.grid.spacing()).sqrt()
    }

    /// Max-norm distance to another field on the same grid.
    pub fn max_diff(&self, other: &Self) -> Result<T> {
        Ok(self.zip_with(other, |a, b| a - b)?.max_abs())
    }

    /// Cyclic shift: `out[j] = self[j - shift]`.
    pub fn shifted(&self, shift: isize) -> Self {
        let n = self.len();
        let values = (0..n)
            .map(|j| self.values[self.grid.wrap(j as isize - shift)])
            .collect();
        Self {
            grid: self.grid,
            values,
        }
    }
}

/// Discrete derivative of order 1, 2 or 3.
pub fn deriv<T: Real>(f: &Field<T>, order: u32, scheme: DerivScheme) -> Result<Field<T>> {
    let mut out = vec![T::zero(); f.len()];
    deriv_into(&f.values, &f.grid, order, scheme, &mut out)?;
    Ok(Field {
        grid: f.grid,
        values: out,
    })
}

/// Rectangle-rule quadrature `h sum f_j`; exact for trigonometric polynomials
/// of degree below `N`.
pub fn integrate<T: Real>(f: &Field<T>) -> T {
    f.grid.spacing() * f.values.iter().fold(T::zero(), |acc, &v| acc + v)
}

/// Applies `map` sample-wise, rejecting any non-finite result.
pub fn pointwise<T: Real>(f: &Field<T>, map: impl Fn(T) -> T) -> Result<Field<T>> {
    let mut values = Vec::with_capacity(f.len());
    for (index, &v) in f.values.iter().enumerate() {
        let y = map(v);
        if !y.is_finite() {
            return Err(Error::NonFinite {
                index,
                value: y.as_f64(),
            });
        }
        values.push(y);
    }
    Ok(Field {
        grid: f.grid,
        values,
    })
}

pub(crate) fn deriv_into<T: Real>(
    src: &[T],
    grid: &PeriodicGrid<T>,
    order: u32,
    scheme: DerivScheme,
    out: &mut [T],
) -> Result<()> {
    if !(1..=3).contains(&order) {
        return Err(Error::InvalidOrder(order));
    }
    match scheme {
        DerivScheme::Fd2 | DerivScheme::Fd4 => {
            let (weights, denom) = stencil::<T>(scheme, order);
            apply_stencil(src, weights, denom * grid.spacing().powi(order as i32), out);
            Ok(())
        }
        DerivScheme::Spectral => spectral_deriv(src, grid, order, out),
    }
}

/// Central stencil weights for offsets `-r..=r` and their common denominator.
fn stencil<T: Real>(scheme: DerivScheme, order: u32) -> (&'static [f64], T) {
    const FD2_1: [f64; 3] = [-1.0, 0.0, 1.0];
    const FD2_2: [f64; 3] = [1.0, -2.0, 1.0];
    const FD2_3: [f64; 5] = [-1.0, 2.0, 0.0, -2.0, 1.0];
    const FD4_1: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
    const FD4_2: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
    const FD4_3: [f64; 7] = [1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0];
    match (scheme, order) {
        (DerivScheme::Fd2, 1) => (&FD2_1, lit(2.0)),
        (DerivScheme::Fd2, 2) => (&FD2_2, T::one()),
        (DerivScheme::Fd2, 3) => (&FD2_3, lit(2.0)),
        (DerivScheme::Fd4, 1) => (&FD4_1, lit(12.0)),
        (DerivScheme::Fd4, 2) => (&FD4_2, lit(12.0)),
        (DerivScheme::Fd4, 3) => (&FD4_3, lit(8.0)),
        _ => unreachable!("validated by caller"),
    }
}

/// Applies integer weights pairwise, `c_k (f[j+k] -/+ f[j-k])`, then divides
/// once, so odd derivatives of a constant vanish exactly.
fn apply_stencil<T: Real>(src: &[T], weights: &[f64], denom: T, out: &mut [T]) {
    let n = src.len();
    let r = weights.len() / 2;
    let even = weights[r + 1] == weights[r - 1];
    let center = if even { lit::<T>(weights[r]) } else { T::zero() };
    let mut w = [T::zero(); 3];
    for (k, wk) in w.iter_mut().enumerate().take(r) {
        *wk = lit(weights[r + 1 + k]);
    }
    let w = &w[..r];
    let point = |j: usize, right: &dyn Fn(usize) -> T, left: &dyn Fn(usize) -> T| {
        let mut acc = center * src[j];
        for (k, &wk) in w.iter().enumerate() {
            let (a, b) = (right(k + 1), left(k + 1));
            acc = acc + wk * if even { a + b } else { a - b };
        }
        acc / denom
    };
    for j in (0..r).chain(n - r..n) {
        out[j] = point(j, &|k| src[(j + k) % n], &|k| src[(j + n - k) % n]);
    }
    for j in r..n - r {
        let mut acc = center * src[j];
        for (k, &wk) in w.iter().enumerate() {
            let (a, b) = (src[j + k + 1], src[j - k - 1]);
            acc = acc + wk * if even { a + b } else { a - b };
        }
        out[j] = acc / denom;
    }
}

fn spectral_deriv<T: Real>(
    src: &[T],
    grid: &PeriodicGrid<T>,
    order: u32,
    out: &mut [T],
) -> Result<()> {
    let n = src.len();
    if n % 2 != 0 {
        return Err(Error::OddSpectral(n));
    }
    let mut planner = FftPlanner::<T>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex<T>> = src.iter().map(|&v| Complex::new(v, T::zero())).collect();
    forward.process(&mut buf);
    let two_pi = lit::<T>(2.0) * T::PI();
    for (k, c) in buf.iter_mut().enumerate() {
        if grid.is_nyquist(k) && order % 2 == 1 {
            // Odd derivatives of the unpaired Nyquist mode are not real-representable.
            *c = Complex::new(T::zero(), T::zero());
            continue;
        }
        let ik = Complex::new(T::zero(), two_pi * grid.frequency(k));
        let mut factor = Complex::new(T::one(), T::zero());
        for _ in 0..order {
            factor = factor * ik;
        }
        *c = *c * factor;
    }
    inverse.process(&mut buf);
    let scale = T::one() / T::from_usize_exact(n);
    for (o, c) in out.iter_mut().zip(&buf) {
        *o = c.re * scale;
    }
    Ok(())
}
