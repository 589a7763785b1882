//! One-dimensional interpolation: shape-preserving cubic Hermite (PCHIP) on
//! strictly increasing abscissae, its periodic wrapper, and trigonometric
//! interpolation of periodic samples.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::scalar::{lit, Real};

/// Monotone piecewise cubic Hermite interpolant (Fritsch–Carlson slopes).
///
/// On monotone data the interpolant is monotone. Accuracy is third order in
/// the node spacing on smooth data.
#[derive(Debug, Clone)]
pub struct MonotoneCubic<T> {
    xs: Vec<T>,
    ys: Vec<T>,
    slopes: Vec<T>,
}

impl<T: Real> MonotoneCubic<T> {
    pub fn new(xs: Vec<T>, ys: Vec<T>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 3 {
            return Err(Error::InvalidParameter(
                "monotone cubic needs at least 3 matching samples".into(),
            ));
        }
        if let Some(index) = xs.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NotMonotone { index: index + 1 });
        }
        let slopes = pchip_slopes(&xs, &ys);
        Ok(Self { xs, ys, slopes })
    }

    pub fn domain(&self) -> (T, T) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    fn interval(&self, x: T) -> usize {
        let n = self.xs.len();
        match self.xs.binary_search_by(|p| p.partial_cmp(&x).expect("finite abscissa")) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    /// Value at `x`; extrapolates with the end cubic outside the domain.
    pub fn eval(&self, x: T) -> T {
        let i = self.interval(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let two = lit::<T>(2.0);
        let three = lit::<T>(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = three * t2 - two * t3;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }

    /// First derivative at `x`.
    pub fn eval_deriv(&self, x: T) -> T {
        let i = self.interval(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let six = lit::<T>(6.0);
        let d00 = (six * t2 - six * t) / h;
        let d10 = lit::<T>(3.0) * t2 - lit::<T>(4.0) * t + T::one();
        let d01 = (six * t - six * t2) / h;
        let d11 = lit::<T>(3.0) * t2 - lit::<T>(2.0) * t;
        d00 * self.ys[i] + d10 * self.slopes[i] + d01 * self.ys[i + 1] + d11 * self.slopes[i + 1]
    }
}

fn pchip_slopes<T: Real>(xs: &[T], ys: &[T]) -> Vec<T> {
    let n = xs.len();
    let h: Vec<T> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<T> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    let mut d = vec![T::zero(); n];
    let two = lit::<T>(2.0);
    for i in 1..n - 1 {
        let (a, b) = (delta[i - 1], delta[i]);
        if a * b > T::zero() {
            let w1 = two * h[i] + h[i - 1];
            let w2 = h[i] + two * h[i - 1];
            d[i] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

/// Shape-preserving three-point end condition.
fn end_slope<T: Real>(h0: T, h1: T, del0: T, del1: T) -> T {
    let two = lit::<T>(2.0);
    let three = lit::<T>(3.0);
    let d = ((two * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        T::zero()
    } else if del0.signum() != del1.signum() && d.abs() > (three * del0).abs() {
        three * del0
    } else {
        d
    }
}

/// Number of periodic images padded on each side before building the cubic.
const PERIODIC_PAD: usize = 3;

/// Monotone cubic interpolation of a periodic field, evaluated anywhere on ℝ.
#[derive(Debug, Clone)]
pub struct PeriodicCubic<T> {
    period: T,
    inner: MonotoneCubic<T>,
}

impl<T: Real> PeriodicCubic<T> {
    pub fn new(field: &Field<T>) -> Result<Self> {
        let grid = *field.grid();
        let n = grid.len() as isize;
        let pad = PERIODIC_PAD as isize;
        let h = grid.spacing();
        let mut xs = Vec::with_capacity(grid.len() + 2 * PERIODIC_PAD + 1);
        let mut ys = Vec::with_capacity(xs.capacity());
        for j in -pad..=n + pad {
            xs.push(T::from_isize(j).expect("index fits scalar") * h);
            ys.push(field.values()[grid.wrap(j)]);
        }
        Ok(Self {
            period: grid.length(),
            inner: MonotoneCubic::new(xs, ys)?,
        })
    }

    fn reduce(&self, s: T) -> T {
        let r = s % self.period;
        if r < T::zero() {
            r + self.period
        } else {
            r
        }
    }

    pub fn eval(&self, s: T) -> T {
        self.inner.eval(self.reduce(s))
    }
}

/// Band-limited interpolant of a periodic field: the unique trigonometric
/// polynomial of degree `N/2` through the samples (Nyquist term as a cosine).
#[derive(Debug, Clone)]
pub struct TrigInterpolant<T> {
    period: T,
    /// Normalized coefficients `c_n`, `n = 0..=N/2`.
    coeffs: Vec<Complex<T>>,
    even: bool,
}

impl<T: Real> TrigInterpolant<T> {
    pub fn new(field: &Field<T>) -> Self {
        let n = field.len();
        let mut buf: Vec<Complex<T>> = field
            .values()
            .iter()
            .map(|&v| Complex::new(v, T::zero()))
            .collect();
        FftPlanner::<T>::new().plan_fft_forward(n).process(&mut buf);
        let scale = T::one() / T::from_usize_exact(n);
        let coeffs = buf[..=n / 2].iter().map(|c| *c * scale).collect();
        Self {
            period: field.grid().length(),
            coeffs,
            even: n % 2 == 0,
        }
    }

    /// Value and first derivative at `s`.
    pub fn eval_with_deriv(&self, s: T) -> (T, T) {
        let two = lit::<T>(2.0);
        let omega = two * T::PI() / self.period;
        let theta = omega * s;
        let step = Complex::new(theta.cos(), theta.sin());
        let mut phase = Complex::new(T::one(), T::zero());
        let mut value = self.coeffs[0].re;
        let mut slope = T::zero();
        let last = self.coeffs.len() - 1;
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            phase = phase * step;
            if k == 1 || k % 64 == 0 {
                // Re-anchor the recurrence to limit phase drift.
                let a = theta * T::from_usize_exact(k);
                phase = Complex::new(a.cos(), a.sin());
            }
            let kf = T::from_usize_exact(k);
            let term = *c * phase;
            if self.even && k == last {
                // Unpaired Nyquist mode: real cosine.
                value = value + c.re * phase.re;
                slope = slope - c.re * omega * kf * phase.im;
            } else {
                value = value + two * term.re;
                slope = slope - two * omega * kf * term.im;
            }
        }
        (value, slope)
    }

    pub fn eval(&self, s: T) -> T {
        self.eval_with_deriv(s).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PeriodicGrid;
    use std::f64::consts::PI;

    #[test]
    fn reproduces_nodes_and_lines() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let c = MonotoneCubic::new(xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((c.eval(*x) - y).abs() < 1e-14);
        }
        assert!((c.eval(1.05) - 1.1).abs() < 1e-14);
        assert!((c.eval_deriv(1.05) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn preserves_monotonicity_of_steep_data() {
        let xs: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let ys = vec![0.0, 0.0, 0.0, 0.1, 5.0, 5.0, 5.1, 5.1];
        let c = MonotoneCubic::new(xs, ys).unwrap();
        let mut prev = c.eval(0.0);
        for k in 1..=700 {
            let v = c.eval(k as f64 * 0.01);
            assert!(v >= prev - 1e-14);
            prev = v;
        }
    }

    #[test]
    fn rejects_unsorted_abscissae() {
        let r = MonotoneCubic::new(vec![0.0, 1.0, 1.0, 2.0], vec![0.0; 4]);
        assert!(matches!(r, Err(Error::NotMonotone { index: 2 })));
    }

    #[test]
    fn third_order_on_smooth_data() {
        let err = |n: usize| {
            let xs: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
            let ys: Vec<f64> = xs.iter().map(|x| (x * 1.3).exp()).collect();
            let c = MonotoneCubic::new(xs, ys).unwrap();
            (0..997)
                .map(|k| {
                    let x = 0.1 + 0.8 * k as f64 / 997.0;
                    (c.eval(x) - (x * 1.3).exp()).abs()
                })
                .fold(0.0, f64::max)
        };
        let p = (err(40) / err(80)).log2();
        assert!(p > 2.7, "{p}");
    }

    #[test]
    fn trig_interpolant_is_exact_for_band_limited_data() {
        let g = PeriodicGrid::new(3.0, 16).unwrap();
        let w = 2.0 * PI / 3.0;
        let f = |s: f64| 0.3 + (w * s).sin() - 0.25 * (3.0 * w * s).cos();
        let df = |s: f64| w * (w * s).cos() + 0.75 * w * (3.0 * w * s).sin();
        let field = Field::from_fn(g, f).unwrap();
        let ti = TrigInterpolant::new(&field);
        for k in 0..50 {
            let s = -1.0 + 0.137 * k as f64;
            let (v, d) = ti.eval_with_deriv(s);
            assert!((v - f(s)).abs() < 1e-13);
            assert!((d - df(s)).abs() < 1e-12);
        }
    }

    #[test]
    fn periodic_cubic_wraps() {
        let g = PeriodicGrid::new(2.0 * PI, 64).unwrap();
        let field = Field::from_fn(g, |s| 2.0 + s.sin()).unwrap();
        let pc = PeriodicCubic::new(&field).unwrap();
        for s in [-0.3, 0.01, 3.0, 6.27, 7.5, 40.0] {
            assert!((pc.eval(s) - (2.0 + s.sin())).abs() < 1e-4, "s = {s}");
        }
    }
}
