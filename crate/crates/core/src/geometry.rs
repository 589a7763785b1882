//! Curve reconstruction from curvature and torsion.
//!
//! Frame convention: `T' = kappa N`, `N' = -kappa T + tau B`, `B' = -tau N`, `X' = T`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flowops::{CurvatureConstant, TorsionField};
use crate::interp::PeriodicCubic;
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, a: T) -> Self {
        Self::new(self.x * a, self.y * a, self.z * a)
    }
}

/// Position plus orthonormal frame `(T, N, B)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrenetState<T> {
    pub position: Vec3<T>,
    pub tangent: Vec3<T>,
    pub normal: Vec3<T>,
    pub binormal: Vec3<T>,
}

impl<T: Real> Default for FrenetState<T> {
    /// Origin with the canonical frame `T = e_x`, `N = e_y`, `B = e_z`.
    fn default() -> Self {
        let (o, i) = (T::zero(), T::one());
        Self {
            position: Vec3::zero(),
            tangent: Vec3::new(i, o, o),
            normal: Vec3::new(o, i, o),
            binormal: Vec3::new(o, o, i),
        }
    }
}

impl<T: Real> FrenetState<T> {
    /// Seed whose helix (constant `kappa`, `tau`) has its axis along `e_z`.
    pub fn helix_seed(kappa: T, tau: T) -> Self {
        let w = (kappa * kappa + tau * tau).sqrt();
        let o = T::zero();
        Self {
            position: Vec3::zero(),
            tangent: Vec3::new(kappa / w, o, tau / w),
            normal: Vec3::new(o, T::one(), o),
            binormal: Vec3::new(-tau / w, o, kappa / w),
        }
    }

    /// Largest deviation of the frame Gram matrix from the identity.
    pub fn orthonormality_error(&self) -> T {
        let f = [self.tangent, self.normal, self.binormal];
        let mut worst = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((f[i].dot(f[j]) - target).abs());
            }
        }
        worst
    }

    /// `det[T N B]`; `+1` for a right-handed frame.
    pub fn handedness(&self) -> T {
        self.tangent.cross(self.normal).dot(self.binormal)
    }

    fn axpy(&self, d: &Self, a: T) -> Self {
        Self {
            position: self.position + d.position * a,
            tangent: self.tangent + d.tangent * a,
            normal: self.normal + d.normal * a,
            binormal: self.binormal + d.binormal * a,
        }
    }

    fn rate(&self, kappa: T, tau: T) -> Self {
        Self {
            position: self.tangent,
            tangent: self.normal * kappa,
            normal: self.binormal * tau - self.tangent * kappa,
            binormal: -(self.normal * tau),
        }
    }

    /// Gram–Schmidt in the order `T`, `N`, `B`.
    fn reorthonormalize(&mut self, s: T) -> Result<()> {
        let tiny = T::epsilon().sqrt();
        let degenerate = || Error::FrameDegenerate { s: s.as_f64() };
        let t = self.tangent;
        let tn = t.norm();
        if !(tn > tiny) {
            return Err(degenerate());
        }
        let t = t * tn.recip();
        let n = self.normal - t * self.normal.dot(t);
        let nn = n.norm();
        if !(nn > tiny) {
            return Err(degenerate());
        }
        let n = n * nn.recip();
        let b = self.binormal - t * self.binormal.dot(t) - n * self.binormal.dot(n);
        let bn = b.norm();
        if !(bn > tiny) {
            return Err(degenerate());
        }
        self.tangent = t;
        self.normal = n;
        self.binormal = b * bn.recip();
        Ok(())
    }
}

/// Torsion along the arc: constant, analytic, or interpolated from samples.
pub enum TorsionSource<'a, T> {
    Constant(T),
    Function(Box<dyn Fn(T) -> T + 'a>),
    /// Monotone cubic interpolation of periodic samples.
    Sampled(PeriodicCubic<T>),
}

impl<'a, T: Real> TorsionSource<'a, T> {
    pub fn function(f: impl Fn(T) -> T + 'a) -> Self {
        TorsionSource::Function(Box::new(f))
    }

    pub fn sampled(tau: &TorsionField<T>) -> Result<Self> {
        Ok(TorsionSource::Sampled(PeriodicCubic::new(tau.field())?))
    }

    pub fn eval(&self, s: T) -> T {
        match self {
            TorsionSource::Constant(c) => *c,
            TorsionSource::Function(f) => f(s),
            TorsionSource::Sampled(p) => p.eval(s),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for TorsionSource<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TorsionSource::Constant(c) => write!(f, "Constant({c:?})"),
            TorsionSource::Function(_) => f.write_str("Function(..)"),
            TorsionSource::Sampled(_) => f.write_str("Sampled(..)"),
        }
    }
}

/// Frenet states at uniformly spaced arc-length nodes `s_0 + j h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve3D<T> {
    pub s: Vec<T>,
    pub states: Vec<FrenetState<T>>,
}

impl<T: Real> Curve3D<T> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn spacing(&self) -> T {
        if self.s.len() < 2 {
            T::zero()
        } else {
            self.s[1] - self.s[0]
        }
    }

    pub fn positions(&self) -> Vec<Vec3<T>> {
        self.states.iter().map(|st| st.position).collect()
    }

    pub fn max_orthonormality_error(&self) -> T {
        self.states
            .iter()
            .map(FrenetState::orthonormality_error)
            .fold(T::zero(), T::max)
    }

    /// Largest `| |X_{j+1} - X_j| - h | / h`.
    pub fn max_chord_defect(&self) -> T {
        let h = self.spacing();
        self.states
            .windows(2)
            .map(|w| ((w[1].position - w[0].position).norm() - h).abs() / h)
            .fold(T::zero(), T::max)
    }
}

/// Integrates the Frenet–Serret system over `[0, s_span]` with `nodes`
/// intervals, RK4 at step `h / substeps`, re-orthonormalizing after each step.
pub fn frenet_integrate<T: Real>(
    kappa: CurvatureConstant<T>,
    tau: &TorsionSource<'_, T>,
    s_span: T,
    nodes: usize,
    substeps: usize,
    seed: FrenetState<T>,
) -> Result<Curve3D<T>> {
    if !(s_span > T::zero() && s_span.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "arc span must be positive, got {s_span}"
        )));
    }
    if nodes == 0 || substeps == 0 {
        return Err(Error::InvalidParameter(
            "node count and substeps must be at least 1".into(),
        ));
    }
    let mut state = seed;
    state.reorthonormalize(T::zero())?;
    if state.handedness() < T::zero() {
        return Err(Error::InvalidParameter("seed frame is left-handed".into()));
    }
    let k = kappa.get();
    let h = s_span / T::from_usize_exact(nodes);
    let dt = h / T::from_usize_exact(substeps);
    let half = lit::<T>(0.5);
    let sixth = lit::<T>(1.0 / 6.0);
    let two = lit::<T>(2.0);
    let torsion = |s: T, index: usize| -> Result<T> {
        let t = tau.eval(s);
        if t > T::zero() && t.is_finite() {
            Ok(t)
        } else {
            Err(Error::NonPositive {
                what: "torsion",
                index,
                value: t.as_f64(),
            })
        }
    };

    let mut s_out = Vec::with_capacity(nodes + 1);
    let mut states = Vec::with_capacity(nodes + 1);
    s_out.push(T::zero());
    states.push(state);
    for j in 0..nodes {
        let s0 = T::from_usize_exact(j) * h;
        for m in 0..substeps {
            let s = s0 + T::from_usize_exact(m) * dt;
            let t0 = torsion(s, j)?;
            let tm = torsion(s + half * dt, j)?;
            let t1 = torsion(s + dt, j + 1)?;
            let k1 = state.rate(k, t0);
            let k2 = state.axpy(&k1, half * dt).rate(k, tm);
            let k3 = state.axpy(&k2, half * dt).rate(k, tm);
            let k4 = state.axpy(&k3, dt).rate(k, t1);
            let sum = k1.axpy(&k2, two).axpy(&k3, two).axpy(&k4, T::one());
            state = state.axpy(&sum, dt * sixth);
            state.reorthonormalize(s + dt)?;
        }
        s_out.push(T::from_usize_exact(j + 1) * h);
        states.push(state);
    }
    Ok(Curve3D { s: s_out, states })
}

/// Closed-form helix with constant `kappa`, `tau` through the frame `seed` at `s = 0`.
pub fn helix_point<T: Real>(kappa: T, tau: T, seed: &FrenetState<T>, s: T) -> Vec3<T> {
    let w2 = kappa * kappa + tau * tau;
    let w = w2.sqrt();
    let axis = (seed.tangent * tau + seed.binormal * kappa) * w.recip();
    let t_perp = seed.tangent - axis * (tau / w);
    let ws = w * s;
    seed.position
        + axis * (tau / w * s)
        + t_perp * (ws.sin() / w)
        + seed.normal * ((T::one() - ws.cos()) * kappa / w2)
}

/// Radius `kappa / (kappa^2 + tau^2)` and pitch `2 pi tau / (kappa^2 + tau^2)`.
pub fn helix_radius_pitch<T: Real>(kappa: T, tau: T) -> (T, T) {
    let w2 = kappa * kappa + tau * tau;
    (kappa / w2, T::TAU() * tau / w2)
}

/// Max distance from the curve to the closed-form helix carried by the
/// curve's initial frame, which fixes the rigid motion.
pub fn helix_deviation<T: Real>(curve: &Curve3D<T>, kappa: T, tau: T) -> T {
    let seed = curve.states[0];
    curve
        .s
        .iter()
        .zip(&curve.states)
        .map(|(&s, st)| (st.position - helix_point(kappa, tau, &seed, s - curve.s[0])).norm())
        .fold(T::zero(), T::max)
}

/// Helix geometry measured from sampled positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HelixFit<T> {
    pub axis: Vec3<T>,
    pub radius: T,
    pub pitch: T,
}

/// Fits a helix to the curve: the axis is the mean Darboux direction
/// `tau T + kappa B`, the radius comes from an algebraic circle fit of the
/// projection across the axis, and the pitch from the axial speed.
pub fn fit_helix<T: Real>(curve: &Curve3D<T>, kappa: T, tau: T) -> Result<HelixFit<T>> {
    let n = curve.len();
    if n < 4 {
        return Err(Error::InvalidParameter(
            "helix fit needs at least 4 samples".into(),
        ));
    }
    let darboux = curve
        .states
        .iter()
        .fold(Vec3::zero(), |acc, st| acc + st.tangent * tau + st.binormal * kappa);
    let axis = darboux * darboux.norm().recip();
    // Orthonormal basis across the axis.
    let trial = if axis.x.abs() < lit(0.9) {
        Vec3::new(T::one(), T::zero(), T::zero())
    } else {
        Vec3::new(T::zero(), T::one(), T::zero())
    };
    let e1 = {
        let v = trial - axis * trial.dot(axis);
        v * v.norm().recip()
    };
    let e2 = axis.cross(e1);

    // Kasa fit: minimize sum (u^2 + v^2 + D u + E v + F)^2.
    let mut m = [[T::zero(); 3]; 3];
    let mut rhs = [T::zero(); 3];
    let nf = T::from_usize_exact(n);
    let (mut ss, mut sa, mut sss, mut ssa) = (T::zero(), T::zero(), T::zero(), T::zero());
    for (&s, st) in curve.s.iter().zip(&curve.states) {
        let p = st.position;
        let (u, v) = (p.dot(e1), p.dot(e2));
        let row = [u, v, T::one()];
        let q = u * u + v * v;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = m[i][j] + row[i] * row[j];
            }
            rhs[i] = rhs[i] - row[i] * q;
        }
        let a = p.dot(axis);
        ss = ss + s;
        sa = sa + a;
        sss = sss + s * s;
        ssa = ssa + s * a;
    }
    let [d, e, f] = solve3(m, rhs).ok_or_else(|| {
        Error::InvalidParameter("helix fit: projected points are collinear".into())
    })?;
    let four = lit::<T>(4.0);
    let radius = (d * d / four + e * e / four - f).sqrt();
    let speed = (nf * ssa - ss * sa) / (nf * sss - ss * ss);
    let omega = (T::one() - speed * speed).max(T::zero()).sqrt() / radius;
    Ok(HelixFit {
        axis,
        radius,
        pitch: T::TAU() * speed.abs() / omega,
    })
}

fn solve3<T: Real>(m: [[T; 3]; 3], b: [T; 3]) -> Option<[T; 3]> {
    let det = |m: &[[T; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d == T::zero() || !d.is_finite() {
        return None;
    }
    let mut out = [T::zero(); 3];
    for (col, o) in out.iter_mut().enumerate() {
        let mut mc = m;
        for row in 0..3 {
            mc[row][col] = b[row];
        }
        *o = det(&mc) / d;
    }
    Some(out)
}

/// Curvature and torsion estimated at interior samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureTorsion<T> {
    pub s: Vec<T>,
    pub kappa: Vec<T>,
    pub tau: Vec<T>,
}

const D1: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const D2: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
const D3: [f64; 7] = [1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0];

fn stencil<T: Real>(xs: &[Vec3<T>], center: usize, w: &[f64], scale: T) -> Vec3<T> {
    let r = w.len() / 2;
    let acc = w
        .iter()
        .enumerate()
        .fold(Vec3::zero(), |acc, (i, &c)| acc + xs[center + i - r] * lit(c));
    acc * scale
}

/// `kappa = |X''|`, `tau = det(X', X'', X''') / |X''|^2` from FD4 stencils on
/// positions. Only nodes with a full seven-point stencil are returned.
pub fn estimate_kappa_tau<T: Real>(curve: &Curve3D<T>) -> Result<CurvatureTorsion<T>> {
    let n = curve.len();
    if n < 7 {
        return Err(Error::InvalidParameter(format!(
            "curvature estimate needs at least 7 samples, got {n}"
        )));
    }
    let x = curve.positions();
    let h = curve.spacing();
    let (c1, c2, c3) = (
        (lit::<T>(12.0) * h).recip(),
        (lit::<T>(12.0) * h * h).recip(),
        (lit::<T>(8.0) * h * h * h).recip(),
    );
    let tiny = T::epsilon().sqrt();
    let mut out = CurvatureTorsion {
        s: Vec::with_capacity(n - 6),
        kappa: Vec::with_capacity(n - 6),
        tau: Vec::with_capacity(n - 6),
    };
    for j in 3..n - 3 {
        let d1 = stencil(&x, j, &D1, c1);
        let d2 = stencil(&x, j, &D2, c2);
        let d3 = stencil(&x, j, &D3, c3);
        let k2 = d2.dot(d2);
        let k = k2.sqrt();
        if !(k > tiny) {
            return Err(Error::CurvatureDegenerate { index: j });
        }
        out.s.push(curve.s[j]);
        out.kappa.push(k);
        out.tau.push(d1.cross(d2).dot(d3) / k2);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    #[default]
    Xy,
    Xz,
    Yz,
}

impl Plane {
    pub const ALL: [Plane; 3] = [Plane::Xy, Plane::Xz, Plane::Yz];

    pub fn name(self) -> &'static str {
        match self {
            Plane::Xy => "xy",
            Plane::Xz => "xz",
            Plane::Yz => "yz",
        }
    }

    /// Axis labels of the retained coordinates.
    pub fn axes(self) -> (&'static str, &'static str) {
        match self {
            Plane::Xy => ("x", "y"),
            Plane::Xz => ("x", "z"),
            Plane::Yz => ("y", "z"),
        }
    }
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Plane {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xy" => Ok(Plane::Xy),
            "xz" => Ok(Plane::Xz),
            "yz" => Ok(Plane::Yz),
            other => Err(Error::InvalidParameter(format!(
                "unknown plane `{other}` (expected xy, xz or yz)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline2D<T> {
    pub s: Vec<T>,
    pub u: Vec<T>,
    pub v: Vec<T>,
}

/// Drops the coordinate orthogonal to `plane`.
pub fn project<T: Real>(curve: &Curve3D<T>, plane: Plane) -> Polyline2D<T> {
    let (u, v) = curve
        .states
        .iter()
        .map(|st| {
            let p = st.position;
            match plane {
                Plane::Xy => (p.x, p.y),
                Plane::Xz => (p.x, p.z),
                Plane::Yz => (p.y, p.z),
            }
        })
        .unzip();
    Polyline2D {
        s: curve.s.clone(),
        u,
        v,
    }
}

/// Projects onto the plane orthogonal to `axis`, in a right-handed basis
/// `(e1, e2, axis)`: the view looking down `axis`.
pub fn project_along<T: Real>(curve: &Curve3D<T>, axis: Vec3<T>) -> Result<Polyline2D<T>> {
    let an = axis.norm();
    if !(an > T::epsilon()) {
        return Err(Error::InvalidParameter("view axis must be nonzero".into()));
    }
    let a = axis * an.recip();
    let trial = if a.x.abs() < lit(0.9) {
        Vec3::new(T::one(), T::zero(), T::zero())
    } else {
        Vec3::new(T::zero(), T::one(), T::zero())
    };
    let e1 = trial - a * trial.dot(a);
    let e1 = e1 * e1.norm().recip();
    let e2 = a.cross(e1);
    let (u, v) = curve
        .states
        .iter()
        .map(|st| (st.position.dot(e1), st.position.dot(e2)))
        .unzip();
    Ok(Polyline2D {
        s: curve.s.clone(),
        u,
        v,
    })
}

/// Net displacement `X_end - X_0`, the drift direction of a curve with periodic torsion.
pub fn drift<T: Real>(curve: &Curve3D<T>) -> Vec3<T> {
    match (curve.states.first(), curve.states.last()) {
        (Some(a), Some(b)) => b.position - a.position,
        _ => Vec3::zero(),
    }
}
