//! Stationary torsion profiles.
//!
//! Writing `tau = u^{-2}`, stationary solutions satisfy (after one
//! integration) the autonomous ODE `u'' = A - u + u^{-3}` with energy
//! `u'^2 = C + 2Au - u^2 - u^{-2}`. Profiles oscillate between the two
//! positive turning points where the radicand vanishes. For `A = 0` the
//! profile is explicit:
//!
//! ```text
//! tau(s) = 2 / (C ± sqrt(C^2 - 4) sin(2(s + k))),   C >= 2
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flowops::TorsionField;
use crate::grid::{Field, PeriodicGrid};
use crate::scalar::{lit, Real};

/// Sign in front of the square root of the explicit family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Branch {
    #[default]
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Branch {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Branch::Plus => T::one(),
            Branch::Minus => -T::one(),
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        })
    }
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" | "+1" | "1" => Ok(Branch::Plus),
            "-" | "minus" | "-1" => Ok(Branch::Minus),
            other => Err(Error::InvalidParameter(format!(
                "branch must be + or -, got `{other}`"
            ))),
        }
    }
}

/// Integration constants `(A, C)`, phase `k` and branch of a stationary profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryParams<T> {
    pub a: T,
    pub c: T,
    pub k: T,
    pub branch: Branch,
}

impl<T: Real> StationaryParams<T> {
    /// Member of the explicit `A = 0` family.
    pub fn explicit(c: T, k: T, branch: Branch) -> Self {
        Self {
            a: T::zero(),
            c,
            k,
            branch,
        }
    }

    /// Energy radicand `C + 2Au - u^2 - u^{-2}`.
    pub fn radicand(&self, u: T) -> T {
        radicand(self.a, self.c, u)
    }
}

fn radicand<T: Real>(a: T, c: T, u: T) -> T {
    c + lit::<T>(2.0) * a * u - u * u - (u * u).recip()
}

/// The quartic `u^4 - 2Au^3 - Cu^2 + 1`, equal to `-u^2` times the radicand.
fn quartic<T: Real>(a: T, c: T, u: T) -> T {
    let u2 = u * u;
    u2 * u2 - lit::<T>(2.0) * a * u2 * u - c * u2 + T::one()
}

/// Consecutive positive roots of the radicand bounding an oscillation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPoints<T> {
    pub u_min: T,
    pub u_max: T,
}

impl<T: Real> TurningPoints<T> {
    pub fn is_degenerate(&self) -> bool {
        self.u_min == self.u_max
    }
}

/// Explicit `A = 0` profile sampled on `grid`.
///
/// The profile has period `pi`, so the grid length must be a positive
/// multiple of `pi`.
pub fn explicit_a0<T: Real>(
    params: &StationaryParams<T>,
    grid: &PeriodicGrid<T>,
) -> Result<TorsionField<T>> {
    if params.a != T::zero() {
        return Err(Error::InvalidParameter(format!(
            "explicit profile requires A = 0, got A = {}",
            params.a
        )));
    }
    let two = lit::<T>(2.0);
    let c = params.c;
    if !(c >= two) {
        return Err(Error::InvalidParameter(format!(
            "explicit profile requires C >= 2, got C = {c}"
        )));
    }
    let periods = (grid.length() / T::PI()).round();
    let tol = lit::<T>(1e3) * T::epsilon() * grid.length();
    if periods < T::one() || (grid.length() - periods * T::PI()).abs() > tol {
        return Err(Error::InvalidParameter(format!(
            "grid length {} is not a multiple of pi (the profile period)",
            grid.length()
        )));
    }
    let amp = params.branch.sign::<T>() * (c * c - lit(4.0)).sqrt();
    TorsionField::from_fn(*grid, |s| two / (c + amp * (two * (s + params.k)).sin()))
}

/// Turning points of the stationary ODE for constants `(A, C)`.
///
/// On `u > 0` the quartic `p(u) = u^4 - 2Au^3 - Cu^2 + 1` has critical
/// points at the roots of `2u^2 - 3Au - C`, hence at most one positive local
/// minimum `u*`. An oscillation exists iff `p(u*) < 0`; the turning points
/// are then bracketed by `(lower critical point or 0, u*)` and `(u*, inf)`
/// and refined by bisection to full precision.
pub fn turning_points<T: Real>(a: T, c: T) -> Result<TurningPoints<T>> {
    let no_roots = || Error::NoTurningPoints {
        a: a.as_f64(),
        c: c.as_f64(),
        signs: sign_pattern(a, c),
    };
    let disc = lit::<T>(9.0) * a * a + lit::<T>(8.0) * c;
    if !(disc >= T::zero()) {
        return Err(no_roots());
    }
    let root = disc.sqrt();
    let four = lit::<T>(4.0);
    let three_a = lit::<T>(3.0) * a;
    let u_star = (three_a + root) / four;
    if !(u_star > T::zero()) {
        return Err(no_roots());
    }
    let p_star = quartic(a, c, u_star);
    let scale = T::one() + (c * u_star * u_star).abs() + (a * u_star.powi(3)).abs() + u_star.powi(4);
    if p_star.abs() <= lit::<T>(64.0) * T::epsilon() * scale {
        return Err(Error::ZeroAmplitude {
            u: u_star.as_f64(),
        });
    }
    if p_star > T::zero() {
        return Err(no_roots());
    }
    let lower = ((three_a - root) / four).max(T::zero());
    let mut upper = u_star * lit(2.0);
    while quartic(a, c, upper) <= T::zero() {
        upper = upper * lit(2.0);
        if !upper.is_finite() {
            return Err(no_roots());
        }
    }
    let p = |u: T| quartic(a, c, u);
    let u_min = bisect(&p, lower, u_star);
    let u_max = bisect(&p, u_star, upper);
    Ok(TurningPoints { u_min, u_max })
}

/// Root of `f` on `[lo, hi]` where `f` changes sign, refined until the
/// midpoint no longer moves.
fn bisect<T: Real>(f: &impl Fn(T) -> T, mut lo: T, mut hi: T) -> T {
    let f_lo_positive = f(lo) > T::zero();
    for _ in 0..200 {
        let mid = (lo + hi) * lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > T::zero()) == f_lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) * lit(0.5)
}

/// Signs of the quartic's coefficients, highest degree first.
fn sign_pattern<T: Real>(a: T, c: T) -> String {
    let sym = |x: T| {
        if x > T::zero() {
            '+'
        } else if x < T::zero() {
            '-'
        } else {
            '0'
        }
    };
    let two = lit::<T>(2.0);
    [T::one(), -two * a, -c, T::zero(), T::one()]
        .iter()
        .map(|&x| sym(x).to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Samples of the ODE solution `u` and its slope `u'` on a grid.
#[derive(Debug, Clone)]
pub struct ProfileSamples<T> {
    pub u: Field<T>,
    pub du: Field<T>,
}

impl<T: Real> ProfileSamples<T> {
    /// Energy `u'^2 - 2Au + u^2 + u^{-2}` at every node; constant (= C) on exact solutions.
    pub fn energy(&self, a: T) -> Vec<T> {
        self.u
            .values()
            .iter()
            .zip(self.du.values())
            .map(|(&u, &du)| du * du - lit::<T>(2.0) * a * u + u * u + (u * u).recip())
            .collect()
    }

    /// Torsion `tau = u^{-2}`.
    pub fn torsion(&self) -> Result<TorsionField<T>> {
        TorsionField::new(self.u.map_total(|u| (u * u).recip()))
    }
}

/// RK4 substeps per grid interval when integrating the profile ODE.
pub const PROFILE_SUBSTEPS: usize = 16;
const MAX_STEP_HALVINGS: usize = 8;

/// Integrates `u'' = A - u + u^{-3}` from `u(0) = u0`,
/// `u'(0) = +sqrt(max(0, C + 2Au0 - u0^2 - u0^{-2}))` and samples `(u, u')`.
pub fn profile_samples<T: Real>(
    params: &StationaryParams<T>,
    u0: T,
    grid: &PeriodicGrid<T>,
) -> Result<ProfileSamples<T>> {
    if !(u0 > T::zero() && u0.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "initial amplitude must be positive, got u0 = {u0}"
        )));
    }
    let r0 = params.radicand(u0);
    let tol = lit::<T>(1e-8) * (T::one() + params.c.abs());
    if r0 < -tol {
        return Err(Error::InvalidParameter(format!(
            "u0 = {u0} lies outside the turning points (radicand {r0})"
        )));
    }
    let a = params.a;
    let accel = move |u: T| a - u + (u * u * u).recip();
    // A radicand at round-off level means u0 is a turning point; its square
    // root (~1e-8) would otherwise seed a spurious slope.
    let scale = params.c.abs() + (lit::<T>(2.0) * params.a * u0).abs() + u0 * u0 + (u0 * u0).recip();
    let r0 = if r0.abs() <= lit::<T>(64.0) * T::epsilon() * scale {
        T::zero()
    } else {
        r0
    };
    let mut state = (u0, r0.max(T::zero()).sqrt());
    let h = grid.spacing();
    let mut us = Vec::with_capacity(grid.len());
    let mut dus = Vec::with_capacity(grid.len());
    us.push(state.0);
    dus.push(state.1);
    for j in 1..grid.len() {
        let s0 = grid.node(j - 1);
        state = advance_interval(state, s0, h, &accel)?;
        us.push(state.0);
        dus.push(state.1);
    }
    Ok(ProfileSamples {
        u: Field::new(*grid, us)?,
        du: Field::new(*grid, dus)?,
    })
}

/// Advances `(u, u')` across one grid interval of width `h` with RK4
/// substeps, halving the substep when a trial step leaves `u > 0` or turns
/// non-finite.
fn advance_interval<T: Real>(
    start: (T, T),
    s0: T,
    h: T,
    accel: &impl Fn(T) -> T,
) -> Result<(T, T)> {
    let mut failure = None;
    for halving in 0..=MAX_STEP_HALVINGS {
        let substeps = PROFILE_SUBSTEPS << halving;
        let dt = h / T::from_usize_exact(substeps);
        let mut st = start;
        let mut ok = true;
        for i in 0..substeps {
            st = rk4_oscillator(st, dt, accel);
            if !(st.0.is_finite() && st.1.is_finite()) {
                failure = Some(Error::OdeBlowup {
                    s: (s0 + dt * T::from_usize_exact(i + 1)).as_f64(),
                });
                ok = false;
                break;
            }
            if !(st.0 > T::zero()) {
                failure = Some(Error::ProfileLeftDomain {
                    s: (s0 + dt * T::from_usize_exact(i + 1)).as_f64(),
                    u: st.0.as_f64(),
                });
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(st);
        }
    }
    Err(failure.expect("at least one attempt failed"))
}

fn rk4_oscillator<T: Real>((u, v): (T, T), dt: T, accel: &impl Fn(T) -> T) -> (T, T) {
    let half = lit::<T>(0.5) * dt;
    let k1 = (v, accel(u));
    let k2 = (v + half * k1.1, accel(u + half * k1.0));
    let k3 = (v + half * k2.1, accel(u + half * k2.0));
    let k4 = (v + dt * k3.1, accel(u + dt * k3.0));
    let sixth = dt / lit(6.0);
    let two = lit::<T>(2.0);
    (
        u + sixth * (k1.0 + two * k2.0 + two * k3.0 + k4.0),
        v + sixth * (k1.1 + two * k2.1 + two * k3.1 + k4.1),
    )
}

/// Stationary torsion `tau = u^{-2}` from the profile ODE.
pub fn stationary_ode<T: Real>(
    params: &StationaryParams<T>,
    u0: T,
    grid: &PeriodicGrid<T>,
) -> Result<TorsionField<T>> {
    profile_samples(params, u0, grid)?.torsion()
}

/// Panels and points per panel of the composite Gauss–Legendre rule.
const HALF_PERIOD_PANELS: usize = 4;
const HALF_PERIOD_POINTS: usize = 16;

/// Arc length `int_{u_min}^{u_max} du / sqrt(C + 2Au - u^2 - u^{-2})` between
/// consecutive turning points: half the spatial period of the profile.
///
/// With `u = u_min + (u_max - u_min) sin^2(theta/2)` and the quartic factored
/// as `(u - u_min)(u - u_max) q(u)`, the integrand becomes `u / sqrt(q(u))`,
/// smooth on `theta in [0, pi]`. It is integrated by composite Gauss–Legendre
/// with 64 nodes in total.
pub fn half_period<T: Real>(a: T, c: T) -> Result<T> {
    let tp = turning_points(a, c)?;
    let (lo, hi) = (tp.u_min, tp.u_max);
    let sum = lo + hi;
    let prod = lo * hi;
    // u^4 - 2Au^3 - Cu^2 + 1 = (u^2 - S u + P)(u^2 + q1 u + 1/P)
    let q1 = sum - lit::<T>(2.0) * a;
    let q0 = prod.recip();
    let width = hi - lo;
    let integrand = |theta: T| {
        let sh = (theta * lit(0.5)).sin();
        let u = lo + width * sh * sh;
        u / (u * u + q1 * u + q0).sqrt()
    };
    Ok(composite_gauss_legendre(
        integrand,
        T::zero(),
        T::PI(),
        HALF_PERIOD_PANELS,
        HALF_PERIOD_POINTS,
    ))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

pub(crate) fn composite_gauss_legendre<T: Real>(
    f: impl Fn(T) -> T,
    a: T,
    b: T,
    panels: usize,
    points: usize,
) -> T {
    let (x, w) = gauss_legendre(points);
    let width = (b - a) / T::from_usize_exact(panels);
    let half = width * lit(0.5);
    let mut total = T::zero();
    for p in 0..panels {
        let mid = a + width * (T::from_usize_exact(p) + lit(0.5));
        for (&xi, &wi) in x.iter().zip(&w) {
            total = total + lit::<T>(wi) * f(mid + half * lit(xi));
        }
    }
    total * half
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowops::{rhs_torsion, CurvatureConstant};
    use crate::grid::DerivScheme;
    use std::f64::consts::PI;

    fn grid(l: f64, n: usize) -> PeriodicGrid<f64> {
        PeriodicGrid::new(l, n).unwrap()
    }

    #[test]
    fn c_equal_two_is_the_helix() {
        for branch in [Branch::Plus, Branch::Minus] {
            let t = explicit_a0(&StationaryParams::explicit(2.0, 0.37, branch), &grid(PI, 64)).unwrap();
            assert!(t.values().iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn explicit_value_at_quarter_period() {
        let g = grid(PI, 8);
        let t = explicit_a0(&StationaryParams::explicit(3.0, 0.0, Branch::Plus), &g).unwrap();
        // node 2 is s = pi/4
        assert!((t.values()[2] - 2.0 / (3.0 + 5f64.sqrt())).abs() < 1e-15);
        assert!((t.values()[2] - 0.381_966_011_250_105_1).abs() < 1e-15);
        assert!((t.values()[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn explicit_rejects_bad_parameters() {
        let g = grid(PI, 16);
        assert!(explicit_a0(&StationaryParams::explicit(1.9, 0.0, Branch::Plus), &g).is_err());
        assert!(explicit_a0(&StationaryParams::explicit(3.0, 0.0, Branch::Plus), &grid(3.0, 16)).is_err());
        let mut p = StationaryParams::explicit(3.0, 0.0, Branch::Plus);
        p.a = 0.5;
        assert!(explicit_a0(&p, &g).is_err());
        assert!(explicit_a0(&StationaryParams::explicit(3.0, 0.0, Branch::Plus), &grid(2.0 * PI, 16)).is_ok());
    }

    #[test]
    fn branch_flip_equals_quarter_phase_shift() {
        let g = grid(PI, 64);
        let a = explicit_a0(&StationaryParams::explicit(4.0, 0.3, Branch::Plus), &g).unwrap();
        let b = explicit_a0(&StationaryParams::explicit(4.0, 0.3 + PI / 2.0, Branch::Minus), &g).unwrap();
        assert!(a.field().max_diff(b.field()).unwrap() < 1e-14);
    }

    #[test]
    fn biquadratic_turning_points() {
        let tp = turning_points(0.0, 3.0).unwrap();
        assert!((tp.u_min - ((3.0 - 5f64.sqrt()) / 2.0).sqrt()).abs() < 1e-15);
        assert!((tp.u_max - ((3.0 + 5f64.sqrt()) / 2.0).sqrt()).abs() < 1e-15);
        assert!((tp.u_min - 0.618_034_0).abs() < 1e-7);
        assert!((tp.u_max - 1.618_034_0).abs() < 1e-7);
    }

    #[test]
    fn degenerate_and_inadmissible_constants() {
        assert!(matches!(turning_points(0.0, 2.0), Err(Error::ZeroAmplitude { .. })));
        assert!(matches!(half_period(0.0, 2.0), Err(Error::ZeroAmplitude { .. })));
        match turning_points(0.0, 1.0) {
            Err(Error::NoTurningPoints { signs, .. }) => assert_eq!(signs, "+ 0 - 0 +"),
            other => panic!("{other:?}"),
        }
        assert!(turning_points(0.0, -3.0).is_err());
        assert!(turning_points(-5.0, 0.5).is_err());
    }

    #[test]
    fn sign_scan_oracle_for_general_a() {
        // Brute-force scan of the radicand over (0.01, 10) with step 1e-4.
        let (a, c) = (0.5, 3.0);
        let mut roots = Vec::new();
        let mut u = 0.01;
        let mut prev = quartic(a, c, u);
        while u < 10.0 {
            let next = u + 1e-4;
            let val = quartic(a, c, next);
            if (val > 0.0) != (prev > 0.0) {
                let (mut lo, mut hi) = (u, next);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if (quartic(a, c, mid) > 0.0) == (quartic(a, c, lo) > 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            prev = val;
            u = next;
        }
        assert_eq!(roots.len(), 2);
        let tp = turning_points::<f64>(a, c).unwrap();
        assert!((tp.u_min - roots[0]).abs() < 1e-12 * roots[0]);
        assert!((tp.u_max - roots[1]).abs() < 1e-12 * roots[1]);
        // high-precision polynomial roots
        assert!((tp.u_min - 0.554_958_132_087_371_2).abs() < 1e-15);
        assert!((tp.u_max - 2.246_979_603_717_467).abs() < 1e-14);
    }

    #[test]
    fn half_period_is_c_independent_for_a0() {
        for c in [2.1, 2.5, 3.0, 10.0, 50.0] {
            let hp = half_period(0.0, c).unwrap();
            assert!((hp - PI / 2.0).abs() < 1e-12, "C = {c}: {hp}");
        }
    }

    #[test]
    fn half_period_general_a_matches_quadrature_oracle() {
        // Adaptive tanh-sinh quadrature of the singular integral in 30 digits.
        let hp = half_period(0.5_f64, 3.0).unwrap();
        assert!((hp - 1.821_328_917_514_789_8).abs() < 1e-12, "{hp}");
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let m30: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((m30 - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn equilibrium_profile() {
        let p = StationaryParams::explicit(2.0, 0.0, Branch::Plus);
        let t = stationary_ode(&p, 1.0, &grid(PI, 32)).unwrap();
        assert!(t.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn ode_profile_matches_explicit_formula() {
        let g = grid(PI, 256);
        let tp = turning_points(0.0, 3.0).unwrap();
        let p = StationaryParams::explicit(3.0, -PI / 4.0, Branch::Plus);
        let ode = stationary_ode(&p, tp.u_min, &g).unwrap();
        let exact = explicit_a0(&p, &g).unwrap();
        let err = ode.field().max_diff(exact.field()).unwrap();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn general_a_profile_conserves_energy_and_is_stationary() {
        let (a, c) = (0.5, 3.0);
        let tp = turning_points(a, c).unwrap();
        let hp = half_period(a, c).unwrap();
        let params = StationaryParams { a, c, k: 0.0, branch: Branch::Plus };
        let mut residuals = Vec::new();
        let mut drifts = Vec::new();
        for n in [64, 128, 256] {
            let g = grid(2.0 * hp, n);
            let samples = profile_samples(&params, tp.u_min, &g).unwrap();
            let drift = samples.energy(a).iter().map(|e| (e - c).abs()).fold(0.0, f64::max);
            assert!(drift < 1e-9, "N = {n}: energy drift {drift:e}");
            drifts.push(drift);
            let tau = samples.torsion().unwrap();
            let r = rhs_torsion(&tau, CurvatureConstant::unit(), DerivScheme::Fd4).unwrap();
            residuals.push(r.max_abs());
        }
        for w in residuals.windows(2).chain(drifts.windows(2)) {
            let p = (w[0] / w[1]).log2();
            assert!(p > 3.5, "order {p} from {residuals:?} / {drifts:?}");
        }
    }

    #[test]
    fn rejects_start_outside_turning_points() {
        let p = StationaryParams::explicit(3.0, 0.0, Branch::Plus);
        assert!(profile_samples(&p, 0.3, &grid(PI, 32)).is_err());
        assert!(profile_samples(&p, -1.0, &grid(PI, 32)).is_err());
    }
}
