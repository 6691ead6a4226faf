//! Closed-form fields: the Lamb-Oseen vortex `Θ`, its vorticity `Ξ`, the radial
//! cutoff `χ`, the truncated vortex `u^χ = χΘ` with vorticity `ω^χ`, and the
//! remainder `R^χ = Δu^χ - ∂_t u^χ`.
//!
//! All fields are built from the radial kernel
//! `g(q) = (1 - e^{-q/4T}) / (2π q)`, `q = |x|²`, `T = 1 + t`, through
//! `Θ(x, t) = x^⊥ g(|x|²)`.

use crate::error::{invalid, Result};
use crate::geometry::{Mat2, Point2, Vec2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Identifier recorded in every report that depends on the cutoff shape.
pub const CUTOFF_PROFILE_ID: &str = "smooth-step f(s)=exp(-1/s); chi~(r)=f(r-1)/(f(r-1)+f(2-r)); chi(x)=chi~(|x|/rho)";

/// Below this value of `|x|²/4(1+t)` the kernel uses its Taylor expansion.
const SERIES_THRESHOLD: f64 = 1e-6;

/// Parameters of the truncated vortex: circulation, cutoff radius and time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OseenContext {
    pub alpha: f64,
    pub rho: f64,
    pub t: f64,
}

impl OseenContext {
    pub fn new(alpha: f64, rho: f64, t: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(invalid("alpha", "must be finite"));
        }
        if !(rho >= 1.0) || !rho.is_finite() {
            return Err(invalid("rho", format!("must be >= 1, got {rho}")));
        }
        if !(t >= 0.0) || !t.is_finite() {
            return Err(invalid("t", format!("must be >= 0, got {t}")));
        }
        Ok(Self { alpha, rho, t })
    }

    /// Unit circulation context.
    pub fn unit(rho: f64, t: f64) -> Result<Self> {
        Self::new(1.0, rho, t)
    }

    pub fn at_time(self, t: f64) -> Result<Self> {
        Self::new(self.alpha, self.rho, t)
    }

    pub fn cutoff(&self) -> Cutoff {
        Cutoff { rho: self.rho }
    }
}

/// `(1 - e^{-s}) / s`, continuous at `s = 0`.
pub(crate) fn kernel_h(s: f64) -> f64 {
    if s < SERIES_THRESHOLD {
        1.0 - s / 2.0 + s * s / 6.0 - s * s * s / 24.0
    } else {
        -(-s).exp_m1() / s
    }
}

/// Derivative of [`kernel_h`]. The closed form loses `ε/s²` relative
/// accuracy, so a longer series is used up to `s = 0.1`.
pub(crate) fn kernel_h_prime(s: f64) -> f64 {
    if s < 0.1 {
        // h'(s) = Σ_{n≥1} (-1)^n n s^{n-1} / (n+1)!
        let mut sum = 0.0;
        let mut pow = 1.0;
        let mut fact = 2.0;
        for n in 1..14 {
            let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
            sum += sign * n as f64 * pow / fact;
            pow *= s;
            fact *= (n + 2) as f64;
        }
        sum
    } else {
        let e = (-s).exp();
        (s * e + (-s).exp_m1()) / (s * s)
    }
}

/// Radial kernel `g(q)` and its derivative `g'(q)` at `q = |x|²`, time `t`.
fn kernel_g(q: f64, t: f64) -> (f64, f64) {
    let tt = 1.0 + t;
    let s = q / (4.0 * tt);
    let g = kernel_h(s) / (8.0 * PI * tt);
    let dg = kernel_h_prime(s) / (32.0 * PI * tt * tt);
    (g, dg)
}

/// Lamb-Oseen velocity `Θ(x, t)`.
pub fn oseen_velocity(x: Point2, t: f64) -> Vec2 {
    let (g, _) = kernel_g(x.norm_sq(), t);
    x.perp() * g
}

/// Oseen vorticity `Ξ(x, t) = e^{-|x|²/4(1+t)} / (4π(1+t))`.
pub fn oseen_vorticity(x: Point2, t: f64) -> f64 {
    let tt = 1.0 + t;
    (-x.norm_sq() / (4.0 * tt)).exp() / (4.0 * PI * tt)
}

/// Analytic Jacobian of [`oseen_velocity`], `m[i][j] = ∂_j Θ_i`.
pub fn oseen_velocity_gradient(x: Point2, t: f64) -> Mat2 {
    let (g, dg) = kernel_g(x.norm_sq(), t);
    Mat2::new(0.0, -g, g, 0.0) + Mat2::outer(x.perp(), x) * (2.0 * dg)
}

/// `|Θ(x, t)|` as a function of the radius.
pub fn oseen_speed(r: f64, t: f64) -> f64 {
    let (g, _) = kernel_g(r * r, t);
    g * r
}

/// `∂_t Θ(x, t)`, used by the remainder oracle and the pressure-free checks.
pub fn oseen_velocity_time_derivative(x: Point2, t: f64) -> Vec2 {
    // ∂_t g = -(q / 4T²) e^{-q/4T} / (2π q) = -e^{-q/4T} / (8π T²)
    let tt = 1.0 + t;
    x.perp() * (-(-x.norm_sq() / (4.0 * tt)).exp() / (8.0 * PI * tt * tt))
}

/// The smooth radial cutoff `χ(x) = χ̃(|x|/ρ)`, zero for `|x| ≤ ρ`, one for
/// `|x| ≥ 2ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub rho: f64,
}

/// Which derivative of the cutoff to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutoffOrder {
    Value,
    Gradient,
    Laplacian,
}

/// Value returned by [`cutoff`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutoffValue {
    Scalar(f64),
    Vector(Vec2),
}

/// `f(s) = e^{-1/s}` with its first two derivatives; zero for `s` at or
/// below the underflow range.
fn step_seed(s: f64) -> (f64, f64, f64) {
    if s <= 1e-3 {
        return (0.0, 0.0, 0.0);
    }
    let f = (-1.0 / s).exp();
    let s2 = s * s;
    (f, f / s2, f * (1.0 - 2.0 * s) / (s2 * s2))
}

/// `χ̃(σ)` and its first two derivatives in `σ`.
pub fn cutoff_profile(sigma: f64) -> (f64, f64, f64) {
    if sigma <= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    if sigma >= 2.0 {
        return (1.0, 0.0, 0.0);
    }
    let (a, da, dda) = step_seed(sigma - 1.0);
    let (b, db_raw, ddb) = step_seed(2.0 - sigma);
    // d/dσ f(2-σ) = -f'(2-σ), second derivative keeps its sign
    let db = -db_raw;
    let s = a + b;
    let num1 = da * b - a * db;
    let value = a / s;
    let first = num1 / (s * s);
    let second = (dda * b - a * ddb) / (s * s) - 2.0 * num1 * (da + db) / (s * s * s);
    (value, first, second)
}

impl Cutoff {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho >= 1.0) || !rho.is_finite() {
            return Err(invalid("rho", format!("must be >= 1, got {rho}")));
        }
        Ok(Self { rho })
    }

    /// `χ(r)`.
    pub fn value_r(&self, r: f64) -> f64 {
        cutoff_profile(r / self.rho).0
    }

    /// `dχ/dr`.
    pub fn dr(&self, r: f64) -> f64 {
        cutoff_profile(r / self.rho).1 / self.rho
    }

    /// `d²χ/dr²`.
    pub fn d2r(&self, r: f64) -> f64 {
        cutoff_profile(r / self.rho).2 / (self.rho * self.rho)
    }

    /// Planar Laplacian `χ'' + χ'/r`.
    pub fn laplacian_r(&self, r: f64) -> f64 {
        let (_, d1, d2) = cutoff_profile(r / self.rho);
        if d1 == 0.0 && d2 == 0.0 {
            return 0.0;
        }
        (d2 + d1 * self.rho / r) / (self.rho * self.rho)
    }

    pub fn value(&self, x: Point2) -> f64 {
        self.value_r(x.norm())
    }

    pub fn gradient(&self, x: Point2) -> Vec2 {
        let r = x.norm();
        let d = self.dr(r);
        if d == 0.0 {
            Vec2::ZERO
        } else {
            x * (d / r)
        }
    }

    pub fn laplacian(&self, x: Point2) -> f64 {
        self.laplacian_r(x.norm())
    }
}

/// Cutoff evaluation with the requested order.
pub fn cutoff(x: Point2, rho: f64, order: CutoffOrder) -> Result<CutoffValue> {
    let c = Cutoff::new(rho)?;
    Ok(match order {
        CutoffOrder::Value => CutoffValue::Scalar(c.value(x)),
        CutoffOrder::Gradient => CutoffValue::Vector(c.gradient(x)),
        CutoffOrder::Laplacian => CutoffValue::Scalar(c.laplacian(x)),
    })
}

/// Truncated vortex `u^χ = χΘ`.
pub fn truncated_velocity(x: Point2, ctx: &OseenContext) -> Vec2 {
    let chi = ctx.cutoff().value(x);
    if chi == 0.0 {
        return Vec2::ZERO;
    }
    oseen_velocity(x, ctx.t) * chi
}

/// `ω^χ = χΞ + g(|x|²) (x·∇χ)`.
pub fn truncated_vorticity(x: Point2, ctx: &OseenContext) -> f64 {
    let r = x.norm();
    truncated_vorticity_r(r, ctx.t, &ctx.cutoff())
}

pub(crate) fn truncated_vorticity_r(r: f64, t: f64, cut: &Cutoff) -> f64 {
    let chi = cut.value_r(r);
    if chi == 0.0 {
        return 0.0;
    }
    let (g, _) = kernel_g(r * r, t);
    let tt = 1.0 + t;
    let xi = (-r * r / (4.0 * tt)).exp() / (4.0 * PI * tt);
    chi * xi + g * r * cut.dr(r)
}

/// Analytic Jacobian of `u^χ`, `m[i][j] = ∂_j u^χ_i`.
pub fn truncated_velocity_gradient(x: Point2, ctx: &OseenContext) -> Mat2 {
    let cut = ctx.cutoff();
    let chi = cut.value(x);
    if chi == 0.0 {
        return Mat2::default();
    }
    oseen_velocity_gradient(x, ctx.t) * chi + Mat2::outer(oseen_velocity(x, ctx.t), cut.gradient(x))
}

/// Radial factor `Q^χ` of the remainder, `R^χ = x^⊥ Q^χ`.
pub(crate) fn remainder_factor(r: f64, t: f64, cut: &Cutoff) -> f64 {
    let dchi = cut.dr(r);
    let lap = cut.laplacian_r(r);
    if dchi == 0.0 && lap == 0.0 {
        return 0.0;
    }
    let (g, _) = kernel_g(r * r, t);
    let tt = 1.0 + t;
    let xi = (-r * r / (4.0 * tt)).exp() / (4.0 * PI * tt);
    g * lap + 2.0 * dchi / r * (xi - g)
}

/// Remainder `R^χ = Θ Δχ + 2 (x·∇χ / |x|²)(x^⊥ Ξ - Θ)`, supported in `ρ ≤ |x| ≤ 2ρ`.
pub fn remainder_field(x: Point2, ctx: &OseenContext) -> Vec2 {
    let q = remainder_factor(x.norm(), ctx.t, &ctx.cutoff());
    x.perp() * q
}

/// `|(u^χ·∇)u^χ + (x/|x|²)|u^χ|²|`, which vanishes identically.
pub fn nonlinear_identity_residual(x: Point2, ctx: &OseenContext) -> Result<f64> {
    let r2 = x.norm_sq();
    if r2 == 0.0 {
        return Err(invalid("x", "residual undefined at the origin"));
    }
    let u = truncated_velocity(x, ctx);
    let grad = truncated_velocity_gradient(x, ctx);
    let adv = grad.apply(u);
    let res = adv + x * (u.norm_sq() / r2);
    Ok(res.norm())
}

/// Radial profiles of the truncated vortex used by the solver, where
/// `u^χ = u_θ(r) e_θ`, `ω^χ = ω(r)` and `R^χ = R_θ(r) e_θ`.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedProfile {
    pub cutoff: Cutoff,
    pub t: f64,
}

impl TruncatedProfile {
    pub fn new(rho: f64, t: f64) -> Result<Self> {
        Ok(Self {
            cutoff: Cutoff::new(rho)?,
            t,
        })
    }

    pub fn azimuthal_velocity(&self, r: f64) -> f64 {
        self.cutoff.value_r(r) * oseen_speed(r, self.t)
    }

    pub fn vorticity(&self, r: f64) -> f64 {
        truncated_vorticity_r(r, self.t, &self.cutoff)
    }

    pub fn remainder_azimuthal(&self, r: f64) -> f64 {
        r * remainder_factor(r, self.t, &self.cutoff)
    }

    /// `dω^χ/dr` by fourth-order central differences.
    pub fn vorticity_dr(&self, r: f64) -> f64 {
        central_diff4(|s| self.vorticity(s), r, 1e-3 * self.cutoff.rho)
    }

    /// `curl R^χ = (1/r) d(r R_θ)/dr` by fourth-order central differences.
    pub fn remainder_curl(&self, r: f64) -> f64 {
        let h = 1e-3 * self.cutoff.rho;
        central_diff4(|s| s * self.remainder_azimuthal(s), r, h) / r
    }
}

fn central_diff4(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fd_jacobian(f: impl Fn(Point2) -> Vec2, x: Point2, h: f64) -> Mat2 {
        let e1 = Point2::new(h, 0.0);
        let e2 = Point2::new(0.0, h);
        let d1 = (f(x + e1) - f(x - e1)) * (0.5 / h);
        let d2 = (f(x + e2) - f(x - e2)) * (0.5 / h);
        Mat2::new(d1.x1, d2.x1, d1.x2, d2.x2)
    }

    #[test]
    fn kernel_series_matches_closed_form_at_switch() {
        for s in [0.5e-6, 0.99e-6, 1.01e-6, 1e-4] {
            let exact = -(-s as f64).exp_m1() / s;
            assert_relative_eq!(kernel_h(s), exact, max_relative = 1e-14);
        }
        for s in [0.05, 0.099, 0.101, 0.5] {
            let e = (-s as f64).exp();
            let closed = (s * e - 1.0 + e) / (s * s);
            assert_relative_eq!(kernel_h_prime(s), closed, max_relative = 1e-9);
        }
    }

    #[test]
    fn velocity_near_origin_is_linear() {
        let r = 1e-5;
        let v = oseen_velocity(Point2::new(r, 0.0), 0.0);
        assert!(v.x1.abs() < 1e-30);
        assert_relative_eq!(v.x2, r / (8.0 * PI), max_relative = 1e-9);
        assert_eq!(oseen_velocity(Point2::ZERO, 0.0), Vec2::ZERO);
    }

    #[test]
    fn speed_at_maximizer_radius() {
        let v = oseen_velocity(Point2::new(2.2418, 0.0), 0.0);
        assert!((v.norm() - 0.050784).abs() < 1e-4);
    }

    #[test]
    fn vorticity_values() {
        assert_relative_eq!(oseen_vorticity(Point2::ZERO, 0.0), 1.0 / (4.0 * PI));
        assert_relative_eq!(
            oseen_vorticity(Point2::new(2.0, 0.0), 0.0),
            (-1.0f64).exp() / (4.0 * PI),
            max_relative = 1e-15
        );
    }

    #[test]
    fn gradient_curl_and_divergence() {
        for &(x1, x2, t) in &[(0.3, 0.1, 0.0), (1.3, -0.7, 2.0), (-4.0, 2.5, 10.0), (1e-4, 2e-4, 0.0)] {
            let x = Point2::new(x1, x2);
            let g = oseen_velocity_gradient(x, t);
            assert!((g.curl() - oseen_vorticity(x, t)).abs() < 1e-12);
            assert!(g.trace().abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let x = Point2::new(1.3, -0.7);
        let t = 2.0;
        let exact = oseen_velocity_gradient(x, t);
        let fd = fd_jacobian(|y| oseen_velocity(y, t), x, 1e-5);
        assert!((exact - fd).frobenius() <= 1e-6 * exact.frobenius());
    }

    #[test]
    fn cutoff_support_and_transition() {
        let c = Cutoff::new(2.0).unwrap();
        assert_eq!(c.value_r(1.0), 0.0);
        assert_eq!(c.value_r(6.0), 1.0);
        let x = Point2::new(3.0, 0.0);
        let v = c.value(x);
        assert!(v > 0.0 && v < 1.0);
        let g = c.gradient(x);
        assert!(g.x1 > 0.0 && g.x2 == 0.0);
        assert!(matches!(
            cutoff(Point2::new(0.5, 0.0), 1.0, CutoffOrder::Value).unwrap(),
            CutoffValue::Scalar(v) if v == 0.0
        ));
        assert!(cutoff(x, 0.5, CutoffOrder::Value).is_err());
    }

    #[test]
    fn cutoff_derivatives_match_finite_differences() {
        let h = 1e-5;
        for sigma in [1.05, 1.2, 1.5, 1.77, 1.95] {
            let (v, d1, d2) = cutoff_profile(sigma);
            let (vp, d1p, _) = cutoff_profile(sigma + h);
            let (vm, d1m, _) = cutoff_profile(sigma - h);
            assert!((d1 - (vp - vm) / (2.0 * h)).abs() <= 1e-6 * d1.abs().max(1.0));
            assert!((d2 - (d1p - d1m) / (2.0 * h)).abs() <= 1e-5 * d2.abs().max(1.0));
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn cutoff_gradient_scales_with_rho() {
        let sup = |rho: f64| {
            let c = Cutoff::new(rho).unwrap();
            (0..=20000)
                .map(|i| rho * (1.0 + i as f64 / 20000.0))
                .map(|r| rho * c.dr(r).abs())
                .fold(0.0, f64::max)
        };
        let s1 = sup(1.0);
        assert!((sup(2.0) - s1).abs() < 1e-10);
        assert!((sup(4.0) - s1).abs() < 1e-10);
    }

    #[test]
    fn truncated_velocity_support() {
        let ctx = OseenContext::unit(2.0, 1.0).unwrap();
        assert_eq!(truncated_velocity(Point2::new(1.8, 0.0), &ctx), Vec2::ZERO);
        let far = Point2::new(0.0, 6.0);
        assert_eq!(truncated_velocity(far, &ctx), oseen_velocity(far, 1.0));
        assert_eq!(truncated_vorticity(far, &ctx), oseen_vorticity(far, 1.0));
    }

    #[test]
    fn truncated_vorticity_is_curl_of_velocity() {
        let ctx = OseenContext::unit(1.5, 0.5).unwrap();
        for &(x1, x2) in &[(1.8, 0.4), (-2.0, 1.1), (0.3, -2.6)] {
            let x = Point2::new(x1, x2);
            let g = truncated_velocity_gradient(x, &ctx);
            assert!((g.curl() - truncated_vorticity(x, &ctx)).abs() < 1e-12);
            assert!(g.trace().abs() < 1e-12);
            let fd = fd_jacobian(|y| truncated_velocity(y, &ctx), x, 1e-5);
            assert!((g - fd).frobenius() <= 1e-6 * g.frobenius());
        }
    }

    #[test]
    fn remainder_support_and_orthogonality() {
        let ctx = OseenContext::unit(2.0, 3.0).unwrap();
        assert_eq!(remainder_field(Point2::new(1.9, 0.0), &ctx), Vec2::ZERO);
        assert_eq!(remainder_field(Point2::new(0.0, 4.1), &ctx), Vec2::ZERO);
        for k in 0..32 {
            let x = Point2::polar(2.0 + 2.0 * (k as f64 + 0.5) / 32.0, 0.7 * k as f64);
            assert!(remainder_field(x, &ctx).dot(x).abs() < 1e-15);
        }
    }

    #[test]
    fn remainder_matches_heat_defect() {
        // R^χ = Δu^χ - ∂_t u^χ by finite differences in space and time.
        let rho = 2.0;
        let t = 1.0;
        let h = 1e-3;
        for &(x1, x2) in &[(2.5, 0.3), (-1.0, 3.2), (2.9, -2.1)] {
            let x = Point2::new(x1, x2);
            let ctx = OseenContext::unit(rho, t).unwrap();
            let u = |y: Point2| truncated_velocity(y, &ctx);
            let lap = (u(x + Point2::new(h, 0.0))
                + u(x - Point2::new(h, 0.0))
                + u(x + Point2::new(0.0, h))
                + u(x - Point2::new(0.0, h))
                - u(x) * 4.0)
                * (1.0 / (h * h));
            let ut = |s: f64| truncated_velocity(x, &ctx.at_time(s).unwrap());
            let dt = (ut(t + h) - ut(t - h)) * (0.5 / h);
            let expected = lap - dt;
            let r = remainder_field(x, &ctx);
            assert!((r - expected).norm() <= 1e-4 * r.norm(), "{r:?} vs {expected:?}");
        }
    }

    #[test]
    fn nonlinear_identity_holds() {
        let rho = 2.0;
        for (r, t) in [(3.0 * rho, 1.0), (1.5 * rho, 1.0), (1.2 * rho, 0.0), (1.8 * rho, 30.0)] {
            let ctx = OseenContext::unit(rho, t).unwrap();
            for k in 0..8 {
                let x = Point2::polar(r, 0.3 + k as f64);
                assert!(nonlinear_identity_residual(x, &ctx).unwrap() <= 1e-10);
            }
        }
        let ctx = OseenContext::unit(rho, 1.0).unwrap();
        assert_eq!(nonlinear_identity_residual(Point2::new(1.0, 0.0), &ctx).unwrap(), 0.0);
        assert!(nonlinear_identity_residual(Point2::ZERO, &ctx).is_err());
    }

    #[test]
    fn profile_matches_pointwise_fields() {
        let p = TruncatedProfile::new(2.0, 4.0).unwrap();
        let ctx = OseenContext::unit(2.0, 4.0).unwrap();
        for r in [2.2, 3.0, 3.7, 5.0] {
            let x = Point2::new(0.0, r);
            assert_relative_eq!(p.vorticity(r), truncated_vorticity(x, &ctx), max_relative = 1e-14);
            // e_θ at (0, r) points along -x1
            assert_relative_eq!(
                -truncated_velocity(x, &ctx).x1,
                p.azimuthal_velocity(r),
                max_relative = 1e-14
            );
            assert_relative_eq!(
                -remainder_field(x, &ctx).x1,
                p.remainder_azimuthal(r),
                max_relative = 1e-14
            );
        }
        // curl R^χ = Δω^χ - ∂_t ω^χ
        let r = 3.1;
        let h = 1e-3;
        let w = |s: f64, t: f64| TruncatedProfile::new(2.0, t).unwrap().vorticity(s);
        let lap = (w(r + h, 4.0) - 2.0 * w(r, 4.0) + w(r - h, 4.0)) / (h * h)
            + (w(r + h, 4.0) - w(r - h, 4.0)) / (2.0 * h * r);
        let wt = (w(r, 4.0 + h) - w(r, 4.0 - h)) / (2.0 * h);
        assert_relative_eq!(p.remainder_curl(r), lap - wt, max_relative = 1e-4);
    }

    #[test]
    fn self_similarity_and_pointwise_bound() {
        for &(x1, x2, t) in &[(0.5, 0.2, 0.0), (3.0, -1.0, 3.0), (-8.0, 5.0, 24.0), (0.1, 0.0, 99.0)] {
            let x = Point2::new(x1, x2);
            let tt: f64 = 1.0 + t;
            let lhs = oseen_velocity(x, t) * tt.sqrt();
            let rhs = oseen_velocity(x * (1.0 / tt.sqrt()), 0.0);
            assert!((lhs - rhs).norm() <= 1e-14 * rhs.norm().max(1e-300));
            let r = x.norm();
            let bound = (1.0 / r).min(r / (4.0 * tt)) / (2.0 * PI);
            assert!(oseen_velocity(x, t).norm() <= bound * (1.0 + 1e-14));
        }
    }

    #[test]
    fn context_validation() {
        assert!(OseenContext::new(1.0, 0.9, 0.0).is_err());
        assert!(OseenContext::new(1.0, 1.0, -1.0).is_err());
        assert!(OseenContext::new(f64::NAN, 1.0, 0.0).is_err());
        assert!(OseenContext::new(0.5, 1.0, 0.0).is_ok());
    }
}
