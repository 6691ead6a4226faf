//! Lᵖ, weighted L² and circulation integrals on the plane.
//!
//! Integrals are taken in polar coordinates: Gauss-Legendre panels in the
//! radius and the periodic trapezoid rule in the angle. The region beyond the
//! truncation radius is handled by a [`TailPolicy`].

use crate::error::{invalid, Error, Result};
use crate::geometry::{Magnitude, Point2, Vec2};
use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::num::NonZeroUsize;

/// Relative size of an acceptable tail under [`TailPolicy::Reject`].
pub const REJECT_TOLERANCE: f64 = 1e-8;

/// Known pointwise decay of a field beyond the truncation radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TailModel {
    /// `|f(x)| ≤ amplitude · |x|^{-exponent}`.
    PowerLaw { amplitude: f64, exponent: f64 },
    /// `|f(x)| ≤ amplitude · exp(-|x|² / 4 time)`.
    Gaussian { amplitude: f64, time: f64 },
    /// The field vanishes beyond the truncation radius.
    CompactSupport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TailPolicy {
    AnalyticBound(TailModel),
    /// Fit a power law to the radial density near the truncation radius.
    Extrapolate,
    /// Like `Extrapolate`, but fail unless the tail is negligible.
    Reject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    /// Inner radius of the integration region (0 for the whole plane).
    pub r_inner: f64,
    /// Radial breakpoints, strictly increasing; the last one is `r_cut`.
    pub r_panels: Vec<f64>,
    pub points_per_panel: usize,
    pub n_theta: usize,
    pub r_cut: f64,
    pub tail_policy: TailPolicy,
}

impl QuadSpec {
    pub fn new(
        r_inner: f64,
        r_panels: Vec<f64>,
        points_per_panel: usize,
        n_theta: usize,
        tail_policy: TailPolicy,
    ) -> Result<Self> {
        if !(r_inner >= 0.0) {
            return Err(invalid("r_inner", "must be non-negative"));
        }
        if r_panels.is_empty() {
            return Err(invalid("r_panels", "need at least one breakpoint"));
        }
        if r_panels[0] <= r_inner || r_panels.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("r_panels", "breakpoints must increase strictly from r_inner"));
        }
        if points_per_panel == 0 {
            return Err(invalid("points_per_panel", "must be positive"));
        }
        if n_theta < 8 || n_theta % 2 != 0 {
            return Err(invalid("n_theta", format!("must be even and >= 8, got {n_theta}")));
        }
        let r_cut = *r_panels.last().unwrap();
        Ok(Self {
            r_inner,
            r_panels,
            points_per_panel,
            n_theta,
            r_cut,
            tail_policy,
        })
    }

    /// Default whole-plane rule for fields at time `t` built with cutoff
    /// radius `rho`: panels `[0, 1, 2, 4, …, r_cut]` with `ρ` and `2ρ` added.
    pub fn for_fields(t: f64, rho: f64, tail_policy: TailPolicy) -> Self {
        let r_cut = 64f64.max(16.0 * (1.0 + t).sqrt()).max(8.0 * rho);
        Self::geometric(0.0, r_cut, &[rho, 2.0 * rho], tail_policy)
    }

    /// Panels `[r_inner, …, 2^k, …, r_cut]` plus the given extra breakpoints.
    pub fn geometric(r_inner: f64, r_cut: f64, extra: &[f64], tail_policy: TailPolicy) -> Self {
        let mut bps: Vec<f64> = Vec::new();
        let mut b = 1.0;
        while b < r_cut {
            bps.push(b);
            b *= 2.0;
        }
        bps.push(r_cut);
        bps.extend(extra.iter().copied());
        bps.retain(|&x| x > r_inner && x <= r_cut);
        bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        bps.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
        Self {
            r_inner,
            r_panels: bps,
            points_per_panel: 32,
            n_theta: 16,
            r_cut,
            tail_policy,
        }
    }

    /// Rule for a field supported in the annulus `r_in ≤ |x| ≤ r_out`.
    pub fn annulus(r_in: f64, r_out: f64, n_panels: usize) -> Result<Self> {
        if !(r_out > r_in) || r_in < 0.0 {
            return Err(invalid("r_out", "annulus needs 0 <= r_in < r_out"));
        }
        let n = n_panels.max(1);
        let panels = (1..=n).map(|k| r_in + (r_out - r_in) * k as f64 / n as f64).collect();
        Self::new(
            r_in,
            panels,
            32,
            16,
            TailPolicy::AnalyticBound(TailModel::CompactSupport),
        )
    }

    pub fn with_points_per_panel(mut self, n: usize) -> Self {
        self.points_per_panel = n;
        self
    }

    pub fn with_n_theta(mut self, n: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(invalid("n_theta", format!("must be even and >= 8, got {n}")));
        }
        self.n_theta = n;
        Ok(self)
    }

    pub fn with_tail_policy(mut self, policy: TailPolicy) -> Self {
        self.tail_policy = policy;
        self
    }

    fn panels(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.r_panels.len());
        let mut a = self.r_inner;
        for &b in &self.r_panels {
            out.push((a, b));
            a = b;
        }
        out
    }

    fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_theta as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    /// Estimated contribution of the truncated region to `value`.
    pub tail_bound: f64,
    pub p: f64,
}

/// A signed integral with its truncation estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub tail_bound: f64,
}

fn gl_rule(n: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n).expect("positive node count");
    GaussLegendre::new(n)
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (x, w))
        .collect()
}

/// Radial density `D(r) = r · weight(r) · ∫_0^{2π} h(r, θ) dθ` by trapezoid.
fn angular_density(h: &(impl Fn(Point2) -> f64 + Sync), r: f64, spec: &QuadSpec) -> f64 {
    let mut s = 0.0;
    for j in 0..spec.n_theta {
        s += h(Point2::polar(r, spec.theta(j)));
    }
    s * 2.0 * PI / spec.n_theta as f64 * r
}

/// `∫_{r_inner}^{r_cut} D(r) dr`, panels summed in a fixed order.
fn radial_integral(h: &(impl Fn(Point2) -> f64 + Sync), spec: &QuadSpec) -> f64 {
    let rule = gl_rule(spec.points_per_panel);
    let parts: Vec<f64> = spec
        .panels()
        .par_iter()
        .map(|&(a, b)| {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (b + a);
            rule.iter()
                .map(|&(x, w)| w * half * angular_density(h, mid + half * x, spec))
                .sum::<f64>()
        })
        .collect();
    parts.iter().sum()
}

/// Tail `∫_{|x|>R} weight·|f|^p` under `spec.tail_policy`, where the weight
/// grows like `|x|^{weight_exponent}` and is bounded by `weight(R)·(|x|/R)^{weight_exponent}`.
fn tail_integral(
    density: &(impl Fn(Point2) -> f64 + Sync),
    p: f64,
    weight_at_cut: f64,
    weight_exponent: f64,
    integral: f64,
    spec: &QuadSpec,
) -> Result<f64> {
    let r = spec.r_cut;
    match spec.tail_policy {
        TailPolicy::AnalyticBound(TailModel::CompactSupport) => Ok(0.0),
        TailPolicy::AnalyticBound(TailModel::PowerLaw { amplitude, exponent }) => {
            power_law_tail(amplitude, exponent, p, weight_at_cut, weight_exponent, r)
        }
        TailPolicy::AnalyticBound(TailModel::Gaussian { amplitude, time }) => {
            let c = p / (4.0 * time);
            // ∫_R^∞ r^{w+1} e^{-c r²} dr ≤ R^w e^{-cR²} (1 + w/(cR²)) / 2c
            let correction = 1.0 + weight_exponent.max(0.0) / (c * r * r);
            Ok(2.0 * PI * amplitude.powf(p) * weight_at_cut * (-c * r * r).exp() * correction / (2.0 * c))
        }
        TailPolicy::Extrapolate | TailPolicy::Reject => {
            let r1 = spec.r_inner.max(0.75 * r);
            let d2 = angular_density(density, r, spec);
            let d1 = angular_density(density, r1, spec);
            let tail = extrapolated_tail(r1, d1, r, d2)?;
            if matches!(spec.tail_policy, TailPolicy::Reject) && tail > REJECT_TOLERANCE * integral {
                return Err(Error::TailTooLarge {
                    tail,
                    tolerance: REJECT_TOLERANCE * integral,
                });
            }
            Ok(tail)
        }
    }
}

/// `∫_{|x|>R} weight |f|^p` for `|f| ≤ A |x|^{-k}` and a weight growing like
/// `|x|^{weight_exponent}` from `weight_at_cut` at `R`.
pub fn power_law_tail(
    amplitude: f64,
    exponent: f64,
    p: f64,
    weight_at_cut: f64,
    weight_exponent: f64,
    r_cut: f64,
) -> Result<f64> {
    let decay = exponent * p - 2.0 - weight_exponent;
    if decay <= 0.0 {
        return Err(Error::Divergent(format!(
            "|x|^-{exponent} tail is not {p}-integrable against |x|^{weight_exponent}"
        )));
    }
    Ok(2.0 * PI * amplitude.powf(p) * weight_at_cut * r_cut.powf(2.0 - exponent * p) / decay)
}

/// `∫_{r2}^∞ D(r) dr` for a radial density fitted as `D(r) = C r^{-k}` through
/// `(r1, d1)` and `(r2, d2)`, `r1 < r2`.
pub fn extrapolated_tail(r1: f64, d1: f64, r2: f64, d2: f64) -> Result<f64> {
    if d2 <= f64::MIN_POSITIVE {
        return Ok(0.0);
    }
    if d1 <= f64::MIN_POSITIVE || r1 >= r2 {
        return Err(Error::Divergent("radial density grows at the truncation radius".into()));
    }
    let k = -(d2 / d1).ln() / (r2 / r1).ln();
    if k <= 1.0 {
        return Err(Error::Divergent(format!(
            "radial density decays like r^-{k:.3}, not integrable"
        )));
    }
    Ok(d2 * r2 / (k - 1.0))
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(invalid("p", format!("exponent must lie in [1, ∞], got {p}")));
    }
    Ok(())
}

fn pow_mag(m: f64, p: f64) -> f64 {
    if p == 1.0 {
        m
    } else if p == 2.0 {
        m * m
    } else {
        m.powf(p)
    }
}

/// `(∫ weight(|x|) |f(x)|^p dx)^{1/p}` over the spec region plus tail.
pub fn weighted_lp_norm<V, F, W>(
    field: F,
    p: f64,
    weight: W,
    weight_exponent: f64,
    spec: &QuadSpec,
) -> Result<NormResult>
where
    V: Magnitude,
    F: Fn(Point2) -> V + Sync,
    W: Fn(f64) -> f64 + Sync,
{
    check_p(p)?;
    if p.is_infinite() {
        return sup_norm(|x| weight(x.norm()) * field(x).magnitude(), spec);
    }
    let h = |x: Point2| weight(x.norm()) * pow_mag(field(x).magnitude(), p);
    let integral = radial_integral(&h, spec);
    let tail = tail_integral(&h, p, weight(spec.r_cut), weight_exponent, integral, spec)?;
    let base = integral.powf(1.0 / p);
    let value = (integral + tail).powf(1.0 / p);
    Ok(NormResult {
        value,
        tail_bound: value - base,
        p,
    })
}

/// Lᵖ norm over the spec region, `p ∈ [1, ∞]` (use `f64::INFINITY` for ∞).
pub fn lp_norm<V, F>(field: F, p: f64, spec: &QuadSpec) -> Result<NormResult>
where
    V: Magnitude,
    F: Fn(Point2) -> V + Sync,
{
    weighted_lp_norm(field, p, |_| 1.0, 0.0, spec)
}

/// `(∫ (1+|x|²)^m |f|² dx)^{1/2}`.
pub fn weighted_l2m_norm<F>(field: F, m: f64, spec: &QuadSpec) -> Result<NormResult>
where
    F: Fn(Point2) -> f64 + Sync,
{
    if !(m >= 0.0) {
        return Err(invalid("m", format!("weight exponent must be >= 0, got {m}")));
    }
    weighted_lp_norm(field, 2.0, |r| (1.0 + r * r).powf(m), 2.0 * m, spec)
}

/// Signed integral `∫ f dx`; the tail bound comes from `|f|`.
pub fn plane_integral<F>(field: F, spec: &QuadSpec) -> Result<IntegralResult>
where
    F: Fn(Point2) -> f64 + Sync,
{
    let value = radial_integral(&field, spec);
    let abs = |x: Point2| field(x).abs();
    let scale = radial_integral(&abs, spec);
    let tail = tail_integral(&abs, 1.0, 1.0, 0.0, scale, spec)?;
    Ok(IntegralResult {
        value,
        tail_bound: tail,
    })
}

/// Supremum by a dense radial scan followed by golden-section refinement.
fn sup_norm(mag: impl Fn(Point2) -> f64 + Sync, spec: &QuadSpec) -> Result<NormResult> {
    let per_panel = 4 * spec.points_per_panel;
    let mut radii = vec![spec.r_inner];
    for (a, b) in spec.panels() {
        for k in 1..=per_panel {
            radii.push(a + (b - a) * k as f64 / per_panel as f64);
        }
    }
    let scan: Vec<(f64, usize)> = radii
        .par_iter()
        .map(|&r| {
            (0..spec.n_theta)
                .map(|j| (mag(Point2::polar(r, spec.theta(j))), j))
                .fold((f64::NEG_INFINITY, 0), |acc, v| if v.0 > acc.0 { v } else { acc })
        })
        .collect();
    let (mut best, mut best_i, mut best_j) = (f64::NEG_INFINITY, 0, 0);
    for (i, &(v, j)) in scan.iter().enumerate() {
        if v > best {
            best = v;
            best_i = i;
            best_j = j;
        }
    }
    let theta = spec.theta(best_j);
    let lo = radii[best_i.saturating_sub(1)];
    let hi = radii[(best_i + 1).min(radii.len() - 1)];
    let (_, refined) = golden_section_max(|r| mag(Point2::polar(r, theta)), lo, hi, 1e-12);
    let value = best.max(refined);

    let at_boundary = best_i == radii.len() - 1;
    let tail_bound = match spec.tail_policy {
        TailPolicy::AnalyticBound(TailModel::CompactSupport) => 0.0,
        TailPolicy::AnalyticBound(TailModel::PowerLaw { amplitude, exponent }) => {
            (amplitude * spec.r_cut.powf(-exponent) - value).max(0.0)
        }
        TailPolicy::AnalyticBound(TailModel::Gaussian { amplitude, time }) => {
            (amplitude * (-spec.r_cut * spec.r_cut / (4.0 * time)).exp() - value).max(0.0)
        }
        TailPolicy::Extrapolate if at_boundary => value,
        TailPolicy::Reject if at_boundary => {
            return Err(Error::TailTooLarge {
                tail: value,
                tolerance: 0.0,
            })
        }
        _ => 0.0,
    };
    Ok(NormResult {
        value,
        tail_bound,
        p: f64::INFINITY,
    })
}

/// Maximizer and maximum of a unimodal `f` on `[a, b]`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while (b - a).abs() > tol * (1.0 + a.abs()) && iter < 200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iter += 1;
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Trapezoidal line integral of the tangential component around `|x| = radius`.
pub fn circulation<F>(field: F, radius: f64, n_theta: usize) -> Result<f64>
where
    F: Fn(Point2) -> Vec2,
{
    if !(radius > 0.0) {
        return Err(invalid("radius", "must be positive"));
    }
    if n_theta == 0 {
        return Err(invalid("n_theta", "must be positive"));
    }
    let dtheta = 2.0 * PI / n_theta as f64;
    let mut s = 0.0;
    for j in 0..n_theta {
        let theta = j as f64 * dtheta;
        let x = Point2::polar(radius, theta);
        let tangent = Point2::polar(1.0, theta).perp();
        s += field(x).dot(tangent);
    }
    Ok(s * radius * dtheta)
}

/// Polar quadrature nodes with area weights, for fields known only at nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadGrid {
    pub radii: Vec<f64>,
    /// `w_GL · r · 2π / n_theta` for each radial node.
    pub area_weights: Vec<f64>,
    pub n_theta: usize,
    pub r_inner: f64,
    pub r_cut: f64,
}

impl QuadGrid {
    pub fn from_spec(spec: &QuadSpec) -> Self {
        let rule = gl_rule(spec.points_per_panel);
        let mut radii = Vec::new();
        let mut area_weights = Vec::new();
        let dtheta = 2.0 * PI / spec.n_theta as f64;
        for (a, b) in spec.panels() {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (b + a);
            for &(x, w) in &rule {
                let r = mid + half * x;
                radii.push(r);
                area_weights.push(w * half * r * dtheta);
            }
        }
        Self {
            radii,
            area_weights,
            n_theta: spec.n_theta,
            r_inner: spec.r_inner,
            r_cut: spec.r_cut,
        }
    }

    pub fn len(&self) -> usize {
        self.radii.len() * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_theta as f64
    }

    /// Node `(i, j)` flattened as `i * n_theta + j`.
    pub fn point(&self, idx: usize) -> Point2 {
        let (i, j) = (idx / self.n_theta, idx % self.n_theta);
        Point2::polar(self.radii[i], self.theta(j))
    }

    pub fn weight(&self, idx: usize) -> f64 {
        self.area_weights[idx / self.n_theta]
    }

    pub fn points(&self) -> impl Iterator<Item = Point2> + '_ {
        (0..self.len()).map(|k| self.point(k))
    }

    pub fn sample<V: Send, F: Fn(Point2) -> V + Sync>(&self, field: F) -> PolarSample<V> {
        let values = (0..self.len()).into_par_iter().map(|k| field(self.point(k))).collect();
        PolarSample {
            grid: self.clone(),
            values,
        }
    }
}

/// Field values at the nodes of a [`QuadGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct PolarSample<V> {
    pub grid: QuadGrid,
    pub values: Vec<V>,
}

impl<V: Magnitude> PolarSample<V> {
    /// `∫ weight(|x|) |v|^p` over the sampled region.
    pub fn weighted_power_integral(&self, p: f64, weight: impl Fn(f64) -> f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let r = self.grid.radii[k / self.grid.n_theta];
                self.grid.weight(k) * weight(r) * pow_mag(v.magnitude(), p)
            })
            .sum()
    }

    /// Radial density `r ∫ |v(r, θ)|^p dθ` on ring `i` by trapezoid.
    pub fn ring_density(&self, i: usize, p: f64) -> f64 {
        let n = self.grid.n_theta;
        let sum: f64 = self.values[i * n..(i + 1) * n]
            .iter()
            .map(|v| pow_mag(v.magnitude(), p))
            .sum();
        sum * 2.0 * PI / n as f64 * self.grid.radii[i]
    }

    pub fn power_integral(&self, p: f64) -> f64 {
        self.weighted_power_integral(p, |_| 1.0)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.values.iter().map(|v| v.magnitude()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{oseen_velocity, oseen_vorticity};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn gaussian_spec(t: f64) -> QuadSpec {
        QuadSpec::for_fields(
            t,
            1.0,
            TailPolicy::AnalyticBound(TailModel::Gaussian {
                amplitude: 1.0 / (4.0 * PI * (1.0 + t)),
                time: 1.0 + t,
            }),
        )
    }

    fn velocity_spec() -> QuadSpec {
        QuadSpec::for_fields(
            0.0,
            1.0,
            TailPolicy::AnalyticBound(TailModel::PowerLaw {
                amplitude: 1.0 / (2.0 * PI),
                exponent: 1.0,
            }),
        )
    }

    #[test]
    fn gaussian_mass_and_l2() {
        for t in [0.0, 1.0, 10.0] {
            let n = lp_norm(|x| oseen_vorticity(x, t), 1.0, &gaussian_spec(t)).unwrap();
            assert!((n.value - 1.0).abs() < 1e-8, "t = {t}: {}", n.value);
        }
        let n = lp_norm(|x| oseen_vorticity(x, 0.0), 2.0, &gaussian_spec(0.0)).unwrap();
        assert_relative_eq!(n.value * n.value, 1.0 / (8.0 * PI), max_relative = 1e-6);
    }

    #[test]
    fn oseen_sup_norm() {
        let n = lp_norm(|x| oseen_velocity(x, 0.0), f64::INFINITY, &velocity_spec()).unwrap();
        assert!((n.value - 0.050784).abs() < 1e-4);
        assert!((n.value - 0.0507841687885389).abs() < 1e-10);
    }

    #[test]
    fn oseen_l4_norm() {
        let n = lp_norm(|x| oseen_velocity(x, 0.0), 4.0, &velocity_spec()).unwrap();
        assert_relative_eq!(n.value, 0.136036462190442, max_relative = 1e-9);
        assert!(n.tail_bound > 0.0);
    }

    #[test]
    fn weighted_gaussian_moments() {
        let spec = gaussian_spec(0.0);
        let m0 = weighted_l2m_norm(|x| oseen_vorticity(x, 0.0), 0.0, &spec).unwrap();
        assert_relative_eq!(m0.value, (8.0 * PI).powf(-0.5), max_relative = 1e-6);
        // ∫ (1+r²)² Ξ₀² = (1/16π²)·2π·∫(1+2r²+r⁴)e^{-r²/2} r dr = (1 + 4 + 8)/(8π)
        let m2 = weighted_l2m_norm(|x| oseen_vorticity(x, 0.0), 2.0, &spec).unwrap();
        assert_relative_eq!(m2.value * m2.value, 13.0 / (8.0 * PI), max_relative = 1e-6);
    }

    #[test]
    fn slow_decay_rejected() {
        let slow = |x: Point2| 1.0 / (1.0 + x.norm());
        for policy in [TailPolicy::Reject, TailPolicy::Extrapolate] {
            let spec = QuadSpec::for_fields(0.0, 1.0, policy);
            assert!(weighted_l2m_norm(slow, 2.0, &spec).is_err());
        }
        let spec = QuadSpec::for_fields(
            0.0,
            1.0,
            TailPolicy::AnalyticBound(TailModel::PowerLaw {
                amplitude: 1.0,
                exponent: 1.0,
            }),
        );
        assert!(matches!(weighted_l2m_norm(slow, 2.0, &spec), Err(Error::Divergent(_))));
    }

    #[test]
    fn reject_accepts_gaussian() {
        let spec = QuadSpec::for_fields(0.0, 1.0, TailPolicy::Reject);
        let n = lp_norm(|x| oseen_vorticity(x, 0.0), 1.0, &spec).unwrap();
        assert!((n.value - 1.0).abs() < 1e-8);
        assert_eq!(n.tail_bound, 0.0);
    }

    #[test]
    fn extrapolated_tail_of_power_law() {
        // |f| = (1+r²)^{-3/2}: ∫ |f|² = 2π ∫ r (1+r²)^{-3} dr = π/2
        let spec = QuadSpec::geometric(0.0, 16.0, &[], TailPolicy::Extrapolate);
        let n = lp_norm(|x: Point2| (1.0 + x.norm_sq()).powf(-1.5), 2.0, &spec).unwrap();
        assert_relative_eq!(n.value * n.value, PI / 2.0, max_relative = 1e-6);
    }

    #[test]
    fn circulation_values() {
        let c = circulation(|x| oseen_velocity(x, 0.0), 100.0, 64).unwrap();
        assert!((c - 1.0).abs() < 1e-6);
        let c = circulation(|x| oseen_velocity(x, 0.0), 2.0, 64).unwrap();
        assert!((c - (1.0 - (-1.0f64).exp())).abs() < 1e-8);
        // gradient of e^{-|x|²}
        let grad = |x: Point2| x * (-2.0 * (-x.norm_sq()).exp());
        assert!(circulation(grad, 1.3, 64).unwrap().abs() < 1e-10);
        assert!(circulation(grad, 0.0, 64).is_err());
    }

    #[test]
    fn refinement_within_tail_bound() {
        let spec = velocity_spec();
        let a = lp_norm(|x| oseen_velocity(x, 0.0), 4.0, &spec).unwrap();
        let b = lp_norm(|x| oseen_velocity(x, 0.0), 4.0, &spec.clone().with_points_per_panel(64)).unwrap();
        assert!((a.value - b.value).abs() <= a.tail_bound + 1e-8);
    }

    #[test]
    fn angular_resolution_independent() {
        let spec = velocity_spec();
        let a = lp_norm(|x| oseen_velocity(x, 0.0), 3.0, &spec).unwrap();
        let b = lp_norm(|x| oseen_velocity(x, 0.0), 3.0, &spec.clone().with_n_theta(48).unwrap()).unwrap();
        assert!((a.value - b.value).abs() <= 1e-12 * a.value);
    }

    #[test]
    fn spec_validation() {
        assert!(QuadSpec::new(0.0, vec![1.0, 1.0], 8, 16, TailPolicy::Reject).is_err());
        assert!(QuadSpec::new(0.0, vec![1.0, 2.0], 8, 15, TailPolicy::Reject).is_err());
        assert!(QuadSpec::new(0.0, vec![1.0, 2.0], 8, 6, TailPolicy::Reject).is_err());
        assert!(QuadSpec::new(0.0, vec![1.0, 2.0], 8, 16, TailPolicy::Reject).is_ok());
        assert!(lp_norm(|x| oseen_vorticity(x, 0.0), 0.5, &gaussian_spec(0.0)).is_err());
    }

    #[test]
    fn sampled_grid_matches_direct_rule() {
        let spec = gaussian_spec(0.0);
        let grid = QuadGrid::from_spec(&spec);
        let s = grid.sample(|x| oseen_vorticity(x, 0.0));
        assert_relative_eq!(s.power_integral(1.0), 1.0, max_relative = 1e-10);
        assert_relative_eq!(s.max_magnitude(), oseen_vorticity(grid.point(0), 0.0));
    }

    proptest! {
        #[test]
        fn lp_norm_is_homogeneous(c in -50.0f64..50.0, p in 1.0f64..6.0) {
            let spec = gaussian_spec(0.0);
            let base = lp_norm(|x| oseen_vorticity(x, 0.0), p, &spec).unwrap().value;
            let scaled = lp_norm(|x| c * oseen_vorticity(x, 0.0), p, &spec).unwrap().value;
            prop_assert!((scaled - c.abs() * base).abs() <= 1e-12 * base * c.abs().max(1.0));
        }
    }
}
