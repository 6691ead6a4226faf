//! Measured constants of the truncated-vortex estimates.
//!
//! Every inequality is checked on a finite sweep of `(t, s, ρ, p)`. Constants
//! that have no closed form (`b_p`, `κ₁`, `κ₂`) are reported as the smallest
//! value admissible on the sweep, together with their spread across `ρ`.

use crate::error::{invalid, Error, Result};
use crate::fields::{
    nonlinear_identity_residual, oseen_velocity, oseen_velocity_gradient, oseen_vorticity, remainder_field,
    truncated_velocity, truncated_velocity_gradient, truncated_vorticity, OseenContext, CUTOFF_PROFILE_ID,
};
use crate::geometry::{Mat2, Point2, Vec2};
use crate::quadrature::{lp_norm, plane_integral, NormResult, QuadSpec, TailModel, TailPolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Relative slack allowed on `lhs ≤ rhs` for quadrature noise.
pub const NUMERICAL_SLACK: f64 = 1e-9;
/// Allowed relative spread across `ρ` of `a_p` and `b_p`.
pub const AB_RHO_TOLERANCE: f64 = 0.10;
/// Allowed relative spread across `ρ` of `κ₁` and `κ₂`.
pub const KAPPA_RHO_TOLERANCE: f64 = 0.25;
/// Relative tolerance of the exact integral identities.
pub const IDENTITY_TOLERANCE: f64 = 1e-6;
/// Gagliardo-Nirenberg constant used for the variant table.
pub const GN_CONSTANT_VARIANT: f64 = 0.6430;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub times: Vec<f64>,
    pub rhos: Vec<f64>,
    /// Use `f64::INFINITY` for the sup norm.
    pub exponents: Vec<f64>,
    pub seed: u64,
    /// Test fields per `(t, ρ)` cell for the dual remainder bound.
    pub test_fields: usize,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            times: vec![0.0, 0.5, 1.0, 3.0, 10.0, 30.0, 100.0],
            rhos: vec![1.0, 2.0, 4.0],
            exponents: vec![4.0 / 3.0, 2.0, 4.0, f64::INFINITY],
            seed: 20240917,
            test_fields: 8,
        }
    }
}

impl SweepGrid {
    fn params(&self) -> BTreeMap<String, Vec<f64>> {
        let mut m = BTreeMap::new();
        m.insert("t".into(), self.times.clone());
        m.insert("s".into(), self.times.clone());
        m.insert("rho".into(), self.rhos.clone());
        m.insert("p".into(), self.exponents.clone());
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimate_id: String,
    pub params: BTreeMap<String, Vec<f64>>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub worst_ratio: f64,
    pub constant_measured: f64,
    pub pass: bool,
    pub cutoff_profile: String,
    /// Secondary measurements: per-ρ constants, identity errors, etc.
    pub extras: BTreeMap<String, f64>,
}

impl EstimateReport {
    pub(crate) fn new(
        estimate_id: &str,
        params: BTreeMap<String, Vec<f64>>,
        lhs: Vec<f64>,
        rhs: Vec<f64>,
        constant_measured: f64,
        extras: BTreeMap<String, f64>,
        extra_pass: bool,
    ) -> Self {
        let worst_ratio = lhs.iter().zip(&rhs).map(|(&l, &r)| ratio(l, r)).fold(0.0, f64::max);
        let finite = lhs.iter().chain(&rhs).all(|v| v.is_finite() && *v >= 0.0);
        Self {
            estimate_id: estimate_id.to_string(),
            params,
            lhs,
            rhs,
            worst_ratio,
            constant_measured,
            pass: finite && worst_ratio <= 1.0 + NUMERICAL_SLACK && extra_pass && constant_measured.is_finite(),
            cutoff_profile: CUTOFF_PROFILE_ID.to_string(),
            extras,
        }
    }
}

/// `l / r` with `0/0 = 0`.
fn ratio(l: f64, r: f64) -> f64 {
    if l == 0.0 {
        0.0
    } else if r == 0.0 {
        f64::INFINITY
    } else {
        l / r
    }
}

/// Relative spread `(max - min) / max` of constants measured at different ρ.
pub fn rho_spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if max <= 0.0 {
        return f64::INFINITY;
    }
    (max - min) / max
}

fn velocity_tail() -> TailPolicy {
    TailPolicy::AnalyticBound(TailModel::PowerLaw {
        amplitude: 1.0 / (2.0 * PI),
        exponent: 1.0,
    })
}

fn gradient_tail() -> TailPolicy {
    // |∇Θ(x)| → √2 / (2π|x|²) as |x| → ∞
    TailPolicy::AnalyticBound(TailModel::PowerLaw {
        amplitude: 2f64.sqrt() / (2.0 * PI),
        exponent: 2.0,
    })
}

fn gaussian_tail(amplitude: f64, t: f64) -> TailPolicy {
    TailPolicy::AnalyticBound(TailModel::Gaussian {
        amplitude,
        time: 1.0 + t,
    })
}

fn p_label(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p:.4}")
    }
}

/// Time weight `(1+t)^{e}` with `e` evaluated at `p = ∞` as its limit.
fn time_weight(t: f64, exponent: f64) -> f64 {
    (1.0 + t).powf(exponent)
}

fn inv_p(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

/// `a_p = ‖Θ₀‖_{Lᵖ}` for `p ∈ (2, ∞]`.
pub fn compute_a_p(p: f64) -> Result<f64> {
    a_p_with(p, 32)
}

fn a_p_with(p: f64, points_per_panel: usize) -> Result<f64> {
    if p.is_nan() || p <= 2.0 {
        return Err(Error::Divergent(format!(
            "the Oseen velocity decays like 1/(2π|x|) and is not in L^{p}"
        )));
    }
    let spec = QuadSpec::for_fields(0.0, 1.0, velocity_tail()).with_points_per_panel(points_per_panel);
    Ok(lp_norm(|x| oseen_velocity(x, 0.0), p, &spec)?.value)
}

fn truncated_lp(p: f64, ctx: &OseenContext) -> Result<NormResult> {
    let spec = QuadSpec::for_fields(ctx.t, ctx.rho, velocity_tail());
    lp_norm(|x| truncated_velocity(x, ctx), p, &spec)
}

fn truncated_gradient_lp(p: f64, ctx: &OseenContext) -> Result<NormResult> {
    let spec = QuadSpec::for_fields(ctx.t, ctx.rho, gradient_tail());
    lp_norm(|x| truncated_velocity_gradient(x, ctx), p, &spec)
}

/// Maximum per ρ of per-cell values laid out ρ-major.
fn per_rho_max(values: &[f64], n_rho: usize) -> Vec<f64> {
    let per = values.len() / n_rho;
    (0..n_rho)
        .map(|k| values[k * per..(k + 1) * per].iter().copied().fold(0.0, f64::max))
        .collect()
}

fn insert_per_rho(extras: &mut BTreeMap<String, f64>, name: &str, rhos: &[f64], values: &[f64]) {
    for (rho, v) in rhos.iter().zip(values) {
        extras.insert(format!("{name}[rho={rho}]"), *v);
    }
}

/// Checks `‖u^χ(t)‖_p (1+t)^{1/2-1/p} ≤ a_p` over the sweep.
pub fn verify_a_p(p: f64, grid: &SweepGrid) -> Result<EstimateReport> {
    let a_p = compute_a_p(p)?;
    let cells: Vec<(f64, f64)> = grid
        .rhos
        .iter()
        .flat_map(|&rho| grid.times.iter().map(move |&t| (rho, t)))
        .collect();
    let lhs = cells
        .par_iter()
        .map(|&(rho, t)| {
            let ctx = OseenContext::unit(rho, t)?;
            Ok(truncated_lp(p, &ctx)?.value * time_weight(t, 0.5 - inv_p(p)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let per_rho = per_rho_max(&lhs, grid.rhos.len());
    let spread = rho_spread(&per_rho);
    let mut extras = BTreeMap::new();
    insert_per_rho(&mut extras, "a_p", &grid.rhos, &per_rho);
    extras.insert("rho_spread".into(), spread);
    extras.insert("p".into(), p);
    let mut params = grid.params();
    params.remove("s");
    params.insert("p".into(), vec![p]);
    let rhs = vec![a_p; lhs.len()];
    Ok(EstimateReport::new(
        &format!("velocity_lp[p={}]", p_label(p)),
        params,
        lhs,
        rhs,
        a_p,
        extras,
        spread <= AB_RHO_TOLERANCE,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientConstant {
    pub p: f64,
    /// Max over the sweep of `‖∇u^χ(t)‖_p (1+t)^{1-1/p}`.
    pub b_p: f64,
    /// `‖∇Θ₀‖_{Lᵖ}` (Frobenius norm of the Jacobian).
    pub oseen_part: f64,
    pub per_rho: Vec<f64>,
}

/// `b_p` measured on the sweep, `p ∈ (1, ∞]`.
pub fn compute_b_p(p: f64, grid: &SweepGrid) -> Result<GradientConstant> {
    let report = verify_b_p(p, grid)?;
    Ok(GradientConstant {
        p,
        b_p: report.constant_measured,
        oseen_part: report.extras["oseen_part"],
        per_rho: grid
            .rhos
            .iter()
            .map(|rho| report.extras[&format!("b_p[rho={rho}]")])
            .collect(),
    })
}

/// `‖∇Θ₀‖_{Lᵖ}`.
pub fn oseen_gradient_norm(p: f64) -> Result<f64> {
    if p.is_nan() || p <= 1.0 {
        return Err(invalid("p", format!("gradient bound needs p > 1, got {p}")));
    }
    let spec = QuadSpec::for_fields(0.0, 1.0, gradient_tail());
    Ok(lp_norm(|x| oseen_velocity_gradient(x, 0.0), p, &spec)?.value)
}

pub fn verify_b_p(p: f64, grid: &SweepGrid) -> Result<EstimateReport> {
    let oseen_part = oseen_gradient_norm(p)?;
    let cells: Vec<(f64, f64)> = grid
        .rhos
        .iter()
        .flat_map(|&rho| grid.times.iter().map(move |&t| (rho, t)))
        .collect();
    let lhs = cells
        .par_iter()
        .map(|&(rho, t)| {
            let ctx = OseenContext::unit(rho, t)?;
            Ok(truncated_gradient_lp(p, &ctx)?.value * time_weight(t, 1.0 - inv_p(p)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let b_p = lhs.iter().copied().fold(0.0, f64::max);
    let per_rho = per_rho_max(&lhs, grid.rhos.len());
    let spread = rho_spread(&per_rho);
    let mut extras = BTreeMap::new();
    insert_per_rho(&mut extras, "b_p", &grid.rhos, &per_rho);
    extras.insert("rho_spread".into(), spread);
    extras.insert("oseen_part".into(), oseen_part);
    extras.insert("p".into(), p);
    let mut params = grid.params();
    params.remove("s");
    params.insert("p".into(), vec![p]);
    let rhs = vec![b_p; lhs.len()];
    Ok(EstimateReport::new(
        &format!("gradient_lp[p={}]", p_label(p)),
        params,
        lhs,
        rhs,
        b_p,
        extras,
        spread <= AB_RHO_TOLERANCE,
    ))
}

/// Quadrature of `(1/4π²) ∫ |x|^{-2} (e^{-|x|²/4(1+t)} - e^{-|x|²/4(1+s)})² dx`
/// and its closed form `(1/2π) log(½√((1+t)/(1+s)) + ½√((1+s)/(1+t)))`.
pub fn velocity_difference_identity(t: f64, s: f64) -> Result<(f64, f64)> {
    if t == s {
        return Ok((0.0, 0.0));
    }
    let (tt, ss) = (1.0 + t, 1.0 + s);
    let spec = QuadSpec::for_fields(t.max(s), 1.0, gaussian_tail(1.0, t.max(s)));
    let quad = plane_integral(
        |x| {
            let q = x.norm_sq();
            let d = (-q / (4.0 * tt)).exp() - (-q / (4.0 * ss)).exp();
            d * d / (4.0 * PI * PI * q)
        },
        &spec,
    )?
    .value;
    let closed = (0.5 * (tt / ss).sqrt() + 0.5 * (ss / tt).sqrt()).ln() / (2.0 * PI);
    Ok((quad, closed))
}

/// Quadrature of `∫ (Ξ(t) - Ξ(s))²` and the closed form
/// `(1/8π)(1/(1+t) + 1/(1+s) - 4/(t+s+2))`.
pub fn vorticity_difference_identity(t: f64, s: f64) -> Result<(f64, f64)> {
    if t == s {
        return Ok((0.0, 0.0));
    }
    let tm = t.max(s);
    let spec = QuadSpec::for_fields(tm, 1.0, gaussian_tail(1.0, tm));
    let quad = plane_integral(
        |x| {
            let d = oseen_vorticity(x, t) - oseen_vorticity(x, s);
            d * d
        },
        &spec,
    )?
    .value;
    let closed = (1.0 / (1.0 + t) + 1.0 / (1.0 + s) - 4.0 / (t + s + 2.0)) / (8.0 * PI);
    Ok((quad, closed))
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// `‖u^χ(t) - u^χ(s)‖²_{L²}`.
fn velocity_difference_sq(t: f64, s: f64, rho: f64) -> Result<f64> {
    if t == s {
        return Ok(0.0);
    }
    let ct = OseenContext::unit(rho, t)?;
    let cs = OseenContext::unit(rho, s)?;
    let tm = t.max(s);
    let spec = QuadSpec::for_fields(tm, rho, gaussian_tail(1.0, tm));
    let n = lp_norm(|x| truncated_velocity(x, &ct) - truncated_velocity(x, &cs), 2.0, &spec)?;
    Ok(n.value * n.value)
}

/// `‖∇u^χ(t) - ∇u^χ(s)‖²_{L²}` and `‖ω^χ(t) - ω^χ(s)‖²_{L²}`.
fn gradient_difference_sq(t: f64, s: f64, rho: f64) -> Result<(f64, f64)> {
    if t == s {
        return Ok((0.0, 0.0));
    }
    let ct = OseenContext::unit(rho, t)?;
    let cs = OseenContext::unit(rho, s)?;
    let tm = t.max(s);
    let spec = QuadSpec::for_fields(tm, rho, gaussian_tail(1.0, tm));
    let g = lp_norm(
        |x| truncated_velocity_gradient(x, &ct) - truncated_velocity_gradient(x, &cs),
        2.0,
        &spec,
    )?;
    let w = lp_norm(
        |x| truncated_vorticity(x, &ct) - truncated_vorticity(x, &cs),
        2.0,
        &spec,
    )?;
    Ok((g.value * g.value, w.value * w.value))
}

/// Velocity-difference bound `‖u^χ(t) - u^χ(s)‖² ≤ (1/4π)|log((1+t)/(1+s))|`
/// together with the closed-form identity for the untruncated integrand.
pub fn verify_velocity_difference(t: f64, s: f64, rho: f64) -> Result<EstimateReport> {
    velocity_difference_report(&[(t, s)], &[rho])
}

fn time_pairs(times: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        for &s in &times[..i] {
            out.push((t, s));
        }
    }
    out
}

fn velocity_difference_report(pairs: &[(f64, f64)], rhos: &[f64]) -> Result<EstimateReport> {
    for &(t, s) in pairs {
        if !(t >= 0.0 && s >= 0.0) {
            return Err(invalid("t", "times must be non-negative"));
        }
    }
    let cells: Vec<(f64, f64, f64)> = rhos
        .iter()
        .flat_map(|&rho| pairs.iter().map(move |&(t, s)| (t, s, rho)))
        .collect();
    let lhs = cells
        .par_iter()
        .map(|&(t, s, rho)| velocity_difference_sq(t, s, rho))
        .collect::<Result<Vec<f64>>>()?;
    let rhs: Vec<f64> = cells
        .iter()
        .map(|&(t, s, _)| ((1.0 + t) / (1.0 + s)).ln().abs() / (4.0 * PI))
        .collect();
    let identity_err = pairs
        .par_iter()
        .map(|&(t, s)| {
            let (q, c) = velocity_difference_identity(t, s)?;
            Ok(rel_err(q, c))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut extras = BTreeMap::new();
    extras.insert("identity_max_rel_error".into(), identity_err);
    let mut params = BTreeMap::new();
    params.insert("t".into(), pairs.iter().map(|p| p.0).collect());
    params.insert("s".into(), pairs.iter().map(|p| p.1).collect());
    params.insert("rho".into(), rhos.to_vec());
    let constant = lhs
        .iter()
        .zip(&rhs)
        .map(|(&l, &r)| ratio(l, r) / (4.0 * PI))
        .fold(0.0, f64::max);
    Ok(EstimateReport::new(
        "velocity_difference",
        params,
        lhs,
        rhs,
        constant,
        extras,
        identity_err <= IDENTITY_TOLERANCE,
    ))
}

/// Gradient-difference bound: measures `κ₁` in
/// `‖∇u^χ(t) - ∇u^χ(s)‖² ≤ κ₁ |1/(1+t) - 1/(1+s)|`, the Gaussian identity
/// behind it, and the constant of the two-term refinement
/// `δ/8π + C ρ² δ^{3/2}`, `δ = |1/(1+t) - 1/(1+s)|`.
pub fn verify_gradient_difference(t: f64, s: f64, rho: f64) -> Result<EstimateReport> {
    gradient_difference_report(&[(t, s)], &[rho])
}

struct GradientCell {
    lhs: f64,
    delta: f64,
    vorticity_mismatch: f64,
}

fn gradient_cells(pairs: &[(f64, f64)], rhos: &[f64]) -> Result<Vec<GradientCell>> {
    let cells: Vec<(f64, f64, f64)> = rhos
        .iter()
        .flat_map(|&rho| pairs.iter().map(move |&(t, s)| (t, s, rho)))
        .collect();
    cells
        .par_iter()
        .map(|&(t, s, rho)| {
            let (g, w) = gradient_difference_sq(t, s, rho)?;
            Ok(GradientCell {
                lhs: g,
                delta: (1.0 / (1.0 + t) - 1.0 / (1.0 + s)).abs(),
                vorticity_mismatch: rel_err(g, w),
            })
        })
        .collect()
}

fn pair_params(pairs: &[(f64, f64)], rhos: &[f64]) -> BTreeMap<String, Vec<f64>> {
    let mut params = BTreeMap::new();
    params.insert("t".into(), pairs.iter().map(|p| p.0).collect());
    params.insert("s".into(), pairs.iter().map(|p| p.1).collect());
    params.insert("rho".into(), rhos.to_vec());
    params
}

fn gradient_difference_report(pairs: &[(f64, f64)], rhos: &[f64]) -> Result<EstimateReport> {
    let cells = gradient_cells(pairs, rhos)?;
    let ratios: Vec<f64> = cells.iter().map(|c| ratio(c.lhs, c.delta)).collect();
    let kappa1 = ratios.iter().copied().fold(0.0, f64::max);
    let per_rho = per_rho_max(&ratios, rhos.len());
    let spread = if per_rho.iter().all(|&v| v == 0.0) {
        0.0
    } else {
        rho_spread(&per_rho)
    };
    let identity_err = pairs
        .par_iter()
        .map(|&(t, s)| {
            let (q, c) = vorticity_difference_identity(t, s)?;
            Ok(if c == 0.0 { q.abs() } else { rel_err(q, c) })
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mismatch = cells.iter().map(|c| c.vorticity_mismatch).fold(0.0, f64::max);
    let mut extras = BTreeMap::new();
    insert_per_rho(&mut extras, "kappa1", rhos, &per_rho);
    extras.insert("rho_spread".into(), spread);
    extras.insert("identity_max_rel_error".into(), identity_err);
    extras.insert("gradient_vs_vorticity_rel_error".into(), mismatch);
    let lhs: Vec<f64> = cells.iter().map(|c| c.lhs).collect();
    let rhs: Vec<f64> = cells.iter().map(|c| kappa1 * c.delta).collect();
    let ok = identity_err <= IDENTITY_TOLERANCE
        && mismatch <= IDENTITY_TOLERANCE
        && (rhos.len() < 2 || spread <= KAPPA_RHO_TOLERANCE);
    Ok(EstimateReport::new(
        "gradient_difference",
        pair_params(pairs, rhos),
        lhs,
        rhs,
        kappa1,
        extras,
        ok,
    ))
}

/// Two-term refinement `lhs ≤ δ/8π + C ρ² δ^{3/2}` with `C` measured.
pub fn verify_gradient_difference_refined(pairs: &[(f64, f64)], rhos: &[f64]) -> Result<EstimateReport> {
    let cells = gradient_cells(pairs, rhos)?;
    let per = pairs.len();
    let mut c = 0.0f64;
    for (k, cell) in cells.iter().enumerate() {
        let rho = rhos[k / per];
        if cell.delta > 0.0 {
            let excess = (cell.lhs - cell.delta / (8.0 * PI)).max(0.0);
            c = c.max(excess / (rho * rho * cell.delta.powf(1.5)));
        }
    }
    let lhs: Vec<f64> = cells.iter().map(|c| c.lhs).collect();
    let rhs: Vec<f64> = cells
        .iter()
        .enumerate()
        .map(|(k, cell)| {
            let rho = rhos[k / per];
            cell.delta / (8.0 * PI) + c * rho * rho * cell.delta.powf(1.5)
        })
        .collect();
    // how much of the bound the leading 1/(8π) term carries at the smallest δ
    let mut extras = BTreeMap::new();
    extras.insert("leading_coefficient".into(), 1.0 / (8.0 * PI));
    Ok(EstimateReport::new(
        "gradient_difference_refined",
        pair_params(pairs, rhos),
        lhs,
        rhs,
        c,
        extras,
        true,
    ))
}

/// Curl of a Gaussian-bump streamfunction, used as an `H¹` test field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpCurl {
    pub center: Point2,
    pub width: f64,
}

impl BumpCurl {
    /// `u = ∇^⊥ψ = (-∂₂ψ, ∂₁ψ)`, `ψ = exp(-|x-c|²/2σ²)`.
    pub fn velocity(&self, x: Point2) -> Vec2 {
        let y = x - self.center;
        let s2 = self.width * self.width;
        let psi = (-y.norm_sq() / (2.0 * s2)).exp();
        Vec2::new(y.x2, -y.x1) * (psi / s2)
    }

    pub fn gradient(&self, x: Point2) -> Mat2 {
        let y = x - self.center;
        let s2 = self.width * self.width;
        let psi = (-y.norm_sq() / (2.0 * s2)).exp() / s2;
        Mat2::new(
            -psi * y.x1 * y.x2 / s2,
            psi * (1.0 - y.x2 * y.x2 / s2),
            -psi * (1.0 - y.x1 * y.x1 / s2),
            psi * y.x1 * y.x2 / s2,
        )
    }

    /// Seeded family centred at random points of `ρ ≤ |x| ≤ 2ρ`.
    pub fn family(rho: f64, count: usize, seed: u64) -> Vec<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let r = rho * (1.0 + rng.gen::<f64>());
                let theta = 2.0 * PI * rng.gen::<f64>();
                let width = rho * (0.15 + 0.6 * rng.gen::<f64>());
                Self {
                    center: Point2::polar(r, theta),
                    width,
                }
            })
            .collect()
    }
}

fn annulus_spec(rho: f64, n_theta: usize) -> Result<QuadSpec> {
    QuadSpec::annulus(rho, 2.0 * rho, 4)?.with_n_theta(n_theta)
}

/// `∫_D R^χ dx` as a vector.
pub fn remainder_mean(ctx: &OseenContext) -> Result<Vec2> {
    let spec = annulus_spec(ctx.rho, 64)?;
    let a = plane_integral(|x| remainder_field(x, ctx).x1, &spec)?.value;
    let b = plane_integral(|x| remainder_field(x, ctx).x2, &spec)?.value;
    Ok(Vec2::new(a, b))
}

/// `|∫ R^χ·u| (1+t) / (ρ ‖∇u‖_{L²(D)})` for one test field.
pub fn remainder_pairing_ratio(ctx: &OseenContext, u: &BumpCurl) -> Result<f64> {
    let spec = annulus_spec(ctx.rho, 256)?;
    let pairing = plane_integral(|x| remainder_field(x, ctx).dot(u.velocity(x)), &spec)?.value;
    let grad = lp_norm(|x| u.gradient(x), 2.0, &spec)?.value;
    if grad == 0.0 {
        return Err(Error::Degenerate("test field has zero gradient on D".into()));
    }
    Ok(pairing.abs() * (1.0 + ctx.t) / (ctx.rho * grad))
}

/// Remainder bounds at a single `(t, ρ, p)`: the scaled norm
/// `(1+t) ρ^{1-2/p} ‖R^χ‖_p`, zero mean on `D`, and the pairing bound for
/// the seeded test family. `κ₂` is the largest of these ratios.
pub fn verify_remainder_bounds(t: f64, rho: f64, p: f64) -> Result<EstimateReport> {
    let grid = SweepGrid {
        times: vec![t],
        rhos: vec![rho],
        exponents: vec![p],
        ..SweepGrid::default()
    };
    remainder_report(&grid)
}

/// `(1+t) ρ^{1-2/p} ‖R^χ(t)‖_p`.
pub fn scaled_remainder_norm(ctx: &OseenContext, p: f64) -> Result<f64> {
    let spec = annulus_spec(ctx.rho, 16)?;
    let n = lp_norm(|x| remainder_field(x, ctx), p, &spec)?;
    Ok(n.value * (1.0 + ctx.t) * ctx.rho.powf(1.0 - 2.0 * inv_p(p)))
}

/// `κ₂` over a whole sweep grid: remainder norms for every exponent and
/// pairing ratios for the seeded test family.
pub fn verify_remainder_sweep(grid: &SweepGrid) -> Result<EstimateReport> {
    remainder_report(grid)
}

fn remainder_report(grid: &SweepGrid) -> Result<EstimateReport> {
    for &p in &grid.exponents {
        if p.is_nan() || p < 1.0 {
            return Err(invalid("p", format!("exponent must lie in [1, ∞], got {p}")));
        }
    }
    let cells: Vec<(f64, f64)> = grid
        .rhos
        .iter()
        .flat_map(|&rho| grid.times.iter().map(move |&t| (rho, t)))
        .collect();
    struct Cell {
        norms: Vec<f64>,
        pairings: Vec<f64>,
        mean: f64,
    }
    let results = cells
        .par_iter()
        .enumerate()
        .map(|(k, &(rho, t))| {
            let ctx = OseenContext::unit(rho, t)?;
            let norms = grid
                .exponents
                .iter()
                .map(|&p| scaled_remainder_norm(&ctx, p))
                .collect::<Result<Vec<f64>>>()?;
            let family = BumpCurl::family(rho, grid.test_fields, grid.seed.wrapping_add(k as u64));
            let pairings = family
                .iter()
                .map(|u| remainder_pairing_ratio(&ctx, u))
                .collect::<Result<Vec<f64>>>()?;
            Ok(Cell {
                norms,
                pairings,
                mean: remainder_mean(&ctx)?.norm(),
            })
        })
        .collect::<Result<Vec<Cell>>>()?;

    let n_t = grid.times.len();
    let mut per_rho = Vec::new();
    for k in 0..grid.rhos.len() {
        let m = results[k * n_t..(k + 1) * n_t]
            .iter()
            .flat_map(|c| c.norms.iter().chain(&c.pairings))
            .copied()
            .fold(0.0, f64::max);
        per_rho.push(m);
    }
    let kappa2 = per_rho.iter().copied().fold(0.0, f64::max);
    let spread = rho_spread(&per_rho);
    let max_mean = results.iter().map(|c| c.mean).fold(0.0, f64::max);
    let pairing_max = results.iter().flat_map(|c| &c.pairings).copied().fold(0.0, f64::max);

    let mut lhs = Vec::new();
    for c in &results {
        lhs.extend(c.norms.iter().copied());
        lhs.extend(c.pairings.iter().copied());
    }
    let rhs = vec![kappa2; lhs.len()];
    let mut extras = BTreeMap::new();
    insert_per_rho(&mut extras, "kappa2", &grid.rhos, &per_rho);
    extras.insert("rho_spread".into(), spread);
    extras.insert("max_abs_mean_on_annulus".into(), max_mean);
    extras.insert("pairing_ratio_max".into(), pairing_max);
    extras.insert("test_fields_per_cell".into(), grid.test_fields as f64);
    extras.insert("seed".into(), grid.seed as f64);
    let mut params = grid.params();
    params.remove("s");
    let ok = max_mean <= 1e-8 && (grid.rhos.len() < 2 || spread <= KAPPA_RHO_TOLERANCE);
    Ok(EstimateReport::new("remainder", params, lhs, rhs, kappa2, extras, ok))
}

/// Largest pointwise residual of the nonlinear identity accepted by [`identity_suite`].
pub const POINTWISE_IDENTITY_TOLERANCE: f64 = 1e-10;

/// Exact identities behind the estimates: the closed-form velocity and
/// vorticity difference integrals on every `(t, s)` pair, unit mass of `Ξ`
/// and `ω^χ`, and the pointwise identity `(u^χ·∇)u^χ = -x|u^χ|²/|x|²`.
pub fn identity_suite(times: &[f64], rhos: &[f64]) -> Result<EstimateReport> {
    if times.is_empty() || rhos.is_empty() {
        return Err(invalid("times", "identity suite needs times and cutoff radii"));
    }
    let pairs: Vec<(f64, f64)> = times
        .iter()
        .flat_map(|&t| times.iter().map(move |&s| (t, s)))
        .filter(|(t, s)| t != s)
        .collect();
    let velocity = pairs
        .par_iter()
        .map(|&(t, s)| velocity_difference_identity(t, s).map(|(q, c)| rel_err(q, c)))
        .collect::<Result<Vec<f64>>>()?;
    let vorticity = pairs
        .par_iter()
        .map(|&(t, s)| vorticity_difference_identity(t, s).map(|(q, c)| rel_err(q, c)))
        .collect::<Result<Vec<f64>>>()?;
    let mut mass = Vec::new();
    for &t in times {
        let spec = QuadSpec::for_fields(t, 1.0, gaussian_tail(1.0, t));
        mass.push((plane_integral(|x| oseen_vorticity(x, t), &spec)?.value - 1.0).abs());
        for &rho in rhos {
            let ctx = OseenContext::unit(rho, t)?;
            let spec = QuadSpec::for_fields(t, rho, gaussian_tail(1.0, t));
            mass.push((plane_integral(|x| truncated_vorticity(x, &ctx), &spec)?.value - 1.0).abs());
        }
    }
    let mut pointwise: f64 = 0.0;
    for &t in times {
        for &rho in rhos {
            let ctx = OseenContext::unit(rho, t)?;
            for k in 1..=64 {
                let r = 0.25 * rho * k as f64;
                for j in 0..8 {
                    let x = Point2::polar(r, 0.3 + PI * j as f64 / 4.0);
                    pointwise = pointwise.max(nonlinear_identity_residual(x, &ctx)?);
                }
            }
        }
    }
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let lhs: Vec<f64> = velocity
        .iter()
        .chain(&vorticity)
        .chain(&mass)
        .copied()
        .chain([pointwise])
        .collect();
    let mut rhs = vec![IDENTITY_TOLERANCE; lhs.len() - 1];
    rhs.push(POINTWISE_IDENTITY_TOLERANCE);
    let mut params = BTreeMap::new();
    params.insert("t".into(), times.to_vec());
    params.insert("s".into(), times.to_vec());
    params.insert("rho".into(), rhos.to_vec());
    let mut extras = BTreeMap::new();
    extras.insert("velocity_identity_max_rel_error".into(), max(&velocity));
    extras.insert("vorticity_identity_max_rel_error".into(), max(&vorticity));
    extras.insert("unit_mass_max_error".into(), max(&mass));
    extras.insert("nonlinear_identity_max_residual".into(), pointwise);
    let worst = max(&lhs[..lhs.len() - 1]);
    Ok(EstimateReport::new("identities", params, lhs, rhs, worst, extras, true))
}

/// Every estimate of the truncated vortex over one sweep grid.
pub fn run_estimate_sweep(grid: &SweepGrid) -> Result<Vec<EstimateReport>> {
    let mut reports = verify_velocity_estimates(grid)?;
    reports.push(remainder_report(grid)?);
    Ok(reports)
}

/// Bounds on `u^χ` itself: `a_p`, `b_p`, the two time-difference estimates
/// and the refined gradient difference.
pub fn verify_velocity_estimates(grid: &SweepGrid) -> Result<Vec<EstimateReport>> {
    let mut reports = Vec::new();
    for &p in &grid.exponents {
        if p > 2.0 {
            reports.push(verify_a_p(p, grid)?);
        }
    }
    for &p in &grid.exponents {
        if p > 1.0 {
            reports.push(verify_b_p(p, grid)?);
        }
    }
    let pairs = time_pairs(&grid.times);
    let mut v = velocity_difference_report(&pairs, &grid.rhos)?;
    v.params.insert("p".into(), vec![2.0]);
    reports.push(v);
    reports.push(gradient_difference_report(&pairs, &grid.rhos)?);
    reports.push(verify_gradient_difference_refined(&pairs, &grid.rhos)?);
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantTable {
    pub a_inf: f64,
    /// Gagliardo-Nirenberg constant with `C*⁴ = 2/(3π)`.
    pub c_star: f64,
    pub c_star_variant: f64,
    pub c0: f64,
    pub eps_star: f64,
    pub c0_variant: f64,
    pub eps_star_variant: f64,
    pub labels: BTreeMap<String, String>,
}

/// `C₀ = ½ (2 a_∞ + C*²/√(2π))²`.
pub fn c0_from(a_inf: f64, c_star: f64) -> f64 {
    let inner = 2.0 * a_inf + c_star * c_star / (2.0 * PI).sqrt();
    0.5 * inner * inner
}

pub fn compute_constants() -> Result<ConstantTable> {
    let a_inf = compute_a_p(f64::INFINITY)?;
    let c_star = (2.0 / (3.0 * PI)).powf(0.25);
    let c_star_variant = GN_CONSTANT_VARIANT;
    let c0 = c0_from(a_inf, c_star);
    let c0_variant = c0_from(a_inf, c_star_variant);
    let mut labels = BTreeMap::new();
    labels.insert(
        "a_inf".into(),
        "sup norm of the Oseen velocity at t = 0, by quadrature".into(),
    );
    labels.insert("c_star".into(), "Gagliardo-Nirenberg bound with C*^4 = 2/(3 pi)".into());
    labels.insert(
        "c_star_variant".into(),
        "numerically optimal Gagliardo-Nirenberg constant 0.6430".into(),
    );
    labels.insert("c0".into(), "C0 = (2 a_inf + C*^2 / sqrt(2 pi))^2 / 2".into());
    labels.insert("eps_star".into(), "C0^(-1/2)".into());
    Ok(ConstantTable {
        a_inf,
        c_star,
        c_star_variant,
        c0,
        eps_star: 1.0 / c0.sqrt(),
        c0_variant,
        eps_star_variant: 1.0 / c0_variant.sqrt(),
        labels,
    })
}

/// Gagliardo-Nirenberg quotient `‖f‖₄ / (‖f‖₂^{1/2} ‖∇f‖₂^{1/2})`.
pub fn gagliardo_ratio<F, G>(f: F, grad: G, spec: &QuadSpec) -> Result<f64>
where
    F: Fn(Point2) -> f64 + Sync,
    G: Fn(Point2) -> Vec2 + Sync,
{
    let l4 = lp_norm(&f, 4.0, spec)?.value;
    let l2 = lp_norm(&f, 2.0, spec)?.value;
    let g2 = lp_norm(&grad, 2.0, spec)?.value;
    if l2 == 0.0 || g2 == 0.0 {
        return Err(Error::Degenerate(
            "Gagliardo-Nirenberg quotient of a zero function".into(),
        ));
    }
    Ok(l4 / (l2.sqrt() * g2.sqrt()))
}
