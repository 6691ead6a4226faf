//! Vorticity-streamfunction integrator for the perturbation `v` of the
//! truncated Oseen vortex outside the unit disk.
//!
//! The unknown is `w = curl v` on a stretched log-polar mesh. Each step
//! solves, per angular mode,
//!
//! `∂_t w + (αu^χ + v)·∇w + v·∇(αω^χ) = Δw + α curl R^χ`
//!
//! with Crank-Nicolson diffusion and Adams-Bashforth explicit terms, then
//! recovers `ψ` from `Δψ = -w` and `v = (ψ_θ/r, -ψ_r)`. No-slip is enforced
//! through the wall vorticity.

mod grid;
mod modal;
mod snapshot;
mod stepping;

use std::collections::BTreeMap;

pub use grid::{build_grid, GridSpec, PolarMesh, MIN_WALL_NODES, OBSTACLE_RADIUS};
pub use modal::{boundary_vorticity, poisson_streamfunction, wall_slip, FarField, ModalOps};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};
pub use stepping::{
    geometric_times, Diagnostics, Solver, SolverConfig, SolverMode, SolverState, WallClosure, BLOW_UP_NORM,
    SPONGE_ALARM,
};

use crate::error::{invalid, Error, Result};
use crate::estimates::EstimateReport;
use crate::fields::TruncatedProfile;
use crate::geometry::Point2;

/// `sup_λ λ^{1/2} e^{-λ} = (2e)^{-1/2}`: the bound on `t^{1/2}‖∇S(t)v0‖/‖v0‖` for a
/// self-adjoint nonnegative generator.
pub const SPECTRAL_GRADIENT_BOUND: f64 = 0.428_881_942_480_353_4;

/// Bound on `t^{1/2}‖∇S(t)v0‖/‖v0‖` required of the discrete semigroup.
pub const STOKES_GRADIENT_LIMIT: f64 = 0.5;

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub diagnostics: Vec<Diagnostics>,
    pub final_state: SolverState,
}

impl RunOutput {
    pub fn snapshot(&self, mesh: &PolarMesh) -> Snapshot {
        Snapshot {
            spec: mesh.spec,
            radii: mesh.r.clone(),
            values: self.final_state.w.clone(),
        }
    }
}

/// Integrates from the vorticity `w0` and reports diagnostics at `t = 0`
/// and at each of `output_times`.
pub fn run(mesh: PolarMesh, cfg: SolverConfig, w0: &[f64], output_times: &[f64]) -> Result<RunOutput> {
    let total = mesh.integrate(w0);
    let scale = mesh.integrate(&w0.iter().map(|v| v.abs()).collect::<Vec<_>>());
    if total.abs() > 1e-6 * scale.max(f64::MIN_POSITIVE) && total.abs() > 1e-12 {
        return Err(Error::NonzeroMean { mean: total });
    }
    let solver = Solver::new(mesh, cfg)?;
    let mut st = solver.initial_state(w0)?;
    let diagnostics = solver.run_from(&mut st, output_times)?;
    Ok(RunOutput {
        diagnostics,
        final_state: st,
    })
}

/// Smooth bump `exp(1 - 1/(1 - ρ²))` on the unit disk.
fn bump(rho: f64) -> f64 {
    if rho >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - rho * rho)).exp()
    }
}

/// Streamfunction of a compact dipole: `A (x₂ - c₂) bump(|x - c|/a)`.
/// Its velocity has zero circulation and vanishes outside the disk `|x - c| < a`.
pub fn dipole_streamfunction(amplitude: f64, center: Point2, radius: f64) -> impl Fn(Point2) -> f64 {
    move |x: Point2| {
        let d = x - center;
        amplitude * d.x2 * bump(d.norm() / radius)
    }
}

/// Streamfunction `f(r) sin θ` whose velocity decays like `|x|^{-1.9}` between
/// `r ≈ 3` and `taper`, then is smoothly cut off; `f` vanishes with its
/// derivative near the wall.
pub fn slow_tail_streamfunction(amplitude: f64, taper: f64) -> impl Fn(Point2) -> f64 {
    let step = |x: f64| -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            let f = |y: f64| (-1.0 / y).exp();
            f(x) / (f(x) + f(1.0 - x))
        }
    };
    move |x: Point2| {
        let r = x.norm();
        let rise = step((r - 1.5) / 1.5);
        if rise == 0.0 {
            return 0.0;
        }
        let fall = 1.0 - step((r - taper) / (0.5 * taper));
        amplitude * rise * fall * r.powf(-0.9) * x.x2 / r
    }
}

/// `‖v(t) + α(u^χ(t) - u^χ(t+τ))‖_{L²}`: the perturbation measured against
/// the truncated vortex shifted forward in time by `τ`.
pub fn shifted_perturbation_l2(solver: &Solver, st: &SolverState, tau: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(invalid("tau", "time shift must be non-negative"));
    }
    let alpha = solver.cfg.alpha;
    let now = TruncatedProfile::new(solver.cfg.rho, st.t)?;
    let later = TruncatedProfile::new(solver.cfg.rho, st.t + tau)?;
    let mesh = solver.mesh();
    let nt = mesh.n_theta();
    let speed: Vec<f64> = (0..mesh.len())
        .map(|k| {
            let r = mesh.r[k / nt];
            let shift = alpha * (now.azimuthal_velocity(r) - later.azimuthal_velocity(r));
            st.v_r[k].hypot(st.v_theta[k] + shift)
        })
        .collect();
    Ok(mesh.lp_norm(&speed, 2.0))
}

/// Streamfunction `(r-1)² e^{-(r-3)²} (1/2 + cos 2θ)` and its vorticity `-Δψ`.
fn manufactured(x: Point2) -> (f64, f64) {
    let r = x.norm();
    let th = x.x2.atan2(x.x1);
    let (a, b) = (r - 1.0, r - 3.0);
    let e = (-b * b).exp();
    let g0 = a * a * e;
    let g1 = e * (2.0 * a - 2.0 * a * a * b);
    let g2 = e * (4.0 * a * a * b * b - 8.0 * a * b + 2.0 - 2.0 * a * a);
    let ang = 0.5 + (2.0 * th).cos();
    let lap = (g2 + g1 / r) * ang - g0 * 4.0 * (2.0 * th).cos() / (r * r);
    (g0 * ang, -lap)
}

/// Max error of [`poisson_streamfunction`] against a smooth manufactured
/// solution, relative to the max of the exact streamfunction.
pub fn manufactured_poisson_error(spec: GridSpec) -> Result<f64> {
    let mesh = build_grid(spec)?;
    let ops = ModalOps::new(mesh);
    let w = ops.mesh.sample(|x| manufactured(x).1);
    let exact = ops.mesh.sample(|x| manufactured(x).0);
    let psi = poisson_streamfunction(&ops, &w)?;
    let err = psi.iter().zip(&exact).fold(0.0f64, |e, (a, b)| e.max((a - b).abs()));
    let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(err / scale)
}

/// Measures the Stokes semigroup on the mesh: `S(t)v0` is the stokes-linear
/// run from `w0`.
///
/// For `q = 2` it checks that `‖S(t)v0‖` never increases and that
/// `t^{1/2}‖∇S(t)v0‖ <= 0.5 ‖v0‖`. For `q < 2` it reports
/// `t^{1/q-1/2}‖S(t)v0‖/‖v0‖_q` and `t^{1/q}‖∇S(t)v0‖/‖v0‖_q`; when a
/// reference curve for `‖S(t)v0‖` is supplied (one value per time) the
/// measured curve must stay below twice of it, otherwise it is only held to
/// the contraction bound `‖v0‖`. Both ratio extremes are reported.
pub fn stokes_semigroup_check(
    mesh: PolarMesh,
    dt: f64,
    w0: &[f64],
    q: f64,
    times: &[f64],
    reference: Option<&[f64]>,
) -> Result<EstimateReport> {
    if !(q > 1.0 && q <= 2.0) {
        return Err(invalid("q", format!("{q} is outside (1, 2]")));
    }
    if let Some(r) = reference {
        if r.len() != times.len() {
            return Err(invalid("reference", "needs one value per sampled time"));
        }
    }
    let t_final = times.iter().copied().fold(0.0, f64::max);
    let cfg = SolverConfig::new(0.0, 2.0, dt, t_final, SolverMode::StokesLinear);
    let solver = Solver::new(mesh, cfg)?;
    let mut st = solver.initial_state(w0)?;
    let speed: Vec<f64> = st
        .v_r
        .iter()
        .zip(&st.v_theta)
        .map(|(a, b)| (a * a + b * b).sqrt())
        .collect();
    let v0_l2 = solver.mesh().lp_norm(&speed, 2.0);
    let v0_lq = solver.mesh().lp_norm(&speed, q);
    if !(v0_l2 > 0.0) {
        return Err(Error::Degenerate("initial velocity vanishes".into()));
    }
    let diags = solver.run_from(&mut st, times)?;
    let series = &diags[1..];
    let mut params = BTreeMap::new();
    params.insert("t".to_string(), times.to_vec());
    params.insert("q".to_string(), vec![q]);
    let mut extras = BTreeMap::new();
    extras.insert("v0_l2".to_string(), v0_l2);
    extras.insert("v0_lq".to_string(), v0_lq);
    let max_slip = diags
        .iter()
        .map(|d| d.wall_slip / d.max_speed.max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    extras.insert("max_relative_wall_slip".to_string(), max_slip);

    let mu = 1.0 / q - 0.5;
    if q == 2.0 {
        let grad: Vec<f64> = series.iter().map(|d| d.t.sqrt() * d.h1_v / v0_l2).collect();
        let monotone = diags.windows(2).all(|w| w[1].l2_v <= w[0].l2_v * (1.0 + 1e-12));
        let max_grad = grad.iter().copied().fold(0.0, f64::max);
        extras.insert("spectral_bound".to_string(), SPECTRAL_GRADIENT_BOUND);
        extras.insert("monotone".to_string(), if monotone { 1.0 } else { 0.0 });
        extras.insert("max_scaled_gradient".to_string(), max_grad);
        extras.insert("admissible_constant".to_string(), 2.0);
        let rhs = vec![STOKES_GRADIENT_LIMIT; grad.len()];
        Ok(EstimateReport::new(
            "stokes_semigroup[q=2]",
            params,
            grad,
            rhs,
            max_grad,
            extras,
            monotone,
        ))
    } else {
        let scaled: Vec<f64> = series.iter().map(|d| d.t.powf(mu) * d.l2_v / v0_lq).collect();
        let scaled_grad: Vec<f64> = series.iter().map(|d| d.t.powf(1.0 / q) * d.h1_v / v0_lq).collect();
        let constant = scaled.iter().chain(&scaled_grad).copied().fold(0.0, f64::max);
        let spread = {
            let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = scaled.iter().copied().fold(0.0, f64::max);
            hi / lo
        };
        extras.insert("scaled_norm_spread".to_string(), spread);
        extras.insert(
            "max_scaled_gradient".to_string(),
            scaled_grad.iter().copied().fold(0.0, f64::max),
        );
        let lhs: Vec<f64> = series.iter().map(|d| d.l2_v).collect();
        let rhs = match reference {
            Some(r) => {
                let ratios: Vec<f64> = lhs.iter().zip(r).map(|(a, b)| a / b).collect();
                let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
                let max = ratios.iter().copied().fold(0.0, f64::max);
                extras.insert("reference_ratio_min".to_string(), min);
                extras.insert("reference_ratio_max".to_string(), max);
                r.iter().map(|v| 2.0 * v).collect()
            }
            None => vec![v0_l2; lhs.len()],
        };
        let id = format!("stokes_semigroup[q={q}]");
        Ok(EstimateReport::new(
            &id,
            params,
            lhs,
            rhs,
            constant,
            extras,
            constant.is_finite(),
        ))
    }
}
