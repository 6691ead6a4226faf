//! Execution of each scenario kind.

use oseen_core::biot_savart::{bs_velocity, decompose_initial_data, DecomposeOptions, VorticitySample};
use oseen_core::estimates::{
    compute_b_p, compute_constants, identity_suite, verify_remainder_sweep, verify_velocity_estimates, EstimateReport,
    SweepGrid,
};
use oseen_core::fields::{oseen_velocity, oseen_vorticity};
use oseen_core::quadrature::{QuadSpec, TailPolicy};
use oseen_core::solver::{
    build_grid, dipole_streamfunction, geometric_times, shifted_perturbation_l2, slow_tail_streamfunction,
    stokes_semigroup_check, Diagnostics, PolarMesh, Snapshot, Solver, SolverConfig, SolverMode, SolverState,
};
use oseen_core::spectral::{dipole_family, heat_semigroup_l2, lemma51_sweep, PeriodicField};
use oseen_core::Point2;
use serde_json::{json, Value};

use crate::config::{
    DecomposeParams, InitialData, Lemma21Params, Lemma51Params, Scenario, ScenarioSpec, SimulateParams, StokesParams,
    SweepParams,
};
use crate::error::Result;
use crate::fit::{default_window, fit_decay_exponent, fit_log_growth};
use crate::report::Series;

/// Smallest `ε*` admitted by the constants scenario.
pub const EPS_STAR_FLOOR: f64 = 4.956;
/// Accepted error of the recovered circulation in `decompose`.
pub const ALPHA_TOLERANCE: f64 = 1e-4;
/// Accepted relative error of `BS(Ξ) = Θ₀` in `decompose`.
pub const ROUND_TRIP_TOLERANCE: f64 = 1e-3;
/// Slack on the Gronwall envelopes, for rounding in the accumulated integrals.
pub const ENVELOPE_SLACK: f64 = 1e-9;

/// Everything a scenario produced, before it is written out.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub pass: bool,
    pub error: Option<String>,
    pub values: Value,
    pub series: Vec<(String, Series)>,
    pub snapshot: Option<Snapshot>,
    pub grid: Value,
    pub quadspec: Value,
}

impl Outcome {
    fn new(pass: bool, values: Value) -> Self {
        Self {
            pass,
            error: None,
            values,
            series: Vec::new(),
            snapshot: None,
            grid: Value::Null,
            quadspec: Value::Null,
        }
    }

    pub fn failed(err: impl ToString) -> Self {
        Self {
            error: Some(err.to_string()),
            ..Self::new(false, Value::Null)
        }
    }
}

pub fn execute(s: &Scenario) -> Outcome {
    let res = match &s.spec {
        ScenarioSpec::Lemma21(p) => lemma21(p, s.seed),
        ScenarioSpec::Lemma22(p) => lemma22(p, s.seed),
        ScenarioSpec::Constants => constants(),
        ScenarioSpec::Decompose(p) => decompose(p),
        ScenarioSpec::Simulate(p) => simulate(p),
        ScenarioSpec::StokesCheck(p) => stokes_check(p),
        ScenarioSpec::Lemma51(p) => lemma51(p, s.seed),
    };
    res.unwrap_or_else(Outcome::failed)
}

/// Whole-plane rule used by the field estimates, shown at `t = 0`, `ρ = 2`;
/// the outer radius grows as `max(64, 16 sqrt(1+t), 8ρ)`.
fn reference_quadspec() -> Value {
    json!({
        "rule": "for_fields",
        "reference": QuadSpec::for_fields(0.0, 2.0, TailPolicy::Extrapolate),
    })
}

fn reports_json(reports: &[EstimateReport]) -> Value {
    Value::Array(reports.iter().map(|r| json!(r)).collect())
}

/// File-name form of an estimate id: `velocity_lp[p=4.0000]` becomes `velocity_lp_p4_0000`.
fn series_name(id: &str) -> String {
    id.replace("[", "_").replace(['=', ']'], "").replace('.', "_")
}

fn estimate_series(reports: &[EstimateReport]) -> Vec<(String, Series)> {
    reports
        .iter()
        .map(|r| {
            let mut s = Series::new(&["index", "lhs", "rhs"]);
            for (k, (l, h)) in r.lhs.iter().zip(&r.rhs).enumerate() {
                s.push(vec![k as f64, *l, *h]);
            }
            (series_name(&r.estimate_id), s)
        })
        .collect()
}

fn lemma21(p: &Lemma21Params, seed: u64) -> Result<Outcome> {
    let grid = p.sweep().grid(seed);
    let mut reports = verify_velocity_estimates(&grid)?;
    reports.push(identity_suite(&p.identity_times, &p.rhos)?);
    let pass = reports.iter().all(|r| r.pass);
    let mut out = Outcome::new(pass, json!({ "reports": reports_json(&reports) }));
    out.series = estimate_series(&reports);
    out.grid = json!(grid);
    out.quadspec = reference_quadspec();
    Ok(out)
}

fn lemma22(p: &SweepParams, seed: u64) -> Result<Outcome> {
    let grid = p.grid(seed);
    let report = verify_remainder_sweep(&grid)?;
    let reports = vec![report];
    let mut out = Outcome::new(reports[0].pass, json!({ "reports": reports_json(&reports) }));
    out.series = estimate_series(&reports);
    out.grid = json!(grid);
    out.quadspec = reference_quadspec();
    Ok(out)
}

fn constants() -> Result<Outcome> {
    let table = compute_constants()?;
    let pass = table.eps_star >= EPS_STAR_FLOOR;
    let mut out = Outcome::new(
        pass,
        json!({
            "table": table,
            "eps_star_floor": EPS_STAR_FLOOR,
        }),
    );
    out.quadspec = reference_quadspec();
    Ok(out)
}

/// `A ∂₁ exp(-|x - c|²/a²)`, which integrates to zero.
fn gaussian_dx(x: Point2, c: Point2, a: f64, amplitude: f64) -> f64 {
    let y = x - c;
    amplitude * (-2.0 * y.x1 / (a * a)) * (-y.norm_sq() / (a * a)).exp()
}

fn decompose(p: &DecomposeParams) -> Result<Outcome> {
    let c = Point2::new(p.dipole_center[0], p.dipole_center[1]);
    let w0 = VorticitySample::from_fn(
        |x| p.alpha * oseen_vorticity(x, 0.0) + gaussian_dx(x, c, p.dipole_width, p.dipole_amplitude),
        p.half_width,
        p.h,
        None,
    )?;
    let opts = DecomposeOptions {
        q_values: p.q_values.clone(),
        ..DecomposeOptions::default()
    };
    let d = decompose_initial_data(&w0, p.rho, &opts)?;

    let xi = VorticitySample::from_fn(|x| oseen_vorticity(x, 0.0), p.half_width, p.h, None)?;
    let n = p.round_trip_points.max(1);
    let round_trip = (0..n)
        .map(|k| {
            let r = 0.3 + 5.7 * (k as f64 / (n.max(2) - 1) as f64);
            let x = Point2::polar(r, 0.37 * k as f64);
            let exact = oseen_velocity(x, 0.0);
            (bs_velocity(&xi, x) - exact).norm() / exact.norm()
        })
        .fold(0.0f64, f64::max);

    let alpha_ok = (d.alpha - p.alpha).abs() <= ALPHA_TOLERANCE * p.alpha.abs().max(1.0);
    let norms_ok = d.q_norms.iter().all(|(_, n)| n.value.is_finite()) && d.l2_norm.value.is_finite();
    let pass = alpha_ok && norms_ok && round_trip <= ROUND_TRIP_TOLERANCE;
    let q_norms: Vec<Value> = d
        .q_norms
        .iter()
        .map(|(q, n)| json!({"q": q, "value": n.value, "tail_bound": n.tail_bound}))
        .collect();
    let mut out = Outcome::new(
        pass,
        json!({
            "alpha": d.alpha,
            "alpha_expected": p.alpha,
            "alpha_ok": alpha_ok,
            "q_norms": q_norms,
            "l2_norm": d.l2_norm.value,
            "residual_integral": d.residual_integral,
            "mean_correction": d.mean_correction,
            "dipole_moment": [d.dipole_moment.x1, d.dipole_moment.x2],
            "round_trip_max_rel_error": round_trip,
            "round_trip_points": n,
        }),
    );
    out.grid = json!({"half_width": p.half_width, "h": p.h, "cells_per_side": w0.nx});
    out.quadspec = json!(opts);
    Ok(out)
}

/// Streamfunction of the initial perturbation, sampled on the mesh.
fn initial_streamfunction(mesh: &PolarMesh, init: &InitialData) -> Vec<f64> {
    match *init {
        InitialData::Zero => vec![0.0; mesh.len()],
        InitialData::Dipole {
            amplitude,
            center,
            radius,
            ..
        } => mesh.sample(dipole_streamfunction(
            amplitude,
            Point2::new(center[0], center[1]),
            radius,
        )),
        InitialData::SlowTail { amplitude, taper } => mesh.sample(slow_tail_streamfunction(amplitude, taper)),
    }
}

/// Initial state, rescaled to the requested `‖v₀‖` when one is given.
fn initial_state(solver: &Solver, init: &InitialData) -> Result<SolverState> {
    let psi = initial_streamfunction(solver.mesh(), init);
    let st = solver.state_from_streamfunction(&psi)?;
    if let InitialData::Dipole {
        target_l2: Some(target),
        ..
    } = *init
    {
        let l2 = solver.diagnostics(&st).l2_v;
        if l2 > 0.0 {
            let scaled: Vec<f64> = psi.iter().map(|v| v * target / l2).collect();
            return Ok(solver.state_from_streamfunction(&scaled)?);
        }
    }
    Ok(st)
}

fn diagnostics_series(diags: &[Diagnostics]) -> Series {
    let mut s = Series::new(&Diagnostics::HEADER);
    for d in diags {
        s.push(d.values().to_vec());
    }
    s
}

/// `b_∞` and `κ₂` measured on the default sweep restricted to one `ρ`.
fn measured_envelope_constants(rho: f64, seed: u64) -> Result<(f64, f64)> {
    let grid = SweepGrid {
        rhos: vec![rho],
        seed,
        ..SweepGrid::default()
    };
    let b_inf = compute_b_p(f64::INFINITY, &grid)?.b_p;
    let kappa2 = verify_remainder_sweep(&grid)?.constant_measured;
    Ok((b_inf, kappa2))
}

/// Smallest `envelope / lhs` over all output pairs `t₀ < t` of
/// `‖v(t)‖² + ∫_{t₀}^t ‖∇v‖² ≤ ((1+t)/(1+t₀))^{2b|α|} (‖v(t₀)‖² + κ₂²ρ²α²/(1+t₀))`.
pub fn gronwall_margin(diags: &[Diagnostics], alpha: f64, rho: f64, b_inf: f64, kappa2: f64) -> f64 {
    let mut margin = f64::INFINITY;
    for (i, d0) in diags.iter().enumerate() {
        for d in &diags[i + 1..] {
            let lhs = d.l2_v.powi(2) + (d.energy_dissipation_integral - d0.energy_dissipation_integral);
            let growth = ((1.0 + d.t) / (1.0 + d0.t)).powf(2.0 * b_inf * alpha.abs());
            let rhs = growth * (d0.l2_v.powi(2) + (kappa2 * rho * alpha).powi(2) / (1.0 + d0.t));
            if lhs > 0.0 {
                margin = margin.min(rhs / lhs);
            }
        }
    }
    margin
}

fn simulate(p: &SimulateParams) -> Result<Outcome> {
    let spec = p.grid.spec(p.rho, p.t_final);
    let mesh = build_grid(spec)?;
    let mut cfg = SolverConfig::new(p.alpha, p.rho, p.dt, p.t_final, p.mode);
    cfg.closure = p.closure;
    let solver = Solver::new(mesh, cfg)?;
    let mut st = initial_state(&solver, &p.initial)?;
    let times = geometric_times(p.first_output, p.t_final, p.outputs);
    let with_envelope = p.gronwall && p.mode == SolverMode::Full && p.alpha != 0.0;
    let (b_inf, kappa2) = if with_envelope {
        match (p.b_inf, p.kappa2) {
            (Some(b), Some(k)) => (b, k),
            (b, k) => {
                let (mb, mk) = measured_envelope_constants(p.rho, crate::config::DEFAULT_SEED)?;
                (b.unwrap_or(mb), k.unwrap_or(mk))
            }
        }
    } else {
        (f64::NAN, f64::NAN)
    };

    // time-shifted perturbation: τ = N t - 1 with N = max(1, 2b|α|/log 2)
    let n_shift = (2.0 * b_inf * p.alpha.abs() / 2f64.ln()).max(1.0);
    let initial = st.clone();
    let mut shifted = Vec::new();
    let mut diags = vec![solver.diagnostics(&st)];
    let mut error = None;
    for &t in &times {
        match solver.run_from(&mut st, &[t]) {
            Ok(d) => diags.push(*d.last().expect("run_from reports the requested time")),
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        }
        if with_envelope && t >= 1.0 {
            let tau = n_shift * t - 1.0;
            let now = shifted_perturbation_l2(&solver, &st, tau)?;
            let start = shifted_perturbation_l2(&solver, &initial, tau)?;
            let growth = ((1.0 + t + tau) / (1.0 + tau)).powf(2.0 * b_inf * p.alpha.abs());
            let envelope = growth * (start * start + (kappa2 * p.rho * p.alpha).powi(2) / (1.0 + tau));
            shifted.push((t, tau, now * now, envelope));
        }
    }

    let mut checks = serde_json::Map::new();
    let mut pass = error.is_none();

    let slip = diags
        .iter()
        .filter(|d| d.max_speed > 0.0)
        .map(|d| d.wall_slip / d.max_speed)
        .fold(0.0, f64::max);
    let slip_ok = slip <= p.slip_tolerance;
    pass &= slip_ok;
    checks.insert(
        "max_relative_wall_slip".into(),
        json!({"value": slip, "limit": p.slip_tolerance, "pass": slip_ok}),
    );

    let last = diags.last().expect("initial diagnostics are always present");
    let sponge_ok = !diags.iter().any(|d| d.sponge_alarm);
    pass &= sponge_ok;
    checks.insert("sponge".into(), json!({"loss": last.sponge_loss, "pass": sponge_ok}));

    let window = p.fit_window.unwrap_or_else(|| default_window(p.t_final));
    let l2: Vec<(f64, f64)> = diags.iter().map(|d| (d.t, d.l2_v)).collect();
    let h1: Vec<(f64, f64)> = diags.iter().map(|d| (d.t, d.h1_v)).collect();
    let wants_decay = p.max_decay_exponent.is_some() || p.max_gradient_exponent.is_some() || p.min_r_squared.is_some();
    match (fit_decay_exponent(&l2, window), fit_decay_exponent(&h1, window)) {
        (Ok(mut fv), Ok(fg)) => {
            fv.predicted_mu = p.q.map(|q| 1.0 / q - 0.5);
            let mut ok = true;
            if let Some(m) = p.max_decay_exponent {
                ok &= fv.exponent <= m;
            }
            if let Some(m) = p.max_gradient_exponent {
                ok &= fg.exponent <= m;
            }
            if let Some(m) = p.min_r_squared {
                ok &= fv.r_squared >= m;
            }
            if wants_decay {
                pass &= ok;
            }
            checks.insert(
                "decay".into(),
                json!({
                    "l2": fv,
                    "gradient": fg,
                    "max_decay_exponent": p.max_decay_exponent,
                    "max_gradient_exponent": p.max_gradient_exponent,
                    "min_r_squared": p.min_r_squared,
                    "pass": ok,
                }),
            );
        }
        (a, b) => {
            let msg = a.err().or(b.err()).map(|e| e.to_string());
            if wants_decay {
                pass = false;
            }
            checks.insert("decay".into(), json!({"error": msg, "pass": false}));
        }
    }

    if let Some(tol) = p.energy_tolerance {
        let e0 = 0.5 * diags[0].l2_v.powi(2);
        let worst = diags
            .iter()
            .map(|d| (0.5 * d.l2_v.powi(2) + d.energy_dissipation_integral - e0).abs())
            .fold(0.0, f64::max);
        let rel = if e0 > 0.0 { worst / e0 } else { worst };
        let ok = rel <= tol;
        pass &= ok;
        checks.insert(
            "energy".into(),
            json!({"max_relative_defect": rel, "limit": tol, "pass": ok}),
        );
    }

    if p.log_growth {
        let series: Vec<(f64, f64)> = diags.iter().map(|d| (d.t, d.log_energy_functional)).collect();
        match fit_log_growth(&series) {
            Ok(f) => {
                pass &= f.pass;
                checks.insert("log_growth".into(), json!(f));
            }
            Err(e) => {
                pass = false;
                checks.insert("log_growth".into(), json!({"error": e.to_string(), "pass": false}));
            }
        }
    }

    let mut out_series = vec![("series".to_string(), diagnostics_series(&diags))];
    if with_envelope {
        let margin = gronwall_margin(&diags, p.alpha, p.rho, b_inf, kappa2);
        let shift_margin = shifted
            .iter()
            .filter(|s| s.2 > 0.0)
            .map(|s| s.3 / s.2)
            .fold(f64::INFINITY, f64::min);
        let ok = margin >= 1.0 - ENVELOPE_SLACK && shift_margin >= 1.0 - ENVELOPE_SLACK;
        pass &= ok;
        checks.insert(
            "gronwall".into(),
            json!({
                "b_inf": b_inf,
                "kappa2": kappa2,
                "min_envelope_ratio": margin,
                "shift_factor_n": n_shift,
                "min_shifted_envelope_ratio": shift_margin,
                "pass": ok,
            }),
        );
        let mut s = Series::new(&["t", "tau", "shifted_l2_sq", "shifted_envelope"]);
        for &(t, tau, a, b) in &shifted {
            s.push(vec![t, tau, a, b]);
        }
        out_series.push(("time_shift".to_string(), s));
    }

    let mut out = Outcome::new(
        pass,
        json!({
            "alpha": p.alpha,
            "rho": p.rho,
            "mode": p.mode,
            "t_reached": last.t,
            "steps": last.step_index,
            "initial_l2": diags[0].l2_v,
            "final_l2": last.l2_v,
            "final_h1": last.h1_v,
            "checks": checks,
        }),
    );
    out.error = error;
    out.series = out_series;
    out.snapshot = Some(Snapshot {
        spec,
        radii: solver.mesh().r.clone(),
        values: st.w.clone(),
    });
    out.grid = json!({"mesh": spec, "solver": solver.cfg});
    Ok(out)
}

fn stokes_check(p: &StokesParams) -> Result<Outcome> {
    let t_max = p.times.iter().copied().fold(0.0, f64::max);
    let spec = p.grid.spec(2.0, t_max);
    let init = p.initial.clone().unwrap_or(if p.q < 2.0 {
        InitialData::SlowTail {
            amplitude: 1.0,
            taper: 40.0,
        }
    } else {
        InitialData::default()
    });
    let mesh = build_grid(spec)?;
    let probe = Solver::new(
        mesh.clone(),
        SolverConfig::new(0.0, 2.0, p.dt, t_max, SolverMode::StokesLinear),
    )?;
    let w0 = initial_state(&probe, &init)?.w;

    let reference = if p.q < 2.0 && p.reference.enabled {
        let psi = move |x: Point2| match init {
            InitialData::Zero => 0.0,
            InitialData::Dipole {
                amplitude,
                center,
                radius,
                ..
            } => dipole_streamfunction(amplitude, Point2::new(center[0], center[1]), radius)(x),
            InitialData::SlowTail { amplitude, taper } => slow_tail_streamfunction(amplitude, taper)(x),
        };
        let v = PeriodicField::velocity_from_streamfunction(p.reference.box_size, p.reference.n, psi)?;
        Some(heat_semigroup_l2(&v, &p.times))
    } else {
        None
    };
    let report = stokes_semigroup_check(mesh, p.dt, &w0, p.q, &p.times, reference.as_deref())?;

    let mut s = if reference.is_some() {
        Series::new(&["t", "lhs", "rhs", "reference"])
    } else {
        Series::new(&["t", "lhs", "rhs"])
    };
    for (k, &t) in p.times.iter().enumerate() {
        let mut row = vec![t, report.lhs[k], report.rhs[k]];
        if let Some(r) = &reference {
            row.push(r[k]);
        }
        s.push(row);
    }
    let mut out = Outcome::new(report.pass, json!({ "report": report }));
    out.series = vec![("series".to_string(), s)];
    out.grid = json!({
        "mesh": spec,
        "dt": p.dt,
        "reference": if p.q < 2.0 { json!(p.reference) } else { Value::Null },
    });
    Ok(out)
}

fn lemma51(p: &Lemma51Params, seed: u64) -> Result<Outcome> {
    let family = dipole_family(p.support, p.family_size, p.n, seed)?;
    let mut reports = Vec::new();
    let mut pass = true;
    for &q in &p.q_values {
        let r = lemma51_sweep(&family, q)?;
        pass &= r.pass && r.extras["max_dilation_deviation"] <= p.dilation_tolerance;
        reports.push(r);
    }
    let mut out = Outcome::new(
        pass,
        json!({
            "reports": reports_json(&reports),
            "dilation_tolerance": p.dilation_tolerance,
        }),
    );
    out.grid = json!({
        "box_size": oseen_core::spectral::BOX_FACTOR * p.support,
        "n": p.n,
        "family_size": p.family_size,
        "scales": oseen_core::spectral::SWEEP_SCALES,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(t: f64, l2: f64, diss: f64) -> Diagnostics {
        Diagnostics {
            t,
            l2_v: l2,
            h1_v: 0.0,
            lp_v: 0.0,
            energy_dissipation_integral: diss,
            log_energy_functional: l2 * l2 + diss,
            sponge_loss: 0.0,
            sponge_alarm: false,
            wall_slip: 0.0,
            max_speed: 0.0,
            total_vorticity: 0.0,
            step_index: 0,
        }
    }

    #[test]
    fn envelope_holds_for_pure_decay() {
        let d = vec![diag(0.0, 1.0, 0.0), diag(1.0, 0.8, 0.2), diag(4.0, 0.5, 0.5)];
        assert!(gronwall_margin(&d, 0.0, 2.0, 0.1, 0.5) >= 1.0);
    }

    #[test]
    fn envelope_detects_growth_beyond_the_bound() {
        let d = vec![diag(0.0, 1.0, 0.0), diag(1.0, 3.0, 0.0)];
        let m = gronwall_margin(&d, 0.5, 2.0, 0.1, 0.1);
        assert!(m < 1.0);
        let growth = 2f64.powf(0.1);
        assert!((m - growth * (1.0 + 0.01) / 9.0).abs() < 1e-12);
    }

    #[test]
    fn series_names_are_file_safe() {
        assert_eq!(series_name("velocity_lp[p=4.0000]"), "velocity_lp_p4_0000");
        assert_eq!(series_name("fractional_primitive[q=1.5]"), "fractional_primitive_q1_5");
        assert_eq!(series_name("remainder"), "remainder");
    }

    #[test]
    fn gaussian_derivative_has_zero_mass() {
        let c = Point2::new(0.3, 0.1);
        let h = 0.05;
        let mut s = 0.0;
        for j in 0..400 {
            for i in 0..400 {
                let x = Point2::new(-10.0 + (i as f64 + 0.5) * h, -10.0 + (j as f64 + 0.5) * h);
                s += gaussian_dx(x, c, 1.0, 1.0) * h * h;
            }
        }
        assert!(s.abs() < 1e-12);
    }
}
