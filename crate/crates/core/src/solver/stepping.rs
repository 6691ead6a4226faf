//! IMEX time stepping of the perturbation vorticity.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::PolarMesh;
use super::modal::{thomas, wall_slip, FarField, ModalOps};
use crate::error::{invalid, Error, Result};
use crate::fields::TruncatedProfile;

/// Norm of `w` above which a run is aborted.
pub const BLOW_UP_NORM: f64 = 1e10;

/// Relative sponge loss above which [`Diagnostics::sponge_alarm`] is raised.
pub const SPONGE_ALARM: f64 = 1e-3;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMode {
    /// Advection by `αu^χ + v`, stretching of `αω^χ` and the `αR^χ` forcing.
    Full,
    /// As `Full` without the remainder forcing.
    NoForcing,
    /// Linear Stokes flow: diffusion with no-slip only.
    StokesLinear,
}

/// How the wall vorticity is fixed each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WallClosure {
    /// Per-mode influence matrix: the wall value is chosen so that the
    /// one-sided `∂_r ψ` at the wall vanishes after the step.
    InfluenceMatrix,
    /// Thom formula `w_wall = -2 ψ_1 / (r_1 - 1)²`, imposed implicitly on
    /// the new streamfunction (one update per step).
    Thom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub alpha: f64,
    pub rho: f64,
    /// Largest time step; the advective bound may reduce it.
    pub dt: f64,
    pub t_final: f64,
    pub mode: SolverMode,
    /// Width of the absorbing layer; `None` means 10% of the outer radius.
    pub sponge_width: Option<f64>,
    /// Exponent of the extra `L^p` norm in the diagnostics.
    pub lp_exponent: f64,
    /// Courant number of the advective bound.
    pub cfl: f64,
    /// Steps shorter than this abort the run with a CFL error.
    pub min_dt: f64,
    pub closure: WallClosure,
}

impl SolverConfig {
    pub fn new(alpha: f64, rho: f64, dt: f64, t_final: f64, mode: SolverMode) -> Self {
        Self {
            alpha,
            rho,
            dt,
            t_final,
            mode,
            sponge_width: None,
            lp_exponent: 4.0,
            cfl: 0.4,
            min_dt: 1e-7,
            closure: WallClosure::InfluenceMatrix,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() {
            return Err(invalid("alpha", "must be finite"));
        }
        if !(self.rho > 0.0) {
            return Err(invalid("rho", "must be positive"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid("dt", "must be positive"));
        }
        if !(self.t_final >= 0.0) {
            return Err(invalid("t_final", "must be non-negative"));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(invalid("cfl", "must lie in (0, 1]"));
        }
        if !(self.lp_exponent >= 1.0) {
            return Err(invalid("lp_exponent", "must be at least 1"));
        }
        Ok(())
    }
}

/// State of a trajectory. `w`, `psi`, `v_r`, `v_theta` are node values on
/// the mesh (radial-major); the angular coefficients are kept alongside.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub t: f64,
    pub step_index: usize,
    pub w: Vec<f64>,
    pub psi: Vec<f64>,
    pub v_r: Vec<f64>,
    pub v_theta: Vec<f64>,
    /// Running `∫ ‖w‖²_{L²} dt`, with the step-midpoint vorticity.
    pub dissipation: f64,
    /// Running `∫ |w|` removed by the sponge.
    pub sponge_loss: f64,
    /// `∫|w0|` (or `∫|w|` at the first nonzero state), the scale of the sponge alarm.
    pub mass_scale: f64,
    w_hat: Vec<Complex64>,
    psi_hat: Vec<Complex64>,
    previous: Option<(Vec<Complex64>, f64)>,
}

/// Scalar diagnostics of one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: f64,
    pub l2_v: f64,
    /// `‖∇v‖_{L²}`, computed as `‖w‖_{L²}`.
    pub h1_v: f64,
    pub lp_v: f64,
    pub energy_dissipation_integral: f64,
    /// `‖v‖² + ∫‖∇v‖²`.
    pub log_energy_functional: f64,
    pub sponge_loss: f64,
    pub sponge_alarm: bool,
    /// Largest tangential velocity on the wall.
    pub wall_slip: f64,
    pub max_speed: f64,
    pub total_vorticity: f64,
    pub step_index: usize,
}

impl Diagnostics {
    pub const HEADER: [&'static str; 12] = [
        "t",
        "l2_v",
        "h1_v",
        "lp_v",
        "energy_dissipation_integral",
        "log_energy_functional",
        "sponge_loss",
        "sponge_alarm",
        "wall_slip",
        "max_speed",
        "total_vorticity",
        "step_index",
    ];

    pub fn values(&self) -> [f64; 12] {
        [
            self.t,
            self.l2_v,
            self.h1_v,
            self.lp_v,
            self.energy_dissipation_integral,
            self.log_energy_functional,
            self.sponge_loss,
            if self.sponge_alarm { 1.0 } else { 0.0 },
            self.wall_slip,
            self.max_speed,
            self.total_vorticity,
            self.step_index as f64,
        ]
    }
}

/// Radial profiles of the truncated vortex at one time.
struct Background {
    u_theta: Vec<f64>,
    vorticity_dr: Vec<f64>,
    remainder_curl: Vec<f64>,
}

/// Integrator bound to a mesh and a configuration.
#[derive(Debug)]
pub struct Solver {
    pub ops: ModalOps,
    pub cfg: SolverConfig,
    mask: Vec<f64>,
    sponge_rings: Vec<usize>,
}

impl Solver {
    pub fn new(mesh: PolarMesh, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let width = cfg.sponge_width.unwrap_or(0.1 * mesh.spec.r_outer);
        if !(width >= 0.0) || width >= mesh.spec.r_outer - mesh.spec.r_inner {
            return Err(invalid("sponge_width", format!("{width} does not fit in the annulus")));
        }
        let mask = mesh.sponge_mask(width);
        let sponge_rings = (0..mesh.n_r()).filter(|&i| mask[i] < 1.0).collect();
        Ok(Self {
            ops: ModalOps::new(mesh),
            cfg,
            mask,
            sponge_rings,
        })
    }

    pub fn mesh(&self) -> &PolarMesh {
        &self.ops.mesh
    }

    /// State with vorticity `w0`. The streamfunction is solved with zero
    /// circulation at infinity, so `w0` should integrate to zero.
    pub fn initial_state(&self, w0: &[f64]) -> Result<SolverState> {
        let mesh = self.mesh();
        if w0.len() != mesh.len() {
            return Err(invalid("w0", format!("{} values for {} nodes", w0.len(), mesh.len())));
        }
        let w_hat = self.ops.forward(w0);
        let (psi_hat, _) = self.ops.poisson_modes(&w_hat, FarField::ZeroCirculation)?;
        let mass_scale = mesh.integrate(&w0.iter().map(|v| v.abs()).collect::<Vec<_>>());
        let mut st = SolverState {
            t: 0.0,
            step_index: 0,
            w: w0.to_vec(),
            psi: Vec::new(),
            v_r: Vec::new(),
            v_theta: Vec::new(),
            dissipation: 0.0,
            sponge_loss: 0.0,
            mass_scale,
            w_hat,
            psi_hat,
            previous: None,
        };
        self.refresh(&mut st);
        Ok(st)
    }

    /// State built from a streamfunction that vanishes with its normal
    /// derivative on the wall; `w0 = -Δ_h ψ0` with the discrete Laplacian.
    pub fn state_from_streamfunction(&self, psi0: &[f64]) -> Result<SolverState> {
        let w0 = self.ops.vorticity_from_streamfunction(psi0);
        self.initial_state(&w0)
    }

    fn refresh(&self, st: &mut SolverState) {
        st.w = self.ops.inverse(&st.w_hat);
        st.psi = self.ops.inverse(&st.psi_hat);
        let (v_r, v_t) = self.ops.velocity(&st.psi_hat);
        st.v_r = v_r;
        st.v_theta = v_t;
    }

    fn background(&self, t: f64) -> Result<Background> {
        let r = &self.mesh().r;
        if self.cfg.mode == SolverMode::StokesLinear || self.cfg.alpha == 0.0 {
            let z = vec![0.0; r.len()];
            return Ok(Background {
                u_theta: z.clone(),
                vorticity_dr: z.clone(),
                remainder_curl: z,
            });
        }
        let prof = TruncatedProfile::new(self.cfg.rho, t)?;
        let forced = self.cfg.mode == SolverMode::Full;
        Ok(Background {
            u_theta: r.iter().map(|&ri| prof.azimuthal_velocity(ri)).collect(),
            vorticity_dr: r.iter().map(|&ri| prof.vorticity_dr(ri)).collect(),
            remainder_curl: r
                .iter()
                .map(|&ri| if forced { prof.remainder_curl(ri) } else { 0.0 })
                .collect(),
        })
    }

    /// Largest step allowed by the advective bound at the current state.
    pub fn stable_dt(&self, st: &SolverState) -> Result<f64> {
        if self.cfg.mode == SolverMode::StokesLinear {
            return Ok(f64::INFINITY);
        }
        let bg = self.background(st.t)?;
        let mesh = self.mesh();
        let nt = mesh.n_theta();
        let mut rate: f64 = 0.0;
        for i in 0..mesh.n_r() {
            let dr = mesh.radial_spacing(i);
            let arc = mesh.r[i] * mesh.d_theta;
            for j in 0..nt {
                let idx = i * nt + j;
                let a_t = self.cfg.alpha * bg.u_theta[i] + st.v_theta[idx];
                rate = rate.max(st.v_r[idx].abs() / dr + a_t.abs() / arc);
            }
        }
        Ok(if rate > 0.0 { self.cfg.cfl / rate } else { f64::INFINITY })
    }

    /// Explicit right-hand side `-N̂` (advection and stretching) plus forcing,
    /// dealiased with the two-thirds rule.
    fn explicit_term(&self, st: &SolverState) -> Result<Vec<Complex64>> {
        let n_total = st.w.len();
        if self.cfg.mode == SolverMode::StokesLinear {
            return Ok(vec![ZERO; n_total]);
        }
        let mesh = self.mesh();
        let nt = mesh.n_theta();
        let alpha = self.cfg.alpha;
        let bg = self.background(st.t)?;
        let w_theta = self.ops.inverse(&self.ops.d_theta(&st.w_hat));
        let mut w_s = vec![0.0; n_total];
        for i in 0..mesh.n_r() {
            let (idx, c) = mesh.d1_coeffs(i);
            for j in 0..nt {
                w_s[i * nt + j] =
                    c[0] * st.w[idx[0] * nt + j] + c[1] * st.w[idx[1] * nt + j] + c[2] * st.w[idx[2] * nt + j];
            }
        }
        let mut rhs = vec![0.0; n_total];
        for i in 0..mesh.n_r() {
            let r = mesh.r[i];
            for j in 0..nt {
                let k = i * nt + j;
                let a_t = alpha * bg.u_theta[i] + st.v_theta[k];
                let adv = st.v_r[k] * w_s[k] / r + a_t * w_theta[k] / r + alpha * st.v_r[k] * bg.vorticity_dr[i];
                rhs[k] = alpha * bg.remainder_curl[i] - adv;
            }
        }
        let mut out = self.ops.forward(&rhs);
        for (idx, c) in out.iter_mut().enumerate() {
            if !self.ops.kept_by_filter(idx % nt) {
                *c = ZERO;
            }
        }
        Ok(out)
    }

    /// One step of size `cfg.dt`; fails if it violates the advective bound.
    pub fn step(&self, st: &mut SolverState) -> Result<()> {
        let bound = self.stable_dt(st)?;
        if self.cfg.dt > bound {
            return Err(Error::Cfl { t: st.t, dt: bound });
        }
        self.advance(st, self.cfg.dt)
    }

    /// Crank-Nicolson diffusion with variable-step Adams-Bashforth explicit
    /// terms; the wall value closes the system per angular mode.
    pub fn advance(&self, st: &mut SolverState, dt: f64) -> Result<()> {
        let n = self.ops.n_r();
        let nt = self.ops.n_theta();
        let explicit = self.explicit_term(st)?;
        let rhs_term: Vec<Complex64> = match &st.previous {
            Some((prev, dt_prev)) => {
                let c = 0.5 * dt / dt_prev;
                explicit.iter().zip(prev).map(|(a, b)| a * (1.0 + c) - b * c).collect()
            }
            None => explicit.clone(),
        };
        let columns: Vec<Result<ModeUpdate>> = (0..nt)
            .into_par_iter()
            .map(|j| {
                let w_old = self.ops.column(&st.w_hat, j);
                let f = self.ops.column(&rhs_term, j);
                self.mode_update(j, &w_old, &f, dt)
            })
            .collect();
        let mut w_hat = vec![ZERO; n * nt];
        let mut psi_hat = vec![ZERO; n * nt];
        let mut raw = vec![ZERO; n * nt];
        for (j, col) in columns.into_iter().enumerate() {
            let col = col?;
            self.ops.set_column(&mut w_hat, j, &col.w);
            self.ops.set_column(&mut psi_hat, j, &col.psi);
            self.ops.set_column(&mut raw, j, &col.raw);
        }
        let w_old = std::mem::take(&mut st.w);
        st.w_hat = w_hat;
        st.psi_hat = psi_hat;
        self.refresh(st);
        if !self.sponge_rings.is_empty() {
            let unmasked = self.ops.inverse_rings(&raw, self.sponge_rings.iter().copied());
            let mesh = self.mesh();
            for &i in &self.sponge_rings {
                let lost: f64 = (0..nt).map(|j| (unmasked[i * nt + j] - st.w[i * nt + j]).abs()).sum();
                st.sponge_loss += mesh.cell_area[i] * lost;
            }
        }
        // Crank-Nicolson dissipates the midpoint enstrophy exactly
        let mid: Vec<f64> = w_old
            .iter()
            .zip(&st.w)
            .map(|(a, b)| 0.5 * (a + b))
            .map(|v| v * v)
            .collect();
        st.dissipation += dt * self.mesh().integrate(&mid);
        let enstrophy = self.mesh().integrate(&st.w.iter().map(|v| v * v).collect::<Vec<_>>());
        st.t += dt;
        st.step_index += 1;
        st.previous = Some((explicit, dt));
        if st.mass_scale == 0.0 {
            st.mass_scale = self.mesh().integrate(&st.w.iter().map(|v| v.abs()).collect::<Vec<_>>());
        }
        let norm = enstrophy.sqrt();
        if !norm.is_finite() || norm > BLOW_UP_NORM {
            return Err(Error::BlowUp { t: st.t, norm });
        }
        Ok(())
    }

    fn mode_update(&self, j: usize, w_old: &[Complex64], f: &[Complex64], dt: f64) -> Result<ModeUpdate> {
        let n = self.ops.n_r();
        let k = self.ops.wavenumber(j).abs();
        let k2 = k * k;
        let r = &self.mesh().r;
        let m = n - 2;
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        let mut rhs_p = vec![ZERO; m];
        let mut rhs_h = vec![ZERO; m];
        for i in 1..n - 1 {
            let row = i - 1;
            let (a, b, c) = self.mesh().d2_coeffs(i);
            let h = 0.5 * dt / (r[i] * r[i]);
            lower[row] = -h * a;
            diag[row] = 1.0 - h * (b - k2);
            upper[row] = -h * c;
            rhs_p[row] = w_old[i] + self.ops.scaled_laplacian_at(w_old, i, k2) * h + f[i] * dt;
        }
        rhs_h[0] = Complex64::new(-lower[0], 0.0);
        let solve = |rhs: &[Complex64], wall: f64| -> Vec<Complex64> {
            let mut col = Vec::with_capacity(n);
            col.push(Complex64::new(wall, 0.0));
            col.extend(thomas(&lower, &diag, &upper, rhs));
            col.push(ZERO);
            col
        };
        let p_raw = solve(&rhs_p, 0.0);
        let h_raw = solve(&rhs_h, 1.0);
        let p: Vec<Complex64> = p_raw.iter().zip(&self.mask).map(|(v, m)| v * m).collect();
        let h: Vec<Complex64> = h_raw.iter().zip(&self.mask).map(|(v, m)| v * m).collect();
        let (psi_p, res_p) = self.ops.poisson_mode(&p, k, FarField::ZeroCirculation);
        let (psi_h, res_h) = self.ops.poisson_mode(&h, k, FarField::ZeroCirculation);
        let residual = res_p.max(res_h);
        if !(residual <= 1e-8) {
            return Err(Error::Solve { mode: j, residual });
        }
        let beta = match self.cfg.closure {
            WallClosure::InfluenceMatrix => {
                let dh = self.ops.wall_slope(&psi_h);
                if dh.norm() == 0.0 {
                    return Err(Error::Degenerate(format!("wall influence vanishes for mode {j}")));
                }
                -self.ops.wall_slope(&psi_p) / dh
            }
            WallClosure::Thom => {
                // β = -2 (ψ_p1 + β ψ_h1) / Δr²
                let dr2 = (r[1] - r[0]).powi(2);
                -psi_p[1] * 2.0 / (psi_h[1] * 2.0 + dr2)
            }
        };
        let combine = |a: &[Complex64], b: &[Complex64]| -> Vec<Complex64> {
            a.iter().zip(b).map(|(x, y)| x + y * beta).collect()
        };
        Ok(ModeUpdate {
            w: combine(&p, &h),
            psi: combine(&psi_p, &psi_h),
            raw: combine(&p_raw, &h_raw),
        })
    }

    pub fn diagnostics(&self, st: &SolverState) -> Diagnostics {
        let mesh = self.mesh();
        let speed: Vec<f64> = st
            .v_r
            .iter()
            .zip(&st.v_theta)
            .map(|(a, b)| (a * a + b * b).sqrt())
            .collect();
        let l2_v = mesh.lp_norm(&speed, 2.0);
        let h1_v = mesh.lp_norm(&st.w, 2.0);
        let lp_v = mesh.lp_norm(&speed, self.cfg.lp_exponent);
        let max_speed = speed.iter().copied().fold(0.0, f64::max);
        let wall_slip = wall_slip(mesh, &st.psi).into_iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let sponge_rel = if st.mass_scale > 0.0 {
            st.sponge_loss / st.mass_scale
        } else {
            0.0
        };
        Diagnostics {
            t: st.t,
            l2_v,
            h1_v,
            lp_v,
            energy_dissipation_integral: st.dissipation,
            log_energy_functional: l2_v * l2_v + st.dissipation,
            sponge_loss: st.sponge_loss,
            sponge_alarm: sponge_rel > SPONGE_ALARM,
            wall_slip,
            max_speed,
            total_vorticity: mesh.integrate(&st.w),
            step_index: st.step_index,
        }
    }

    /// Integrates to each of `output_times` (sorted, within `[0, t_final]`)
    /// with the largest admissible steps, recording diagnostics at `t = 0`
    /// and at every output time.
    pub fn run_from(&self, st: &mut SolverState, output_times: &[f64]) -> Result<Vec<Diagnostics>> {
        let mut out = vec![self.diagnostics(st)];
        for &target in output_times {
            if target > self.cfg.t_final * (1.0 + 1e-12) {
                return Err(invalid("output_times", format!("{target} exceeds t_final")));
            }
            while st.t < target - 1e-12 * target.max(1.0) {
                let bound = self.stable_dt(st)?;
                if bound < self.cfg.min_dt {
                    return Err(Error::Cfl { t: st.t, dt: bound });
                }
                let remaining = target - st.t;
                let mut dt = self.cfg.dt.min(bound);
                if dt >= remaining {
                    dt = remaining;
                } else if 1.5 * dt > remaining {
                    // avoid a tiny final sub-step
                    dt = 0.5 * remaining;
                }
                self.advance(st, dt)?;
            }
            out.push(self.diagnostics(st));
        }
        Ok(out)
    }
}

struct ModeUpdate {
    w: Vec<Complex64>,
    psi: Vec<Complex64>,
    raw: Vec<Complex64>,
}

/// `n` output times spaced geometrically between `t0` and `t1`.
pub fn geometric_times(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![t1];
    }
    let (a, b) = (t0.ln(), t1.ln());
    let mut t: Vec<f64> = (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect();
    // endpoints exact, not rounded through exp/ln
    t[0] = t0;
    t[n - 1] = t1;
    t
}
