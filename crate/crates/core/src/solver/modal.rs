//! Angular Fourier transforms, the per-mode radial Poisson solve, velocity
//! recovery and the Thom wall closure.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use super::grid::PolarMesh;
use crate::error::{Error, Result};

/// Relative residual above which a radial solve is reported as failed.
const SOLVE_RESIDUAL_LIMIT: f64 = 1e-8;

/// Far-field condition for the axisymmetric mode of the streamfunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FarField {
    /// `r ψ_r → -∫w/2π`: ψ grows like the logarithm of the total circulation.
    MatchCirculation,
    /// `r ψ_r = 0` at the outer radius (zero circulation at infinity).
    ZeroCirculation,
}

/// Precomputed transforms and radial stencils for one mesh.
pub struct ModalOps {
    pub mesh: PolarMesh,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Second-derivative stencils in `s` per interior node.
    d2: Vec<(f64, f64, f64)>,
    /// Finite-volume widths in `s` (half cells at both ends).
    fv_width: Vec<f64>,
    /// `exp(2 s_i) = r_i²`.
    r2: Vec<f64>,
}

impl std::fmt::Debug for ModalOps {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModalOps").field("mesh", &self.mesh.spec).finish()
    }
}

impl ModalOps {
    pub fn new(mesh: PolarMesh) -> Self {
        let mut planner = FftPlanner::new();
        let nt = mesh.n_theta();
        let n = mesh.n_r();
        let fwd = planner.plan_fft_forward(nt);
        let inv = planner.plan_fft_inverse(nt);
        let d2 = (0..n)
            .map(|i| {
                if i == 0 || i == n - 1 {
                    (0.0, 0.0, 0.0)
                } else {
                    mesh.d2_coeffs(i)
                }
            })
            .collect();
        let s = &mesh.s;
        let fv_width = (0..n)
            .map(|i| {
                let lo = if i > 0 { 0.5 * (s[i] - s[i - 1]) } else { 0.0 };
                let hi = if i + 1 < n { 0.5 * (s[i + 1] - s[i]) } else { 0.0 };
                lo + hi
            })
            .collect();
        let r2 = mesh.r.iter().map(|r| r * r).collect();
        Self {
            mesh,
            fwd,
            inv,
            d2,
            fv_width,
            r2,
        }
    }

    pub fn n_r(&self) -> usize {
        self.mesh.n_r()
    }

    pub fn n_theta(&self) -> usize {
        self.mesh.n_theta()
    }

    /// Signed wavenumber of FFT bin `j`; the Nyquist bin is reported as `+n/2`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        let n = self.n_theta();
        if j <= n / 2 {
            j as f64
        } else {
            j as f64 - n as f64
        }
    }

    /// Whether bin `j` survives the two-thirds dealiasing filter.
    pub fn kept_by_filter(&self, j: usize) -> bool {
        3.0 * self.wavenumber(j).abs() < self.n_theta() as f64
    }

    /// Angular coefficients ring by ring, normalised so that the zeroth bin is the ring mean.
    pub fn forward(&self, phys: &[f64]) -> Vec<Complex64> {
        let nt = self.n_theta();
        let scale = 1.0 / nt as f64;
        let mut out: Vec<Complex64> = phys.iter().map(|&v| Complex64::new(v * scale, 0.0)).collect();
        for ring in out.chunks_mut(nt) {
            self.fwd.process(ring);
        }
        out
    }

    pub fn inverse(&self, modes: &[Complex64]) -> Vec<f64> {
        let nt = self.n_theta();
        let mut buf = modes.to_vec();
        for ring in buf.chunks_mut(nt) {
            self.inv.process(ring);
        }
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Inverse transform of selected rings only; other rings are left as zero.
    pub(crate) fn inverse_rings(&self, modes: &[Complex64], rings: impl Iterator<Item = usize>) -> Vec<f64> {
        let nt = self.n_theta();
        let mut out = vec![0.0; modes.len()];
        let mut buf = vec![Complex64::new(0.0, 0.0); nt];
        for i in rings {
            buf.copy_from_slice(&modes[i * nt..(i + 1) * nt]);
            self.inv.process(&mut buf);
            for (o, c) in out[i * nt..(i + 1) * nt].iter_mut().zip(&buf) {
                *o = c.re;
            }
        }
        out
    }

    /// `∂_θ` in coefficient space (Nyquist bin dropped).
    pub fn d_theta(&self, modes: &[Complex64]) -> Vec<Complex64> {
        let nt = self.n_theta();
        modes
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                let j = idx % nt;
                if 2 * j == nt {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * Complex64::new(0.0, self.wavenumber(j))
                }
            })
            .collect()
    }

    pub(crate) fn column(&self, modes: &[Complex64], j: usize) -> Vec<Complex64> {
        let nt = self.n_theta();
        (0..self.n_r()).map(|i| modes[i * nt + j]).collect()
    }

    pub(crate) fn set_column(&self, modes: &mut [Complex64], j: usize, col: &[Complex64]) {
        let nt = self.n_theta();
        for (i, c) in col.iter().enumerate() {
            modes[i * nt + j] = *c;
        }
    }

    /// `r² Δ_k f` at interior node `i` for one radial profile of mode `k`.
    pub(crate) fn scaled_laplacian_at(&self, f: &[Complex64], i: usize, k2: f64) -> Complex64 {
        let (a, b, c) = self.d2[i];
        f[i - 1] * a + f[i] * (b - k2) + f[i + 1] * c
    }

    /// `∫ f r² ds` over the radial range with finite-volume widths, i.e. `∫ f r dr`.
    pub(crate) fn radial_moment(&self, f: &[Complex64]) -> Complex64 {
        f.iter()
            .zip(self.r2.iter().zip(&self.fv_width))
            .map(|(v, (r2, w))| v * (r2 * w))
            .sum()
    }

    /// Solves `Δ_k ψ = -w` for one mode with `ψ(1) = 0`. Returns the
    /// profile and the relative residual of the banded system.
    pub fn poisson_mode(&self, w: &[Complex64], k: f64, far: FarField) -> (Vec<Complex64>, f64) {
        let n = self.n_r();
        let m = n - 1; // unknowns ψ_1 .. ψ_{n-1}
        let k2 = k * k;
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        let mut rhs = vec![Complex64::new(0.0, 0.0); m];
        for i in 1..n - 1 {
            let (a, b, c) = self.d2[i];
            let row = i - 1;
            lower[row] = a;
            diag[row] = b - k2;
            upper[row] = c;
            rhs[row] = -w[i] * self.r2[i];
        }
        let hm = self.mesh.s[n - 1] - self.mesh.s[n - 2];
        let row = m - 1;
        lower[row] = 2.0 / (hm * hm);
        diag[row] = -2.0 / (hm * hm) - k2;
        rhs[row] = -w[n - 1] * self.r2[n - 1];
        if k != 0.0 {
            diag[row] -= 2.0 * k.abs() / hm;
        } else if far == FarField::MatchCirculation {
            // ψ_s(S) = -∫ w r dr
            rhs[row] += self.radial_moment(w) * (2.0 / hm);
        }
        let sol = thomas(&lower, &diag, &upper, &rhs);
        let residual = banded_residual(&lower, &diag, &upper, &sol, &rhs);
        let mut psi = Vec::with_capacity(n);
        psi.push(Complex64::new(0.0, 0.0));
        psi.extend(sol);
        (psi, residual)
    }

    /// Streamfunction coefficients for vorticity coefficients `w_hat`.
    pub fn poisson_modes(&self, w_hat: &[Complex64], far: FarField) -> Result<(Vec<Complex64>, f64)> {
        let nt = self.n_theta();
        let mut psi_hat = vec![Complex64::new(0.0, 0.0); w_hat.len()];
        let mut worst: f64 = 0.0;
        for j in 0..nt {
            let col = self.column(w_hat, j);
            let (psi, res) = self.poisson_mode(&col, self.wavenumber(j).abs(), far);
            if !(res <= SOLVE_RESIDUAL_LIMIT) {
                return Err(Error::Solve { mode: j, residual: res });
            }
            worst = worst.max(res);
            self.set_column(&mut psi_hat, j, &psi);
        }
        Ok((psi_hat, worst))
    }

    /// Discrete `-Δψ` at every node, with the Thom value on the wall and
    /// zero on the outer circle.
    pub fn vorticity_from_streamfunction(&self, psi: &[f64]) -> Vec<f64> {
        let nt = self.n_theta();
        let n = self.n_r();
        let psi_hat = self.forward(psi);
        let mut w_hat = vec![Complex64::new(0.0, 0.0); psi_hat.len()];
        for j in 0..nt {
            let k2 = self.wavenumber(j).powi(2);
            let col = self.column(&psi_hat, j);
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            for i in 1..n - 1 {
                out[i] = -self.scaled_laplacian_at(&col, i, k2) / self.r2[i];
            }
            self.set_column(&mut w_hat, j, &out);
        }
        let mut w = self.inverse(&w_hat);
        let wall = boundary_vorticity(&self.mesh, psi);
        w[..nt].copy_from_slice(&wall);
        w
    }

    /// Velocity components `(v_r, v_θ)` from streamfunction coefficients:
    /// `v_r = (1/r) ∂_θ ψ`, `v_θ = -∂_r ψ`.
    pub fn velocity(&self, psi_hat: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let nt = self.n_theta();
        let n = self.n_r();
        let mut v_r = self.inverse(&self.d_theta(psi_hat));
        for (i, ring) in v_r.chunks_mut(nt).enumerate() {
            let inv_r = 1.0 / self.mesh.r[i];
            ring.iter_mut().for_each(|v| *v *= inv_r);
        }
        let mut dpsi = vec![Complex64::new(0.0, 0.0); psi_hat.len()];
        for j in 0..nt {
            let col = self.column(psi_hat, j);
            let d = self.mesh.ds(&col);
            self.set_column(&mut dpsi, j, &d);
        }
        let mut v_t = self.inverse(&dpsi);
        for i in 0..n {
            let f = -1.0 / self.mesh.r[i];
            v_t[i * nt..(i + 1) * nt].iter_mut().for_each(|v| *v *= f);
        }
        (v_r, v_t)
    }

    /// Wall derivative `∂_s ψ` at `r = 1` of one mode (second-order one-sided).
    pub(crate) fn wall_slope(&self, psi: &[Complex64]) -> Complex64 {
        let (idx, c) = self.mesh.d1_coeffs(0);
        psi[idx[0]] * c[0] + psi[idx[1]] * c[1] + psi[idx[2]] * c[2]
    }
}

/// Solves `Δψ = -w` on the mesh: `ψ = 0` on the wall, decaying harmonic
/// continuation for the non-axisymmetric modes and `ψ ~ -(∫w/2π) ln r` for the mean.
pub fn poisson_streamfunction(ops: &ModalOps, w: &[f64]) -> Result<Vec<f64>> {
    let (psi_hat, _) = ops.poisson_modes(&ops.forward(w), FarField::MatchCirculation)?;
    Ok(ops.inverse(&psi_hat))
}

/// Thom closure: wall vorticity `-2 ψ_1 / (r_1 - 1)²` per angular node, the
/// value that makes `∂_r ψ = 0` at the wall to first order.
pub fn boundary_vorticity(mesh: &PolarMesh, psi: &[f64]) -> Vec<f64> {
    let nt = mesh.n_theta();
    let dr = mesh.r[1] - mesh.r[0];
    (0..nt).map(|j| -2.0 * psi[nt + j] / (dr * dr)).collect()
}

/// Tangential velocity `-∂_r ψ` on the wall per angular node.
pub fn wall_slip(mesh: &PolarMesh, psi: &[f64]) -> Vec<f64> {
    let nt = mesh.n_theta();
    let (idx, c) = mesh.d1_coeffs(0);
    (0..nt)
        .map(|j| -(c[0] * psi[idx[0] * nt + j] + c[1] * psi[idx[1] * nt + j] + c[2] * psi[idx[2] * nt + j]))
        .collect()
}

/// Thomas algorithm for a real tridiagonal matrix and complex right-hand side.
pub(crate) fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[Complex64]) -> Vec<Complex64> {
    let n = diag.len();
    let mut c_star = vec![0.0; n];
    let mut d_star = vec![Complex64::new(0.0, 0.0); n];
    c_star[0] = upper[0] / diag[0];
    d_star[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c_star[i - 1];
        c_star[i] = if i + 1 < n { upper[i] / m } else { 0.0 };
        d_star[i] = (rhs[i] - d_star[i - 1] * lower[i]) / m;
    }
    for i in (0..n - 1).rev() {
        let next = d_star[i + 1];
        d_star[i] -= next * c_star[i];
    }
    d_star
}

fn banded_residual(lower: &[f64], diag: &[f64], upper: &[f64], x: &[Complex64], rhs: &[Complex64]) -> f64 {
    let n = diag.len();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..n {
        let mut ax = x[i] * diag[i];
        if i > 0 {
            ax += x[i - 1] * lower[i];
        }
        if i + 1 < n {
            ax += x[i + 1] * upper[i];
        }
        worst = worst.max((ax - rhs[i]).norm());
        scale = scale.max(rhs[i].norm()).max((x[i] * diag[i]).norm());
    }
    if scale == 0.0 {
        0.0
    } else {
        worst / scale
    }
}

#[cfg(test)]
mod tests {
    use super::super::grid::{build_grid, GridSpec};
    use super::*;

    fn ops(n_r: usize, n_theta: usize) -> ModalOps {
        ModalOps::new(build_grid(GridSpec::new(16.0, n_r, n_theta)).unwrap())
    }

    /// Compact streamfunction `(r-1)² e^{-(r-3)²} cos θ`-like bump and its exact vorticity.
    fn manufactured(r: f64, th: f64) -> (f64, f64) {
        let g = |r: f64| (r - 1.0).powi(2) * (-(r - 3.0f64).powi(2)).exp();
        let h = 1e-4;
        let (g0, gp, gm) = (g(r), g(r + h), g(r - h));
        let g1 = (gp - gm) / (2.0 * h);
        let g2 = (gp - 2.0 * g0 + gm) / (h * h);
        let ang = 0.5 + (2.0 * th).cos();
        let lap = (g2 + g1 / r) * ang - g0 * 4.0 * (2.0 * th).cos() / (r * r);
        (g0 * ang, -lap)
    }

    #[test]
    fn zero_vorticity_gives_zero_streamfunction() {
        let o = ops(128, 16);
        let psi = poisson_streamfunction(&o, &vec![0.0; o.mesh.len()]).unwrap();
        assert!(psi.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn manufactured_streamfunction_is_recovered_at_second_order() {
        let err = |n_r: usize| {
            let o = ops(n_r, 16);
            let m = &o.mesh;
            let w = m.sample(|x| manufactured(x.norm(), x.x2.atan2(x.x1)).1);
            let psi = poisson_streamfunction(&o, &w).unwrap();
            let exact = m.sample(|x| manufactured(x.norm(), x.x2.atan2(x.x1)).0);
            psi.iter().zip(&exact).fold(0.0f64, |e, (a, b)| e.max((a - b).abs()))
        };
        let (e1, e2) = (err(128), err(256));
        // max |ψ| is about 6
        assert!(e1 < 6e-3 * 6.0, "coarse error {e1}");
        assert!(e1 / e2 > 3.0, "refinement ratio {}", e1 / e2);
    }

    #[test]
    fn per_mode_residual_is_at_rounding_level() {
        let o = ops(128, 16);
        let w = o.mesh.sample(|x| manufactured(x.norm(), x.x2.atan2(x.x1)).1);
        let (_, res) = o.poisson_modes(&o.forward(&w), FarField::MatchCirculation).unwrap();
        assert!(res <= 1e-10, "residual {res}");
    }

    #[test]
    fn axisymmetric_vorticity_matches_circulation_far_field() {
        // Gaussian ring, Γ = ∫ w; outside the support r ψ_r = -Γ/2π.
        let o = ops(256, 8);
        let m = &o.mesh;
        let w = m.sample(|x| (-(x.norm() - 3.0).powi(2) * 4.0).exp());
        let gamma = m.integrate(&w);
        let psi = poisson_streamfunction(&o, &w).unwrap();
        let nt = m.n_theta();
        let i = m.r.iter().position(|&r| r > 10.0).unwrap();
        let slope = (psi[(i + 1) * nt] - psi[(i - 1) * nt]) / (m.s[i + 1] - m.s[i - 1]);
        assert!((slope + gamma / (2.0 * std::f64::consts::PI)).abs() < 1e-3 * gamma);
    }

    #[test]
    fn discrete_curl_inverts_the_poisson_solve() {
        let o = ops(128, 16);
        let psi0 = o.mesh.sample(|x| manufactured(x.norm(), x.x2.atan2(x.x1)).0);
        let w = o.vorticity_from_streamfunction(&psi0);
        let (psi_hat, _) = o.poisson_modes(&o.forward(&w), FarField::ZeroCirculation).unwrap();
        let psi = o.inverse(&psi_hat);
        let nt = o.n_theta();
        let err = psi[nt..]
            .iter()
            .zip(&psi0[nt..])
            .fold(0.0f64, |e, (a, b)| e.max((a - b).abs()));
        assert!(err < 1e-10, "err {err}");
    }

    #[test]
    fn thom_closure_matches_second_normal_derivative() {
        // ψ = (r-1)² q(θ) has ψ_rr(1) = 2q, so -Δψ on the wall is -2q.
        let err = |n_r: usize| {
            let m = build_grid(GridSpec::new(16.0, n_r, 8)).unwrap();
            let psi = m.sample(|x| (x.norm() - 1.0).powi(2) * (1.0 + x.x1 / x.norm()) * (-(x.norm() - 1.0)).exp());
            let wb = boundary_vorticity(&m, &psi);
            (0..8)
                .map(|j| (wb[j] + 2.0 * (1.0 + m.theta(j).cos())).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(128), err(256));
        assert!(e1 < 0.1);
        assert!(e1 / e2 > 1.8, "first-order convergence expected, ratio {}", e1 / e2);
        let m = build_grid(GridSpec::new(16.0, 64, 8)).unwrap();
        assert!(boundary_vorticity(&m, &vec![0.0; m.len()]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn velocity_is_perpendicular_gradient() {
        // v_r = ψ_θ / r is exact per mode, v_θ = -ψ_r is second order
        let o = ops(128, 16);
        let psi0 = o.mesh.sample(|x| manufactured(x.norm(), x.x2.atan2(x.x1)).0);
        let (v_r, v_t) = o.velocity(&o.forward(&psi0));
        let nt = o.n_theta();
        let i = 60;
        let r = o.mesh.r[i];
        let h = 1e-5;
        for j in [0, 3, 7] {
            let th = o.mesh.theta(j);
            let dth = (manufactured(r, th + h).0 - manufactured(r, th - h).0) / (2.0 * h);
            let dr = (manufactured(r + h, th).0 - manufactured(r - h, th).0) / (2.0 * h);
            assert!((v_r[i * nt + j] - dth / r).abs() < 1e-10);
            assert!(
                (v_t[i * nt + j] + dr).abs() < 1e-3 * dr.abs().max(1.0),
                "{} vs {}",
                v_t[i * nt + j],
                -dr
            );
        }
    }
}
