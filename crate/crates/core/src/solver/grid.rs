//! Stretched log-polar mesh on the annulus `1 <= r <= R`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::geometry::Point2;

/// Radius of the obstacle. The solver only handles the exterior of the unit disk.
pub const OBSTACLE_RADIUS: f64 = 1.0;

/// Minimum number of radial nodes within distance 0.2 of the wall.
pub const MIN_WALL_NODES: usize = 8;

/// Description of the mesh.
///
/// Radial nodes sit at `r = exp(s)` with
/// `s(ξ) = ln(R) (ξ - γ sin(πξ)/π)`, `ξ = i/(n_r - 1)`. `γ = 0` is uniform in
/// `ln r`; `0 < γ < 1` clusters nodes at both ends of the log interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_inner: f64,
    pub r_outer: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub stretching: f64,
}

impl GridSpec {
    pub fn new(r_outer: f64, n_r: usize, n_theta: usize) -> Self {
        Self {
            r_inner: OBSTACLE_RADIUS,
            r_outer,
            n_r,
            n_theta,
            stretching: 0.5,
        }
    }

    pub fn with_stretching(mut self, gamma: f64) -> Self {
        self.stretching = gamma;
        self
    }

    /// Default mesh for a run up to `t_final` with cutoff radius `rho`: the
    /// outer radius is the smallest power of two above `8 max(ρ, sqrt(1+t))`.
    pub fn for_run(rho: f64, t_final: f64) -> Self {
        let needed = 8.0 * rho.max((1.0 + t_final).sqrt());
        Self::new(needed.log2().ceil().exp2(), 256, 64)
    }

    /// Minimum outer radius `8 max(ρ, sqrt(1 + t_final))`.
    pub fn required_outer(rho: f64, t_final: f64) -> f64 {
        8.0 * rho.max((1.0 + t_final).sqrt())
    }

    pub fn check_horizon(&self, rho: f64, t_final: f64) -> Result<()> {
        let need = Self::required_outer(rho, t_final);
        if self.r_outer < need * (1.0 - 1e-12) {
            return Err(invalid(
                "r_outer",
                format!("{} is below 8 max(rho, sqrt(1+t_final)) = {need}", self.r_outer),
            ));
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.r_inner != OBSTACLE_RADIUS {
            return Err(invalid("r_inner", "the obstacle radius is fixed to 1"));
        }
        if !(self.r_outer > 2.0 * self.r_inner) || !self.r_outer.is_finite() {
            return Err(invalid("r_outer", format!("{} must exceed 2", self.r_outer)));
        }
        if self.n_r < 16 {
            return Err(invalid("n_r", "at least 16 radial nodes are required"));
        }
        if !self.n_theta.is_power_of_two() || self.n_theta < 8 {
            return Err(invalid(
                "n_theta",
                format!("{} is not a power of two >= 8", self.n_theta),
            ));
        }
        if !(0.0..1.0).contains(&self.stretching) {
            return Err(invalid("stretching", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Mesh with its metric terms. Field values are stored radial-major:
/// node `(i, j)` at index `i * n_theta + j`.
#[derive(Debug, Clone)]
pub struct PolarMesh {
    pub spec: GridSpec,
    /// Log-radial coordinate `s_i = ln r_i`.
    pub s: Vec<f64>,
    pub r: Vec<f64>,
    /// Finite-volume area of the ring cell around each radial node, per angular node.
    pub cell_area: Vec<f64>,
    pub d_theta: f64,
}

/// Builds the mesh, rejecting specs that cannot resolve the wall layer.
pub fn build_grid(spec: GridSpec) -> Result<PolarMesh> {
    spec.validate()?;
    let n = spec.n_r;
    let big_s = (spec.r_outer / spec.r_inner).ln();
    let gamma = spec.stretching;
    let s: Vec<f64> = (0..n)
        .map(|i| {
            let xi = i as f64 / (n - 1) as f64;
            if i == n - 1 {
                big_s
            } else {
                big_s * (xi - gamma * (PI * xi).sin() / PI)
            }
        })
        .collect();
    let r: Vec<f64> = s.iter().map(|&si| spec.r_inner * si.exp()).collect();
    let near_wall = r.iter().filter(|&&ri| ri - spec.r_inner <= 0.2).count();
    if near_wall < MIN_WALL_NODES {
        return Err(invalid(
            "n_r",
            format!("only {near_wall} nodes within 0.2 of the wall, need {MIN_WALL_NODES}"),
        ));
    }
    let d_theta = 2.0 * PI / spec.n_theta as f64;
    let face = |i: usize| -> f64 {
        // face between node i-1 and i
        if i == 0 {
            spec.r_inner
        } else if i == n {
            spec.r_outer
        } else {
            (0.5 * (s[i - 1] + s[i])).exp() * spec.r_inner
        }
    };
    let cell_area = (0..n)
        .map(|i| 0.5 * (face(i + 1).powi(2) - face(i).powi(2)) * d_theta)
        .collect();
    Ok(PolarMesh {
        spec,
        s,
        r,
        cell_area,
        d_theta,
    })
}

impl PolarMesh {
    pub fn n_r(&self) -> usize {
        self.spec.n_r
    }

    pub fn n_theta(&self) -> usize {
        self.spec.n_theta
    }

    pub fn len(&self) -> usize {
        self.spec.n_r * self.spec.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.d_theta
    }

    pub fn point(&self, i: usize, j: usize) -> Point2 {
        Point2::polar(self.r[i], self.theta(j))
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(Point2) -> f64) -> Vec<f64> {
        let nt = self.n_theta();
        (0..self.len()).map(|idx| f(self.point(idx / nt, idx % nt))).collect()
    }

    /// Sum of the cell areas; equals `π(R² - 1)` up to rounding.
    pub fn total_area(&self) -> f64 {
        self.cell_area.iter().sum::<f64>() * self.n_theta() as f64
    }

    /// `∫ f dA` over the annulus with the cell areas as weights.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        let nt = self.n_theta();
        f.chunks(nt)
            .zip(&self.cell_area)
            .map(|(ring, a)| a * ring.iter().sum::<f64>())
            .sum()
    }

    /// `(∫ |f|^p dA)^{1/p}`; `p = ∞` gives the maximum.
    pub fn lp_norm(&self, f: &[f64], p: f64) -> f64 {
        if p.is_infinite() {
            return f.iter().fold(0.0, |m, v| m.max(v.abs()));
        }
        let nt = self.n_theta();
        let sum: f64 = f
            .chunks(nt)
            .zip(&self.cell_area)
            .map(|(ring, a)| a * ring.iter().map(|v| v.abs().powf(p)).sum::<f64>())
            .sum();
        sum.powf(1.0 / p)
    }

    /// Largest log-radial spacing.
    pub fn max_log_spacing(&self) -> f64 {
        self.s.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Local radial spacing at node `i` (smaller of the two neighbours).
    pub(crate) fn radial_spacing(&self, i: usize) -> f64 {
        let n = self.n_r();
        let lo = if i > 0 {
            self.r[i] - self.r[i - 1]
        } else {
            f64::INFINITY
        };
        let hi = if i + 1 < n {
            self.r[i + 1] - self.r[i]
        } else {
            f64::INFINITY
        };
        lo.min(hi)
    }

    /// Coefficients `(a, b, c)` of the conservative three-point second
    /// derivative in `s` at interior node `i`: `f_ss ≈ a f_{i-1} + b f_i + c f_{i+1}`.
    pub(crate) fn d2_coeffs(&self, i: usize) -> (f64, f64, f64) {
        let hm = self.s[i] - self.s[i - 1];
        let hp = self.s[i + 1] - self.s[i];
        let mid = 0.5 * (hm + hp);
        let a = 1.0 / (hm * mid);
        let c = 1.0 / (hp * mid);
        (a, -(a + c), c)
    }

    /// First derivative in `s` at node `i`: central three-point inside,
    /// second-order one-sided at both ends.
    pub(crate) fn d1_coeffs(&self, i: usize) -> ([usize; 3], [f64; 3]) {
        let n = self.n_r();
        let s = &self.s;
        if i == 0 {
            let (h1, h2) = (s[1] - s[0], s[2] - s[1]);
            return ([0, 1, 2], one_sided(h1, h2));
        }
        if i == n - 1 {
            let (h1, h2) = (s[n - 1] - s[n - 2], s[n - 2] - s[n - 3]);
            let [a, b, c] = one_sided(h1, h2);
            return ([n - 1, n - 2, n - 3], [-a, -b, -c]);
        }
        let hm = s[i] - s[i - 1];
        let hp = s[i + 1] - s[i];
        let den = hm * hp * (hm + hp);
        (
            [i - 1, i, i + 1],
            [-hp * hp / den, (hp * hp - hm * hm) / den, hm * hm / den],
        )
    }

    /// Applies `d/ds` to a single radial profile.
    pub(crate) fn ds<T>(&self, f: &[T]) -> Vec<T>
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        (0..self.n_r())
            .map(|i| {
                let (idx, c) = self.d1_coeffs(i);
                f[idx[0]] * c[0] + f[idx[1]] * c[1] + f[idx[2]] * c[2]
            })
            .collect()
    }

    /// Sponge mask: 1 inside `R - width`, smooth ramp to 0 at `R`.
    pub fn sponge_mask(&self, width: f64) -> Vec<f64> {
        let r_out = self.spec.r_outer;
        self.r
            .iter()
            .map(|&r| {
                if width <= 0.0 {
                    return 1.0;
                }
                1.0 - smooth_step((r - (r_out - width)) / width)
            })
            .collect()
    }
}

/// Weights of the second-order one-sided derivative at a boundary node from
/// the spacings `h1`, `h2` of the next two intervals.
fn one_sided(h1: f64, h2: f64) -> [f64; 3] {
    [
        -(2.0 * h1 + h2) / (h1 * (h1 + h2)),
        (h1 + h2) / (h1 * h2),
        -h1 / (h2 * (h1 + h2)),
    ]
}

/// `C^∞` step from 0 (x <= 0) to 1 (x >= 1).
fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let f = |y: f64| (-1.0 / y).exp();
    f(x) / (f(x) + f(1.0 - x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn radial_nodes_are_monotone_between_the_radii() {
        let m = build_grid(GridSpec::new(64.0, 128, 32)).unwrap();
        assert_eq!(m.r[0], 1.0);
        assert_relative_eq!(m.r[127], 64.0, max_relative = 1e-14);
        assert!(m.r.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn cell_areas_sum_to_annulus_area() {
        for (n_r, gamma) in [(256, 0.0), (128, 0.5)] {
            let m = build_grid(GridSpec::new(64.0, n_r, 32).with_stretching(gamma)).unwrap();
            let exact = PI * (64.0f64.powi(2) - 1.0);
            assert!((m.total_area() - exact).abs() / exact < 1e-4);
        }
    }

    #[test]
    fn wall_layer_is_resolved() {
        let m = build_grid(GridSpec::new(64.0, 128, 32)).unwrap();
        assert!(m.r.iter().filter(|&&r| r <= 1.2).count() >= MIN_WALL_NODES);
        let coarse = GridSpec::new(64.0, 40, 32);
        assert!(build_grid(coarse).is_err());
    }

    #[test]
    fn refinement_halves_log_spacing() {
        let a = build_grid(GridSpec::new(64.0, 128, 32)).unwrap();
        let b = build_grid(GridSpec::new(64.0, 255, 32)).unwrap();
        assert_relative_eq!(b.max_log_spacing() / a.max_log_spacing(), 0.5, max_relative = 1e-3);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(build_grid(GridSpec::new(64.0, 128, 48)).is_err());
        assert!(build_grid(GridSpec::new(1.5, 128, 32)).is_err());
        assert!(GridSpec::new(32.0, 128, 32).check_horizon(2.0, 200.0).is_err());
        assert!(GridSpec::for_run(2.0, 200.0).check_horizon(2.0, 200.0).is_ok());
    }

    #[test]
    fn derivative_stencils_are_second_order() {
        let err = |n: usize| {
            let m = build_grid(GridSpec::new(16.0, n, 8)).unwrap();
            let f: Vec<f64> = m.s.iter().map(|s| (0.7 * s).sin()).collect();
            let d = m.ds(&f);
            let mut e: f64 = 0.0;
            for i in 0..n {
                e = e.max((d[i] - 0.7 * (0.7 * m.s[i]).cos()).abs());
                if i > 0 && i + 1 < n {
                    let (a, b, c) = m.d2_coeffs(i);
                    let dd = a * f[i - 1] + b * f[i] + c * f[i + 1];
                    e = e.max((dd + 0.49 * (0.7 * m.s[i]).sin()).abs());
                }
            }
            e
        };
        let ratio = err(101) / err(201);
        assert!(ratio > 3.5, "ratio {ratio}");
    }

    #[test]
    fn sponge_mask_ramps_to_zero() {
        let m = build_grid(GridSpec::new(64.0, 128, 32)).unwrap();
        let mask = m.sponge_mask(6.4);
        assert_eq!(mask[0], 1.0);
        assert_eq!(*mask.last().unwrap(), 0.0);
        assert!(mask.windows(2).all(|w| w[1] <= w[0]));
    }
}
