//! Planar Biot-Savart law on a Cartesian vorticity patch and the splitting
//! of initial vorticity into a circulation part `α u^χ` and a perturbation.

use crate::error::{invalid, Error, Result};
use crate::fields::{truncated_vorticity, OseenContext};
use crate::geometry::{Point2, Vec2};
use crate::quadrature::{extrapolated_tail, power_law_tail, NormResult, PolarSample, QuadGrid, QuadSpec, TailPolicy};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Half-width, in cells, of the block around an evaluation point that is
/// integrated with the singularity subtracted.
const NEAR_CELLS: i64 = 2;
/// Sub-cells per direction inside the near block.
const NEAR_SUBDIV: usize = 4;
/// Relative tail mass accepted by [`total_circulation`].
pub const CIRCULATION_TAIL_TOLERANCE: f64 = 1e-6;
/// Integral, relative to the vorticity scale, below which the residual is
/// projected to zero mean; larger defects are reported as errors.
pub const ZERO_MEAN_THRESHOLD: f64 = 1e-6;

/// Cell-centred vorticity on a rectangular patch; zero outside the patch
/// and inside the obstacle disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VorticitySample {
    /// Lower-left corner of cell `(0, 0)`.
    pub origin: Point2,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `values[j * nx + i]` at the centre of cell `(i, j)`.
    pub values: Vec<f64>,
    pub obstacle_radius: Option<f64>,
}

impl VorticitySample {
    pub fn new(
        origin: Point2,
        h: f64,
        nx: usize,
        ny: usize,
        mut values: Vec<f64>,
        obstacle_radius: Option<f64>,
    ) -> Result<Self> {
        if !(h > 0.0) {
            return Err(invalid("h", "cell size must be positive"));
        }
        if nx == 0 || ny == 0 || values.len() != nx * ny {
            return Err(invalid(
                "values",
                format!("expected {nx}x{ny} values, got {}", values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("values", "vorticity must be finite"));
        }
        let mut s = Self {
            origin,
            h,
            nx,
            ny,
            values: Vec::new(),
            obstacle_radius,
        };
        if let Some(r0) = obstacle_radius {
            for j in 0..ny {
                for i in 0..nx {
                    if s.cell_center(i, j).norm() <= r0 {
                        values[j * nx + i] = 0.0;
                    }
                }
            }
        }
        s.values = values;
        Ok(s)
    }

    /// Samples `f` on the square `[-half_width, half_width]²` with cell size `h`.
    pub fn from_fn(
        f: impl Fn(Point2) -> f64 + Sync,
        half_width: f64,
        h: f64,
        obstacle_radius: Option<f64>,
    ) -> Result<Self> {
        if !(half_width > 0.0) || !(h > 0.0) {
            return Err(invalid("half_width", "patch and cell size must be positive"));
        }
        let n = (2.0 * half_width / h).round() as usize;
        let origin = Point2::new(-half_width, -half_width);
        let values = (0..n * n)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k % n, k / n);
                f(Point2::new(
                    origin.x1 + (i as f64 + 0.5) * h,
                    origin.x2 + (j as f64 + 0.5) * h,
                ))
            })
            .collect();
        Self::new(origin, h, n, n, values, obstacle_radius)
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Point2 {
        Point2::new(
            self.origin.x1 + (i as f64 + 0.5) * self.h,
            self.origin.x2 + (j as f64 + 0.5) * self.h,
        )
    }

    fn get(&self, i: i64, j: i64) -> f64 {
        if i < 0 || j < 0 || i >= self.nx as i64 || j >= self.ny as i64 {
            0.0
        } else {
            self.values[j as usize * self.nx + i as usize]
        }
    }

    /// Bilinear interpolation of the cell-centre values.
    pub fn value_at(&self, x: Point2) -> f64 {
        let u = (x.x1 - self.origin.x1) / self.h - 0.5;
        let v = (x.x2 - self.origin.x2) / self.h - 0.5;
        let (i0, j0) = (u.floor(), v.floor());
        let (fu, fv) = (u - i0, v - j0);
        let (i0, j0) = (i0 as i64, j0 as i64);
        (1.0 - fu) * (1.0 - fv) * self.get(i0, j0)
            + fu * (1.0 - fv) * self.get(i0 + 1, j0)
            + (1.0 - fu) * fv * self.get(i0, j0 + 1)
            + fu * fv * self.get(i0 + 1, j0 + 1)
    }

    /// Largest `|x|` over cells with non-negligible vorticity.
    pub fn support_radius(&self) -> f64 {
        let max = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut r = 0.0f64;
        for j in 0..self.ny {
            for i in 0..self.nx {
                if self.values[j * self.nx + i].abs() > 1e-14 * max {
                    r = r.max(self.cell_center(i, j).norm() + 0.5 * self.h * 2f64.sqrt());
                }
            }
        }
        r
    }

    /// `a·self + b·other` on the same patch.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.nx != other.nx || self.ny != other.ny || self.h != other.h || self.origin != other.origin {
            return Err(invalid("other", "patches differ"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Self::new(self.origin, self.h, self.nx, self.ny, values, self.obstacle_radius)
    }

    fn cell_area(&self) -> f64 {
        self.h * self.h
    }

    /// Dipole moment `∫ y w(y) dy`.
    pub fn dipole_moment(&self) -> Vec2 {
        let mut d = Vec2::ZERO;
        for j in 0..self.ny {
            for i in 0..self.nx {
                d = d + self.cell_center(i, j) * (self.values[j * self.nx + i] * self.cell_area());
            }
        }
        d
    }

    fn abs_mass(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.cell_area()
    }

    /// `∫ |w|` over the two outermost rings of cells.
    fn boundary_mass(&self) -> f64 {
        let mut s = 0.0;
        for j in 0..self.ny {
            for i in 0..self.nx {
                if i < 2 || j < 2 || i + 2 >= self.nx || j + 2 >= self.ny {
                    s += self.values[j * self.nx + i].abs();
                }
            }
        }
        s * self.cell_area()
    }
}

/// Plane integral of the vorticity by the cell-midpoint rule.
///
/// The mass in the outermost cell rings stands in for the truncated tail and
/// is compared against `∫|w|`, so that zero-mean data can be accepted.
pub fn total_circulation(w: &VorticitySample) -> Result<f64> {
    let tail = w.boundary_mass();
    let scale = w.abs_mass();
    if tail > CIRCULATION_TAIL_TOLERANCE * scale {
        return Err(Error::TailTooLarge {
            tail,
            tolerance: CIRCULATION_TAIL_TOLERANCE * scale,
        });
    }
    Ok(w.values.iter().sum::<f64>() * w.cell_area())
}

/// `∫∫ z₁ / |z|² dz` antiderivative in both variables.
fn rect_antiderivative(a: f64, b: f64) -> f64 {
    let r2 = a * a + b * b;
    if r2 == 0.0 {
        return 0.0;
    }
    let log_term = if b == 0.0 { 0.0 } else { 0.5 * b * r2.ln() };
    let atan_term = if a == 0.0 { 0.0 } else { a * (b / a).atan() };
    log_term - b + atan_term
}

fn rect_moment(z1: (f64, f64), z2: (f64, f64)) -> f64 {
    rect_antiderivative(z1.1, z2.1) - rect_antiderivative(z1.0, z2.1) - rect_antiderivative(z1.1, z2.0)
        + rect_antiderivative(z1.0, z2.0)
}

/// `∫_B K(x - y) dy` for the rectangle `B = [y1a, y1b] × [y2a, y2b]`, exactly.
fn kernel_rectangle_integral(x: Point2, y1: (f64, f64), y2: (f64, f64)) -> Vec2 {
    let z1 = (x.x1 - y1.1, x.x1 - y1.0);
    let z2 = (x.x2 - y2.1, x.x2 - y2.0);
    let i1 = rect_moment(z1, z2);
    let i2 = rect_moment(z2, z1);
    Vec2::new(-i2, i1) * (1.0 / (2.0 * PI))
}

/// Kernel `K(z) = z^⊥ / (2π|z|²)`.
fn kernel(z: Point2) -> Vec2 {
    let r2 = z.norm_sq();
    if r2 == 0.0 {
        return Vec2::ZERO;
    }
    z.perp() * (1.0 / (2.0 * PI * r2))
}

/// Biot-Savart velocity `(1/2π) ∫ (x-y)^⊥/|x-y|² w(y) dy`.
///
/// Cells away from `x` use the midpoint rule. On the block of cells around
/// `x` the integrand is split as `K(x-y)(w(y) - w(x)) + w(x) K(x-y)`; the
/// first part is bounded and integrated on sub-cells with bilinear `w`, the
/// second is integrated exactly.
pub fn bs_velocity(w: &VorticitySample, x: Point2) -> Vec2 {
    let h = w.h;
    // cells whose centres lie within NEAR_CELLS + ½ of x in each direction,
    // so that the block is symmetric about x
    let u = (x.x1 - w.origin.x1) / h - 0.5;
    let v = (x.x2 - w.origin.x2) / h - 0.5;
    let reach = NEAR_CELLS as f64 + 0.5;
    let i_lo = ((u - reach).ceil() as i64).max(0);
    let i_hi = ((u + reach).floor() as i64).min(w.nx as i64 - 1);
    let j_lo = ((v - reach).ceil() as i64).max(0);
    let j_hi = ((v + reach).floor() as i64).min(w.ny as i64 - 1);
    let has_near = i_lo <= i_hi && j_lo <= j_hi;
    let area = w.cell_area();

    let mut far = Vec2::ZERO;
    for j in 0..w.ny {
        let row = &w.values[j * w.nx..(j + 1) * w.nx];
        let yj = w.origin.x2 + (j as f64 + 0.5) * h;
        let in_near_row = has_near && (j as i64) >= j_lo && (j as i64) <= j_hi;
        for (i, &val) in row.iter().enumerate() {
            if val == 0.0 || (in_near_row && (i as i64) >= i_lo && (i as i64) <= i_hi) {
                continue;
            }
            let yi = w.origin.x1 + (i as f64 + 0.5) * h;
            let z = Point2::new(x.x1 - yi, x.x2 - yj);
            far = far + z.perp() * (val * area / (2.0 * PI * z.norm_sq()));
        }
    }
    if !has_near {
        return far;
    }

    let wx = w.value_at(x);
    let y1 = (w.origin.x1 + i_lo as f64 * h, w.origin.x1 + (i_hi + 1) as f64 * h);
    let y2 = (w.origin.x2 + j_lo as f64 * h, w.origin.x2 + (j_hi + 1) as f64 * h);
    let local = kernel_rectangle_integral(x, y1, y2) * wx;

    let sub = h / NEAR_SUBDIV as f64;
    let sub_area = sub * sub;
    let mut near = Vec2::ZERO;
    for j in j_lo..=j_hi {
        for i in i_lo..=i_hi {
            for b in 0..NEAR_SUBDIV {
                for a in 0..NEAR_SUBDIV {
                    let y = Point2::new(
                        w.origin.x1 + i as f64 * h + (a as f64 + 0.5) * sub,
                        w.origin.x2 + j as f64 * h + (b as f64 + 0.5) * sub,
                    );
                    near = near + kernel(x - y) * ((w.value_at(y) - wx) * sub_area);
                }
            }
        }
    }
    far + local + near
}

/// [`bs_velocity`] at many points, evaluated in parallel, in input order.
pub fn bs_velocity_many(w: &VorticitySample, points: &[Point2]) -> Vec<Vec2> {
    points.par_iter().map(|&x| bs_velocity(w, x)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeOptions {
    /// Exponents `q` for which `‖v₀‖_{L^q}` is reported.
    pub q_values: Vec<f64>,
    /// Weight exponent of the admissibility check `∫(1+|x|²)^m |w₀|² < ∞`;
    /// must exceed `2/q` for every requested `q`.
    pub m: f64,
    /// `v₀` is sampled up to this multiple of the residual support radius.
    pub sample_radius_factor: f64,
    pub n_theta: usize,
    pub points_per_panel: usize,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            q_values: vec![1.2, 1.5, 1.9],
            m: 2.0,
            sample_radius_factor: 8.0,
            n_theta: 64,
            points_per_panel: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub alpha: f64,
    pub rho: f64,
    /// `v₀` at the nodes of a polar quadrature grid.
    pub v0: PolarSample<Vec2>,
    /// `(q, ‖v₀‖_{L^q})`, with the dipole far-field tail included.
    pub q_norms: Vec<(f64, NormResult)>,
    pub l2_norm: NormResult,
    /// Plane integral of `w₀ - α ω^χ(·,0)` after the zero-mean projection.
    pub residual_integral: f64,
    /// Integral removed by the zero-mean projection.
    pub mean_correction: f64,
    pub dipole_moment: Vec2,
    pub residual: VorticitySample,
}

/// Weighted `L²(m)` norm of the sample with a check that the outermost
/// cell rings carry a negligible share.
fn check_weighted_vorticity(w: &VorticitySample, m: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut edge = 0.0;
    for j in 0..w.ny {
        for i in 0..w.nx {
            let v = w.values[j * w.nx + i];
            let c = (1.0 + w.cell_center(i, j).norm_sq()).powf(m) * v * v;
            total += c;
            if i < 2 || j < 2 || i + 2 >= w.nx || j + 2 >= w.ny {
                edge += c;
            }
        }
    }
    if edge > CIRCULATION_TAIL_TOLERANCE * total {
        return Err(Error::UnboundedWeightedNorm {
            m,
            reason: format!("edge of the sample carries {:.3e} of the weighted mass", edge / total),
        });
    }
    Ok((total * w.cell_area()).sqrt())
}

/// Splits `w₀` as `α ω^χ(·,0) + w` with `α = ∫w₀`, and returns
/// `v₀ = BS(w)`, which equals `BS(w₀) - α u^χ(·,0)`.
pub fn decompose_initial_data(w0: &VorticitySample, rho: f64, opts: &DecomposeOptions) -> Result<Decomposition> {
    let ctx = OseenContext::unit(rho, 0.0)?;
    for &q in &opts.q_values {
        if !(q >= 1.0) {
            return Err(invalid("q", format!("exponent must be >= 1, got {q}")));
        }
        if opts.m <= 2.0 / q {
            return Err(invalid("m", format!("need m > 2/q = {} for q = {q}", 2.0 / q)));
        }
    }
    check_weighted_vorticity(w0, opts.m)?;
    let alpha = total_circulation(w0)?;

    let chi_part = VorticitySample::new(
        w0.origin,
        w0.h,
        w0.nx,
        w0.ny,
        (0..w0.nx * w0.ny)
            .map(|k| truncated_vorticity(w0.cell_center(k % w0.nx, k / w0.nx), &ctx))
            .collect(),
        None,
    )?;
    let mut residual = w0.combine(1.0, &chi_part, -alpha)?;
    residual.obstacle_radius = None;
    let integral = residual.values.iter().sum::<f64>() * residual.cell_area();
    let scale = residual.abs_mass().max(alpha.abs()).max(1.0);
    let mut correction = 0.0;
    if integral.abs() > ZERO_MEAN_THRESHOLD * scale {
        return Err(Error::NonzeroMean { mean: integral });
    }
    if integral != 0.0 {
        let gauss: Vec<f64> = (0..residual.values.len())
            .map(|k| (-residual.cell_center(k % residual.nx, k / residual.nx).norm_sq() / 2.0).exp())
            .collect();
        let norm = gauss.iter().sum::<f64>() * residual.cell_area();
        for (v, g) in residual.values.iter_mut().zip(&gauss) {
            *v -= integral * g / norm;
        }
        correction = integral;
    }
    let residual_integral = residual.values.iter().sum::<f64>() * residual.cell_area();

    let support = residual.support_radius().max(2.0 * rho);
    let r_cut = opts.sample_radius_factor * support;
    let spec = QuadSpec::geometric(0.0, r_cut, &[rho, 2.0 * rho, support], TailPolicy::Extrapolate)
        .with_points_per_panel(opts.points_per_panel)
        .with_n_theta(opts.n_theta)?;
    let grid = QuadGrid::from_spec(&spec);
    let v0 = grid.sample(|x| bs_velocity(&residual, x));

    // zero total vorticity: v₀ ≈ ∇^⊥(-d·x / 2π|x|²), of magnitude |d| / 2π|x|²
    let dipole = residual.dipole_moment();
    let amplitude = dipole.norm() / (2.0 * PI);
    let lq = |q: f64| -> Result<NormResult> {
        let integral = v0.power_integral(q);
        let tail = power_law_tail(amplitude, 2.0, q, 1.0, 0.0, r_cut)?;
        let base = integral.powf(1.0 / q);
        let value = (integral + tail).powf(1.0 / q);
        Ok(NormResult {
            value,
            tail_bound: value - base,
            p: q,
        })
    };
    let q_norms = opts
        .q_values
        .iter()
        .map(|&q| Ok((q, lq(q)?)))
        .collect::<Result<Vec<_>>>()?;
    let l2_norm = lq(2.0)?;
    Ok(Decomposition {
        alpha,
        rho,
        v0,
        q_norms,
        l2_norm,
        residual_integral,
        mean_correction: correction,
        dipole_moment: dipole,
        residual,
    })
}

/// `(∫ (1+|x|²)^{m r/2 - 1} |v|^r)^{1/r}` on a polar sample, with the
/// region beyond the sample radius estimated from the outer rings.
pub fn weighted_decay_check(v: &PolarSample<Vec2>, m: f64, r: f64) -> Result<NormResult> {
    if !(r > 2.0) {
        return Err(invalid("r", format!("exponent must exceed 2, got {r}")));
    }
    if !(m > 0.0) {
        return Err(invalid("m", "weight exponent must be positive"));
    }
    let e = m * r / 2.0 - 1.0;
    let weight = |s: f64| (1.0 + s * s).powf(e);
    let integral = v.weighted_power_integral(r, weight);
    let radii = &v.grid.radii;
    let n = radii.len();
    if n < 2 {
        return Err(Error::Degenerate("sample needs at least two rings".into()));
    }
    let outer = v.grid.r_cut;
    let i1 = radii
        .iter()
        .position(|&x| x >= 0.75 * outer)
        .unwrap_or(n - 2)
        .min(n - 2);
    let d1 = v.ring_density(i1, r) * weight(radii[i1]);
    let d2 = v.ring_density(n - 1, r) * weight(radii[n - 1]);
    let tail = extrapolated_tail(radii[i1], d1, radii[n - 1], d2).map_err(|err| Error::UnboundedWeightedNorm {
        m,
        reason: err.to_string(),
    })?;
    let base = integral.powf(1.0 / r);
    let value = (integral + tail).powf(1.0 / r);
    Ok(NormResult {
        value,
        tail_bound: value - base,
        p: r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{oseen_velocity, oseen_vorticity, truncated_velocity};

    fn bump(x: Point2, c: Point2, a: f64) -> f64 {
        let s = (x - c).norm_sq() / (a * a);
        if s >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - s)).exp()
        }
    }

    /// `∂₁` of a compact bump: zero mean, nonzero dipole.
    fn bump_dx(x: Point2, c: Point2, a: f64) -> f64 {
        let y = x - c;
        let s = y.norm_sq() / (a * a);
        if s >= 1.0 {
            0.0
        } else {
            let d = 1.0 - s;
            (-1.0 / d).exp() * (-2.0 * y.x1 / (a * a)) / (d * d)
        }
    }

    fn xi_patch(h: f64) -> VorticitySample {
        VorticitySample::from_fn(|x| oseen_vorticity(x, 0.0), 12.0, h, None).unwrap()
    }

    #[test]
    fn rectangle_integral_matches_subdivision() {
        let x = Point2::new(0.13, -0.07);
        let exact = kernel_rectangle_integral(x, (-0.4, 0.5), (-0.3, 0.6));
        let n = 2000;
        let mut s = Vec2::ZERO;
        // annulus around x is excluded by symmetry, only the outside matters
        for j in 0..n {
            for i in 0..n {
                let y = Point2::new(
                    -0.4 + (i as f64 + 0.5) * 0.9 / n as f64,
                    -0.3 + (j as f64 + 0.5) * 0.9 / n as f64,
                );
                s = s + kernel(x - y) * (0.81 / (n * n) as f64);
            }
        }
        assert!((exact - s).norm() < 1e-3 * exact.norm(), "{exact:?} vs {s:?}");
    }

    #[test]
    fn circulation_of_samples() {
        let w = xi_patch(0.1);
        assert!((total_circulation(&w).unwrap() - 1.0).abs() < 1e-6);
        let w25 = w.combine(2.5, &w, 0.0).unwrap();
        assert!((total_circulation(&w25).unwrap() - 2.5).abs() < 1e-6);
        let d = VorticitySample::from_fn(|x| bump_dx(x, Point2::new(0.5, 0.2), 2.0), 6.0, 0.05, None).unwrap();
        assert!(total_circulation(&d).unwrap().abs() < 1e-8);
        let wide = VorticitySample::from_fn(|x| oseen_vorticity(x, 0.0), 3.0, 0.1, None).unwrap();
        assert!(matches!(total_circulation(&wide), Err(Error::TailTooLarge { .. })));
    }

    #[test]
    fn reproduces_oseen_velocity() {
        let w = xi_patch(0.1);
        let mut worst = 0.0f64;
        for k in 0..100 {
            let r = 0.3 + 5.7 * (k as f64 / 99.0);
            let x = Point2::polar(r, 0.37 * k as f64);
            let exact = oseen_velocity(x, 0.0);
            worst = worst.max((bs_velocity(&w, x) - exact).norm() / exact.norm());
        }
        assert!(worst < 1e-3, "worst relative error {worst}");
        let far = bs_velocity(&w, Point2::new(0.0, 50.0));
        assert!((far.norm() - 1.0 / (2.0 * PI * 50.0)).abs() < 1e-4);
        assert!(bs_velocity(&w, Point2::ZERO).norm() < 1e-12);
    }

    #[test]
    fn linear_in_vorticity() {
        let w1 = VorticitySample::from_fn(|x| bump(x, Point2::new(0.5, 0.0), 1.5), 3.0, 0.1, None).unwrap();
        let w2 = VorticitySample::from_fn(|x| bump_dx(x, Point2::new(-0.5, 0.3), 1.2), 3.0, 0.1, None).unwrap();
        let combo = w1.combine(2.0, &w2, -3.0).unwrap();
        for x in [Point2::new(0.33, 0.1), Point2::new(4.0, -1.0), Point2::new(-1.21, 0.77)] {
            let lhs = bs_velocity(&combo, x);
            let rhs = bs_velocity(&w1, x) * 2.0 - bs_velocity(&w2, x) * 3.0;
            assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
        }
    }

    #[test]
    fn divergence_and_curl_on_refinement() {
        let f = |x: Point2| bump(x, Point2::new(0.2, -0.1), 1.8);
        let x = Point2::new(0.4, 0.3);
        let errs: Vec<(f64, f64)> = [0.1, 0.05]
            .iter()
            .map(|&h| {
                let w = VorticitySample::from_fn(f, 2.5, h, None).unwrap();
                let d = 0.05;
                let e1 = Point2::new(d, 0.0);
                let e2 = Point2::new(0.0, d);
                let (a, b) = (bs_velocity(&w, x + e1), bs_velocity(&w, x - e1));
                let (c, e) = (bs_velocity(&w, x + e2), bs_velocity(&w, x - e2));
                let div = (a.x1 - b.x1 + c.x2 - e.x2) / (2.0 * d);
                let curl = (a.x2 - b.x2 - c.x1 + e.x1) / (2.0 * d);
                // the finite-difference curl of the exact field is f + O(d²)
                let lap = (f(x + e1) + f(x - e1) + f(x + e2) + f(x - e2) - 4.0 * f(x)) / (d * d);
                (div.abs(), (curl - (f(x) + d * d / 6.0 * lap)).abs())
            })
            .collect();
        assert!(errs[1].0 < 1e-3 && errs[1].1 < 1e-3, "{errs:?}");
        assert!(errs[1].1 < errs[0].1 || errs[1].1 < 1e-6, "{errs:?}");
    }

    #[test]
    fn decompose_pure_oseen() {
        let w = xi_patch(0.1);
        let opts = DecomposeOptions {
            n_theta: 32,
            ..DecomposeOptions::default()
        };
        let d = decompose_initial_data(&w, 2.0, &opts).unwrap();
        assert!((d.alpha - 1.0).abs() < 1e-6);
        assert!(d.residual_integral.abs() < 1e-6);
        // v₀ = Θ₀(1-χ) vanishes outside |x| ≤ 2ρ
        for (k, v) in d.v0.values.iter().enumerate() {
            let x = d.v0.grid.point(k);
            if x.norm() > 4.5 {
                assert!(v.norm() < 1e-4, "{x:?}: {v:?}");
            }
            if k % 97 == 0 {
                let expected = oseen_velocity(x, 0.0) - truncated_velocity(x, &OseenContext::unit(2.0, 0.0).unwrap());
                assert!((*v - expected).norm() < 2e-3 * oseen_velocity(x, 0.0).norm().max(1e-3));
            }
        }
        assert!(d.l2_norm.value.is_finite());
    }

    #[test]
    fn decompose_zero_mean_data() {
        let c = Point2::new(0.3, -0.2);
        let w = VorticitySample::from_fn(|x| bump_dx(x, c, 1.5), 3.0, 0.04, None).unwrap();
        let opts = DecomposeOptions {
            n_theta: 32,
            ..DecomposeOptions::default()
        };
        let d = decompose_initial_data(&w, 1.0, &opts).unwrap();
        assert!(d.alpha.abs() < 1e-6, "alpha {} corr {}", d.alpha, d.mean_correction);
        assert!(d.residual_integral.abs() < 1e-12);
        for (_, n) in &d.q_norms {
            assert!(n.value.is_finite() && n.value > 0.0);
        }
        // far field decays like |x|^-2 with amplitude |d| / 2π
        let amp = d.dipole_moment.norm() / (2.0 * PI);
        let n = d.v0.grid.radii.len();
        let r = d.v0.grid.radii[n - 1];
        let v = d.v0.values[(n - 1) * d.v0.grid.n_theta].norm();
        assert!((v * r * r / amp - 1.0).abs() < 0.05, "{} vs {amp}", v * r * r);
        let check = weighted_decay_check(&d.v0, 1.5, 4.0).unwrap();
        assert!(check.value.is_finite());
        let scaled = PolarSample {
            grid: d.v0.grid.clone(),
            values: d.v0.values.iter().map(|v| *v * 3.0).collect(),
        };
        let s = weighted_decay_check(&scaled, 1.5, 4.0).unwrap();
        assert!((s.value - 3.0 * check.value).abs() < 1e-10 * s.value);
    }

    #[test]
    fn decomposition_is_consistent_with_direct_sum() {
        let c = Point2::new(3.0, 0.5);
        let w = VorticitySample::from_fn(|x| oseen_vorticity(x, 0.0) + bump_dx(x, c, 1.5), 12.0, 0.1, None).unwrap();
        let opts = DecomposeOptions {
            n_theta: 16,
            points_per_panel: 8,
            ..DecomposeOptions::default()
        };
        let d = decompose_initial_data(&w, 2.0, &opts).unwrap();
        assert!((d.alpha - 1.0).abs() < 1e-4);
        let ctx = OseenContext::unit(2.0, 0.0).unwrap();
        for k in (0..d.v0.values.len()).step_by(53) {
            let x = d.v0.grid.point(k);
            let full = bs_velocity(&w, x);
            let split = truncated_velocity(x, &ctx) * d.alpha + d.v0.values[k];
            assert!((full - split).norm() < 1e-3 * full.norm().max(1e-2), "{x:?}");
        }
    }

    #[test]
    fn weighted_check_rejects_circulating_field() {
        let spec = QuadSpec::geometric(0.0, 64.0, &[], TailPolicy::Extrapolate);
        let grid = QuadGrid::from_spec(&spec);
        let theta = grid.sample(|x| oseen_velocity(x, 0.0));
        assert!(matches!(
            weighted_decay_check(&theta, 1.5, 4.0),
            Err(Error::UnboundedWeightedNorm { .. })
        ));
    }

    #[test]
    fn decompose_rejects_bad_weights() {
        let w = xi_patch(0.2);
        let opts = DecomposeOptions {
            m: 1.0,
            ..DecomposeOptions::default()
        };
        assert!(decompose_initial_data(&w, 2.0, &opts).is_err());
        let slow = VorticitySample::from_fn(|x| 1.0 / (1.0 + x.norm_sq()), 10.0, 0.2, None).unwrap();
        assert!(matches!(
            decompose_initial_data(&slow, 2.0, &DecomposeOptions::default()),
            Err(Error::UnboundedWeightedNorm { .. })
        ));
    }
}
