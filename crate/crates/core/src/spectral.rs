//! Periodic Fourier surrogate for whole-plane computations: spectral
//! Biot-Savart, fractional powers of `-Δ` and the heat semigroup.
//!
//! Fields live on an `n × n` grid over the box `[-L/2, L/2)²` and must be
//! negligible near the box edge, so that periodic images do not matter.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::estimates::EstimateReport;
use crate::geometry::Point2;

/// Largest boundary-ring magnitude relative to the field maximum.
pub const EDGE_TOLERANCE: f64 = 1e-6;
/// Mean of a vorticity, relative to `∫|w|`, treated as zero.
pub const MEAN_TOLERANCE: f64 = 1e-10;
/// Relative spectral divergence treated as zero.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-8;
/// Box size as a multiple of the support radius.
pub const BOX_FACTOR: f64 = 16.0;
/// Dilation factors used by [`lemma51_sweep`].
pub const SWEEP_SCALES: [f64; 3] = [1.0, 2.0, 4.0];

/// Scalar (`components.len() == 1`) or vector (`== 2`) field on the periodic grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicField {
    pub box_size: f64,
    pub n: usize,
    /// Row-major, `values[j * n + i]` at `(-L/2 + i h, -L/2 + j h)`.
    pub components: Vec<Vec<f64>>,
}

impl PeriodicField {
    /// Checks the grid and that the field is negligible on the outer ring of nodes.
    pub fn new(box_size: f64, n: usize, components: Vec<Vec<f64>>) -> Result<Self> {
        if !(box_size > 0.0) || !box_size.is_finite() {
            return Err(invalid("box_size", "must be positive"));
        }
        if !n.is_power_of_two() || n < 8 {
            return Err(invalid("n", format!("{n} is not a power of two >= 8")));
        }
        if components.is_empty() || components.len() > 2 || components.iter().any(|c| c.len() != n * n) {
            return Err(invalid("components", "one or two arrays of n*n values expected"));
        }
        let field = Self {
            box_size,
            n,
            components,
        };
        let max = field.max_magnitude();
        let edge = field.edge_magnitude();
        if edge > EDGE_TOLERANCE * max {
            return Err(invalid(
                "components",
                format!("field reaches the box edge: {edge:.3e} vs max {max:.3e}"),
            ));
        }
        Ok(field)
    }

    pub fn h(&self) -> f64 {
        self.box_size / self.n as f64
    }

    pub fn point(&self, i: usize, j: usize) -> Point2 {
        let h = self.h();
        let half = 0.5 * self.box_size;
        Point2::new(-half + i as f64 * h, -half + j as f64 * h)
    }

    /// Samples a scalar function.
    pub fn scalar_from_fn(box_size: f64, n: usize, f: impl Fn(Point2) -> f64) -> Result<Self> {
        let tmp = Self {
            box_size,
            n,
            components: Vec::new(),
        };
        let values = (0..n * n).map(|k| f(tmp.point(k % n, k / n))).collect();
        Self::new(box_size, n, vec![values])
    }

    /// Velocity `(-∂₂ψ, ∂₁ψ)` of a sampled streamfunction, differentiated
    /// spectrally, hence divergence-free to rounding.
    pub fn velocity_from_streamfunction(box_size: f64, n: usize, psi: impl Fn(Point2) -> f64) -> Result<Self> {
        let s = Self::scalar_from_fn(box_size, n, psi)?;
        let spec = Spectrum::forward(&s.components[0], n);
        let mut u1 = spec.clone();
        let mut u2 = spec;
        for (k, (a, b)) in u1.data.iter_mut().zip(u2.data.iter_mut()).enumerate() {
            let (x1, x2) = s.wavevector(k);
            *a *= Complex64::new(0.0, -x2);
            *b *= Complex64::new(0.0, x1);
        }
        Self::new(box_size, n, vec![u1.inverse(), u2.inverse()])
    }

    fn max_magnitude(&self) -> f64 {
        (0..self.n * self.n).map(|k| self.magnitude(k)).fold(0.0, f64::max)
    }

    fn magnitude(&self, k: usize) -> f64 {
        self.components.iter().map(|c| c[k] * c[k]).sum::<f64>().sqrt()
    }

    fn edge_magnitude(&self) -> f64 {
        let n = self.n;
        (0..n)
            .flat_map(|i| [i, (n - 1) * n + i, i * n, i * n + n - 1])
            .map(|k| self.magnitude(k))
            .fold(0.0, f64::max)
    }

    /// Angular wavevector of flat index `k` (Nyquist bins map to zero).
    fn wavevector(&self, k: usize) -> (f64, f64) {
        let n = self.n;
        let freq = |m: usize| -> f64 {
            if 2 * m == n {
                0.0
            } else if m < n / 2 {
                m as f64
            } else {
                m as f64 - n as f64
            }
        };
        let scale = 2.0 * PI / self.box_size;
        (scale * freq(k % n), scale * freq(k / n))
    }

    /// `∫ |f|^p` by the rectangle rule (exact for trigonometric data at p = 2).
    pub fn lp_norm(&self, p: f64) -> f64 {
        let area = self.h() * self.h();
        let n2 = self.n * self.n;
        if p.is_infinite() {
            return self.max_magnitude();
        }
        ((0..n2).map(|k| self.magnitude(k).powf(p)).sum::<f64>() * area).powf(1.0 / p)
    }

    /// `‖f‖_{L²}` from the Fourier coefficients (Parseval).
    pub fn l2_norm_spectral(&self) -> f64 {
        let n2 = (self.n * self.n) as f64;
        let area = self.h() * self.h();
        let sum: f64 = self
            .components
            .iter()
            .map(|c| {
                Spectrum::forward(c, self.n)
                    .data
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        (sum / n2 * area).sqrt()
    }

    pub fn mean(&self) -> Vec<f64> {
        let n2 = (self.n * self.n) as f64;
        self.components.iter().map(|c| c.iter().sum::<f64>() / n2).collect()
    }

    fn require_scalar(&self) -> Result<&[f64]> {
        match self.components.as_slice() {
            [c] => Ok(c),
            _ => Err(invalid("w", "a scalar field is required")),
        }
    }

    fn require_vector(&self) -> Result<(&[f64], &[f64])> {
        match self.components.as_slice() {
            [a, b] => Ok((a, b)),
            _ => Err(invalid("v", "a vector field is required")),
        }
    }

    /// `∂₁v₂ - ∂₂v₁`, spectrally.
    pub fn curl(&self) -> Result<Self> {
        let (a, b) = self.require_vector()?;
        let mut sa = Spectrum::forward(a, self.n);
        let sb = Spectrum::forward(b, self.n);
        for (k, z) in sa.data.iter_mut().enumerate() {
            let (x1, x2) = self.wavevector(k);
            *z = sb.data[k] * Complex64::new(0.0, x1) - *z * Complex64::new(0.0, x2);
        }
        Ok(Self {
            box_size: self.box_size,
            n: self.n,
            components: vec![sa.inverse()],
        })
    }

    /// `‖div v‖ / (‖ξ‖ ‖v‖)` in spectrum.
    pub fn relative_divergence(&self) -> Result<f64> {
        let (a, b) = self.require_vector()?;
        let sa = Spectrum::forward(a, self.n);
        let sb = Spectrum::forward(b, self.n);
        let mut div = 0.0;
        let mut scale = 0.0;
        for k in 0..self.n * self.n {
            let (x1, x2) = self.wavevector(k);
            let d = sa.data[k] * x1 + sb.data[k] * x2;
            div += d.norm_sqr();
            scale += (x1 * x1 + x2 * x2) * (sa.data[k].norm_sqr() + sb.data[k].norm_sqr());
        }
        Ok(if scale == 0.0 { 0.0 } else { (div / scale).sqrt() })
    }

    /// Dilation `x ↦ f(x/λ)` realised by scaling the box: the node values are unchanged.
    pub fn dilate(&self, lambda: f64) -> Self {
        Self {
            box_size: self.box_size * lambda,
            ..self.clone()
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(|v| v.iter().map(|x| c * x).collect())
                .collect(),
            ..self.clone()
        }
    }
}

/// 2D discrete Fourier coefficients, same layout as the node values.
#[derive(Debug, Clone)]
struct Spectrum {
    n: usize,
    data: Vec<Complex64>,
}

impl Spectrum {
    fn forward(values: &[f64], n: usize) -> Self {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft2(&mut data, n, false);
        Self { n, data }
    }

    fn inverse(mut self) -> Vec<f64> {
        fft2(&mut self.data, self.n, true);
        let scale = 1.0 / (self.n * self.n) as f64;
        self.data.into_iter().map(|z| z.re * scale).collect()
    }
}

fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    fft.process(data);
    transpose(data, n);
    fft.process(data);
    transpose(data, n);
}

fn transpose(data: &mut [Complex64], n: usize) {
    for j in 0..n {
        for i in j + 1..n {
            data.swap(j * n + i, i * n + j);
        }
    }
}

/// Velocity with spectrum `iξ^⊥ ŵ / |ξ|²`, i.e. `û = (iξ₂, -iξ₁) ŵ / |ξ|²`.
/// The vorticity must have zero mean.
pub fn fft_bs_velocity(w: &PeriodicField) -> Result<PeriodicField> {
    let values = w.require_scalar()?;
    let total: f64 = values.iter().sum();
    let abs: f64 = values.iter().map(|v| v.abs()).sum();
    if total.abs() > MEAN_TOLERANCE * abs.max(f64::MIN_POSITIVE) {
        return Err(Error::NonzeroMean {
            mean: total * w.h() * w.h(),
        });
    }
    let spec = Spectrum::forward(values, w.n);
    let mut u1 = spec.clone();
    let mut u2 = spec;
    for (k, (a, b)) in u1.data.iter_mut().zip(u2.data.iter_mut()).enumerate() {
        let (x1, x2) = w.wavevector(k);
        let m2 = x1 * x1 + x2 * x2;
        if m2 == 0.0 {
            *a = Complex64::new(0.0, 0.0);
            *b = Complex64::new(0.0, 0.0);
            continue;
        }
        let what = *a;
        *a = what * Complex64::new(0.0, x2 / m2);
        *b = what * Complex64::new(0.0, -x1 / m2);
    }
    Ok(PeriodicField {
        box_size: w.box_size,
        n: w.n,
        components: vec![u1.inverse(), u2.inverse()],
    })
}

/// Multiplies the spectrum of each component by `|ξ|^{2s}` (zero mode dropped).
fn fractional_power(v: &PeriodicField, s: f64) -> PeriodicField {
    let comps = v
        .components
        .iter()
        .map(|c| {
            let mut spec = Spectrum::forward(c, v.n);
            for (k, z) in spec.data.iter_mut().enumerate() {
                let (x1, x2) = v.wavevector(k);
                let m2 = x1 * x1 + x2 * x2;
                *z *= if m2 == 0.0 { 0.0 } else { m2.powf(s) };
            }
            spec.inverse()
        })
        .collect();
    PeriodicField {
        box_size: v.box_size,
        n: v.n,
        components: comps,
    }
}

/// `w = A^{-μ} v`: spectrum multiplied by `|ξ|^{-2μ}`, so that `A^μ w = v`
/// where `A` acts as `-Δ` on divergence-free fields.
pub fn fractional_primitive(v: &PeriodicField, mu: f64) -> Result<PeriodicField> {
    if !(mu >= 0.0 && mu < 0.5) {
        return Err(invalid("mu", format!("{mu} is outside [0, 1/2)")));
    }
    let rel = v.relative_divergence()?;
    if rel > DIVERGENCE_TOLERANCE {
        return Err(Error::NotDivergenceFree { relative: rel });
    }
    let mean = v.mean();
    let scale = v.max_magnitude().max(f64::MIN_POSITIVE);
    if mean.iter().any(|m| m.abs() > MEAN_TOLERANCE * scale) {
        return Err(Error::NonzeroMean {
            mean: mean[0].hypot(mean[1]),
        });
    }
    Ok(fractional_power(v, -mu))
}

/// `A^μ w`, the inverse of [`fractional_primitive`].
pub fn fractional_power_apply(w: &PeriodicField, mu: f64) -> PeriodicField {
    fractional_power(w, mu)
}

/// `‖A^{-μ}v‖_{L²} / ‖v‖_{L^q}` with `μ = 1/q - 1/2`.
pub fn lemma51_quotient(v: &PeriodicField, q: f64) -> Result<f64> {
    if !(q > 1.0 && q < 2.0) {
        return Err(invalid("q", format!("{q} is outside (1, 2)")));
    }
    let w = fractional_primitive(v, 1.0 / q - 0.5)?;
    Ok(w.l2_norm_spectral() / v.lp_norm(q))
}

/// Quotients of every field at scales 1, 2 and 4. Each dilated quotient is
/// compared against twice the quotient of the same field at scale 1; the
/// reported constant is the largest quotient seen.
pub fn lemma51_sweep(family: &[PeriodicField], q: f64) -> Result<EstimateReport> {
    if family.is_empty() {
        return Err(invalid("family", "must not be empty"));
    }
    let mut lhs = Vec::with_capacity(3 * family.len());
    let mut rhs = Vec::with_capacity(3 * family.len());
    let mut worst_dilation: f64 = 0.0;
    let mut lower_ok = true;
    for v in family {
        let base = lemma51_quotient(v, q)?;
        for lambda in SWEEP_SCALES {
            let r = if lambda == 1.0 {
                base
            } else {
                lemma51_quotient(&v.dilate(lambda), q)?
            };
            worst_dilation = worst_dilation.max((r / base - 1.0).abs());
            lower_ok &= r >= 0.5 * base;
            lhs.push(r);
            rhs.push(2.0 * base);
        }
    }
    let max = lhs.iter().copied().fold(0.0, f64::max);
    let mut params = BTreeMap::new();
    params.insert("q".to_string(), vec![q]);
    params.insert("mu".to_string(), vec![1.0 / q - 0.5]);
    params.insert("dilations".to_string(), SWEEP_SCALES.to_vec());
    let mut extras = BTreeMap::new();
    extras.insert("max_dilation_deviation".to_string(), worst_dilation);
    extras.insert("family_size".to_string(), family.len() as f64);
    let id = format!("fractional_primitive[q={q}]");
    Ok(EstimateReport::new(&id, params, lhs, rhs, max, extras, lower_ok))
}

/// `‖e^{tΔ} v‖_{L²}` for each time, from the spectrum of `v` (Parseval).
pub fn heat_semigroup_l2(v: &PeriodicField, times: &[f64]) -> Vec<f64> {
    let spectra: Vec<Spectrum> = v.components.iter().map(|c| Spectrum::forward(c, v.n)).collect();
    let n2 = (v.n * v.n) as f64;
    let area = v.h() * v.h();
    times
        .iter()
        .map(|&t| {
            let mut sum = 0.0;
            for s in &spectra {
                for (k, z) in s.data.iter().enumerate() {
                    let (x1, x2) = v.wavevector(k);
                    sum += z.norm_sqr() * (-2.0 * t * (x1 * x1 + x2 * x2)).exp();
                }
            }
            (sum / n2 * area).sqrt()
        })
        .collect()
}

/// Streamfunction of a Gaussian dipole `(e·(x - c)) exp(-|x - c|²/a²)`.
/// Its vorticity has zero mean and zero first moments.
pub fn dipole_streamfunction(center: Point2, direction: Point2, width: f64) -> impl Fn(Point2) -> f64 {
    move |x: Point2| {
        let d = x - center;
        direction.dot(d) * (-d.norm_sq() / (width * width)).exp()
    }
}

/// Dipole velocity fields: each is a sum of 1-3 Gaussian dipoles with
/// seeded centres, orientations and widths, concentrated in the disk of
/// radius `support`. The box is `BOX_FACTOR * support`.
pub fn dipole_family(support: f64, count: usize, n: usize, seed: u64) -> Result<Vec<PeriodicField>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let box_size = BOX_FACTOR * support;
    (0..count)
        .map(|_| {
            let parts: Vec<(Point2, Point2, f64)> = (0..rng.gen_range(1..=3))
                .map(|_| {
                    let width = support * (0.35 + 0.15 * rng.gen::<f64>());
                    let c = Point2::polar(0.5 * support * rng.gen::<f64>(), 2.0 * PI * rng.gen::<f64>());
                    let dir = Point2::polar(0.5 + rng.gen::<f64>(), 2.0 * PI * rng.gen::<f64>());
                    (c, dir, width)
                })
                .collect();
            PeriodicField::velocity_from_streamfunction(box_size, n, |x| {
                parts.iter().map(|&(c, d, a)| dipole_streamfunction(c, d, a)(x)).sum()
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biot_savart::{bs_velocity, VorticitySample};
    use proptest::prelude::*;

    fn dipole(support: f64, n: usize) -> PeriodicField {
        let psi = dipole_streamfunction(Point2::new(0.3, -0.2), Point2::new(1.0, 0.5), support * 0.5);
        PeriodicField::velocity_from_streamfunction(BOX_FACTOR * support, n, psi).unwrap()
    }

    #[test]
    fn curl_of_spectral_velocity_recovers_vorticity() {
        let v = dipole(1.0, 128);
        let w = v.curl().unwrap();
        let back = fft_bs_velocity(&w).unwrap();
        for c in 0..2 {
            let err = back.components[c]
                .iter()
                .zip(&v.components[c])
                .fold(0.0f64, |e, (a, b)| e.max((a - b).abs()));
            assert!(err < 1e-12, "component {c}: {err}");
        }
        let w2 = back.curl().unwrap();
        let err = w2.components[0]
            .iter()
            .zip(&w.components[0])
            .fold(0.0f64, |e, (a, b)| e.max((a - b).abs()));
        assert!(err < 1e-10);
    }

    #[test]
    fn single_mode_velocity_is_closed_form() {
        // w = cos(2π m x₁ / L) gives u = (0, L/(2π m) sin(2π m x₁/L))
        let (l, n, m) = (8.0, 32, 3.0);
        let k = 2.0 * PI * m / l;
        let w = PeriodicField {
            box_size: l,
            n,
            components: vec![(0..n * n)
                .map(|idx| (k * (-0.5 * l + (idx % n) as f64 * l / n as f64)).cos())
                .collect()],
        };
        let u = fft_bs_velocity(&w).unwrap();
        for idx in 0..n * n {
            let x1 = -0.5 * l + (idx % n) as f64 * l / n as f64;
            assert!(u.components[0][idx].abs() < 1e-12);
            assert!((u.components[1][idx] - (k * x1).sin() / k).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_velocity_matches_direct_quadrature() {
        let (c, e, a) = (Point2::new(0.3, -0.2), Point2::new(1.0, 0.5), 0.5);
        let psi = dipole_streamfunction(c, e, a);
        let v = PeriodicField::velocity_from_streamfunction(BOX_FACTOR, 256, psi).unwrap();
        let u = fft_bs_velocity(&v.curl().unwrap()).unwrap();
        // analytic vorticity Δψ on a finer patch
        let omega = |x: Point2| {
            let d = x - c;
            let r2 = d.norm_sq() / (a * a);
            e.dot(d) * (-r2).exp() * (4.0 * r2 - 8.0) / (a * a)
        };
        let scale = v.lp_norm(f64::INFINITY);
        let nodes = 384;
        let h = 6.0 / nodes as f64;
        {
            let origin = Point2::new(-3.0, -3.0);
            let values = (0..nodes * nodes)
                .map(|k| omega(origin + Point2::new(((k % nodes) as f64 + 0.5) * h, ((k / nodes) as f64 + 0.5) * h)))
                .collect();
            let patch = VorticitySample::new(origin, h, nodes, nodes, values, None).unwrap();
            let mut worst = 0.0f64;
            for (i, j) in [(128, 128), (140, 120), (150, 150), (110, 135), (170, 128)] {
                let direct = bs_velocity(&patch, v.point(i, j));
                let k = j * v.n + i;
                worst = worst.max((direct.x1 - u.components[0][k]).hypot(direct.x2 - u.components[1][k]));
            }
            assert!(worst < 1e-4 * scale, "{:.3e}", worst / scale);
        }
    }

    #[test]
    fn nonzero_mean_vorticity_is_rejected() {
        let w = PeriodicField::scalar_from_fn(16.0, 64, |x| (-x.norm_sq() * 4.0).exp()).unwrap();
        assert!(matches!(fft_bs_velocity(&w), Err(Error::NonzeroMean { .. })));
    }

    #[test]
    fn field_touching_the_box_edge_is_rejected() {
        assert!(PeriodicField::scalar_from_fn(4.0, 32, |x| (-x.norm_sq()).exp()).is_err());
    }

    #[test]
    fn parseval_matches_physical_l2_norm() {
        let v = dipole(1.0, 128);
        let a = v.lp_norm(2.0);
        let b = v.l2_norm_spectral();
        assert!((a - b).abs() <= 1e-10 * a);
    }

    #[test]
    fn fractional_primitive_inverts_and_tends_to_identity() {
        let v = dipole(1.0, 128);
        let w = fractional_primitive(&v, 1.0 / 6.0).unwrap();
        let back = fractional_power_apply(&w, 1.0 / 6.0);
        let scale = v.lp_norm(f64::INFINITY);
        for c in 0..2 {
            let err = back.components[c]
                .iter()
                .zip(&v.components[c])
                .fold(0.0f64, |e, (a, b)| e.max((a - b).abs()));
            assert!(err < 1e-12 * scale.max(1.0));
        }
        let id = fractional_primitive(&v, 1e-9).unwrap();
        let err = id.components[0]
            .iter()
            .zip(&v.components[0])
            .fold(0.0f64, |e, (a, b)| e.max((a - b).abs()));
        assert!(err < 1e-6 * scale);
    }

    #[test]
    fn gradient_field_is_not_divergence_free() {
        let g = PeriodicField::scalar_from_fn(16.0, 64, |x| x.x1 * (-x.norm_sq()).exp()).unwrap();
        let v = PeriodicField {
            components: vec![g.components[0].clone(), vec![0.0; 64 * 64]],
            ..g
        };
        assert!(matches!(
            fractional_primitive(&v, 0.2),
            Err(Error::NotDivergenceFree { .. })
        ));
    }

    #[test]
    fn quotient_is_dilation_invariant() {
        let v = dipole(1.0, 128);
        for q in [1.2, 1.5, 1.9] {
            let base = lemma51_quotient(&v, q).unwrap();
            for lambda in [2.0, 4.0] {
                let r = lemma51_quotient(&v.dilate(lambda), q).unwrap();
                assert!((r / base - 1.0).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn heat_semigroup_is_a_contraction() {
        let v = dipole(1.0, 128);
        let n = heat_semigroup_l2(&v, &[0.0, 0.1, 1.0, 10.0]);
        assert!((n[0] - v.lp_norm(2.0)).abs() < 1e-10 * n[0]);
        assert!(n.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn seeded_family_sweep_reports_finite_quotient() {
        let fam = dipole_family(1.0, 10, 128, 7).unwrap();
        let rep = lemma51_sweep(&fam, 1.5).unwrap();
        assert!(rep.pass);
        assert!(rep.constant_measured.is_finite() && rep.constant_measured > 0.0);
        assert_eq!(rep.lhs.len(), 30);
        assert!(rep.extras["max_dilation_deviation"] < 1e-3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn quotient_is_homogeneous(c in 0.01f64..100.0) {
            let v = dipole(1.0, 128);
            let a = lemma51_quotient(&v, 1.5).unwrap();
            let b = lemma51_quotient(&v.scale(c), 1.5).unwrap();
            prop_assert!((a / b - 1.0).abs() < 1e-10);
        }
    }
}
