//! Log-log decay fits with dyadic windowed minima, and logarithmic growth fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples required inside a decay-fit window.
pub const MIN_FIT_SAMPLES: usize = 8;
/// Largest residual of a log-growth fit, relative to the range of the data.
pub const LOG_GROWTH_RESIDUAL_FRACTION: f64 = 0.10;

/// `min_{t ∈ [T/2, T]} y(t)` for one dyadic `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowedMinimum {
    pub big_t: f64,
    pub t_at_min: f64,
    pub min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub window: [f64; 2],
    pub samples: usize,
    /// Slope of `log y` against `log t`.
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `1/q - 1/2` when a target exponent `q` is known.
    pub predicted_mu: Option<f64>,
    pub windowed_minima: Vec<WindowedMinimum>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogGrowthFit {
    /// Slope `b` of `E ≈ a + b log(1 + t)`.
    pub k_fitted: f64,
    pub intercept: f64,
    pub max_residual: f64,
    /// `max E - min E` over the fitted samples.
    pub range: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Least squares `y ≈ a + b x`, returning `(a, b, r²)`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
    let r2 = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (a, b, r2)
}

/// Windowed minima over every dyadic `T = 2^k` whose window `[T/2, T]`
/// lies inside the sampled range and contains a sample.
pub fn dyadic_minima(series: &[(f64, f64)]) -> Vec<WindowedMinimum> {
    let t_max = series.iter().map(|p| p.0).fold(0.0, f64::max);
    let mut out = Vec::new();
    let mut big_t = 1.0;
    while big_t <= t_max {
        let best = series
            .iter()
            .filter(|(t, _)| *t >= big_t / 2.0 && *t <= big_t)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some(&(t, y)) = best {
            out.push(WindowedMinimum {
                big_t,
                t_at_min: t,
                min: y,
            });
        }
        big_t *= 2.0;
    }
    out
}

/// Slope of `log y` against `log t` on the samples inside `window`.
pub fn fit_decay_exponent(series: &[(f64, f64)], window: [f64; 2]) -> Result<DecayFit> {
    let [lo, hi] = window;
    if !(lo >= 1.0) || !(hi > lo) || !hi.is_finite() {
        return Err(Error::Fit(format!("degenerate window [{lo}, {hi}]")));
    }
    let inside: Vec<(f64, f64)> = series.iter().copied().filter(|(t, _)| *t >= lo && *t <= hi).collect();
    if inside.len() < MIN_FIT_SAMPLES {
        return Err(Error::Fit(format!(
            "{} samples in [{lo}, {hi}], need {MIN_FIT_SAMPLES}",
            inside.len()
        )));
    }
    if let Some(&(t, y)) = inside.iter().find(|(_, y)| !(*y > 0.0) || !y.is_finite()) {
        return Err(Error::Fit(format!("non-positive value {y} at t = {t}")));
    }
    let x: Vec<f64> = inside.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = inside.iter().map(|p| p.1.ln()).collect();
    let (a, b, r2) = linear_fit(&x, &y);
    Ok(DecayFit {
        window,
        samples: inside.len(),
        exponent: b,
        intercept: a,
        r_squared: r2,
        predicted_mu: None,
        windowed_minima: dyadic_minima(series),
    })
}

/// Default decay window: the last decade of the run, starting no earlier than `t = 20`.
pub fn default_window(t_final: f64) -> [f64; 2] {
    [(t_final / 10.0).max(20.0), t_final]
}

/// Fits `E(t) ≈ a + b log(1 + t)` on the samples with `t ≥ 1`.
pub fn fit_log_growth(series: &[(f64, f64)]) -> Result<LogGrowthFit> {
    let used: Vec<(f64, f64)> = series.iter().copied().filter(|(t, _)| *t >= 1.0).collect();
    if used.len() < 2 {
        return Err(Error::Fit("log-growth fit needs two samples with t >= 1".into()));
    }
    if let Some(&(t, e)) = used.iter().find(|(_, e)| !(*e >= 0.0)) {
        return Err(Error::Fit(format!("negative functional {e} at t = {t}")));
    }
    let x: Vec<f64> = used.iter().map(|p| p.0.ln_1p()).collect();
    let y: Vec<f64> = used.iter().map(|p| p.1).collect();
    let (a, b, _) = linear_fit(&x, &y);
    let max_residual = x.iter().zip(&y).map(|(u, v)| (v - a - b * u).abs()).fold(0.0, f64::max);
    let range = y.iter().copied().fold(f64::NEG_INFINITY, f64::max) - y.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(LogGrowthFit {
        k_fitted: b,
        intercept: a,
        max_residual,
        range,
        samples: used.len(),
        pass: b.is_finite() && max_residual <= LOG_GROWTH_RESIDUAL_FRACTION * range,
    })
}
