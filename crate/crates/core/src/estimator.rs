//! Tapered periodogram and discrete smoothing over the grid `f_{N',k} = k/(N'Δ)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::process::TimeSeries;
use crate::taper::Taper;

/// How the mean is removed before tapering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanMode {
    Known(f64),
    ArithmeticMean,
    /// `Σ h_t X_t / Σ h_t`; makes the periodogram vanish at `f = 0`.
    WeightedAverage,
}

impl MeanMode {
    pub fn estimate(&self, samples: &[f64], taper: &[f64]) -> f64 {
        match *self {
            MeanMode::Known(mu) => mu,
            MeanMode::ArithmeticMean => samples.iter().sum::<f64>() / samples.len() as f64,
            MeanMode::WeightedAverage => {
                let num: f64 = samples.iter().zip(taper).map(|(x, h)| x * h).sum();
                num / taper.iter().sum::<f64>()
            }
        }
    }
}

/// Treatment of the zero-frequency ordinate inside a smoothing window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgePolicy {
    /// Drop the `f = 0` term when `k ≤ M` and rescale the remaining weights to sum 1.
    #[default]
    ExcludeRenormalize,
    /// Drop the `f = 0` term without rescaling.
    Exclude,
    /// Keep the `f = 0` term.
    Include,
}

/// Discrete smoothing window `g_{-M..=M}` on a grid of size `N'`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingScheme {
    nprime: usize,
    weights: Vec<f64>,
    edge_policy: EdgePolicy,
}

impl SmoothingScheme {
    /// `weights` lists `g_{-M}, .., g_M`.
    pub fn new(nprime: usize, weights: Vec<f64>, edge_policy: EdgePolicy) -> Result<Self> {
        if nprime == 0 || !nprime.is_multiple_of(2) {
            return Err(Error::invalid(format!("grid size N' = {nprime} must be even and positive")));
        }
        if weights.len() % 2 != 1 {
            return Err(Error::invalid("weights must have odd length 2M + 1"));
        }
        if 2 * weights.len() > nprime {
            return Err(Error::invalid(format!(
                "window of {} weights does not fit in half-grid N'/2 = {}",
                weights.len(),
                nprime / 2
            )));
        }
        if weights.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
            return Err(Error::invalid("weights must be positive"));
        }
        let m = weights.len() / 2;
        for j in 1..=m {
            let (a, b) = (weights[m - j], weights[m + j]);
            if (a - b).abs() > 1e-12 * a.max(b) {
                return Err(Error::invalid(format!("weights not symmetric at lag {j}")));
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("weights sum to {total}, not 1")));
        }
        Ok(SmoothingScheme {
            nprime,
            weights,
            edge_policy,
        })
    }

    /// Uniform weights `g_j = 1/(2M+1)`.
    pub fn uniform(nprime: usize, m: usize) -> Result<Self> {
        let g = 1.0 / (2 * m + 1) as f64;
        Self::new(nprime, vec![g; 2 * m + 1], EdgePolicy::default())
    }

    pub fn with_edge_policy(mut self, policy: EdgePolicy) -> Self {
        self.edge_policy = policy;
        self
    }

    pub fn nprime(&self) -> usize {
        self.nprime
    }

    pub fn half_width(&self) -> usize {
        self.weights.len() / 2
    }

    /// `g_{-M}, .., g_M`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `g_j` for `j ∈ -M..=M`.
    pub fn weight(&self, j: isize) -> f64 {
        self.weights[(j + self.half_width() as isize) as usize]
    }

    pub fn edge_policy(&self) -> EdgePolicy {
        self.edge_policy
    }

    /// Index of the Nyquist ordinate, `N'/2`.
    pub fn last_index(&self) -> usize {
        self.nprime / 2
    }

    pub fn frequency(&self, k: usize, delta: f64) -> f64 {
        k as f64 / (self.nprime as f64 * delta)
    }

    pub fn sum_squared_weights(&self) -> f64 {
        self.weights.iter().map(|g| g * g).sum()
    }

    /// `Σ_{r=-M}^{M-l} g_r g_{r+l}`.
    pub fn weight_autocorrelation(&self, lag: usize) -> f64 {
        if lag >= self.weights.len() {
            return 0.0;
        }
        self.weights
            .iter()
            .zip(&self.weights[lag..])
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Grid indices and effective weights entering the smoothed estimate at `k`.
    ///
    /// Indices below zero reflect to `|k - j|`, indices above `N'/2` reflect
    /// to `N' - (k - j)`. When `M > 0` and `k ≤ M` the `f = 0` term is handled
    /// according to the edge policy.
    pub fn window(&self, k: usize) -> Result<Vec<(usize, f64)>> {
        let last = self.last_index();
        if k > last {
            return Err(Error::invalid(format!("index k = {k} exceeds N'/2 = {last}")));
        }
        let m = self.half_width() as isize;
        let drop_zero = m > 0 && self.edge_policy != EdgePolicy::Include;
        let mut terms = Vec::with_capacity(self.weights.len());
        for j in -m..=m {
            let mut idx = (k as isize - j).unsigned_abs();
            if idx > last {
                idx = self.nprime - idx;
            }
            if drop_zero && idx == 0 {
                continue;
            }
            terms.push((idx, self.weight(j)));
        }
        if drop_zero && self.edge_policy == EdgePolicy::ExcludeRenormalize {
            let total: f64 = terms.iter().map(|t| t.1).sum();
            for t in &mut terms {
                t.1 /= total;
            }
        }
        Ok(terms)
    }
}

fn check_lengths(series: &TimeSeries, taper: &Taper) -> Result<()> {
    if series.len() != taper.len() {
        return Err(Error::Shape {
            expected: taper.len(),
            actual: series.len(),
        });
    }
    Ok(())
}

fn tapered_residuals(series: &TimeSeries, taper: &Taper, mode: MeanMode) -> Vec<f64> {
    let h = taper.values();
    let mu = mode.estimate(series.samples(), h);
    series
        .samples()
        .iter()
        .zip(h)
        .map(|(x, h)| h * (x - mu))
        .collect()
}

/// `Δ/Σh_t² · |Σ_t h_t (X_t - μ̃) e^{-i2πtfΔ}|²` evaluated directly.
pub fn tapered_periodogram(series: &TimeSeries, taper: &Taper, mode: MeanMode, f: f64) -> Result<f64> {
    check_lengths(series, taper)?;
    let delta = series.delta();
    let nyq = 0.5 / delta;
    if !(f >= -1e-12 * nyq && f <= nyq * (1.0 + 1e-12)) {
        return Err(Error::Domain {
            what: "f",
            value: f,
            domain: format!("[0, {nyq}]"),
        });
    }
    let lambda = f * delta;
    let sum: Complex64 = tapered_residuals(series, taper, mode)
        .iter()
        .enumerate()
        .map(|(i, v)| Complex64::from_polar(*v, -2.0 * PI * lambda * (i + 1) as f64))
        .sum();
    Ok(delta * sum.norm_sqr() / taper.sum_squares())
}

/// Tapered periodogram at `f_{N',k}` for `k = 0..=N'/2` via one FFT of length `N'`.
pub fn grid_periodogram(
    series: &TimeSeries,
    taper: &Taper,
    mode: MeanMode,
    nprime: usize,
) -> Result<Vec<f64>> {
    check_lengths(series, taper)?;
    if nprime == 0 || !nprime.is_multiple_of(2) {
        return Err(Error::invalid(format!("grid size N' = {nprime} must be even and positive")));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); nprime];
    for (i, v) in tapered_residuals(series, taper, mode).into_iter().enumerate() {
        buf[(i + 1) % nprime].re += v;
    }
    FftPlanner::new().plan_fft_forward(nprime).process(&mut buf);
    let scale = series.delta() / taper.sum_squares();
    Ok(buf[..=nprime / 2].iter().map(|z| scale * z.norm_sqr()).collect())
}

/// `Σ_j g_j Ŝ(f_{N',k-j})` over the reflected window of [`SmoothingScheme::window`].
pub fn smoothed_estimate(grid_values: &[f64], scheme: &SmoothingScheme, k: usize) -> Result<f64> {
    if grid_values.len() != scheme.last_index() + 1 {
        return Err(Error::Shape {
            expected: scheme.last_index() + 1,
            actual: grid_values.len(),
        });
    }
    Ok(scheme
        .window(k)?
        .into_iter()
        .map(|(idx, w)| w * grid_values[idx])
        .sum())
}

/// Smoothed estimate at every `k = 0..=N'/2`.
pub fn smoothed_grid(grid_values: &[f64], scheme: &SmoothingScheme) -> Result<Vec<f64>> {
    (0..=scheme.last_index())
        .map(|k| smoothed_estimate(grid_values, scheme, k))
        .collect()
}
