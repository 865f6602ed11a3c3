//! Relative variances of tapered, smoothed spectral estimates.
//!
//! Three routes are provided:
//!
//! * [`usual_rel_variance`]: `C_h · (N'/N) · Σ g_r²`, valid as `M → ∞`.
//! * [`new_rel_variance`]: accounts for the correlation of neighbouring
//!   periodogram ordinates through `|H₂(f_{N',l})|² / H₂(0)²`.
//! * [`ExactOracle`] / [`CovarianceCache`]: exact values for Gaussian
//!   processes, built from the fourth-moment identity for the periodogram.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::estimator::SmoothingScheme;
use crate::process::ProcessModel;
use crate::taper::{Taper, TaperKind};

/// `C_h · (N'/N) · Σ_r g_r²`.
pub fn usual_rel_variance(taper: &Taper, scheme: &SmoothingScheme) -> f64 {
    let ratio = scheme.nprime() as f64 / taper.len() as f64;
    taper.inflation_factor() * ratio * scheme.sum_squared_weights()
}

/// `Σ_r g_r² + 2 Σ_{l=1}^{2M} |H₂(f_{N',l})|²/H₂(0)² · Σ_{r=-M}^{M-l} g_r g_{r+l}`.
///
/// `f_{N',l}·Δ = l/N'` so the value does not depend on `Δ`.
pub fn new_rel_variance(taper: &Taper, scheme: &SmoothingScheme) -> f64 {
    let h0 = taper.h2_dft(0.0, 1.0).re;
    let nprime = scheme.nprime() as f64;
    let cross: f64 = (1..=2 * scheme.half_width())
        .map(|l| {
            let h = taper.h2_dft(l as f64 / nprime, 1.0);
            h.norm_sqr() / (h0 * h0) * scheme.weight_autocorrelation(l)
        })
        .sum();
    scheme.sum_squared_weights() + 2.0 * cross
}

/// `(|H₂(f-g)|² + |H₂(f+g)|²) / H₂(0)²` for `f, g` strictly inside `(0, 1/(2Δ))`.
pub fn approx_rel_covariance(taper: &Taper, f: f64, g: f64, delta: f64) -> Result<f64> {
    let nyq = 0.5 / delta;
    for &x in &[f, g] {
        if !(x > 0.0 && x < nyq) {
            return Err(Error::EdgeFrequency(x));
        }
    }
    Ok(covariance_from_h2(taper, f, g, delta))
}

fn covariance_from_h2(taper: &Taper, f: f64, g: f64, delta: f64) -> f64 {
    let h0 = taper.h2_dft(0.0, delta).re;
    let minus = taper.h2_dft(f - g, delta).norm_sqr();
    let plus = taper.h2_dft(f + g, delta).norm_sqr();
    (minus + plus) / (h0 * h0)
}

/// Exact covariance of relative periodogram ordinates for a Gaussian process
/// with known mean:
///
/// `Cov(Ŝ(f)/S(f), Ŝ(g)/S(g)) = Δ² (|T₋|² + |T₊|²) / (S(f) S(g) (Σh²)²)`,
/// `T∓ = Σ_{j,k} h_j h_k s_{j-k} e^{-i2π(fj ∓ gk)Δ}`.
#[derive(Debug, Clone)]
pub struct ExactOracle {
    model: ProcessModel,
    taper: Taper,
    acov: Vec<f64>,
}

impl ExactOracle {
    pub fn new(model: &ProcessModel, taper: &Taper) -> Result<Self> {
        let acov = model.autocovariances(taper.len() - 1)?;
        Ok(ExactOracle {
            model: model.clone(),
            taper: taper.clone(),
            acov,
        })
    }

    pub fn model(&self) -> &ProcessModel {
        &self.model
    }

    pub fn taper(&self) -> &Taper {
        &self.taper
    }

    fn density(&self, f: f64) -> Result<f64> {
        let s = self.model.spectral_density_unchecked(f.abs());
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::DegenerateSpectrum(f));
        }
        Ok(s)
    }

    /// `(T₋, T₊)` by the `O(N²)` double sum.
    pub fn transforms(&self, f: f64, g: f64) -> (Complex64, Complex64) {
        let delta = self.model.delta();
        let h = self.taper.values();
        let inner: Vec<Complex64> = h
            .iter()
            .enumerate()
            .map(|(k, &hk)| Complex64::from_polar(hk, 2.0 * PI * g * delta * (k + 1) as f64))
            .collect();
        let mut minus = Complex64::new(0.0, 0.0);
        let mut plus = Complex64::new(0.0, 0.0);
        for (j, &hj) in h.iter().enumerate() {
            let mut v = Complex64::new(0.0, 0.0);
            for (k, a) in inner.iter().enumerate() {
                v += a * self.acov[j.abs_diff(k)];
            }
            let outer = Complex64::from_polar(hj, -2.0 * PI * f * delta * (j + 1) as f64);
            minus += outer * v;
            plus += outer * v.conj();
        }
        (minus, plus)
    }

    pub fn rel_covariance(&self, f: f64, g: f64) -> Result<f64> {
        let scale = self.normalization(f, g)?;
        let (minus, plus) = self.transforms(f, g);
        Ok(scale * (minus.norm_sqr() + plus.norm_sqr()))
    }

    fn normalization(&self, f: f64, g: f64) -> Result<f64> {
        let delta = self.model.delta();
        let ss = self.taper.sum_squares();
        Ok(delta * delta / (self.density(f)? * self.density(g)? * ss * ss))
    }

    /// Exact relative variance of the smoothed estimate at grid index `k`,
    /// with covariances computed directly and cached per unordered index pair.
    pub fn rel_variance(&self, scheme: &SmoothingScheme, k: usize) -> Result<f64> {
        let window = scheme.window(k)?;
        let delta = self.model.delta();
        let mut cache: HashMap<(usize, usize), f64> = HashMap::new();
        let mut total = 0.0;
        for &(a, wa) in &window {
            for &(b, wb) in &window {
                let key = (a.min(b), a.max(b));
                let c = match cache.get(&key) {
                    Some(&c) => c,
                    None => {
                        let c = self.rel_covariance(
                            scheme.frequency(key.0, delta),
                            scheme.frequency(key.1, delta),
                        )?;
                        cache.insert(key, c);
                        c
                    }
                };
                total += wa * wb * c;
            }
        }
        Ok(total)
    }
}

/// `Cov(Ŝ(f)/S(f), Ŝ(g)/S(g))` for a Gaussian process by direct double summation.
pub fn exact_gaussian_rel_covariance(model: &ProcessModel, taper: &Taper, f: f64, g: f64) -> Result<f64> {
    ExactOracle::new(model, taper)?.rel_covariance(f, g)
}

/// Exact relative variance of the smoothed estimate at grid index `k`.
pub fn exact_rel_variance(
    model: &ProcessModel,
    taper: &Taper,
    scheme: &SmoothingScheme,
    k: usize,
) -> Result<f64> {
    ExactOracle::new(model, taper)?.rel_variance(scheme, k)
}

/// How [`CovarianceCache`] evaluates the exact covariances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceMethod {
    /// `O(N²)` double sum per frequency pair.
    Direct,
    /// Toeplitz products and outer transforms by FFT.
    Accelerated,
}

/// Exact relative covariances for all grid index pairs `(a, b)` with
/// `|a - b| ≤ 2M`, which is every pair a smoothing window of half-width `M`
/// can reach after reflection.
#[derive(Debug, Clone)]
pub struct CovarianceCache {
    nprime: usize,
    band: usize,
    // row a, offset d = b - a in 0..=band
    data: Vec<f64>,
}

impl CovarianceCache {
    pub fn build(oracle: &ExactOracle, nprime: usize, m: usize, method: CovarianceMethod) -> Result<Self> {
        match method {
            CovarianceMethod::Direct => Self::direct(oracle, nprime, m),
            CovarianceMethod::Accelerated => Self::accelerated(oracle, nprime, m),
        }
    }

    fn empty(nprime: usize, m: usize) -> Result<Self> {
        if nprime == 0 || !nprime.is_multiple_of(2) {
            return Err(Error::invalid(format!("grid size N' = {nprime} must be even and positive")));
        }
        let band = 2 * m;
        Ok(CovarianceCache {
            nprime,
            band,
            data: vec![f64::NAN; (nprime / 2 + 1) * (band + 1)],
        })
    }

    pub fn direct(oracle: &ExactOracle, nprime: usize, m: usize) -> Result<Self> {
        let mut cache = Self::empty(nprime, m)?;
        let delta = oracle.model.delta();
        let last = nprime / 2;
        let band = cache.band;
        let freq = |i: usize| i as f64 / (nprime as f64 * delta);
        cache
            .data
            .par_chunks_mut(band + 1)
            .enumerate()
            .try_for_each(|(a, row)| -> Result<()> {
                for (d, slot) in row.iter_mut().enumerate() {
                    let b = a + d;
                    if b <= last {
                        *slot = oracle.rel_covariance(freq(a), freq(b))?;
                    }
                }
                Ok(())
            })?;
        Ok(cache)
    }

    /// For each grid frequency `g` the inner sums `v_j = Σ_k s_{j-k} h_k e^{i2πgkΔ}`
    /// come from one circulant-embedded Toeplitz product; `T₋(·, g)` and
    /// `T₊(·, g)` for every grid `f` then follow from two length-`N'` FFTs of
    /// `h_j v_j` and `h_j conj(v_j)`.
    pub fn accelerated(oracle: &ExactOracle, nprime: usize, m: usize) -> Result<Self> {
        let mut cache = Self::empty(nprime, m)?;
        let delta = oracle.model.delta();
        let h = oracle.taper.values();
        let n = h.len();
        let last = nprime / 2;
        let band = cache.band;

        let density: Vec<f64> = (0..=last)
            .map(|i| oracle.density(i as f64 / (nprime as f64 * delta)))
            .collect::<Result<_>>()?;
        let ss = oracle.taper.sum_squares();
        let scale = delta * delta / (ss * ss);

        let embed = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        let fwd_embed: Arc<dyn Fft<f64>> = planner.plan_fft_forward(embed);
        let inv_embed: Arc<dyn Fft<f64>> = planner.plan_fft_inverse(embed);
        let fwd_grid: Arc<dyn Fft<f64>> = planner.plan_fft_forward(nprime);

        let mut circulant = vec![Complex64::new(0.0, 0.0); embed];
        circulant[0].re = oracle.acov[0];
        for lag in 1..n {
            circulant[lag].re = oracle.acov[lag];
            circulant[embed - lag].re = oracle.acov[lag];
        }
        fwd_embed.process(&mut circulant);
        let circulant = &circulant;

        let columns: Vec<Vec<(usize, usize, f64)>> = (0..=last)
            .into_par_iter()
            .map(|b| {
                let mut buf = vec![Complex64::new(0.0, 0.0); embed];
                for (k, &hk) in h.iter().enumerate() {
                    let phase = 2.0 * PI * ((b * (k + 1)) % nprime) as f64 / nprime as f64;
                    buf[k] = Complex64::from_polar(hk, phase);
                }
                fwd_embed.process(&mut buf);
                for (x, c) in buf.iter_mut().zip(circulant) {
                    *x *= c;
                }
                inv_embed.process(&mut buf);
                let norm = 1.0 / embed as f64;

                let mut minus = vec![Complex64::new(0.0, 0.0); nprime];
                let mut plus = vec![Complex64::new(0.0, 0.0); nprime];
                for (j, &hj) in h.iter().enumerate() {
                    let v = buf[j] * (hj * norm);
                    minus[(j + 1) % nprime] += v;
                    plus[(j + 1) % nprime] += v.conj();
                }
                fwd_grid.process(&mut minus);
                fwd_grid.process(&mut plus);

                (b.saturating_sub(band)..=b)
                    .map(|a| {
                        let value = scale * (minus[a].norm_sqr() + plus[a].norm_sqr())
                            / (density[a] * density[b]);
                        (a, b - a, value)
                    })
                    .collect()
            })
            .collect();

        for (a, d, value) in columns.into_iter().flatten() {
            cache.data[a * (band + 1) + d] = value;
        }
        Ok(cache)
    }

    pub fn nprime(&self) -> usize {
        self.nprime
    }

    /// Covariance between grid indices `a` and `b`; `None` outside the band.
    pub fn get(&self, a: usize, b: usize) -> Option<f64> {
        let (lo, hi) = (a.min(b), a.max(b));
        if hi > self.nprime / 2 || hi - lo > self.band {
            return None;
        }
        Some(self.data[lo * (self.band + 1) + (hi - lo)])
    }

    pub fn rel_variance(&self, scheme: &SmoothingScheme, k: usize) -> Result<f64> {
        if scheme.nprime() != self.nprime || 2 * scheme.half_width() > self.band {
            return Err(Error::invalid("smoothing scheme does not match the covariance cache"));
        }
        let window = scheme.window(k)?;
        let mut total = 0.0;
        for &(a, wa) in &window {
            for &(b, wb) in &window {
                total += wa * wb * self.get(a, b).expect("window stays inside the band");
            }
        }
        Ok(total)
    }
}

/// Per-frequency comparison of exact and approximate relative variances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceRecord {
    pub k: usize,
    pub f: f64,
    pub exact: f64,
    pub usual: f64,
    pub new: f64,
}

#[derive(Debug, Clone)]
pub struct VarianceTable {
    pub n: usize,
    pub nprime: usize,
    pub taper: TaperKind,
    pub half_width: usize,
    pub model: String,
    /// One record per `k = 0..=N'/2`; the approximations are not claimed at
    /// the two edge indices.
    pub entries: Vec<VarianceRecord>,
}

impl VarianceTable {
    pub fn compute(
        model: &ProcessModel,
        taper: &Taper,
        scheme: &SmoothingScheme,
        method: CovarianceMethod,
    ) -> Result<Self> {
        let oracle = ExactOracle::new(model, taper)?;
        let cache = CovarianceCache::build(&oracle, scheme.nprime(), scheme.half_width(), method)?;
        let usual = usual_rel_variance(taper, scheme);
        let new = new_rel_variance(taper, scheme);
        let entries = (0..=scheme.last_index())
            .map(|k| {
                Ok(VarianceRecord {
                    k,
                    f: scheme.frequency(k, model.delta()),
                    exact: cache.rel_variance(scheme, k)?,
                    usual,
                    new,
                })
            })
            .collect::<Result<_>>()?;
        Ok(VarianceTable {
            n: taper.len(),
            nprime: scheme.nprime(),
            taper: taper.kind(),
            half_width: scheme.half_width(),
            model: model.to_string(),
            entries,
        })
    }

    /// Records with `0 < k < N'/2`.
    pub fn interior(&self) -> impl Iterator<Item = &VarianceRecord> {
        let last = self.nprime / 2;
        self.entries.iter().filter(move |r| r.k != 0 && r.k != last)
    }

    /// Mean of `|usual - exact|` and `|new - exact|` over the interior
    /// records accepted by `keep`.
    pub fn mean_abs_deviations<F: Fn(&VarianceRecord) -> bool>(&self, keep: F) -> (f64, f64) {
        let (mut du, mut dn, mut count) = (0.0, 0.0, 0usize);
        for r in self.interior().filter(|r| keep(r)) {
            du += (r.usual - r.exact).abs();
            dn += (r.new - r.exact).abs();
            count += 1;
        }
        (du / count as f64, dn / count as f64)
    }
}
