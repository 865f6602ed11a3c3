//! Stationary Gaussian process models.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Coefficients of the AR(4) process with two sharp spectral peaks used in
/// the white-noise/AR(4) comparison.
pub const AR4_COEFFICIENTS: [f64; 4] = [2.7607, -3.8106, 2.6535, -0.9238];

/// Largest admissible modulus of a companion-matrix eigenvalue.
const STABILITY_MARGIN: f64 = 1.0 - 1e-8;

/// Observed samples `X_1..X_N` with sampling interval `Δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: Vec<f64>,
    delta: f64,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>, delta: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("time series is empty"));
        }
        if let Some(x) = samples.iter().find(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample {x}")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::invalid(format!("sampling interval Δ = {delta} must be positive")));
        }
        Ok(TimeSeries { samples, delta })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// White noise (`phi` empty) or a causal AR(p) process
/// `X_t - μ = Σ_j φ_j (X_{t-j} - μ) + ε_t`, `ε_t ~ N(0, σ²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessModel {
    phi: Vec<f64>,
    sigma2: f64,
    delta: f64,
    mu: f64,
}

impl ProcessModel {
    pub fn white_noise(sigma2: f64, delta: f64) -> Result<Self> {
        Self::autoregressive(Vec::new(), sigma2, delta)
    }

    /// AR(p) model; rejects coefficient sets that are not strictly stationary.
    pub fn autoregressive(phi: Vec<f64>, sigma2: f64, delta: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::invalid(format!("innovation variance σ² = {sigma2} must be positive")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::invalid(format!("sampling interval Δ = {delta} must be positive")));
        }
        if phi.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("non-finite AR coefficient"));
        }
        let model = ProcessModel {
            phi,
            sigma2,
            delta,
            mu: 0.0,
        };
        let radius = model.spectral_radius();
        if radius >= STABILITY_MARGIN {
            return Err(Error::Model(format!(
                "companion matrix has an eigenvalue of modulus {radius:.12}"
            )));
        }
        Ok(model)
    }

    /// The AR(4) reference process with `σ² = 1`, `Δ = 1`.
    pub fn reference_ar4() -> Self {
        Self::autoregressive(AR4_COEFFICIENTS.to_vec(), 1.0, 1.0).expect("AR(4) reference is stable")
    }

    pub fn with_mean(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.phi
    }

    pub fn order(&self) -> usize {
        self.phi.len()
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn mean(&self) -> f64 {
        self.mu
    }

    pub fn is_white_noise(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn nyquist(&self) -> f64 {
        0.5 / self.delta
    }

    /// Largest eigenvalue modulus of the AR companion matrix (0 for white noise).
    pub fn spectral_radius(&self) -> f64 {
        let p = self.phi.len();
        if p == 0 {
            return 0.0;
        }
        let mut companion = DMatrix::<f64>::zeros(p, p);
        for (j, &c) in self.phi.iter().enumerate() {
            companion[(0, j)] = c;
        }
        for i in 1..p {
            companion[(i, i - 1)] = 1.0;
        }
        companion
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `S(f) = σ²Δ / |1 - Σ_j φ_j e^{-i2πfjΔ}|²` for `f ∈ [0, 1/(2Δ)]`.
    pub fn spectral_density(&self, f: f64) -> Result<f64> {
        let nyq = self.nyquist();
        if !(f >= -1e-12 * nyq && f <= nyq * (1.0 + 1e-12)) {
            return Err(Error::Domain {
                what: "f",
                value: f,
                domain: format!("[0, {nyq}]"),
            });
        }
        Ok(self.spectral_density_unchecked(f))
    }

    pub(crate) fn spectral_density_unchecked(&self, f: f64) -> f64 {
        let lambda = f * self.delta;
        let transfer = self
            .phi
            .iter()
            .enumerate()
            .fold(Complex64::new(1.0, 0.0), |acc, (j, &c)| {
                acc - Complex64::from_polar(c, -2.0 * PI * lambda * (j + 1) as f64)
            });
        self.sigma2 * self.delta / transfer.norm_sqr()
    }

    /// Local maxima `(f, S(f))` of the density found on a grid of spacing `step` over `[0, 1/(2Δ)]`.
    pub fn spectral_peaks(&self, step: f64) -> Vec<(f64, f64)> {
        let count = (self.nyquist() / step).floor() as usize;
        let s: Vec<f64> = (0..=count)
            .map(|i| self.spectral_density_unchecked(i as f64 * step))
            .collect();
        (1..count)
            .filter(|&i| s[i] > s[i - 1] && s[i] > s[i + 1])
            .map(|i| (i as f64 * step, s[i]))
            .collect()
    }

    /// Autocovariances `s_0..=s_{max_lag}`.
    ///
    /// The first `p + 1` values solve the Yule–Walker system; later lags follow
    /// `s_τ = Σ_j φ_j s_{τ-j}`.
    pub fn autocovariances(&self, max_lag: usize) -> Result<Vec<f64>> {
        let p = self.phi.len();
        let mut s = vec![0.0; max_lag.max(p) + 1];
        if p == 0 {
            s[0] = self.sigma2;
            s.truncate(max_lag + 1);
            return Ok(s);
        }
        // s_τ - Σ_j φ_j s_{|τ-j|} = σ² [τ = 0], τ = 0..=p
        let mut a = DMatrix::<f64>::zeros(p + 1, p + 1);
        let mut b = DVector::<f64>::zeros(p + 1);
        b[0] = self.sigma2;
        for tau in 0..=p {
            a[(tau, tau)] += 1.0;
            for (j, &c) in self.phi.iter().enumerate() {
                let lag = (tau as isize - (j + 1) as isize).unsigned_abs();
                a[(tau, lag)] -= c;
            }
        }
        let sol = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::Model("singular Yule–Walker system".into()))?;
        s[..=p].copy_from_slice(sol.as_slice());
        for tau in p + 1..s.len() {
            s[tau] = self
                .phi
                .iter()
                .enumerate()
                .map(|(j, &c)| c * s[tau - j - 1])
                .sum();
        }
        if s[0] <= 0.0 {
            return Err(Error::Model(format!("non-positive variance s₀ = {}", s[0])));
        }
        s.truncate(max_lag + 1);
        Ok(s)
    }

    /// Exact Gaussian sampler for series of length `n`.
    pub fn simulator(&self, n: usize) -> Result<Simulator> {
        Simulator::new(self, n)
    }

    /// One exact Gaussian realization of length `n`; deterministic in `seed`.
    pub fn simulate(&self, n: usize, seed: u64) -> Result<TimeSeries> {
        Ok(self.simulator(n)?.sample(seed))
    }
}

impl fmt::Display for ProcessModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.phi.is_empty() {
            write!(f, "white-noise(σ²={})", self.sigma2)
        } else {
            let coeffs: Vec<String> = self.phi.iter().map(|c| c.to_string()).collect();
            write!(f, "AR({})[{}](σ²={})", self.phi.len(), coeffs.join(";"), self.sigma2)
        }
    }
}

/// Draws exact samples `μ + L z` where `L Lᵀ` is the Toeplitz covariance of
/// `X_1..X_N`. The factor is computed once and reused for every draw.
#[derive(Debug, Clone)]
pub struct Simulator {
    factor: Option<DMatrix<f64>>,
    scale: f64,
    mu: f64,
    delta: f64,
    n: usize,
}

impl Simulator {
    fn new(model: &ProcessModel, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("series length must be at least 1"));
        }
        let (factor, scale) = if model.is_white_noise() {
            (None, model.sigma2.sqrt())
        } else {
            let s = model.autocovariances(n - 1)?;
            let cov = DMatrix::from_fn(n, n, |i, j| s[i.abs_diff(j)]);
            let chol = cov.cholesky().ok_or_else(|| {
                Error::Numerical(format!(
                    "Toeplitz covariance of size {n} is not numerically positive definite (s₀ = {:e})",
                    s[0]
                ))
            })?;
            (Some(chol.unpack()), 1.0)
        };
        Ok(Simulator {
            factor,
            scale,
            mu: model.mu,
            delta: model.delta,
            n,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sample(&self, seed: u64) -> TimeSeries {
        self.sample_with(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> TimeSeries {
        let z: Vec<f64> = (0..self.n).map(|_| rng.sample(StandardNormal)).collect();
        let samples = match &self.factor {
            None => z.iter().map(|v| self.mu + self.scale * v).collect(),
            Some(l) => (0..self.n)
                .map(|i| {
                    let row: f64 = (0..=i).map(|j| l[(i, j)] * z[j]).sum();
                    self.mu + row
                })
                .collect(),
        };
        TimeSeries {
            samples,
            delta: self.delta,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_noise_basics() {
        let m = ProcessModel::white_noise(1.0, 1.0).unwrap();
        assert_eq!(m.spectral_density(0.3).unwrap(), 1.0);
        assert_eq!(m.autocovariances(3).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        let m2 = ProcessModel::white_noise(2.0, 0.5).unwrap();
        assert_eq!(m2.spectral_density(1.0).unwrap(), 1.0);
    }

    #[test]
    fn ar1_closed_forms() {
        let m = ProcessModel::autoregressive(vec![0.5], 1.0, 1.0).unwrap();
        assert!((m.spectral_density(0.0).unwrap() - 4.0).abs() < 1e-14);
        let s = m.autocovariances(6).unwrap();
        for (tau, v) in s.iter().enumerate() {
            let expected = 4.0 / 3.0 * 0.5f64.powi(tau as i32);
            assert!((v - expected).abs() < 1e-14, "lag {tau}");
        }
    }

    #[test]
    fn rejects_unstable_and_invalid() {
        assert!(matches!(
            ProcessModel::autoregressive(vec![1.0], 1.0, 1.0),
            Err(Error::Model(_))
        ));
        assert!(matches!(
            ProcessModel::autoregressive(vec![0.5, 0.6], 1.0, 1.0),
            Err(Error::Model(_))
        ));
        assert!(ProcessModel::white_noise(0.0, 1.0).is_err());
        assert!(ProcessModel::white_noise(1.0, -1.0).is_err());
    }

    #[test]
    fn reference_ar4_is_stable() {
        let m = ProcessModel::reference_ar4();
        let r = m.spectral_radius();
        assert!(r < 1.0 && r > 0.9, "radius {r}");
    }

    #[test]
    fn spectral_density_domain() {
        let m = ProcessModel::reference_ar4();
        assert!(m.spectral_density(0.6).is_err());
        assert!(m.spectral_density(-0.1).is_err());
        assert!(m.spectral_density(0.5).is_ok());
    }

    #[test]
    fn simulation_is_deterministic() {
        let m = ProcessModel::reference_ar4();
        let a = m.simulate(64, 7).unwrap();
        let b = m.simulate(64, 7).unwrap();
        let c = m.simulate(64, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let w = ProcessModel::white_noise(1.0, 1.0).unwrap().with_mean(3.0);
        let x = w.simulate(4, 11).unwrap();
        assert_eq!(x, w.simulate(4, 11).unwrap());
        assert_eq!(x.len(), 4);
    }

    #[test]
    fn time_series_validation() {
        assert!(TimeSeries::new(vec![], 1.0).is_err());
        assert!(TimeSeries::new(vec![f64::NAN], 1.0).is_err());
        assert!(TimeSeries::new(vec![1.0], 0.0).is_err());
    }
}
