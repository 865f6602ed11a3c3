//! Experiment drivers shared by the command-line harness and the acceptance suite.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimator::{grid_periodogram, smoothed_estimate, MeanMode, SmoothingScheme};
use crate::process::ProcessModel;
use crate::taper::Taper;
use crate::variance::{CovarianceCache, CovarianceMethod, ExactOracle, VarianceTable};

/// Half-width of the frequency band around each spectral peak that is left
/// out when comparing approximations for peaked spectra.
pub const PEAK_EXCLUSION: f64 = 0.01;

/// Exact, usual and new relative variances at every grid index for one
/// `(process, p, N', M)` combination with uniform weights.
pub fn variance_cell(
    model: &ProcessModel,
    p: f64,
    n: usize,
    nprime: usize,
    m: usize,
    method: CovarianceMethod,
) -> Result<VarianceTable> {
    let taper = Taper::split_cosine(p, n)?;
    let scheme = SmoothingScheme::uniform(nprime, m)?;
    VarianceTable::compute(model, &taper, &scheme, method)
}

/// Mean absolute deviations `(usual, new)` from the exact values over the
/// interior indices, skipping frequencies within [`PEAK_EXCLUSION`] of a
/// spectral peak of `model`.
pub fn approximation_errors(table: &VarianceTable, model: &ProcessModel) -> (f64, f64) {
    let peaks: Vec<f64> = model
        .spectral_peaks(1e-5 / model.delta())
        .into_iter()
        .map(|(f, _)| f)
        .collect();
    let width = PEAK_EXCLUSION / model.delta();
    table.mean_abs_deviations(|r| peaks.iter().all(|pk| (r.f - pk).abs() > width))
}

/// Empirical versus exact relative variance of the smoothed estimate at one index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloRecord {
    pub k: usize,
    pub f: f64,
    pub empirical: f64,
    pub exact: f64,
    /// Standard error of `empirical`, from the sample fourth moment.
    pub std_error: f64,
}

impl MonteCarloRecord {
    pub fn z_score(&self) -> f64 {
        (self.empirical - self.exact) / self.std_error
    }
}

/// Simulates `replicates` exact Gaussian series and compares the sample
/// variance of `Ŝ^{(ts)}(f_{N',k}) / S(f_{N',k})` with the exact value at each `k`.
pub fn monte_carlo_validation(
    model: &ProcessModel,
    taper: &Taper,
    scheme: &SmoothingScheme,
    mode: MeanMode,
    replicates: usize,
    indices: &[usize],
    seed: u64,
) -> Result<Vec<MonteCarloRecord>> {
    if replicates < 2 {
        return Err(Error::invalid("need at least two replicates"));
    }
    for &k in indices {
        scheme.window(k)?;
    }
    let oracle = ExactOracle::new(model, taper)?;
    let cache = CovarianceCache::accelerated(&oracle, scheme.nprime(), scheme.half_width())?;
    let sim = model.simulator(taper.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let densities: Vec<f64> = indices
        .iter()
        .map(|&k| model.spectral_density(scheme.frequency(k, model.delta())))
        .collect::<Result<_>>()?;

    let mut draws = vec![Vec::with_capacity(replicates); indices.len()];
    for _ in 0..replicates {
        let x = sim.sample_with(&mut rng);
        let grid = grid_periodogram(&x, taper, mode, scheme.nprime())?;
        for (i, &k) in indices.iter().enumerate() {
            draws[i].push(smoothed_estimate(&grid, scheme, k)? / densities[i]);
        }
    }

    indices
        .iter()
        .zip(draws)
        .map(|(&k, values)| {
            let (empirical, std_error) = variance_with_error(&values);
            Ok(MonteCarloRecord {
                k,
                f: scheme.frequency(k, model.delta()),
                empirical,
                exact: cache.rel_variance(scheme, k)?,
                std_error,
            })
        })
        .collect()
}

/// Unbiased sample variance and its large-sample standard error
/// `sqrt((m₄ - m₂²)/n)`.
pub fn variance_with_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    (m2 * n / (n - 1.0), ((m4 - m2 * m2) / n).sqrt())
}
