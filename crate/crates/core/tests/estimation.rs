use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taperspec::estimator::{grid_periodogram, smoothed_estimate, tapered_periodogram};
use taperspec::{EdgePolicy, MeanMode, ProcessModel, SmoothingScheme, Taper, TimeSeries};

fn random_series(n: usize, seed: u64) -> TimeSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TimeSeries::new((0..n).map(|_| rng.random_range(-2.0..3.0)).collect(), 1.0).unwrap()
}

fn check_grid_against_pointwise(x: &TimeSeries, taper: &Taper, mode: MeanMode, nprime: usize) {
    let grid = grid_periodogram(x, taper, mode, nprime).unwrap();
    let delta = x.delta();
    let scale = grid.iter().cloned().fold(0.0, f64::max);
    for (k, g) in grid.iter().enumerate() {
        let direct = tapered_periodogram(x, taper, mode, k as f64 / (nprime as f64 * delta)).unwrap();
        assert!((g - direct).abs() <= 1e-10 * direct.max(1e-6 * scale), "k={k}: {g} vs {direct}");
        assert!(*g >= 0.0);
    }
}

#[test]
fn fft_grid_matches_pointwise() {
    let x = random_series(64, 1);
    let taper = Taper::split_cosine(0.5, 64).unwrap();
    for mode in [MeanMode::Known(0.3), MeanMode::ArithmeticMean, MeanMode::WeightedAverage] {
        check_grid_against_pointwise(&x, &taper, mode, 128);
        check_grid_against_pointwise(&x, &taper, mode, 64);
    }
    let y = TimeSeries::new(x.samples().to_vec(), 0.25).unwrap();
    check_grid_against_pointwise(&y, &taper, MeanMode::ArithmeticMean, 96);
}

#[test]
fn classical_grid_when_nprime_equals_n() {
    // rectangular taper, N' = N: the usual |DFT|²/N periodogram
    let x = random_series(32, 2);
    let taper = Taper::rectangular(32).unwrap();
    let grid = grid_periodogram(&x, &taper, MeanMode::Known(0.0), 32).unwrap();
    for (k, g) in grid.iter().enumerate() {
        let (mut re, mut im) = (0.0, 0.0);
        for (t, v) in x.samples().iter().enumerate() {
            let a = -2.0 * std::f64::consts::PI * (k * t) as f64 / 32.0;
            re += v * a.cos();
            im += v * a.sin();
        }
        assert!((g - (re * re + im * im) / 32.0).abs() < 1e-10);
    }
}

#[test]
fn white_noise_periodogram_is_unbiased() {
    let n = 256;
    let reps = 2000;
    let model = ProcessModel::white_noise(1.0, 1.0).unwrap();
    let sim = model.simulator(n).unwrap();
    let taper = Taper::split_cosine(0.5, n).unwrap();
    let k = n / 8;
    let values: Vec<f64> = (0..reps)
        .map(|r| {
            let x = sim.sample(r as u64);
            tapered_periodogram(&x, &taper, MeanMode::WeightedAverage, k as f64 / n as f64).unwrap()
        })
        .collect();
    let mean = values.iter().sum::<f64>() / reps as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let se = (var / reps as f64).sqrt();
    assert!((mean - 1.0).abs() < 3.0 * se, "mean {mean}, se {se}");
}

#[test]
fn smoothed_estimate_rejects_wrong_length() {
    let s = SmoothingScheme::uniform(16, 1).unwrap();
    assert!(smoothed_estimate(&[1.0; 8], &s, 2).is_err());
}

proptest! {
    #[test]
    fn fft_and_direct_agree(n in 2usize..=256, seed in any::<u64>(), p in 0.0f64..=1.0, pad in 0usize..64) {
        let x = random_series(n, seed);
        let taper = Taper::split_cosine(p, n).unwrap();
        let nprime = 2 * (n + pad).div_ceil(2);
        let grid = grid_periodogram(&x, &taper, MeanMode::ArithmeticMean, nprime).unwrap();
        let scale = grid.iter().cloned().fold(0.0, f64::max);
        for (k, g) in grid.iter().enumerate() {
            let direct = tapered_periodogram(&x, &taper, MeanMode::ArithmeticMean, k as f64 / nprime as f64).unwrap();
            prop_assert!((g - direct).abs() <= 1e-10 * direct.max(1e-6 * scale));
        }
    }

    #[test]
    fn smoothing_is_convex_combination(
        values in prop::collection::vec(0.0f64..100.0, 33),
        m in 0usize..8,
        k in 0usize..=32,
        raw in prop::collection::vec(0.1f64..1.0, 8),
    ) {
        let mut w: Vec<f64> = (0..=2 * m).map(|i| raw[i.abs_diff(m)]).collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|g| *g /= total);
        let scheme = SmoothingScheme::new(64, w, EdgePolicy::ExcludeRenormalize).unwrap();
        let window = scheme.window(k).unwrap();
        let v = smoothed_estimate(&values, &scheme, k).unwrap();
        let lo = window.iter().map(|t| values[t.0]).fold(f64::INFINITY, f64::min);
        let hi = window.iter().map(|t| values[t.0]).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        let wsum: f64 = window.iter().map(|t| t.1).sum();
        prop_assert!((wsum - 1.0).abs() < 1e-12);
    }
}
