use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use taperspec::process::{ProcessModel, AR4_COEFFICIENTS};

fn local_maxima(model: &ProcessModel, step: f64) -> Vec<(f64, f64)> {
    let count = (0.5 / step).round() as usize;
    let s: Vec<f64> = (0..=count)
        .map(|i| model.spectral_density(i as f64 * step).unwrap())
        .collect();
    (1..count)
        .filter(|&i| s[i] > s[i - 1] && s[i] > s[i + 1])
        .map(|i| (i as f64 * step, s[i]))
        .collect()
}

#[test]
fn ar4_has_two_sharp_peaks() {
    let model = ProcessModel::reference_ar4();
    let peaks = local_maxima(&model, 1e-5);
    assert_eq!(model.spectral_peaks(1e-5), peaks);
    assert_eq!(peaks.len(), 2, "{peaks:?}");
    // regression values from a 1e-5 grid search of the closed-form density
    assert!((peaks[0].0 - 0.11022).abs() < 1.5e-5);
    assert!((peaks[1].0 - 0.13964).abs() < 1.5e-5);
    assert!((peaks[0].1 / 23427.48525 - 1.0).abs() < 1e-6);
    assert!((peaks[1].1 / 16580.29756 - 1.0).abs() < 1e-6);
    assert!(10.0 * peaks[0].1.log10() > 40.0);
    assert!(10.0 * peaks[1].1.log10() > 40.0);
}

#[test]
fn ar4_autocovariances_match_inverse_transform() {
    let model = ProcessModel::reference_ar4();
    let size = 1usize << 18;
    let mut buf: Vec<Complex64> = (0..size)
        .map(|i| {
            let f = i as f64 / size as f64;
            // density is even and 1-periodic
            let f = if f > 0.5 { 1.0 - f } else { f };
            Complex64::new(model.spectral_density(f).unwrap(), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_inverse(size).process(&mut buf);
    let s = model.autocovariances(1023).unwrap();
    let s0 = s[0];
    for (tau, v) in s.iter().enumerate() {
        let oracle = buf[tau].re / size as f64;
        assert!((v - oracle).abs() <= 1e-6 * s0, "lag {tau}: {v} vs {oracle}");
    }
}

#[test]
fn autocovariances_decay_and_bounded() {
    let model = ProcessModel::reference_ar4();
    let s = model.autocovariances(4000).unwrap();
    assert!(s.iter().all(|v| v.abs() <= s[0]));
    assert!(s[4000].abs() < 1e-20 * s[0].max(1.0) || s[4000].abs() < s[1000].abs());
    assert_eq!(s.len(), 4001);
    let short = model.autocovariances(2).unwrap();
    assert_eq!(short.len(), 3);
    assert_eq!(&short[..], &s[..3]);
}

fn reconstruction_error(model: &ProcessModel, lags: usize) -> f64 {
    let s = model.autocovariances(lags).unwrap();
    (0..=500)
        .map(|i| i as f64 * 1e-3)
        .map(|f| {
            let recon = s[0] + 2.0 * (1..=lags).map(|t| s[t] * (2.0 * PI * f * t as f64).cos()).sum::<f64>();
            (recon / model.spectral_density(f).unwrap() - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn spectrum_reconstruction_from_autocovariances() {
    // The AR(4) poles have modulus ≈ 0.9805, so 512 lags leave a tail of
    // relative size ~1e-4·s₀, large against the density near Nyquist.
    let model = ProcessModel::reference_ar4();
    let e512 = reconstruction_error(&model, 512);
    let e1024 = reconstruction_error(&model, 1024);
    let e2048 = reconstruction_error(&model, 2048);
    assert!(e1024 < 1e-3, "{e1024}");
    assert!(e2048 < e1024 && e1024 < e512);
    assert!(e2048 < 1e-7);
}

#[test]
fn ar4_coefficients() {
    assert_eq!(AR4_COEFFICIENTS, [2.7607, -3.8106, 2.6535, -0.9238]);
    assert_eq!(ProcessModel::reference_ar4().coefficients(), &AR4_COEFFICIENTS);
}

#[test]
fn white_noise_sample_moments() {
    let model = ProcessModel::white_noise(2.0, 1.0).unwrap().with_mean(1.5);
    let x = model.simulate(200_000, 3).unwrap();
    let n = x.len() as f64;
    let mean = x.samples().iter().sum::<f64>() / n;
    let var = x.samples().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((mean - 1.5).abs() < 3.0 * (2.0 / n).sqrt() + 1e-3);
    assert!((var - 2.0).abs() < 4.0 * 2.0 * (2.0 / n).sqrt());
}

#[test]
fn ar4_lag_one_autocovariance_monte_carlo() {
    let model = ProcessModel::reference_ar4();
    let n = 1024;
    let reps = 2000;
    let sim = model.simulator(n).unwrap();
    let s1 = model.autocovariances(1).unwrap()[1];
    let values: Vec<f64> = (0..reps)
        .map(|r| {
            let x = sim.sample(1000 + r as u64);
            let x = x.samples();
            (0..n - 1).map(|t| x[t] * x[t + 1]).sum::<f64>() / (n - 1) as f64
        })
        .collect();
    let mean = values.iter().sum::<f64>() / reps as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let se = (var / reps as f64).sqrt();
    assert!((mean - s1).abs() < 3.0 * se, "mean {mean} vs s1 {s1} (se {se})");
}
