//! Data tapers and taper-derived quantities.
//!
//! A taper of length `N` is sampled from a profile `h` on `[0, 1]` at the cell
//! midpoints `x_t = (2t - 1) / (2N)`, `t = 1..=N`. Index `i` of
//! [`Taper::values`] holds `h_{i+1}`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Generating profile of a taper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TaperKind {
    Rectangular,
    /// Split cosine bell; a fraction `p` of the record is tapered, half at each end.
    SplitCosine { p: f64 },
}

impl TaperKind {
    pub fn split_cosine(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("taper proportion p = {p} not in [0, 1]")));
        }
        Ok(if p == 0.0 {
            TaperKind::Rectangular
        } else {
            TaperKind::SplitCosine { p }
        })
    }

    /// Taper proportion; 0 for the rectangular taper.
    pub fn proportion(&self) -> f64 {
        match *self {
            TaperKind::Rectangular => 0.0,
            TaperKind::SplitCosine { p } => p,
        }
    }

    /// Evaluates the profile `h(x)` for `x` in `[0, 1]`.
    pub fn profile(&self, x: f64) -> f64 {
        match *self {
            TaperKind::Rectangular => 1.0,
            TaperKind::SplitCosine { p } => {
                if x <= p / 2.0 {
                    0.5 * (1.0 - (2.0 * PI * x / p).cos())
                } else if x >= 1.0 - p / 2.0 {
                    0.5 * (1.0 - (2.0 * PI * (1.0 - x) / p).cos())
                } else {
                    1.0
                }
            }
        }
    }

    /// `∫₀¹ h²(u) du`.
    pub fn integral_h2(&self) -> f64 {
        1.0 - 5.0 * self.proportion() / 8.0
    }

    /// `∫₀¹ h⁴(u) du`.
    pub fn integral_h4(&self) -> f64 {
        1.0 - 93.0 * self.proportion() / 128.0
    }

    /// Large-`N` limit of the inflation factor, `∫h⁴ / (∫h²)²`.
    pub fn limiting_inflation_factor(&self) -> f64 {
        self.integral_h4() / self.integral_h2().powi(2)
    }
}

impl fmt::Display for TaperKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaperKind::Rectangular => write!(f, "rectangular"),
            TaperKind::SplitCosine { p } => write!(f, "split-cosine(p={p})"),
        }
    }
}

/// Sampled taper weights `h_1..h_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Taper {
    values: Vec<f64>,
    kind: TaperKind,
}

impl Taper {
    /// Samples `kind` at the `n` cell midpoints.
    pub fn new(kind: TaperKind, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("taper length {n} < 2")));
        }
        if let TaperKind::SplitCosine { p } = kind {
            TaperKind::split_cosine(p)?;
        }
        let values = (1..=n)
            .map(|t| kind.profile((2 * t - 1) as f64 / (2 * n) as f64))
            .collect();
        Ok(Taper { values, kind })
    }

    /// Split cosine taper with proportion `p`; `p = 0` gives the rectangular taper.
    pub fn split_cosine(p: f64, n: usize) -> Result<Self> {
        Taper::new(TaperKind::split_cosine(p)?, n)
    }

    pub fn rectangular(n: usize) -> Result<Self> {
        Taper::new(TaperKind::Rectangular, n)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> TaperKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Σ h_t²`.
    pub fn sum_squares(&self) -> f64 {
        self.values.iter().map(|h| h * h).sum()
    }

    /// Variance inflation factor `C_h = (Σh⁴/N) / (Σh²/N)²`.
    pub fn inflation_factor(&self) -> f64 {
        let n = self.len() as f64;
        let s2 = self.sum_squares() / n;
        let s4: f64 = self.values.iter().map(|h| h.powi(4)).sum::<f64>() / n;
        s4 / (s2 * s2)
    }

    /// `H₂(f) = (1/N) Σ_t h_t² e^{-i2π t f Δ}` by direct summation.
    pub fn h2_dft(&self, f: f64, delta: f64) -> Complex64 {
        let lambda = f * delta;
        let n = self.len() as f64;
        self.values
            .iter()
            .enumerate()
            .map(|(i, h)| {
                let t = (i + 1) as f64;
                Complex64::from_polar(h * h, -2.0 * PI * lambda * t)
            })
            .sum::<Complex64>()
            / n
    }

    /// `H₂` at all grid frequencies `f_{N',l} = l / (N'Δ)`, `l = 0..N'`.
    ///
    /// The grid values do not depend on `Δ`. Entry `l` and entry `N' - l`
    /// are complex conjugates.
    pub fn h2_grid(&self, nprime: usize) -> Result<Vec<Complex64>> {
        if nprime == 0 {
            return Err(Error::invalid("grid size N' must be positive"));
        }
        let n = self.len() as f64;
        let mut buf = vec![Complex64::new(0.0, 0.0); nprime];
        for (i, h) in self.values.iter().enumerate() {
            buf[(i + 1) % nprime].re += h * h / n;
        }
        FftPlanner::new().plan_fft_forward(nprime).process(&mut buf);
        Ok(buf)
    }
}

/// `∫_a^b e^{iκu} du`, stable for small `κ`.
fn exp_integral(kappa: f64, a: f64, b: f64) -> Complex64 {
    let half = 0.5 * kappa * (b - a);
    let sinc = if half.abs() < 1e-8 {
        1.0 - half * half / 6.0
    } else {
        half.sin() / half
    };
    Complex64::from_polar((b - a) * sinc, 0.5 * kappa * (a + b))
}

/// `πλ / sin(πλ)`, continued by 1 at `λ = 0`.
fn dirichlet_correction(lambda: f64) -> f64 {
    let x = PI * lambda;
    if x.abs() < 1e-8 {
        1.0 + x * x / 6.0
    } else {
        x / x.sin()
    }
}

fn check_lambda(f: f64, delta: f64) -> Result<f64> {
    let lambda = f * delta;
    if !(-1e-12..=0.5 + 1e-12).contains(&lambda) || !lambda.is_finite() {
        return Err(Error::Domain {
            what: "f·Δ",
            value: lambda,
            domain: "[0, 0.5]".into(),
        });
    }
    Ok(lambda.clamp(0.0, 0.5))
}

/// `∫₀¹ h²(u) e^{-iωu} du` in closed form.
pub fn squared_profile_transform(kind: TaperKind, omega: f64) -> Complex64 {
    let p = kind.proportion();
    let middle = exp_integral(-omega, p / 2.0, 1.0 - p / 2.0);
    if p == 0.0 {
        return middle;
    }
    // On the rising edge h²(v) = 3/8 - cos(av)/2 + cos(2av)/8 with a = 2π/p.
    let a = 2.0 * PI / p;
    let edge = |w: f64| {
        let e = |k: f64| exp_integral(k, 0.0, p / 2.0);
        e(-w) * 0.375 - (e(a - w) + e(-a - w)) * 0.25 + (e(2.0 * a - w) + e(-2.0 * a - w)) * 0.0625
    };
    // The falling edge mirrors the rising one: u = 1 - v.
    edge(omega) + Complex64::from_polar(1.0, -omega) * edge(-omega) + middle
}

/// Large-`N` approximation of `H₂(f)`:
/// `∫₀¹ h²(u) e^{-i2πNuλ} du · e^{-iπλ} · πλ / sin(πλ)` with `λ = fΔ ∈ [0, 0.5]`.
pub fn lemma_h2_approx(kind: TaperKind, f: f64, n: usize, delta: f64) -> Result<Complex64> {
    let lambda = check_lambda(f, delta)?;
    let integral = squared_profile_transform(kind, 2.0 * PI * n as f64 * lambda);
    Ok(integral * Complex64::from_polar(dirichlet_correction(lambda), -PI * lambda))
}

/// Same as [`lemma_h2_approx`] with the integral evaluated by adaptive
/// Simpson quadrature to absolute tolerance `1e-12`.
pub fn lemma_h2_approx_quadrature(
    kind: TaperKind,
    f: f64,
    n: usize,
    delta: f64,
) -> Result<Complex64> {
    let lambda = check_lambda(f, delta)?;
    let omega = 2.0 * PI * n as f64 * lambda;
    let p = kind.proportion();
    let mut breaks = vec![0.0, p / 2.0, 1.0 - p / 2.0, 1.0];
    breaks.dedup();
    // Cut pieces into sub-intervals no longer than a quarter period.
    let max_len = if omega > 0.0 { 0.5 * PI / omega } else { 1.0 };
    let mut pieces = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let m = ((b - a) / max_len).ceil().max(1.0) as usize;
        for j in 0..m {
            pieces.push((a + (b - a) * j as f64 / m as f64, a + (b - a) * (j + 1) as f64 / m as f64));
        }
    }
    let tol = 1e-12 / pieces.len() as f64;
    let integrand = |u: f64| {
        let h = kind.profile(u);
        Complex64::from_polar(h * h, -omega * u)
    };
    let integral: Complex64 = pieces
        .iter()
        .map(|&(a, b)| adaptive_simpson(&integrand, a, b, tol, 40))
        .sum();
    Ok(integral * Complex64::from_polar(dirichlet_correction(lambda), -PI * lambda))
}

fn adaptive_simpson<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
) -> Complex64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (fa + fm * 4.0 + fb) * ((b - a) / 6.0);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Complex64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (fa + flm * 4.0 + fm) * ((m - a) / 6.0);
    let right = (fm + frm * 4.0 + fb) * ((b - m) / 6.0);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(Taper::split_cosine(-0.1, 8).is_err());
        assert!(Taper::split_cosine(1.5, 8).is_err());
        assert!(Taper::split_cosine(0.5, 1).is_err());
        assert!(Taper::new(TaperKind::SplitCosine { p: f64::NAN }, 8).is_err());
    }

    #[test]
    fn p_zero_is_rectangular() {
        let t = Taper::split_cosine(0.0, 8).unwrap();
        assert_eq!(t.kind(), TaperKind::Rectangular);
        assert!(t.values().iter().all(|&h| h == 1.0));
        assert_eq!(t.inflation_factor(), 1.0);
    }

    #[test]
    fn profile_values() {
        assert!((TaperKind::SplitCosine { p: 1.0 }.profile(0.5) - 1.0).abs() < 1e-15);
        assert!((TaperKind::SplitCosine { p: 0.5 }.profile(0.125) - 0.5).abs() < 1e-15);
        assert!((TaperKind::SplitCosine { p: 0.5 }.profile(0.875) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn taper_is_symmetric_and_bounded() {
        for &p in &[0.0, 0.2, 0.5, 1.0] {
            let t = Taper::split_cosine(p, 101).unwrap();
            let v = t.values();
            for i in 0..v.len() {
                assert!((0.0..=1.0).contains(&v[i]));
                assert!((v[i] - v[v.len() - 1 - i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn grid_matches_direct_sum() {
        let t = Taper::split_cosine(0.3, 50).unwrap();
        for &np in &[50usize, 64, 128, 37] {
            let grid = t.h2_grid(np).unwrap();
            let scale = t.h2_dft(0.0, 1.0).norm();
            for (l, g) in grid.iter().enumerate() {
                let d = t.h2_dft(l as f64 / np as f64, 1.0);
                assert!((g - d).norm() <= 1e-12 * scale, "N'={np} l={l}");
            }
        }
    }

    #[test]
    fn rectangular_zeros_at_fourier_frequencies() {
        let t = Taper::rectangular(64).unwrap();
        for l in 1..64 {
            assert!(t.h2_dft(l as f64 / 64.0, 1.0).norm() <= 1e-12);
        }
        let z = lemma_h2_approx(TaperKind::Rectangular, 3.0 / 64.0, 64, 1.0).unwrap();
        assert!(z.norm() < 1e-14);
    }

    #[test]
    fn lemma_at_zero_frequency_is_h2_integral() {
        for &p in &[0.2, 0.5, 1.0] {
            let kind = TaperKind::SplitCosine { p };
            let z = lemma_h2_approx(kind, 0.0, 1024, 1.0).unwrap();
            assert!((z.re - (1.0 - 5.0 * p / 8.0)).abs() < 1e-14);
            assert!(z.im.abs() < 1e-15);
        }
    }

    #[test]
    fn lemma_domain() {
        let kind = TaperKind::SplitCosine { p: 0.5 };
        assert!(lemma_h2_approx(kind, 0.6, 64, 1.0).is_err());
        assert!(lemma_h2_approx(kind, -0.1, 64, 1.0).is_err());
        assert!(lemma_h2_approx(kind, 0.25, 64, 2.0).is_ok());
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for &p in &[0.0, 0.2, 0.5, 1.0] {
            let kind = TaperKind::split_cosine(p).unwrap();
            for &lambda in &[0.0, 1e-4, 0.0013, 0.01, 0.137, 0.5] {
                let a = lemma_h2_approx(kind, lambda, 256, 1.0).unwrap();
                let b = lemma_h2_approx_quadrature(kind, lambda, 256, 1.0).unwrap();
                assert!((a - b).norm() < 1e-11, "p={p} λ={lambda}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn delta_scales_frequency() {
        let t = Taper::split_cosine(0.5, 64).unwrap();
        let a = t.h2_dft(0.1, 1.0);
        let b = t.h2_dft(0.05, 2.0);
        assert!((a - b).norm() < 1e-15);
    }
}
