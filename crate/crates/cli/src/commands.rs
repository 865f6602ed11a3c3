use std::fs::File;
use std::io::{self, Write};
use std::time::Instant;

use taperspec::estimator::SmoothingScheme;
use taperspec::experiment::monte_carlo_validation;
use taperspec::taper::lemma_h2_approx;
use taperspec::{CovarianceCache, CovarianceMethod, ExactOracle, ProcessModel, Taper, VarianceTable};

use crate::config::ExperimentConfig;
use crate::CliError;

/// Shortest decimal that parses back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x}")
}

fn csv_writer(config: &ExperimentConfig) -> Result<csv::Writer<Box<dyn Write>>, CliError> {
    let sink: Box<dyn Write> = match &config.output {
        Some(path) => Box::new(
            File::create(path).map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?,
        ),
        None => Box::new(io::stdout().lock()),
    };
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink))
}

/// Validates every configured process before any output is produced.
fn models(config: &ExperimentConfig) -> Result<Vec<(String, ProcessModel)>, CliError> {
    config
        .processes
        .iter()
        .map(|spec| Ok((spec.label(), spec.model(config.sigma2, config.delta)?)))
        .collect()
}

/// Rejects taper proportions and smoothing windows that do not fit the grid.
fn scheme(config: &ExperimentConfig, nprime: usize, m: usize) -> Result<SmoothingScheme, CliError> {
    Ok(SmoothingScheme::uniform(nprime, m)?.with_edge_policy(config.edge))
}

fn check_cells(config: &ExperimentConfig) -> Result<(), CliError> {
    for &p in &config.p_values {
        Taper::split_cosine(p, config.n)?;
    }
    for nprime in config.nprimes() {
        for &m in &config.m_values {
            scheme(config, nprime, m)?;
        }
    }
    Ok(())
}

fn write_row<I, S>(w: &mut csv::Writer<Box<dyn Write>>, row: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(row).map_err(|e| CliError::Io(e.to_string()))
}

fn finish(mut w: csv::Writer<Box<dyn Write>>) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

/// `process,f,S,dB` on `points + 1` equally spaced frequencies in `[0, 1/(2Δ)]`.
pub fn spectrum(config: &ExperimentConfig) -> Result<(), CliError> {
    let models = models(config)?;
    let mut w = csv_writer(config)?;
    write_row(&mut w, ["process", "f", "S", "dB"])?;
    for (label, model) in &models {
        for i in 0..=config.points {
            let f = model.nyquist() * i as f64 / config.points as f64;
            let s = model.spectral_density(f)?;
            write_row(&mut w, [label.clone(), num(f), num(s), num(10.0 * s.log10())])?;
        }
    }
    finish(w)
}

/// `process,p,M,Nprime,k,f,exact,usual,new` for every cell and `k = 1..N'/2-1`.
pub fn figure2(config: &ExperimentConfig) -> Result<(), CliError> {
    let models = models(config)?;
    check_cells(config)?;
    let mut w = csv_writer(config)?;
    write_row(&mut w, ["process", "p", "M", "Nprime", "k", "f", "exact", "usual", "new"])?;
    for (label, model) in &models {
        for nprime in config.nprimes() {
            for &p in &config.p_values {
                let taper = Taper::split_cosine(p, config.n)?;
                for &m in &config.m_values {
                    let table = VarianceTable::compute(model, &taper, &scheme(config, nprime, m)?, config.method)?;
                    for r in table.interior() {
                        write_row(
                            &mut w,
                            [
                                label.clone(),
                                num(p),
                                m.to_string(),
                                nprime.to_string(),
                                r.k.to_string(),
                                num(r.f),
                                num(r.exact),
                                num(r.usual),
                                num(r.new),
                            ],
                        )?;
                    }
                }
            }
        }
    }
    finish(w)
}

/// `process,p,M,Nprime,k,f,empirical,exact,std_error,z`.
pub fn mc_validate(config: &ExperimentConfig) -> Result<(), CliError> {
    if config.replicates < 100 {
        return Err(CliError::Config(format!(
            "replicates = {} but at least 100 are required",
            config.replicates
        )));
    }
    let models = models(config)?;
    check_cells(config)?;
    let mut w = csv_writer(config)?;
    write_row(
        &mut w,
        ["process", "p", "M", "Nprime", "k", "f", "empirical", "exact", "std_error", "z"],
    )?;
    for (label, model) in &models {
        for nprime in config.nprimes() {
            let indices = if config.indices.is_empty() {
                vec![nprime / 8, nprime / 4, 3 * nprime / 8]
            } else {
                config.indices.clone()
            };
            for &p in &config.p_values {
                let taper = Taper::split_cosine(p, config.n)?;
                for &m in &config.m_values {
                    let records = monte_carlo_validation(
                        model,
                        &taper,
                        &scheme(config, nprime, m)?,
                        config.mean,
                        config.replicates,
                        &indices,
                        config.seed,
                    )?;
                    for r in records {
                        write_row(
                            &mut w,
                            [
                                label.clone(),
                                num(p),
                                m.to_string(),
                                nprime.to_string(),
                                r.k.to_string(),
                                num(r.f),
                                num(r.empirical),
                                num(r.exact),
                                num(r.std_error),
                                num(r.z_score()),
                            ],
                        )?;
                    }
                }
            }
        }
    }
    finish(w)
}

#[derive(Debug, Clone, Copy)]
pub struct Timing {
    pub n: usize,
    pub direct: f64,
    pub accelerated: f64,
}

/// Times the direct and accelerated exact grids at `N' = 2N`, `M = 2`
/// for the first configured process and taper proportion.
pub fn bench(config: &ExperimentConfig) -> Result<Vec<Timing>, CliError> {
    let spec = &config.processes[0];
    let model = spec.model(config.sigma2, config.delta)?;
    let p = config.p_values[0];
    let threads = rayon::current_num_threads();
    let mut out = io::stdout().lock();
    let mut emit = |line: String| writeln!(out, "{line}").map_err(|e| CliError::Io(e.to_string()));
    emit(format!(
        "bench: process={} p={p} M=2 N'=2N threads={threads}",
        spec.label()
    ))?;
    let mut timings = Vec::new();
    for &n in &config.sizes {
        let taper = Taper::split_cosine(p, n)?;
        let oracle = ExactOracle::new(&model, &taper)?;
        let time = |method| -> Result<f64, CliError> {
            let start = Instant::now();
            CovarianceCache::build(&oracle, 2 * n, 2, method)?;
            Ok(start.elapsed().as_secs_f64())
        };
        let accelerated = time(CovarianceMethod::Accelerated)?;
        let direct = time(CovarianceMethod::Direct)?;
        emit(format!(
            "N={n} direct={direct:.6}s accelerated={accelerated:.6}s speedup={:.1}x",
            direct / accelerated
        ))?;
        timings.push(Timing { n, direct, accelerated });
    }
    let find = |n: usize| timings.iter().find(|t| t.n == n);
    if let (Some(a), Some(b)) = (find(256), find(512)) {
        let ratio = b.direct / a.direct;
        let verdict = if (4.0..=12.0).contains(&ratio) { "ok" } else { "outside [4, 12]" };
        emit(format!("direct growth t(512)/t(256) = {ratio:.2} ({verdict})"))?;
    }
    if let Some(t) = find(1024) {
        let speedup = t.direct / t.accelerated;
        let verdict = if speedup >= 5.0 { "ok" } else { "below 5x" };
        emit(format!("speedup at N=1024 = {speedup:.1}x ({verdict})"))?;
    }
    Ok(timings)
}

/// Quick internal consistency checks. Returns the number of failed checks.
pub fn selftest() -> Result<usize, CliError> {
    let mut failures = 0;
    let mut report = |name: &str, ok: bool, detail: String| {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    let model = ProcessModel::white_noise(1.0, 1.0)?;
    let mut worst: f64 = 0.0;
    for p in [0.0, 0.2, 0.5, 1.0] {
        let n = 64;
        let taper = Taper::split_cosine(p, n)?;
        let oracle = ExactOracle::new(&model, &taper)?;
        let h2 = taper.h2_grid(n)?;
        let h0 = h2[0].re;
        for a in 0..=n / 2 {
            for b in a..=n / 2 {
                let exact = oracle.rel_covariance(a as f64 / n as f64, b as f64 / n as f64)?;
                let form = (h2[b - a].norm_sqr() + h2[(a + b) % n].norm_sqr()) / (h0 * h0);
                worst = worst.max((exact - form).abs() / form.max(1e-3));
            }
        }
    }
    report("white-noise oracle identity", worst <= 1e-9, format!("max relative error {worst:.3e}"));

    let mut worst: f64 = 0.0;
    for p in [0.2, 0.5] {
        let taper = Taper::split_cosine(p, 1024)?;
        let h4: f64 = taper.values().iter().map(|h| h.powi(4)).sum();
        for nprime in [1024usize, 2048] {
            let lhs: f64 = taper.h2_grid(nprime)?.iter().map(|z| z.norm_sqr()).sum();
            let rhs = nprime as f64 / 1024.0 * h4 / 1024.0;
            worst = worst.max((lhs / rhs - 1.0).abs());
        }
    }
    report("Parseval identity", worst <= 1e-10, format!("max relative error {worst:.3e}"));

    let scaled: Vec<f64> = [512usize, 1024, 2048]
        .iter()
        .map(|&n| -> Result<f64, CliError> {
            let taper = Taper::split_cosine(0.5, n)?;
            let mut e: f64 = 0.0;
            for i in 0..=500 {
                let lambda = i as f64 * 1e-3;
                let approx = lemma_h2_approx(taper.kind(), lambda, n, 1.0)?;
                e = e.max((taper.h2_dft(lambda, 1.0) - approx).norm());
            }
            Ok(n as f64 * e)
        })
        .collect::<Result<_, _>>()?;
    report(
        "Lemma remainder bound",
        scaled.windows(2).all(|w| w[1] <= w[0]),
        format!(
            "N·max|R| at N=512,1024,2048: {}",
            scaled.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    );
    Ok(failures)
}
