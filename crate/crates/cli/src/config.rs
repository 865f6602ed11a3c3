//! Experiment configuration: `key = value` files overlaid by command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use taperspec::process::AR4_COEFFICIENTS;
use taperspec::{CovarianceMethod, EdgePolicy, MeanMode, ProcessModel};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Recognised keys, shared by config files and flags.
pub const KEYS: &[&str] = &[
    "process",
    "n",
    "nprime-factors",
    "p",
    "m",
    "delta",
    "sigma2",
    "seed",
    "output",
    "replicates",
    "k",
    "sizes",
    "points",
    "mean",
    "method",
    "edge",
];

#[derive(Debug, Clone, PartialEq)]
pub enum ProcessSpec {
    WhiteNoise,
    Ar4,
    Ar(Vec<f64>),
}

impl ProcessSpec {
    pub fn label(&self) -> String {
        match self {
            ProcessSpec::WhiteNoise => "white-noise".into(),
            ProcessSpec::Ar4 => "ar4".into(),
            ProcessSpec::Ar(phi) => {
                let parts: Vec<String> = phi.iter().map(|c| c.to_string()).collect();
                format!("ar:{}", parts.join(":"))
            }
        }
    }

    pub fn model(&self, sigma2: f64, delta: f64) -> taperspec::Result<ProcessModel> {
        match self {
            ProcessSpec::WhiteNoise => ProcessModel::white_noise(sigma2, delta),
            ProcessSpec::Ar4 => ProcessModel::autoregressive(AR4_COEFFICIENTS.to_vec(), sigma2, delta),
            ProcessSpec::Ar(phi) => ProcessModel::autoregressive(phi.clone(), sigma2, delta),
        }
    }
}

impl FromStr for ProcessSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s.trim() {
            "white-noise" | "wn" => Ok(ProcessSpec::WhiteNoise),
            "ar4" => Ok(ProcessSpec::Ar4),
            other => match other.strip_prefix("ar:") {
                Some(coeffs) => coeffs
                    .split(':')
                    .map(|c| c.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map(ProcessSpec::Ar)
                    .or_else(|_| err(format!("bad AR coefficients in '{other}'"))),
                None => err(format!("unknown process '{other}' (white-noise, ar4, ar:φ1:φ2:...)")),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub processes: Vec<ProcessSpec>,
    pub n: usize,
    pub nprime_factors: Vec<usize>,
    pub p_values: Vec<f64>,
    pub m_values: Vec<usize>,
    pub delta: f64,
    pub sigma2: f64,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub replicates: usize,
    /// Grid indices for Monte-Carlo validation; empty means `N'/8, N'/4, 3N'/8`.
    pub indices: Vec<usize>,
    pub sizes: Vec<usize>,
    pub points: usize,
    pub mean: MeanMode,
    pub method: CovarianceMethod,
    /// Treatment of the zero-frequency term inside smoothing windows near `k = 0`.
    pub edge: EdgePolicy,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            processes: vec![ProcessSpec::WhiteNoise, ProcessSpec::Ar4],
            n: 1024,
            nprime_factors: vec![1, 2],
            p_values: vec![0.2, 0.5],
            m_values: vec![0, 1, 2],
            delta: 1.0,
            sigma2: 1.0,
            seed: 1,
            output: None,
            replicates: 1000,
            indices: Vec::new(),
            sizes: vec![128, 256, 512, 1024],
            points: 4096,
            mean: MeanMode::Known(0.0),
            method: CovarianceMethod::Accelerated,
            edge: EdgePolicy::ExcludeRenormalize,
        }
    }
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config file {}: {e}", path.display())))?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return err(format!("line {}: expected key = value", lineno + 1));
        };
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return err(format!("line {}: unknown key '{key}'", lineno + 1));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError> {
    let items = value
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().or_else(|_| err(format!("{key}: cannot parse '{s}'"))))
        .collect::<Result<Vec<T>, _>>()?;
    if items.is_empty() {
        return err(format!("{key}: list must not be empty"));
    }
    Ok(items)
}

fn scalar<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .trim()
        .parse::<T>()
        .or_else(|_| err(format!("{key}: cannot parse '{value}'")))
}

impl ExperimentConfig {
    /// Applies settings from `map` on top of the defaults.
    pub fn from_settings(map: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let mut c = ExperimentConfig::default();
        for (key, value) in map {
            match key.as_str() {
                "process" => {
                    c.processes = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(ProcessSpec::from_str)
                        .collect::<Result<_, _>>()?;
                }
                "n" => c.n = scalar(key, value)?,
                "nprime-factors" => c.nprime_factors = list(key, value)?,
                "p" => c.p_values = list(key, value)?,
                "m" => c.m_values = list(key, value)?,
                "delta" => c.delta = scalar(key, value)?,
                "sigma2" => c.sigma2 = scalar(key, value)?,
                "seed" => c.seed = scalar(key, value)?,
                "output" => {
                    c.output = match value.as_str() {
                        "-" | "" => None,
                        path => Some(PathBuf::from(path)),
                    }
                }
                "replicates" => c.replicates = scalar(key, value)?,
                "k" => c.indices = list(key, value)?,
                "sizes" => c.sizes = list(key, value)?,
                "points" => c.points = scalar(key, value)?,
                "mean" => {
                    c.mean = match value.as_str() {
                        "known" => MeanMode::Known(0.0),
                        "arithmetic" => MeanMode::ArithmeticMean,
                        "weighted" => MeanMode::WeightedAverage,
                        other => return err(format!("mean: unknown mode '{other}' (known, arithmetic, weighted)")),
                    }
                }
                "method" => {
                    c.method = match value.as_str() {
                        "accelerated" => CovarianceMethod::Accelerated,
                        "direct" => CovarianceMethod::Direct,
                        other => return err(format!("method: unknown '{other}' (accelerated, direct)")),
                    }
                }
                "edge" => {
                    c.edge = match value.as_str() {
                        "renormalize" => EdgePolicy::ExcludeRenormalize,
                        "exclude" => EdgePolicy::Exclude,
                        "include" => EdgePolicy::Include,
                        other => return err(format!("edge: unknown policy '{other}' (renormalize, exclude, include)")),
                    }
                }
                other => return err(format!("unknown key '{other}'")),
            }
        }
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.processes.is_empty() {
            return err("process: list must not be empty");
        }
        if self.n < 2 {
            return err("n must be at least 2");
        }
        if self.nprime_factors.contains(&0) {
            return err("nprime-factors must be positive");
        }
        if let Some(p) = self.p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return err(format!("p = {p} outside [0, 1]"));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return err("delta must be positive");
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return err("sigma2 must be positive");
        }
        if self.points < 2048 {
            return err("points must be at least 2048");
        }
        if self.sizes.iter().any(|&s| s < 2) {
            return err("sizes must be at least 2");
        }
        Ok(())
    }

    /// Grid sizes `N' = factor · N`.
    pub fn nprimes(&self) -> Vec<usize> {
        self.nprime_factors.iter().map(|f| f * self.n).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_reproduce_reference_grid() {
        let c = ExperimentConfig::from_settings(&BTreeMap::new()).unwrap();
        assert_eq!(c.n, 1024);
        assert_eq!(c.nprimes(), vec![1024, 2048]);
        assert_eq!(c.p_values, vec![0.2, 0.5]);
        assert_eq!(c.m_values, vec![0, 1, 2]);
        assert_eq!(c.processes, vec![ProcessSpec::WhiteNoise, ProcessSpec::Ar4]);
    }

    #[test]
    fn parses_file_text() {
        let map = parse_config_text("# comment\nn = 64\nnprime_factors = 2\nprocess = ar:0.5:-0.2, wn\n").unwrap();
        let c = ExperimentConfig::from_settings(&map).unwrap();
        assert_eq!(c.n, 64);
        assert_eq!(c.nprime_factors, vec![2]);
        assert_eq!(c.processes, vec![ProcessSpec::Ar(vec![0.5, -0.2]), ProcessSpec::WhiteNoise]);
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(parse_config_text("bogus = 1").is_err());
        assert!(parse_config_text("n 12").is_err());
        for (k, v) in [("p", "1.5"), ("n", "x"), ("m", ""), ("process", "arma"), ("points", "10")] {
            let map = BTreeMap::from([(k.to_string(), v.to_string())]);
            assert!(ExperimentConfig::from_settings(&map).is_err(), "{k}={v}");
        }
    }

    #[test]
    fn edge_policy_switch() {
        let map = BTreeMap::from([("edge".to_string(), "exclude".to_string())]);
        assert_eq!(ExperimentConfig::from_settings(&map).unwrap().edge, EdgePolicy::Exclude);
        assert_eq!(ExperimentConfig::default().edge, EdgePolicy::ExcludeRenormalize);
    }

    #[test]
    fn process_labels_round_trip() {
        for s in ["white-noise", "ar4", "ar:0.5:-0.25"] {
            assert_eq!(s.parse::<ProcessSpec>().unwrap().label(), s);
        }
    }
}
