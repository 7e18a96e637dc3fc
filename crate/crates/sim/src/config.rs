//! Experiment configuration files (TOML).
//!
//! ```toml
//! format_version = 1
//! iterations = 2000          # T, at least 1
//! trace_every = 10
//! seeds = [1, 2, 3]
//! output = "out"             # optional, relative to this file
//! gamma_sweep = [0.5, 0.7]   # optional
//!
//! [graph]
//! kind = "erdos_renyi"       # or "complete" (n) or "file" (path)
//! n = 10
//! prob = 0.4
//! seed = 7
//!
//! [problem]
//! kind = "quadratic"         # or "nonconvex" or "two_layer"
//! p = 5
//! condition_number = 100.0
//! sigma = 0.1
//!
//! [lyapunov]                 # optional
//! fstar = "optimum"          # or a number, or "best_observed"
//!
//! [[algorithms]]
//! name = "dsgpa_f_pb"
//! eta = 0.03
//! alpha = 5.0
//! beta = 20.0
//! gamma = 0.7
//! ```
//!
//! Syntax and type errors, and constraint violations checked while
//! parsing, are reported with the line they occur on.

use std::fs;
use std::num::NonZeroUsize;
use std::ops::Range;
use std::path::{Path, PathBuf};

use dsgpa_core::problems::DEFAULT_NONCONVEX_LAMBDA;
use dsgpa_core::Algorithm;
use serde::{Deserialize, Deserializer};
use toml::Spanned;

use crate::error::{Result, SimError};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(deserialize_with = "format_version")]
    pub format_version: u32,
    pub iterations: NonZeroUsize,
    #[serde(default = "one")]
    pub trace_every: NonZeroUsize,
    #[serde(deserialize_with = "nonempty")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Fills the `wall_ns` column; traces are then no longer byte-reproducible.
    #[serde(default)]
    pub wall_time: bool,
    #[serde(default, deserialize_with = "gamma_list")]
    pub gamma_sweep: Option<Vec<f64>>,
    #[serde(default)]
    pub lyapunov: Option<LyapunovConfig>,
    pub graph: GraphSpec,
    pub problem: ProblemSpec,
    #[serde(deserialize_with = "nonempty")]
    pub algorithms: Vec<Spanned<AlgorithmEntry>>,
}

fn one() -> NonZeroUsize {
    NonZeroUsize::MIN
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    File {
        path: PathBuf,
    },
    ErdosRenyi {
        n: usize,
        prob: f64,
        #[serde(default)]
        seed: u64,
    },
    Complete {
        n: usize,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Quadratic {
        p: usize,
        #[serde(default = "default_condition")]
        condition_number: f64,
        #[serde(default = "default_heterogeneity")]
        heterogeneity: f64,
        #[serde(default)]
        sigma: f64,
        #[serde(default)]
        seed: u64,
    },
    Nonconvex {
        p: usize,
        #[serde(default = "default_lambda")]
        lambda: f64,
        #[serde(default)]
        sigma: f64,
        #[serde(default)]
        seed: u64,
    },
    TwoLayer {
        #[serde(default = "default_hidden")]
        hidden: usize,
        #[serde(default)]
        sigma: f64,
        #[serde(default)]
        seed: u64,
        dataset: DatasetSpec,
    },
}

fn default_condition() -> f64 {
    10.0
}

fn default_heterogeneity() -> f64 {
    1.0
}

fn default_lambda() -> f64 {
    DEFAULT_NONCONVEX_LAMBDA
}

fn default_hidden() -> usize {
    50
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    Blobs {
        samples: usize,
        dim: usize,
        #[serde(default = "default_classes")]
        classes: usize,
        #[serde(default = "default_spread")]
        spread: f64,
        #[serde(default)]
        seed: u64,
    },
    Csv {
        path: PathBuf,
        #[serde(default = "default_classes")]
        classes: usize,
    },
}

fn default_classes() -> usize {
    10
}

fn default_spread() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovConfig {
    pub fstar: FStar,
    /// Subtracted from the best observed value when `fstar = "best_observed"`.
    #[serde(default)]
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum FStar {
    Value(f64),
    Mode(FStarMode),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FStarMode {
    /// The problem's known optimal value.
    Optimum,
    /// The smallest `f(x̄)` recorded by any run, minus `slack`.
    BestObserved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    #[default]
    Fixed,
    SqrtHorizon,
    TimeVarying,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmEntry {
    #[serde(deserialize_with = "algorithm_name")]
    pub name: Algorithm,
    /// Names the trace files; defaults to `name`.
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default, deserialize_with = "gamma_value")]
    pub gamma: Option<f64>,
    #[serde(default = "one")]
    pub batch: NonZeroUsize,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub kappa1: Option<f64>,
    #[serde(default)]
    pub kappa2: Option<f64>,
    #[serde(default)]
    pub decay_exponent: Option<f64>,
}

impl AlgorithmEntry {
    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(self.name.name())
    }
}

fn format_version<'de, D: Deserializer<'de>>(d: D) -> Result<u32, D::Error> {
    let v = u32::deserialize(d)?;
    if v != FORMAT_VERSION {
        return Err(serde::de::Error::custom(format!(
            "unsupported format_version {v}, this build reads {FORMAT_VERSION}"
        )));
    }
    Ok(v)
}

fn nonempty<'de, D, T>(d: D) -> Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    let v = Vec::<T>::deserialize(d)?;
    if v.is_empty() {
        return Err(serde::de::Error::custom("list must not be empty"));
    }
    Ok(v)
}

fn check_gamma<E: serde::de::Error>(g: f64) -> Result<f64, E> {
    if (0.0..=1.0).contains(&g) {
        Ok(g)
    } else {
        Err(E::custom(format!("gamma {g} is outside [0, 1]")))
    }
}

fn gamma_value<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    f64::deserialize(d).and_then(check_gamma).map(Some)
}

fn gamma_list<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
    let v: Vec<f64> = nonempty(d)?;
    v.into_iter()
        .map(check_gamma)
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn algorithm_name<'de, D: Deserializer<'de>>(d: D) -> Result<Algorithm, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(|_| {
        let known: Vec<&str> = Algorithm::ALL.iter().map(|a| a.name()).collect();
        serde::de::Error::custom(format!(
            "unknown algorithm `{s}`, expected one of {}",
            known.join(", ")
        ))
    })
}

/// A parsed configuration together with its source, for line lookups and
/// resolving relative paths.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub source: String,
    pub path: PathBuf,
}

impl LoadedConfig {
    /// 1-based line of a byte offset into the source.
    pub fn line_of(&self, offset: usize) -> usize {
        self.source[..offset.min(self.source.len())]
            .matches('\n')
            .count()
            + 1
    }

    /// An error pointing at the start of `span`.
    pub fn error_at(&self, span: Range<usize>, message: impl AsRef<str>) -> SimError {
        SimError::Config(format!(
            "{}:{}: {}",
            self.path.display(),
            self.line_of(span.start),
            message.as_ref()
        ))
    }

    /// Paths in the file are relative to the file's directory.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.path.parent().unwrap_or(Path::new(".")).join(p)
        }
    }
}

pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let source = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    parse_config(source, path)
}

pub fn parse_config(source: String, path: &Path) -> Result<LoadedConfig> {
    match toml::from_str::<ExperimentConfig>(&source) {
        Ok(config) => Ok(LoadedConfig {
            config,
            source,
            path: path.to_path_buf(),
        }),
        Err(e) => {
            let line = e
                .span()
                .map(|s| source[..s.start].matches('\n').count() + 1);
            let location = match line {
                Some(l) => format!("{}:{l}", path.display()),
                None => path.display().to_string(),
            };
            Err(SimError::Config(format!("{location}: {}", e.message())))
        }
    }
}
