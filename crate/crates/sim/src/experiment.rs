//! Turning a configuration into runs, executing them, and writing results.
//!
//! Every `(algorithm entry, γ, seed)` combination is one run with its own
//! trace file `<label>__seed<seed>.csv`. A run's seed is derived from the
//! master seed alone, `derive(seed, [RUN])`, so all algorithms started from
//! the same master seed share the initial point and the oracle noise
//! streams, and adding a seed to the list leaves existing runs untouched.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use dsgpa_core::algorithms::{run_from, Clock, RunSpec};
use dsgpa_core::netgraph::{complete_graph, erdos_renyi, is_connected};
use dsgpa_core::problems::{
    gaussian_blobs, nonconvex_problem_with_lambda, quadratic_problem, two_layer_sigmoid_problem,
};
use dsgpa_core::seed::derive;
use dsgpa_core::{
    sqrt_horizon_schedule, AlgoState, Algorithm, Gamma, HyperParams, Network, Problem, TraceRecord,
};
use rayon::prelude::*;

use crate::config::{
    AlgorithmEntry, DatasetSpec, FStar, FStarMode, GraphSpec, LoadedConfig, ProblemSpec, Schedule,
};
use crate::dataset_csv::read_dataset;
use crate::error::{Result, SimError};
use crate::graph_file::read_graph;
use crate::trace::{fmt_float, write_trace};

/// Seed-derivation tag for per-run seeds.
pub const RUN_TAG: u64 = 0x7275_6e73;

pub const SUMMARY_FILE: &str = "summary.csv";

#[derive(Debug, Clone)]
pub struct PlannedRun {
    pub label: String,
    pub algorithm: Algorithm,
    pub hyper: HyperParams,
    /// Master seed from the configuration.
    pub seed: u64,
    pub run_seed: u64,
}

impl PlannedRun {
    pub fn trace_file(&self) -> String {
        trace_file_name(&self.label, self.seed)
    }
}

pub fn trace_file_name(label: &str, seed: u64) -> String {
    format!("{label}__seed{seed}.csv")
}

#[derive(Debug)]
pub struct Experiment {
    pub loaded: LoadedConfig,
    pub network: Network,
    pub problem: Problem,
    pub runs: Vec<PlannedRun>,
    /// `f*` fixed before running; `None` when disabled or resolved after.
    fstar: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    Diverged,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub label: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub gamma: f64,
    pub status: RunStatus,
    pub diverged_at: Option<usize>,
    pub last: TraceRecord,
    pub trace_file: String,
}

/// Builds the network and problem and expands the run list, validating
/// every parameter without running anything.
pub fn plan(loaded: LoadedConfig) -> Result<Experiment> {
    let cfg = &loaded.config;
    let network = build_graph(&loaded)?;
    let problem = build_problem(&loaded, network.n())?;
    let horizon = cfg.iterations.get();

    let mut runs = Vec::new();
    let mut labels = HashSet::new();
    for spanned in &cfg.algorithms {
        let entry = spanned.get_ref();
        let at = |msg: String| loaded.error_at(spanned.span(), format!("{}: {msg}", entry.label()));
        let base = hyper_params(entry, &network, horizon).map_err(at)?;
        let sweep = match (&cfg.gamma_sweep, entry.name) {
            (Some(gs), Algorithm::DsgpaFPb | Algorithm::DsgpaT) => gs
                .iter()
                .map(|&g| (Some(g), format!("{}_g{g}", entry.label())))
                .collect(),
            _ => vec![(None, entry.label().to_string())],
        };
        for (gamma, label) in sweep {
            let mut hyper = base.clone();
            if let Some(g) = gamma {
                hyper.gamma = Gamma::new(g)?;
            }
            hyper
                .validate_for(entry.name)
                .map_err(|e| at(e.to_string()))?;
            if !label
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
            {
                return Err(at(format!(
                    "label `{label}` may only use letters, digits, `_`, `-`, `.`"
                )));
            }
            if !labels.insert(label.clone()) {
                return Err(at(format!("duplicate label `{label}`")));
            }
            for &seed in &cfg.seeds {
                runs.push(PlannedRun {
                    label: label.clone(),
                    algorithm: entry.name,
                    hyper: hyper.clone(),
                    seed,
                    run_seed: derive(seed, &[RUN_TAG]),
                });
            }
        }
    }

    let fstar = match &cfg.lyapunov {
        None => None,
        Some(l) => match l.fstar {
            FStar::Value(v) => Some(v),
            FStar::Mode(FStarMode::Optimum) => {
                Some(problem.optimum_hint().map(|o| o.value).ok_or_else(|| {
                    SimError::Config(format!(
                        "{}: lyapunov fstar = \"optimum\" needs a problem with a known optimum; \
                             give a number or \"best_observed\"",
                        loaded.path.display()
                    ))
                })?)
            }
            FStar::Mode(FStarMode::BestObserved) => None,
        },
    };

    Ok(Experiment {
        loaded,
        network,
        problem,
        runs,
        fstar,
    })
}

fn hyper_params(
    entry: &AlgorithmEntry,
    net: &Network,
    horizon: usize,
) -> Result<HyperParams, String> {
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| format!("`{name}` is required"));
    let mut hp = match entry.schedule {
        Schedule::SqrtHorizon => {
            if entry.eta.is_some() || entry.alpha.is_some() || entry.beta.is_some() {
                return Err(
                    "sqrt_horizon schedule derives eta, alpha and beta; remove them".into(),
                );
            }
            let k1 = need(entry.kappa1, "kappa1")?;
            let k2 = need(entry.kappa2, "kappa2")?;
            sqrt_horizon_schedule(net, horizon, k1, k2).map_err(|e| e.to_string())?
        }
        Schedule::Fixed | Schedule::TimeVarying => {
            let eta = need(entry.eta, "eta")?;
            let (alpha, beta) = if entry.name.is_primal_dual() {
                (need(entry.alpha, "alpha")?, need(entry.beta, "beta")?)
            } else if entry.name == Algorithm::DmSgd {
                (0.0, need(entry.beta, "beta")?)
            } else {
                (entry.alpha.unwrap_or(0.0), entry.beta.unwrap_or(0.0))
            };
            let mut hp = HyperParams::fixed(eta, alpha, beta);
            if entry.schedule == Schedule::TimeVarying {
                hp = HyperParams::time_varying(
                    eta,
                    alpha,
                    beta,
                    entry
                        .decay_exponent
                        .unwrap_or(dsgpa_core::algorithms::DEFAULT_DECAY_EXPONENT),
                );
            }
            hp.kappa1 = entry.kappa1;
            hp.kappa2 = entry.kappa2;
            hp
        }
    };
    if entry.name == Algorithm::DsgpaT && entry.schedule != Schedule::TimeVarying {
        return Err("dsgpa_t needs schedule = \"time_varying\"".into());
    }
    if let Some(g) = entry.gamma {
        hp.gamma = Gamma::new(g).map_err(|e| e.to_string())?;
    }
    hp.batch = entry.batch.get();
    Ok(hp)
}

fn build_graph(loaded: &LoadedConfig) -> Result<Network> {
    let net = match &loaded.config.graph {
        GraphSpec::File { path } => read_graph(&loaded.resolve(path))?,
        GraphSpec::ErdosRenyi { n, prob, seed } => erdos_renyi(*n, *prob, *seed)?,
        GraphSpec::Complete { n } => complete_graph(*n)?,
    };
    if net.n() == 0 {
        return Err(SimError::Config("graph has no agents".into()));
    }
    if !is_connected(&net) {
        return Err(SimError::Config(format!(
            "{}: graph with {} agents is not connected",
            loaded.path.display(),
            net.n()
        )));
    }
    Ok(net)
}

fn build_problem(loaded: &LoadedConfig, n: usize) -> Result<Problem> {
    let prob = match &loaded.config.problem {
        ProblemSpec::Quadratic {
            p,
            condition_number,
            heterogeneity,
            sigma,
            seed,
        } => quadratic_problem(n, *p, *condition_number, *heterogeneity, *sigma, *seed)?,
        ProblemSpec::Nonconvex {
            p,
            lambda,
            sigma,
            seed,
        } => nonconvex_problem_with_lambda(n, *p, *lambda, *sigma, *seed)?,
        ProblemSpec::TwoLayer {
            hidden,
            sigma,
            seed,
            dataset,
        } => {
            let data = match dataset {
                DatasetSpec::Blobs {
                    samples,
                    dim,
                    classes,
                    spread,
                    seed,
                } => gaussian_blobs(*samples, *dim, *classes, *spread, *seed)?,
                DatasetSpec::Csv { path, classes } => {
                    read_dataset(&loaded.resolve(path), *classes)?
                }
            };
            two_layer_sigmoid_problem(data, n, *hidden, *sigma, *seed)?
        }
    };
    Ok(prob)
}

struct WallClock(Instant);

impl Clock for WallClock {
    fn elapsed_ns(&self) -> u64 {
        self.0.elapsed().as_nanos().try_into().unwrap_or(u64::MAX)
    }
}

impl Experiment {
    /// Where results go when the command line gives no directory.
    pub fn default_output(&self) -> Option<PathBuf> {
        self.loaded
            .config
            .output
            .as_ref()
            .map(|p| self.loaded.resolve(p))
    }

    /// Executes all runs (in parallel over `jobs` threads, or rayon's
    /// default), writes one trace per run and `summary.csv`, and returns the
    /// results in plan order.
    pub fn execute(&self, out_dir: &Path, jobs: Option<usize>) -> Result<Vec<RunResult>> {
        fs::create_dir_all(out_dir).map_err(|e| SimError::io(out_dir, e))?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.unwrap_or(0))
            .build()
            .map_err(|e| SimError::Config(format!("thread pool: {e}")))?;
        let cfg = &self.loaded.config;
        let lyapunov_fstar = cfg.lyapunov.as_ref().map(|_| self.fstar.unwrap_or(0.0));

        let outputs: Vec<(Vec<TraceRecord>, Option<usize>)> = pool.install(|| {
            self.runs
                .par_iter()
                .map(|planned| {
                    let mut spec = RunSpec::new(
                        planned.algorithm,
                        planned.hyper.clone(),
                        cfg.iterations.get(),
                        planned.run_seed,
                    )
                    .trace_every(cfg.trace_every.get());
                    spec.lyapunov_fstar = lyapunov_fstar;
                    let init =
                        AlgoState::random(self.network.n(), self.problem.p(), planned.run_seed);
                    let clock = WallClock(Instant::now());
                    let clock: Option<&dyn Clock> = if cfg.wall_time { Some(&clock) } else { None };
                    run_from(&spec, &self.network, &self.problem, init, clock)
                        .map(|out| (out.trace, out.diverged_at))
                })
                .collect::<dsgpa_core::Result<Vec<_>>>()
        })?;

        let mut outputs = outputs;
        if let (Some(l), None) = (&cfg.lyapunov, self.fstar) {
            let best = outputs
                .iter()
                .flat_map(|(t, _)| t.iter().map(|r| r.fbar))
                .fold(f64::INFINITY, f64::min);
            let fstar = best - l.slack;
            log::info!("best observed f = {best}; using f* = {fstar}");
            let n = self.network.n() as f64;
            for (trace, _) in &mut outputs {
                for w in trace.iter_mut().filter_map(|r| r.lyapunov.as_mut()) {
                    w.w4 -= n * fstar;
                    w.total = w.w1 + w.w2 + w.w3 + w.w4;
                }
            }
        }

        let mut results = Vec::with_capacity(self.runs.len());
        for (planned, (trace, diverged_at)) in self.runs.iter().zip(outputs) {
            let file = planned.trace_file();
            write_trace(&trace, &out_dir.join(&file))?;
            let status = if diverged_at.is_some() {
                RunStatus::Diverged
            } else {
                RunStatus::Converged
            };
            results.push(RunResult {
                label: planned.label.clone(),
                algorithm: planned.algorithm,
                seed: planned.seed,
                gamma: planned.algorithm.effective_gamma(&planned.hyper).value(),
                status,
                diverged_at,
                last: trace.last().cloned().expect("trace starts with round 0"),
                trace_file: file,
            });
        }
        write_summary(&results, &out_dir.join(SUMMARY_FILE))?;
        Ok(results)
    }
}

pub const SUMMARY_HEADER: &str =
    "label,algorithm,seed,gamma,status,diverged_at,final_k,consensus_err,grad_norm_2,grad_norm_pg,fbar,trace";

fn write_summary(results: &[RunResult], path: &Path) -> Result<()> {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in results {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.label,
            r.algorithm,
            r.seed,
            r.gamma,
            r.status.as_str(),
            r.diverged_at.map(|k| k.to_string()).unwrap_or_default(),
            r.last.k,
            fmt_float(r.last.consensus_err),
            fmt_float(r.last.grad_norm_2),
            fmt_float(r.last.grad_norm_pg),
            fmt_float(r.last.fbar),
            r.trace_file,
        ));
    }
    fs::write(path, out).map_err(|e| SimError::io(path, e))
}
