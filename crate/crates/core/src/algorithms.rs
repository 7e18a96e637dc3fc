//! Synchronous-round engines.
//!
//! Every round is Jacobi-style: all agents read the pre-round snapshot of the
//! stacked primal matrix, and per-agent work runs in ascending agent order,
//! so identical inputs give bitwise identical trajectories.
//!
//! The primal-dual update (DSGPA-F-PB) for agent `i` in round `k` is
//!
//! ```text
//! x_i ← x_i − η(α (Lx)_i + β v_i + σ(g_i, γ))
//! v_i ← v_i + ηβ (Lx)_i
//! ```
//!
//! with `g_i` the mini-batch oracle answer at `x_i`, and `Lx` taken from the
//! pre-round `x` in both lines. DSGPA-F is the same update with `γ = 1`;
//! DSGPA-T scales `η, α, β` by `(k+1)^(−ε), (k+1)^ε, (k+1)^ε`.
//!
//! Baselines use the mixing matrix `W = I − L/(ρ(L)+1)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::diagnostics::{record, LyapunovMonitor, TraceRecord};
use crate::error::{invalid, Error, Result};
use crate::matrix::Mat;
use crate::netgraph::{laplacian_apply, Network};
use crate::powerball::{powerball_in_place, Gamma};
use crate::problems::{standard_normal_vec, Problem};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    /// Primal-dual SGD with powerball gradients and fixed parameters.
    DsgpaFPb,
    /// Primal-dual SGD with fixed parameters (`γ = 1`).
    DsgpaF,
    /// Primal-dual SGD with time-varying parameters; powerball when `γ < 1`.
    DsgpaT,
    /// Distributed SGD: mix, then gradient step.
    DSgd,
    /// Distributed stochastic gradient tracking.
    DSgt,
    /// Distributed heavy-ball momentum SGD; momentum coefficient is `beta`.
    DmSgd,
    /// Centralized SGD on the agent-averaged oracle.
    CSgd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::DsgpaFPb,
        Algorithm::DsgpaF,
        Algorithm::DsgpaT,
        Algorithm::DSgd,
        Algorithm::DSgt,
        Algorithm::DmSgd,
        Algorithm::CSgd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::DsgpaFPb => "dsgpa_f_pb",
            Algorithm::DsgpaF => "dsgpa_f",
            Algorithm::DsgpaT => "dsgpa_t",
            Algorithm::DSgd => "d_sgd",
            Algorithm::DSgt => "d_sgt",
            Algorithm::DmSgd => "dm_sgd",
            Algorithm::CSgd => "c_sgd",
        }
    }

    pub fn is_primal_dual(self) -> bool {
        matches!(
            self,
            Algorithm::DsgpaFPb | Algorithm::DsgpaF | Algorithm::DsgpaT
        )
    }

    /// The powerball exponent actually applied to gradients.
    pub fn effective_gamma(self, hp: &HyperParams) -> Gamma {
        match self {
            Algorithm::DsgpaFPb | Algorithm::DsgpaT => hp.gamma,
            _ => Gamma::ONE,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| invalid("algorithm", format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleMode {
    Fixed,
    SqrtHorizon,
    TimeVarying,
}

/// Step size, coupling gains and oracle settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub gamma: Gamma,
    pub batch: usize,
    pub kappa1: Option<f64>,
    pub kappa2: Option<f64>,
    pub schedule: ScheduleMode,
    /// `ε` in the time-varying schedule.
    pub decay_exponent: f64,
}

pub const DEFAULT_DECAY_EXPONENT: f64 = 1e-5;

impl HyperParams {
    pub fn fixed(eta: f64, alpha: f64, beta: f64) -> Self {
        HyperParams {
            alpha,
            beta,
            eta,
            gamma: Gamma::ONE,
            batch: 1,
            kappa1: None,
            kappa2: None,
            schedule: ScheduleMode::Fixed,
            decay_exponent: DEFAULT_DECAY_EXPONENT,
        }
    }

    /// `η_k = η/(k+1)^ε`, `α_k = α(k+1)^ε`, `β_k = β(k+1)^ε`.
    pub fn time_varying(eta: f64, alpha: f64, beta: f64, decay_exponent: f64) -> Self {
        HyperParams {
            schedule: ScheduleMode::TimeVarying,
            decay_exponent,
            ..HyperParams::fixed(eta, alpha, beta)
        }
    }

    pub fn with_gamma(mut self, gamma: Gamma) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_batch(mut self, batch: usize) -> Self {
        self.batch = batch;
        self
    }

    /// `κ₁`, falling back to `α/β`.
    pub fn kappa1_or_ratio(&self) -> f64 {
        self.kappa1.unwrap_or(self.alpha / self.beta)
    }

    /// `(η_k, α_k, β_k)` for round `k`.
    pub fn at(&self, k: usize) -> (f64, f64, f64) {
        match self.schedule {
            ScheduleMode::Fixed | ScheduleMode::SqrtHorizon => (self.eta, self.alpha, self.beta),
            ScheduleMode::TimeVarying => {
                let s = libm::pow((k + 1) as f64, self.decay_exponent);
                (self.eta / s, self.alpha * s, self.beta * s)
            }
        }
    }

    pub fn validate_for(&self, algo: Algorithm) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("{v} must be finite and > 0")))
            }
        };
        positive("eta", self.eta)?;
        if self.batch == 0 {
            return Err(invalid("batch", "mini-batch size must be at least 1"));
        }
        if algo.is_primal_dual() {
            positive("alpha", self.alpha)?;
            positive("beta", self.beta)?;
        }
        if algo == Algorithm::DmSgd && !(0.0..1.0).contains(&self.beta) {
            return Err(invalid(
                "beta",
                format!("momentum {} must lie in [0, 1)", self.beta),
            ));
        }
        if self.schedule == ScheduleMode::TimeVarying && !(self.decay_exponent >= 0.0) {
            return Err(invalid("decay_exponent", "must be >= 0"));
        }
        Ok(())
    }
}

/// Feasible `(κ₁, κ₂)` region for the `√T`-scaled schedule on a network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleBounds {
    /// `κ₁` must exceed this: `1/ρ₂(L) + 1`.
    pub kappa1_min: f64,
    /// `κ₂` must lie in `(0, kappa2_max)`; depends on the `κ₁` supplied.
    pub kappa2_max: f64,
}

pub fn sqrt_horizon_bounds(net: &Network, kappa1: f64) -> Result<ScheduleBounds> {
    let rho = net.rho();
    let rho2 = net.rho2();
    if !(rho2 > 0.0) {
        return Err(invalid(
            "network",
            "parameter schedule needs a connected network",
        ));
    }
    let kappa1_min = 1.0 / rho2 + 1.0;
    let graph_bound =
        ((kappa1 - 1.0) * rho2 - 1.0) / (rho + (2.0 * kappa1 * kappa1 + 1.0) * net.rho_sq() + 1.0);
    Ok(ScheduleBounds {
        kappa1_min,
        kappa2_max: graph_bound.min(0.2),
    })
}

/// `α = κ₁β`, `β = κ₂√T/√n`, `η = κ₂/β`, with `κ₁, κ₂` checked against
/// [`sqrt_horizon_bounds`].
pub fn sqrt_horizon_schedule(
    net: &Network,
    horizon: usize,
    kappa1: f64,
    kappa2: f64,
) -> Result<HyperParams> {
    let n = net.n();
    if horizon == 0 {
        return Err(invalid("T", "horizon must be at least 1"));
    }
    let bounds = sqrt_horizon_bounds(net, kappa1)?;
    if !(kappa1 > bounds.kappa1_min) {
        return Err(Error::Kappa1TooSmall {
            kappa1,
            bound: bounds.kappa1_min,
        });
    }
    if !(kappa2 > 0.0 && kappa2 < bounds.kappa2_max) {
        return Err(Error::Kappa2OutOfRange {
            kappa2,
            upper: bounds.kappa2_max,
        });
    }
    let n3 = (n as u128).pow(3);
    if (horizon as u128) <= n3 {
        log::warn!("horizon T={horizon} does not exceed n^3={n3}; rate guarantees assume T > n^3");
    }
    let beta = kappa2 * libm::sqrt(horizon as f64) / libm::sqrt(n as f64);
    Ok(HyperParams {
        alpha: kappa1 * beta,
        beta,
        eta: kappa2 / beta,
        gamma: Gamma::ONE,
        batch: 1,
        kappa1: Some(kappa1),
        kappa2: Some(kappa2),
        schedule: ScheduleMode::SqrtHorizon,
        decay_exponent: DEFAULT_DECAY_EXPONENT,
    })
}

/// Per-algorithm auxiliary buffers.
#[derive(Debug, Clone, PartialEq)]
pub enum Auxiliary {
    None,
    /// Gradient tracking: tracker `y` and the last oracle answers.
    Tracking {
        y: Mat,
        last_grad: Mat,
    },
    /// Heavy-ball momentum buffer.
    Momentum {
        m: Mat,
    },
}

/// Stacked primal `x` and dual `v` (both `n × p`) at round `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgoState {
    pub x: Mat,
    pub v: Mat,
    pub k: usize,
    pub aux: Auxiliary,
}

impl AlgoState {
    /// Round 0 with the given primal matrix and `v = 0`.
    pub fn new(x: Mat) -> Self {
        let v = Mat::zeros(x.rows(), x.cols());
        AlgoState {
            x,
            v,
            k: 0,
            aux: Auxiliary::None,
        }
    }

    /// Independent standard normal entries drawn from the `(seed, INIT)`
    /// stream.
    pub fn random(n: usize, p: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed, &[seed::tag::INIT]);
        let data = standard_normal_vec(&mut rng, n * p);
        AlgoState::new(Mat::from_vec(n, p, data).expect("n*p entries"))
    }

    pub fn mean(&self) -> Vec<f64> {
        self.x.row_mean()
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite()
            && self.v.is_finite()
            && match &self.aux {
                Auxiliary::None => true,
                Auxiliary::Tracking { y, last_grad } => y.is_finite() && last_grad.is_finite(),
                Auxiliary::Momentum { m } => m.is_finite(),
            }
    }
}

fn check_dims(state: &AlgoState, net: &Network, prob: &Problem) -> Result<()> {
    let n = net.n();
    for found in [prob.n(), state.x.rows(), state.v.rows()] {
        if found != n {
            return Err(Error::DimensionMismatch { expected: n, found });
        }
    }
    let p = prob.p();
    for found in [state.x.cols(), state.v.cols()] {
        if found != p {
            return Err(Error::DimensionMismatch { expected: p, found });
        }
    }
    Ok(())
}

/// Oracle answers for every agent at its own row of `x`.
fn sample_all(prob: &Problem, x: &Mat, k: usize, batch: usize, seed: u64) -> Result<Mat> {
    let mut g = Mat::zeros(x.rows(), x.cols());
    for i in 0..x.rows() {
        prob.stochastic_grad_into(i, x.row(i), k, batch, seed, g.row_mut(i))?;
    }
    Ok(g)
}

/// One DSGPA round, returning the next state.
pub fn dsgpa_pb_step(
    state: &AlgoState,
    net: &Network,
    prob: &Problem,
    hp: &HyperParams,
    seed: u64,
) -> Result<AlgoState> {
    let mut next = state.clone();
    step(Algorithm::DsgpaFPb, &mut next, net, prob, hp, seed)?;
    Ok(next)
}

/// Advances `state` by one synchronous round of `algo`.
pub fn step(
    algo: Algorithm,
    state: &mut AlgoState,
    net: &Network,
    prob: &Problem,
    hp: &HyperParams,
    seed: u64,
) -> Result<()> {
    check_dims(state, net, prob)?;
    let k = state.k;
    let (eta, alpha, beta) = hp.at(k);
    let batch = hp.batch;
    match algo {
        Algorithm::DsgpaFPb | Algorithm::DsgpaF | Algorithm::DsgpaT => {
            let gamma = algo.effective_gamma(hp);
            let lx = laplacian_apply(net, &state.x)?;
            let p = state.x.cols();
            let mut g = vec![0.0; p];
            for i in 0..net.n() {
                prob.stochastic_grad_into(i, state.x.row(i), k, batch, seed, &mut g)?;
                powerball_in_place(&mut g, gamma);
                let lxi = lx.row(i);
                let vi = state.v.row(i);
                let xi = state.x.row_mut(i);
                for l in 0..p {
                    xi[l] -= eta * (alpha * lxi[l] + beta * vi[l] + g[l]);
                }
                let eb = eta * beta;
                for (v, d) in state.v.row_mut(i).iter_mut().zip(lxi) {
                    *v += eb * d;
                }
            }
        }
        Algorithm::DSgd => {
            let g = sample_all(prob, &state.x, k, batch, seed)?;
            let mut x = net.mixing_apply(&state.x)?;
            axpy(&mut x, -eta, &g);
            state.x = x;
        }
        Algorithm::DSgt => {
            if !matches!(state.aux, Auxiliary::Tracking { .. }) {
                let g = sample_all(prob, &state.x, k, batch, seed)?;
                state.aux = Auxiliary::Tracking {
                    y: g.clone(),
                    last_grad: g,
                };
            }
            let Auxiliary::Tracking { y, last_grad } = &mut state.aux else {
                unreachable!()
            };
            let mut x = net.mixing_apply(&state.x)?;
            axpy(&mut x, -eta, y);
            let g_next = sample_all(prob, &x, k + 1, batch, seed)?;
            let mut y_next = net.mixing_apply(y)?;
            axpy(&mut y_next, 1.0, &g_next);
            axpy(&mut y_next, -1.0, last_grad);
            *y = y_next;
            *last_grad = g_next;
            state.x = x;
        }
        Algorithm::DmSgd => {
            if !matches!(state.aux, Auxiliary::Momentum { .. }) {
                state.aux = Auxiliary::Momentum {
                    m: Mat::zeros(state.x.rows(), state.x.cols()),
                };
            }
            let Auxiliary::Momentum { m } = &mut state.aux else {
                unreachable!()
            };
            let g = sample_all(prob, &state.x, k, batch, seed)?;
            for (mv, gv) in m.as_mut_slice().iter_mut().zip(g.as_slice()) {
                *mv = beta * *mv + gv;
            }
            let mut x = net.mixing_apply(&state.x)?;
            axpy(&mut x, -eta, m);
            state.x = x;
        }
        Algorithm::CSgd => {
            // Rows are kept identical; `run` starts from the averaged x₀.
            let mut center = state.x.row(0).to_vec();
            let n = net.n();
            let mut acc = vec![0.0; center.len()];
            let mut g = vec![0.0; center.len()];
            for i in 0..n {
                prob.stochastic_grad_into(i, &center, k, batch, seed, &mut g)?;
                for (a, gv) in acc.iter_mut().zip(&g) {
                    *a += gv;
                }
            }
            let inv = 1.0 / n as f64;
            for (c, a) in center.iter_mut().zip(&acc) {
                *c -= eta * a * inv;
            }
            state.x = Mat::repeat_row(n, &center);
        }
    }
    if !state.is_finite() {
        return Err(Error::Diverged { iteration: k });
    }
    state.k = k + 1;
    Ok(())
}

fn axpy(dst: &mut Mat, a: f64, src: &Mat) {
    for (d, s) in dst.as_mut_slice().iter_mut().zip(src.as_slice()) {
        *d += a * s;
    }
}

/// What to run and how to record it.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub algorithm: Algorithm,
    pub hyper: HyperParams,
    pub iterations: usize,
    pub seed: u64,
    pub trace_every: usize,
    /// Enables the Lyapunov monitor with this `f*` (primal-dual algorithms
    /// only).
    pub lyapunov_fstar: Option<f64>,
}

impl RunSpec {
    pub fn new(algorithm: Algorithm, hyper: HyperParams, iterations: usize, seed: u64) -> Self {
        RunSpec {
            algorithm,
            hyper,
            iterations,
            seed,
            trace_every: 1,
            lyapunov_fstar: None,
        }
    }

    pub fn trace_every(mut self, stride: usize) -> Self {
        self.trace_every = stride;
        self
    }

    pub fn with_lyapunov(mut self, fstar: f64) -> Self {
        self.lyapunov_fstar = Some(fstar);
        self
    }

    /// Rounds at which a record is taken: `0`, every multiple of the stride,
    /// and `T`.
    pub fn records_at(&self, k: usize) -> bool {
        k == 0 || k == self.iterations || k.is_multiple_of(self.trace_every)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Vec<TraceRecord>,
    pub state: AlgoState,
    /// Round whose update produced a non-finite value.
    pub diverged_at: Option<usize>,
}

/// Source of elapsed nanoseconds for trace timestamps.
pub trait Clock {
    fn elapsed_ns(&self) -> u64;
}

/// Runs from the default initial state: standard normal `x₀` drawn from the
/// run seed, `v₀ = 0`.
pub fn run(spec: &RunSpec, net: &Network, prob: &Problem) -> Result<RunOutput> {
    let init = AlgoState::random(net.n(), prob.p(), spec.seed);
    run_from(spec, net, prob, init, None)
}

pub fn run_from(
    spec: &RunSpec,
    net: &Network,
    prob: &Problem,
    initial: AlgoState,
    clock: Option<&dyn Clock>,
) -> Result<RunOutput> {
    if spec.iterations == 0 {
        return Err(invalid("T", "a run needs at least one iteration"));
    }
    if spec.trace_every == 0 {
        return Err(invalid("trace_every", "stride must be at least 1"));
    }
    spec.hyper.validate_for(spec.algorithm)?;
    let mut state = initial;
    check_dims(&state, net, prob)?;
    if spec.algorithm == Algorithm::CSgd {
        state.x = Mat::repeat_row(net.n(), &state.x.row_mean());
    }

    let gamma = spec.algorithm.effective_gamma(&spec.hyper);
    if !gamma.in_theory_range() {
        log::warn!(
            "{}: gamma = {} is below the analysed range [0.5, 1]",
            spec.algorithm,
            gamma.value()
        );
    }
    let monitor = match spec.lyapunov_fstar {
        Some(fstar) if spec.algorithm.is_primal_dual() => Some(LyapunovMonitor::new(
            net,
            spec.hyper.kappa1_or_ratio(),
            fstar,
        )?),
        _ => None,
    };

    let capacity = spec.iterations / spec.trace_every + 2;
    let mut trace = Vec::with_capacity(capacity);
    let observe = |state: &AlgoState| -> Result<TraceRecord> {
        let lyap = monitor.as_ref().map(|m| (m, spec.hyper.at(state.k).2));
        record(state, prob, gamma, lyap, clock.map(|c| c.elapsed_ns()))
    };

    trace.push(observe(&state)?);
    let mut diverged_at = None;
    while state.k < spec.iterations {
        let mut next = state.clone();
        match step(spec.algorithm, &mut next, net, prob, &spec.hyper, spec.seed) {
            Ok(()) => state = next,
            Err(Error::Diverged { iteration }) => {
                log::warn!("{}: diverged at round {iteration}", spec.algorithm);
                diverged_at = Some(iteration);
                break;
            }
            Err(e) => return Err(e),
        }
        if spec.records_at(state.k) {
            trace.push(observe(&state)?);
        }
    }
    Ok(RunOutput {
        trace,
        state,
        diverged_at,
    })
}
