//! Local smooth costs `f_i` and the seeded stochastic gradient oracle.
//!
//! The global objective is `f(x) = (1/n) Σ_i f_i(x)`. Each built-in problem
//! implements [`Objective`] with analytic gradients and a certified gradient
//! Lipschitz constant `L_f`. [`Problem`] pairs an objective with an additive
//! noise level σ and exposes the mini-batch oracle.
//!
//! Oracle noise is isotropic Gaussian with per-coordinate standard deviation
//! `σ/√p`, truncated at six standard deviations, so a single draw satisfies
//! `E‖noise‖² ≤ σ²` and a batch of `B` draws has variance at most `σ²/B`.
//! The draw for `(agent, iteration, b)` comes from its own counter-keyed
//! stream, which makes oracle calls pure functions of their arguments.

mod dataset;
mod nonconvex;
mod quadratic;
mod sigmoid;

pub use dataset::{gaussian_blobs, Dataset};
pub use nonconvex::{
    nonconvex_problem, nonconvex_problem_with_lambda, NonconvexProblem, DEFAULT_NONCONVEX_LAMBDA,
};
pub use quadratic::{quadratic_problem, QuadraticProblem};
pub use sigmoid::{two_layer_sigmoid_problem, TwoLayerSigmoid, DEFAULT_WEIGHT_RADIUS};

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::seed;

/// Truncation point of the oracle noise, in standard deviations.
pub const NOISE_TRUNCATION: f64 = 6.0;

/// Known optimal value, and minimizer when available.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub value: f64,
    pub point: Option<Vec<f64>>,
}

/// A family of `n` local costs over `ℝᵖ`.
pub trait Objective: Send + Sync + fmt::Debug {
    fn agents(&self) -> usize;

    fn dim(&self) -> usize;

    fn local_value(&self, agent: usize, x: &[f64]) -> f64;

    /// Writes `∇f_agent(x)` into `out`.
    fn local_grad(&self, agent: usize, x: &[f64], out: &mut [f64]);

    /// Gradient Lipschitz constant shared by every `f_i`.
    fn smoothness(&self) -> f64;

    fn optimum(&self) -> Option<Optimum> {
        None
    }

    /// A certified lower bound on `f`, when no optimum is known.
    fn lower_bound(&self) -> Option<f64> {
        self.optimum().map(|o| o.value)
    }
}

/// One mini-batch oracle answer.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSample {
    pub grad_estimate: Vec<f64>,
    pub agent: usize,
    pub iteration: usize,
    pub batch_size: usize,
}

#[derive(Debug, Clone)]
pub struct Problem {
    objective: Arc<dyn Objective>,
    noise_sigma: f64,
}

impl Problem {
    pub fn new(objective: impl Objective + 'static, noise_sigma: f64) -> Result<Self> {
        Self::from_arc(Arc::new(objective), noise_sigma)
    }

    pub fn from_arc(objective: Arc<dyn Objective>, noise_sigma: f64) -> Result<Self> {
        if !(noise_sigma >= 0.0) || !noise_sigma.is_finite() {
            return Err(invalid(
                "sigma",
                format!("{noise_sigma} must be finite and >= 0"),
            ));
        }
        Ok(Problem {
            objective,
            noise_sigma,
        })
    }

    pub fn with_noise(&self, noise_sigma: f64) -> Result<Self> {
        Self::from_arc(self.objective.clone(), noise_sigma)
    }

    pub fn objective(&self) -> &dyn Objective {
        &*self.objective
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.objective.agents()
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.objective.dim()
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn smoothness_bound(&self) -> f64 {
        self.objective.smoothness()
    }

    pub fn optimum_hint(&self) -> Option<Optimum> {
        self.objective.optimum()
    }

    pub fn lower_bound(&self) -> Option<f64> {
        self.objective.lower_bound()
    }

    pub fn local_value(&self, agent: usize, x: &[f64]) -> f64 {
        self.objective.local_value(agent, x)
    }

    pub fn local_grad(&self, agent: usize, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.p()];
        self.objective.local_grad(agent, x, &mut g);
        g
    }

    /// `f(x) = (1/n) Σ_i f_i(x)`.
    pub fn value(&self, x: &[f64]) -> f64 {
        let n = self.n();
        (0..n)
            .map(|i| self.objective.local_value(i, x))
            .sum::<f64>()
            / n as f64
    }

    /// `∇f(x)`, accumulated in agent order.
    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut acc = vec![0.0; self.p()];
        let mut buf = vec![0.0; self.p()];
        for i in 0..n {
            self.objective.local_grad(i, x, &mut buf);
            for (a, g) in acc.iter_mut().zip(&buf) {
                *a += g;
            }
        }
        let inv = 1.0 / n as f64;
        for a in &mut acc {
            *a *= inv;
        }
        acc
    }

    /// Mini-batch stochastic gradient for `agent` at `x` in round `iteration`.
    pub fn stochastic_grad(
        &self,
        agent: usize,
        x: &[f64],
        iteration: usize,
        batch: usize,
        seed: u64,
    ) -> Result<OracleSample> {
        let mut g = vec![0.0; self.p()];
        self.stochastic_grad_into(agent, x, iteration, batch, seed, &mut g)?;
        Ok(OracleSample {
            grad_estimate: g,
            agent,
            iteration,
            batch_size: batch,
        })
    }

    /// Allocation-free form of [`Problem::stochastic_grad`].
    pub fn stochastic_grad_into(
        &self,
        agent: usize,
        x: &[f64],
        iteration: usize,
        batch: usize,
        seed: u64,
        out: &mut [f64],
    ) -> Result<()> {
        if batch == 0 {
            return Err(invalid("batch", "mini-batch size must be at least 1"));
        }
        let n = self.n();
        if agent >= n {
            return Err(Error::AgentOutOfRange { index: agent, n });
        }
        let p = self.p();
        if x.len() != p || out.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: if x.len() != p { x.len() } else { out.len() },
            });
        }
        self.objective.local_grad(agent, x, out);
        if self.noise_sigma == 0.0 {
            return Ok(());
        }
        let scale = self.noise_sigma / libm::sqrt(p as f64) / batch as f64;
        for b in 0..batch {
            let mut rng = seed::rng(
                seed,
                &[seed::tag::ORACLE, agent as u64, iteration as u64, b as u64],
            );
            for o in out.iter_mut() {
                *o += scale * truncated_normal(&mut rng);
            }
        }
        Ok(())
    }
}

/// Standard normal conditioned on `|z| ≤ NOISE_TRUNCATION`.
fn truncated_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let z: f64 = rng.sample(StandardNormal);
        if z.abs() <= NOISE_TRUNCATION {
            return z;
        }
    }
}

pub(crate) fn standard_normal_vec<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}
