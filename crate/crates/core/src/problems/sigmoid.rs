//! Two-layer sigmoid classifier trained on the cross-entropy-of-sigmoids
//! empirical risk.
//!
//! For an input `x ∈ ℝᵈ` with bias-augmented `x̃ = (1, x)`:
//!
//! ```text
//! h_j = Sig(Σ_i z1[j, i] x̃_i)            j = 1..hidden,  h_0 = 1
//! y_k = Sig(Σ_j z2[k, j] h_j)            k = 0..classes
//! ℓ   = −Σ_k [t_k ln y_k + (1 − t_k) ln(1 − y_k)]
//! ```
//!
//! The decision vector is `z1` (`hidden × (d+1)`, row-major) followed by
//! `z2` (`classes × (hidden+1)`, row-major). Agent `i`'s cost is the mean
//! per-sample risk over its shard.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};

use super::{Dataset, Objective, Problem};

/// Half-width of the weight box on which the declared `L_f` is certified.
pub const DEFAULT_WEIGHT_RADIUS: f64 = 1.0;

/// max |Sig''| = √3/18.
const SIG_SECOND_DERIV_MAX: f64 = 0.096_225_044_864_937_63;

#[derive(Debug, Clone)]
pub struct TwoLayerSigmoid {
    data: Dataset,
    shards: Vec<Vec<usize>>,
    hidden: usize,
    weight_radius: f64,
    smoothness: f64,
}

#[inline]
pub(crate) fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + libm::exp(-s))
    } else {
        let e = libm::exp(s);
        e / (1.0 + e)
    }
}

/// `ln(1 + eˢ)` without overflow.
#[inline]
fn softplus(s: f64) -> f64 {
    s.max(0.0) + libm::log1p(libm::exp(-s.abs()))
}

impl TwoLayerSigmoid {
    pub fn new(
        data: Dataset,
        shards: Vec<Vec<usize>>,
        hidden: usize,
        weight_radius: f64,
    ) -> Result<Self> {
        if hidden == 0 {
            return Err(invalid("hidden", "need at least one hidden unit"));
        }
        if shards.is_empty() {
            return Err(invalid("shards", "need at least one agent"));
        }
        if let Some(agent) = shards.iter().position(Vec::is_empty) {
            return Err(invalid(
                "shards",
                alloc::format!("agent {agent} has an empty shard"),
            ));
        }
        if shards.iter().flatten().any(|&r| r >= data.len()) {
            return Err(invalid("shards", "shard refers to a missing row"));
        }
        if !(weight_radius > 0.0) {
            return Err(invalid("weight_radius", "must be positive"));
        }
        let max_input_sq = (0..data.len())
            .map(|r| 1.0 + data.row(r).iter().map(|v| v * v).sum::<f64>())
            .fold(0.0_f64, f64::max);
        let smoothness = hessian_bound(
            max_input_sq,
            hidden as f64,
            data.classes() as f64,
            weight_radius,
        );
        Ok(TwoLayerSigmoid {
            data,
            shards,
            hidden,
            weight_radius,
            smoothness,
        })
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn classes(&self) -> usize {
        self.data.classes()
    }

    pub fn weight_radius(&self) -> f64 {
        self.weight_radius
    }

    pub fn shards(&self) -> &[Vec<usize>] {
        &self.shards
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    fn first_layer_len(&self) -> usize {
        self.hidden * (self.data.dim() + 1)
    }

    /// Output probabilities `y` for one input row.
    pub fn predict(&self, z: &[f64], features: &[f64]) -> Vec<f64> {
        let mut hidden = vec![0.0; self.hidden + 1];
        let mut logits = vec![0.0; self.classes()];
        self.forward(z, features, &mut hidden, &mut logits);
        logits.into_iter().map(sigmoid).collect()
    }

    fn forward(&self, z: &[f64], x: &[f64], hidden: &mut [f64], logits: &mut [f64]) {
        let d1 = self.data.dim() + 1;
        let (z1, z2) = z.split_at(self.first_layer_len());
        hidden[0] = 1.0;
        for j in 0..self.hidden {
            let w = &z1[j * d1..(j + 1) * d1];
            let pre = w[0] + w[1..].iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
            hidden[j + 1] = sigmoid(pre);
        }
        let h1 = self.hidden + 1;
        for (k, logit) in logits.iter_mut().enumerate() {
            *logit = z2[k * h1..(k + 1) * h1]
                .iter()
                .zip(hidden.iter())
                .map(|(a, b)| a * b)
                .sum();
        }
    }
}

/// Sup of the per-sample Hessian norm over the box `|z| ≤ radius`:
/// `¼(C(H+1) + s²CHR²/16) + C(s/4 + R·max|Sig''|·s²)` with `s² = 1 + ‖x‖²`.
fn hessian_bound(input_sq: f64, hidden: f64, classes: f64, radius: f64) -> f64 {
    let s = libm::sqrt(input_sq);
    let gauss_newton =
        0.25 * (classes * (hidden + 1.0) + input_sq * classes * hidden * radius * radius / 16.0);
    let curvature = classes * (s / 4.0 + radius * SIG_SECOND_DERIV_MAX * input_sq);
    gauss_newton + curvature
}

impl Objective for TwoLayerSigmoid {
    fn agents(&self) -> usize {
        self.shards.len()
    }

    fn dim(&self) -> usize {
        self.first_layer_len() + self.classes() * (self.hidden + 1)
    }

    fn local_value(&self, agent: usize, z: &[f64]) -> f64 {
        let mut hidden = vec![0.0; self.hidden + 1];
        let mut logits = vec![0.0; self.classes()];
        let shard = &self.shards[agent];
        let mut total = 0.0;
        for &r in shard {
            self.forward(z, self.data.row(r), &mut hidden, &mut logits);
            let label = self.data.label(r);
            // −ln y = softplus(−a), −ln(1 − y) = softplus(a)
            total += logits
                .iter()
                .enumerate()
                .map(|(k, &a)| {
                    if k == label {
                        softplus(-a)
                    } else {
                        softplus(a)
                    }
                })
                .sum::<f64>();
        }
        total / shard.len() as f64
    }

    fn local_grad(&self, agent: usize, z: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let d1 = self.data.dim() + 1;
        let h1 = self.hidden + 1;
        let split = self.first_layer_len();
        let mut hidden = vec![0.0; h1];
        let mut logits = vec![0.0; self.classes()];
        let mut delta_out = vec![0.0; self.classes()];
        let shard = &self.shards[agent];
        for &r in shard {
            let x = self.data.row(r);
            self.forward(z, x, &mut hidden, &mut logits);
            let label = self.data.label(r);
            for (k, (d, &a)) in delta_out.iter_mut().zip(&logits).enumerate() {
                *d = sigmoid(a) - if k == label { 1.0 } else { 0.0 };
            }
            let (g1, g2) = out.split_at_mut(split);
            let z2 = &z[split..];
            for (k, &dk) in delta_out.iter().enumerate() {
                for (g, h) in g2[k * h1..(k + 1) * h1].iter_mut().zip(&hidden) {
                    *g += dk * h;
                }
            }
            for j in 1..h1 {
                let back: f64 = delta_out
                    .iter()
                    .enumerate()
                    .map(|(k, dk)| dk * z2[k * h1 + j])
                    .sum();
                let hj = hidden[j];
                let dj = back * hj * (1.0 - hj);
                let row = &mut g1[(j - 1) * d1..j * d1];
                row[0] += dj;
                for (g, xi) in row[1..].iter_mut().zip(x) {
                    *g += dj * xi;
                }
            }
        }
        let inv = 1.0 / shard.len() as f64;
        for o in out.iter_mut() {
            *o *= inv;
        }
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }

    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Shards `dataset` over `n` agents and wraps the risk in a [`Problem`].
pub fn two_layer_sigmoid_problem(
    dataset: Dataset,
    n: usize,
    hidden: usize,
    sigma: f64,
    seed: u64,
) -> Result<Problem> {
    let shards = dataset.shard(n, seed)?;
    Problem::new(
        TwoLayerSigmoid::new(dataset, shards, hidden, DEFAULT_WEIGHT_RADIUS)?,
        sigma,
    )
}
