use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::matrix::{sym_eigen, Mat};
use crate::seed;

use super::{standard_normal_vec, Objective, Problem};

pub const DEFAULT_NONCONVEX_LAMBDA: f64 = 0.5;

/// `f_i(x) = ½‖M_i x − b_i‖² + λ Σ_l x_l² / (1 + x_l²)`.
///
/// The regularizer is nonconvex with second derivative in `[−λ/2, 2λ]`, so
/// `L_f = max_i ‖M_iᵀ M_i‖ + 2λ`. Every term is nonnegative, hence `f ≥ 0`.
#[derive(Debug, Clone)]
pub struct NonconvexProblem {
    designs: Vec<Mat>,
    targets: Vec<Vec<f64>>,
    lambda: f64,
    smoothness: f64,
}

impl NonconvexProblem {
    pub fn new(designs: Vec<Mat>, targets: Vec<Vec<f64>>, lambda: f64) -> Result<Self> {
        if designs.is_empty() || designs.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: designs.len().max(1),
                found: targets.len(),
            });
        }
        if !(lambda >= 0.0) {
            return Err(invalid("lambda", format!("{lambda} < 0")));
        }
        let p = designs[0].cols();
        let mut top = 0.0_f64;
        for (m, b) in designs.iter().zip(&targets) {
            if m.cols() != p || m.rows() != b.len() {
                return Err(Error::DimensionMismatch {
                    expected: m.rows(),
                    found: b.len(),
                });
            }
            let gram = m.transpose().matmul(m)?;
            let (vals, _) = sym_eigen(&gram);
            top = top.max(vals[p - 1]);
        }
        Ok(NonconvexProblem {
            designs,
            targets,
            lambda,
            smoothness: top + 2.0 * lambda,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn designs(&self) -> &[Mat] {
        &self.designs
    }

    pub fn targets(&self) -> &[Vec<f64>] {
        &self.targets
    }
}

impl Objective for NonconvexProblem {
    fn agents(&self) -> usize {
        self.designs.len()
    }

    fn dim(&self) -> usize {
        self.designs[0].cols()
    }

    fn local_value(&self, agent: usize, x: &[f64]) -> f64 {
        let r: f64 = self.designs[agent]
            .matvec(x)
            .iter()
            .zip(&self.targets[agent])
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let reg: f64 = x.iter().map(|v| v * v / (1.0 + v * v)).sum();
        0.5 * r + self.lambda * reg
    }

    fn local_grad(&self, agent: usize, x: &[f64], out: &mut [f64]) {
        let m = &self.designs[agent];
        let resid: Vec<f64> = m
            .matvec(x)
            .iter()
            .zip(&self.targets[agent])
            .map(|(a, b)| a - b)
            .collect();
        for (l, o) in out.iter_mut().enumerate() {
            let xl = x[l];
            let d = 1.0 + xl * xl;
            *o = 2.0 * self.lambda * xl / (d * d);
        }
        for (r, res) in resid.iter().enumerate() {
            for (o, mv) in out.iter_mut().zip(m.row(r)) {
                *o += mv * res;
            }
        }
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }

    fn lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Random instance with square `p × p` designs (entries `N(0, 1/p)`),
/// standard normal targets, and `λ = DEFAULT_NONCONVEX_LAMBDA`.
pub fn nonconvex_problem(n: usize, p: usize, sigma: f64, seed: u64) -> Result<Problem> {
    nonconvex_problem_with_lambda(n, p, DEFAULT_NONCONVEX_LAMBDA, sigma, seed)
}

pub fn nonconvex_problem_with_lambda(
    n: usize,
    p: usize,
    lambda: f64,
    sigma: f64,
    seed: u64,
) -> Result<Problem> {
    if n == 0 || p == 0 {
        return Err(invalid("n/p", "agent count and dimension must be positive"));
    }
    let mut rng = seed::rng(seed, &[seed::tag::PROBLEM, 1]);
    let scale = 1.0 / libm::sqrt(p as f64);
    let mut designs = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let entries = standard_normal_vec(&mut rng, p * p)
            .into_iter()
            .map(|v| v * scale)
            .collect();
        designs.push(Mat::from_vec(p, p, entries)?);
        targets.push(standard_normal_vec(&mut rng, p));
    }
    Problem::new(NonconvexProblem::new(designs, targets, lambda)?, sigma)
}
