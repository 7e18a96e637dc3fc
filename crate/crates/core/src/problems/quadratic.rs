use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::matrix::{cholesky_solve, dot, sym_eigen, Mat};
use crate::seed;

use super::{standard_normal_vec, Objective, Optimum, Problem};

/// `f_i(x) = ½ (x − c_i)ᵀ A_i (x − c_i)` with symmetric PSD `A_i`.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    hessians: Vec<Mat>,
    centers: Vec<Vec<f64>>,
    smoothness: f64,
    optimum: Option<Optimum>,
}

impl QuadraticProblem {
    pub fn new(hessians: Vec<Mat>, centers: Vec<Vec<f64>>) -> Result<Self> {
        let n = hessians.len();
        if n == 0 || centers.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n.max(1),
                found: centers.len(),
            });
        }
        let p = centers[0].len();
        let mut smoothness = 0.0_f64;
        for (a, c) in hessians.iter().zip(&centers) {
            if a.rows() != p || a.cols() != p || c.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: if c.len() != p { c.len() } else { a.rows() },
                });
            }
            if !a.is_symmetric(1e-12 * (1.0 + a.max_abs())) {
                return Err(invalid("hessian", "local Hessians must be symmetric"));
            }
            let (vals, _) = sym_eigen(a);
            if vals[0] < -1e-12 * (1.0 + vals[p - 1].abs()) {
                return Err(invalid("hessian", format!("eigenvalue {} < 0", vals[0])));
            }
            smoothness = smoothness.max(vals[p - 1]);
        }

        let mut total = Mat::zeros(p, p);
        let mut rhs = vec![0.0; p];
        for (a, c) in hessians.iter().zip(&centers) {
            for (t, v) in total.as_mut_slice().iter_mut().zip(a.as_slice()) {
                *t += v;
            }
            for (r, v) in rhs.iter_mut().zip(a.matvec(c)) {
                *r += v;
            }
        }
        let mut problem = QuadraticProblem {
            hessians,
            centers,
            smoothness,
            optimum: None,
        };
        if let Ok(point) = cholesky_solve(&total, &rhs) {
            let value = (0..n).map(|i| problem.local_value(i, &point)).sum::<f64>() / n as f64;
            problem.optimum = Some(Optimum {
                value,
                point: Some(point),
            });
        }
        Ok(problem)
    }

    pub fn hessians(&self) -> &[Mat] {
        &self.hessians
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    /// The same problem with every center moved by `shift`.
    pub fn translated(&self, shift: &[f64]) -> Result<Self> {
        let centers = self
            .centers
            .iter()
            .map(|c| c.iter().zip(shift).map(|(a, b)| a + b).collect())
            .collect();
        QuadraticProblem::new(self.hessians.clone(), centers)
    }
}

impl Objective for QuadraticProblem {
    fn agents(&self) -> usize {
        self.hessians.len()
    }

    fn dim(&self) -> usize {
        self.centers[0].len()
    }

    fn local_value(&self, agent: usize, x: &[f64]) -> f64 {
        let d: Vec<f64> = x
            .iter()
            .zip(&self.centers[agent])
            .map(|(a, b)| a - b)
            .collect();
        0.5 * dot(&d, &self.hessians[agent].matvec(&d))
    }

    fn local_grad(&self, agent: usize, x: &[f64], out: &mut [f64]) {
        let a = &self.hessians[agent];
        let c = &self.centers[agent];
        for (r, o) in out.iter_mut().enumerate() {
            *o = a
                .row(r)
                .iter()
                .zip(x.iter().zip(c))
                .map(|(h, (xv, cv))| h * (xv - cv))
                .sum();
        }
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }

    fn optimum(&self) -> Option<Optimum> {
        self.optimum.clone()
    }
}

/// Random strongly convex quadratics.
///
/// Each `A_i = Q_i diag(λ) Q_iᵀ` with a random orthogonal `Q_i` and
/// eigenvalues log-uniform in `[1, condition_number]`; both endpoints are
/// always present so `L_f = condition_number`. Centers are `c_0 +
/// heterogeneity · z_i` with standard normal `c_0, z_i`.
pub fn quadratic_problem(
    n: usize,
    p: usize,
    condition_number: f64,
    heterogeneity: f64,
    sigma: f64,
    seed: u64,
) -> Result<Problem> {
    if n == 0 || p == 0 {
        return Err(invalid("n/p", "agent count and dimension must be positive"));
    }
    if !(condition_number >= 1.0) {
        return Err(invalid(
            "condition_number",
            format!("{condition_number} < 1"),
        ));
    }
    if !(heterogeneity >= 0.0) {
        return Err(invalid("heterogeneity", format!("{heterogeneity} < 0")));
    }
    use rand::Rng;
    let mut rng = seed::rng(seed, &[seed::tag::PROBLEM, 0]);
    let base = standard_normal_vec(&mut rng, p);
    let log_cond = libm::log(condition_number);
    let mut hessians = Vec::with_capacity(n);
    let mut centers = Vec::with_capacity(n);
    for _ in 0..n {
        let q = random_orthogonal(&mut rng, p);
        let mut eig: Vec<f64> = (0..p)
            .map(|_| libm::exp(rng.gen::<f64>() * log_cond))
            .collect();
        eig[0] = condition_number;
        if p > 1 {
            eig[p - 1] = 1.0;
        }
        let mut a = Mat::zeros(p, p);
        for r in 0..p {
            for c in r..p {
                let v: f64 = (0..p).map(|l| q[(r, l)] * eig[l] * q[(c, l)]).sum();
                a[(r, c)] = v;
                a[(c, r)] = v;
            }
        }
        hessians.push(a);
        let z = standard_normal_vec(&mut rng, p);
        centers.push(
            base.iter()
                .zip(&z)
                .map(|(b, z)| b + heterogeneity * z)
                .collect(),
        );
    }
    Problem::new(QuadraticProblem::new(hessians, centers)?, sigma)
}

/// Gram–Schmidt on a Gaussian matrix.
fn random_orthogonal<R: rand::Rng>(rng: &mut R, p: usize) -> Mat {
    loop {
        let g = Mat::from_vec(p, p, standard_normal_vec(rng, p * p)).expect("square");
        let mut q = Mat::zeros(p, p);
        let mut ok = true;
        for c in 0..p {
            let mut v = g.col(c);
            for prev in 0..c {
                let u = q.col(prev);
                let proj = dot(&v, &u);
                for (vi, ui) in v.iter_mut().zip(&u) {
                    *vi -= proj * ui;
                }
            }
            let norm = libm::sqrt(dot(&v, &v));
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for r in 0..p {
                q[(r, c)] = v[r] / norm;
            }
        }
        if ok {
            return q;
        }
    }
}
