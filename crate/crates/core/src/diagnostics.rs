//! Per-iteration metrics, the primal-dual energy function, and log-log rate
//! fits.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::algorithms::{AlgoState, HyperParams};
use crate::error::{invalid, Error, Result};
use crate::matrix::Mat;
use crate::netgraph::{Network, ZERO_EIGEN_REL_TOL};
use crate::powerball::{pnorm_sq, Gamma};
use crate::problems::Problem;

/// The four parts of `W = W₁ + W₂ + W₃ + W₄` and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovTerms {
    /// `½‖x‖²_K`, the disagreement energy.
    pub w1: f64,
    /// `½‖v + g⁰/β‖²_{Q+κ₁K}`.
    pub w2: f64,
    /// `xᵀK(v + g⁰/β)`.
    pub w3: f64,
    /// `n(f(x̄) − f*)`.
    pub w4: f64,
    pub total: f64,
}

/// One trace row.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    /// `(1/n) Σ_i ‖x_i − x̄‖²`.
    pub consensus_err: f64,
    /// `‖∇f(x̄)‖²`.
    pub grad_norm_2: f64,
    /// `‖∇f(x̄)‖²_{1+γ}`.
    pub grad_norm_pg: f64,
    pub fbar: f64,
    pub lyapunov: Option<LyapunovTerms>,
    pub wall_ns: Option<u64>,
}

/// `(1/n) Σ_i ‖x_i − x̄‖²`.
pub fn consensus_error(x: &Mat) -> f64 {
    let mean = x.row_mean();
    let total: f64 = (0..x.rows())
        .map(|i| {
            x.row(i)
                .iter()
                .zip(&mean)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        })
        .sum();
    total / x.rows() as f64
}

/// Evaluates `W` for one network and `κ₁`, caching the weight matrix
/// `Q + κ₁K` where `Q = Σ_{λ_j>0} u_j u_jᵀ/λ_j` and `K = I − 11ᵀ/n`.
#[derive(Debug, Clone)]
pub struct LyapunovMonitor {
    weight: Mat,
    kappa1: f64,
    fstar: f64,
}

impl LyapunovMonitor {
    pub fn new(net: &Network, kappa1: f64, fstar: f64) -> Result<Self> {
        if !kappa1.is_finite() {
            return Err(invalid("kappa1", format!("{kappa1} is not finite")));
        }
        let n = net.n();
        let vals = net.eigenvalues();
        let vecs = net.eigenvectors();
        let cutoff = ZERO_EIGEN_REL_TOL * net.rho().max(1.0);
        let inv_n = 1.0 / n as f64;
        let mut weight = Mat::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                let pinv: f64 = vals
                    .iter()
                    .enumerate()
                    .filter(|(_, &l)| l > cutoff)
                    .map(|(j, &l)| vecs[(r, j)] * vecs[(c, j)] / l)
                    .sum();
                let k = if r == c { 1.0 - inv_n } else { -inv_n };
                weight[(r, c)] = pinv + kappa1 * k;
            }
        }
        Ok(LyapunovMonitor {
            weight,
            kappa1,
            fstar,
        })
    }

    pub fn kappa1(&self) -> f64 {
        self.kappa1
    }

    pub fn fstar(&self) -> f64 {
        self.fstar
    }

    /// `Q + κ₁K`.
    pub fn weight(&self) -> &Mat {
        &self.weight
    }

    /// `W` at `state` with coupling gain `beta`. The shift `g⁰` stacks the
    /// local gradients `∇f_i(x̄)` at the current average.
    pub fn evaluate(&self, state: &AlgoState, prob: &Problem, beta: f64) -> Result<LyapunovTerms> {
        let x = &state.x;
        let v = &state.v;
        let (n, p) = (x.rows(), x.cols());
        if n != self.weight.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.weight.rows(),
                found: n,
            });
        }
        if !(beta > 0.0) {
            return Err(invalid("beta", "energy needs beta > 0"));
        }
        let mean = x.row_mean();
        let mut z = v.clone();
        let mut g = vec![0.0; p];
        for i in 0..n {
            prob.objective().local_grad(i, &mean, &mut g);
            for (zv, gv) in z.row_mut(i).iter_mut().zip(&g) {
                *zv += gv / beta;
            }
        }

        let mut w1 = 0.0;
        let mut w3 = 0.0;
        for i in 0..n {
            for ((xv, m), zv) in x.row(i).iter().zip(&mean).zip(z.row(i)) {
                let d = xv - m;
                w1 += d * d;
                w3 += d * zv;
            }
        }
        w1 *= 0.5;

        let mut w2 = 0.0;
        for r in 0..n {
            let wr = self.weight.row(r);
            for (c, &m) in wr.iter().enumerate() {
                if m != 0.0 {
                    w2 += m * z
                        .row(r)
                        .iter()
                        .zip(z.row(c))
                        .map(|(a, b)| a * b)
                        .sum::<f64>();
                }
            }
        }
        w2 *= 0.5;

        let w4 = n as f64 * (prob.value(&mean) - self.fstar);
        Ok(LyapunovTerms {
            w1,
            w2,
            w3,
            w4,
            total: w1 + w2 + w3 + w4,
        })
    }
}

/// One-shot `W` evaluation; `κ₁` comes from `hp` (or `α/β`).
pub fn lyapunov(
    state: &AlgoState,
    net: &Network,
    prob: &Problem,
    hp: &HyperParams,
    fstar: f64,
) -> Result<LyapunovTerms> {
    let monitor = LyapunovMonitor::new(net, hp.kappa1_or_ratio(), fstar)?;
    monitor.evaluate(state, prob, hp.at(state.k).2)
}

/// Metrics for one trace row. `gamma` selects the `(1+γ)`-norm.
pub fn record(
    state: &AlgoState,
    prob: &Problem,
    gamma: Gamma,
    lyapunov: Option<(&LyapunovMonitor, f64)>,
    wall_ns: Option<u64>,
) -> Result<TraceRecord> {
    let mean = state.x.row_mean();
    let grad = prob.grad(&mean);
    let grad_norm_2 = grad.iter().map(|g| g * g).sum();
    let grad_norm_pg = pnorm_sq(&grad, gamma.norm_exponent())?;
    let lyapunov = match lyapunov {
        Some((monitor, beta)) => Some(monitor.evaluate(state, prob, beta)?),
        None => None,
    };
    Ok(TraceRecord {
        k: state.k,
        consensus_err: consensus_error(&state.x),
        grad_norm_2,
        grad_norm_pg,
        fbar: prob.value(&mean),
        lyapunov,
        wall_ns,
    })
}

/// Which horizon variable a rate is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateModel {
    /// Metric against `T`; the reference exponent is `−1`.
    InvT,
    /// Metric against `nT`; the reference exponent is `−½`.
    InvSqrtNT,
}

impl RateModel {
    pub fn reference_exponent(self) -> f64 {
        match self {
            RateModel::InvT => -1.0,
            RateModel::InvSqrtNT => -0.5,
        }
    }
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r2: f64,
    pub model: RateModel,
}

/// Fits `ln y = exponent · ln x + intercept` over `(x, y)` pairs with
/// positive coordinates.
pub fn rate_fit(points: &[(f64, f64)], model: RateModel) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(invalid("points", "need at least three points"));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(invalid(
            "points",
            format!("({x}, {y}) is not strictly positive"),
        ));
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .map(|&(x, y)| (libm::log(x), libm::log(y)))
        .collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(invalid("points", "all x values coincide"));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residual: f64 = logs
        .iter()
        .map(|p| {
            let e = p.1 - (exponent * p.0 + intercept);
            e * e
        })
        .sum();
    let r2 = if syy == 0.0 {
        1.0
    } else {
        1.0 - residual / syy
    };
    Ok(RateFit {
        exponent,
        intercept,
        r2,
        model,
    })
}
