//! Communication topology.
//!
//! A [`Network`] is an undirected weighted graph over agents `0..n` with its
//! Laplacian `L = Deg − A` and the spectral data the algorithms need: the
//! spectral radius ρ(L), the smallest positive eigenvalue ρ₂(L), and the full
//! eigendecomposition (used by the Lyapunov monitor). Networks are immutable
//! once built.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::matrix::{sym_eigen, Mat};
use crate::seed;

/// Eigenvalues below this fraction of ρ(L) count as zero.
pub const ZERO_EIGEN_REL_TOL: f64 = 1e-10;

/// Resampling budget for [`erdos_renyi`].
pub const ER_ATTEMPT_BUDGET: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct Network {
    n: usize,
    edges: Vec<Edge>,
    weights: Mat,
    laplacian: Mat,
    neighbors: Vec<Vec<(usize, f64)>>,
    degrees: Vec<f64>,
    eigenvalues: Vec<f64>,
    eigenvectors: Mat,
    rho: f64,
    rho2: f64,
}

impl Network {
    /// Builds a network from undirected edges `(i, j, w)` over `n` agents.
    pub fn new(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "a network needs at least one agent"));
        }
        let mut weights = Mat::zeros(n, n);
        let mut stored = Vec::with_capacity(edges.len());
        for &(i, j, w) in edges {
            for idx in [i, j] {
                if idx >= n {
                    return Err(Error::AgentOutOfRange { index: idx, n });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::NonPositiveWeight { i, j, weight: w });
            }
            if weights[(i, j)] != 0.0 {
                return Err(Error::DuplicateEdge(i.min(j), i.max(j)));
            }
            weights[(i, j)] = w;
            weights[(j, i)] = w;
            stored.push(Edge { i, j, weight: w });
        }

        let mut laplacian = Mat::zeros(n, n);
        let mut neighbors = vec![Vec::new(); n];
        let mut degrees = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let w = weights[(i, j)];
                if w > 0.0 {
                    neighbors[i].push((j, w));
                    degrees[i] += w;
                    laplacian[(i, j)] = -w;
                }
            }
            laplacian[(i, i)] = degrees[i];
        }

        let (eigenvalues, eigenvectors) = sym_eigen(&laplacian);
        let rho = eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let zero_tol = ZERO_EIGEN_REL_TOL * rho;
        let rho2 = eigenvalues
            .iter()
            .copied()
            .find(|&v| v > zero_tol)
            .unwrap_or(0.0);

        Ok(Network {
            n,
            edges: stored,
            weights,
            laplacian,
            neighbors,
            degrees,
            eigenvalues,
            eigenvectors,
            rho,
            rho2,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn weights(&self) -> &Mat {
        &self.weights
    }

    pub fn laplacian(&self) -> &Mat {
        &self.laplacian
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// `(j, a_ij)` for every neighbor `j` of agent `i`, in ascending `j`.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.neighbors[i]
    }

    /// Laplacian eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors; column `j` pairs with `eigenvalues()[j]`.
    pub fn eigenvectors(&self) -> &Mat {
        &self.eigenvectors
    }

    /// ρ(L).
    #[inline]
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// ρ₂(L), the smallest positive eigenvalue; `0.0` when there is none.
    #[inline]
    pub fn rho2(&self) -> f64 {
        self.rho2
    }

    /// ρ(L²) = ρ(L)² for symmetric L.
    #[inline]
    pub fn rho_sq(&self) -> f64 {
        self.rho * self.rho
    }

    /// Second-smallest Laplacian eigenvalue (algebraic connectivity).
    pub fn algebraic_connectivity(&self) -> f64 {
        self.eigenvalues.get(1).copied().unwrap_or(0.0)
    }

    /// Connectivity by the spectral test: eigenvalue 0 is simple.
    pub fn spectrally_connected(&self) -> bool {
        self.n == 1 || self.algebraic_connectivity() > ZERO_EIGEN_REL_TOL * self.rho
    }

    /// Step size of the baseline mixing matrix `W = I − εL`.
    #[inline]
    pub fn mixing_step(&self) -> f64 {
        1.0 / (self.rho + 1.0)
    }

    /// `W X` with `W = I − L/(ρ(L)+1)`.
    pub fn mixing_apply(&self, x: &Mat) -> Result<Mat> {
        let eps = self.mixing_step();
        let mut out = laplacian_apply(self, x)?;
        for (o, xv) in out.as_mut_slice().iter_mut().zip(x.as_slice()) {
            *o = xv - eps * *o;
        }
        Ok(out)
    }
}

/// Undirected network from an edge list.
pub fn build_network(edges: &[(usize, usize, f64)], n: usize) -> Result<Network> {
    Network::new(n, edges)
}

/// Complete graph with unit weights.
pub fn complete_graph(n: usize) -> Result<Network> {
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, j, 1.0));
        }
    }
    Network::new(n, &edges)
}

/// G(n, prob) with unit weights, resampled until connected.
///
/// Attempt `a` draws from the stream keyed by `(seed, a)`, so the result is a
/// pure function of the arguments.
pub fn erdos_renyi(n: usize, prob: f64, seed: u64) -> Result<Network> {
    if n < 2 {
        return Err(invalid("n", "Erdos-Renyi sampling needs n >= 2"));
    }
    if !(prob > 0.0 && prob <= 1.0) {
        return Err(invalid("prob", alloc::format!("{prob} is outside (0, 1]")));
    }
    for attempt in 0..ER_ATTEMPT_BUDGET {
        let mut rng = seed::rng(seed, &[seed::tag::GRAPH, attempt as u64]);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen::<f64>() < prob {
                    edges.push((i, j, 1.0));
                }
            }
        }
        let net = Network::new(n, &edges)?;
        if is_connected(&net) {
            if attempt > 0 {
                log::debug!(
                    "erdos_renyi(n={n}, prob={prob}): connected after {} attempts",
                    attempt + 1
                );
            }
            return Ok(net);
        }
    }
    Err(Error::ConnectivityBudget {
        n,
        prob,
        budget: ER_ATTEMPT_BUDGET,
    })
}

/// Breadth-first reachability from agent 0.
pub fn is_connected(net: &Network) -> bool {
    let mut seen = vec![false; net.n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = queue.pop_front() {
        for &(j, _) in net.neighbors(i) {
            if !seen[j] {
                seen[j] = true;
                count += 1;
                queue.push_back(j);
            }
        }
    }
    count == net.n
}

/// `L X` for a stacked `n × p` matrix, evaluated as `Σ_j w_ij (x_i − x_j)`
/// so that identical rows give exactly zero.
pub fn laplacian_apply(net: &Network, x: &Mat) -> Result<Mat> {
    if x.rows() != net.n {
        return Err(Error::DimensionMismatch {
            expected: net.n,
            found: x.rows(),
        });
    }
    let p = x.cols();
    let mut out = Mat::zeros(net.n, p);
    for i in 0..net.n {
        let xi = x.row(i);
        let dst = out.row_mut(i);
        for &(j, w) in &net.neighbors[i] {
            for ((d, a), b) in dst.iter_mut().zip(xi).zip(x.row(j)) {
                *d += w * (a - b);
            }
        }
    }
    Ok(out)
}
