use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("agent index {index} out of range for {n} agents")]
    AgentOutOfRange { index: usize, n: usize },

    #[error("self-loop on agent {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("edge ({i}, {j}) has nonpositive weight {weight}")]
    NonPositiveWeight { i: usize, j: usize, weight: f64 },

    #[error("no connected Erdos-Renyi sample for n={n}, prob={prob} within {budget} attempts")]
    ConnectivityBudget { n: usize, prob: f64, budget: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("kappa1 = {kappa1} must exceed 1/rho2(L) + 1 = {bound}")]
    Kappa1TooSmall { kappa1: f64, bound: f64 },

    #[error("kappa2 = {kappa2} must lie in the open interval (0, {upper})")]
    Kappa2OutOfRange { kappa2: f64, upper: f64 },

    #[error("non-finite state at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
