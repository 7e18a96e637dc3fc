//! Synchronous multi-agent simulation of the distributed primal-dual
//! stochastic gradient method with a powerball gradient nonlinearity
//! (DSGPA-F-PB), its comparison baselines, and the convergence diagnostics
//! used to monitor it.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, configuration
//! and the command line live in the companion `dsgpa` crate.
//!
//! Layout:
//!
//! - [`matrix`]: the dense row-major matrix used for stacked agent states
//!   and the symmetric eigensolver behind the spectral quantities.
//! - [`netgraph`]: communication topology, Laplacian, ρ(L) and ρ₂(L).
//! - [`powerball`]: `sgn(x)|x|^γ` and p-norms.
//! - [`problems`]: local smooth costs and the seeded mini-batch oracle.
//! - [`algorithms`]: DSGPA-F-PB, the baselines and the parameter schedule.
//! - [`diagnostics`]: consensus error, gradient metrics, the Lyapunov
//!   monitor and log-log rate fits.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod algorithms;
pub mod diagnostics;
pub mod error;
pub mod matrix;
pub mod netgraph;
pub mod powerball;
pub mod problems;
pub mod seed;

pub use algorithms::{
    dsgpa_pb_step, run, sqrt_horizon_bounds, sqrt_horizon_schedule, AlgoState, Algorithm,
    HyperParams, RunOutput, RunSpec, ScheduleBounds, ScheduleMode,
};
pub use diagnostics::{
    consensus_error, lyapunov, rate_fit, LyapunovMonitor, LyapunovTerms, RateFit, RateModel,
    TraceRecord,
};
pub use error::{Error, Result};
pub use matrix::Mat;
pub use netgraph::Network;
pub use powerball::{pnorm, powerball, powerball_norm_gap, Gamma};
pub use problems::{Objective, OracleSample, Problem};
