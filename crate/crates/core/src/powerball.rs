//! The powerball map `σ(x, γ) = sgn(x)|x|^γ` and the p-norms used by the
//! analysis of the accelerated update.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Result};

/// Powerball exponent, restricted to `[0, 1]`.
///
/// Values in `[1/2, 1]` are covered by the convergence theory; smaller values
/// (down to the sign map at `γ = 0`) are accepted for experiments.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Gamma(f64);

impl Gamma {
    pub const ONE: Gamma = Gamma(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(invalid("gamma", format!("{value} is outside [0, 1]")));
        }
        Ok(Gamma(value))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// True when `γ ∈ [1/2, 1]`.
    pub fn in_theory_range(self) -> bool {
        self.0 >= 0.5
    }

    /// The norm exponent `1 + γ` paired with this powerball.
    #[inline]
    pub fn norm_exponent(self) -> f64 {
        1.0 + self.0
    }
}

impl Default for Gamma {
    fn default() -> Self {
        Gamma::ONE
    }
}

#[inline]
pub fn powerball_scalar(x: f64, gamma: Gamma) -> f64 {
    let g = gamma.0;
    if g == 1.0 {
        x
    } else if x == 0.0 {
        0.0
    } else if g == 0.0 {
        x.signum()
    } else {
        libm::copysign(libm::exp(g * libm::log(x.abs())), x)
    }
}

pub fn powerball(v: &[f64], gamma: Gamma) -> Vec<f64> {
    v.iter().map(|&x| powerball_scalar(x, gamma)).collect()
}

pub fn powerball_in_place(v: &mut [f64], gamma: Gamma) {
    if gamma.0 == 1.0 {
        return;
    }
    for x in v {
        *x = powerball_scalar(*x, gamma);
    }
}

/// `‖v‖_p` for `p ≥ 1`.
pub fn pnorm(v: &[f64], p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(invalid("p", format!("p-norm needs p >= 1, got {p}")));
    }
    Ok(if p == 2.0 {
        libm::sqrt(v.iter().map(|x| x * x).sum())
    } else if p == 1.0 {
        v.iter().map(|x| x.abs()).sum()
    } else {
        let s: f64 = v
            .iter()
            .filter(|x| **x != 0.0)
            .map(|x| libm::pow(x.abs(), p))
            .sum();
        libm::pow(s, 1.0 / p)
    })
}

/// `‖v‖_p²`. For `p = 2` this is the plain sum of squares with no
/// square-root round trip, so it agrees bitwise with `Σ v_l²`.
pub fn pnorm_sq(v: &[f64], p: f64) -> Result<f64> {
    if p == 2.0 {
        return Ok(v.iter().map(|x| x * x).sum());
    }
    pnorm(v, p).map(|r| r * r)
}

/// `‖v‖²_{1+γ} − ‖σ(v, γ)‖²`, which is nonnegative for `γ ∈ [1/2, 1)`.
pub fn powerball_norm_gap(v: &[f64], gamma: Gamma) -> Result<f64> {
    let g = gamma.0;
    if !(0.5..1.0).contains(&g) {
        return Err(invalid("gamma", format!("{g} is outside [0.5, 1)")));
    }
    let lhs = pnorm_sq(v, 1.0 + g)?;
    let rhs: f64 = v
        .iter()
        .map(|&x| powerball_scalar(x, gamma))
        .map(|s| s * s)
        .sum();
    Ok(lhs - rhs)
}
