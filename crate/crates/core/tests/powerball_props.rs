use dsgpa_core::powerball::{pnorm_sq, powerball_scalar};
use dsgpa_core::{pnorm, powerball, powerball_norm_gap, Gamma};
use proptest::prelude::*;

fn entries() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![-1e3..1e3f64, -1.0..1.0f64, Just(0.0)], 1..32)
}

proptest! {
    #[test]
    fn odd_symmetry(v in entries(), g in 0.0..=1.0f64) {
        let gamma = Gamma::new(g).unwrap();
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let a = powerball(&neg, gamma);
        let b: Vec<f64> = powerball(&v, gamma).iter().map(|x| -x).collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn coordinatewise_monotone(a in -1e3..1e3f64, b in -1e3..1e3f64, g in 0.0..=1.0f64) {
        let gamma = Gamma::new(g).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(powerball_scalar(lo, gamma) <= powerball_scalar(hi, gamma));
    }

    #[test]
    fn sign_pattern_preserved(v in entries(), g in 0.0..=1.0f64) {
        let out = powerball(&v, Gamma::new(g).unwrap());
        for (x, y) in v.iter().zip(&out) {
            prop_assert_eq!(x.signum() * (*x != 0.0) as i32 as f64, y.signum() * (*y != 0.0) as i32 as f64);
        }
    }

    #[test]
    fn continuity_as_gamma_tends_to_one(v in entries()) {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let top = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for eps in [1e-3, 1e-6] {
            let out = powerball(&v, Gamma::new(1.0 - eps).unwrap());
            let diff = out.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            // |x − |x|^{1−ε}| ≤ ε|x||ln|x|| for |x| ≥ 1, and ≤ ε/e for |x| < 1.
            let tol = eps * (norm * (top + 2.0).ln() + (v.len() as f64).sqrt());
            prop_assert!(diff <= tol, "eps={} diff={} tol={}", eps, diff, tol);
        }
    }

    /// `‖σ(v)‖² ≤ ‖v‖²_{1+γ}` holds whenever `‖v‖_{1+γ} ≥ p^{1/(2(1+γ))}`,
    /// since then the Hölder factor `p^{(1−γ)/(1+γ)}` is absorbed.
    #[test]
    fn norm_inequality_on_large_vectors(v in prop::collection::vec(-1e3..1e3f64, 1..64), g in 0.5..1.0f64) {
        let gamma = Gamma::new(g).unwrap();
        let p = v.len() as f64;
        let q = 1.0 + g;
        let norm = pnorm(&v, q).unwrap();
        prop_assume!(norm >= p.powf(1.0 / (2.0 * q)));
        let gap = powerball_norm_gap(&v, gamma).unwrap();
        prop_assert!(gap >= -1e-12 * (1.0 + norm * norm), "gap {}", gap);
    }

    #[test]
    fn pnorm_two_is_euclidean(v in entries()) {
        let e = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let n = pnorm(&v, 2.0).unwrap();
        prop_assert!((n - e).abs() <= 1e-12 * (1.0 + e));
        prop_assert_eq!(pnorm_sq(&v, 2.0).unwrap(), v.iter().map(|x| x * x).sum::<f64>());
    }
}

#[test]
fn pnorm_fractional_exponent() {
    let direct = (3f64.powf(1.5) + 4f64.powf(1.5)).powf(1.0 / 1.5);
    assert!((pnorm(&[3.0, 4.0], 1.5).unwrap() - direct).abs() < 1e-12);
    assert_eq!(pnorm(&[3.0, -4.0], 1.0).unwrap(), 7.0);
    assert!(pnorm(&[1.0], 0.5).is_err());
}

#[test]
fn powerball_norm_gap_brute_force() {
    let lhs = (3f64.powf(1.5) + 4f64.powf(1.5)).powf(4.0 / 3.0);
    let gap = powerball_norm_gap(&[3.0, 4.0], Gamma::new(0.5).unwrap()).unwrap();
    assert!((gap - (lhs - 7.0)).abs() < 1e-10);
    assert!(gap > 0.0);
    assert_eq!(
        powerball_norm_gap(&[0.0, 0.0], Gamma::new(0.75).unwrap()).unwrap(),
        0.0
    );
    assert!(powerball_norm_gap(&[1.0], Gamma::ONE).is_err());
    assert!(powerball_norm_gap(&[1.0], Gamma::new(0.4).unwrap()).is_err());
}

#[test]
fn gamma_range() {
    assert!(Gamma::new(-0.1).is_err());
    assert!(Gamma::new(1.1).is_err());
    assert!(!Gamma::new(0.3).unwrap().in_theory_range());
    assert!(Gamma::new(0.5).unwrap().in_theory_range());
}
