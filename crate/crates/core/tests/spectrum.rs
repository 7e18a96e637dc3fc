use dsgpa_core::netgraph::{build_network, erdos_renyi, is_connected};
use dsgpa_core::Network;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn to_nalgebra(net: &Network) -> DMatrix<f64> {
    let l = net.laplacian();
    DMatrix::from_fn(net.n(), net.n(), |r, c| l[(r, c)])
}

fn reference_eigenvalues(net: &Network) -> Vec<f64> {
    let mut vals: Vec<f64> = to_nalgebra(net)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    vals.sort_by(f64::total_cmp);
    vals
}

#[test]
fn star_spectrum() {
    let net = build_network(&[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)], 4).unwrap();
    let expected = reference_eigenvalues(&net);
    for (a, b) in net.eigenvalues().iter().zip(&expected) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
    for (a, b) in expected.iter().zip([0.0, 1.0, 1.0, 4.0]) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!((net.rho() - 4.0).abs() < 1e-12);
    assert!((net.rho2() - 1.0).abs() < 1e-12);
}

#[test]
fn rho2_matches_reference_eigensolver() {
    for seed in 0..20 {
        let n = 3 + (seed as usize % 12);
        let net = erdos_renyi(n, 0.4, seed).unwrap();
        let expected = reference_eigenvalues(&net);
        assert!(net.rho2() > 0.0);
        assert!((net.rho2() - expected[1]).abs() <= 1e-9 * expected[1]);
        assert!((net.rho() - expected[n - 1]).abs() <= 1e-9 * expected[n - 1]);
        assert!(net.rho2() <= net.rho());
        assert_eq!(net.rho_sq(), net.rho() * net.rho());
        assert!(is_connected(&net));
        assert!(net.spectrally_connected());
    }
}

#[test]
fn weighted_graph_matches_reference() {
    let edges = [
        (0, 1, 0.5),
        (1, 2, 2.25),
        (2, 3, 1.0),
        (3, 0, 0.125),
        (1, 3, 3.0),
    ];
    let net = build_network(&edges, 4).unwrap();
    let expected = reference_eigenvalues(&net);
    for (a, b) in net.eigenvalues().iter().zip(&expected) {
        assert!((a - b).abs() < 1e-11);
    }
}

#[test]
fn eigenvectors_are_orthonormal_and_diagonalize() {
    let net = erdos_renyi(9, 0.5, 4).unwrap();
    let u = net.eigenvectors();
    let l = net.laplacian();
    let n = net.n();
    for a in 0..n {
        for b in 0..n {
            let inner: f64 = (0..n).map(|r| u[(r, a)] * u[(r, b)]).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((inner - want).abs() < 1e-10);
        }
        let lu: Vec<f64> = (0..n)
            .map(|r| (0..n).map(|c| l[(r, c)] * u[(c, a)]).sum())
            .collect();
        for r in 0..n {
            assert!((lu[r] - net.eigenvalues()[a] * u[(r, a)]).abs() < 1e-10);
        }
    }
}

#[test]
fn pseudo_inverse_sandwich_on_zero_mean_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 0..10 {
        let net = erdos_renyi(8, 0.45, seed).unwrap();
        let n = net.n();
        let l = to_nalgebra(&net);
        let ones = DMatrix::from_element(n, n, 1.0 / n as f64);
        let pinv = (l + &ones).try_inverse().unwrap() - ones;
        for _ in 0..50 {
            let mut z = DVector::from_fn(n, |_, _| rng.gen_range(-3.0..3.0));
            let mean = z.mean();
            z.add_scalar_mut(-mean);
            let form = z.dot(&(&pinv * &z));
            let zz = z.dot(&z);
            assert!(form >= zz / net.rho() - 1e-8, "{form} < {}", zz / net.rho());
            assert!(
                form <= zz / net.rho2() + 1e-8,
                "{form} > {}",
                zz / net.rho2()
            );
        }
    }
}

#[test]
fn disconnected_graph_has_no_positive_gap() {
    let net = build_network(&[(0, 1, 1.0), (2, 3, 1.0)], 4).unwrap();
    assert!(!is_connected(&net));
    assert!(!net.spectrally_connected());
    assert!(net.algebraic_connectivity().abs() < 1e-12);
}
