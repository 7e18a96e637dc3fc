//! Acceptance criteria. Prints one `PASS`/`FAIL` line per criterion and
//! exits nonzero if any fails. Pass criterion numbers as arguments to run a
//! subset, e.g. `cargo test -p dsgpa --test acceptance -- 4 5`.
//!
//! Set `DSGPA_BLESS=1` to rewrite the committed acceleration reference.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use dsgpa::trace::format_trace;
use dsgpa_core::algorithms::{run_from, step};
use dsgpa_core::netgraph::{build_network, complete_graph, erdos_renyi};
use dsgpa_core::problems::{
    gaussian_blobs, nonconvex_problem, quadratic_problem, two_layer_sigmoid_problem,
};
use dsgpa_core::seed;
use dsgpa_core::{
    pnorm, powerball, powerball_norm_gap, rate_fit, sqrt_horizon_bounds, sqrt_horizon_schedule,
    AlgoState, Algorithm, Gamma, HyperParams, Network, Problem, RateModel, RunSpec,
};
use rand::Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

const CRITERIA: [Criterion; 10] = [
    (
        1,
        "powerball norm inequality",
        Duration::from_secs(10),
        norm_inequality,
    ),
    (
        2,
        "dual sum conservation",
        Duration::from_secs(30),
        dual_conservation,
    ),
    (
        3,
        "deterministic energy descent",
        Duration::from_secs(20),
        energy_descent,
    ),
    (
        4,
        "consensus rate",
        Duration::from_secs(300),
        consensus_rate,
    ),
    (
        5,
        "linear speedup trend",
        Duration::from_secs(600),
        linear_speedup,
    ),
    (
        6,
        "unit gamma reduction",
        Duration::from_secs(10),
        unit_gamma_reduction,
    ),
    (
        7,
        "acceleration ordering",
        Duration::from_secs(180),
        acceleration_ordering,
    ),
    (
        8,
        "gradient correctness",
        Duration::from_secs(30),
        gradient_correctness,
    ),
    (
        9,
        "schedule validation",
        Duration::from_secs(1),
        schedule_validation,
    ),
    (
        10,
        "reproducible runs",
        Duration::from_secs(30),
        reproducible_runs,
    ),
];

fn main() {
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (id, name, budget, check) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = result.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "acceptance {id:>2} {:<30} {} [{:.1}s of {}s{}] {}",
            name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" },
            result.detail
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn norm_inequality() -> Outcome {
    let mut rng = seed::rng(20_240_601, &[1]);
    let mut violations = 0usize;
    let mut worst = 0.0f64;
    let mut worst_case = String::new();
    for _ in 0..100_000 {
        let gamma = Gamma::new(rng.gen_range(0.5..1.0)).unwrap();
        let dim = rng.gen_range(1..=64);
        let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
        let v: Vec<f64> = (0..dim).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
        let lhs: f64 = powerball(&v, gamma).iter().map(|s| s * s).sum();
        let rhs = pnorm(&v, gamma.norm_exponent()).unwrap().powi(2);
        debug_assert!(
            (powerball_norm_gap(&v, gamma).unwrap() - (rhs - lhs)).abs() <= 1e-9 * (1.0 + lhs)
        );
        let excess = lhs - rhs - 1e-12 * (1.0 + rhs);
        if excess > 0.0 {
            violations += 1;
            let rel = excess / (1.0 + rhs);
            if rel > worst {
                worst = rel;
                worst_case = format!("dim {dim}, gamma {:.3}, scale {scale:.2e}", gamma.value());
            }
        }
    }
    outcome(
        violations == 0,
        format!("{violations} of 100000 samples violate; worst relative excess {worst:.3e} ({worst_case})"),
    )
}

fn dual_conservation() -> Outcome {
    let net = erdos_renyi(10, 0.4, 7).unwrap();
    let prob = nonconvex_problem(10, 5, 0.5, 11).unwrap();
    let hp = HyperParams::fixed(0.01, 5.0, 20.0).with_gamma(Gamma::new(0.7).unwrap());
    let mut state = AlgoState::random(10, 5, 3);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        if let Err(e) = step(Algorithm::DsgpaFPb, &mut state, &net, &prob, &hp, 3) {
            return outcome(false, format!("run failed: {e}"));
        }
        let sums = state.v.col_sums();
        worst = sums.iter().fold(worst, |m, s| m.max(s.abs()));
    }
    outcome(
        worst <= 1e-8,
        format!("max_k max_l |sum_i v_il| = {worst:.3e} (limit 1e-8)"),
    )
}

fn schedule(net: &Network, horizon: usize) -> HyperParams {
    let kappa1 = 2.0;
    let kappa2 = 0.9 * sqrt_horizon_bounds(net, kappa1).unwrap().kappa2_max;
    sqrt_horizon_schedule(net, horizon, kappa1, kappa2).unwrap()
}

fn energy_descent() -> Outcome {
    let n = 4;
    let horizon = 5000;
    let net = complete_graph(n).unwrap();
    let mut worst_rise = f64::NEG_INFINITY;
    let mut min_w = f64::INFINITY;
    let mut bad = 0;
    let cases = [(0, 0.0), (1, 0.3), (2, 1.0), (3, 3.0)];
    for (s, het) in cases {
        let prob = quadratic_problem(n, 5, 2.0, het, 0.0, 60 + s).unwrap();
        let fstar = prob.optimum_hint().unwrap().value;
        let spec = RunSpec::new(Algorithm::DsgpaF, schedule(&net, horizon), horizon, s)
            .with_lyapunov(fstar);
        let out = dsgpa_core::run(&spec, &net, &prob).unwrap();
        let w: Vec<f64> = out
            .trace
            .iter()
            .map(|r| r.lyapunov.unwrap().total)
            .collect();
        let mut ok = w.len() == horizon + 1;
        for pair in w.windows(2) {
            let rise = (pair[1] - pair[0]) / (1.0 + pair[0]);
            worst_rise = worst_rise.max(rise);
            ok &= pair[1] <= pair[0] + 1e-9 * (1.0 + pair[0]);
        }
        min_w = w.iter().cloned().fold(min_w, f64::min);
        // W₄ = n(f(x̄) − f*) rounds to a few ulps below zero at the optimum.
        ok &= w.iter().all(|&v| v >= -1e-9);
        if !ok {
            bad += 1;
        }
    }
    outcome(
        bad == 0,
        format!(
            "{bad} of {} runs fail; largest relative rise {worst_rise:.3e} (limit 1e-9), min W {min_w:.3e} (limit -1e-9)",
            cases.len()
        ),
    )
}

/// Mean over seeds of the time average `(1/T) Σ_{k<T} metric(k)`.
fn time_average(
    net: &Network,
    prob: &Problem,
    hp: &HyperParams,
    horizon: usize,
    seeds: &[u64],
    metric: fn(&dsgpa_core::TraceRecord) -> f64,
) -> f64 {
    let totals: Vec<f64> = seeds
        .par_iter()
        .map(|&s| {
            let spec = RunSpec::new(Algorithm::DsgpaFPb, hp.clone(), horizon, s);
            let out = dsgpa_core::run(&spec, net, prob).unwrap();
            assert!(out.diverged_at.is_none());
            out.trace[..horizon].iter().map(metric).sum::<f64>() / horizon as f64
        })
        .collect();
    totals.iter().sum::<f64>() / totals.len() as f64
}

fn consensus_rate() -> Outcome {
    let n = 10;
    let net = complete_graph(n).unwrap();
    let prob = quadratic_problem(n, 5, 10.0, 1.0, 1.0, 3).unwrap();
    let seeds: Vec<u64> = (100..108).collect();
    let points: Vec<(f64, f64)> = [1_000, 4_000, 16_000]
        .iter()
        .map(|&t| {
            let avg = time_average(&net, &prob, &schedule(&net, t), t, &seeds, |r| {
                r.consensus_err
            });
            (t as f64, avg)
        })
        .collect();
    let fit = rate_fit(&points, RateModel::InvT).unwrap();
    let shown: Vec<String> = points
        .iter()
        .map(|(t, c)| format!("T={t}: {c:.3e}"))
        .collect();
    outcome(
        fit.exponent <= -0.6 && fit.r2 >= 0.9,
        format!(
            "exponent {:.3} (limit -0.6), r2 {:.4} (limit 0.9); {}",
            fit.exponent,
            fit.r2,
            shown.join(", ")
        ),
    )
}

fn linear_speedup() -> Outcome {
    let horizon = 10_000;
    let seeds: Vec<u64> = (200..216).collect();
    let values: Vec<(usize, f64)> = [4, 8, 16]
        .iter()
        .map(|&n| {
            let net = complete_graph(n).unwrap();
            let prob = quadratic_problem(n, 5, 10.0, 0.0, 1.0, 5).unwrap();
            let avg = time_average(
                &net,
                &prob,
                &schedule(&net, horizon),
                horizon,
                &seeds,
                |r| r.grad_norm_2,
            );
            (n, avg)
        })
        .collect();
    let monotone = values.windows(2).all(|w| w[1].1 < w[0].1);
    let ratio = values[2].1 / values[0].1;
    let shown: Vec<String> = values
        .iter()
        .map(|(n, g)| format!("n={n}: {g:.4e}"))
        .collect();
    outcome(
        monotone && ratio <= 0.7,
        format!(
            "monotone {monotone}, ratio n=16/n=4 {ratio:.3} (limit 0.7); {}",
            shown.join(", ")
        ),
    )
}

fn unit_gamma_reduction() -> Outcome {
    let blobs = gaussian_blobs(60, 4, 3, 1.0, 9).unwrap();
    let cases: Vec<(&str, Network, Problem)> = vec![
        (
            "quadratic",
            erdos_renyi(8, 0.4, 1).unwrap(),
            quadratic_problem(8, 6, 20.0, 1.0, 0.3, 2).unwrap(),
        ),
        (
            "nonconvex",
            erdos_renyi(6, 0.5, 4).unwrap(),
            nonconvex_problem(6, 5, 0.5, 5).unwrap(),
        ),
        (
            "two-layer",
            complete_graph(4).unwrap(),
            two_layer_sigmoid_problem(blobs, 4, 6, 0.1, 6).unwrap(),
        ),
    ];
    let mut mismatched = Vec::new();
    for (i, (name, net, prob)) in cases.iter().enumerate() {
        let hp = HyperParams::fixed(0.01, 5.0, 20.0).with_batch(2);
        let trace = |algo: Algorithm, hp: HyperParams| {
            let spec = RunSpec::new(algo, hp, 400, 30 + i as u64)
                .trace_every(7)
                .with_lyapunov(0.0);
            format_trace(&dsgpa_core::run(&spec, net, prob).unwrap().trace)
        };
        let pb = trace(Algorithm::DsgpaFPb, hp.clone().with_gamma(Gamma::ONE));
        let plain = trace(Algorithm::DsgpaF, hp.with_gamma(Gamma::new(0.4).unwrap()));
        if pb != plain {
            mismatched.push(*name);
        }
    }
    outcome(
        mismatched.is_empty(),
        format!(
            "{} of 3 configurations differ {:?}",
            mismatched.len(),
            mismatched
        ),
    )
}

fn reference_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/acceleration_reference.csv")
}

fn acceleration_ordering() -> Outcome {
    let n = 10;
    let net = erdos_renyi(n, 0.4, 7).unwrap();
    let prob = quadratic_problem(n, 5, 100.0, 0.0, 0.1, 3).unwrap();
    let fstar = prob.optimum_hint().unwrap().value;
    let horizon = 5_000;
    let hits = |algo: Algorithm, gamma: f64| -> Vec<Option<usize>> {
        (0..16u64)
            .into_par_iter()
            .map(|s| {
                let hp = HyperParams::fixed(0.01, 5.0, 20.0).with_gamma(Gamma::new(gamma).unwrap());
                let spec = RunSpec::new(algo, hp, horizon, 300 + s);
                let init = AlgoState::random(n, 5, 300 + s);
                let out = run_from(&spec, &net, &prob, init, None).unwrap();
                out.trace
                    .iter()
                    .find(|r| r.fbar - fstar <= 1e-2)
                    .map(|r| r.k)
            })
            .collect()
    };
    let pb = hits(Algorithm::DsgpaFPb, 0.7);
    let plain = hits(Algorithm::DsgpaF, 1.0);
    let mut table = String::from("seed,dsgpa_f_pb_g0.7,dsgpa_f\n");
    for s in 0..16 {
        let cell = |h: Option<usize>| h.map(|k| k.to_string()).unwrap_or_default();
        table.push_str(&format!("{},{},{}\n", 300 + s, cell(pb[s]), cell(plain[s])));
    }
    let path = reference_path();
    if std::env::var_os("DSGPA_BLESS").is_some() {
        fs::write(&path, &table).unwrap();
    }
    let pinned = fs::read_to_string(&path)
        .map(|r| r == table)
        .unwrap_or(false);
    let mean = |h: &[Option<usize>]| -> Option<f64> {
        let ks: Option<Vec<usize>> = h.iter().copied().collect();
        ks.map(|ks| ks.iter().sum::<usize>() as f64 / ks.len() as f64)
    };
    match (mean(&pb), mean(&plain)) {
        (Some(a), Some(b)) => outcome(
            a <= b && pinned,
            format!("mean iterations to gap 1e-2: powerball {a:.2}, plain {b:.2}; matches reference {pinned}"),
        ),
        _ => outcome(false, "some run never reached the 1e-2 gap".into()),
    }
}

fn gradient_correctness() -> Outcome {
    let blobs = gaussian_blobs(80, 5, 4, 1.0, 2).unwrap();
    let problems: Vec<(&str, Problem)> = vec![
        (
            "quadratic",
            quadratic_problem(5, 7, 50.0, 1.0, 0.0, 1).unwrap(),
        ),
        ("nonconvex", nonconvex_problem(5, 6, 0.0, 2).unwrap()),
        (
            "two-layer",
            two_layer_sigmoid_problem(blobs, 5, 8, 0.0, 3).unwrap(),
        ),
    ];
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    let mut rng = seed::rng(77, &[8]);
    for (name, prob) in &problems {
        let p = prob.p();
        let mut w = 0.0f64;
        for _ in 0..20 {
            let x: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for agent in 0..prob.n() {
                let g = prob.local_grad(agent, &x);
                let fd = central_difference(|y| prob.local_value(agent, y), &x);
                let err = dist(&g, &fd) / norm(&g).max(1e-8);
                w = w.max(err);
            }
            let err = dist(&prob.grad(&x), &central_difference(|y| prob.value(y), &x))
                / norm(&prob.grad(&x)).max(1e-8);
            w = w.max(err);
        }
        worst.insert(name, w);
    }
    let pass = worst.values().all(|&e| e <= 1e-5);
    let shown: Vec<String> = worst.iter().map(|(k, v)| format!("{k} {v:.2e}")).collect();
    outcome(
        pass,
        format!("worst relative error (limit 1e-5): {}", shown.join(", ")),
    )
}

fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = 1e-6 * (1.0 + x[i].abs());
            y[i] = x[i] + h;
            let up = f(&y);
            y[i] = x[i] - h;
            let down = f(&y);
            y[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn schedule_validation() -> Outcome {
    let net = build_network(&[(0, 1, 1.0)], 2).unwrap();
    let bound = sqrt_horizon_bounds(&net, 2.0).unwrap().kappa2_max;
    let rejects = sqrt_horizon_schedule(&net, 1000, 2.0, 0.03).is_err();
    let accepts = sqrt_horizon_schedule(&net, 1000, 2.0, 0.02).is_ok();
    let exact = (bound - 1.0 / 39.0).abs() <= 1e-15;
    outcome(
        rejects && accepts && exact,
        format!(
            "bound {bound:.6} (1/39 = {:.6}); rejects 0.03 {rejects}, accepts 0.02 {accepts}",
            1.0 / 39.0
        ),
    )
}

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| {
            (
                e.file_name().into_string().unwrap(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn reproducible_runs() -> Outcome {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/baselines.toml");
    let tmp = tempfile::tempdir().unwrap();
    let mut dirs = Vec::new();
    for name in ["first", "second"] {
        let out = tmp.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_dsgpa"))
            .arg("run")
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        if !status.status.success() {
            return outcome(false, format!("run exited with {}", status.status));
        }
        dirs.push(dir_contents(&out));
    }
    let traces = dirs[0].keys().filter(|k| k.contains("__seed")).count();
    outcome(
        traces > 0 && dirs[0] == dirs[1],
        format!("{traces} trace files, identical {}", dirs[0] == dirs[1]),
    )
}
