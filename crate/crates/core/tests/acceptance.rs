//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use qwnet_core::fractal::{analytics, build_quantum_network, clustering_formula, merge_schedule};
use qwnet_core::mqss::{channel_check, run_mqss, Eavesdropper, MqssConfig};
use qwnet_core::network::{execute_schedule, load_network, plan_distribution, steiner_tree, ExecutionMode, Node, Resource, ResourceNetwork};
use qwnet_core::readout::{
    apply_factorwise, correct_counts, load_device, protocol_fidelity_under_noise, synthesize_counts, MatrixMode,
    TransferMatrix,
};
use qwnet_core::walk::{run_protocol, verify_table, ProtocolSpec};
use qwnet_core::{canonical_bell, fidelity};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn c1_tables() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for t in 1..=6 {
        let r = verify_table(t).expect("table id in range");
        ok &= r.all_verified();
        parts.push(r.summary());
        if !r.all_verified() {
            parts.push(format!("mismatches: {}", r.mismatches().join("; ")));
        }
    }
    check(ok, parts.join(" | "))
}

fn sound(spec: &ProtocolSpec) -> bool {
    run_protocol(spec).map(|r| r.branches.iter().all(|b| b.fidelity >= 1.0 - TOL)).unwrap_or(false)
}

fn c2_qudit_corrections() -> Outcome {
    let mut bell_checked = 0;
    let mut ok = true;
    for d in [2usize, 3, 5] {
        for code in 0..d.pow(4) {
            let l = [code / d.pow(3), code / d.pow(2) % d, code / d % d, code % d];
            let r = run_protocol(&ProtocolSpec::bell_swap_d(d, l)).expect("valid labels");
            ok &= r.branches.len() == d * d;
            for b in &r.branches {
                let (k0, u0) = (b.outcome[0], b.outcome[1]);
                let target = canonical_bell(d, (l[0] + l[2] + d - k0) % d, (l[1] + l[3] + 2 * d - u0) % d).unwrap();
                ok &= fidelity(&b.state, &target).unwrap() >= 1.0 - TOL && b.fidelity >= 1.0 - TOL;
                bell_checked += 1;
            }
        }
    }
    let mut specs = Vec::new();
    for d in [2, 3] {
        specs.push(ProtocolSpec::ghz_swap_d(d));
        specs.push(ProtocolSpec::triangle_d(d));
        for m in 2..=4 {
            for n in 2..=4 {
                specs.push(ProtocolSpec::ghz_multi_coin_d(d, m, n));
                for k in 1..m.min(n) {
                    specs.push(ProtocolSpec::ghz_parallel_d(d, m, n, k));
                }
            }
        }
        for bells in 1..=3 {
            specs.push(ProtocolSpec::ghz_from_bells_d(d, bells));
        }
    }
    let bad: Vec<String> = specs.iter().filter(|s| !sound(s)).map(|s| format!("{:?}", s.kind)).collect();
    ok &= bad.is_empty();
    check(ok, format!("{bell_checked} Bell-swap branches, {} GHZ protocol instances, failures {bad:?}", specs.len()))
}

fn c3_party_counts() -> Outcome {
    let mut ok = true;
    let mut n_checked = 0;
    for m in 2..=5 {
        for n in 2..=5 {
            for k in 1..=5 {
                if let Ok(r) = run_protocol(&ProtocolSpec::method1(m, n, k)) {
                    ok &= r.output_parties() == m + n - (k + 1);
                    n_checked += 1;
                }
                if let Ok(r) = run_protocol(&ProtocolSpec::method2(m, n, k)) {
                    ok &= r.output_parties() == m + n - 2 * k;
                    n_checked += 1;
                }
                for l in 2..k {
                    if let Ok(r) = run_protocol(&ProtocolSpec::combined(m, n, k, l)) {
                        ok &= r.output_parties() == m + n - (k + l);
                        n_checked += 1;
                    }
                }
            }
        }
    }
    check(ok, format!("{n_checked} parameter sets"))
}

fn c4_triangle_constraint() -> Outcome {
    let mut ok = true;
    let mut branches = 0;
    for d in [2, 3] {
        let r = run_protocol(&ProtocolSpec::triangle_d(d)).unwrap();
        for b in &r.branches {
            ok &= (b.outcome[1] + b.outcome[4]) % d == b.outcome[5];
            branches += 1;
        }
    }
    check(ok, format!("{branches} branches"))
}

fn c5_fractal() -> Outcome {
    let mut ok = true;
    for t in 0..=6u32 {
        let net = build_quantum_network(t as usize).unwrap();
        ok &= net.node_count() == (3usize.pow(t + 1) + 3) / 2;
        ok &= net.edge_count() == (3usize.pow(t + 2) - 3) / 2;
        let deg = net.degrees();
        ok &= net.generation.iter().zip(&deg).all(|(&g, &k)| g == 0 || k == 4 * (t as usize - g + 1));
    }
    let k8 = analytics(8).unwrap().average_degree;
    ok &= (k8 - 6.0).abs() < 0.1;
    let c30 = clustering_formula(30);
    ok &= (c30 - 0.5480).abs() < 1e-3;
    for n in 1..=10usize {
        ok &= merge_schedule(n).unwrap().len() == (3usize.pow(n as u32) - 1) / 2;
    }
    let brute: Vec<String> = (1..=6)
        .map(|t| {
            let r = analytics(t).unwrap();
            format!("t={t} C={:.5}/{:.5}", r.clustering, r.brute_force.unwrap().clustering)
        })
        .collect();
    check(ok, format!("k(8)={k8:.4}, C(30)={c30:.6}, formula/graph {}", brute.join(" ")))
}

fn c6_network() -> Outcome {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/steiner14.json");
    let terminals = [1, 2, 5, 12, 13, 14];
    let net = load_network(path).unwrap();
    let tree = steiner_tree(&net, &terminals, false).unwrap();
    let exact = steiner_tree(&net, &terminals, true).unwrap();
    let mut ok = tree.edges.len() == exact.edges.len();
    let sched = plan_distribution(&tree, &net).unwrap();
    for d in [2, 3] {
        let r = execute_schedule(&sched, ExecutionMode::Simulated, d, 1).unwrap();
        ok &= r.fidelity.unwrap_or(0.0) >= 1.0 - TOL;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 1.0f64;
    for case in 0..200u64 {
        let n: u32 = rng.random_range(2..=10);
        let d = 2 + (case % 2) as usize;
        let nodes = (1..=n).map(|id| Node { id, label: String::new() }).collect();
        let res = (2..=n).map(|v| Resource::bell(rng.random_range(1..v), v)).collect();
        let g = ResourceNetwork::new(d, nodes, res).unwrap();
        let mut pool: Vec<u32> = (1..=n).collect();
        let k = rng.random_range(1..=4.min(n as usize));
        let terms: Vec<u32> = (0..k).map(|_| pool.swap_remove(rng.random_range(0..pool.len()))).collect();
        let f = steiner_tree(&g, &terms, false)
            .and_then(|t| plan_distribution(&t, &g))
            .and_then(|s| execute_schedule(&s, ExecutionMode::Simulated, d, case))
            .map(|r| r.fidelity.unwrap_or(0.0))
            .unwrap_or(0.0);
        worst = worst.min(f);
    }
    ok &= worst >= 1.0 - TOL;
    check(ok, format!("fixture edges {} (exact {}), random-tree min fidelity {worst:.12}", tree.edges.len(), exact.edges.len()))
}

/// Per-pair intercept-resend error probability by enumeration over Eve's
/// basis and outcome and Alice's basis.
fn intercept_oracle(d: usize) -> f64 {
    use num_complex::Complex64;
    let w = std::f64::consts::TAU / d as f64;
    let f = DMatrix::from_fn(d, d, |k, l| Complex64::from_polar(1.0 / (d as f64).sqrt(), w * (k * l) as f64));
    let e = |basis: usize, v: usize| {
        let mut x = DVector::<Complex64>::zeros(d);
        x[v] = Complex64::new(1.0, 0.0);
        if basis == 1 { &f * x } else { x }
    };
    let mut err = 0.0;
    for eve in 0..2 {
        for v in 0..d {
            let ev = e(eve, v);
            let alice = DVector::from_fn(d, |i, _| ev[i].conj() / (d as f64).sqrt());
            let pv = alice.norm_squared();
            let a = &f * alice.unscale(pv.sqrt());
            let b = f.adjoint() * ev;
            for basis in 0..2 {
                for x in 0..d {
                    for y in 0..d {
                        let agree = if basis == 0 { x == y } else { (x + y) % d == 0 };
                        if !agree {
                            err += 0.25 * pv * e(basis, x).dotc(&a).norm_sqr() * e(basis, y).dotc(&b).norm_sqr();
                        }
                    }
                }
            }
        }
    }
    err
}

fn c7_mqss() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut recovered = 0;
    let mut clean = true;
    for seed in 0..1000u64 {
        let d = 2 + (seed % 6) as usize;
        let m = 2 + ((seed / 6) % 2) as usize;
        let mut cfg = MqssConfig::new(d, m, rng.random_range(-1000..1000));
        cfg.detecting_pairs = 20;
        cfg.seed = seed;
        let t = run_mqss(&cfg).unwrap();
        clean &= t.channels.iter().all(|c| c.check.errors == 0 && c.check.error_rate == 0.0);
        recovered += t.recovered() as usize;
    }
    let mut aborted = 0;
    let mut errors = 0;
    let mut pairs = 0;
    for seed in 0..200u64 {
        let mut cfg = MqssConfig::new(2, 2, 1);
        cfg.detecting_pairs = 500;
        cfg.threshold = 0.05;
        cfg.eavesdropper = Eavesdropper::InterceptResend { channel: 1 };
        cfg.seed = 10_000 + seed;
        let t = run_mqss(&cfg).unwrap();
        aborted += t.aborted as usize;
        errors += t.channels[0].check.errors;
        pairs += t.channels[0].check.pairs;
    }
    let p = intercept_oracle(2);
    let rate = errors as f64 / pairs as f64;
    let sigma = (p * (1.0 - p) / pairs as f64).sqrt();
    let p3 = intercept_oracle(3);
    let c3 = channel_check(3, 10_000, true, 0.05, 3).unwrap();
    let s3 = (p3 * (1.0 - p3) / 10_000.0).sqrt();
    let ok = recovered == 1000
        && clean
        && aborted as f64 / 200.0 > 0.99
        && (rate - p).abs() < 3.0 * sigma
        && (c3.error_rate - p3).abs() < 3.0 * s3;
    check(
        ok,
        format!(
            "recovered {recovered}/1000, clean channels {clean}, aborts {aborted}/200, \
             error rate d=2 {rate:.4} vs {p:.4} (3 sigma {:.4}), d=3 {:.4} vs {p3:.4}",
            3.0 * sigma,
            c3.error_rate
        ),
    )
}

fn device() -> Vec<TransferMatrix> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/device_params.csv");
    load_device(path).unwrap().iter().map(|r| r.matrix(MatrixMode::Symmetric).unwrap()).collect()
}

fn c8_readout() -> Outcome {
    let ms = device();
    let truth = [0.20, 0.04, 0.06, 0.10, 0.03, 0.07, 0.05, 0.05, 0.08, 0.02, 0.06, 0.04, 0.05, 0.05, 0.06, 0.04];
    let counts = synthesize_counts(&truth, &ms[..4], 1_000_000, 8).unwrap();
    let corrected = correct_counts(&counts, &ms[..4]).unwrap();
    let l1: f64 = corrected.probabilities.iter().zip(&truth).map(|(a, b)| (a - b).abs()).sum();
    let mut worst = 0.0f64;
    for n in 1..=3 {
        let mut full = DMatrix::from_element(1, 1, 1.0);
        for m in &ms[..n] {
            let e = &m.entries;
            full = full.kronecker(&DMatrix::from_row_slice(2, 2, &[e[0][0], e[0][1], e[1][0], e[1][1]]));
        }
        let inv = full.try_inverse().unwrap();
        let v: Vec<f64> = (0..1 << n).map(|i| 0.1 + i as f64 / 7.0).collect();
        let explicit = &inv * DVector::from_vec(v.clone());
        let fw = apply_factorwise(&v, &ms[..n].iter().map(|m| m.inverse()).collect::<Vec<_>>()).unwrap();
        for (a, b) in fw.iter().zip(explicit.iter()) {
            worst = worst.max((a - b).abs());
        }
    }
    check(l1 < 0.01 && worst < 1e-10, format!("round-trip L1 {l1:.5}, factor-wise vs Kronecker {worst:.2e}"))
}

fn c9_noise_substitute() -> Outcome {
    let variants = [
        ("bell2d", ProtocolSpec::bell_swap_2d()),
        ("ghz2d", ProtocolSpec::ghz_swap_2d()),
        ("ghz-d(2)", ProtocolSpec::ghz_swap_d(2)),
        ("ghz-from-bells(2,2)", ProtocolSpec::ghz_from_bells_d(2, 2)),
        ("triangle2d", ProtocolSpec::triangle_2d()),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, spec) in variants {
        let r = run_protocol(&spec).unwrap();
        let ideal = vec![TransferMatrix::identity(); r.output_parties()];
        let fs: Vec<f64> = [0.0, 0.02, 0.05, 0.1]
            .iter()
            .map(|&p| protocol_fidelity_under_noise(&r, &ideal, p, 1_000_000, 9).unwrap().fidelity)
            .collect();
        ok &= (fs[0] - 1.0).abs() < 0.01 && fs.windows(2).all(|w| w[1] <= w[0]);
        parts.push(format!("{name} {:.4}>{:.4}>{:.4}>{:.4}", fs[0], fs[1], fs[2], fs[3]));
    }
    check(ok, parts.join(", "))
}

/// Name, runtime budget in seconds, check.
type Criterion = (&'static str, u64, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 table verification", 5, c1_tables),
        ("2 qudit correction soundness", 60, c2_qudit_corrections),
        ("3 party-count identities", 30, c3_party_counts),
        ("4 triangle outcome constraint", 30, c4_triangle_constraint),
        ("5 fractal analytics", 30, c5_fractal),
        ("6 network distribution", 120, c6_network),
        ("7 secret sharing", 120, c7_mqss),
        ("8 readout correction", 30, c8_readout),
        ("9 noise substitute property", 120, c9_noise_substitute),
    ];
    let mut failed = 0;
    for (name, budget, f) in criteria {
        let start = Instant::now();
        let out = f();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed < Duration::from_secs(budget);
        failed += !pass as usize;
        println!(
            "[{}] criterion {name} ({:.2} s of {budget} s): {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            out.detail
        );
    }
    println!("acceptance: {}/9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
