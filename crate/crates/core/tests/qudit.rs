use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use qwnet_core::qudit::{omega_pow, ghz_frame};
use qwnet_core::{
    basis_state, canonical_bell, canonical_ghz, fidelity, fourier_op, measure_all_branches, pauli_ops, shift_op,
    tensor, walk_step, BasisTag, OperatorMatrix, QuditState,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn basis_state_indexing() {
    let s = basis_state(3, &[2, 1]).unwrap();
    assert_eq!(s.amplitudes()[7], c(1.0, 0.0));
    assert_eq!(s.amplitudes().iter().filter(|a| a.norm() > 0.0).count(), 1);
    assert_eq!(basis_state(2, &[0, 0]).unwrap().amplitudes()[0], c(1.0, 0.0));
    assert!(basis_state(2, &[0, 2]).is_err());
    assert!(basis_state(2, &[0; 23]).is_err());
}

#[test]
fn bell_labels() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let b11 = canonical_bell(2, 1, 1).unwrap();
    assert_abs_diff_eq!(b11.amplitude(&[0, 1]).re, h, epsilon = 1e-12);
    assert_abs_diff_eq!(b11.amplitude(&[1, 0]).re, -h, epsilon = 1e-12);
    assert_abs_diff_eq!(b11.inner(&canonical_bell(2, 0, 0).unwrap()).unwrap().norm(), 0.0, epsilon = 1e-12);

    let b = canonical_bell(3, 1, 0).unwrap();
    let s = 1.0 / 3f64.sqrt();
    for i in 0..3 {
        let w = Complex64::from_polar(s, std::f64::consts::TAU * i as f64 / 3.0);
        assert_abs_diff_eq!((b.amplitude(&[i, i]) - w).norm(), 0.0, epsilon = 1e-12);
    }
    assert!(canonical_bell(3, 3, 0).is_err());
}

#[test]
fn ghz_definitions() {
    assert_eq!(canonical_ghz(2, 2).unwrap(), canonical_bell(2, 0, 0).unwrap());
    let g = canonical_ghz(3, 3).unwrap();
    for i in 0..3 {
        assert_abs_diff_eq!(g.amplitude(&[i, i, i]).re, 1.0 / 3f64.sqrt(), epsilon = 1e-12);
    }
    assert_abs_diff_eq!(g.norm_sqr(), 1.0, epsilon = 1e-12);
}

#[test]
fn fourier_and_shift() {
    let f2 = fourier_op(2).unwrap();
    let h = OperatorMatrix::hadamard();
    for (a, b) in f2.entries().iter().zip(h.entries()) {
        assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
    }
    assert!(fourier_op(3).unwrap().unitarity_deviation() < 1e-12);
    for d in 2..=6 {
        let u = basis_state(d, &[0]).unwrap().apply(&fourier_op(d).unwrap(), &[0]).unwrap();
        for a in u.amplitudes() {
            assert_abs_diff_eq!((a - c(1.0 / (d as f64).sqrt(), 0.0)).norm(), 0.0, epsilon = 1e-12);
        }
    }
    let cnot = [1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.];
    let s2 = shift_op(2).unwrap();
    assert!(s2.entries().iter().zip(cnot).all(|(a, b)| *a == c(b, 0.0)));
    let out = basis_state(3, &[1, 0]).unwrap().apply(&shift_op(3).unwrap(), &[0, 1]).unwrap();
    assert_eq!(out, basis_state(3, &[1, 2]).unwrap());
    let s5 = shift_op(5).unwrap();
    for row in 0..25 {
        let ones = (0..25).filter(|&col| s5.entry(row, col) == c(1.0, 0.0)).count();
        let zeros = (0..25).filter(|&col| s5.entry(row, col) == c(0.0, 0.0)).count();
        assert_eq!((ones, zeros), (1, 24));
    }
}

#[test]
fn pauli_family() {
    let p = pauli_ops(2).unwrap();
    assert_eq!(p.x.entries(), &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
    for (a, b) in p.z.entries().iter().zip([1., 0., 0., -1.]) {
        assert_abs_diff_eq!((a - c(b, 0.0)).norm(), 0.0, epsilon = 1e-12);
    }
    for d in [2, 3, 5] {
        let p = pauli_ops(d).unwrap();
        assert_eq!(p.u(0, 0).unwrap(), OperatorMatrix::identity(d, 1).unwrap());
        let target = canonical_bell(d, 0, 0).unwrap();
        for m in 0..d {
            for n in 0..d {
                let fixed = canonical_bell(d, m, n).unwrap().apply(&p.u(m, n).unwrap(), &[0]).unwrap();
                assert!(fidelity(&fixed, &target).unwrap() >= 1.0 - 1e-10, "d={d} m={m} n={n}");
            }
        }
    }
}

#[test]
fn apply_examples() {
    let s = basis_state(2, &[0, 0]).unwrap();
    assert_eq!(s.apply(&OperatorMatrix::identity(2, 2).unwrap(), &[1, 0]).unwrap(), s);
    assert_eq!(s.apply(&OperatorMatrix::x(2).unwrap(), &[0]).unwrap(), basis_state(2, &[1, 0]).unwrap());
    assert!(s.apply(&shift_op(2).unwrap(), &[0]).is_err());
    assert!(s.apply(&shift_op(2).unwrap(), &[1, 1]).is_err());
    assert!(s.apply(&fourier_op(3).unwrap(), &[0]).is_err());
}

#[test]
fn tensor_examples() {
    let t = tensor(&basis_state(2, &[0]).unwrap(), &basis_state(2, &[1]).unwrap()).unwrap();
    assert_eq!(t, basis_state(2, &[0, 1]).unwrap());
    let b = canonical_bell(2, 0, 0).unwrap();
    let bb = tensor(&b, &b).unwrap();
    assert_eq!(bb.site_count(), 4);
    assert_abs_diff_eq!(bb.amplitude(&[0, 0, 1, 1]).re, 0.5, epsilon = 1e-12);
    assert!(tensor(&b, &canonical_bell(3, 0, 0).unwrap()).is_err());
}

#[test]
fn walk_step_examples() {
    // X coin on the second site of two Bell pairs.
    let b = canonical_bell(2, 0, 0).unwrap();
    let s = walk_step(&tensor(&b, &b).unwrap(), 1, 2, &OperatorMatrix::x(2).unwrap()).unwrap();
    for v in [[0, 1, 1, 0], [0, 1, 0, 1], [1, 0, 0, 0], [1, 0, 1, 1]] {
        assert_abs_diff_eq!(s.amplitude(&v).re, 0.5, epsilon = 1e-12);
    }
    let id = OperatorMatrix::identity(2, 1).unwrap();
    let p = basis_state(2, &[0, 1]).unwrap();
    assert_eq!(walk_step(&p, 0, 1, &id).unwrap(), p);
    assert!(walk_step(&p, 1, 1, &id).is_err());
}

#[test]
fn measurement_examples() {
    let b = canonical_bell(2, 0, 0).unwrap();
    let br = measure_all_branches(&b, &[(1, BasisTag::Computational)]).unwrap();
    assert_eq!(br.len(), 2);
    for (v, x) in br.iter().enumerate() {
        assert_abs_diff_eq!(x.probability, 0.5, epsilon = 1e-12);
        assert_eq!(x.post_state.as_ref().unwrap(), &basis_state(2, &[v]).unwrap());
    }
    let p = basis_state(3, &[2, 1]).unwrap();
    let br = measure_all_branches(&p, &[(0, BasisTag::Computational)]).unwrap();
    assert_eq!(br.len(), 1);
    assert_abs_diff_eq!(br[0].probability, 1.0, epsilon = 1e-12);
    assert!(measure_all_branches(&p, &[]).is_err());
    // |+> gives Fourier result 0, |-> gives 1.
    let plus = basis_state(2, &[0]).unwrap().apply(&OperatorMatrix::hadamard(), &[0]).unwrap();
    let minus = basis_state(2, &[1]).unwrap().apply(&OperatorMatrix::hadamard(), &[0]).unwrap();
    assert_eq!(measure_all_branches(&plus, &[(0, BasisTag::Fourier)]).unwrap()[0].values(), vec![0]);
    assert_eq!(measure_all_branches(&minus, &[(0, BasisTag::Fourier)]).unwrap()[0].values(), vec![1]);
}

#[test]
fn fidelity_examples() {
    let b = canonical_bell(3, 1, 2).unwrap();
    assert_abs_diff_eq!(fidelity(&b, &b).unwrap(), 1.0, epsilon = 1e-12);
    let phased = QuditState::from_amplitudes(3, 2, b.amplitudes().iter().map(|a| a * omega_pow(7, 3)).collect()).unwrap();
    assert_abs_diff_eq!(fidelity(&b, &phased).unwrap(), 1.0, epsilon = 1e-12);
    let zero = basis_state(2, &[0, 0]).unwrap();
    assert_abs_diff_eq!(fidelity(&zero, &canonical_bell(2, 0, 0).unwrap()).unwrap(), 0.5, epsilon = 1e-12);
    assert!(fidelity(&zero, &b).is_err());
}

#[test]
fn json_round_trip() {
    let g = ghz_frame(3, &[0, 1, 2], 1).unwrap();
    let text = serde_json::to_string(&g).unwrap();
    let back: QuditState = serde_json::from_str(&text).unwrap();
    assert_abs_diff_eq!(fidelity(&g, &back).unwrap(), 1.0, epsilon = 1e-12);
    let bad = r#"{"local_dim":2,"site_count":1,"amplitudes":[[1.0,0.0],[1.0,0.0]]}"#;
    assert!(serde_json::from_str::<QuditState>(bad).is_err());
}

fn random_state(d: usize, n: usize, raw: &[(f64, f64)]) -> QuditState {
    let amps = (0..d.pow(n as u32)).map(|i| {
        let (re, im) = raw[i % raw.len()];
        c(re + 0.01 * i as f64, im)
    });
    QuditState::normalized(d, n, amps.collect()).unwrap()
}

fn arb_state() -> impl Strategy<Value = QuditState> {
    (2usize..=4, 1usize..=3, proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..32))
        .prop_map(|(d, n, raw)| random_state(d, n, &raw))
}

proptest! {
    #[test]
    fn norm_preserved_by_operator_sequences(s in arb_state(), ops in proptest::collection::vec((0usize..4, 0usize..3), 1..8)) {
        let d = s.local_dim();
        let n = s.site_count();
        let mut t = s;
        for (kind, site) in ops {
            let site = site % n;
            t = match kind {
                0 => t.apply(&fourier_op(d).unwrap(), &[site]).unwrap(),
                1 => t.apply(&pauli_ops(d).unwrap().z, &[site]).unwrap(),
                2 if n > 1 => t.apply(&shift_op(d).unwrap(), &[site, (site + 1) % n]).unwrap(),
                _ => t.apply(&pauli_ops(d).unwrap().x, &[site]).unwrap(),
            };
        }
        prop_assert!((t.norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn branches_are_complete(s in arb_state(), site in 0usize..3, fourier in any::<bool>()) {
        let site = site % s.site_count();
        let basis = if fourier { BasisTag::Fourier } else { BasisTag::Computational };
        let total: f64 = measure_all_branches(&s, &[(site, basis)]).unwrap().iter().map(|b| b.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fourier_round_trip(s in arb_state(), site in 0usize..3) {
        let site = site % s.site_count();
        let f = fourier_op(s.local_dim()).unwrap();
        let back = s.apply(&f, &[site]).unwrap().apply(&f.adjoint(), &[site]).unwrap();
        for (a, b) in s.amplitudes().iter().zip(back.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn permutation_round_trip(s in arb_state()) {
        let n = s.site_count();
        let order: Vec<usize> = (0..n).rev().collect();
        let back = s.permute_sites(&order).unwrap().permute_sites(&order).unwrap();
        prop_assert_eq!(back, s);
    }
}
