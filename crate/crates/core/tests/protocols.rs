use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use qwnet_core::qudit::ghz_frame;
use qwnet_core::walk::{correction_for, verify_table, ProtocolKind, ProtocolSpec};
use qwnet_core::{basis_state, canonical_bell, canonical_ghz, fidelity, run_protocol, QuditState};

fn assert_sound(spec: &ProtocolSpec) -> usize {
    let r = run_protocol(spec).unwrap_or_else(|e| panic!("{spec:?}: {e}"));
    assert_abs_diff_eq!(r.total_probability(), 1.0, epsilon = 1e-9);
    for b in &r.branches {
        assert!(b.residual_fidelity >= 1.0 - 1e-9, "{spec:?} {:?} residual {}", b.outcome, b.residual_fidelity);
        assert!(b.fidelity >= 1.0 - 1e-9, "{spec:?} {:?} corrected {}", b.outcome, b.fidelity);
    }
    r.output_parties()
}

fn state(d: usize, n: usize, terms: &[(f64, &[usize])]) -> QuditState {
    let mut amps = vec![Complex64::new(0.0, 0.0); d.pow(n as u32)];
    let probe = basis_state(d, &vec![0; n]).unwrap();
    for &(c, ket) in terms {
        amps[probe.index_of(ket)] += c;
    }
    QuditState::normalized(d, n, amps).unwrap()
}

fn branch<'a>(r: &'a qwnet_core::ProtocolResult, outcome: &[usize]) -> &'a qwnet_core::walk::BranchRecord {
    r.branches.iter().find(|b| b.outcome == outcome).unwrap()
}

#[test]
fn qubit_protocols_recover_ghz() {
    assert_sound(&ProtocolSpec::bell_swap_2d());
    assert_sound(&ProtocolSpec::ghz_swap_2d());
    assert_sound(&ProtocolSpec::triangle_2d());
    for m in 2..=5 {
        for n in 2..=5 {
            for k in 1..m {
                assert_sound(&ProtocolSpec::method1(m, n, k));
                assert_sound(&ProtocolSpec::method1(m, n, k).with_retain(true));
            }
            for k in 1..m.min(n) {
                assert_sound(&ProtocolSpec::method2(m, n, k));
                assert_sound(&ProtocolSpec::method2(m, n, k).with_retain(true));
            }
        }
    }
}

#[test]
fn qudit_protocols_recover_ghz() {
    for d in [2, 3] {
        assert_sound(&ProtocolSpec::ghz_swap_d(d));
        assert_sound(&ProtocolSpec::triangle_d(d));
        for m in 2..=4 {
            for n in 2..=4 {
                assert_sound(&ProtocolSpec::ghz_multi_coin_d(d, m, n));
                for k in 1..m.min(n) {
                    assert_sound(&ProtocolSpec::ghz_parallel_d(d, m, n, k));
                    assert_sound(&ProtocolSpec::ghz_parallel_d(d, m, n, k).with_retain(true));
                }
            }
        }
        for bells in 1..=3 {
            assert_eq!(assert_sound(&ProtocolSpec::ghz_from_bells_d(d, bells)), bells + 1);
        }
    }
    assert_sound(&ProtocolSpec::ghz_swap_d(5));
}

#[test]
fn bell_swap_d_label_arithmetic() {
    for d in [2usize, 3, 5] {
        for code in 0..d.pow(4) {
            let l = [code / d.pow(3), code / d.pow(2) % d, code / d % d, code % d];
            let r = run_protocol(&ProtocolSpec::bell_swap_d(d, l)).unwrap();
            assert_eq!(r.branches.len(), d * d);
            for b in &r.branches {
                let (k0, u0) = (b.outcome[0], b.outcome[1]);
                let expect = canonical_bell(d, (l[0] + l[2] + d - k0) % d, (l[1] + l[3] + 2 * d - u0) % d).unwrap();
                assert!(fidelity(&b.state, &expect).unwrap() > 1.0 - 1e-9, "d={d} {l:?} {:?}", b.outcome);
                assert!(b.fidelity > 1.0 - 1e-9);
            }
        }
    }
}

#[test]
fn bell_swap_d_qutrit_example() {
    let r = run_protocol(&ProtocolSpec::bell_swap_d(3, [1, 2, 2, 1])).unwrap();
    let b = branch(&r, &[0, 0]);
    assert!(fidelity(&b.state, &canonical_bell(3, 0, 0).unwrap()).unwrap() > 1.0 - 1e-9);
}

#[test]
fn table_one_and_two_examples() {
    let r = run_protocol(&ProtocolSpec::bell_swap_2d()).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let b = branch(&r, &[0, 1]);
    assert!(fidelity(&b.state, &state(2, 2, &[(h, &[0, 0]), (h, &[1, 1])])).unwrap() > 1.0 - 1e-9);
    assert_eq!(b.correction_text, "I");
    assert_eq!(branch(&r, &[0, 0]).correction_text, "X_1");
    for b in &r.branches {
        assert_abs_diff_eq!(b.probability, 0.25, epsilon = 1e-12);
    }

    let r = run_protocol(&ProtocolSpec::ghz_swap_2d()).unwrap();
    assert_eq!(r.branches.len(), 8);
    for b in &r.branches {
        assert_abs_diff_eq!(b.probability, 0.125, epsilon = 1e-12);
    }
    let b = branch(&r, &[1, 1, 1]);
    let expect = state(2, 3, &[(-h, &[0, 1, 1]), (-h, &[1, 0, 0])]);
    assert_abs_diff_eq!(b.state.inner(&expect).unwrap().re, 1.0, epsilon = 1e-9);
    assert_eq!(b.correction_text, "-X_1");
    assert_eq!(branch(&r, &[0, 0, 1]).correction_text, "I");
}

#[test]
fn ghz_swap_d_example_correction() {
    let spec = ProtocolSpec::ghz_swap_d(3);
    let r = run_protocol(&spec).unwrap();
    assert_eq!(r.branches.len(), 9);
    let b = r.branches.iter().find(|b| b.outcome[0] == 1 && b.outcome[2] == 2).unwrap();
    let c = correction_for(&spec, &[1, 2]).unwrap();
    let fixed = c.apply(&b.state).unwrap();
    assert!(fidelity(&fixed, &canonical_ghz(3, 3).unwrap()).unwrap() > 1.0 - 1e-9);
}

#[test]
fn party_count_identities() {
    let mut checked = 0;
    for m in 2..=5 {
        for n in 2..=5 {
            for k in 1..=5 {
                if let Ok(r) = run_protocol(&ProtocolSpec::method1(m, n, k)) {
                    assert_eq!(r.output_parties(), m + n - (k + 1));
                    checked += 1;
                }
                if let Ok(r) = run_protocol(&ProtocolSpec::method2(m, n, k)) {
                    assert_eq!(r.output_parties(), m + n - 2 * k);
                    checked += 1;
                }
                for l in 2..k {
                    if let Ok(r) = run_protocol(&ProtocolSpec::combined(m, n, k, l)) {
                        assert_eq!(r.output_parties(), m + n - (k + l));
                        assert!(r.all_recovered());
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked > 60, "{checked}");
    assert!(ProtocolSpec::method1(3, 3, 3).validate().is_err());
    assert!(ProtocolSpec::method2(3, 2, 2).validate().is_err());
    assert!(ProtocolSpec::combined(3, 3, 2, 2).validate().is_err());
}

#[test]
fn method_examples() {
    assert_eq!(run_protocol(&ProtocolSpec::method1(3, 3, 2)).unwrap().output_parties(), 3);
    assert_eq!(run_protocol(&ProtocolSpec::method2(3, 3, 2)).unwrap().output_parties(), 2);
}

#[test]
fn triangle_constraint_holds() {
    for d in [2, 3] {
        let r = run_protocol(&ProtocolSpec::triangle_d(d)).unwrap();
        for b in &r.branches {
            // Outcome order (p1, u1, p2, p3, u2, u3).
            assert_eq!((b.outcome[1] + b.outcome[4]) % d, b.outcome[5]);
            assert!(b.fidelity > 1.0 - 1e-9);
        }
    }
}

#[test]
fn ghz_from_one_bell_matches_bell_swap() {
    let a = run_protocol(&ProtocolSpec::ghz_from_bells_d(2, 1)).unwrap();
    let b = run_protocol(&ProtocolSpec::bell_swap_2d()).unwrap();
    for x in &a.branches {
        assert!(b.branches.iter().any(|y| fidelity(&x.state, &y.state).unwrap() > 1.0 - 1e-9));
    }
}

/// Residual-state families of `a` are contained in those of `b` (equal when
/// branch counts agree).
fn family_contained(a: &ProtocolSpec, b: &ProtocolSpec) {
    let ra = run_protocol(a).unwrap();
    let rb = run_protocol(b).unwrap();
    let within = |x: &qwnet_core::walk::BranchRecord, ys: &[qwnet_core::walk::BranchRecord]| {
        ys.iter().any(|y| y.state.site_count() == x.state.site_count()
            && fidelity(&x.state, &y.state).unwrap() > 1.0 - 1e-9)
    };
    for x in &ra.branches {
        assert!(within(x, &rb.branches), "{:?} {:?}", a.kind, x.outcome);
    }
    if ra.branches.len() == rb.branches.len() {
        for y in &rb.branches {
            assert!(within(y, &ra.branches), "{:?} {:?}", b.kind, y.outcome);
        }
    }
}

#[test]
fn qudit_protocols_reduce_to_qubit_counterparts() {
    family_contained(&ProtocolSpec::bell_swap_d(2, [0; 4]), &ProtocolSpec::bell_swap_2d());
    family_contained(&ProtocolSpec::ghz_swap_d(2), &ProtocolSpec::ghz_swap_2d());
    family_contained(&ProtocolSpec::triangle_d(2), &ProtocolSpec::triangle_2d());
    for (m, n, k) in [(2, 2, 1), (3, 3, 1), (3, 3, 2), (4, 3, 2)] {
        family_contained(&ProtocolSpec::ghz_parallel_d(2, m, n, k), &ProtocolSpec::method2(m, n, k));
    }
    for (m, n) in [(3, 3), (4, 2)] {
        family_contained(&ProtocolSpec::ghz_multi_coin_d(2, m, n), &ProtocolSpec::method1(m, n, m - 1));
    }
}

#[test]
fn residual_frames_are_ghz_frames() {
    let r = run_protocol(&ProtocolSpec::ghz_parallel_d(3, 3, 3, 1)).unwrap();
    for b in &r.branches {
        let n = b.state.site_count();
        let any = (0..3usize.pow(n as u32)).any(|code| {
            let offsets: Vec<usize> = (0..n).map(|i| code / 3usize.pow(i as u32) % 3).collect();
            (0..3).any(|s| fidelity(&b.state, &ghz_frame(3, &offsets, s).unwrap()).unwrap() > 1.0 - 1e-9)
        });
        assert!(any);
    }
}

#[test]
fn tables_verify_except_four() {
    for t in [1, 2, 3, 5, 6] {
        let r = verify_table(t).unwrap();
        assert!(r.all_verified(), "{}: {:?}", r.summary(), r.mismatches());
    }
    assert_eq!(verify_table(1).unwrap().summary(), "Table 1: 4/4 rows verified");
    assert_eq!(verify_table(2).unwrap().summary(), "Table 2: 8/8 rows verified");
}

#[test]
fn table_four_states_match_but_corrections_do_not() {
    let r = verify_table(4).unwrap();
    assert!(!r.all_verified());
    for row in &r.rows {
        assert_eq!(row.state_matches, row.instances, "{}", row.outcome);
        assert_eq!(row.correction_recovers, 0, "{}", row.outcome);
    }
}

#[test]
fn table_six_example_row() {
    let r = verify_table(6).unwrap();
    let row = r.rows.iter().find(|row| row.outcome.contains("101")).unwrap();
    assert!(row.instances > 0 && row.state_matches == row.instances && row.correction_recovers == row.instances);
}

#[test]
fn result_json_shape() {
    let r = run_protocol(&ProtocolSpec::bell_swap_2d()).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    assert_eq!(v["protocol"], "BellSwap2D");
    assert_eq!(v["branches"].as_array().unwrap().len(), 4);
    for key in ["outcome", "probability", "correction", "fidelity"] {
        assert!(v["branches"][0].get(key).is_some(), "{key}");
    }
    assert_eq!(ProtocolKind::ALL.len(), 12);
}
