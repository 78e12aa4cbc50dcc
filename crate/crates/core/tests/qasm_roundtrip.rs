mod common;

use epsense_core::circuit::{evolve, post_select, StateVector};
use epsense_core::dilation::dilate;
use epsense_core::linalg::CMatrix;
use epsense_core::qasm::{
    gate_names, resimulate_dilated, simulate_qasm, swap_test_qasm, swap_test_qasm_with, to_qasm,
    GATE_SET, HEADER,
};
use epsense_core::Error;
use rand::Rng;
use std::path::PathBuf;

/// Set to regenerate the golden files instead of comparing against them.
const BLESS_VAR: &str = "EPSENSE_BLESS";

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn check_golden(name: &str, text: &str) {
    let path = golden(name);
    if std::env::var_os(BLESS_VAR).is_some() {
        std::fs::write(&path, text).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e}; rerun with {BLESS_VAR}=1", path.display()));
    assert_eq!(text, want, "emitted text drifted from {}", path.display());
}

fn nh1_ep() -> CMatrix {
    CMatrix::real2(0.0, 1.0, 0.0, 0.0)
}

#[test]
fn round_trip_corpus() {
    let mut rng = common::rng(500);
    let mut worst: f64 = 0.0;
    for case in 0..500 {
        let h = common::matrix(&mut rng);
        let t = 2.0 * (1.0 - rng.random::<f64>());
        let xi = common::state(&mut rng);
        let c = dilate(&h, t).unwrap();
        let direct = post_select(&evolve(&c, &xi).unwrap()).unwrap();
        let prog = to_qasm(&c).unwrap();
        let back = resimulate_dilated(&prog, &xi).unwrap();
        let loss = common::infidelity(direct.system.amplitudes(), back.amplitudes());
        worst = worst.max(loss);
        assert!(loss <= 1e-8, "case {case}: overlap loss {loss}");
    }
    eprintln!("worst overlap loss {worst:e}");
}

#[test]
fn nh1_ep_program_matches_golden() {
    let c = dilate(&nh1_ep(), 1.0).unwrap();
    let prog = to_qasm(&c).unwrap();
    check_golden("nh1_ep_t1.qasm", &prog.text);
    let xi = StateVector::basis(2, 0);
    let direct = post_select(&evolve(&c, &xi).unwrap()).unwrap();
    let back = resimulate_dilated(&prog, &xi).unwrap();
    assert!(common::infidelity(direct.system.amplitudes(), back.amplitudes()) <= 1e-8);
    let sim = simulate_qasm(&prog.text).unwrap();
    assert!((sim.prob_zero(1) - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-12);
}

#[test]
fn swap_program_matches_golden() {
    check_golden("swap_test.qasm", &swap_test_qasm(2).unwrap().text);
}

#[test]
fn emission_is_deterministic() {
    let mut rng = common::rng(501);
    for _ in 0..20 {
        let h = common::matrix(&mut rng);
        let a = to_qasm(&dilate(&h, 0.7).unwrap()).unwrap();
        let b = to_qasm(&dilate(&h, 0.7).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn header_and_gate_set() {
    let mut rng = common::rng(502);
    let mut programs = vec![swap_test_qasm(2).unwrap()];
    for _ in 0..20 {
        programs.push(to_qasm(&dilate(&common::matrix(&mut rng), 1.3).unwrap()).unwrap());
    }
    for p in &programs {
        let mut lines = p.text.lines();
        assert_eq!(lines.next(), Some("OPENQASM 2.0;"));
        assert_eq!(lines.next(), Some("include \"qelib1.inc\";"));
        assert!(p.text.starts_with(HEADER));
        assert!(p.text.contains("// global_phase: "));
        assert!(!p.text.contains('\r'));
        for g in gate_names(&p.text) {
            assert!(GATE_SET.contains(&g.as_str()), "gate {g}");
        }
    }
    let dilated = &programs[1];
    assert_eq!((dilated.qubit_count, dilated.creg_count, dilated.postselect_bit), (2, 1, Some(0)));
    assert!(dilated.text.contains("measure q[1] -> c[0];"));
}

#[test]
fn unitary_generator_emits_zero_rotation() {
    let c = dilate(&CMatrix::real2(0.3, 0.2, 0.2, -0.1), 1.0).unwrap();
    assert!((c.m - 1.0).abs() < 1e-12);
    let text = to_qasm(&c).unwrap().text;
    let line = text.lines().find(|l| l.starts_with("cry(")).unwrap();
    let angle: f64 = line[4..line.find(')').unwrap()].parse().unwrap();
    assert!(angle.abs() < 1e-5, "{line}");
}

fn swap_p0(a: &StateVector, b: &StateVector) -> f64 {
    let prog = swap_test_qasm_with(Some(a), Some(b)).unwrap();
    simulate_qasm(&prog.text).unwrap().prob_zero(0)
}

#[test]
fn swap_program_reproduces_fidelity() {
    let zero = StateVector::basis(2, 0);
    let one = StateVector::basis(2, 1);
    let plus = StateVector::from_real(&[1.0, 1.0]).unwrap();
    assert!((swap_p0(&plus, &plus) - 1.0).abs() <= 1e-12);
    assert!((swap_p0(&zero, &one) - 0.5).abs() <= 1e-12);
    assert!((swap_p0(&zero, &plus) - 0.75).abs() <= 1e-8);
    let mut rng = common::rng(503);
    for _ in 0..100 {
        let (a, b) = (common::state(&mut rng), common::state(&mut rng));
        assert!((swap_p0(&a, &b) - (1.0 + a.fidelity(&b)) / 2.0).abs() <= 1e-10);
    }
    let bare = simulate_qasm(&swap_test_qasm(2).unwrap().text).unwrap();
    assert!((bare.prob_zero(0) - 1.0).abs() < 1e-12);
}

#[test]
fn interpreter_rejects_unknown_input() {
    let text = format!("{HEADER}qreg q[1];\nh q[0];\n");
    assert!(matches!(simulate_qasm(&text), Err(Error::Parse { .. })));
    let text = format!("{HEADER}qreg q[1];\nreset q[0];\n");
    assert!(matches!(simulate_qasm(&text), Err(Error::Unsupported(_))));
    assert!(matches!(swap_test_qasm(3), Err(Error::Dimension { .. })));
}
