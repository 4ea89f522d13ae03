mod common;

use std::collections::BTreeMap;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vqpu_core::bloch::{BlochAngles, PrecisionMode};
use vqpu_core::circuit::{parse_qasm, FlatOp};
use vqpu_core::engine::{full_circuit_unitary, sample_shots, BlochRegister, Histogram, Workers};
use vqpu_core::entropy::EntropySource;

use common::{measure_all, product_state, random_angles, random_gate_circuit};

fn norm(b: &BlochRegister) -> f64 {
    b.state().amplitudes().iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn unused_stream() -> vqpu_core::entropy::EntropyStream {
    EntropySource::seeded(0).stream(u64::MAX)
}

#[test]
fn norm_survives_a_thousand_gates() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let n = 10;
    let ir = random_gate_circuit(&mut rng, n, 1000, false);
    let mut b = BlochRegister::init_qubits(n, &random_angles(&mut rng, n), 0, PrecisionMode::Full).unwrap();
    for op in ir.lower().unwrap() {
        let FlatOp::Gate(g) = op else { unreachable!() };
        let before = norm(&b);
        b.apply_gate(&g).unwrap();
        assert!((norm(&b) - before).abs() <= 1e-12);
    }
    assert!((norm(&b) - 1.0).abs() <= 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn engine_matches_dense_unitary(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=6);
        let depth = rng.gen_range(0..=20);
        let ir = random_gate_circuit(&mut rng, n, depth, false);
        let angles = random_angles(&mut rng, n);

        let mut b = BlochRegister::init_qubits(n, &angles, 0, PrecisionMode::Full).unwrap();
        b.apply_circuit(&ir, &mut unused_stream()).unwrap();
        let expect = full_circuit_unitary(&ir, n).unwrap().mul_vec(&product_state(&angles));
        for (x, y) in b.state().amplitudes().iter().zip(&expect) {
            prop_assert!((x - y).norm() <= 1e-9);
        }
    }

    #[test]
    fn measurement_repeats(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=4);
        let ir = random_gate_circuit(&mut rng, n, 8, false);
        let mut b = BlochRegister::init_qubits(n, &random_angles(&mut rng, n), 0, PrecisionMode::Full).unwrap();
        b.apply_circuit(&ir, &mut unused_stream()).unwrap();
        let q = rng.gen_range(0..n);
        let mut s = EntropySource::seeded(seed).stream(0);
        let first = b.measure_qubit(q, &mut s).unwrap();
        let second = b.measure_qubit(q, &mut s).unwrap();
        prop_assert_eq!(first.outcome, second.outcome);
        prop_assert!((second.probability - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn born_rule_frequencies() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let n = 3;
    let mut ir = random_gate_circuit(&mut rng, n, 12, true);
    let unitary_part = ir.clone();
    measure_all(&mut ir, n);
    let start = BlochRegister::for_circuit(&ir, PrecisionMode::Full).unwrap();

    let mut exact = start.clone();
    exact.apply_circuit(&unitary_part, &mut unused_stream()).unwrap();
    let p = exact.aqic_probabilities();

    let shots = 100_000u64;
    let hist = sample_shots(&start, &ir, shots, &EntropySource::seeded(5), Workers::Ambient).unwrap();
    for (k, &pk) in p.iter().enumerate() {
        let key = format!("{k:03b}");
        let f = hist.get(&key).copied().unwrap_or(0) as f64 / shots as f64;
        let sigma = (pk * (1.0 - pk) / shots as f64).sqrt();
        assert!((f - pk).abs() <= 4.0 * sigma + 1e-12, "{key}: {f} vs {pk}");
    }
}

#[test]
fn bell_pairs_always_agree() {
    let ir = parse_qasm("OPENQASM 2.0; qreg q[2]; creg c[2]; h q[0]; cx q[0],q[1]; measure q -> c;").unwrap();
    let b = BlochRegister::for_circuit(&ir, PrecisionMode::Full).unwrap();
    let h = sample_shots(&b, &ir, 20_000, &EntropySource::seeded(1), Workers::Ambient).unwrap();
    assert!(!h.contains_key("01"));
    assert!(!h.contains_key("10"));
    assert_eq!(h["00"] + h["11"], 20_000);
}

#[test]
fn marginal_after_measuring_another_qubit() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let n = 3;
    let ir = random_gate_circuit(&mut rng, n, 15, false);
    let mut prepared = BlochRegister::init_qubits(n, &random_angles(&mut rng, n), 0, PrecisionMode::Full).unwrap();
    prepared.apply_circuit(&ir, &mut unused_stream()).unwrap();

    // P(q2 = 1) by summing |a_k|^2 over every k with bit 2 set
    let amps: &[Complex64] = prepared.state().amplitudes();
    let marginal: f64 = (0..amps.len()).filter(|k| k & 0b100 != 0).map(|k| amps[k].norm_sqr()).sum();

    let trials = 20_000u64;
    let src = EntropySource::seeded(99);
    let mut ones = 0u64;
    for t in 0..trials {
        let mut b = prepared.clone();
        let mut s = src.stream(t);
        b.measure_qubit(0, &mut s).unwrap();
        ones += u64::from(b.measure_qubit(2, &mut s).unwrap().outcome);
    }
    let f = ones as f64 / trials as f64;
    let sigma = (marginal * (1.0 - marginal) / trials as f64).sqrt();
    assert!((f - marginal).abs() <= 4.0 * sigma, "{f} vs {marginal}");
}

#[test]
fn histograms_ignore_worker_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 5;
    let mut ir = random_gate_circuit(&mut rng, n, 30, true);
    measure_all(&mut ir, n);
    let b = BlochRegister::for_circuit(&ir, PrecisionMode::Full).unwrap();
    let src = EntropySource::seeded(2024);
    let runs: Vec<Histogram> = [1, 4, 16]
        .into_iter()
        .map(|w| sample_shots(&b, &ir, 5000, &src, Workers::Fixed(w)).unwrap())
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
    assert_eq!(runs[0].values().sum::<u64>(), 5000);
}

#[test]
fn fixed16_bell_fidelity() {
    let ir = parse_qasm("OPENQASM 2.0; qreg q[2]; h q[0]; cx q[0],q[1];").unwrap();
    let run = |p| {
        let mut b = BlochRegister::for_circuit(&ir, p).unwrap();
        b.apply_circuit(&ir, &mut unused_stream()).unwrap();
        b
    };
    let full = run(PrecisionMode::Full);
    let fixed = run(PrecisionMode::fixed(16).unwrap());
    assert!(full.state().fidelity(fixed.state()) >= 0.999);
    let angles = vec![BlochAngles::zero(); 2];
    assert!(BlochRegister::init_qubits(2, &angles, 0, PrecisionMode::Fixed(16)).is_ok());
}

#[test]
fn conditional_reads_register_little_endian() {
    // c = 2 means c[1] = 1, c[0] = 0
    let ir = parse_qasm(
        "OPENQASM 2.0; qreg q[3]; creg c[2]; creg d[1]; x q[1]; measure q[1] -> c[1]; \
         if (c==2) x q[2]; measure q[2] -> d[0];",
    )
    .unwrap();
    let b = BlochRegister::for_circuit(&ir, PrecisionMode::Full).unwrap();
    let h = sample_shots(&b, &ir, 100, &EntropySource::seeded(0), Workers::Ambient).unwrap();
    assert_eq!(h, BTreeMap::from([("110".to_owned(), 100)]));
}
