use std::fs;
use std::path::PathBuf;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vqpu_core::circuit::{
    emit_qasm, parse_qasm, parse_qasm_bytes, validate, BitRef, CircuitIR, Diagnostic, GateKind,
    GateOp, Instruction, ParseOptions,
};
use vqpu_core::linalg::CMatrix;

fn corpus() -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../circuits");
    let mut files: Vec<_> = fs::read_dir(&dir)
        .expect("circuits directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "qasm"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.display().to_string(), fs::read_to_string(&p).unwrap()))
        .collect()
}

fn gate_op(kind: GateKind, params: Vec<f64>, qubits: &[usize]) -> GateOp {
    GateOp::new(
        kind,
        params,
        qubits.iter().map(|&i| BitRef::new("q", i)).collect(),
    )
}

/// Distinct qubit indices in `0..n`.
fn pick_distinct(rng: &mut impl Rng, n: usize, k: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let q = rng.gen_range(0..n);
        if !out.contains(&q) {
            out.push(q);
        }
    }
    out
}

/// A well-formed IR over `q[n]`, `c[m]` built directly, not through the parser.
fn random_ir(seed: u64) -> CircuitIR {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=5);
    let m = rng.gen_range(1..=4);
    let mut ir = CircuitIR::new().with_qreg("q", n).with_creg("c", m);
    for _ in 0..rng.gen_range(0..30) {
        let inst = match rng.gen_range(0..10) {
            0 => Instruction::Measure {
                qubit: BitRef::new("q", rng.gen_range(0..n)),
                clbit: BitRef::new("c", rng.gen_range(0..m)),
            },
            1 => Instruction::Reset(BitRef::new("q", rng.gen_range(0..n))),
            2 => Instruction::Barrier({
                let k = rng.gen_range(1..=n);
                pick_distinct(&mut rng, n, k)
                    .into_iter()
                    .map(|i| BitRef::new("q", i))
                    .collect()
            }),
            _ => {
                let kind = GateKind::ALL[rng.gen_range(0..GateKind::ALL.len())];
                let params = (0..kind.num_params())
                    .map(|_| rng.gen_range(-10.0..10.0))
                    .collect();
                let op = gate_op(kind, params, &pick_distinct(&mut rng, n, kind.num_qubits()));
                if rng.gen_bool(0.2) {
                    Instruction::Conditional {
                        register: "c".into(),
                        value: rng.gen_range(0..1u64 << m),
                        gate: op,
                    }
                } else {
                    Instruction::Gate(op)
                }
            }
        };
        ir.push(inst);
    }
    ir
}

/// 1-based (line, column) is on a character of `src`, or one past the end
/// of a line.
fn position_in(src: &str, d: &Diagnostic) -> bool {
    let lines: Vec<&str> = src.split('\n').collect();
    if src.is_empty() {
        return (d.line, d.column) == (1, 1);
    }
    d.line >= 1
        && d.line <= lines.len()
        && d.column >= 1
        && d.column <= lines[d.line - 1].chars().count() + 1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gate_matrices_are_unitary(
        k in 0..GateKind::ALL.len(),
        params in prop::collection::vec(-100.0f64..100.0, 3),
    ) {
        let kind = GateKind::ALL[k];
        let m = kind.matrix(&params[..kind.num_params()]).unwrap();
        // U†U − I, computed here rather than trusting the library check
        let u = m.as_matrix();
        let prod = &u.adjoint() * u;
        let err = prod.max_abs_diff(&CMatrix::identity(u.dim()));
        prop_assert!(err <= 1e-9, "{} {:?}: {}", kind.name(), params, err);
    }

    #[test]
    fn generated_ir_round_trips(seed in any::<u64>()) {
        let ir = random_ir(seed);
        prop_assert!(validate(&ir, 26).is_empty(), "{:?}", validate(&ir, 26));
        let text = emit_qasm(&ir);
        let back = parse_qasm(&text);
        prop_assert_eq!(back.as_ref(), Ok(&ir), "{}", text);
    }

    #[test]
    fn diagnostics_point_into_the_source(
        src in "[ a-z0-9\\[\\];,()\\->=+*/.\"\n{}]{0,80}"
    ) {
        let src = format!("OPENQASM 2.0;\nqreg q[2];\n{src}");
        if let Err(diags) = parse_qasm(&src) {
            prop_assert!(!diags.is_empty());
            for d in &diags {
                prop_assert!(position_in(&src, d), "{} in {:?}", d, src);
            }
            let mut sorted = diags.clone();
            vqpu_core::circuit::sort_diagnostics(&mut sorted);
            prop_assert_eq!(sorted, diags);
        }
    }
}

#[test]
fn corpus_round_trips() {
    let mut parsed = 0;
    for (name, src) in corpus() {
        let Ok(ir) = parse_qasm(&src) else { continue };
        parsed += 1;
        let again = parse_qasm(&emit_qasm(&ir)).unwrap_or_else(|d| panic!("{name}: {d:?}"));
        assert_eq!(again, ir, "{name}");
    }
    assert!(parsed >= 4);
}

#[test]
fn corpus_error_files_report_positions() {
    for (name, src) in corpus() {
        if let Err(diags) = parse_qasm(&src) {
            for d in &diags {
                assert!(position_in(&src, d), "{name}: {d}");
            }
        }
    }
}

#[test]
fn random_bytes_never_panic() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF022);
    let opts = ParseOptions::default();
    let seeds: Vec<Vec<u8>> = corpus().into_iter().map(|(_, s)| s.into_bytes()).collect();
    for i in 0..20_000 {
        let bytes: Vec<u8> = if i % 2 == 0 {
            let len = rng.gen_range(0..200);
            (0..len).map(|_| rng.gen()).collect()
        } else {
            // corrupt a real circuit a few bytes at a time
            let mut b = seeds[i % seeds.len()].clone();
            for _ in 0..rng.gen_range(1..6) {
                let at = rng.gen_range(0..b.len());
                b[at] = rng.gen();
            }
            b
        };
        match parse_qasm_bytes(&bytes, &opts) {
            Ok(_) => {}
            Err(d) => assert!(!d.is_empty()),
        }
    }
}
