//! Sequential vs parallel: one layer of gates on a large register, and shot
//! sampling on a small one.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vqpu_core::bloch::PrecisionMode;
use vqpu_core::circuit::{parse_qasm, CircuitIR, GateKind};
use vqpu_core::engine::{sample_shots, BlochRegister, ExecPolicy, Workers};
use vqpu_core::entropy::EntropySource;

fn layer(n: usize) -> CircuitIR {
    let mut ir = CircuitIR::new().with_qreg("q", n);
    for q in 0..n {
        ir.gate(GateKind::H, &[], &[("q", q)]);
    }
    for q in 0..n - 1 {
        ir.gate(GateKind::Cx, &[], &[("q", q), ("q", q + 1)]);
    }
    for q in 0..n {
        ir.gate(GateKind::Ry, &[0.1 * q as f64], &[("q", q)]);
    }
    ir
}

fn gate_layer(c: &mut Criterion) {
    let mut group = c.benchmark_group("gate_layer");
    group.sample_size(10);
    for n in [16, 20] {
        let ir = layer(n);
        for (name, policy) in [("sequential", ExecPolicy::Sequential), ("parallel", ExecPolicy::Parallel)] {
            let start = BlochRegister::for_circuit(&ir, PrecisionMode::Full)
                .unwrap()
                .with_policy(policy);
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| {
                    let mut r = start.clone();
                    r.apply_circuit(&ir, &mut EntropySource::seeded(0).stream(0)).unwrap();
                    r
                })
            });
        }
    }
    group.finish();
}

fn shots(c: &mut Criterion) {
    let ir = parse_qasm(
        "OPENQASM 2.0; qreg q[5]; creg c[5]; h q; cx q[0],q[1]; measure q[0] -> c[0]; \
         if (c==1) x q[2]; cx q[2],q[3]; measure q -> c;",
    )
    .unwrap();
    let start = BlochRegister::for_circuit(&ir, PrecisionMode::Full).unwrap();
    let src = EntropySource::seeded(1);
    let mut group = c.benchmark_group("sample_shots_20k");
    group.sample_size(10);
    for (name, workers) in [("sequential", Workers::Fixed(1)), ("parallel", Workers::Ambient)] {
        group.bench_function(name, |b| {
            b.iter(|| sample_shots(&start, &ir, 20_000, &src, workers).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, gate_layer, shots);
criterion_main!(benches);
