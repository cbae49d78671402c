use std::collections::BTreeSet;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use phasorq::{
    compile_circuit, perturb, run_grover, uniform_superposition, CbsIndex, CompileOptions,
    GroverConfig, ToleranceSpec,
};
use phasorq_bench::{diffusion, hadamard_ladder};

fn evaluate_diffusion(c: &mut Criterion) {
    let mut group = c.benchmark_group("evaluate_diffusion");
    for n in [3usize, 6, 9] {
        let net = diffusion(n);
        let v = uniform_superposition(n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| net.evaluate(&v, 1e3).unwrap())
        });
    }
    group.finish();
}

fn transfer_matrix(c: &mut Criterion) {
    let mut group = c.benchmark_group("transfer_matrix_ladder");
    for n in [2usize, 4, 6] {
        let net = compile_circuit(&hadamard_ladder(n), &CompileOptions::default()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| net.transfer_matrix(1e3).unwrap())
        });
    }
    group.finish();
}

fn perturb_network(c: &mut Criterion) {
    let net = diffusion(6);
    let tol = ToleranceSpec::uniform(0.01, 1).unwrap();
    let mut trial = 0u64;
    c.bench_function("perturb_diffusion_6", |b| {
        b.iter(|| {
            trial += 1;
            perturb(&net, &tol, trial)
        })
    });
}

fn monte_carlo(c: &mut Criterion) {
    let mut cfg =
        GroverConfig::new(3, [5], 2).with_tolerance(ToleranceSpec::uniform(0.01, 7).unwrap(), 200);
    cfg.marked = BTreeSet::from([CbsIndex(5)]);
    c.bench_function("grover_mc_200_trials", |b| {
        b.iter(|| run_grover(&cfg).unwrap())
    });
}

criterion_group!(
    benches,
    evaluate_diffusion,
    transfer_matrix,
    perturb_network,
    monte_carlo
);
criterion_main!(benches);
