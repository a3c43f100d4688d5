use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use vbqc_bench::{bench_rng, chain_setup};
use vbqc_core::graph::StabilizerGeneratorSet;
use vbqc_core::protocol::{run_trial, BobStrategy};
use vbqc_core::qsim::random::{random_density_operator, random_kraus_channel, random_unitary};
use vbqc_core::qsim::{QuantumState, StateVector};
use vbqc_core::stab::{pass_probability_by_enumeration, pass_probability_by_projector};

fn bench_gate_application(c: &mut Criterion) {
    let mut rng = bench_rng();
    let gate = random_unitary(2, &mut rng);
    let mut group = c.benchmark_group("gates");
    for n in [6usize, 8, 10] {
        group.bench_function(format!("single_qubit_{n}q"), |b| {
            b.iter_batched(
                || StateVector::plus_state(n),
                |mut psi| {
                    psi.apply_single_qubit_gate(n / 2, black_box(&gate)).unwrap();
                    psi
                },
                BatchSize::SmallInput,
            )
        });
        group.bench_function(format!("cz_{n}q"), |b| {
            b.iter_batched(
                || StateVector::plus_state(n),
                |mut psi| {
                    psi.apply_cz(0, n - 1).unwrap();
                    psi
                },
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn bench_pass_probability(c: &mut Criterion) {
    let mut rng = bench_rng();
    let gens = StabilizerGeneratorSet::random(4, 3, &mut rng);
    let rho = random_density_operator(4, &mut rng);
    let mut group = c.benchmark_group("pass_probability");
    group.bench_function("enumeration_4q", |b| {
        b.iter(|| pass_probability_by_enumeration(black_box(&rho), &gens).unwrap())
    });
    group.bench_function("projector_4q", |b| {
        b.iter(|| pass_probability_by_projector(black_box(&rho), &gens).unwrap())
    });
    group.finish();
}

fn bench_trials(c: &mut Criterion) {
    let (graph, input, instance) = chain_setup();
    let mut group = c.benchmark_group("protocol");
    group.bench_function("honest_trial", |b| {
        let mut rng = bench_rng();
        b.iter(|| {
            run_trial(&instance, &input, &graph, &BobStrategy::Honest, 0.5, &mut rng).unwrap()
        })
    });
    let mixed = BobStrategy::ArbitraryState(vbqc_core::qsim::DensityOperator::maximally_mixed(6));
    group.bench_function("mixed_adversary_trial", |b| {
        let mut rng = bench_rng();
        b.iter(|| run_trial(&instance, &input, &graph, &mixed, 0.5, &mut rng).unwrap())
    });
    group.finish();
}

fn bench_twirl(c: &mut Criterion) {
    let mut rng = bench_rng();
    let (_, input, _) = chain_setup();
    let kraus = random_kraus_channel(3, 2, &mut rng);
    c.bench_function("rho_before_exact_m1", |b| {
        b.iter(|| vbqc_core::analysis::rho_before_exact(black_box(&kraus), &input).unwrap())
    });
}

criterion_group!(
    benches,
    bench_gate_application,
    bench_pass_probability,
    bench_trials,
    bench_twirl
);
criterion_main!(benches);
