use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use solitonq_core::classical::propagate;
use solitonq_core::eigencheck::build_hamiltonian_apply;
use solitonq_core::model::shot_noise_dp;
use solitonq_core::sampler::sample_positions;
use solitonq_core::{Complex64, Field2, GridSpec, McmcConfig, PulseCenterState, SolitonParams, StepPlan};

fn sampler(c: &mut Criterion) {
    let params = SolitonParams::manakov(2, 2);
    let state = PulseCenterState::at_rest(shot_noise_dp(&params, 2.0).unwrap(), 4).unwrap();
    let mcmc = McmcConfig { samples_per_chain: 20_000, burn_in: 2_000, ..Default::default() };
    c.bench_function("sample_positions N=4 80k draws", |b| {
        b.iter(|| sample_positions(black_box(&params), &state, &mcmc).unwrap())
    });
}

fn grid_apply(c: &mut Criterion) {
    let params = SolitonParams::new(-1.0, 1.0, 2.0 / 3.0, 2, 1);
    let ham = build_hamiltonian_apply(&params, &GridSpec::new(64, 8.0).unwrap()).unwrap();
    let f = ham.ansatz(0.0).unwrap();
    let mut out = vec![Complex64::new(0.0, 0.0); f.len()];
    c.bench_function("grid Hamiltonian apply 64^3", |b| b.iter(|| ham.apply(black_box(&f), &mut out)));
}

fn split_step(c: &mut Criterion) {
    let params = SolitonParams::manakov(1, 1);
    let field = Field2::vector_soliton(&params, 1.0, 2048, 40.0).unwrap();
    let plan = StepPlan { dt: 2e-4, steps: 200 };
    c.bench_function("split-step M=2048 200 steps", |b| {
        b.iter(|| propagate(black_box(&field), &params, &plan, None).unwrap())
    });
}

criterion_group!(benches, sampler, grid_apply, split_step);
criterion_main!(benches);
