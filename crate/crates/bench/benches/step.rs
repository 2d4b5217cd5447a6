use chns_core::harness::{init_condition, InitKind};
use chns_core::linalg::stokes::momentum_operator;
use chns_core::stepper::{ch_step, momentum_rhs};
use chns_core::{ChnsState, Params, StaggeredGrid, Stepper};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn setup(n: usize) -> (StaggeredGrid, Params, ChnsState) {
    let g = StaggeredGrid::unit_square(n).unwrap();
    let p = Params { dt: 1e-3, ..Params::convergence_example() };
    let s = init_condition(&InitKind::Trig, &g, &p, true).unwrap();
    (g, p, s)
}

fn phase_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("ch_step");
    for n in [32, 64] {
        let (g, p, s) = setup(n);
        let st = Stepper::new(&g, &p).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| ch_step(black_box(&s), &s.u, &g, &p, st.ch_solver()).unwrap())
        });
    }
    group.finish();
}

fn stokes_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("stokes_solve");
    for n in [32, 64] {
        let (g, p, s) = setup(n);
        let st = Stepper::new(&g, &p).unwrap();
        let h = momentum_operator(&g, &p, &s.u_tilde());
        let rhs = momentum_rhs(&s, &s.w, &g, &p);
        let div = g.cell();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| st.stokes_solver().solve(&h, black_box(&rhs), &div).unwrap())
        });
    }
    group.finish();
}

fn full_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    group.sample_size(10);
    for n in [32, 64] {
        let (g, p, s) = setup(n);
        let st = Stepper::new(&g, &p).unwrap();
        group.bench_with_input(BenchmarkId::new("coupled", n), &n, |b, _| {
            b.iter(|| st.coupled_step(black_box(&s)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("decoupled", n), &n, |b, _| {
            b.iter(|| st.decoupled_step(black_box(&s)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, phase_step, stokes_solve, full_step);
criterion_main!(benches);
