use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use xdg_shockfit::timestepper::{fd_jacobian, SemiDiscrete};
use xdg_shockfit::{Execution, ShockCase, SolverConfig};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn setup(cells: usize, execution: Execution) -> (xdg_shockfit::xdg::EulerOperator, Vec<f64>, SolverConfig) {
    let case = ShockCase { cells, ..ShockCase::default() };
    let solver = SolverConfig { execution, ..SolverConfig::default() };
    let problem = case.problem().unwrap();
    let field = case.initial_field(&problem).unwrap();
    let op = problem.operator(field.space().clone(), &solver);
    (op, field.into_coeffs(), solver)
}

fn residual(c: &mut Criterion) {
    let mut group = c.benchmark_group("residual");
    for cells in [10, 400] {
        for (name, mode) in MODES {
            let (op, u, _) = setup(cells, mode);
            group.bench_with_input(BenchmarkId::new(name, cells), &u, |b, u| {
                b.iter(|| SemiDiscrete::residual(&op, black_box(u)).unwrap())
            });
        }
    }
    group.finish();
}

fn jacobian(c: &mut Criterion) {
    let mut group = c.benchmark_group("fd_jacobian");
    group.sample_size(10);
    for cells in [10, 80] {
        for (name, mode) in MODES {
            let (op, u, solver) = setup(cells, mode);
            group.bench_with_input(BenchmarkId::new(name, cells), &u, |b, u| {
                b.iter(|| fd_jacobian(|v: &[f64]| SemiDiscrete::residual(&op, v), black_box(u), &solver, op.locality()).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, residual, jacobian);
criterion_main!(benches);
