use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use phonoblock::fock::destroy;
use phonoblock::model::B1;
use phonoblock::{
    g2_tau, single_drive_optimal, solve_system, steady_state, Branch, EvolveOptions, HilbertSpace, MechParams,
    OmParams, SteadyOptions, SystemSpec,
};

fn mech() -> MechParams {
    let o = single_drive_optimal(0.95, 1.0, Branch::Plus).unwrap();
    MechParams {
        delta: o.delta_opt,
        u: o.u_opt,
        j: 0.95,
        omega1: 0.1,
        nth: 1e-3,
        ..Default::default()
    }
}

fn optomech() -> SystemSpec {
    SystemSpec::with_cavity(
        mech(),
        OmParams {
            g: 1.0,
            kappa: 10.0,
            delta_a: None,
        },
    )
}

fn liouvillian_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("liouvillian");
    for n in [4usize, 6, 8] {
        let space = HilbertSpace::new(&[n, n]).unwrap();
        let spec = SystemSpec::mech(mech());
        group.bench_with_input(BenchmarkId::new("mech", n), &space, |b, s| {
            b.iter(|| spec.liouvillian(black_box(s)).unwrap())
        });
    }
    let space = HilbertSpace::new(&[5, 5, 3]).unwrap();
    let spec = optomech();
    group.bench_function("optomech/5x5x3", |b| b.iter(|| spec.liouvillian(black_box(&space)).unwrap()));
    group.finish();
}

fn steady_solvers(c: &mut Criterion) {
    let mut group = c.benchmark_group("steady_state");
    group.sample_size(10);
    let dense = SteadyOptions::default();
    let sparse = SteadyOptions {
        dense_max_dim: 0,
        ..Default::default()
    };
    for n in [4usize, 5] {
        let space = HilbertSpace::new(&[n, n]).unwrap();
        let l = SystemSpec::mech(mech()).liouvillian(&space).unwrap();
        group.bench_with_input(BenchmarkId::new("dense", n * n), &l, |b, l| {
            b.iter(|| steady_state(black_box(l), &dense).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sparse", n * n), &l, |b, l| {
            b.iter(|| steady_state(black_box(l), &sparse).unwrap())
        });
    }
    for n in [6usize, 8] {
        let space = HilbertSpace::new(&[n, n]).unwrap();
        let l = SystemSpec::mech(mech()).liouvillian(&space).unwrap();
        group.bench_with_input(BenchmarkId::new("sparse", n * n), &l, |b, l| {
            b.iter(|| steady_state(black_box(l), &sparse).unwrap())
        });
    }
    let spec = optomech();
    group.bench_function("optomech/5x5x3", |b| {
        b.iter(|| solve_system(black_box(&spec), &[5, 5, 3], &dense).unwrap())
    });
    group.finish();
}

fn delayed_correlation(c: &mut Criterion) {
    let mut group = c.benchmark_group("g2_tau");
    group.sample_size(10);
    let taus: Vec<f64> = (0..=40).map(|k| k as f64 * 0.5).collect();
    for n in [3usize, 5] {
        let sol = solve_system(&SystemSpec::mech(mech()), &[n, n], &SteadyOptions::default()).unwrap();
        let b1 = destroy(&sol.space, B1).unwrap();
        let label = if n * n <= EvolveOptions::default().dense_max_dim { "expm" } else { "rk4" };
        group.bench_function(BenchmarkId::new(label, n * n), |b| {
            b.iter(|| g2_tau(&sol.liouvillian, &sol.rho, &b1, black_box(&taus), &EvolveOptions::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, liouvillian_build, steady_solvers, delayed_correlation);
criterion_main!(benches);
