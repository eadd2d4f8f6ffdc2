use cartan_core::bch::{solve_bch_split, BchConfig};
use cartan_core::khk::{compute_m, minimize_to_cartan, OptimizerConfig, Tolerances};
use cartan_core::linalg::{expm_skew, logm_unitary};
use cartan_core::pauli::combination;
use cartan_core::{decompose_full, haar_special_unitary, kg_basis, AxisInvolution, DecomposeConfig};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

fn primitives(c: &mut Criterion) {
    let g = haar_special_unitary(4, 1);
    c.bench_function("logm_unitary/16", |b| b.iter(|| logm_unitary(black_box(&g)).unwrap()));
    let log = logm_unitary(&g).unwrap().log;
    c.bench_function("expm_skew/16", |b| b.iter(|| expm_skew(black_box(&log)).unwrap()));
}

fn cartan_stage(c: &mut Criterion) {
    let basis = kg_basis(3).unwrap();
    let h = basis.cartan_h();
    let g = haar_special_unitary(3, 2);
    let m0 = compute_m(&g, &AxisInvolution::theta_z(3), &basis.m_set, 1e-3).unwrap();
    let cfg = OptimizerConfig::default();
    let tol = Tolerances::default();
    c.bench_function("minimize_to_cartan/n3", |b| {
        b.iter(|| minimize_to_cartan(black_box(&m0), &basis.k_set, &basis.m_set, &h, &cfg, &tol).unwrap())
    });
}

fn full(c: &mut Criterion) {
    let mut group = c.benchmark_group("decompose_full");
    group.sample_size(10);
    for n in [3usize, 4] {
        let cfg = DecomposeConfig::default();
        let mut seed = 0;
        group.bench_function(format!("n{n}"), |b| {
            b.iter_batched(
                || {
                    seed += 1;
                    haar_special_unitary(n, seed)
                },
                |g| decompose_full(&g, n, &cfg).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn bch(c: &mut Criterion) {
    let basis = kg_basis(3).unwrap();
    let coeffs: Vec<f64> = (0..basis.m_set.len()).map(|i| 0.01 * (i as f64).sin()).collect();
    let g = expm_skew(&combination(&basis.m_set, &coeffs)).unwrap();
    c.bench_function("solve_bch_split/n3", |b| {
        b.iter(|| solve_bch_split(black_box(&g), &basis, &BchConfig::default()).unwrap())
    });
}

criterion_group!(benches, primitives, cartan_stage, full, bch);
criterion_main!(benches);
