use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dfrc_bench::{default_links, equal_payload_links};
use dfrc_core::pcrb::{build_pcrb_model, ComplexMatrix4};
use dfrc_core::{
    alg1_delay_bisection, alg2_complementary, closed_form_equal_payload, FloorMode, SolverParams,
};
use num_complex::Complex64;
use std::hint::black_box;

fn allocators(c: &mut Criterion) {
    let params = SolverParams::default();
    let mut group = c.benchmark_group("allocate");
    for k in [2, 4, 8] {
        let (relaxed, p_max) = default_links(k, FloorMode::Relaxed);
        let (exact, _) = default_links(k, FloorMode::Exact);
        let (equal, _) = equal_payload_links(k);
        group.bench_with_input(BenchmarkId::new("alg1", k), &relaxed, |b, l| {
            b.iter(|| alg1_delay_bisection(black_box(l), p_max, &params).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("alg2", k), &exact, |b, l| {
            b.iter(|| alg2_complementary(black_box(l), p_max, &params).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("closed_form", k), &equal, |b, l| {
            b.iter(|| closed_form_equal_payload(black_box(l), p_max).unwrap())
        });
    }
    group.finish();
}

fn pcrb_model(c: &mut Criterion) {
    let prior = ComplexMatrix4::from_fn(|r, col| {
        let v = if r == col {
            4.0 + r as f64
        } else {
            0.5 / (1.0 + (r + col) as f64)
        };
        Complex64::new(
            v,
            if r < col {
                0.1
            } else if r > col {
                -0.1
            } else {
                0.0
            },
        )
    });
    let g = ComplexMatrix4::from_fn(|r, col| {
        Complex64::new((r * 4 + col) as f64 * 0.3, r as f64 * 0.1)
    });
    let observed = g.adjoint() * g;
    c.bench_function("build_pcrb_model", |b| {
        b.iter(|| build_pcrb_model(black_box(&prior), black_box(&observed)).unwrap())
    });
}

criterion_group!(benches, allocators, pcrb_model);
criterion_main!(benches);
