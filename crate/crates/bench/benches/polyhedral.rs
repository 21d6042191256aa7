use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use conelab::conetensor::{max_tensor, min_tensor};
use conelab::random::{random_proper_cone, random_subdual_cone, rng};
use conelab::selfdual::{selfdual_extend_cone, ConeExtensionOptions, Strategy};
use conelab::PolyCone;

fn cones(dim: usize, gens: usize, count: usize) -> Vec<PolyCone> {
    let mut r = rng(dim as u64 * 31 + gens as u64);
    (0..count).map(|_| random_proper_cone(&mut r, dim, gens, 4)).collect()
}

fn fresh(c: &PolyCone) -> PolyCone {
    PolyCone::from_generators(c.dim(), c.generators().to_vec()).unwrap()
}

fn dd(c: &mut Criterion) {
    let mut group = c.benchmark_group("dd_convert");
    for (dim, gens) in [(3, 6), (4, 8), (5, 10), (6, 12)] {
        let input = cones(dim, gens, 8);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{dim}x{gens}")), &input, |b, input| {
            b.iter(|| {
                for cone in input {
                    black_box(fresh(cone).facets().len());
                }
            })
        });
    }
    group.finish();
}

fn tensors(c: &mut Criterion) {
    let mut group = c.benchmark_group("tensor");
    group.sample_size(20);
    for (dg, dh) in [(2, 3), (3, 3), (3, 4)] {
        let g = &cones(dg, dg + 2, 1)[0];
        let h = &cones(dh, dh + 2, 1)[0];
        let label = format!("{dg}x{dh}");
        group.bench_function(BenchmarkId::new("min", &label), |b| {
            b.iter(|| black_box(min_tensor(&fresh(g), &fresh(h)).unwrap().facets().len()))
        });
        group.bench_function(BenchmarkId::new("max", &label), |b| {
            b.iter(|| black_box(max_tensor(&fresh(g), &fresh(h)).unwrap().extreme_rays().len()))
        });
    }
    group.finish();
}

fn selfdual(c: &mut Criterion) {
    let mut group = c.benchmark_group("selfdual_extend");
    group.sample_size(10);
    let mut r = rng(5);
    let input: Vec<PolyCone> = (0..4).map(|_| random_subdual_cone(&mut r, 3, 3, 3)).collect();
    for strategy in [Strategy::GreedyDualRay, Strategy::DampedMidpoint] {
        let opts = ConeExtensionOptions {
            strategy,
            ..Default::default()
        };
        group.bench_function(strategy.to_string(), |b| {
            b.iter(|| {
                for cone in &input {
                    black_box(selfdual_extend_cone(cone, &opts).unwrap().1.iterations);
                }
            })
        });
    }
    group.finish();
}

criterion_group!(benches, dd, tensors, selfdual);
criterion_main!(benches);
