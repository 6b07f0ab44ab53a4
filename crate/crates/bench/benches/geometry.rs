use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sphtess_core::geom::cone::FaceLattice;
use sphtess_core::geom::{build_arrangement, uniform_direction};
use sphtess_core::moments::{ExpectationQuery, Flavor};
use sphtess_core::simulate::{estimate_isect_pair, run_batch, sample_weighted_face, BatchSpec, ExperimentConfig};

fn normals(rng: &mut ChaCha8Rng, m: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..m).map(|_| uniform_direction(rng, dim + 1)).collect()
}

fn geometry(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ns = normals(&mut rng, 8, 3);
    c.bench_function("arrangement 8 spheres in S^3", |b| b.iter(|| black_box(build_arrangement(&ns, 3).unwrap())));

    let cell = sample_weighted_face(8, 3, 3, &mut rng).unwrap();
    c.bench_function("face lattice of a cell of T(8,3)", |b| b.iter(|| black_box(FaceLattice::new(&cell).unwrap())));
    let lat = FaceLattice::new(&cell).unwrap();
    let g = vec![0.3, -1.2, 0.7, 0.1];
    c.bench_function("cone projection", |b| b.iter(|| black_box(lat.project(&g).unwrap())));

    let mut group = c.benchmark_group("batches");
    group.sample_size(10);
    for (n, d, k) in [(4u32, 2u32, 2u32), (6, 3, 2), (8, 3, 3)] {
        group.bench_function(format!("200 reps n={n} d={d} k={k}"), |b| {
            b.iter(|| {
                let mut spec = BatchSpec::new(n, d, k, 200, 1);
                spec.threads = Some(1);
                black_box(run_batch(&spec).unwrap())
            })
        });
    }
    group.bench_function("200 isect reps 8,8,3", |b| {
        let mut cfg = ExperimentConfig::new(ExpectationQuery::isect(Flavor::Weighted, 8, 8, 3), 200, 1);
        cfg.threads = Some(1);
        b.iter(|| black_box(estimate_isect_pair(8, 8, 3, &cfg, &Flavor::BOTH).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, geometry);
criterion_main!(benches);
