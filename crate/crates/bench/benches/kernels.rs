use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use radialdpp::asymptotics::{limit_variance_ginibre, limit_variance_hyperbolic};
use radialdpp::ensembles::{radial_tails, tails_sweep, SquaredRadius};
use radialdpp::oracle::exact_variance;
use radialdpp::{Coordinate, Ensemble, QuadratureSpec, Strategy, TestFunction, WindowSampler};

fn tails(c: &mut Criterion) {
    let hyp = Ensemble::hyperbolic(1.0).unwrap();
    let mut g = c.benchmark_group("radial_tails");
    for n in [10u64, 1_000, 100_000] {
        let point = SquaredRadius::from_modulus((n as f64).sqrt());
        g.bench_with_input(BenchmarkId::new("ginibre", n), &n, |b, &n| b.iter(|| radial_tails(&Ensemble::Ginibre, black_box(n), point)));
        g.bench_with_input(BenchmarkId::new("hyperbolic", n), &n, |b, &n| {
            b.iter(|| radial_tails(&hyp, black_box(n), SquaredRadius::from_modulus(0.99)))
        });
    }
    g.finish();

    c.bench_function("tails_sweep/ginibre_10k", |b| {
        b.iter(|| tails_sweep(&Ensemble::Ginibre, SquaredRadius::from_modulus(100.0), 5_000, 15_000))
    });
}

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample_counts");
    for (name, strategy) in [("direct", Strategy::Direct), ("thinned", Strategy::Thinned)] {
        let s = WindowSampler::new(&Ensemble::Ginibre, Coordinate::RawModulus, &[100.0, 101.0], 1e-12, strategy, 0xD99).unwrap();
        g.bench_function(name, |b| {
            let mut rid = 0u64;
            b.iter(|| {
                rid += 1;
                s.sample_counts(rid)
            })
        });
    }
    g.finish();
}

fn oracles(c: &mut Criterion) {
    let f = TestFunction::indicator(0.0, 1.0).unwrap();
    let spec = QuadratureSpec::default();
    c.bench_function("limit_variance/ginibre", |b| b.iter(|| limit_variance_ginibre(black_box(&f))));
    c.bench_function("limit_variance/hyperbolic", |b| b.iter(|| limit_variance_hyperbolic(1.0, black_box(&f), &spec)));
    c.bench_function("exact_variance/ginibre_R100", |b| b.iter(|| exact_variance(&Ensemble::Ginibre, &f, 100.0, 1.0, 1e-12)));
}

criterion_group!(benches, tails, sampling, oracles);
criterion_main!(benches);
