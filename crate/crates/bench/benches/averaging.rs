use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use orbital::{fixture, folner_average, orbit_probe, AveragingConfig, ScenarioId};

fn rotation_average(c: &mut Criterion) {
    let s = fixture(ScenarioId::Rotation);
    let x = s.space().parse_point("t=0.2").unwrap();
    let mut group = c.benchmark_group("folner_average");
    for n_max in [1u64 << 12, 1 << 16] {
        // n_start = n_max / 2 forces exactly two stages.
        let cfg = AveragingConfig { n_max, n_start: n_max / 2, tol: 1e-12, ..Default::default() };
        group.bench_with_input(BenchmarkId::new("rotation_cos1", n_max), &cfg, |b, cfg| {
            b.iter(|| folner_average(&s, "cos1", &x, cfg).unwrap())
        });
    }
    group.finish();
}

fn spiral_average(c: &mut Criterion) {
    let s = fixture(ScenarioId::SpiralTwoCircles);
    let x = s.space().parse_point("sigma;tau=-20").unwrap();
    c.bench_function("folner_average/spiral_sigma_z", |b| {
        b.iter(|| folner_average(&s, "z", &x, &AveragingConfig::default()).unwrap())
    });
}

fn dyadic_orbits(c: &mut Criterion) {
    let s = fixture(ScenarioId::DyadicProduct);
    let x = s.space().parse_point("j=1/6;bits=1").unwrap();
    c.bench_function("orbit_probe/dyadic_level_6", |b| b.iter(|| orbit_probe(&s, &x, 4096).unwrap()));
}

criterion_group!(benches, rotation_average, spiral_average, dyadic_orbits);
criterion_main!(benches);
