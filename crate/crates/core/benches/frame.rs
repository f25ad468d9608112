use std::path::Path;

use aldus::{
    inject_dust, preset, read_csv, simulate_frame, write_csv, Engine, ScenarioConfig, World,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn world(name: &str) -> World {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name);
    ScenarioConfig::load(&path).expect("fixture parses").world
}

fn engines() -> Vec<(&'static str, Engine)> {
    let mut v = vec![("sequential", Engine::sequential())];
    if cfg!(feature = "rayon") {
        v.push(("parallel", Engine::with_threads(0)));
    }
    v
}

fn bench_frames(c: &mut Criterion) {
    let low = world("reference_low.toml");
    let mut os1 = low.clone();
    os1.sensor = preset("os1-64").unwrap();
    os1.sensor.range_noise_sigma = 0.0;

    let mut group = c.benchmark_group("simulate_frame");
    group.sample_size(20);
    for (label, w) in [("vlp16", &low), ("os1-64", &os1)] {
        group.throughput(Throughput::Elements(w.sensor.beams_per_frame() as u64));
        for (name, engine) in engines() {
            group.bench_with_input(BenchmarkId::new(name, label), w, |b, w| {
                let mut frame_id = 0;
                b.iter(|| {
                    frame_id += 1;
                    simulate_frame(w, 0, frame_id, &engine)
                })
            });
        }
    }
    group.finish();
}

fn bench_inject(c: &mut Criterion) {
    let clear = world("reference.toml");
    let dusty = world("reference_low.toml");
    let points = read_csv(&write_csv(&simulate_frame(
        &clear,
        0,
        0,
        &Engine::sequential(),
    )))
    .unwrap();

    let mut group = c.benchmark_group("inject_dust");
    group.sample_size(20);
    group.throughput(Throughput::Elements(points.len() as u64));
    for (name, engine) in engines() {
        group.bench_function(name, |b| {
            b.iter(|| inject_dust(&points, &dusty, 0, &engine).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_frames, bench_inject);
criterion_main!(benches);
