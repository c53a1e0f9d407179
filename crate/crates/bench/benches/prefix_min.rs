use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pathgauge_bench::{fourier_iid_path, raster_path};
use pathgauge_core::estimators::ExceptionSet;
use pathgauge_core::geometry::GaugeSpec;
use pathgauge_core::nnindex::{leave_one_out_min, prefix_min_indexed, Backend};

fn prefix_profiles(c: &mut Criterion) {
    let gauge = GaugeSpec::lipschitz(1.0);
    let mut group = c.benchmark_group("prefix_min");
    group.sample_size(10);
    for &n in &[512usize, 2048] {
        let fixtures = [("raster", raster_path(n, 0.1, 1)), ("fourier8", fourier_iid_path(n, 8, 1))];
        for (name, path) in &fixtures {
            let b = ExceptionSet::empty(n - 1);
            for backend in [Backend::Naive, Backend::MetricIndexed] {
                group.bench_with_input(BenchmarkId::new(format!("{name}/{}", backend.name()), n), path, |bench, path| {
                    bench.iter(|| prefix_min_indexed(path, &gauge, 1, &b, backend).unwrap())
                });
            }
        }
    }
    group.finish();
}

fn leave_one_out(c: &mut Criterion) {
    let gauge = GaugeSpec::lipschitz(1.0);
    let path = raster_path(1024, 0.1, 2);
    let mut group = c.benchmark_group("leave_one_out");
    group.sample_size(10);
    for backend in [Backend::Naive, Backend::MetricIndexed] {
        group.bench_function(backend.name(), |bench| bench.iter(|| leave_one_out_min(&path, &gauge, backend).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, prefix_profiles, leave_one_out);
criterion_main!(benches);
