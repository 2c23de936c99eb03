use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use std::hint::black_box;

use cricshot_bench::Fixture;
use cricshot_core::{run_segmentation, BackgroundModel, BoundaryConfig, RunOptions, Segmenter, SegmenterConfig};

fn background(c: &mut Criterion) {
    let fx = Fixture::random_cuts(11, 640, 360, 4).unwrap();
    let cfg = BoundaryConfig::default();
    let mut group = c.benchmark_group("background");
    group.throughput(Throughput::Elements(640 * 360));
    group.bench_function("update_fraction 640x360", |b| {
        let mut model = BackgroundModel::new(640, 360, &cfg);
        for f in &fx.frames[..cfg.init_frames as usize] {
            model.update_fraction(f).unwrap();
        }
        let mut i = 0;
        b.iter(|| {
            i = (i + 1) % fx.frames.len();
            black_box(model.update_fraction(&fx.frames[i]).unwrap())
        })
    });
    group.bench_function("update mask 640x360", |b| {
        let mut model = BackgroundModel::new(640, 360, &cfg);
        let mut i = 0;
        b.iter(|| {
            i = (i + 1) % fx.frames.len();
            black_box(model.update(&fx.frames[i]).unwrap())
        })
    });
    group.finish();
}

fn segmenter(c: &mut Criterion) {
    let fx = Fixture::bundled("three_lengths").unwrap();
    let anns = fx.annotations();
    let cfg = SegmenterConfig {
        fps: fx.scenario.fps(),
        ..SegmenterConfig::default()
    };
    let mut group = c.benchmark_group("segmenter");
    group.throughput(Throughput::Elements(fx.frames.len() as u64));
    group.bench_function("push pre-annotated", |b| {
        b.iter_batched(
            || Segmenter::new(cfg.clone()).unwrap(),
            |mut seg| {
                let mut events = 0;
                for (f, a) in fx.frames.iter().zip(&anns) {
                    events += seg.push(f.clone(), Ok(a.clone())).unwrap().len();
                }
                events + seg.finish().unwrap().len()
            },
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

fn pipeline(c: &mut Criterion) {
    let fx = Fixture::random_cuts(29, 640, 360, 6).unwrap();
    let backend = fx.backend();
    let cfg = SegmenterConfig::default();
    let mut group = c.benchmark_group("run_segmentation");
    group.sample_size(20);
    group.throughput(Throughput::Elements(fx.frames.len() as u64));
    for parallel in [false, true] {
        let name = if parallel { "parallel" } else { "sequential" };
        group.bench_function(name, |b| {
            b.iter(|| {
                let frames = fx.frames.iter().cloned().map(Ok);
                let opts = RunOptions {
                    batch_size: 64,
                    parallel,
                };
                run_segmentation(frames, &backend, &cfg, opts, |_| {})
                    .unwrap()
                    .clips
                    .len()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, background, segmenter, pipeline);
criterion_main!(benches);
