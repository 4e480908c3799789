use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use magtube::flow::{flow_complex, ComplexTime, FlowOptions};
use magtube::linalg::I;
use magtube::structure::{assemble_j, frame_at};
use magtube_bench::{planar, points, sphere};

fn flows(c: &mut Criterion) {
    let mut group = c.benchmark_group("flow_complex_at_i");
    let t = ComplexTime::new(I);
    for (name, geo) in [("flat", planar()), ("sphere", sphere())] {
        let zs = points(&geo, 16);
        for (label, opts) in
            [("point", FlowOptions::default().without_jacobian()), ("tangent_map", FlowOptions::default())]
        {
            group.bench_function(BenchmarkId::new(name, label), |b| {
                b.iter(|| zs.iter().map(|z| flow_complex(&geo, z, &t, &opts).unwrap().quad).sum::<magtube::C>())
            });
        }
    }
    group.finish();
}

fn structures(c: &mut Criterion) {
    let mut group = c.benchmark_group("structure_at_i");
    let t = ComplexTime::new(I);
    let opts = FlowOptions::default();
    for (name, geo) in [("flat", planar()), ("sphere", sphere())] {
        let zs = points(&geo, 8);
        group.bench_function(BenchmarkId::new("frame_and_j", name), |b| {
            b.iter(|| {
                zs.iter()
                    .map(|z| assemble_j(&frame_at(&geo, z, &t, &opts).unwrap()).unwrap().min_positivity())
                    .fold(f64::INFINITY, f64::min)
            })
        });
    }
    group.finish();
}

criterion_group!(benches, flows, structures);
criterion_main!(benches);
