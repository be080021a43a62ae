use articand_core::collision::{brute_force_contact, part_contact, Collider, ContactQuery};
use articand_core::geom::{Dir3, RigidPose};
use articand_core::synth::{grid_sheet, random_soup};
use articand_core::{Point3, Vec3};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn soups(n: usize) -> (Collider, Collider, RigidPose) {
    let fixed = Collider::new(random_soup(n, 1, Point3::origin(), 0.5, 0.15));
    let moving = Collider::new(random_soup(n, 2, Point3::origin(), 0.5, 0.15));
    (moving, fixed, RigidPose::translation(Vec3::new(0.9, 0.0, 0.0)))
}

fn bvh_vs_brute(c: &mut Criterion) {
    let mut g = c.benchmark_group("soup_contact");
    g.sample_size(10);
    for n in [100, 400, 1600] {
        let (moving, fixed, pose) = soups(n);
        let q = ContactQuery::exact(f64::INFINITY);
        g.bench_with_input(BenchmarkId::new("bvh", n), &n, |b, _| {
            b.iter(|| part_contact(&moving, &pose, &[&fixed], &q).unwrap())
        });
        if n <= 400 {
            g.bench_with_input(BenchmarkId::new("brute", n), &n, |b, _| {
                b.iter(|| brute_force_contact(&moving, &pose, &[&fixed], f64::INFINITY).unwrap())
            });
        }
    }
    g.finish();
}

fn crossing_sheets(c: &mut Criterion) {
    let fixed = Collider::new(grid_sheet(71, 71, 1.0, 0.0));
    let moving = Collider::new(grid_sheet(71, 71, 1.0, 0.0));
    let pose = RigidPose::rotation_about(Dir3::x_axis(), &Point3::origin(), 0.5);
    let q = ContactQuery::exact(f64::INFINITY);
    c.bench_function("crossing_sheets_10k", |b| {
        b.iter(|| part_contact(&moving, &pose, &[&fixed], &q).unwrap())
    });
}

criterion_group!(benches, bvh_vs_brute, crossing_sheets);
criterion_main!(benches);
