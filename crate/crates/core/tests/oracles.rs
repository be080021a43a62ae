mod oracle;

use articand_core::collision::{feature_distance, gjk_distance, penetration};
use articand_core::eval::{axis_cosine, axis_error, point_error};
use articand_core::geom::{pca_axes, Dir3, Line3, RigidPose};
use articand_core::Point3;
use oracle::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sign_aligned_gap(a: &V, b: &V) -> f64 {
    (a - b).norm().min((a + b).norm())
}

#[test]
fn jacobi_oracle_diagonalizes() {
    let m = [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 1.0]];
    let (vals, vecs) = jacobi_eigen(m);
    let mm = nalgebra::Matrix3::from_fn(|i, j| m[i][j]);
    for k in 0..3 {
        assert!((mm * vecs[k] - vecs[k] * vals[k]).norm() < 1e-12);
    }
    assert!(vals[0] >= vals[1] && vals[1] >= vals[2]);
}

#[test]
fn pca_matches_jacobi() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let pts = random_cloud(&mut rng, 200, [3.0, 1.5, 0.5]);
        let pca = pca_axes(&pts).unwrap();
        let (vals, vecs) = jacobi_eigen(covariance(&pts));
        for k in 0..3 {
            assert!(sign_aligned_gap(&pca.axes[k], &vecs[k]) < 1e-6);
            assert!((pca.eigenvalues[k] - vals[k]).abs() < 1e-9 * vals[0]);
        }
    }
}

#[test]
fn pca_is_rotation_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let pts = random_cloud(&mut rng, 300, [2.0, 1.0, 0.4]);
        let axis = random_unit(&mut rng);
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let rotated: Vec<_> = pts
            .iter()
            .map(|p| Point3::from(quat_rotate(axis, angle, p.coords)))
            .collect();
        let a = pca_axes(&pts).unwrap();
        let b = pca_axes(&rotated).unwrap();
        for k in 0..3 {
            let expect = quat_rotate(axis, angle, a.axes[k].into_inner());
            let ang = expect.dot(&b.axes[k]).abs().min(1.0).acos();
            assert!(ang < 1e-3, "axis {k} off by {ang}");
        }
    }
}

#[test]
fn rotation_matches_quaternions() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..1000 {
        let axis = random_unit(&mut rng);
        let angle = rng.gen_range(-7.0..7.0);
        let pivot = Point3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), 0.3);
        let p = Point3::new(rng.gen_range(-2.0..2.0), 1.0, rng.gen_range(-2.0..2.0));
        let pose = RigidPose::rotation_about(Dir3::new(axis).unwrap(), &pivot, angle);
        let expect = pivot + quat_rotate(axis, angle, p - pivot);
        assert!((pose.apply(&p) - expect).norm() < 1e-12);
    }
}

#[test]
fn separated_distances_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut checked = 0;
    while checked < 500 {
        let a = random_triangle(&mut rng, V::zeros(), 1.0);
        let c = random_unit(&mut rng) * rng.gen_range(0.5..2.5);
        let b = random_triangle(&mut rng, c, 1.0);
        let o = triangle_distance(&a, &b);
        let f = feature_distance(&a, &b);
        if o <= 1e-6 {
            assert!(f <= 1e-6, "feature {f} oracle {o}");
            continue;
        }
        let g = gjk_distance(&a, &RigidPose::identity(), &b).unwrap();
        assert!((o - f).abs() < 1e-7, "feature {f} oracle {o}");
        assert!((o - g).abs() < 1e-7, "gjk {g} oracle {o}");
        checked += 1;
    }
}

#[test]
fn penetration_depth_separates() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 500 {
        let a = random_triangle(&mut rng, V::zeros(), 1.0);
        let c = random_unit(&mut rng) * 0.2;
        let b = random_triangle(&mut rng, c, 1.0);
        if feature_distance(&a, &b) > 0.0 {
            continue;
        }
        let p = penetration(&a, &b).unwrap();
        let shift = p.normal.into_inner() * (p.depth + 1e-6);
        let moved = b.map(|q| q + shift);
        let d = gjk_distance(&a, &RigidPose::identity(), &moved).unwrap();
        assert!(d > 0.0, "depth {} did not separate", p.depth);
        checked += 1;
    }
}

#[test]
fn line_distance_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..2000 {
        let d1 = random_unit(&mut rng);
        let d2 = random_unit(&mut rng);
        let p1 = Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let p2 = Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let a = Line3::new(p1, Dir3::new(d1).unwrap());
        let b = Line3::new(p2, Dir3::new(d2).unwrap());
        let o = line_distance_st(&p1, &d1, &p2, &d2);
        assert!((point_error(&a, &b) - o).abs() < 1e-9);
    }
}

#[test]
fn cosine_agrees_with_raw_axis_error() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..1000 {
        let a = random_unit(&mut rng);
        let b = random_unit(&mut rng);
        let c = axis_cosine(&a, &b).unwrap();
        let e = axis_error(&a, &b, false).unwrap();
        assert!((e.to_radians().cos() - c).abs() < 1e-12);
    }
}
