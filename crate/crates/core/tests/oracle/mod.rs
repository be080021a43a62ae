//! Independent reference computations shared by integration tests.
#![allow(dead_code)]

use nalgebra::{Point3, Vector3};
use rand::Rng;

pub type P = Point3<f64>;
pub type V = Vector3<f64>;

/// Cyclic Jacobi eigendecomposition of a symmetric 3x3 matrix.
/// Returns eigenvalues in descending order with unit eigenvectors.
pub fn jacobi_eigen(m: [[f64; 3]; 3]) -> ([f64; 3], [V; 3]) {
    let mut a = m;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _ in 0..100 {
        let off = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
        if off < 1e-40 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q].abs() < 1e-300 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            // A' = J^T A J with J the (p, q) rotation.
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    let mut idx = [0, 1, 2];
    idx.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let vals = idx.map(|i| a[i][i]);
    let vecs = idx.map(|i| V::new(v[0][i], v[1][i], v[2][i]).normalize());
    (vals, vecs)
}

pub fn covariance(points: &[P]) -> [[f64; 3]; 3] {
    let n = points.len() as f64;
    let mut mean = [0.0; 3];
    for p in points {
        for i in 0..3 {
            mean[i] += p[i] / n;
        }
    }
    let mut c = [[0.0; 3]; 3];
    for p in points {
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] += (p[i] - mean[i]) * (p[j] - mean[j]) / n;
            }
        }
    }
    c
}

/// Rotation of `v` by `angle` about unit `axis`, via quaternion product.
pub fn quat_rotate(axis: V, angle: f64, v: V) -> V {
    let (s, w) = (0.5 * angle).sin_cos();
    let q = axis * s;
    // q v q* with q = (w, q)
    let t = q.cross(&v) * 2.0;
    v + t * w + q.cross(&t)
}

/// Anisotropic Gaussian-ish cloud, randomly rotated and shifted.
pub fn random_cloud<R: Rng>(rng: &mut R, n: usize, scales: [f64; 3]) -> Vec<P> {
    let axis = random_unit(rng);
    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
    let shift = V::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
    (0..n)
        .map(|_| {
            let local = V::new(
                scales[0] * rng.gen_range(-1.0..1.0),
                scales[1] * rng.gen_range(-1.0..1.0),
                scales[2] * rng.gen_range(-1.0..1.0),
            );
            P::from(quat_rotate(axis, angle, local) + shift)
        })
        .collect()
}

pub fn random_unit<R: Rng>(rng: &mut R) -> V {
    loop {
        let v = V::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

pub fn random_triangle<R: Rng>(rng: &mut R, center: V, size: f64) -> [P; 3] {
    [0, 1, 2].map(|_| {
        P::from(
            center
                + V::new(
                    rng.gen_range(-size..size),
                    rng.gen_range(-size..size),
                    rng.gen_range(-size..size),
                ),
        )
    })
}

fn golden_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    f(lo).min(f(hi)).min(fc).min(fd)
}

pub fn point_segment(p: &P, a: &P, b: &P) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Projection onto the plane when it lands inside, else nearest edge.
pub fn point_triangle(p: &P, t: &[P; 3]) -> f64 {
    let n = (t[1] - t[0]).cross(&(t[2] - t[0]));
    let nn = n.norm_squared();
    let proj = p - n * ((p - t[0]).dot(&n) / nn);
    let inside = (0..3).all(|i| {
        let e = t[(i + 1) % 3] - t[i];
        e.cross(&(proj - t[i])).dot(&n) >= 0.0
    });
    if inside {
        return (p - proj).norm();
    }
    (0..3)
        .map(|i| point_segment(p, &t[i], &t[(i + 1) % 3]))
        .fold(f64::INFINITY, f64::min)
}

/// Segment-segment distance by 1-D convex minimization over the first
/// segment's parameter.
pub fn segment_segment(a0: &P, a1: &P, b0: &P, b1: &P) -> f64 {
    golden_min(|s| point_segment(&(a0 + (a1 - a0) * s), b0, b1), 0.0, 1.0)
}

/// Where segment `p q` crosses the plane of `t`, by linear interpolation of
/// the signed heights; `None` if both ends lie strictly on one side.
fn plane_crossing(p: &P, q: &P, t: &[P; 3]) -> Option<P> {
    let n = (t[1] - t[0]).cross(&(t[2] - t[0]));
    let (hp, hq) = ((p - t[0]).dot(&n), (q - t[0]).dot(&n));
    if hp * hq > 0.0 || hp == hq {
        return None;
    }
    Some(p + (q - p) * (hp / (hp - hq)))
}

/// True when some edge of either triangle passes through the other.
pub fn triangles_cross(a: &[P; 3], b: &[P; 3]) -> bool {
    let pierces = |s: &[P; 3], t: &[P; 3]| {
        (0..3).any(|i| {
            plane_crossing(&s[i], &s[(i + 1) % 3], t).is_some_and(|x| point_triangle(&x, t) < 1e-12)
        })
    };
    pierces(a, b) || pierces(b, a)
}

/// Triangle distance: zero for crossing pairs, otherwise the closest pair is
/// a vertex-face or an edge-edge pair.
pub fn triangle_distance(a: &[P; 3], b: &[P; 3]) -> f64 {
    if triangles_cross(a, b) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for i in 0..3 {
        best = best.min(point_triangle(&a[i], b));
        best = best.min(point_triangle(&b[i], a));
        for j in 0..3 {
            best = best.min(segment_segment(&a[i], &a[(i + 1) % 3], &b[j], &b[(j + 1) % 3]));
        }
    }
    best
}

/// Line-line distance by solving the 2x2 normal equations for the closest
/// parameters `(s, t)`.
pub fn line_distance_st(p1: &P, d1: &V, p2: &P, d2: &V) -> f64 {
    let r = p1 - p2;
    let a = d1.dot(d1);
    let b = d1.dot(d2);
    let c = d2.dot(d2);
    let d = d1.dot(&r);
    let e = d2.dot(&r);
    let det = a * c - b * b;
    let (s, t) = if det.abs() < 1e-14 {
        (0.0, e / c)
    } else {
        ((b * e - c * d) / det, (a * e - b * d) / det)
    };
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}
