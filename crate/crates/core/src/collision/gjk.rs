//! GJK distance between two triangles, treated as closed convex sets.

use crate::error::{Error, Result};
use crate::geom::{Point3, RigidPose, Vec3};

pub type Triangle = [Point3; 3];

pub const MAX_ITERATIONS: usize = 64;

/// Distances at or below this are reported as exact contact (0).
pub const CONTACT_EPS: f64 = 1e-12;

const REL_TOL: f64 = 1e-13;

/// Minkowski difference `A - B` of two triangles.
pub(crate) struct Minkowski<'a> {
    pub a: &'a Triangle,
    pub b: &'a Triangle,
}

impl Minkowski<'_> {
    pub fn support(&self, d: &Vec3) -> Vec3 {
        let pa = self
            .a
            .iter()
            .max_by(|p, q| p.coords.dot(d).total_cmp(&q.coords.dot(d)))
            .unwrap();
        let pb = self
            .b
            .iter()
            .min_by(|p, q| p.coords.dot(d).total_cmp(&q.coords.dot(d)))
            .unwrap();
        pa - pb
    }
}

#[derive(Debug, Clone)]
pub struct GjkOutcome {
    pub distance: f64,
    /// Final simplex on the Minkowski difference; a containing tetrahedron
    /// when the sets intersect and GJK reached full dimension.
    pub simplex: Vec<Vec3>,
}

/// Distance between triangle `a` moved by `pose` and triangle `b`.
pub fn gjk_distance(a: &Triangle, pose: &RigidPose, b: &Triangle) -> Result<f64> {
    let moved = a.map(|p| pose.apply(&p));
    gjk(&moved, b).map(|o| o.distance)
}

pub fn gjk(a: &Triangle, b: &Triangle) -> Result<GjkOutcome> {
    let md = Minkowski { a, b };
    let mut v = a[0] - b[0];
    let mut simplex: Vec<Vec3> = vec![v];

    for _ in 0..MAX_ITERATIONS {
        let vv = v.norm_squared();
        if vv <= CONTACT_EPS * CONTACT_EPS {
            return Ok(GjkOutcome {
                distance: 0.0,
                simplex,
            });
        }
        let w = md.support(&-v);
        if vv - v.dot(&w) <= REL_TOL * vv || simplex.iter().any(|s| *s == w) {
            return Ok(GjkOutcome {
                distance: vv.sqrt(),
                simplex,
            });
        }
        simplex.push(w);
        let (closest, kept) = closest_on_simplex(&simplex);
        simplex = kept;
        if simplex.len() == 4 {
            // A nearly flat tetrahedron can swallow an origin lying just
            // outside it; the exact feature test settles those cases.
            let exact = feature_distance(a, b);
            return Ok(GjkOutcome {
                distance: if exact > CONTACT_EPS { exact } else { 0.0 },
                simplex,
            });
        }
        if closest.norm_squared() >= vv {
            // No progress: v is already optimal up to rounding.
            return Ok(GjkOutcome {
                distance: vv.sqrt(),
                simplex,
            });
        }
        v = closest;
    }
    Err(Error::Numeric(format!(
        "GJK did not converge in {MAX_ITERATIONS} iterations"
    )))
}

/// Closest point of the simplex to the origin and the minimal sub-simplex
/// supporting it. A returned simplex of 4 points means the origin is inside.
pub(crate) fn closest_on_simplex(s: &[Vec3]) -> (Vec3, Vec<Vec3>) {
    match s.len() {
        1 => (s[0], s.to_vec()),
        2 => closest_on_segment(s[0], s[1]),
        3 => closest_on_triangle(s[0], s[1], s[2]),
        4 => closest_on_tetrahedron(s[0], s[1], s[2], s[3]),
        n => unreachable!("simplex of size {n}"),
    }
}

fn closest_on_segment(a: Vec3, b: Vec3) -> (Vec3, Vec<Vec3>) {
    let ab = b - a;
    let denom = ab.norm_squared();
    if denom <= f64::MIN_POSITIVE {
        return (a, vec![a]);
    }
    let t = -a.dot(&ab) / denom;
    if t <= 0.0 {
        (a, vec![a])
    } else if t >= 1.0 {
        (b, vec![b])
    } else {
        (a + ab * t, vec![a, b])
    }
}

/// Voronoi-region closest point of triangle `abc` to the origin.
fn closest_on_triangle(a: Vec3, b: Vec3, c: Vec3) -> (Vec3, Vec<Vec3>) {
    let ab = b - a;
    let ac = c - a;
    let ap = -a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (a, vec![a]);
    }
    let bp = -b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (b, vec![b]);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (a + ab * v, vec![a, b]);
    }
    let cp = -c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (c, vec![c]);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (a + ac * w, vec![a, c]);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + (c - b) * w, vec![b, c]);
    }
    let denom = va + vb + vc;
    if !(denom.abs() > f64::MIN_POSITIVE) || !denom.is_finite() {
        // Collinear triangle: best of its edges.
        return [
            closest_on_segment(a, b),
            closest_on_segment(b, c),
            closest_on_segment(a, c),
        ]
        .into_iter()
        .min_by(|x, y| x.0.norm_squared().total_cmp(&y.0.norm_squared()))
        .unwrap();
    }
    let v = vb / denom;
    let w = vc / denom;
    (a + ab * v + ac * w, vec![a, b, c])
}

fn closest_on_tetrahedron(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> (Vec3, Vec<Vec3>) {
    let faces = [(a, b, c, d), (a, c, d, b), (a, d, b, c), (b, d, c, a)];
    let mut best: Option<(Vec3, Vec<Vec3>)> = None;
    let mut inside = true;
    for (p, q, r, opposite) in faces {
        if origin_outside_face(p, q, r, opposite) {
            inside = false;
            let cand = closest_on_triangle(p, q, r);
            if best
                .as_ref()
                .is_none_or(|b| cand.0.norm_squared() < b.0.norm_squared())
            {
                best = Some(cand);
            }
        }
    }
    if inside {
        return (Vec3::zeros(), vec![a, b, c, d]);
    }
    best.unwrap()
}

/// True if the origin and `opposite` lie strictly on different sides of plane `pqr`.
fn origin_outside_face(p: Vec3, q: Vec3, r: Vec3, opposite: Vec3) -> bool {
    let n = (q - p).cross(&(r - p));
    let sign_o = (-p).dot(&n);
    let sign_d = (opposite - p).dot(&n);
    if sign_d.abs() <= f64::MIN_POSITIVE {
        // Flat tetrahedron: treat every face as a candidate.
        return true;
    }
    sign_o * sign_d < 0.0
}

/// Exact triangle-triangle distance by enumerating feature pairs: 6
/// vertex-face and 9 edge-edge candidates plus an edge-crossing test for
/// intersection. Used when GJK fails to converge.
pub fn feature_distance(a: &Triangle, b: &Triangle) -> f64 {
    for i in 0..3 {
        let (p, q) = (a[i], a[(i + 1) % 3]);
        if segment_hits_triangle(&p, &q, b) {
            return 0.0;
        }
        let (p, q) = (b[i], b[(i + 1) % 3]);
        if segment_hits_triangle(&p, &q, a) {
            return 0.0;
        }
    }
    let mut best = f64::INFINITY;
    for i in 0..3 {
        best = best.min(point_triangle_distance(&a[i], b));
        best = best.min(point_triangle_distance(&b[i], a));
        for j in 0..3 {
            let d = segment_segment_distance(&a[i], &a[(i + 1) % 3], &b[j], &b[(j + 1) % 3]);
            best = best.min(d);
        }
    }
    best
}

pub(crate) fn point_triangle_distance(p: &Point3, t: &Triangle) -> f64 {
    let (c, _) = closest_on_triangle(t[0] - p, t[1] - p, t[2] - p);
    c.norm()
}

pub(crate) fn segment_segment_distance(p1: &Point3, q1: &Point3, p2: &Point3, q2: &Point3) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let (s, t);
    if a <= f64::MIN_POSITIVE && e <= f64::MIN_POSITIVE {
        return r.norm();
    }
    if a <= f64::MIN_POSITIVE {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= f64::MIN_POSITIVE {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

/// Closed segment vs closed triangle intersection.
pub(crate) fn segment_hits_triangle(p: &Point3, q: &Point3, t: &Triangle) -> bool {
    let n = (t[1] - t[0]).cross(&(t[2] - t[0]));
    let dp = n.dot(&(p - t[0]));
    let dq = n.dot(&(q - t[0]));
    if dp * dq > 0.0 {
        return false;
    }
    if dp == 0.0 && dq == 0.0 {
        // Coplanar: handled by the distance enumeration (distance 0 there).
        return false;
    }
    let s = dp / (dp - dq);
    let x = p + (q - p) * s;
    let (c, _) = closest_on_triangle(t[0] - x, t[1] - x, t[2] - x);
    c.norm() <= CONTACT_EPS
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> Triangle {
        [Point3::from(a), Point3::from(b), Point3::from(c)]
    }

    #[test]
    fn parallel_offset() {
        let a = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let b = a.map(|p| p + Vec3::new(0.0, 0.0, 0.5));
        let d = gjk_distance(&a, &RigidPose::identity(), &b).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identical_is_zero() {
        let a = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.3]);
        assert_eq!(gjk(&a, &a).unwrap().distance, 0.0);
    }

    #[test]
    fn pose_is_applied_to_first() {
        let a = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let pose = RigidPose::translation(Vec3::new(0.0, 0.0, 0.25));
        let d = gjk_distance(&a, &pose, &a).unwrap();
        assert!((d - 0.25).abs() < 1e-12);
    }

    #[test]
    fn feature_distance_agrees_on_skew_edges() {
        let a = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, -1.0, 0.0]);
        let b = tri([0.5, 0.5, -1.0], [0.5, 0.5, 1.0], [0.5, 2.0, 0.0]);
        let f = feature_distance(&a, &b);
        let g = gjk(&a, &b).unwrap().distance;
        assert!((f - 0.5).abs() < 1e-12);
        assert!((g - f).abs() < 1e-9, "gjk {g} feature {f}");
    }

    #[test]
    fn crossing_triangles_intersect() {
        let a = tri([-1.0, -1.0, 0.0], [1.0, -1.0, 0.0], [0.0, 1.0, 0.0]);
        let b = tri([0.0, 0.0, -1.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.5]);
        assert_eq!(gjk(&a, &b).unwrap().distance, 0.0);
        assert_eq!(feature_distance(&a, &b), 0.0);
    }
}
