//! Small fixed-size 3D geometry: directions, rigid poses, principal axes,
//! bounding boxes and infinite lines.
//!
//! Everything here works in `f64` and in the normalized model space of a
//! shape. Angles are radians.

use std::cmp::Ordering;
use std::ops::{Deref, Neg};

use nalgebra::{Matrix3, SymmetricEigen};

use crate::error::{Error, Result};

pub type Point3 = nalgebra::Point3<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;

/// Tolerance on `|v| - 1` for a vector to be accepted as a direction.
pub const UNIT_TOLERANCE: f64 = 1e-9;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 512;

/// A unit-length direction in 3-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dir3(Vec3);

impl Dir3 {
    /// Accepts `v` only if it is finite and unit length within [`UNIT_TOLERANCE`].
    pub fn new(v: Vec3) -> Result<Self> {
        if !v.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite direction {v:?}")));
        }
        let n = v.norm();
        if (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "direction {:?} is not unit length (norm {n})",
                v.as_slice()
            )));
        }
        Ok(Dir3(v))
    }

    /// Normalizes `v`; fails on zero or non-finite input.
    pub fn normalize(v: Vec3) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n <= f64::MIN_POSITIVE {
            return Err(Error::InvalidInput(format!(
                "cannot normalize {:?}",
                v.as_slice()
            )));
        }
        Ok(Dir3(v / n))
    }

    pub fn from_xyz(x: f64, y: f64, z: f64) -> Result<Self> {
        Dir3::new(Vec3::new(x, y, z))
    }

    pub const fn x_axis() -> Self {
        Dir3(Vec3::new(1.0, 0.0, 0.0))
    }

    pub const fn y_axis() -> Self {
        Dir3(Vec3::new(0.0, 1.0, 0.0))
    }

    pub const fn z_axis() -> Self {
        Dir3(Vec3::new(0.0, 0.0, 1.0))
    }

    pub fn into_inner(self) -> Vec3 {
        self.0
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }
}

impl Deref for Dir3 {
    type Target = Vec3;

    fn deref(&self) -> &Vec3 {
        &self.0
    }
}

impl Neg for Dir3 {
    type Output = Dir3;

    fn neg(self) -> Dir3 {
        Dir3(-self.0)
    }
}

/// Rotation followed by translation: `p -> R p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidPose {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl Default for RigidPose {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidPose {
    pub fn identity() -> Self {
        RigidPose {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn translation(t: Vec3) -> Self {
        RigidPose {
            rotation: Matrix3::identity(),
            translation: t,
        }
    }

    /// Rotation by `angle` about the line through `pivot` along `axis`.
    pub fn rotation_about(axis: Dir3, pivot: &Point3, angle: f64) -> Self {
        let rotation = rodrigues_matrix(axis, angle);
        let translation = pivot.coords - rotation * pivot.coords;
        RigidPose {
            rotation,
            translation,
        }
    }

    pub fn apply(&self, p: &Point3) -> Point3 {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn apply_vec(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        RigidPose {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &RigidPose) -> Self {
        RigidPose {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.rotation == Matrix3::identity() && self.translation == Vec3::zeros()
    }
}

fn rodrigues_matrix(axis: Dir3, angle: f64) -> Matrix3<f64> {
    let k = Matrix3::new(
        0.0, -axis.z, axis.y, //
        axis.z, 0.0, -axis.x, //
        -axis.y, axis.x, 0.0,
    );
    let (s, c) = angle.sin_cos();
    Matrix3::identity() + k * s + (k * k) * (1.0 - c)
}

/// Principal axes of a point set, strongest first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pca {
    pub axes: [Dir3; 3],
    pub eigenvalues: [f64; 3],
}

/// PCA of the population covariance of `points`.
///
/// Axes are sign-canonicalized so that their largest-magnitude component is
/// positive (earliest coordinate wins ties), sorted by descending eigenvalue
/// with near-equal eigenvalues ordered lexicographically by axis, and the third
/// axis is replaced by the cross product of the first two so the frame is
/// right-handed.
pub fn pca_axes(points: &[Point3]) -> Result<Pca> {
    if points.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "PCA needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
        return Err(Error::InvalidInput("non-finite point in PCA input".into()));
    }
    let cov = covariance(points);
    let eig = SymmetricEigen::try_new(cov, EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))?;

    let mut pairs: Vec<(f64, Vec3)> = (0..3)
        .map(|i| {
            let v = eig.eigenvectors.column(i).into_owned().normalize();
            (eig.eigenvalues[i].max(0.0), canonical_sign(v))
        })
        .collect();
    let scale = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
    let tie = 1e-10 * scale.max(f64::MIN_POSITIVE);
    pairs.sort_by(|a, b| {
        if (a.0 - b.0).abs() <= tie {
            lexicographic(&a.1, &b.1)
        } else {
            b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal)
        }
    });

    let a0 = pairs[0].1;
    let a1 = pairs[1].1;
    let a2 = a0.cross(&a1).normalize();
    Ok(Pca {
        axes: [Dir3(a0), Dir3(a1), Dir3(a2)],
        eigenvalues: [pairs[0].0, pairs[1].0, pairs[2].0],
    })
}

fn covariance(points: &[Point3]) -> Matrix3<f64> {
    let n = points.len() as f64;
    let mean = points.iter().fold(Vec3::zeros(), |acc, p| acc + p.coords) / n;
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p.coords - mean;
        cov += d * d.transpose();
    }
    cov / n
}

fn canonical_sign(v: Vec3) -> Vec3 {
    let mut best = 0;
    for i in 1..3 {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        -v
    } else {
        v
    }
}

fn lexicographic(a: &Vec3, b: &Vec3) -> Ordering {
    for i in 0..3 {
        match a[i].partial_cmp(&b[i]) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    Ordering::Equal
}

/// Oriented bounding box aligned with a part's principal axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obb {
    pub center: Point3,
    pub axes: [Dir3; 3],
    pub half_extents: [f64; 3],
    pub eigenvalues: [f64; 3],
}

impl Obb {
    /// Largest full side length, the length scale used by the range thresholds.
    pub fn max_extent(&self) -> f64 {
        2.0 * self.half_extents.iter().copied().fold(0.0, f64::max)
    }
}

pub fn obb_of(points: &[Point3], pca: &Pca) -> Result<Obb> {
    if points.is_empty() {
        return Err(Error::InvalidInput("OBB of an empty point set".into()));
    }
    let mut center = Vec3::zeros();
    let mut half_extents = [0.0; 3];
    for (i, axis) in pca.axes.iter().enumerate() {
        let (lo, hi) = points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                let s = p.coords.dot(axis);
                (lo.min(s), hi.max(s))
            });
        half_extents[i] = 0.5 * (hi - lo);
        center += **axis * (0.5 * (hi + lo));
    }
    Ok(Obb {
        center: Point3::from(center),
        axes: pca.axes,
        half_extents,
        eigenvalues: pca.eigenvalues,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn empty() -> Self {
        Aabb {
            min: Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Point3>) -> Self {
        let mut b = Aabb::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|i| self.min[i] > self.max[i])
    }

    pub fn grow(&mut self, p: &Point3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn contains(&self, other: &Aabb) -> bool {
        (0..3).all(|i| self.min[i] <= other.min[i] && self.max[i] >= other.max[i])
    }

    pub fn extents(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn center(&self) -> Point3 {
        nalgebra::center(&self.min, &self.max)
    }

    pub fn longest_axis(&self) -> usize {
        let e = self.extents();
        if e.x >= e.y && e.x >= e.z {
            0
        } else if e.y >= e.z {
            1
        } else {
            2
        }
    }

    /// Corner `i` takes `max` on axis `k` iff bit `k` of `i` is set.
    pub fn corner(&self, i: usize) -> Point3 {
        Point3::new(
            if i & 1 == 0 { self.min.x } else { self.max.x },
            if i & 2 == 0 { self.min.y } else { self.max.y },
            if i & 4 == 0 { self.min.z } else { self.max.z },
        )
    }

    pub fn corners(&self) -> [Point3; 8] {
        std::array::from_fn(|i| self.corner(i))
    }

    /// Euclidean gap between the boxes, 0 when they overlap or touch.
    pub fn distance(&self, other: &Aabb) -> f64 {
        let mut sq = 0.0;
        for i in 0..3 {
            let gap = (other.min[i] - self.max[i]).max(self.min[i] - other.max[i]);
            if gap > 0.0 {
                sq += gap * gap;
            }
        }
        sq.sqrt()
    }

    /// Box of the transformed corners, which encloses the transformed box.
    pub fn transformed(&self, pose: &RigidPose) -> Aabb {
        let c = pose.apply(&self.center());
        let h = self.extents() * 0.5;
        let r = pose.rotation.abs() * h;
        Aabb {
            min: c - r,
            max: c + r,
        }
    }
}

/// The 8 corners of the axis-aligned box of `points` followed by their mean.
pub fn aabb_pivots(points: &[Point3]) -> Result<Vec<Point3>> {
    if points.is_empty() {
        return Err(Error::InvalidInput("pivots of an empty point set".into()));
    }
    let b = Aabb::from_points(points);
    let mut out: Vec<Point3> = b.corners().to_vec();
    out.push(centroid(points));
    Ok(out)
}

pub fn centroid(points: &[Point3]) -> Point3 {
    let sum = points.iter().fold(Vec3::zeros(), |acc, p| acc + p.coords);
    Point3::from(sum / points.len() as f64)
}

/// Rotates `p` by `angle` about the line through `pivot` along `axis`.
pub fn rotate_about(p: &Point3, axis: Dir3, pivot: &Point3, angle: f64) -> Point3 {
    let v = p - pivot;
    let (s, c) = angle.sin_cos();
    let k = *axis;
    let r = v * c + k.cross(&v) * s + k * (k.dot(&v) * (1.0 - c));
    pivot + r
}

pub fn translate_along(p: &Point3, axis: Dir3, t: f64) -> Point3 {
    p + *axis * t
}

/// An infinite line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line3 {
    pub origin: Point3,
    pub direction: Dir3,
}

impl Line3 {
    pub fn new(origin: Point3, direction: Dir3) -> Self {
        Line3 { origin, direction }
    }

    pub fn distance_to_point(&self, p: &Point3) -> f64 {
        let w = p - self.origin;
        (w - *self.direction * w.dot(&self.direction)).norm()
    }
}

pub fn line_line_distance(a: &Line3, b: &Line3) -> f64 {
    let n = a.direction.cross(&b.direction);
    let n_norm = n.norm();
    if n_norm < 1e-12 {
        return a.distance_to_point(&b.origin);
    }
    let w = b.origin - a.origin;
    (w.dot(&n) / n_norm).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn box_grid(h: [f64; 3], n: usize) -> Vec<Point3> {
        let mut pts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let f = |t: usize, e: f64| -e + 2.0 * e * t as f64 / (n - 1) as f64;
                    pts.push(Point3::new(f(i, h[0]), f(j, h[1]), f(k, h[2])));
                }
            }
        }
        pts
    }

    #[test]
    fn dir_rejects_non_unit() {
        assert!(Dir3::from_xyz(1.0, 1.0, 0.0).is_err());
        assert!(Dir3::from_xyz(f64::NAN, 0.0, 0.0).is_err());
        assert!(Dir3::normalize(Vec3::zeros()).is_err());
        assert!(Dir3::from_xyz(0.0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn pca_axis_aligned_box() {
        let pca = pca_axes(&box_grid([0.5, 0.25, 0.1], 12)).unwrap();
        let expect = [Vec3::x(), Vec3::y(), Vec3::z()];
        for (axis, e) in pca.axes.iter().zip(expect) {
            assert!(axis.dot(&e).abs().acos() < 2f64.to_radians());
        }
        assert!(pca.eigenvalues[0] >= pca.eigenvalues[1]);
        assert!(pca.eigenvalues[1] >= pca.eigenvalues[2]);
    }

    #[test]
    fn pca_collinear() {
        let pts: Vec<_> = (0..10).map(|i| Point3::new(0.0, 0.0, i as f64)).collect();
        let pca = pca_axes(&pts).unwrap();
        assert!((pca.axes[0].into_inner() - Vec3::z()).norm() < 1e-12);
        assert!(pca.eigenvalues[1].abs() < 1e-12);
        assert!(pca.eigenvalues[2].abs() < 1e-12);
    }

    #[test]
    fn pca_needs_three_points() {
        let pts = vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0)];
        assert!(matches!(pca_axes(&pts), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn pca_frame_is_right_handed() {
        let pca = pca_axes(&box_grid([0.3, 0.9, 0.5], 8)).unwrap();
        let [a, b, c] = pca.axes;
        assert!((a.cross(&b) - *c).norm() < 1e-12);
    }

    #[test]
    fn obb_unit_cube_and_segment() {
        let pts = box_grid([0.5, 0.5, 0.5], 5);
        let pca = pca_axes(&pts).unwrap();
        let obb = obb_of(&pts, &pca).unwrap();
        for h in obb.half_extents {
            assert!((h - 0.5).abs() < 1e-12);
        }
        assert!((obb.max_extent() - 1.0).abs() < 1e-12);

        let seg: Vec<_> = (0..=20)
            .map(|i| Point3::new(0.0, 0.0, i as f64 * 0.1))
            .collect();
        let obb = obb_of(&seg, &pca_axes(&seg).unwrap()).unwrap();
        assert!((obb.max_extent() - 2.0).abs() < 1e-12);
        assert!(obb.half_extents[1].abs() < 1e-12 && obb.half_extents[2].abs() < 1e-12);
        assert!((obb.center - Point3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn obb_empty_is_error() {
        let pca = pca_axes(&box_grid([1.0, 1.0, 1.0], 3)).unwrap();
        assert!(obb_of(&[], &pca).is_err());
    }

    #[test]
    fn pivots_of_unit_cube() {
        let pts = box_grid([0.5, 0.5, 0.5], 3)
            .into_iter()
            .map(|p| p + Vec3::repeat(0.5))
            .collect::<Vec<_>>();
        let piv = aabb_pivots(&pts).unwrap();
        assert_eq!(piv.len(), 9);
        assert_eq!(piv[0], Point3::new(0.0, 0.0, 0.0));
        assert_eq!(piv[7], Point3::new(1.0, 1.0, 1.0));
        assert_eq!(piv[1], Point3::new(1.0, 0.0, 0.0));
        assert!((piv[8] - Point3::new(0.5, 0.5, 0.5)).norm() < 1e-12);

        let p = Point3::new(0.3, -2.0, 7.0);
        assert!(aabb_pivots(&[p]).unwrap().iter().all(|q| *q == p));
        assert!(aabb_pivots(&[]).is_err());
    }

    #[test]
    fn rotation_basics() {
        let p = rotate_about(
            &Point3::new(1.0, 0.0, 0.0),
            Dir3::z_axis(),
            &Point3::origin(),
            FRAC_PI_2,
        );
        assert!((p - Point3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
        let pivot = Point3::new(0.2, -0.4, 3.0);
        let q = rotate_about(
            &pivot,
            Dir3::normalize(Vec3::new(1.0, 2.0, 3.0)).unwrap(),
            &pivot,
            1.234,
        );
        assert_eq!(q, pivot);

        let pose = RigidPose::rotation_about(Dir3::z_axis(), &Point3::origin(), PI);
        let expect = Matrix3::new(-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0);
        assert!((pose.rotation - expect).norm() < 1e-15);
        assert!((pose.rotation.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn translate_inverse() {
        let p = Point3::new(0.1, 0.2, 0.3);
        let q = translate_along(&p, Dir3::x_axis(), 0.3);
        assert!((q - Point3::new(0.4, 0.2, 0.3)).norm() < 1e-15);
        assert_eq!(translate_along(&p, Dir3::x_axis(), 0.0), p);
        let back = translate_along(&q, Dir3::x_axis(), -0.3);
        assert!((back - p).norm() <= 1e-15);
    }

    #[test]
    fn line_distances() {
        let a = Line3::new(Point3::origin(), Dir3::z_axis());
        let b = Line3::new(Point3::new(0.06, 0.0, 0.0), Dir3::z_axis());
        assert!((line_line_distance(&a, &b) - 0.06).abs() < 1e-15);
        let c = Line3::new(Point3::new(0.0, 0.0, 0.5), Dir3::x_axis());
        assert!(line_line_distance(&a, &c).abs() < 1e-15);
        let d = Line3::new(Point3::origin(), Dir3::x_axis());
        let e = Line3::new(Point3::new(0.0, 0.0, 1.0), Dir3::y_axis());
        assert!((line_line_distance(&d, &e) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn transformed_aabb_encloses_corners() {
        let b = Aabb {
            min: Point3::new(-0.1, 0.2, 0.0),
            max: Point3::new(0.4, 0.9, 0.3),
        };
        let pose = RigidPose::rotation_about(
            Dir3::normalize(Vec3::new(0.3, -1.0, 0.7)).unwrap(),
            &Point3::new(1.0, 0.0, 0.0),
            0.8,
        );
        let t = b.transformed(&pose);
        for c in b.corners() {
            let q = pose.apply(&c);
            for i in 0..3 {
                assert!(q[i] >= t.min[i] - 1e-12 && q[i] <= t.max[i] + 1e-12);
            }
        }
    }

    #[test]
    fn pose_inverse_roundtrip() {
        let pose = RigidPose::rotation_about(
            Dir3::normalize(Vec3::new(1.0, 1.0, 0.0)).unwrap(),
            &Point3::new(0.0, 2.0, 0.0),
            0.4,
        );
        let p = Point3::new(0.3, 0.1, -0.7);
        let back = pose.inverse().apply(&pose.apply(&p));
        assert!((back - p).norm() < 1e-14);
    }
}
