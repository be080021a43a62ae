//! Indexed triangle meshes and area-weighted surface sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::{Aabb, Point3, RigidPose};

pub const DEFAULT_SAMPLE_COUNT: usize = 4096;

/// Triangles below this area are skipped by the narrow phase.
pub const DEGENERATE_AREA: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Point3>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriMesh {
    /// Checks index bounds, finiteness and non-emptiness.
    pub fn new(vertices: Vec<Point3>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        let mesh = TriMesh {
            vertices,
            triangles,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn validate(&self) -> Result<()> {
        if self.triangles.is_empty() {
            return Err(Error::Validation("mesh has no triangles".into()));
        }
        if let Some(p) = self
            .vertices
            .iter()
            .find(|p| !p.iter().all(|c| c.is_finite()))
        {
            return Err(Error::Validation(format!(
                "non-finite vertex {:?}",
                p.coords.as_slice()
            )));
        }
        let n = self.vertices.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            if let Some(i) = tri.iter().find(|&&i| i as usize >= n) {
                return Err(Error::Validation(format!(
                    "triangle {t} references vertex {i} but mesh has {n} vertices"
                )));
            }
        }
        Ok(())
    }

    pub fn triangle(&self, t: usize) -> [Point3; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle(t);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| self.triangle_area(t))
            .sum()
    }

    /// Indices of zero-area triangles.
    pub fn degenerate_triangles(&self) -> Vec<usize> {
        (0..self.triangles.len())
            .filter(|&t| self.triangle_area(t) <= DEGENERATE_AREA)
            .collect()
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(&self.vertices)
    }

    pub fn transformed(&self, pose: &RigidPose) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|p| pose.apply(p)).collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// `p -> scale * p + offset` applied to every vertex.
    pub fn scaled(&self, scale: f64, offset: &nalgebra::Vector3<f64>) -> TriMesh {
        TriMesh {
            vertices: self
                .vertices
                .iter()
                .map(|p| Point3::from(p.coords * scale + offset))
                .collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Concatenates meshes into one triangle soup.
    pub fn merged<'a>(meshes: impl IntoIterator<Item = &'a TriMesh>) -> TriMesh {
        let mut out = TriMesh {
            vertices: Vec::new(),
            triangles: Vec::new(),
        };
        for m in meshes {
            let base = out.vertices.len() as u32;
            out.vertices.extend_from_slice(&m.vertices);
            out.triangles.extend(
                m.triangles
                    .iter()
                    .map(|t| [t[0] + base, t[1] + base, t[2] + base]),
            );
        }
        out
    }
}

/// Area-weighted uniform samples on the mesh surface, deterministic in `seed`.
pub fn sample_surface(mesh: &TriMesh, count: usize, seed: u64) -> Result<Vec<Point3>> {
    if count == 0 {
        return Err(Error::InvalidInput(
            "sample count must be at least 1".into(),
        ));
    }
    let mut cdf = Vec::with_capacity(mesh.triangles.len());
    let mut acc = 0.0;
    for t in 0..mesh.triangles.len() {
        acc += mesh.triangle_area(t);
        cdf.push(acc);
    }
    if !(acc > DEGENERATE_AREA) {
        return Err(Error::Degenerate(format!(
            "mesh has zero total area ({acc})"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let u: f64 = rng.gen::<f64>() * acc;
        let t = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        let [a, b, c] = mesh.triangle(t);
        let r1: f64 = rng.gen();
        let r2: f64 = rng.gen();
        let s = r1.sqrt();
        let p = a.coords * (1.0 - s) + b.coords * (s * (1.0 - r2)) + c.coords * (s * r2);
        out.push(Point3::from(p));
    }
    Ok(out)
}

/// Per-part seed: the global seed mixed with the part id through splitmix64.
pub fn part_seed(seed: u64, part_id: u64) -> u64 {
    let mut z = seed ^ part_id.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
