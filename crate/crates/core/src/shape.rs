//! Segmented shapes, their parts and ground-truth annotations.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geom::{centroid, obb_of, pca_axes, Aabb, Dir3, Obb, Pca, Point3};
use crate::mesh::{part_seed, sample_surface, TriMesh};

/// Optional annotated motion limits. Revolute limits are in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GtRange {
    pub revolute_deg: Option<[f64; 2]>,
    pub prismatic: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthArticulation {
    pub part_id: u32,
    pub m_rev: bool,
    pub m_pri: bool,
    pub axis: Option<Dir3>,
    pub pivot: Option<Point3>,
    pub range: Option<GtRange>,
}

impl GroundTruthArticulation {
    pub fn fixed(part_id: u32) -> Self {
        GroundTruthArticulation {
            part_id,
            m_rev: false,
            m_pri: false,
            axis: None,
            pivot: None,
            range: None,
        }
    }

    pub fn is_movable(&self) -> bool {
        self.m_rev || self.m_pri
    }

    /// The annotation after `norm`: pivots move, prismatic limits scale.
    pub fn normalized(&self, norm: &Normalization) -> Self {
        let mut gt = *self;
        gt.pivot = gt.pivot.map(|p| norm.apply(&p));
        if let Some(r) = &mut gt.range {
            r.prismatic = r.prismatic.map(|[lo, hi]| [lo * norm.scale, hi * norm.scale]);
        }
        gt
    }

    /// Axis present iff some motion bit is set; pivot present iff revolute.
    pub fn validate(&self) -> Result<()> {
        if self.axis.is_some() != self.is_movable() {
            return Err(Error::Validation(format!(
                "part {}: axis must be present iff a motion bit is set",
                self.part_id
            )));
        }
        if self.pivot.is_some() != self.m_rev {
            return Err(Error::Validation(format!(
                "part {}: pivot must be present iff m_rev = 1",
                self.part_id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Part {
    pub id: u32,
    pub mesh: TriMesh,
    /// Dense surface samples; empty until the shape is prepared.
    pub samples: Vec<Point3>,
    pub label: Option<String>,
    pub gt: Option<GroundTruthArticulation>,
    pub obb: Option<Obb>,
    pub aabb: Option<Aabb>,
    /// Set when the part could not be sampled or analysed.
    pub diagnostic: Option<String>,
}

impl Part {
    pub fn new(id: u32, mesh: TriMesh) -> Self {
        Part {
            id,
            mesh,
            samples: Vec::new(),
            label: None,
            gt: None,
            obb: None,
            aabb: None,
            diagnostic: None,
        }
    }
}

/// `normalized = scale * original + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub scale: f64,
    pub offset: Vector3<f64>,
}

impl Default for Normalization {
    fn default() -> Self {
        Normalization {
            scale: 1.0,
            offset: Vector3::zeros(),
        }
    }
}

impl Normalization {
    pub fn apply(&self, p: &Point3) -> Point3 {
        Point3::from(p.coords * self.scale + self.offset)
    }

    /// `self` after `first`.
    pub fn after(&self, first: &Normalization) -> Normalization {
        Normalization {
            scale: self.scale * first.scale,
            offset: first.offset * self.scale + self.offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Shape {
    pub id: String,
    pub parts: Vec<Part>,
    pub normalization: Normalization,
    pub up_axis: String,
}

impl Shape {
    pub fn new(id: impl Into<String>, parts: Vec<Part>) -> Self {
        Shape {
            id: id.into(),
            parts,
            normalization: Normalization::default(),
            up_axis: "y".into(),
        }
    }

    pub fn part(&self, id: u32) -> Option<&Part> {
        self.parts.iter().find(|p| p.id == id)
    }

    pub fn has_ground_truth(&self) -> bool {
        self.parts.iter().any(|p| p.gt.is_some())
    }

    fn all_samples(&self) -> impl Iterator<Item = &Point3> {
        self.parts.iter().flat_map(|p| p.samples.iter())
    }
}

/// Samples every part (seeded per part id), normalizes, and computes each
/// part's principal axes and bounding boxes.
///
/// A part that cannot be sampled or analysed keeps a diagnostic instead of
/// failing the shape; the shape fails only if no part yields samples.
pub fn prepare_shape(mut shape: Shape, sample_count: usize, seed: u64) -> Result<Shape> {
    for part in &mut shape.parts {
        match sample_surface(
            &part.mesh,
            sample_count,
            part_seed(seed, u64::from(part.id)),
        ) {
            Ok(s) => part.samples = s,
            Err(e) => {
                part.samples.clear();
                part.diagnostic = Some(format!("sampling failed: {e}"));
            }
        }
    }
    let mut shape = normalize(shape)?;
    for part in &mut shape.parts {
        analyse_part(part);
    }
    Ok(shape)
}

pub(crate) fn analyse_part(part: &mut Part) {
    part.obb = None;
    part.aabb = None;
    if part.samples.is_empty() {
        return;
    }
    part.aabb = Some(Aabb::from_points(&part.samples));
    match pca_axes(&part.samples).and_then(|pca: Pca| obb_of(&part.samples, &pca)) {
        Ok(obb) => part.obb = Some(obb),
        Err(e) => part.diagnostic = Some(format!("principal axes unavailable: {e}")),
    }
}

/// Uniform scale so the longest side of the union bounding box is 1, then a
/// translation putting the mean of all part samples at the origin.
///
/// Meshes, samples and annotations all move together; the composed transform
/// is recorded in `shape.normalization`.
pub fn normalize(mut shape: Shape) -> Result<Shape> {
    let n_samples = shape.all_samples().count();
    if n_samples == 0 {
        return Err(Error::Degenerate(format!(
            "shape {} has no surface samples to normalize",
            shape.id
        )));
    }
    let bounds = shape
        .parts
        .iter()
        .map(|p| p.mesh.aabb())
        .fold(Aabb::empty(), |a, b| a.union(&b));
    let longest = bounds.extents().max();
    if !(longest > 0.0) || !longest.is_finite() {
        return Err(Error::Degenerate(format!(
            "shape {} has zero extent",
            shape.id
        )));
    }
    let scale = 1.0 / longest;
    let samples: Vec<Point3> = shape.all_samples().copied().collect();
    let c = centroid(&samples);
    let step = Normalization {
        scale,
        offset: -(c.coords * scale),
    };

    for part in &mut shape.parts {
        part.mesh = part.mesh.scaled(step.scale, &step.offset);
        for s in &mut part.samples {
            *s = step.apply(s);
        }
        part.gt = part.gt.map(|gt| gt.normalized(&step));
        if part.obb.is_some() || part.aabb.is_some() {
            analyse_part(part);
        }
    }
    shape.normalization = step.after(&shape.normalization);
    Ok(shape)
}
