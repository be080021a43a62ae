//! Mesh-level distance and penetration between a posed moving part and a set
//! of static parts.
//!
//! Meshes are triangle soups: the mesh distance is the minimum over triangle
//! pairs and the mesh penetration is the largest pairwise EPA depth.

use crate::error::Result;
use crate::geom::{Point3, RigidPose};
use crate::mesh::{TriMesh, DEGENERATE_AREA};

use super::bvh::{Bvh, NodeKind};
use super::epa::{epa, sat_penetration};
use super::gjk::{feature_distance, gjk, Triangle, CONTACT_EPS};

/// A mesh with its hierarchy, ready for queries.
#[derive(Debug, Clone)]
pub struct Collider {
    pub mesh: TriMesh,
    pub bvh: Bvh,
    skip: Vec<bool>,
}

impl Collider {
    pub fn new(mesh: TriMesh) -> Self {
        let bvh = Bvh::build(&mesh);
        let skip = (0..mesh.triangles.len())
            .map(|t| mesh.triangle_area(t) <= DEGENERATE_AREA)
            .collect();
        Collider { mesh, bvh, skip }
    }

    fn tri(&self, vertices: &[Point3], t: usize) -> Triangle {
        let [a, b, c] = self.mesh.triangles[t];
        [
            vertices[a as usize],
            vertices[b as usize],
            vertices[c as usize],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    /// Index into the static list.
    pub static_part: usize,
    pub moving_triangle: u32,
    pub static_triangle: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactReport {
    /// Exact minimum distance, clamped at the query cutoff.
    pub min_distance: f64,
    pub max_penetration: f64,
    /// Deepest penetrating pair, or the closest pair when nothing penetrates.
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactClass {
    Free,
    Contact,
    Collision,
}

impl ContactReport {
    /// Collision above `eps` penetration, free above `eps` separation,
    /// contact otherwise.
    pub fn classify(&self, eps: f64) -> ContactClass {
        if self.max_penetration > eps {
            ContactClass::Collision
        } else if self.min_distance > eps {
            ContactClass::Free
        } else {
            ContactClass::Contact
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactQuery {
    pub cutoff: f64,
    /// Stop as soon as some pair penetrates deeper than this.
    pub stop_penetration: Option<f64>,
}

impl ContactQuery {
    pub fn exact(cutoff: f64) -> Self {
        ContactQuery {
            cutoff,
            stop_penetration: None,
        }
    }
}

/// Instrumentation counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ContactStats {
    /// Triangle pairs handed to the narrow phase.
    pub triangle_pairs: u64,
    pub node_pairs: u64,
}

#[derive(Debug)]
struct Accum {
    best: f64,
    pen: f64,
    closest: Option<Witness>,
    deepest: Option<Witness>,
    stop: Option<f64>,
}

impl Accum {
    fn new(cutoff: f64, stop: Option<f64>) -> Self {
        Accum {
            best: cutoff,
            pen: 0.0,
            closest: None,
            deepest: None,
            stop,
        }
    }

    fn done(&self) -> bool {
        self.stop.is_some_and(|s| self.pen > s)
    }

    fn visit(&mut self, a: &Triangle, b: &Triangle, w: Witness) -> Result<()> {
        let (d, depth) = narrow_phase(a, b)?;
        if d < self.best {
            self.best = d;
            self.closest = Some(w);
        }
        if depth > self.pen {
            self.pen = depth;
            self.deepest = Some(w);
        }
        Ok(())
    }

    fn report(self) -> ContactReport {
        ContactReport {
            min_distance: self.best,
            max_penetration: self.pen,
            witness: self.deepest.or(self.closest),
        }
    }
}

/// Distance and, for intersecting pairs, EPA depth with SAT fallback.
pub(crate) fn narrow_phase(a: &Triangle, b: &Triangle) -> Result<(f64, f64)> {
    let (d, seed) = match gjk(a, b) {
        Ok(o) => (o.distance, Some(o.simplex)),
        Err(_) => (feature_distance(a, b), None),
    };
    if d > CONTACT_EPS {
        return Ok((d, 0.0));
    }
    let pen = match seed.map(|s| epa(a, b, &s)) {
        Some(Ok(p)) => p,
        _ => sat_penetration(a, b)?,
    };
    Ok((0.0, pen.depth))
}

pub fn part_contact(
    moving: &Collider,
    pose: &RigidPose,
    statics: &[&Collider],
    query: &ContactQuery,
) -> Result<ContactReport> {
    part_contact_with_stats(moving, pose, statics, query).map(|(r, _)| r)
}

/// BVH-accelerated contact query.
///
/// Node pairs whose boxes are apart by at least the best distance so far are
/// pruned; overlapping boxes are always descended so no penetrating pair is
/// missed. The result equals [`brute_force_contact`] unless
/// `stop_penetration` ends the search early.
pub fn part_contact_with_stats(
    moving: &Collider,
    pose: &RigidPose,
    statics: &[&Collider],
    query: &ContactQuery,
) -> Result<(ContactReport, ContactStats)> {
    let mut acc = Accum::new(query.cutoff, query.stop_penetration);
    let mut stats = ContactStats::default();
    if statics.is_empty() || moving.bvh.nodes.is_empty() {
        return Ok((acc.report(), stats));
    }
    let posed: Vec<Point3> = moving.mesh.vertices.iter().map(|p| pose.apply(p)).collect();
    let moving_boxes: Vec<_> = moving
        .bvh
        .nodes
        .iter()
        .map(|n| n.aabb.transformed(pose))
        .collect();
    let moving_tri_boxes: Vec<_> = (0..moving.mesh.triangles.len())
        .map(|t| crate::geom::Aabb::from_points(&moving.tri(&posed, t)))
        .collect();

    let mut stack: Vec<(u32, u32)> = Vec::new();
    for (si, stat) in statics.iter().enumerate() {
        if stat.bvh.nodes.is_empty() {
            continue;
        }
        stack.clear();
        stack.push((0, 0));
        while let Some((mi, ni)) = stack.pop() {
            let mbox = &moving_boxes[mi as usize];
            let snode = &stat.bvh.nodes[ni as usize];
            let gap = mbox.distance(&snode.aabb);
            if gap > 0.0 && gap >= acc.best {
                continue;
            }
            stats.node_pairs += 1;
            let mnode = &moving.bvh.nodes[mi as usize];
            match (mnode.kind, snode.kind) {
                (NodeKind::Leaf { .. }, NodeKind::Leaf { .. }) => {
                    for &mt in moving.bvh.leaf_triangles(mnode) {
                        if moving.skip[mt as usize] {
                            continue;
                        }
                        let ta = moving.tri(&posed, mt as usize);
                        for &st in stat.bvh.leaf_triangles(snode) {
                            if stat.skip[st as usize] {
                                continue;
                            }
                            let g = moving_tri_boxes[mt as usize]
                                .distance(&stat.bvh.tri_boxes[st as usize]);
                            if g > 0.0 && g >= acc.best {
                                continue;
                            }
                            stats.triangle_pairs += 1;
                            let tb = stat.tri(&stat.mesh.vertices, st as usize);
                            acc.visit(
                                &ta,
                                &tb,
                                Witness {
                                    static_part: si,
                                    moving_triangle: mt,
                                    static_triangle: st,
                                },
                            )?;
                            if acc.done() {
                                return Ok((acc.report(), stats));
                            }
                        }
                    }
                }
                (NodeKind::Inner { left, right }, NodeKind::Leaf { .. }) => {
                    push_ordered(
                        &mut stack,
                        &moving_boxes,
                        &snode.aabb,
                        (left, ni),
                        (right, ni),
                    );
                }
                (NodeKind::Leaf { .. }, NodeKind::Inner { left, right }) => {
                    push_children_static(&mut stack, &stat.bvh, mbox, mi, left, right);
                }
                (
                    NodeKind::Inner {
                        left: ml,
                        right: mr,
                    },
                    NodeKind::Inner { left, right },
                ) => {
                    let me = mbox.extents().norm_squared();
                    let se = snode.aabb.extents().norm_squared();
                    if me >= se {
                        push_ordered(&mut stack, &moving_boxes, &snode.aabb, (ml, ni), (mr, ni));
                    } else {
                        push_children_static(&mut stack, &stat.bvh, mbox, mi, left, right);
                    }
                }
            }
        }
    }
    Ok((acc.report(), stats))
}

/// Pushes two moving-side children, nearer one last so it is popped first.
fn push_ordered(
    stack: &mut Vec<(u32, u32)>,
    moving_boxes: &[crate::geom::Aabb],
    other: &crate::geom::Aabb,
    a: (u32, u32),
    b: (u32, u32),
) {
    let da = moving_boxes[a.0 as usize].distance(other);
    let db = moving_boxes[b.0 as usize].distance(other);
    if da <= db {
        stack.push(b);
        stack.push(a);
    } else {
        stack.push(a);
        stack.push(b);
    }
}

fn push_children_static(
    stack: &mut Vec<(u32, u32)>,
    bvh: &Bvh,
    mbox: &crate::geom::Aabb,
    mi: u32,
    left: u32,
    right: u32,
) {
    let dl = bvh.nodes[left as usize].aabb.distance(mbox);
    let dr = bvh.nodes[right as usize].aabb.distance(mbox);
    if dl <= dr {
        stack.push((mi, right));
        stack.push((mi, left));
    } else {
        stack.push((mi, left));
        stack.push((mi, right));
    }
}

/// All-pairs reference query: no hierarchy, no pruning, no early exit.
pub fn brute_force_contact(
    moving: &Collider,
    pose: &RigidPose,
    statics: &[&Collider],
    cutoff: f64,
) -> Result<ContactReport> {
    let mut acc = Accum::new(cutoff, None);
    let posed: Vec<Point3> = moving.mesh.vertices.iter().map(|p| pose.apply(p)).collect();
    for (si, stat) in statics.iter().enumerate() {
        for mt in 0..moving.mesh.triangles.len() {
            if moving.skip[mt] {
                continue;
            }
            let ta = moving.tri(&posed, mt);
            for st in 0..stat.mesh.triangles.len() {
                if stat.skip[st] {
                    continue;
                }
                let tb = stat.tri(&stat.mesh.vertices, st);
                acc.visit(
                    &ta,
                    &tb,
                    Witness {
                        static_part: si,
                        moving_triangle: mt as u32,
                        static_triangle: st as u32,
                    },
                )?;
            }
        }
    }
    Ok(acc.report())
}
