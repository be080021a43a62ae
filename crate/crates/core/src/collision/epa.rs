//! Penetration depth of intersecting triangle pairs.
//!
//! The expanding polytope algorithm grows a polytope inside the Minkowski
//! difference `A - B` from a GJK simplex until the face closest to the origin
//! is a face of `A - B`. Flat differences (coplanar or parallel triangles) and
//! seeds that cannot be inflated to a tetrahedron are handed to
//! [`sat_penetration`], which enumerates the candidate face normals of `A - B`
//! directly.

use crate::error::{Error, Result};
use crate::geom::{Dir3, RigidPose, Vec3};

use super::gjk::{gjk, Minkowski, Triangle, CONTACT_EPS};

/// Convergence tolerance on the support gap of the closest face.
pub const EPA_TOLERANCE: f64 = 1e-9;
const MAX_ITERATIONS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penetration {
    /// Length of the shortest translation of `B` that separates the pair.
    pub depth: f64,
    /// Direction in which `B` must move.
    pub normal: Dir3,
}

/// EPA on triangle `a` moved by `pose` against `b`, with the SAT fallback on
/// degenerate seeds.
pub fn epa_penetration(a: &Triangle, pose: &RigidPose, b: &Triangle) -> Result<Penetration> {
    let moved = a.map(|p| pose.apply(&p));
    penetration(&moved, b)
}

/// Penetration of an intersecting pair; 0 depth for separated or touching pairs.
pub fn penetration(a: &Triangle, b: &Triangle) -> Result<Penetration> {
    let g = gjk(a, b)?;
    if g.distance > 0.0 {
        return Ok(Penetration {
            depth: 0.0,
            normal: fallback_normal(a, b),
        });
    }
    match epa(a, b, &g.simplex) {
        Ok(p) => Ok(p),
        Err(_) => sat_penetration(a, b),
    }
}

/// Pure EPA; fails on degenerate seeds instead of falling back.
pub fn epa(a: &Triangle, b: &Triangle, seed: &[Vec3]) -> Result<Penetration> {
    let md = Minkowski { a, b };
    let scale = a
        .iter()
        .chain(b.iter())
        .map(|p| p.coords.norm())
        .fold(1e-300, f64::max);
    let mut verts = inflate_seed(&md, seed, scale)?;
    let interior = (verts[0] + verts[1] + verts[2] + verts[3]) / 4.0;

    let mut faces: Vec<Face> = Vec::new();
    for idx in [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]] {
        faces.push(Face::new(&verts, idx, &interior)?);
    }

    for _ in 0..MAX_ITERATIONS {
        let (best_i, best) = faces
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.dist.total_cmp(&y.1.dist))
            .map(|(i, f)| (i, *f))
            .unwrap();
        let w = md.support(&best.normal);
        let gap = w.dot(&best.normal) - best.dist;
        if gap < EPA_TOLERANCE {
            return finish(best);
        }

        let visible: Vec<usize> = faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.normal.dot(&(w - verts[f.idx[0]])) > 1e-14 * scale)
            .map(|(i, _)| i)
            .collect();
        if visible.is_empty() || !visible.contains(&best_i) {
            return finish(best);
        }

        let mut horizon: Vec<(usize, usize)> = Vec::new();
        for &fi in &visible {
            let [i, j, k] = faces[fi].idx;
            for e in [(i, j), (j, k), (k, i)] {
                if let Some(pos) = horizon.iter().position(|&h| h == (e.1, e.0)) {
                    horizon.swap_remove(pos);
                } else {
                    horizon.push(e);
                }
            }
        }
        let mut keep = Vec::with_capacity(faces.len());
        for (i, f) in faces.into_iter().enumerate() {
            if !visible.contains(&i) {
                keep.push(f);
            }
        }
        faces = keep;
        verts.push(w);
        let wi = verts.len() - 1;
        for (i, j) in horizon {
            faces.push(Face::new(&verts, [i, j, wi], &interior)?);
        }
    }
    Err(Error::Numeric("EPA did not converge".into()))
}

fn finish(face: Face) -> Result<Penetration> {
    let depth = face.dist.max(0.0);
    Ok(Penetration {
        depth: if depth <= CONTACT_EPS { 0.0 } else { depth },
        normal: Dir3::normalize(face.normal)?,
    })
}

#[derive(Debug, Clone, Copy)]
struct Face {
    idx: [usize; 3],
    normal: Vec3,
    dist: f64,
}

impl Face {
    fn new(verts: &[Vec3], idx: [usize; 3], interior: &Vec3) -> Result<Face> {
        let [a, b, c] = idx.map(|i| verts[i]);
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        if !(len > 1e-18) {
            return Err(Error::Degenerate("EPA produced a degenerate face".into()));
        }
        let mut normal = n / len;
        let mut idx = idx;
        if normal.dot(&(a - interior)) < 0.0 {
            normal = -normal;
            idx.swap(1, 2);
        }
        Ok(Face {
            idx,
            normal,
            dist: normal.dot(&a),
        })
    }
}

/// Grows a GJK simplex into a tetrahedron with non-negligible volume.
fn inflate_seed(md: &Minkowski<'_>, seed: &[Vec3], scale: f64) -> Result<Vec<Vec3>> {
    let mut verts: Vec<Vec3> = seed.to_vec();
    if verts.is_empty() {
        verts.push(md.support(&Vec3::x()));
    }
    let axes = [
        Vec3::x(),
        Vec3::y(),
        Vec3::z(),
        -Vec3::x(),
        -Vec3::y(),
        -Vec3::z(),
    ];
    let tiny = 1e-12 * scale;

    if verts.len() == 1 {
        let best = axes
            .iter()
            .map(|d| md.support(d))
            .max_by(|p, q| (p - verts[0]).norm().total_cmp(&(q - verts[0]).norm()))
            .unwrap();
        if (best - verts[0]).norm() <= tiny {
            return Err(Error::Degenerate("Minkowski difference is a point".into()));
        }
        verts.push(best);
    }
    if verts.len() == 2 {
        let dir = verts[1] - verts[0];
        let mut best: Option<(f64, Vec3)> = None;
        for ax in &axes {
            let perp = dir.cross(ax);
            if perp.norm() <= tiny {
                continue;
            }
            for d in [perp, -perp] {
                let p = md.support(&d);
                let off = (p - verts[0]).cross(&dir).norm() / dir.norm();
                if best.is_none_or(|b| off > b.0) {
                    best = Some((off, p));
                }
            }
        }
        match best {
            Some((off, p)) if off > tiny => verts.push(p),
            _ => {
                return Err(Error::Degenerate(
                    "Minkowski difference is a segment".into(),
                ))
            }
        }
    }
    if verts.len() == 3 {
        let n = (verts[1] - verts[0]).cross(&(verts[2] - verts[0]));
        if n.norm() <= tiny * tiny {
            return Err(Error::Degenerate("degenerate EPA seed triangle".into()));
        }
        let n = n.normalize();
        let p1 = md.support(&n);
        let p2 = md.support(&-n);
        let d1 = (p1 - verts[0]).dot(&n).abs();
        let d2 = (p2 - verts[0]).dot(&n).abs();
        let (p, d) = if d1 >= d2 { (p1, d1) } else { (p2, d2) };
        if d <= tiny {
            return Err(Error::Degenerate("Minkowski difference is flat".into()));
        }
        verts.push(p);
    }
    let vol = (verts[1] - verts[0])
        .cross(&(verts[2] - verts[0]))
        .dot(&(verts[3] - verts[0]))
        .abs();
    if vol <= tiny * tiny * tiny {
        return Err(Error::Degenerate("degenerate EPA seed tetrahedron".into()));
    }
    Ok(verts)
}

fn fallback_normal(a: &Triangle, b: &Triangle) -> Dir3 {
    let ca = (a[0].coords + a[1].coords + a[2].coords) / 3.0;
    let cb = (b[0].coords + b[1].coords + b[2].coords) / 3.0;
    Dir3::normalize(cb - ca).unwrap_or(Dir3::z_axis())
}

/// Minimum translation distance by the separating-axis theorem over the
/// face normals of `A - B`: both triangle normals and the 9 edge cross
/// products.
pub fn sat_penetration(a: &Triangle, b: &Triangle) -> Result<Penetration> {
    let edges = |t: &Triangle| [t[1] - t[0], t[2] - t[1], t[0] - t[2]];
    let ea = edges(a);
    let eb = edges(b);
    let mut axes: Vec<Vec3> = vec![ea[0].cross(&ea[1]), eb[0].cross(&eb[1])];
    for u in &ea {
        for v in &eb {
            axes.push(u.cross(v));
        }
    }
    let scale = ea
        .iter()
        .chain(eb.iter())
        .map(|e| e.norm_squared())
        .fold(0.0, f64::max);

    let mut best: Option<(f64, Vec3)> = None;
    for axis in axes {
        let len = axis.norm();
        if !(len > 1e-12 * scale) {
            continue;
        }
        let n = axis / len;
        let (amin, amax) = project(a, &n);
        let (bmin, bmax) = project(b, &n);
        let push_pos = amax - bmin;
        let push_neg = bmax - amin;
        let (d, dir) = if push_pos <= push_neg {
            (push_pos, n)
        } else {
            (push_neg, -n)
        };
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, dir));
        }
    }
    let (d, dir) = best.ok_or_else(|| Error::Degenerate("no separating axis candidates".into()))?;
    let depth = d.max(0.0);
    Ok(Penetration {
        depth: if depth <= CONTACT_EPS { 0.0 } else { depth },
        normal: Dir3::normalize(dir)?,
    })
}

fn project(t: &Triangle, n: &Vec3) -> (f64, f64) {
    t.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            let s = p.coords.dot(n);
            (lo.min(s), hi.max(s))
        })
}
