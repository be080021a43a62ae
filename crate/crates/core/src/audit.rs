//! Re-simulation of proposed articulations.
//!
//! Reported parameters are external units: degrees for revolute motions,
//! normalized lengths for prismatic ones.

use serde::Serialize;

use crate::collision::Collider;
use crate::error::{Error, Result};
use crate::motion::{free_range, pose_at, MotionKind, MotionScene, MotionSpec, PoseVerdict};
use crate::search::SearchConfig;
use crate::shape::Shape;

/// Poses are checked at this fraction of the search step.
pub const AUDIT_REFINE: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoseCheck {
    pub t: f64,
    pub verdict: PoseVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditResult {
    pub part_id: u32,
    pub kind: MotionKind,
    pub requested: [f64; 2],
    pub poses: Vec<PoseCheck>,
    pub all_valid: bool,
    /// Free range found by sweeping from rest.
    pub free_range: [f64; 2],
    /// Set when some requested pose is invalid or the free range is shorter
    /// than the search threshold for this kind of motion.
    pub flagged: bool,
}

fn to_external(kind: MotionKind, t: f64) -> f64 {
    match kind {
        MotionKind::Revolute => t.to_degrees(),
        MotionKind::Prismatic => t,
    }
}

/// Checks `motion` of part `index` over `range` (internal units: radians or
/// normalized lengths) and measures its actual free range.
pub fn audit_articulation(
    shape: &Shape,
    colliders: &[Collider],
    index: usize,
    motion: &MotionSpec,
    range: [f64; 2],
    config: &SearchConfig,
) -> Result<AuditResult> {
    config.validate()?;
    motion.validate()?;
    let part = shape
        .parts
        .get(index)
        .ok_or_else(|| Error::InvalidInput(format!("no part at index {index}")))?;
    if !(range[0] <= range[1] && range.iter().all(|v| v.is_finite())) {
        return Err(Error::InvalidInput(format!(
            "part {}: range must be finite with lo <= hi",
            part.id
        )));
    }
    let extent = part
        .obb
        .map(|o| o.max_extent())
        .ok_or_else(|| Error::Degenerate(format!("part {} has no principal axes", part.id)))?;

    let statics: Vec<&Collider> = colliders
        .iter()
        .enumerate()
        .filter(|(i, c)| *i != index && !c.mesh.triangles.is_empty())
        .map(|(_, c)| c)
        .collect();
    let scene = MotionScene::new(&colliders[index], statics, config.eps_contact)?;
    let mcfg = config.motion();

    let step = match motion.kind {
        MotionKind::Prismatic => extent / f64::from(mcfg.prismatic_steps),
        MotionKind::Revolute => mcfg.revolute_step_deg.to_radians(),
    } / f64::from(AUDIT_REFINE);
    let n = ((range[1] - range[0]) / step - 1e-9).ceil().max(0.0) as u64;
    let mut poses = Vec::with_capacity(n as usize + 1);
    for k in 0..=n {
        let t = if k == n {
            range[1]
        } else {
            range[0] + k as f64 * step
        };
        let verdict = scene.classify_pose(&pose_at(motion, t))?;
        poses.push(PoseCheck {
            t: to_external(motion.kind, t),
            verdict,
        });
    }
    let all_valid = poses.iter().all(|p| p.verdict == PoseVerdict::Valid);

    let sweep = free_range(&scene, motion, extent, &mcfg)?;
    let threshold = match motion.kind {
        MotionKind::Prismatic => config.epsilon_frac * extent,
        MotionKind::Revolute => config.omega_deg.to_radians(),
    };
    Ok(AuditResult {
        part_id: part.id,
        kind: motion.kind,
        requested: range.map(|t| to_external(motion.kind, t)),
        poses,
        all_valid,
        free_range: [sweep.range.neg, sweep.range.pos].map(|t| to_external(motion.kind, t)),
        flagged: !all_valid || sweep.range.one_sided() < threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Dir3, Point3};
    use crate::search::{build_colliders, prepare_and_search};
    use crate::synth::{cabinet, CabinetOptions, CABINET_DOOR};

    #[test]
    fn emitted_candidates_revalidate() {
        let cfg = SearchConfig::default();
        let (shape, cands) = prepare_and_search(cabinet(&CabinetOptions::default()), &cfg).unwrap();
        let colliders = build_colliders(&shape);
        for (i, c) in cands.iter().enumerate() {
            for r in &c.revolute {
                let m = MotionSpec::revolute(r.axis, r.pivot);
                let a = audit_articulation(&shape, &colliders, i, &m, [r.range.neg, r.range.pos], &cfg)
                    .unwrap();
                assert!(a.all_valid, "part {} revolute {:?}", c.part_id, a.poses);
            }
            for p in &c.prismatic {
                let m = MotionSpec::prismatic(p.axis);
                let a = audit_articulation(&shape, &colliders, i, &m, [p.range.neg, p.range.pos], &cfg)
                    .unwrap();
                assert!(a.all_valid, "part {} prismatic {:?}", c.part_id, a.poses);
            }
        }
    }

    #[test]
    fn door_about_its_center_is_flagged() {
        let cfg = SearchConfig::default();
        let (shape, _) = prepare_and_search(cabinet(&CabinetOptions::default()), &cfg).unwrap();
        let colliders = build_colliders(&shape);
        let idx = shape.parts.iter().position(|p| p.id == CABINET_DOOR).unwrap();
        let door = &shape.parts[idx];
        let center = door.aabb.unwrap().center();
        let m = MotionSpec::revolute(Dir3::y_axis(), Point3::from(center));
        let a = audit_articulation(&shape, &colliders, idx, &m, [0.0, 90f64.to_radians()], &cfg)
            .unwrap();
        assert!(a.flagged);
        assert!(!a.all_valid);
        assert!(a.free_range[1].max(-a.free_range[0]) < 90.0);
        assert_eq!(a.requested, [0.0, 90.0]);
    }
}
