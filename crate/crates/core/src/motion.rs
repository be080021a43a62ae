//! Simulating candidate motions: poses along a motion, per-pose verdicts and
//! the free interval of a motion around the rest pose.

use serde::{Deserialize, Serialize};

use crate::collision::{part_contact, Collider, ContactQuery, ContactReport};
use crate::error::{Error, Result};
use crate::geom::{Dir3, Point3, RigidPose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotionKind {
    Prismatic,
    Revolute,
}

/// A one-parameter motion: translation along `axis` (model units) or
/// rotation about the line (`pivot`, `axis`) in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionSpec {
    pub kind: MotionKind,
    pub axis: Dir3,
    pub pivot: Option<Point3>,
}

impl MotionSpec {
    pub fn prismatic(axis: Dir3) -> Self {
        MotionSpec {
            kind: MotionKind::Prismatic,
            axis,
            pivot: None,
        }
    }

    pub fn revolute(axis: Dir3, pivot: Point3) -> Self {
        MotionSpec {
            kind: MotionKind::Revolute,
            axis,
            pivot: Some(pivot),
        }
    }

    pub fn flipped(&self) -> Self {
        MotionSpec {
            axis: -self.axis,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, self.pivot) {
            (MotionKind::Prismatic, None) => Ok(()),
            (MotionKind::Revolute, Some(p)) if p.coords.iter().all(|c| c.is_finite()) => Ok(()),
            _ => Err(Error::InvalidInput(
                "pivot must be present (and finite) iff the motion is revolute".into(),
            )),
        }
    }
}

pub fn pose_at(motion: &MotionSpec, t: f64) -> RigidPose {
    match motion.kind {
        MotionKind::Prismatic => RigidPose::translation(motion.axis.into_inner() * t),
        MotionKind::Revolute => {
            let pivot = motion.pivot.unwrap_or_else(Point3::origin);
            RigidPose::rotation_about(motion.axis, &pivot, t)
        }
    }
}

/// Maximal valid parameter interval `[neg, pos]` around 0.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FreeRange {
    pub neg: f64,
    pub pos: f64,
}

impl FreeRange {
    /// Larger of the two one-sided extents.
    pub fn one_sided(&self) -> f64 {
        self.pos.max(-self.neg)
    }

    pub fn span(&self) -> f64 {
        self.pos - self.neg
    }

    pub fn contains(&self, t: f64) -> bool {
        self.neg <= t && t <= self.pos
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoseVerdict {
    Valid,
    Collision,
    Detached,
}

/// Why one side of a sweep ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopReason {
    Cap,
    Collision,
    Detached,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub range: FreeRange,
    pub neg_stop: StopReason,
    pub pos_stop: StopReason,
}

impl Sweep {
    /// Stop reason on the side with the larger extent.
    pub fn limiting_stop(&self) -> StopReason {
        if self.range.pos >= -self.range.neg {
            self.pos_stop
        } else {
            self.neg_stop
        }
    }
}

/// Contact state at rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestBaseline {
    pub distance: f64,
    pub penetration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionConfig {
    /// Contact tolerance ε′ for collision and detachment.
    pub eps_contact: f64,
    /// Prismatic coarse step is `L / prismatic_steps`.
    pub prismatic_steps: u32,
    pub revolute_step_deg: f64,
    /// Boundaries are bisected down to `step / bisection_div`.
    pub bisection_div: u32,
}

impl Default for MotionConfig {
    fn default() -> Self {
        MotionConfig {
            eps_contact: 0.01,
            prismatic_steps: 64,
            revolute_step_deg: 2.0,
            bisection_div: 64,
        }
    }
}

impl MotionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_contact > 0.0 && self.eps_contact.is_finite()) {
            return Err(Error::InvalidInput("eps_contact must be positive".into()));
        }
        if self.prismatic_steps == 0 || self.bisection_div == 0 {
            return Err(Error::InvalidInput("step counts must be positive".into()));
        }
        if !(self.revolute_step_deg > 0.0 && self.revolute_step_deg <= 180.0) {
            return Err(Error::InvalidInput(
                "revolute_step_deg must be in (0, 180]".into(),
            ));
        }
        Ok(())
    }
}

/// One moving part against the rest of its shape, with its rest baseline.
pub struct MotionScene<'a> {
    moving: &'a Collider,
    statics: Vec<&'a Collider>,
    eps: f64,
    baseline: RestBaseline,
}

impl<'a> MotionScene<'a> {
    pub fn new(moving: &'a Collider, statics: Vec<&'a Collider>, eps_contact: f64) -> Result<Self> {
        let rest = if statics.is_empty() {
            ContactReport {
                min_distance: f64::INFINITY,
                max_penetration: 0.0,
                witness: None,
            }
        } else {
            part_contact(
                moving,
                &RigidPose::identity(),
                &statics,
                &ContactQuery::exact(f64::INFINITY),
            )?
        };
        Ok(MotionScene {
            moving,
            statics,
            eps: eps_contact,
            baseline: RestBaseline {
                distance: rest.min_distance,
                penetration: rest.max_penetration,
            },
        })
    }

    pub fn baseline(&self) -> RestBaseline {
        self.baseline
    }

    fn collision_limit(&self) -> f64 {
        self.eps.max(self.baseline.penetration + self.eps)
    }

    fn detach_limit(&self) -> f64 {
        if self.baseline.distance <= self.eps {
            self.eps
        } else {
            self.baseline.distance + self.eps
        }
    }

    pub fn classify_pose(&self, pose: &RigidPose) -> Result<PoseVerdict> {
        if self.statics.is_empty() {
            return Ok(PoseVerdict::Valid);
        }
        let detach = self.detach_limit();
        let query = ContactQuery {
            // Anything clamped at the cutoff already counts as detached.
            cutoff: detach + self.eps,
            stop_penetration: Some(self.collision_limit()),
        };
        let report = part_contact(self.moving, pose, &self.statics, &query)?;
        Ok(self.verdict(&report))
    }

    pub fn verdict(&self, report: &ContactReport) -> PoseVerdict {
        if report.max_penetration > self.collision_limit() {
            PoseVerdict::Collision
        } else if report.min_distance > self.detach_limit() {
            PoseVerdict::Detached
        } else {
            PoseVerdict::Valid
        }
    }

    /// Sweeps both directions in coarse steps of `step` up to `cap`, then
    /// bisects each limiting boundary to `step / bisection_div`.
    pub fn free_range(&self, motion: &MotionSpec, cap: f64, step: f64, div: u32) -> Result<Sweep> {
        motion.validate()?;
        if !(cap >= 0.0 && step > 0.0) {
            return Err(Error::InvalidInput("sweep cap and step must be positive".into()));
        }
        let (pos, pos_stop) = self.sweep_side(motion, 1.0, cap, step, div)?;
        let (neg, neg_stop) = self.sweep_side(motion, -1.0, cap, step, div)?;
        Ok(Sweep {
            range: FreeRange { neg: -neg, pos },
            neg_stop,
            pos_stop,
        })
    }

    fn sweep_side(
        &self,
        motion: &MotionSpec,
        sign: f64,
        cap: f64,
        step: f64,
        div: u32,
    ) -> Result<(f64, StopReason)> {
        let check = |t: f64| self.classify_pose(&pose_at(motion, sign * t));
        let steps = ((cap / step) - 1e-9).ceil().max(0.0) as u64;
        let mut good = 0.0;
        for k in 1..=steps {
            let t = if k == steps { cap } else { k as f64 * step };
            let v = check(t)?;
            if v == PoseVerdict::Valid {
                good = t;
                continue;
            }
            let mut bad = (t, v);
            let tol = step / f64::from(div);
            while bad.0 - good > tol {
                let mid = 0.5 * (good + bad.0);
                match check(mid)? {
                    PoseVerdict::Valid => good = mid,
                    v => bad = (mid, v),
                }
            }
            let reason = match bad.1 {
                PoseVerdict::Collision => StopReason::Collision,
                _ => StopReason::Detached,
            };
            return Ok((good, reason));
        }
        Ok((cap, StopReason::Cap))
    }
}

/// Convenience wrapper building a scene for a single query.
pub fn classify_pose(
    moving: &Collider,
    statics: &[&Collider],
    pose: &RigidPose,
    eps_contact: f64,
) -> Result<PoseVerdict> {
    MotionScene::new(moving, statics.to_vec(), eps_contact)?.classify_pose(pose)
}

/// Free range with the default resolution for the motion kind: `cap / steps`
/// for prismatic motions and `revolute_step_deg` for revolute ones.
pub fn free_range(
    scene: &MotionScene<'_>,
    motion: &MotionSpec,
    prismatic_cap: f64,
    config: &MotionConfig,
) -> Result<Sweep> {
    let (cap, step) = match motion.kind {
        MotionKind::Prismatic => (
            prismatic_cap,
            prismatic_cap / f64::from(config.prismatic_steps),
        ),
        MotionKind::Revolute => (std::f64::consts::PI, config.revolute_step_deg.to_radians()),
    };
    if cap == 0.0 {
        return Ok(Sweep {
            range: FreeRange::default(),
            neg_stop: StopReason::Cap,
            pos_stop: StopReason::Cap,
        });
    }
    scene.free_range(motion, cap, step, config.bisection_div)
}
