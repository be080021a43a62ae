//! Per-part candidate articulation search.
//!
//! Each part proposes its three principal axes as translation directions and
//! the 27 combinations of those axes with 9 pivots (bounding-box corners and
//! the sample centroid) as rotations. Every proposal is swept against the
//! rest of the shape; short motions are discarded and, per axis, only the
//! pivot with the largest rotation survives.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collision::Collider;
use crate::error::{Error, Result};
use crate::geom::{aabb_pivots, Dir3, Point3};
use crate::motion::{
    free_range, FreeRange, MotionConfig, MotionKind, MotionScene, MotionSpec, StopReason, Sweep,
};
use crate::shape::{Part, Shape};

pub const PIVOTS_PER_AXIS: usize = 9;
pub const REVOLUTE_POOL: usize = 3 * PIVOTS_PER_AXIS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// Minimum translation as a fraction of the part's largest extent.
    pub epsilon_frac: f64,
    /// Minimum rotation in degrees.
    pub omega_deg: f64,
    pub eps_contact: f64,
    pub prismatic_steps: u32,
    pub revolute_step_deg: f64,
    pub bisection_div: u32,
    pub sample_count: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        let m = MotionConfig::default();
        SearchConfig {
            epsilon_frac: 0.1,
            omega_deg: 90.0,
            eps_contact: m.eps_contact,
            prismatic_steps: m.prismatic_steps,
            revolute_step_deg: m.revolute_step_deg,
            bisection_div: m.bisection_div,
            sample_count: crate::mesh::DEFAULT_SAMPLE_COUNT,
            seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_frac > 0.0 && self.epsilon_frac < 1.0) {
            return Err(Error::InvalidInput(
                "epsilon_frac must be in (0, 1)".into(),
            ));
        }
        if !(self.omega_deg > 0.0 && self.omega_deg <= 180.0) {
            return Err(Error::InvalidInput("omega_deg must be in (0, 180]".into()));
        }
        if self.sample_count < 3 {
            return Err(Error::InvalidInput("sample_count must be at least 3".into()));
        }
        self.motion().validate()
    }

    pub fn motion(&self) -> MotionConfig {
        MotionConfig {
            eps_contact: self.eps_contact,
            prismatic_steps: self.prismatic_steps,
            revolute_step_deg: self.revolute_step_deg,
            bisection_div: self.bisection_div,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrismaticCandidate {
    pub axis: Dir3,
    /// 0 for the strongest principal axis.
    pub eigenvalue_rank: u8,
    pub range: FreeRange,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevoluteCandidate {
    pub axis: Dir3,
    pub eigenvalue_rank: u8,
    pub pivot: Point3,
    /// 0..8 are box corners, 8 is the centroid.
    pub pivot_index: u8,
    /// Radians.
    pub range: FreeRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PruneReason {
    ShortRange,
    Collision,
    Detachment,
    PivotSuperseded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrunedCandidate {
    pub kind: MotionKind,
    pub eigenvalue_rank: u8,
    pub pivot_index: Option<u8>,
    pub range: FreeRange,
    pub reason: PruneReason,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PartDiagnostics {
    /// Principal axes, strongest first; absent for degenerate parts.
    pub axes: Option<[Dir3; 3]>,
    pub eigenvalues: [f64; 3],
    /// Largest OBB extent `L`.
    pub extent: f64,
    pub rest_distance: f64,
    pub rest_penetration: f64,
    /// Size of the revolute pool before pruning.
    pub revolute_pool: usize,
    pub pruned: Vec<PrunedCandidate>,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateArticulation {
    pub part_id: u32,
    pub m_rev: bool,
    pub m_pri: bool,
    pub prismatic: Vec<PrismaticCandidate>,
    pub revolute: Vec<RevoluteCandidate>,
    pub diagnostics: PartDiagnostics,
}

impl CandidateArticulation {
    pub fn fixed(part_id: u32, message: impl Into<String>) -> Self {
        CandidateArticulation {
            part_id,
            m_rev: false,
            m_pri: false,
            prismatic: Vec::new(),
            revolute: Vec::new(),
            diagnostics: PartDiagnostics {
                message: Some(message.into()),
                ..PartDiagnostics::default()
            },
        }
    }
}

/// Principal axes of the part's samples, strongest first.
pub fn candidate_axes(part: &Part) -> Result<[(Dir3, f64); 3]> {
    let obb = part.obb.ok_or_else(|| {
        Error::Degenerate(format!("part {} has no principal axes", part.id))
    })?;
    Ok([0, 1, 2].map(|i| (obb.axes[i], obb.eigenvalues[i])))
}

/// The 27 revolute specs, axis-major, pivots in corner order then centroid.
pub fn enumerate_revolute(part: &Part) -> Result<Vec<MotionSpec>> {
    let axes = candidate_axes(part)?;
    let pivots = aabb_pivots(&part.samples)?;
    Ok(axes
        .iter()
        .flat_map(|(axis, _)| pivots.iter().map(|p| MotionSpec::revolute(*axis, *p)))
        .collect())
}

/// Collision geometry for every part of a shape, in part order.
pub fn build_colliders(shape: &Shape) -> Vec<Collider> {
    shape
        .parts
        .par_iter()
        .map(|p| Collider::new(p.mesh.clone()))
        .collect()
}

fn prune_reason(sweep: &Sweep) -> PruneReason {
    match sweep.limiting_stop() {
        StopReason::Collision => PruneReason::Collision,
        StopReason::Detached => PruneReason::Detachment,
        StopReason::Cap => PruneReason::ShortRange,
    }
}

/// Searches part `index` of a prepared shape. `colliders` must come from
/// [`build_colliders`] on the same shape.
pub fn search_part(
    shape: &Shape,
    colliders: &[Collider],
    index: usize,
    config: &SearchConfig,
) -> Result<CandidateArticulation> {
    config.validate()?;
    let part = &shape.parts[index];
    if let Some(msg) = &part.diagnostic {
        return Ok(CandidateArticulation::fixed(part.id, msg.clone()));
    }
    let axes = candidate_axes(part)?;
    let obb = part.obb.expect("checked by candidate_axes");
    let extent = obb.max_extent();
    let revolute_specs = enumerate_revolute(part)?;

    let statics: Vec<&Collider> = colliders
        .iter()
        .enumerate()
        .filter(|(i, c)| *i != index && !c.mesh.triangles.is_empty())
        .map(|(_, c)| c)
        .collect();
    let scene = MotionScene::new(&colliders[index], statics, config.eps_contact)?;
    let motion_cfg = config.motion();

    let prismatic_specs: Vec<MotionSpec> =
        axes.iter().map(|(a, _)| MotionSpec::prismatic(*a)).collect();
    let all: Vec<MotionSpec> = prismatic_specs
        .into_iter()
        .chain(revolute_specs.iter().copied())
        .collect();
    let sweeps = all
        .par_iter()
        .map(|m| free_range(&scene, m, extent, &motion_cfg))
        .collect::<Result<Vec<Sweep>>>()?;
    let (pri_sweeps, rev_sweeps) = sweeps.split_at(3);

    let mut diag = PartDiagnostics {
        axes: Some([axes[0].0, axes[1].0, axes[2].0]),
        eigenvalues: [axes[0].1, axes[1].1, axes[2].1],
        extent,
        rest_distance: scene.baseline().distance,
        rest_penetration: scene.baseline().penetration,
        revolute_pool: revolute_specs.len(),
        pruned: Vec::new(),
        message: None,
    };

    let eps = config.epsilon_frac * extent;
    let mut prismatic = Vec::new();
    for (rank, sweep) in pri_sweeps.iter().enumerate() {
        if sweep.range.one_sided() >= eps {
            prismatic.push(PrismaticCandidate {
                axis: axes[rank].0,
                eigenvalue_rank: rank as u8,
                range: sweep.range,
            });
        } else {
            diag.pruned.push(PrunedCandidate {
                kind: MotionKind::Prismatic,
                eigenvalue_rank: rank as u8,
                pivot_index: None,
                range: sweep.range,
                reason: prune_reason(sweep),
            });
        }
    }

    let omega = config.omega_deg.to_radians();
    let mut revolute = Vec::new();
    for rank in 0..3 {
        let mut best: Option<(usize, f64)> = None;
        let mut survivors = Vec::new();
        for k in 0..PIVOTS_PER_AXIS {
            let sweep = &rev_sweeps[rank * PIVOTS_PER_AXIS + k];
            let r = sweep.range.one_sided();
            if r >= omega {
                survivors.push(k);
                if best.is_none_or(|(_, b)| r > b) {
                    best = Some((k, r));
                }
            } else {
                diag.pruned.push(PrunedCandidate {
                    kind: MotionKind::Revolute,
                    eigenvalue_rank: rank as u8,
                    pivot_index: Some(k as u8),
                    range: sweep.range,
                    reason: prune_reason(sweep),
                });
            }
        }
        let Some((winner, _)) = best else { continue };
        for k in survivors.into_iter().filter(|&k| k != winner) {
            diag.pruned.push(PrunedCandidate {
                kind: MotionKind::Revolute,
                eigenvalue_rank: rank as u8,
                pivot_index: Some(k as u8),
                range: rev_sweeps[rank * PIVOTS_PER_AXIS + k].range,
                reason: PruneReason::PivotSuperseded,
            });
        }
        let spec = &revolute_specs[rank * PIVOTS_PER_AXIS + winner];
        revolute.push(RevoluteCandidate {
            axis: spec.axis,
            eigenvalue_rank: rank as u8,
            pivot: spec.pivot.expect("revolute spec"),
            pivot_index: winner as u8,
            range: rev_sweeps[rank * PIVOTS_PER_AXIS + winner].range,
        });
    }

    Ok(CandidateArticulation {
        part_id: part.id,
        m_rev: !revolute.is_empty(),
        m_pri: !prismatic.is_empty(),
        prismatic,
        revolute,
        diagnostics: diag,
    })
}

/// Searches every part of a prepared shape. A part that fails is reported
/// fixed with the error as its diagnostic.
pub fn search_shape(shape: &Shape, config: &SearchConfig) -> Result<Vec<CandidateArticulation>> {
    config.validate()?;
    let colliders = build_colliders(shape);
    Ok((0..shape.parts.len())
        .into_par_iter()
        .map(|i| {
            search_part(shape, &colliders, i, config).unwrap_or_else(|e| {
                log::warn!("shape {} part {}: {e}", shape.id, shape.parts[i].id);
                CandidateArticulation::fixed(shape.parts[i].id, e.to_string())
            })
        })
        .collect())
}

/// Samples, normalizes and searches a raw shape.
pub fn prepare_and_search(
    shape: Shape,
    config: &SearchConfig,
) -> Result<(Shape, Vec<CandidateArticulation>)> {
    config.validate()?;
    let shape = crate::shape::prepare_shape(shape, config.sample_count, config.seed)?;
    let candidates = search_shape(&shape, config)?;
    Ok((shape, candidates))
}
