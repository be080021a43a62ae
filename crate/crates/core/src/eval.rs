//! Articulation metrics: axis and point error, motion-type accuracy, and
//! recall of ground truth among discovered candidates.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{line_line_distance, Dir3, Line3, Point3, Vec3};
use crate::search::{CandidateArticulation, PruneReason};
use crate::shape::GroundTruthArticulation;

pub const DEFAULT_AE_THRESH_DEG: f64 = 5.0;
pub const DEFAULT_PE_THRESH: f64 = 0.1;

/// A predicted per-part articulation. Same presence rules as ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionRecord {
    pub part_id: u32,
    pub m_rev: bool,
    pub m_pri: bool,
    pub axis: Option<Dir3>,
    pub pivot: Option<Point3>,
}

impl PredictionRecord {
    pub fn validate(&self) -> Result<()> {
        if self.axis.is_some() != (self.m_rev || self.m_pri) {
            return Err(Error::Validation(format!(
                "prediction for part {}: axis must be present iff a motion bit is set",
                self.part_id
            )));
        }
        if self.pivot.is_some() != self.m_rev {
            return Err(Error::Validation(format!(
                "prediction for part {}: pivot must be present iff m_rev = 1",
                self.part_id
            )));
        }
        Ok(())
    }

    /// Collapses a candidate set to one prediction: the first revolute
    /// candidate supplies axis and pivot, else the first prismatic one
    /// supplies the axis.
    pub fn from_candidates(c: &CandidateArticulation) -> Self {
        let rev = c.revolute.first();
        let axis = rev
            .map(|r| r.axis)
            .or_else(|| c.prismatic.first().map(|p| p.axis));
        PredictionRecord {
            part_id: c.part_id,
            m_rev: c.m_rev,
            m_pri: c.m_pri,
            axis,
            pivot: rev.map(|r| r.pivot),
        }
    }

    pub fn from_ground_truth(gt: &GroundTruthArticulation) -> Self {
        PredictionRecord {
            part_id: gt.part_id,
            m_rev: gt.m_rev,
            m_pri: gt.m_pri,
            axis: gt.axis,
            pivot: gt.pivot,
        }
    }
}

fn unit(v: &Vec3, what: &str) -> Result<Dir3> {
    Dir3::new(*v).map_err(|e| Error::InvalidInput(format!("{what}: {e}")))
}

/// Angle between two unit axes in degrees. With `flip_invariant` the sign
/// of either axis is ignored and the result lies in [0, 90].
pub fn axis_error(pred: &Vec3, gt: &Vec3, flip_invariant: bool) -> Result<f64> {
    let c = axis_cosine(pred, gt)?;
    let c = if flip_invariant { c.abs() } else { c };
    Ok(c.clamp(-1.0, 1.0).acos().to_degrees())
}

pub fn axis_cosine(a: &Vec3, b: &Vec3) -> Result<f64> {
    let a = unit(a, "first axis")?;
    let b = unit(b, "second axis")?;
    Ok(a.dot(&b))
}

/// Minimum distance between the two infinite rotation axes.
pub fn point_error(pred: &Line3, gt: &Line3) -> f64 {
    line_line_distance(pred, gt)
}

/// Distance from the predicted pivot to the ground-truth axis line.
pub fn pivot_line_distance(pred_pivot: &Point3, gt: &Line3) -> f64 {
    gt.distance_to_point(pred_pivot)
}

pub fn pivot_l1(pred: &Point3, gt: &Point3) -> f64 {
    (pred - gt).abs().sum()
}

fn check_ids(preds: &[PredictionRecord], gts: &[GroundTruthArticulation]) -> Result<()> {
    if preds.len() != gts.len() {
        return Err(Error::Validation(format!(
            "{} predictions for {} ground-truth parts",
            preds.len(),
            gts.len()
        )));
    }
    for (p, g) in preds.iter().zip(gts) {
        if p.part_id != g.part_id {
            return Err(Error::Validation(format!(
                "part id mismatch: prediction {} against ground truth {}",
                p.part_id, g.part_id
            )));
        }
    }
    Ok(())
}

/// Fractions of parts whose revolute and prismatic bits match.
pub fn motion_type_accuracy(
    preds: &[PredictionRecord],
    gts: &[GroundTruthArticulation],
) -> Result<(f64, f64)> {
    check_ids(preds, gts)?;
    if preds.is_empty() {
        return Err(Error::Validation("no parts to score".into()));
    }
    let (r, p) = hits(preds, gts);
    let n = preds.len() as f64;
    Ok((r as f64 / n, p as f64 / n))
}

fn hits(preds: &[PredictionRecord], gts: &[GroundTruthArticulation]) -> (usize, usize) {
    preds.iter().zip(gts).fold((0, 0), |(r, p), (a, b)| {
        (
            r + usize::from(a.m_rev == b.m_rev),
            p + usize::from(a.m_pri == b.m_pri),
        )
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecallRow {
    pub part_id: u32,
    pub gt_rev: bool,
    pub gt_pri: bool,
    pub recovered: bool,
    /// Smallest axis error over candidates of the matching kind(s).
    pub best_axis_error: Option<f64>,
    /// Smallest point error over revolute candidates.
    pub best_point_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecallReport {
    pub recovered: usize,
    pub total: usize,
    /// `None` when there is no movable ground truth.
    pub recall: Option<f64>,
    pub rows: Vec<RecallRow>,
}

fn min_opt(a: Option<f64>, b: f64) -> Option<f64> {
    Some(a.map_or(b, |a| a.min(b)))
}

fn recall_row(
    cand: Option<&CandidateArticulation>,
    gt: &GroundTruthArticulation,
    ae_thresh_deg: f64,
    pe_thresh: f64,
    flip_invariant: bool,
) -> RecallRow {
    let mut row = RecallRow {
        part_id: gt.part_id,
        gt_rev: gt.m_rev,
        gt_pri: gt.m_pri,
        recovered: false,
        best_axis_error: None,
        best_point_error: None,
    };
    let (Some(c), Some(gt_axis)) = (cand, gt.axis) else {
        return row;
    };
    let ae = |a: &Dir3| axis_error(a, &gt_axis, flip_invariant).expect("unit axes");

    let mut rev_ok = !gt.m_rev;
    if gt.m_rev && c.m_rev {
        let gt_line = gt.pivot.map(|p| Line3::new(p, gt_axis));
        for r in &c.revolute {
            let a = ae(&r.axis);
            row.best_axis_error = min_opt(row.best_axis_error, a);
            if let Some(gl) = &gt_line {
                let pe = point_error(&Line3::new(r.pivot, r.axis), gl);
                row.best_point_error = min_opt(row.best_point_error, pe);
                rev_ok |= a <= ae_thresh_deg && pe <= pe_thresh;
            }
        }
    }
    let mut pri_ok = !gt.m_pri;
    if gt.m_pri && c.m_pri {
        for p in &c.prismatic {
            let a = ae(&p.axis);
            row.best_axis_error = min_opt(row.best_axis_error, a);
            pri_ok |= a <= ae_thresh_deg;
        }
    }
    row.recovered = rev_ok && pri_ok;
    row
}

/// A movable ground-truth part is recovered when some candidate of the same
/// part matches each of its motion bits within the thresholds. Cylindrical
/// parts need both a revolute and a prismatic match.
pub fn candidate_recall(
    candidates: &[CandidateArticulation],
    gts: &[GroundTruthArticulation],
    ae_thresh_deg: f64,
    pe_thresh: f64,
    flip_invariant: bool,
) -> RecallReport {
    let rows: Vec<RecallRow> = gts
        .iter()
        .filter(|g| g.is_movable())
        .map(|g| {
            let c = candidates.iter().find(|c| c.part_id == g.part_id);
            recall_row(c, g, ae_thresh_deg, pe_thresh, flip_invariant)
        })
        .collect();
    let recovered = rows.iter().filter(|r| r.recovered).count();
    let total = rows.len();
    RecallReport {
        recovered,
        total,
        recall: (total > 0).then(|| recovered as f64 / total as f64),
        rows,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalConfig {
    pub ae_thresh_deg: f64,
    pub pe_thresh: f64,
    pub flip_invariant: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            ae_thresh_deg: DEFAULT_AE_THRESH_DEG,
            pe_thresh: DEFAULT_PE_THRESH,
            flip_invariant: true,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ae_thresh_deg >= 0.0 && self.ae_thresh_deg.is_finite()) {
            return Err(Error::InvalidInput("ae threshold must be finite and >= 0".into()));
        }
        if !(self.pe_thresh >= 0.0 && self.pe_thresh.is_finite()) {
            return Err(Error::InvalidInput("pe threshold must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// One shape to score. `ground_truth = None` marks a shape without
/// annotations; it is skipped and counted.
#[derive(Debug, Clone, Default)]
pub struct EvalShape {
    pub shape_id: String,
    pub predictions: Vec<PredictionRecord>,
    pub ground_truth: Option<Vec<GroundTruthArticulation>>,
    /// Present when the predictions were derived from a candidate search.
    pub candidates: Option<Vec<CandidateArticulation>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PartRow {
    pub shape_id: String,
    pub part_id: u32,
    pub pred_rev: bool,
    pub pred_pri: bool,
    pub gt_rev: bool,
    pub gt_pri: bool,
    pub axis_error: Option<f64>,
    pub point_error: Option<f64>,
    pub pivot_line_distance: Option<f64>,
    pub recovered: Option<bool>,
    /// Angle from the ground-truth axis to the nearest principal axis.
    pub pca_deviation: Option<f64>,
    pub n_prismatic: usize,
    pub n_revolute: usize,
    pub pruned_short_range: usize,
    pub pruned_collision: usize,
    pub pruned_detachment: usize,
    pub pruned_pivot_superseded: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EvalCounts {
    pub shapes: usize,
    pub shapes_skipped: usize,
    pub parts: usize,
    pub ae_parts: usize,
    /// Movable ground-truth parts with no predicted axis.
    pub ae_skipped: usize,
    pub pe_parts: usize,
    /// Revolute ground-truth parts with no predicted pivot.
    pub pe_skipped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PcaDeviation {
    pub parts: usize,
    pub mean_deg: f64,
    pub fraction_within_5deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    #[serde(rename = "AE")]
    pub ae: Option<f64>,
    #[serde(rename = "PE")]
    pub pe: Option<f64>,
    #[serde(rename = "R_ACC")]
    pub r_acc: f64,
    #[serde(rename = "P_ACC")]
    pub p_acc: f64,
    pub recall: Option<f64>,
    pub recall_recovered: usize,
    pub recall_total: usize,
    pub pca_deviation: Option<PcaDeviation>,
    pub counts: EvalCounts,
    pub per_part: Vec<PartRow>,
}

struct ShapeScore {
    rows: Vec<PartRow>,
    counts: EvalCounts,
    r_hits: usize,
    p_hits: usize,
    recovered: usize,
    recall_total: usize,
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

fn score_shape(shape: &EvalShape, gts: &[GroundTruthArticulation], cfg: &EvalConfig) -> Result<ShapeScore> {
    check_ids(&shape.predictions, gts)
        .map_err(|e| Error::Validation(format!("shape {}: {e}", shape.shape_id)))?;
    for p in &shape.predictions {
        p.validate()?;
    }
    let recall = shape.candidates.as_ref().map(|c| {
        candidate_recall(c, gts, cfg.ae_thresh_deg, cfg.pe_thresh, cfg.flip_invariant)
    });
    let mut counts = EvalCounts {
        shapes: 1,
        parts: gts.len(),
        ..EvalCounts::default()
    };
    let mut rows = Vec::with_capacity(gts.len());
    for (pred, gt) in shape.predictions.iter().zip(gts) {
        let mut row = PartRow {
            shape_id: shape.shape_id.clone(),
            part_id: gt.part_id,
            pred_rev: pred.m_rev,
            pred_pri: pred.m_pri,
            gt_rev: gt.m_rev,
            gt_pri: gt.m_pri,
            ..PartRow::default()
        };
        if let Some(ga) = gt.axis {
            match pred.axis {
                Some(pa) => {
                    row.axis_error = Some(axis_error(&pa, &ga, cfg.flip_invariant)?);
                    counts.ae_parts += 1;
                }
                None => counts.ae_skipped += 1,
            }
        }
        if let (true, Some(ga), Some(gp)) = (gt.m_rev, gt.axis, gt.pivot) {
            let gl = Line3::new(gp, ga);
            match (pred.m_rev, pred.axis, pred.pivot) {
                (true, Some(pa), Some(pp)) => {
                    row.point_error = Some(point_error(&Line3::new(pp, pa), &gl));
                    row.pivot_line_distance = Some(pivot_line_distance(&pp, &gl));
                    counts.pe_parts += 1;
                }
                _ => counts.pe_skipped += 1,
            }
        }
        if let Some(r) = &recall {
            row.recovered = r
                .rows
                .iter()
                .find(|x| x.part_id == gt.part_id)
                .map(|x| x.recovered);
        }
        if let Some(c) = shape
            .candidates
            .as_ref()
            .and_then(|cs| cs.iter().find(|c| c.part_id == gt.part_id))
        {
            row.n_prismatic = c.prismatic.len();
            row.n_revolute = c.revolute.len();
            for p in &c.diagnostics.pruned {
                match p.reason {
                    PruneReason::ShortRange => row.pruned_short_range += 1,
                    PruneReason::Collision => row.pruned_collision += 1,
                    PruneReason::Detachment => row.pruned_detachment += 1,
                    PruneReason::PivotSuperseded => row.pruned_pivot_superseded += 1,
                }
            }
            if let (Some(axes), Some(ga)) = (c.diagnostics.axes, gt.axis) {
                row.pca_deviation = axes
                    .iter()
                    .map(|a| axis_error(a, &ga, true).expect("unit axes"))
                    .reduce(f64::min);
            }
        }
        rows.push(row);
    }
    let (r_hits, p_hits) = hits(&shape.predictions, gts);
    Ok(ShapeScore {
        rows,
        counts,
        r_hits,
        p_hits,
        recovered: recall.as_ref().map_or(0, |r| r.recovered),
        recall_total: recall.as_ref().map_or(0, |r| r.total),
    })
}

/// Scores every shape and aggregates. Means are taken only over applicable
/// parts; the counts say how many were skipped.
pub fn evaluate(shapes: &[EvalShape], cfg: &EvalConfig) -> Result<MetricsReport> {
    cfg.validate()?;
    let scores = shapes
        .par_iter()
        .map(|s| match &s.ground_truth {
            Some(gts) => score_shape(s, gts, cfg).map(Some),
            None => Ok(None),
        })
        .collect::<Result<Vec<Option<ShapeScore>>>>()?;

    let mut counts = EvalCounts::default();
    let mut rows = Vec::new();
    let (mut r_hits, mut p_hits, mut recovered, mut recall_total) = (0, 0, 0, 0);
    let with_candidates = shapes.iter().any(|s| s.candidates.is_some());
    for s in scores {
        let Some(s) = s else {
            counts.shapes_skipped += 1;
            continue;
        };
        counts.shapes += 1;
        counts.parts += s.counts.parts;
        counts.ae_parts += s.counts.ae_parts;
        counts.ae_skipped += s.counts.ae_skipped;
        counts.pe_parts += s.counts.pe_parts;
        counts.pe_skipped += s.counts.pe_skipped;
        r_hits += s.r_hits;
        p_hits += s.p_hits;
        recovered += s.recovered;
        recall_total += s.recall_total;
        rows.extend(s.rows);
    }
    if counts.parts == 0 {
        return Err(Error::Validation("no annotated parts to evaluate".into()));
    }
    let n = counts.parts as f64;
    let devs: Vec<f64> = rows.iter().filter_map(|r| r.pca_deviation).collect();
    let pca_deviation = (!devs.is_empty()).then(|| PcaDeviation {
        parts: devs.len(),
        mean_deg: devs.iter().sum::<f64>() / devs.len() as f64,
        fraction_within_5deg: devs.iter().filter(|d| **d <= 5.0).count() as f64
            / devs.len() as f64,
    });
    Ok(MetricsReport {
        ae: mean(rows.iter().filter_map(|r| r.axis_error)),
        pe: mean(rows.iter().filter_map(|r| r.point_error)),
        r_acc: r_hits as f64 / n,
        p_acc: p_hits as f64 / n,
        recall: (with_candidates && recall_total > 0)
            .then(|| recovered as f64 / recall_total as f64),
        recall_recovered: recovered,
        recall_total,
        pca_deviation,
        counts,
        per_part: rows,
    })
}

/// Per-part rows as CSV with a header. Missing values are empty cells.
pub fn report_csv(report: &MetricsReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &report.per_part {
        w.serialize(row)
            .map_err(|e| Error::InvalidInput(format!("report csv: {e}")))?;
    }
    let body = w
        .into_inner()
        .map_err(|e| Error::InvalidInput(format!("report csv: {e}")))?;
    Ok(String::from_utf8(body).expect("csv output is utf-8"))
}
