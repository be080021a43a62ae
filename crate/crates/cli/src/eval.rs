//! `eval`: score candidate or prediction files against dataset annotations.

use std::fs;
use std::path::{Path, PathBuf};

use articand_core::eval::{evaluate, report_csv, EvalConfig, EvalShape, MetricsReport, PredictionRecord};
use articand_core::io::{list_shape_dirs, load_shape, read_json};
use articand_core::records::{
    write_json, CandidatesFile, PredictionsFile, Units, CANDIDATES_FILE, PREDICTIONS_FILE,
};
use articand_core::search::SearchConfig;
use articand_core::shape::{prepare_shape, GroundTruthArticulation, Normalization, Shape};
use articand_core::{Error, Result};
use serde::Serialize;

use crate::config::config_hash;
use crate::search::dir_name;

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";

#[derive(Debug, Clone, Serialize)]
pub struct EvalEcho {
    #[serde(flatten)]
    pub eval: EvalConfig,
    /// Used only when a prediction file carries no normalization.
    pub search: SearchConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportFile {
    pub units: Units,
    pub config: EvalEcho,
    pub config_hash: String,
    #[serde(flatten)]
    pub report: MetricsReport,
}

enum Source {
    Candidates(CandidatesFile),
    Predictions(PredictionsFile),
}

fn find_source(root: &Path, name: &str, single: bool) -> Result<Option<Source>> {
    let mut dirs = vec![root.join(name)];
    if single {
        dirs.push(root.to_path_buf());
    }
    for d in dirs {
        let c = d.join(CANDIDATES_FILE);
        if c.is_file() {
            return CandidatesFile::load(&c).map(|f| Some(Source::Candidates(f)));
        }
        let p = d.join(PREDICTIONS_FILE);
        if p.is_file() {
            return read_json(&p).map(|f| Some(Source::Predictions(f)));
        }
    }
    Ok(None)
}

/// Ground truth in dataset part order. Parts without an annotation count as
/// fixed once any part of the shape is annotated.
fn ground_truth(shape: &Shape, norm: &Normalization) -> Option<Vec<GroundTruthArticulation>> {
    shape.has_ground_truth().then(|| {
        shape
            .parts
            .iter()
            .map(|p| {
                p.gt
                    .map(|g| g.normalized(norm))
                    .unwrap_or_else(|| GroundTruthArticulation::fixed(p.id))
            })
            .collect()
    })
}

/// Reorders `preds` to `order`. Any id that is not in both lists is an error
/// naming the first offender.
fn align(
    shape_id: &str,
    order: &[u32],
    mut preds: Vec<PredictionRecord>,
) -> Result<Vec<PredictionRecord>> {
    let mut out = Vec::with_capacity(order.len());
    for id in order {
        let i = preds.iter().position(|p| p.part_id == *id).ok_or_else(|| {
            Error::Validation(format!("shape {shape_id}: no prediction for part {id}"))
        })?;
        out.push(preds.swap_remove(i));
    }
    if let Some(extra) = preds.first() {
        return Err(Error::Validation(format!(
            "shape {shape_id}: prediction for unknown part {}",
            extra.part_id
        )));
    }
    Ok(out)
}

fn load_eval_shape(
    dir: &Path,
    preds_root: &Path,
    single: bool,
    search: &SearchConfig,
) -> Result<Option<EvalShape>> {
    let name = dir_name(dir);
    let Some(source) = find_source(preds_root, &name, single)? else {
        log::warn!("{}: no candidate or prediction file, skipped", dir.display());
        return Ok(None);
    };
    let shape = load_shape(dir)?;
    let (file_id, norm, preds, cands) = match source {
        Source::Candidates(f) => {
            let cands = f.candidates()?;
            let preds = cands.iter().map(PredictionRecord::from_candidates).collect();
            (f.shape_id, Some(f.normalization.into()), preds, Some(cands))
        }
        Source::Predictions(f) => {
            let preds = f
                .parts
                .iter()
                .map(|p| p.to_prediction())
                .collect::<Result<Vec<_>>>()?;
            (f.shape_id, f.normalization.map(Normalization::from), preds, None)
        }
    };
    if file_id != shape.id {
        return Err(Error::Validation(format!(
            "{}: predictions are for shape {file_id}, dataset has {}",
            dir.display(),
            shape.id
        )));
    }
    let gts = match shape.has_ground_truth() {
        false => {
            log::warn!("{}: no ground truth, skipped", dir.display());
            None
        }
        true => {
            let norm = match norm {
                Some(n) => n,
                None => prepare_shape(shape.clone(), search.sample_count, search.seed)?.normalization,
            };
            ground_truth(&shape, &norm)
        }
    };
    let order: Vec<u32> = shape.parts.iter().map(|p| p.id).collect();
    let predictions = align(&shape.id, &order, preds)?;
    let candidates = cands
        .map(|c| {
            let ids: Vec<u32> = c.iter().map(|x| x.part_id).collect();
            (ids == order).then_some(c).ok_or_else(|| {
                Error::Validation(format!("shape {}: candidate parts out of order", shape.id))
            })
        })
        .transpose()?;
    Ok(Some(EvalShape {
        shape_id: shape.id,
        predictions,
        ground_truth: gts,
        candidates,
    }))
}

/// Evaluates everything under `preds_root` against `dataset` and writes
/// `report.json` and `report.csv` into `out`.
pub fn run_eval(
    preds_root: &Path,
    dataset: &Path,
    out: &Path,
    cfg: &EvalConfig,
    search: &SearchConfig,
) -> Result<MetricsReport> {
    cfg.validate()?;
    let dirs: Vec<PathBuf> = list_shape_dirs(dataset)?;
    let single = dirs.len() == 1;
    let mut shapes = Vec::new();
    let mut missing = 0;
    for d in &dirs {
        match load_eval_shape(d, preds_root, single, search)? {
            Some(s) => shapes.push(s),
            None => missing += 1,
        }
    }
    let mut report = evaluate(&shapes, cfg)?;
    report.counts.shapes_skipped += missing;

    let echo = EvalEcho {
        eval: *cfg,
        search: *search,
    };
    let hash = config_hash(&echo);
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let file = ReportFile {
        units: Units::default(),
        config: echo,
        config_hash: hash.clone(),
        report,
    };
    write_json(&out.join(REPORT_JSON), &file)?;
    let csv = format!(
        "# config_hash: {hash}; lengths in normalized model units; angles in degrees\n{}",
        report_csv(&file.report)?
    );
    let path = out.join(REPORT_CSV);
    fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
    Ok(file.report)
}
