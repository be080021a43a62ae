//! `validate`: re-simulate hand-written articulations.

use std::path::{Path, PathBuf};

use articand_core::audit::{audit_articulation, AuditResult};
use articand_core::io::{list_shape_dirs, load_shape};
use articand_core::records::{ArticulationFile, Frame, Units};
use articand_core::search::{build_colliders, SearchConfig};
use articand_core::shape::prepare_shape;
use articand_core::{Error, Result};
use serde::Serialize;

use crate::config::config_hash;

#[derive(Debug, Clone, Serialize)]
pub struct ValidationEntry {
    pub shape_id: String,
    #[serde(flatten)]
    pub result: AuditResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub units: Units,
    pub frame: Frame,
    pub config: SearchConfig,
    pub config_hash: String,
    pub results: Vec<ValidationEntry>,
}

/// Audits every articulation in `file` against the shapes under `dataset`.
pub fn run_validate(dataset: &Path, file: &Path, cfg: &SearchConfig) -> Result<ValidationReport> {
    cfg.validate()?;
    let list = ArticulationFile::load(file)?;
    let mut report = ValidationReport {
        units: Units::default(),
        frame: list.frame,
        config: *cfg,
        config_hash: config_hash(cfg),
        results: Vec::new(),
    };
    if list.articulations.is_empty() {
        return Ok(report);
    }
    let dirs: Vec<PathBuf> = list_shape_dirs(dataset)?;
    let shapes = dirs.iter().map(|d| load_shape(d)).collect::<Result<Vec<_>>>()?;

    // Group by shape, keeping file order within each shape.
    let mut wanted: Vec<Vec<usize>> = vec![Vec::new(); shapes.len()];
    for (i, a) in list.articulations.iter().enumerate() {
        let s = match &a.shape_id {
            Some(id) => shapes.iter().position(|s| &s.id == id).ok_or_else(|| {
                Error::Validation(format!("unknown shape id {id}"))
            })?,
            None if shapes.len() == 1 => 0,
            None => {
                return Err(Error::Validation(format!(
                    "articulation {i}: shape_id is required for a dataset of {} shapes",
                    shapes.len()
                )))
            }
        };
        if shapes[s].part(a.part_id).is_none() {
            return Err(Error::Validation(format!(
                "shape {}: unknown part id {}",
                shapes[s].id, a.part_id
            )));
        }
        wanted[s].push(i);
    }

    let mut entries: Vec<(usize, ValidationEntry)> = Vec::new();
    for (shape, idx) in shapes.into_iter().zip(wanted) {
        if idx.is_empty() {
            continue;
        }
        let shape = prepare_shape(shape, cfg.sample_count, cfg.seed)?;
        let colliders = build_colliders(&shape);
        for i in idx {
            let a = &list.articulations[i];
            let part = shape
                .parts
                .iter()
                .position(|p| p.id == a.part_id)
                .expect("checked above");
            let (motion, range) = a.to_motion(list.frame, &shape.normalization)?;
            let result = audit_articulation(&shape, &colliders, part, &motion, range, cfg)?;
            entries.push((
                i,
                ValidationEntry {
                    shape_id: shape.id.clone(),
                    result,
                },
            ));
        }
    }
    entries.sort_by_key(|(i, _)| *i);
    report.results = entries.into_iter().map(|(_, e)| e).collect();
    Ok(report)
}
