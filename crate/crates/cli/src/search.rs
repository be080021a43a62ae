//! `search`: candidate discovery over a dataset directory.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use articand_core::io::{list_shape_dirs, load_shape};
use articand_core::records::{write_json, CandidatesFile, Units, CANDIDATES_FILE};
use articand_core::search::{prepare_and_search, SearchConfig};
use articand_core::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::config_hash;

pub const RUN_MANIFEST_FILE: &str = "run_manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeStatus {
    Ok,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShapeEntry {
    /// Name of the shape directory; also the output subdirectory.
    pub dir: String,
    pub shape_id: Option<String>,
    pub status: ShapeStatus,
    pub message: Option<String>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub units: Units,
    pub config: SearchConfig,
    pub config_hash: String,
    pub dataset: String,
    pub workers: usize,
    pub shapes: Vec<ShapeEntry>,
    pub wall_time_s: f64,
}

pub(crate) fn dir_name(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "shape".into())
}

fn search_one(dir: &Path, cfg: &SearchConfig, hash: &str) -> Result<CandidatesFile> {
    let shape = load_shape(dir)?;
    let (shape, cands) = prepare_and_search(shape, cfg)?;
    Ok(CandidatesFile::new(&shape, &cands, hash))
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into())
}

pub struct SearchOutcome {
    pub manifest: RunManifest,
    pub failures: usize,
}

/// Searches every shape under `dataset`, writing `<out>/<dir>/candidates.json`
/// and `<out>/run_manifest.json`. Per-shape failures are recorded and do not
/// stop the run.
pub fn run_search(
    dataset: &Path,
    out: &Path,
    cfg: &SearchConfig,
    workers: Option<usize>,
) -> Result<SearchOutcome> {
    cfg.validate()?;
    let start = Instant::now();
    let dirs = list_shape_dirs(dataset)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let workers = workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let hash = config_hash(cfg);

    let results: Vec<(PathBuf, Result<CandidatesFile>, f64)> = pool.install(|| {
        dirs.par_iter()
            .map(|d| {
                let t = Instant::now();
                let r = catch_unwind(AssertUnwindSafe(|| search_one(d, cfg, &hash)))
                    .unwrap_or_else(|p| {
                        Err(Error::Numeric(format!("search panicked: {}", panic_message(p))))
                    });
                (d.clone(), r, t.elapsed().as_secs_f64())
            })
            .collect()
    });

    let mut shapes = Vec::with_capacity(results.len());
    let mut failures = 0;
    for (dir, result, secs) in results {
        let name = dir_name(&dir);
        let entry = match result.and_then(|file| {
            let sub = out.join(&name);
            fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
            write_json(&sub.join(CANDIDATES_FILE), &file)?;
            Ok(file.shape_id)
        }) {
            Ok(id) => ShapeEntry {
                dir: name,
                shape_id: Some(id),
                status: ShapeStatus::Ok,
                message: None,
                wall_time_s: secs,
            },
            Err(e) => {
                log::error!("{}: {e}", dir.display());
                // never leave an older run's file next to a failure
                let _ = fs::remove_file(out.join(&name).join(CANDIDATES_FILE));
                failures += 1;
                ShapeEntry {
                    dir: name,
                    shape_id: None,
                    status: ShapeStatus::Error,
                    message: Some(e.to_string()),
                    wall_time_s: secs,
                }
            }
        };
        shapes.push(entry);
    }

    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        units: Units::default(),
        config: *cfg,
        config_hash: hash,
        dataset: dataset.display().to_string(),
        workers,
        shapes,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    write_json(&out.join(RUN_MANIFEST_FILE), &manifest)?;
    Ok(SearchOutcome { manifest, failures })
}
