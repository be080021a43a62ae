//! `export-labels`: one flat label table from a tree of candidate files.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use articand_core::labels::{write_labels, LabelRow};
use articand_core::records::{CandidatesFile, CANDIDATES_FILE};
use articand_core::{Error, Result};

/// `dir/candidates.json` if present, else `dir/*/candidates.json` sorted by
/// subdirectory name.
pub fn candidate_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let direct = dir.join(CANDIDATES_FILE);
    if direct.is_file() {
        return Ok(vec![direct]);
    }
    let entries = fs::read_dir(dir).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound(dir.to_path_buf()),
        _ => Error::io(dir, e),
    })?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path().join(CANDIDATES_FILE);
        if path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Error::NotFound(dir.join("*").join(CANDIDATES_FILE)));
    }
    Ok(files)
}

/// Writes the label table for every candidate file under `candidates_dir`.
/// Returns the number of rows.
pub fn run_export_labels(candidates_dir: &Path, out_file: &Path) -> Result<usize> {
    let mut rows = Vec::new();
    let mut hashes = BTreeSet::new();
    for path in candidate_files(candidates_dir)? {
        let file = CandidatesFile::load(&path)?;
        hashes.insert(file.config_hash.clone());
        for part in &file.parts {
            rows.push(
                LabelRow::from_part(&file.shape_id, part)
                    .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?,
            );
        }
    }
    let comment = format!(
        "config_hash: {}",
        hashes.into_iter().collect::<Vec<_>>().join(" ")
    );
    let text = write_labels(&rows, &[comment])?;
    if let Some(parent) = out_file.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(out_file, text).map_err(|e| Error::io(out_file, e))?;
    Ok(rows.len())
}
