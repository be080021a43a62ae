//! Shape directories on disk.
//!
//! A shape directory holds a `shape.json` manifest and one triangulated OBJ
//! file per part:
//!
//! ```json
//! {
//!   "id": "cabinet_01",
//!   "up_axis": "y",
//!   "parts": [
//!     { "id": 0, "mesh": "part_000.obj", "label": "body" },
//!     { "id": 1, "mesh": "part_001.obj",
//!       "gt": { "m_rev": 1, "m_pri": 0, "axis": [0, 1, 0], "pivot": [0, 0, 0],
//!               "range": { "revolute": [0, 120] } } }
//!   ]
//! }
//! ```
//!
//! Only `v` and three-vertex `f` records of the OBJ files are read; other
//! records are skipped with a warning. Written files use 17 significant
//! digits so a load/save/load cycle is bit-exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geom::{Dir3, Point3, Vec3};
use crate::mesh::TriMesh;
use crate::shape::{GroundTruthArticulation, GtRange, Part, Shape};

pub const MANIFEST_FILE: &str = "shape.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub id: String,
    pub parts: Vec<ManifestPart>,
    #[serde(default = "default_up_axis")]
    pub up_axis: String,
}

fn default_up_axis() -> String {
    "y".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestPart {
    pub id: u32,
    pub mesh: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt: Option<GtRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtRecord {
    #[serde(serialize_with = "ser_bit", deserialize_with = "de_bit")]
    pub m_rev: bool,
    #[serde(serialize_with = "ser_bit", deserialize_with = "de_bit")]
    pub m_pri: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pivot: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<GtRangeRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtRangeRecord {
    /// Degrees.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revolute: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prismatic: Option<[f64; 2]>,
}

pub(crate) fn ser_bit<S: Serializer>(v: &bool, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u8(u8::from(*v))
}

pub(crate) fn de_bit<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<bool, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Bit {
        Int(u64),
        Bool(bool),
    }
    match Bit::deserialize(d)? {
        Bit::Bool(b) => Ok(b),
        Bit::Int(0) => Ok(false),
        Bit::Int(1) => Ok(true),
        Bit::Int(n) => Err(serde::de::Error::custom(format!(
            "motion bit must be 0 or 1, got {n}"
        ))),
    }
}

impl GtRecord {
    pub fn to_articulation(&self, part_id: u32) -> Result<GroundTruthArticulation> {
        let axis = match self.axis {
            Some(a) => {
                let v = Vec3::from(a);
                if (v.norm() - 1.0).abs() > 1e-6 {
                    log::warn!(
                        "part {part_id}: ground-truth axis {a:?} is not unit length, normalizing"
                    );
                }
                Some(
                    Dir3::normalize(v)
                        .map_err(|e| Error::Validation(format!("part {part_id}: {e}")))?,
                )
            }
            None => None,
        };
        let gt = GroundTruthArticulation {
            part_id,
            m_rev: self.m_rev,
            m_pri: self.m_pri,
            axis,
            pivot: self.pivot.map(Point3::from),
            range: self.range.map(|r| GtRange {
                revolute_deg: r.revolute,
                prismatic: r.prismatic,
            }),
        };
        gt.validate()?;
        Ok(gt)
    }

    pub fn from_articulation(gt: &GroundTruthArticulation) -> Self {
        GtRecord {
            m_rev: gt.m_rev,
            m_pri: gt.m_pri,
            axis: gt.axis.map(Dir3::to_array),
            pivot: gt.pivot.map(|p| [p.x, p.y, p.z]),
            range: gt.range.map(|r| GtRangeRecord {
                revolute: r.revolute_deg,
                prismatic: r.prismatic,
            }),
        }
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::NotFound(path.to_path_buf()))
        }
        Err(e) => return Err(Error::io(path, e)),
    };
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        file: path.to_path_buf(),
        line: e.line(),
        msg: e.to_string(),
    })
}

/// Loads a shape directory without normalizing or sampling it.
pub fn load_shape(dir: &Path) -> Result<Shape> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest: ManifestFile = read_json(&manifest_path)?;
    if manifest.parts.is_empty() {
        return Err(Error::Validation(format!(
            "{}: shape has no parts",
            manifest_path.display()
        )));
    }
    let mut parts = Vec::with_capacity(manifest.parts.len());
    for mp in &manifest.parts {
        if parts.iter().any(|p: &Part| p.id == mp.id) {
            return Err(Error::Validation(format!("duplicate part id {}", mp.id)));
        }
        let mesh_path = dir.join(&mp.mesh);
        let mesh = load_obj(&mesh_path)?;
        mesh.validate()
            .map_err(|e| Error::Validation(format!("part {} ({}): {e}", mp.id, mp.mesh)))?;
        let degenerate = mesh.degenerate_triangles();
        if !degenerate.is_empty() {
            log::warn!(
                "part {} ({}): {} zero-area triangles will be ignored by collision queries",
                mp.id,
                mp.mesh,
                degenerate.len()
            );
        }
        let mut part = Part::new(mp.id, mesh);
        part.label = mp.label.clone();
        part.gt = mp
            .gt
            .as_ref()
            .map(|g| g.to_articulation(mp.id))
            .transpose()?;
        parts.push(part);
    }
    let mut shape = Shape::new(manifest.id, parts);
    shape.up_axis = manifest.up_axis;
    Ok(shape)
}

/// Writes `shape` as a shape directory, one `part_NNN.obj` per part.
pub fn save_shape(shape: &Shape, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut parts = Vec::with_capacity(shape.parts.len());
    for part in &shape.parts {
        let name = format!("part_{:03}.obj", part.id);
        let path = dir.join(&name);
        fs::write(&path, write_obj(&part.mesh)).map_err(|e| Error::io(&path, e))?;
        parts.push(ManifestPart {
            id: part.id,
            mesh: name,
            label: part.label.clone(),
            gt: part.gt.as_ref().map(GtRecord::from_articulation),
        });
    }
    let manifest = ManifestFile {
        id: shape.id.clone(),
        parts,
        up_axis: shape.up_axis.clone(),
    };
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
}

pub fn load_obj(path: &Path) -> Result<TriMesh> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::NotFound(path.to_path_buf()))
        }
        Err(e) => return Err(Error::io(path, e)),
    };
    parse_obj(&text, path)
}

pub fn parse_obj(text: &str, path: &Path) -> Result<TriMesh> {
    let err = |line: usize, msg: String| Error::Parse {
        file: path.to_path_buf(),
        line,
        msg,
    };
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut ignored: BTreeMap<String, usize> = BTreeMap::new();

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut tok = line.split_whitespace();
        let Some(kind) = tok.next() else { continue };
        match kind {
            "v" => {
                let mut c = [0.0; 3];
                for slot in &mut c {
                    let t = tok
                        .next()
                        .ok_or_else(|| err(lineno, "vertex needs 3 coordinates".into()))?;
                    *slot = t
                        .parse::<f64>()
                        .map_err(|e| err(lineno, format!("bad coordinate {t:?}: {e}")))?;
                }
                vertices.push(Point3::from(c));
            }
            "f" => {
                let refs: Vec<&str> = tok.collect();
                if refs.len() != 3 {
                    *ignored
                        .entry(format!("f with {} vertices", refs.len()))
                        .or_default() += 1;
                    continue;
                }
                let mut tri = [0u32; 3];
                for (slot, r) in tri.iter_mut().zip(refs) {
                    let idx = r.split('/').next().unwrap_or("");
                    let v: i64 = idx
                        .parse()
                        .map_err(|e| err(lineno, format!("bad face index {r:?}: {e}")))?;
                    let resolved = match v {
                        0 => return Err(err(lineno, "face index 0 is invalid".into())),
                        v if v > 0 => v - 1,
                        v => vertices.len() as i64 + v,
                    };
                    if resolved < 0 || resolved > i64::from(u32::MAX) {
                        return Err(err(lineno, format!("face index {v} out of range")));
                    }
                    *slot = resolved as u32;
                }
                triangles.push(tri);
            }
            other => *ignored.entry(other.to_string()).or_default() += 1,
        }
    }
    for (kind, n) in &ignored {
        log::warn!(
            "{}: ignored {n} OBJ record(s) of kind {kind:?}",
            path.display()
        );
    }
    Ok(TriMesh {
        vertices,
        triangles,
    })
}

pub fn write_obj(mesh: &TriMesh) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {:.16e} {:.16e} {:.16e}", v.x, v.y, v.z);
    }
    for t in &mesh.triangles {
        let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out
}

/// Shape directories under `dataset`, sorted by name. A directory that is
/// itself a shape directory is returned alone.
pub fn list_shape_dirs(dataset: &Path) -> Result<Vec<PathBuf>> {
    if dataset.join(MANIFEST_FILE).is_file() {
        return Ok(vec![dataset.to_path_buf()]);
    }
    let entries = match fs::read_dir(dataset) {
        Ok(e) => e,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::NotFound(dataset.to_path_buf()))
        }
        Err(e) => return Err(Error::io(dataset, e)),
    };
    let mut dirs = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dataset, e))?;
        let path = entry.path();
        if path.is_dir() && path.join(MANIFEST_FILE).is_file() {
            dirs.push(path);
        }
    }
    dirs.sort();
    Ok(dirs)
}
