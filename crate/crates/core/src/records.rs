//! On-disk records: per-shape candidate files, prediction files and
//! articulation lists for auditing.
//!
//! Every file carries a `units` header. Lengths are in normalized model
//! units and angles in degrees. Floats are written in shortest round-trip
//! form, so a value survives a write/read cycle bit-exactly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Dir3, Point3, Vec3};
use crate::io::{de_bit, ser_bit};
use crate::motion::{FreeRange, MotionKind, MotionSpec};
use crate::search::{
    CandidateArticulation, PartDiagnostics, PrismaticCandidate, PruneReason, PrunedCandidate,
    RevoluteCandidate,
};
use crate::shape::{Normalization, Shape};

pub const CANDIDATES_FILE: &str = "candidates.json";
pub const PREDICTIONS_FILE: &str = "predictions.json";
pub const CANDIDATES_FORMAT: &str = "articand-candidates/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Units {
    pub length: String,
    pub angle: String,
}

impl Default for Units {
    fn default() -> Self {
        Units {
            length: "normalized model units".into(),
            angle: "degrees".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationRecord {
    pub scale: f64,
    pub offset: [f64; 3],
}

impl From<Normalization> for NormalizationRecord {
    fn from(n: Normalization) -> Self {
        NormalizationRecord {
            scale: n.scale,
            offset: [n.offset.x, n.offset.y, n.offset.z],
        }
    }
}

impl From<NormalizationRecord> for Normalization {
    fn from(n: NormalizationRecord) -> Self {
        Normalization {
            scale: n.scale,
            offset: Vec3::from(n.offset),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrismaticRecord {
    pub axis: [f64; 3],
    pub eigenvalue_rank: u8,
    /// `[neg, pos]` travel.
    pub range: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevoluteRecord {
    pub axis: [f64; 3],
    pub eigenvalue_rank: u8,
    pub pivot: [f64; 3],
    pub pivot_index: u8,
    /// `[neg, pos]` in degrees.
    pub range: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrunedRecord {
    pub kind: MotionKind,
    pub eigenvalue_rank: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pivot_index: Option<u8>,
    /// Degrees for revolute entries.
    pub range: [f64; 2],
    pub reason: PruneReason,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axes: Option<[[f64; 3]; 3]>,
    pub eigenvalues: [f64; 3],
    pub extent: f64,
    /// `None` when nothing else is in reach.
    pub rest_distance: Option<f64>,
    pub rest_penetration: f64,
    pub revolute_pool: usize,
    pub pruned: Vec<PrunedRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartRecord {
    pub part_id: u32,
    #[serde(serialize_with = "ser_bit", deserialize_with = "de_bit")]
    pub m_rev: bool,
    #[serde(serialize_with = "ser_bit", deserialize_with = "de_bit")]
    pub m_pri: bool,
    pub prismatic: Vec<PrismaticRecord>,
    pub revolute: Vec<RevoluteRecord>,
    pub diagnostics: DiagnosticsRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatesFile {
    pub format: String,
    pub units: Units,
    pub config_hash: String,
    pub shape_id: String,
    pub normalization: NormalizationRecord,
    pub parts: Vec<PartRecord>,
}

fn arr(p: &Point3) -> [f64; 3] {
    [p.x, p.y, p.z]
}

fn range_deg(r: &FreeRange) -> [f64; 2] {
    [r.neg.to_degrees(), r.pos.to_degrees()]
}

fn dir(a: [f64; 3], what: &str) -> Result<Dir3> {
    Dir3::new(Vec3::from(a)).map_err(|e| Error::Validation(format!("{what}: {e}")))
}

fn pruned_record(p: &PrunedCandidate) -> PrunedRecord {
    let range = match p.kind {
        MotionKind::Revolute => range_deg(&p.range),
        MotionKind::Prismatic => [p.range.neg, p.range.pos],
    };
    PrunedRecord {
        kind: p.kind,
        eigenvalue_rank: p.eigenvalue_rank,
        pivot_index: p.pivot_index,
        range,
        reason: p.reason,
    }
}

impl PartRecord {
    pub fn from_candidate(c: &CandidateArticulation) -> Self {
        let d = &c.diagnostics;
        PartRecord {
            part_id: c.part_id,
            m_rev: c.m_rev,
            m_pri: c.m_pri,
            prismatic: c
                .prismatic
                .iter()
                .map(|p| PrismaticRecord {
                    axis: p.axis.to_array(),
                    eigenvalue_rank: p.eigenvalue_rank,
                    range: [p.range.neg, p.range.pos],
                })
                .collect(),
            revolute: c
                .revolute
                .iter()
                .map(|r| RevoluteRecord {
                    axis: r.axis.to_array(),
                    eigenvalue_rank: r.eigenvalue_rank,
                    pivot: arr(&r.pivot),
                    pivot_index: r.pivot_index,
                    range: range_deg(&r.range),
                })
                .collect(),
            diagnostics: DiagnosticsRecord {
                axes: d.axes.map(|a| a.map(Dir3::to_array)),
                eigenvalues: d.eigenvalues,
                extent: d.extent,
                rest_distance: d.rest_distance.is_finite().then_some(d.rest_distance),
                rest_penetration: d.rest_penetration,
                revolute_pool: d.revolute_pool,
                pruned: d.pruned.iter().map(pruned_record).collect(),
                message: d.message.clone(),
            },
        }
    }

    /// Back to in-memory form. Angles return to radians.
    pub fn to_candidate(&self) -> Result<CandidateArticulation> {
        let id = self.part_id;
        let what = |k: &str| format!("part {id} {k} axis");
        let prismatic = self
            .prismatic
            .iter()
            .map(|p| {
                Ok(PrismaticCandidate {
                    axis: dir(p.axis, &what("prismatic"))?,
                    eigenvalue_rank: p.eigenvalue_rank,
                    range: FreeRange {
                        neg: p.range[0],
                        pos: p.range[1],
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let revolute = self
            .revolute
            .iter()
            .map(|r| {
                Ok(RevoluteCandidate {
                    axis: dir(r.axis, &what("revolute"))?,
                    eigenvalue_rank: r.eigenvalue_rank,
                    pivot: Point3::from(r.pivot),
                    pivot_index: r.pivot_index,
                    range: FreeRange {
                        neg: r.range[0].to_radians(),
                        pos: r.range[1].to_radians(),
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if self.m_rev != !revolute.is_empty() || self.m_pri != !prismatic.is_empty() {
            return Err(Error::Validation(format!(
                "part {id}: motion bits disagree with the candidate lists"
            )));
        }
        let d = &self.diagnostics;
        let axes = match d.axes {
            Some([a, b, c]) => Some([
                dir(a, &what("principal"))?,
                dir(b, &what("principal"))?,
                dir(c, &what("principal"))?,
            ]),
            None => None,
        };
        let pruned = d
            .pruned
            .iter()
            .map(|p| {
                let range = match p.kind {
                    MotionKind::Revolute => FreeRange {
                        neg: p.range[0].to_radians(),
                        pos: p.range[1].to_radians(),
                    },
                    MotionKind::Prismatic => FreeRange {
                        neg: p.range[0],
                        pos: p.range[1],
                    },
                };
                PrunedCandidate {
                    kind: p.kind,
                    eigenvalue_rank: p.eigenvalue_rank,
                    pivot_index: p.pivot_index,
                    range,
                    reason: p.reason,
                }
            })
            .collect();
        Ok(CandidateArticulation {
            part_id: id,
            m_rev: self.m_rev,
            m_pri: self.m_pri,
            prismatic,
            revolute,
            diagnostics: PartDiagnostics {
                axes,
                eigenvalues: d.eigenvalues,
                extent: d.extent,
                rest_distance: d.rest_distance.unwrap_or(f64::INFINITY),
                rest_penetration: d.rest_penetration,
                revolute_pool: d.revolute_pool,
                pruned,
                message: d.message.clone(),
            },
        })
    }
}

impl CandidatesFile {
    pub fn new(shape: &Shape, candidates: &[CandidateArticulation], config_hash: &str) -> Self {
        CandidatesFile {
            format: CANDIDATES_FORMAT.into(),
            units: Units::default(),
            config_hash: config_hash.into(),
            shape_id: shape.id.clone(),
            normalization: shape.normalization.into(),
            parts: candidates.iter().map(PartRecord::from_candidate).collect(),
        }
    }

    pub fn candidates(&self) -> Result<Vec<CandidateArticulation>> {
        self.parts.iter().map(PartRecord::to_candidate).collect()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f: CandidatesFile = crate::io::read_json(path)?;
        if f.format != CANDIDATES_FORMAT {
            return Err(Error::Validation(format!(
                "{}: unsupported format {:?}",
                path.display(),
                f.format
            )));
        }
        Ok(f)
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("records serialize") + "\n"
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionPartRecord {
    pub part_id: u32,
    #[serde(serialize_with = "ser_bit", deserialize_with = "de_bit")]
    pub m_rev: bool,
    #[serde(serialize_with = "ser_bit", deserialize_with = "de_bit")]
    pub m_pri: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pivot: Option<[f64; 3]>,
}

/// One prediction per part, in the normalized frame. When `normalization`
/// is given, ground truth is mapped with it instead of being recomputed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionsFile {
    pub shape_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<NormalizationRecord>,
    pub parts: Vec<PredictionPartRecord>,
}

impl PredictionPartRecord {
    pub fn to_prediction(&self) -> Result<crate::eval::PredictionRecord> {
        let p = crate::eval::PredictionRecord {
            part_id: self.part_id,
            m_rev: self.m_rev,
            m_pri: self.m_pri,
            axis: self
                .axis
                .map(|a| dir(a, &format!("part {} predicted axis", self.part_id)))
                .transpose()?,
            pivot: self.pivot.map(Point3::from),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn from_prediction(p: &crate::eval::PredictionRecord) -> Self {
        PredictionPartRecord {
            part_id: p.part_id,
            m_rev: p.m_rev,
            m_pri: p.m_pri,
            axis: p.axis.map(Dir3::to_array),
            pivot: p.pivot.as_ref().map(arr),
        }
    }
}

/// Coordinate frame of a hand-written articulation list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// The frame of the input meshes.
    #[default]
    Original,
    Normalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArticulationRecord {
    /// Needed only when the dataset holds several shapes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape_id: Option<String>,
    pub part_id: u32,
    pub kind: MotionKind,
    pub axis: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pivot: Option<[f64; 3]>,
    /// Degrees for revolute, lengths for prismatic, in `frame` units.
    pub range: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArticulationFile {
    #[serde(default)]
    pub frame: Frame,
    #[serde(default)]
    pub articulations: Vec<ArticulationRecord>,
}

impl ArticulationFile {
    /// Parses an articulation list. Blank input is an empty list.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        if text.trim().is_empty() {
            return Ok(ArticulationFile::default());
        }
        serde_json::from_str(text).map_err(|e| Error::Parse {
            file: path.to_path_buf(),
            line: e.line(),
            msg: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::NotFound(path.to_path_buf()))
            }
            Err(e) => return Err(Error::io(path, e)),
        };
        ArticulationFile::parse(&text, path)
    }
}

impl ArticulationRecord {
    /// Motion and range in the normalized frame, internal units.
    pub fn to_motion(&self, frame: Frame, norm: &Normalization) -> Result<(MotionSpec, [f64; 2])> {
        let axis = Dir3::normalize(Vec3::from(self.axis))
            .map_err(|e| Error::Validation(format!("part {} axis: {e}", self.part_id)))?;
        let map = |p: Point3| match frame {
            Frame::Original => norm.apply(&p),
            Frame::Normalized => p,
        };
        match self.kind {
            MotionKind::Revolute => {
                let pivot = self.pivot.ok_or_else(|| {
                    Error::Validation(format!("part {}: revolute needs a pivot", self.part_id))
                })?;
                Ok((
                    MotionSpec::revolute(axis, map(Point3::from(pivot))),
                    self.range.map(f64::to_radians),
                ))
            }
            MotionKind::Prismatic => {
                let s = match frame {
                    Frame::Original => norm.scale,
                    Frame::Normalized => 1.0,
                };
                Ok((MotionSpec::prismatic(axis), self.range.map(|t| t * s)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::{prepare_and_search, SearchConfig};
    use crate::synth::{cabinet, CabinetOptions};

    #[test]
    fn candidates_file_round_trips() {
        let (shape, cands) =
            prepare_and_search(cabinet(&CabinetOptions::default()), &SearchConfig::default())
                .unwrap();
        let file = CandidatesFile::new(&shape, &cands, "abc");
        let text = to_json_string(&file);
        let back: CandidatesFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, file);
        assert_eq!(to_json_string(&back), text);

        let again = back.candidates().unwrap();
        assert_eq!(again.len(), cands.len());
        for (a, b) in again.iter().zip(&cands) {
            assert_eq!((a.m_rev, a.m_pri), (b.m_rev, b.m_pri));
            assert_eq!(a.prismatic, b.prismatic);
            for (x, y) in a.revolute.iter().zip(&b.revolute) {
                assert_eq!((x.axis, x.pivot), (y.axis, y.pivot));
                assert!((x.range.pos - y.range.pos).abs() < 1e-12);
                assert!((x.range.neg - y.range.neg).abs() < 1e-12);
            }
            assert_eq!(a.diagnostics.pruned.len(), b.diagnostics.pruned.len());
        }
        assert!(text.contains("\"angle\": \"degrees\""));
    }

    #[test]
    fn bits_must_match_lists() {
        let mut p = PartRecord::from_candidate(&CandidateArticulation::fixed(0, "x"));
        p.m_rev = true;
        assert!(matches!(p.to_candidate(), Err(Error::Validation(_))));
    }

    #[test]
    fn empty_articulation_file() {
        let f = ArticulationFile::parse("  \n", Path::new("a.json")).unwrap();
        assert!(f.articulations.is_empty());
        let f = ArticulationFile::parse(
            r#"{"frame": "normalized", "articulations": [
                {"part_id": 1, "kind": "revolute", "axis": [0, 1, 0],
                 "pivot": [0, 0, 0], "range": [0, 90]}]}"#,
            Path::new("a.json"),
        )
        .unwrap();
        assert_eq!(f.frame, Frame::Normalized);
        assert_eq!(f.articulations[0].kind, MotionKind::Revolute);
        assert!(ArticulationFile::parse("{\"bogus\": 1}", Path::new("a.json")).is_err());
    }
}
