//! Flat pretraining label table.
//!
//! One CSV row per part. After `shape_id,part_id,m_rev,m_pri` come three axis
//! slots, slot `k` holding the candidates on the part's `k`-th principal axis
//! (slot 0 = largest eigenvalue). Each slot has 12 columns:
//!
//! | column            | meaning                                        |
//! |-------------------|------------------------------------------------|
//! | `a{k}_x,y,z`      | axis, zeros if both masks are 0                |
//! | `a{k}_rev`        | 1 if a revolute candidate uses this axis       |
//! | `a{k}_px,py,pz`   | its pivot, zeros if masked                     |
//! | `a{k}_rev_lo,hi`  | its range in degrees, zeros if masked          |
//! | `a{k}_pri`        | 1 if a prismatic candidate uses this axis      |
//! | `a{k}_pri_lo,hi`  | its travel in normalized units, zeros if masked |
//!
//! The file starts with a `#` comment line naming the units, then the
//! header row. Numbers are written in shortest round-trip form.

use crate::error::{Error, Result};
use crate::records::PartRecord;

pub const LABEL_SLOTS: usize = 3;
pub const LABELS_COMMENT: &str =
    "# articand labels v1; lengths in normalized model units; angles in degrees; slot k = k-th principal axis by eigenvalue";

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AxisSlot {
    pub axis: [f64; 3],
    pub rev: bool,
    pub pivot: [f64; 3],
    pub rev_range_deg: [f64; 2],
    pub pri: bool,
    pub pri_range: [f64; 2],
}

impl AxisSlot {
    pub fn is_masked(&self) -> bool {
        !self.rev && !self.pri
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelRow {
    pub shape_id: String,
    pub part_id: u32,
    pub m_rev: bool,
    pub m_pri: bool,
    pub slots: [AxisSlot; LABEL_SLOTS],
}

pub fn label_header() -> Vec<String> {
    let mut h: Vec<String> = ["shape_id", "part_id", "m_rev", "m_pri"]
        .map(String::from)
        .to_vec();
    for k in 0..LABEL_SLOTS {
        for c in [
            "x", "y", "z", "rev", "px", "py", "pz", "rev_lo", "rev_hi", "pri", "pri_lo", "pri_hi",
        ] {
            h.push(format!("a{k}_{c}"));
        }
    }
    h
}

fn slot_for(slots: &mut [AxisSlot; LABEL_SLOTS], rank: u8, part: u32) -> Result<&mut AxisSlot> {
    slots.get_mut(usize::from(rank)).ok_or_else(|| {
        Error::Validation(format!("part {part}: eigenvalue rank {rank} out of range"))
    })
}

impl LabelRow {
    pub fn from_part(shape_id: &str, part: &PartRecord) -> Result<Self> {
        let mut slots = [AxisSlot::default(); LABEL_SLOTS];
        let id = part.part_id;
        for r in &part.revolute {
            let s = slot_for(&mut slots, r.eigenvalue_rank, id)?;
            if s.rev {
                return Err(Error::Validation(format!(
                    "part {id}: two revolute candidates on axis {}",
                    r.eigenvalue_rank
                )));
            }
            s.axis = r.axis;
            s.rev = true;
            s.pivot = r.pivot;
            s.rev_range_deg = r.range;
        }
        for p in &part.prismatic {
            let s = slot_for(&mut slots, p.eigenvalue_rank, id)?;
            if s.pri {
                return Err(Error::Validation(format!(
                    "part {id}: two prismatic candidates on axis {}",
                    p.eigenvalue_rank
                )));
            }
            s.axis = p.axis;
            s.pri = true;
            s.pri_range = p.range;
        }
        Ok(LabelRow {
            shape_id: shape_id.to_string(),
            part_id: id,
            m_rev: part.m_rev,
            m_pri: part.m_pri,
            slots,
        })
    }

    fn fields(&self) -> Vec<String> {
        let b = |v: bool| if v { "1" } else { "0" }.to_string();
        let f = |v: f64| format!("{v}");
        let mut out = vec![
            self.shape_id.clone(),
            self.part_id.to_string(),
            b(self.m_rev),
            b(self.m_pri),
        ];
        for s in &self.slots {
            out.extend(s.axis.map(f));
            out.push(b(s.rev));
            out.extend(s.pivot.map(f));
            out.extend(s.rev_range_deg.map(f));
            out.push(b(s.pri));
            out.extend(s.pri_range.map(f));
        }
        out
    }

    fn from_fields(rec: &csv::StringRecord, line: usize) -> Result<Self> {
        let err = |msg: String| Error::Parse {
            file: "labels".into(),
            line,
            msg,
        };
        if rec.len() != 4 + 12 * LABEL_SLOTS {
            return Err(err(format!("expected {} columns, got {}", 4 + 12 * LABEL_SLOTS, rec.len())));
        }
        let bit = |i: usize| match &rec[i] {
            "0" => Ok(false),
            "1" => Ok(true),
            v => Err(err(format!("column {i}: bit must be 0 or 1, got {v:?}"))),
        };
        let num = |i: usize| {
            rec[i]
                .parse::<f64>()
                .map_err(|e| err(format!("column {i}: {e}")))
        };
        let mut slots = [AxisSlot::default(); LABEL_SLOTS];
        for (k, s) in slots.iter_mut().enumerate() {
            let o = 4 + 12 * k;
            *s = AxisSlot {
                axis: [num(o)?, num(o + 1)?, num(o + 2)?],
                rev: bit(o + 3)?,
                pivot: [num(o + 4)?, num(o + 5)?, num(o + 6)?],
                rev_range_deg: [num(o + 7)?, num(o + 8)?],
                pri: bit(o + 9)?,
                pri_range: [num(o + 10)?, num(o + 11)?],
            };
        }
        Ok(LabelRow {
            shape_id: rec[0].to_string(),
            part_id: rec[1]
                .parse()
                .map_err(|e| err(format!("part id: {e}")))?,
            m_rev: bit(2)?,
            m_pri: bit(3)?,
            slots,
        })
    }
}

/// `comments` become extra `#` lines after the units line.
pub fn write_labels(rows: &[LabelRow], comments: &[String]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::InvalidInput(format!("label csv: {e}"));
    w.write_record(label_header()).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.fields()).map_err(csv_err)?;
    }
    let body = w
        .into_inner()
        .map_err(|e| Error::InvalidInput(format!("label csv: {e}")))?;
    let mut out = format!("{LABELS_COMMENT}\n");
    for c in comments {
        out.push_str(&format!("# {c}\n"));
    }
    out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
    Ok(out)
}

pub fn parse_labels(text: &str) -> Result<Vec<LabelRow>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| Error::Parse {
        file: "labels".into(),
        line: 1,
        msg: e.to_string(),
    })?;
    if header.iter().ne(label_header().iter().map(String::as_str)) {
        return Err(Error::Parse {
            file: "labels".into(),
            line: 1,
            msg: "unexpected header".into(),
        });
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| Error::Parse {
                file: "labels".into(),
                line: e.position().map_or(0, |p| p.line() as usize),
                msg: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            LabelRow::from_fields(&rec, line)
        })
        .collect()
}
