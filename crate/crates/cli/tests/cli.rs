use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use articand_core::io::save_shape;
use articand_core::labels::parse_labels;
use articand_core::records::{CandidatesFile, PredictionPartRecord, PredictionsFile};
use articand_core::synth::{cabinet, CabinetOptions, CABINET_HINGE};
use articand_core::eval::PredictionRecord;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_articand"))
}

fn write_cabinets(root: &Path, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let opts = CabinetOptions {
            drawer_stop_gap: (i % 2 == 1).then_some(0.01),
            ..CabinetOptions::default()
        };
        let mut s = cabinet(&opts);
        s.id = name.to_string();
        save_shape(&s, &root.join(name)).unwrap();
    }
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let o = cmd.output().unwrap();
    (
        o.status.code().unwrap(),
        String::from_utf8_lossy(&o.stdout).into_owned(),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

fn search(data: &Path, out: &Path, extra: &[&str]) -> i32 {
    let (code, _, err) = run(bin().arg("search").arg(data).arg("--out").arg(out).args(extra));
    assert!(code != 101, "{err}");
    code
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(tree(&p));
        } else if p.file_name().unwrap() != "run_manifest.json" {
            out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
        }
    }
    out.sort();
    out
}

#[test]
fn search_writes_one_file_per_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    write_cabinets(&data, &["a", "b", "c"]);
    let out = tmp.path().join("out");
    assert_eq!(search(&data, &out, &[]), 0);
    for n in ["a", "b", "c"] {
        assert!(out.join(n).join("candidates.json").is_file());
    }
    let m = json(&out.join("run_manifest.json"));
    let shapes = m["shapes"].as_array().unwrap();
    assert_eq!(shapes.len(), 3);
    assert!(shapes.iter().all(|s| s["status"] == "ok"));
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    let c = json(&out.join("a").join("candidates.json"));
    assert_eq!(c["config_hash"], m["config_hash"]);
    assert_eq!(c["units"]["angle"], "degrees");
}

#[test]
fn corrupt_mesh_fails_only_its_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    write_cabinets(&data, &["a", "b"]);
    fs::write(data.join("b").join("part_001.obj"), "v 0 0 0\nf 1 2 3\n").unwrap();
    let out = tmp.path().join("out");
    assert_eq!(search(&data, &out, &[]), 1);
    assert!(out.join("a").join("candidates.json").is_file());
    assert!(!out.join("b").join("candidates.json").exists());
    let m = json(&out.join("run_manifest.json"));
    assert_eq!(m["shapes"][1]["status"], "error");
    assert_eq!(m["shapes"][1]["dir"], "b");
    assert!(m["shapes"][1]["message"].as_str().unwrap().contains("part_001.obj"));
}

#[test]
fn output_does_not_depend_on_workers() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    write_cabinets(&data, &["a", "b", "c"]);
    let one = tmp.path().join("w1");
    let many = tmp.path().join("w8");
    assert_eq!(search(&data, &one, &["--workers", "1"]), 0);
    assert_eq!(search(&data, &many, &["--workers", "8"]), 0);
    assert_eq!(tree(&one), tree(&many));
}

#[test]
fn bad_config_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    write_cabinets(&data, &["a"]);
    let out = tmp.path().join("out");
    assert_eq!(search(&data, &out, &["--omega-deg", "0"]), 2);
    let cfg = tmp.path().join("c.json");
    fs::write(&cfg, "{\"omega\": 1}").unwrap();
    assert_eq!(search(&data, &out, &["--config", cfg.to_str().unwrap()]), 2);
    assert_eq!(search(&tmp.path().join("missing"), &out, &[]), 2);
}

#[test]
fn labels_round_trip_candidates() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    write_cabinets(&data, &["a", "b"]);
    let out = tmp.path().join("out");
    assert_eq!(search(&data, &out, &[]), 0);
    let labels = tmp.path().join("labels.csv");
    let (code, _, err) = run(bin().arg("export-labels").arg(&out).arg("--out").arg(&labels));
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(&labels).unwrap();
    assert!(text.starts_with("# "));
    let rows = parse_labels(&text).unwrap();
    assert_eq!(rows.len(), 8);

    let mut i = 0;
    for n in ["a", "b"] {
        let f = CandidatesFile::load(&out.join(n).join("candidates.json")).unwrap();
        for p in &f.parts {
            let r = &rows[i];
            i += 1;
            assert_eq!((r.shape_id.as_str(), r.part_id), (f.shape_id.as_str(), p.part_id));
            assert_eq!((r.m_rev, r.m_pri), (p.m_rev, p.m_pri));
            for c in &p.revolute {
                let s = &r.slots[c.eigenvalue_rank as usize];
                assert!(s.rev);
                assert_eq!((s.axis, s.pivot, s.rev_range_deg), (c.axis, c.pivot, c.range));
            }
            for c in &p.prismatic {
                let s = &r.slots[c.eigenvalue_rank as usize];
                assert!(s.pri);
                assert_eq!((s.axis, s.pri_range), (c.axis, c.range));
            }
            let used = p.revolute.len() + p.prismatic.len();
            if used == 0 {
                assert!(r.slots.iter().all(|s| s.is_masked() && s.axis == [0.0; 3]));
            }
        }
    }

    let (code, _, _) = run(bin()
        .arg("export-labels")
        .arg(tmp.path().join("nothing"))
        .arg("--out")
        .arg(&labels));
    assert_eq!(code, 2);
}

#[test]
fn eval_reports_recall_and_perfect_predictions() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    write_cabinets(&data, &["a"]);
    let out = tmp.path().join("out");
    assert_eq!(search(&data, &out, &[]), 0);
    let rep = tmp.path().join("rep");
    let (code, _, err) = run(bin().arg("eval").arg(&out).arg(&data).arg("--out").arg(&rep));
    assert_eq!(code, 0, "{err}");
    let r = json(&rep.join("report.json"));
    assert_eq!(r["recall"], 1.0);
    assert_eq!(r["recall_total"], 2);
    assert_eq!(r["R_ACC"], 1.0);
    assert_eq!(r["P_ACC"], 1.0);
    let csv = fs::read_to_string(rep.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 4);

    // Ground truth written back as predictions, with axes flipped.
    let cands = CandidatesFile::load(&out.join("a").join("candidates.json")).unwrap();
    let shape = articand_core::io::load_shape(&data.join("a")).unwrap();
    let norm: articand_core::Normalization = cands.normalization.into();
    let parts = shape
        .parts
        .iter()
        .map(|p| {
            let mut pr = PredictionRecord::from_ground_truth(&p.gt.unwrap().normalized(&norm));
            pr.axis = pr.axis.map(|a| -a);
            PredictionPartRecord::from_prediction(&pr)
        })
        .collect();
    let preds = tmp.path().join("preds");
    fs::create_dir_all(preds.join("a")).unwrap();
    let pf = PredictionsFile {
        shape_id: "a".into(),
        normalization: Some(cands.normalization),
        parts,
    };
    articand_core::records::write_json(&preds.join("a").join("predictions.json"), &pf).unwrap();
    let (code, _, err) = run(bin().arg("eval").arg(&preds).arg(&data).arg("--out").arg(&rep));
    assert_eq!(code, 0, "{err}");
    let r = json(&rep.join("report.json"));
    assert_eq!(r["AE"], 0.0);
    assert!(r["PE"].as_f64().unwrap() < 1e-12);
    assert_eq!(r["R_ACC"], 1.0);
    assert!(r["recall"].is_null());

    // A prediction for an unknown part.
    let mut bad = pf.clone();
    bad.parts[3].part_id = 42;
    articand_core::records::write_json(&preds.join("a").join("predictions.json"), &bad).unwrap();
    let (code, _, err) = run(bin().arg("eval").arg(&preds).arg(&data).arg("--out").arg(&rep));
    assert_eq!(code, 2);
    assert!(err.contains("part 3") || err.contains("42"), "{err}");
}

#[test]
fn eval_skips_shapes_without_ground_truth() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    write_cabinets(&data, &["a", "b"]);
    let mut s = cabinet(&CabinetOptions::default());
    s.id = "b".into();
    for p in &mut s.parts {
        p.gt = None;
    }
    save_shape(&s, &data.join("b")).unwrap();
    let out = tmp.path().join("out");
    assert_eq!(search(&data, &out, &[]), 0);
    let rep = tmp.path().join("rep");
    let (code, _, err) = run(bin().arg("eval").arg(&out).arg(&data).arg("--out").arg(&rep));
    assert_eq!(code, 0, "{err}");
    let r = json(&rep.join("report.json"));
    assert_eq!(r["counts"]["shapes"], 1);
    assert_eq!(r["counts"]["shapes_skipped"], 1);
}

#[test]
fn validate_audits_articulations() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    write_cabinets(&data, &["a"]);
    let (p, d) = CABINET_HINGE;
    let list = serde_json::json!({
        "articulations": [
            {"part_id": 1, "kind": "revolute", "axis": d, "pivot": p, "range": [0.0, 90.0]},
            {"part_id": 1, "kind": "revolute", "axis": [0.0, 1.0, 0.0],
             "pivot": [0.25, 1.425, -0.02], "range": [0.0, 90.0]}
        ]
    });
    let file = tmp.path().join("art.json");
    fs::write(&file, list.to_string()).unwrap();
    let (code, out, err) = run(bin().arg("validate").arg(&data).arg(&file));
    assert_eq!(code, 0, "{err}");
    let r: Value = serde_json::from_str(&out).unwrap();
    let res = r["results"].as_array().unwrap();
    assert_eq!(res[0]["all_valid"], true);
    assert_eq!(res[0]["flagged"], false);
    assert_eq!(res[1]["flagged"], true);
    let fr = &res[1]["free_range"];
    assert!(fr[1].as_f64().unwrap().max(-fr[0].as_f64().unwrap()) < 90.0);

    fs::write(&file, "").unwrap();
    let (code, out, _) = run(bin().arg("validate").arg(&data).arg(&file));
    assert_eq!(code, 0);
    let r: Value = serde_json::from_str(&out).unwrap();
    assert!(r["results"].as_array().unwrap().is_empty());

    fs::write(
        &file,
        r#"{"articulations": [{"part_id": 9, "kind": "prismatic", "axis": [0,0,1], "range": [0, 0.1]}]}"#,
    )
    .unwrap();
    let (code, _, err) = run(bin().arg("validate").arg(&data).arg(&file));
    assert_eq!(code, 2);
    assert!(err.contains("unknown part id 9"), "{err}");
}
