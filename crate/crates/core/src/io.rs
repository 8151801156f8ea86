//! Output files: trajectory CSV, JSON summaries, field checkpoints. Every file
//! is written to a sibling temporary and renamed into place.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::SCHEMA_VERSION;
use crate::error::Result;
use crate::evolve::TrajectoryRecord;

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Pretty JSON with the schema version added as a top-level field.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut v = serde_json::to_value(value)?;
    if let serde_json::Value::Object(map) = &mut v {
        map.insert("schema_version".into(), SCHEMA_VERSION.into());
    }
    let mut text = serde_json::to_string_pretty(&v)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Empty cell for `None`.
pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn order_label(s: f64) -> String {
    num(s)
}

pub fn trajectory_header(record: &TrajectoryRecord, predicted: &[f64]) -> Vec<String> {
    let mut h: Vec<String> = ["schema_version", "t", "l1", "l2", "linf", "supp_rad_lo", "supp_rad_hi"]
        .iter()
        .chain(&["supp_osc_lo", "supp_osc_hi", "c1_osc"])
        .map(|s| s.to_string())
        .collect();
    h.extend(record.hs_orders.iter().map(|s| format!("hs_{}", order_label(*s))));
    h.extend(
        ["additivity", "rad_drift_l2", "leakage", "pseudo_err_l2", "pseudo_err_rel", "pseudo_bound"]
            .iter()
            .map(|s| s.to_string()),
    );
    h.extend(predicted.iter().map(|s| format!("hs_pred_{}", order_label(*s))));
    h
}

/// One row per monitor. `predictions` is either empty or aligned with the
/// rows, each entry holding one value per order in `predicted`.
pub fn trajectory_csv(record: &TrajectoryRecord, predicted: &[f64], predictions: &[(f64, Vec<f64>)]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(trajectory_header(record, predicted))?;
    for (i, r) in record.rows.iter().enumerate() {
        let mut row = vec![SCHEMA_VERSION.to_string(), num(r.t), num(r.l1), num(r.l2), num(r.linf)];
        row.push(opt(r.supp_rad.map(|s| s.0)));
        row.push(opt(r.supp_rad.map(|s| s.1)));
        row.push(opt(r.supp_osc.map(|s| s.0)));
        row.push(opt(r.supp_osc.map(|s| s.1)));
        row.push(num(r.c1_osc));
        row.extend(r.hs.iter().map(|v| num(*v)));
        row.extend([num(r.additivity), num(r.rad_drift_l2), num(r.leakage)]);
        row.extend([opt(r.pseudo_err_l2), opt(r.pseudo_err_rel), opt(r.pseudo_bound)]);
        for j in 0..predicted.len() {
            row.push(opt(predictions.get(i).and_then(|p| p.1.get(j).copied())));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    w.into_inner().map_err(|e| crate::Error::Serde(e.to_string()))
}

/// Generic table writer: header plus stringified rows, schema column first.
pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut h = vec!["schema_version"];
    h.extend_from_slice(header);
    w.write_record(&h)?;
    for r in rows {
        let mut full = vec![SCHEMA_VERSION.to_string()];
        full.extend(r.iter().cloned());
        w.write_record(&full)?;
    }
    w.flush()?;
    w.into_inner().map_err(|e| crate::Error::Serde(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{MonitorRow, Termination};

    fn record() -> TrajectoryRecord {
        TrajectoryRecord {
            rows: vec![
                MonitorRow { t: 0.0, l2: 1.0, hs: vec![2.0], supp_osc: Some((0.1, 0.9)), ..MonitorRow::default() },
                MonitorRow { t: 0.5, l2: 1.0, hs: vec![2.5], pseudo_err_l2: Some(1e-3), ..MonitorRow::default() },
            ],
            hs_orders: vec![0.5],
            dt: 0.1,
            steps: 5,
            cfl_reductions: 0,
            termination: Termination::Completed,
        }
    }

    #[test]
    fn csv_columns_line_up() {
        let rec = record();
        let bytes = trajectory_csv(&rec, &[0.5], &[(0.0, vec![2.1]), (0.5, vec![2.4])]).unwrap();
        let mut rd = csv::Reader::from_reader(bytes.as_slice());
        let h = rd.headers().unwrap().clone();
        let idx = |name: &str| h.iter().position(|c| c == name).unwrap();
        let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.len() == h.len()));
        assert_eq!(&rows[1][idx("hs_0.5")], "2.5");
        assert_eq!(&rows[1][idx("hs_pred_0.5")], "2.4");
        assert_eq!(&rows[0][idx("supp_osc_lo")], "0.1");
        assert_eq!(&rows[1][idx("supp_osc_lo")], "");
        assert_eq!(&rows[1][idx("pseudo_err_l2")], "0.001");
        assert_eq!(&rows[0][idx("schema_version")], SCHEMA_VERSION);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/a.json");
        write_json(&p, &serde_json::json!({"x": 1})).unwrap();
        write_json(&p, &serde_json::json!({"x": 2})).unwrap();
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(v["x"], 2);
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
