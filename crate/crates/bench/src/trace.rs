//! Trace rows and their CSV and JSON encodings.
//!
//! `f_center`, `suboptimality`, `instantaneous_regret` and
//! `cumulative_regret` are ground truth computed from the analytic optimum.
//! They are verification data; no solver ever reads them.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use subzero_core::regret::RegretTrace;
use subzero_core::solvers::RunTrace;

use crate::error::BenchError;

/// CSV header, in contract order.
pub const COLUMNS: [&str; 12] = [
    "run_id",
    "solver",
    "n",
    "k",
    "phase",
    "queries_cumulative",
    "f_center",
    "suboptimality",
    "log_volume",
    "cone_angle",
    "instantaneous_regret",
    "cumulative_regret",
];

/// One trace row. Ellipsoid solvers emit one row per iteration; regret-nv
/// emits one row per block of consecutive queries at the same point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub run_id: String,
    pub solver: String,
    pub n: usize,
    pub k: usize,
    pub phase: Option<u8>,
    pub queries_cumulative: u64,
    pub f_center: f64,
    pub suboptimality: f64,
    pub log_volume: Option<f64>,
    pub cone_angle: Option<f64>,
    pub instantaneous_regret: Option<f64>,
    pub cumulative_regret: Option<f64>,
}

impl TraceRow {
    fn fields(&self) -> [String; 12] {
        [
            self.run_id.clone(),
            self.solver.clone(),
            self.n.to_string(),
            self.k.to_string(),
            self.phase.map(|p| p.to_string()).unwrap_or_default(),
            self.queries_cumulative.to_string(),
            float(self.f_center),
            float(self.suboptimality),
            opt(self.log_volume),
            opt(self.cone_angle),
            opt(self.instantaneous_regret),
            opt(self.cumulative_regret),
        ]
    }
}

/// Shortest decimal that round-trips. `Debug` switches to exponent form for
/// very small and very large magnitudes where `Display` would print every zero.
pub fn float(x: f64) -> String {
    format!("{x:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

pub fn ellipsoid_rows(run_id: &str, optimum: f64, trace: &RunTrace) -> Vec<TraceRow> {
    trace
        .records
        .iter()
        .map(|r| TraceRow {
            run_id: run_id.to_string(),
            solver: trace.solver.as_str().to_string(),
            n: trace.n,
            k: r.k,
            phase: None,
            queries_cumulative: r.queries_cumulative,
            f_center: r.f_center,
            suboptimality: r.f_center - optimum,
            log_volume: Some(r.log_volume),
            cone_angle: r.cone_angle,
            instantaneous_regret: None,
            cumulative_regret: None,
        })
        .collect()
}

pub fn regret_rows(run_id: &str, trace: &RegretTrace) -> Vec<TraceRow> {
    let cumulative = trace.cumulative();
    trace
        .blocks
        .iter()
        .map(|b| TraceRow {
            run_id: run_id.to_string(),
            solver: "regret-nv".to_string(),
            n: trace.n,
            k: b.k,
            phase: Some(b.phase.number()),
            queries_cumulative: b.queries_end,
            f_center: b.value,
            suboptimality: b.regret,
            log_volume: b.log_volume,
            cone_angle: None,
            instantaneous_regret: Some(b.regret),
            cumulative_regret: Some(cumulative[b.queries_end as usize - 1]),
        })
        .collect()
}

pub fn write_csv<W: Write>(out: W, rows: &[TraceRow], header: bool) -> Result<(), BenchError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let enc = |e: csv::Error| BenchError::Encode(e.to_string());
    if header {
        w.write_record(COLUMNS).map_err(enc)?;
    }
    for r in rows {
        w.write_record(r.fields()).map_err(enc)?;
    }
    w.flush().map_err(|e| BenchError::Encode(e.to_string()))
}

pub fn encode(rows: &[TraceRow], format: crate::config::Format) -> Result<Vec<u8>, BenchError> {
    let mut buf = Vec::new();
    match format {
        crate::config::Format::Csv => write_csv(&mut buf, rows, true)?,
        crate::config::Format::Json => {
            serde_json::to_writer_pretty(&mut buf, rows).map_err(|e| BenchError::Encode(e.to_string()))?;
            buf.push(b'\n');
        }
    }
    Ok(buf)
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), BenchError> {
    let err = |source| BenchError::Write { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(bytes).map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_fields_and_round_trip_floats() {
        let row = TraceRow {
            run_id: "r".into(),
            solver: "dp".into(),
            n: 2,
            k: 3,
            phase: None,
            queries_cumulative: 10,
            f_center: 0.1 + 0.2,
            suboptimality: 1e-300,
            log_volume: Some(-2.5),
            cone_angle: None,
            instantaneous_regret: None,
            cumulative_regret: None,
        };
        let text = String::from_utf8(encode(&[row], crate::config::Format::Csv).unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), COLUMNS.join(","));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields[4], "");
        assert_eq!(fields[6].parse::<f64>().unwrap(), 0.1 + 0.2);
        assert_eq!(fields[7], "1e-300");
        assert_eq!(fields[9..], ["", "", ""]);
    }
}
