/*
Copyright 2026 The sea-admm Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

//! CSV and JSON emission.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::batch::{BatchSummary, SampleRecord, TraceRow};
use crate::config::OutputConfig;

/// CSV header of the per-sample table, in column order.
pub const RECORD_COLUMNS: [&str; 16] = [
    "sample_id",
    "seed",
    "variant",
    "K",
    "L",
    "N",
    "objective",
    "sdr_bound",
    "gap_rel",
    "sea_rounds",
    "outer_iters_total",
    "min_se",
    "total_power_w",
    "max_per_ap_power_w",
    "certificate",
    "wall_time_s",
];

pub const TRACE_COLUMNS: [&str; 5] = ["round", "iteration", "transmit_power_w", "dual_residual", "prim_residual"];

fn create(path: &Path) -> Result<File> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn write_rows<T: serde::Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(create(path)?);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_records_csv(path: &Path, records: &[SampleRecord]) -> Result<()> {
    write_rows(path, &RECORD_COLUMNS, records)
}

pub fn read_records_csv(path: &Path) -> Result<Vec<SampleRecord>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let records = r.deserialize().collect::<std::result::Result<Vec<SampleRecord>, _>>()?;
    Ok(records)
}

pub fn write_trace_csv(path: &Path, rows: &[TraceRow]) -> Result<()> {
    write_rows(path, &TRACE_COLUMNS, rows)
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<TraceRow>, _>>()?;
    Ok(rows)
}

pub fn write_summary_json(path: &Path, summary: &BatchSummary) -> Result<()> {
    let w = BufWriter::new(create(path)?);
    serde_json::to_writer_pretty(w, summary).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_summary_json(path: &Path) -> Result<BatchSummary> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmittedFiles {
    pub records: PathBuf,
    pub summary: PathBuf,
    pub trace: Option<PathBuf>,
}

/// Writes the per-sample CSV, the JSON summary and, when given, a trace CSV.
pub fn emit_results(
    out: &OutputConfig,
    records: &[SampleRecord],
    summary: &BatchSummary,
    trace: Option<&[TraceRow]>,
) -> Result<EmittedFiles> {
    let records_path = out.records_path();
    let summary_path = out.summary_path();
    write_records_csv(&records_path, records)?;
    write_summary_json(&summary_path, summary)?;
    let trace_path = match trace {
        Some(rows) => {
            let p = out.trace_path();
            write_trace_csv(&p, rows)?;
            Some(p)
        }
        None => None,
    };
    Ok(EmittedFiles { records: records_path, summary: summary_path, trace: trace_path })
}
