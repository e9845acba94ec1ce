//! Run-result serialization. JSON-lines carries full records including
//! paths and round-trips exactly; CSV carries the summary row
//! `solver,seed,n,soc,makespan,service,runtime,success` for aggregation.

use serde::{Deserialize, Serialize};

use crate::io::ParseError;
use crate::scenario::RunResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResultFormat {
    JsonLines,
    Csv,
}

impl std::str::FromStr for ResultFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" | "json-lines" => Ok(ResultFormat::JsonLines),
            "csv" => Ok(ResultFormat::Csv),
            other => Err(format!("unknown format {other:?} (expected jsonl or csv)")),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    solver: String,
    seed: u64,
    n: usize,
    soc: usize,
    makespan: usize,
    service: Option<f64>,
    runtime: f64,
    success: bool,
}

impl From<&RunResult> for CsvRow {
    fn from(r: &RunResult) -> Self {
        CsvRow {
            solver: r.solver.clone(),
            seed: r.seed,
            n: r.agents,
            soc: r.soc,
            makespan: r.makespan,
            service: r.service_mean,
            runtime: r.runtime,
            success: r.success,
        }
    }
}

impl From<CsvRow> for RunResult {
    fn from(row: CsvRow) -> Self {
        RunResult {
            solver: row.solver,
            seed: row.seed,
            agents: row.n,
            success: row.success,
            soc: row.soc,
            makespan: row.makespan,
            service_mean: row.service,
            runtime: row.runtime,
            paths: Vec::new(),
        }
    }
}

pub fn write_results(results: &[RunResult], format: ResultFormat) -> Vec<u8> {
    match format {
        ResultFormat::JsonLines => {
            let mut out = Vec::new();
            for r in results {
                serde_json::to_writer(&mut out, r).expect("serializable record");
                out.push(b'\n');
            }
            out
        }
        ResultFormat::Csv => {
            let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
            writer
                .write_record(["solver", "seed", "n", "soc", "makespan", "service", "runtime", "success"])
                .expect("in-memory writer");
            for r in results {
                writer.serialize(CsvRow::from(r)).expect("serializable row");
            }
            writer.into_inner().expect("in-memory writer")
        }
    }
}

/// Inverse of [`write_results`]. CSV reads back summary records with empty
/// path lists; JSON-lines reads back the full records.
pub fn read_results(bytes: &[u8], format: ResultFormat) -> Result<Vec<RunResult>, ParseError> {
    match format {
        ResultFormat::JsonLines => {
            let text = std::str::from_utf8(bytes)
                .map_err(|e| ParseError::BadRecord { line: 0, message: e.to_string() })?;
            text.lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(i, l)| {
                    serde_json::from_str(l)
                        .map_err(|e| ParseError::BadRecord { line: i + 1, message: e.to_string() })
                })
                .collect()
        }
        ResultFormat::Csv => {
            let mut reader = csv::Reader::from_reader(bytes);
            reader
                .deserialize::<CsvRow>()
                .enumerate()
                .map(|(i, row)| {
                    row.map(RunResult::from)
                        .map_err(|e| ParseError::BadRecord { line: i + 2, message: e.to_string() })
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(seed: u64) -> RunResult {
        RunResult {
            solver: "winpibt-w3".into(),
            seed,
            agents: 2,
            success: true,
            soc: 7,
            makespan: 5,
            service_mean: Some(2.5),
            runtime: 0.125,
            paths: vec![vec![0, 1, 2, 2, 2, 2], vec![5, 4, 3, 3, 3, 3]],
        }
    }

    #[test]
    fn empty_csv_is_header_only() {
        let bytes = write_results(&[], ResultFormat::Csv);
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(text.trim(), "solver,seed,n,soc,makespan,service,runtime,success");
    }

    #[test]
    fn single_row_has_the_expected_fields() {
        let bytes = write_results(&[sample(3)], ResultFormat::Csv);
        let text = String::from_utf8(bytes).unwrap();
        let mut lines = text.lines();
        lines.next();
        assert_eq!(lines.next().unwrap(), "winpibt-w3,3,2,7,5,2.5,0.125,true");
    }

    #[test]
    fn jsonl_round_trips_exactly() {
        let results: Vec<RunResult> = (0..5).map(sample).collect();
        let bytes = write_results(&results, ResultFormat::JsonLines);
        let back = read_results(&bytes, ResultFormat::JsonLines).unwrap();
        assert_eq!(results, back);
    }

    #[test]
    fn csv_round_trips_the_summary() {
        let results: Vec<RunResult> = (0..25).map(sample).collect();
        let bytes = write_results(&results, ResultFormat::Csv);
        let back = read_results(&bytes, ResultFormat::Csv).unwrap();
        assert_eq!(back.len(), 25);
        for (orig, read) in results.iter().zip(&back) {
            let mut trimmed = orig.clone();
            trimmed.paths.clear();
            assert_eq!(&trimmed, read);
        }
        // Aggregable: mean soc over the batch.
        let mean = back.iter().map(|r| r.soc).sum::<usize>() as f64 / back.len() as f64;
        assert_eq!(mean, 7.0);
    }

    #[test]
    fn bad_records_are_errors_not_panics() {
        assert!(read_results(b"{not json}\n", ResultFormat::JsonLines).is_err());
        assert!(read_results(b"solver,seed\nx,notanumber\n", ResultFormat::Csv).is_err());
    }
}
