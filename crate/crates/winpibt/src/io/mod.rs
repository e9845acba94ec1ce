//! Benchmark file ingestion and result output: MovingAI map/scenario
//! parsers, JSON-lines and CSV result records, and SVG trajectory plots.

mod map;
mod results;
mod scen;
mod svg;

pub use map::{parse_map, MapFile};
pub use results::{read_results, write_results, ResultFormat};
pub use scen::{parse_scen, ScenEntry, ScenFile};
pub use svg::render_svg;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: malformed header: {text:?}")]
    MalformedHeader { line: usize, text: String },
    #[error("grid is {found_rows} rows of declared {height}, or row width mismatch at line {line}")]
    DimensionMismatch { line: usize, height: usize, found_rows: usize },
    #[error("unknown terrain {ch:?} at row {row}, column {col}")]
    UnknownTerrain { ch: char, row: usize, col: usize },
    #[error("scenario entry {line}: coordinates out of bounds")]
    OutOfBounds { line: usize },
    #[error("scenario entry {line}: endpoint on a blocked cell")]
    BlockedEndpoint { line: usize },
    #[error("line {line}: malformed scenario entry: {text:?}")]
    BadEntry { line: usize, text: String },
    #[error("result record {line}: {message}")]
    BadRecord { line: usize, message: String },
}
