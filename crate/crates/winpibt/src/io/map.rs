//! MovingAI `.map` parsing.
//!
//! Format: a `type` line, `height N`, `width N`, a literal `map` line, then
//! `height` rows of `width` terrain characters. `.` and `G` are passable;
//! `@`, `T` and `O` are blocked; anything else is rejected.

use crate::graph::{Graph, GraphError};
use crate::io::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapFile {
    pub width: usize,
    pub height: usize,
    /// Row-major, true = passable.
    pub passable: Vec<bool>,
}

impl MapFile {
    pub fn passable_count(&self) -> usize {
        self.passable.iter().filter(|&&p| p).count()
    }

    pub fn is_passable(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height && self.passable[y * self.width + x]
    }

    pub fn to_graph(&self) -> Result<Graph, GraphError> {
        Graph::build_grid(self.width, self.height, &self.passable)
    }

    /// Render back to the on-disk format (blocked cells become `@`).
    pub fn to_text(&self) -> String {
        let mut out = format!("type octile\nheight {}\nwidth {}\nmap\n", self.height, self.width);
        for y in 0..self.height {
            for x in 0..self.width {
                out.push(if self.passable[y * self.width + x] { '.' } else { '@' });
            }
            out.push('\n');
        }
        out
    }
}

pub fn parse_map(text: &str) -> Result<MapFile, ParseError> {
    let mut lines = text.lines().enumerate();
    let mut header = |key: &str| -> Result<(usize, String), ParseError> {
        match lines.next() {
            Some((i, line)) if line.trim_start().starts_with(key) => Ok((i + 1, line.trim().to_string())),
            Some((i, line)) => Err(ParseError::MalformedHeader { line: i + 1, text: line.to_string() }),
            None => Err(ParseError::MalformedHeader { line: 0, text: format!("missing {key} line") }),
        }
    };
    header("type")?;
    let (hl, height_line) = header("height")?;
    let height: usize = height_line
        .split_whitespace()
        .nth(1)
        .and_then(|v| v.parse().ok())
        .ok_or(ParseError::MalformedHeader { line: hl, text: height_line.clone() })?;
    let (wl, width_line) = header("width")?;
    let width: usize = width_line
        .split_whitespace()
        .nth(1)
        .and_then(|v| v.parse().ok())
        .ok_or(ParseError::MalformedHeader { line: wl, text: width_line.clone() })?;
    header("map")?;

    let mut passable = Vec::with_capacity(width * height);
    let mut rows = 0;
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        if rows == height || line.chars().count() != width {
            return Err(ParseError::DimensionMismatch { line: i + 1, height, found_rows: rows + 1 });
        }
        for (col, ch) in line.chars().enumerate() {
            passable.push(match ch {
                '.' | 'G' => true,
                '@' | 'T' | 'O' => false,
                other => return Err(ParseError::UnknownTerrain { ch: other, row: rows, col }),
            });
        }
        rows += 1;
    }
    if rows != height {
        return Err(ParseError::DimensionMismatch { line: 0, height, found_rows: rows });
    }
    Ok(MapFile { width, height, passable })
}
