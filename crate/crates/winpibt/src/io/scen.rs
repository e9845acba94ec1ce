//! MovingAI `.scen` parsing: a version header, then one whitespace-separated
//! entry per line (bucket, map name, width, height, start x/y, goal x/y,
//! optimal length hint). Entries are validated against the map they target.

use crate::io::{MapFile, ParseError};

#[derive(Debug, Clone, PartialEq)]
pub struct ScenEntry {
    pub bucket: u32,
    pub map_name: String,
    pub width: usize,
    pub height: usize,
    pub start: (usize, usize),
    pub goal: (usize, usize),
    pub optimal_length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenFile {
    pub entries: Vec<ScenEntry>,
}

pub fn parse_scen(text: &str, map: &MapFile) -> Result<ScenFile, ParseError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, line)) if line.trim_start().starts_with("version") => {}
        Some((i, line)) => return Err(ParseError::MalformedHeader { line: i + 1, text: line.to_string() }),
        None => return Err(ParseError::MalformedHeader { line: 0, text: "empty scenario".into() }),
    }
    let mut entries = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 9 {
            return Err(ParseError::BadEntry { line: line_no, text: line.to_string() });
        }
        let parse_num = |s: &str| -> Option<usize> { s.parse().ok() };
        let entry = (|| -> Option<ScenEntry> {
            Some(ScenEntry {
                bucket: fields[0].parse().ok()?,
                map_name: fields[1].to_string(),
                width: parse_num(fields[2])?,
                height: parse_num(fields[3])?,
                start: (parse_num(fields[4])?, parse_num(fields[5])?),
                goal: (parse_num(fields[6])?, parse_num(fields[7])?),
                optimal_length: fields[8].parse().ok()?,
            })
        })()
        .ok_or(ParseError::BadEntry { line: line_no, text: line.to_string() })?;
        for &(x, y) in [&entry.start, &entry.goal] {
            if x >= map.width || y >= map.height {
                return Err(ParseError::OutOfBounds { line: line_no });
            }
            if !map.is_passable(x, y) {
                return Err(ParseError::BlockedEndpoint { line: line_no });
            }
        }
        entries.push(entry);
    }
    Ok(ScenFile { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_map;
    use proptest::prelude::*;

    fn open_map(w: usize, h: usize) -> MapFile {
        let body = (".".repeat(w) + "\n").repeat(h);
        parse_map(&format!("type octile\nheight {h}\nwidth {w}\nmap\n{body}")).unwrap()
    }

    #[test]
    fn empty_body_yields_zero_entries() {
        let map = open_map(4, 4);
        let scen = parse_scen("version 1\n", &map).unwrap();
        assert!(scen.entries.is_empty());
    }

    #[test]
    fn blocked_endpoint_is_rejected() {
        let map =
            parse_map("type octile\nheight 2\nwidth 2\nmap\n.@\n..\n").unwrap();
        let err = parse_scen("version 1\n0\tm.map\t2\t2\t0\t0\t1\t0\t1.0\n", &map).unwrap_err();
        assert!(matches!(err, ParseError::BlockedEndpoint { line: 2 }));
    }

    #[test]
    fn out_of_bounds_is_rejected() {
        let map = open_map(2, 2);
        let err = parse_scen("version 1\n0 m.map 2 2 0 0 5 0 1.0\n", &map).unwrap_err();
        assert!(matches!(err, ParseError::OutOfBounds { line: 2 }));
    }

    #[test]
    fn benchmark_style_entries_load_with_distinct_starts() {
        let map = open_map(8, 8);
        let mut text = String::from("version 1\n");
        for i in 0..10 {
            let (sx, sy) = (i % 8, i / 8);
            let (gx, gy) = (7 - i % 8, 7 - i / 8);
            text.push_str(&format!("{}\topen-8.map\t8\t8\t{sx}\t{sy}\t{gx}\t{gy}\t{}.25\n", i / 4, i + 3));
        }
        let scen = parse_scen(&text, &map).unwrap();
        assert_eq!(scen.entries.len(), 10);
        let mut starts: Vec<(usize, usize)> = scen.entries.iter().map(|e| e.start).collect();
        starts.sort();
        starts.dedup();
        assert_eq!(starts.len(), 10);
        assert_eq!(scen.entries[0].map_name, "open-8.map");
    }

    proptest! {
        #[test]
        fn fuzzed_scen_never_panics(text in "\\PC*") {
            let map = open_map(3, 3);
            let _ = parse_scen(&text, &map);
        }
    }
}
