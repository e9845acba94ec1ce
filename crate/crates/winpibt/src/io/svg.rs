//! Static SVG rendering of executed trajectories over a grid map.

use crate::io::MapFile;
use crate::scenario::RunResult;

const CELL: usize = 24;

const PALETTE: [&str; 10] = [
    "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#46f0f0", "#f032e6", "#bcf60c",
    "#008080", "#9a6324",
];

fn center(map: &MapFile, node: u32) -> (f64, f64) {
    // Node ids are the row-major compaction of passable cells, matching the
    // graph builder.
    let mut remaining = node as usize;
    for (idx, &p) in map.passable.iter().enumerate() {
        if p {
            if remaining == 0 {
                let (x, y) = (idx % map.width, idx / map.width);
                return ((x * CELL + CELL / 2) as f64, (y * CELL + CELL / 2) as f64);
            }
            remaining -= 1;
        }
    }
    panic!("node {node} outside the map");
}

/// Grid cells, one polyline per agent, and start/goal markers.
pub fn render_svg(result: &RunResult, map: &MapFile) -> String {
    let w = map.width * CELL;
    let h = map.height * CELL;
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    out.push_str(&format!("<rect width=\"{w}\" height=\"{h}\" fill=\"#ffffff\"/>\n"));
    for y in 0..map.height {
        for x in 0..map.width {
            let fill = if map.passable[y * map.width + x] { "#f4f4f4" } else { "#444444" };
            out.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"{fill}\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n",
                x * CELL,
                y * CELL
            ));
        }
    }
    for (i, path) in result.paths.iter().enumerate() {
        if path.is_empty() {
            continue;
        }
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = path
            .iter()
            .map(|&v| {
                let (cx, cy) = center(map, v);
                format!("{cx},{cy}")
            })
            .collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2.5\" stroke-opacity=\"0.8\"/>\n",
            points.join(" ")
        ));
        let (sx, sy) = center(map, path[0]);
        out.push_str(&format!("<circle cx=\"{sx}\" cy=\"{sy}\" r=\"5\" fill=\"{color}\"/>\n"));
        let (gx, gy) = center(map, *path.last().unwrap());
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            gx - 5.0,
            gy - 5.0
        ));
    }
    out.push_str("</svg>\n");
    out
}
