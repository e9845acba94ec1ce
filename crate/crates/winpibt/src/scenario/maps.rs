//! Bundled environments: generated benchmark maps and the built-in demo
//! instances used by the CLI and the test suites.

use std::sync::Arc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, NodeId};
use crate::scenario::{Instance, Mode, DEFAULT_TIMESTEP_LIMIT};

/// Fully open grid.
pub fn empty(width: usize, height: usize) -> Graph {
    Graph::build_grid(width, height, &vec![true; width * height]).unwrap()
}

/// Two open rooms joined by a single one-cell-wide corridor. The corridor
/// edges lie on no cycle, so the cycle condition is intentionally violated;
/// useful as a stress map and as a `check-map` demo.
pub fn bridge(room_w: usize, room_h: usize, bridge_len: usize) -> Graph {
    let width = 2 * room_w + bridge_len;
    let height = room_h;
    let mid = room_h / 2;
    let mut mask = vec![false; width * height];
    for y in 0..height {
        for x in 0..width {
            let in_room = x < room_w || x >= room_w + bridge_len;
            let on_bridge = y == mid;
            mask[y * width + x] = in_room || on_bridge;
        }
    }
    Graph::build_grid(width, height, &mask).unwrap()
}

/// Two rooms joined by two parallel corridors; every corridor edge lies on
/// the loop through both bridges, so the cycle condition holds.
pub fn two_bridge(room_w: usize, room_h: usize, bridge_len: usize) -> Graph {
    assert!(room_h >= 3, "two bridges need at least three rows");
    let width = 2 * room_w + bridge_len;
    let height = room_h;
    let rows = [0, room_h - 1];
    let mut mask = vec![false; width * height];
    for y in 0..height {
        for x in 0..width {
            let in_room = x < room_w || x >= room_w + bridge_len;
            let on_bridge = rows.contains(&y);
            mask[y * width + x] = in_room || on_bridge;
        }
    }
    Graph::build_grid(width, height, &mask).unwrap()
}

/// Warehouse-style map: an 18x12 grid with a 3x3 array of 4x2 shelf blocks
/// separated by one-cell aisles inside a two-cell margin. 144 passable
/// cells, biconnected.
pub fn kiva_like() -> Graph {
    let (width, height) = (18, 12);
    let mut mask = vec![true; width * height];
    for by in 0..3 {
        for bx in 0..3 {
            let x0 = 2 + bx * 5;
            let y0 = 2 + by * 3;
            for dy in 0..2 {
                for dx in 0..4 {
                    mask[(y0 + dy) * width + (x0 + dx)] = false;
                }
            }
        }
    }
    Graph::build_grid(width, height, &mask).unwrap()
}

/// An eight-node ring with a two-cell dead-end corridor hanging off it:
///
/// ```text
///   7 - 8 - 9
///   |       |
///   5       6
///   |       |
///   0 - 1 - 2 - 3 - 4
/// ```
///
/// Two agents swapping between the corridor end (4) and the far ring node
/// (8) show how much lookahead is worth: with none, the agent pushed out of
/// the way circles the whole ring.
pub fn corridor_loop() -> Graph {
    Graph::undirected_from_edges(
        10,
        &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 5), (2, 6), (5, 7), (6, 9), (7, 8), (8, 9)],
    )
    .unwrap()
}

/// The head-to-head instance on [`corridor_loop`]: agent 0 in the corridor
/// end swaps places with agent 1 across the ring.
pub fn corridor_swap_instance() -> Instance {
    Instance {
        graph: Arc::new(corridor_loop()),
        starts: vec![NodeId::new(4), NodeId::new(8)],
        mode: Mode::Classical { goals: vec![NodeId::new(8), NodeId::new(4)] },
        timestep_limit: DEFAULT_TIMESTEP_LIMIT,
        seed: 0,
    }
}

/// The six-node built-in demo (`--golden fig3` in the CLI): a full 3x2 grid
/// with four agents shifting one ring position. Windowed solving with
/// window 3 commits the reference paths pinned in the acceptance suite.
pub fn fig3_instance() -> Instance {
    let graph = Arc::new(empty(3, 2));
    Instance {
        graph,
        starts: vec![NodeId::new(0), NodeId::new(4), NodeId::new(5), NodeId::new(2)],
        mode: Mode::Classical {
            goals: vec![NodeId::new(5), NodeId::new(1), NodeId::new(2), NodeId::new(3)],
        },
        timestep_limit: DEFAULT_TIMESTEP_LIMIT,
        seed: 0,
    }
}

/// Random obstacle grid regenerated until it is strongly connected and
/// satisfies the cycle condition; falls back to lower densities, ending at
/// the always-valid open grid.
pub fn random_condition_grid(width: usize, height: usize, density: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut density = density;
    loop {
        for _ in 0..40 {
            let mask: Vec<bool> = (0..width * height).map(|_| !rng.gen_bool(density)).collect();
            if let Ok(g) = Graph::build_grid(width, height, &mask) {
                if g.node_count() >= 3 && g.check_pibt_condition().is_satisfied() {
                    return g;
                }
            }
        }
        density /= 2.0;
        if density < 0.01 {
            return empty(width.max(2), height.max(2));
        }
    }
}
