//! Shared test support: an exhaustive constrained-search oracle that is
//! independent of the library's planner (raw arrays, DFS enumeration), and
//! helpers to mirror the same state into the library types.

#![allow(dead_code)]

use std::collections::HashSet;

use winpibt::graph::{Graph, NodeId};
use winpibt::paths::{Path, PathSet, ProvisionalPaths};

/// Raw per-agent state for the oracle: committed nodes by timestep plus a
/// tentative extension, as plain ids.
#[derive(Debug, Clone)]
pub struct RawAgent {
    pub committed: Vec<u32>,
    pub tentative: Vec<u32>,
}

impl RawAgent {
    pub fn at(start: u32) -> Self {
        RawAgent { committed: vec![start], tentative: Vec::new() }
    }

    fn registered(&self, t: usize) -> Option<u32> {
        if t < self.committed.len() {
            return Some(self.committed[t]);
        }
        self.tentative.get(t - self.committed.len()).copied()
    }
}

/// Segment cost: (rest-start index within the padded walk or MAX, distance
/// to goal at the horizon, number of moves). Lexicographic order matches
/// the planner's cost tiers.
pub fn measure(graph: &Graph, full_walk: &[u32], goal: u32) -> (usize, usize, usize) {
    let moves = full_walk.windows(2).filter(|w| w[0] != w[1]).count();
    let end = *full_walk.last().unwrap();
    if end == goal {
        let mut tau = full_walk.len() - 1;
        while tau > 0 && full_walk[tau - 1] == goal {
            tau -= 1;
        }
        (tau, 0, moves)
    } else {
        (usize::MAX, graph.dist_unchecked(NodeId::new(end as usize), NodeId::new(goal as usize)), moves)
    }
}

fn step_legal(agents: &[RawAgent], me: usize, u: u32, v: u32, to_time: usize, forbid_invasion: bool) -> bool {
    for (j, other) in agents.iter().enumerate() {
        if j == me {
            continue;
        }
        if other.registered(to_time) == Some(v) {
            return false;
        }
        if u != v && other.registered(to_time - 1) == Some(v) && other.registered(to_time) == Some(u) {
            return false;
        }
        if forbid_invasion {
            for t in (to_time + 1)..other.committed.len() {
                if other.committed[t] == v {
                    return false;
                }
            }
        }
    }
    true
}

/// Exhaustive enumeration of every legal segment from the agent's frontier
/// to `horizon`, returning the best cost. Independent of the planner: plain
/// DFS over raw arrays.
pub fn oracle_best_cost(
    graph: &Graph,
    agents: &[RawAgent],
    me: usize,
    horizon: usize,
    goal: u32,
    forbid_invasion: bool,
) -> Option<(usize, usize, usize)> {
    let t0 = agents[me].committed.len() - 1;
    assert!(horizon > t0);
    let start = *agents[me].committed.last().unwrap();
    let mut walk = vec![start];
    let mut best: Option<(usize, usize, usize)> = None;
    dfs(graph, agents, me, horizon, goal, forbid_invasion, t0, &mut walk, &mut best);
    best
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    graph: &Graph,
    agents: &[RawAgent],
    me: usize,
    horizon: usize,
    goal: u32,
    forbid_invasion: bool,
    t0: usize,
    walk: &mut Vec<u32>,
    best: &mut Option<(usize, usize, usize)>,
) {
    let t = t0 + walk.len() - 1;
    if t == horizon {
        let cost = measure(graph, walk, goal);
        if best.is_none() || best.is_some_and(|b| cost < b) {
            *best = Some(cost);
        }
        return;
    }
    let u = *walk.last().unwrap();
    let mut candidates: Vec<u32> = graph
        .neighbors(NodeId::new(u as usize))
        .iter()
        .map(|n| n.index() as u32)
        .collect();
    candidates.push(u);
    for v in candidates {
        if !step_legal(agents, me, u, v, t + 1, forbid_invasion) {
            continue;
        }
        walk.push(v);
        dfs(graph, agents, me, horizon, goal, forbid_invasion, t0, walk, best);
        walk.pop();
    }
}

/// Mirror a raw state into the library's provisional-path structure.
pub fn provisional_from_raw(agents: &[RawAgent]) -> ProvisionalPaths {
    let paths: Vec<Path> = agents
        .iter()
        .enumerate()
        .map(|(i, a)| Path::from_nodes(i, a.committed.iter().map(|&v| NodeId::new(v as usize)).collect()))
        .collect();
    let mut pp = ProvisionalPaths::new(PathSet::from_paths(paths));
    for (i, a) in agents.iter().enumerate() {
        if !a.tentative.is_empty() {
            let seg: Vec<NodeId> = a.tentative.iter().map(|&v| NodeId::new(v as usize)).collect();
            pp.register(i, &seg);
        }
    }
    pp
}

/// Random raw state on `graph`: the planning agent sits at a fresh start,
/// the others own non-overlapping registered walks of assorted lengths.
/// Returns None when the sampling paints itself into a corner.
pub fn random_raw_state(
    graph: &Graph,
    rng: &mut impl rand::Rng,
    others: usize,
    horizon: usize,
) -> Option<Vec<RawAgent>> {
    let n = graph.node_count();
    if others + 1 > n {
        return None;
    }
    let mut starts: Vec<usize> = (0..n).collect();
    use rand::seq::SliceRandom;
    starts.shuffle(rng);
    let mut used: HashSet<(u32, usize)> = HashSet::new();
    let mut agents = vec![RawAgent::at(starts[0] as u32)];
    used.insert((starts[0] as u32, 0));
    for &start in &starts[1..=others] {
        let committed_len = rng.gen_range(0..=horizon);
        let tentative_len = rng.gen_range(0..=(horizon - committed_len));
        let mut walk = vec![start as u32];
        used.insert((start as u32, 0));
        for t in 1..=(committed_len + tentative_len) {
            let cur = *walk.last().unwrap();
            let mut cands: Vec<u32> = graph
                .neighbors(NodeId::new(cur as usize))
                .iter()
                .map(|v| v.index() as u32)
                .collect();
            cands.push(cur);
            cands.retain(|&v| !used.contains(&(v, t)));
            if cands.is_empty() {
                return None;
            }
            let v = cands[rng.gen_range(0..cands.len())];
            used.insert((v, t));
            walk.push(v);
        }
        agents.push(RawAgent {
            committed: walk[..=committed_len].to_vec(),
            tentative: walk[committed_len + 1..].to_vec(),
        });
    }
    Some(agents)
}
