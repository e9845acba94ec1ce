//! Constrained single-agent search over (node, timestep) states.
//!
//! Given the provisional paths of all agents, a segment for agent `i`
//! covering timesteps `frontier+1 ..= horizon` is legal when every step
//! avoids:
//!
//! * vertex conflicts with any registered node,
//! * swap conflicts with any registered step, and
//! * nodes that an agent with a longer committed path still passes later
//!   (the shorter path must not invade the longer one).
//!
//! Last nodes of *shorter* paths are deliberately not excluded here: plans
//! may run through them and the solver clears them at securing time through
//! priority inheritance.

use crate::graph::{Graph, NodeId};
use crate::paths::{AgentId, ProvisionalPaths};

/// View of the search problem for one agent up to an absolute horizon.
pub struct SearchConstraints<'a> {
    pub graph: &'a Graph,
    pub provisional: &'a ProvisionalPaths,
    pub agent: AgentId,
    /// Absolute timestep the segment must reach (the solver's beta).
    pub horizon: usize,
}

impl<'a> SearchConstraints<'a> {
    pub fn new(graph: &'a Graph, provisional: &'a ProvisionalPaths, agent: AgentId, horizon: usize) -> Self {
        SearchConstraints { graph, provisional, agent, horizon }
    }

    /// May `agent` occupy `to` at `to_time`, coming from `from`?
    fn step_allowed(&self, from: NodeId, to: NodeId, to_time: usize) -> bool {
        let pp = self.provisional;
        if let Some(j) = pp.occupant_at(to, to_time) {
            if j != self.agent {
                return false;
            }
        }
        if to != from {
            if let Some(j) = pp.occupant_at(to, to_time - 1) {
                if j != self.agent && pp.registered_node(j, to_time) == Some(from) {
                    return false;
                }
            }
        }
        if pp.committed_later_by_other(self.agent, to, to_time) {
            return false;
        }
        true
    }

    /// Are stay steps at `node` legal for every timestep in `(from_t, horizon]`?
    fn pad_legal(&self, node: NodeId, from_t: usize) -> bool {
        ((from_t + 1)..=self.horizon).all(|t| self.step_allowed(node, node, t))
    }
}

/// True when any constraint-satisfying segment to the horizon exists,
/// regardless of where it ends. Agrees with `find_best_path(..) != None`.
pub fn valid_path_exists(c: &SearchConstraints) -> bool {
    let start = c.provisional.last_committed(c.agent);
    let t0 = c.provisional.frontier(c.agent);
    if c.horizon <= t0 {
        return true;
    }
    let n = c.graph.node_count();
    let mut cur = vec![false; n];
    cur[start.index()] = true;
    for t in t0..c.horizon {
        let mut next = vec![false; n];
        let mut any = false;
        for u_idx in 0..n {
            if !cur[u_idx] {
                continue;
            }
            let u = NodeId::new(u_idx);
            if c.step_allowed(u, u, t + 1) {
                next[u_idx] = true;
                any = true;
            }
            for &w in c.graph.neighbors(u) {
                if !next[w.index()] && c.step_allowed(u, w, t + 1) {
                    next[w.index()] = true;
                    any = true;
                }
            }
        }
        if !any {
            return false;
        }
        cur = next;
    }
    true
}

/// Best constraint-satisfying segment for timesteps `frontier+1 ..= horizon`.
///
/// Cost is earliest final arrival at `goal` (resting there afterwards is
/// free), then fewest moves; remaining ties go to the smallest predecessor
/// id, so identical inputs always yield identical segments. When the goal
/// cannot be held by the horizon the legal segment ending closest to the
/// goal is returned instead; `None` means no legal segment exists at all.
pub fn find_best_path(c: &SearchConstraints, goal: NodeId) -> Option<Vec<NodeId>> {
    let start = c.provisional.last_committed(c.agent);
    let t0 = c.provisional.frontier(c.agent);
    if c.horizon <= t0 {
        return Some(Vec::new());
    }
    let n = c.graph.node_count();
    let span = c.horizon - t0;
    if start == goal && c.pad_legal(goal, t0) {
        return Some(vec![goal; span]);
    }
    // layers[k][v] = (fewest moves to reach v at time t0+k, predecessor)
    let mut layers: Vec<Vec<Option<(usize, NodeId)>>> = vec![vec![None; n]; span + 1];
    layers[0][start.index()] = Some((0, start));
    for k in 0..span {
        let t = t0 + k;
        let (done, rest) = layers.split_at_mut(k + 1);
        let cur = &done[k];
        let next = &mut rest[0];
        for (u_idx, entry) in cur.iter().enumerate() {
            let Some((moves_u, _)) = *entry else { continue };
            let u = NodeId::new(u_idx);
            let mut relax = |w: NodeId, mv: usize| {
                if !c.step_allowed(u, w, t + 1) {
                    return;
                }
                let cand = (mv, u);
                let slot = &mut next[w.index()];
                if slot.is_none() || slot.is_some_and(|best| cand < best) {
                    *slot = Some(cand);
                }
            };
            relax(u, moves_u);
            for &w in c.graph.neighbors(u) {
                relax(w, moves_u + 1);
            }
        }
        if layers[k + 1][goal.index()].is_some() && c.pad_legal(goal, t + 1) {
            let mut seg = reconstruct(&layers, k + 1, goal);
            seg.resize(span, goal);
            return Some(seg);
        }
    }
    // No restable arrival: end as close to the goal as possible.
    let mut best: Option<(usize, usize, usize)> = None;
    for (v_idx, entry) in layers[span].iter().enumerate() {
        if let Some((moves, _)) = *entry {
            let d = c.graph.dist_unchecked(NodeId::new(v_idx), goal);
            let key = (d, moves, v_idx);
            if best.is_none() || best.is_some_and(|b| key < b) {
                best = Some(key);
            }
        }
    }
    let (_, _, v_idx) = best?;
    Some(reconstruct(&layers, span, NodeId::new(v_idx)))
}

fn reconstruct(layers: &[Vec<Option<(usize, NodeId)>>], end_layer: usize, end: NodeId) -> Vec<NodeId> {
    let mut seg = vec![end; end_layer];
    let mut v = end;
    for k in (1..=end_layer).rev() {
        seg[k - 1] = v;
        v = layers[k][v.index()].unwrap().1;
    }
    seg
}
