//! Committed and provisional per-agent paths, conflict rules, and the
//! disentangled-safety predicate.
//!
//! A committed path is append-only: solvers may only grow it by one node at
//! a time, so history never mutates. A set of paths of unequal lengths is
//! *disentangled* when (taking the shorter path as `p`):
//!
//! 1. the agents never share a node while both paths are defined,
//! 2. they never exchange adjacent nodes across one timestep, and
//! 3. the shorter path's final node is untouched by the longer path for the
//!    remainder of the longer path.
//!
//! Any disentangled set can be extended conflict-free by letting agents wait
//! at their final nodes, which is what makes the predicate a safety
//! certificate rather than just a conflict check.

use std::collections::HashMap;

use crate::graph::{Graph, NodeId};

pub type AgentId = usize;

/// A per-agent path indexed by timestep; `nodes[t]` is the node at time t.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    agent: AgentId,
    nodes: Vec<NodeId>,
}

impl Path {
    pub fn new(agent: AgentId, start: NodeId) -> Self {
        Path { agent, nodes: vec![start] }
    }

    pub fn from_nodes(agent: AgentId, nodes: Vec<NodeId>) -> Self {
        assert!(!nodes.is_empty(), "a path always contains the start node");
        Path { agent, nodes }
    }

    pub fn agent(&self) -> AgentId {
        self.agent
    }

    /// Timestep of the most recently committed node.
    pub fn frontier(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn last(&self) -> NodeId {
        *self.nodes.last().unwrap()
    }

    /// Node at timestep `t`, treating the path as staying at its final node
    /// beyond the frontier.
    pub fn node_at(&self, t: usize) -> NodeId {
        self.nodes[t.min(self.frontier())]
    }

    /// Node at timestep `t` without the implicit stay extension.
    pub fn committed_at(&self, t: usize) -> Option<NodeId> {
        self.nodes.get(t).copied()
    }

    pub fn append(&mut self, node: NodeId) {
        self.nodes.push(node);
    }

    /// Append stay steps until the frontier reaches `until`.
    pub fn extend_stay(&mut self, until: usize) {
        let last = self.last();
        while self.frontier() < until {
            self.append(last);
        }
    }

    /// Consecutive nodes are identical or adjacent in `graph`.
    pub fn is_consistent(&self, graph: &Graph) -> bool {
        self.nodes.windows(2).all(|w| w[0] == w[1] || graph.neighbors(w[0]).contains(&w[1]))
    }
}

/// True when the two paths satisfy all three disentangled clauses, with
/// roles assigned so the shorter path plays the lead part.
pub fn pair_disentangled(p: &Path, q: &Path) -> bool {
    let (short, long) = if p.frontier() <= q.frontier() { (p, q) } else { (q, p) };
    let ls = short.frontier();
    let ll = long.frontier();
    for t in 0..=ls {
        if short.nodes[t] == long.nodes[t] {
            return false;
        }
        if t > 0 && short.nodes[t] == long.nodes[t - 1] && short.nodes[t - 1] == long.nodes[t] {
            return false;
        }
    }
    let tail = short.nodes[ls];
    for t in (ls + 1)..=ll {
        if long.nodes[t] == tail {
            return false;
        }
    }
    true
}

/// Structured outcome of an execution check; conflicts are values, not
/// errors. The earliest conflict by (timestep, agent pair) is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecutionCheck {
    Ok,
    VertexConflict { a: AgentId, b: AgentId, t: usize },
    SwapConflict { a: AgentId, b: AgentId, t: usize },
}

impl ExecutionCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, ExecutionCheck::Ok)
    }
}

/// One committed path per agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSet {
    paths: Vec<Path>,
}

impl PathSet {
    pub fn from_starts(starts: &[NodeId]) -> Self {
        PathSet { paths: starts.iter().enumerate().map(|(i, &s)| Path::new(i, s)).collect() }
    }

    pub fn from_paths(paths: Vec<Path>) -> Self {
        for (i, p) in paths.iter().enumerate() {
            assert_eq!(p.agent(), i, "paths must be indexed by agent id");
        }
        PathSet { paths }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn path(&self, agent: AgentId) -> &Path {
        &self.paths[agent]
    }

    pub fn path_mut(&mut self, agent: AgentId) -> &mut Path {
        &mut self.paths[agent]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Path> {
        self.paths.iter()
    }

    pub fn min_frontier(&self) -> usize {
        self.paths.iter().map(Path::frontier).min().unwrap_or(0)
    }

    pub fn max_frontier(&self) -> usize {
        self.paths.iter().map(Path::frontier).max().unwrap_or(0)
    }

    /// Conjunction of [`pair_disentangled`] over all unordered pairs.
    pub fn is_disentangled(&self) -> bool {
        for i in 0..self.paths.len() {
            for j in (i + 1)..self.paths.len() {
                if !pair_disentangled(&self.paths[i], &self.paths[j]) {
                    return false;
                }
            }
        }
        true
    }

    /// Scan timesteps `0..=horizon` for vertex and swap conflicts, extending
    /// paths beyond their frontiers by stay-at-last-node. Rotations pass.
    pub fn check_execution(&self, horizon: usize) -> ExecutionCheck {
        let n = self.paths.len();
        let mut occupied: HashMap<NodeId, AgentId> = HashMap::with_capacity(n);
        for t in 0..=horizon {
            occupied.clear();
            for j in 0..n {
                let v = self.paths[j].node_at(t);
                if let Some(&i) = occupied.get(&v) {
                    return ExecutionCheck::VertexConflict { a: i, b: j, t };
                }
                occupied.insert(v, j);
            }
            if t > 0 {
                for j in 0..n {
                    let from = self.paths[j].node_at(t - 1);
                    let to = self.paths[j].node_at(t);
                    if from == to {
                        continue;
                    }
                    // `occupied` holds positions at time t, so the agent now
                    // standing on `from` is the swap counterpart candidate.
                    if let Some(&i) = occupied.get(&from) {
                        if i != j && self.paths[i].node_at(t - 1) == to {
                            let (a, b) = if i < j { (i, j) } else { (j, i) };
                            return ExecutionCheck::SwapConflict { a, b, t };
                        }
                    }
                }
            }
        }
        ExecutionCheck::Ok
    }
}

/// Committed paths plus tentatively registered extensions, with a
/// time-indexed occupancy table for O(1) conflict probes.
///
/// For each agent, `Pi(t)` equals the committed node for `t <= frontier` and
/// the tentative extension beyond it. Tentative nodes are revocable; the
/// committed prefix is not.
pub struct ProvisionalPaths {
    committed: PathSet,
    tentative: Vec<Vec<NodeId>>,
    /// (node, t) -> registering agent, over committed and tentative nodes.
    /// A forced stay (cope_stuck) may overwrite another agent's *tentative*
    /// entry; revocation therefore only removes entries it still owns.
    occupied: HashMap<(NodeId, usize), AgentId>,
    /// Per node: the two latest committed uses by distinct agents, for the
    /// non-invasion probe ("is this node used later by someone else").
    latest_committed: HashMap<NodeId, TopTwo>,
}

#[derive(Debug, Clone, Copy)]
struct TopTwo {
    t1: usize,
    a1: AgentId,
    /// Latest committed use by any agent other than `a1`.
    t2: Option<usize>,
}

impl ProvisionalPaths {
    pub fn new(committed: PathSet) -> Self {
        let n = committed.len();
        let mut pp = ProvisionalPaths {
            committed,
            tentative: vec![Vec::new(); n],
            occupied: HashMap::new(),
            latest_committed: HashMap::new(),
        };
        for i in 0..n {
            for (t, &v) in pp.committed.path(i).nodes().iter().enumerate() {
                pp.occupied.insert((v, t), i);
            }
        }
        for i in 0..n {
            let nodes: Vec<(usize, NodeId)> =
                pp.committed.path(i).nodes().iter().copied().enumerate().collect();
            for (t, v) in nodes {
                pp.note_committed(i, v, t);
            }
        }
        pp
    }

    pub fn committed(&self) -> &PathSet {
        &self.committed
    }

    pub fn into_committed(self) -> PathSet {
        self.committed
    }

    pub fn agent_count(&self) -> usize {
        self.committed.len()
    }

    pub fn frontier(&self, agent: AgentId) -> usize {
        self.committed.path(agent).frontier()
    }

    pub fn last_committed(&self, agent: AgentId) -> NodeId {
        self.committed.path(agent).last()
    }

    /// Last timestep registered for `agent`, tentative nodes included.
    pub fn registered_end(&self, agent: AgentId) -> usize {
        self.frontier(agent) + self.tentative[agent].len()
    }

    /// Largest registered timestep across all agents (the horizon source).
    pub fn max_registered_end(&self) -> usize {
        (0..self.agent_count()).map(|i| self.registered_end(i)).max().unwrap_or(0)
    }

    /// Registered node of `agent` at `t`: committed prefix, then tentative.
    pub fn registered_node(&self, agent: AgentId, t: usize) -> Option<NodeId> {
        let frontier = self.frontier(agent);
        if t <= frontier {
            return self.committed.path(agent).committed_at(t);
        }
        self.tentative[agent].get(t - frontier - 1).copied()
    }

    pub fn occupant_at(&self, node: NodeId, t: usize) -> Option<AgentId> {
        self.occupied.get(&(node, t)).copied()
    }

    /// True when some agent other than `agent` has a committed use of `node`
    /// strictly after `t`.
    pub fn committed_later_by_other(&self, agent: AgentId, node: NodeId, t: usize) -> bool {
        match self.latest_committed.get(&node) {
            None => false,
            Some(top) => {
                if top.a1 != agent {
                    top.t1 > t
                } else {
                    top.t2.is_some_and(|t2| t2 > t)
                }
            }
        }
    }

    fn note_committed(&mut self, agent: AgentId, node: NodeId, t: usize) {
        let entry = self.latest_committed.entry(node).or_insert(TopTwo { t1: t, a1: agent, t2: None });
        if entry.a1 == agent {
            entry.t1 = entry.t1.max(t);
        } else if t >= entry.t1 {
            // Displaced holder becomes the best "other" time.
            entry.t2 = Some(entry.t2.map_or(entry.t1, |t2| t2.max(entry.t1)));
            entry.t1 = t;
            entry.a1 = agent;
        } else {
            entry.t2 = Some(entry.t2.map_or(t, |t2| t2.max(t)));
        }
    }

    /// Replace the tentative extension of `agent` with `segment`, which
    /// covers timesteps `frontier+1 ..= frontier+len`.
    pub fn register(&mut self, agent: AgentId, segment: &[NodeId]) {
        self.revoke(agent);
        let frontier = self.frontier(agent);
        for (k, &v) in segment.iter().enumerate() {
            let t = frontier + 1 + k;
            debug_assert!(
                !self.occupied.contains_key(&(v, t)),
                "tentative registration over a live reservation"
            );
            self.occupied.insert((v, t), agent);
        }
        self.tentative[agent] = segment.to_vec();
    }

    /// Drop the unsecured tentative suffix of `agent`.
    pub fn revoke(&mut self, agent: AgentId) {
        let frontier = self.frontier(agent);
        let old = std::mem::take(&mut self.tentative[agent]);
        for (k, v) in old.into_iter().enumerate() {
            let key = (v, frontier + 1 + k);
            // A forced stay may have overwritten this slot; keep it then.
            if self.occupied.get(&key) == Some(&agent) {
                self.occupied.remove(&key);
            }
        }
    }

    /// Commit the next tentative node of `agent` and return it.
    pub fn secure_next(&mut self, agent: AgentId) -> NodeId {
        assert!(!self.tentative[agent].is_empty(), "nothing registered to secure");
        let v = self.tentative[agent].remove(0);
        let t = self.frontier(agent) + 1;
        self.committed.path_mut(agent).append(v);
        self.occupied.insert((v, t), agent);
        self.note_committed(agent, v, t);
        v
    }

    /// Next tentative node, i.e. the one a secure would commit.
    pub fn tentative_front(&self, agent: AgentId) -> Option<NodeId> {
        self.tentative[agent].first().copied()
    }

    /// Force `agent` to stay at its last committed node through `until`, and
    /// drop any tentative registration so the provisional path equals the
    /// committed one.
    pub fn cope_stuck(&mut self, agent: AgentId, until: usize) {
        self.revoke(agent);
        let v = self.last_committed(agent);
        while self.frontier(agent) < until {
            let t = self.frontier(agent) + 1;
            self.committed.path_mut(agent).append(v);
            self.occupied.insert((v, t), agent);
            self.note_committed(agent, v, t);
        }
    }
}
