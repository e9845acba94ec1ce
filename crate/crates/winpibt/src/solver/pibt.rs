//! Priority inheritance with backtracking, one timestep at a time.
//!
//! Each timestep every agent picks its next node in priority order. When the
//! preferred node is occupied by an undecided lower-priority agent, that
//! agent inherits the caller's priority and plans first; if it cannot move
//! anywhere it stays put and the caller falls back to its next candidate.

use std::collections::HashMap;
use std::sync::Arc;

use crate::graph::{Graph, NodeId};
use crate::paths::{AgentId, PathSet};

use super::{make_agents, priority_order, update_priorities, AgentState};

pub struct PibtSolver {
    graph: Arc<Graph>,
    agents: Vec<AgentState>,
    paths: PathSet,
    t: usize,
}

impl PibtSolver {
    pub fn new(graph: Arc<Graph>, starts: &[NodeId], goals: &[NodeId]) -> Self {
        assert_eq!(starts.len(), goals.len());
        PibtSolver {
            graph,
            agents: make_agents(goals, 1),
            paths: PathSet::from_starts(starts),
            t: 0,
        }
    }

    pub fn paths(&self) -> &PathSet {
        &self.paths
    }

    pub fn into_paths(self) -> PathSet {
        self.paths
    }

    pub fn timestep(&self) -> usize {
        self.t
    }

    pub fn goal_of(&self, agent: AgentId) -> NodeId {
        self.agents[agent].goal
    }

    pub fn set_goal(&mut self, agent: AgentId, goal: NodeId) {
        self.agents[agent].goal = goal;
        self.agents[agent].eta = 0;
        self.agents[agent].fresh_goal = true;
    }

    /// Plan and commit exactly one node per agent for timestep `t + 1`.
    pub fn step(&mut self) {
        let n = self.agents.len();
        let positions: Vec<NodeId> = (0..n).map(|i| self.paths.path(i).last()).collect();
        update_priorities(&mut self.agents, &positions, self.t);

        let mut current: HashMap<NodeId, AgentId> = HashMap::with_capacity(n);
        for (i, &v) in positions.iter().enumerate() {
            current.insert(v, i);
        }
        let mut next: Vec<Option<NodeId>> = vec![None; n];
        let mut claimed: HashMap<NodeId, AgentId> = HashMap::with_capacity(n);

        for &i in &priority_order(&self.agents) {
            if next[i].is_none() {
                self.plan_one(i, None, &positions, &current, &mut next, &mut claimed);
            }
        }
        for (i, slot) in next.into_iter().enumerate() {
            self.paths.path_mut(i).append(slot.expect("every agent decides"));
        }
        self.t += 1;
    }

    /// Returns false when the agent is stuck; a stuck agent stays in place
    /// and its caller must replan.
    fn plan_one(
        &self,
        i: AgentId,
        parent_node: Option<NodeId>,
        positions: &[NodeId],
        current: &HashMap<NodeId, AgentId>,
        next: &mut Vec<Option<NodeId>>,
        claimed: &mut HashMap<NodeId, AgentId>,
    ) -> bool {
        let cur = positions[i];
        let goal = self.agents[i].goal;
        let mut candidates: Vec<NodeId> = self.graph.neighbors(cur).to_vec();
        candidates.push(cur);
        candidates.sort_by_key(|&v| (self.graph.dist_unchecked(v, goal), v));

        for v in candidates {
            if claimed.contains_key(&v) {
                continue;
            }
            // Swapping with the inheriting parent is the only swap the claim
            // table cannot see.
            if parent_node == Some(v) {
                continue;
            }
            next[i] = Some(v);
            claimed.insert(v, i);
            let undecided_occupant = current.get(&v).copied().filter(|&j| j != i && next[j].is_none());
            if let Some(j) = undecided_occupant {
                if !self.plan_one(j, Some(cur), positions, current, next, claimed) {
                    // The stuck child stays on v, visible in `claimed`.
                    next[i] = None;
                    continue;
                }
            }
            return true;
        }
        next[i] = Some(cur);
        claimed.insert(cur, i);
        false
    }
}
