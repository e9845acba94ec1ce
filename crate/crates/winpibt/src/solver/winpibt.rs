//! The windowed solver. Each agent plans an ideal path to a horizon, then
//! secures the time-node pairs one by one. Securing a node that is the last
//! committed node of another agent hands that agent the caller's priority so
//! it plans one step and moves away; a same-frontier occupant that cannot
//! move backtracks `Invalid`, forcing the caller to revoke its unsecured
//! suffix and replan.

use std::sync::Arc;

use crate::graph::{Graph, NodeId};
use crate::paths::{AgentId, PathSet, ProvisionalPaths};
use crate::planner::{find_best_path, SearchConstraints};

use super::{make_agents, priority_order, update_priorities, AgentState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Valid,
    Invalid,
}

/// Agents with an in-flight request, i.e. the active recursion stack.
/// Membership tells a securing agent that a same-frontier occupant is a
/// rotation partner about to move, not an obstacle to push.
struct RequestSet {
    active: Vec<bool>,
    depth: usize,
}

impl RequestSet {
    fn new(n: usize) -> Self {
        RequestSet { active: vec![false; n], depth: 0 }
    }

    fn enter(&mut self, agent: AgentId) {
        debug_assert!(!self.active[agent]);
        self.active[agent] = true;
        self.depth += 1;
        assert!(self.depth <= self.active.len(), "inheritance recursion exceeded agent count");
    }

    fn leave(&mut self, agent: AgentId) {
        debug_assert!(self.active[agent]);
        self.active[agent] = false;
        self.depth -= 1;
    }
}

pub struct WinPibtSolver {
    graph: Arc<Graph>,
    agents: Vec<AgentState>,
    pp: ProvisionalPaths,
    /// Cap on how far lower-priority agents may reserve, so they never
    /// outrun a higher-priority agent's frontier.
    kappa: usize,
    t: usize,
    /// Release reservations at the planned arrival instead of the full
    /// window (the task-stream variant).
    release_at_arrival: bool,
}

impl WinPibtSolver {
    pub fn new(graph: Arc<Graph>, starts: &[NodeId], goals: &[NodeId], window: usize) -> Self {
        Self::with_mode(graph, starts, goals, window, false)
    }

    pub fn new_iterative(graph: Arc<Graph>, starts: &[NodeId], goals: &[NodeId], window: usize) -> Self {
        Self::with_mode(graph, starts, goals, window, true)
    }

    fn with_mode(graph: Arc<Graph>, starts: &[NodeId], goals: &[NodeId], window: usize, release_at_arrival: bool) -> Self {
        assert_eq!(starts.len(), goals.len());
        assert!(window >= 1, "window must be at least 1");
        WinPibtSolver {
            graph,
            agents: make_agents(goals, window),
            pp: ProvisionalPaths::new(PathSet::from_starts(starts)),
            kappa: 0,
            t: 0,
            release_at_arrival,
        }
    }

    pub fn paths(&self) -> &PathSet {
        self.pp.committed()
    }

    pub fn into_paths(self) -> PathSet {
        self.pp.into_committed()
    }

    pub fn provisional(&self) -> &ProvisionalPaths {
        &self.pp
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

    /// One caller round: after it, every agent's committed path covers
    /// timestep `t + 1`.
    pub fn step(&mut self) {
        let n = self.agents.len();
        let positions: Vec<NodeId> = (0..n).map(|i| self.pp.committed().path(i).node_at(self.t)).collect();
        update_priorities(&mut self.agents, &positions, self.t);

        let order = priority_order(&self.agents);
        for (j, &i) in order.iter().enumerate() {
            if self.pp.frontier(i) <= self.t {
                let window = self.agents[i].window;
                let alpha = if j == 0 { self.t + window } else { (self.t + window).min(self.kappa) };
                let mut requests = RequestSet::new(n);
                self.winpibt(i, alpha, &mut requests);
            }
            self.kappa = self.kappa.min(self.pp.frontier(i));
            if j == 0 {
                self.kappa = self.pp.frontier(i);
            }
        }
        self.t += 1;
        debug_assert!((0..n).all(|i| self.pp.frontier(i) >= self.t));
    }

    /// Recursive path-securing for one agent up to timestep `alpha`.
    /// On return the agent's committed frontier reached its target: `alpha`,
    /// or the planned arrival in release-at-arrival mode, or `alpha` via
    /// forced stays when no legal path exists (`Invalid`).
    fn winpibt(&mut self, i: AgentId, alpha: usize, requests: &mut RequestSet) -> Outcome {
        if self.pp.frontier(i) >= alpha {
            return Outcome::Valid;
        }
        let beta = alpha.max(self.pp.max_registered_end());
        let goal = self.agents[i].goal;
        let Some(plan) = self.plan(i, beta, goal) else {
            self.pp.cope_stuck(i, alpha);
            return Outcome::Invalid;
        };
        let mut target = self.register_plan(i, &plan, alpha, goal);

        requests.enter(i);
        while self.pp.frontier(i) < target {
            let frontier = self.pp.frontier(i);
            let v = self.pp.tentative_front(i).expect("registered through target");

            // Anyone with a shorter committed path resting on v plans one
            // step with our priority until the node clears.
            loop {
                match self.occupant(v, i, |lj| lj < frontier, None) {
                    None => break,
                    Some(j) => {
                        let next = self.pp.frontier(j) + 1;
                        self.winpibt(j, next, requests);
                    }
                }
            }

            // A same-frontier occupant outside the request stack works like
            // the one-step solver; one inside it is a rotation partner that
            // is already committed to move.
            if let Some(j) = self.occupant(v, i, |lj| lj == frontier, Some(requests)) {
                if self.winpibt(j, frontier + 1, requests) == Outcome::Invalid {
                    self.pp.revoke(i);
                    let Some(plan) = self.plan(i, beta, goal) else {
                        self.pp.cope_stuck(i, alpha);
                        requests.leave(i);
                        return Outcome::Invalid;
                    };
                    target = self.register_plan(i, &plan, alpha, goal);
                    continue;
                }
            }

            let secured = self.pp.secure_next(i);
            debug_assert_eq!(secured, v);
        }
        requests.leave(i);
        Outcome::Valid
    }

    fn plan(&self, i: AgentId, beta: usize, goal: NodeId) -> Option<Vec<NodeId>> {
        find_best_path(&SearchConstraints::new(&self.graph, &self.pp, i, beta), goal)
    }

    /// Register the plan prefix: through `alpha`, or through the planned
    /// arrival when reservations are released early. Returns the securing
    /// target timestep.
    fn register_plan(&mut self, i: AgentId, plan: &[NodeId], alpha: usize, goal: NodeId) -> usize {
        let frontier = self.pp.frontier(i);
        let mut target = alpha;
        if self.release_at_arrival {
            if let Some(k) = plan[..alpha - frontier].iter().position(|&v| v == goal) {
                target = frontier + 1 + k;
            }
        }
        self.pp.register(i, &plan[..target - frontier]);
        target
    }

    /// The unique agent other than `i` whose last committed node is `v` and
    /// whose frontier satisfies `pred`. With `skip_requests`, members of the
    /// request stack are ignored.
    fn occupant(
        &self,
        v: NodeId,
        i: AgentId,
        pred: impl Fn(usize) -> bool,
        skip_requests: Option<&RequestSet>,
    ) -> Option<AgentId> {
        let mut found = None;
        for j in 0..self.agents.len() {
            if j == i || self.pp.last_committed(j) != v || !pred(self.pp.frontier(j)) {
                continue;
            }
            if let Some(r) = skip_requests {
                if r.active[j] {
                    continue;
                }
            }
            assert!(found.is_none(), "two agents rest on node {v}; committed state is corrupt");
            found = Some(j);
        }
        found
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nid(i: usize) -> NodeId {
        NodeId::new(i)
    }

    /// The six-node demo: 3x2 grid, nodes 0 1 2 / 3 4 5, four agents with
    /// window 3. Expected committed paths are pinned in `demo` form below.
    fn demo_solver() -> WinPibtSolver {
        let g = Arc::new(Graph::build_grid(3, 2, &[true; 6]).unwrap());
        let starts = [nid(0), nid(4), nid(5), nid(2)];
        let goals = [nid(5), nid(1), nid(2), nid(3)];
        WinPibtSolver::new(g, &starts, &goals, 3)
    }

    #[test]
    fn early_exit_when_already_covered() {
        let mut s = demo_solver();
        let mut r = RequestSet::new(4);
        assert_eq!(s.winpibt(0, 0, &mut r), Outcome::Valid);
        assert_eq!(s.pp.frontier(0), 0);
    }

    #[test]
    fn demo_grid_reproduces_the_reference_paths() {
        let mut s = demo_solver();
        for _ in 0..3 {
            s.step();
            assert!(s.paths().is_disentangled());
        }
        let expect = [
            vec![0, 1, 2, 5],
            vec![4, 3, 0, 1],
            vec![5, 4, 1, 2],
            vec![2, 5, 4, 3],
        ];
        for (i, nodes) in expect.iter().enumerate() {
            let want: Vec<NodeId> = nodes.iter().map(|&x| nid(x)).collect();
            assert_eq!(s.paths().path(i).nodes(), &want[..], "agent {i}");
        }
        assert!(s.paths().check_execution(3).is_ok());
    }

    #[test]
    fn first_call_cascades_one_step_to_every_blocker() {
        let mut s = demo_solver();
        let mut r = RequestSet::new(4);
        assert_eq!(s.winpibt(0, 3, &mut r), Outcome::Valid);
        assert_eq!(s.pp.committed().path(0).nodes(), &[nid(0), nid(1), nid(2), nid(5)]);
        assert!(s.pp.committed().is_disentangled());
        // The push chain moved every other agent off the lead path.
        assert!(s.pp.frontier(1) >= 1);
        assert!(s.pp.frontier(2) >= 1);
        assert!(s.pp.frontier(3) >= 1);
    }

    #[test]
    fn sealed_corridor_goes_invalid_with_forced_stays() {
        // 1x3 corridor; agent 1 owns a committed path that sweeps into
        // agent 0's cell, so agent 0 has no legal segment at all.
        let g = Arc::new(Graph::build_grid(3, 1, &[true; 3]).unwrap());
        let mut s = WinPibtSolver::new(g, &[nid(0), nid(1)], &[nid(2), nid(0)], 2);
        // Hand-commit the blocker: stays on 1 then enters 0 at t=6.
        s.pp.register(1, &[nid(1), nid(1), nid(1), nid(1), nid(1), nid(0)]);
        for _ in 0..6 {
            s.pp.secure_next(1);
        }
        let mut r = RequestSet::new(2);
        assert_eq!(s.winpibt(0, 4, &mut r), Outcome::Invalid);
        assert_eq!(s.pp.committed().path(0).nodes(), &[nid(0); 5]);
    }

    #[test]
    fn full_ring_rotation_secures_for_everyone() {
        let g = Arc::new(Graph::directed_from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap());
        let starts = [nid(0), nid(1), nid(2), nid(3)];
        let goals = [nid(2), nid(3), nid(0), nid(1)];
        let mut s = WinPibtSolver::new(g, &starts, &goals, 2);
        s.step();
        assert!(s.paths().is_disentangled());
        s.step();
        assert!(s.paths().is_disentangled());
        for (i, &goal) in goals.iter().enumerate() {
            assert_eq!(s.paths().path(i).node_at(2), goal);
        }
        assert!(s.paths().check_execution(2).is_ok());
    }

    #[test]
    fn kappa_caps_lower_priority_reservations() {
        let g = Arc::new(Graph::build_grid(5, 5, &[true; 25]).unwrap());
        // Agent 0 has window 3, agent 1 window 5; agent 1 may not reserve
        // past agent 0's frontier.
        let starts = [nid(0), nid(20)];
        let goals = [nid(4), nid(24)];
        let mut s = WinPibtSolver::new(g, &starts, &goals, 3);
        s.agents[1].window = 5;
        s.step();
        assert_eq!(s.pp.frontier(0), 3);
        assert_eq!(s.pp.frontier(1), 3);
    }

    #[test]
    fn heterogeneous_windows_stay_safe_and_reach_goals() {
        let g = Arc::new(Graph::build_grid(5, 4, &[true; 20]).unwrap());
        let starts = [nid(0), nid(4), nid(15)];
        let goals = [nid(19), nid(15), nid(4)];
        let mut s = WinPibtSolver::new(g, &starts, &goals, 1);
        s.agents[1].window = 3;
        s.agents[2].window = 5;
        for _ in 0..40 {
            s.step();
            assert!(s.paths().is_disentangled());
        }
        let horizon = (0..3).map(|i| s.paths().path(i).frontier()).max().unwrap();
        assert!(s.paths().check_execution(horizon).is_ok());
        for (i, &goal) in goals.iter().enumerate() {
            assert_eq!(s.paths().path(i).node_at(40), goal, "agent {i} not home");
        }
    }

    #[test]
    fn single_agent_window_sets_frontier() {
        let g = Arc::new(Graph::build_grid(4, 1, &[true; 4]).unwrap());
        let mut s = WinPibtSolver::new(g, &[nid(0)], &[nid(3)], 3);
        s.step();
        assert_eq!(s.pp.frontier(0), 3);
        assert_eq!(s.paths().path(0).nodes(), &[nid(0), nid(1), nid(2), nid(3)]);
    }

    #[test]
    fn release_at_arrival_stops_reserving_at_the_goal() {
        let g = Arc::new(Graph::build_grid(4, 1, &[true; 4]).unwrap());
        // Goal is adjacent; window 5 would hold the cell far too long.
        let mut s = WinPibtSolver::new_iterative(g, &[nid(0)], &[nid(1)], 5);
        s.step();
        assert_eq!(s.pp.frontier(0), 1);
        assert_eq!(s.paths().path(0).nodes(), &[nid(0), nid(1)]);
    }

    #[test]
    fn release_at_arrival_falls_back_to_alpha_when_goal_is_far() {
        let g = Arc::new(Graph::build_grid(6, 1, &[true; 6]).unwrap());
        let mut s = WinPibtSolver::new_iterative(g, &[nid(0)], &[nid(5)], 3);
        s.step();
        // Arrival is beyond the window, so the full window is secured.
        assert_eq!(s.pp.frontier(0), 3);
    }

    /// Lead agent's first plan runs through a same-frontier neighbour whose
    /// own escape pocket is occupied by a stuck agent; the backtracking
    /// cascades two levels of forced stays, the lead revokes and replans a
    /// waiting route, and a later push succeeds.
    ///
    /// ```text
    ///   0 - 1 - 2
    ///       |
    ///       3
    /// ```
    #[test]
    fn invalid_backtracking_revokes_and_replans() {
        let g = Arc::new(Graph::undirected_from_edges(4, &[(0, 1), (1, 2), (1, 3)]).unwrap());
        let starts = [nid(0), nid(1), nid(3)];
        let goals = [nid(2), nid(1), nid(3)];
        let mut s = WinPibtSolver::new(g, &starts, &goals, 2);
        s.step();
        assert_eq!(s.paths().path(0).nodes(), &[nid(0), nid(0), nid(1)]);
        assert_eq!(s.paths().path(1).nodes(), &[nid(1), nid(1), nid(2)]);
        assert_eq!(s.paths().path(2).nodes(), &[nid(3), nid(3)]);
        assert!(s.paths().is_disentangled());
        assert!(s.paths().check_execution(2).is_ok());
    }

    #[test]
    fn release_at_arrival_never_reserves_past_the_next_arrival() {
        // Lifelong single-agent stream: with nobody pushing, every goal
        // visit in the committed path must sit exactly at the frontier.
        let g = Arc::new(Graph::build_grid(5, 4, &[true; 20]).unwrap());
        let mut s = WinPibtSolver::new_iterative(g.clone(), &[nid(0)], &[nid(17)], 4);
        let goal_stream = [nid(3), nid(12), nid(5), nid(19)];
        let mut next_goal = 0;
        for _ in 0..40 {
            let t = s.timestep();
            if s.paths().path(0).node_at(t) == s.goal_of(0) && next_goal < goal_stream.len() {
                s.set_goal(0, goal_stream[next_goal]);
                next_goal += 1;
            }
            s.step();
            let path = s.paths().path(0);
            let goal = s.goal_of(0);
            for tt in (t + 1)..path.frontier() {
                assert_ne!(
                    path.node_at(tt),
                    goal,
                    "reservation runs past an arrival at t={tt}"
                );
            }
        }
        assert_eq!(next_goal, goal_stream.len(), "stream should be consumed");
    }
}
