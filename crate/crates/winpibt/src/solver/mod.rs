//! The one-step PIBT solver and the windowed solver built on it.
//!
//! Both share dynamic priorities: an agent's priority is the number of
//! timesteps since its goal last changed plus a small per-agent tie-break
//! epsilon, unique across agents at every timestep. Priorities grow while an
//! agent is underway and drop back on arrival, which is what drives the
//! eventual-progress guarantees.

mod pibt;
mod winpibt;

pub use pibt::PibtSolver;
pub use winpibt::WinPibtSolver;

use crate::graph::NodeId;
use crate::paths::AgentId;

/// Which solver to run, with its lookahead window where applicable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Pibt,
    WinPibt { window: usize },
    /// Windowed solver that releases its reservation at the planned arrival
    /// instead of holding it through the whole window; meant for task
    /// streams.
    WinPibtIter { window: usize },
}

impl SolverKind {
    pub fn label(&self) -> String {
        match self {
            SolverKind::Pibt => "pibt".to_string(),
            SolverKind::WinPibt { window } => format!("winpibt-w{window}"),
            SolverKind::WinPibtIter { window } => format!("winpibt-iter-w{window}"),
        }
    }

    pub fn window(&self) -> Option<usize> {
        match self {
            SolverKind::Pibt => None,
            SolverKind::WinPibt { window } | SolverKind::WinPibtIter { window } => Some(*window),
        }
    }
}

/// Per-agent planning state shared by both solvers.
#[derive(Debug, Clone)]
pub struct AgentState {
    pub goal: NodeId,
    /// Unique tie-break in [0, 1).
    pub epsilon: f64,
    /// Timesteps since the goal was last updated.
    pub eta: usize,
    pub window: usize,
    fresh_goal: bool,
}

impl AgentState {
    pub fn priority(&self) -> f64 {
        self.eta as f64 + self.epsilon
    }
}

/// Default epsilon assignment: lower agent index gets the higher tie-break,
/// so agent 0 leads when all etas are equal.
pub(crate) fn default_epsilons(n: usize) -> Vec<f64> {
    (0..n).map(|i| (n - 1 - i) as f64 / n as f64).collect()
}

pub(crate) fn make_agents(goals: &[NodeId], window: usize) -> Vec<AgentState> {
    let eps = default_epsilons(goals.len());
    goals
        .iter()
        .zip(eps)
        .map(|(&goal, epsilon)| AgentState { goal, epsilon, eta: 0, window, fresh_goal: true })
        .collect()
}

/// Start-of-timestep priority update: eta resets for agents sitting on their
/// goal or holding a freshly assigned one, and increments otherwise.
/// eta(0) = 0 for everyone.
pub(crate) fn update_priorities(agents: &mut [AgentState], positions: &[NodeId], t: usize) {
    for (state, &pos) in agents.iter_mut().zip(positions) {
        if t == 0 || pos == state.goal || state.fresh_goal {
            state.eta = 0;
        } else {
            state.eta += 1;
        }
        state.fresh_goal = false;
    }
}

/// Agents sorted by decreasing priority. Priorities are unique, the id
/// tie-break is a backstop only.
pub(crate) fn priority_order(agents: &[AgentState]) -> Vec<AgentId> {
    let mut order: Vec<AgentId> = (0..agents.len()).collect();
    order.sort_by(|&a, &b| {
        agents[b]
            .priority()
            .partial_cmp(&agents[a].priority())
            .unwrap()
            .then(a.cmp(&b))
    });
    order
}
