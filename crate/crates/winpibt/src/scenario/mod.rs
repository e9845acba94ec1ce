//! Problem instances, the simulation loop, and run metrics.
//!
//! Two problem flavours are supported. *Classical*: every agent has one
//! fixed goal and the run terminates when all agents occupy their goals
//! simultaneously with no reserved move taking anyone off-goal. *Iterative*:
//! agents receive a fresh goal the moment they complete the current one, and
//! the run terminates when the first `task_count` issued tasks are all
//! complete. Runs that do not terminate within the timestep limit count as
//! failures, but their executed paths are still conflict-free.

pub mod maps;

use std::sync::Arc;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Graph, NodeId};
use crate::paths::{AgentId, PathSet};
use crate::solver::{PibtSolver, SolverKind, WinPibtSolver};

pub const DEFAULT_TIMESTEP_LIMIT: usize = 1000;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{requested} agents requested but only {available} placements available")]
    TooManyAgents { requested: usize, available: usize },
    #[error("invalid instance: {0}")]
    InstanceInvalid(String),
    #[error("solver {solver} requires {required} mode")]
    SolverIncompatible { solver: String, required: &'static str },
}

/// A unit of work: goals to visit in order. Both shipped problem flavours
/// issue singleton tasks; the order-sensitive form is modelled but unused.
#[derive(Debug, Clone)]
pub struct Task {
    pub id: usize,
    pub agent: AgentId,
    pub goals: Vec<NodeId>,
    pub issued_at: usize,
    pub completed_at: Option<usize>,
    progress: usize,
}

impl Task {
    fn new(id: usize, agent: AgentId, goals: Vec<NodeId>, issued_at: usize) -> Self {
        assert!(!goals.is_empty());
        Task { id, agent, goals, issued_at, completed_at: None, progress: 0 }
    }

    pub fn current_goal(&self) -> Option<NodeId> {
        self.goals.get(self.progress).copied()
    }

    /// Record a visit; completes the task when the final goal is reached.
    fn note_visit(&mut self, node: NodeId, t: usize) -> bool {
        if self.completed_at.is_some() || self.current_goal() != Some(node) {
            return false;
        }
        self.progress += 1;
        if self.progress == self.goals.len() {
            self.completed_at = Some(t);
            return true;
        }
        false
    }

    pub fn service_time(&self) -> Option<usize> {
        self.completed_at.map(|c| c - self.issued_at)
    }
}

#[derive(Debug, Clone)]
pub enum Mode {
    Classical { goals: Vec<NodeId> },
    Iterative { task_count: usize, goal_seed: u64 },
}

#[derive(Clone)]
pub struct Instance {
    pub graph: Arc<Graph>,
    pub starts: Vec<NodeId>,
    pub mode: Mode,
    pub timestep_limit: usize,
    pub seed: u64,
}

impl Instance {
    pub fn agents(&self) -> usize {
        self.starts.len()
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let n = self.graph.node_count();
        if self.starts.is_empty() {
            return Err(ScenarioError::InstanceInvalid("no agents".into()));
        }
        if self.starts.len() > n {
            return Err(ScenarioError::TooManyAgents { requested: self.starts.len(), available: n });
        }
        let mut seen = vec![false; n];
        for &s in &self.starts {
            if s.index() >= n {
                return Err(ScenarioError::InstanceInvalid(format!("start {s} outside the graph")));
            }
            if std::mem::replace(&mut seen[s.index()], true) {
                return Err(ScenarioError::InstanceInvalid(format!("duplicate start {s}")));
            }
        }
        match &self.mode {
            Mode::Classical { goals } => {
                if goals.len() != self.starts.len() {
                    return Err(ScenarioError::InstanceInvalid("goal count != agent count".into()));
                }
                let mut seen = vec![false; n];
                for &g in goals {
                    if g.index() >= n {
                        return Err(ScenarioError::InstanceInvalid(format!("goal {g} outside the graph")));
                    }
                    // Simultaneous goal occupancy is unsatisfiable otherwise.
                    if std::mem::replace(&mut seen[g.index()], true) {
                        return Err(ScenarioError::InstanceInvalid(format!("duplicate goal {g}")));
                    }
                }
            }
            Mode::Iterative { task_count, .. } => {
                if *task_count == 0 {
                    return Err(ScenarioError::InstanceInvalid("task_count must be at least 1".into()));
                }
            }
        }
        Ok(())
    }
}

/// Metrics record for one run. `soc` sums, per agent, the timestep after
/// which it rests on its goal for the remainder of the run; it is reported
/// as 0 for iterative runs, where service times carry the cost signal.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunResult {
    pub solver: String,
    pub seed: u64,
    pub agents: usize,
    pub success: bool,
    pub soc: usize,
    pub makespan: usize,
    pub service_mean: Option<f64>,
    /// Wall-clock seconds; the only field that varies between identical runs.
    pub runtime: f64,
    /// Executed node ids per agent, timesteps `0..=makespan`.
    pub paths: Vec<Vec<u32>>,
}

enum Driver {
    Pibt(PibtSolver),
    Win(WinPibtSolver),
}

impl Driver {
    fn paths(&self) -> &PathSet {
        match self {
            Driver::Pibt(s) => s.paths(),
            Driver::Win(s) => s.paths(),
        }
    }

    fn step(&mut self) {
        match self {
            Driver::Pibt(s) => s.step(),
            Driver::Win(s) => s.step(),
        }
    }

    fn set_goal(&mut self, agent: AgentId, goal: NodeId) {
        match self {
            Driver::Pibt(s) => s.set_goal(agent, goal),
            Driver::Win(s) => s.set_goal(agent, goal),
        }
    }

    fn goal_of(&self, agent: AgentId) -> NodeId {
        match self {
            Driver::Pibt(s) => s.goal_of(agent),
            Driver::Win(s) => s.goal_of(agent),
        }
    }
}

struct Finish {
    success: bool,
    makespan: usize,
}

/// Step-wise simulation driver; [`run`] wraps it, tests can drive it
/// manually to observe invariants between solver rounds.
pub struct Simulation {
    instance: Instance,
    solver: SolverKind,
    driver: Driver,
    tasks: Vec<Task>,
    active_task: Vec<Option<usize>>,
    goal_rng: ChaCha8Rng,
    t: usize,
    done: Option<Finish>,
}

impl Simulation {
    pub fn new(instance: Instance, solver: SolverKind) -> Result<Self, ScenarioError> {
        instance.validate()?;
        if let Some(w) = solver.window() {
            if w == 0 {
                return Err(ScenarioError::InstanceInvalid("window must be at least 1".into()));
            }
        }
        if matches!(solver, SolverKind::WinPibtIter { .. }) && !matches!(instance.mode, Mode::Iterative { .. }) {
            return Err(ScenarioError::SolverIncompatible { solver: solver.label(), required: "iterative" });
        }

        let n = instance.starts.len();
        let mut goal_rng = ChaCha8Rng::seed_from_u64(match instance.mode {
            Mode::Iterative { goal_seed, .. } => goal_seed,
            Mode::Classical { .. } => 0,
        });
        let mut tasks = Vec::new();
        let mut active_task = vec![None; n];
        let goals: Vec<NodeId> = match &instance.mode {
            Mode::Classical { goals } => goals.clone(),
            Mode::Iterative { .. } => {
                let mut gs = Vec::with_capacity(n);
                for (i, &start) in instance.starts.iter().enumerate() {
                    let g = random_goal(&mut goal_rng, instance.graph.node_count(), start);
                    tasks.push(Task::new(tasks.len(), i, vec![g], 0));
                    active_task[i] = Some(tasks.len() - 1);
                    gs.push(g);
                }
                gs
            }
        };

        let driver = match solver {
            SolverKind::Pibt => Driver::Pibt(PibtSolver::new(instance.graph.clone(), &instance.starts, &goals)),
            SolverKind::WinPibt { window } => {
                Driver::Win(WinPibtSolver::new(instance.graph.clone(), &instance.starts, &goals, window))
            }
            SolverKind::WinPibtIter { window } => {
                Driver::Win(WinPibtSolver::new_iterative(instance.graph.clone(), &instance.starts, &goals, window))
            }
        };
        Ok(Simulation { instance, solver, driver, tasks, active_task, goal_rng, t: 0, done: None })
    }

    pub fn paths(&self) -> &PathSet {
        self.driver.paths()
    }

    pub fn timestep(&self) -> usize {
        self.t
    }

    pub fn is_done(&self) -> bool {
        self.done.is_some()
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    /// Advance one timestep; returns true once the run has finished.
    pub fn step(&mut self) -> bool {
        if self.done.is_some() {
            return true;
        }
        self.process_timestep();
        if self.done.is_some() {
            return true;
        }
        if self.t >= self.instance.timestep_limit {
            self.done = Some(Finish { success: false, makespan: self.t });
            return true;
        }
        self.driver.step();
        self.t += 1;
        false
    }

    /// Handle arrivals at the current timestep, then test termination.
    fn process_timestep(&mut self) {
        let n = self.instance.starts.len();
        match self.instance.mode {
            Mode::Iterative { task_count, .. } => {
                for i in 0..n {
                    let pos = self.driver.paths().path(i).node_at(self.t);
                    let Some(task_idx) = self.active_task[i] else { continue };
                    if self.tasks[task_idx].note_visit(pos, self.t) {
                        // A new singleton goal is issued immediately.
                        let g = random_goal(&mut self.goal_rng, self.instance.graph.node_count(), pos);
                        self.tasks.push(Task::new(self.tasks.len(), i, vec![g], self.t));
                        self.active_task[i] = Some(self.tasks.len() - 1);
                        self.driver.set_goal(i, g);
                    }
                }
                let terminating_done = self
                    .tasks
                    .iter()
                    .take(task_count)
                    .all(|task| task.completed_at.is_some());
                if terminating_done && self.tasks.len() >= task_count {
                    self.done = Some(Finish { success: true, makespan: self.t });
                }
            }
            Mode::Classical { .. } => {
                let all_home = (0..n).all(|i| {
                    let p = self.driver.paths().path(i);
                    let goal = self.driver.goal_of(i);
                    // At the goal now, and every reserved move keeps it there.
                    (self.t..=p.frontier().max(self.t)).all(|tt| p.node_at(tt) == goal)
                });
                if all_home {
                    self.done = Some(Finish { success: true, makespan: self.t });
                }
            }
        }
    }

    /// Consume the simulation into a result record.
    pub fn finish(self, runtime: f64) -> RunResult {
        let finish = self.done.expect("finish called before the run ended");
        let makespan = finish.makespan;
        let n = self.instance.starts.len();
        let paths: Vec<Vec<u32>> = (0..n)
            .map(|i| {
                let p = self.driver.paths().path(i);
                (0..=makespan).map(|t| p.node_at(t).index() as u32).collect()
            })
            .collect();
        let soc = match self.instance.mode {
            Mode::Classical { .. } => (0..n)
                .map(|i| {
                    let p = self.driver.paths().path(i);
                    let goal = self.driver.goal_of(i);
                    (0..=makespan).rev().find(|&t| p.node_at(t) != goal).map_or(0, |t| t + 1)
                })
                .sum(),
            Mode::Iterative { .. } => 0,
        };
        let service_mean = match self.instance.mode {
            Mode::Iterative { task_count, .. } => {
                let times: Vec<usize> =
                    self.tasks.iter().take(task_count).filter_map(Task::service_time).collect();
                if times.is_empty() {
                    None
                } else {
                    Some(times.iter().sum::<usize>() as f64 / times.len() as f64)
                }
            }
            Mode::Classical { .. } => None,
        };
        RunResult {
            solver: self.solver.label(),
            seed: self.instance.seed,
            agents: n,
            success: finish.success,
            soc,
            makespan,
            service_mean,
            runtime,
            paths,
        }
    }
}

fn random_goal(rng: &mut ChaCha8Rng, node_count: usize, not: NodeId) -> NodeId {
    if node_count == 1 {
        return not;
    }
    let raw = rng.gen_range(0..node_count - 1);
    let idx = if raw >= not.index() { raw + 1 } else { raw };
    NodeId::new(idx)
}

/// Run an instance to completion or cutoff. Deterministic for a fixed
/// (instance, solver) apart from the recorded wall-clock runtime.
pub fn run(instance: Instance, solver: SolverKind) -> Result<RunResult, ScenarioError> {
    let mut sim = Simulation::new(instance, solver)?;
    let started = Instant::now();
    while !sim.step() {}
    let runtime = started.elapsed().as_secs_f64();
    Ok(sim.finish(runtime))
}

/// How starts and goals are placed by [`generate_random_instance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Uniform,
    /// Starts on the left edge column, goals on the right edge column
    /// (grid-backed graphs only).
    EdgeToEdge,
}

#[derive(Debug, Clone, Copy)]
pub enum ModeSpec {
    Classical,
    Iterative { task_count: usize },
}

/// Seeded random instance over a shared graph: distinct starts, and for
/// classical mode distinct goals.
pub fn generate_random_instance(
    graph: &Arc<Graph>,
    agents: usize,
    seed: u64,
    mode: ModeSpec,
    placement: Placement,
) -> Result<Instance, ScenarioError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (start_pool, goal_pool): (Vec<NodeId>, Vec<NodeId>) = match placement {
        Placement::Uniform => {
            let all: Vec<NodeId> = graph.nodes().collect();
            (all.clone(), all)
        }
        Placement::EdgeToEdge => {
            let grid = graph.grid().ok_or_else(|| {
                ScenarioError::InstanceInvalid("edge-to-edge placement needs a grid map".into())
            })?;
            let column = |x: usize| -> Vec<NodeId> {
                (0..grid.height).filter_map(|y| grid.node_at(x, y)).collect()
            };
            (column(0), column(grid.width - 1))
        }
    };
    if agents > start_pool.len() {
        return Err(ScenarioError::TooManyAgents { requested: agents, available: start_pool.len() });
    }
    let mut starts = start_pool;
    starts.shuffle(&mut rng);
    starts.truncate(agents);
    let mode = match mode {
        ModeSpec::Classical => {
            if agents > goal_pool.len() {
                return Err(ScenarioError::TooManyAgents { requested: agents, available: goal_pool.len() });
            }
            let mut goals = goal_pool;
            goals.shuffle(&mut rng);
            goals.truncate(agents);
            Mode::Classical { goals }
        }
        ModeSpec::Iterative { task_count } => {
            Mode::Iterative { task_count, goal_seed: rng.gen() }
        }
    };
    Ok(Instance { graph: graph.clone(), starts, mode, timestep_limit: DEFAULT_TIMESTEP_LIMIT, seed })
}

/// Aggregate view of a result, the per-run rows behind summary tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub soc: usize,
    pub cost_per_agent: f64,
    pub makespan: usize,
    pub service_mean: Option<f64>,
}

pub fn metrics(result: &RunResult) -> Metrics {
    Metrics {
        soc: result.soc,
        cost_per_agent: result.soc as f64 / result.agents as f64,
        makespan: result.makespan,
        service_mean: result.service_mean,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nid(i: usize) -> NodeId {
        NodeId::new(i)
    }

    #[test]
    fn single_agent_soc_equals_distance() {
        let g = Arc::new(Graph::build_grid(5, 1, &[true; 5]).unwrap());
        let d = g.dist(nid(0), nid(4)).unwrap();
        let instance = Instance {
            graph: g,
            starts: vec![nid(0)],
            mode: Mode::Classical { goals: vec![nid(4)] },
            timestep_limit: 50,
            seed: 0,
        };
        let r = run(instance, SolverKind::WinPibt { window: 3 }).unwrap();
        assert!(r.success);
        assert_eq!(r.soc, d);
        assert_eq!(r.makespan, d);
        assert_eq!(r.paths[0].len(), d + 1);
    }

    #[test]
    fn already_solved_instance_terminates_at_zero() {
        let g = Arc::new(Graph::build_grid(3, 2, &[true; 6]).unwrap());
        let instance = Instance {
            graph: g,
            starts: vec![nid(0), nid(5)],
            mode: Mode::Classical { goals: vec![nid(0), nid(5)] },
            timestep_limit: 10,
            seed: 0,
        };
        let r = run(instance, SolverKind::Pibt).unwrap();
        assert!(r.success);
        assert_eq!(r.makespan, 0);
        assert_eq!(r.soc, 0);
    }

    #[test]
    fn service_time_is_completion_minus_issue() {
        let mut task = Task::new(0, 0, vec![nid(3)], 3);
        assert!(!task.note_visit(nid(2), 4));
        assert!(task.note_visit(nid(3), 5));
        assert_eq!(task.service_time(), Some(2));
        // Mean of {2, 4} is 3.
        let other = Task { completed_at: Some(9), ..Task::new(1, 1, vec![nid(4)], 5) };
        let times = [task.service_time().unwrap(), other.service_time().unwrap()];
        assert_eq!(times.iter().sum::<usize>() as f64 / 2.0, 3.0);
    }

    #[test]
    fn metrics_examples() {
        let r = RunResult {
            solver: "pibt".into(),
            seed: 1,
            agents: 2,
            success: true,
            soc: 8,
            makespan: 5,
            service_mean: None,
            runtime: 0.0,
            paths: vec![],
        };
        let m = metrics(&r);
        assert_eq!(m.soc, 8);
        assert_eq!(m.cost_per_agent, 4.0);
        assert_eq!(m.makespan, 5);
    }

    #[test]
    fn soc_counts_displacements() {
        // Two agents arriving at t=3 and t=5 without displacement: soc 8.
        let g = Arc::new(Graph::build_grid(6, 2, &[true; 12]).unwrap());
        let grid = g.grid().unwrap();
        let a = grid.node_at(0, 0).unwrap();
        let ga = grid.node_at(3, 0).unwrap();
        let b = grid.node_at(0, 1).unwrap();
        let gb = grid.node_at(5, 1).unwrap();
        let instance = Instance {
            graph: g,
            starts: vec![a, b],
            mode: Mode::Classical { goals: vec![ga, gb] },
            timestep_limit: 50,
            seed: 0,
        };
        let r = run(instance, SolverKind::Pibt).unwrap();
        assert!(r.success);
        assert_eq!(r.makespan, 5);
        assert_eq!(r.soc, 8);
    }

    #[test]
    fn iterative_run_completes_exactly_k_tasks() {
        let g = Arc::new(Graph::build_grid(3, 2, &[true; 6]).unwrap());
        let instance = Instance {
            graph: g,
            starts: vec![nid(0), nid(5)],
            mode: Mode::Iterative { task_count: 3, goal_seed: 9 },
            timestep_limit: 200,
            seed: 0,
        };
        let r = run(instance.clone(), SolverKind::WinPibtIter { window: 3 }).unwrap();
        assert!(r.success);
        assert!(r.service_mean.unwrap() >= 0.0);
        // Rerun to inspect the task ledger.
        let mut sim = Simulation::new(instance, SolverKind::WinPibtIter { window: 3 }).unwrap();
        while !sim.step() {}
        let done = sim.tasks().iter().take(3).filter(|t| t.completed_at.is_some()).count();
        assert_eq!(done, 3);
    }

    #[test]
    fn same_seed_same_instance() {
        let g = Arc::new(Graph::build_grid(4, 4, &[true; 16]).unwrap());
        let a = generate_random_instance(&g, 5, 42, ModeSpec::Classical, Placement::Uniform).unwrap();
        let b = generate_random_instance(&g, 5, 42, ModeSpec::Classical, Placement::Uniform).unwrap();
        assert_eq!(a.starts, b.starts);
        match (&a.mode, &b.mode) {
            (Mode::Classical { goals: ga }, Mode::Classical { goals: gb }) => assert_eq!(ga, gb),
            _ => unreachable!(),
        }
    }

    #[test]
    fn full_occupancy_uses_every_node() {
        let g = Arc::new(Graph::build_grid(3, 2, &[true; 6]).unwrap());
        let inst = generate_random_instance(&g, 6, 1, ModeSpec::Classical, Placement::Uniform).unwrap();
        let mut starts = inst.starts.clone();
        starts.sort();
        assert_eq!(starts, g.nodes().collect::<Vec<_>>());
        assert!(generate_random_instance(&g, 7, 1, ModeSpec::Classical, Placement::Uniform).is_err());
    }

    #[test]
    fn edge_to_edge_places_starts_left_and_goals_right() {
        let g = Arc::new(maps::bridge(3, 3, 4));
        let inst = generate_random_instance(&g, 3, 5, ModeSpec::Classical, Placement::EdgeToEdge).unwrap();
        let grid = g.grid().unwrap();
        for &s in &inst.starts {
            assert_eq!(grid.cell_of(s).0, 0);
        }
        match &inst.mode {
            Mode::Classical { goals } => {
                for &gl in goals {
                    assert_eq!(grid.cell_of(gl).0, grid.width - 1);
                }
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn duplicate_classical_goals_are_rejected() {
        let g = Arc::new(Graph::build_grid(3, 2, &[true; 6]).unwrap());
        let instance = Instance {
            graph: g,
            starts: vec![nid(0), nid(1)],
            mode: Mode::Classical { goals: vec![nid(4), nid(4)] },
            timestep_limit: 10,
            seed: 0,
        };
        assert!(instance.validate().is_err());
    }

    #[test]
    fn iterative_solver_requires_iterative_mode() {
        let g = Arc::new(Graph::build_grid(3, 2, &[true; 6]).unwrap());
        let instance = Instance {
            graph: g,
            starts: vec![nid(0)],
            mode: Mode::Classical { goals: vec![nid(5)] },
            timestep_limit: 10,
            seed: 0,
        };
        assert!(matches!(
            Simulation::new(instance, SolverKind::WinPibtIter { window: 2 }),
            Err(ScenarioError::SolverIncompatible { .. })
        ));
    }

    #[test]
    fn successful_runs_meet_the_distance_lower_bound() {
        use rand::prelude::*;
        let g = Arc::new(Graph::build_grid(5, 5, &[true; 25]).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let seed: u64 = rng.gen();
            let inst = generate_random_instance(&g, 6, seed, ModeSpec::Classical, Placement::Uniform).unwrap();
            let starts = inst.starts.clone();
            let goals = match &inst.mode {
                Mode::Classical { goals } => goals.clone(),
                _ => unreachable!(),
            };
            let r = run(inst, SolverKind::WinPibt { window: 4 }).unwrap();
            if r.success {
                let bound: usize =
                    starts.iter().zip(&goals).map(|(&s, &gl)| g.dist(s, gl).unwrap()).sum();
                assert!(r.soc >= bound, "soc {} below shortest-path bound {bound}", r.soc);
            }
        }
    }
}
