//! Immutable environment graphs with a shortest-distance oracle.
//!
//! Solvers in this crate require the graph to be simple and strongly
//! connected. Their movement guarantees additionally need every adjacent
//! node pair to lie on a simple cycle of length >= 3; see
//! [`Graph::check_pibt_condition`].

use std::sync::OnceLock;

use thiserror::Error;

/// Dense index of a node in a [`Graph`]. Stable for the graph's lifetime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[derive(serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct NodeId(u32);

impl NodeId {
    pub fn new(index: usize) -> Self {
        debug_assert!(index < u32::MAX as usize);
        NodeId(index as u32)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("map has no passable cell")]
    EmptyMap,
    #[error("map is disconnected: cell ({x}, {y}) is unreachable")]
    DisconnectedMap { x: usize, y: usize },
    #[error("graph has a self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("graph is not strongly connected: node {0} unreachable")]
    NotStronglyConnected(usize),
    #[error("unknown node {0}")]
    UnknownNode(usize),
    #[error("passable mask length {got} does not match {width}x{height}")]
    BadMaskLength { width: usize, height: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Undirected,
    Directed,
}

/// Outcome of [`Graph::check_pibt_condition`]. A violation carries one
/// adjacent pair that lies on no simple cycle of length >= 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PibtCondition {
    Satisfied,
    Violated { from: NodeId, to: NodeId },
}

impl PibtCondition {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, PibtCondition::Satisfied)
    }
}

/// Grid metadata kept when a graph was built from a 2D mask.
#[derive(Debug, Clone)]
pub struct GridMeta {
    pub width: usize,
    pub height: usize,
    /// Row-major passable mask, `width * height` entries.
    pub passable: Vec<bool>,
    /// Row-major cell -> node mapping for passable cells.
    node_of_cell: Vec<Option<NodeId>>,
    /// Node -> (x, y).
    cell_of_node: Vec<(usize, usize)>,
}

impl GridMeta {
    pub fn node_at(&self, x: usize, y: usize) -> Option<NodeId> {
        if x >= self.width || y >= self.height {
            return None;
        }
        self.node_of_cell[y * self.width + x]
    }

    pub fn cell_of(&self, node: NodeId) -> (usize, usize) {
        self.cell_of_node[node.index()]
    }
}

/// Immutable node/edge structure with adjacency and a distance oracle.
pub struct Graph {
    kind: GraphKind,
    /// Successors per node, sorted ascending.
    adj: Vec<Vec<NodeId>>,
    /// Predecessors per node; identical to `adj` for undirected graphs.
    radj: Vec<Vec<NodeId>>,
    grid: Option<GridMeta>,
    oracle: DistanceOracle,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("kind", &self.kind)
            .field("nodes", &self.node_count())
            .field("edges", &self.edge_count())
            .finish()
    }
}

/// Memoized per-goal BFS distances. Rows are `dist(x -> goal)` for every x.
///
/// All-pairs rows are filled eagerly for small graphs so repeated queries in
/// benchmark sweeps stay O(1); larger graphs fill rows on first use. Rows are
/// `OnceLock`s, so concurrent readers of a shared graph stay safe.
struct DistanceOracle {
    rows: Vec<OnceLock<Box<[u32]>>>,
}

const PRECOMPUTE_LIMIT: usize = 10_000;

impl DistanceOracle {
    fn new(n: usize) -> Self {
        let mut rows = Vec::with_capacity(n);
        rows.resize_with(n, OnceLock::new);
        DistanceOracle { rows }
    }

    /// Distances toward `goal` over the reversed adjacency.
    fn row<'a>(&'a self, radj: &[Vec<NodeId>], goal: NodeId) -> &'a [u32] {
        self.rows[goal.index()].get_or_init(|| {
            let mut dist = vec![u32::MAX; radj.len()].into_boxed_slice();
            let mut queue = std::collections::VecDeque::new();
            dist[goal.index()] = 0;
            queue.push_back(goal);
            while let Some(u) = queue.pop_front() {
                let du = dist[u.index()];
                for &p in &radj[u.index()] {
                    if dist[p.index()] == u32::MAX {
                        dist[p.index()] = du + 1;
                        queue.push_back(p);
                    }
                }
            }
            dist
        })
    }
}

impl Graph {
    /// Build a 4-connected undirected graph over the passable cells of a
    /// `width` x `height` mask (row-major, `true` = passable).
    pub fn build_grid(width: usize, height: usize, passable: &[bool]) -> Result<Graph, GraphError> {
        if passable.len() != width * height {
            return Err(GraphError::BadMaskLength { width, height, got: passable.len() });
        }
        let mut node_of_cell = vec![None; width * height];
        let mut cell_of_node = Vec::new();
        for y in 0..height {
            for x in 0..width {
                if passable[y * width + x] {
                    node_of_cell[y * width + x] = Some(NodeId::new(cell_of_node.len()));
                    cell_of_node.push((x, y));
                }
            }
        }
        if cell_of_node.is_empty() {
            return Err(GraphError::EmptyMap);
        }
        let n = cell_of_node.len();
        let mut adj = vec![Vec::new(); n];
        for (i, &(x, y)) in cell_of_node.iter().enumerate() {
            // East and south neighbours; the symmetric halves come for free.
            for (nx, ny) in [(x + 1, y), (x, y + 1)] {
                if nx < width && ny < height {
                    if let Some(other) = node_of_cell[ny * width + nx] {
                        adj[i].push(other);
                        adj[other.index()].push(NodeId::new(i));
                    }
                }
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        // Connectivity over passable cells.
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v.index()] {
                    seen[v.index()] = true;
                    reached += 1;
                    queue.push_back(v.index());
                }
            }
        }
        if reached != n {
            let first = seen.iter().position(|s| !s).unwrap();
            let (x, y) = cell_of_node[first];
            return Err(GraphError::DisconnectedMap { x, y });
        }
        let radj = adj.clone();
        let grid = GridMeta { width, height, passable: passable.to_vec(), node_of_cell, cell_of_node };
        Ok(Graph::finish(GraphKind::Undirected, adj, radj, Some(grid)))
    }

    /// Build an undirected graph from an explicit edge list.
    pub fn undirected_from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptyMap);
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::UnknownNode(u.max(v)));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if adj[u].contains(&NodeId::new(v)) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
            adj[u].push(NodeId::new(v));
            adj[v].push(NodeId::new(u));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        check_connected(&adj)?;
        let radj = adj.clone();
        Ok(Graph::finish(GraphKind::Undirected, adj, radj, None))
    }

    /// Build a directed graph from an explicit arc list.
    pub fn directed_from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptyMap);
        }
        let mut adj = vec![Vec::new(); n];
        let mut radj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::UnknownNode(u.max(v)));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if adj[u].contains(&NodeId::new(v)) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
            adj[u].push(NodeId::new(v));
            radj[v].push(NodeId::new(u));
        }
        for list in adj.iter_mut().chain(radj.iter_mut()) {
            list.sort_unstable();
        }
        check_connected(&adj)?;
        check_connected(&radj)?;
        Ok(Graph::finish(GraphKind::Directed, adj, radj, None))
    }

    fn finish(
        kind: GraphKind,
        adj: Vec<Vec<NodeId>>,
        radj: Vec<Vec<NodeId>>,
        grid: Option<GridMeta>,
    ) -> Graph {
        let n = adj.len();
        let g = Graph { kind, adj, radj, grid, oracle: DistanceOracle::new(n) };
        if n <= PRECOMPUTE_LIMIT {
            for v in 0..n {
                g.oracle.row(&g.radj, NodeId::new(v));
            }
        }
        g
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        let arcs: usize = self.adj.iter().map(Vec::len).sum();
        match self.kind {
            GraphKind::Undirected => arcs / 2,
            GraphKind::Directed => arcs,
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).map(NodeId::new)
    }

    /// Successors of `u`, sorted ascending.
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adj[u.index()]
    }

    pub fn grid(&self) -> Option<&GridMeta> {
        self.grid.as_ref()
    }

    /// Exact unweighted shortest-path hop count from `u` to `v`.
    pub fn dist(&self, u: NodeId, v: NodeId) -> Result<usize, GraphError> {
        let n = self.node_count();
        if u.index() >= n || v.index() >= n {
            return Err(GraphError::UnknownNode(u.index().max(v.index())));
        }
        Ok(self.oracle.row(&self.radj, v)[u.index()] as usize)
    }

    /// Like [`Graph::dist`] but panics on unknown nodes. Solvers use this on
    /// ids they produced themselves.
    pub fn dist_unchecked(&self, u: NodeId, v: NodeId) -> usize {
        self.oracle.row(&self.radj, v)[u.index()] as usize
    }

    /// Maximum shortest-path distance over all node pairs.
    pub fn diameter(&self) -> usize {
        let mut best = 0usize;
        for v in self.nodes() {
            let row = self.oracle.row(&self.radj, v);
            for &d in row.iter() {
                best = best.max(d as usize);
            }
        }
        best
    }

    /// Check that every adjacent node pair lies on a simple cycle of length
    /// at least 3. For undirected graphs this is exactly bridgelessness, read
    /// off a biconnected-component decomposition (a bridge is a component
    /// with a single edge). Directed graphs are checked per arc: (u, v) is on
    /// such a cycle iff u stays reachable from v after masking the direct
    /// back arc v -> u.
    pub fn check_pibt_condition(&self) -> PibtCondition {
        match self.kind {
            GraphKind::Undirected => self.check_undirected_condition(),
            GraphKind::Directed => self.check_directed_condition(),
        }
    }

    fn check_undirected_condition(&self) -> PibtCondition {
        let n = self.node_count();
        // A single node has no adjacent pairs, so the condition is vacuous.
        if self.edge_count() == 0 {
            return PibtCondition::Satisfied;
        }
        // Iterative Hopcroft-Tarjan lowpoint DFS; recursion would overflow on
        // long corridor maps.
        let mut num = vec![usize::MAX; n];
        let mut low = vec![usize::MAX; n];
        let mut counter = 0usize;
        let mut stack: Vec<(usize, usize, usize)> = Vec::new(); // (node, parent, next adj idx)
        num[0] = 0;
        low[0] = 0;
        counter += 1;
        stack.push((0, usize::MAX, 0));
        while let Some(&(u, parent, idx)) = stack.last() {
            if idx < self.adj[u].len() {
                stack.last_mut().unwrap().2 += 1;
                let v = self.adj[u][idx].index();
                if num[v] == usize::MAX {
                    num[v] = counter;
                    low[v] = counter;
                    counter += 1;
                    stack.push((v, u, 0));
                } else if v != parent {
                    low[u] = low[u].min(num[v]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    if low[u] > num[p] {
                        // Tree edge (p, u) lies in no cycle.
                        return PibtCondition::Violated { from: NodeId::new(p), to: NodeId::new(u) };
                    }
                    low[p] = low[p].min(low[u]);
                }
            }
        }
        PibtCondition::Satisfied
    }

    fn check_directed_condition(&self) -> PibtCondition {
        for u in self.nodes() {
            for &v in self.neighbors(u) {
                if !self.reachable_skipping_arc(v, u) {
                    return PibtCondition::Violated { from: u, to: v };
                }
            }
        }
        PibtCondition::Satisfied
    }

    /// BFS reachability from `src` to `dst` that ignores the direct arc
    /// `src -> dst`. Any remaining route closes a simple cycle of length >= 3
    /// through the arc under test.
    fn reachable_skipping_arc(&self, src: NodeId, dst: NodeId) -> bool {
        let mut seen = vec![false; self.node_count()];
        let mut queue = std::collections::VecDeque::from([src]);
        seen[src.index()] = true;
        while let Some(u) = queue.pop_front() {
            for &w in self.neighbors(u) {
                if u == src && w == dst {
                    continue;
                }
                if w == dst {
                    return true;
                }
                if !seen[w.index()] {
                    seen[w.index()] = true;
                    queue.push_back(w);
                }
            }
        }
        false
    }
}

fn check_connected(adj: &[Vec<NodeId>]) -> Result<(), GraphError> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v.index()] {
                seen[v.index()] = true;
                queue.push_back(v.index());
            }
        }
    }
    match seen.iter().position(|s| !s) {
        Some(v) => Err(GraphError::NotStronglyConnected(v)),
        None => Ok(()),
    }
}
