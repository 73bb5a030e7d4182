//! Problem instances, plans, conflict semantics, and cost bounds.
//!
//! An [`Instance`] is an undirected graph together with one start/goal pair
//! per agent. A [`Plan`] assigns every agent a timestep-indexed vertex
//! sequence. [`validate`] reports every vertex and edge collision in a plan,
//! [`sum_of_costs`] evaluates the objective, and [`Bounds`] packages the
//! per-agent shortest-path lengths that every backend uses as its lower
//! bound.

use std::collections::{HashSet, VecDeque};
use std::fmt;

/// Vertices are dense indices into the instance's vertex table.
pub type Vertex = usize;

/// One agent's task: travel from `start` to `goal`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AgentTask {
    pub start: Vertex,
    pub goal: Vertex,
}

/// Errors raised by instance construction and plan validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    /// An edge references a vertex id outside the vertex table.
    InvalidEdge { edge: (Vertex, Vertex), num_vertices: usize },
    /// Self-loop edges are not part of the movement model.
    SelfLoop { vertex: Vertex },
    /// An agent endpoint references a vertex id outside the vertex table.
    InvalidEndpoint { agent: usize, vertex: Vertex },
    /// Two agents share a start vertex.
    DuplicateStart { vertex: Vertex },
    /// Two agents share a goal vertex.
    DuplicateGoal { vertex: Vertex },
    /// More agents than vertices.
    TooManyAgents { agents: usize, vertices: usize },
    /// An agent's goal is not reachable from its start.
    Unreachable { agent: usize },
    /// A plan violates the structural rules (wrong endpoints, non-edges, ...).
    MalformedPlan { agent: usize, detail: String },
    /// The requested diagram depth is below the agent's shortest-path length.
    DepthTooSmall { agent: usize, depth: usize, shortest: usize },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::InvalidEdge { edge, num_vertices } => {
                write!(f, "edge ({}, {}) references a vertex >= {}", edge.0, edge.1, num_vertices)
            }
            ModelError::SelfLoop { vertex } => write!(f, "self-loop at vertex {vertex}"),
            ModelError::InvalidEndpoint { agent, vertex } => {
                write!(f, "agent {agent} references unknown vertex {vertex}")
            }
            ModelError::DuplicateStart { vertex } => {
                write!(f, "two agents start at vertex {vertex}")
            }
            ModelError::DuplicateGoal { vertex } => {
                write!(f, "two agents share goal vertex {vertex}")
            }
            ModelError::TooManyAgents { agents, vertices } => {
                write!(f, "{agents} agents on {vertices} vertices")
            }
            ModelError::Unreachable { agent } => {
                write!(f, "goal of agent {agent} is unreachable from its start")
            }
            ModelError::MalformedPlan { agent, detail } => {
                write!(f, "malformed plan for agent {agent}: {detail}")
            }
            ModelError::DepthTooSmall { agent, depth, shortest } => {
                write!(f, "depth {depth} below shortest-path length {shortest} of agent {agent}")
            }
        }
    }
}

impl std::error::Error for ModelError {}

/// An undirected graph plus the agents that move on it.
///
/// Immutable after construction; all queries are borrows.
#[derive(Debug, Clone)]
pub struct Instance {
    labels: Vec<String>,
    adjacency: Vec<Vec<Vertex>>,
    edges: Vec<(Vertex, Vertex)>,
    agents: Vec<AgentTask>,
}

impl Instance {
    /// Builds an instance with default labels `v1..vn`.
    pub fn new(
        num_vertices: usize,
        edges: Vec<(Vertex, Vertex)>,
        agents: Vec<AgentTask>,
    ) -> Result<Self, ModelError> {
        let labels = (1..=num_vertices).map(|k| format!("v{k}")).collect();
        Self::with_labels(labels, edges, agents)
    }

    /// Builds an instance with explicit display labels, one per vertex.
    pub fn with_labels(
        labels: Vec<String>,
        edges: Vec<(Vertex, Vertex)>,
        agents: Vec<AgentTask>,
    ) -> Result<Self, ModelError> {
        let n = labels.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut normalized: Vec<(Vertex, Vertex)> = Vec::with_capacity(edges.len());
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(ModelError::InvalidEdge { edge: (u, v), num_vertices: n });
            }
            if u == v {
                return Err(ModelError::SelfLoop { vertex: u });
            }
            normalized.push((u.min(v), u.max(v)));
        }
        normalized.sort_unstable();
        normalized.dedup();
        for &(u, v) in &normalized {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        if agents.len() > n {
            return Err(ModelError::TooManyAgents { agents: agents.len(), vertices: n });
        }
        let mut starts = HashSet::new();
        let mut goals = HashSet::new();
        for (i, task) in agents.iter().enumerate() {
            if task.start >= n {
                return Err(ModelError::InvalidEndpoint { agent: i, vertex: task.start });
            }
            if task.goal >= n {
                return Err(ModelError::InvalidEndpoint { agent: i, vertex: task.goal });
            }
            if !starts.insert(task.start) {
                return Err(ModelError::DuplicateStart { vertex: task.start });
            }
            if !goals.insert(task.goal) {
                return Err(ModelError::DuplicateGoal { vertex: task.goal });
            }
        }

        Ok(Instance { labels, adjacency, edges: normalized, agents })
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn agents(&self) -> &[AgentTask] {
        &self.agents
    }

    pub fn agent(&self, i: usize) -> AgentTask {
        self.agents[i]
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adjacency[v]
    }

    /// Undirected edges, normalized to `u < v` and sorted.
    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn label(&self, v: Vertex) -> &str {
        &self.labels[v]
    }

    pub fn vertex_by_label(&self, label: &str) -> Option<Vertex> {
        self.labels.iter().position(|l| l == label)
    }

    /// BFS distances from `source` to every vertex; `usize::MAX` marks
    /// unreachable vertices.
    pub fn bfs_distances(&self, source: Vertex) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.num_vertices()];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// Which movement rule the validator enforces.
///
/// [`MovementRule::Standard`] is the model everything in this crate solves
/// for: exclusive vertex occupancy plus no opposite-direction edge
/// traversal, with follow moves into just-vacated vertices allowed.
/// [`MovementRule::MoveToVacantOnly`] additionally forbids moving into a
/// vertex that was occupied in the previous step; it exists for validation
/// experiments only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MovementRule {
    #[default]
    Standard,
    MoveToVacantOnly,
}

/// Per-agent vertex sequences over a common horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    routes: Vec<Vec<Vertex>>,
}

impl Plan {
    pub fn new(routes: Vec<Vec<Vertex>>) -> Self {
        Plan { routes }
    }

    pub fn routes(&self) -> &[Vec<Vertex>] {
        &self.routes
    }

    pub fn route(&self, agent: usize) -> &[Vertex] {
        &self.routes[agent]
    }

    pub fn num_agents(&self) -> usize {
        self.routes.len()
    }

    /// Common horizon `T` after goal-padding (the longest route decides).
    /// Zero for an empty plan.
    pub fn horizon(&self) -> usize {
        self.routes.iter().map(|r| r.len().saturating_sub(1)).max().unwrap_or(0)
    }

    /// Pads every route to the common horizon by repeating its last vertex.
    pub fn padded(&self) -> Plan {
        let horizon = self.horizon();
        let routes = self
            .routes
            .iter()
            .map(|r| {
                let mut r = r.clone();
                if let Some(&last) = r.last() {
                    r.resize(horizon + 1, last);
                }
                r
            })
            .collect();
        Plan { routes }
    }

    /// Drops trailing timesteps in which every agent is already parked at
    /// its final vertex, so the horizon equals the makespan.
    pub fn trimmed(&self) -> Plan {
        let padded = self.padded();
        let mut keep = 1usize;
        for route in &padded.routes {
            if let Some(&last) = route.last() {
                let arrival = route.iter().rposition(|&v| v != last).map_or(0, |t| t + 1);
                keep = keep.max(arrival + 1);
            }
        }
        let routes = padded
            .routes
            .iter()
            .map(|r| r.iter().copied().take(keep.min(r.len())).collect())
            .collect();
        Plan { routes }
    }
}

/// What kind of collision a [`Conflict`] records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConflictKind {
    Vertex,
    Edge,
}

/// A collision between two agents.
///
/// For a vertex conflict, both agents occupy `location.0 == location.1` at
/// `timestep`. For an edge conflict, the lower-indexed agent of `agents`
/// moves `location.0 -> location.1` while the other moves the opposite way,
/// and `timestep` is the step at which the traversal begins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Conflict {
    pub kind: ConflictKind,
    /// Agent indices, lower first.
    pub agents: (usize, usize),
    pub location: (Vertex, Vertex),
    pub timestep: usize,
}

impl Conflict {
    pub fn vertex(a: usize, b: usize, v: Vertex, timestep: usize) -> Self {
        Conflict {
            kind: ConflictKind::Vertex,
            agents: (a.min(b), a.max(b)),
            location: (v, v),
            timestep,
        }
    }

    /// `from -> to` is the traversal direction of the lower-indexed agent.
    pub fn edge(a: usize, b: usize, from: Vertex, to: Vertex, timestep: usize) -> Self {
        let (agents, location) = if a <= b { ((a, b), (from, to)) } else { ((b, a), (to, from)) };
        Conflict { kind: ConflictKind::Edge, agents, location, timestep }
    }

    fn sort_key(&self) -> (usize, u8, (usize, usize), (Vertex, Vertex)) {
        let kind = match self.kind {
            ConflictKind::Vertex => 0,
            ConflictKind::Edge => 1,
        };
        (self.timestep, kind, self.agents, self.location)
    }
}

impl PartialOrd for Conflict {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Conflict {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl fmt::Display for Conflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ConflictKind::Vertex => write!(
                f,
                "vertex conflict: agents {} and {} at vertex {} at t={}",
                self.agents.0, self.agents.1, self.location.0, self.timestep
            ),
            ConflictKind::Edge => write!(
                f,
                "edge conflict: agents {} and {} across {{{}, {}}} at t={}",
                self.agents.0, self.agents.1, self.location.0, self.location.1, self.timestep
            ),
        }
    }
}

fn check_structure(instance: &Instance, plan: &Plan) -> Result<(), ModelError> {
    if plan.num_agents() != instance.num_agents() {
        return Err(ModelError::MalformedPlan {
            agent: plan.num_agents().min(instance.num_agents()),
            detail: format!(
                "plan has {} routes for {} agents",
                plan.num_agents(),
                instance.num_agents()
            ),
        });
    }
    for (i, route) in plan.routes.iter().enumerate() {
        let task = instance.agent(i);
        if route.is_empty() {
            return Err(ModelError::MalformedPlan { agent: i, detail: "empty route".into() });
        }
        if let Some(&v) = route.iter().find(|&&v| v >= instance.num_vertices()) {
            return Err(ModelError::MalformedPlan {
                agent: i,
                detail: format!("unknown vertex {v}"),
            });
        }
        if route[0] != task.start {
            return Err(ModelError::MalformedPlan {
                agent: i,
                detail: format!("route starts at {} instead of {}", route[0], task.start),
            });
        }
        if *route.last().unwrap() != task.goal {
            return Err(ModelError::MalformedPlan {
                agent: i,
                detail: format!("route ends at {} instead of {}", route.last().unwrap(), task.goal),
            });
        }
        for t in 0..route.len() - 1 {
            let (u, v) = (route[t], route[t + 1]);
            if u != v && !instance.has_edge(u, v) {
                return Err(ModelError::MalformedPlan {
                    agent: i,
                    detail: format!("step {t}: no edge between {u} and {v}"),
                });
            }
        }
    }
    Ok(())
}

/// Reports every vertex and edge collision of `plan` under the standard
/// movement rule, sorted by (timestep, kind, agent pair). An empty list
/// means the plan is a valid solution.
///
/// Routes are goal-padded to a common horizon first: an agent parked at its
/// goal still blocks that vertex.
pub fn validate(instance: &Instance, plan: &Plan) -> Result<Vec<Conflict>, ModelError> {
    validate_with(instance, plan, MovementRule::Standard)
}

/// [`validate`] with an explicit movement rule.
pub fn validate_with(
    instance: &Instance,
    plan: &Plan,
    rule: MovementRule,
) -> Result<Vec<Conflict>, ModelError> {
    check_structure(instance, plan)?;
    let padded = plan.padded();
    let k = padded.num_agents();
    let horizon = if k == 0 { 0 } else { padded.horizon() };
    let mut conflicts = Vec::new();

    for t in 0..=horizon {
        for i in 0..k {
            for j in i + 1..k {
                let (pi, pj) = (padded.routes[i][t], padded.routes[j][t]);
                if pi == pj {
                    conflicts.push(Conflict::vertex(i, j, pi, t));
                }
                if t < horizon {
                    let (ni, nj) = (padded.routes[i][t + 1], padded.routes[j][t + 1]);
                    if pi != ni && ni == pj && nj == pi {
                        conflicts.push(Conflict::edge(i, j, pi, ni, t));
                    }
                    if rule == MovementRule::MoveToVacantOnly {
                        // Following into a vertex vacated this very step.
                        if ni == pj && nj != pj && pi != ni {
                            conflicts.push(Conflict::vertex(i, j, ni, t + 1));
                        }
                        if nj == pi && ni != pi && pj != nj {
                            conflicts.push(Conflict::vertex(i, j, nj, t + 1));
                        }
                    }
                }
            }
        }
    }

    conflicts.sort();
    conflicts.dedup();
    Ok(conflicts)
}

/// Sum over agents of the number of timesteps until the agent's final
/// arrival at its goal. Waits after the final arrival are free; waits (and
/// any moves) before it each cost one timestep. An agent that sits on its
/// goal for the whole plan costs zero.
///
/// The plan must be structurally valid (see [`validate`]).
pub fn sum_of_costs(instance: &Instance, plan: &Plan) -> usize {
    plan.routes
        .iter()
        .enumerate()
        .map(|(i, route)| {
            let goal = instance.agent(i).goal;
            route.iter().rposition(|&v| v != goal).map_or(0, |t| t + 1)
        })
        .sum()
}

/// Per-agent shortest-path lengths (in moves) from start to goal.
pub fn shortest_path_lengths(instance: &Instance) -> Result<Vec<usize>, ModelError> {
    instance
        .agents()
        .iter()
        .enumerate()
        .map(|(i, task)| {
            let dist = instance.bfs_distances(task.start);
            match dist[task.goal] {
                usize::MAX => Err(ModelError::Unreachable { agent: i }),
                d => Ok(d),
            }
        })
        .collect()
}

/// The bound bookkeeping shared by every backend: per-agent shortest-path
/// lengths `xi`, their sum `soc_lb`, the current sum-of-costs budget
/// `soc = soc_lb + delta`, and the time horizon `t_max = max_i xi + delta`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bounds {
    pub xi: Vec<usize>,
    pub soc_lb: usize,
    pub soc: usize,
    pub delta: usize,
    pub t_max: usize,
}

impl Bounds {
    pub fn new(instance: &Instance, delta: usize) -> Result<Self, ModelError> {
        let xi = shortest_path_lengths(instance)?;
        Ok(Self::from_xi(xi, delta))
    }

    pub fn from_xi(xi: Vec<usize>, delta: usize) -> Self {
        let soc_lb: usize = xi.iter().sum();
        let t_max = xi.iter().copied().max().unwrap_or(0) + delta;
        Bounds { soc_lb, soc: soc_lb + delta, delta, t_max, xi }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    fn p3() -> Instance {
        fixtures::path3()
    }

    #[test]
    fn construction_rejects_bad_edges_and_agents() {
        let agents = vec![AgentTask { start: 0, goal: 2 }];
        assert!(matches!(
            Instance::new(3, vec![(0, 3)], agents.clone()),
            Err(ModelError::InvalidEdge { .. })
        ));
        assert!(matches!(
            Instance::new(3, vec![(1, 1)], agents.clone()),
            Err(ModelError::SelfLoop { .. })
        ));
        let dup_start = vec![AgentTask { start: 0, goal: 1 }, AgentTask { start: 0, goal: 2 }];
        assert!(matches!(
            Instance::new(3, vec![(0, 1), (1, 2)], dup_start),
            Err(ModelError::DuplicateStart { .. })
        ));
        let dup_goal = vec![AgentTask { start: 0, goal: 2 }, AgentTask { start: 1, goal: 2 }];
        assert!(matches!(
            Instance::new(3, vec![(0, 1), (1, 2)], dup_goal),
            Err(ModelError::DuplicateGoal { .. })
        ));
        let crowd = vec![AgentTask { start: 0, goal: 0 }, AgentTask { start: 1, goal: 1 }];
        assert!(matches!(
            Instance::new(1, vec![], crowd),
            Err(ModelError::TooManyAgents { .. })
        ));
    }

    #[test]
    fn shortest_paths_on_fixtures() {
        assert_eq!(shortest_path_lengths(&p3()).unwrap(), vec![2]);

        let same = Instance::new(3, vec![(0, 1), (1, 2)], vec![AgentTask { start: 1, goal: 1 }])
            .unwrap();
        assert_eq!(shortest_path_lengths(&same).unwrap(), vec![0]);

        // Star: center 0, leaves 1..3. Leaf to leaf takes two moves.
        let star = Instance::new(
            4,
            vec![(0, 1), (0, 2), (0, 3)],
            vec![AgentTask { start: 1, goal: 2 }],
        )
        .unwrap();
        assert_eq!(shortest_path_lengths(&star).unwrap(), vec![2]);

        let split = Instance::new(2, vec![], vec![AgentTask { start: 0, goal: 1 }]).unwrap();
        assert_eq!(
            shortest_path_lengths(&split),
            Err(ModelError::Unreachable { agent: 0 })
        );
    }

    #[test]
    fn validate_finds_vertex_conflict() {
        let inst = Instance::new(
            3,
            vec![(0, 1), (1, 2)],
            vec![AgentTask { start: 0, goal: 1 }, AgentTask { start: 2, goal: 1 }],
        )
        .unwrap();
        let plan = Plan::new(vec![vec![0, 1], vec![2, 1]]);
        let conflicts = validate(&inst, &plan).unwrap();
        assert_eq!(conflicts, vec![Conflict::vertex(0, 1, 1, 1)]);
    }

    #[test]
    fn validate_finds_edge_conflict() {
        let inst = Instance::new(
            2,
            vec![(0, 1)],
            vec![AgentTask { start: 0, goal: 1 }, AgentTask { start: 1, goal: 0 }],
        )
        .unwrap();
        let plan = Plan::new(vec![vec![0, 1], vec![1, 0]]);
        let conflicts = validate(&inst, &plan).unwrap();
        assert_eq!(conflicts, vec![Conflict::edge(0, 1, 0, 1, 0)]);
    }

    #[test]
    fn validate_allows_follow_moves() {
        let inst = Instance::new(
            3,
            vec![(0, 1), (1, 2)],
            vec![AgentTask { start: 0, goal: 1 }, AgentTask { start: 1, goal: 2 }],
        )
        .unwrap();
        let plan = Plan::new(vec![vec![0, 1], vec![1, 2]]);
        assert!(validate(&inst, &plan).unwrap().is_empty());
        // Under the vacant-only rule the same plan is rejected.
        let strict = validate_with(&inst, &plan, MovementRule::MoveToVacantOnly).unwrap();
        assert_eq!(strict, vec![Conflict::vertex(0, 1, 1, 1)]);
    }

    #[test]
    fn validate_reports_malformed_plans() {
        let inst = p3();
        let bad_start = Plan::new(vec![vec![1, 2]]);
        assert!(matches!(
            validate(&inst, &bad_start),
            Err(ModelError::MalformedPlan { agent: 0, .. })
        ));
        let teleport = Plan::new(vec![vec![0, 2]]);
        assert!(matches!(
            validate(&inst, &teleport),
            Err(ModelError::MalformedPlan { agent: 0, .. })
        ));
    }

    #[test]
    fn sum_of_costs_examples() {
        let inst = p3();
        assert_eq!(sum_of_costs(&inst, &Plan::new(vec![vec![0, 1, 2]])), 2);
        // Wait then move: the wait before arrival counts.
        let inst2 = Instance::new(3, vec![(0, 1), (1, 2)], vec![AgentTask { start: 0, goal: 1 }])
            .unwrap();
        assert_eq!(sum_of_costs(&inst2, &Plan::new(vec![vec![0, 0, 1]])), 2);
        // Parked at the goal the whole time.
        let inst3 =
            Instance::new(3, vec![(0, 1), (1, 2)], vec![AgentTask { start: 1, goal: 1 }]).unwrap();
        assert_eq!(sum_of_costs(&inst3, &Plan::new(vec![vec![1, 1, 1]])), 0);
        // Leaving the goal re-accrues the earlier waits.
        assert_eq!(sum_of_costs(&inst3, &Plan::new(vec![vec![1, 0, 1]])), 2);
    }

    #[test]
    fn trimmed_drops_parked_tail() {
        let plan = Plan::new(vec![vec![0, 1, 2, 2, 2], vec![2, 1, 1, 1, 1]]);
        let inst = Instance::new(
            3,
            vec![(0, 1), (1, 2)],
            vec![AgentTask { start: 0, goal: 2 }, AgentTask { start: 2, goal: 1 }],
        )
        .unwrap();
        let trimmed = plan.trimmed();
        assert_eq!(trimmed.routes(), &[vec![0, 1, 2], vec![2, 1, 1]]);
        assert_eq!(sum_of_costs(&inst, &plan), sum_of_costs(&inst, &trimmed));
    }

    #[test]
    fn bounds_arithmetic() {
        let inst = fixtures::star4_swap();
        let bounds = Bounds::new(&inst, 3).unwrap();
        assert_eq!(bounds.xi, vec![2, 2]);
        assert_eq!(bounds.soc_lb, 4);
        assert_eq!(bounds.soc, 7);
        assert_eq!(bounds.t_max, 5);
    }

    /// Brute-force re-implementation of the conflict scan used as the
    /// independent reference for the property test below.
    fn scan_all_pairs(instance: &Instance, plan: &Plan) -> Vec<Conflict> {
        let padded = plan.padded();
        let mut found = Vec::new();
        for i in 0..padded.num_agents() {
            for j in 0..padded.num_agents() {
                if i >= j {
                    continue;
                }
                let (ri, rj) = (padded.route(i), padded.route(j));
                for t in 0..ri.len() {
                    if ri[t] == rj[t] {
                        found.push(Conflict::vertex(i, j, ri[t], t));
                    }
                    if t + 1 < ri.len()
                        && ri[t] != ri[t + 1]
                        && ri[t + 1] == rj[t]
                        && rj[t + 1] == ri[t]
                    {
                        found.push(Conflict::edge(i, j, ri[t], ri[t + 1], t));
                    }
                }
            }
        }
        found.sort();
        found.dedup();
        found
    }

    proptest! {
        #[test]
        fn validate_matches_pairwise_scan(seed in 0u64..400) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(3..=10usize);
            let mut edges = Vec::new();
            // A random connected graph: a path backbone plus extras.
            for v in 1..n {
                edges.push((v - 1, v));
            }
            for _ in 0..n {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                if u != v {
                    edges.push((u.min(v), u.max(v)));
                }
            }
            let k = rng.gen_range(1..=3usize.min(n));
            let mut starts: Vec<usize> = (0..n).collect();
            let mut goals: Vec<usize> = (0..n).collect();
            for v in (1..n).rev() {
                starts.swap(v, rng.gen_range(0..=v));
                goals.swap(v, rng.gen_range(0..=v));
            }
            let horizon = rng.gen_range(1..=5usize);
            // Random walks of the right shape: force the endpoints afterwards.
            let inst_probe = Instance::new(n, edges.clone(), vec![]).unwrap();
            let mut routes = Vec::new();
            let mut agents = Vec::new();
            for a in 0..k {
                let mut route = vec![starts[a]];
                for _ in 0..horizon {
                    let u = *route.last().unwrap();
                    let nbrs = inst_probe.neighbors(u);
                    let pick = rng.gen_range(0..=nbrs.len());
                    route.push(if pick == nbrs.len() { u } else { nbrs[pick] });
                }
                agents.push(AgentTask { start: route[0], goal: *route.last().unwrap() });
                routes.push(route);
            }
            let goals_distinct = {
                let set: HashSet<_> = agents.iter().map(|t| t.goal).collect();
                set.len() == agents.len()
            };
            prop_assume!(goals_distinct);
            let inst = Instance::new(n, edges, agents).unwrap();
            let plan = Plan::new(routes);
            let got = validate(&inst, &plan).unwrap();
            let want = scan_all_pairs(&inst, &plan);
            prop_assert_eq!(got, want);
        }
    }
}
