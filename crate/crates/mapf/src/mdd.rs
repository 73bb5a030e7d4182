//! Per-agent time-expanded reachability diagrams.
//!
//! For an agent and a depth `d`, the diagram contains node `(v, t)` exactly
//! when some start-to-goal walk of exactly `d` steps (waits allowed) passes
//! through `v` at time `t`. Equivalently, `dist(start, v) <= t` and
//! `dist(v, goal) <= d - t`, which is how construction prunes: everything
//! too far from the start or the goal is dropped. Arcs connect member nodes
//! at consecutive timesteps and represent wait (`u == u`) and move
//! (`{u, v}` an edge) actions.

use crate::instance::{Instance, ModelError, Vertex};
use std::fmt::Write as _;

/// The diagram of all start-to-goal walks of a fixed length for one agent.
#[derive(Debug, Clone)]
pub struct Mdd {
    agent: usize,
    depth: usize,
    /// `levels[t]` lists the vertices present at timestep `t`, sorted.
    levels: Vec<Vec<Vertex>>,
    /// `arcs[t]` lists `(u, v)` arcs from time `t` to `t + 1`, sorted.
    arcs: Vec<Vec<(Vertex, Vertex)>>,
}

/// Builds the diagram for `agent` at exactly `depth` timesteps.
///
/// Fails with [`ModelError::DepthTooSmall`] when `depth` is below the
/// agent's shortest-path length and with [`ModelError::Unreachable`] when
/// no walk exists at all.
pub fn build_mdd(instance: &Instance, agent: usize, depth: usize) -> Result<Mdd, ModelError> {
    let task = instance.agent(agent);
    let from_start = instance.bfs_distances(task.start);
    let to_goal = instance.bfs_distances(task.goal);
    let shortest = from_start[task.goal];
    if shortest == usize::MAX {
        return Err(ModelError::Unreachable { agent });
    }
    if depth < shortest {
        return Err(ModelError::DepthTooSmall { agent, depth, shortest });
    }

    let mut levels = Vec::with_capacity(depth + 1);
    for t in 0..=depth {
        let level: Vec<Vertex> = (0..instance.num_vertices())
            .filter(|&v| from_start[v] <= t && to_goal[v] != usize::MAX && to_goal[v] <= depth - t)
            .collect();
        levels.push(level);
    }

    let mut arcs = Vec::with_capacity(depth);
    for t in 0..depth {
        let next = &levels[t + 1];
        let mut layer = Vec::new();
        for &u in &levels[t] {
            for &v in next {
                if u == v || instance.has_edge(u, v) {
                    layer.push((u, v));
                }
            }
        }
        layer.sort_unstable();
        arcs.push(layer);
    }

    Ok(Mdd { agent, depth, levels, arcs })
}

impl Mdd {
    pub fn agent(&self) -> usize {
        self.agent
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Vertices present at timestep `t`, sorted ascending.
    pub fn level(&self, t: usize) -> &[Vertex] {
        &self.levels[t]
    }

    /// Arcs from timestep `t` to `t + 1`, sorted ascending.
    pub fn arcs_at(&self, t: usize) -> &[(Vertex, Vertex)] {
        &self.arcs[t]
    }

    pub fn contains(&self, v: Vertex, t: usize) -> bool {
        t <= self.depth && self.levels[t].binary_search(&v).is_ok()
    }

    pub fn num_nodes(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.iter().map(Vec::len).sum()
    }

    /// Exact number of distinct directed start-to-goal paths, by dynamic
    /// programming over the levels. Used as a correctness oracle for the
    /// construction.
    pub fn walk_count(&self) -> u128 {
        let mut counts = vec![0u128; self.levels[0].len()];
        counts.fill(1);
        for t in 0..self.depth {
            let next_level = &self.levels[t + 1];
            let mut next = vec![0u128; next_level.len()];
            for &(u, v) in &self.arcs[t] {
                let ui = self.levels[t].binary_search(&u).unwrap();
                let vi = next_level.binary_search(&v).unwrap();
                next[vi] += counts[ui];
            }
            counts = next;
        }
        counts.iter().sum()
    }

    /// Plain-text dump: one `t vertex` line per node, then one `t u v` line
    /// per arc, in stable sorted order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (t, level) in self.levels.iter().enumerate() {
            for &v in level {
                writeln!(out, "{t} {v}").unwrap();
            }
        }
        for (t, layer) in self.arcs.iter().enumerate() {
            for &(u, v) in layer {
                writeln!(out, "{t} {u} {v}").unwrap();
            }
        }
        out
    }
}
