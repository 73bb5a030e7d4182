//! The mapping from diagram nodes and arcs to Boolean variables.

use super::formula::Var;
use crate::instance::{Bounds, Instance, Vertex};
use crate::mdd::Mdd;
use std::collections::HashMap;

/// Assigns consecutive variable ids (starting at 1) to occupancy variables
/// (one per diagram node), then traversal variables (one per diagram arc),
/// then whatever auxiliary variables the cardinality circuit allocates.
///
/// Each agent's diagram is built at its own depth `xi + delta` and extended
/// to the common horizon `t_max` by goal-wait tail nodes: an agent that has
/// exhausted its cost budget sits on its goal, and still has to be visible
/// to collision constraints there.
#[derive(Debug, Clone)]
pub struct VarMap {
    num_agents: usize,
    t_max: usize,
    x: HashMap<(usize, Vertex, usize), Var>,
    e: HashMap<(usize, Vertex, Vertex, usize), Var>,
    /// Per agent and timestep, the (vertex, variable) pairs sorted by
    /// vertex. Drives both decoding and the deterministic clause order.
    occupancy: Vec<Vec<Vec<(Vertex, Var)>>>,
    /// Per agent and timestep, the (from, to, variable) arc triples sorted.
    traversal: Vec<Vec<Vec<(Vertex, Vertex, Var)>>>,
    num_x: usize,
    num_e: usize,
    num_aux: usize,
}

impl VarMap {
    /// Lays out variables for one diagram per agent under the given bounds.
    /// `mdds[i]` must have depth `bounds.xi[i] + bounds.delta`.
    pub fn build(instance: &Instance, mdds: &[Mdd], bounds: &Bounds) -> VarMap {
        let k = instance.num_agents();
        debug_assert_eq!(mdds.len(), k);
        let t_max = bounds.t_max;
        let mut next: Var = 1;
        let mut x = HashMap::new();
        let mut e = HashMap::new();
        let mut occupancy = Vec::with_capacity(k);
        let mut traversal = Vec::with_capacity(k);

        for (agent, mdd) in mdds.iter().enumerate() {
            debug_assert_eq!(mdd.depth(), bounds.xi[agent] + bounds.delta);
            let goal = instance.agent(agent).goal;
            let mut per_t = Vec::with_capacity(t_max + 1);
            for t in 0..=t_max {
                let level: &[Vertex] =
                    if t <= mdd.depth() { mdd.level(t) } else { std::slice::from_ref(&goal) };
                let mut entries = Vec::with_capacity(level.len());
                for &v in level {
                    x.insert((agent, v, t), next);
                    entries.push((v, next));
                    next += 1;
                }
                per_t.push(entries);
            }
            occupancy.push(per_t);
        }
        let num_x = (next - 1) as usize;

        for (agent, mdd) in mdds.iter().enumerate() {
            let goal = instance.agent(agent).goal;
            let mut per_t = Vec::with_capacity(t_max);
            for t in 0..t_max {
                let arcs: Vec<(Vertex, Vertex)> = if t < mdd.depth() {
                    mdd.arcs_at(t).to_vec()
                } else {
                    vec![(goal, goal)]
                };
                let mut entries = Vec::with_capacity(arcs.len());
                for (u, v) in arcs {
                    e.insert((agent, u, v, t), next);
                    entries.push((u, v, next));
                    next += 1;
                }
                per_t.push(entries);
            }
            traversal.push(per_t);
        }
        let num_e = (next - 1) as usize - num_x;

        VarMap {
            num_agents: k,
            t_max,
            x,
            e,
            occupancy,
            traversal,
            num_x,
            num_e,
            num_aux: 0,
        }
    }

    pub fn x_var(&self, agent: usize, v: Vertex, t: usize) -> Option<Var> {
        self.x.get(&(agent, v, t)).copied()
    }

    pub fn e_var(&self, agent: usize, from: Vertex, to: Vertex, t: usize) -> Option<Var> {
        self.e.get(&(agent, from, to, t)).copied()
    }

    /// Occupancy (vertex, variable) pairs of one agent at one timestep.
    pub fn occupancy_at(&self, agent: usize, t: usize) -> &[(Vertex, Var)] {
        &self.occupancy[agent][t]
    }

    /// Traversal (from, to, variable) triples of one agent at one timestep.
    pub fn traversal_at(&self, agent: usize, t: usize) -> &[(Vertex, Vertex, Var)] {
        &self.traversal[agent][t]
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    pub fn num_x(&self) -> usize {
        self.num_x
    }

    pub fn num_e(&self) -> usize {
        self.num_e
    }

    pub fn num_aux(&self) -> usize {
        self.num_aux
    }

    pub(crate) fn record_aux(&mut self, count: usize) {
        self.num_aux += count;
    }

    pub fn total_vars(&self) -> usize {
        self.num_x + self.num_e + self.num_aux
    }
}
