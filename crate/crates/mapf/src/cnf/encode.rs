//! Clause generation: path semantics, collision constraints, the
//! sum-of-costs cardinality circuit, conflict elimination, and decoding.

use super::formula::{ClauseFamily, CnfFormula, Lit};
use super::varmap::VarMap;
use super::CnfError;
use crate::instance::{Bounds, Conflict, ConflictKind, Instance, Plan};
use crate::mdd::Mdd;

/// Builds the collision-free-agnostic base encoding: for every agent, start
/// and goal unit clauses, "leave through exactly one arc" semantics over
/// its diagram, arc-effect clauses tying traversal to occupancy, at most
/// one occupied vertex per timestep, and the cardinality circuit bounding
/// the sum of costs by `bounds.soc`. No inter-agent constraint is added
/// here; the eager backend layers [`encode_vertex_collisions`] and
/// [`encode_swap_collisions`] on top, the lazy backend adds
/// [`add_conflict_clauses`] as violations are discovered.
pub fn encode_base(instance: &Instance, mdds: &[Mdd], bounds: &Bounds) -> (CnfFormula, VarMap) {
    let mut varmap = VarMap::build(instance, mdds, bounds);
    let mut formula = CnfFormula::new(varmap.num_x() + varmap.num_e());
    let t_max = bounds.t_max;

    for agent in 0..instance.num_agents() {
        let task = instance.agent(agent);
        let start_var = varmap.x_var(agent, task.start, 0).expect("start node in diagram");
        let goal_var = varmap.x_var(agent, task.goal, t_max).expect("goal node in diagram");
        formula.add_clause(ClauseFamily::Path, vec![start_var]);
        formula.add_clause(ClauseFamily::Path, vec![goal_var]);

        for t in 0..t_max {
            let arcs = varmap.traversal_at(agent, t).to_vec();
            // Occupancy implies leaving through exactly one arc.
            for &(u, u_var) in varmap.occupancy_at(agent, t) {
                let outgoing: Vec<Lit> =
                    arcs.iter().filter(|&&(a, _, _)| a == u).map(|&(_, _, var)| var).collect();
                debug_assert!(!outgoing.is_empty(), "diagram node without outgoing arc");
                let mut clause = Vec::with_capacity(outgoing.len() + 1);
                clause.push(-u_var);
                clause.extend_from_slice(&outgoing);
                formula.add_clause(ClauseFamily::Path, clause);
                for i in 0..outgoing.len() {
                    for j in i + 1..outgoing.len() {
                        formula
                            .add_clause(ClauseFamily::Path, vec![-outgoing[i], -outgoing[j]]);
                    }
                }
            }
            // Taking an arc puts the agent at both of its endpoints.
            for &(u, v, e_var) in &arcs {
                let u_var = varmap.x_var(agent, u, t).expect("arc tail in diagram");
                let v_var = varmap.x_var(agent, v, t + 1).expect("arc head in diagram");
                formula.add_clause(ClauseFamily::Path, vec![-e_var, u_var]);
                formula.add_clause(ClauseFamily::Path, vec![-e_var, v_var]);
            }
        }

        // At most one occupied vertex per timestep.
        for t in 0..=t_max {
            let level = varmap.occupancy_at(agent, t);
            for i in 0..level.len() {
                for j in i + 1..level.len() {
                    formula.add_clause(ClauseFamily::Path, vec![-level[i].1, -level[j].1]);
                }
            }
        }
    }

    encode_soc_bound(&mut formula, &mut varmap, instance, bounds);
    (formula, varmap)
}

/// Forbids two agents from sharing a vertex at a timestep: one binary
/// clause per unordered agent pair and shared diagram node. Returns the
/// number of clauses added.
pub fn encode_vertex_collisions(formula: &mut CnfFormula, varmap: &VarMap) -> usize {
    let mut added = 0;
    for i in 0..varmap.num_agents() {
        for j in i + 1..varmap.num_agents() {
            for t in 0..=varmap.t_max() {
                for &(v, i_var) in varmap.occupancy_at(i, t) {
                    if let Some(j_var) = varmap.x_var(j, v, t) {
                        formula.add_clause(ClauseFamily::VertexCollision, vec![-i_var, -j_var]);
                        added += 1;
                    }
                }
            }
        }
    }
    added
}

/// Forbids opposite-direction traversals of one edge in the same step: one
/// binary clause per agent pair and opposed arc pair present in both
/// diagrams. Returns the number of clauses added.
pub fn encode_swap_collisions(formula: &mut CnfFormula, varmap: &VarMap) -> usize {
    let mut added = 0;
    for i in 0..varmap.num_agents() {
        for j in i + 1..varmap.num_agents() {
            for t in 0..varmap.t_max() {
                for &(u, v, i_var) in varmap.traversal_at(i, t) {
                    if u == v {
                        continue;
                    }
                    if let Some(j_var) = varmap.e_var(j, v, u, t) {
                        formula.add_clause(ClauseFamily::SwapCollision, vec![-i_var, -j_var]);
                        added += 1;
                    }
                }
            }
        }
    }
    added
}

/// Bounds the sum of costs by `bounds.soc`.
///
/// One lateness indicator is introduced per agent `i` and timestep
/// `xi_i <= t < t_max`; occupying any non-goal vertex at `t` forces the
/// indicator, and each indicator forces its predecessor so that an agent
/// arriving finally at time `a` accumulates exactly `a - xi_i` true
/// indicators: leaving the goal again retroactively re-prices the waits
/// spent there, matching the plan-level cost definition. A sequential
/// counter then caps the number of true indicators at `bounds.delta`.
/// Returns (auxiliary variables added, clauses added).
pub fn encode_soc_bound(
    formula: &mut CnfFormula,
    varmap: &mut VarMap,
    instance: &Instance,
    bounds: &Bounds,
) -> (usize, usize) {
    let vars_before = formula.num_vars();
    let clauses_before = formula.num_clauses();

    let mut indicators: Vec<Lit> = Vec::new();
    for agent in 0..instance.num_agents() {
        let goal = instance.agent(agent).goal;
        let mut chain: Vec<Lit> = Vec::new();
        for t in bounds.xi[agent]..bounds.t_max {
            let late = formula.new_var();
            for &(v, x_var) in varmap.occupancy_at(agent, t) {
                if v != goal {
                    formula.add_clause(ClauseFamily::Cardinality, vec![-x_var, late]);
                }
            }
            chain.push(late);
        }
        for pair in chain.windows(2) {
            formula.add_clause(ClauseFamily::Cardinality, vec![-pair[1], pair[0]]);
        }
        indicators.extend_from_slice(&chain);
    }

    encode_at_most_k(formula, &indicators, bounds.delta);

    let aux = formula.num_vars() - vars_before;
    varmap.record_aux(aux);
    (aux, formula.num_clauses() - clauses_before)
}

/// Sequential-counter circuit constraining at most `k` of `lits` to be
/// true. Admits exactly the assignments of `lits` with at most `k` true
/// literals (each of which extends to the auxiliary registers). Returns
/// (auxiliary variables added, clauses added).
pub fn encode_at_most_k(formula: &mut CnfFormula, lits: &[Lit], k: usize) -> (usize, usize) {
    let n = lits.len();
    let vars_before = formula.num_vars();
    let clauses_before = formula.num_clauses();
    if k == 0 {
        for &l in lits {
            formula.add_clause(ClauseFamily::Cardinality, vec![-l]);
        }
    } else if n > k {
        // Registers: s[i][j] is true when at least j+1 of the first i+1
        // literals are true, for i in 0..n-1.
        let mut prev: Vec<Lit> = (0..k).map(|_| formula.new_var()).collect();
        formula.add_clause(ClauseFamily::Cardinality, vec![-lits[0], prev[0]]);
        for &s in &prev[1..] {
            formula.add_clause(ClauseFamily::Cardinality, vec![-s]);
        }
        for (i, &x) in lits.iter().enumerate().skip(1) {
            if i == n - 1 {
                formula.add_clause(ClauseFamily::Cardinality, vec![-x, -prev[k - 1]]);
                break;
            }
            let row: Vec<Lit> = (0..k).map(|_| formula.new_var()).collect();
            formula.add_clause(ClauseFamily::Cardinality, vec![-x, row[0]]);
            formula.add_clause(ClauseFamily::Cardinality, vec![-prev[0], row[0]]);
            for j in 1..k {
                formula.add_clause(ClauseFamily::Cardinality, vec![-x, -prev[j - 1], row[j]]);
                formula.add_clause(ClauseFamily::Cardinality, vec![-prev[j], row[j]]);
            }
            formula.add_clause(ClauseFamily::Cardinality, vec![-x, -prev[k - 1]]);
            prev = row;
        }
    }
    (formula.num_vars() - vars_before, formula.num_clauses() - clauses_before)
}

/// Adds one conflict-elimination clause per conflict: for a vertex
/// conflict, neither agent may occupy the vertex at that timestep; for an
/// edge conflict, the two opposed traversals may not both happen.
/// Duplicates are skipped. Returns the number of clauses actually added.
pub fn add_conflict_clauses(
    formula: &mut CnfFormula,
    varmap: &VarMap,
    conflicts: &[Conflict],
) -> Result<usize, CnfError> {
    let mut added = 0;
    for conflict in conflicts {
        let (i, j) = conflict.agents;
        let t = conflict.timestep;
        let clause: Vec<Lit> = match conflict.kind {
            ConflictKind::Vertex => {
                let v = conflict.location.0;
                let xi = varmap.x_var(i, v, t).ok_or_else(|| CnfError::UnknownVariable {
                    detail: format!("agent {i} has no occupancy variable for ({v}, {t})"),
                })?;
                let xj = varmap.x_var(j, v, t).ok_or_else(|| CnfError::UnknownVariable {
                    detail: format!("agent {j} has no occupancy variable for ({v}, {t})"),
                })?;
                vec![-xi, -xj]
            }
            ConflictKind::Edge => {
                let (from, to) = conflict.location;
                let ei =
                    varmap.e_var(i, from, to, t).ok_or_else(|| CnfError::UnknownVariable {
                        detail: format!("agent {i} has no arc variable for {from}->{to} at {t}"),
                    })?;
                let ej =
                    varmap.e_var(j, to, from, t).ok_or_else(|| CnfError::UnknownVariable {
                        detail: format!("agent {j} has no arc variable for {to}->{from} at {t}"),
                    })?;
                vec![-ei, -ej]
            }
        };
        if formula.has_conflict_clause(&clause) {
            continue;
        }
        formula.add_clause(ClauseFamily::ConflictElimination, clause);
        added += 1;
    }
    Ok(added)
}

/// Reads the per-agent vertex sequences out of a satisfying assignment.
pub fn decode(
    assignment: &[bool],
    varmap: &VarMap,
    instance: &Instance,
) -> Result<Plan, CnfError> {
    let mut routes = Vec::with_capacity(instance.num_agents());
    for agent in 0..varmap.num_agents() {
        let mut route = Vec::with_capacity(varmap.t_max() + 1);
        for t in 0..=varmap.t_max() {
            let mut occupied = None;
            for &(v, var) in varmap.occupancy_at(agent, t) {
                if assignment[var as usize] {
                    if occupied.is_some() {
                        return Err(CnfError::AmbiguousAssignment { agent, timestep: t });
                    }
                    occupied = Some(v);
                }
            }
            route.push(occupied.ok_or(CnfError::MissingOccupancy { agent, timestep: t })?);
        }
        routes.push(route);
    }
    Ok(Plan::new(routes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::solver::{decide, SatOutcome};
    use crate::fixtures;
    use crate::instance::{sum_of_costs, validate, AgentTask, Instance};
    use crate::mdd::build_mdd;

    fn build(instance: &Instance, delta: usize) -> (CnfFormula, VarMap, Bounds) {
        let bounds = Bounds::new(instance, delta).unwrap();
        let mdds: Vec<Mdd> = (0..instance.num_agents())
            .map(|a| build_mdd(instance, a, bounds.xi[a] + delta).unwrap())
            .collect();
        let (formula, varmap) = encode_base(instance, &mdds, &bounds);
        (formula, varmap, bounds)
    }

    #[test]
    fn single_agent_path3_counts_and_decode() {
        let inst = fixtures::path3();
        let (formula, varmap, _) = build(&inst, 0);
        assert_eq!(varmap.num_x(), 3);
        assert_eq!(varmap.num_e(), 2);
        assert_eq!(varmap.num_aux(), 0);
        match decide(&formula) {
            SatOutcome::Satisfiable(assignment) => {
                let plan = decode(&assignment, &varmap, &inst).unwrap();
                assert_eq!(plan.routes(), &[vec![0, 1, 2]]);
            }
            SatOutcome::Unsatisfiable => panic!("base encoding must be satisfiable"),
        }
    }

    #[test]
    fn start_equals_goal_decodes_to_constant_route() {
        let inst =
            Instance::new(3, vec![(0, 1), (1, 2)], vec![AgentTask { start: 1, goal: 1 }]).unwrap();
        let (formula, varmap, _) = build(&inst, 0);
        match decide(&formula) {
            SatOutcome::Satisfiable(assignment) => {
                let plan = decode(&assignment, &varmap, &inst).unwrap();
                assert_eq!(plan.routes(), &[vec![1]]);
            }
            SatOutcome::Unsatisfiable => panic!("must be satisfiable"),
        }
    }

    #[test]
    fn base_leaves_collisions_unconstrained() {
        // Two agents swapping over a single edge: the base formula is
        // satisfiable and the decoded plan conflicts.
        let inst = Instance::new(
            2,
            vec![(0, 1)],
            vec![AgentTask { start: 0, goal: 1 }, AgentTask { start: 1, goal: 0 }],
        )
        .unwrap();
        let (formula, varmap, _) = build(&inst, 0);
        match decide(&formula) {
            SatOutcome::Satisfiable(assignment) => {
                let plan = decode(&assignment, &varmap, &inst).unwrap();
                assert!(!validate(&inst, &plan).unwrap().is_empty());
            }
            SatOutcome::Unsatisfiable => panic!("base encoding must be satisfiable"),
        }
        // With swap clauses the same bound becomes unsatisfiable.
        let (mut formula, varmap, _) = build(&inst, 0);
        encode_vertex_collisions(&mut formula, &varmap);
        let swaps = encode_swap_collisions(&mut formula, &varmap);
        assert_eq!(swaps, 2);
        assert!(matches!(decide(&formula), SatOutcome::Unsatisfiable));
    }

    #[test]
    fn vertex_collision_clause_counts() {
        // Opposing agents on path3 with delta 0 share only the middle
        // vertex at t=1.
        let inst = fixtures::path3_swap();
        let (mut formula, varmap, _) = build(&inst, 0);
        let added = encode_vertex_collisions(&mut formula, &varmap);
        assert_eq!(added, 1);

        // Disjoint diagrams share nothing.
        let disjoint = Instance::new(
            4,
            vec![(0, 1), (2, 3)],
            vec![AgentTask { start: 0, goal: 1 }, AgentTask { start: 2, goal: 3 }],
        )
        .unwrap();
        let (mut formula, varmap, _) = build(&disjoint, 0);
        assert_eq!(encode_vertex_collisions(&mut formula, &varmap), 0);
        assert_eq!(encode_swap_collisions(&mut formula, &varmap), 0);
    }

    #[test]
    fn follow_chain_has_no_swap_clause() {
        let inst = Instance::new(
            3,
            vec![(0, 1), (1, 2)],
            vec![AgentTask { start: 0, goal: 1 }, AgentTask { start: 1, goal: 2 }],
        )
        .unwrap();
        let (mut formula, varmap, _) = build(&inst, 0);
        assert_eq!(encode_swap_collisions(&mut formula, &varmap), 0);
    }

    #[test]
    fn delta_zero_forces_indicators_false_via_units() {
        // With delta 1 the path3 agent has one indicator; with delta 0 it
        // has none at all (xi == t_max), so use two agents with different
        // shortest paths to observe the unit clauses.
        let inst = Instance::new(
            4,
            vec![(0, 1), (1, 2), (2, 3)],
            vec![AgentTask { start: 0, goal: 3 }, AgentTask { start: 1, goal: 2 }],
        )
        .unwrap();
        let (formula, varmap, bounds) = build(&inst, 0);
        assert_eq!(bounds.delta, 0);
        // Agent 1 has xi=1 < t_max=3: two indicators, both unit-negated.
        assert_eq!(varmap.num_aux(), 2);
        let units = formula
            .clauses()
            .filter(|(f, c)| *f == ClauseFamily::Cardinality && c.len() == 1 && c[0] < 0)
            .count();
        assert_eq!(units, 2);
    }

    #[test]
    fn sequential_counter_is_exact() {
        // Brute force: for every n <= 6 and k <= 4, the circuit admits
        // exactly the assignments with at most k true inputs.
        for n in 1..=6usize {
            for k in 0..=4usize {
                let mut formula = CnfFormula::new(n);
                let lits: Vec<Lit> = (1..=n as Lit).collect();
                encode_at_most_k(&mut formula, &lits, k);
                let total_vars = formula.num_vars();
                for input in 0..(1u32 << n) {
                    let popcount = input.count_ones() as usize;
                    let mut extendable = false;
                    for aux in 0..(1u32 << (total_vars - n)) {
                        let mut assignment = vec![false; total_vars + 1];
                        for v in 0..n {
                            assignment[v + 1] = input & (1 << v) != 0;
                        }
                        for v in 0..total_vars - n {
                            assignment[n + v + 1] = aux & (1 << v) != 0;
                        }
                        if formula.eval(&assignment) {
                            extendable = true;
                            break;
                        }
                    }
                    assert_eq!(
                        extendable,
                        popcount <= k,
                        "n={n} k={k} input={input:b}"
                    );
                }
            }
        }
    }

    #[test]
    fn delta_one_admits_exactly_the_three_walks() {
        let inst = fixtures::path3();
        let (mut formula, varmap, _) = build(&inst, 1);
        encode_vertex_collisions(&mut formula, &varmap);
        encode_swap_collisions(&mut formula, &varmap);
        // Enumerate all assignments and collect the decoded plans.
        let n = formula.num_vars();
        assert!(n <= 20, "expected a tiny formula, got {n} vars");
        let mut plans = std::collections::HashSet::new();
        for bits in 0..(1u64 << n) {
            let mut assignment = vec![false; n + 1];
            for v in 0..n {
                assignment[v + 1] = bits & (1 << v) != 0;
            }
            if formula.eval(&assignment) {
                let plan = decode(&assignment, &varmap, &inst).unwrap();
                assert!(sum_of_costs(&inst, &plan) <= 3);
                plans.insert(plan.routes().to_vec());
            }
        }
        let expected: std::collections::HashSet<_> = [
            vec![vec![0, 0, 1, 2]],
            vec![vec![0, 1, 1, 2]],
            vec![vec![0, 1, 2, 2]],
        ]
        .into_iter()
        .collect();
        assert_eq!(plans, expected);
    }

    #[test]
    fn conflict_clauses_are_idempotent() {
        let inst = fixtures::path3_swap();
        let (mut formula, varmap, _) = build(&inst, 0);
        let conflict = Conflict::vertex(0, 1, 1, 1);
        assert_eq!(add_conflict_clauses(&mut formula, &varmap, &[conflict]).unwrap(), 1);
        assert_eq!(add_conflict_clauses(&mut formula, &varmap, &[conflict]).unwrap(), 0);
        assert_eq!(formula.family_count(ClauseFamily::ConflictElimination), 1);
    }

    #[test]
    fn edge_conflict_clause_uses_opposed_arcs() {
        let inst = Instance::new(
            2,
            vec![(0, 1)],
            vec![AgentTask { start: 0, goal: 1 }, AgentTask { start: 1, goal: 0 }],
        )
        .unwrap();
        let (mut formula, varmap, _) = build(&inst, 0);
        let conflict = Conflict::edge(0, 1, 0, 1, 0);
        assert_eq!(add_conflict_clauses(&mut formula, &varmap, &[conflict]).unwrap(), 1);
        let e0 = varmap.e_var(0, 0, 1, 0).unwrap();
        let e1 = varmap.e_var(1, 1, 0, 0).unwrap();
        let last = formula.clauses().last().unwrap();
        assert_eq!(last.1, &[-e0, -e1]);
    }

    #[test]
    fn unknown_conflict_location_is_reported() {
        let inst = fixtures::path3_swap();
        let (mut formula, varmap, _) = build(&inst, 0);
        // Vertex 0 at t=2 is not in agent 0's diagram (it must be at its
        // goal by then).
        let conflict = Conflict::vertex(0, 1, 0, 2);
        assert!(matches!(
            add_conflict_clauses(&mut formula, &varmap, &[conflict]),
            Err(CnfError::UnknownVariable { .. })
        ));
    }
}
