//! Propositional decision procedures.
//!
//! Two interchangeable modes satisfy the same contract: an embedded
//! conflict-driven clause-learning solver (the default, deterministic and
//! dependency-free), and file exchange with an external solver process via
//! DIMACS text.

use super::formula::{parse_assignment, CnfFormula, Lit};
use super::CnfError;
use std::io::Write as _;
use std::process::Command;

/// Outcome of a complete decision: either a total satisfying assignment
/// (indexed by variable, slot 0 unused) or a proof of unsatisfiability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatOutcome {
    Satisfiable(Vec<bool>),
    Unsatisfiable,
}

/// Outcome plus solver effort counters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub outcome: SatOutcome,
    pub decisions: u64,
    pub propagations: u64,
}

/// A complete decision procedure for CNF formulas.
pub trait DecisionProcedure {
    fn decide(&mut self, formula: &CnfFormula) -> Result<Decision, CnfError>;
}

/// Convenience entry point: decide with the embedded solver.
pub fn decide(formula: &CnfFormula) -> SatOutcome {
    CdclSolver::default()
        .decide(formula)
        .expect("embedded solver cannot fail")
        .outcome
}

/// The embedded conflict-driven clause-learning solver: two watched
/// literals, first-UIP learning, activity-based branching with phase
/// saving, and Luby restarts. Complete and deterministic.
#[derive(Debug, Clone, Copy, Default)]
pub struct CdclSolver;

impl DecisionProcedure for CdclSolver {
    fn decide(&mut self, formula: &CnfFormula) -> Result<Decision, CnfError> {
        let mut engine = Engine::new(formula.num_vars());
        for (_, clause) in formula.clauses() {
            if !engine.add_input_clause(clause) {
                return Ok(Decision {
                    outcome: SatOutcome::Unsatisfiable,
                    decisions: engine.decisions,
                    propagations: engine.propagations,
                });
            }
        }
        let outcome = engine.solve();
        Ok(Decision { outcome, decisions: engine.decisions, propagations: engine.propagations })
    }
}

const UNASSIGNED: i8 = 0;

struct Engine {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    /// Watch lists indexed by literal: clause ids watching that literal.
    watches: Vec<Vec<u32>>,
    /// Per-variable truth value: 0 unassigned, 1 true, -1 false.
    assign: Vec<i8>,
    level: Vec<u32>,
    /// Reason clause id plus one; 0 marks a decision or input unit.
    reason: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    prop_head: usize,
    activity: Vec<f64>,
    var_inc: f64,
    phase: Vec<bool>,
    seen: Vec<bool>,
    decisions: u64,
    propagations: u64,
    conflicts: u64,
    unsat: bool,
}

fn lit_index(l: Lit) -> usize {
    let v = l.unsigned_abs() as usize;
    2 * v + usize::from(l < 0)
}

impl Engine {
    fn new(num_vars: usize) -> Self {
        Engine {
            num_vars,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * (num_vars + 1)],
            assign: vec![UNASSIGNED; num_vars + 1],
            level: vec![0; num_vars + 1],
            reason: vec![0; num_vars + 1],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            prop_head: 0,
            activity: vec![0.0; num_vars + 1],
            var_inc: 1.0,
            phase: vec![false; num_vars + 1],
            seen: vec![false; num_vars + 1],
            decisions: 0,
            propagations: 0,
            conflicts: 0,
            unsat: false,
        }
    }

    fn value(&self, l: Lit) -> i8 {
        let v = self.assign[l.unsigned_abs() as usize];
        if l < 0 {
            -v
        } else {
            v
        }
    }

    /// Returns false when the clause makes the formula trivially
    /// unsatisfiable (conflicting units at level 0).
    fn add_input_clause(&mut self, lits: &[Lit]) -> bool {
        let mut clause = lits.to_vec();
        clause.sort_unstable();
        clause.dedup();
        if clause.windows(2).any(|w| w[0] == -w[1]) {
            return true; // tautology
        }
        if clause.len() == 1 {
            return match self.value(clause[0]) {
                1 => true,
                -1 => false,
                _ => {
                    self.enqueue(clause[0], 0);
                    true
                }
            };
        }
        let id = self.clauses.len() as u32;
        self.watches[lit_index(clause[0])].push(id);
        self.watches[lit_index(clause[1])].push(id);
        self.clauses.push(clause);
        true
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn enqueue(&mut self, lit: Lit, reason: u32) {
        let v = lit.unsigned_abs() as usize;
        debug_assert_eq!(self.assign[v], UNASSIGNED);
        self.assign[v] = if lit > 0 { 1 } else { -1 };
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.phase[v] = lit > 0;
        self.trail.push(lit);
    }

    /// Unit propagation; returns the id of a conflicting clause, if any.
    fn propagate(&mut self) -> Option<u32> {
        while self.prop_head < self.trail.len() {
            let lit = self.trail[self.prop_head];
            self.prop_head += 1;
            self.propagations += 1;
            let falsified = -lit;
            let mut list = std::mem::take(&mut self.watches[lit_index(falsified)]);
            let mut idx = 0;
            while idx < list.len() {
                let ci = list[idx];
                let slot = ci as usize;
                if self.clauses[slot][0] == falsified {
                    self.clauses[slot].swap(0, 1);
                }
                debug_assert_eq!(self.clauses[slot][1], falsified);
                let first = self.clauses[slot][0];
                if self.value(first) == 1 {
                    idx += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..self.clauses[slot].len() {
                    let candidate = self.clauses[slot][k];
                    if self.value(candidate) != -1 {
                        self.clauses[slot].swap(1, k);
                        self.watches[lit_index(candidate)].push(ci);
                        list.swap_remove(idx);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                if self.value(first) == -1 {
                    self.watches[lit_index(falsified)] = list;
                    return Some(ci);
                }
                self.enqueue(first, ci + 1);
                idx += 1;
            }
            self.watches[lit_index(falsified)] = list;
        }
        None
    }

    fn backtrack(&mut self, target_level: usize) {
        while self.decision_level() > target_level {
            let limit = self.trail_lim.pop().unwrap();
            while self.trail.len() > limit {
                let lit = self.trail.pop().unwrap();
                let v = lit.unsigned_abs() as usize;
                self.assign[v] = UNASSIGNED;
                self.reason[v] = 0;
            }
        }
        self.prop_head = self.prop_head.min(self.trail.len());
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, conflict: u32) -> (Vec<Lit>, usize) {
        let current = self.decision_level() as u32;
        let mut learnt: Vec<Lit> = vec![0];
        let mut to_resolve = 0usize;
        let mut resolved_var: Option<usize> = None;
        let mut clause_id = conflict;
        let mut index = self.trail.len();

        loop {
            let clause = self.clauses[clause_id as usize].clone();
            for &q in &clause {
                let v = q.unsigned_abs() as usize;
                if Some(v) == resolved_var || self.seen[v] || self.level[v] == 0 {
                    continue;
                }
                self.seen[v] = true;
                self.bump(v);
                if self.level[v] >= current {
                    to_resolve += 1;
                } else {
                    learnt.push(q);
                }
            }
            let uip = loop {
                index -= 1;
                let l = self.trail[index];
                if self.seen[l.unsigned_abs() as usize] {
                    break l;
                }
            };
            let v = uip.unsigned_abs() as usize;
            self.seen[v] = false;
            to_resolve -= 1;
            if to_resolve == 0 {
                learnt[0] = -uip;
                break;
            }
            debug_assert!(self.reason[v] != 0, "literal on the path to UIP has a reason");
            resolved_var = Some(v);
            clause_id = self.reason[v] - 1;
        }
        for &l in &learnt[1..] {
            self.seen[l.unsigned_abs() as usize] = false;
        }

        // Backjump to the second-highest level in the clause, placing one
        // literal of that level in the second watch slot.
        let mut backjump = 0usize;
        for i in 1..learnt.len() {
            let lv = self.level[learnt[i].unsigned_abs() as usize] as usize;
            if lv > backjump {
                backjump = lv;
                learnt.swap(1, i);
            }
        }
        (learnt, backjump)
    }

    fn learn(&mut self, learnt: Vec<Lit>, backjump: usize) {
        self.backtrack(backjump);
        if learnt.len() == 1 {
            if self.value(learnt[0]) == -1 {
                self.unsat = true;
                return;
            }
            if self.value(learnt[0]) == UNASSIGNED {
                self.enqueue(learnt[0], 0);
            }
            return;
        }
        let id = self.clauses.len() as u32;
        let asserting = learnt[0];
        self.watches[lit_index(learnt[0])].push(id);
        self.watches[lit_index(learnt[1])].push(id);
        self.clauses.push(learnt);
        self.enqueue(asserting, id + 1);
    }

    fn pick_branch_var(&self) -> Option<usize> {
        let mut best = None;
        let mut best_activity = f64::NEG_INFINITY;
        for v in 1..=self.num_vars {
            if self.assign[v] == UNASSIGNED && self.activity[v] > best_activity {
                best = Some(v);
                best_activity = self.activity[v];
            }
        }
        best
    }

    fn solve(&mut self) -> SatOutcome {
        let mut restart_unit = 1usize;
        let mut conflicts_until_restart = luby(restart_unit) * 128;
        loop {
            if let Some(conflict) = self.propagate() {
                self.conflicts += 1;
                if self.decision_level() == 0 {
                    return SatOutcome::Unsatisfiable;
                }
                let (learnt, backjump) = self.analyze(conflict);
                self.learn(learnt, backjump);
                if self.unsat {
                    return SatOutcome::Unsatisfiable;
                }
                self.var_inc /= 0.95;
                if self.conflicts as usize >= conflicts_until_restart {
                    restart_unit += 1;
                    conflicts_until_restart =
                        self.conflicts as usize + luby(restart_unit) * 128;
                    self.backtrack(0);
                }
            } else {
                match self.pick_branch_var() {
                    None => {
                        let model = (0..=self.num_vars).map(|v| self.assign[v] == 1).collect();
                        return SatOutcome::Satisfiable(model);
                    }
                    Some(v) => {
                        self.decisions += 1;
                        self.trail_lim.push(self.trail.len());
                        let lit = if self.phase[v] { v as Lit } else { -(v as Lit) };
                        self.enqueue(lit, 0);
                    }
                }
            }
        }
    }
}

/// The Luby restart sequence 1, 1, 2, 1, 1, 2, 4, ... (1-based index).
fn luby(i: usize) -> usize {
    debug_assert!(i >= 1);
    let mut k = 1usize;
    while (1usize << k) < i + 1 {
        k += 1;
    }
    if (1usize << k) == i + 1 {
        1usize << (k - 1)
    } else {
        luby(i - (1 << (k - 1)) + 1)
    }
}

/// File exchange with an external solver process.
///
/// The formula is written to a temporary DIMACS file and passed as the last
/// argument to `command`; the verdict is read from standard output (and the
/// conventional exit codes 10/20 are honored). Any I/O failure or
/// unrecognizable output is reported as [`CnfError::SolverFailure`].
#[derive(Debug, Clone)]
pub struct ExternalSolver {
    pub command: String,
    pub args: Vec<String>,
}

impl ExternalSolver {
    pub fn new(command: impl Into<String>) -> Self {
        ExternalSolver { command: command.into(), args: Vec::new() }
    }
}

impl DecisionProcedure for ExternalSolver {
    fn decide(&mut self, formula: &CnfFormula) -> Result<Decision, CnfError> {
        let fail = |detail: String| CnfError::SolverFailure { detail };
        let dir = tempfile::tempdir().map_err(|e| fail(format!("tempdir: {e}")))?;
        let cnf_path = dir.path().join("problem.cnf");
        let mut file =
            std::fs::File::create(&cnf_path).map_err(|e| fail(format!("create: {e}")))?;
        file.write_all(formula.to_dimacs().as_bytes())
            .map_err(|e| fail(format!("write: {e}")))?;
        drop(file);

        let output = Command::new(&self.command)
            .args(&self.args)
            .arg(&cnf_path)
            .output()
            .map_err(|e| fail(format!("spawn {}: {e}", self.command)))?;
        let stdout = String::from_utf8_lossy(&output.stdout).into_owned();

        let code = output.status.code();
        let unsat = code == Some(20)
            || stdout.lines().any(|l| {
                let l = l.trim();
                l == "UNSAT" || l == "s UNSATISFIABLE" || l == "UNSATISFIABLE"
            });
        if unsat {
            return Ok(Decision {
                outcome: SatOutcome::Unsatisfiable,
                decisions: 0,
                propagations: 0,
            });
        }
        let sat = code == Some(10)
            || stdout.lines().any(|l| {
                let l = l.trim();
                l == "SAT" || l == "s SATISFIABLE" || l == "SATISFIABLE"
            });
        if !sat {
            return Err(fail(format!(
                "unrecognized solver verdict (exit {:?}): {}",
                code,
                stdout.chars().take(200).collect::<String>()
            )));
        }
        let assignment = parse_assignment(&stdout, formula.num_vars())?;
        Ok(Decision {
            outcome: SatOutcome::Satisfiable(assignment),
            decisions: 0,
            propagations: 0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::formula::ClauseFamily;

    fn formula(num_vars: usize, clauses: &[&[Lit]]) -> CnfFormula {
        let mut f = CnfFormula::new(num_vars);
        for c in clauses {
            f.add_clause(ClauseFamily::Path, c.to_vec());
        }
        f
    }

    #[test]
    fn trivial_formulas() {
        assert_eq!(decide(&formula(1, &[&[1], &[-1]])), SatOutcome::Unsatisfiable);
        assert!(matches!(decide(&formula(2, &[&[1, 2]])), SatOutcome::Satisfiable(_)));
        assert!(matches!(decide(&CnfFormula::new(0)), SatOutcome::Satisfiable(_)));
    }

    #[test]
    fn model_satisfies_formula() {
        let f = formula(4, &[&[1, 2], &[-1, 3], &[-2, -3], &[2, 3, -4], &[4, 1]]);
        match decide(&f) {
            SatOutcome::Satisfiable(model) => assert!(f.eval(&model)),
            SatOutcome::Unsatisfiable => panic!("formula is satisfiable"),
        }
    }

    #[test]
    fn pigeonhole_three_into_two_is_unsat() {
        // Variables p_{i,j} = 3 pigeons x 2 holes.
        let var = |pigeon: usize, hole: usize| (pigeon * 2 + hole + 1) as Lit;
        let mut clauses: Vec<Vec<Lit>> = Vec::new();
        for pigeon in 0..3 {
            clauses.push(vec![var(pigeon, 0), var(pigeon, 1)]);
        }
        for hole in 0..2 {
            for a in 0..3 {
                for b in a + 1..3 {
                    clauses.push(vec![-var(a, hole), -var(b, hole)]);
                }
            }
        }
        let refs: Vec<&[Lit]> = clauses.iter().map(|c| c.as_slice()).collect();
        assert_eq!(decide(&formula(6, &refs)), SatOutcome::Unsatisfiable);
    }

    #[test]
    fn agrees_with_brute_force_on_random_formulas() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for round in 0..300 {
            let n = rng.gen_range(1..=8usize);
            let m = rng.gen_range(1..=24usize);
            let mut f = CnfFormula::new(n);
            for _ in 0..m {
                let len = rng.gen_range(1..=3usize);
                let clause: Vec<Lit> = (0..len)
                    .map(|_| {
                        let v = rng.gen_range(1..=n) as Lit;
                        if rng.gen_bool(0.5) {
                            v
                        } else {
                            -v
                        }
                    })
                    .collect();
                f.add_clause(ClauseFamily::Path, clause);
            }
            let brute_sat = (0..(1u32 << n)).any(|bits| {
                let assignment: Vec<bool> =
                    (0..=n).map(|v| v > 0 && bits & (1 << (v - 1)) != 0).collect();
                f.eval(&assignment)
            });
            match decide(&f) {
                SatOutcome::Satisfiable(model) => {
                    assert!(brute_sat, "round {round}: solver SAT, brute force UNSAT");
                    assert!(f.eval(&model), "round {round}: model does not satisfy");
                }
                SatOutcome::Unsatisfiable => {
                    assert!(!brute_sat, "round {round}: solver UNSAT, brute force SAT");
                }
            }
        }
    }

    #[test]
    fn luby_sequence_prefix() {
        let prefix: Vec<usize> = (1..=15).map(luby).collect();
        assert_eq!(prefix, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn external_mode_reports_missing_binary() {
        let mut solver = ExternalSolver::new("definitely-not-a-sat-solver");
        let f = formula(1, &[&[1]]);
        assert!(matches!(solver.decide(&f), Err(CnfError::SolverFailure { .. })));
    }

    #[test]
    fn external_mode_parses_scripted_verdicts() {
        // A stand-in solver that ignores its input and prints a verdict.
        let mut sat = ExternalSolver::new("sh");
        sat.args = vec!["-c".into(), "echo 's SATISFIABLE'; echo 'v 1 0'".into(), "ignored".into()];
        let f = formula(1, &[&[1]]);
        match sat.decide(&f).unwrap().outcome {
            SatOutcome::Satisfiable(model) => assert!(model[1]),
            SatOutcome::Unsatisfiable => panic!("scripted SAT expected"),
        }

        let mut unsat = ExternalSolver::new("sh");
        unsat.args = vec!["-c".into(), "echo UNSAT".into(), "ignored".into()];
        assert_eq!(unsat.decide(&f).unwrap().outcome, SatOutcome::Unsatisfiable);
    }
}
