//! The two SAT-compilation solving loops.
//!
//! Both search sum-of-costs bounds upward from the lower bound. The eager
//! loop compiles the complete bounded instance (including every collision
//! constraint) and treats the decision procedure as a black box. The lazy
//! loop compiles only the per-agent path semantics plus the cost circuit,
//! lets the decision procedure propose a candidate plan, validates it, and
//! eliminates the discovered conflicts with fresh clauses, carrying the
//! accumulated conflicts across bound increments.

use crate::cnf::{
    add_conflict_clauses, decode, encode_base, encode_swap_collisions, encode_vertex_collisions,
    CdclSolver, ClauseFamily, CnfError, CnfFormula, Decision, DecisionProcedure, ExternalSolver,
    SatOutcome, VarMap,
};
use crate::instance::{
    shortest_path_lengths, validate, Bounds, Conflict, Instance, ModelError, Plan,
};
use crate::mdd::{build_mdd, Mdd};
use crate::oracle::{is_solvable, Solvability};
use std::collections::HashSet;
use std::fmt;
use std::time::{Duration, Instant};

/// Which decision procedure the loops consult.
#[derive(Debug, Clone, Default)]
pub enum SolverMode {
    #[default]
    Embedded,
    External {
        command: String,
        args: Vec<String>,
    },
}

/// Knobs shared by the SAT backends.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    /// Largest sum-of-costs bound to try; defaults to `k * |V|^3`.
    pub soc_cap: Option<usize>,
    /// Consult the exact reachability check before looping, so that
    /// unsolvable instances at desk scale get an exact verdict instead of
    /// a cap overrun.
    pub solvability_precheck: bool,
    /// State cap for that reachability check.
    pub state_cap: usize,
    pub solver: SolverMode,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            soc_cap: None,
            solvability_precheck: true,
            state_cap: 1_000_000,
            solver: SolverMode::Embedded,
        }
    }
}

/// Kornhauser-style horizon: a generous completeness backstop for the
/// bound loop on solvable instances.
pub fn default_soc_cap(instance: &Instance) -> usize {
    let v = instance.num_vertices();
    instance.num_agents().saturating_mul(v.saturating_mul(v).saturating_mul(v))
}

/// Terminal verdict of a backend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solved {
    Optimal { plan: Plan, soc: usize },
    Unsolvable,
    CapExceeded { cap: usize },
}

impl Solved {
    pub fn soc(&self) -> Option<usize> {
        match self {
            Solved::Optimal { soc, .. } => Some(*soc),
            _ => None,
        }
    }
}

/// Per-solve statistics consumed by the benchmark harness.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SatStats {
    /// Number of sum-of-costs bounds attempted (strictly increasing run).
    pub bounds_tried: usize,
    /// Decision-procedure consultations.
    pub sat_calls: usize,
    /// Branching decisions summed over all consultations (embedded mode).
    pub decisions: u64,
    /// Clause counts of the final formula, by family.
    pub clauses_path: usize,
    pub clauses_vertex: usize,
    pub clauses_swap: usize,
    pub clauses_cardinality: usize,
    /// Conflict-elimination clauses accumulated by the lazy loop.
    pub conflict_clauses_added: usize,
    pub wall: Duration,
}

/// Outcome plus statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SatReport {
    pub outcome: Solved,
    pub stats: SatStats,
}

/// Failures that are not verdicts: broken external solvers or internal
/// encoding bugs surfacing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveError {
    Model(ModelError),
    Cnf(CnfError),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::Model(e) => write!(f, "{e}"),
            SolveError::Cnf(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SolveError {}

impl From<ModelError> for SolveError {
    fn from(e: ModelError) -> Self {
        SolveError::Model(e)
    }
}

impl From<CnfError> for SolveError {
    fn from(e: CnfError) -> Self {
        SolveError::Cnf(e)
    }
}

fn decide_with(mode: &SolverMode, formula: &CnfFormula) -> Result<Decision, CnfError> {
    match mode {
        SolverMode::Embedded => CdclSolver.decide(formula),
        SolverMode::External { command, args } => {
            ExternalSolver { command: command.clone(), args: args.clone() }.decide(formula)
        }
    }
}

fn build_mdds(instance: &Instance, bounds: &Bounds) -> Result<Vec<Mdd>, ModelError> {
    (0..instance.num_agents())
        .map(|a| build_mdd(instance, a, bounds.xi[a] + bounds.delta))
        .collect()
}

/// Builds the complete eager encoding for one bound: base path semantics,
/// vertex and swap collision clauses, and the cost circuit.
pub fn encode_eager(
    instance: &Instance,
    bounds: &Bounds,
) -> Result<(CnfFormula, VarMap), ModelError> {
    let mdds = build_mdds(instance, bounds)?;
    let (mut formula, varmap) = encode_base(instance, &mdds, bounds);
    encode_vertex_collisions(&mut formula, &varmap);
    encode_swap_collisions(&mut formula, &varmap);
    Ok((formula, varmap))
}

fn record_families(stats: &mut SatStats, formula: &CnfFormula) {
    stats.clauses_path = formula.family_count(ClauseFamily::Path);
    stats.clauses_vertex = formula.family_count(ClauseFamily::VertexCollision);
    stats.clauses_swap = formula.family_count(ClauseFamily::SwapCollision);
    stats.clauses_cardinality = formula.family_count(ClauseFamily::Cardinality);
    stats.conflict_clauses_added = formula.family_count(ClauseFamily::ConflictElimination);
}

enum Preflight {
    Verdict(Solved),
    Run { xi: Vec<usize>, soc_lb: usize, cap: usize },
}

fn preflight(instance: &Instance, config: &SolveConfig) -> Result<Preflight, SolveError> {
    let xi = match shortest_path_lengths(instance) {
        Ok(xi) => xi,
        Err(ModelError::Unreachable { .. }) => return Ok(Preflight::Verdict(Solved::Unsolvable)),
        Err(e) => return Err(e.into()),
    };
    if config.solvability_precheck && is_solvable(instance, config.state_cap) == Solvability::No {
        return Ok(Preflight::Verdict(Solved::Unsolvable));
    }
    let soc_lb = xi.iter().sum();
    let cap = config.soc_cap.unwrap_or_else(|| default_soc_cap(instance));
    Ok(Preflight::Run { xi, soc_lb, cap })
}

/// Eager compilation: for each bound, build the full encoding and decide.
/// The first satisfiable bound is the optimum.
pub fn solve_eager(instance: &Instance, config: &SolveConfig) -> Result<SatReport, SolveError> {
    let started = Instant::now();
    let mut stats = SatStats::default();
    let (xi, soc_lb, cap) = match preflight(instance, config)? {
        Preflight::Verdict(outcome) => {
            stats.wall = started.elapsed();
            return Ok(SatReport { outcome, stats });
        }
        Preflight::Run { xi, soc_lb, cap } => (xi, soc_lb, cap),
    };

    let mut soc = soc_lb;
    while soc <= cap {
        let bounds = Bounds::from_xi(xi.clone(), soc - soc_lb);
        let (formula, varmap) = encode_eager(instance, &bounds)?;
        stats.bounds_tried += 1;
        stats.sat_calls += 1;
        let decision = decide_with(&config.solver, &formula)?;
        stats.decisions += decision.decisions;
        record_families(&mut stats, &formula);
        match decision.outcome {
            SatOutcome::Satisfiable(assignment) => {
                let plan = decode(&assignment, &varmap, instance)?;
                debug_assert!(validate(instance, &plan).map_or(false, |c| c.is_empty()));
                stats.wall = started.elapsed();
                return Ok(SatReport {
                    outcome: Solved::Optimal { plan: plan.trimmed(), soc },
                    stats,
                });
            }
            SatOutcome::Unsatisfiable => soc += 1,
        }
    }
    stats.wall = started.elapsed();
    Ok(SatReport { outcome: Solved::CapExceeded { cap }, stats })
}

/// Lazy compilation: per bound, encode only path semantics plus the cost
/// circuit and the conflicts discovered so far; decide, validate the
/// decoded plan, and eliminate every conflict it exhibits; on
/// unsatisfiability move to the next bound, keeping the accumulated
/// conflicts.
pub fn solve_smt_cbs(instance: &Instance, config: &SolveConfig) -> Result<SatReport, SolveError> {
    let started = Instant::now();
    let mut stats = SatStats::default();
    let (xi, soc_lb, cap) = match preflight(instance, config)? {
        Preflight::Verdict(outcome) => {
            stats.wall = started.elapsed();
            return Ok(SatReport { outcome, stats });
        }
        Preflight::Run { xi, soc_lb, cap } => (xi, soc_lb, cap),
    };

    let mut accumulated: Vec<Conflict> = Vec::new();
    let mut seen: HashSet<Conflict> = HashSet::new();

    let mut soc = soc_lb;
    while soc <= cap {
        let bounds = Bounds::from_xi(xi.clone(), soc - soc_lb);
        let mdds = build_mdds(instance, &bounds)?;
        stats.bounds_tried += 1;
        // Solve-bounded: re-encode per iteration, carrying `accumulated`.
        loop {
            let (mut formula, varmap) = encode_base(instance, &mdds, &bounds);
            add_conflict_clauses(&mut formula, &varmap, &accumulated)?;
            stats.sat_calls += 1;
            let decision = decide_with(&config.solver, &formula)?;
            stats.decisions += decision.decisions;
            record_families(&mut stats, &formula);
            match decision.outcome {
                SatOutcome::Unsatisfiable => break,
                SatOutcome::Satisfiable(assignment) => {
                    let plan = decode(&assignment, &varmap, instance)?;
                    let conflicts = validate(instance, &plan)?;
                    if conflicts.is_empty() {
                        stats.wall = started.elapsed();
                        return Ok(SatReport {
                            outcome: Solved::Optimal { plan: plan.trimmed(), soc },
                            stats,
                        });
                    }
                    for conflict in conflicts {
                        if seen.insert(conflict) {
                            accumulated.push(conflict);
                        }
                    }
                }
            }
        }
        soc += 1;
    }
    stats.wall = started.elapsed();
    Ok(SatReport { outcome: Solved::CapExceeded { cap }, stats })
}
