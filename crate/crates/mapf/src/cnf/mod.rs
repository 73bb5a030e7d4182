//! Boolean encodings of bounded instances and the interface to a
//! propositional decision procedure.
//!
//! The variable scheme is direct: one Boolean variable per reachable
//! (agent, vertex, timestep) and one per reachable (agent, arc, timestep),
//! taken from the per-agent time-expanded diagrams so that everything
//! unreachable is pruned from the formula up front. On top of the base
//! path semantics sit optional collision clauses (for the eager backend),
//! a sequential-counter cardinality circuit bounding the sum of costs, and
//! lazily added conflict-elimination clauses (for the lazy backend).

mod encode;
mod formula;
mod solver;
mod varmap;

pub use encode::{
    add_conflict_clauses, decode, encode_at_most_k, encode_base, encode_soc_bound,
    encode_swap_collisions, encode_vertex_collisions,
};
pub use formula::{parse_assignment, ClauseFamily, CnfFormula, Lit, Var};
pub use solver::{decide, CdclSolver, Decision, DecisionProcedure, ExternalSolver, SatOutcome};
pub use varmap::VarMap;

use std::fmt;

/// Errors raised by the encoding layer and the decision procedures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CnfError {
    /// A conflict references a node or arc that the current encoding does
    /// not contain; the caller must re-encode at the current bound.
    UnknownVariable { detail: String },
    /// Two occupancy variables of one (agent, timestep) are both true.
    /// Indicates an encoding bug; must never fire.
    AmbiguousAssignment { agent: usize, timestep: usize },
    /// No occupancy variable of one (agent, timestep) is true.
    /// Indicates an encoding bug; must never fire.
    MissingOccupancy { agent: usize, timestep: usize },
    /// External decision procedure failed (I/O, bad exit, unparseable).
    SolverFailure { detail: String },
    /// An assignment text could not be parsed.
    BadAssignment { detail: String },
}

impl fmt::Display for CnfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CnfError::UnknownVariable { detail } => write!(f, "unknown variable: {detail}"),
            CnfError::AmbiguousAssignment { agent, timestep } => {
                write!(f, "agent {agent} occupies two vertices at t={timestep}")
            }
            CnfError::MissingOccupancy { agent, timestep } => {
                write!(f, "agent {agent} occupies no vertex at t={timestep}")
            }
            CnfError::SolverFailure { detail } => write!(f, "solver failure: {detail}"),
            CnfError::BadAssignment { detail } => write!(f, "bad assignment: {detail}"),
        }
    }
}

impl std::error::Error for CnfError {}
