//! Optimal multi-agent path finding (MAPF) by compilation.
//!
//! Agents live on the vertices of an undirected graph and move along edges
//! in discrete timesteps. A solution routes every agent from its start to
//! its goal so that no two agents ever share a vertex and no two agents
//! traverse the same edge in opposite directions in the same step. This
//! crate solves the sum-of-costs-optimal variant of that problem with three
//! interchangeable backends plus an exact reference solver:
//!
//! * [`sat::solve_eager`] — compile the whole bounded instance (time-expanded
//!   reachability diagrams, collision constraints, a cardinality circuit on
//!   the cost bound) into one CNF formula per bound and hand it to a
//!   propositional decision procedure.
//! * [`sat::solve_smt_cbs`] — same bound loop, but collision constraints are
//!   added lazily: only after a candidate plan is observed to violate them.
//! * [`bnp::solve_mip`] — a lazy linear-programming compilation: a restricted
//!   master over per-agent path pools, lazy collision cuts, reduced-cost
//!   pricing of new paths, and branch-and-bound on fractional usage.
//! * [`oracle::solve_joint`] — uniform-cost search over the joint
//!   configuration space; slow but exact, used as ground truth.
//!
//! The [`io`] module reads the community grid benchmark formats and a plain
//! edge-list format, and [`bench`] runs several backends side by side,
//! checking that they agree on the optimum.

pub mod bench;
pub mod bnp;
pub mod cnf;
pub mod fixtures;
pub mod instance;
pub mod io;
pub mod lp;
pub mod mdd;
pub mod oracle;
pub mod sat;

mod guide;

pub use instance::{
    shortest_path_lengths, sum_of_costs, validate, validate_with, AgentTask, Bounds, Conflict,
    ConflictKind, Instance, ModelError, MovementRule, Plan, Vertex,
};
