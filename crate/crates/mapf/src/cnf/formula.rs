//! Clause database with family tags and DIMACS text exchange.

use super::CnfError;
use std::collections::HashSet;
use std::fmt::Write as _;

/// Variables are positive integers starting at 1, DIMACS style.
pub type Var = i32;
/// Literals are nonzero integers; negative means negated.
pub type Lit = i32;

/// Which constraint group a clause belongs to. Kept per clause so that the
/// eager/lazy comparison can count collision clauses against lazily added
/// conflict-elimination clauses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClauseFamily {
    Path,
    VertexCollision,
    SwapCollision,
    Cardinality,
    ConflictElimination,
}

impl ClauseFamily {
    pub const ALL: [ClauseFamily; 5] = [
        ClauseFamily::Path,
        ClauseFamily::VertexCollision,
        ClauseFamily::SwapCollision,
        ClauseFamily::Cardinality,
        ClauseFamily::ConflictElimination,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ClauseFamily::Path => "path",
            ClauseFamily::VertexCollision => "vertex-collision",
            ClauseFamily::SwapCollision => "swap-collision",
            ClauseFamily::Cardinality => "cardinality",
            ClauseFamily::ConflictElimination => "conflict-elimination",
        }
    }

    fn index(self) -> usize {
        match self {
            ClauseFamily::Path => 0,
            ClauseFamily::VertexCollision => 1,
            ClauseFamily::SwapCollision => 2,
            ClauseFamily::Cardinality => 3,
            ClauseFamily::ConflictElimination => 4,
        }
    }
}

/// A propositional formula in conjunctive normal form.
#[derive(Debug, Clone, Default)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<(ClauseFamily, Vec<Lit>)>,
    family_counts: [usize; 5],
    /// Normalized conflict-elimination clauses already present, so that
    /// re-adding a conflict is a no-op.
    conflict_seen: HashSet<Vec<Lit>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize) -> Self {
        CnfFormula { num_vars, ..Default::default() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Allocates a fresh variable.
    pub fn new_var(&mut self) -> Var {
        self.num_vars += 1;
        self.num_vars as Var
    }

    /// Appends a clause. Panics on an empty clause or a literal whose
    /// variable exceeds the variable count; both would be encoder bugs.
    pub fn add_clause(&mut self, family: ClauseFamily, lits: Vec<Lit>) {
        assert!(!lits.is_empty(), "empty clause");
        for &l in &lits {
            let v = l.unsigned_abs() as usize;
            assert!(l != 0 && v <= self.num_vars, "literal {l} out of range");
        }
        if family == ClauseFamily::ConflictElimination {
            self.conflict_seen.insert(normalize(&lits));
        }
        self.family_counts[family.index()] += 1;
        self.clauses.push((family, lits));
    }

    /// True when an identical conflict-elimination clause was added before.
    pub(crate) fn has_conflict_clause(&self, lits: &[Lit]) -> bool {
        self.conflict_seen.contains(&normalize(lits))
    }

    pub fn clauses(&self) -> impl Iterator<Item = (ClauseFamily, &[Lit])> {
        self.clauses.iter().map(|(f, c)| (*f, c.as_slice()))
    }

    pub fn family_count(&self, family: ClauseFamily) -> usize {
        self.family_counts[family.index()]
    }

    /// Total number of collision clauses (vertex plus swap), the eager side
    /// of the lazy-versus-eager clause comparison.
    pub fn collision_clause_count(&self) -> usize {
        self.family_count(ClauseFamily::VertexCollision)
            + self.family_count(ClauseFamily::SwapCollision)
    }

    /// Evaluates the formula under a complete assignment indexed by
    /// variable (`assignment[v]` for variable `v`; index 0 is unused).
    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|(_, clause)| {
            clause.iter().any(|&l| {
                let v = l.unsigned_abs() as usize;
                assignment[v] == (l > 0)
            })
        })
    }

    /// Standard DIMACS CNF text: `p cnf <vars> <clauses>` then one
    /// zero-terminated clause per line.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len()).unwrap();
        for (_, clause) in &self.clauses {
            for &l in clause {
                write!(out, "{l} ").unwrap();
            }
            out.push_str("0\n");
        }
        out
    }

    /// DIMACS with a `c family=<tag>` comment line wherever the clause
    /// family changes; standard parsers skip the comments.
    pub fn to_dimacs_tagged(&self) -> String {
        let mut out = String::new();
        writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len()).unwrap();
        let mut current: Option<ClauseFamily> = None;
        for (family, clause) in &self.clauses {
            if current != Some(*family) {
                writeln!(out, "c family={}", family.tag()).unwrap();
                current = Some(*family);
            }
            for &l in clause {
                write!(out, "{l} ").unwrap();
            }
            out.push_str("0\n");
        }
        out
    }
}

fn normalize(lits: &[Lit]) -> Vec<Lit> {
    let mut sorted = lits.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    sorted
}

/// Parses a truth assignment given as whitespace-separated signed integers
/// (the common output shape of DIMACS solvers). Lines starting with `c` are
/// skipped, `s`/`v` prefixes and a trailing `0` are tolerated, and variables
/// not mentioned default to false.
pub fn parse_assignment(text: &str, num_vars: usize) -> Result<Vec<bool>, CnfError> {
    let mut assignment = vec![false; num_vars + 1];
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        for token in line.split_whitespace() {
            match token {
                "v" | "s" | "SAT" | "SATISFIABLE" | "UNSAT" | "UNSATISFIABLE" => continue,
                _ => {}
            }
            let lit: i64 = token.parse().map_err(|_| CnfError::BadAssignment {
                detail: format!("not an integer: {token:?}"),
            })?;
            if lit == 0 {
                continue;
            }
            let v = lit.unsigned_abs() as usize;
            if v > num_vars {
                return Err(CnfError::BadAssignment {
                    detail: format!("variable {v} exceeds count {num_vars}"),
                });
            }
            assignment[v] = lit > 0;
        }
    }
    Ok(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimacs_format_is_exact() {
        let mut f = CnfFormula::new(2);
        f.add_clause(ClauseFamily::Path, vec![1, -2]);
        assert_eq!(f.to_dimacs(), "p cnf 2 1\n1 -2 0\n");

        let empty = CnfFormula::new(3);
        assert_eq!(empty.to_dimacs(), "p cnf 3 0\n");
    }

    #[test]
    fn tagged_dimacs_marks_family_changes() {
        let mut f = CnfFormula::new(3);
        f.add_clause(ClauseFamily::Path, vec![1]);
        f.add_clause(ClauseFamily::Path, vec![2, 3]);
        f.add_clause(ClauseFamily::VertexCollision, vec![-1, -2]);
        assert_eq!(
            f.to_dimacs_tagged(),
            "p cnf 3 3\nc family=path\n1 0\n2 3 0\nc family=vertex-collision\n-1 -2 0\n"
        );
    }

    #[test]
    #[should_panic(expected = "empty clause")]
    fn empty_clauses_are_rejected() {
        let mut f = CnfFormula::new(1);
        f.add_clause(ClauseFamily::Path, vec![]);
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn out_of_range_literals_are_rejected() {
        let mut f = CnfFormula::new(1);
        f.add_clause(ClauseFamily::Path, vec![2]);
    }

    #[test]
    fn parse_assignment_accepts_solver_shapes() {
        let a = parse_assignment("1 -2 3 0", 3).unwrap();
        assert_eq!(a[1..], [true, false, true]);
        let b = parse_assignment("c comment\ns SATISFIABLE\nv 1 -2 0\nv 3 0\n", 3).unwrap();
        assert_eq!(b[1..], [true, false, true]);
        assert!(parse_assignment("5 0", 3).is_err());
        assert!(parse_assignment("x", 3).is_err());
    }
}
