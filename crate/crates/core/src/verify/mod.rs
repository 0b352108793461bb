//! Checkers for every construction stage, the falsifying-branch witness, and
//! two independent SAT oracles.

mod checks;
mod solver;
mod witness;

use serde::Serialize;

use crate::tree::NodeId;

pub use checks::{
    certify_unsat_structural, check_base_profile, check_base_start_counts, check_degrees_preserved,
    check_distinct_edges, check_equalized_profile, check_ks_tree, check_split_profile,
};
pub use solver::{
    solve_brute_force, solve_dpll, SolveResult, SolveStatus, BRUTE_FORCE_MAX_VARS,
    DEFAULT_DPLL_BUDGET,
};
pub use witness::{falsifying_branch, FalsificationWitness, WitnessFinder};

/// Where a violation was observed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "id", rename_all = "lowercase")]
pub enum Location {
    /// A full branch, named by its leaf.
    Branch(NodeId),
    Vertex(NodeId),
    Edge(usize),
    Global,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub location: Location,
    pub expected: String,
    pub found: String,
}

/// Only the first this-many violations are kept verbatim.
pub const MAX_RECORDED_VIOLATIONS: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub stage: String,
    pub pass: bool,
    pub violation_count: usize,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub(crate) fn new(check: &str, stage: impl ToString) -> Self {
        VerificationReport {
            check: check.to_string(),
            stage: stage.to_string(),
            pass: true,
            violation_count: 0,
            violations: Vec::new(),
        }
    }

    pub(crate) fn fail(
        &mut self,
        location: Location,
        expected: impl Into<String>,
        found: impl Into<String>,
    ) {
        self.pass = false;
        self.violation_count += 1;
        if self.violations.len() < MAX_RECORDED_VIOLATIONS {
            self.violations.push(Violation {
                location,
                expected: expected.into(),
                found: found.into(),
            });
        }
    }
}
