use serde::Serialize;

use crate::cnf::{Assignment, CnfFormula, Literal, SiblingAssignment};
use crate::error::{Error, Result};
use crate::hypergraph::{Stage, TreeHypergraph};
use crate::tree::NodeId;

const NO_EDGE: u32 = u32::MAX;

/// A branch whose literals are all false under some assignment, and the
/// clause lying on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FalsificationWitness {
    pub branch: Vec<NodeId>,
    pub falsified_clause_index: usize,
    /// `(vertex, literal)` for every non-root branch vertex; all are false.
    pub assignment_restriction: Vec<(NodeId, i32)>,
}

/// Reusable lookup tables for repeated witness queries on one instance.
pub struct WitnessFinder<'a> {
    hg: &'a TreeHypergraph,
    lits: &'a SiblingAssignment,
    formula: &'a CnfFormula,
    edge_at: Vec<u32>,
}

impl<'a> WitnessFinder<'a> {
    pub fn new(
        hg: &'a TreeHypergraph,
        lits: &'a SiblingAssignment,
        formula: &'a CnfFormula,
    ) -> Result<Self> {
        hg.expect_stage(Stage::Joined)?;
        if formula.num_clauses() != hg.edges().len() {
            return Err(Error::InvalidParameter(format!(
                "formula has {} clauses for {} edges",
                formula.num_clauses(),
                hg.edges().len()
            )));
        }
        let mut edge_at = vec![NO_EDGE; hg.tree().len()];
        for (i, e) in hg.edges().iter().enumerate() {
            let slot = &mut edge_at[e.bottom.index()];
            if *slot == NO_EDGE {
                *slot = i as u32;
            }
        }
        Ok(WitnessFinder {
            hg,
            lits,
            formula,
            edge_at,
        })
    }

    /// Descends from the root, always into the child whose literal is false.
    pub fn walk(&self, alpha: &Assignment) -> Result<Vec<NodeId>> {
        self.check_alpha(alpha)?;
        let tree = self.hg.tree();
        let mut v = tree.root();
        let mut branch = vec![v];
        while let Some((l, r)) = tree.children(v) {
            v = if alpha.lit_value(self.lits.literal(l)?) {
                r
            } else {
                l
            };
            branch.push(v);
        }
        Ok(branch)
    }

    pub fn find(&self, alpha: &Assignment) -> Result<FalsificationWitness> {
        let branch = self.walk(alpha)?;
        let clause = branch
            .iter()
            .rev()
            .map(|v| self.edge_at[v.index()])
            .find(|&e| e != NO_EDGE)
            .ok_or_else(|| {
                Error::ConstructionBug(format!(
                    "branch ending at {} contains no edge",
                    branch.last().unwrap()
                ))
            })? as usize;
        let assignment_restriction = branch[1..]
            .iter()
            .map(|&v| Ok((v, self.lits.literal(v)?.to_dimacs())))
            .collect::<Result<Vec<_>>>()?;
        let w = FalsificationWitness {
            branch,
            falsified_clause_index: clause,
            assignment_restriction,
        };
        self.self_check(&w, alpha)?;
        Ok(w)
    }

    fn check_alpha(&self, alpha: &Assignment) -> Result<()> {
        if alpha.num_vars() != self.lits.num_vars() {
            return Err(Error::InvalidParameter(format!(
                "assignment covers {} variables, formula has {}",
                alpha.num_vars(),
                self.lits.num_vars()
            )));
        }
        Ok(())
    }

    fn self_check(&self, w: &FalsificationWitness, alpha: &Assignment) -> Result<()> {
        let bug = |m: String| Err(Error::ConstructionBug(m));
        for &(v, lit) in &w.assignment_restriction {
            let lit = Literal::from_dimacs(lit).expect("nonzero literal");
            if alpha.lit_value(lit) {
                return bug(format!(
                    "literal {lit} at {v} is true on the witness branch"
                ));
            }
        }
        let edge = &self.hg.edges()[w.falsified_clause_index];
        let on_branch = self.hg.edge_vertices(edge)?;
        if !on_branch.iter().all(|v| w.branch.contains(v)) {
            return bug(format!(
                "edge {} leaves the witness branch",
                w.falsified_clause_index
            ));
        }
        let clause = self.formula.clause(w.falsified_clause_index);
        let expected: Vec<Literal> = on_branch
            .iter()
            .map(|&v| self.lits.literal(v))
            .collect::<Result<_>>()?;
        if clause != expected.as_slice() {
            return bug(format!(
                "clause {} does not match its edge",
                w.falsified_clause_index
            ));
        }
        if alpha.satisfies_clause(clause) {
            return bug(format!("clause {} is satisfied", w.falsified_clause_index));
        }
        Ok(())
    }
}

/// One-shot form of [`WitnessFinder::find`].
pub fn falsifying_branch(
    hg: &TreeHypergraph,
    lits: &SiblingAssignment,
    formula: &CnfFormula,
    alpha: &Assignment,
) -> Result<FalsificationWitness> {
    WitnessFinder::new(hg, lits, formula)?.find(alpha)
}
