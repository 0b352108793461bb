//! Literal assignment over sibling pairs, clause generation and statistics.

use std::collections::BTreeMap;
use std::fmt;
use std::num::NonZeroI32;
use std::ops::Not;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergraph::{Stage, TreeHypergraph};
use crate::tree::NodeId;

/// A signed variable, stored in DIMACS form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal(NonZeroI32);

impl Literal {
    /// Panics if `var` is 0 or exceeds `i32::MAX`.
    pub fn new(var: u32, negated: bool) -> Self {
        let v = i32::try_from(var).expect("variable index overflows i32");
        let raw = NonZeroI32::new(if negated { -v } else { v }).expect("variable 0");
        Literal(raw)
    }

    pub fn positive(var: u32) -> Self {
        Self::new(var, false)
    }

    pub fn negative(var: u32) -> Self {
        Self::new(var, true)
    }

    pub fn from_dimacs(raw: i32) -> Option<Self> {
        if raw == i32::MIN {
            return None;
        }
        NonZeroI32::new(raw).map(Literal)
    }

    #[inline]
    pub fn to_dimacs(self) -> i32 {
        self.0.get()
    }

    #[inline]
    pub fn var(self) -> u32 {
        self.0.get().unsigned_abs()
    }

    #[inline]
    pub fn is_negated(self) -> bool {
        self.0.get() < 0
    }
}

impl Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        Literal(-self.0)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type Clause = [Literal];

/// Clauses stored back to back in one literal buffer.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: u32,
    lits: Vec<Literal>,
    starts: Vec<usize>,
}

impl CnfFormula {
    pub fn new(num_vars: u32) -> Self {
        CnfFormula {
            num_vars,
            lits: Vec::new(),
            starts: vec![0],
        }
    }

    pub fn with_capacity(num_vars: u32, clauses: usize, literals: usize) -> Self {
        let mut starts = Vec::with_capacity(clauses + 1);
        starts.push(0);
        CnfFormula {
            num_vars,
            lits: Vec::with_capacity(literals),
            starts,
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.starts.len() - 1
    }

    pub fn num_literals(&self) -> usize {
        self.lits.len()
    }

    pub fn clause(&self, i: usize) -> &Clause {
        &self.lits[self.starts[i]..self.starts[i + 1]]
    }

    pub fn clauses(&self) -> impl ExactSizeIterator<Item = &Clause> + '_ {
        self.starts.windows(2).map(|w| &self.lits[w[0]..w[1]])
    }

    /// Appends a clause. Rejects out-of-range variables and clauses that
    /// mention a variable twice.
    pub fn push_clause(&mut self, clause: &Clause) -> Result<()> {
        for (i, l) in clause.iter().enumerate() {
            if l.var() > self.num_vars {
                return Err(Error::InvalidParameter(format!(
                    "literal {l} exceeds {} variables",
                    self.num_vars
                )));
            }
            if clause[..i].iter().any(|o| o.var() == l.var()) {
                return Err(Error::InvalidParameter(format!(
                    "variable {} occurs twice in one clause",
                    l.var()
                )));
            }
        }
        self.lits.extend_from_slice(clause);
        self.starts.push(self.lits.len());
        Ok(())
    }

    /// Copy without clause `index`.
    pub fn without_clause(&self, index: usize) -> CnfFormula {
        let mut out = CnfFormula::with_capacity(self.num_vars, self.num_clauses(), self.lits.len());
        for (i, c) in self.clauses().enumerate() {
            if i != index {
                out.lits.extend_from_slice(c);
                out.starts.push(out.lits.len());
            }
        }
        out
    }
}

/// Total truth assignment, indexed by variable (1-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment(values)
    }

    pub fn all(num_vars: u32, value: bool) -> Self {
        Assignment(vec![value; num_vars as usize])
    }

    pub fn random<R: Rng + ?Sized>(num_vars: u32, rng: &mut R) -> Self {
        Assignment((0..num_vars).map(|_| rng.gen()).collect())
    }

    /// Parses a string of `0`/`1`, character `i` giving variable `i + 1`.
    pub fn from_bits(bits: &str) -> Result<Self> {
        bits.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidParameter(format!(
                    "assignment bit {other:?} is not 0 or 1"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Assignment)
    }

    pub fn to_bits(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn num_vars(&self) -> u32 {
        self.0.len() as u32
    }

    pub fn value(&self, var: u32) -> bool {
        self.0[var as usize - 1]
    }

    pub fn flip(&mut self, var: u32) {
        let v = &mut self.0[var as usize - 1];
        *v = !*v;
    }

    #[inline]
    pub fn lit_value(&self, lit: Literal) -> bool {
        self.value(lit.var()) != lit.is_negated()
    }

    pub fn satisfies_clause(&self, clause: &Clause) -> bool {
        clause.iter().any(|&l| self.lit_value(l))
    }

    /// Index of the first clause left unsatisfied, if any.
    pub fn first_falsified(&self, f: &CnfFormula) -> Option<usize> {
        f.clauses().position(|c| !self.satisfies_clause(c))
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }
}

/// Literals carried by the non-root vertices of a full tree.
#[derive(Debug, Clone)]
pub struct SiblingAssignment {
    literals: Vec<Option<Literal>>,
    pairs: Vec<(NodeId, NodeId)>,
}

impl SiblingAssignment {
    pub fn num_vars(&self) -> u32 {
        self.pairs.len() as u32
    }

    pub fn literal(&self, v: NodeId) -> Result<Literal> {
        self.literals
            .get(v.index())
            .copied()
            .flatten()
            .ok_or(Error::Lookup(v))
    }

    /// `(positive vertex, negated vertex)` of a variable.
    pub fn pair(&self, var: u32) -> (NodeId, NodeId) {
        self.pairs[var as usize - 1]
    }

    pub fn pairs(&self) -> &[(NodeId, NodeId)] {
        &self.pairs
    }
}

/// Numbers sibling pairs 1..r breadth-first by parent; the left child gets
/// the positive literal and the right child its negation.
pub fn assign_literals(hg: &TreeHypergraph) -> Result<SiblingAssignment> {
    hg.expect_stage(Stage::Joined)?;
    let tree = hg.tree();
    let pairs = tree.sibling_pairs()?;
    let mut literals = vec![None; tree.len()];
    for (i, &(l, r)) in pairs.iter().enumerate() {
        let var = i as u32 + 1;
        literals[l.index()] = Some(Literal::positive(var));
        literals[r.index()] = Some(Literal::negative(var));
    }
    Ok(SiblingAssignment { literals, pairs })
}

/// One clause per edge, literals in top-to-bottom path order.
pub fn to_cnf(hg: &TreeHypergraph, a: &SiblingAssignment) -> Result<CnfFormula> {
    hg.expect_stage(Stage::Joined)?;
    let width: usize = hg
        .edges()
        .iter()
        .map(|e| hg.edge_size(e).map(|s| s as usize))
        .sum::<Result<usize>>()?;
    let mut f = CnfFormula::with_capacity(a.num_vars(), hg.edges().len(), width);
    let mut clause = Vec::new();
    for (i, e) in hg.edges().iter().enumerate() {
        clause.clear();
        for v in hg.edge_vertices(e)? {
            clause.push(a.literal(v)?);
        }
        f.push_clause(&clause)
            .map_err(|err| Error::ConstructionBug(format!("clause {i} is malformed: {err}")))?;
    }
    Ok(f)
}

/// Occurrence statistics of a formula against the bounds for `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CnfStats {
    pub k: u32,
    pub num_vars: u32,
    pub num_clauses: usize,
    pub width_histogram: BTreeMap<usize, usize>,
    pub max_var_occurrences: u64,
    pub mean_var_occurrences: f64,
    pub max_literal_occurrences: u64,
    /// `4·2^k/k`, the bound the construction guarantees.
    pub occurrence_bound: u64,
    /// `2·2^k/k`, the bound stated at the end of the join argument.
    pub proof_occurrence_bound: u64,
    /// `2^k/(e·k)`; below it every k-CNF is satisfiable. Reported only.
    pub kst_threshold: f64,
    pub k_uniform: bool,
    pub within_occurrence_bound: bool,
    pub within_proof_occurrence_bound: bool,
    pub above_kst_threshold: bool,
}

fn bound_times(factor: u128, k: u32) -> u64 {
    if k == 0 || k >= 120 {
        return u64::MAX;
    }
    u64::try_from((factor << k) / k as u128).unwrap_or(u64::MAX)
}

pub fn cnf_stats(f: &CnfFormula, k: u32) -> CnfStats {
    let n = f.num_vars() as usize;
    let mut pos = vec![0u64; n + 1];
    let mut neg = vec![0u64; n + 1];
    let mut width_histogram = BTreeMap::new();
    for c in f.clauses() {
        *width_histogram.entry(c.len()).or_insert(0) += 1;
        for &l in c {
            if l.is_negated() {
                neg[l.var() as usize] += 1;
            } else {
                pos[l.var() as usize] += 1;
            }
        }
    }
    let max_var_occurrences = (1..=n).map(|v| pos[v] + neg[v]).max().unwrap_or(0);
    let max_literal_occurrences = pos.iter().chain(&neg).copied().max().unwrap_or(0);
    let mean_var_occurrences = if n == 0 {
        0.0
    } else {
        f.num_literals() as f64 / n as f64
    };
    let occurrence_bound = bound_times(4, k);
    let proof_occurrence_bound = bound_times(2, k);
    let kst_threshold = if k == 0 {
        f64::INFINITY
    } else {
        2f64.powi(k as i32) / (std::f64::consts::E * k as f64)
    };
    CnfStats {
        k,
        num_vars: f.num_vars(),
        num_clauses: f.num_clauses(),
        k_uniform: width_histogram.keys().all(|&w| w == k as usize),
        width_histogram,
        max_var_occurrences,
        mean_var_occurrences,
        max_literal_occurrences,
        occurrence_bound,
        proof_occurrence_bound,
        kst_threshold,
        within_occurrence_bound: max_var_occurrences <= occurrence_bound,
        within_proof_occurrence_bound: max_var_occurrences <= proof_occurrence_bound,
        above_kst_threshold: max_var_occurrences as f64 > kst_threshold,
    }
}
