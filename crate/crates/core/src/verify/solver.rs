//! Exhaustive search and a plain DPLL procedure, used as unsatisfiability
//! oracles on small instances.

use serde::Serialize;

use crate::cnf::{Assignment, CnfFormula, Literal};
use crate::error::{Error, Result};

pub const BRUTE_FORCE_MAX_VARS: u32 = 25;
pub const DEFAULT_DPLL_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SolveStatus {
    Sat,
    Unsat,
    BudgetExceeded,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Sat => "SAT",
            SolveStatus::Unsat => "UNSAT",
            SolveStatus::BudgetExceeded => "BUDGET_EXCEEDED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub model: Option<Assignment>,
    pub decisions: u64,
    pub propagations: u64,
}

fn checked(
    status: SolveStatus,
    model: Option<Assignment>,
    f: &CnfFormula,
    decisions: u64,
    propagations: u64,
) -> SolveResult {
    if let Some(m) = &model {
        assert!(
            m.first_falsified(f).is_none(),
            "solver produced a model that falsifies a clause"
        );
    }
    SolveResult {
        status,
        model,
        decisions,
        propagations,
    }
}

/// Tries all `2^n` assignments in lexicographic order (variable 1 most
/// significant, false before true). `decisions` counts assignments tried.
pub fn solve_brute_force(f: &CnfFormula) -> Result<SolveResult> {
    let n = f.num_vars();
    if n > BRUTE_FORCE_MAX_VARS {
        return Err(Error::Budget(format!(
            "brute force is capped at {BRUTE_FORCE_MAX_VARS} variables, formula has {n}"
        )));
    }
    // bit (n - var) of the counter holds variable `var`
    let masks: Vec<(u32, u32)> = f
        .clauses()
        .map(|c| {
            c.iter().fold((0, 0), |(pos, neg), l| {
                let bit = 1u32 << (n - l.var());
                if l.is_negated() {
                    (pos, neg | bit)
                } else {
                    (pos | bit, neg)
                }
            })
        })
        .collect();
    let total = 1u64 << n;
    for x in 0..total {
        let x = x as u32;
        if masks
            .iter()
            .all(|&(pos, neg)| x & pos != 0 || !x & neg != 0)
        {
            let model = Assignment::new((1..=n).map(|v| x >> (n - v) & 1 == 1).collect());
            return Ok(checked(SolveStatus::Sat, Some(model), f, x as u64 + 1, 0));
        }
    }
    Ok(checked(SolveStatus::Unsat, None, f, total, 0))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Value {
    Unset,
    True,
    False,
}

#[derive(Clone, Copy)]
struct TrailEntry {
    lit: Literal,
    /// Decision whose opposite branch has not been tried yet.
    open_decision: bool,
}

struct Dpll<'a> {
    f: &'a CnfFormula,
    values: Vec<Value>,
    /// Clause indices per literal code.
    occurs: Vec<Vec<u32>>,
    sat_count: Vec<u32>,
    false_count: Vec<u32>,
    /// Occurrences of each literal in clauses not yet satisfied.
    active: Vec<u32>,
    unsatisfied: usize,
    trail: Vec<TrailEntry>,
    decisions: u64,
    propagations: u64,
}

#[inline]
fn code(l: Literal) -> usize {
    2 * l.var() as usize + l.is_negated() as usize
}

impl<'a> Dpll<'a> {
    fn new(f: &'a CnfFormula) -> Self {
        let n = f.num_vars() as usize;
        let mut occurs = vec![Vec::new(); 2 * n + 2];
        let mut active = vec![0u32; 2 * n + 2];
        for (i, c) in f.clauses().enumerate() {
            for &l in c {
                occurs[code(l)].push(i as u32);
                active[code(l)] += 1;
            }
        }
        Dpll {
            f,
            values: vec![Value::Unset; n + 1],
            occurs,
            sat_count: vec![0; f.num_clauses()],
            false_count: vec![0; f.num_clauses()],
            active,
            unsatisfied: f.num_clauses(),
            trail: Vec::new(),
            decisions: 0,
            propagations: 0,
        }
    }

    fn lit_value(&self, l: Literal) -> Value {
        match (self.values[l.var() as usize], l.is_negated()) {
            (Value::Unset, _) => Value::Unset,
            (Value::True, false) | (Value::False, true) => Value::True,
            _ => Value::False,
        }
    }

    /// Makes `l` true and updates clause counters. Returns false on conflict;
    /// units found are pushed onto `units`.
    fn assign(&mut self, l: Literal, open_decision: bool, units: &mut Vec<Literal>) -> bool {
        self.values[l.var() as usize] = if l.is_negated() {
            Value::False
        } else {
            Value::True
        };
        self.trail.push(TrailEntry {
            lit: l,
            open_decision,
        });
        let mut ok = true;
        for idx in 0..self.occurs[code(l)].len() {
            let c = self.occurs[code(l)][idx] as usize;
            self.sat_count[c] += 1;
            if self.sat_count[c] == 1 {
                self.unsatisfied -= 1;
                for &m in self.f.clause(c) {
                    self.active[code(m)] -= 1;
                }
            }
        }
        for idx in 0..self.occurs[code(!l)].len() {
            let c = self.occurs[code(!l)][idx] as usize;
            self.false_count[c] += 1;
            if self.sat_count[c] > 0 {
                continue;
            }
            let len = self.f.clause(c).len() as u32;
            if self.false_count[c] == len {
                ok = false;
            } else if self.false_count[c] + 1 == len {
                if let Some(&u) = self
                    .f
                    .clause(c)
                    .iter()
                    .find(|&&m| self.lit_value(m) == Value::Unset)
                {
                    units.push(u);
                }
            }
        }
        ok
    }

    fn unassign_last(&mut self) -> TrailEntry {
        let entry = self.trail.pop().expect("non-empty trail");
        let l = entry.lit;
        for idx in 0..self.occurs[code(!l)].len() {
            let c = self.occurs[code(!l)][idx] as usize;
            self.false_count[c] -= 1;
        }
        for idx in 0..self.occurs[code(l)].len() {
            let c = self.occurs[code(l)][idx] as usize;
            self.sat_count[c] -= 1;
            if self.sat_count[c] == 0 {
                self.unsatisfied += 1;
                for &m in self.f.clause(c) {
                    self.active[code(m)] += 1;
                }
            }
        }
        self.values[l.var() as usize] = Value::Unset;
        entry
    }

    /// Unit propagation to fixpoint. False on conflict.
    fn propagate(&mut self, mut units: Vec<Literal>) -> bool {
        while let Some(u) = units.pop() {
            match self.lit_value(u) {
                Value::True => continue,
                Value::False => return false,
                Value::Unset => {
                    self.propagations += 1;
                    if !self.assign(u, false, &mut units) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Assigns every unset variable that occurs in only one polarity among
    /// unsatisfied clauses (or in none). False on conflict.
    fn eliminate_pure(&mut self) -> bool {
        loop {
            let mut changed = false;
            for var in 1..=self.f.num_vars() {
                if self.values[var as usize] != Value::Unset {
                    continue;
                }
                let pos = Literal::positive(var);
                let pure = match (self.active[code(pos)] > 0, self.active[code(!pos)] > 0) {
                    (true, true) => continue,
                    (false, true) => !pos,
                    _ => pos,
                };
                let mut units = Vec::new();
                if !self.assign(pure, false, &mut units) || !self.propagate(units) {
                    return false;
                }
                changed = true;
            }
            if !changed {
                return true;
            }
        }
    }

    /// Undoes assignments up to the most recent open decision and asserts its
    /// opposite. `None` when no open decision remains, otherwise whether the
    /// flipped branch survived propagation.
    fn backtrack(&mut self) -> Option<bool> {
        while let Some(entry) = self.trail.last().copied() {
            self.unassign_last();
            if entry.open_decision {
                let mut units = Vec::new();
                let ok = self.assign(!entry.lit, false, &mut units) && self.propagate(units);
                return Some(ok);
            }
        }
        None
    }

    fn solve(mut self, budget: u64) -> SolveResult {
        let empty = self.f.clauses().any(|c| c.is_empty());
        let initial: Vec<Literal> = self
            .f
            .clauses()
            .filter(|c| c.len() == 1)
            .map(|c| c[0])
            .collect();
        let mut ok = !empty && self.propagate(initial);
        loop {
            if ok {
                ok = self.eliminate_pure();
            }
            if !ok {
                match self.backtrack() {
                    Some(survived) => {
                        ok = survived;
                        continue;
                    }
                    None => return self.finish(SolveStatus::Unsat),
                }
            }
            if self.unsatisfied == 0 {
                return self.finish(SolveStatus::Sat);
            }
            // after pure-literal elimination every unset variable is still open
            let var = (1..=self.f.num_vars())
                .find(|&v| self.values[v as usize] == Value::Unset)
                .expect("an unsatisfied clause has an unset variable");
            if self.decisions >= budget {
                return self.finish(SolveStatus::BudgetExceeded);
            }
            self.decisions += 1;
            let mut units = Vec::new();
            ok = self.assign(Literal::positive(var), true, &mut units) && self.propagate(units);
        }
    }

    fn finish(self, status: SolveStatus) -> SolveResult {
        let model = (status == SolveStatus::Sat).then(|| {
            Assignment::new(
                self.values[1..]
                    .iter()
                    .map(|&v| v != Value::False)
                    .collect(),
            )
        });
        checked(status, model, self.f, self.decisions, self.propagations)
    }
}

/// DPLL with unit propagation and pure-literal elimination. Branches on the
/// lowest unassigned variable, true first; no learning, no restarts.
pub fn solve_dpll(f: &CnfFormula, budget: u64) -> SolveResult {
    Dpll::new(f).solve(budget)
}
