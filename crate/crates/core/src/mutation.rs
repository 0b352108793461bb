//! Single-element faults for exercising the stage verifiers.
//!
//! Mutations target bottom edges: those are the objects each stage's profile
//! statement constrains.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergraph::TreeHypergraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mutation {
    /// Add `by` to the multiplicity.
    BumpMultiplicity {
        edge: usize,
        by: u64,
    },
    /// Subtract one from a multiplicity above 1.
    DropMultiplicity {
        edge: usize,
    },
    DeleteEdge {
        edge: usize,
    },
    /// Move the top one step up (size + 1).
    RaiseTop {
        edge: usize,
    },
    /// Move the top one step down (size - 1).
    LowerTop {
        edge: usize,
    },
}

impl Mutation {
    pub fn edge(&self) -> usize {
        match *self {
            Mutation::BumpMultiplicity { edge, .. }
            | Mutation::DropMultiplicity { edge }
            | Mutation::DeleteEdge { edge }
            | Mutation::RaiseTop { edge }
            | Mutation::LowerTop { edge } => edge,
        }
    }

    pub fn apply(&self, hg: &mut TreeHypergraph) -> Result<()> {
        let i = self.edge();
        let Some(e) = hg.edges().get(i).copied() else {
            return Err(Error::InvalidParameter(format!("no edge {i}")));
        };
        match *self {
            Mutation::BumpMultiplicity { by, .. } => {
                if by == 0 {
                    return Err(Error::InvalidParameter(
                        "bump by 0 is not a mutation".into(),
                    ));
                }
                hg.edges_mut()[i].multiplicity += by;
            }
            Mutation::DropMultiplicity { .. } => {
                if e.multiplicity < 2 {
                    return Err(Error::InvalidParameter(format!(
                        "edge {i} has multiplicity 1"
                    )));
                }
                hg.edges_mut()[i].multiplicity -= 1;
            }
            Mutation::DeleteEdge { .. } => {
                hg.edges_mut().remove(i);
            }
            Mutation::RaiseTop { .. } => {
                let parent = hg.tree().parent(e.top).ok_or_else(|| {
                    Error::InvalidParameter(format!("edge {i} starts at the root"))
                })?;
                hg.edges_mut()[i].top = parent;
            }
            Mutation::LowerTop { .. } => {
                if e.top == e.bottom {
                    return Err(Error::InvalidParameter(format!("edge {i} has size 1")));
                }
                let path = hg.edge_vertices(&e)?;
                hg.edges_mut()[i].top = path[1];
            }
        }
        Ok(())
    }
}

/// `count` applicable mutations on bottom edges of `hg`, cycling through the
/// mutation kinds, with edges drawn from a seeded generator.
pub fn mutation_suite(hg: &TreeHypergraph, count: usize, seed: u64) -> Vec<Mutation> {
    let candidates: Vec<usize> = hg
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| hg.tree().is_leaf(e.bottom))
        .map(|(i, _)| i)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    if candidates.is_empty() {
        return out;
    }
    let mut kind = 0usize;
    while out.len() < count {
        let edge = *candidates.choose(&mut rng).expect("non-empty");
        let e = hg.edges()[edge];
        let mut options = [
            Mutation::BumpMultiplicity {
                edge,
                by: rng.gen_range(1..=4),
            },
            Mutation::DropMultiplicity { edge },
            Mutation::DeleteEdge { edge },
            Mutation::RaiseTop { edge },
            Mutation::LowerTop { edge },
        ];
        let n = options.len();
        options.rotate_left(kind % n);
        kind += 1;
        let applicable = options.into_iter().find(|m| match m {
            Mutation::DropMultiplicity { .. } => e.multiplicity > 1,
            Mutation::RaiseTop { .. } => hg.tree().parent(e.top).is_some(),
            Mutation::LowerTop { .. } => e.top != e.bottom,
            _ => true,
        });
        out.extend(applicable);
    }
    out
}
