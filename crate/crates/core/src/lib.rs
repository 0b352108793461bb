//! Unsatisfiable k-CNF formulas in which every variable occurs at most
//! `4·2^k/k` times, built from path hypergraphs on binary trees.
//!
//! The [`construction`] module builds the hypergraph in stages, [`cnf`]
//! turns the final mirror-joined tree into clauses, and [`verify`] checks
//! every stage and certifies unsatisfiability.

pub mod cnf;
pub mod construction;
pub mod dimacs;
pub mod error;
pub mod hypergraph;
pub mod mutation;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
