//! The staged construction of a (k, 2·2^k/k)-tree and its mirror join.
//!
//! `build_base` → `split_leaves` → `equalize_depths` → `extract_kstree` →
//! `mirror_join`. Each stage consumes a reference to the previous stage's
//! hypergraph and returns a new one, so intermediate objects stay available
//! to the verifiers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergraph::{PathEdge, Stage, TreeHypergraph};
use crate::tree::{LayeredTree, NodeId};

/// Arithmetic derived from `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StageParams {
    pub k: u32,
    /// `2^k / k`
    pub d: u64,
    /// `log2 d`
    pub log_d: u32,
    /// `floor(log2 log2 d)`
    pub ll: u32,
}

impl StageParams {
    /// Maximum vertex degree every stage must respect.
    pub fn degree_bound(&self) -> u64 {
        2 * self.d
    }

    /// Number of size classes that get augmented by `split_leaves`.
    pub fn augmented_classes(&self) -> u32 {
        1 << self.ll
    }

    /// Leaves of the final tree: each base leaf ends up with `2^i` leaves for
    /// every augmented class `i`.
    pub fn final_leaves(&self) -> u128 {
        (self.d as u128) * ((1u128 << self.augmented_classes()) - 1)
    }

    /// Nodes of the mirror-joined tree.
    pub fn joined_nodes(&self) -> u128 {
        2 * (2 * self.final_leaves() - 1) + 1
    }
}

/// Validates `k` and derives the stage parameters.
pub fn make_params(k: u32) -> Result<StageParams> {
    let unsupported = |reason: String| Error::UnsupportedK { k, reason };
    if k < 2 {
        return Err(unsupported("k must be at least 2".into()));
    }
    if !k.is_power_of_two() {
        return Err(unsupported("k must be a power of 2".into()));
    }
    if k > 64 {
        return Err(unsupported("k must be at most 64".into()));
    }
    let log_k = k.trailing_zeros();
    let log_d = k - log_k;
    let d = 1u64 << log_d;
    if (d as u128) * (k as u128) != 1u128 << k {
        return Err(unsupported("2^k / k is not an integer".into()));
    }
    // floor(log2 log_d); log_d >= 1 for every k >= 2
    let ll = u32::BITS - 1 - log_d.leading_zeros();
    if log_d + 1 + ll != k {
        return Err(unsupported(format!(
            "closure log_d + 1 + ll = k fails ({log_d} + 1 + {ll} != {k})"
        )));
    }
    Ok(StageParams { k, d, log_d, ll })
}

fn check_buildable(p: &StageParams) -> Result<()> {
    if p.joined_nodes() >= u32::MAX as u128 {
        return Err(Error::InvalidParameter(format!(
            "k = {} needs {} tree nodes, beyond the 32-bit index space",
            p.k,
            p.joined_nodes()
        )));
    }
    Ok(())
}

/// Complete tree with `log_d + 1` levels; for each vertex `v` and each leaf
/// below it, one path edge of multiplicity `2^level(v)` in size class
/// `level(v)`.
pub fn build_base(p: &StageParams) -> Result<TreeHypergraph> {
    check_buildable(p)?;
    let tree = LayeredTree::new_complete(p.log_d + 1)?;
    let mut edges = Vec::with_capacity((p.log_d as usize + 1) * p.d as usize);
    for v in tree.node_ids() {
        let level = tree.level(v);
        for w in tree.subtree_leaves(v) {
            edges.push(PathEdge::new(v, w, 1u64 << level, Some(level)));
        }
    }
    Ok(TreeHypergraph::from_parts_unchecked(
        tree,
        edges,
        Stage::Base,
    ))
}

/// Grafts a height-`ll` tree under every base leaf and moves the bottom of
/// each class-`i` edge (`i < 2^ll`) to the `i`-th new leaf.
pub fn split_leaves(hg: &TreeHypergraph, p: &StageParams) -> Result<TreeHypergraph> {
    hg.expect_stage(Stage::Base)?;
    let mut tree = hg.tree().clone();
    let mut grafts: Vec<Vec<NodeId>> = vec![Vec::new(); tree.len()];
    for u in hg.tree().leaves() {
        grafts[u.index()] = tree.attach_complete_subtree(u, p.ll)?;
    }
    let classes = p.augmented_classes();
    let mut edges = hg.edges().to_vec();
    for e in &mut edges {
        let Some(i) = e.size_class.filter(|&i| i < classes) else {
            continue;
        };
        let slots = &grafts[e.bottom.index()];
        let target = slots.get(i as usize).ok_or_else(|| {
            Error::ConstructionBug(format!(
                "class-{i} edge ends at {} which is not a base leaf",
                e.bottom
            ))
        })?;
        e.bottom = *target;
    }
    Ok(TreeHypergraph::from_parts_unchecked(
        tree,
        edges,
        Stage::Split,
    ))
}

/// Under each split leaf carrying a class-`i` edge of multiplicity `2^i`,
/// grafts a height-`i` tree and replaces the edge by `2^i` multiplicity-1
/// copies, the `j`-th ending at the `j`-th grafted leaf.
pub fn equalize_depths(hg: &TreeHypergraph, p: &StageParams) -> Result<TreeHypergraph> {
    hg.expect_stage(Stage::Split)?;
    let src = hg.tree();
    let index = hg.bottom_index();
    let classes = p.augmented_classes();
    let mut tree = src.clone();
    let mut grafts: Vec<Vec<NodeId>> = vec![Vec::new(); src.len()];
    // with ll = 0 the untouched classes still end at leaves; skip them
    let augmented = |i: &&usize| hg.edges()[**i].size_class.is_some_and(|c| c < classes);
    for leaf in src.leaves() {
        let found: Vec<&usize> = index.at(leaf).iter().filter(augmented).collect();
        let [&e] = found.as_slice() else {
            return Err(Error::ConstructionBug(format!(
                "split leaf {leaf} is the bottom of {} augmented edges, expected 1",
                found.len()
            )));
        };
        let edge = &hg.edges()[e];
        let i = edge.size_class.expect("filtered on size class");
        if edge.multiplicity != 1u64 << i {
            return Err(Error::ConstructionBug(format!(
                "class-{i} edge at {leaf} has multiplicity {}",
                edge.multiplicity
            )));
        }
        grafts[leaf.index()] = tree.attach_complete_subtree(leaf, i)?;
    }

    let mut edges = Vec::with_capacity(hg.edges().len() + tree.len() - src.len());
    for e in hg.edges() {
        let slots = &grafts[e.bottom.index()];
        if slots.is_empty() || !e.size_class.is_some_and(|c| c < classes) {
            edges.push(*e);
        } else {
            edges.extend(
                slots
                    .iter()
                    .map(|&b| PathEdge::new(e.top, b, 1, e.size_class)),
            );
        }
    }
    Ok(TreeHypergraph::from_parts_unchecked(
        tree,
        edges,
        Stage::Equalized,
    ))
}

/// Keeps only the size-`k` bottom edges, one per full branch.
pub fn extract_kstree(hg: &TreeHypergraph, p: &StageParams) -> Result<TreeHypergraph> {
    hg.expect_stage(Stage::Equalized)?;
    let tree = hg.tree();
    let mut covered = vec![false; tree.len()];
    let mut edges = Vec::with_capacity(tree.len() / 2 + 1);
    for e in hg.edges() {
        if tree.is_leaf(e.bottom) && e.multiplicity == 1 && hg.edge_size(e)? == p.k {
            if std::mem::replace(&mut covered[e.bottom.index()], true) {
                return Err(Error::ConstructionBug(format!(
                    "leaf {} carries two size-k edges",
                    e.bottom
                )));
            }
            edges.push(*e);
        }
    }
    if let Some(leaf) = tree.leaves().into_iter().find(|l| !covered[l.index()]) {
        return Err(Error::ConstructionBug(format!(
            "branch ending at {leaf} has no size-{} bottom edge",
            p.k
        )));
    }
    Ok(TreeHypergraph::from_parts_unchecked(
        tree.clone(),
        edges,
        Stage::Final,
    ))
}

/// Two copies of the final tree under a fresh root, with both copies' edges
/// (left copy first).
pub fn mirror_join(g: &TreeHypergraph, _p: &StageParams) -> Result<TreeHypergraph> {
    g.expect_stage(Stage::Final)?;
    let tree = LayeredTree::join(g.tree(), g.tree());
    let left_off = 1u32;
    let right_off = 1 + g.tree().len() as u32;
    let shift = |v: NodeId, off: u32| NodeId::new(v.raw() + off);
    let mut edges = Vec::with_capacity(2 * g.edges().len());
    for off in [left_off, right_off] {
        edges.extend(g.edges().iter().map(|e| PathEdge {
            top: shift(e.top, off),
            bottom: shift(e.bottom, off),
            ..*e
        }));
    }
    Ok(TreeHypergraph::from_parts_unchecked(
        tree,
        edges,
        Stage::Joined,
    ))
}

/// Every stage of one run, kept side by side.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub params: StageParams,
    pub base: TreeHypergraph,
    pub split: TreeHypergraph,
    pub equalized: TreeHypergraph,
    pub last: TreeHypergraph,
    pub joined: TreeHypergraph,
}

impl Pipeline {
    pub fn run(k: u32) -> Result<Self> {
        let params = make_params(k)?;
        let base = build_base(&params)?;
        let split = split_leaves(&base, &params)?;
        let equalized = equalize_depths(&split, &params)?;
        let last = extract_kstree(&equalized, &params)?;
        let joined = mirror_join(&last, &params)?;
        Ok(Pipeline {
            params,
            base,
            split,
            equalized,
            last,
            joined,
        })
    }

    pub fn stage(&self, stage: Stage) -> &TreeHypergraph {
        match stage {
            Stage::Base => &self.base,
            Stage::Split => &self.split,
            Stage::Equalized => &self.equalized,
            Stage::Final => &self.last,
            Stage::Joined => &self.joined,
        }
    }
}

/// Runs the pipeline up to `stage`, dropping earlier stages as it goes.
pub fn build_stage(p: &StageParams, stage: Stage) -> Result<TreeHypergraph> {
    let mut hg = build_base(p)?;
    for (next, step) in [
        (
            Stage::Split,
            split_leaves as fn(&TreeHypergraph, &StageParams) -> Result<TreeHypergraph>,
        ),
        (Stage::Equalized, equalize_depths),
        (Stage::Final, extract_kstree),
        (Stage::Joined, mirror_join),
    ] {
        if hg.stage() == stage {
            break;
        }
        hg = step(&hg, p)?;
        debug_assert_eq!(hg.stage(), next);
    }
    Ok(hg)
}
