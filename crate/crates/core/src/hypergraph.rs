//! Path hypergraphs over a [`LayeredTree`].
//!
//! Every hyperedge is a descending tree path, stored as its endpoints plus a
//! multiplicity. Vertex sets are materialized only on request.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tree::{LayeredTree, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Base,
    Split,
    Equalized,
    Final,
    Joined,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Base => "base",
            Stage::Split => "split",
            Stage::Equalized => "equalized",
            Stage::Final => "final",
            Stage::Joined => "joined",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct PathEdge {
    pub top: NodeId,
    pub bottom: NodeId,
    pub multiplicity: u64,
    /// Index `i` of the family `S_i` the edge was created in, if any.
    pub size_class: Option<u32>,
}

impl PathEdge {
    pub fn new(top: NodeId, bottom: NodeId, multiplicity: u64, size_class: Option<u32>) -> Self {
        PathEdge {
            top,
            bottom,
            multiplicity,
            size_class,
        }
    }
}

/// Uniformity and degree bound of a (k,s)-tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KsTreeSpec {
    k: u32,
    s: u64,
}

impl KsTreeSpec {
    pub fn new(k: u32, s: u64) -> Result<Self> {
        if k == 0 || s == 0 {
            return Err(Error::InvalidParameter(format!(
                "(k, s) = ({k}, {s}): both must be at least 1"
            )));
        }
        Ok(KsTreeSpec { k, s })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn s(&self) -> u64 {
        self.s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeHypergraph {
    tree: LayeredTree,
    edges: Vec<PathEdge>,
    stage: Stage,
}

impl TreeHypergraph {
    /// Assembles a hypergraph, rejecting edges that are not descending paths
    /// or carry multiplicity 0.
    pub fn from_parts(tree: LayeredTree, edges: Vec<PathEdge>, stage: Stage) -> Result<Self> {
        let hg = TreeHypergraph { tree, edges, stage };
        for e in &hg.edges {
            if e.multiplicity == 0 {
                return Err(Error::InvalidParameter(format!(
                    "edge {}..{} has multiplicity 0",
                    e.top, e.bottom
                )));
            }
            hg.edge_size(e)?;
        }
        Ok(hg)
    }

    pub(crate) fn from_parts_unchecked(
        tree: LayeredTree,
        edges: Vec<PathEdge>,
        stage: Stage,
    ) -> Self {
        TreeHypergraph { tree, edges, stage }
    }

    pub fn tree(&self) -> &LayeredTree {
        &self.tree
    }

    pub fn edges(&self) -> &[PathEdge] {
        &self.edges
    }

    /// Raw edge access, used to inject faults when exercising the verifiers.
    pub fn edges_mut(&mut self) -> &mut Vec<PathEdge> {
        &mut self.edges
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn into_parts(self) -> (LayeredTree, Vec<PathEdge>, Stage) {
        (self.tree, self.edges, self.stage)
    }

    pub(crate) fn expect_stage(&self, expected: Stage) -> Result<()> {
        if self.stage != expected {
            return Err(Error::PipelineOrder {
                expected,
                found: self.stage,
            });
        }
        Ok(())
    }

    /// Number of vertices on the edge's path.
    pub fn edge_size(&self, e: &PathEdge) -> Result<u32> {
        if !self.tree.is_ancestor_or_self(e.top, e.bottom) {
            return Err(Error::CorruptEdge {
                top: e.top,
                bottom: e.bottom,
            });
        }
        Ok(self.tree.level(e.bottom) - self.tree.level(e.top) + 1)
    }

    /// Path vertices from top to bottom.
    pub fn edge_vertices(&self, e: &PathEdge) -> Result<Vec<NodeId>> {
        let size = self.edge_size(e)? as usize;
        let mut path = Vec::with_capacity(size);
        let mut cur = e.bottom;
        path.push(cur);
        while cur != e.top {
            cur = self.tree.parent(cur).ok_or(Error::CorruptEdge {
                top: e.top,
                bottom: e.bottom,
            })?;
            path.push(cur);
        }
        path.reverse();
        Ok(path)
    }

    /// Total multiplicity of edges passing through `v`.
    pub fn degree(&self, v: NodeId) -> u64 {
        let lv = self.tree.level(v);
        self.edges
            .iter()
            .filter(|e| {
                self.tree.level(e.top) <= lv
                    && self.tree.is_ancestor_or_self(v, e.bottom)
                    && self.tree.is_ancestor_or_self(e.top, v)
            })
            .map(|e| e.multiplicity)
            .sum()
    }

    /// Degrees of every vertex in one pass.
    ///
    /// Each edge adds its multiplicity at `bottom` and removes it at
    /// `parent(top)`; a bottom-up subtree sum then yields the degree.
    pub fn degrees(&self) -> Vec<u64> {
        let n = self.tree.len();
        let mut acc = vec![0i128; n];
        for e in &self.edges {
            acc[e.bottom.index()] += e.multiplicity as i128;
            if let Some(p) = self.tree.parent(e.top) {
                acc[p.index()] -= e.multiplicity as i128;
            }
        }
        for v in self.tree.node_ids().rev() {
            if let Some(p) = self.tree.parent(v) {
                acc[p.index()] += acc[v.index()];
            }
        }
        acc.into_iter().map(|d| d.max(0) as u64).collect()
    }

    /// Largest degree and the smallest vertex attaining it.
    pub fn max_degree(&self) -> (u64, NodeId) {
        let mut best = (0, self.tree.root());
        for (i, d) in self.degrees().into_iter().enumerate() {
            if d > best.0 {
                best = (d, NodeId::new(i as u32));
            }
        }
        best
    }

    /// Edges ending at `leaf`, in edge order.
    pub fn bottom_edges_at(&self, leaf: NodeId) -> Result<Vec<&PathEdge>> {
        if !self.tree.contains(leaf) || !self.tree.is_leaf(leaf) {
            return Err(Error::InvalidParameter(format!("{leaf} is not a leaf")));
        }
        Ok(self.edges.iter().filter(|e| e.bottom == leaf).collect())
    }

    /// Edge indices grouped by bottom vertex.
    pub fn bottom_index(&self) -> BottomIndex {
        let n = self.tree.len();
        let mut offsets = vec![0usize; n + 1];
        for e in &self.edges {
            offsets[e.bottom.index() + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut ids = vec![0usize; self.edges.len()];
        for (i, e) in self.edges.iter().enumerate() {
            let slot = &mut fill[e.bottom.index()];
            ids[*slot] = i;
            *slot += 1;
        }
        BottomIndex { offsets, ids }
    }

    pub fn edge_instances(&self) -> u64 {
        self.edges.iter().map(|e| e.multiplicity).sum()
    }

    pub fn summary(&self) -> HypergraphSummary {
        let (max_degree, max_degree_vertex) = self.max_degree();
        HypergraphSummary {
            stage: self.stage,
            nodes: self.tree.len(),
            leaves: self.tree.leaf_count(),
            distinct_edges: self.edges.len(),
            edge_instances: self.edge_instances(),
            max_degree,
            max_degree_vertex,
        }
    }
}

/// CSR-style grouping of edge indices by their bottom vertex.
#[derive(Debug, Clone)]
pub struct BottomIndex {
    offsets: Vec<usize>,
    ids: Vec<usize>,
}

impl BottomIndex {
    pub fn at(&self, v: NodeId) -> &[usize] {
        &self.ids[self.offsets[v.index()]..self.offsets[v.index() + 1]]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HypergraphSummary {
    pub stage: Stage,
    pub nodes: usize,
    pub leaves: usize,
    pub distinct_edges: usize,
    pub edge_instances: u64,
    pub max_degree: u64,
    pub max_degree_vertex: NodeId,
}
