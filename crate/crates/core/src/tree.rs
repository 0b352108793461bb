//! Arena-backed rooted binary tree.
//!
//! Nodes are only ever appended, so a [`NodeId`] stays valid across every
//! construction stage, and a parent always has a smaller index than its
//! children. Several linear-time passes (degree accumulation, branch cover)
//! rely on that ordering.

use std::fmt;
use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct NodeId(u32);

impl NodeId {
    pub const fn new(index: u32) -> Self {
        NodeId(index)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn raw(self) -> u32 {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Node {
    parent: u32,
    left: u32,
    right: u32,
    level: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayeredTree {
    nodes: Vec<Node>,
}

impl LayeredTree {
    /// A tree consisting of a lone root at level 0.
    pub fn singleton() -> Self {
        LayeredTree {
            nodes: vec![Node {
                parent: NONE,
                left: NONE,
                right: NONE,
                level: 0,
            }],
        }
    }

    /// Complete binary tree with `levels` levels, numbered breadth-first.
    pub fn new_complete(levels: u32) -> Result<Self> {
        if levels == 0 {
            return Err(Error::InvalidParameter(
                "a tree needs at least one level".into(),
            ));
        }
        if levels > 31 {
            return Err(Error::InvalidParameter(format!(
                "{levels} levels exceed the 32-bit node index space"
            )));
        }
        let mut tree = Self::singleton();
        tree.nodes.reserve((1usize << levels) - 1);
        tree.attach_complete_subtree(tree.root(), levels - 1)?;
        Ok(tree)
    }

    #[inline]
    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.index() < self.nodes.len()
    }

    pub fn node_ids(&self) -> impl DoubleEndedIterator<Item = NodeId> + ExactSizeIterator {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    #[inline]
    pub fn level(&self, id: NodeId) -> u32 {
        self.nodes[id.index()].level
    }

    #[inline]
    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        wrap(self.nodes[id.index()].parent)
    }

    /// `(left, right)` for an internal node, `None` for a leaf.
    #[inline]
    pub fn children(&self, id: NodeId) -> Option<(NodeId, NodeId)> {
        let n = &self.nodes[id.index()];
        match (wrap(n.left), wrap(n.right)) {
            (Some(l), Some(r)) => Some((l, r)),
            _ => None,
        }
    }

    pub fn left_child(&self, id: NodeId) -> Option<NodeId> {
        wrap(self.nodes[id.index()].left)
    }

    pub fn right_child(&self, id: NodeId) -> Option<NodeId> {
        wrap(self.nodes[id.index()].right)
    }

    #[inline]
    pub fn is_leaf(&self, id: NodeId) -> bool {
        let n = &self.nodes[id.index()];
        n.left == NONE && n.right == NONE
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.left == NONE && n.right == NONE)
            .count()
    }

    pub fn depth(&self) -> u32 {
        self.nodes.iter().map(|n| n.level).max().unwrap_or(0)
    }

    fn push_child(&mut self, parent: NodeId) -> NodeId {
        let id = u32::try_from(self.nodes.len())
            .ok()
            .filter(|&i| i != NONE)
            .expect("node index space exhausted");
        let level = self.nodes[parent.index()].level + 1;
        self.nodes.push(Node {
            parent: parent.0,
            left: NONE,
            right: NONE,
            level,
        });
        NodeId(id)
    }

    /// Gives leaf `at` two fresh children and returns them.
    pub fn split_leaf(&mut self, at: NodeId) -> Result<(NodeId, NodeId)> {
        if !self.contains(at) {
            return Err(Error::InvalidParameter(format!("node {at} does not exist")));
        }
        if !self.is_leaf(at) {
            return Err(Error::Structural(format!("node {at} is not a leaf")));
        }
        let l = self.push_child(at);
        let r = self.push_child(at);
        let n = &mut self.nodes[at.index()];
        n.left = l.0;
        n.right = r.0;
        Ok((l, r))
    }

    /// Grafts a complete binary tree of the given height rooted at leaf `at`.
    ///
    /// New nodes are appended level by level; the returned leaves are in
    /// left-to-right order. Height 0 returns `[at]` and leaves the tree as is.
    pub fn attach_complete_subtree(&mut self, at: NodeId, height: u32) -> Result<Vec<NodeId>> {
        if !self.contains(at) {
            return Err(Error::InvalidParameter(format!("node {at} does not exist")));
        }
        if !self.is_leaf(at) {
            return Err(Error::Structural(format!(
                "cannot graft at {at}: it already has children"
            )));
        }
        if height >= 31 {
            return Err(Error::InvalidParameter(format!(
                "graft height {height} is too large"
            )));
        }
        let mut frontier = vec![at];
        for _ in 0..height {
            let mut next = Vec::with_capacity(frontier.len() * 2);
            for &v in &frontier {
                let (l, r) = self.split_leaf(v)?;
                next.push(l);
                next.push(r);
            }
            frontier = next;
        }
        Ok(frontier)
    }

    /// Leaves of the whole tree in left-to-right order.
    pub fn leaves(&self) -> Vec<NodeId> {
        self.subtree_leaves(self.root())
    }

    /// Leaves below (or equal to) `v` in left-to-right order.
    pub fn subtree_leaves(&self, v: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            match self.children(u) {
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                None => out.push(u),
            }
        }
        out
    }

    /// Root-to-leaf paths, one per leaf, in left-to-right leaf order.
    pub fn full_branches(&self) -> FullBranches<'_> {
        FullBranches {
            tree: self,
            stack: vec![self.root()],
            path: Vec::new(),
        }
    }

    /// Root-to-`v` path.
    pub fn branch_to(&self, v: NodeId) -> Vec<NodeId> {
        let mut path = Vec::with_capacity(self.level(v) as usize + 1);
        let mut cur = Some(v);
        while let Some(u) = cur {
            path.push(u);
            cur = self.parent(u);
        }
        path.reverse();
        path
    }

    pub fn is_ancestor_or_self(&self, ancestor: NodeId, v: NodeId) -> bool {
        if !self.contains(ancestor) || !self.contains(v) {
            return false;
        }
        let target = self.level(ancestor);
        let mut cur = v;
        while self.level(cur) > target {
            match self.parent(cur) {
                Some(p) => cur = p,
                None => return false,
            }
        }
        cur == ancestor
    }

    /// Every `(left, right)` child pair, ordered breadth-first by parent.
    pub fn sibling_pairs(&self) -> Result<Vec<(NodeId, NodeId)>> {
        let mut pairs = Vec::with_capacity(self.len() / 2);
        let mut queue = std::collections::VecDeque::from([self.root()]);
        while let Some(v) = queue.pop_front() {
            let n = &self.nodes[v.index()];
            match (wrap(n.left), wrap(n.right)) {
                (Some(l), Some(r)) => {
                    pairs.push((l, r));
                    queue.push_back(l);
                    queue.push_back(r);
                }
                (None, None) => {}
                _ => return Err(Error::Structural(format!("node {v} has exactly one child"))),
            }
        }
        Ok(pairs)
    }

    /// Checks links, levels, index ordering and the full-binary property.
    pub fn check_structure(&self) -> Result<()> {
        let Some(root) = self.nodes.first() else {
            return Err(Error::Structural("tree has no nodes".into()));
        };
        if root.parent != NONE || root.level != 0 {
            return Err(Error::Structural("node 0 is not a level-0 root".into()));
        }
        for (i, n) in self.nodes.iter().enumerate().skip(1) {
            let id = NodeId(i as u32);
            let Some(p) = wrap(n.parent) else {
                return Err(Error::Structural(format!("node {id} is a second root")));
            };
            if p.index() >= i {
                return Err(Error::Structural(format!(
                    "node {id} has parent {p} with a larger index"
                )));
            }
            let pn = &self.nodes[p.index()];
            if pn.left != id.0 && pn.right != id.0 {
                return Err(Error::Structural(format!(
                    "parent {p} does not list {id} as a child"
                )));
            }
            if n.level != pn.level + 1 {
                return Err(Error::Structural(format!(
                    "node {id} at level {} under parent at level {}",
                    n.level, pn.level
                )));
            }
        }
        for (i, n) in self.nodes.iter().enumerate() {
            let id = NodeId(i as u32);
            if (n.left == NONE) != (n.right == NONE) {
                return Err(Error::Structural(format!(
                    "node {id} has exactly one child"
                )));
            }
            for c in [n.left, n.right] {
                if c != NONE
                    && (c as usize >= self.nodes.len() || self.nodes[c as usize].parent != id.0)
                {
                    return Err(Error::Structural(format!(
                        "child link {id} -> {c} is not mirrored by a parent link"
                    )));
                }
            }
        }
        Ok(())
    }

    /// New tree with a fresh root whose left subtree is a copy of `left` and
    /// right subtree a copy of `right`.
    ///
    /// Node `v` of `left` becomes `v + 1`; node `v` of `right` becomes
    /// `v + 1 + left.len()`.
    pub fn join(left: &LayeredTree, right: &LayeredTree) -> LayeredTree {
        let left_off = 1u32;
        let right_off = 1 + left.len() as u32;
        let mut nodes = Vec::with_capacity(1 + left.len() + right.len());
        nodes.push(Node {
            parent: NONE,
            left: left_off,
            right: right_off,
            level: 0,
        });
        for (src, off) in [(left, left_off), (right, right_off)] {
            nodes.extend(src.nodes.iter().map(|n| Node {
                parent: if n.parent == NONE { 0 } else { n.parent + off },
                left: shift(n.left, off),
                right: shift(n.right, off),
                level: n.level + 1,
            }));
        }
        LayeredTree { nodes }
    }

    /// Graphviz export; every node is labelled `id:level`.
    pub fn write_dot<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "digraph tree {{")?;
        writeln!(w, "  node [shape=circle];")?;
        for id in self.node_ids() {
            writeln!(w, "  n{id} [label=\"{id}:{}\"];", self.level(id))?;
        }
        for id in self.node_ids() {
            if let Some((l, r)) = self.children(id) {
                writeln!(w, "  n{id} -> n{l};")?;
                writeln!(w, "  n{id} -> n{r};")?;
            }
        }
        writeln!(w, "}}")?;
        w.flush()
    }
}

#[inline]
fn wrap(raw: u32) -> Option<NodeId> {
    (raw != NONE).then_some(NodeId(raw))
}

#[inline]
fn shift(raw: u32, off: u32) -> u32 {
    if raw == NONE {
        NONE
    } else {
        raw + off
    }
}

pub struct FullBranches<'a> {
    tree: &'a LayeredTree,
    stack: Vec<NodeId>,
    path: Vec<NodeId>,
}

impl Iterator for FullBranches<'_> {
    type Item = Vec<NodeId>;

    fn next(&mut self) -> Option<Vec<NodeId>> {
        while let Some(v) = self.stack.pop() {
            self.path.truncate(self.tree.level(v) as usize);
            self.path.push(v);
            match self.tree.children(v) {
                Some((l, r)) => {
                    self.stack.push(r);
                    self.stack.push(l);
                }
                None => return Some(self.path.clone()),
            }
        }
        None
    }
}
