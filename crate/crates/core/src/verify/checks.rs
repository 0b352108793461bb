use std::collections::{BTreeMap, HashSet};

use crate::construction::StageParams;
use crate::error::Result;
use crate::hypergraph::{KsTreeSpec, Stage, TreeHypergraph};
use crate::tree::{LayeredTree, NodeId};

use super::{Location, VerificationReport};

/// Sizes of all edges; corrupt edges are reported and come back as `None`.
fn edge_sizes(hg: &TreeHypergraph, report: &mut VerificationReport) -> Vec<Option<u32>> {
    hg.edges()
        .iter()
        .enumerate()
        .map(|(i, e)| match hg.edge_size(e) {
            Ok(s) => Some(s),
            Err(err) => {
                report.fail(Location::Edge(i), "descending tree path", err.to_string());
                None
            }
        })
        .collect()
}

fn check_max_degree(hg: &TreeHypergraph, bound: u64, report: &mut VerificationReport) {
    let (deg, at) = hg.max_degree();
    if deg > bound {
        report.fail(
            Location::Vertex(at),
            format!("max degree <= {bound}"),
            format!("degree {deg}"),
        );
    }
}

/// Leaves whose root-to-leaf branch contains no edge ending on it.
fn uncovered_leaves(tree: &LayeredTree, hg: &TreeHypergraph) -> Vec<NodeId> {
    let mut covered = vec![false; tree.len()];
    for e in hg.edges() {
        if tree.contains(e.bottom) && tree.is_ancestor_or_self(e.top, e.bottom) {
            covered[e.bottom.index()] = true;
        }
    }
    // parents precede children in the arena
    for v in tree.node_ids().skip(1) {
        if let Some(p) = tree.parent(v) {
            covered[v.index()] |= covered[p.index()];
        }
    }
    tree.leaves()
        .into_iter()
        .filter(|l| !covered[l.index()])
        .collect()
}

/// Both (k,s)-tree conditions plus k-uniformity.
pub fn check_ks_tree(hg: &TreeHypergraph, spec: &KsTreeSpec) -> VerificationReport {
    let mut report = VerificationReport::new("ks_tree", hg.stage());
    for (i, size) in edge_sizes(hg, &mut report).into_iter().enumerate() {
        if let Some(s) = size.filter(|&s| s != spec.k()) {
            report.fail(
                Location::Edge(i),
                format!("size {}", spec.k()),
                format!("size {s}"),
            );
        }
    }
    for leaf in uncovered_leaves(hg.tree(), hg) {
        report.fail(Location::Branch(leaf), "branch contains an edge", "no edge");
    }
    check_max_degree(hg, spec.s(), &mut report);
    report
}

/// Per-leaf map from edge size to total multiplicity of edges ending there.
fn leaf_profiles(
    hg: &TreeHypergraph,
    sizes: &[Option<u32>],
    skip: impl Fn(usize) -> bool,
) -> Vec<(NodeId, BTreeMap<u32, u64>)> {
    let index = hg.bottom_index();
    hg.tree()
        .leaves()
        .into_iter()
        .map(|leaf| {
            let mut prof = BTreeMap::new();
            for &i in index.at(leaf).iter().filter(|&&i| !skip(i)) {
                if let Some(s) = sizes[i] {
                    *prof.entry(s).or_insert(0) += hg.edges()[i].multiplicity;
                }
            }
            (leaf, prof)
        })
        .collect()
}

/// A base-stage edge of a class that `split_leaves` never augments, still in
/// its original shape. These only end at leaves when `ll = 0`.
fn untouched_base_edge(hg: &TreeHypergraph, i: usize, size: Option<u32>, p: &StageParams) -> bool {
    let e = &hg.edges()[i];
    match (e.size_class, size) {
        (Some(c), Some(s)) => {
            c >= p.augmented_classes()
                && c <= p.log_d
                && s == p.log_d + 1 - c
                && e.multiplicity == 1u64 << c
        }
        _ => false,
    }
}

fn fmt_profile(p: &BTreeMap<u32, u64>) -> String {
    let parts: Vec<String> = p.iter().map(|(s, m)| format!("size {s} x{m}")).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Every branch carries `2^i` bottom edges of size `log_d + 1 - i` for each
/// `0 <= i <= log_d`, and nothing else.
pub fn check_base_profile(hg: &TreeHypergraph, p: &StageParams) -> Result<VerificationReport> {
    hg.expect_stage(Stage::Base)?;
    let mut report = VerificationReport::new("base_profile", hg.stage());
    let sizes = edge_sizes(hg, &mut report);
    let expected: BTreeMap<u32, u64> = (0..=p.log_d)
        .map(|i| (p.log_d + 1 - i, 1u64 << i))
        .collect();
    for (leaf, prof) in leaf_profiles(hg, &sizes, |_| false) {
        if prof != expected {
            report.fail(
                Location::Branch(leaf),
                fmt_profile(&expected),
                fmt_profile(&prof),
            );
        }
    }
    check_max_degree(hg, p.degree_bound(), &mut report);
    Ok(report)
}

/// Every vertex starts exactly `d` edge instances in the base stage.
pub fn check_base_start_counts(hg: &TreeHypergraph, p: &StageParams) -> Result<VerificationReport> {
    hg.expect_stage(Stage::Base)?;
    let mut report = VerificationReport::new("base_start_counts", hg.stage());
    let mut starts = vec![0u64; hg.tree().len()];
    for e in hg.edges() {
        starts[e.top.index()] += e.multiplicity;
    }
    for v in hg.tree().node_ids() {
        if starts[v.index()] != p.d {
            report.fail(
                Location::Vertex(v),
                format!("{} started edges", p.d),
                starts[v.index()].to_string(),
            );
        }
    }
    Ok(report)
}

/// Every branch carries bottom edges of a single size `log_d + 1 - i + ll`
/// with total multiplicity `2^i`, for one `i < 2^ll`. Untouched base-class
/// edges are not counted.
pub fn check_split_profile(hg: &TreeHypergraph, p: &StageParams) -> Result<VerificationReport> {
    hg.expect_stage(Stage::Split)?;
    let mut report = VerificationReport::new("split_profile", hg.stage());
    let sizes = edge_sizes(hg, &mut report);
    let top = p.log_d + 1 + p.ll;
    let skip = |i: usize| untouched_base_edge(hg, i, sizes[i], p);
    for (leaf, prof) in leaf_profiles(hg, &sizes, skip) {
        let ok = match prof.iter().collect::<Vec<_>>().as_slice() {
            [(&size, &mult)] => {
                size <= top && {
                    let i = top - size;
                    i < p.augmented_classes() && mult == 1u64 << i
                }
            }
            _ => false,
        };
        if !ok {
            report.fail(
                Location::Branch(leaf),
                format!(
                    "one size class {top}-i with multiplicity 2^i, i < {}",
                    p.augmented_classes()
                ),
                fmt_profile(&prof),
            );
        }
    }
    check_max_degree(hg, p.degree_bound(), &mut report);
    Ok(report)
}

/// Every branch carries exactly one bottom edge, of size `k`. At the
/// equalized stage untouched base-class edges are not counted.
pub fn check_equalized_profile(hg: &TreeHypergraph, p: &StageParams) -> Result<VerificationReport> {
    if hg.stage() != Stage::Final {
        hg.expect_stage(Stage::Equalized)?;
    }
    let mut report = VerificationReport::new("equalized_profile", hg.stage());
    let sizes = edge_sizes(hg, &mut report);
    let expected = BTreeMap::from([(p.k, 1u64)]);
    let equalized = hg.stage() == Stage::Equalized;
    let skip = |i: usize| equalized && untouched_base_edge(hg, i, sizes[i], p);
    for (leaf, prof) in leaf_profiles(hg, &sizes, skip) {
        if prof != expected {
            report.fail(
                Location::Branch(leaf),
                fmt_profile(&expected),
                fmt_profile(&prof),
            );
        }
    }
    check_max_degree(hg, p.degree_bound(), &mut report);
    Ok(report)
}

/// Degrees of vertices already present in `before` are unchanged in `after`.
pub fn check_degrees_preserved(
    before: &TreeHypergraph,
    after: &TreeHypergraph,
) -> VerificationReport {
    let mut report = VerificationReport::new("degrees_preserved", after.stage());
    let old = before.degrees();
    let new = after.degrees();
    for v in before.tree().node_ids() {
        let i = v.index();
        if new.get(i) != Some(&old[i]) {
            report.fail(
                Location::Vertex(v),
                format!("degree {}", old[i]),
                new.get(i)
                    .map_or("missing".into(), |d| format!("degree {d}")),
            );
        }
    }
    report
}

/// No two edges share both endpoints.
pub fn check_distinct_edges(hg: &TreeHypergraph) -> VerificationReport {
    let mut report = VerificationReport::new("distinct_edges", hg.stage());
    let mut seen = HashSet::with_capacity(hg.edges().len());
    for (i, e) in hg.edges().iter().enumerate() {
        if e.multiplicity != 1 {
            report.fail(
                Location::Edge(i),
                "multiplicity 1",
                format!("multiplicity {}", e.multiplicity),
            );
        }
        if !seen.insert((e.top, e.bottom)) {
            report.fail(
                Location::Edge(i),
                "distinct edge",
                format!("duplicate of {}..{}", e.top, e.bottom),
            );
        }
    }
    report
}

/// Branch-cover certificate for the joined hypergraph.
///
/// In a full tree whose sibling pairs carry complementary literals, every
/// assignment determines a branch on which all literals are false. If every
/// branch contains an edge, that edge's clause is falsified, so a passing
/// report proves the emitted formula unsatisfiable.
pub fn certify_unsat_structural(
    hg: &TreeHypergraph,
    p: &StageParams,
) -> Result<VerificationReport> {
    hg.expect_stage(Stage::Joined)?;
    let mut report = VerificationReport::new("structural_unsat", hg.stage());
    if let Err(e) = hg.tree().check_structure() {
        report.fail(Location::Global, "full binary tree", e.to_string());
        return Ok(report);
    }
    for (i, size) in edge_sizes(hg, &mut report).into_iter().enumerate() {
        if let Some(s) = size.filter(|&s| s != p.k) {
            report.fail(
                Location::Edge(i),
                format!("size {}", p.k),
                format!("size {s}"),
            );
        }
    }
    if hg.edges().iter().any(|e| e.top == hg.tree().root()) {
        report.fail(
            Location::Global,
            "root in no edge",
            "an edge contains the root",
        );
    }
    for leaf in uncovered_leaves(hg.tree(), hg) {
        report.fail(Location::Branch(leaf), "branch contains an edge", "no edge");
    }
    Ok(report)
}
