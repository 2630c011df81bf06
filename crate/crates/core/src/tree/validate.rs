use std::fmt;

use serde::Serialize;

use super::{MetricTree, NodeId, TreeNode};
use crate::domain::Dataset;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Violation {
    /// A child index points outside the node array.
    DanglingChild { node: NodeId, child: NodeId },
    /// A node is reachable along more than one path.
    SharedNode { node: NodeId },
    /// A node in the array is not reachable from the root.
    Unreachable { node: NodeId },
    /// A datapoint under the minus child has `f > 0`, or one under the plus child has `f < 0`.
    Sign {
        node: NodeId,
        point: u32,
        value: f64,
        minus_side: bool,
    },
    /// A datapoint appears in no bin.
    Uncovered { point: u32 },
    /// A bin refers to a datapoint that does not exist.
    UnknownPoint { node: NodeId, point: u32 },
    /// A leaf above the depth cap holds more than `bin_capacity` points that do not all coincide.
    Capacity {
        node: NodeId,
        size: usize,
        depth: usize,
    },
    /// Tree and dataset disagree on the number of points or the domain.
    Mismatch { reason: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DanglingChild { node, child } => {
                write!(f, "node {node}: child {child} out of range")
            }
            Violation::SharedNode { node } => write!(f, "node {node} has more than one parent"),
            Violation::Unreachable { node } => write!(f, "node {node} unreachable from root"),
            Violation::Sign {
                node,
                point,
                value,
                minus_side,
            } => write!(
                f,
                "node {node}: point {point} on {} side has f = {value}",
                if *minus_side { "minus" } else { "plus" }
            ),
            Violation::Uncovered { point } => write!(f, "point {point} is in no bin"),
            Violation::UnknownPoint { node, point } => {
                write!(f, "leaf {node}: unknown point {point}")
            }
            Violation::Capacity { node, size, depth } => {
                write!(f, "leaf {node} at depth {depth} holds {size} points")
            }
            Violation::Mismatch { reason } => f.write_str(reason),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

/// Exhaustively checks arity, reachability, coverage, bin capacity and the
/// sign condition of every internal node against the stored datapoints.
///
/// Capacity is not enforced for leaves at the depth cap or leaves whose
/// points all coincide.
pub fn validate_tree(tree: &MetricTree, data: &Dataset) -> ValidationReport {
    let mut v = Vec::new();
    if tree.n != data.len() {
        v.push(Violation::Mismatch {
            reason: format!("tree indexes {} points, dataset has {}", tree.n, data.len()),
        });
    }
    if tree.spec != data.spec {
        v.push(Violation::Mismatch {
            reason: format!(
                "tree domain {} differs from dataset domain {}",
                tree.spec, data.spec
            ),
        });
    }
    if !v.is_empty() || tree.root as usize >= tree.nodes.len() {
        if tree.root as usize >= tree.nodes.len() {
            v.push(Violation::Unreachable { node: tree.root });
        }
        return ValidationReport {
            ok: false,
            violations: v,
        };
    }

    let n = data.len();
    let mut seen = vec![false; tree.nodes.len()];
    let mut covered = vec![false; n];
    // (node, depth, ancestors as (node, minus_side))
    let mut stack: Vec<(NodeId, usize, Vec<(NodeId, bool)>)> = vec![(tree.root, 0, Vec::new())];
    while let Some((id, depth, path)) = stack.pop() {
        if std::mem::replace(&mut seen[id as usize], true) {
            v.push(Violation::SharedNode { node: id });
            continue;
        }
        match &tree.nodes[id as usize] {
            TreeNode::Internal { minus, plus, .. } => {
                for (child, side) in [(*minus, true), (*plus, false)] {
                    if child as usize >= tree.nodes.len() {
                        v.push(Violation::DanglingChild { node: id, child });
                        continue;
                    }
                    let mut p = path.clone();
                    p.push((id, side));
                    stack.push((child, depth + 1, p));
                }
            }
            TreeNode::Leaf { bin } => {
                for &i in bin {
                    let Some(x) = data.points.get(i as usize) else {
                        v.push(Violation::UnknownPoint { node: id, point: i });
                        continue;
                    };
                    covered[i as usize] = true;
                    for &(anc, minus_side) in &path {
                        let TreeNode::Internal { f, .. } = &tree.nodes[anc as usize] else {
                            unreachable!()
                        };
                        let value = f.eval(&data.spec, x);
                        if (minus_side && value > 0.0) || (!minus_side && value < 0.0) {
                            v.push(Violation::Sign {
                                node: anc,
                                point: i,
                                value,
                                minus_side,
                            });
                        }
                    }
                }
                let zero_diameter = || {
                    let mut pts = bin.iter().filter_map(|&i| data.points.get(i as usize));
                    let first = pts.next();
                    pts.all(|x| Some(x) == first)
                };
                if bin.len() > tree.params.bin_capacity
                    && depth < tree.params.max_depth
                    && !zero_diameter()
                {
                    v.push(Violation::Capacity {
                        node: id,
                        size: bin.len(),
                        depth,
                    });
                }
            }
        }
    }
    for (id, s) in seen.iter().enumerate() {
        if !s {
            v.push(Violation::Unreachable { node: id as NodeId });
        }
    }
    for (i, c) in covered.iter().enumerate() {
        if !c {
            v.push(Violation::Uncovered { point: i as u32 });
        }
    }
    ValidationReport {
        ok: v.is_empty(),
        violations: v,
    }
}
