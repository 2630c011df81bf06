//! Binary metric trees.
//!
//! Internal nodes carry a [`DecisionFunction`]; leaves carry bins of
//! datapoint indices. The tree does not own the points: searches and
//! validation take the [`Dataset`] the tree was built over.

mod build;
mod codec;
mod search;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use build::build;
pub use codec::{decode_tree, encode_tree, TREE_MAGIC, TREE_VERSION};
pub use search::{
    linear_nn, linear_scan, NnResult, NnSchedule, RangeQuery, SearchTrace, TracedSearch,
    PRUNE_SLACK,
};
pub use validate::{validate_tree, ValidationReport, Violation};

use crate::decision::DecisionFunction;
use crate::domain::DomainSpec;
use crate::error::{invalid, MclError, Result};

pub type NodeId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Farthest pair among seeded candidates as vantage points.
    Vp,
    /// Random center, covering radius at the median distance.
    Ball,
    /// Highest-spread candidate as anchor, threshold in the median gap.
    Pivot,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Vp, Strategy::Ball, Strategy::Pivot];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Vp => "vp",
            Strategy::Ball => "ball",
            Strategy::Pivot => "pivot",
        }
    }

    pub(crate) fn code(self) -> u8 {
        self as u8
    }

    pub(crate) fn from_code(c: u8) -> Option<Self> {
        Self::ALL.get(c as usize).copied()
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = MclError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vp" => Ok(Strategy::Vp),
            "ball" => Ok(Strategy::Ball),
            "pivot" => Ok(Strategy::Pivot),
            other => Err(invalid("strategy", format!("unknown strategy `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildParams {
    /// Largest bin a leaf may hold before it is split (`b`).
    pub bin_capacity: usize,
    /// Candidate points examined when choosing a split (`c`).
    pub candidates: usize,
    /// Depth at which splitting stops regardless of bin size (`h`).
    pub max_depth: usize,
}

impl Default for BuildParams {
    fn default() -> Self {
        BuildParams {
            bin_capacity: 16,
            candidates: 16,
            max_depth: 64,
        }
    }
}

impl BuildParams {
    pub fn validate(&self) -> Result<()> {
        if self.bin_capacity == 0 {
            return Err(invalid("bin_capacity", "must be at least 1"));
        }
        if self.candidates < 2 {
            return Err(invalid("candidates", "must be at least 2"));
        }
        if self.max_depth == 0 {
            return Err(invalid("max_depth", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TreeNode {
    Internal {
        f: DecisionFunction,
        minus: NodeId,
        plus: NodeId,
    },
    Leaf {
        bin: Vec<u32>,
    },
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        matches!(self, TreeNode::Leaf { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricTree {
    pub(crate) nodes: Vec<TreeNode>,
    pub(crate) root: NodeId,
    pub(crate) spec: DomainSpec,
    pub(crate) strategy: Strategy,
    pub(crate) params: BuildParams,
    pub(crate) seed: u64,
    pub(crate) n: usize,
}

impl MetricTree {
    /// Assembles a tree from raw parts without checking any invariant; run
    /// [`validate_tree`] on the result.
    pub fn from_parts(
        spec: DomainSpec,
        strategy: Strategy,
        params: BuildParams,
        seed: u64,
        n: usize,
        nodes: Vec<TreeNode>,
        root: NodeId,
    ) -> Self {
        MetricTree {
            nodes,
            root,
            spec,
            strategy,
            params,
            seed,
            n,
        }
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn nodes_mut(&mut self) -> &mut Vec<TreeNode> {
        &mut self.nodes
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id as usize]
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn params(&self) -> &BuildParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of datapoints the tree indexes.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn internal_count(&self) -> usize {
        self.nodes.len() - self.leaf_count()
    }

    /// Length of the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(self.root, 0usize)];
        while let Some((id, d)) = stack.pop() {
            match self.node(id) {
                TreeNode::Leaf { .. } => best = best.max(d),
                TreeNode::Internal { minus, plus, .. } => {
                    stack.push((*minus, d + 1));
                    stack.push((*plus, d + 1));
                }
            }
        }
        best
    }

    /// All datapoint indices stored in leaves under `id`, in traversal order.
    pub fn points_under(&self, id: NodeId) -> Vec<u32> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(id) = stack.pop() {
            match self.node(id) {
                TreeNode::Leaf { bin } => out.extend_from_slice(bin),
                TreeNode::Internal { minus, plus, .. } => {
                    stack.push(*plus);
                    stack.push(*minus);
                }
            }
        }
        out
    }
}
