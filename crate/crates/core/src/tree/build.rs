use rand::seq::index;
use rand::Rng;

use super::{BuildParams, MetricTree, NodeId, Strategy, TreeNode};
use crate::decision::DecisionFunction;
use crate::domain::{Dataset, DomainSpec, Point};
use crate::error::{MclError, Result};
use crate::rng::{substream, Stream, StreamRng};

/// Builds a metric tree over `data`.
///
/// Splitting stops at a node when it holds at most `bin_capacity` points,
/// when it sits at depth `max_depth`, or when all its points coincide. Every
/// split sends points with `f <= 0` to the minus child and the rest to the
/// plus child, and both children are always non-empty.
pub fn build(
    data: &Dataset,
    strategy: Strategy,
    params: BuildParams,
    seed: u64,
) -> Result<MetricTree> {
    if data.is_empty() {
        return Err(MclError::EmptyDataset);
    }
    params.validate()?;
    let mut builder = Builder {
        spec: &data.spec,
        points: &data.points,
        strategy,
        params,
        rng: substream(seed, Stream::Build, 0),
        nodes: Vec::new(),
    };
    let all: Vec<u32> = (0..data.len() as u32).collect();
    let root = builder.node(all, 0);
    Ok(MetricTree {
        nodes: builder.nodes,
        root,
        spec: data.spec,
        strategy,
        params,
        seed,
        n: data.len(),
    })
}

struct Builder<'a> {
    spec: &'a DomainSpec,
    points: &'a [Point],
    strategy: Strategy,
    params: BuildParams,
    rng: StreamRng,
    nodes: Vec<TreeNode>,
}

impl Builder<'_> {
    fn node(&mut self, idx: Vec<u32>, depth: usize) -> NodeId {
        if idx.len() <= self.params.bin_capacity
            || depth >= self.params.max_depth
            || self.zero_diameter(&idx)
        {
            return self.leaf(idx);
        }
        let f = match self.strategy {
            Strategy::Vp => self.vantage_split(&idx),
            Strategy::Ball => self.ball_split(&idx),
            Strategy::Pivot => self.pivot_split(&idx),
        };
        let (minus, plus): (Vec<u32>, Vec<u32>) = idx
            .iter()
            .partition(|&&i| f.eval(self.spec, &self.points[i as usize]) <= 0.0);
        debug_assert!(!minus.is_empty() && !plus.is_empty());

        let id = self.nodes.len() as NodeId;
        self.nodes.push(TreeNode::Leaf { bin: Vec::new() });
        let minus = self.node(minus, depth + 1);
        let plus = self.node(plus, depth + 1);
        self.nodes[id as usize] = TreeNode::Internal { f, minus, plus };
        id
    }

    fn leaf(&mut self, mut bin: Vec<u32>) -> NodeId {
        bin.sort_unstable();
        self.nodes.push(TreeNode::Leaf { bin });
        (self.nodes.len() - 1) as NodeId
    }

    fn point(&self, i: u32) -> &Point {
        &self.points[i as usize]
    }

    fn zero_diameter(&self, idx: &[u32]) -> bool {
        let first = self.point(idx[0]);
        idx[1..].iter().all(|&i| self.point(i) == first)
    }

    fn candidates(&mut self, idx: &[u32]) -> Vec<u32> {
        let k = self.params.candidates.min(idx.len());
        index::sample(&mut self.rng, idx.len(), k)
            .into_iter()
            .map(|p| idx[p])
            .collect()
    }

    fn dist(&self, a: u32, b: u32) -> f64 {
        self.spec.dist(self.point(a), self.point(b))
    }

    fn vantage_split(&mut self, idx: &[u32]) -> DecisionFunction {
        let cands = self.candidates(idx);
        let (mut best, mut pair) = (-1.0, (cands[0], cands[0]));
        for (a, &i) in cands.iter().enumerate() {
            for &j in &cands[a + 1..] {
                let r = self.dist(i, j);
                if r > best {
                    best = r;
                    pair = (i, j);
                }
            }
        }
        if best <= 0.0 {
            // every candidate coincides; pair the first with any distinct point
            let other = *idx
                .iter()
                .find(|&&i| self.point(i) != self.point(pair.0))
                .expect("node with positive diameter");
            pair.1 = other;
        }
        DecisionFunction::VantagePair {
            plus: self.point(pair.0).clone(),
            minus: self.point(pair.1).clone(),
        }
    }

    /// Sorted distances from `center` and the lower-median split value,
    /// moved down one distinct value when the median is already the maximum.
    fn median_cut(&self, center: u32, idx: &[u32]) -> (f64, f64) {
        let mut ds: Vec<f64> = idx.iter().map(|&i| self.dist(center, i)).collect();
        ds.sort_unstable_by(f64::total_cmp);
        let max = ds[ds.len() - 1];
        let mut cut = ds[(ds.len() - 1) / 2];
        if cut >= max {
            // the center itself sits at 0 < max, so a smaller value exists
            cut = *ds
                .iter()
                .rev()
                .find(|&&r| r < max)
                .expect("positive diameter");
        }
        let above = *ds.iter().find(|&&r| r > cut).expect("cut below max");
        (cut, above)
    }

    fn ball_split(&mut self, idx: &[u32]) -> DecisionFunction {
        let center = idx[self.rng.random_range(0..idx.len())];
        let (radius, _) = self.median_cut(center, idx);
        DecisionFunction::Ball {
            center: self.point(center).clone(),
            radius,
        }
    }

    fn pivot_split(&mut self, idx: &[u32]) -> DecisionFunction {
        let cands = self.candidates(idx);
        let mut anchor = cands[0];
        let mut best = f64::NEG_INFINITY;
        for &c in &cands {
            let ds: Vec<f64> = cands
                .iter()
                .filter(|&&o| o != c)
                .map(|&o| self.dist(c, o))
                .collect();
            let mean = ds.iter().sum::<f64>() / ds.len() as f64;
            let var = ds.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / ds.len() as f64;
            if var > best {
                best = var;
                anchor = c;
            }
        }
        let (cut, above) = self.median_cut(anchor, idx);
        let mid = 0.5 * (cut + above);
        DecisionFunction::Pivot {
            anchor: self.point(anchor).clone(),
            // adjacent floats: the midpoint can round up onto `above`
            threshold: if mid < above { mid } else { cut },
        }
    }
}
