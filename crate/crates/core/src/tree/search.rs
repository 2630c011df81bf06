use serde::{Deserialize, Serialize};

use super::{MetricTree, NodeId, TreeNode};
use crate::domain::{Dataset, Point};
use crate::error::{invalid, MclError, Result};

/// Absolute slack added to pruning comparisons, far above the rounding
/// error of a decision function and far below any meaningful distance.
pub const PRUNE_SLACK: f64 = 1e-12;

/// Open ball `{x : rho(center, x) < radius}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RangeQuery {
    pub center: Point,
    pub radius: f64,
}

impl RangeQuery {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(invalid("radius", format!("must be positive, got {radius}")));
        }
        Ok(RangeQuery { center, radius })
    }
}

/// Work done by one query (or summed over several).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub internal_visited: u64,
    pub decision_evals: u64,
    pub bins_opened: u64,
    pub distance_computations: u64,
    pub result_size: u64,
}

impl SearchTrace {
    /// Decision evaluations plus datapoint distance computations.
    pub fn cost(&self) -> u64 {
        self.decision_evals + self.distance_computations
    }

    pub fn add(&mut self, other: &SearchTrace) {
        self.internal_visited += other.internal_visited;
        self.decision_evals += other.decision_evals;
        self.bins_opened += other.bins_opened;
        self.distance_computations += other.distance_computations;
        self.result_size += other.result_size;
    }
}

/// A range search result together with the subtrees the search skipped.
#[derive(Clone, Debug, PartialEq)]
pub struct TracedSearch {
    pub matches: Vec<u32>,
    pub trace: SearchTrace,
    /// Roots of pruned subtrees.
    pub pruned: Vec<NodeId>,
}

/// Radius schedule for nearest-neighbour search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NnSchedule {
    pub initial_radius: f64,
    pub growth: f64,
}

impl Default for NnSchedule {
    fn default() -> Self {
        NnSchedule {
            initial_radius: 0.05,
            growth: 2.0,
        }
    }
}

impl NnSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_radius > 0.0 && self.initial_radius.is_finite()) {
            return Err(invalid("initial_radius", "must be positive and finite"));
        }
        if !(self.growth > 1.0 && self.growth.is_finite()) {
            return Err(invalid("growth", "must exceed 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NnResult {
    pub index: u32,
    pub distance: f64,
    /// Range queries issued, including the confirming one.
    pub rounds: u32,
    /// Work summed over every round.
    pub trace: SearchTrace,
    /// Work of the confirming query alone. Its radius is the largest of the
    /// schedule, so the bins it opens include those of every earlier round.
    pub final_trace: SearchTrace,
}

impl MetricTree {
    fn check_query(&self, data: &Dataset, center: &Point) -> Result<()> {
        if data.len() != self.n {
            return Err(MclError::DatasetSizeMismatch {
                expected: self.n,
                found: data.len(),
            });
        }
        self.spec.check(center)
    }

    /// Exact range search: every datapoint strictly within `q.radius` of
    /// `q.center`, sorted by index.
    ///
    /// At an internal node with value `v = f(center)` the minus child is
    /// entered iff `v < radius` and the plus child iff `v > -radius`. Both
    /// comparisons are widened by [`PRUNE_SLACK`] so that rounding in `f`
    /// never prunes a point whose distance lies just below the radius.
    pub fn range_search(&self, data: &Dataset, q: &RangeQuery) -> Result<(Vec<u32>, SearchTrace)> {
        self.check_query(data, &q.center)?;
        let mut trace = SearchTrace::default();
        let matches = self.search(data, q, &mut trace, None);
        Ok((matches, trace))
    }

    /// [`MetricTree::range_search`] that also records pruned subtrees.
    pub fn range_search_traced(&self, data: &Dataset, q: &RangeQuery) -> Result<TracedSearch> {
        self.check_query(data, &q.center)?;
        let mut trace = SearchTrace::default();
        let mut pruned = Vec::new();
        let matches = self.search(data, q, &mut trace, Some(&mut pruned));
        Ok(TracedSearch {
            matches,
            trace,
            pruned,
        })
    }

    fn search(
        &self,
        data: &Dataset,
        q: &RangeQuery,
        trace: &mut SearchTrace,
        mut pruned: Option<&mut Vec<NodeId>>,
    ) -> Vec<u32> {
        let spec = &self.spec;
        let eps = q.radius;
        let open_to = eps + PRUNE_SLACK * (1.0 + eps);
        let mut matches = Vec::new();
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            match self.node(id) {
                TreeNode::Internal { f, minus, plus } => {
                    trace.internal_visited += 1;
                    trace.decision_evals += 1;
                    let v = f.eval(spec, &q.center);
                    for (child, open) in [(*plus, v > -open_to), (*minus, v < open_to)] {
                        if open {
                            stack.push(child);
                        } else if let Some(p) = pruned.as_deref_mut() {
                            p.push(child);
                        }
                    }
                }
                TreeNode::Leaf { bin } => {
                    trace.bins_opened += 1;
                    for &i in bin {
                        trace.distance_computations += 1;
                        if spec.dist(&q.center, &data.points[i as usize]) < eps {
                            matches.push(i);
                        }
                    }
                }
            }
        }
        matches.sort_unstable();
        matches.dedup();
        trace.result_size = matches.len() as u64;
        matches
    }

    /// Exact nearest neighbour by a sequence of range queries.
    ///
    /// Radii `r0, r0*g, r0*g^2, ...` are tried until one returns a match;
    /// the closest match (smallest index on ties) is then confirmed by a
    /// final query at the next float above its distance.
    pub fn nn_search(
        &self,
        data: &Dataset,
        center: &Point,
        schedule: &NnSchedule,
    ) -> Result<NnResult> {
        self.check_query(data, center)?;
        schedule.validate()?;
        if self.n == 0 {
            return Err(MclError::EmptyDataset);
        }
        let mut trace = SearchTrace::default();
        let mut radius = schedule.initial_radius;
        let mut rounds = 0;
        let found = loop {
            let q = RangeQuery {
                center: center.clone(),
                radius,
            };
            let mut t = SearchTrace::default();
            let m = self.search(data, &q, &mut t, None);
            trace.add(&t);
            rounds += 1;
            if !m.is_empty() {
                break m;
            }
            radius = if radius.is_finite() {
                radius * schedule.growth
            } else {
                f64::INFINITY
            };
        };
        let (index, distance) = closest(data, center, &found);

        let confirm = RangeQuery {
            center: center.clone(),
            radius: distance.next_up(),
        };
        let mut final_trace = SearchTrace::default();
        let m = self.search(data, &confirm, &mut final_trace, None);
        trace.add(&final_trace);
        debug_assert_eq!(closest(data, center, &m).0, index);
        Ok(NnResult {
            index,
            distance,
            rounds: rounds + 1,
            trace,
            final_trace,
        })
    }
}

fn closest(data: &Dataset, center: &Point, candidates: &[u32]) -> (u32, f64) {
    candidates
        .iter()
        .map(|&i| (i, data.spec.dist(center, &data.points[i as usize])))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .expect("non-empty candidate set")
}

/// Exhaustive range query: indices `i` with `rho(center, x_i) < radius`,
/// ascending.
pub fn linear_scan(data: &Dataset, q: &RangeQuery) -> Vec<u32> {
    data.points
        .iter()
        .enumerate()
        .filter(|(_, x)| data.spec.dist(&q.center, x) < q.radius)
        .map(|(i, _)| i as u32)
        .collect()
}

/// Exhaustive nearest neighbour, smallest index on ties.
pub fn linear_nn(data: &Dataset, center: &Point) -> Option<(u32, f64)> {
    let all: Vec<u32> = (0..data.len() as u32).collect();
    (!all.is_empty()).then(|| closest(data, center, &all))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{sample_dataset, DomainSpec};
    use crate::tree::{build, BuildParams, Strategy};

    fn small_tree() -> (Dataset, MetricTree) {
        let data = sample_dataset(&DomainSpec::hamming(12), 3, 512);
        let tree = build(&data, Strategy::Vp, BuildParams::default(), 4).unwrap();
        (data, tree)
    }

    #[test]
    fn huge_radius_opens_everything() {
        let (data, tree) = small_tree();
        let q = RangeQuery::new(data.points[0].clone(), 2.0).unwrap();
        let (m, t) = tree.range_search(&data, &q).unwrap();
        assert_eq!(m.len(), data.len());
        assert_eq!(t.bins_opened as usize, tree.leaf_count());
        assert_eq!(linear_scan(&data, &q), m);
    }

    #[test]
    fn tiny_radius_off_data_matches_nothing() {
        let data = Dataset::new(
            DomainSpec::hamming(4),
            ["0000", "0011", "0110"]
                .iter()
                .map(|s| Point::from_bit_str(s).unwrap())
                .collect(),
        )
        .unwrap();
        let tree = build(
            &data,
            Strategy::Vp,
            BuildParams {
                bin_capacity: 1,
                ..Default::default()
            },
            1,
        )
        .unwrap();
        let q = RangeQuery::new(Point::from_bit_str("1111").unwrap(), 0.2).unwrap();
        let (m, t) = tree.range_search(&data, &q).unwrap();
        assert!(m.is_empty());
        assert!(t.cost() >= t.result_size);
    }

    #[test]
    fn radius_must_be_positive() {
        assert!(RangeQuery::new(Point::Real(vec![0.0]), 0.0).is_err());
        assert!(RangeQuery::new(Point::Real(vec![0.0]), f64::NAN).is_err());
    }

    #[test]
    fn wrong_dataset_or_dimension_is_rejected() {
        let (data, tree) = small_tree();
        let q = RangeQuery::new(Point::from_bit_str("0101").unwrap(), 0.3).unwrap();
        assert!(matches!(
            tree.range_search(&data, &q),
            Err(MclError::DimensionMismatch { .. })
        ));
        let other = sample_dataset(&DomainSpec::hamming(12), 3, 10);
        let q = RangeQuery::new(data.points[0].clone(), 0.3).unwrap();
        assert!(matches!(
            tree.range_search(&other, &q),
            Err(MclError::DatasetSizeMismatch { .. })
        ));
    }

    #[test]
    fn nn_of_a_datapoint_is_itself() {
        let (data, tree) = small_tree();
        for i in [0u32, 17, 300] {
            let r = tree
                .nn_search(&data, &data.points[i as usize], &NnSchedule::default())
                .unwrap();
            // duplicates in a 12-bit cube are possible, so compare distances
            assert_eq!(r.distance, 0.0);
            assert!(r.index <= i);
            assert_eq!(data.points[r.index as usize], data.points[i as usize]);
        }
    }

    #[test]
    fn nn_ties_go_to_the_smaller_index() {
        let pts = ["1100", "0000", "0011"]
            .iter()
            .map(|s| Point::from_bit_str(s).unwrap())
            .collect();
        let data = Dataset::new(DomainSpec::hamming(4), pts).unwrap();
        let tree = build(
            &data,
            Strategy::Ball,
            BuildParams {
                bin_capacity: 1,
                ..Default::default()
            },
            2,
        )
        .unwrap();
        // 1111 is at distance 0.5 from both 1100 and 0011
        let r = tree
            .nn_search(
                &data,
                &Point::from_bit_str("1111").unwrap(),
                &NnSchedule::default(),
            )
            .unwrap();
        assert_eq!((r.index, r.distance), (0, 0.5));
        assert!(r.final_trace.bins_opened <= r.trace.bins_opened);
    }

    #[test]
    fn linear_scan_contract() {
        let empty = Dataset::new(DomainSpec::hamming(4), vec![]).unwrap();
        let q = RangeQuery::new(Point::from_bit_str("0000").unwrap(), 0.5).unwrap();
        assert!(linear_scan(&empty, &q).is_empty());
        assert_eq!(linear_nn(&empty, &q.center), None);
        let (data, _) = small_tree();
        let q = RangeQuery::new(data.points[5].clone(), 2.0).unwrap();
        assert_eq!(linear_scan(&data, &q), (0..512).collect::<Vec<u32>>());
    }
}
