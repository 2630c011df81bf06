//! Exact similarity search over high-dimensional metric-measure domains.
//!
//! The crate builds binary metric trees (vantage-pair, covering-ball and
//! pivot splits) and searches them exactly, counting every decision
//! evaluation and distance computation. Alongside the index it ships the
//! measurement tools used to study why such indexes degrade with dimension:
//! concentration-function bounds and estimators, nearest-neighbour radius
//! statistics, and VC-dimension utilities.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod binomial;
pub mod concentration;
pub mod decision;
pub mod domain;
pub mod error;
pub mod io;
pub mod rng;
pub mod tree;
pub mod vc;

pub use decision::DecisionFunction;
pub use domain::{Dataset, DomainKind, DomainSpec, Point};
pub use error::{MclError, Result};
pub use tree::{build, BuildParams, MetricTree, NnSchedule, RangeQuery, SearchTrace, Strategy};

/// Library version recorded in experiment metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
