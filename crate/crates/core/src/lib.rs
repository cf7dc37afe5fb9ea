//! Exact uniform sampling of set partitions with a prescribed number of
//! blocks.
//!
//! The sampler unrolls the recurrence `S(n,k) = S(n-1,k-1) + k·S(n-1,k)` and
//! decides each branch by comparing a lazily expanded uniform variate with
//! rigorous enclosures of the branching probability. The enclosures come
//! from saddle-point bounds of increasing order; when they are not tight
//! enough the exact big-integer ratio is used.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod action;
pub mod ball;
pub mod bitstream;
pub mod disk;
pub mod error;
pub mod oracle;
pub mod real;
pub mod sampler;
pub mod series;
pub mod stats;

pub use action::{ProblemSize, SaddleState, SaddleTarget};
pub use ball::Ball;
pub use bitstream::{
    compare_lazy, compare_rational, uniform_int, BitSource, Comparison, CostCounters, Direction,
    DyadicBound, LazyUniform,
};
pub use error::{Error, Result};
pub use oracle::{build_bounds, BoundPair, BoundRequest, Oracle, OracleConfig};
pub use real::{Interval, Real};
pub use sampler::{
    sample_boltzmann, sample_easy_coloring, sample_easy_forest, sample_exact_recursive,
    sample_hybrid, sample_walk, stirling_exact, HybridConfig, HybridSampler, SetPartition,
};
