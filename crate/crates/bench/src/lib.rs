//! Fixtures shared by the benchmarks.

use setpart::action::{solve_saddle, SaddleTarget};
use setpart::sampler::{sample_hybrid, HybridConfig};
use setpart::{BitSource, CostCounters, ProblemSize, SaddleState};

/// `(n, ⌊n/2⌋)`, the size used by the scaling experiments.
pub fn balanced(n: u64) -> ProblemSize {
    ProblemSize::new(n, n / 2).expect("n >= 2")
}

/// Saddle point of `size`, solved from scratch.
pub fn saddle(size: ProblemSize) -> SaddleState {
    solve_saddle(size, SaddleTarget::Integral, None)
}

/// Counters of one default hybrid run.
pub fn hybrid_counters(size: ProblemSize, seed: u64) -> CostCounters {
    let mut src = BitSource::new(seed);
    sample_hybrid(size, &mut src, &HybridConfig::default())
        .expect("valid size")
        .1
}
