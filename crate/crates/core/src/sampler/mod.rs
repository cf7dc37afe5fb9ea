//! Samplers for set partitions with a prescribed number of blocks, and the
//! lattice-walk control family.

mod family;
mod methods;
mod partition;
mod stirling;

pub use family::{
    sample_walk, sample_walk_traced, unroll, Branch, FamilySpec, StirlingFamily, WalkFamily,
    WalkSample, WalkStep,
};
pub use methods::{
    coloring_in_regime, forest_in_regime, sample_boltzmann, sample_boltzmann_counted,
    sample_easy_coloring, sample_easy_forest, sample_exact_recursive, sample_hybrid,
    sample_hybrid_run, HybridConfig, HybridRun, HybridSampler, MoveTrace,
};
pub use partition::{enumerate_partitions, materialize, Decision, SetPartition};
pub use stirling::{
    stirling_alternating, stirling_by_excess, stirling_exact, stirling_recurrence, stirling_table,
    StirlingOracleExact,
};
