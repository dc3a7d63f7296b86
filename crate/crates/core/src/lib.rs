//! Maximization of monotone submodular functions under a knapsack
//! constraint: the density-greedy heuristic and its lazy equivalent,
//! partial-enumeration greedy, Greedy+Singleton, piecewise-exponential
//! bounding functions with an empirical dominance verifier, brute-force
//! ground truth, seeded instance families, and a generator for the
//! worst-case instance that pins Greedy+Singleton below 0.42945.

pub mod adversarial;
pub mod algorithms;
pub mod bounding;
pub mod element;
pub mod error;
pub mod exact;
pub mod families;
pub mod greedy;
pub mod instance;
pub mod interval;
pub mod oracle;

pub use adversarial::{
    gen_adversarial, verify_adversarial, AdversarialInstance, AdversarialParams,
    AdversarialReport, BETA,
};
pub use algorithms::{
    count_complexity, enum_greedy, fit_loglog_slope, greedy_plus_singleton,
    greedy_plus_singleton_from_trace, Algorithm, AlgorithmResult, BestSeed,
};
pub use bounding::{
    build_bounding, build_partition_auto, build_partition_two_block, verify_dominance,
    BoundingFunction, BoundingSegment, DominanceReport, Partition,
};
pub use element::{ElementId, ElementSet};
pub use error::{Error, Result};
pub use exact::{brute_force_opt, ratio_sweep, RatioRecord, SweepConfig, BRUTE_FORCE_MAX_N};
pub use families::Family;
pub use greedy::{
    check_density_bound, greedy, greedy_lazy, run_greedy, value_function, ConsideredEntry,
    GreedyTrace, GreedyVariant, PiecewiseValueFunction, SelectionEntry,
};
pub use instance::{weight_within_capacity, Instance, Problem, FEAS_TOL};
pub use interval::{measure_union, IntervalSet};
pub use oracle::{
    check_monotone_submodular, Contracted, OracleKind, SetFunctionOracle, StructureReport,
    ValueOracle,
};
