//! Exact recovery of binary sequences from distance-oracle queries.
//!
//! The crate provides exact edit, p-DTW, and discrete Frechet distances
//! over binary and extended alphabets, a simulated oracle with query
//! accounting, adaptive and non-adaptive recovery strategies for each
//! oracle, a run-level DTW solver through the min 1-separated sum problem,
//! a zeroth-order descent framework, and a brute-force verification lab.

pub mod descent;
pub mod distances;
pub mod lab;
pub mod mss;
pub mod oracle;
pub mod rational;
pub mod recovery;
pub mod sequence;

pub use distances::{
    dtw_distance, edit_distance, frechet_distance, matching_cost, optimal_matching, DistanceError,
    Matching, PDtwValue, PNorm,
};
pub use mss::{dtw_via_mss, dtw_via_mss_traced, mss_solve, MssError, MssInstance};
pub use oracle::{
    DistanceKind, OracleError, OracleSession, RecoveryLevel, RecoveryReport, SessionMode,
};
pub use rational::ExactRational;
pub use recovery::{
    declared_bound, required_query_cap, run_strategy, run_strategy_with, strategy_ids,
    strategy_info, RecoveryError, StrategyInfo, STRATEGIES,
};
pub use sequence::{
    all_binary_of_len, all_binary_up_to, is_subsequence, ParseError, RunDecomposition, Sequence,
    Symbol,
};
