//! Independent reference computations: exact solution sets and selected
//! points of catalogue problems, the regularization path, and checkers for
//! the real-sequence lemmas.

mod affine;
mod lemmas;
mod oracle;

pub use lemmas::{
    lemma3_check, lemma5_bound, lemma5_simulate, lemma5_trajectory, LemmaFiveHypotheses, LemmaFiveInstance,
    LemmaFiveReport, LemmaThreeReport, SequenceKind, LEMMA5_BOUND_TOL,
};
pub use oracle::{
    distance_to_solution_set, long_run_numeric, max_pairwise_distance, regularization_path, solve_oracle,
    solve_oracle_or_numeric, LongRunOptions, OracleMethod, SolutionOracle, SolutionSet, MAX_ENUMERATION_DIM,
    ORACLE_MEMBERSHIP_TOL,
};
