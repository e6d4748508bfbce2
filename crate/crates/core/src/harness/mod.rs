//! The acquisition loop and the evaluation statistics built on top of it.

mod experiment;
mod stats;

pub use experiment::{
    run_experiment, run_experiment_detailed, run_prepared, strategy_seed, ExperimentTrace, LearningCurveRecord,
    PreparedSplit,
};
pub use stats::{
    aulc, average_ranks, mean_ranks, significance_stars, summarize, wilcoxon_signed_rank, wilcoxon_with, Direction,
    RankSummary, Summary, SummaryRow, WilcoxonMethod, WilcoxonResult, WinTieLoss, EXACT_LIMIT, SIGNIFICANCE_LEVELS,
};
