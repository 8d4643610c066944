//! Monte Carlo and single-path experiments.
//!
//! Every experiment draws path `i` from `path_seed(seed, i)` and reduces in
//! index order, so results do not depend on the worker count.

mod blocks;
mod clt;
mod path;
mod recurrence;

pub use blocks::{
    block_decomposition_error, block_error_experiment, block_schedule, q_growth_exponent, Block, BlockErrorReport,
    BlockSchedule, ScheduleCursor,
};
pub use clt::{
    clt_experiment, lil_diagnostic, moment_growth_experiment, variance_monte_carlo, CltReport, LilReport,
    MomentGrowthReport, MonteCarloVariance, MIN_CLT_SAMPLES,
};
pub use path::{information_path, path_information, smb_experiment, PathStats, SmbReport};
pub use recurrence::{
    naive_recurrence_time, recurrence_experiment, recurrence_time, RecurrenceOptions, RecurrenceReport, RollingMatcher,
    DEFAULT_SCAN_LIMIT, MAX_NOT_FOUND_RATE,
};
