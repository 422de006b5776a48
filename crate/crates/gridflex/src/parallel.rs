use gridflex_core::reliability::{TrialOutcome, TrialRunner};
use rayon::prelude::*;

/// Runs trials on the current rayon pool. Outcomes come back in trial
/// order, so summaries match [`SequentialRunner`] bit for bit.
///
/// [`SequentialRunner`]: gridflex_core::reliability::SequentialRunner
#[derive(Clone, Copy, Debug, Default)]
pub struct RayonRunner;

impl TrialRunner for RayonRunner {
    fn run(&self, n: u64, trial: &(dyn Fn(u64) -> TrialOutcome + Sync)) -> Vec<TrialOutcome> {
        (0..n).into_par_iter().map(trial).collect()
    }
}
