//! Independent simulated trials, run in parallel when the `parallel`
//! feature is on.

use crate::domain::{Agent, Gamble};
use crate::error::Result;
use crate::reu::reu;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// What `Parallel` resolves to in this build.
    pub fn effective(self) -> Execution {
        if cfg!(feature = "parallel") {
            self
        } else {
            Execution::Sequential
        }
    }
}

/// `f(0), ..., f(n - 1)` in index order.
pub fn map_trials<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec.effective() {
        Execution::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel => unreachable!(),
    }
}

pub fn reu_many(agent: &Agent, gambles: &[Gamble], exec: Execution) -> Result<Vec<f64>> {
    map_trials(gambles.len(), exec, |i| reu(agent, &gambles[i])).into_iter().collect()
}
