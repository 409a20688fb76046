//! Independent jobs (sessions, replications, seed sweeps) run sequentially
//! or on a rayon pool. Results always come back in job order, so both paths
//! produce identical output.

use crate::engine::{run_session, SessionConfig, SessionLog};
use crate::error::EngineError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Worker threads; 0 lets rayon decide. Without the `parallel` feature
    /// this runs sequentially.
    Parallel(usize),
    #[default]
    Auto,
}

impl Execution {
    pub fn from_threads(threads: usize) -> Self {
        match threads {
            1 => Execution::Sequential,
            n => Execution::Parallel(n),
        }
    }

    pub fn is_parallel(&self) -> bool {
        cfg!(feature = "parallel") && !matches!(self, Execution::Sequential)
    }
}

/// Maps `f` over `jobs`, preserving order.
pub fn run_batch<T, R, F>(jobs: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        match exec {
            Execution::Sequential => {}
            Execution::Auto | Execution::Parallel(0) => return jobs.par_iter().map(&f).collect(),
            Execution::Parallel(n) => {
                if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                    return pool.install(|| jobs.par_iter().map(&f).collect());
                }
            }
        }
    }
    let _ = exec;
    jobs.iter().map(f).collect()
}

/// Runs sessions and returns their logs ordered by `(seed, session)`.
pub fn run_sessions(configs: &[SessionConfig], exec: Execution) -> Result<Vec<SessionLog>, EngineError> {
    let mut order: Vec<&SessionConfig> = configs.iter().collect();
    order.sort_by_key(|c| (c.seed, c.session));
    let logs = run_batch(&order, exec, |c| run_session(c));
    logs.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;

    #[test]
    fn order_is_preserved() {
        let jobs: Vec<u64> = (0..200).collect();
        let seq = run_batch(&jobs, Execution::Sequential, |x| x * x);
        let par = run_batch(&jobs, Execution::Parallel(4), |x| x * x);
        assert_eq!(seq, par);
    }

    #[test]
    fn sessions_match_across_execution_modes() {
        let c = Config::builtin();
        let configs: Vec<_> = c
            .sessions
            .iter()
            .map(|s| c.session_config(s, Some(5)).unwrap())
            .collect();
        let a = run_sessions(&configs, Execution::Sequential).unwrap();
        let b = run_sessions(&configs, Execution::Parallel(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|l| l.session).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5, 6]);
    }
}
