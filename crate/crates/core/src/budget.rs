//! Evaluation limits shared by the enumeration kernels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_EVAL_BUDGET: u64 = 1_000_000_000;
pub const DEFAULT_MAX_GOWERS_K: u32 = 5;
pub const DEFAULT_DENSE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Pointwise evaluations (multiplications, predicate calls) allowed per call.
    pub eval_budget: u64,
    pub max_gowers_k: u32,
    /// Largest dense tensor, in entries.
    pub dense_cap: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            eval_budget: DEFAULT_EVAL_BUDGET,
            max_gowers_k: DEFAULT_MAX_GOWERS_K,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }
}

impl Limits {
    pub fn check(&self, what: &'static str, needed: u128) -> Result<()> {
        if needed > self.eval_budget as u128 {
            Err(Error::Budget { what, needed, cap: self.eval_budget as u128 })
        } else {
            Ok(())
        }
    }
}

/// `base^exp` saturating in u128, for cost estimates.
pub fn cost_pow(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}

/// Sums `f(0..n)` in parallel, reducing in index order so results do not
/// depend on the thread count.
pub(crate) fn ordered_sum<T, F>(n: usize, f: F) -> T
where
    T: Scalar,
    F: Fn(usize) -> T + Sync + Send,
{
    let parts: Vec<T> = (0..n).into_par_iter().map(f).collect();
    T::sum_iter(parts)
}
