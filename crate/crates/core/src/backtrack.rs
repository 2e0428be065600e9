//! Exact `E_{x in [n]^V} prod_i g_i(x restricted to S_i)` by backtracking.
//!
//! Variables are placed greedily so factors complete early; a zero factor
//! prunes its subtree. Homomorphism densities and pattern probabilities are
//! both instances.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{powi, Scalar};

struct Plan {
    order: Vec<usize>,
    /// Per level: `(factor, levels of its variables in factor order)`.
    completes: Vec<Vec<(usize, Vec<usize>)>>,
}

fn plan(variables: usize, factors: &[Vec<usize>]) -> Plan {
    let mut incident = vec![Vec::new(); variables];
    for (i, f) in factors.iter().enumerate() {
        for &u in f {
            if !incident[u].contains(&i) {
                incident[u].push(i);
            }
        }
    }
    let mut remaining: Vec<usize> = factors
        .iter()
        .map(|f| {
            let mut g = f.clone();
            g.sort_unstable();
            g.dedup();
            g.len()
        })
        .collect();
    let sizes = remaining.clone();
    let mut placed = vec![false; variables];
    let mut level_of = vec![usize::MAX; variables];
    let mut order = Vec::new();
    let mut completes = Vec::new();
    loop {
        // Most completions, then most started factors, then highest degree, then lowest index.
        let best = (0..variables)
            .filter(|&u| !placed[u] && !incident[u].is_empty())
            .max_by_key(|&u| {
                let done = incident[u].iter().filter(|&&e| remaining[e] == 1).count();
                let started = incident[u].iter().filter(|&&e| remaining[e] < sizes[e]).count();
                (done, started, incident[u].len(), std::cmp::Reverse(u))
            });
        let Some(u) = best else { break };
        placed[u] = true;
        level_of[u] = order.len();
        order.push(u);
        let mut now = Vec::new();
        for &e in &incident[u] {
            remaining[e] -= 1;
            if remaining[e] == 0 {
                now.push((e, factors[e].iter().map(|&w| level_of[w]).collect()));
            }
        }
        completes.push(now);
    }
    Plan { order, completes }
}

struct Search<'a, T, E> {
    side: usize,
    plan: &'a Plan,
    eval: &'a E,
    counter: &'a AtomicU64,
    budget: u64,
    what: &'static str,
    _marker: std::marker::PhantomData<T>,
}

const FLUSH_EVERY: u64 = 1 << 12;

impl<T, E> Search<'_, T, E>
where
    T: Scalar,
    E: Fn(usize, &[usize]) -> T + Sync,
{
    fn factors_at(&self, level: usize, assign: &[usize], buf: &mut Vec<usize>, local: &mut u64) -> T {
        let mut prod = T::one();
        for (factor, levels) in &self.plan.completes[level] {
            buf.clear();
            buf.extend(levels.iter().map(|&l| assign[l]));
            *local += 1;
            let val = (self.eval)(*factor, buf);
            if val.is_zero() {
                return T::zero();
            }
            prod = prod * val;
        }
        prod
    }

    fn flush(&self, local: &mut u64) -> Result<()> {
        let total = self.counter.fetch_add(*local, Ordering::Relaxed) + *local;
        *local = 0;
        if total > self.budget {
            return Err(Error::Budget { what: self.what, needed: total as u128, cap: self.budget as u128 });
        }
        Ok(())
    }

    fn descend(&self, level: usize, assign: &mut [usize], buf: &mut Vec<usize>, local: &mut u64) -> Result<T> {
        if level == self.plan.order.len() {
            return Ok(T::one());
        }
        let mut acc = T::zero();
        for v in 0..self.side {
            assign[level] = v;
            let prod = self.factors_at(level, assign, buf, local);
            if *local >= FLUSH_EVERY {
                self.flush(local)?;
            }
            if prod.is_zero() {
                continue;
            }
            acc = acc + prod * self.descend(level + 1, assign, buf, local)?;
        }
        Ok(acc)
    }
}

/// Mean over `[side]^variables` of the product of `eval(i, x|factors[i])`.
///
/// Variables in no factor average out and are skipped. `budget` caps the
/// number of factor evaluations actually performed.
pub(crate) fn product_mean<T, E>(
    variables: usize,
    side: usize,
    factors: &[Vec<usize>],
    eval: E,
    budget: u64,
    what: &'static str,
) -> Result<T>
where
    T: Scalar,
    E: Fn(usize, &[usize]) -> T + Sync,
{
    if side == 0 {
        return Err(Error::param("cannot average over an empty range"));
    }
    let plan = plan(variables, factors);
    let depth = plan.order.len();
    if depth == 0 {
        // Only constant factors remain.
        let mut prod = T::one();
        for i in 0..factors.len() {
            prod = prod * eval(i, &[]);
        }
        return Ok(prod);
    }
    let counter = AtomicU64::new(0);
    let search = Search {
        side,
        plan: &plan,
        eval: &eval,
        counter: &counter,
        budget,
        what,
        _marker: std::marker::PhantomData,
    };
    let parts: Vec<Result<T>> = (0..side)
        .into_par_iter()
        .map(|first| {
            let mut assign = vec![0usize; depth];
            let mut buf = Vec::new();
            let mut local = 0u64;
            assign[0] = first;
            let prod = search.factors_at(0, &assign, &mut buf, &mut local);
            let value = if prod.is_zero() {
                T::zero()
            } else {
                prod * search.descend(1, &mut assign, &mut buf, &mut local)?
            };
            search.flush(&mut local)?;
            Ok(value)
        })
        .collect();
    let sum = T::sum_iter(parts.into_iter().collect::<Result<Vec<T>>>()?);
    let mut constant = T::one();
    for (i, f) in factors.iter().enumerate() {
        if f.is_empty() {
            constant = constant * eval(i, &[]);
        }
    }
    Ok(constant * sum / powi(&T::from_int(side as i64), depth as u32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_factors_multiply() {
        // E_{x,y in [3]} x * y = 1 * 1
        let m: f64 = product_mean(2, 3, &[vec![0], vec![1]], |_, v| v[0] as f64, u64::MAX, "t").unwrap();
        assert!((m - 1.0).abs() < 1e-15);
        // unused variable and repeated factor variables
        let m: f64 = product_mean(3, 2, &[vec![2, 2]], |_, v| (v[0] + v[1]) as f64, u64::MAX, "t").unwrap();
        assert!((m - 1.0).abs() < 1e-15);
    }

    #[test]
    fn budget_enforced() {
        let r: Result<f64> = product_mean(6, 4, &[vec![0, 1, 2, 3, 4, 5]], |_, _| 1.0, 100, "t");
        assert!(matches!(r, Err(Error::Budget { .. })));
    }
}
