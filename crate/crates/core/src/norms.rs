//! Octahedral norms and inner products, `d`-cut norms (exact and alternating
//! maximization), discrepancy, and cut-type norms of linear systems.

use std::collections::BTreeMap;

use itertools::Itertools;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::{cost_pow, Limits};
use crate::error::{Error, Result};
use crate::function::GroupFunction;
use crate::hypergraph::Hypergraph;
use crate::linear_systems::{LinearSystem, VarId};
use crate::sampling;
use crate::scalar::{nonnegative_root, Scalar};
use crate::tensor::{increment_row_major, DenseTensor, TensorView};

pub const DEFAULT_EXACT_BITS_CAP: u32 = 24;
pub const DEFAULT_SWEEPS_CAP: u32 = 100;
pub const DEFAULT_RESTARTS: u32 = 16;

/// Search limits for the cut engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineBudget {
    /// Largest number of binary decisions the exact engines may enumerate.
    pub exact_bits_cap: u32,
    pub sweeps_cap: u32,
    pub restarts: u32,
    pub seed: u64,
}

impl Default for EngineBudget {
    fn default() -> Self {
        EngineBudget {
            exact_bits_cap: DEFAULT_EXACT_BITS_CAP,
            sweeps_cap: DEFAULT_SWEEPS_CAP,
            restarts: DEFAULT_RESTARTS,
            seed: 0,
        }
    }
}

impl EngineBudget {
    fn validate(&self) -> Result<()> {
        if self.exact_bits_cap == 0 || self.exact_bits_cap > 40 || self.sweeps_cap == 0 || self.restarts == 0 {
            return Err(Error::param("engine caps must be positive (and exact_bits_cap at most 40)"));
        }
        Ok(())
    }

    fn restart_seed(&self, restart: u32) -> u64 {
        self.seed ^ (restart as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Exact,
    #[serde(rename = "alt")]
    Alternating,
}

// ---------------------------------------------------------------------------
// Octahedral norms

/// `<(f_omega)>_{Oct^k}`; `functions[omega]` is evaluated at `x^(omega)` with bit
/// `i` of `omega` choosing the copy of coordinate `i`.
///
/// Computed by eliminating one coordinate pair at a time, `O(2^k |V|^{2k-1})`.
pub fn oct_inner_product<T: Scalar>(functions: &[DenseTensor<T>], limits: &Limits) -> Result<T> {
    let first = functions.first().ok_or_else(|| Error::param("no functions given"))?;
    let (k, n) = (first.arity(), first.side());
    if functions.len() != 1 << k {
        return Err(Error::param(format!("need 2^{k} functions, got {}", functions.len())));
    }
    if functions.iter().any(|f| f.arity() != k || f.side() != n) {
        return Err(Error::param("all functions must share arity and vertex set"));
    }
    limits.check("octahedral contraction", cost_pow(n, 2 * k - 1).saturating_mul(1 << k))?;
    let slices: Vec<&[T]> = functions.iter().map(|f| f.data()).collect();
    Ok(oct_top(&slices, k, n))
}

fn oct_top<T: Scalar>(fs: &[&[T]], k: usize, n: usize) -> T {
    if k == 1 {
        return oct_base(fs, n);
    }
    let parts: Vec<T> = (0..n).into_par_iter().map(|a| oct_fix_first(fs, k, n, a)).collect();
    T::sum_iter(parts) / T::from_int((n * n) as i64)
}

fn oct_base<T: Scalar>(fs: &[&[T]], n: usize) -> T {
    let m0 = T::sum_iter(fs[0].iter().cloned());
    let m1 = T::sum_iter(fs[1].iter().cloned());
    m0 * m1 / T::from_int((n * n) as i64)
}

/// Sum over `b` of the contracted product with the first coordinate pair set to `(a, b)`.
fn oct_fix_first<T: Scalar>(fs: &[&[T]], k: usize, n: usize, a: usize) -> T {
    let block = cost_pow(n, k - 1) as usize;
    let half = fs.len() / 2;
    let mut parts = Vec::with_capacity(n);
    let mut gs: Vec<Vec<T>> = vec![Vec::with_capacity(block); half];
    for b in 0..n {
        for (w, g) in gs.iter_mut().enumerate() {
            let f0 = &fs[2 * w][a * block..(a + 1) * block];
            let f1 = &fs[2 * w + 1][b * block..(b + 1) * block];
            g.clear();
            g.extend(f0.iter().zip(f1).map(|(u, v)| u.clone() * v.clone()));
        }
        let views: Vec<&[T]> = gs.iter().map(Vec::as_slice).collect();
        parts.push(oct_rec(&views, k - 1, n));
    }
    T::sum_iter(parts)
}

fn oct_rec<T: Scalar>(fs: &[&[T]], k: usize, n: usize) -> T {
    if k == 1 {
        return oct_base(fs, n);
    }
    let parts: Vec<T> = (0..n).map(|a| oct_fix_first(fs, k, n, a)).collect();
    T::sum_iter(parts) / T::from_int((n * n) as i64)
}

/// `||f||_{Oct^k}^{2^k}`.
pub fn oct_norm_power<T: Scalar>(f: &DenseTensor<T>, limits: &Limits) -> Result<T> {
    let copies = vec![f.clone(); 1 << f.arity()];
    oct_inner_product(&copies, limits)
}

pub fn oct_norm<T: Scalar>(f: &DenseTensor<T>, limits: &Limits) -> Result<f64> {
    nonnegative_root(oct_norm_power(f, limits)?.to_f64(), 1 << f.arity())
}

/// Gowers–Cauchy–Schwarz: inner product against the product of norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GcsReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn gcs_check<T: Scalar>(functions: &[DenseTensor<T>], limits: &Limits) -> Result<GcsReport> {
    let lhs = oct_inner_product(functions, limits)?.to_f64();
    let rhs = functions
        .iter()
        .map(|f| oct_norm(f, limits))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .product::<f64>();
    Ok(GcsReport { lhs, rhs, holds: lhs <= rhs + 1e-9 })
}

// ---------------------------------------------------------------------------
// Cut norms

/// Sets `S_B subset V^B`, one per `B` in `binom([k], d)` (lexicographic), and
/// the value `|E f(x) prod_B S_B(x_B)|` they achieve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutWitness<T> {
    pub k: usize,
    pub d: usize,
    pub side: usize,
    pub blocks: Vec<Vec<usize>>,
    /// Membership over `V^B` in row-major order.
    pub sets: Vec<Vec<bool>>,
    pub value: T,
    /// Sign of the un-normalized expectation (`+1` or `-1`).
    pub sign: i8,
}

pub fn cut_blocks(k: usize, d: usize) -> Result<Vec<Vec<usize>>> {
    if d == 0 || d >= k {
        return Err(Error::param(format!("cut norms need 1 <= d < k, got k={k}, d={d}")));
    }
    Ok((0..k).combinations(d).collect())
}

/// Row-major index of `x_B` in `V^B`.
#[inline]
fn block_index(x: &[usize], block: &[usize], n: usize) -> usize {
    block.iter().fold(0, |acc, &i| acc * n + x[i])
}

/// `E_x f(x) prod_B S_B(x_B)`, signed.
pub fn cut_value<T: Scalar, V: TensorView<T> + ?Sized>(f: &V, d: usize, sets: &[Vec<bool>]) -> Result<T> {
    let (k, n) = (f.arity(), f.side());
    let blocks = cut_blocks(k, d)?;
    let cells = cost_pow(n, d) as usize;
    if sets.len() != blocks.len() || sets.iter().any(|s| s.len() != cells) {
        return Err(Error::param("cut sets do not match the block structure"));
    }
    let parts: Vec<T> = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut x = vec![0usize; k];
            x[0] = first;
            let mut acc = Vec::new();
            loop {
                if blocks.iter().zip(sets).all(|(b, s)| s[block_index(&x, b, n)]) {
                    acc.push(f.value(&x));
                }
                if !increment_row_major(&mut x[1..], n) {
                    break;
                }
            }
            T::sum_iter(acc)
        })
        .collect();
    Ok(T::sum_iter(parts) / T::from_int(f.entries() as i64))
}

fn witness_from<T: Scalar, V: TensorView<T> + ?Sized>(
    f: &V,
    d: usize,
    blocks: Vec<Vec<usize>>,
    sets: Vec<Vec<bool>>,
) -> Result<CutWitness<T>> {
    let signed = cut_value(f, d, &sets)?;
    let sign = if signed >= T::zero() { 1 } else { -1 };
    Ok(CutWitness { k: f.arity(), d, side: f.side(), blocks, sets, value: signed.abs(), sign })
}

/// Global maximum over all set families.
///
/// Enumerates every choice for all blocks but the last; the last block is then
/// optimal in closed form (all positive or all negative marginals).
pub fn cut_norm_exact<T: Scalar, V: TensorView<T> + ?Sized>(
    f: &V,
    d: usize,
    budget: &EngineBudget,
    limits: &Limits,
) -> Result<CutWitness<T>> {
    budget.validate()?;
    let (k, n) = (f.arity(), f.side());
    let blocks = cut_blocks(k, d)?;
    let cells = cost_pow(n, d);
    let bits = cells.saturating_mul(blocks.len() as u128);
    if bits > budget.exact_bits_cap as u128 {
        return Err(Error::Budget { what: "exact cut decision bits", needed: bits, cap: budget.exact_bits_cap as u128 });
    }
    let cells = cells as usize;
    let dense = DenseTensor::from_view(f, limits.dense_cap)?;
    let m = blocks.len();
    let free_bits = (m - 1) * cells;
    limits.check("exact cut evaluations", (1u128 << free_bits).saturating_mul(f.entries()))?;
    // Block cell of every tuple, tuple-major.
    let mut cell_of = Vec::with_capacity(dense.data().len() * m);
    let mut x = vec![0usize; k];
    loop {
        cell_of.extend(blocks.iter().map(|b| block_index(&x, b, n)));
        if !increment_row_major(&mut x, n) {
            break;
        }
    }
    let data = dense.data();
    let score = |choice: u64, marginal: &mut Vec<T>| -> (T, bool) {
        marginal.iter_mut().for_each(|v| *v = T::zero());
        for (t, value) in data.iter().enumerate() {
            let cells_t = &cell_of[t * m..(t + 1) * m];
            if cells_t[..m - 1].iter().enumerate().all(|(b, &c)| choice >> (b * cells + c) & 1 == 1) {
                marginal[cells_t[m - 1]] = marginal[cells_t[m - 1]].clone() + value.clone();
            }
        }
        let pos = T::sum_iter(marginal.iter().filter(|v| **v > T::zero()).cloned());
        let neg = T::sum_iter(marginal.iter().filter(|v| **v < T::zero()).cloned());
        if pos >= -neg.clone() { (pos, true) } else { (-neg, false) }
    };
    let (_, best, positive) = (0..1u64 << free_bits)
        .into_par_iter()
        .map_init(
            || vec![T::zero(); cells],
            |marginal, choice| {
                let (value, positive) = score(choice, marginal);
                (value, choice, positive)
            },
        )
        .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
        .expect("at least one choice");
    let mut marginal = vec![T::zero(); cells];
    score(best, &mut marginal);
    let mut sets: Vec<Vec<bool>> = (0..m - 1)
        .map(|b| (0..cells).map(|c| best >> (b * cells + c) & 1 == 1).collect())
        .collect();
    sets.push(
        marginal
            .iter()
            .map(|v| if positive { *v >= T::zero() } else { *v <= T::zero() })
            .collect(),
    );
    witness_from(f, d, blocks, sets)
}

/// Value history of one alternating-maximization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTrace {
    pub restart: u32,
    pub sign: i8,
    /// Objective after initialization, then after each sweep.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicCut<T> {
    pub witness: CutWitness<T>,
    pub traces: Vec<SweepTrace>,
}

/// Lower bound on the cut norm by alternating block-exact maximization.
///
/// Each restart starts from random sets (restart 0 from `init` when given) and
/// is run for both signs. A block update keeps exactly the cells whose signed
/// marginal is nonnegative, so the objective never decreases.
pub fn cut_norm_heuristic<T: Scalar, V: TensorView<T> + ?Sized>(
    f: &V,
    d: usize,
    budget: &EngineBudget,
    init: Option<&[Vec<bool>]>,
) -> Result<HeuristicCut<T>> {
    budget.validate()?;
    let (k, n) = (f.arity(), f.side());
    let blocks = cut_blocks(k, d)?;
    let cells = cost_pow(n, d) as usize;
    if let Some(sets) = init {
        if sets.len() != blocks.len() || sets.iter().any(|s| s.len() != cells) {
            return Err(Error::param("initial cut sets do not match the block structure"));
        }
    }
    let runs: Vec<(u32, i8)> = (0..budget.restarts).flat_map(|r| [(r, 1), (r, -1)]).collect();
    let results: Vec<(T, Vec<Vec<bool>>, SweepTrace)> = runs
        .par_iter()
        .map(|&(restart, sign)| {
            let start = match (restart, init) {
                (0, Some(sets)) => sets.to_vec(),
                _ => {
                    let mut rng = sampling::rng(budget.restart_seed(restart));
                    (0..blocks.len()).map(|_| (0..cells).map(|_| rng.random::<bool>()).collect()).collect()
                }
            };
            alternate(f, &blocks, start, sign, budget.sweeps_cap, restart)
        })
        .collect();
    let mut best: Option<(T, Vec<Vec<bool>>)> = None;
    let mut traces = Vec::with_capacity(results.len());
    for (value, sets, trace) in results {
        if best.as_ref().is_none_or(|(v, _)| value > *v) {
            best = Some((value, sets));
        }
        traces.push(trace);
    }
    let (_, sets) = best.expect("at least one restart");
    Ok(HeuristicCut { witness: witness_from(f, d, blocks, sets)?, traces })
}

fn alternate<T: Scalar, V: TensorView<T> + ?Sized>(
    f: &V,
    blocks: &[Vec<usize>],
    mut sets: Vec<Vec<bool>>,
    sign: i8,
    sweeps_cap: u32,
    restart: u32,
) -> (T, Vec<Vec<bool>>, SweepTrace) {
    let (k, n) = (f.arity(), f.side());
    let s = if sign > 0 { T::one() } else { -T::one() };
    let total = T::from_int(f.entries() as i64);
    let cells = sets[0].len();
    let mut marginal = vec![T::zero(); cells];
    // Initial objective: the signed marginal of block 0 summed over its current set.
    let objective = |marginal: &[T], set: &[bool]| {
        T::sum_iter(marginal.iter().zip(set).filter(|(_, &b)| b).map(|(v, _)| v.clone()))
    };
    block_marginal(f, blocks, &sets, 0, &s, &mut marginal, k, n);
    let mut value = objective(&marginal, &sets[0]) / total.clone();
    let mut values = vec![value.to_f64()];
    for _ in 0..sweeps_cap {
        let mut changed = false;
        for b in 0..blocks.len() {
            block_marginal(f, blocks, &sets, b, &s, &mut marginal, k, n);
            let next: Vec<bool> = marginal.iter().map(|v| *v >= T::zero()).collect();
            if next != sets[b] {
                changed = true;
                sets[b] = next;
            }
            value = objective(&marginal, &sets[b]) / total.clone();
        }
        let v = value.to_f64();
        let prev = *values.last().expect("trace starts non-empty");
        assert!(v >= prev - 1e-12 * (1.0 + prev.abs()), "alternating maximization decreased: {prev} -> {v}");
        values.push(v);
        if !changed {
            break;
        }
    }
    (value, sets, SweepTrace { restart, sign, values })
}

/// `s * E_{x : x_B = z} f(x) prod_{B' != B} S_B'(x_B')`, unnormalized, for every cell `z` of block `b`.
#[allow(clippy::too_many_arguments)]
fn block_marginal<T: Scalar, V: TensorView<T> + ?Sized>(
    f: &V,
    blocks: &[Vec<usize>],
    sets: &[Vec<bool>],
    b: usize,
    s: &T,
    out: &mut [T],
    k: usize,
    n: usize,
) {
    let parts: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut acc = vec![T::zero(); out.len()];
            let mut x = vec![0usize; k];
            x[0] = first;
            loop {
                let keep = blocks
                    .iter()
                    .zip(sets)
                    .enumerate()
                    .all(|(i, (blk, set))| i == b || set[block_index(&x, blk, n)]);
                if keep {
                    let z = block_index(&x, &blocks[b], n);
                    acc[z] = acc[z].clone() + f.value(&x);
                }
                if !increment_row_major(&mut x[1..], n) {
                    break;
                }
            }
            acc
        })
        .collect();
    for (z, slot) in out.iter_mut().enumerate() {
        *slot = s.clone() * T::sum_iter(parts.iter().map(|p| p[z].clone()));
    }
}

/// `disc_d(H) = ||H - delta(H)||_{cut^k_d}`.
pub fn discrepancy<T: Scalar>(
    h: &Hypergraph<T>,
    d: usize,
    engine: Engine,
    budget: &EngineBudget,
    limits: &Limits,
) -> Result<CutWitness<T>> {
    let balanced = h.balanced(limits)?;
    match engine {
        Engine::Exact => cut_norm_exact(&balanced, d, budget, limits),
        Engine::Alternating => Ok(cut_norm_heuristic(&balanced, d, budget, None)?.witness),
    }
}

// ---------------------------------------------------------------------------
// Cut-type norms of linear systems

/// `u_phi : G -> {-1, 1}` per form and the value they achieve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemCutWitness<T> {
    pub value: T,
    pub signs: Vec<Vec<i8>>,
    pub traces: Vec<Vec<f64>>,
}

/// `(Sigma_{V_0}(x), phi_1(x), .., phi_m(x))` buckets with weight `f(Sigma) * count / N`.
struct Buckets<T> {
    keys: Vec<Vec<u32>>,
    weights: Vec<T>,
}

fn bucketize<T: Scalar>(f: &GroupFunction<T>, system: &LinearSystem, limits: &Limits) -> Result<Buckets<T>> {
    let group = f.group();
    let n = group.order();
    let vars = system.variables();
    let assignments = cost_pow(n, vars.len());
    limits.check("system cut assignments", assignments)?;
    let index = |v| vars.binary_search(v).expect("variables cover supports");
    let v0: Vec<VarId> = (1..=system.k as u32).map(|i| VarId::new(0, i)).collect();
    let mut supports: Vec<Vec<usize>> = vec![v0.iter().map(index).collect()];
    supports.extend(system.forms.iter().map(|phi| phi.support().iter().map(index).collect()));
    let mut counts: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
    let mut x = vec![0usize; vars.len()];
    loop {
        let key: Vec<u32> = supports.iter().map(|s| group.sum(s.iter().map(|&i| x[i])) as u32).collect();
        *counts.entry(key).or_insert(0) += 1;
        if !increment_row_major(&mut x, n) {
            break;
        }
    }
    let total = T::from_int(assignments as i64);
    let (keys, weights) = counts
        .into_iter()
        .map(|(key, c)| {
            let w = f.value(key[0] as usize).clone() * T::from_int(c as i64) / total.clone();
            (key, w)
        })
        .unzip();
    Ok(Buckets { keys, weights })
}

/// Signed per-value totals for form `target` given the other forms' signs.
fn form_marginal<T: Scalar>(buckets: &Buckets<T>, signs: &[Vec<i8>], target: usize, n: usize) -> Vec<T> {
    let mut per_value: Vec<Vec<T>> = vec![Vec::new(); n];
    for (key, w) in buckets.keys.iter().zip(&buckets.weights) {
        let negative = signs
            .iter()
            .enumerate()
            .filter(|&(i, s)| i != target && s[key[i + 1] as usize] < 0)
            .count()
            % 2
            == 1;
        per_value[key[target + 1] as usize].push(if negative { -w.clone() } else { w.clone() });
    }
    per_value.into_iter().map(T::sum_iter).collect()
}

/// `max_{u_phi} E_x f(Sigma_{V_0} x) prod_phi u_phi(phi(x))` over `{-1,1}`-valued `u`.
///
/// The exact engine enumerates signs for all forms but the last, which is then
/// set to the sign of its marginal. It needs `|Phi| * |G| <= exact_bits_cap - 2`.
pub fn system_cut_norm<T: Scalar>(
    f: &GroupFunction<T>,
    system: &LinearSystem,
    engine: Engine,
    budget: &EngineBudget,
    limits: &Limits,
) -> Result<SystemCutWitness<T>> {
    budget.validate()?;
    let n = f.group().order();
    let m = system.forms.len();
    let buckets = bucketize(f, system, limits)?;
    if m == 0 {
        let mean = T::sum_iter(buckets.weights.iter().cloned());
        return Ok(SystemCutWitness { value: mean.abs(), signs: Vec::new(), traces: Vec::new() });
    }
    match engine {
        Engine::Exact => system_cut_exact(&buckets, m, n, budget, limits),
        Engine::Alternating => Ok(system_cut_alternating(&buckets, m, n, budget)),
    }
}

fn system_cut_exact<T: Scalar>(
    buckets: &Buckets<T>,
    m: usize,
    n: usize,
    budget: &EngineBudget,
    limits: &Limits,
) -> Result<SystemCutWitness<T>> {
    let bits = (m * n) as u128;
    let cap = budget.exact_bits_cap.saturating_sub(2) as u128;
    if bits > cap {
        return Err(Error::Budget { what: "exact system cut sign bits", needed: bits, cap });
    }
    let free = (m - 1) * n;
    limits.check("exact system cut evaluations", (1u128 << free).saturating_mul(buckets.keys.len() as u128))?;
    let signs_of = |choice: u64| -> Vec<Vec<i8>> {
        let mut signs: Vec<Vec<i8>> = (0..m - 1)
            .map(|i| (0..n).map(|v| if choice >> (i * n + v) & 1 == 1 { -1 } else { 1 }).collect())
            .collect();
        signs.push(vec![1; n]);
        signs
    };
    let score = |choice: u64| -> T {
        let marginal = form_marginal(buckets, &signs_of(choice), m - 1, n);
        T::sum_iter(marginal.into_iter().map(|v| v.abs()))
    };
    let (value, best) = (0..1u64 << free)
        .into_par_iter()
        .map(|c| (score(c), c))
        .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
        .expect("at least one choice");
    let mut signs = signs_of(best);
    let marginal = form_marginal(buckets, &signs, m - 1, n);
    signs[m - 1] = marginal.iter().map(|v| if *v >= T::zero() { 1 } else { -1 }).collect();
    Ok(SystemCutWitness { value, signs, traces: Vec::new() })
}

fn system_cut_alternating<T: Scalar>(buckets: &Buckets<T>, m: usize, n: usize, budget: &EngineBudget) -> SystemCutWitness<T> {
    let runs: Vec<(T, Vec<Vec<i8>>, Vec<f64>)> = (0..budget.restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = sampling::rng(budget.restart_seed(restart));
            let mut signs: Vec<Vec<i8>> =
                (0..m).map(|_| (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()).collect();
            let evaluate = |signs: &[Vec<i8>]| {
                let marginal = form_marginal(buckets, signs, 0, n);
                T::sum_iter(marginal.iter().enumerate().map(|(v, c)| {
                    if signs[0][v] > 0 { c.clone() } else { -c.clone() }
                }))
            };
            let mut value = evaluate(&signs);
            let mut trace = vec![value.to_f64()];
            for _ in 0..budget.sweeps_cap {
                let mut changed = false;
                for i in 0..m {
                    let marginal = form_marginal(buckets, &signs, i, n);
                    let next: Vec<i8> = marginal.iter().map(|v| if *v >= T::zero() { 1 } else { -1 }).collect();
                    changed |= next != signs[i];
                    signs[i] = next;
                    value = T::sum_iter(marginal.into_iter().map(|v| v.abs()));
                }
                let v = value.to_f64();
                let prev = *trace.last().expect("non-empty trace");
                assert!(v >= prev - 1e-12 * (1.0 + prev.abs()), "alternating maximization decreased: {prev} -> {v}");
                trace.push(v);
                if !changed {
                    break;
                }
            }
            (value, signs, trace)
        })
        .collect();
    let mut best: Option<(T, Vec<Vec<i8>>)> = None;
    let mut traces = Vec::new();
    for (value, signs, trace) in runs {
        if best.as_ref().is_none_or(|(v, _)| value > *v) {
            best = Some((value, signs));
        }
        traces.push(trace);
    }
    let (value, signs) = best.expect("at least one restart");
    SystemCutWitness { value, signs, traces }
}

/// Re-evaluates `E_x f(Sigma_{V_0} x) prod_phi u_phi(phi(x))` for given signs.
pub fn system_cut_value<T: Scalar>(
    f: &GroupFunction<T>,
    system: &LinearSystem,
    signs: &[Vec<i8>],
    limits: &Limits,
) -> Result<T> {
    let n = f.group().order();
    if signs.len() != system.forms.len() || signs.iter().any(|s| s.len() != n) {
        return Err(Error::param("one sign vector over G per form is required"));
    }
    let buckets = bucketize(f, system, limits)?;
    Ok(T::sum_iter(buckets.keys.iter().zip(&buckets.weights).map(|(key, w)| {
        let negative = signs.iter().enumerate().filter(|(i, s)| s[key[i + 1] as usize] < 0).count() % 2 == 1;
        if negative { -w.clone() } else { w.clone() }
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteAbelianGroup;
    use crate::linear_systems::system_cut;
    use num_rational::BigRational;
    use num_traits::{Signed, Zero};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    fn z2_example() -> DenseTensor<BigRational> {
        DenseTensor::from_fn(2, 2, |x| if (x[0] + x[1]) % 2 == 0 { q(1, 2) } else { q(-1, 2) })
    }

    #[test]
    fn oct_trivial_cases() {
        let lim = Limits::default();
        let one = DenseTensor::constant(3, 3, 1.0f64);
        assert!((oct_norm_power(&one, &lim).unwrap() - 1.0).abs() < 1e-15);
        let f = DenseTensor::new(1, 2, vec![1.0, -1.0]).unwrap();
        assert_eq!(oct_inner_product(&[f.clone(), f], &lim).unwrap(), 0.0);
        let c = DenseTensor::constant(2, 3, -0.5);
        assert!((oct_norm(&c, &lim).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gcs_with_zero_function() {
        let lim = Limits::default();
        let f = DenseTensor::from_fn(2, 3, |x| (x[0] as f64 - x[1] as f64) / 3.0);
        let mut fs = vec![f; 4];
        fs[2] = DenseTensor::constant(2, 3, 0.0);
        let r = gcs_check(&fs, &lim).unwrap();
        assert!(r.holds && r.lhs == 0.0);
    }

    #[test]
    fn exact_cut_z2_example() {
        let w = cut_norm_exact(&z2_example(), 1, &EngineBudget::default(), &Limits::default()).unwrap();
        assert_eq!(w.value, q(1, 8));
        assert_eq!(cut_value(&z2_example(), 1, &w.sets).unwrap().abs(), q(1, 8));
        let zero = DenseTensor::constant(3, 2, q(0, 1));
        assert!(cut_norm_exact(&zero, 2, &EngineBudget::default(), &Limits::default()).unwrap().value.is_zero());
    }

    #[test]
    fn heuristic_matches_exact_on_z2() {
        let h = cut_norm_heuristic(&z2_example(), 1, &EngineBudget::default(), None).unwrap();
        assert_eq!(h.witness.value, q(1, 8));
        assert!(h.traces.iter().all(|t| t.values.windows(2).all(|w| w[1] >= w[0] - 1e-12)));
    }

    #[test]
    fn bits_cap_enforced() {
        let f = DenseTensor::constant(3, 3, 1.0);
        let r = cut_norm_exact(&f, 2, &EngineBudget::default(), &Limits::default());
        assert!(matches!(r, Err(Error::Budget { .. })));
    }

    #[test]
    fn system_cut_edge_cases() {
        let g = FiniteAbelianGroup::cyclic(3).unwrap();
        let f = GroupFunction::new(&g, vec![q(2, 3), q(-1, 3), q(-1, 3)]).unwrap();
        let lim = Limits::default();
        let budget = EngineBudget::default();
        let empty = LinearSystem { k: 2, d: 1, forms: vec![] };
        assert!(system_cut_norm(&f, &empty, Engine::Exact, &budget, &lim).unwrap().value.is_zero());
        let shifted = f.map(|v| v.clone() + q(1, 2));
        assert_eq!(system_cut_norm(&shifted, &empty, Engine::Exact, &budget, &lim).unwrap().value, q(1, 2));
        let phi1 = system_cut(2, 1).unwrap().systems[1].clone();
        let exact = system_cut_norm(&f, &phi1, Engine::Exact, &budget, &lim).unwrap();
        assert_eq!(system_cut_value(&f, &phi1, &exact.signs, &lim).unwrap(), exact.value);
        let u2 = crate::fourier::gowers_norm_power(&f, 2).unwrap();
        assert!(exact.value >= u2);
        let alt = system_cut_norm(&f, &phi1, Engine::Alternating, &budget, &lim).unwrap();
        assert!(alt.value <= exact.value);
    }
}
