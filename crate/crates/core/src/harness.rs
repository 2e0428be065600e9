//! Verification suites. Each check compares two computed quantities under a
//! relation and tolerance and reports the measured values.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use itertools::Itertools;
use num_rational::BigRational;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::budget::Limits;
use crate::cayley::{
    build_nonsurjective_counterexample, build_surjective_counterexample, cayley_graph, general_cayley, paley_clique_graph,
    paley_graph, Payload,
};
use crate::error::{Error, Result};
use crate::fourier::{fourier, gowers_norm_power_with, gowers_norm_with};
use crate::function::{AdditiveSet, GroupFunction};
use crate::group::{is_prime, quadratic_residues, FiniteAbelianGroup};
use crate::hypergraph::{deviation, deviation_template, hom_density, Hypergraph};
use crate::linear_systems::{
    is_s_normal_form, pattern_probability, sf_recursion, system_cut, PatternSystem, SystemCut,
};
use crate::norms::{
    cut_blocks, cut_norm_exact, cut_norm_heuristic, discrepancy, oct_norm, system_cut_norm, Engine, EngineBudget,
};
use crate::sampling::{self, estimate, SampleRng};
use crate::scalar::{nonnegative_root, Scalar};
use crate::template::TemplateGraph;
use crate::tensor::{DenseTensor, TensorView};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    pub fn holds(self, lhs: f64, rhs: f64, tolerance: f64) -> bool {
        match self {
            Relation::Lt => lhs < rhs + tolerance,
            Relation::Le => lhs <= rhs + tolerance,
            Relation::Eq => (lhs - rhs).abs() <= tolerance,
            Relation::Ge => lhs + tolerance >= rhs,
        }
    }
}

/// How much a passing check establishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    /// Both sides computed exactly (up to float rounding).
    Exact,
    /// One side is a heuristic bound, so passing is only necessary.
    NecessaryCondition,
    /// Monte Carlo estimate against a tolerance.
    Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check_id: String,
    pub params: BTreeMap<String, Value>,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub passed: bool,
    pub label: Label,
    /// Present only when timing is requested, so default reports stay reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

impl CheckResult {
    pub fn new(
        check_id: impl Into<String>,
        params: BTreeMap<String, Value>,
        lhs: f64,
        rhs: f64,
        relation: Relation,
        tolerance: f64,
        label: Label,
    ) -> Self {
        CheckResult {
            check_id: check_id.into(),
            params,
            lhs,
            rhs,
            relation,
            tolerance,
            passed: relation.holds(lhs, rhs, tolerance),
            label,
            runtime_ms: None,
        }
    }

    fn timed(mut self, start: Instant, cfg: &SuiteConfig) -> Self {
        if cfg.timing {
            self.runtime_ms = Some(start.elapsed().as_millis() as u64);
        }
        self
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.relation {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        };
        write!(
            f,
            "{} {}: {} {} {} (tol {})",
            if self.passed { "PASS" } else { "FAIL" },
            self.check_id,
            self.lhs,
            rel,
            self.rhs,
            self.tolerance
        )
    }
}

macro_rules! params {
    ($($key:literal => $value:expr),* $(,)?) => {{
        #[allow(unused_mut)]
        let mut map = BTreeMap::new();
        $(map.insert($key.to_string(), json!($value));)*
        map
    }};
}

/// Tolerances, corpus sizes and budgets for the suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub seed: u64,
    pub timing: bool,
    pub identity_tol: f64,
    pub fourier_tol: f64,
    pub inequality_slack: f64,
    pub pattern_tol: f64,
    /// `||Q_p - 1/2||_{U^2} <= factor * p^{-1/4}`.
    pub paley_fourier_factor: f64,
    pub paley_density_tol: f64,
    pub paley_witness_tol: f64,
    pub paley_samples: u64,
    /// Sweeps for the alternating search seeded with the Paley witness; 0 disables it.
    pub paley_witness_sweeps: u32,
    pub example2_disc_bound: f64,
    /// Decision-bit cap for the cut-versus-oct and engine-consistency corpora.
    pub small_tensor_bits_cap: u32,
    pub uk_oct_count: usize,
    pub cut_oct_count: usize,
    pub lemma_count: usize,
    pub mnorm_count: usize,
    pub engine_tensor_count: usize,
    pub budget: EngineBudget,
    pub limits: Limits,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            timing: false,
            identity_tol: 1e-9,
            fourier_tol: 1e-10,
            inequality_slack: 1e-9,
            pattern_tol: 1e-10,
            paley_fourier_factor: 1.1,
            paley_density_tol: 0.05,
            paley_witness_tol: 0.05,
            paley_samples: 1_000_000,
            paley_witness_sweeps: 2,
            example2_disc_bound: 0.1,
            small_tensor_bits_cap: 27,
            uk_oct_count: 50,
            cut_oct_count: 100,
            lemma_count: 10,
            mnorm_count: 50,
            engine_tensor_count: 150,
            budget: EngineBudget::default(),
            limits: Limits::default(),
        }
    }
}

impl SuiteConfig {
    fn small_budget(&self) -> EngineBudget {
        EngineBudget { exact_bits_cap: self.small_tensor_bits_cap, ..self.budget }
    }
}

/// `c_{k,d} = 2^{-(d+2)(2d+2)^k}`.
pub fn c_kd(k: usize, d: usize) -> f64 {
    let exponent = (d as f64 + 2.0) * ((2 * d + 2) as f64).powi(k as i32);
    (-exponent).exp2()
}

fn binomial(n: usize, r: usize) -> usize {
    (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

// ---------------------------------------------------------------------------
// Seeded corpora

fn stream(seed: u64, tag: u64, i: usize) -> SampleRng {
    sampling::rng(seed ^ tag.wrapping_mul(0xD6E8_FEB8_6659_FD93) ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn uniform_values(rng: &mut SampleRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Functions `Z_n -> [-1, 1]`, `n` cycling through 4..=9 and `k` through {2, 3}.
pub fn function_corpus(count: usize, seed: u64) -> Result<Vec<(GroupFunction<f64>, u32)>> {
    (0..count)
        .map(|i| {
            let n = 4 + i % 6;
            let k = 2 + ((i / 6) % 2) as u32;
            let group = FiniteAbelianGroup::cyclic(n as u64)?;
            let mut rng = stream(seed, 1, i);
            Ok((GroupFunction::new(&group, uniform_values(&mut rng, n))?, k))
        })
        .collect()
}

/// Alternates uniform `[-1, 1]` values with balanced indicators of random sets.
pub fn bounded_function_corpus(group: &FiniteAbelianGroup, count: usize, seed: u64) -> Result<Vec<GroupFunction<f64>>> {
    (0..count)
        .map(|i| {
            let mut rng = stream(seed, 2, i);
            if i % 2 == 0 {
                let mask = group.elements().map(|_| rng.random_bool(0.5)).collect();
                Ok(GroupFunction::balanced_indicator(&AdditiveSet::from_mask(group, mask)))
            } else {
                GroupFunction::new(group, uniform_values(&mut rng, group.order()))
            }
        })
        .collect()
}

/// Tensors with `k` in {2, 3} and `|V|` in {2, 3}: uniform `[-1, 1]` entries or balanced 0/1 entries.
pub fn tensor_corpus(count: usize, seed: u64) -> Vec<DenseTensor<f64>> {
    (0..count)
        .map(|i| {
            let k = 2 + i % 2;
            let n = 2 + (i / 2) % 2;
            let mut rng = stream(seed, 3, i);
            if (i / 4) % 2 == 0 {
                DenseTensor::from_fn(k, n, |_| rng.random_range(-1.0..=1.0))
            } else {
                let t = DenseTensor::from_fn(k, n, |_| if rng.random_bool(0.5) { 1.0 } else { 0.0 });
                let mean = t.mean();
                t.map(|v| v - mean)
            }
        })
        .collect()
}

/// Symmetric 2-graphs on 2..=4 vertices with weights in `[0, 1]` (every third one 0/1).
pub fn weighted_graph_corpus(count: usize, seed: u64) -> Vec<Hypergraph<f64>> {
    (0..count)
        .map(|i| {
            let n = 2 + i % 3;
            let mut rng = stream(seed, 4, i);
            let mut w = vec![0.0; n * n];
            for a in 0..n {
                for b in a..n {
                    let v = if i % 3 == 2 { f64::from(u8::from(rng.random_bool(0.5))) } else { rng.random_range(0.0..=1.0) };
                    w[a * n + b] = v;
                    w[b * n + a] = v;
                }
            }
            Hypergraph::from_tensor(DenseTensor::new(2, n, w).expect("n*n entries"), i % 3 != 2)
        })
        .collect()
}

/// `(d+1)`-simple `k`-graphs: a single edge, two edges sharing `j <= d` vertices,
/// and seeded random templates that pass the classifier.
pub fn simple_template_corpus(k: usize, d: usize, random: usize, seed: u64) -> Result<Vec<TemplateGraph>> {
    let mut out = vec![TemplateGraph::single_edge(k)?];
    for j in 0..=d.min(k - 1) {
        out.push(TemplateGraph::two_edges_sharing(k, j)?);
    }
    let mut rng = stream(seed, 5, k * 16 + d);
    let mut attempts = 0;
    let mut found = 0;
    while found < random && attempts < 1000 {
        attempts += 1;
        let v = k + rng.random_range(1..=2usize);
        let e = rng.random_range(2..=3usize);
        let edges: Vec<Vec<usize>> = (0..e)
            .map(|_| {
                let mut pool: Vec<usize> = (0..v).collect();
                (0..k).map(|_| pool.swap_remove(rng.random_range(0..pool.len()))).collect()
            })
            .collect();
        let names = (0..v).map(|i| format!("v{i}")).collect();
        let f = TemplateGraph::new(k, names, edges, None)?;
        if f.edge_count() == e && f.is_s_simple(d + 1) {
            out.push(f);
            found += 1;
        }
    }
    out.retain(|f| f.is_s_simple(d + 1));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Norm identities

/// `||Gamma^(k)_f||_{Oct^k} = ||f||_{U^k}`.
pub fn check_uk_oct_identity(corpus: &[(GroupFunction<f64>, u32)], cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    corpus
        .par_iter()
        .enumerate()
        .map(|(i, (f, k))| {
            let start = Instant::now();
            let tensor = cayley_graph(*k as usize, &Payload::Function(f.clone()))?.to_tensor(cfg.limits.dense_cap)?;
            let lhs = oct_norm(&tensor, &cfg.limits)?;
            let rhs = gowers_norm_with(f, *k, &cfg.limits)?;
            Ok(CheckResult::new(
                format!("uk_oct/{i:03}"),
                params! {"group" => f.group().spec_string(), "k" => k},
                lhs,
                rhs,
                Relation::Eq,
                cfg.identity_tol,
                Label::Exact,
            )
            .timed(start, cfg))
        })
        .collect()
}

/// `||f||_{U^2}^4 = sum |f^|^4`.
pub fn check_fourier_identity(functions: &[GroupFunction<f64>], cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    functions
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let start = Instant::now();
            let lhs = gowers_norm_power_with(f, 2, &cfg.limits)?;
            let rhs = fourier(f).l4_fourth();
            Ok(CheckResult::new(
                format!("fourier/{i:03}"),
                params! {"group" => f.group().spec_string()},
                lhs,
                rhs,
                Relation::Eq,
                cfg.fourier_tol,
                Label::Exact,
            )
            .timed(start, cfg))
        })
        .collect()
}

/// The corpus used by [`check_fourier_identity`] in the suites.
pub fn fourier_corpus(cfg: &SuiteConfig) -> Result<Vec<GroupFunction<f64>>> {
    let mut out: Vec<GroupFunction<f64>> =
        function_corpus(cfg.uk_oct_count, cfg.seed)?.into_iter().map(|(f, _)| f).collect();
    for (j, spec) in ["Z2xZ3", "Z2^3"].iter().enumerate() {
        let group: FiniteAbelianGroup = spec.parse()?;
        let mut rng = stream(cfg.seed, 6, j);
        out.push(GroupFunction::new(&group, uniform_values(&mut rng, group.order()))?);
    }
    Ok(out)
}

/// `||f||_{cut^k_{k-1}} <= ||f||_{Oct^k}`.
pub fn check_cut_below_oct(tensors: &[DenseTensor<f64>], cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let budget = cfg.small_budget();
    tensors
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            let start = Instant::now();
            let k = t.arity();
            let lhs = cut_norm_exact(t, k - 1, &budget, &cfg.limits)?.value;
            let rhs = oct_norm(t, &cfg.limits)?;
            Ok(CheckResult::new(
                format!("cut_oct/{i:03}"),
                params! {"k" => k, "vertices" => t.side()},
                lhs,
                rhs,
                Relation::Le,
                cfg.inequality_slack,
                Label::Exact,
            )
            .timed(start, cfg))
        })
        .collect()
}

/// Alternating search never beats the exact engine; its sweep values never decrease.
pub fn check_engine_consistency(tensors: &[DenseTensor<f64>], cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let budget = cfg.small_budget();
    let instances: Vec<(usize, usize)> =
        tensors.iter().enumerate().flat_map(|(i, t)| (1..t.arity()).map(move |d| (i, d))).collect();
    let nested: Vec<Vec<CheckResult>> = instances
        .par_iter()
        .map(|&(i, d)| {
            let start = Instant::now();
            let t = &tensors[i];
            let exact = cut_norm_exact(t, d, &budget, &cfg.limits)?;
            let heuristic = cut_norm_heuristic(t, d, &budget, None)?;
            let worst_step = heuristic
                .traces
                .iter()
                .flat_map(|tr| tr.values.windows(2).map(|w| w[1] - w[0]))
                .fold(0.0f64, f64::min);
            let p = params! {"k" => t.arity(), "d" => d, "vertices" => t.side(),
                "agrees" => (heuristic.witness.value - exact.value).abs() <= 1e-12};
            Ok(vec![
                CheckResult::new(
                    format!("engine/{i:03}/d{d}/bound"),
                    p.clone(),
                    heuristic.witness.value,
                    exact.value,
                    Relation::Le,
                    1e-12,
                    Label::Exact,
                )
                .timed(start, cfg),
                CheckResult::new(format!("engine/{i:03}/d{d}/monotone"), p, worst_step, 0.0, Relation::Ge, 1e-12, Label::Exact),
            ])
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

// ---------------------------------------------------------------------------
// Main theorem and the SystemCut lemma

fn set_label(set: &AdditiveSet) -> String {
    set.mask().iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// `disc_d(Gamma^(k)_A) <= ||A - delta||_{U^{d+1}}`.
pub fn check_main_theorem_i(set: &AdditiveSet, k: usize, d: usize, engine: Engine, cfg: &SuiteConfig) -> Result<CheckResult> {
    let start = Instant::now();
    let graph: Hypergraph<f64> = cayley_graph(k, &Payload::Set(set.clone()))?;
    let lhs = discrepancy(&graph, d, engine, &cfg.budget, &cfg.limits)?.value;
    let rhs = gowers_norm_with(&GroupFunction::<f64>::balanced_indicator(set), d as u32 + 1, &cfg.limits)?;
    let label = if engine == Engine::Exact { Label::Exact } else { Label::NecessaryCondition };
    Ok(CheckResult::new(
        format!("main_i/{}/k{k}d{d}/{}", set.group().spec_string(), set_label(set)),
        params! {"group" => set.group().spec_string(), "set" => set.members(), "k" => k, "d" => d},
        lhs,
        rhs,
        Relation::Le,
        cfg.inequality_slack,
        label,
    )
    .timed(start, cfg))
}

/// Main theorem (i) over every subset of each group.
pub fn check_main_theorem_exhaustive(groups: &[FiniteAbelianGroup], kd: &[(usize, usize)], cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mut cases = Vec::new();
    for g in groups {
        for set in AdditiveSet::all_subsets(g)? {
            for &(k, d) in kd {
                cases.push((set.clone(), k, d));
            }
        }
    }
    cases.par_iter().map(|(s, k, d)| check_main_theorem_i(s, *k, *d, Engine::Exact, cfg)).collect()
}

/// Items 3 and 5: normal form of every `Phi_s + {Sigma}` and `sf < (2d+2)^k`.
pub fn check_lemma_structure(k: usize, d: usize, cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let start = Instant::now();
    let run = system_cut(k, d)?;
    let mut out = Vec::new();
    for s in 1..=run.sf {
        let normal = is_s_normal_form(&run.systems[s].with_sum_v0(), d).normal;
        out.push(CheckResult::new(
            format!("lemma/k{k}d{d}/item3/s{s:03}"),
            params! {"k" => k, "d" => d, "s" => s},
            f64::from(u8::from(normal)),
            1.0,
            Relation::Eq,
            0.0,
            Label::Exact,
        ));
    }
    out.push(
        CheckResult::new(
            format!("lemma/k{k}d{d}/item5"),
            params! {"k" => k, "d" => d},
            run.sf as f64,
            ((2 * d + 2) as f64).powi(k as i32),
            Relation::Lt,
            0.0,
            Label::Exact,
        )
        .timed(start, cfg),
    );
    Ok(out)
}

/// Items 1, 2 and 4 with exact engines, plus their composition.
pub fn check_lemma_numeric(k: usize, d: usize, functions: &[GroupFunction<f64>], cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let run = system_cut(k, d)?;
    let sf = run.sf;
    let scale = 2f64.powi(binomial(k, d) as i32);
    let nested: Vec<Vec<CheckResult>> = functions
        .par_iter()
        .enumerate()
        .map(|(j, f)| {
            let start = Instant::now();
            let group = f.group().spec_string();
            let norms = run.systems[1..]
                .iter()
                .map(|phi| Ok(system_cut_norm(f, phi, Engine::Exact, &cfg.budget, &cfg.limits)?.value))
                .collect::<Result<Vec<f64>>>()?;
            let norm = |s: usize| norms[s - 1];
            let uniform = gowers_norm_power_with(f, d as u32 + 1, &cfg.limits)?;
            let graph = cayley_graph(k, &Payload::Function(f.clone()))?.to_tensor(cfg.limits.dense_cap)?;
            let cut = cut_norm_exact(&graph, d, &cfg.budget, &cfg.limits)?.value;
            let id = |item: &str| format!("lemma/k{k}d{d}/{group}/f{j:02}/{item}");
            let p = || params! {"k" => k, "d" => d, "group" => group.clone(), "f" => j};
            let slack = cfg.inequality_slack;
            let mut out = vec![
                CheckResult::new(id("item1"), p(), norm(1), uniform, Relation::Ge, slack, Label::Exact),
                CheckResult::new(id("item2"), p(), norm(sf), scale * cut, Relation::Le, slack, Label::Exact),
            ];
            for s in 1..sf {
                out.push(CheckResult::new(
                    id(&format!("item4/s{s:03}")),
                    p(),
                    norm(s + 1),
                    norm(s).powi(1 << (d + 2)),
                    Relation::Ge,
                    slack,
                    Label::Exact,
                ));
            }
            let exponent = 2f64.powi(((d + 2) * sf) as i32);
            let mut composed = p();
            composed.insert("c_kd".into(), json!(c_kd(k, d)));
            composed.insert("sf".into(), json!(sf));
            out.push(
                CheckResult::new(id("composed"), composed, uniform.powf(exponent), scale * cut, Relation::Le, slack, Label::Exact)
                    .timed(start, cfg),
            );
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// The step count of SystemCut against its recursion, and `sf < (2d+2)^k`.
pub fn check_sf_recursion(max_k: usize, cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let pairs: Vec<(usize, usize)> = (2..=max_k).flat_map(|k| (1..k).map(move |d| (k, d))).collect();
    let nested: Vec<Vec<CheckResult>> = pairs
        .par_iter()
        .map(|&(k, d)| {
            let start = Instant::now();
            let sf = SystemCut::new(k, d)?.count() as f64;
            let p = || params! {"k" => k, "d" => d};
            Ok(vec![
                CheckResult::new(
                    format!("sf/k{k}d{d}/recursion"),
                    p(),
                    sf,
                    sf_recursion(k, d) as f64,
                    Relation::Eq,
                    0.0,
                    Label::Exact,
                )
                .timed(start, cfg),
                CheckResult::new(
                    format!("sf/k{k}d{d}/bound"),
                    p(),
                    sf,
                    ((2 * d + 2) as f64).powi(k as i32),
                    Relation::Lt,
                    0.0,
                    Label::Exact,
                ),
            ])
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

// ---------------------------------------------------------------------------
// Equivalence identities

/// Squashed-octahedron transfer, deviation identity and `(d+1)`-simple counting for `A`.
pub fn check_equivalence_identities(set: &AdditiveSet, ks: &[usize], d: usize, cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let group = set.group().spec_string();
    let tag = format!("{group}/{}", set_label(set));
    let f = GroupFunction::<f64>::balanced_indicator(set);
    let delta: f64 = set.density();
    let uniform_power = gowers_norm_power_with(&f, d as u32 + 1, &cfg.limits)?;
    let uniform = nonnegative_root(uniform_power, 1 << (d + 1))?;
    let base = hom_density(&TemplateGraph::octahedron(d + 1)?, &cayley_graph(d + 1, &Payload::Function(f.clone()))?, &cfg.limits)?;
    let nested: Vec<Vec<CheckResult>> = ks
        .par_iter()
        .map(|&k| {
            let start = Instant::now();
            let p = || params! {"group" => group.clone(), "set" => set.members(), "k" => k, "d" => d};
            let balanced = cayley_graph(k, &Payload::Function(f.clone()))?;
            let squashed = hom_density(&deviation_template(k, d + 1)?, &balanced, &cfg.limits)?;
            let graph: Hypergraph<f64> = cayley_graph(k, &Payload::Set(set.clone()))?;
            let dev = deviation(&graph, d + 1, &cfg.limits)?;
            let mut out = vec![
                CheckResult::new(format!("equiv/{tag}/k{k}/transfer"), p(), squashed, base, Relation::Eq, cfg.identity_tol, Label::Exact),
                CheckResult::new(format!("equiv/{tag}/k{k}/deviation"), p(), dev, uniform_power, Relation::Eq, cfg.identity_tol, Label::Exact)
                    .timed(start, cfg),
            ];
            for (i, template) in simple_template_corpus(k, d, 3, cfg.seed)?.iter().enumerate() {
                let e = template.edge_count();
                let t = hom_density(template, &graph, &cfg.limits)?;
                let mut q = p();
                q.insert("template".into(), serde_json::from_str(&template.to_json())?);
                out.push(CheckResult::new(
                    format!("equiv/{tag}/k{k}/simple/{i:02}"),
                    q,
                    (t - delta.powi(e as i32)).abs(),
                    e as f64 * uniform,
                    Relation::Le,
                    cfg.inequality_slack,
                    Label::Exact,
                ));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// `P(Phi_{k,d}(x) in A) = t(M^(k)_d, Gamma^(k)_A)`.
pub fn check_pattern_agreement(set: &AdditiveSet, k: usize, d: usize, cfg: &SuiteConfig) -> Result<CheckResult> {
    let start = Instant::now();
    let system = PatternSystem::new(k, d)?;
    let lhs: f64 = pattern_probability(system.form_system(), set, &cfg.limits)?;
    let graph: Hypergraph<f64> = cayley_graph(k, &Payload::Set(set.clone()))?;
    let rhs = hom_density(&TemplateGraph::complete_pattern(k, d)?, &graph, &cfg.limits)?;
    Ok(CheckResult::new(
        format!("pattern/{}/k{k}d{d}/{}", set.group().spec_string(), set_label(set)),
        params! {"group" => set.group().spec_string(), "set" => set.members(), "k" => k, "d" => d},
        lhs,
        rhs,
        Relation::Eq,
        cfg.pattern_tol,
        Label::Exact,
    )
    .timed(start, cfg))
}

/// Subgraph bounds by the `M^(2)_1`-norm, and the deviation bound from its binomial expansion.
pub fn check_towsner_mnorm(graphs: &[Hypergraph<f64>], cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let m = TemplateGraph::complete_pattern(2, 1)?;
    let e_m = m.edge_count();
    let nested: Vec<Vec<CheckResult>> = graphs
        .par_iter()
        .enumerate()
        .map(|(i, h)| {
            let start = Instant::now();
            let norm = nonnegative_root(hom_density(&m, h, &cfg.limits)?, e_m as u32)?;
            let p = || params! {"vertices" => h.vertex_count()};
            let mut out = Vec::new();
            for mask in 0..1usize << e_m {
                let keep: Vec<usize> = (0..e_m).filter(|&j| mask >> j & 1 == 1).collect();
                let t = hom_density(&m.edge_subgraph(&keep), h, &cfg.limits)?;
                out.push(CheckResult::new(
                    format!("mnorm/{i:03}/F{mask:02}"),
                    p(),
                    t,
                    norm.powi(keep.len() as i32),
                    Relation::Le,
                    cfg.inequality_slack,
                    Label::Exact,
                ));
            }
            let delta = h.edge_density(&cfg.limits)?;
            let dev = hom_density(&m, &h.balanced(&cfg.limits)?, &cfg.limits)?;
            let e = e_m as i32;
            let bound = (norm + delta).powi(e) + (norm - delta).powi(e) - (2.0 * delta).powi(e);
            out.push(
                CheckResult::new(format!("mnorm/{i:03}/deviation"), p(), dev, bound, Relation::Le, cfg.inequality_slack, Label::Exact)
                    .timed(start, cfg),
            );
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// Edge selection on `M^(k)_d`.
pub fn check_edge_selection(pairs: &[(usize, usize)], cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    pairs
        .iter()
        .map(|&(k, d)| {
            let start = Instant::now();
            let ok = TemplateGraph::complete_pattern(k, d)?.verify_edge_selection(d)?;
            Ok(CheckResult::new(
                format!("edge_selection/k{k}d{d}"),
                params! {"k" => k, "d" => d},
                f64::from(u8::from(ok)),
                1.0,
                Relation::Eq,
                0.0,
                Label::Exact,
            )
            .timed(start, cfg))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Paley graphs

/// Odd primes up to `n`.
pub fn odd_primes_up_to(n: u64) -> Vec<u64> {
    (3..=n).filter(|&p| is_prime(p)).collect()
}

/// `|Q_p| = (p+1)/2`, the Fourier bound on `Q_p - 1/2`, and the density and
/// cut witness of `P^(k)_d(p)`.
pub fn run_paley_suite(
    qr_primes: &[u64],
    norm_primes: &[u64],
    witness_primes: &[u64],
    k: usize,
    d: usize,
    cfg: &SuiteConfig,
) -> Result<Vec<CheckResult>> {
    if let Some(&p) = qr_primes.iter().chain(norm_primes).chain(witness_primes).find(|&&p| !is_prime(p)) {
        return Err(Error::NotPrime(p));
    }
    let mut out = Vec::new();
    for &p in qr_primes {
        let start = Instant::now();
        out.push(
            CheckResult::new(
                format!("paley/qr_size/p{p:04}"),
                params! {"p" => p},
                quadratic_residues(p)?.len() as f64,
                (p + 1) as f64 / 2.0,
                Relation::Eq,
                0.0,
                Label::Exact,
            )
            .timed(start, cfg),
        );
    }
    for &p in norm_primes {
        let start = Instant::now();
        let group = FiniteAbelianGroup::cyclic(p)?;
        let qr = AdditiveSet::new(&group, quadratic_residues(p)?)?;
        let f = GroupFunction::<f64>::indicator(&qr).map(|v| v - 0.5);
        let norm = nonnegative_root(fourier(&f).l4_fourth(), 4)?;
        out.push(
            CheckResult::new(
                format!("paley/u2/p{p:04}"),
                params! {"p" => p},
                norm,
                cfg.paley_fourier_factor * (p as f64).powf(-0.25),
                Relation::Le,
                0.0,
                Label::Exact,
            )
            .timed(start, cfg),
        );
    }
    for &p in witness_primes {
        out.extend(paley_witness_checks(p, k, d, cfg)?);
    }
    Ok(out)
}

fn paley_witness_checks(p: u64, k: usize, d: usize, cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let start = Instant::now();
    let nominal = (-(binomial(k, d) as f64)).exp2();
    let graph: Hypergraph<f64> = paley_clique_graph(p, k, d)?;
    let pair: Hypergraph<f64> = paley_graph(p, d)?;
    let blocks = cut_blocks(k, d)?;
    let p_usize = p as usize;
    let density = graph.edge_density_mc(cfg.paley_samples, cfg.seed)?;
    let mut x = vec![0usize; k];
    let mut xb = vec![0usize; d];
    let witness = estimate(cfg.paley_samples, cfg.seed, |rng| {
        x.iter_mut().for_each(|v| *v = rng.random_range(0..p_usize));
        let inside = blocks.iter().all(|b| {
            b.iter().zip(xb.iter_mut()).for_each(|(&i, slot)| *slot = x[i]);
            pair.value(&xb) != 0.0
        });
        if inside { graph.value(&x) - nominal } else { 0.0 }
    })?;
    let p_ = || params! {"p" => p, "k" => k, "d" => d, "samples" => cfg.paley_samples, "seed" => cfg.seed};
    let with_se = |e: &sampling::Estimate| {
        let mut q = p_();
        q.insert("std_error".into(), json!(e.std_error));
        q
    };
    let mut out = vec![
        CheckResult::new(
            format!("paley/density/p{p:04}/k{k}d{d}"),
            with_se(&density),
            density.mean,
            nominal,
            Relation::Eq,
            cfg.paley_density_tol,
            Label::Estimate,
        ),
        CheckResult::new(
            format!("paley/witness/p{p:04}/k{k}d{d}"),
            with_se(&witness),
            witness.mean,
            nominal - nominal * nominal,
            Relation::Eq,
            cfg.paley_witness_tol,
            Label::Estimate,
        )
        .timed(start, cfg),
    ];
    if cfg.paley_witness_sweeps > 0 {
        let start = Instant::now();
        let cells = crate::budget::cost_pow(p_usize, d) as usize;
        let sets: Vec<Vec<bool>> = blocks
            .iter()
            .map(|_| {
                let mut z = vec![0usize; d];
                (0..cells)
                    .map(|c| {
                        let mut rest = c;
                        for slot in z.iter_mut().rev() {
                            *slot = rest % p_usize;
                            rest /= p_usize;
                        }
                        pair.value(&z) != 0.0
                    })
                    .collect()
            })
            .collect();
        let budget = EngineBudget { restarts: 1, sweeps_cap: cfg.paley_witness_sweeps, ..cfg.budget };
        let search = cut_norm_heuristic(&graph.balanced(&cfg.limits)?, d, &budget, Some(&sets))?;
        out.push(
            CheckResult::new(
                format!("paley/alternating/p{p:04}/k{k}d{d}"),
                params! {"p" => p, "k" => k, "d" => d, "sweeps" => cfg.paley_witness_sweeps},
                search.witness.value,
                nominal - nominal * nominal - cfg.paley_witness_tol,
                Relation::Ge,
                0.0,
                Label::NecessaryCondition,
            )
            .timed(start, cfg),
        );
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// General Cayley hypergraphs

/// Examples 1 and 2 and the scaled inequality for non-coprime forms on `Z_6`.
pub fn run_general_cayley_suite(ns: &[u32], big_ns: &[u64], cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mut groups: Vec<Vec<CheckResult>> = ns
        .par_iter()
        .map(|&n| example_one_checks(n, cfg))
        .chain(big_ns.par_iter().map(|&modulus| example_two_checks(modulus, cfg)))
        .collect::<Result<_>>()?;
    groups.push(scaled_inequality_checks(cfg)?);
    Ok(groups.into_iter().flatten().collect())
}

fn example_one_checks(n: u32, cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let start = Instant::now();
    let ce = build_surjective_counterexample(n, cfg.seed)?;
    let graph: Hypergraph<BigRational> = general_cayley(&ce.coefficients, &Payload::Set(ce.set.clone()))?;
    let order = ce.group.order();
    let half = BigRational::from_ratio(1, 2);
    let total = BigRational::sum_iter(ce.set.members().iter().flat_map(|&x1| {
        let graph = &graph;
        let half = &half;
        (0..order).map(move |x2| graph.value(&[x1, x2]) - half.clone())
    }));
    let witness = total / BigRational::from_int((order * order) as i64);
    let p = || params! {"n" => n, "group" => ce.group.spec_string(), "coeffs" => ce.coefficients.clone(), "r" => ce.r.clone()};
    let mut q = p();
    q.insert("witness".into(), json!(witness.to_string()));
    let exact = witness == BigRational::from_ratio(1, 4);
    let cube = FiniteAbelianGroup::new(&vec![2; n as usize])?;
    let r = AdditiveSet::new(&cube, ce.r.clone())?;
    Ok(vec![
        CheckResult::new(
            format!("general/example1/n{n}/witness"),
            q,
            witness.to_f64(),
            0.25,
            Relation::Eq,
            0.0,
            Label::Exact,
        ),
        CheckResult::new(
            format!("general/example1/n{n}/witness_exact"),
            p(),
            f64::from(u8::from(exact)),
            1.0,
            Relation::Eq,
            0.0,
            Label::Exact,
        ),
        CheckResult::new(
            format!("general/example1/n{n}/fourier"),
            p(),
            fourier(&GroupFunction::<f64>::indicator(&ce.set)).max_nontrivial(),
            fourier(&GroupFunction::<f64>::indicator(&r)).max_nontrivial(),
            Relation::Eq,
            cfg.fourier_tol,
            Label::Exact,
        )
        .timed(start, cfg),
    ])
}

fn example_two_checks(modulus: u64, cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let start = Instant::now();
    let ce = build_nonsurjective_counterexample(modulus, 2, cfg.seed)?;
    let delta: f64 = ce.set.density();
    let uniform = gowers_norm_with(&GroupFunction::<f64>::balanced_indicator(&ce.set), 2, &cfg.limits)?;
    let p = || params! {"N" => modulus, "group" => ce.group.spec_string(), "r" => ce.r.clone()};
    let mut out = vec![CheckResult::new(
        format!("general/example2/N{modulus:02}/certificate"),
        p(),
        uniform,
        delta,
        Relation::Ge,
        cfg.inequality_slack,
        Label::Exact,
    )
    .timed(start, cfg)];
    let start = Instant::now();
    let graph: Hypergraph<f64> = general_cayley(&ce.coefficients, &Payload::Set(ce.set.clone()))?;
    let disc = discrepancy(&graph, 1, Engine::Alternating, &cfg.budget, &cfg.limits)?.value;
    out.push(
        CheckResult::new(
            format!("general/example2/N{modulus:02}/disc"),
            p(),
            disc,
            cfg.example2_disc_bound,
            Relation::Lt,
            0.0,
            Label::NecessaryCondition,
        )
        .timed(start, cfg),
    );
    Ok(out)
}

/// `disc_1(Gamma^phi_A) <= ||A - delta||_{U^2} (prod |G|/|lambda_i G|)^{1/2}` on `Z_6`, `phi = 2x + 3y`.
fn scaled_inequality_checks(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let group = FiniteAbelianGroup::cyclic(6)?;
    let coeffs = [2i64, 3];
    let scale: f64 = coeffs
        .iter()
        .map(|&l| group.order() as f64 / group.scalar_subgroup_order(l) as f64)
        .product::<f64>()
        .sqrt();
    let sets: Vec<AdditiveSet> = (0..=3)
        .flat_map(|size| group.elements().combinations(size))
        .map(|m| AdditiveSet::new(&group, m))
        .collect::<Result<_>>()?;
    sets.par_iter()
        .map(|set| {
            let start = Instant::now();
            let graph: Hypergraph<f64> = general_cayley(&coeffs, &Payload::Set(set.clone()))?;
            let disc = discrepancy(&graph, 1, Engine::Exact, &cfg.budget, &cfg.limits)?.value;
            let uniform = gowers_norm_with(&GroupFunction::<f64>::balanced_indicator(set), 2, &cfg.limits)?;
            Ok(CheckResult::new(
                format!("general/scaled/Z6/{}", set_label(set)),
                params! {"group" => "Z6", "coeffs" => coeffs, "set" => set.members(), "scale" => scale},
                disc,
                uniform * scale,
                Relation::Le,
                cfg.inequality_slack,
                Label::Exact,
            )
            .timed(start, cfg))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Suites

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Norms,
    Paley,
    #[serde(rename = "systemcut")]
    SystemCut,
    Equiv,
    General,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(Suite::All),
            "norms" => Ok(Suite::Norms),
            "paley" => Ok(Suite::Paley),
            "systemcut" => Ok(Suite::SystemCut),
            "equiv" => Ok(Suite::Equiv),
            "general" => Ok(Suite::General),
            other => Err(Error::param(format!("unknown suite {other:?}"))),
        }
    }
}

type Job<'a> = Box<dyn Fn() -> Result<Vec<CheckResult>> + Send + Sync + 'a>;

fn norms_jobs(cfg: &SuiteConfig) -> Vec<Job<'_>> {
    vec![
        Box::new(move || check_fourier_identity(&fourier_corpus(cfg)?, cfg)),
        Box::new(move || check_cut_below_oct(&tensor_corpus(cfg.cut_oct_count, cfg.seed), cfg)),
        Box::new(move || check_engine_consistency(&tensor_corpus(cfg.engine_tensor_count, cfg.seed ^ 1), cfg)),
    ]
}

fn paley_jobs(cfg: &SuiteConfig) -> Vec<Job<'_>> {
    vec![Box::new(move || run_paley_suite(&odd_primes_up_to(1000), &[13, 31, 61, 101, 199], &[101], 3, 2, cfg))]
}

fn systemcut_jobs(cfg: &SuiteConfig) -> Vec<Job<'_>> {
    let mut jobs: Vec<Job<'_>> = vec![Box::new(move || check_sf_recursion(8, cfg))];
    for (k, d) in [(2, 1), (3, 1), (3, 2), (4, 1)] {
        jobs.push(Box::new(move || check_lemma_structure(k, d, cfg)));
    }
    for (k, d, n) in [(2, 1, 2), (2, 1, 3), (3, 1, 2)] {
        jobs.push(Box::new(move || {
            let group = FiniteAbelianGroup::cyclic(n)?;
            check_lemma_numeric(k, d, &bounded_function_corpus(&group, cfg.lemma_count, cfg.seed)?, cfg)
        }));
    }
    jobs
}

fn equiv_jobs(cfg: &SuiteConfig) -> Vec<Job<'_>> {
    let mut jobs: Vec<Job<'_>> = vec![
        Box::new(move || check_uk_oct_identity(&function_corpus(cfg.uk_oct_count, cfg.seed)?, cfg)),
        Box::new(move || {
            let groups = [FiniteAbelianGroup::cyclic(2)?, FiniteAbelianGroup::cyclic(3)?];
            check_main_theorem_exhaustive(&groups, &[(2, 1), (3, 1)], cfg)
        }),
        Box::new(move || {
            let g = FiniteAbelianGroup::cyclic(5)?;
            let qr = AdditiveSet::new(&g, quadratic_residues(5)?)?;
            Ok(vec![check_main_theorem_i(&qr, 3, 1, Engine::Alternating, cfg)?])
        }),
        Box::new(move || check_towsner_mnorm(&weighted_graph_corpus(cfg.mnorm_count, cfg.seed), cfg)),
        Box::new(move || check_edge_selection(&[(2, 1), (3, 1), (3, 2)], cfg)),
    ];
    for p in [5u64, 7] {
        jobs.push(Box::new(move || {
            let mut out = Vec::new();
            for set in equivalence_sets(p, cfg.seed)? {
                out.extend(check_equivalence_identities(&set, &[2, 3, 4], 1, cfg)?);
            }
            Ok(out)
        }));
    }
    for n in [5u64, 6] {
        jobs.push(Box::new(move || {
            let g = FiniteAbelianGroup::cyclic(n)?;
            let sets = pattern_sets(&g, cfg.seed)?;
            sets.iter().map(|s| check_pattern_agreement(s, 2, 1, cfg)).collect()
        }));
    }
    jobs
}

/// `Q_p` and a seeded random set of `Z_p`.
pub fn equivalence_sets(p: u64, seed: u64) -> Result<Vec<AdditiveSet>> {
    let g = FiniteAbelianGroup::cyclic(p)?;
    let mut rng = stream(seed, 7, p as usize);
    let mask = g.elements().map(|_| rng.random_bool(0.5)).collect();
    Ok(vec![AdditiveSet::new(&g, quadratic_residues(p)?)?, AdditiveSet::from_mask(&g, mask)])
}

/// Quadratic residues when the order is prime, plus seeded random sets.
pub fn pattern_sets(group: &FiniteAbelianGroup, seed: u64) -> Result<Vec<AdditiveSet>> {
    let n = group.order() as u64;
    let mut out = Vec::new();
    if is_prime(n) {
        out.push(AdditiveSet::new(group, quadratic_residues(n)?)?);
    }
    for i in 0..3 {
        let mut rng = stream(seed, 8, n as usize * 8 + i);
        out.push(AdditiveSet::from_mask(group, group.elements().map(|_| rng.random_bool(0.5)).collect()));
    }
    Ok(out)
}

fn general_jobs(cfg: &SuiteConfig) -> Vec<Job<'_>> {
    vec![Box::new(move || run_general_cayley_suite(&[1, 2, 3], &[9, 15], cfg))]
}

/// Runs a suite; checks run concurrently and are reported sorted by id.
pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let jobs: Vec<Job<'_>> = match suite {
        Suite::Norms => norms_jobs(cfg),
        Suite::Paley => paley_jobs(cfg),
        Suite::SystemCut => systemcut_jobs(cfg),
        Suite::Equiv => equiv_jobs(cfg),
        Suite::General => general_jobs(cfg),
        Suite::All => [norms_jobs(cfg), paley_jobs(cfg), systemcut_jobs(cfg), equiv_jobs(cfg), general_jobs(cfg)]
            .into_iter()
            .flatten()
            .collect(),
    };
    let nested: Vec<Vec<CheckResult>> = jobs.par_iter().map(|job| job()).collect::<Result<_>>()?;
    let mut results: Vec<CheckResult> = nested.into_iter().flatten().collect();
    results.sort_by(|a, b| a.check_id.cmp(&b.check_id));
    Ok(results)
}

/// One JSON object per line.
pub fn to_jsonl(results: &[CheckResult]) -> Result<String> {
    let mut out = String::new();
    for r in results {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations() {
        assert!(Relation::Le.holds(1.0, 1.0, 0.0));
        assert!(!Relation::Lt.holds(1.0, 1.0, 0.0));
        assert!(Relation::Eq.holds(1.0, 1.0 + 1e-12, 1e-10));
        assert!(!Relation::Ge.holds(f64::NAN, 0.0, 1.0));
    }

    #[test]
    fn report_line_shape() {
        let r = CheckResult::new("x/1", params! {"k" => 2}, 0.5, 1.0, Relation::Le, 1e-9, Label::NecessaryCondition);
        let line = serde_json::to_string(&r).unwrap();
        assert!(line.contains(r#""relation":"<=""#) && line.contains(r#""label":"necessary-condition""#));
        assert!(!line.contains("runtime_ms"));
    }

    #[test]
    fn main_theorem_examples() {
        let cfg = SuiteConfig::default();
        let z2 = FiniteAbelianGroup::cyclic(2).unwrap();
        let r = check_main_theorem_i(&AdditiveSet::new(&z2, [0]).unwrap(), 2, 1, Engine::Exact, &cfg).unwrap();
        assert!(r.passed);
        assert!((r.lhs - 0.125).abs() < 1e-15 && (r.rhs - 0.5).abs() < 1e-15);
    }

    #[test]
    fn trivial_set_identities() {
        let cfg = SuiteConfig::default();
        let g = FiniteAbelianGroup::cyclic(5).unwrap();
        let rs = check_equivalence_identities(&AdditiveSet::full(&g), &[2, 3], 1, &cfg).unwrap();
        assert!(all_passed(&rs));
        assert!(rs.iter().filter(|r| !r.check_id.contains("simple")).all(|r| r.lhs.abs() < 1e-12));
    }

    #[test]
    fn small_lemma_run() {
        let cfg = SuiteConfig::default();
        let g = FiniteAbelianGroup::cyclic(3).unwrap();
        let f = GroupFunction::new(&g, vec![2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0]).unwrap();
        let rs = check_lemma_numeric(2, 1, &[f], &cfg).unwrap();
        assert!(all_passed(&rs), "{rs:#?}");
        assert!(all_passed(&check_lemma_structure(3, 2, &cfg).unwrap()));
    }

    #[test]
    fn c_kd_value() {
        assert_eq!(c_kd(2, 1), 2f64.powi(-48));
    }
}
