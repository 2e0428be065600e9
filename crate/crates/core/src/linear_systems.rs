//! Linear systems with 0/1 coefficients: dual forms, normal forms, the
//! `SystemCut` iteration and the pattern system `Phi_{k,d}`.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::backtrack::product_mean;
use crate::budget::Limits;
use crate::error::{Error, Result};
use crate::function::{AdditiveSet, GroupFunction};
use crate::group::FiniteAbelianGroup;
use crate::sampling::{estimate, Estimate};
use crate::scalar::Scalar;

/// Variable `(level, index)`. Level 0 holds `V_0 = {(0,1)..(0,k)}`; level
/// `t >= 1` holds the copy `{(t,1)..(t,d+1)}` introduced at step `t - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(u32, u32)", into = "(u32, u32)")]
pub struct VarId {
    pub level: u32,
    pub index: u32,
}

impl VarId {
    pub fn new(level: u32, index: u32) -> Self {
        VarId { level, index }
    }

    pub fn is_v0(&self) -> bool {
        self.level == 0
    }
}

impl From<(u32, u32)> for VarId {
    fn from((level, index): (u32, u32)) -> Self {
        VarId { level, index }
    }
}

impl From<VarId> for (u32, u32) {
    fn from(v: VarId) -> Self {
        (v.level, v.index)
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.level, self.index)
    }
}

/// `phi(x) = sum_{v in support} x_v`. Ordering is lexicographic on supports.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinearForm01 {
    support: Vec<VarId>,
}

impl LinearForm01 {
    pub fn new<I: IntoIterator<Item = VarId>>(support: I) -> Self {
        let support: BTreeSet<VarId> = support.into_iter().collect();
        LinearForm01 { support: support.into_iter().collect() }
    }

    /// `Sigma_{V_0}` for `|V_0| = k`.
    pub fn sum_v0(k: usize) -> Self {
        Self::new((1..=k as u32).map(|i| VarId::new(0, i)))
    }

    pub fn support(&self) -> &[VarId] {
        &self.support
    }

    /// `|supp(phi) cap V_0|`.
    pub fn weight(&self) -> usize {
        self.support.iter().filter(|v| v.is_v0()).count()
    }

    pub fn uses_level(&self, level: u32) -> bool {
        self.support.iter().any(|v| v.level == level)
    }

    pub fn contains_all(&self, vars: &[VarId]) -> bool {
        vars.iter().all(|v| self.support.binary_search(v).is_ok())
    }

    /// The `2^{d+1} - 1` duals, ordered by `omega` read as an integer with
    /// `omega_1` the least significant bit.
    pub fn dual_forms(&self, d: usize, fresh_level: u32) -> Result<Vec<LinearForm01>> {
        let v0: Vec<VarId> = self.support.iter().copied().filter(VarId::is_v0).collect();
        if v0.len() < d + 1 {
            return Err(Error::param(format!(
                "dual forms need weight at least {}, form has weight {}",
                d + 1,
                v0.len()
            )));
        }
        if fresh_level == 0 || self.uses_level(fresh_level) {
            return Err(Error::param(format!("level {fresh_level} is not fresh for this form")));
        }
        Ok((1u32..1 << (d + 1))
            .map(|omega| {
                let removed: Vec<VarId> = (0..=d).filter(|i| omega >> i & 1 == 1).map(|i| v0[i]).collect();
                let added = (0..=d as u32).filter(|i| omega >> i & 1 == 1).map(|i| VarId::new(fresh_level, i + 1));
                LinearForm01::new(self.support.iter().copied().filter(|v| !removed.contains(v)).chain(added))
            })
            .collect())
    }
}

impl fmt::Display for LinearForm01 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.support.iter().join(","))
    }
}

/// An ordered list of forms with `|V_0| = k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearSystem {
    pub k: usize,
    pub d: usize,
    pub forms: Vec<LinearForm01>,
}

impl LinearSystem {
    /// `w_0(Phi)`, zero for an empty system.
    pub fn weight(&self) -> usize {
        self.forms.iter().map(LinearForm01::weight).max().unwrap_or(0)
    }

    /// `supp(Phi)`, sorted.
    pub fn support(&self) -> Vec<VarId> {
        let all: BTreeSet<VarId> = self.forms.iter().flat_map(|f| f.support.iter().copied()).collect();
        all.into_iter().collect()
    }

    /// `V(Phi) = V_0 cup supp(Phi)`, sorted.
    pub fn variables(&self) -> Vec<VarId> {
        let mut all: BTreeSet<VarId> = self.forms.iter().flat_map(|f| f.support.iter().copied()).collect();
        all.extend((1..=self.k as u32).map(|i| VarId::new(0, i)));
        all.into_iter().collect()
    }

    pub fn with_sum_v0(&self) -> Vec<LinearForm01> {
        let mut forms = self.forms.clone();
        forms.push(LinearForm01::sum_v0(self.k));
        forms
    }

    /// Forms as index lists over `variables()`.
    pub fn form_system(&self) -> FormSystem {
        FormSystem::from_forms(&self.variables(), &self.forms)
    }
}

/// Result of an `s`-normal-form search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalFormReport {
    pub normal: bool,
    /// Per form, a smallest subset of its support in no other support.
    pub witnesses: Vec<Option<Vec<VarId>>>,
}

/// Searches each form for a subset of size at most `s + 1` contained in no
/// other form's support.
pub fn is_s_normal_form(forms: &[LinearForm01], s: usize) -> NormalFormReport {
    let witnesses: Vec<Option<Vec<VarId>>> = forms
        .iter()
        .enumerate()
        .map(|(i, form)| {
            (1..=(s + 1).min(form.support.len())).find_map(|size| {
                form.support.iter().copied().combinations(size).find(|sub| {
                    forms.iter().enumerate().all(|(j, other)| j == i || !other.contains_all(sub))
                })
            })
        })
        .collect();
    NormalFormReport { normal: witnesses.iter().all(Option::is_some), witnesses }
}

/// Step-by-step `SystemCut(k, d)`: yields `Phi_0, Phi_1, ..., Phi_sf`.
///
/// The heavy form is the maximum-weight form with the lexicographically
/// smallest support; its duals take fresh level `s + 1` and are appended.
#[derive(Debug, Clone)]
pub struct SystemCut {
    current: Option<LinearSystem>,
    step: usize,
    chosen: Vec<LinearForm01>,
}

impl SystemCut {
    pub fn new(k: usize, d: usize) -> Result<Self> {
        if d == 0 || k < d + 1 {
            return Err(Error::param(format!("SystemCut needs k >= d + 1 >= 2, got k={k}, d={d}")));
        }
        Ok(SystemCut {
            current: Some(LinearSystem { k, d, forms: vec![LinearForm01::sum_v0(k)] }),
            step: 0,
            chosen: Vec::new(),
        })
    }

    /// Heavy forms picked so far, `psi_0, psi_1, ...`.
    pub fn chosen(&self) -> &[LinearForm01] {
        &self.chosen
    }

    /// Runs to completion without storing intermediate systems; returns `sf`.
    pub fn count(mut self) -> usize {
        while self.advance().is_some() {}
        self.step
    }

    fn advance(&mut self) -> Option<LinearSystem> {
        let system = self.current.take()?;
        if system.weight() > system.d {
            let w = system.weight();
            let (pos, _) = system
                .forms
                .iter()
                .enumerate()
                .filter(|(_, f)| f.weight() == w)
                .min_by(|a, b| a.1.cmp(b.1))
                .expect("a form attains the maximum weight");
            let mut forms = system.forms.clone();
            let heavy = forms.remove(pos);
            let duals = heavy
                .dual_forms(system.d, self.step as u32 + 1)
                .expect("heavy forms have weight > d and levels are fresh");
            forms.extend(duals);
            self.chosen.push(heavy);
            self.step += 1;
            self.current = Some(LinearSystem { forms, ..system.clone() });
        }
        Some(system)
    }
}

impl Iterator for SystemCut {
    type Item = LinearSystem;

    fn next(&mut self) -> Option<LinearSystem> {
        self.advance()
    }
}

/// Full run of `SystemCut(k, d)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemCutRun {
    pub k: usize,
    pub d: usize,
    pub systems: Vec<LinearSystem>,
    pub chosen: Vec<LinearForm01>,
    pub sf: usize,
}

pub fn system_cut(k: usize, d: usize) -> Result<SystemCutRun> {
    let mut it = SystemCut::new(k, d)?;
    let systems: Vec<LinearSystem> = it.by_ref().collect();
    let chosen = it.chosen().to_vec();
    Ok(SystemCutRun { k, d, sf: systems.len() - 1, systems, chosen })
}

/// `sf(n) = 1 + sum_{i=1}^{d+1} binom(d+1, i) sf(n - i)`, zero for `n <= d`.
pub fn sf_recursion(n: usize, d: usize) -> u128 {
    let mut table = vec![0u128; n + 1];
    for m in d + 1..=n {
        let mut total = 1u128;
        let mut binom = 1u128;
        for i in 1..=d + 1 {
            binom = binom * (d + 2 - i) as u128 / i as u128;
            if m >= i {
                total += binom * table[m - i];
            }
        }
        table[m] = total;
    }
    table[n]
}

/// A 0/1 system over variables `0..variables`, forms as index lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormSystem {
    pub variables: usize,
    pub forms: Vec<Vec<usize>>,
}

impl FormSystem {
    pub fn from_forms(variables: &[VarId], forms: &[LinearForm01]) -> Self {
        let forms = forms
            .iter()
            .map(|f| {
                f.support()
                    .iter()
                    .map(|v| variables.binary_search(v).expect("variable list covers every support"))
                    .collect()
            })
            .collect();
        FormSystem { variables: variables.len(), forms }
    }
}

/// `Phi_{k,d}`: variables `(j, tau)` with `tau` a 0/1 labelling of the
/// `d`-subsets of `[k] \ {j}`, one form per labelling `sigma` of `binom([k], d)`.
///
/// Variables are ordered by `(j, tau-bitmask)`, forms by `sigma-bitmask`; bit
/// `t` refers to the `t`-th subset in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSystem {
    pub k: usize,
    pub d: usize,
    system: FormSystem,
}

impl PatternSystem {
    pub fn new(k: usize, d: usize) -> Result<Self> {
        if d == 0 || d >= k {
            return Err(Error::param(format!("Phi_(k,d) needs 1 <= d < k, got k={k}, d={d}")));
        }
        let subsets: Vec<Vec<usize>> = (0..k).combinations(d).collect();
        if subsets.len() > 24 {
            return Err(Error::Budget { what: "pattern system forms", needed: 1u128 << subsets.len(), cap: 1 << 24 });
        }
        let per_class = 1usize << (0..k - 1).combinations(d).count();
        // For class j, positions in `subsets` of the d-subsets avoiding j, in order.
        let avoiding: Vec<Vec<usize>> = (0..k)
            .map(|j| (0..subsets.len()).filter(|&t| !subsets[t].contains(&j)).collect())
            .collect();
        let forms = (0..1usize << subsets.len())
            .map(|sigma| {
                (0..k)
                    .map(|j| {
                        let tau = avoiding[j]
                            .iter()
                            .enumerate()
                            .fold(0usize, |acc, (bit, &t)| acc | (sigma >> t & 1) << bit);
                        j * per_class + tau
                    })
                    .collect()
            })
            .collect();
        Ok(PatternSystem { k, d, system: FormSystem { variables: k * per_class, forms } })
    }

    pub fn variable_count(&self) -> usize {
        self.system.variables
    }

    pub fn form_count(&self) -> usize {
        self.system.forms.len()
    }

    pub fn form_system(&self) -> &FormSystem {
        &self.system
    }

    /// Names matching the vertices of `M^(k)_d` built by lexicographic doublings.
    pub fn variable_names(&self) -> Vec<String> {
        let per_class = self.variable_count() / self.k;
        let bits = per_class.trailing_zeros() as usize;
        (0..self.variable_count())
            .map(|v| {
                let (j, tau) = (v / per_class, v % per_class);
                let mut name = format!("x{}", j + 1);
                for b in 0..bits {
                    name.push_str(if tau >> b & 1 == 1 { ".1" } else { ".0" });
                }
                name
            })
            .collect()
    }
}

/// `P_x(phi(x) in A for every phi)`, exact.
pub fn pattern_probability<T: Scalar>(system: &FormSystem, set: &AdditiveSet, limits: &Limits) -> Result<T> {
    let group = set.group();
    product_mean(
        system.variables,
        group.order(),
        &system.forms,
        |_, x| if set.contains(group.sum(x.iter().copied())) { T::one() } else { T::zero() },
        limits.eval_budget,
        "pattern evaluations",
    )
}

pub fn pattern_probability_mc(system: &FormSystem, set: &AdditiveSet, samples: u64, seed: u64) -> Result<Estimate> {
    let group = set.group();
    let mut x = vec![0usize; system.variables];
    estimate(samples, seed, |rng| {
        x.iter_mut().for_each(|xi| *xi = rng.random_range(0..group.order()));
        let hit = system.forms.iter().all(|f| set.contains(group.sum(f.iter().map(|&v| x[v]))));
        if hit { 1.0 } else { 0.0 }
    })
}

/// `E_x prod_i f_i(phi_i(x))`, exact.
pub fn linear_pattern_mean<T: Scalar>(system: &FormSystem, functions: &[GroupFunction<T>], limits: &Limits) -> Result<T> {
    if functions.len() != system.forms.len() {
        return Err(Error::param(format!(
            "{} functions for {} forms",
            functions.len(),
            system.forms.len()
        )));
    }
    let group: &FiniteAbelianGroup = match functions.first() {
        Some(f) => f.group(),
        None => return Ok(T::one()),
    };
    if functions.iter().any(|f| f.group() != group) {
        return Err(Error::param("all functions must live on the same group"));
    }
    product_mean(
        system.variables,
        group.order(),
        &system.forms,
        |i, x| functions[i].value(group.sum(x.iter().copied())).clone(),
        limits.eval_budget,
        "linear pattern evaluations",
    )
}
