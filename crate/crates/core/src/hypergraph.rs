//! `k`-uniform hypergraphs with loops, stored densely or as a closure, and
//! homomorphism densities `t(F, H)`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use crate::backtrack::product_mean;
use crate::budget::{cost_pow, ordered_sum, Limits};
use crate::error::{Error, Result};
use crate::sampling::{estimate, Estimate};
use crate::scalar::{powi, Scalar};
use crate::template::TemplateGraph;
use crate::tensor::{increment_row_major, DenseTensor, TensorView};

pub type EdgeFn<T> = Arc<dyn Fn(&[usize]) -> T + Send + Sync>;

#[derive(Clone)]
pub enum Backing<T> {
    Dense(Arc<DenseTensor<T>>),
    Implicit(EdgeFn<T>),
}

/// A `k`-graph on `V = {0..n}` or, when `partite`, a function on
/// `V_1 x ... x V_k` with no symmetry requirement.
///
/// A balanced view `H - c` is kept lazily as a shift on top of the backing.
#[derive(Clone)]
pub struct Hypergraph<T> {
    arity: usize,
    vertex_count: usize,
    backing: Backing<T>,
    shift: Option<T>,
    weighted: bool,
    partite: bool,
}

impl<T: Scalar> fmt::Debug for Hypergraph<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let backing = match self.backing {
            Backing::Dense(_) => "dense",
            Backing::Implicit(_) => "implicit",
        };
        f.debug_struct("Hypergraph")
            .field("arity", &self.arity)
            .field("vertex_count", &self.vertex_count)
            .field("backing", &backing)
            .field("shift", &self.shift)
            .field("weighted", &self.weighted)
            .field("partite", &self.partite)
            .finish()
    }
}

impl<T: Scalar> Hypergraph<T> {
    pub fn from_tensor(tensor: DenseTensor<T>, weighted: bool) -> Self {
        Hypergraph {
            arity: tensor.arity(),
            vertex_count: tensor.side(),
            backing: Backing::Dense(Arc::new(tensor)),
            shift: None,
            weighted,
            partite: false,
        }
    }

    pub fn from_indicator(arity: usize, vertex_count: usize, edge: impl Fn(&[usize]) -> bool + Send + Sync + 'static) -> Self {
        Self::from_weights(arity, vertex_count, move |x| if edge(x) { T::one() } else { T::zero() }, false)
    }

    pub fn from_weights(
        arity: usize,
        vertex_count: usize,
        weight: impl Fn(&[usize]) -> T + Send + Sync + 'static,
        weighted: bool,
    ) -> Self {
        Hypergraph {
            arity,
            vertex_count,
            backing: Backing::Implicit(Arc::new(weight)),
            shift: None,
            weighted,
            partite: false,
        }
    }

    pub fn complete(arity: usize, vertex_count: usize) -> Self {
        Self::from_indicator(arity, vertex_count, |_| true)
    }

    pub fn empty(arity: usize, vertex_count: usize) -> Self {
        Self::from_indicator(arity, vertex_count, |_| false)
    }

    /// Marks the graph as `k`-partite with class `i` indexed by coordinate `i`.
    pub fn into_partite(mut self) -> Self {
        self.partite = true;
        self
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn is_partite(&self) -> bool {
        self.partite
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.backing, Backing::Dense(_))
    }

    pub fn shift(&self) -> Option<&T> {
        self.shift.as_ref()
    }

    #[inline]
    pub fn value(&self, x: &[usize]) -> T {
        let base = match &self.backing {
            Backing::Dense(t) => t.get(x).clone(),
            Backing::Implicit(f) => f(x),
        };
        match &self.shift {
            Some(c) => base - c.clone(),
            None => base,
        }
    }

    /// Materialized copy, including any shift.
    pub fn densify(&self, cap: usize) -> Result<Self> {
        let tensor = DenseTensor::from_view(self, cap)?;
        Ok(Hypergraph {
            arity: self.arity,
            vertex_count: self.vertex_count,
            backing: Backing::Dense(Arc::new(tensor)),
            shift: None,
            weighted: self.weighted,
            partite: self.partite,
        })
    }

    pub fn to_tensor(&self, cap: usize) -> Result<DenseTensor<T>> {
        DenseTensor::from_view(self, cap)
    }

    /// `H - c` as a lazy weighted view.
    pub fn shifted(&self, c: T) -> Self {
        let total = match &self.shift {
            Some(s) => s.clone() + c,
            None => c,
        };
        Hypergraph { shift: Some(total), weighted: true, ..self.clone() }
    }

    /// `H - delta(H)`.
    pub fn balanced(&self, limits: &Limits) -> Result<Self> {
        Ok(self.shifted(self.edge_density(limits)?))
    }

    /// `E_{x in V^k} H(x)` by full enumeration.
    pub fn edge_density(&self, limits: &Limits) -> Result<T> {
        limits.check("edge density evaluations", self.entries())?;
        let n = self.vertex_count;
        let k = self.arity;
        let total = ordered_sum(n, |first| {
            let mut x = vec![0usize; k];
            x[0] = first;
            let mut parts = Vec::with_capacity(cost_pow(n, k - 1) as usize);
            loop {
                parts.push(self.value(&x));
                if !increment_row_major(&mut x[1..], n) {
                    break;
                }
            }
            T::sum_iter(parts)
        });
        Ok(total / powi(&T::from_int(n as i64), k as u32))
    }

    pub fn edge_density_mc(&self, samples: u64, seed: u64) -> Result<Estimate> {
        let mut x = vec![0usize; self.arity];
        let n = self.vertex_count;
        estimate(samples, seed, |rng| {
            x.iter_mut().for_each(|xi| *xi = rng.random_range(0..n));
            self.value(&x).to_f64()
        })
    }

    /// Invariance under adjacent transpositions on every tuple.
    pub fn is_symmetric(&self, cap: usize) -> Result<bool> {
        let entries = self.entries();
        if entries > cap as u128 {
            return Err(Error::Budget { what: "exhaustive symmetry check", needed: entries, cap: cap as u128 });
        }
        let n = self.vertex_count;
        let k = self.arity;
        Ok((0..n).into_par_iter().all(|first| {
            let mut x = vec![0usize; k];
            x[0] = first;
            loop {
                if !self.symmetric_at(&x) {
                    return false;
                }
                if !increment_row_major(&mut x[1..], n) {
                    return true;
                }
            }
        }))
    }

    pub fn is_symmetric_sampled(&self, samples: u64, seed: u64) -> bool {
        let mut rng = crate::sampling::rng(seed);
        let mut x = vec![0usize; self.arity];
        (0..samples).all(|_| {
            x.iter_mut().for_each(|xi| *xi = rng.random_range(0..self.vertex_count));
            self.symmetric_at(&x)
        })
    }

    fn symmetric_at(&self, x: &[usize]) -> bool {
        let v = self.value(x);
        let mut y = x.to_vec();
        (0..self.arity.saturating_sub(1)).all(|i| {
            y.swap(i, i + 1);
            let same = self.value(&y) == v;
            y.swap(i, i + 1);
            same
        })
    }
}

impl<T: Scalar> TensorView<T> for Hypergraph<T> {
    fn arity(&self) -> usize {
        self.arity
    }

    fn side(&self) -> usize {
        self.vertex_count
    }

    fn value(&self, x: &[usize]) -> T {
        Hypergraph::value(self, x)
    }
}

fn template_edges<T: Scalar>(f: &TemplateGraph, h: &Hypergraph<T>) -> Result<Vec<Vec<usize>>> {
    if h.partite {
        (0..f.edge_count()).map(|e| f.edge_by_class(e)).collect()
    } else {
        Ok(f.edges().to_vec())
    }
}

/// `t(F, H) = E_{x in V^{V(F)}} prod_{e in F} H(x_e)`, exact by backtracking.
///
/// Zero factors prune the subtree. The budget counts edge evaluations actually
/// performed. For a partite `H`, each edge is evaluated with its vertices in
/// partition-class order.
pub fn hom_density<T: Scalar>(f: &TemplateGraph, h: &Hypergraph<T>, limits: &Limits) -> Result<T> {
    check_arity(f, h)?;
    let edges = template_edges(f, h)?;
    product_mean(
        f.vertex_count(),
        h.vertex_count,
        &edges,
        |_, x| h.value(x),
        limits.eval_budget,
        "homomorphism density edge evaluations",
    )
}

/// Monte Carlo `t(F, H)`: uniform maps `V(F) -> V(H)`.
pub fn hom_density_mc<T: Scalar>(f: &TemplateGraph, h: &Hypergraph<T>, samples: u64, seed: u64) -> Result<Estimate> {
    check_arity(f, h)?;
    let edges = template_edges(f, h)?;
    let mut x = vec![0usize; f.vertex_count()];
    let mut buf = vec![0usize; h.arity];
    estimate(samples, seed, |rng| {
        x.iter_mut().for_each(|xi| *xi = rng.random_range(0..h.vertex_count));
        edges
            .iter()
            .map(|e| {
                buf.iter_mut().zip(e).for_each(|(slot, &v)| *slot = x[v]);
                h.value(&buf).to_f64()
            })
            .product()
    })
}

fn check_arity<T: Scalar>(f: &TemplateGraph, h: &Hypergraph<T>) -> Result<()> {
    if f.arity() != h.arity {
        return Err(Error::param(format!(
            "template is a {}-graph but the host is a {}-graph",
            f.arity(),
            h.arity
        )));
    }
    if h.vertex_count == 0 {
        return Err(Error::param("host hypergraph has no vertices"));
    }
    Ok(())
}

/// `N_F(H)` lies in `center +- slack`.
#[derive(Debug, Clone, PartialEq)]
pub struct CopyCount<T> {
    pub center: T,
    pub slack: T,
}

impl<T: Scalar> CopyCount<T> {
    pub fn contains(&self, count: &T) -> bool {
        let gap = count.clone() - self.center.clone();
        gap.abs() <= self.slack
    }
}

/// Labelled copies of `F`: `t(F,H) v(H)^{v(F)} +- binom(v(F),2) v(H)^{v(F)-1}`.
pub fn labelled_copy_count<T: Scalar>(f: &TemplateGraph, h: &Hypergraph<T>, limits: &Limits) -> Result<CopyCount<T>> {
    let t = hom_density(f, h, limits)?;
    let n = T::from_int(h.vertex_count as i64);
    let v = f.vertex_count() as u32;
    let pairs = T::from_int((v as i64) * (v as i64 - 1) / 2);
    Ok(CopyCount {
        center: t * powi(&n, v),
        slack: pairs * powi(&n, v.saturating_sub(1)),
    })
}

/// `t(Oct^(k)_d, H - delta)`, with `Oct^(k)` for `d = k`.
pub fn deviation<T: Scalar>(h: &Hypergraph<T>, d: usize, limits: &Limits) -> Result<T> {
    let template = deviation_template(h.arity, d)?;
    hom_density(&template, &h.balanced(limits)?, limits)
}

pub fn deviation_template(k: usize, d: usize) -> Result<TemplateGraph> {
    match d {
        0 => Err(Error::param("deviation order must be at least 1")),
        d if d == k => TemplateGraph::octahedron(k),
        d if d < k => TemplateGraph::squashed_octahedron(k, d),
        _ => Err(Error::param(format!("deviation order {d} exceeds arity {k}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::{One, Zero};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn trivial_densities() {
        let lim = Limits::default();
        let full = Hypergraph::<BigRational>::complete(3, 2);
        let none = Hypergraph::<BigRational>::empty(3, 4);
        assert!(full.edge_density(&lim).unwrap().is_one());
        assert!(none.edge_density(&lim).unwrap().is_zero());
        let m = TemplateGraph::complete_pattern(3, 1).unwrap();
        assert!(hom_density(&m, &full, &lim).unwrap().is_one());
        let edge = TemplateGraph::single_edge(3).unwrap();
        assert!(hom_density(&edge, &none, &lim).unwrap().is_zero());
    }

    #[test]
    fn four_cycle_on_balanced_z2_point() {
        // f = 1_{0} - 1/2 on Z_2, H(x, y) = f(x + y).
        let h = Hypergraph::from_weights(2, 2, |x| if (x[0] + x[1]) % 2 == 0 { q(1, 2) } else { q(-1, 2) }, true);
        let oct = TemplateGraph::octahedron(2).unwrap();
        assert_eq!(hom_density(&oct, &h, &Limits::default()).unwrap(), q(1, 16));
    }

    #[test]
    fn copy_count_formula() {
        let edge = TemplateGraph::single_edge(2).unwrap();
        let full = Hypergraph::<BigRational>::complete(2, 3);
        let c = labelled_copy_count(&edge, &full, &Limits::default()).unwrap();
        assert_eq!((c.center, c.slack), (q(9, 1), q(3, 1)));
        let none = Hypergraph::<BigRational>::empty(2, 3);
        assert!(labelled_copy_count(&edge, &none, &Limits::default()).unwrap().center.is_zero());
    }

    #[test]
    fn constant_graphs_have_zero_deviation() {
        let lim = Limits::default();
        for d in 1..=3 {
            assert!(deviation(&Hypergraph::<BigRational>::complete(3, 3), d, &lim).unwrap().is_zero());
            assert!(deviation(&Hypergraph::<BigRational>::empty(3, 3), d, &lim).unwrap().is_zero());
        }
        assert!(deviation(&Hypergraph::<f64>::complete(2, 3), 3, &lim).is_err());
    }

    #[test]
    fn budget_aborts() {
        let lim = Limits { eval_budget: 1000, ..Limits::default() };
        let m = TemplateGraph::complete_pattern(3, 1).unwrap();
        let full = Hypergraph::<f64>::complete(3, 5);
        assert!(matches!(hom_density(&m, &full, &lim), Err(Error::Budget { .. })));
    }

    #[test]
    fn symmetry_checks() {
        let sym = Hypergraph::<f64>::from_indicator(3, 5, |x| (x[0] + x[1] + x[2]) % 5 < 2);
        assert!(sym.is_symmetric(1_000_000).unwrap());
        assert!(sym.is_symmetric_sampled(500, 3));
        let asym = Hypergraph::<f64>::from_indicator(2, 4, |x| x[0] < x[1]);
        assert!(!asym.is_symmetric(1_000_000).unwrap());
    }

    #[test]
    fn monte_carlo_tracks_exact() {
        let h = Hypergraph::<f64>::from_indicator(2, 7, |x| [1, 2, 4].contains(&((x[0] + x[1]) % 7)) || (x[0] + x[1]) % 7 == 0);
        let oct = TemplateGraph::octahedron(2).unwrap();
        let exact = hom_density(&oct, &h, &Limits::default()).unwrap();
        let est = hom_density_mc(&oct, &h, 200_000, 11).unwrap();
        assert!(est.consistent_with(exact, 5.0), "{est:?} vs {exact}");
    }
}
