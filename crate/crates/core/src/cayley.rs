//! Cayley hypergraphs `Gamma_A = A o Sigma`, their linear-form
//! generalizations, the Paley graphs, and the two counterexample families.

use std::sync::Arc;

use itertools::Itertools;
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::function::{AdditiveSet, GroupFunction};
use crate::group::{quadratic_residues, Element, FiniteAbelianGroup};
use crate::hypergraph::Hypergraph;
use crate::sampling;
use crate::scalar::Scalar;
use crate::tensor::increment_row_major;

/// What a Cayley hypergraph evaluates at `phi(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload<T> {
    Set(AdditiveSet),
    Function(GroupFunction<T>),
}

impl<T: Scalar> Payload<T> {
    pub fn group(&self) -> &FiniteAbelianGroup {
        match self {
            Payload::Set(a) => a.group(),
            Payload::Function(f) => f.group(),
        }
    }

    fn values(&self) -> Arc<[T]> {
        match self {
            Payload::Set(a) => a.mask().iter().map(|&b| if b { T::one() } else { T::zero() }).collect(),
            Payload::Function(f) => f.values().into(),
        }
    }

    fn is_weighted(&self) -> bool {
        matches!(self, Payload::Function(_))
    }
}

/// `H(x_1..x_k) = payload(lambda_1 x_1 + ... + lambda_k x_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CayleySpec<T> {
    pub k: usize,
    pub payload: Payload<T>,
    pub coefficients: Vec<i64>,
}

impl<T: Scalar> CayleySpec<T> {
    pub fn classical(k: usize, payload: Payload<T>) -> Self {
        CayleySpec { k, payload, coefficients: vec![1; k] }
    }

    pub fn general(coefficients: Vec<i64>, payload: Payload<T>) -> Self {
        CayleySpec { k: coefficients.len(), payload, coefficients }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        self.payload.group()
    }

    pub fn is_classical(&self) -> bool {
        self.coefficients.iter().all(|&c| c == 1)
    }

    /// Symmetric graph for all-ones coefficients, partite otherwise.
    pub fn build(&self) -> Result<Hypergraph<T>> {
        if self.coefficients.len() != self.k {
            return Err(Error::param(format!(
                "{} coefficients given for arity {}",
                self.coefficients.len(),
                self.k
            )));
        }
        if self.is_classical() {
            cayley_graph(self.k, &self.payload)
        } else {
            general_cayley(&self.coefficients, &self.payload)
        }
    }
}

/// `Gamma^(k)_A` or `Gamma^(k)_f`: the payload composed with the summing map.
pub fn cayley_graph<T: Scalar>(k: usize, payload: &Payload<T>) -> Result<Hypergraph<T>> {
    if k < 2 {
        return Err(Error::param("Cayley hypergraphs need k >= 2"));
    }
    let group = payload.group().clone();
    let values = payload.values();
    let n = group.order();
    Ok(Hypergraph::from_weights(
        k,
        n,
        move |x| values[group.sum(x.iter().copied())].clone(),
        payload.is_weighted(),
    ))
}

/// `Gamma^phi_A` for `phi = sum lambda_i x_i`, as a `k`-partite graph.
pub fn general_cayley<T: Scalar>(coefficients: &[i64], payload: &Payload<T>) -> Result<Hypergraph<T>> {
    if coefficients.len() < 2 {
        return Err(Error::param("general Cayley hypergraphs need k >= 2"));
    }
    let group = payload.group().clone();
    let values = payload.values();
    let n = group.order();
    let tables: Vec<Vec<Element>> = coefficients
        .iter()
        .map(|&l| group.elements().map(|x| group.scalar_mul(l, x)).collect())
        .collect();
    Ok(Hypergraph::from_weights(
        coefficients.len(),
        n,
        move |x| {
            let s = x.iter().zip(&tables).fold(0, |acc, (&xi, t)| group.add(acc, t[xi]));
            values[s].clone()
        },
        payload.is_weighted(),
    )
    .into_partite())
}

/// Checks `Gamma^phi(x) = Gamma(lambda_1 x_1, .., lambda_k x_k)` on every tuple,
/// and that each `x -> lambda_i x` is a bijection. False for non-coprime forms.
pub fn verify_coprime_relabeling<T: Scalar>(coefficients: &[i64], payload: &Payload<T>, cap: usize) -> Result<bool> {
    let group = payload.group();
    if !group.is_coprime_form(coefficients) {
        return Ok(false);
    }
    let general = general_cayley(coefficients, payload)?;
    let classical = cayley_graph(coefficients.len(), payload)?;
    let n = group.order();
    let k = coefficients.len();
    let entries = crate::budget::cost_pow(n, k);
    if entries > cap as u128 {
        return Err(Error::Budget { what: "relabeling check tuples", needed: entries, cap: cap as u128 });
    }
    for &l in coefficients {
        let mut image: Vec<Element> = group.elements().map(|x| group.scalar_mul(l, x)).collect();
        image.sort_unstable();
        image.dedup();
        if image.len() != n {
            return Ok(false);
        }
    }
    let mut x = vec![0usize; k];
    let mut y = vec![0usize; k];
    loop {
        for i in 0..k {
            y[i] = group.scalar_mul(coefficients[i], x[i]);
        }
        if general.value(&x) != classical.value(&y) {
            return Ok(false);
        }
        if !increment_row_major(&mut x, n) {
            return Ok(true);
        }
    }
}

/// `P^(k)(p) = Gamma^(k)_{Q_p}`.
pub fn paley_graph<T: Scalar>(p: u64, k: usize) -> Result<Hypergraph<T>> {
    let group = FiniteAbelianGroup::cyclic(p)?;
    let qr = AdditiveSet::new(&group, quadratic_residues(p)?)?;
    cayley_graph(k, &Payload::Set(qr))
}

/// `P^(k)_d(p)`: every `d` of the `k` coordinates sum into `Q_p`.
pub fn paley_clique_graph<T: Scalar>(p: u64, k: usize, d: usize) -> Result<Hypergraph<T>> {
    if d < 2 || d >= k {
        return Err(Error::param(format!("Paley clique graph needs 2 <= d < k, got k={k}, d={d}")));
    }
    let mut is_square = vec![false; p as usize];
    for r in quadratic_residues(p)? {
        is_square[r] = true;
    }
    let subsets: Vec<Vec<usize>> = (0..k).combinations(d).collect();
    let p = p as usize;
    Ok(Hypergraph::from_indicator(k, p, move |x| {
        subsets.iter().all(|b| is_square[b.iter().map(|&i| x[i]).sum::<usize>() % p])
    }))
}

/// A group, a set and a linear form assembled as a counterexample.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub group: FiniteAbelianGroup,
    pub set: AdditiveSet,
    pub coefficients: Vec<i64>,
    /// The auxiliary set `R`, as indices in `F_2^n` or `Z_N`.
    pub r: Vec<usize>,
}

/// `G = F_2^n x F_3^n`, `A = R (+) F_3^n` with `|R| = 2^{n-1}` drawn from `seed`,
/// `phi = 3x_1 + 2x_2`.
pub fn build_surjective_counterexample(n: u32, seed: u64) -> Result<Counterexample> {
    check_range("n", n as u64, 1, 10)?;
    let mut pool: Vec<usize> = (0..1usize << n).collect();
    pool.shuffle(&mut sampling::rng(seed));
    pool.truncate(1 << (n - 1));
    pool.sort_unstable();
    surjective_counterexample_with(n, pool)
}

/// As [`build_surjective_counterexample`] with an explicit `R`. Elements of
/// `F_2^n` are read as binary numbers, first coordinate most significant.
pub fn surjective_counterexample_with(n: u32, r: Vec<usize>) -> Result<Counterexample> {
    check_range("n", n as u64, 1, 10)?;
    let mut moduli = vec![2u64; n as usize];
    moduli.extend(std::iter::repeat_n(3u64, n as usize));
    let group = FiniteAbelianGroup::new(&moduli)?;
    let block = 3usize.pow(n);
    let mut in_r = vec![false; 1 << n];
    for &x in &r {
        *in_r.get_mut(x).ok_or_else(|| Error::param(format!("{x} is not in F_2^{n}")))? = true;
    }
    let set = AdditiveSet::from_mask(&group, group.elements().map(|x| in_r[x / block]).collect());
    Ok(Counterexample { group, set, coefficients: vec![3, 2], r })
}

/// `G = F_2 x Z_N`, `A = {0} (+) 2R` with `|R| = floor(N/2)` drawn from `seed`,
/// `phi = 2x_1 + ... + 2x_d`.
pub fn build_nonsurjective_counterexample(modulus: u64, d: usize, seed: u64) -> Result<Counterexample> {
    check_nonsurjective(modulus, d)?;
    let mut pool: Vec<usize> = (0..modulus as usize).collect();
    pool.shuffle(&mut sampling::rng(seed));
    pool.truncate(modulus as usize / 2);
    pool.sort_unstable();
    nonsurjective_counterexample_with(modulus, d, pool)
}

pub fn nonsurjective_counterexample_with(modulus: u64, d: usize, r: Vec<usize>) -> Result<Counterexample> {
    check_nonsurjective(modulus, d)?;
    let group = FiniteAbelianGroup::new(&[2, modulus])?;
    let n = modulus as usize;
    let members = r
        .iter()
        .map(|&y| if y < n { Ok(2 * y % n) } else { Err(Error::param(format!("{y} is not in Z_{n}"))) })
        .collect::<Result<Vec<_>>>()?;
    let set = AdditiveSet::new(&group, members)?;
    Ok(Counterexample { group, set, coefficients: vec![2; d], r })
}

fn check_nonsurjective(modulus: u64, d: usize) -> Result<()> {
    if modulus % 2 == 0 {
        return Err(Error::param(format!("N must be odd, got {modulus}")));
    }
    check_range("N", modulus, 3, 99)?;
    if d < 2 {
        return Err(Error::param("the form needs at least two variables"));
    }
    Ok(())
}

fn check_range(name: &str, value: u64, lo: u64, hi: u64) -> Result<()> {
    if value < lo || value > hi {
        return Err(Error::param(format!("{name} = {value} outside {lo}..={hi}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::Limits;
    use num_rational::BigRational;
    use num_traits::One;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn paley_and_parity_densities() {
        let lim = Limits::default();
        assert_eq!(paley_graph::<BigRational>(7, 2).unwrap().edge_density(&lim).unwrap(), q(4, 7));
        let z2 = FiniteAbelianGroup::cyclic(2).unwrap();
        let zero = AdditiveSet::new(&z2, [0]).unwrap();
        let h = cayley_graph::<BigRational>(2, &Payload::Set(zero)).unwrap();
        assert!(h.value(&[1, 1]).is_one() && h.value(&[0, 1]) == q(0, 1));
        let full = cayley_graph::<BigRational>(3, &Payload::Set(AdditiveSet::full(&z2))).unwrap();
        assert!(full.edge_density(&lim).unwrap().is_one());
        assert!(paley_graph::<f64>(9, 2).is_err());
    }

    #[test]
    fn general_form_examples() {
        let z5 = FiniteAbelianGroup::cyclic(5).unwrap();
        let a = Payload::<f64>::Set(AdditiveSet::new(&z5, [1, 4]).unwrap());
        assert!(verify_coprime_relabeling(&[2, 3], &a, 1 << 20).unwrap());
        let g = FiniteAbelianGroup::new(&[2, 3]).unwrap();
        let a = AdditiveSet::new(&g, [0, 1, 2]).unwrap();
        let h = general_cayley::<BigRational>(&[3, 2], &Payload::Set(a)).unwrap();
        assert!(h.is_partite());
        assert_eq!(h.edge_density(&Limits::default()).unwrap(), q(1, 2));
        for x1 in g.elements() {
            for x2 in g.elements() {
                assert_eq!(h.value(&[x1, x2]).is_one(), x1 < 3);
            }
        }
    }

    #[test]
    fn counterexample_shapes() {
        let c = surjective_counterexample_with(1, vec![0]).unwrap();
        assert_eq!(c.set.members(), &[0, 1, 2]);
        let c = build_surjective_counterexample(3, 0).unwrap();
        assert_eq!(c.set.len() * 2, c.group.order());
        let c = nonsurjective_counterexample_with(3, 2, vec![1]).unwrap();
        assert_eq!(c.set.members(), &[2]);
        assert_eq!(c.set.density::<BigRational>(), q(1, 6));
        assert!(build_nonsurjective_counterexample(10, 2, 0).is_err());
        assert!(build_surjective_counterexample(11, 0).is_err());
    }

    #[test]
    fn paley_clique_rule() {
        let h = paley_clique_graph::<f64>(7, 3, 2).unwrap();
        // 1+2, 1+4, 2+4 mod 7 = 3, 5, 6: none square.
        assert_eq!(h.value(&[1, 2, 4]), 0.0);
        // 0+1, 0+0, 1+0 all square.
        assert_eq!(h.value(&[0, 1, 0]), 1.0);
        assert!(h.is_symmetric(1 << 20).unwrap());
        assert!(paley_clique_graph::<f64>(7, 3, 3).is_err());
    }
}
