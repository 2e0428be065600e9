//! Brute-force oracles compared against the optimized kernels.

use num_traits::Signed;
use proptest::prelude::*;
use quasirand::budget::Limits;
use quasirand::fourier::{dual_function, gowers_norm_power, gowers_norm_power_naive};
use quasirand::hypergraph::hom_density;
use quasirand::linear_systems::system_cut;
use quasirand::norms::{cut_blocks, cut_norm_exact, oct_norm_power, system_cut_norm, system_cut_value};
use quasirand::scalar::Scalar;
use quasirand::{
    BigRational, DenseTensor, Engine, EngineBudget, FiniteAbelianGroup, GroupFunction, Hypergraph, LinearSystem,
    TemplateGraph, TensorView, VarId,
};

type Q = BigRational;

fn q(v: i64) -> Q {
    Q::from_int(v)
}

fn tuples(k: usize, n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..n.pow(k as u32)).map(move |mut i| {
        let mut x = vec![0; k];
        for slot in x.iter_mut().rev() {
            *slot = i % n;
            i /= n;
        }
        x
    })
}

fn tensor_strategy(shapes: &'static [(usize, usize)]) -> impl Strategy<Value = DenseTensor<Q>> {
    proptest::sample::select(shapes).prop_flat_map(|(k, n)| {
        proptest::collection::vec(-3i64..=3, n.pow(k as u32))
            .prop_map(move |v| DenseTensor::new(k, n, v.into_iter().map(q).collect()).unwrap())
    })
}

fn function_strategy(n: u64) -> impl Strategy<Value = GroupFunction<Q>> {
    proptest::collection::vec(-2i64..=2, n as usize).prop_map(move |v| {
        GroupFunction::new(&FiniteAbelianGroup::cyclic(n).unwrap(), v.into_iter().map(q).collect()).unwrap()
    })
}

/// `E_{x0, x1} prod_omega f(x^omega)` by listing both tuples.
fn oct_oracle(f: &DenseTensor<Q>) -> Q {
    let (k, n) = (f.arity(), f.side());
    let mut total = q(0);
    let mut count = 0i64;
    for x0 in tuples(k, n) {
        for x1 in tuples(k, n) {
            let mut prod = q(1);
            for w in 0..1usize << k {
                let x: Vec<usize> = (0..k).map(|i| if w >> i & 1 == 1 { x1[i] } else { x0[i] }).collect();
                prod *= f.value(&x);
            }
            total += prod;
            count += 1;
        }
    }
    total / q(count)
}

/// `max |E f(x) prod_B S_B(x_B)|` over every family of sets.
fn cut_oracle(f: &DenseTensor<Q>, d: usize) -> Q {
    let (k, n) = (f.arity(), f.side());
    let blocks = cut_blocks(k, d).unwrap();
    let cells = n.pow(d as u32);
    let bits = blocks.len() * cells;
    let entries: Vec<Vec<usize>> = tuples(k, n).collect();
    let mut best = q(0);
    for family in 0u64..1 << bits {
        let mut sum = q(0);
        for x in &entries {
            let inside = blocks.iter().enumerate().all(|(b, block)| {
                let cell = block.iter().fold(0, |acc, &i| acc * n + x[i]);
                family >> (b * cells + cell) & 1 == 1
            });
            if inside {
                sum += f.value(x);
            }
        }
        let value = (sum / q(entries.len() as i64)).abs();
        if value > best {
            best = value;
        }
    }
    best
}

/// `t(F, H)` over all maps `V(F) -> [n]`, edges read in partition-class order.
fn hom_oracle(f: &TemplateGraph, t: &DenseTensor<Q>) -> Q {
    let n = t.side();
    let mut total = q(0);
    let mut count = 0i64;
    for x in tuples(f.vertex_count(), n) {
        let mut prod = q(1);
        for e in f.edges() {
            let mut verts = e.clone();
            if let Some(p) = f.partition() {
                verts.sort_by_key(|&v| p[v]);
            }
            let y: Vec<usize> = verts.iter().map(|&v| x[v]).collect();
            prod *= t.value(&y);
        }
        total += prod;
        count += 1;
    }
    total / q(count)
}

/// Unbucketed `E_x f(Sigma_{V_0} x) prod_phi u_phi(phi(x))`.
fn system_oracle(f: &GroupFunction<Q>, system: &LinearSystem, signs: &[Vec<i8>]) -> Q {
    let group = f.group();
    let n = group.order();
    let mut vars: Vec<VarId> = (1..=system.k as u32).map(|i| VarId::new(0, i)).collect();
    for phi in &system.forms {
        vars.extend(phi.support().iter().copied());
    }
    vars.sort();
    vars.dedup();
    let pos = |v: &VarId| vars.iter().position(|w| w == v).unwrap();
    let mut total = q(0);
    let mut count = 0i64;
    for x in tuples(vars.len(), n) {
        let sigma = group.sum((1..=system.k as u32).map(|i| x[pos(&VarId::new(0, i))]));
        let mut value = f.value(sigma).clone();
        for (phi, s) in system.forms.iter().zip(signs) {
            let at = group.sum(phi.support().iter().map(|v| x[pos(v)]));
            if s[at] < 0 {
                value = -value;
            }
        }
        total += value;
        count += 1;
    }
    total / q(count)
}

fn all_signs(m: usize, n: usize) -> impl Iterator<Item = Vec<Vec<i8>>> {
    (0u64..1 << (m * n)).map(move |bits| {
        (0..m)
            .map(|f| (0..n).map(|c| if bits >> (f * n + c) & 1 == 1 { -1 } else { 1 }).collect())
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oct_power_matches_enumeration(f in tensor_strategy(&[(2, 2), (2, 3), (3, 2), (3, 3)])) {
        prop_assert_eq!(oct_norm_power(&f, &Limits::default()).unwrap(), oct_oracle(&f));
    }

    #[test]
    fn exact_cut_matches_all_families(f in tensor_strategy(&[(2, 2), (2, 3), (3, 2), (3, 3)]), d2 in any::<bool>()) {
        let d = if d2 && f.arity() == 3 && f.side() == 2 { 2 } else { 1 };
        let w = cut_norm_exact(&f, d, &EngineBudget::default(), &Limits::default()).unwrap();
        prop_assert_eq!(w.value, cut_oracle(&f, d));
    }

    #[test]
    fn hom_density_matches_enumeration(t in tensor_strategy(&[(2, 2), (2, 3), (3, 2)]), which in 0usize..4) {
        let k = t.arity();
        let template = match which {
            0 => TemplateGraph::single_edge(k).unwrap(),
            1 => TemplateGraph::octahedron(k).unwrap(),
            2 => TemplateGraph::squashed_octahedron(k, 1).unwrap(),
            _ => TemplateGraph::complete_pattern(k, 1).unwrap(),
        };
        let h = Hypergraph::from_tensor(t.clone(), true).into_partite();
        prop_assert_eq!(hom_density(&template, &h, &Limits::default()).unwrap(), hom_oracle(&template, &t));
    }

    #[test]
    fn hom_density_unpartitioned(t in tensor_strategy(&[(2, 2), (2, 3), (3, 2)]), shared in 0usize..2) {
        let template = TemplateGraph::two_edges_sharing(t.arity(), shared).unwrap();
        let h = Hypergraph::from_tensor(t.clone(), true);
        prop_assert_eq!(hom_density(&template, &h, &Limits::default()).unwrap(), hom_oracle(&template, &t));
    }

    #[test]
    fn gowers_recursion_matches_naive(f in function_strategy(5), k in 2u32..=3) {
        prop_assert_eq!(gowers_norm_power(&f, k).unwrap(), gowers_norm_power_naive(&f, k).unwrap());
    }

    #[test]
    fn dual_function_pairs_to_norm_power(f in function_strategy(4), d in 1u32..=2) {
        let dual = dual_function(&f, d).unwrap();
        let pairing = Q::sum_iter(f.values().iter().zip(dual.values()).map(|(a, b)| a * b)) / q(4);
        prop_assert_eq!(pairing, gowers_norm_power(&f, d + 1).unwrap());
    }

    #[test]
    fn system_value_matches_unbucketed(f in function_strategy(3), step in 0usize..2, seed in any::<u64>()) {
        let run = system_cut(2, 1).unwrap();
        let system = &run.systems[step];
        let n = 3;
        let signs: Vec<Vec<i8>> = (0..system.forms.len())
            .map(|i| (0..n).map(|c| if (seed >> ((i * n + c) % 64)) & 1 == 1 { -1 } else { 1 }).collect())
            .collect();
        prop_assert_eq!(
            system_cut_value(&f, system, &signs, &Limits::default()).unwrap(),
            system_oracle(&f, system, &signs)
        );
    }
}

#[test]
fn exact_system_cut_matches_all_signs() {
    let run = system_cut(2, 1).unwrap();
    for n in [2u64, 3] {
        let group = FiniteAbelianGroup::cyclic(n).unwrap();
        let f = GroupFunction::new(&group, (0..n as i64).map(|x| q(2 * x - 1)).collect()).unwrap();
        for system in &run.systems {
            let exact = system_cut_norm(&f, system, Engine::Exact, &EngineBudget::default(), &Limits::default()).unwrap();
            let best = all_signs(system.forms.len(), n as usize)
                .map(|s| system_oracle(&f, system, &s).abs())
                .max()
                .unwrap();
            assert_eq!(exact.value, best, "Z{n}, {} forms", system.forms.len());
        }
    }
}
