//! Invariants of the norm engines over random small tensors.

use num_traits::Signed;
use proptest::prelude::*;
use quasirand::budget::Limits;
use quasirand::hypergraph::hom_density;
use quasirand::linear_systems::system_cut;
use quasirand::norms::{
    cut_norm_exact, cut_norm_heuristic, cut_value, gcs_check, oct_norm, oct_norm_power, system_cut_norm,
    system_cut_value,
};
use quasirand::scalar::Scalar;
use quasirand::{
    BigRational, DenseTensor, Engine, EngineBudget, FiniteAbelianGroup, GroupFunction, Hypergraph, TemplateGraph, TensorView,
};

type Q = BigRational;

fn shape() -> impl Strategy<Value = (usize, usize)> {
    proptest::sample::select(vec![(2usize, 2usize), (2, 3), (2, 4), (3, 2), (3, 3)])
}

fn values(k: usize, n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, n.pow(k as u32))
}

fn tensor() -> impl Strategy<Value = DenseTensor<f64>> {
    shape().prop_flat_map(|(k, n)| values(k, n).prop_map(move |v| DenseTensor::new(k, n, v).unwrap()))
}

fn rational_tensor() -> impl Strategy<Value = DenseTensor<Q>> {
    shape().prop_flat_map(|(k, n)| {
        proptest::collection::vec(-4i64..=4, n.pow(k as u32))
            .prop_map(move |v| DenseTensor::new(k, n, v.into_iter().map(|x| Q::from_ratio(x, 3)).collect()).unwrap())
    })
}

fn tensor_pair() -> impl Strategy<Value = (DenseTensor<f64>, DenseTensor<f64>)> {
    shape().prop_flat_map(|(k, n)| {
        (values(k, n), values(k, n))
            .prop_map(move |(a, b)| (DenseTensor::new(k, n, a).unwrap(), DenseTensor::new(k, n, b).unwrap()))
    })
}

fn tensor_family() -> impl Strategy<Value = Vec<DenseTensor<f64>>> {
    shape().prop_flat_map(|(k, n)| {
        proptest::collection::vec(values(k, n), 1 << k)
            .prop_map(move |fs| fs.into_iter().map(|v| DenseTensor::new(k, n, v).unwrap()).collect())
    })
}

fn budget(seed: u64) -> EngineBudget {
    EngineBudget { restarts: 4, seed, ..EngineBudget::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gowers_cauchy_schwarz(fs in tensor_family()) {
        let report = gcs_check(&fs, &Limits::default()).unwrap();
        prop_assert!(report.lhs <= report.rhs + 1e-12, "{} > {}", report.lhs, report.rhs);
        prop_assert!(report.holds);
    }

    #[test]
    fn oct_triangle_inequality((f, g) in tensor_pair()) {
        let limits = Limits::default();
        let sum = oct_norm(&f.add(&g).unwrap(), &limits).unwrap();
        prop_assert!(sum <= oct_norm(&f, &limits).unwrap() + oct_norm(&g, &limits).unwrap() + 1e-9);
    }

    #[test]
    fn oct_power_nonnegative(f in tensor()) {
        prop_assert!(oct_norm_power(&f, &Limits::default()).unwrap() >= -1e-15);
    }

    #[test]
    fn oct_is_hom_density_of_octahedron(f in tensor()) {
        let limits = Limits::default();
        let h = Hypergraph::from_tensor(f.clone(), true).into_partite();
        let t = hom_density(&TemplateGraph::octahedron(f.arity()).unwrap(), &h, &limits).unwrap();
        prop_assert!((t - oct_norm_power(&f, &limits).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn cut_below_oct(f in tensor(), d2 in any::<bool>()) {
        let d = if d2 && f.arity() == 3 { 2 } else { 1 };
        let limits = Limits::default();
        let cut = cut_norm_exact(&f, d, &EngineBudget { exact_bits_cap: 27, ..EngineBudget::default() }, &limits).unwrap();
        prop_assert!(cut.value <= oct_norm(&f, &limits).unwrap() + 1e-12);
    }

    #[test]
    fn heuristic_below_exact(f in tensor(), seed in any::<u64>()) {
        let limits = Limits::default();
        let exact = cut_norm_exact(&f, 1, &EngineBudget::default(), &limits).unwrap();
        let heur = cut_norm_heuristic(&f, 1, &budget(seed), None).unwrap();
        prop_assert!(heur.witness.value <= exact.value + 1e-12);
        for trace in &heur.traces {
            prop_assert!(trace.values.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{:?}", trace.values);
        }
    }

    #[test]
    fn heuristic_from_exact_witness_keeps_it(f in tensor()) {
        let limits = Limits::default();
        let exact = cut_norm_exact(&f, 1, &EngineBudget::default(), &limits).unwrap();
        let heur = cut_norm_heuristic(&f, 1, &budget(0), Some(&exact.sets)).unwrap();
        prop_assert!((heur.witness.value - exact.value).abs() < 1e-12);
    }

    #[test]
    fn cut_nondecreasing_in_d(v in values(3, 2)) {
        let f = DenseTensor::new(3, 2, v).unwrap();
        let limits = Limits::default();
        let b = EngineBudget::default();
        let d1 = cut_norm_exact(&f, 1, &b, &limits).unwrap().value;
        let d2 = cut_norm_exact(&f, 2, &b, &limits).unwrap().value;
        prop_assert!(d1 <= d2 + 1e-12);
    }

    #[test]
    fn witnesses_reevaluate(f in rational_tensor(), seed in any::<u64>()) {
        let limits = Limits::default();
        let exact = cut_norm_exact(&f, 1, &EngineBudget::default(), &limits).unwrap();
        let signed = cut_value(&f, 1, &exact.sets).unwrap();
        prop_assert_eq!(signed.abs(), exact.value.clone());
        prop_assert_eq!(if signed >= Q::from_int(0) { 1 } else { -1 }, exact.sign);
        let heur = cut_norm_heuristic(&f, 1, &budget(seed), None).unwrap().witness;
        prop_assert_eq!(cut_value(&f, 1, &heur.sets).unwrap().abs(), heur.value);
    }

    #[test]
    fn rational_and_float_agree(f in rational_tensor()) {
        let limits = Limits::default();
        let g: DenseTensor<f64> = f.cast();
        let b = EngineBudget::default();
        prop_assert!((oct_norm_power(&f, &limits).unwrap().to_f64() - oct_norm_power(&g, &limits).unwrap()).abs() < 1e-12);
        let exact_q = cut_norm_exact(&f, 1, &b, &limits).unwrap().value.to_f64();
        let exact_f = cut_norm_exact(&g, 1, &b, &limits).unwrap().value;
        prop_assert!((exact_q - exact_f).abs() < 1e-12);
    }

    #[test]
    fn system_cut_engines(v in proptest::collection::vec(-1.0f64..1.0, 3), seed in any::<u64>()) {
        let f = GroupFunction::new(&FiniteAbelianGroup::cyclic(3).unwrap(), v).unwrap();
        let limits = Limits::default();
        for system in system_cut(2, 1).unwrap().systems {
            let exact = system_cut_norm(&f, &system, Engine::Exact, &budget(seed), &limits).unwrap();
            let alt = system_cut_norm(&f, &system, Engine::Alternating, &budget(seed), &limits).unwrap();
            prop_assert!(alt.value <= exact.value + 1e-12);
            if !exact.signs.is_empty() {
                let again = system_cut_value(&f, &system, &exact.signs, &limits).unwrap();
                prop_assert!((again.abs() - exact.value).abs() < 1e-12);
            }
        }
    }
}
