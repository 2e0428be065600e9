//! Values derived by hand, frozen as regression anchors.

use quasirand::budget::Limits;
use quasirand::cayley::paley_graph;
use quasirand::fourier::gowers_norm_power;
use quasirand::group::quadratic_residues;
use quasirand::linear_systems::{sf_recursion, system_cut};
use quasirand::norms::{cut_norm_exact, oct_norm_power};
use quasirand::scalar::Scalar;
use quasirand::{AdditiveSet, BigRational, DenseTensor, EngineBudget, FiniteAbelianGroup, GroupFunction};

type Q = BigRational;

fn paley_set(p: u64) -> AdditiveSet {
    let group = FiniteAbelianGroup::cyclic(p).unwrap();
    AdditiveSet::new(&group, quadratic_residues(p).unwrap()).unwrap()
}

/// Squares including zero have `(p + 1) / 2` elements.
#[test]
fn square_counts() {
    for p in [3u64, 5, 7, 11, 13, 101, 997] {
        assert_eq!(paley_set(p).len() as u64, (p + 1) / 2, "p={p}");
    }
}

/// From Gauss sums: `(p-1)(p+1)^2 / (16 p^4)` for `p = 3 mod 4`,
/// `(p-1)(p^2+6p+1) / (16 p^4)` for `p = 1 mod 4`.
#[test]
fn paley_u2_powers() {
    for (p, num, den) in [(3u64, 2, 81), (5, 14, 625), (7, 24, 2401), (11, 90, 14641), (13, 186, 28561)] {
        let f = GroupFunction::<Q>::balanced_indicator(&paley_set(p));
        assert_eq!(gowers_norm_power(&f, 2).unwrap(), Q::from_ratio(num, den), "p={p}");
    }
    let f = GroupFunction::<f64>::balanced_indicator(&paley_set(7));
    let norm = gowers_norm_power(&f, 2).unwrap().powf(0.25);
    assert!((norm - 0.316_194_834_200_091_9).abs() < 1e-15);
}

#[test]
fn sf_values() {
    for (k, d, sf) in [(2, 1, 1), (3, 1, 3), (4, 1, 8), (5, 1, 20), (3, 2, 1), (4, 2, 4), (5, 2, 16), (4, 3, 1)] {
        assert_eq!(system_cut(k, d).unwrap().sf, sf, "k={k} d={d}");
        assert_eq!(sf_recursion(k, d), sf as u128, "k={k} d={d}");
    }
}

#[test]
fn checkerboard_cut_is_quarter() {
    let f = DenseTensor::new(2, 2, [1, -1, -1, 1].map(Q::from_int).to_vec()).unwrap();
    let w = cut_norm_exact(&f, 1, &EngineBudget::default(), &Limits::default()).unwrap();
    assert_eq!(w.value, Q::from_ratio(1, 4));
    assert_eq!(oct_norm_power(&f, &Limits::default()).unwrap(), Q::from_int(1));
}

#[test]
fn constant_tensor_norms() {
    let f = DenseTensor::constant(3, 2, Q::from_ratio(-2, 3));
    let w = cut_norm_exact(&f, 2, &EngineBudget::default(), &Limits::default()).unwrap();
    assert_eq!(w.value, Q::from_ratio(2, 3));
    assert_eq!(w.sign, -1);
    assert_eq!(oct_norm_power(&f, &Limits::default()).unwrap(), Q::from_ratio(256, 6561));
}

/// Edge density of the `k`-uniform Paley graph on `Z_p` is `(p + 1) / (2p)`.
#[test]
fn paley_edge_density() {
    for p in [5u64, 7, 13] {
        let h = paley_graph::<Q>(p, 3).unwrap();
        assert_eq!(h.edge_density(&Limits::default()).unwrap(), Q::from_ratio((p + 1) as i64, 2 * p as i64));
    }
}
