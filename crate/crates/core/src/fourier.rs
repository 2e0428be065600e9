//! Fourier transform on product groups, Gowers uniformity norms and the
//! `U^{d+1}` dual function.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::budget::{cost_pow, ordered_sum, Limits};
use crate::error::{Error, Result};
use crate::function::{AdditiveSet, GroupFunction};
use crate::group::{Element, FiniteAbelianGroup};
use crate::scalar::{nonnegative_root, powi, Scalar};

/// Fourier coefficients indexed by character, with the same mixed-radix
/// layout as the group elements.
#[derive(Debug, Clone)]
pub struct FourierSpectrum {
    group: FiniteAbelianGroup,
    coefficients: Vec<Complex64>,
}

impl FourierSpectrum {
    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficient(&self, character: Element) -> Complex64 {
        self.coefficients[character]
    }

    /// `sum |f^(gamma)|^2`, equal to `E f^2` by Parseval.
    pub fn l2_squared(&self) -> f64 {
        f64::sum_iter(self.coefficients.iter().map(|c| c.norm_sqr()))
    }

    /// `sum |f^(gamma)|^4`, equal to `||f||_{U^2}^4`.
    pub fn l4_fourth(&self) -> f64 {
        f64::sum_iter(self.coefficients.iter().map(|c| c.norm_sqr() * c.norm_sqr()))
    }

    /// Largest modulus over the nontrivial characters.
    pub fn max_nontrivial(&self) -> f64 {
        self.coefficients.iter().skip(1).map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// `f^(gamma) = E_x f(x) conj(gamma(x))`, one naive DFT per cyclic factor.
pub fn fourier<T: Scalar>(f: &GroupFunction<T>) -> FourierSpectrum {
    let group = f.group();
    let order = group.order();
    let mut data: Vec<Complex64> = f.values().iter().map(|v| Complex64::new(v.to_f64(), 0.0)).collect();
    let moduli = group.moduli();
    let mut stride = order;
    for &n in moduli {
        let n = n as usize;
        stride /= n;
        let twiddles: Vec<Complex64> = (0..n)
            .map(|t| Complex64::from_polar(1.0, -2.0 * PI * t as f64 / n as f64))
            .collect();
        let block = n * stride;
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for outer in (0..order).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (gamma, slot) in line.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for x in 0..n {
                        acc += data[base + x * stride] * twiddles[(gamma * x) % n];
                    }
                    *slot = acc;
                }
                for (gamma, v) in line.iter().enumerate() {
                    data[base + gamma * stride] = *v;
                }
            }
        }
    }
    let scale = 1.0 / order as f64;
    for c in &mut data {
        *c *= scale;
    }
    FourierSpectrum { group: group.clone(), coefficients: data }
}

fn check_k(k: u32, limits: &Limits) -> Result<()> {
    if k < 2 || k > limits.max_gowers_k {
        return Err(Error::param(format!(
            "Gowers norm order k={k} outside 2..={}",
            limits.max_gowers_k
        )));
    }
    Ok(())
}

/// `||f||_{U^k}^{2^k}` in the scalar type of `f` (exact for rationals).
pub fn gowers_norm_power<T: Scalar>(f: &GroupFunction<T>, k: u32) -> Result<T> {
    gowers_norm_power_with(f, k, &Limits::default())
}

/// Recursive multiplicative-derivative evaluation:
/// `||f||_{U^k}^{2^k} = E_h ||f * T^h f||_{U^{k-1}}^{2^{k-1}}`, bottoming out at
/// `(E f)^2`. Costs about `|G|^k` multiplications.
pub fn gowers_norm_power_with<T: Scalar>(f: &GroupFunction<T>, k: u32, limits: &Limits) -> Result<T> {
    check_k(k, limits)?;
    let order = f.group().order();
    limits.check("gowers norm evaluations", cost_pow(order, k as usize))?;
    let group = f.group();
    let values = f.values();
    let total = ordered_sum(order, |h| {
        let derived = derivative(group, values, h);
        derivative_power(group, &derived, k - 1)
    });
    Ok(total / T::from_int(order as i64))
}

fn derivative<T: Scalar>(group: &FiniteAbelianGroup, values: &[T], h: Element) -> Vec<T> {
    (0..values.len())
        .map(|x| values[x].clone() * values[group.add(x, h)].clone())
        .collect()
}

fn derivative_power<T: Scalar>(group: &FiniteAbelianGroup, values: &[T], k: u32) -> T {
    let n = values.len();
    if k == 1 {
        let mean = T::sum_iter(values.iter().cloned()) / T::from_int(n as i64);
        return mean.clone() * mean;
    }
    let total = T::sum_iter((0..n).map(|h| derivative_power(group, &derivative(group, values, h), k - 1)));
    total / T::from_int(n as i64)
}

/// Direct evaluation of the defining `2^k`-fold average. Intended as a
/// cross-check for small groups only; cost is `|G|^{k+1} 2^k`.
pub fn gowers_norm_power_naive<T: Scalar>(f: &GroupFunction<T>, k: u32) -> Result<T> {
    let limits = Limits::default();
    check_k(k, &limits)?;
    let group = f.group();
    let order = group.order();
    limits.check("naive gowers evaluations", cost_pow(order, k as usize + 1) << k)?;
    let mut points = vec![0usize; 1 << k];
    let mut h = vec![0usize; k as usize];
    let mut total = T::zero();
    loop {
        for x in 0..order {
            fill_cube(group, x, &h, &mut points);
            let prod = points.iter().fold(T::one(), |acc, &p| acc * f.value(p).clone());
            total = total + prod;
        }
        if !odometer(&mut h, order) {
            break;
        }
    }
    Ok(total / T::from_int(order as i64) / powi(&T::from_int(order as i64), k))
}

/// `points[omega] = x + sum_i omega_i h_i` with `omega_i` = bit `i` of `omega`.
fn fill_cube(group: &FiniteAbelianGroup, x: Element, h: &[Element], points: &mut [Element]) {
    points[0] = x;
    for (i, &hi) in h.iter().enumerate() {
        let half = 1usize << i;
        for w in 0..half {
            points[half + w] = group.add(points[w], hi);
        }
    }
}

/// Advances a base-`radix` counter; returns false after wrapping to zero.
pub(crate) fn odometer(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

/// `||f||_{U^k}` as a float, clamping float noise below zero.
pub fn gowers_norm<T: Scalar>(f: &GroupFunction<T>, k: u32) -> Result<f64> {
    let power = gowers_norm_power(f, k)?;
    nonnegative_root(power.to_f64(), 1 << k)
}

pub fn gowers_norm_with<T: Scalar>(f: &GroupFunction<T>, k: u32, limits: &Limits) -> Result<f64> {
    let power = gowers_norm_power_with(f, k, limits)?;
    nonnegative_root(power.to_f64(), 1 << k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformityReport {
    /// `||A - delta||_{U^{d+1}}`.
    pub norm: f64,
    pub uniform: bool,
}

/// Whether `A` is `eps`-uniform of degree `d`.
pub fn is_uniform(set: &AdditiveSet, d: u32, eps: f64) -> Result<UniformityReport> {
    let f = GroupFunction::<f64>::balanced_indicator(set);
    let norm = gowers_norm(&f, d + 1)?;
    Ok(UniformityReport { norm, uniform: norm <= eps })
}

/// `D_{d+1} f(y) = E_{h_1..h_{d+1}} prod_{omega != 0} f(y + omega . h)`.
pub fn dual_function<T: Scalar>(f: &GroupFunction<T>, d: u32) -> Result<GroupFunction<T>> {
    dual_function_with(f, d, &Limits::default())
}

pub fn dual_function_with<T: Scalar>(f: &GroupFunction<T>, d: u32, limits: &Limits) -> Result<GroupFunction<T>> {
    if d < 1 {
        return Err(Error::param("dual function needs d >= 1"));
    }
    let group = f.group();
    let order = group.order();
    let dims = d as usize + 1;
    limits.check(
        "dual function multiplications",
        cost_pow(order, dims + 1).saturating_mul((1u128 << dims) - 1),
    )?;
    let denom = T::from_int(order as i64);
    let samples = powi(&denom, dims as u32);
    let values: Vec<T> = (0..order)
        .into_par_iter()
        .map(|y| {
            // h[0] is the fastest digit; partial sums are taken per full sweep of it.
            let mut h = vec![0usize; dims];
            let mut points = vec![0usize; 1 << dims];
            let mut partials = Vec::new();
            loop {
                let row = (0..order).map(|h0| {
                    h[0] = h0;
                    fill_cube(group, y, &h, &mut points);
                    points[1..].iter().fold(T::one(), |acc, &p| acc * f.value(p).clone())
                });
                partials.push(T::sum_iter(row.collect::<Vec<_>>()));
                h[0] = 0;
                if !odometer(&mut h[1..], order) {
                    break;
                }
            }
            T::sum_iter(partials) / samples.clone()
        })
        .collect();
    GroupFunction::new(group, values)
}
