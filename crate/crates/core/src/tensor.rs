//! Functions on `V^k` and the dense row-major tensor used by the norm engines.

use crate::budget::cost_pow;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Read access to a function `V^k -> T`.
pub trait TensorView<T>: Sync {
    fn arity(&self) -> usize;
    fn side(&self) -> usize;
    fn value(&self, x: &[usize]) -> T;

    fn entries(&self) -> u128 {
        cost_pow(self.side(), self.arity())
    }
}

/// Row-major tensor, first coordinate most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor<T> {
    arity: usize,
    side: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseTensor<T> {
    pub fn new(arity: usize, side: usize, data: Vec<T>) -> Result<Self> {
        if arity == 0 || side == 0 {
            return Err(Error::param("tensor needs positive arity and side"));
        }
        if cost_pow(side, arity) != data.len() as u128 {
            return Err(Error::param(format!(
                "tensor data has {} entries, expected {side}^{arity}",
                data.len()
            )));
        }
        Ok(DenseTensor { arity, side, data })
    }

    pub fn from_fn(arity: usize, side: usize, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let len = cost_pow(side, arity) as usize;
        let mut data = Vec::with_capacity(len);
        let mut x = vec![0usize; arity];
        for _ in 0..len {
            data.push(f(&x));
            increment_row_major(&mut x, side);
        }
        DenseTensor { arity, side, data }
    }

    pub fn constant(arity: usize, side: usize, c: T) -> Self {
        Self::from_fn(arity, side, |_| c.clone())
    }

    /// Materializes a view, refusing when it would exceed `cap` entries.
    pub fn from_view<V: TensorView<T> + ?Sized>(view: &V, cap: usize) -> Result<Self> {
        let entries = view.entries();
        if entries > cap as u128 {
            return Err(Error::Budget { what: "dense tensor entries", needed: entries, cap: cap as u128 });
        }
        Ok(Self::from_fn(view.arity(), view.side(), |x| view.value(x)))
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn offset(&self, x: &[usize]) -> usize {
        x.iter().fold(0usize, |acc, &xi| acc * self.side + xi)
    }

    #[inline]
    pub fn get(&self, x: &[usize]) -> &T {
        &self.data[self.offset(x)]
    }

    pub fn map(&self, f: impl Fn(&T) -> T) -> Self {
        DenseTensor { arity: self.arity, side: self.side, data: self.data.iter().map(f).collect() }
    }

    pub fn mean(&self) -> T {
        T::sum_iter(self.data.iter().cloned()) / T::from_int(self.data.len() as i64)
    }

    /// Pointwise sum, for norm axiom checks.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.arity != other.arity || self.side != other.side {
            return Err(Error::param("tensor shape mismatch"));
        }
        Ok(DenseTensor {
            arity: self.arity,
            side: self.side,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b.clone()).collect(),
        })
    }

    pub fn cast<U: Scalar>(&self) -> DenseTensor<U> {
        DenseTensor {
            arity: self.arity,
            side: self.side,
            data: self.data.iter().map(|v| U::from_f64(v.to_f64())).collect(),
        }
    }
}

impl<T: Scalar> TensorView<T> for DenseTensor<T> {
    fn arity(&self) -> usize {
        self.arity
    }

    fn side(&self) -> usize {
        self.side
    }

    #[inline]
    fn value(&self, x: &[usize]) -> T {
        self.get(x).clone()
    }
}

/// Advances `x` in row-major order (last coordinate fastest). Returns false on wrap.
pub(crate) fn increment_row_major(x: &mut [usize], side: usize) -> bool {
    for xi in x.iter_mut().rev() {
        *xi += 1;
        if *xi < side {
            return true;
        }
        *xi = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_layout() {
        let t = DenseTensor::from_fn(2, 3, |x| (x[0] * 10 + x[1]) as f64);
        assert_eq!(t.data()[..4], [0.0, 1.0, 2.0, 10.0]);
        assert_eq!(*t.get(&[2, 1]), 21.0);
        assert!(DenseTensor::new(2, 3, vec![0.0; 8]).is_err());
    }

    #[test]
    fn view_cap_enforced() {
        let t = DenseTensor::constant(3, 4, 1.0);
        assert!(DenseTensor::from_view(&t, 63).is_err());
        assert_eq!(DenseTensor::from_view(&t, 64).unwrap(), t);
    }
}
