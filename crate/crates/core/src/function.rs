//! Real-valued functions on a finite abelian group and additive sets.

use std::fmt;

use crate::error::{Error, Result};
use crate::group::{Element, FiniteAbelianGroup};
use crate::scalar::Scalar;

/// A subset `A` of a group, stored both as a sorted member list and a mask.
#[derive(Clone, PartialEq, Eq)]
pub struct AdditiveSet {
    group: FiniteAbelianGroup,
    members: Vec<Element>,
    mask: Vec<bool>,
}

impl fmt::Debug for AdditiveSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AdditiveSet({} in {})", self.members.len(), self.group)
    }
}

impl AdditiveSet {
    pub fn new<I: IntoIterator<Item = Element>>(group: &FiniteAbelianGroup, members: I) -> Result<Self> {
        let mut mask = vec![false; group.order()];
        for x in members {
            group.check(x)?;
            mask[x] = true;
        }
        Ok(Self::from_mask(group, mask))
    }

    pub fn from_mask(group: &FiniteAbelianGroup, mask: Vec<bool>) -> Self {
        assert_eq!(mask.len(), group.order(), "mask length must equal the group order");
        let members = mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
        AdditiveSet { group: group.clone(), members, mask }
    }

    pub fn full(group: &FiniteAbelianGroup) -> Self {
        Self::from_mask(group, vec![true; group.order()])
    }

    pub fn empty(group: &FiniteAbelianGroup) -> Self {
        Self::from_mask(group, vec![false; group.order()])
    }

    /// Every subset of a small group, ordered by bitmask of member indices.
    pub fn all_subsets(group: &FiniteAbelianGroup) -> Result<Vec<Self>> {
        let n = group.order();
        if n > 20 {
            return Err(Error::Budget { what: "subset enumeration", needed: 1u128 << n, cap: 1 << 20 });
        }
        Ok((0u32..(1u32 << n))
            .map(|bits| Self::from_mask(group, (0..n).map(|i| bits >> i & 1 == 1).collect()))
            .collect())
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn members(&self) -> &[Element] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    #[inline]
    pub fn contains(&self, x: Element) -> bool {
        self.mask[x]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// `|A| / |G|` in the requested scalar type (exact for rationals).
    pub fn density<T: Scalar>(&self) -> T {
        T::from_count(self.members.len() as u64, self.group.order() as u64)
    }

    /// The translate `A - a`, i.e. the support of `T^a 1_A`.
    pub fn translate(&self, a: Element) -> Self {
        let mask = self.group.elements().map(|x| self.mask[self.group.add(x, a)]).collect();
        Self::from_mask(&self.group, mask)
    }
}

/// A function `G -> T` stored densely by element index.
#[derive(Clone, PartialEq)]
pub struct GroupFunction<T> {
    group: FiniteAbelianGroup,
    values: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for GroupFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupFunction")
            .field("group", &self.group.to_string())
            .field("values", &self.values)
            .finish()
    }
}

impl<T: Scalar> GroupFunction<T> {
    pub fn new(group: &FiniteAbelianGroup, values: Vec<T>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(Error::param(format!(
                "function has {} values but the group has order {}",
                values.len(),
                group.order()
            )));
        }
        Ok(GroupFunction { group: group.clone(), values })
    }

    pub fn from_fn(group: &FiniteAbelianGroup, f: impl Fn(Element) -> T) -> Self {
        GroupFunction { group: group.clone(), values: group.elements().map(f).collect() }
    }

    pub fn constant(group: &FiniteAbelianGroup, c: T) -> Self {
        Self::from_fn(group, |_| c.clone())
    }

    pub fn indicator(set: &AdditiveSet) -> Self {
        Self::from_fn(set.group(), |x| if set.contains(x) { T::one() } else { T::zero() })
    }

    /// `1_A - delta`, mean zero.
    pub fn balanced_indicator(set: &AdditiveSet) -> Self {
        let delta: T = set.density();
        Self::from_fn(set.group(), |x| {
            if set.contains(x) {
                T::one() - delta.clone()
            } else {
                -delta.clone()
            }
        })
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn value(&self, x: Element) -> &T {
        &self.values[x]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(T^a f)(x) = f(x + a)`.
    pub fn translate(&self, a: Element) -> Self {
        Self::from_fn(&self.group, |x| self.values[self.group.add(x, a)].clone())
    }

    pub fn mean(&self) -> T {
        T::sum_iter(self.values.iter().cloned()) / T::from_int(self.values.len() as i64)
    }

    pub fn map(&self, f: impl Fn(&T) -> T) -> Self {
        GroupFunction { group: self.group.clone(), values: self.values.iter().map(f).collect() }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max)
    }

    /// Converts to another scalar type through `f64` (exact when the target is rational
    /// and the source is a float).
    pub fn cast<U: Scalar>(&self) -> GroupFunction<U> {
        GroupFunction {
            group: self.group.clone(),
            values: self.values.iter().map(|v| U::from_f64(v.to_f64())).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::Zero;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn balanced_indicator_examples() {
        let z4 = FiniteAbelianGroup::cyclic(4).unwrap();
        let a = AdditiveSet::new(&z4, [0]).unwrap();
        let f = GroupFunction::<BigRational>::balanced_indicator(&a);
        assert_eq!(f.values(), &[q(3, 4), q(-1, 4), q(-1, 4), q(-1, 4)]);
        assert!(f.mean().is_zero());
        let full = GroupFunction::<BigRational>::balanced_indicator(&AdditiveSet::full(&z4));
        assert!(full.values().iter().all(|v| v.is_zero()));
        let empty = GroupFunction::<BigRational>::balanced_indicator(&AdditiveSet::empty(&z4));
        assert!(empty.values().iter().all(|v| v.is_zero()));
    }

    #[test]
    fn translation_examples() {
        let z3 = FiniteAbelianGroup::cyclic(3).unwrap();
        let f = GroupFunction::new(&z3, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(f.translate(1).values(), &[2.0, 3.0, 1.0]);
        assert_eq!(f.translate(0), f);
        assert_eq!(f.translate(1).translate(2), f.translate(0));
    }

    #[test]
    fn set_translate_matches_function_translate() {
        let z7 = FiniteAbelianGroup::cyclic(7).unwrap();
        let a = AdditiveSet::new(&z7, [0, 1, 2, 4]).unwrap();
        let f = GroupFunction::<f64>::indicator(&a);
        for t in z7.elements() {
            assert_eq!(GroupFunction::<f64>::indicator(&a.translate(t)), f.translate(t));
        }
    }

    #[test]
    fn wrong_length_rejected() {
        let z3 = FiniteAbelianGroup::cyclic(3).unwrap();
        assert!(GroupFunction::new(&z3, vec![1.0]).is_err());
        assert!(AdditiveSet::new(&z3, [3]).is_err());
    }
}
