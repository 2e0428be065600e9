//! Finite abelian groups as products of cyclic groups.
//!
//! Elements are dense integer indices under a mixed-radix encoding in which
//! the first factor is the most significant digit, so `Z2xZ3` orders its
//! elements `(0,0), (0,1), (0,2), (1,0), ...`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_integer::Integer;

use crate::error::{Error, Result};

/// Default cap on `|G|`. All dense function storage is linear in the order.
pub const DEFAULT_ORDER_CAP: usize = 1_000_000;

/// Addition tables are materialized below this order (`order^2` u32 entries).
const ADD_TABLE_MAX_ORDER: usize = 1024;

/// Mixed-radix index of a group element.
pub type Element = usize;

#[derive(Clone)]
pub struct FiniteAbelianGroup {
    moduli: Arc<[u64]>,
    strides: Arc<[usize]>,
    order: usize,
    add_table: Option<Arc<[u32]>>,
}

impl fmt::Debug for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteAbelianGroup")
            .field("moduli", &self.moduli)
            .field("order", &self.order)
            .finish()
    }
}

impl PartialEq for FiniteAbelianGroup {
    fn eq(&self, other: &Self) -> bool {
        self.moduli == other.moduli
    }
}

impl Eq for FiniteAbelianGroup {}

impl FiniteAbelianGroup {
    pub fn new(moduli: &[u64]) -> Result<Self> {
        Self::with_cap(moduli, DEFAULT_ORDER_CAP)
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        Self::new(&[n])
    }

    pub fn with_cap(moduli: &[u64], cap: usize) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::param("a group needs at least one cyclic factor"));
        }
        let mut order: u128 = 1;
        for &n in moduli {
            if n < 2 {
                return Err(Error::InvalidModulus(n));
            }
            order = order.saturating_mul(n as u128);
            if order > cap as u128 {
                return Err(Error::OrderCapExceeded { order, cap });
            }
        }
        let order = order as usize;
        let mut strides = vec![0usize; moduli.len()];
        let mut acc = 1usize;
        for i in (0..moduli.len()).rev() {
            strides[i] = acc;
            acc *= moduli[i] as usize;
        }
        let mut group = FiniteAbelianGroup {
            moduli: moduli.into(),
            strides: strides.into(),
            order,
            add_table: None,
        };
        if moduli.len() > 1 && order <= ADD_TABLE_MAX_ORDER {
            let mut table = Vec::with_capacity(order * order);
            for x in 0..order {
                for y in 0..order {
                    table.push(group.add_slow(x, y) as u32);
                }
            }
            group.add_table = Some(table.into());
        }
        Ok(group)
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    pub fn is_cyclic(&self) -> bool {
        self.moduli.len() == 1
    }

    pub fn elements(&self) -> std::ops::Range<Element> {
        0..self.order
    }

    pub fn check(&self, x: Element) -> Result<Element> {
        if x < self.order {
            Ok(x)
        } else {
            Err(Error::IndexOutOfRange { index: x, order: self.order })
        }
    }

    pub fn encode(&self, components: &[u64]) -> Result<Element> {
        if components.len() != self.moduli.len() {
            return Err(Error::param(format!(
                "expected {} components, got {}",
                self.moduli.len(),
                components.len()
            )));
        }
        let mut index = 0usize;
        for ((&c, &n), &s) in components.iter().zip(self.moduli.iter()).zip(self.strides.iter()) {
            if c >= n {
                return Err(Error::param(format!("component {c} out of range for Z_{n}")));
            }
            index += c as usize * s;
        }
        Ok(index)
    }

    pub fn decode(&self, x: Element) -> Vec<u64> {
        self.moduli
            .iter()
            .zip(self.strides.iter())
            .map(|(&n, &s)| ((x / s) as u64) % n)
            .collect()
    }

    fn add_slow(&self, x: Element, y: Element) -> Element {
        let mut out = 0usize;
        for (&n, &s) in self.moduli.iter().zip(self.strides.iter()) {
            let n = n as usize;
            let a = (x / s) % n;
            let b = (y / s) % n;
            let mut c = a + b;
            if c >= n {
                c -= n;
            }
            out += c * s;
        }
        out
    }

    /// Group addition on valid indices. Hot path: no range checks.
    #[inline]
    pub fn add(&self, x: Element, y: Element) -> Element {
        if let Some(table) = &self.add_table {
            return table[x * self.order + y] as Element;
        }
        if self.moduli.len() == 1 {
            let s = x + y;
            return if s >= self.order { s - self.order } else { s };
        }
        self.add_slow(x, y)
    }

    pub fn checked_add(&self, x: Element, y: Element) -> Result<Element> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.add(x, y))
    }

    pub fn neg(&self, x: Element) -> Element {
        self.scalar_mul(-1, x)
    }

    pub fn sub(&self, x: Element, y: Element) -> Element {
        self.add(x, self.neg(y))
    }

    pub fn sum<I: IntoIterator<Item = Element>>(&self, items: I) -> Element {
        items.into_iter().fold(0, |acc, x| self.add(acc, x))
    }

    /// `lambda * x`, componentwise modulo each factor.
    pub fn scalar_mul(&self, lambda: i64, x: Element) -> Element {
        let mut out = 0usize;
        for (&n, &s) in self.moduli.iter().zip(self.strides.iter()) {
            let c = ((x / s) as u64 % n) as i128;
            let v = (c * lambda as i128).rem_euclid(n as i128) as usize;
            out += v * s;
        }
        out
    }

    /// The subgroup `lambda * G`, as a sorted list of elements.
    pub fn scalar_subgroup(&self, lambda: i64) -> Vec<Element> {
        let mut seen = vec![false; self.order];
        for x in self.elements() {
            seen[self.scalar_mul(lambda, x)] = true;
        }
        seen.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }

    /// `|lambda * G|` from the factor structure: each `Z_n` contributes `n / gcd(lambda, n)`.
    pub fn scalar_subgroup_order(&self, lambda: i64) -> usize {
        self.moduli
            .iter()
            .map(|&n| {
                let g = (lambda.unsigned_abs()).gcd(&n);
                if g == 0 { 1 } else { (n / g) as usize }
            })
            .product()
    }

    /// True iff every coefficient is coprime to `|G|`.
    pub fn is_coprime_form(&self, lambdas: &[i64]) -> bool {
        lambdas
            .iter()
            .all(|&l| (l.unsigned_abs()).gcd(&(self.order as u64)) == 1)
    }

    /// Renders the group back into the spec grammar, collapsing runs.
    pub fn spec_string(&self) -> String {
        let mut parts = Vec::new();
        let mut i = 0;
        while i < self.moduli.len() {
            let n = self.moduli[i];
            let mut j = i;
            while j < self.moduli.len() && self.moduli[j] == n {
                j += 1;
            }
            if j - i > 1 {
                parts.push(format!("Z{n}^{}", j - i));
            } else {
                parts.push(format!("Z{n}"));
            }
            i = j;
        }
        parts.join("x")
    }

    pub fn parse_with_cap(text: &str, cap: usize) -> Result<Self> {
        let moduli = parse_group_spec(text)?;
        Self::with_cap(&moduli, cap)
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec_string())
    }
}

impl FromStr for FiniteAbelianGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with_cap(s, DEFAULT_ORDER_CAP)
    }
}

/// Parses `group := factor ('x' factor)*`, `factor := 'Z' INT ('^' INT)?`.
pub fn parse_group_spec(text: &str) -> Result<Vec<u64>> {
    let bytes = text.as_bytes();
    let err = |position: usize, message: &str| Error::Parse {
        position,
        message: message.to_string(),
    };
    if bytes.is_empty() {
        return Err(err(0, "empty group spec"));
    }
    let read_int = |pos: &mut usize| -> Result<u64> {
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if start == *pos {
            return Err(err(start, "expected an integer"));
        }
        text[start..*pos]
            .parse::<u64>()
            .map_err(|_| err(start, "integer too large"))
    };
    let mut moduli = Vec::new();
    let mut pos = 0usize;
    loop {
        match bytes.get(pos) {
            Some(b'Z') | Some(b'z') => pos += 1,
            _ => return Err(err(pos, "expected 'Z'")),
        }
        let n = read_int(&mut pos)?;
        if n < 2 {
            return Err(Error::InvalidModulus(n));
        }
        let mut reps = 1u64;
        if bytes.get(pos) == Some(&b'^') {
            pos += 1;
            reps = read_int(&mut pos)?;
            if reps == 0 {
                return Err(err(pos - 1, "exponent must be positive"));
            }
            if reps > 64 {
                return Err(err(pos - 1, "exponent too large"));
            }
        }
        moduli.extend(std::iter::repeat_n(n, reps as usize));
        match bytes.get(pos) {
            None => break,
            Some(b'x') | Some(b'X') => pos += 1,
            Some(_) => return Err(err(pos, "expected 'x' or end of input")),
        }
    }
    Ok(moduli)
}

/// Trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Squares modulo `p` (zero included), sorted.
pub fn quadratic_residues(p: u64) -> Result<Vec<Element>> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p as usize > DEFAULT_ORDER_CAP {
        return Err(Error::OrderCapExceeded { order: p as u128, cap: DEFAULT_ORDER_CAP });
    }
    let mut is_square = vec![false; p as usize];
    for y in 0..p {
        is_square[((y * y) % p) as usize] = true;
    }
    Ok(is_square
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i)
        .collect())
}
