//! Arithmetic in `Z/p^n` and in the finite fields `F_p`, `F_{p^2}`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Primes up to and including `bound` (sieve of Eratosthenes).
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

pub(crate) fn checked_pow(p: u64, n: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..n {
        acc = acc.checked_mul(p)?;
    }
    Some(acc)
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return None;
    }
    Some(s0.rem_euclid(m as i128) as u64)
}

/// Valuation of an element of `Z/p^n`.
///
/// Zero only determines `val >= n`, which is kept as its own variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Valuation {
    Finite(u32),
    AtLeast(u32),
}

impl Valuation {
    /// `min(val, n)`.
    pub fn truncated(self) -> u32 {
        match self {
            Valuation::Finite(v) | Valuation::AtLeast(v) => v,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Valuation::Finite(_))
    }

    /// Valuation of a product.
    pub fn mul(self, other: Valuation, n: u32) -> Valuation {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) if a + b < n => Valuation::Finite(a + b),
            _ => Valuation::AtLeast(n),
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        let rank = |v: &Valuation| match *v {
            Valuation::Finite(a) => (a, 0),
            Valuation::AtLeast(a) => (a, 1),
        };
        rank(self).cmp(&rank(other))
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::AtLeast(n) => write!(f, ">={n}"),
        }
    }
}

/// The ring `Z/p^n`. The modulus is kept below `2^32` so products fit in `u64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueRing {
    p: u64,
    n: u32,
    modulus: u64,
}

impl ResidueRing {
    pub fn new(p: u64, n: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("level n must be >= 1".into()));
        }
        let modulus = checked_pow(p, n)
            .filter(|&m| m <= 1 << 32)
            .ok_or_else(|| Error::InvalidArgument(format!("{p}^{n} exceeds 2^32")))?;
        Ok(ResidueRing { p, n, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn reduce(&self, x: i64) -> u64 {
        x.rem_euclid(self.modulus as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.modulus
    }

    pub fn val(&self, x: u64) -> Valuation {
        let mut x = x % self.modulus;
        if x == 0 {
            return Valuation::AtLeast(self.n);
        }
        let mut v = 0;
        while x % self.p == 0 {
            x /= self.p;
            v += 1;
        }
        Valuation::Finite(v)
    }

    pub fn inv(&self, x: u64) -> Option<u64> {
        inv_mod(x % self.modulus, self.modulus)
    }

    pub fn elem(&self, value: i64) -> ResidueElem {
        ResidueElem {
            value: self.reduce(value),
            ring: *self,
        }
    }
}

/// An element of `Z/p^n` with its canonical representative in `[0, p^n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ResidueElem {
    value: u64,
    ring: ResidueRing,
}

impl ResidueElem {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn ring(&self) -> ResidueRing {
        self.ring
    }

    pub fn val(&self) -> Valuation {
        self.ring.val(self.value)
    }

    pub fn inv(&self) -> Option<ResidueElem> {
        self.ring.inv(self.value).map(|value| ResidueElem {
            value,
            ring: self.ring,
        })
    }
}

impl Add for ResidueElem {
    type Output = ResidueElem;
    fn add(self, rhs: Self) -> Self {
        debug_assert_eq!(self.ring, rhs.ring);
        ResidueElem {
            value: self.ring.add(self.value, rhs.value),
            ring: self.ring,
        }
    }
}

impl Sub for ResidueElem {
    type Output = ResidueElem;
    fn sub(self, rhs: Self) -> Self {
        debug_assert_eq!(self.ring, rhs.ring);
        ResidueElem {
            value: self.ring.sub(self.value, rhs.value),
            ring: self.ring,
        }
    }
}

impl Mul for ResidueElem {
    type Output = ResidueElem;
    fn mul(self, rhs: Self) -> Self {
        debug_assert_eq!(self.ring, rhs.ring);
        ResidueElem {
            value: self.ring.mul(self.value, rhs.value),
            ring: self.ring,
        }
    }
}

impl Neg for ResidueElem {
    type Output = ResidueElem;
    fn neg(self) -> Self {
        ResidueElem {
            value: self.ring.neg(self.value),
            ring: self.ring,
        }
    }
}

/// Square matrix over `Z/p^n`, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModMatrix {
    pub ring: ResidueRing,
    pub dim: usize,
    pub data: Vec<u64>,
}

impl ModMatrix {
    pub fn zero(ring: ResidueRing, dim: usize) -> Self {
        ModMatrix {
            ring,
            dim,
            data: vec![0; dim * dim],
        }
    }

    pub fn from_i64(ring: ResidueRing, dim: usize, entries: &[i64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Ok(ModMatrix {
            ring,
            dim,
            data: entries.iter().map(|&x| ring.reduce(x)).collect(),
        })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..self.dim).all(|i| {
            self.get(i, i) == 0
                && (i + 1..self.dim).all(|j| self.get(i, j) == self.ring.neg(self.get(j, i)))
        })
    }

    pub fn mul(&self, other: &ModMatrix) -> ModMatrix {
        let d = self.dim;
        let mut out = ModMatrix::zero(self.ring, d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..d {
                    let v = self.ring.add(out.get(i, j), self.ring.mul(a, other.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> ModMatrix {
        let d = self.dim;
        let mut out = ModMatrix::zero(self.ring, d);
        for i in 0..d {
            for j in 0..d {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// `S M S^t`.
    pub fn congruent(&self, s: &ModMatrix) -> ModMatrix {
        s.mul(self).mul(&s.transpose())
    }
}

/// Element `c0 + c1 X` of `F_p[X]/(m(X))`; `c1 = 0` in prime fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct FqElem {
    pub c0: u32,
    pub c1: u32,
}

/// The field `F_q` with `q = p^f`, `f` in {1, 2}.
///
/// For `f = 2` the modulus is `X^2 - delta` (delta the least non-residue) when `p` is odd,
/// and `X^2 + X + 1` when `p = 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FqField {
    p: u32,
    f: u32,
    delta: u32,
}

/// Least quadratic non-residue modulo an odd prime.
pub fn least_nonresidue(p: u64) -> u64 {
    (2..p)
        .find(|&a| pow_mod(a, (p - 1) / 2, p) == p - 1)
        .expect("odd prime has a non-residue")
}

pub(crate) fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * a as u128 % m as u128) as u64;
        }
        a = (a as u128 * a as u128 % m as u128) as u64;
        e >>= 1;
    }
    acc
}

impl FqField {
    pub fn new(p: u64, f: u32) -> Result<Self> {
        if !is_prime(p) || p > 1 << 15 {
            return Err(Error::NotPrime(p));
        }
        if f != 1 && f != 2 {
            return Err(Error::Unsupported(format!("extension degree {f}")));
        }
        let delta = if f == 2 && p != 2 {
            least_nonresidue(p) as u32
        } else {
            0
        };
        Ok(FqField {
            p: p as u32,
            f,
            delta,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn f(&self) -> u32 {
        self.f
    }

    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.f)
    }

    /// Square class used for the modulus (`X^2 = delta`); zero for `p = 2` or `f = 1`.
    pub fn delta(&self) -> u32 {
        self.delta
    }

    pub fn zero(&self) -> FqElem {
        FqElem::default()
    }

    pub fn one(&self) -> FqElem {
        FqElem { c0: 1, c1: 0 }
    }

    /// The class of `X`; only meaningful when `f = 2`.
    pub fn gen(&self) -> FqElem {
        FqElem { c0: 0, c1: 1 }
    }

    pub fn from_int(&self, x: i64) -> FqElem {
        FqElem {
            c0: x.rem_euclid(self.p as i64) as u32,
            c1: 0,
        }
    }

    pub fn elem(&self, c0: i64, c1: i64) -> FqElem {
        let p = self.p as i64;
        FqElem {
            c0: c0.rem_euclid(p) as u32,
            c1: if self.f == 2 { c1.rem_euclid(p) as u32 } else { 0 },
        }
    }

    pub fn is_zero(&self, x: FqElem) -> bool {
        x.c0 == 0 && x.c1 == 0
    }

    /// Whether `x` lies in the prime field.
    pub fn in_prime_field(&self, x: FqElem) -> bool {
        x.c1 == 0
    }

    #[inline]
    pub fn add(&self, a: FqElem, b: FqElem) -> FqElem {
        let p = self.p;
        FqElem {
            c0: (a.c0 + b.c0) % p,
            c1: (a.c1 + b.c1) % p,
        }
    }

    #[inline]
    pub fn sub(&self, a: FqElem, b: FqElem) -> FqElem {
        let p = self.p;
        FqElem {
            c0: (a.c0 + p - b.c0) % p,
            c1: (a.c1 + p - b.c1) % p,
        }
    }

    #[inline]
    pub fn neg(&self, a: FqElem) -> FqElem {
        self.sub(self.zero(), a)
    }

    #[inline]
    pub fn mul(&self, a: FqElem, b: FqElem) -> FqElem {
        let p = self.p;
        if self.f == 1 {
            return FqElem {
                c0: a.c0 * b.c0 % p,
                c1: 0,
            };
        }
        let ac = a.c0 * b.c0 % p;
        let bd = a.c1 * b.c1 % p;
        let cross = (a.c0 * b.c1 + a.c1 * b.c0) % p;
        if p == 2 {
            // X^2 = X + 1
            FqElem {
                c0: (ac + bd) % 2,
                c1: (cross + bd) % 2,
            }
        } else {
            FqElem {
                c0: (ac + bd * self.delta) % p,
                c1: cross,
            }
        }
    }

    pub fn pow(&self, mut a: FqElem, mut e: u64) -> FqElem {
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: FqElem) -> Option<FqElem> {
        if self.is_zero(a) {
            return None;
        }
        Some(self.pow(a, self.q() - 2))
    }

    /// Absolute Frobenius `x -> x^p`.
    pub fn frobenius(&self, a: FqElem) -> FqElem {
        self.pow(a, self.p as u64)
    }

    /// The involution of `F_{p^2}` (identity on prime fields).
    #[inline]
    pub fn sigma(&self, a: FqElem) -> FqElem {
        if self.f == 1 || a.c1 == 0 {
            return a;
        }
        let p = self.p;
        if p == 2 {
            // X -> X + 1
            FqElem {
                c0: (a.c0 + a.c1) % 2,
                c1: a.c1,
            }
        } else {
            FqElem {
                c0: a.c0,
                c1: (p - a.c1) % p,
            }
        }
    }

    /// `(x sigma(x), x + sigma(x))`; both lie in the prime field.
    pub fn norm_trace(&self, a: FqElem) -> Result<(FqElem, FqElem)> {
        if self.f != 2 {
            return Err(Error::Unsupported(
                "norm and trace need a quadratic extension".into(),
            ));
        }
        let s = self.sigma(a);
        Ok((self.mul(a, s), self.add(a, s)))
    }

    /// Dense index in `0..q`.
    pub fn index(&self, a: FqElem) -> usize {
        (a.c0 + self.p * a.c1) as usize
    }

    pub fn from_index(&self, i: usize) -> FqElem {
        let p = self.p as usize;
        FqElem {
            c0: (i % p) as u32,
            c1: (i / p) as u32,
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FqElem> + '_ {
        (0..self.q() as usize).map(move |i| self.from_index(i))
    }

    /// Prime-field coordinates (length `f`).
    pub fn coords(&self, a: FqElem) -> [u32; 2] {
        [a.c0, a.c1]
    }
}

/// Row reduction over `F_p`; returns the rank and the reduced rows.
pub fn row_reduce_mod_p(rows: &[Vec<u32>], p: u32) -> (usize, Vec<Vec<u32>>) {
    let mut m: Vec<Vec<u32>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][c] % p != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = inv_mod(m[rank][c] as u64, p as u64).unwrap() as u32;
        for x in m[rank].iter_mut() {
            *x = *x * inv % p;
        }
        for r in 0..m.len() {
            if r != rank && m[r][c] != 0 {
                let f = m[r][c];
                for k in 0..cols {
                    m[r][k] = (m[r][k] + p - f * m[rank][k] % p) % p;
                }
            }
        }
        rank += 1;
    }
    (rank, m)
}

/// Basis of `{x : A x = 0}` over `F_p`, with `A` given by rows.
pub fn nullspace_mod_p(rows: &[Vec<u32>], ncols: usize, p: u32) -> Vec<Vec<u32>> {
    if rows.is_empty() {
        return (0..ncols)
            .map(|i| (0..ncols).map(|j| u32::from(i == j)).collect())
            .collect();
    }
    let (rank, m) = row_reduce_mod_p(rows, p);
    let mut pivots = Vec::new();
    for row in m.iter().take(rank) {
        pivots.push(row.iter().position(|&x| x != 0).unwrap());
    }
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0u32; ncols];
        v[free] = 1;
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = (p - m[r][free] % p) % p;
        }
        basis.push(v);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuation_examples() {
        let r8 = ResidueRing::new(2, 3).unwrap();
        assert_eq!(r8.elem(4).val(), Valuation::Finite(2));
        assert_eq!(r8.elem(0).val(), Valuation::AtLeast(3));
        let r9 = ResidueRing::new(3, 2).unwrap();
        assert_eq!(r9.elem(3 + 9).val(), Valuation::Finite(1));
        assert_eq!(r9.elem(5).val(), Valuation::Finite(0));
    }

    #[test]
    fn f4_norm_trace() {
        let f4 = FqField::new(2, 2).unwrap();
        assert_eq!(f4.norm_trace(f4.one()).unwrap(), (f4.one(), f4.zero()));
        let w = f4.gen();
        assert_eq!(f4.norm_trace(w).unwrap(), (f4.one(), f4.one()));
        assert!(FqField::new(5, 1).unwrap().norm_trace(FqElem::default()).is_err());
    }

    #[test]
    fn norm_one_count_f25() {
        let f = FqField::new(5, 2).unwrap();
        let n = f
            .elements()
            .filter(|&x| f.norm_trace(x).unwrap().0 == f.one())
            .count();
        assert_eq!(n, 6);
    }

    #[test]
    fn sigma_is_q_power() {
        for p in [2u64, 3, 5, 7] {
            let f = FqField::new(p, 2).unwrap();
            for x in f.elements() {
                assert_eq!(f.sigma(x), f.pow(x, p));
            }
        }
    }

    #[test]
    fn sieve_matches_trial_division() {
        let ps = primes_up_to(1000);
        let slow: Vec<u64> = (0..=1000).filter(|&n| is_prime(n)).collect();
        assert_eq!(ps, slow);
        assert!(primes_up_to(1).is_empty());
    }

    #[test]
    fn nullspace_small() {
        // x + y + z = 0 over F_5
        let ns = nullspace_mod_p(&[vec![1, 1, 1]], 3, 5);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert_eq!((v[0] + v[1] + v[2]) % 5, 0);
        }
    }
}
