//! Elementary-divisor profiles of antisymmetric matrices over `Z/p^n`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modring::{inv_mod, ModMatrix, ResidueRing};

/// Non-decreasing truncated valuations `min(a_i, n)` of the paired elementary divisors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DivisorProfile {
    pub n: u32,
    pub a: Vec<u32>,
}

impl DivisorProfile {
    pub fn new(n: u32, mut a: Vec<u32>) -> Result<Self> {
        if a.iter().any(|&x| x > n) {
            return Err(Error::InvalidArgument(format!(
                "profile entry exceeds level {n}"
            )));
        }
        a.sort_unstable();
        Ok(DivisorProfile { n, a })
    }

    /// `sum_i (n - a_i)`: the `t`-degree this profile contributes.
    pub fn weight(&self) -> u32 {
        self.a.iter().map(|&x| self.n - x).sum()
    }

    /// `sum_i min(a_i, n)`.
    pub fn sum(&self) -> u32 {
        self.a.iter().sum()
    }

    /// The profile seen at a lower level `m <= n`.
    pub fn truncate(&self, m: u32) -> DivisorProfile {
        DivisorProfile {
            n: m,
            a: self.a.iter().map(|&x| x.min(m)).collect(),
        }
    }

    /// Index in the mixed-radix encoding with radix `n + 1`.
    pub fn encode(&self) -> usize {
        let r = self.n as usize + 1;
        self.a.iter().fold(0, |acc, &x| acc * r + x as usize)
    }

    pub fn decode(n: u32, len: usize, mut code: usize) -> DivisorProfile {
        let r = n as usize + 1;
        let mut a = vec![0; len];
        for slot in a.iter_mut().rev() {
            *slot = (code % r) as u32;
            code /= r;
        }
        DivisorProfile { n, a }
    }
}

impl fmt::Display for DivisorProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.a.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Precomputed tables for repeated profile computations over one ring.
#[derive(Clone, Debug)]
pub struct ProfileKernel {
    ring: ResidueRing,
    p: u64,
    n: u32,
    modulus: u64,
    mask: Option<u64>,
    val_tab: Vec<u8>,
    inv_tab: Vec<u64>,
}

const TABLE_LIMIT: u64 = 1 << 16;

impl ProfileKernel {
    pub fn new(ring: ResidueRing) -> Self {
        let (p, n, modulus) = (ring.p(), ring.n(), ring.modulus());
        let mask = (p == 2).then_some(modulus - 1);
        let (mut val_tab, mut inv_tab) = (Vec::new(), Vec::new());
        if modulus <= TABLE_LIMIT {
            val_tab = (0..modulus)
                .map(|x| match ring.val(x) {
                    crate::modring::Valuation::Finite(v) => v as u8,
                    crate::modring::Valuation::AtLeast(_) => n as u8,
                })
                .collect();
            inv_tab = (0..modulus)
                .map(|x| inv_mod(x, modulus).unwrap_or(0))
                .collect();
        }
        ProfileKernel {
            ring,
            p,
            n,
            modulus,
            mask,
            val_tab,
            inv_tab,
        }
    }

    pub fn ring(&self) -> ResidueRing {
        self.ring
    }

    #[inline]
    fn mulm(&self, a: u64, b: u64) -> u64 {
        match self.mask {
            Some(m) => a.wrapping_mul(b) & m,
            None => a * b % self.modulus,
        }
    }

    #[inline]
    fn addm(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    fn negm(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    fn val(&self, x: u64) -> u32 {
        if x == 0 {
            return self.n;
        }
        if self.mask.is_some() {
            return x.trailing_zeros();
        }
        if !self.val_tab.is_empty() {
            return self.val_tab[x as usize] as u32;
        }
        let (mut x, mut v) = (x, 0);
        while x % self.p == 0 {
            x /= self.p;
            v += 1;
        }
        v
    }

    #[inline]
    fn inv(&self, x: u64) -> u64 {
        if !self.inv_tab.is_empty() {
            self.inv_tab[x as usize]
        } else {
            inv_mod(x, self.modulus).expect("unit")
        }
    }

    #[inline]
    fn pow_p(&self, v: u32) -> u64 {
        self.p.pow(v)
    }

    /// Profile of the antisymmetric `d x d` matrix in `m` (row-major, reduced; only the
    /// strict upper triangle is read). `m` is used as scratch. Writes `floor(d/2)` entries.
    pub fn profile_into(&self, m: &mut [u64], d: usize, out: &mut [u32]) {
        debug_assert!(d <= 64);
        let half = d / 2;
        let mut active: u64 = if d == 64 { !0 } else { (1u64 << d) - 1 };
        let mut k = 0;
        while k < half {
            // lexicographically first entry of minimal valuation
            let mut best = (self.n, 0, 0);
            let mut rows = active;
            'search: while rows != 0 {
                let i = rows.trailing_zeros() as usize;
                rows &= rows - 1;
                let mut cols = rows;
                while cols != 0 {
                    let j = cols.trailing_zeros() as usize;
                    cols &= cols - 1;
                    let x = m[i * d + j];
                    if x != 0 {
                        let v = self.val(x);
                        if v < best.0 {
                            best = (v, i, j);
                            if v == 0 {
                                break 'search;
                            }
                        }
                    }
                }
            }
            let (v, i, j) = best;
            if v >= self.n {
                break;
            }
            out[k] = v;
            k += 1;
            active &= !(1u64 << i) & !(1u64 << j);
            let pv = self.pow_p(v);
            let uinv = self.inv(m[i * d + j] / pv);
            // entry (r, x) with r < x is read from the upper triangle
            let at = |m: &[u64], r: usize, x: usize| -> u64 {
                if r < x {
                    m[r * d + x]
                } else {
                    self.negm(m[x * d + r])
                }
            };
            let mut coef = [(0u64, 0u64); 64];
            let mut rest = active;
            while rest != 0 {
                let r = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let c = self.negm(self.mulm(at(m, r, j) / pv, uinv));
                let c2 = self.mulm(at(m, r, i) / pv, uinv);
                coef[r] = (c, c2);
            }
            let mij = m[i * d + j];
            let mut rows = active;
            while rows != 0 {
                let r = rows.trailing_zeros() as usize;
                rows &= rows - 1;
                let (cr, cr2) = coef[r];
                let (ri, rj) = (at(m, r, i), at(m, r, j));
                let mut cols = rows;
                while cols != 0 {
                    let t = cols.trailing_zeros() as usize;
                    cols &= cols - 1;
                    let (ct, ct2) = coef[t];
                    let mut acc = m[r * d + t];
                    acc = self.addm(acc, self.mulm(cr, at(m, i, t)));
                    acc = self.addm(acc, self.mulm(cr2, at(m, j, t)));
                    acc = self.addm(acc, self.mulm(ct, ri));
                    acc = self.addm(acc, self.mulm(ct2, rj));
                    let cross = self.addm(self.mulm(cr, ct2), self.negm(self.mulm(cr2, ct)));
                    acc = self.addm(acc, self.mulm(cross, mij));
                    m[r * d + t] = acc;
                }
            }
        }
        for slot in out.iter_mut().take(half).skip(k) {
            *slot = self.n;
        }
    }
}

/// Profile of an antisymmetric matrix over `Z/p^n` by congruence reduction.
pub fn antisym_profile(m: &ModMatrix) -> Result<DivisorProfile> {
    if !m.is_antisymmetric() {
        return Err(Error::NotAntisymmetric);
    }
    let kernel = ProfileKernel::new(m.ring);
    let mut data = m.data.clone();
    let mut a = vec![0; m.dim / 2];
    kernel.profile_into(&mut data, m.dim, &mut a);
    Ok(DivisorProfile { n: m.ring.n(), a })
}

fn mulmod128(a: u128, b: u128, m: u128) -> u128 {
    // operands stay below 2^64
    a * b % m
}

/// Pfaffian of the antisymmetric matrix on `idx` (upper triangle of `a`) modulo `m`.
fn pfaffian(a: &[Vec<u128>], idx: &[usize], m: u128) -> u128 {
    if idx.is_empty() {
        return 1 % m;
    }
    let first = idx[0];
    let mut acc = 0u128;
    let mut rest = Vec::with_capacity(idx.len() - 2);
    for (pos, &j) in idx.iter().enumerate().skip(1) {
        let e = a[first][j];
        if e == 0 {
            continue;
        }
        rest.clear();
        rest.extend(idx.iter().enumerate().filter(|&(q, _)| q != 0 && q != pos).map(|(_, &x)| x));
        let sub = pfaffian(a, &rest, m);
        let term = mulmod128(e, sub, m);
        // sign (-1)^(pos + 1) for pos counted from 0
        acc = if pos % 2 == 1 {
            (acc + term) % m
        } else {
            (acc + m - term) % m
        };
    }
    acc
}

fn subsets(d: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, d: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..d {
            if d - x < k - cur.len() {
                break;
            }
            cur.push(x);
            go(x + 1, d, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, d, k, &mut Vec::new(), &mut out);
    out
}

/// Profile from valuations of Pfaffians of principal `2j x 2j` submatrices of the
/// canonical lift; an oracle independent of the pivoting reduction.
pub fn profile_via_minors(m: &ModMatrix) -> Result<DivisorProfile> {
    if !m.is_antisymmetric() {
        return Err(Error::NotAntisymmetric);
    }
    let (p, n, d) = (m.ring.p() as u128, m.ring.n(), m.dim);
    let half = d / 2;
    let mut a = vec![vec![0u128; d]; d];
    for i in 0..d {
        for j in i + 1..d {
            a[i][j] = m.get(i, j) as u128;
        }
    }
    let mut out = Vec::with_capacity(half);
    let mut prev_total = 0u32;
    for j in 1..=half {
        let cap = j as u32 * n;
        let big = p.checked_pow(cap).filter(|&b| b < 1 << 64).ok_or_else(|| {
            Error::InvalidArgument("modulus too large for the minor oracle".into())
        })?;
        let mut s = cap;
        for set in subsets(d, 2 * j) {
            let pf = pfaffian(&a, &set, big);
            let mut v = 0;
            let mut x = pf;
            if x == 0 {
                continue;
            }
            while x % p == 0 {
                x /= p;
                v += 1;
            }
            s = s.min(v);
            if s == 0 {
                break;
            }
        }
        let total = s.min(prev_total + n);
        out.push(total - prev_total);
        prev_total = total;
    }
    DivisorProfile::new(n, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modring::ResidueRing;

    fn block_diag(ring: ResidueRing, vals: &[u32]) -> ModMatrix {
        let d = 2 * vals.len();
        let mut m = ModMatrix::zero(ring, d);
        for (k, &v) in vals.iter().enumerate() {
            let x = ring.p().pow(v) % ring.modulus();
            m.set(2 * k, 2 * k + 1, x);
            m.set(2 * k + 1, 2 * k, ring.neg(x));
        }
        m
    }

    #[test]
    fn block_examples() {
        let r = ResidueRing::new(5, 2).unwrap();
        let m = block_diag(r, &[1]);
        assert_eq!(antisym_profile(&m).unwrap().a, vec![1]);
        assert_eq!(profile_via_minors(&m).unwrap().a, vec![1]);
        let r = ResidueRing::new(3, 4).unwrap();
        let m = ModMatrix::zero(r, 4);
        assert_eq!(antisym_profile(&m).unwrap().a, vec![4, 4]);
        assert_eq!(profile_via_minors(&m).unwrap().a, vec![4, 4]);
        let m = block_diag(r, &[2, 0, 1]);
        assert_eq!(antisym_profile(&m).unwrap().a, vec![0, 1, 2]);
        assert_eq!(profile_via_minors(&m).unwrap().a, vec![0, 1, 2]);
    }

    #[test]
    fn odd_dimension() {
        let r = ResidueRing::new(2, 3).unwrap();
        let mut m = ModMatrix::zero(r, 3);
        m.set(0, 2, 2);
        m.set(2, 0, 6);
        assert_eq!(antisym_profile(&m).unwrap().a, vec![1]);
        assert_eq!(profile_via_minors(&m).unwrap().a, vec![1]);
    }

    #[test]
    fn rejects_non_antisymmetric() {
        let r = ResidueRing::new(2, 3).unwrap();
        let m = ModMatrix::from_i64(r, 2, &[0, 1, 1, 0]).unwrap();
        assert_eq!(antisym_profile(&m).unwrap_err(), Error::NotAntisymmetric);
    }

    #[test]
    fn encode_roundtrip() {
        let pr = DivisorProfile::new(3, vec![0, 1, 1, 3]).unwrap();
        assert_eq!(DivisorProfile::decode(3, 4, pr.encode()), pr);
        assert_eq!(pr.weight(), 7);
    }
}
