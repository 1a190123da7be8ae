//! Lie lattices given by integer structure constants, and the two A2 instances.
//!
//! Basis order for `sl3`: h12, h23, e12, e23, e13, f21, f23, f13 where
//! h12 = diag(1,-1,0), h23 = diag(0,1,-1), e_ij = E_ij, f21 = E21, f23 = E32, f13 = E31.
//!
//! Basis order for `su3`: the three skew matrices E12-E21, E23-E32, E13-E31, then
//! a(E12) + b(E21), a(E23) + b(E32), a(E13) + b(E31) with (a, b) = (xi, xi) for odd p and
//! (w, w - 1) for p = 2, then theta(E11-E22), theta(E22-E33) with theta = xi resp. 1 - 2w.
//! Here xi^2 = delta is the least non-residue and w^2 = w + 1.

use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modring::{is_prime, least_nonresidue, FqElem, FqField, ModMatrix, ResidueRing};

/// `s + t*alpha` with `alpha^2 = a0 + a1*alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct ZAlpha {
    pub s: i64,
    pub t: i64,
}

/// Minimal polynomial data for `alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaRule {
    pub a0: i64,
    pub a1: i64,
}

impl AlphaRule {
    pub fn add(&self, x: ZAlpha, y: ZAlpha) -> ZAlpha {
        ZAlpha {
            s: x.s + y.s,
            t: x.t + y.t,
        }
    }

    pub fn sub(&self, x: ZAlpha, y: ZAlpha) -> ZAlpha {
        ZAlpha {
            s: x.s - y.s,
            t: x.t - y.t,
        }
    }

    pub fn mul(&self, x: ZAlpha, y: ZAlpha) -> ZAlpha {
        let tt = x.t * y.t;
        ZAlpha {
            s: x.s * y.s + tt * self.a0,
            t: x.s * y.t + x.t * y.s + tt * self.a1,
        }
    }
}

pub type MatZ = [[ZAlpha; 3]; 3];

fn mat_commutator(rule: &AlphaRule, x: &MatZ, y: &MatZ) -> MatZ {
    let mut out = [[ZAlpha::default(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = ZAlpha::default();
            for k in 0..3 {
                acc = rule.add(acc, rule.mul(x[i][k], y[k][j]));
                acc = rule.sub(acc, rule.mul(y[i][k], x[k][j]));
            }
            out[i][j] = acc;
        }
    }
    out
}

/// A matrix realisation of a lattice basis over `Z[alpha]`.
#[derive(Clone, Debug)]
pub struct MatrixBasis {
    pub rule: AlphaRule,
    pub mats: Vec<MatZ>,
}

impl MatrixBasis {
    pub fn combine(&self, coords: &[i64]) -> MatZ {
        let mut out = [[ZAlpha::default(); 3]; 3];
        for (c, m) in coords.iter().zip(&self.mats) {
            for i in 0..3 {
                for j in 0..3 {
                    out[i][j].s += c * m[i][j].s;
                    out[i][j].t += c * m[i][j].t;
                }
            }
        }
        out
    }

    /// Reduction modulo `p`, with `alpha` sent to the generator of `field`.
    pub fn reduce(&self, field: &FqField) -> Vec<[[FqElem; 3]; 3]> {
        self.mats
            .iter()
            .map(|m| {
                let mut out = [[field.zero(); 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        out[i][j] = field.elem(m[i][j].s, m[i][j].t);
                    }
                }
                out
            })
            .collect()
    }
}

fn unit(i: usize, j: usize, v: ZAlpha) -> MatZ {
    let mut m = [[ZAlpha::default(); 3]; 3];
    m[i][j] = v;
    m
}

fn int(s: i64) -> ZAlpha {
    ZAlpha { s, t: 0 }
}

fn sum(rule: &AlphaRule, a: MatZ, b: MatZ) -> MatZ {
    let mut out = a;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = rule.add(a[i][j], b[i][j]);
        }
    }
    out
}

pub fn sl3_basis() -> MatrixBasis {
    let rule = AlphaRule { a0: 0, a1: 0 };
    let one = int(1);
    let mats = vec![
        sum(&rule, unit(0, 0, one), unit(1, 1, int(-1))),
        sum(&rule, unit(1, 1, one), unit(2, 2, int(-1))),
        unit(0, 1, one),
        unit(1, 2, one),
        unit(0, 2, one),
        unit(1, 0, one),
        unit(2, 1, one),
        unit(2, 0, one),
    ];
    MatrixBasis { rule, mats }
}

fn sl3_coords(x: &MatZ) -> Option<Vec<i64>> {
    let v = vec![
        x[0][0].s,
        -x[2][2].s,
        x[0][1].s,
        x[1][2].s,
        x[0][2].s,
        x[1][0].s,
        x[2][1].s,
        x[2][0].s,
    ];
    Some(v)
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (1, 2), (0, 2)];

pub fn su3_basis(p: u64) -> Result<MatrixBasis> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p == 3 {
        return Err(Error::CharThree);
    }
    let (rule, upper, lower, theta) = if p == 2 {
        (
            AlphaRule { a0: 1, a1: 1 },
            ZAlpha { s: 0, t: 1 },
            ZAlpha { s: -1, t: 1 },
            ZAlpha { s: 1, t: -2 },
        )
    } else {
        let xi = ZAlpha { s: 0, t: 1 };
        (
            AlphaRule {
                a0: least_nonresidue(p) as i64,
                a1: 0,
            },
            xi,
            xi,
            xi,
        )
    };
    let mut mats = Vec::with_capacity(8);
    for &(i, j) in &PAIRS {
        mats.push(sum(&rule, unit(i, j, int(1)), unit(j, i, int(-1))));
    }
    for &(i, j) in &PAIRS {
        mats.push(sum(&rule, unit(i, j, upper), unit(j, i, lower)));
    }
    let neg_theta = ZAlpha {
        s: -theta.s,
        t: -theta.t,
    };
    mats.push(sum(&rule, unit(0, 0, theta), unit(1, 1, neg_theta)));
    mats.push(sum(&rule, unit(1, 1, theta), unit(2, 2, neg_theta)));
    Ok(MatrixBasis { rule, mats })
}

fn su3_coords(theta: ZAlpha, x: &MatZ) -> Option<Vec<i64>> {
    let mut v = vec![0; 8];
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        v[k] = x[i][j].s;
        v[3 + k] = x[i][j].t;
    }
    // diagonal entries are integer multiples of theta
    let diag = |z: ZAlpha| -> Option<i64> {
        if theta.s == 0 {
            (z.s == 0).then_some(z.t / theta.t).filter(|c| c * theta.t == z.t)
        } else {
            let c = z.s / theta.s;
            (c * theta.s == z.s && c * theta.t == z.t).then_some(c)
        }
    };
    v[6] = diag(x[0][0])?;
    v[7] = -diag(x[2][2])?;
    Some(v)
}

/// A Lie lattice over `Z_p` with integer structure constants `lambda_{ij}^h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieLattice {
    name: String,
    d: usize,
    sc: Vec<i64>,
}

/// JSON shape: nonzero constants `[i, j, h, c]` with `i < j`.
#[derive(Serialize, Deserialize)]
struct LatticeJson {
    name: String,
    d: usize,
    structure_constants: Vec<[i64; 4]>,
}

impl Serialize for LieLattice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut structure_constants = Vec::new();
        for i in 0..self.d {
            for j in i + 1..self.d {
                for h in 0..self.d {
                    let c = self.lambda(i, j, h);
                    if c != 0 {
                        structure_constants.push([i as i64, j as i64, h as i64, c]);
                    }
                }
            }
        }
        LatticeJson {
            name: self.name.clone(),
            d: self.d,
            structure_constants,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LieLattice {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let j = LatticeJson::deserialize(de)?;
        let d = j.d;
        let mut sc = vec![0; d * d * d];
        for [i, jj, h, c] in j.structure_constants {
            let (i, jj, h) = (i as usize, jj as usize, h as usize);
            if i >= d || jj >= d || h >= d {
                return Err(serde::de::Error::custom("index out of range"));
            }
            sc[(i * d + jj) * d + h] = c;
            sc[(jj * d + i) * d + h] = -c;
        }
        Ok(LieLattice { name: j.name, d, sc })
    }
}

impl LieLattice {
    /// Builds a lattice from constants indexed `[(i*d + j)*d + h]`; checks antisymmetry.
    pub fn new(name: impl Into<String>, d: usize, sc: Vec<i64>) -> Result<Self> {
        if sc.len() != d * d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d * d,
                got: sc.len(),
            });
        }
        let l = LieLattice {
            name: name.into(),
            d,
            sc,
        };
        for i in 0..d {
            for j in 0..d {
                for h in 0..d {
                    if l.lambda(i, j, h) != -l.lambda(j, i, h) {
                        return Err(Error::InvalidArgument(
                            "structure constants are not antisymmetric".into(),
                        ));
                    }
                }
            }
        }
        Ok(l)
    }

    fn from_basis(
        name: String,
        basis: &MatrixBasis,
        coords: impl Fn(&MatZ) -> Option<Vec<i64>>,
    ) -> Self {
        let d = basis.mats.len();
        let mut sc = vec![0; d * d * d];
        for i in 0..d {
            for j in 0..d {
                let br = mat_commutator(&basis.rule, &basis.mats[i], &basis.mats[j]);
                let c = coords(&br).expect("bracket leaves the lattice");
                assert_eq!(basis.combine(&c), br, "coordinate extraction");
                sc[(i * d + j) * d..(i * d + j + 1) * d].copy_from_slice(&c);
            }
        }
        LieLattice { name, d, sc }
    }

    pub fn abelian(d: usize) -> Self {
        LieLattice {
            name: format!("abelian{d}"),
            d,
            sc: vec![0; d * d * d],
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn lambda(&self, i: usize, j: usize, h: usize) -> i64 {
        self.sc[(i * self.d + j) * self.d + h]
    }

    /// Coordinates of `[x, y]`.
    pub fn bracket<T>(&self, x: &[T], y: &[T]) -> Vec<T>
    where
        T: Clone + Zero + FromPrimitive + Add<Output = T> + Mul<Output = T>,
    {
        let d = self.d;
        let mut out = vec![T::zero(); d];
        for i in 0..d {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..d {
                if y[j].is_zero() {
                    continue;
                }
                let xy = x[i].clone() * y[j].clone();
                for (h, o) in out.iter_mut().enumerate() {
                    let c = self.lambda(i, j, h);
                    if c != 0 {
                        *o = o.clone() + T::from_i64(c).unwrap() * xy.clone();
                    }
                }
            }
        }
        out
    }

    pub fn commutator_matrix(&self) -> CommutatorMatrix {
        let d = self.d;
        let mut forms = vec![Vec::new(); d * d];
        for i in 0..d {
            for j in 0..d {
                for h in 0..d {
                    let c = self.lambda(i, j, h);
                    if c != 0 {
                        forms[i * d + j].push((h, c));
                    }
                }
            }
        }
        CommutatorMatrix { d, forms }
    }

    /// Rank over Q of the brackets of basis vectors equals `d`.
    pub fn is_perfect(&self) -> bool {
        let d = self.d;
        let mut rows = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                rows.push((0..d).map(|h| BigRational::from_integer(self.lambda(i, j, h).into())).collect());
            }
        }
        rank_q(rows) == d
    }

    /// `2 rho`: the rank of `R(y)` at a generic point.
    ///
    /// Evaluated at a few fixed integer points whose coordinates are distinct powers of 2.
    pub fn generic_rank(&self) -> usize {
        let r = self.commutator_matrix();
        let d = self.d;
        (0..3u32)
            .map(|shift| {
                let y: Vec<i64> = (0..d as u32).map(|k| 1i64 << ((k * 3 + shift) % 40)).collect();
                let m = r.evaluate_int(&y).expect("dimension");
                let rows = (0..d)
                    .map(|i| (0..d).map(|j| BigRational::from_integer(m[i * d + j].into())).collect())
                    .collect();
                rank_q(rows)
            })
            .max()
            .unwrap_or(0)
    }

    pub fn rho(&self) -> usize {
        self.generic_rank() / 2
    }

    /// Checks the Jacobi identity on all basis triples.
    pub fn satisfies_jacobi(&self) -> bool {
        let d = self.d;
        let e = |i: usize| -> Vec<i64> { (0..d).map(|k| i64::from(k == i)).collect() };
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    let (x, y, z) = (e(a), e(b), e(c));
                    let t1 = self.bracket(&x, &self.bracket(&y, &z));
                    let t2 = self.bracket(&y, &self.bracket(&z, &x));
                    let t3 = self.bracket(&z, &self.bracket(&x, &y));
                    if (0..d).any(|h| t1[h] + t2[h] + t3[h] != 0) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

fn rank_q(mut rows: Vec<Vec<BigRational>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, piv);
        let pv = rows[rank][c].clone();
        for r in rank + 1..rows.len() {
            if rows[r][c].is_zero() {
                continue;
            }
            let f = rows[r][c].clone() / pv.clone();
            for k in c..cols {
                let sub = f.clone() * rows[rank][k].clone();
                rows[r][k] = rows[r][k].clone() - sub;
            }
        }
        rank += 1;
    }
    rank
}

pub fn make_sl3() -> LieLattice {
    LieLattice::from_basis("sl3".into(), &sl3_basis(), sl3_coords)
}

/// The lattice `su3(O, o)` for the unramified quadratic extension of `Z_p`; rejects `p = 3`.
pub fn make_su3(p: u64) -> Result<LieLattice> {
    let basis = su3_basis(p)?;
    let theta = basis.mats[6][0][0];
    Ok(LieLattice::from_basis(format!("su3_p{p}"), &basis, |x| {
        su3_coords(theta, x)
    }))
}

/// `R(Y)`: entry `(i, j)` is the linear form `sum_h lambda_{ij}^h Y_h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommutatorMatrix {
    d: usize,
    forms: Vec<Vec<(usize, i64)>>,
}

impl CommutatorMatrix {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn form(&self, i: usize, j: usize) -> &[(usize, i64)] {
        &self.forms[i * self.d + j]
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: len,
            });
        }
        Ok(())
    }

    pub fn evaluate<T>(&self, y: &[T]) -> Result<Vec<T>>
    where
        T: Clone + Zero + FromPrimitive + Add<Output = T> + Mul<Output = T>,
    {
        self.check(y.len())?;
        Ok(self
            .forms
            .iter()
            .map(|f| {
                f.iter().fold(T::zero(), |acc, &(h, c)| {
                    acc + T::from_i64(c).unwrap() * y[h].clone()
                })
            })
            .collect())
    }

    pub fn evaluate_int(&self, y: &[i64]) -> Result<Vec<i64>> {
        self.evaluate(y)
    }

    pub fn evaluate_mod(&self, y: &[u64], ring: &ResidueRing) -> Result<ModMatrix> {
        self.check(y.len())?;
        let mut out = ModMatrix::zero(*ring, self.d);
        self.fill_mod(y, ring, &mut out.data);
        Ok(out)
    }

    /// Writes `R(y) mod p^n` into `out` (length `d*d`); `y` entries must be reduced.
    #[inline]
    pub fn fill_mod(&self, y: &[u64], ring: &ResidueRing, out: &mut [u64]) {
        let m = ring.modulus() as i64;
        for (o, f) in out.iter_mut().zip(&self.forms) {
            let mut acc: i64 = 0;
            for &(h, c) in f {
                acc += c * y[h] as i64;
            }
            *o = acc.rem_euclid(m) as u64;
        }
    }
}

/// The matrix `[kappa_0]` of the normalised Killing form on the `sl3` basis.
pub const KILLING_SL3: [[i64; 8]; 8] = [
    [2, -1, 0, 0, 0, 0, 0, 0],
    [-1, 2, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 1, 0, 0],
    [0, 0, 0, 0, 0, 0, 1, 0],
    [0, 0, 0, 0, 0, 0, 0, 1],
    [0, 0, 1, 0, 0, 0, 0, 0],
    [0, 0, 0, 1, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, 0, 0, 0],
];

/// `x^t B y` for the `sl3` lattice.
pub fn normalized_killing<T>(l: &LieLattice, x: &[T], y: &[T]) -> Result<T>
where
    T: Clone + Zero + FromPrimitive + Add<Output = T> + Mul<Output = T>,
{
    if l.name() != "sl3" {
        return Err(Error::Unsupported(format!(
            "normalised Killing form is only provided for sl3, not {}",
            l.name()
        )));
    }
    if x.len() != 8 || y.len() != 8 {
        return Err(Error::DimensionMismatch {
            expected: 8,
            got: x.len().min(y.len()),
        });
    }
    let mut acc = T::zero();
    for i in 0..8 {
        for j in 0..8 {
            let b = KILLING_SL3[i][j];
            if b != 0 {
                acc = acc + T::from_i64(b).unwrap() * x[i].clone() * y[j].clone();
            }
        }
    }
    Ok(acc)
}

/// Determinant of an integer matrix, exactly.
pub fn det_int(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
        .collect();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(piv) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return BigInt::zero();
        };
        if piv != c {
            a.swap(piv, c);
            det = -det;
        }
        let pv = a[c][c].clone();
        det *= pv.clone();
        for r in c + 1..n {
            let f = a[r][c].clone() / pv.clone();
            for k in c..n {
                let sub = f.clone() * a[c][k].clone();
                a[r][k] = a[r][k].clone() - sub;
            }
        }
    }
    det.to_integer()
}

/// The criterion `m > e/(p-1)`, `m >= e/(p-2)` for odd `p`, `m >= 2e` for `p = 2`.
pub fn permissible(e: u32, p: u64, m: u32) -> bool {
    let (e, p, m) = (e as u64, p, m as u64);
    if m * (p - 1) <= e {
        return false;
    }
    if p == 2 {
        m >= 2 * e
    } else {
        m * (p - 2) >= e
    }
}
