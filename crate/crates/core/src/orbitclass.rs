//! Adjoint orbits of `GL3(F_q)` on `sl3(F_q)` and of `GU3(F_{q^2}, F_q)` on
//! `su3(F_{q^2}, F_q)`: the eight orbit types, exhaustive censuses, centraliser
//! orders, the Cayley map and the Ennola orbit-size formula.
//!
//! Matrices are `[[FqElem; 3]; 3]` indexed `[row][column]`. The Hermitian form for the
//! unitary groups is the identity, so `GU3 = {g : g° g = 1}` with `g°` the conjugate
//! transpose.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::modring::{row_reduce_mod_p, nullspace_mod_p, FqElem, FqField};
use crate::ratfun::Variant;
use crate::{Error, Result};

pub type Mat3 = [[FqElem; 3]; 3];

/// Default cap on the number of candidates visited by the exhaustive routines.
pub const DEFAULT_ORBIT_BUDGET: u128 = 1 << 28;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OrbitTag {
    T0,
    T1,
    T2,
    T3,
    T4a,
    T4b,
    T4c,
    T5,
}

impl OrbitTag {
    pub const ALL: [OrbitTag; 8] = [
        OrbitTag::T0,
        OrbitTag::T1,
        OrbitTag::T2,
        OrbitTag::T3,
        OrbitTag::T4a,
        OrbitTag::T4b,
        OrbitTag::T4c,
        OrbitTag::T5,
    ];

    pub fn label(self) -> &'static str {
        match self {
            OrbitTag::T0 => "0",
            OrbitTag::T1 => "1",
            OrbitTag::T2 => "2",
            OrbitTag::T3 => "3",
            OrbitTag::T4a => "4a",
            OrbitTag::T4b => "4b",
            OrbitTag::T4c => "4c",
            OrbitTag::T5 => "5",
        }
    }
}

impl fmt::Display for OrbitTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularity {
    Zero,
    Regular,
    Irregular,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrbitType {
    pub tag: OrbitTag,
    pub regularity: Regularity,
}

impl From<OrbitTag> for OrbitType {
    fn from(tag: OrbitTag) -> Self {
        let regularity = match tag {
            OrbitTag::T0 => Regularity::Zero,
            OrbitTag::T2 | OrbitTag::T3 => Regularity::Irregular,
            _ => Regularity::Regular,
        };
        OrbitType { tag, regularity }
    }
}

// ---------------------------------------------------------------------------
// 3x3 matrix arithmetic over F_q

pub fn zero_mat(k: &FqField) -> Mat3 {
    [[k.zero(); 3]; 3]
}

pub fn identity(k: &FqField) -> Mat3 {
    let mut m = zero_mat(k);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = k.one();
    }
    m
}

/// Builds a matrix from integer entries (prime-field values).
pub fn mat_from_ints(k: &FqField, rows: [[i64; 3]; 3]) -> Mat3 {
    rows.map(|r| r.map(|v| k.from_int(v)))
}

pub fn mat_mul(k: &FqField, a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = zero_mat(k);
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = k.zero();
            for l in 0..3 {
                acc = k.add(acc, k.mul(a[i][l], b[l][j]));
            }
            out[i][j] = acc;
        }
    }
    out
}

pub fn mat_add(k: &FqField, a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = *a;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = k.add(a[i][j], b[i][j]);
        }
    }
    out
}

pub fn mat_sub(k: &FqField, a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = *a;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = k.sub(a[i][j], b[i][j]);
        }
    }
    out
}

pub fn mat_scale(k: &FqField, c: FqElem, a: &Mat3) -> Mat3 {
    a.map(|r| r.map(|v| k.mul(c, v)))
}

pub fn trace(k: &FqField, a: &Mat3) -> FqElem {
    k.add(k.add(a[0][0], a[1][1]), a[2][2])
}

pub fn det(k: &FqField, a: &Mat3) -> FqElem {
    let col2 = [a[0][2], a[1][2], a[2][2]];
    let cof = cross(k, [a[0][0], a[1][0], a[2][0]], [a[0][1], a[1][1], a[2][1]]);
    dot(k, col2, cof)
}

/// Conjugate transpose `x°`.
pub fn conj_transpose(k: &FqField, a: &Mat3) -> Mat3 {
    let mut out = *a;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = k.sigma(a[j][i]);
        }
    }
    out
}

pub fn mat_inv(k: &FqField, a: &Mat3) -> Result<Mat3> {
    let d = k.inv(det(k, a)).ok_or(Error::Singular)?;
    let mut out = zero_mat(k);
    for i in 0..3 {
        for j in 0..3 {
            // adjugate: out[i][j] = cofactor of a[j][i]
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            let m = k.sub(k.mul(a[r0][c0], a[r1][c1]), k.mul(a[r0][c1], a[r1][c0]));
            out[i][j] = k.mul(m, d);
        }
    }
    Ok(out)
}

fn cross(k: &FqField, a: [FqElem; 3], b: [FqElem; 3]) -> [FqElem; 3] {
    [
        k.sub(k.mul(a[1], b[2]), k.mul(a[2], b[1])),
        k.sub(k.mul(a[2], b[0]), k.mul(a[0], b[2])),
        k.sub(k.mul(a[0], b[1]), k.mul(a[1], b[0])),
    ]
}

fn dot(k: &FqField, a: [FqElem; 3], b: [FqElem; 3]) -> FqElem {
    let mut acc = k.zero();
    for i in 0..3 {
        acc = k.add(acc, k.mul(a[i], b[i]));
    }
    acc
}

fn column(a: &Mat3, j: usize) -> [FqElem; 3] {
    [a[0][j], a[1][j], a[2][j]]
}

/// Hermitian inner product `sum sigma(a_i) b_i`.
fn herm(k: &FqField, a: [FqElem; 3], b: [FqElem; 3]) -> FqElem {
    dot(k, a.map(|v| k.sigma(v)), b)
}

// ---------------------------------------------------------------------------
// Classification

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum CubicPattern {
    Nilpotent,
    Double(FqElem),
    /// Three simple roots; `skew` when every root satisfies `sigma(r) = -r`.
    ThreeRoots { skew: bool },
    OneRoot,
    NoRoot,
}

/// Root pattern of `X^3 + c1 X + c0` over `k`, by evaluation at every field element.
fn cubic_pattern(k: &FqField, c1: FqElem, c0: FqElem) -> CubicPattern {
    if k.is_zero(c1) && k.is_zero(c0) {
        return CubicPattern::Nilpotent;
    }
    let three = k.from_int(3);
    let mut roots = 0;
    let mut skew = 0;
    for a in k.elements() {
        let a2 = k.mul(a, a);
        let v = k.add(k.mul(k.add(a2, c1), a), c0);
        if k.is_zero(v) {
            if k.is_zero(k.add(k.mul(three, a2), c1)) {
                return CubicPattern::Double(a);
            }
            roots += 1;
            if k.is_zero(k.add(k.sigma(a), a)) {
                skew += 1;
            }
        }
    }
    match roots {
        3 => CubicPattern::ThreeRoots { skew: skew == 3 },
        1 => CubicPattern::OneRoot,
        0 => CubicPattern::NoRoot,
        _ => unreachable!("a cubic with two simple roots has a third"),
    }
}

/// `(c1, c0)` with `X^3 + c1 X + c0` the characteristic polynomial of a traceless matrix.
fn char_coeffs(k: &FqField, x: &Mat3) -> (FqElem, FqElem) {
    let minor = |i: usize, j: usize| k.sub(k.mul(x[i][i], x[j][j]), k.mul(x[i][j], x[j][i]));
    let c1 = k.add(k.add(minor(0, 1), minor(0, 2)), minor(1, 2));
    (c1, k.neg(det(k, x)))
}

fn classify_with(k: &FqField, x: &Mat3, pattern: CubicPattern) -> OrbitType {
    let tag = match pattern {
        CubicPattern::Nilpotent => {
            if x.iter().flatten().all(|&v| k.is_zero(v)) {
                OrbitTag::T0
            } else if mat_mul(k, x, x).iter().flatten().all(|&v| k.is_zero(v)) {
                OrbitTag::T2
            } else {
                OrbitTag::T1
            }
        }
        CubicPattern::Double(lambda) => {
            let mu = k.neg(k.add(lambda, lambda));
            let id = identity(k);
            let a = mat_sub(k, x, &mat_scale(k, lambda, &id));
            let b = mat_sub(k, x, &mat_scale(k, mu, &id));
            if mat_mul(k, &a, &b).iter().flatten().all(|&v| k.is_zero(v)) {
                OrbitTag::T3
            } else {
                OrbitTag::T5
            }
        }
        // over F_{q^2} the roots of an antihermitian matrix are permuted by r -> -sigma(r);
        // 4a fixes all three, 4b swaps two
        CubicPattern::ThreeRoots { skew } => {
            if k.f() == 1 || skew {
                OrbitTag::T4a
            } else {
                OrbitTag::T4b
            }
        }
        CubicPattern::OneRoot => OrbitTag::T4b,
        CubicPattern::NoRoot => OrbitTag::T4c,
    };
    tag.into()
}

fn classify_unchecked(k: &FqField, x: &Mat3) -> OrbitType {
    let (c1, c0) = char_coeffs(k, x);
    classify_with(k, x, cubic_pattern(k, c1, c0))
}

fn check_sl3(k: &FqField, x: &Mat3) -> Result<()> {
    if k.p() == 3 {
        return Err(Error::CharThree);
    }
    if !k.is_zero(trace(k, x)) {
        return Err(Error::NotInAlgebra("trace is not zero".into()));
    }
    Ok(())
}

fn check_su3(k: &FqField, x: &Mat3) -> Result<()> {
    if k.f() != 2 {
        return Err(Error::Unsupported("su3 lives over a quadratic extension".into()));
    }
    if k.p() < 5 {
        return Err(Error::Unsupported(format!(
            "su3 classification needs characteristic at least 5, got {}",
            k.p()
        )));
    }
    if !k.is_zero(trace(k, x)) {
        return Err(Error::NotInAlgebra("trace is not zero".into()));
    }
    let xc = conj_transpose(k, x);
    if mat_add(k, &xc, x).iter().flatten().any(|&v| !k.is_zero(v)) {
        return Err(Error::NotInAlgebra("matrix is not antihermitian".into()));
    }
    Ok(())
}

/// Orbit type of a traceless matrix under `GL3` conjugation.
pub fn classify_sl3(k: &FqField, x: &Mat3) -> Result<OrbitType> {
    check_sl3(k, x)?;
    Ok(classify_unchecked(k, x))
}

/// Orbit type of a traceless antihermitian matrix under `GU3` conjugation.
///
/// The root pattern of the characteristic polynomial over `F_{q^2}` separates 4a (three
/// roots), 4b (one root) and 4c (none).
pub fn classify_su3(k: &FqField, x: &Mat3) -> Result<OrbitType> {
    check_su3(k, x)?;
    Ok(classify_unchecked(k, x))
}

pub fn classify(variant: Variant, k: &FqField, x: &Mat3) -> Result<OrbitType> {
    match variant {
        Variant::Sl3 => classify_sl3(k, x),
        Variant::Su3 => classify_su3(k, x),
    }
}

// ---------------------------------------------------------------------------
// Enumeration of the algebras

/// The field carrying the algebra: `F_q` for sl3, `F_{q^2}` for su3.
pub fn algebra_field(variant: Variant, q: u64) -> Result<FqField> {
    match variant {
        Variant::Sl3 => {
            let k = FqField::new(q, 1)?;
            if q == 3 {
                return Err(Error::CharThree);
            }
            Ok(k)
        }
        Variant::Su3 => {
            if q < 5 {
                return Err(Error::Unsupported(format!(
                    "su3 classification needs characteristic at least 5, got {q}"
                )));
            }
            FqField::new(q, 2)
        }
    }
}

/// The element with the given index in `0..q^8`.
///
/// sl3: digits are `x00, x11, x01, x02, x10, x12, x20, x21` with `x22 = -x00 - x11`.
/// su3: digits `a, b` give the diagonal `a s, b s, -(a+b) s` (`s` the square root of the
/// non-residue) and three pairs give `x01, x02, x12`, the lower triangle being `-sigma`
/// of the upper one.
pub fn element_at(variant: Variant, k: &FqField, mut index: u64) -> Mat3 {
    let p = k.p() as u64;
    let mut digit = || {
        let d = (index % p) as i64;
        index /= p;
        d
    };
    let mut x = zero_mat(k);
    match variant {
        Variant::Sl3 => {
            x[0][0] = k.from_int(digit());
            x[1][1] = k.from_int(digit());
            x[2][2] = k.neg(k.add(x[0][0], x[1][1]));
            for (i, j) in [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)] {
                x[i][j] = k.from_int(digit());
            }
        }
        Variant::Su3 => {
            x[0][0] = k.elem(0, digit());
            x[1][1] = k.elem(0, digit());
            x[2][2] = k.neg(k.add(x[0][0], x[1][1]));
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                let (c0, c1) = (digit(), digit());
                x[i][j] = k.elem(c0, c1);
                x[j][i] = k.neg(k.sigma(x[i][j]));
            }
        }
    }
    x
}

/// Per-type element counts over a whole algebra.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitCensus {
    pub variant: Variant,
    pub q: u64,
    pub counts: BTreeMap<OrbitTag, u64>,
}

impl OrbitCensus {
    pub fn count(&self, tag: OrbitTag) -> u64 {
        self.counts.get(&tag).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

/// Classifies all `q^8` elements of the algebra.
pub fn census(variant: Variant, q: u64, budget: u128) -> Result<OrbitCensus> {
    let k = algebra_field(variant, q)?;
    let size = (q as u128).pow(8);
    if size > budget {
        return Err(Error::BudgetExceeded {
            required: size,
            budget,
        });
    }
    let kq = k.q() as usize;
    let table: Vec<CubicPattern> = (0..kq * kq)
        .map(|i| cubic_pattern(&k, k.from_index(i / kq), k.from_index(i % kq)))
        .collect();
    let size = size as u64;
    let block = q * q;
    let counts = (0..size / block)
        .into_par_iter()
        .fold(
            || [0u64; 8],
            |mut acc, hi| {
                for lo in 0..block {
                    let x = element_at(variant, &k, hi * block + lo);
                    let (c1, c0) = char_coeffs(&k, &x);
                    let pat = table[k.index(c1) * kq + k.index(c0)];
                    acc[classify_with(&k, &x, pat).tag as usize] += 1;
                }
                acc
            },
        )
        .reduce(
            || [0u64; 8],
            |mut a, b| {
                for i in 0..8 {
                    a[i] += b[i];
                }
                a
            },
        );
    Ok(OrbitCensus {
        variant,
        q,
        counts: OrbitTag::ALL
            .iter()
            .map(|&t| (t, counts[t as usize]))
            .collect(),
    })
}

/// First element of each type in index order.
pub fn representatives(variant: Variant, q: u64) -> Result<BTreeMap<OrbitTag, Mat3>> {
    let k = algebra_field(variant, q)?;
    let mut reps = BTreeMap::new();
    for i in 0..q.pow(8) {
        let x = element_at(variant, &k, i);
        reps.entry(classify_unchecked(&k, &x).tag).or_insert(x);
        if reps.len() == 8 {
            break;
        }
    }
    Ok(reps)
}

// ---------------------------------------------------------------------------
// Table formulas

/// One row of the orbit tables, evaluated at `q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub tag: OrbitTag,
    pub regularity: Regularity,
    pub orbits: u128,
    pub orbit_size: u128,
    pub total: u128,
    /// Order of the centraliser in `SL3` resp. `SU3`.
    pub centraliser_order: u128,
}

pub fn table_row(variant: Variant, tag: OrbitTag, q: u64) -> TableRow {
    let q = q as i128;
    // the su3 rows are the sl3 rows with q -> -q, up to sign
    let e: i128 = match variant {
        Variant::Sl3 => 1,
        Variant::Su3 => -1,
    };
    let q3 = q * q * q;
    let (orbits, size, cen) = match tag {
        OrbitTag::T0 => (1, 1, q3 * (q * q - 1) * (q3 - e)),
        OrbitTag::T1 => (
            1,
            (q3 - e) * (q * q - 1) * q,
            (q - e).gcd(&3) * q * q,
        ),
        OrbitTag::T2 => (1, (q3 - e) * (q + e), (q - e) * q3),
        OrbitTag::T3 => (
            q - 1,
            (q * q + e * q + 1) * q * q,
            match variant {
                Variant::Sl3 => (q * q - 1) * (q * q - q),
                Variant::Su3 => q * (q + 1) * (q * q - 1),
            },
        ),
        OrbitTag::T4a => (
            (q - 1) * (q - 2) / 6,
            (q * q + e * q + 1) * (q + e) * q3,
            (q - e) * (q - e),
        ),
        OrbitTag::T4b => ((q - 1) * q / 2, (q3 - e) * q3, q * q - 1),
        OrbitTag::T4c => (
            (q * q - 1) / 3,
            (q * q - 1) * (q - e) * q3,
            q * q + e * q + 1,
        ),
        OrbitTag::T5 => (q - 1, (q3 - e) * (q + e) * q * q, (q - e) * q),
    };
    TableRow {
        tag,
        regularity: OrbitType::from(tag).regularity,
        orbits: orbits as u128,
        orbit_size: size as u128,
        total: (orbits * size) as u128,
        centraliser_order: cen as u128,
    }
}

pub fn table(variant: Variant, q: u64) -> Vec<TableRow> {
    OrbitTag::ALL.iter().map(|&t| table_row(variant, t, q)).collect()
}

// ---------------------------------------------------------------------------
// Centralisers

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MatrixGroup {
    Gl3,
    Sl3,
    Gu3,
    Su3,
}

impl MatrixGroup {
    fn unitary(self) -> bool {
        matches!(self, MatrixGroup::Gu3 | MatrixGroup::Su3)
    }

    fn special(self) -> bool {
        matches!(self, MatrixGroup::Sl3 | MatrixGroup::Su3)
    }
}

/// Order of the group over `k`; the unitary groups use `q = p` with `k = F_{p^2}`.
pub fn group_order(group: MatrixGroup, k: &FqField) -> Result<u128> {
    if group.unitary() {
        if k.f() != 2 {
            return Err(Error::Unsupported("unitary groups need F_{q^2}".into()));
        }
        let q = k.p() as u128;
        let su = q.pow(3) * (q * q - 1) * (q.pow(3) + 1);
        return Ok(if group.special() { su } else { su * (q + 1) });
    }
    let n = k.q() as u128;
    let sl = n.pow(3) * (n * n - 1) * (n.pow(3) - 1);
    Ok(if group.special() { sl } else { sl * (n - 1) })
}

/// `F_p`-basis of the centraliser algebra `{g : g x = x g}` in `Mat3(k)`.
fn centraliser_algebra(k: &FqField, x: &Mat3) -> Vec<Mat3> {
    let f = k.f() as usize;
    let p = k.p();
    let nvars = 9 * f;
    let unit = |v: usize| {
        let mut m = zero_mat(k);
        let (entry, comp) = (v / f, v % f);
        let (col, row) = (entry / 3, entry % 3);
        m[row][col] = if comp == 0 { k.one() } else { k.gen() };
        m
    };
    // equations: rows indexed by (entry, comp) of g x - x g, columns by variables
    let images: Vec<Mat3> = (0..nvars)
        .map(|v| {
            let e = unit(v);
            mat_sub(k, &mat_mul(k, &e, x), &mat_mul(k, x, &e))
        })
        .collect();
    let mut rows = Vec::with_capacity(nvars);
    for i in 0..3 {
        for j in 0..3 {
            for comp in 0..f {
                rows.push(
                    images
                        .iter()
                        .map(|m| k.coords(m[i][j])[comp])
                        .collect::<Vec<u32>>(),
                );
            }
        }
    }
    let kernel = nullspace_mod_p(&rows, nvars, p);
    if kernel.is_empty() {
        return Vec::new();
    }
    // column-major coordinates: reduced echelon rows are grouped by the column of their pivot
    let (rank, reduced) = row_reduce_mod_p(&kernel, p);
    reduced
        .into_iter()
        .take(rank)
        .map(|v| {
            let mut m = zero_mat(k);
            for entry in 0..9 {
                let c0 = v[entry * f] as i64;
                let c1 = if f == 2 { v[entry * f + 1] as i64 } else { 0 };
                m[entry % 3][entry / 3] = k.elem(c0, c1);
            }
            m
        })
        .collect()
}

/// Solutions `c` of `A c = b` over `F_p` as (particular, kernel basis); rows are `[A | b]`.
fn solve_affine(rows: &[Vec<u32>], nvars: usize, p: u32) -> Option<(Vec<u32>, Vec<Vec<u32>>)> {
    if rows.is_empty() {
        return Some((vec![0; nvars], nullspace_mod_p(&[], nvars, p)));
    }
    let (rank, reduced) = row_reduce_mod_p(rows, p);
    let mut particular = vec![0u32; nvars];
    for row in reduced.iter().take(rank) {
        let pivot = row.iter().position(|&v| v != 0).unwrap();
        if pivot == nvars {
            return None;
        }
        particular[pivot] = row[nvars];
    }
    let homogeneous: Vec<Vec<u32>> = rows.iter().map(|r| r[..nvars].to_vec()).collect();
    Some((particular, nullspace_mod_p(&homogeneous, nvars, p)))
}

struct ColumnSearch<'a> {
    k: &'a FqField,
    group: MatrixGroup,
    blocks: [Vec<Mat3>; 3],
    budget: u128,
    visited: u128,
    sink: Option<Vec<Mat3>>,
}

impl ColumnSearch<'_> {
    /// Linear conditions on column `b`: `(w, target)` meaning `sum w_i col_i = target`.
    fn conditions(&self, b: usize, g: &Mat3) -> Vec<([FqElem; 3], FqElem)> {
        let k = self.k;
        let mut out = Vec::new();
        if self.group.unitary() {
            for a in 0..b {
                out.push((column(g, a).map(|v| k.sigma(v)), k.zero()));
            }
        }
        if b == 2 && self.group.special() {
            out.push((cross(k, column(g, 0), column(g, 1)), k.one()));
        }
        out
    }

    fn accept(&self, b: usize, g: &Mat3) -> bool {
        let k = self.k;
        let col = column(g, b);
        if self.group.unitary() {
            return herm(k, col, col) == k.one();
        }
        match b {
            0 => col.iter().any(|&v| !k.is_zero(v)),
            1 => cross(k, column(g, 0), col).iter().any(|&v| !k.is_zero(v)),
            _ => self.group.special() || !k.is_zero(det(k, g)),
        }
    }

    fn search(&mut self, b: usize, g: Mat3) -> Result<u128> {
        let k = self.k;
        let p = k.p();
        let f = k.f() as usize;
        let free = self.blocks[b].clone();
        let n = free.len();
        let mut rows = Vec::new();
        for (w, target) in self.conditions(b, &g) {
            let rhs = k.sub(target, dot(k, w, column(&g, b)));
            let lhs: Vec<FqElem> = free.iter().map(|m| dot(k, w, column(m, b))).collect();
            for comp in 0..f {
                let mut row: Vec<u32> = lhs.iter().map(|&v| k.coords(v)[comp]).collect();
                row.push(k.coords(rhs)[comp]);
                rows.push(row);
            }
        }
        let Some((part, kernel)) = solve_affine(&rows, n, p) else {
            return Ok(0);
        };
        let combine = |coeffs: &[u32]| -> Mat3 {
            let mut m = zero_mat(k);
            for (c, basis) in coeffs.iter().zip(&free) {
                if *c != 0 {
                    m = mat_add(k, &m, &mat_scale(k, k.from_int(*c as i64), basis));
                }
            }
            m
        };
        let base = mat_add(k, &g, &combine(&part));
        let dirs: Vec<Mat3> = kernel.iter().map(|v| combine(v)).collect();
        let mut digits = vec![0u32; dirs.len()];
        let mut total = 0u128;
        let mut cand = base;
        loop {
            self.visited += 1;
            if self.visited > self.budget {
                return Err(Error::BudgetExceeded {
                    required: self.visited,
                    budget: self.budget,
                });
            }
            if self.accept(b, &cand) {
                if b == 2 {
                    total += 1;
                    if let Some(sink) = self.sink.as_mut() {
                        sink.push(cand);
                    }
                } else {
                    total += self.search(b + 1, cand)?;
                }
            }
            // odometer; adding a direction p times is the identity
            let mut i = 0;
            loop {
                if i == digits.len() {
                    return Ok(total);
                }
                cand = mat_add(k, &cand, &dirs[i]);
                digits[i] += 1;
                if digits[i] < p {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
        }
    }
}

/// Number of elements of `group` commuting with `x`.
///
/// The centraliser algebra is enumerated column by column; the orthogonality and
/// determinant conditions, being linear in the newest column, cut down each step before
/// enumeration. `BudgetExceeded` reports the number of candidates visited when the cap hit.
pub fn centralizer_order(k: &FqField, x: &Mat3, group: MatrixGroup, budget: u128) -> Result<u128> {
    Ok(column_search(k, x, group, budget, false)?.0)
}

/// All elements of `group` over `k`.
pub fn group_elements(k: &FqField, group: MatrixGroup, budget: u128) -> Result<Vec<Mat3>> {
    Ok(column_search(k, &zero_mat(k), group, budget, true)?.1)
}

fn column_search(
    k: &FqField,
    x: &Mat3,
    group: MatrixGroup,
    budget: u128,
    collect: bool,
) -> Result<(u128, Vec<Mat3>)> {
    if group.unitary() && k.f() != 2 {
        return Err(Error::Unsupported("unitary groups need F_{q^2}".into()));
    }
    let f = k.f() as usize;
    let mut blocks: [Vec<Mat3>; 3] = Default::default();
    for m in centraliser_algebra(k, x) {
        let b = (0..3)
            .find(|&c| (0..3).any(|r| !k.is_zero(m[r][c])))
            .expect("basis vectors are nonzero");
        blocks[b].push(m);
    }
    debug_assert!(blocks.iter().all(|b| b.len() <= 3 * f));
    let mut search = ColumnSearch {
        k,
        group,
        blocks,
        budget,
        visited: 0,
        sink: collect.then(Vec::new),
    };
    let count = search.search(0, zero_mat(k))?;
    Ok((count, search.sink.unwrap_or_default()))
}

/// `|Cen_{GL3(k)}(x)|`, reading off the group order when the centraliser is everything.
pub fn gl_centralizer_order(k: &FqField, x: &Mat3, budget: u128) -> Result<u128> {
    if x.iter().flatten().all(|&v| k.is_zero(v)) {
        return group_order(MatrixGroup::Gl3, k);
    }
    centralizer_order(k, x, MatrixGroup::Gl3, budget)
}

// ---------------------------------------------------------------------------
// Cayley map and Ennola

/// `(1 - y)(1 + y)^{-1}`; it is its own inverse.
pub fn cayley(k: &FqField, y: &Mat3) -> Result<Mat3> {
    let id = identity(k);
    let inv = mat_inv(k, &mat_add(k, &id, y))?;
    Ok(mat_mul(k, &mat_sub(k, &id, y), &inv))
}

pub fn cayley_inv(k: &FqField, x: &Mat3) -> Result<Mat3> {
    cayley(k, x)
}

/// Pieces of the Ennola orbit-size formula `gamma u / c`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnnolaOrbit {
    pub gamma: u128,
    pub c: u128,
    pub u: u128,
    pub orbit_size: u128,
}

/// Number of nonsingular Hermitian `Γ` with `x° Γ + Γ x = 0`.
pub fn ennola_gamma(k: &FqField, x: &Mat3, budget: u128) -> Result<u128> {
    if k.f() != 2 {
        return Err(Error::Unsupported("Hermitian forms need F_{q^2}".into()));
    }
    let p = k.p();
    let s = k.gen();
    let mut basis = Vec::new();
    for i in 0..3 {
        let mut m = zero_mat(k);
        m[i][i] = k.one();
        basis.push(m);
    }
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        for c in [k.one(), s] {
            let mut m = zero_mat(k);
            m[i][j] = c;
            m[j][i] = k.sigma(c);
            basis.push(m);
        }
    }
    let xc = conj_transpose(k, x);
    let images: Vec<Mat3> = basis
        .iter()
        .map(|g| mat_add(k, &mat_mul(k, &xc, g), &mat_mul(k, g, x)))
        .collect();
    let mut rows = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            for comp in 0..2 {
                rows.push(images.iter().map(|m| k.coords(m[i][j])[comp]).collect::<Vec<u32>>());
            }
        }
    }
    let kernel = nullspace_mod_p(&rows, basis.len(), p);
    let size = (p as u128).pow(kernel.len() as u32);
    if size > budget {
        return Err(Error::BudgetExceeded {
            required: size,
            budget,
        });
    }
    let dirs: Vec<Mat3> = kernel
        .iter()
        .map(|v| {
            v.iter().zip(&basis).fold(zero_mat(k), |acc, (&c, b)| {
                mat_add(k, &acc, &mat_scale(k, k.from_int(c as i64), b))
            })
        })
        .collect();
    let mut count = 0u128;
    let mut digits = vec![0u32; dirs.len()];
    let mut m = zero_mat(k);
    loop {
        if !k.is_zero(det(k, &m)) {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == digits.len() {
                return Ok(count);
            }
            m = mat_add(k, &m, &dirs[i]);
            digits[i] += 1;
            if digits[i] < p {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Size of the `GU3`-orbit of `x` as `gamma(x) u(q) / c(x)`.
pub fn ennola_orbit_size(k: &FqField, x: &Mat3, budget: u128) -> Result<EnnolaOrbit> {
    let gamma = ennola_gamma(k, x, budget)?;
    let c = gl_centralizer_order(k, x, budget)?;
    let u = group_order(MatrixGroup::Gu3, k)?;
    let (orbit_size, rem) = (gamma * u).div_rem(&c);
    if rem != 0 {
        return Err(Error::InvalidArgument(format!(
            "gamma u / c is not integral: {gamma} * {u} / {c}"
        )));
    }
    Ok(EnnolaOrbit {
        gamma,
        c,
        u,
        orbit_size,
    })
}

/// `|GU3| / |Cen_{GU3}(x)|`.
pub fn gu3_orbit_size(k: &FqField, x: &Mat3, budget: u128) -> Result<u128> {
    let cen = centralizer_order(k, x, MatrixGroup::Gu3, budget)?;
    Ok(group_order(MatrixGroup::Gu3, k)? / cen)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sl3_examples() {
        let k = FqField::new(5, 1).unwrap();
        let t = |rows| classify_sl3(&k, &mat_from_ints(&k, rows)).unwrap().tag;
        assert_eq!(t([[0; 3]; 3]), OrbitTag::T0);
        assert_eq!(t([[0, 1, 0], [0, 0, 1], [0, 0, 0]]), OrbitTag::T1);
        assert_eq!(t([[0, 1, 0], [0, 0, 0], [0, 0, 0]]), OrbitTag::T2);
        assert_eq!(t([[1, 0, 0], [0, 1, 0], [0, 0, -2]]), OrbitTag::T3);
        assert_eq!(t([[1, 0, 0], [0, 3, 0], [0, 0, 1]]), OrbitTag::T3);
        assert_eq!(t([[1, 1, 0], [0, 1, 0], [0, 0, -2]]), OrbitTag::T5);
        assert_eq!(t([[1, 0, 0], [0, 2, 0], [0, 0, -3]]), OrbitTag::T3);
        assert_eq!(t([[0, 0, 0], [0, 1, 0], [0, 0, -1]]), OrbitTag::T4a);
        assert!(classify_sl3(&k, &identity(&k)).is_err());
        let k3 = FqField::new(3, 1).unwrap();
        assert_eq!(classify_sl3(&k3, &zero_mat(&k3)), Err(Error::CharThree));
    }

    #[test]
    fn su3_examples() {
        let k = FqField::new(5, 2).unwrap();
        let s = k.gen();
        let mut x = zero_mat(&k);
        x[0][0] = s;
        x[1][1] = s;
        x[2][2] = k.mul(k.from_int(-2), s);
        assert_eq!(classify_su3(&k, &x).unwrap().tag, OrbitTag::T3);
        assert_eq!(classify_su3(&k, &zero_mat(&k)).unwrap().tag, OrbitTag::T0);
        let mut bad = zero_mat(&k);
        bad[0][1] = k.one();
        assert!(classify_su3(&k, &bad).is_err());
    }

    #[test]
    fn sl3_q2_partition() {
        let c = census(Variant::Sl3, 2, DEFAULT_ORBIT_BUDGET).unwrap();
        assert_eq!(c.total(), 256);
        for row in table(Variant::Sl3, 2) {
            assert_eq!(c.count(row.tag) as u128, row.total, "type {}", row.tag);
        }
    }

    #[test]
    fn sl3_centraliser_t4a() {
        let k = FqField::new(5, 1).unwrap();
        let x = mat_from_ints(&k, [[0, 0, 0], [0, 1, 0], [0, 0, -1]]);
        assert_eq!(centralizer_order(&k, &x, MatrixGroup::Sl3, DEFAULT_ORBIT_BUDGET).unwrap(), 16);
        assert_eq!(centralizer_order(&k, &x, MatrixGroup::Gl3, DEFAULT_ORBIT_BUDGET).unwrap(), 64);
    }

    #[test]
    fn cayley_zero_is_identity() {
        let k = FqField::new(5, 2).unwrap();
        assert_eq!(cayley(&k, &zero_mat(&k)).unwrap(), identity(&k));
        let minus_one = mat_scale(&k, k.from_int(-1), &identity(&k));
        assert_eq!(cayley(&k, &minus_one), Err(Error::Singular));
    }

    #[test]
    fn ennola_type_one() {
        let k = FqField::new(5, 2).unwrap();
        let reps = representatives(Variant::Su3, 5).unwrap();
        let e = ennola_orbit_size(&k, &reps[&OrbitTag::T1], DEFAULT_ORBIT_BUDGET).unwrap();
        assert_eq!(e.gamma, 4 * 25);
        assert_eq!(e.orbit_size, 15120);
    }
}
