//! The integral `Z(r, t)`: literal minor-norm integrand, profile-based truncated sums,
//! the link to the Poincare series, the closed forms `Z^[0]`, `Z^[1]`, and cone series.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::eldiv::{DivisorProfile, ProfileKernel};
use crate::error::{Error, Result};
use crate::lattice::LieLattice;
use crate::modring::ResidueRing;
use crate::poincare::ProfileCensus;
use crate::ratfun::{rational_pow, LaurentQT, RatFunQT};

/// The integrand on `|x| = q^-n` at a class `y` is `q^-(n t + c r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegrandExponent {
    pub n: u32,
    pub c: u32,
}

fn check_primitive(y: &[u64], p: u64) -> Result<()> {
    if y.iter().all(|&x| x % p == 0) {
        return Err(Error::NotPrimitive);
    }
    Ok(())
}

fn profile_of(l: &LieLattice, p: u64, n: u32, y: &[u64]) -> Result<DivisorProfile> {
    let ring = ResidueRing::new(p, n)?;
    if y.len() != l.d() {
        return Err(Error::DimensionMismatch {
            expected: l.d(),
            got: y.len(),
        });
    }
    let reduced: Vec<u64> = y.iter().map(|&x| x % ring.modulus()).collect();
    let m = l.commutator_matrix().evaluate_mod(&reduced, &ring)?;
    let kernel = ProfileKernel::new(ring);
    let mut data = m.data;
    let mut a = vec![0; l.d() / 2];
    kernel.profile_into(&mut data, l.d(), &mut a);
    Ok(DivisorProfile { n, a })
}

/// `c = 2 sum_{j <= factors} min(a_j, n)` from a profile.
pub fn exponent_from_profile(a: &DivisorProfile, factors: usize) -> u32 {
    2 * a.a.iter().take(factors).map(|&x| x.min(a.n)).sum::<u32>()
}

/// Profile-based exponent with `floor(d/2)` factors.
pub fn integrand_exponent(l: &LieLattice, p: u64, n: u32, y: &[u64]) -> Result<IntegrandExponent> {
    check_primitive(y, p)?;
    let a = profile_of(l, p, n, y)?;
    Ok(IntegrandExponent {
        n,
        c: exponent_from_profile(&a, l.d() / 2),
    })
}

/// Which minors enter the literal integrand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinorFamily {
    Principal,
    /// Every `2j x 2j` minor; slow, for spot checks.
    All,
}

/// Exact determinant by fraction-free elimination.
pub fn bareiss_det(mut m: Vec<Vec<i128>>) -> i128 {
    let k = m.len();
    if k == 0 {
        return 1;
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for c in 0..k - 1 {
        if m[c][c] == 0 {
            let Some(r) = (c + 1..k).find(|&r| m[r][c] != 0) else {
                return 0;
            };
            m.swap(c, r);
            sign = -sign;
        }
        for i in c + 1..k {
            for j in c + 1..k {
                m[i][j] = (m[i][j] * m[c][c] - m[i][c] * m[c][j]) / prev;
            }
        }
        prev = m[c][c];
    }
    sign * m[k - 1][k - 1]
}

fn val_i128(x: i128, p: u64) -> Option<u32> {
    if x == 0 {
        return None;
    }
    let (mut x, p, mut v) = (x.unsigned_abs(), p as u128, 0);
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    Some(v)
}

fn index_sets(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(start: usize, d: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..d {
            cur.push(x);
            go(x + 1, d, k, cur, out);
            cur.pop();
        }
    }
    go(0, d, k, &mut cur, &mut out);
    out
}

/// Minimal valuation of the `2j x 2j` minors of the integer matrix `m`, `None` if all vanish.
pub fn minor_valuation(m: &[Vec<i64>], j: usize, p: u64, family: MinorFamily) -> Option<u32> {
    let d = m.len();
    let sets = index_sets(d, 2 * j);
    let mut best: Option<u32> = None;
    let mut consider = |rows: &[usize], cols: &[usize]| {
        let sub: Vec<Vec<i128>> = rows
            .iter()
            .map(|&r| cols.iter().map(|&c| m[r][c] as i128).collect())
            .collect();
        if let Some(v) = val_i128(bareiss_det(sub), p) {
            best = Some(best.map_or(v, |b| b.min(v)));
        }
    };
    match family {
        MinorFamily::Principal => {
            for s in &sets {
                consider(s, s);
            }
        }
        MinorFamily::All => {
            for r in &sets {
                for c in &sets {
                    consider(r, c);
                }
            }
        }
    }
    best
}

/// Exponent `c` read off the literal product of minor-norm quotients at the integer lift
/// of `y` in `[0, p^n)`, with `factors` quotients.
///
/// A vanishing family `F_{j-1}` contributes the limit value `2n` to the `j`-th quotient.
pub fn integrand_exponent_literal(
    l: &LieLattice,
    p: u64,
    n: u32,
    y: &[u64],
    factors: usize,
    family: MinorFamily,
) -> Result<IntegrandExponent> {
    check_primitive(y, p)?;
    let ring = ResidueRing::new(p, n)?;
    let lift: Vec<i64> = y.iter().map(|&x| (x % ring.modulus()) as i64).collect();
    let flat = l.commutator_matrix().evaluate_int(&lift)?;
    let d = l.d();
    let m: Vec<Vec<i64>> = (0..d).map(|i| flat[i * d..(i + 1) * d].to_vec()).collect();
    let mut prev: Option<u32> = Some(0);
    let mut c = 0u32;
    for j in 1..=factors {
        let vj = minor_valuation(&m, j, p, family);
        match prev {
            Some(vp) => {
                let top = match vj {
                    Some(v) => v.min(vp + 2 * n),
                    None => vp + 2 * n,
                };
                c += top - vp;
            }
            None => c += 2 * n,
        }
        prev = vj;
    }
    Ok(IntegrandExponent { n, c })
}

fn q_pow(q: u64, e: &BigRational) -> Result<BigRational> {
    if !e.is_integer() {
        return Err(Error::NonIntegralExponent(e.to_string()));
    }
    let e = e
        .to_integer()
        .to_i64()
        .ok_or_else(|| Error::InvalidArgument("exponent out of range".into()))?;
    Ok(rational_pow(&BigRational::from_integer(BigInt::from(q)), e))
}

fn int(x: i64) -> BigRational {
    BigRational::from_integer(x.into())
}

/// `sum_{n <= n_max} (1 - q^-1) q^(-n(t+1)) q^(-nd) sum_a N_{n,a} q^(-c(n,a) r)` with
/// `c = 2 sum_{j <= factors} a_j`.
pub fn z_truncated(
    census: &ProfileCensus,
    r: &BigRational,
    t: &BigRational,
    n_max: u32,
    factors: usize,
) -> Result<BigRational> {
    if !census.is_exact() {
        return Err(Error::IncompleteCensus("census is sampled".into()));
    }
    let q = census.p;
    let d = census.d as i64;
    let one_minus = BigRational::one() - int(q as i64).recip();
    let mut total = BigRational::zero();
    for n in 1..=n_max {
        let lv = census
            .levels
            .get(&n)
            .ok_or_else(|| Error::IncompleteCensus(format!("level {n} missing")))?;
        let nn = int(n as i64);
        let outer = q_pow(q, &(-(nn.clone() * (t + BigRational::one())) - nn * int(d)))?;
        let mut inner = BigRational::zero();
        for (a, &cnt) in lv {
            let c = exponent_from_profile(a, factors);
            inner += BigRational::from_integer(BigInt::from(cnt)) * q_pow(q, &(-(int(c as i64) * r)))?;
        }
        total += one_minus.clone() * outer * inner;
    }
    Ok(total)
}

/// `1 + sum_{n <= n_max} sum_a N_{n,a} q^(-s sum_i (n - a_i))`.
pub fn poincare_truncated(census: &ProfileCensus, s: &BigRational, n_max: u32) -> Result<BigRational> {
    let mut total = BigRational::one();
    for n in 1..=n_max {
        let lv = census
            .levels
            .get(&n)
            .ok_or_else(|| Error::IncompleteCensus(format!("level {n} missing")))?;
        for (a, &cnt) in lv {
            let w = int(a.weight() as i64);
            total += BigRational::from_integer(BigInt::from(cnt)) * q_pow(census.p, &(-(w * s)))?;
        }
    }
    Ok(total)
}

/// Both sides of the link identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkReport {
    pub p: u64,
    pub n_max: u32,
    pub s: String,
    pub lhs: String,
    pub rhs: String,
    pub equal: bool,
}

/// `P_trunc(s) - 1` against `(1 - q^-1)^-1 Z_trunc(-s/2, rho s - d - 1)` with `rho` factors.
pub fn link_report(census: &ProfileCensus, s: &BigRational, rho: usize, n_max: u32) -> Result<LinkReport> {
    let q = census.p as i64;
    let lhs = poincare_truncated(census, s, n_max)? - BigRational::one();
    let r = -(s / int(2));
    let t = int(rho as i64) * s - int(census.d as i64) - BigRational::one();
    let z = z_truncated(census, &r, &t, n_max, rho)?;
    let rhs = z / (BigRational::one() - int(q).recip());
    Ok(LinkReport {
        p: census.p,
        n_max,
        s: s.to_string(),
        equal: lhs == rhs,
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
    })
}

/// The link identity with `rho = 3` as for the A2 lattices.
pub fn link_check(census: &ProfileCensus, s: &BigRational, n_max: u32) -> Result<bool> {
    Ok(link_report(census, s, 3, n_max)?.equal)
}

/// `(Z^[0](r, t), Z^[1](r, t))` at integer `q`, requiring `t > -1` and `2r + t > -4`.
pub fn closed_z0_z1(q: u64, r: &BigRational, t: &BigRational) -> Result<(BigRational, BigRational)> {
    let two_r = r * int(2);
    if !two_r.is_integer() || !t.is_integer() {
        return Err(Error::NonIntegralExponent(format!("r = {r}, t = {t}")));
    }
    if t <= &int(-1) || two_r.clone() + t <= int(-4) {
        return Err(Error::Pole);
    }
    let one = BigRational::one();
    let qi = one.clone() - int(q as i64).recip();
    let z0 = q_pow(q, &(int(-9) - t))? * qi.clone() / (one.clone() - q_pow(q, &(int(-1) - t))?);
    let z1 = q_pow(q, &(int(-9) - two_r.clone() - t))?
        * (one.clone() - q_pow(q, &(int(-4) - t))?)
        * qi
        / ((one.clone() - q_pow(q, &(int(-4) - two_r - t))?) * (one - q_pow(q, &(int(-1) - t))?));
    Ok((z0, z1))
}

/// `(#regular) Z^[0] + (#irregular) Z^[1]` for primitive residues mod `p`.
pub fn closed_z(q: u64, irregular: u128, r: &BigRational, t: &BigRational) -> Result<BigRational> {
    let (z0, z1) = closed_z0_z1(q, r, t)?;
    let all = BigInt::from(q).pow(8) - 1;
    let irr = BigInt::from(irregular);
    Ok(BigRational::from_integer(all - irr.clone()) * z0 + BigRational::from_integer(irr) * z1)
}

/// Upper bound for the omitted levels `n > n_max` of the link series at real `s`:
/// level `n` contributes at most `q^(dn - 2ns)` in total.
pub fn poincare_tail_bound(q: u64, d: usize, s: &BigRational, n_max: u32) -> Result<BigRational> {
    let x = q_pow(q, &(int(d as i64) - int(2) * s))?;
    if x >= BigRational::one() {
        return Err(Error::Pole);
    }
    Ok(rational_pow(&x, n_max as i64 + 1) / (BigRational::one() - x))
}

/// `X1 X2 X3 (1 - X1 X2) / ((1 - X1 X2 X3)(1 - X1)(1 - X2))`.
pub fn geometric_closed(x1: &BigRational, x2: &BigRational, x3: &BigRational) -> BigRational {
    let one = BigRational::one();
    x1 * x2 * x3 * (one.clone() - x1 * x2)
        / ((one.clone() - x1 * x2 * x3) * (one.clone() - x1) * (one - x2))
}

/// `sum_{1 <= l, n <= bound} X1^l X2^n X3^min(l, n)`.
pub fn geometric_partial(x1: &BigRational, x2: &BigRational, x3: &BigRational, bound: u32) -> BigRational {
    let mut total = BigRational::zero();
    for l in 1..=bound as i64 {
        for n in 1..=bound as i64 {
            total += rational_pow(x1, l) * rational_pow(x2, n) * rational_pow(x3, l.min(n));
        }
    }
    total
}

/// One term `-(a s + b) min_i (e_i . v - delta_i)` of the exponent of `q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinTerm {
    pub forms: Vec<Vec<i64>>,
    pub deltas: Vec<i64>,
    pub a: i64,
    pub b: i64,
}

/// `sum_{v in N^k} q^(L . v - sum_kappa (a_kappa s + b_kappa) min_iota(...))` for `k <= 2`,
/// as a function of `q` and `t = q^-s`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeSeries {
    pub linear: Vec<i64>,
    pub terms: Vec<MinTerm>,
}

impl ConeSeries {
    pub fn rank(&self) -> usize {
        self.linear.len()
    }

    fn check(&self) -> Result<()> {
        let k = self.rank();
        if k == 0 || k > 2 {
            return Err(Error::Unsupported(format!("cone rank {k}; only ranks 1 and 2")));
        }
        for t in &self.terms {
            if t.forms.is_empty() || t.forms.len() != t.deltas.len() {
                return Err(Error::InvalidArgument("min term shape".into()));
            }
            if t.forms.iter().any(|f| f.len() != k) {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    got: t.forms[0].len(),
                });
            }
        }
        Ok(())
    }

    /// `(q exponent, t exponent)` at the point `v`.
    pub fn exponent(&self, v: &[i64]) -> (i64, i64) {
        let mut qe: i64 = self.linear.iter().zip(v).map(|(a, b)| a * b).sum();
        let mut te = 0;
        for t in &self.terms {
            let m = t
                .forms
                .iter()
                .zip(&t.deltas)
                .map(|(f, dl)| f.iter().zip(v).map(|(a, b)| a * b).sum::<i64>() - dl)
                .min()
                .expect("nonempty");
            qe -= t.b * m;
            te += t.a * m;
        }
        (qe, te)
    }

    fn homogeneous_exponent(&self, v: &[i64]) -> (i64, i64) {
        let mut zero = self.clone();
        for t in &mut zero.terms {
            t.deltas.iter_mut().for_each(|d| *d = 0);
        }
        zero.exponent(v)
    }

    /// Partial sum over `v in [1, bound]^k` at rational `q` and `s` with integral exponents.
    pub fn partial_sum(&self, q: &BigRational, t: &BigRational, bound: i64) -> Result<BigRational> {
        self.check()?;
        let mut total = BigRational::zero();
        let mut visit = |v: &[i64]| {
            let (qe, te) = self.exponent(v);
            total += rational_pow(q, qe) * rational_pow(t, te);
        };
        if self.rank() == 1 {
            for n in 1..=bound {
                visit(&[n]);
            }
        } else {
            for l in 1..=bound {
                for n in 1..=bound {
                    visit(&[l, n]);
                }
            }
        }
        Ok(total)
    }

    /// Closed form of the full series.
    pub fn closed_form(&self) -> Result<RatFunQT> {
        self.check()?;
        if self.rank() == 1 {
            self.closed_rank1()
        } else {
            self.closed_rank2()
        }
    }

    fn geometric_ratio(&self, step: (i64, i64)) -> Result<LaurentQT> {
        // the series in this direction must be able to converge for large s
        if step.1 < 0 || (step.1 == 0 && step.0 >= 0) {
            return Err(Error::InvalidArgument(format!(
                "series diverges along a ray with exponent q^{} t^{}",
                step.0, step.1
            )));
        }
        Ok(&LaurentQT::one() - &LaurentQT::monomial(1, step.0, step.1))
    }

    fn closed_rank1(&self) -> Result<RatFunQT> {
        // beyond the last crossing each min term is attained by one fixed form
        let mut n0 = 1i64;
        for t in &self.terms {
            for (i, (fi, di)) in t.forms.iter().zip(&t.deltas).enumerate() {
                for (fj, dj) in t.forms.iter().zip(&t.deltas).skip(i + 1) {
                    let slope = fi[0] - fj[0];
                    if slope != 0 {
                        let cross = (di - dj).div_euclid(slope).abs() + 1;
                        n0 = n0.max(cross + 1);
                    }
                }
            }
        }
        let mut head = LaurentQT::zero();
        for n in 1..n0 {
            let (qe, te) = self.exponent(&[n]);
            head = &head + &LaurentQT::monomial(1, qe, te);
        }
        let e0 = self.exponent(&[n0]);
        let e1 = self.exponent(&[n0 + 1]);
        let step = (e1.0 - e0.0, e1.1 - e0.1);
        let den = self.geometric_ratio(step)?;
        let tail = RatFunQT::new(LaurentQT::monomial(1, e0.0, e0.1), den)?;
        Ok(&RatFunQT::from_laurent(head) + &tail)
    }

    fn closed_rank2(&self) -> Result<RatFunQT> {
        // uniform shifts factor out as a monomial
        let (mut shift_q, mut shift_t) = (0i64, 0i64);
        for t in &self.terms {
            let d0 = t.deltas[0];
            if t.deltas.iter().any(|&d| d != d0) {
                // TODO: rank-2 cones with non-uniform shifts need the shifted chamber
                // decomposition; only uniform shifts are supported.
                return Err(Error::Unsupported(
                    "rank-2 cone series with non-uniform shifts".into(),
                ));
            }
            shift_q += t.b * d0;
            shift_t -= t.a * d0;
        }
        let mut rays = vec![(1i64, 0i64), (0, 1)];
        for t in &self.terms {
            for (i, fi) in t.forms.iter().enumerate() {
                for fj in t.forms.iter().skip(i + 1) {
                    let w = (fi[0] - fj[0], fi[1] - fj[1]);
                    // w . v = 0 with v in the open quadrant
                    let v = (w.1, -w.0);
                    let v = if v.0 < 0 || (v.0 == 0 && v.1 < 0) { (-v.0, -v.1) } else { v };
                    if v.0 > 0 && v.1 > 0 {
                        let g = num_integer::gcd(v.0, v.1);
                        rays.push((v.0 / g, v.1 / g));
                    }
                }
            }
        }
        // sort by angle: v1/v0 increasing
        rays.sort_by(|a, b| (a.1 * b.0).cmp(&(b.1 * a.0)));
        rays.dedup_by(|a, b| a.1 * b.0 == b.1 * a.0);
        let mut total = RatFunQT::from_laurent(LaurentQT::zero());
        // interior rays
        for &r in &rays[1..rays.len() - 1] {
            let e = self.homogeneous_exponent(&[r.0, r.1]);
            let den = self.geometric_ratio(e)?;
            total = &total + &RatFunQT::new(LaurentQT::monomial(1, e.0, e.1), den)?;
        }
        // open sectors between consecutive rays
        for w in rays.windows(2) {
            let (r1, r2) = (w[0], w[1]);
            let e1 = self.homogeneous_exponent(&[r1.0, r1.1]);
            let e2 = self.homogeneous_exponent(&[r2.0, r2.1]);
            let det = r1.0 * r2.1 - r1.1 * r2.0;
            let mut num = LaurentQT::zero();
            for x in 0..=(r1.0 + r2.0) {
                for y in 0..=(r1.1 + r2.1) {
                    // v = l1 r1 + l2 r2 with 0 < l_i <= 1
                    let l1 = x * r2.1 - y * r2.0;
                    let l2 = r1.0 * y - r1.1 * x;
                    if l1 > 0 && l1 <= det && l2 > 0 && l2 <= det {
                        let e = self.homogeneous_exponent(&[x, y]);
                        num = &num + &LaurentQT::monomial(1, e.0, e.1);
                    }
                }
            }
            let den = &self.geometric_ratio(e1)? * &self.geometric_ratio(e2)?;
            total = &total + &RatFunQT::new(num, den)?;
        }
        Ok(total.scale_monomial(1, shift_q, shift_t))
    }
}

/// Real parts of poles of a cone series' closed form.
pub fn cone_pole_real_parts(series: &ConeSeries) -> Result<Vec<BigRational>> {
    series.closed_form()?.pole_real_parts()
}
