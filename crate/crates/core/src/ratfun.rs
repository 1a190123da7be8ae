//! Exact rational functions in `q` and `t = q^(-s)`, Laurent in both variables.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparse Laurent polynomial: `(t exponent, q exponent) -> coefficient`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LaurentQT {
    terms: BTreeMap<(i64, i64), BigInt>,
}

impl LaurentQT {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(1, 0, 0)
    }

    /// `c * q^q_exp * t^t_exp`.
    pub fn monomial(c: impl Into<BigInt>, q_exp: i64, t_exp: i64) -> Self {
        let mut out = Self::zero();
        out.add_term(t_exp, q_exp, c.into());
        out
    }

    /// Builds from `(coefficient, q exponent, t exponent)` triples.
    pub fn from_terms(terms: &[(i64, i64, i64)]) -> Self {
        let mut out = Self::zero();
        for &(c, qe, te) in terms {
            out.add_term(te, qe, c.into());
        }
        out
    }

    fn add_term(&mut self, t_exp: i64, q_exp: i64, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry((t_exp, q_exp)).or_insert_with(BigInt::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(t_exp, q_exp));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterates `((t exponent, q exponent), coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (&(i64, i64), &BigInt)> {
        self.terms.iter()
    }

    pub fn coeff(&self, q_exp: i64, t_exp: i64) -> BigInt {
        self.terms.get(&(t_exp, q_exp)).cloned().unwrap_or_default()
    }

    pub fn t_range(&self) -> Option<(i64, i64)> {
        let lo = self.terms.keys().next()?.0;
        let hi = self.terms.keys().next_back()?.0;
        Some((lo, hi))
    }

    /// The coefficient of `t^k` as a Laurent polynomial in `q`.
    pub fn t_coeff(&self, k: i64) -> LaurentQT {
        LaurentQT {
            terms: self
                .terms
                .range((k, i64::MIN)..=(k, i64::MAX))
                .map(|(&key, c)| (key, c.clone()))
                .collect(),
        }
    }

    pub fn shift(&self, q_by: i64, t_by: i64) -> LaurentQT {
        LaurentQT {
            terms: self
                .terms
                .iter()
                .map(|(&(te, qe), c)| ((te + t_by, qe + q_by), c.clone()))
                .collect(),
        }
    }

    /// `q -> q^-1`, `t -> t^-1`.
    pub fn invert(&self) -> LaurentQT {
        LaurentQT {
            terms: self
                .terms
                .iter()
                .map(|(&(te, qe), c)| ((-te, -qe), c.clone()))
                .collect(),
        }
    }

    fn content(&self) -> BigInt {
        self.terms.values().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    fn scale_div(&self, c: &BigInt) -> LaurentQT {
        LaurentQT {
            terms: self
                .terms
                .iter()
                .map(|(&k, v)| (k, v / c))
                .collect(),
        }
    }

    fn min_exponents(&self) -> (i64, i64) {
        let t = self.terms.keys().map(|k| k.0).min().unwrap_or(0);
        let q = self.terms.keys().map(|k| k.1).min().unwrap_or(0);
        (t, q)
    }

    /// If the polynomial is `c q^a t^b`, returns `(c, a, b)`.
    pub fn as_monomial(&self) -> Option<(BigInt, i64, i64)> {
        if self.terms.len() != 1 {
            return None;
        }
        let (&(te, qe), c) = self.terms.iter().next()?;
        Some((c.clone(), qe, te))
    }

    /// Exact quotient when `d`'s lowest `t`-coefficient is `+-q^e`.
    pub fn div_exact(&self, d: &LaurentQT) -> Option<LaurentQT> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(LaurentQT::zero());
        }
        let (dlo, dhi) = d.t_range()?;
        let (c0, e0, _) = d.t_coeff(dlo).as_monomial()?;
        if !c0.abs().is_one() {
            return None;
        }
        let (flo, fhi) = self.t_range()?;
        let mut rem = self.clone();
        let mut quo = LaurentQT::zero();
        for k in (flo - dlo)..=(fhi - dhi) {
            let lead = rem.t_coeff(k + dlo);
            if lead.is_zero() {
                continue;
            }
            // lead / (c0 q^e0)
            let g = LaurentQT {
                terms: lead
                    .terms
                    .iter()
                    .map(|(&(_, qe), c)| ((k, qe - e0), c * &c0))
                    .collect(),
            };
            rem = &rem - &(&g * d);
            quo = &quo + &g;
        }
        rem.is_zero().then_some(quo)
    }

    /// Coefficients in `t` after substituting a rational `q`.
    pub fn eval_q(&self, q: &BigRational) -> BTreeMap<i64, BigRational> {
        let mut out: BTreeMap<i64, BigRational> = BTreeMap::new();
        for (&(te, qe), c) in &self.terms {
            let v = BigRational::from_integer(c.clone()) * rational_pow(q, qe);
            let e = out.entry(te).or_insert_with(BigRational::zero);
            *e += v;
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Value at rational `q` and `t`.
    pub fn eval(&self, q: &BigRational, t: &BigRational) -> BigRational {
        self.eval_q(q)
            .into_iter()
            .fold(BigRational::zero(), |acc, (te, c)| acc + c * rational_pow(t, te))
    }

    /// Value at real `q` and `s`, with `t = q^(-s)`.
    pub fn eval_f64(&self, q: f64, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(te, qe), c)| {
                let c: f64 = c.to_string().parse().unwrap_or(f64::NAN);
                c * q.powf(qe as f64 - s * te as f64)
            })
            .sum()
    }
}

pub(crate) fn rational_pow(x: &BigRational, e: i64) -> BigRational {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

impl Add for &LaurentQT {
    type Output = LaurentQT;
    fn add(self, rhs: &LaurentQT) -> LaurentQT {
        let mut out = self.clone();
        for (&(te, qe), c) in &rhs.terms {
            out.add_term(te, qe, c.clone());
        }
        out
    }
}

impl Neg for &LaurentQT {
    type Output = LaurentQT;
    fn neg(self) -> LaurentQT {
        LaurentQT {
            terms: self.terms.iter().map(|(&k, c)| (k, -c)).collect(),
        }
    }
}

impl Sub for &LaurentQT {
    type Output = LaurentQT;
    fn sub(self, rhs: &LaurentQT) -> LaurentQT {
        self + &(-rhs)
    }
}

impl Mul for &LaurentQT {
    type Output = LaurentQT;
    fn mul(self, rhs: &LaurentQT) -> LaurentQT {
        let mut out = LaurentQT::zero();
        for (&(t1, q1), c1) in &self.terms {
            for (&(t2, q2), c2) in &rhs.terms {
                out.add_term(t1 + t2, q1 + q2, c1 * c2);
            }
        }
        out
    }
}

/// `num / den` with `den != 0`; equality is tested by cross-multiplication.
#[derive(Clone, Debug)]
pub struct RatFunQT {
    num: LaurentQT,
    den: LaurentQT,
}

impl PartialEq for RatFunQT {
    fn eq(&self, other: &Self) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }
}

impl Eq for RatFunQT {}

impl RatFunQT {
    pub fn new(num: LaurentQT, den: LaurentQT) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        Ok(Self { num, den }.normalized())
    }

    pub fn from_laurent(num: LaurentQT) -> Self {
        Self {
            num,
            den: LaurentQT::one(),
        }
        .normalized()
    }

    pub fn numerator(&self) -> &LaurentQT {
        &self.num
    }

    pub fn denominator(&self) -> &LaurentQT {
        &self.den
    }

    /// Moves monomial factors of the denominator to the numerator and removes the
    /// integer content; the denominator's first coefficient is made positive.
    fn normalized(mut self) -> Self {
        if self.num.is_zero() {
            return Self {
                num: LaurentQT::zero(),
                den: LaurentQT::one(),
            };
        }
        let (dt, dq) = self.den.min_exponents();
        self.den = self.den.shift(-dq, -dt);
        self.num = self.num.shift(-dq, -dt);
        let g = self.num.content().gcd(&self.den.content());
        let lead_neg = self.den.terms.values().next().is_some_and(|c| c.is_negative());
        let g = if lead_neg { -g } else { g };
        if !g.is_one() {
            self.num = self.num.scale_div(&g);
            self.den = self.den.scale_div(&g);
        }
        self
    }

    pub fn invert_q(&self) -> RatFunQT {
        RatFunQT {
            num: self.num.invert(),
            den: self.den.invert(),
        }
        .normalized()
    }

    pub fn scale_monomial(&self, c: i64, q_exp: i64, t_exp: i64) -> RatFunQT {
        RatFunQT {
            num: &self.num * &LaurentQT::monomial(c, q_exp, t_exp),
            den: self.den.clone(),
        }
        .normalized()
    }

    pub fn recip(&self) -> Result<RatFunQT> {
        RatFunQT::new(self.den.clone(), self.num.clone())
    }

    /// Exact coefficients `c_0..=c_{k_max}` of the expansion in `t` at a rational `q`.
    pub fn series_in_t(&self, q: &BigRational, k_max: usize) -> Result<Vec<BigRational>> {
        let num = self.num.eval_q(q);
        let den = self.den.eval_q(q);
        let Some((&d0, _)) = den.iter().next() else {
            return Err(Error::NonUnitConstantTerm);
        };
        let (dlo, _) = self.den.t_range().unwrap_or((0, 0));
        if d0 != dlo {
            return Err(Error::NonUnitConstantTerm);
        }
        if num.keys().next().is_some_and(|&k| k < d0) {
            return Err(Error::NonUnitConstantTerm);
        }
        let den: Vec<(usize, BigRational)> = den
            .into_iter()
            .map(|(k, v)| ((k - d0) as usize, v))
            .collect();
        let inv0 = den[0].1.recip();
        let mut out = vec![BigRational::zero(); k_max + 1];
        for (k, v) in num {
            let k = (k - d0) as usize;
            if k <= k_max {
                out[k] += v;
            }
        }
        for k in 0..=k_max {
            let mut acc = out[k].clone();
            for (j, dj) in den.iter().skip(1) {
                if *j > k {
                    break;
                }
                acc -= dj * &out[k - j];
            }
            out[k] = acc * &inv0;
        }
        Ok(out)
    }

    /// Value at rational `q` and `t`.
    pub fn eval(&self, q: &BigRational, t: &BigRational) -> Result<BigRational> {
        let d = self.den.eval(q, t);
        if d.is_zero() {
            return Err(Error::Pole);
        }
        Ok(self.num.eval(q, t) / d)
    }

    pub fn eval_f64(&self, q: f64, s: f64) -> f64 {
        self.num.eval_f64(q, s) / self.den.eval_f64(q, s)
    }

    /// Splits the denominator into factors `1 - q^a t^b` (with `b > 0`) times a unit.
    pub fn denominator_factors(&self) -> Result<Vec<(i64, i64)>> {
        factor_binomials(&self.den)
    }

    /// Real parts `a/b` of the poles, one per surviving factor `1 - q^(a - b s)`.
    pub fn pole_real_parts(&self) -> Result<Vec<BigRational>> {
        let mut num = self.num.clone();
        let mut out = Vec::new();
        for (a, b) in self.denominator_factors()? {
            let f = binomial(a, b);
            if let Some(rest) = num.div_exact(&f) {
                num = rest;
                continue;
            }
            out.push(BigRational::new(a.into(), b.into()));
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Maximal pole real part, when there is one.
    pub fn abscissa(&self) -> Result<Option<BigRational>> {
        Ok(self.pole_real_parts()?.into_iter().next_back())
    }

    /// Rendering with `q^(a-bs)` exponents and factored denominator where possible.
    pub fn to_display_string(&self) -> String {
        let num = fmt_poly(&self.num);
        match self.denominator_factors() {
            Ok(fs) if !fs.is_empty() => {
                let (dt, dq) = self.den.min_exponents();
                let unit = self.den.t_coeff(dt).as_monomial();
                let mut den = String::new();
                if let Some((c, qe, _)) = unit {
                    if !(c.is_one() && qe == 0 && dt == 0) {
                        den.push_str(&fmt_monomial(&c, qe.min(dq), dt));
                    }
                }
                for (a, b) in fs {
                    den.push_str(&format!("(1 - {})", fmt_power(a, b)));
                }
                format!("({num}) / {den}")
            }
            _ => format!("({num}) / ({})", fmt_poly(&self.den)),
        }
    }
}

fn binomial(a: i64, b: i64) -> LaurentQT {
    &LaurentQT::one() - &LaurentQT::monomial(1, a, b)
}

fn factor_binomials(den: &LaurentQT) -> Result<Vec<(i64, i64)>> {
    let (dt, _) = den.min_exponents();
    let Some((c0, e0, _)) = den.t_coeff(dt).as_monomial() else {
        return Err(Error::UnsupportedDenominator);
    };
    // normalise to constant term 1
    let mut rest = den.shift(-e0, -dt);
    if c0.is_negative() {
        rest = -&rest;
    }
    if !c0.abs().is_one() {
        let g = rest.content();
        if (g.clone() % c0.abs()).is_zero() {
            rest = rest.scale_div(&c0.abs());
        } else {
            return Err(Error::UnsupportedDenominator);
        }
    }
    let mut out = Vec::new();
    while !(rest.t_range() == Some((0, 0)) && rest.as_monomial().is_some()) {
        let (_, hi) = rest.t_range().ok_or(Error::UnsupportedDenominator)?;
        let low = rest
            .terms
            .keys()
            .map(|k| k.0)
            .find(|&k| k > 0)
            .filter(|_| hi > 0)
            .ok_or(Error::UnsupportedDenominator)?;
        let cands: Vec<i64> = rest.t_coeff(low).terms.keys().map(|k| k.1).collect();
        let mut found = false;
        for a in cands {
            let f = binomial(a, low);
            if let Some(qt) = rest.div_exact(&f) {
                out.push((a, low));
                rest = qt;
                found = true;
                break;
            }
        }
        if !found {
            return Err(Error::UnsupportedDenominator);
        }
    }
    Ok(out)
}

fn fmt_power(a: i64, b: i64) -> String {
    if a == 0 && b == 0 {
        return "1".into();
    }
    let mut e = String::new();
    if a != 0 {
        e.push_str(&a.to_string());
    }
    if b != 0 {
        e.push(if b > 0 { '-' } else if a != 0 { '+' } else { ' ' });
        if e.ends_with(' ') {
            e.pop();
        }
        if b.abs() != 1 {
            e.push_str(&b.abs().to_string());
        }
        e.push('s');
    }
    format!("q^{{{e}}}")
}

fn fmt_monomial(c: &BigInt, a: i64, b: i64) -> String {
    let p = fmt_power(a, b);
    if p == "1" {
        c.to_string()
    } else if c.is_one() {
        p
    } else if (-c).is_one() {
        format!("-{p}")
    } else {
        format!("{c}*{p}")
    }
}

fn fmt_poly(f: &LaurentQT) -> String {
    if f.is_zero() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, (&(te, qe), c)) in f.terms.iter().enumerate() {
        let m = fmt_monomial(c, qe, te);
        if i == 0 {
            s.push_str(&m);
        } else if let Some(stripped) = m.strip_prefix('-') {
            s.push_str(" - ");
            s.push_str(stripped);
        } else {
            s.push_str(" + ");
            s.push_str(&m);
        }
    }
    s
}

impl fmt::Display for RatFunQT {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_display_string())
    }
}

impl Add for &RatFunQT {
    type Output = RatFunQT;
    fn add(self, rhs: &RatFunQT) -> RatFunQT {
        RatFunQT {
            num: &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            den: &self.den * &rhs.den,
        }
        .normalized()
    }
}

impl Sub for &RatFunQT {
    type Output = RatFunQT;
    fn sub(self, rhs: &RatFunQT) -> RatFunQT {
        RatFunQT {
            num: &(&self.num * &rhs.den) - &(&rhs.num * &self.den),
            den: &self.den * &rhs.den,
        }
        .normalized()
    }
}

impl Mul for &RatFunQT {
    type Output = RatFunQT;
    fn mul(self, rhs: &RatFunQT) -> RatFunQT {
        RatFunQT {
            num: &self.num * &rhs.num,
            den: &self.den * &rhs.den,
        }
        .normalized()
    }
}

impl Neg for &RatFunQT {
    type Output = RatFunQT;
    fn neg(self) -> RatFunQT {
        RatFunQT {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

/// Which of the two A2 forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Sl3,
    Su3,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sl3" => Ok(Variant::Sl3),
            "su3" => Ok(Variant::Su3),
            other => Err(Error::InvalidArgument(format!("unknown algebra {other}"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Sl3 => "sl3",
            Variant::Su3 => "su3",
        })
    }
}

/// Coefficients of `u(X)` at `X^3, X^2, X^1, X^0, X^-1`.
pub fn u_coefficients(variant: Variant) -> [i64; 5] {
    match variant {
        Variant::Sl3 => [1, 1, -1, -1, -1],
        Variant::Su3 => [-1, 1, -1, 1, -1],
    }
}

pub fn u_value(variant: Variant, x: &BigRational) -> BigRational {
    u_coefficients(variant)
        .iter()
        .zip([3i64, 2, 1, 0, -1])
        .map(|(&c, e)| BigRational::from_integer(c.into()) * rational_pow(x, e))
        .fold(BigRational::zero(), |a, b| a + b)
}

/// Numerator and denominator of `P(s+2)`, i.e. the closed form without `q^(8m)`.
pub fn closed_form_parts(variant: Variant) -> (LaurentQT, LaurentQT) {
    let u = u_coefficients(variant);
    let mut num = LaurentQT::one();
    for (c, e) in u.iter().zip([3i64, 2, 1, 0, -1]) {
        // u(q) q^-3 t^2 and u(q^-1) q^-2 t^3
        num = &num + &LaurentQT::monomial(*c, e - 3, 2);
        num = &num + &LaurentQT::monomial(*c, -e - 2, 3);
    }
    num = &num + &LaurentQT::monomial(1, -5, 5);
    let den = &binomial(1, 2) * &binomial(2, 3);
    (num, den)
}

/// `q^(8m) P(s+2)` in closed form.
pub fn closed_form(variant: Variant, m: u32) -> RatFunQT {
    let (num, den) = closed_form_parts(variant);
    RatFunQT::new(num.shift(8 * m as i64, 0), den).expect("nonzero denominator")
}

/// Whether `f|_{q -> 1/q} = q^d f`.
pub fn satisfies_funeq(f: &RatFunQT, d: i64) -> bool {
    f.invert_q() == f.scale_monomial(1, d, 0)
}

/// The functional equation of `P(s+2)` for one A2 form, with factor `q^8`.
pub fn funeq_check(variant: Variant) -> bool {
    satisfies_funeq(&closed_form(variant, 0), 8)
}
