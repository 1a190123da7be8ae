//! Dirichlet generating functions `sum a_n n^{-s}` with nonnegative coefficients: the
//! domination order, truncated products, Euler products over primes with numerical
//! abscissa estimates, and the Clifford-theoretic approximants `psi`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul};

use num_rational::BigRational;
use num_traits::{Float, One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::finitezeta::DegreeMultiset;
use crate::modring::primes_up_to;
use crate::orbitclass::{table_row, OrbitTag};
use crate::ratfun::Variant;
use crate::{Error, Result};

/// Coefficient types usable in a [`DirichletSeries`].
pub trait Coefficient:
    Clone + Zero + One + PartialOrd + Add<Output = Self> + Mul<Output = Self> + fmt::Debug
{
}

impl<T> Coefficient for T where
    T: Clone + Zero + One + PartialOrd + Add<Output = T> + Mul<Output = T> + fmt::Debug
{
}

/// `sum_{n <= cap} a_n n^{-s}`, stored sparsely.
#[derive(Clone, Debug, PartialEq)]
pub struct DirichletSeries<C> {
    cap: u128,
    coeffs: BTreeMap<u128, C>,
}

impl<C: Coefficient> DirichletSeries<C> {
    pub fn new(cap: u128) -> Self {
        DirichletSeries {
            cap,
            coeffs: BTreeMap::new(),
        }
    }

    /// The series `1`.
    pub fn one(cap: u128) -> Self {
        let mut s = Self::new(cap);
        s.coeffs.insert(1, C::one());
        s
    }

    pub fn from_terms(cap: u128, terms: impl IntoIterator<Item = (u128, C)>) -> Result<Self> {
        let mut s = Self::new(cap);
        for (n, c) in terms {
            s.add_term(n, c)?;
        }
        Ok(s)
    }

    /// Adds `c n^{-s}`; terms beyond the cap are dropped.
    pub fn add_term(&mut self, n: u128, c: C) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidArgument("degree 0".into()));
        }
        if c < C::zero() {
            return Err(Error::InvalidArgument(format!("negative coefficient {c:?}")));
        }
        if n > self.cap || c.is_zero() {
            return Ok(());
        }
        let e = self.coeffs.entry(n).or_insert_with(C::zero);
        *e = e.clone() + c;
        Ok(())
    }

    pub fn cap(&self) -> u128 {
        self.cap
    }

    pub fn coeff(&self, n: u128) -> C {
        self.coeffs.get(&n).cloned().unwrap_or_else(C::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u128, &C)> {
        self.coeffs.iter().map(|(&n, c)| (n, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `sum_{n <= bound} a_n`.
    pub fn partial_sum(&self, bound: u128) -> C {
        self.coeffs
            .range(..=bound)
            .fold(C::zero(), |acc, (_, c)| acc + c.clone())
    }

    /// Whether every partial sum of `self` is at most the matching partial sum of `other`.
    pub fn dominated_by(&self, other: &Self) -> Result<bool> {
        if self.cap != other.cap {
            return Err(Error::CapMismatch(
                self.cap.min(u64::MAX as u128) as u64,
                other.cap.min(u64::MAX as u128) as u64,
            ));
        }
        let mut points: Vec<u128> = self.coeffs.keys().chain(other.coeffs.keys()).copied().collect();
        points.sort_unstable();
        points.dedup();
        let (mut a, mut b) = (C::zero(), C::zero());
        for n in points {
            a = a + self.coeff(n);
            b = b + other.coeff(n);
            if a > b {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Dirichlet convolution truncated at `cap`.
    pub fn product(&self, other: &Self, cap: u128) -> Self {
        let mut out = Self::new(cap);
        for (&m, a) in &self.coeffs {
            if m > cap {
                break;
            }
            for (&n, b) in other.coeffs.range(..=cap / m) {
                let e = out.coeffs.entry(m * n).or_insert_with(C::zero);
                *e = e.clone() + a.clone() * b.clone();
            }
        }
        out
    }

    /// `self *= other`, keeping the cap of `self`; cheap when `other` is mostly large
    /// degrees.
    pub fn mul_assign_sparse(&mut self, other: &Self) {
        let cap = self.cap;
        let mut adds = Vec::new();
        for (&d, m) in other.coeffs.range(2..) {
            if d > cap {
                break;
            }
            for (&n, c) in self.coeffs.range(..=cap / d) {
                adds.push((n * d, c.clone() * m.clone()));
            }
        }
        let unit = other.coeff(1);
        if unit.is_zero() {
            self.coeffs.clear();
        } else if !unit.is_one() {
            for c in self.coeffs.values_mut() {
                *c = c.clone() * unit.clone();
            }
        }
        for (n, v) in adds {
            let e = self.coeffs.entry(n).or_insert_with(C::zero);
            *e = e.clone() + v;
        }
    }
}

impl<C: Coefficient + ToPrimitive> DirichletSeries<C> {
    /// `sum a_n n^{-s}` in floating point.
    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(&n, c)| c.to_f64().unwrap_or(f64::INFINITY) * (n as f64).powf(-s))
            .sum()
    }
}

/// `xi << eta`: all partial sums of `xi` are bounded by those of `eta`.
pub fn dominates<C: Coefficient>(xi: &DirichletSeries<C>, eta: &DirichletSeries<C>) -> Result<bool> {
    xi.dominated_by(eta)
}

pub fn product<C: Coefficient>(
    xi: &DirichletSeries<C>,
    eta: &DirichletSeries<C>,
    cap: u128,
) -> DirichletSeries<C> {
    xi.product(eta, cap)
}

impl DirichletSeries<u128> {
    pub fn from_multiset(m: &DegreeMultiset, cap: u128) -> Self {
        let mut s = Self::new(cap);
        for (d, k) in m.iter() {
            s.add_term(d, k).expect("degrees are positive");
        }
        s
    }

    pub fn to_rational(&self) -> DirichletSeries<BigRational> {
        DirichletSeries {
            cap: self.cap,
            coeffs: self
                .coeffs
                .iter()
                .map(|(&n, &c)| (n, BigRational::from_integer(c.into())))
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Euler products

/// One point of the slope curve `log(sum_{n <= N} a_n) / log N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopePoint {
    pub n: u128,
    pub partial_sum: f64,
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbscissaEstimate {
    pub prime_bound: u64,
    pub cap: u128,
    pub primes_used: usize,
    pub terms: usize,
    pub grid: Vec<SlopePoint>,
    /// Slope at the largest grid point.
    pub largest_n: f64,
    /// Intercept of a least-squares line through the upper half of the grid in `1/log N`.
    pub extrapolated: f64,
    /// Sign of the slope change over the upper half of the grid.
    pub trend: f64,
}

/// Default tolerance for comparing the abscissa estimate with its expected value.
pub const ABSCISSA_TOLERANCE: f64 = 0.15;

/// Grid `10^k` for `k = 1..` up to the cap.
pub fn decade_grid(cap: u128) -> Vec<u128> {
    let mut out = Vec::new();
    let mut n = 10u128;
    while n <= cap {
        out.push(n);
        n *= 10;
    }
    out
}

/// Truncated Euler product `prod_p local(p)` over primes `5 <= p <= prime_bound` for which
/// the factory returns a factor.
pub fn euler_product<F>(local: F, prime_bound: u64, cap: u128) -> (DirichletSeries<u128>, usize)
where
    F: Fn(u64) -> Option<DegreeMultiset> + Sync,
{
    let primes: Vec<u64> = primes_up_to(prime_bound).into_iter().filter(|&p| p >= 5).collect();
    let factors: Vec<DirichletSeries<u128>> = primes
        .par_iter()
        .filter_map(|&p| local(p).map(|m| DirichletSeries::from_multiset(&m, cap)))
        .collect();
    let mut acc = DirichletSeries::one(cap);
    for f in &factors {
        acc.mul_assign_sparse(f);
    }
    (acc, factors.len())
}

/// Slope estimates of the abscissa of convergence of an Euler product.
pub fn euler_product_abscissa<F>(local: F, prime_bound: u64, cap: u128) -> AbscissaEstimate
where
    F: Fn(u64) -> Option<DegreeMultiset> + Sync,
{
    let (series, primes_used) = euler_product(local, prime_bound, cap);
    slope_estimate(&series, prime_bound, primes_used, &decade_grid(cap))
}

pub fn slope_estimate(
    series: &DirichletSeries<u128>,
    prime_bound: u64,
    primes_used: usize,
    grid: &[u128],
) -> AbscissaEstimate {
    let mut points = Vec::new();
    let mut running = 0f64;
    let mut it = series.terms().peekable();
    for &n in grid {
        while let Some((m, c)) = it.peek() {
            if *m > n {
                break;
            }
            running += **c as f64;
            it.next();
        }
        let slope = if running > 0.0 {
            running.ln() / (n as f64).ln()
        } else {
            0.0
        };
        points.push(SlopePoint {
            n,
            partial_sum: running,
            slope,
        });
    }
    let largest_n = points.last().map_or(0.0, |p| p.slope);
    let upper = &points[points.len() / 2..];
    let (extrapolated, trend) = if upper.len() >= 2 {
        let xs: Vec<f64> = upper.iter().map(|p| 1.0 / (p.n as f64).ln()).collect();
        let ys: Vec<f64> = upper.iter().map(|p| p.slope).collect();
        let k = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / k;
        let my = ys.iter().sum::<f64>() / k;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        (my - b * mx, ys[ys.len() - 1] - ys[0])
    } else {
        (largest_n, 0.0)
    };
    AbscissaEstimate {
        prime_bound,
        cap: series.cap(),
        primes_used,
        terms: series.len(),
        grid: points,
        largest_n,
        extrapolated,
        trend,
    }
}

// ---------------------------------------------------------------------------
// psi approximants

/// Inner forms are the `SL3` case, outer forms the `SU3` case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Inner,
    Outer,
}

impl std::str::FromStr for Form {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inner" => Ok(Form::Inner),
            "outer" => Ok(Form::Outer),
            other => Err(Error::InvalidArgument(format!("unknown form {other}"))),
        }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Form::Inner => "inner",
            Form::Outer => "outer",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PsiTag {
    #[serde(rename = "1a")]
    T1a,
    #[serde(rename = "1b")]
    T1b,
    #[serde(rename = "2a")]
    T2a,
    #[serde(rename = "2b")]
    T2b,
    #[serde(rename = "2c")]
    T2c,
    #[serde(rename = "3a")]
    T3a,
    #[serde(rename = "3b")]
    T3b,
    #[serde(rename = "4a")]
    T4a,
    #[serde(rename = "4b")]
    T4b,
    #[serde(rename = "4c")]
    T4c,
    #[serde(rename = "5")]
    T5,
}

impl PsiTag {
    pub const ALL: [PsiTag; 11] = [
        PsiTag::T1a,
        PsiTag::T1b,
        PsiTag::T2a,
        PsiTag::T2b,
        PsiTag::T2c,
        PsiTag::T3a,
        PsiTag::T3b,
        PsiTag::T4a,
        PsiTag::T4b,
        PsiTag::T4c,
        PsiTag::T5,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PsiTag::T1a => "1a",
            PsiTag::T1b => "1b",
            PsiTag::T2a => "2a",
            PsiTag::T2b => "2b",
            PsiTag::T2c => "2c",
            PsiTag::T3a => "3a",
            PsiTag::T3b => "3b",
            PsiTag::T4a => "4a",
            PsiTag::T4b => "4b",
            PsiTag::T4c => "4c",
            PsiTag::T5 => "5",
        }
    }
}

impl fmt::Display for PsiTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for PsiTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PsiTag::ALL
            .iter()
            .copied()
            .find(|t| t.label() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown psi tag {s}")))
    }
}

/// `c 2^{alpha + beta s} q^{a - b s}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PsiMonomial {
    pub c: i64,
    pub alpha: i64,
    pub beta: i64,
    pub a: i64,
    pub b: i64,
}

/// Sum of monomials times `prod (1 - q^{a - b s})^{-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsiApproximant {
    pub tag: PsiTag,
    pub form: Form,
    pub numerator: Vec<PsiMonomial>,
    pub geometric: Vec<(i64, i64)>,
}

const fn mono(c: i64, alpha: i64, beta: i64, a: i64, b: i64) -> PsiMonomial {
    PsiMonomial {
        c,
        alpha,
        beta,
        a,
        b,
    }
}

impl PsiApproximant {
    pub fn new(tag: PsiTag, form: Form) -> Self {
        use PsiTag::*;
        const REG: &[(i64, i64)] = &[(2, 3)];
        const IRREG: &[(i64, i64)] = &[(1, 2), (2, 3)];
        // (two-power at 2^{alpha + beta s}) for the shared prefactors
        let (two_4, two_1, two_2, two_3b) = match form {
            Form::Inner => ((1, 1), (5, 3), (2, 1), (7, 4)),
            Form::Outer => ((3, 2), (3, 1), (3, 2), (9, 5)),
        };
        let (numerator, geometric): (Vec<PsiMonomial>, &[(i64, i64)]) = match tag {
            T4a | T4b => (vec![mono(1, two_4.0, two_4.1, 4, 6)], REG),
            // the inertia quotient has order q^2 + q + 1 < 2 q^2 for inner forms
            T4c => (vec![mono(1, 3, 2, 4, 6)], REG),
            T5 => (vec![mono(1, two_4.0, two_4.1, 3, 6)], REG),
            T1a => (vec![mono(1, two_1.0, two_1.1, 2, 6)], REG),
            T1b => (vec![mono(1, two_1.0, two_1.1, 0, 7)], REG),
            T2a => (
                vec![
                    mono(10, two_2.0, two_2.1, 1, 4),
                    mono(10, two_2.0, two_2.1, 5, 6),
                    mono(1, two_2.0, two_2.1, 2, 5),
                    mono(1, two_2.0, two_2.1, 6, 7),
                ],
                IRREG,
            ),
            T2b | T2c => (
                vec![
                    mono(1, two_2.0, two_2.1, 2, 5),
                    mono(1, two_2.0, two_2.1, 6, 7),
                ],
                IRREG,
            ),
            T3a => {
                let second = match form {
                    Form::Inner => mono(1, 0, 1, 3, 5),
                    Form::Outer => mono(1, 1, 1, 3, 5),
                };
                (vec![mono(1, 0, 0, 2, 4), second], &[(1, 2)])
            }
            T3b => (
                vec![
                    mono(1, two_3b.0, two_3b.1, 1, 6),
                    mono(1, two_3b.0, two_3b.1, 5, 8),
                ],
                IRREG,
            ),
        };
        PsiApproximant {
            tag,
            form,
            numerator,
            geometric: geometric.to_vec(),
        }
    }

    /// Abscissa of convergence of `sum_p psi(p, s)` over primes: every monomial of the
    /// expanded series needs `q`-exponent below `-1`, and each geometric factor must
    /// converge.
    pub fn threshold(&self) -> BigRational {
        let r = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        let mut t = BigRational::zero();
        for m in &self.numerator {
            t = t.max(r(m.a + 1, m.b));
        }
        for &(a, b) in &self.geometric {
            t = t.max(r(a, b));
        }
        t
    }

    /// The region where every geometric factor is a convergent series.
    pub fn pole_bound(&self) -> BigRational {
        self.geometric
            .iter()
            .map(|&(a, b)| BigRational::new(a.into(), b.into()))
            .fold(BigRational::zero(), |x, y| x.max(y))
    }

    pub fn eval<F: Float>(&self, q: F, s: F) -> Result<F> {
        let c = |v: i64| F::from(v).expect("small integers convert");
        let two = c(2);
        let mut num = F::zero();
        for m in &self.numerator {
            num = num
                + c(m.c) * two.powf(c(m.alpha) + c(m.beta) * s) * q.powf(c(m.a) - c(m.b) * s);
        }
        let mut den = F::one();
        for &(a, b) in &self.geometric {
            let x = q.powf(c(a) - c(b) * s);
            if x >= F::one() {
                return Err(Error::PoleRegion(format!(
                    "{} {} factor (1 - q^({a} - {b}s))^-1 diverges",
                    self.form, self.tag
                )));
            }
            den = den * (F::one() - x);
        }
        Ok(num / den)
    }
}

/// Exact value of the printed approximant `psi^{tag}` at `(q, s)`.
pub fn psi_eval<F: Float>(tag: PsiTag, form: Form, q: F, s: F) -> Result<F> {
    PsiApproximant::new(tag, form).eval(q, s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiSumReport {
    pub tag: PsiTag,
    pub form: Form,
    pub s: f64,
    pub prime_bound: u64,
    pub primes: usize,
    pub sum: f64,
    /// Contribution of the primes in the last decade `(bound/10, bound]`.
    pub cauchy_indicator: f64,
    pub threshold: f64,
    /// `s` is at or below the convergence threshold.
    pub expected_divergent: bool,
    /// Primes at which a geometric factor diverges; these count as `+inf`.
    pub pole_terms: usize,
}

/// Partial sum of `psi(p, s)` over primes `5 <= p <= prime_bound`.
pub fn psi_sum_over_primes(tag: PsiTag, form: Form, s: f64, prime_bound: u64) -> PsiSumReport {
    let approx = PsiApproximant::new(tag, form);
    let threshold = approx.threshold().to_f64().unwrap_or(f64::NAN);
    let mut sum = 0.0;
    let mut last = 0.0;
    let mut primes = 0;
    let mut pole_terms = 0;
    for p in primes_up_to(prime_bound).into_iter().filter(|&p| p >= 5) {
        primes += 1;
        let v = approx.eval(p as f64, s).unwrap_or_else(|_| {
            pole_terms += 1;
            f64::INFINITY
        });
        sum += v;
        if p * 10 > prime_bound {
            last += v;
        }
    }
    PsiSumReport {
        tag,
        form,
        s,
        prime_bound,
        primes,
        sum,
        cauchy_indicator: last,
        threshold,
        expected_divergent: s <= threshold,
        pole_terms,
    }
}

/// Local contribution of a regular orbit type at `(q, s)`, under both possible behaviours
/// of the characters lying over it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularContribution {
    /// Characters extend to the inertia group: `zeta_{I/N}(s) = |C|` for abelian `C`.
    pub extendable: f64,
    /// Characters do not extend: `zeta_{G,theta}(s) << floor(|C| / q^2) q^{-s}`.
    pub non_extendable: f64,
}

impl RegularContribution {
    pub fn max(&self) -> f64 {
        self.extendable.max(self.non_extendable)
    }
}

/// Contribution of the regular orbit type `tag` to the zeta function of `SL3(O)` resp.
/// `SU3(O)`: number of elements times `|G(F_q)| / |C|` to the power `-1-s` times the
/// inertia factor, times the series factor `(1 - q^{2-3s})^{-1}`.
pub fn exact_regular_contribution(
    form: Form,
    tag: OrbitTag,
    q: u64,
    s: f64,
) -> Result<RegularContribution> {
    if !matches!(tag, OrbitTag::T4a | OrbitTag::T4b | OrbitTag::T4c | OrbitTag::T5) {
        return Err(Error::Unsupported(format!(
            "exact contribution only for tame regular types, not {tag}"
        )));
    }
    let variant = match form {
        Form::Inner => Variant::Sl3,
        Form::Outer => Variant::Su3,
    };
    let row = table_row(variant, tag, q);
    let qf = q as f64;
    let order = match form {
        Form::Inner => qf.powi(3) * (qf * qf - 1.0) * (qf.powi(3) - 1.0),
        Form::Outer => qf.powi(3) * (qf * qf - 1.0) * (qf.powi(3) + 1.0),
    };
    let series = 1.0 - qf.powf(2.0 - 3.0 * s);
    if series <= 0.0 {
        return Err(Error::PoleRegion("(1 - q^(2-3s))^-1 diverges".into()));
    }
    let cen = row.centraliser_order as f64;
    let scale = row.total as f64 * (order / cen).powf(-1.0 - s) / series;
    let reduced = (row.centraliser_order / (q as u128 * q as u128)) as f64;
    Ok(RegularContribution {
        extendable: scale * cen,
        non_extendable: scale * reduced * qf.powf(-s),
    })
}
