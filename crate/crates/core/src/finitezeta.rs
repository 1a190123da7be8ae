//! Representation zeta functions of the finite groups `SL3(F_q)`, `SU3(F_q)`,
//! `GL2(F_q)`, `GU2(F_q)` and the Heisenberg group `H(F_q)`, as multisets of character
//! degrees, together with a brute-force conjugacy class count.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::modring::{is_prime, FqField};
use crate::orbitclass::{group_elements, mat_inv, mat_mul, zero_mat, Mat3, MatrixGroup};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FiniteGroup {
    Sl3,
    Su3,
    Gl2,
    Gu2,
    Heisenberg,
}

impl FiniteGroup {
    pub const ALL: [FiniteGroup; 5] = [
        FiniteGroup::Sl3,
        FiniteGroup::Su3,
        FiniteGroup::Gl2,
        FiniteGroup::Gu2,
        FiniteGroup::Heisenberg,
    ];
}

impl fmt::Display for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FiniteGroup::Sl3 => "sl3",
            FiniteGroup::Su3 => "su3",
            FiniteGroup::Gl2 => "gl2",
            FiniteGroup::Gu2 => "gu2",
            FiniteGroup::Heisenberg => "heisenberg",
        })
    }
}

impl std::str::FromStr for FiniteGroup {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sl3" => Ok(FiniteGroup::Sl3),
            "su3" => Ok(FiniteGroup::Su3),
            "gl2" => Ok(FiniteGroup::Gl2),
            "gu2" => Ok(FiniteGroup::Gu2),
            "heisenberg" | "h" => Ok(FiniteGroup::Heisenberg),
            other => Err(Error::InvalidArgument(format!("unknown group {other}"))),
        }
    }
}

/// Polynomial in `q` with rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPoly(Vec<BigRational>);

impl QPoly {
    pub fn from_ints(coeffs: &[i64]) -> Self {
        QPoly(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect()).trim()
    }

    pub fn constant(c: i64) -> Self {
        QPoly::from_ints(&[c])
    }

    /// `q - c`
    pub fn linear(c: i64) -> Self {
        QPoly::from_ints(&[-c, 1])
    }

    fn trim(mut self) -> Self {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        self
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        let n = self.0.len().max(other.0.len());
        let zero = BigRational::zero();
        QPoly(
            (0..n)
                .map(|i| self.0.get(i).unwrap_or(&zero) + other.0.get(i).unwrap_or(&zero))
                .collect(),
        )
        .trim()
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        if self.0.is_empty() || other.0.is_empty() {
            return QPoly(Vec::new());
        }
        let mut out = vec![BigRational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly(out).trim()
    }

    pub fn scale(&self, num: i64, den: i64) -> QPoly {
        let c = BigRational::new(num.into(), den.into());
        QPoly(self.0.iter().map(|a| a * &c).collect()).trim()
    }

    pub fn eval(&self, q: u64) -> BigRational {
        let q = BigRational::from_integer(q.into());
        self.0
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * &q + c)
    }
}

fn prod(factors: &[QPoly]) -> QPoly {
    factors
        .iter()
        .fold(QPoly::constant(1), |acc, f| acc.mul(f))
}

/// `q^2 + a q + b`
fn quad(a: i64, b: i64) -> QPoly {
    QPoly::from_ints(&[b, a, 1])
}

/// One summand `multiplicity * degree^{-s}` of a printed zeta function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormulaTerm {
    pub multiplicity: QPoly,
    pub degree: QPoly,
}

fn term(multiplicity: QPoly, degree: QPoly) -> FormulaTerm {
    FormulaTerm {
        multiplicity,
        degree,
    }
}

/// Which congruence branch mod 3 a formula applies to (`None` when there is only one).
pub fn branch(group: FiniteGroup, q: u64) -> Result<Option<u64>> {
    match group {
        FiniteGroup::Sl3 | FiniteGroup::Su3 => match q % 3 {
            0 => Err(Error::CharThree),
            r => Ok(Some(r)),
        },
        _ => Ok(None),
    }
}

/// The printed term list for a group and congruence branch.
pub fn formula_terms(group: FiniteGroup, branch: Option<u64>) -> Result<Vec<FormulaTerm>> {
    let c = QPoly::constant;
    let q = || QPoly::linear(0);
    let qm = QPoly::linear;
    let qp = |a: i64| QPoly::linear(-a);
    let q3 = || QPoly::from_ints(&[0, 0, 0, 1]);
    let need = |b: Option<u64>| {
        b.filter(|r| *r == 1 || *r == 2)
            .ok_or_else(|| Error::InvalidArgument("branch must be 1 or 2 mod 3".into()))
    };
    Ok(match group {
        FiniteGroup::Sl3 => {
            let mut t = vec![
                term(c(1), c(1)),
                term(c(1), quad(1, 0)),
                term(qm(2), quad(1, 1)),
            ];
            if need(branch)? == 1 {
                t.extend([
                    term(c(6), prod(&[qp(1), qm(1), qm(1)]).scale(1, 3)),
                    term(c(3), prod(&[quad(1, 1), qp(1)]).scale(1, 3)),
                    term(prod(&[qp(2), qm(1)]).scale(1, 3), prod(&[qp(1), qm(1), qm(1)])),
                ]);
            } else {
                t.push(term(quad(1, 0).scale(1, 3), prod(&[qp(1), qm(1), qm(1)])));
            }
            t.extend([
                term(quad(-1, 0).scale(1, 2), QPoly::from_ints(&[-1, 0, 0, 1])),
                term(c(1), q3()),
                term(qm(2), QPoly::from_ints(&[0, 1, 1, 1])),
            ]);
            let last = if branch == Some(1) {
                prod(&[qm(1), qm(4)]).scale(1, 6)
            } else {
                prod(&[qm(2), qm(3)]).scale(1, 6)
            };
            t.push(term(last, prod(&[quad(1, 1), qp(1)])));
            t
        }
        FiniteGroup::Su3 => {
            let mut t = vec![
                term(c(1), c(1)),
                term(c(1), quad(-1, 0)),
                term(q(), quad(-1, 1)),
            ];
            let r = need(branch)?;
            if r == 2 {
                t.extend([
                    term(c(6), prod(&[qm(1), qp(1), qp(1)]).scale(1, 3)),
                    term(c(3), prod(&[quad(-1, 1), qm(1)]).scale(1, 3)),
                    term(prod(&[qp(1), qm(2)]).scale(1, 3), prod(&[qm(1), qp(1), qp(1)])),
                ]);
            } else {
                t.push(term(quad(-1, 0).scale(1, 3), prod(&[qm(1), qp(1), qp(1)])));
            }
            t.extend([
                term(prod(&[qp(1), qm(2)]).scale(1, 2), QPoly::from_ints(&[1, 0, 0, 1])),
                term(c(1), q3()),
                term(q(), QPoly::from_ints(&[0, 1, -1, 1])),
            ]);
            let last = if r == 2 {
                prod(&[qp(1), qm(2)]).scale(1, 6)
            } else {
                quad(-1, 0).scale(1, 6)
            };
            t.push(term(last, prod(&[quad(-1, 1), qm(1)])));
            t
        }
        FiniteGroup::Gl2 | FiniteGroup::Gu2 => {
            let outer = if group == FiniteGroup::Gl2 { qm(1) } else { qp(1) };
            vec![
                term(outer.clone(), c(1)),
                term(outer.clone(), q()),
                term(outer.mul(&qm(2)).scale(1, 2), qp(1)),
                term(outer.mul(&q()).scale(1, 2), qm(1)),
            ]
        }
        FiniteGroup::Heisenberg => vec![term(quad(0, 0), c(1)), term(qm(1), q())],
    })
}

/// `|G|` as a polynomial in `q`.
pub fn order_poly(group: FiniteGroup) -> QPoly {
    let q = QPoly::linear(0);
    let q3 = QPoly::from_ints(&[0, 0, 0, 1]);
    match group {
        FiniteGroup::Sl3 => prod(&[q3.clone(), quad(0, -1), QPoly::from_ints(&[-1, 0, 0, 1])]),
        FiniteGroup::Su3 => prod(&[q3.clone(), quad(0, -1), QPoly::from_ints(&[1, 0, 0, 1])]),
        FiniteGroup::Gl2 => prod(&[q.clone(), QPoly::linear(1), quad(0, -1)]),
        FiniteGroup::Gu2 => prod(&[q.clone(), QPoly::linear(-1), quad(0, -1)]),
        FiniteGroup::Heisenberg => q3,
    }
}

/// Whether `sum m(q) d(q)^2 = |G|(q)` holds as polynomials.
pub fn polynomial_identity_holds(group: FiniteGroup, branch: Option<u64>) -> Result<bool> {
    let lhs = formula_terms(group, branch)?
        .iter()
        .fold(QPoly::constant(0), |acc, t| {
            acc.add(&t.multiplicity.mul(&t.degree).mul(&t.degree))
        });
    Ok(lhs == order_poly(group))
}

/// Character degrees with multiplicities; equal degrees are merged, zero multiplicities
/// dropped.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeMultiset {
    entries: BTreeMap<u128, u128>,
}

impl DegreeMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, degree: u128, multiplicity: u128) {
        if multiplicity > 0 {
            *self.entries.entry(degree).or_insert(0) += multiplicity;
        }
    }

    pub fn multiplicity(&self, degree: u128) -> u128 {
        self.entries.get(&degree).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u128, u128)> + '_ {
        self.entries.iter().map(|(&d, &m)| (d, m))
    }

    /// Number of irreducible characters.
    pub fn class_count(&self) -> u128 {
        self.entries.values().sum()
    }

    pub fn sum_md2(&self) -> u128 {
        self.entries.iter().map(|(&d, &m)| m * d * d).sum()
    }

    /// `sum m d^{-s}`.
    pub fn eval(&self, s: f64) -> f64 {
        self.entries
            .iter()
            .map(|(&d, &m)| m as f64 * (d as f64).powf(-s))
            .sum()
    }
}

impl fmt::Display for DegreeMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(d, m)| format!("{d}:{m}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// `(p, f)` with `q = p^f`.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let mut r = q;
    let mut f = 0;
    while r % p == 0 {
        r /= p;
        f += 1;
    }
    (r == 1 && is_prime(p)).then_some((p, f))
}

fn to_nonneg_int(x: &BigRational, what: &str) -> Result<u128> {
    if !x.is_integer() || x.is_negative() {
        return Err(Error::InvalidArgument(format!("{what} {x} is not a nonnegative integer")));
    }
    x.to_integer()
        .to_u128()
        .ok_or_else(|| Error::InvalidArgument(format!("{what} {x} overflows")))
}

/// Evaluates the printed formula for `group` at `q`.
pub fn finite_zeta(group: FiniteGroup, q: u64) -> Result<DegreeMultiset> {
    if prime_power(q).is_none() {
        return Err(Error::InvalidArgument(format!("{q} is not a prime power")));
    }
    let mut out = DegreeMultiset::new();
    for t in formula_terms(group, branch(group, q)?)? {
        let m = to_nonneg_int(&t.multiplicity.eval(q), "multiplicity")?;
        let d = to_nonneg_int(&t.degree.eval(q), "degree")?;
        out.insert(d, m);
    }
    Ok(out)
}

pub fn zeta_sl3_fq(q: u64) -> Result<DegreeMultiset> {
    finite_zeta(FiniteGroup::Sl3, q)
}

pub fn zeta_su3_fq(q: u64) -> Result<DegreeMultiset> {
    finite_zeta(FiniteGroup::Su3, q)
}

pub fn zeta_gl2_fq(q: u64) -> Result<DegreeMultiset> {
    finite_zeta(FiniteGroup::Gl2, q)
}

pub fn zeta_gu2_fq(q: u64) -> Result<DegreeMultiset> {
    finite_zeta(FiniteGroup::Gu2, q)
}

pub fn zeta_heisenberg_fq(q: u64) -> Result<DegreeMultiset> {
    finite_zeta(FiniteGroup::Heisenberg, q)
}

/// `|G|` at `q`.
pub fn group_order(group: FiniteGroup, q: u64) -> u128 {
    to_nonneg_int(&order_poly(group).eval(q), "order").expect("group orders are positive")
}

fn field_for(group: FiniteGroup, q: u64) -> Result<FqField> {
    let (p, f) =
        prime_power(q).ok_or_else(|| Error::InvalidArgument(format!("{q} is not a prime power")))?;
    let unsupported = || Error::Unsupported(format!("{group} over F_{q} needs a larger field"));
    match group {
        FiniteGroup::Su3 | FiniteGroup::Gu2 => {
            if f != 1 {
                return Err(unsupported());
            }
            FqField::new(p, 2)
        }
        _ => {
            if f > 2 {
                return Err(unsupported());
            }
            FqField::new(p, f)
        }
    }
}

/// Every element of the group, as `3 x 3` matrices (`2 x 2` groups sit in the upper-left
/// block).
pub fn finite_group_elements(group: FiniteGroup, q: u64, budget: u128) -> Result<Vec<Mat3>> {
    let order = group_order(group, q);
    if order > budget {
        return Err(Error::BudgetExceeded {
            required: order,
            budget,
        });
    }
    let k = field_for(group, q)?;
    let n = k.q() as usize;
    let mut out = Vec::new();
    match group {
        FiniteGroup::Sl3 => return group_elements(&k, MatrixGroup::Sl3, budget.max(1 << 26)),
        FiniteGroup::Su3 => return group_elements(&k, MatrixGroup::Su3, budget.max(1 << 26)),
        FiniteGroup::Heisenberg => {
            for i in 0..n * n * n {
                let mut m = crate::orbitclass::identity(&k);
                m[0][1] = k.from_index(i % n);
                m[1][2] = k.from_index(i / n % n);
                m[0][2] = k.from_index(i / (n * n));
                out.push(m);
            }
        }
        FiniteGroup::Gl2 | FiniteGroup::Gu2 => {
            let total = (n as u128).pow(4);
            if total > budget {
                return Err(Error::BudgetExceeded {
                    required: total,
                    budget,
                });
            }
            for i in 0..n.pow(4) {
                let e = |j: u32| k.from_index(i / n.pow(j) % n);
                let mut m = zero_mat(&k);
                m[0][0] = e(0);
                m[0][1] = e(1);
                m[1][0] = e(2);
                m[1][1] = e(3);
                m[2][2] = k.one();
                let keep = if group == FiniteGroup::Gl2 {
                    let det = k.sub(k.mul(m[0][0], m[1][1]), k.mul(m[0][1], m[1][0]));
                    !k.is_zero(det)
                } else {
                    let mc = crate::orbitclass::conj_transpose(&k, &m);
                    mat_mul(&k, &mc, &m) == crate::orbitclass::identity(&k)
                };
                if keep {
                    out.push(m);
                }
            }
        }
    }
    Ok(out)
}

/// Seed for the random generating sets used by [`class_number_bruteforce`].
pub const BRUTEFORCE_SEED: u64 = 0x5eed;

/// Number of conjugacy classes, by orbit closure under a generating set.
///
/// Generators are drawn with a fixed seed and accepted once they generate the whole
/// group.
pub fn class_number_bruteforce(group: FiniteGroup, q: u64, budget: u128) -> Result<u128> {
    let elements = finite_group_elements(group, q, budget)?;
    let expected = group_order(group, q);
    if elements.len() as u128 != expected {
        return Err(Error::InvalidArgument(format!(
            "enumerated {} elements, expected {expected}",
            elements.len()
        )));
    }
    let k = field_for(group, q)?;
    let index: HashMap<Mat3, u32> = elements
        .iter()
        .enumerate()
        .map(|(i, m)| (*m, i as u32))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(BRUTEFORCE_SEED);
    let mut gens: Vec<Mat3> = Vec::new();
    while generated_size(&k, &elements, &index, &gens) < elements.len() {
        gens.push(*elements.choose(&mut rng).expect("groups are nonempty"));
    }
    let pairs: Vec<(Mat3, Mat3)> = gens
        .iter()
        .map(|g| (*g, mat_inv(&k, g).expect("group elements are invertible")))
        .collect();
    let mut seen = vec![false; elements.len()];
    let mut classes = 0u128;
    let mut queue = VecDeque::new();
    for start in 0..elements.len() {
        if seen[start] {
            continue;
        }
        classes += 1;
        seen[start] = true;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            for (g, gi) in &pairs {
                let y = mat_mul(&k, &mat_mul(&k, g, &elements[i]), gi);
                let j = index[&y] as usize;
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    Ok(classes)
}

fn generated_size(k: &FqField, elements: &[Mat3], index: &HashMap<Mat3, u32>, gens: &[Mat3]) -> usize {
    let id = crate::orbitclass::identity(k);
    let mut seen = vec![false; elements.len()];
    let mut queue = VecDeque::from([index[&id] as usize]);
    seen[queue[0]] = true;
    let mut size = 1;
    while let Some(i) = queue.pop_front() {
        for g in gens {
            let j = index[&mat_mul(k, &elements[i], g)] as usize;
            if !seen[j] {
                seen[j] = true;
                size += 1;
                queue.push_back(j);
            }
        }
    }
    size
}

/// Serializable summary of a finite zeta function and its checks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteZetaReport {
    pub group: FiniteGroup,
    pub q: u64,
    pub degrees: Vec<DegreeEntry>,
    pub checks: FiniteZetaChecks,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeEntry {
    pub d: u128,
    pub m: u128,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteZetaChecks {
    pub sum_md2: u128,
    pub order: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classes_bruteforce: Option<u128>,
}

/// Evaluates the formula and runs the checks; the brute-force count only when asked.
pub fn finite_zeta_report(
    group: FiniteGroup,
    q: u64,
    bruteforce_budget: Option<u128>,
) -> Result<FiniteZetaReport> {
    let z = finite_zeta(group, q)?;
    let classes_bruteforce = match bruteforce_budget {
        Some(b) => Some(class_number_bruteforce(group, q, b)?),
        None => None,
    };
    Ok(FiniteZetaReport {
        group,
        q,
        degrees: z.iter().map(|(d, m)| DegreeEntry { d, m }).collect(),
        checks: FiniteZetaChecks {
            sum_md2: z.sum_md2(),
            order: group_order(group, q),
            classes_bruteforce,
        },
    })
}
