//! Profile censuses `N_{n,a}`, zeta coefficients, radical indices and sampled censuses.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eldiv::{DivisorProfile, ProfileKernel};
use crate::error::{Error, Result};
use crate::lattice::{make_sl3, make_su3, permissible, CommutatorMatrix, LieLattice};
use crate::ratfun::{closed_form, Variant};
use crate::modring::{checked_pow, ResidueRing};

/// Default cap on the number of profile computations in one exhaustive census.
pub const DEFAULT_BUDGET: u128 = 1 << 32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CensusMode {
    Exact,
    Sampled { samples: u64, seed: u64 },
}

/// Counts of primitive classes per level and profile.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileCensus {
    pub lattice: String,
    pub p: u64,
    pub d: usize,
    pub levels: BTreeMap<u32, BTreeMap<DivisorProfile, u128>>,
    pub mode: CensusMode,
    pub wall_time: f64,
}

#[derive(Serialize, Deserialize)]
struct ProfileJson {
    a: Vec<u32>,
    count: u128,
}

#[derive(Serialize, Deserialize)]
struct LevelJson {
    n: u32,
    profiles: Vec<ProfileJson>,
}

#[derive(Serialize, Deserialize)]
struct MetaJson {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    samples: Option<u64>,
    wall_time: f64,
}

#[derive(Serialize, Deserialize)]
struct CensusJson {
    lattice: String,
    p: u64,
    d: usize,
    exact: bool,
    levels: Vec<LevelJson>,
    meta: MetaJson,
}

impl ProfileCensus {
    pub fn is_exact(&self) -> bool {
        self.mode == CensusMode::Exact
    }

    pub fn n_max(&self) -> u32 {
        self.levels.keys().next_back().copied().unwrap_or(0)
    }

    pub fn q(&self) -> u64 {
        self.p
    }

    pub fn count(&self, n: u32, a: &[u32]) -> u128 {
        self.levels
            .get(&n)
            .and_then(|lv| lv.iter().find(|(k, _)| k.a == a).map(|(_, &c)| c))
            .unwrap_or(0)
    }

    pub fn total(&self, n: u32) -> u128 {
        self.levels.get(&n).map_or(0, |lv| lv.values().sum())
    }

    /// Classes at level `n` whose commutator matrix has fewer than `rho` unit elementary
    /// divisors, i.e. rank below `2 rho` modulo `p`.
    pub fn irregular_count(&self, n: u32, rho: usize) -> u128 {
        self.levels.get(&n).map_or(0, |lv| {
            lv.iter()
                .filter(|(a, _)| a.a.iter().filter(|&&x| x == 0).count() < rho)
                .map(|(_, &c)| c)
                .sum()
        })
    }

    /// Truncates level `from` entrywise at `to` and divides by `q^(d (from - to))`.
    pub fn project(&self, from: u32, to: u32) -> Result<BTreeMap<DivisorProfile, u128>> {
        let lv = self
            .levels
            .get(&from)
            .ok_or_else(|| Error::IncompleteCensus(format!("level {from} missing")))?;
        let mut acc: BTreeMap<DivisorProfile, u128> = BTreeMap::new();
        for (a, &c) in lv {
            *acc.entry(a.truncate(to)).or_default() += c;
        }
        let fibre = checked_pow(self.p, self.d as u32 * (from - to))
            .ok_or_else(|| Error::InvalidArgument("fibre size overflows".into()))?
            as u128;
        acc.into_iter()
            .map(|(a, c)| {
                if c % fibre != 0 {
                    Err(Error::InvalidArgument(format!(
                        "count {c} at {a} not divisible by fibre size {fibre}"
                    )))
                } else {
                    Ok((a, c / fibre))
                }
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (seed, samples) = match self.mode {
            CensusMode::Exact => (None, None),
            CensusMode::Sampled { samples, seed } => (Some(seed), Some(samples)),
        };
        let j = CensusJson {
            lattice: self.lattice.clone(),
            p: self.p,
            d: self.d,
            exact: self.is_exact(),
            levels: self
                .levels
                .iter()
                .map(|(&n, lv)| LevelJson {
                    n,
                    profiles: lv
                        .iter()
                        .map(|(a, &count)| ProfileJson {
                            a: a.a.clone(),
                            count,
                        })
                        .collect(),
                })
                .collect(),
            meta: MetaJson {
                seed,
                samples,
                wall_time: self.wall_time,
            },
        };
        serde_json::to_value(j).expect("census serialises")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: CensusJson = serde_json::from_value(v.clone())
            .map_err(|e| Error::InvalidArgument(format!("census JSON: {e}")))?;
        let mode = match (j.exact, j.meta.samples, j.meta.seed) {
            (true, _, _) => CensusMode::Exact,
            (false, Some(samples), Some(seed)) => CensusMode::Sampled { samples, seed },
            _ => {
                return Err(Error::InvalidArgument(
                    "sampled census without samples/seed".into(),
                ))
            }
        };
        let mut levels = BTreeMap::new();
        for lv in j.levels {
            let mut map = BTreeMap::new();
            for pr in lv.profiles {
                map.insert(DivisorProfile::new(lv.n, pr.a)?, pr.count);
            }
            levels.insert(lv.n, map);
        }
        Ok(ProfileCensus {
            lattice: j.lattice,
            p: j.p,
            d: j.d,
            levels,
            mode,
            wall_time: j.meta.wall_time,
        })
    }
}

/// `q^(d n) (1 - q^(-d))`, the number of primitive vectors at level `n`.
pub fn primitive_count(p: u64, d: usize, n: u32) -> Option<u128> {
    let all = (p as u128).checked_pow(d as u32 * n)?;
    Some(all - all / (p as u128).pow(d as u32))
}

/// Work estimate for exhaustive levels `1..=n_max`.
pub fn census_work(p: u64, d: usize, n_max: u32) -> Option<u128> {
    (1..=n_max).try_fold(0u128, |acc, n| {
        acc.checked_add((p as u128).checked_pow(d as u32 * n)?)
    })
}

#[inline]
fn is_primitive(y: &[u64], p: u64) -> bool {
    y.iter().any(|&x| x % p != 0)
}

/// Visits every primitive vector of `(Z/p^n)^d` in lexicographic order within blocks that
/// fix the first two coordinates; blocks run in parallel and their states are merged.
pub fn scan_primitive<T, Init, Visit, Merge>(
    d: usize,
    p: u64,
    n: u32,
    init: Init,
    visit: Visit,
    merge: Merge,
) -> Result<T>
where
    T: Send,
    Init: Fn() -> T + Sync + Send,
    Visit: Fn(&mut T, &[u64]) + Sync + Send,
    Merge: Fn(T, T) -> T + Sync + Send,
{
    let ring = ResidueRing::new(p, n)?;
    let m = ring.modulus();
    let lead = d.min(2);
    let blocks = m.pow(lead as u32);
    let state = (0..blocks)
        .into_par_iter()
        .fold(&init, |mut st, b| {
            let mut y = vec![0u64; d];
            let mut bb = b;
            for k in (0..lead).rev() {
                y[k] = bb % m;
                bb /= m;
            }
            let lead_unit = y[..lead].iter().any(|&x| x % p != 0);
            loop {
                if lead_unit || is_primitive(&y[lead..], p) {
                    visit(&mut st, &y);
                }
                // odometer over the trailing coordinates
                let mut k = d;
                loop {
                    if k == lead {
                        return st;
                    }
                    k -= 1;
                    y[k] += 1;
                    if y[k] < m {
                        break;
                    }
                    y[k] = 0;
                }
            }
        })
        .reduce(&init, &merge);
    Ok(state)
}

fn tally_level(r: &CommutatorMatrix, p: u64, n: u32) -> Result<BTreeMap<DivisorProfile, u128>> {
    let ring = ResidueRing::new(p, n)?;
    let kernel = ProfileKernel::new(ring);
    let d = r.d();
    let half = d / 2;
    let slots = (n as usize + 1).pow(half as u32);
    let counts = scan_primitive(
        d,
        p,
        n,
        || (vec![0u64; slots], vec![0u64; d * d], vec![0u32; half]),
        |(tally, scratch, out), y| {
            r.fill_mod(y, &ring, scratch);
            kernel.profile_into(scratch, d, out);
            let code = out.iter().fold(0usize, |acc, &x| acc * (n as usize + 1) + x as usize);
            tally[code] += 1;
        },
        |mut a, b| {
            for (x, y) in a.0.iter_mut().zip(&b.0) {
                *x += y;
            }
            a
        },
    )?
    .0;
    Ok(counts
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(code, c)| (DivisorProfile::decode(n, half, code), c as u128))
        .collect())
}

/// Exhaustive census of levels `1..=n_max`, refusing when the work exceeds `budget`.
pub fn enumerate_counts(
    l: &LieLattice,
    p: u64,
    n_max: u32,
    budget: u128,
) -> Result<ProfileCensus> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be >= 1".into()));
    }
    let required = census_work(p, l.d(), n_max).unwrap_or(u128::MAX);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let start = Instant::now();
    let r = l.commutator_matrix();
    let mut levels = BTreeMap::new();
    for n in 1..=n_max {
        levels.insert(n, tally_level(&r, p, n)?);
    }
    Ok(ProfileCensus {
        lattice: l.name().to_string(),
        p,
        d: l.d(),
        levels,
        mode: CensusMode::Exact,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Coefficients `r_k` of `zeta_{G^m}` at degrees `q^k`, `k = 0..=k_max`, from an exact census.
///
/// A level-`n` class of an A2 lattice has weight at least `2n`, so levels `<= n_max` determine
/// every `r_k` with `k <= 2 n_max + 1`.
pub fn zeta_coeffs(census: &ProfileCensus, m: u32, k_max: u32) -> Result<Vec<(u32, BigRational)>> {
    if !census.is_exact() {
        return Err(Error::IncompleteCensus("census is sampled".into()));
    }
    let n_max = census.n_max();
    if (1..=n_max).any(|n| !census.levels.contains_key(&n)) {
        return Err(Error::IncompleteCensus("missing levels".into()));
    }
    if k_max > 2 * n_max + 1 {
        return Err(Error::IncompleteCensus(format!(
            "k_max = {k_max} needs levels up to {}, census has {n_max}",
            k_max.saturating_sub(1) / 2
        )));
    }
    let q = BigInt::from(census.p);
    let scale = BigRational::from_integer(num_traits::pow(q.clone(), census.d * m as usize));
    let mut sums = vec![BigRational::zero(); k_max as usize + 1];
    sums[0] = BigRational::one();
    for lv in census.levels.values() {
        for (a, &c) in lv {
            let k = a.weight();
            if k <= k_max {
                sums[k as usize] += BigRational::from_integer(BigInt::from(c));
            }
        }
    }
    Ok(sums
        .into_iter()
        .enumerate()
        .map(|(k, s)| {
            let denom = BigRational::from_integer(num_traits::pow(q.clone(), 2 * k));
            let v = if k == 0 { s } else { s / denom };
            (k as u32, v * scale.clone())
        })
        .collect())
}

/// One coefficient of the closed-form comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffCheck {
    pub k: u32,
    pub census: String,
    pub closed_form: String,
    pub pass: bool,
}

/// The lattice of the given A2 form over `Z_p`.
pub fn lattice_for(variant: Variant, p: u64) -> Result<LieLattice> {
    match variant {
        Variant::Sl3 => Ok(make_sl3()),
        Variant::Su3 => make_su3(p),
    }
}

/// Compares the census coefficients `r_0..=r_{k_max}` with the expansion of the closed form
/// `q^(8m) P(s+2)` at `q = p`, after checking that `m` is permissible.
pub fn verify_closed_form(
    census: &ProfileCensus,
    variant: Variant,
    m: u32,
    k_max: u32,
) -> Result<Vec<CoeffCheck>> {
    let p = census.p;
    if !permissible(1, p, m) {
        return Err(Error::NotPermissible { e: 1, p, m });
    }
    let ours = zeta_coeffs(census, m, k_max)?;
    let q = BigRational::from_integer(BigInt::from(p));
    let closed = closed_form(variant, m).series_in_t(&q, k_max as usize)?;
    Ok(ours
        .into_iter()
        .zip(closed)
        .map(|((k, a), b)| CoeffCheck {
            k,
            pass: a == b,
            census: a.to_string(),
            closed_form: b.to_string(),
        })
        .collect())
}

/// Valuations of the Smith normal form of a square matrix over `Z/p^n` (`n` for zero).
pub fn smith_valuations(ring: &ResidueRing, mut m: Vec<u64>, d: usize) -> Vec<u32> {
    let n = ring.n();
    let val = |x: u64| -> u32 {
        match ring.val(x) {
            crate::modring::Valuation::Finite(v) => v,
            crate::modring::Valuation::AtLeast(_) => n,
        }
    };
    let mut out = Vec::with_capacity(d);
    let mut rows: Vec<usize> = (0..d).collect();
    let mut cols: Vec<usize> = (0..d).collect();
    while !rows.is_empty() {
        let mut best = (n, 0, 0);
        for (ri, &r) in rows.iter().enumerate() {
            for (ci, &c) in cols.iter().enumerate() {
                let v = val(m[r * d + c]);
                if v < best.0 {
                    best = (v, ri, ci);
                }
            }
        }
        let (v, ri, ci) = best;
        if v >= n {
            out.extend(std::iter::repeat(n).take(rows.len()));
            break;
        }
        let (r, c) = (rows[ri], cols[ci]);
        let pv = ring.p().pow(v);
        let uinv = ring.inv(m[r * d + c] / pv).expect("unit");
        for &r2 in &rows {
            if r2 == r {
                continue;
            }
            let f = ring.mul(m[r2 * d + c] / pv, uinv);
            if f == 0 {
                continue;
            }
            for &c2 in &cols {
                let sub = ring.mul(f, m[r * d + c2]);
                m[r2 * d + c2] = ring.sub(m[r2 * d + c2], sub);
            }
        }
        // the pivot row still has entries; clearing its columns leaves the rest untouched
        out.push(v);
        rows.remove(ri);
        cols.remove(ci);
    }
    out.sort_unstable();
    out
}

/// `q^(dn) / |ker(z -> z R(w))|` over `Z/p^n`.
pub fn radical_index(l: &LieLattice, w: &[u64], p: u64, n: u32) -> Result<u128> {
    let ring = ResidueRing::new(p, n)?;
    if w.len() != l.d() {
        return Err(Error::DimensionMismatch {
            expected: l.d(),
            got: w.len(),
        });
    }
    if !is_primitive(w, p) {
        return Err(Error::NotPrimitive);
    }
    let reduced: Vec<u64> = w.iter().map(|&x| x % ring.modulus()).collect();
    let r = l.commutator_matrix().evaluate_mod(&reduced, &ring)?;
    let vals = smith_valuations(&ring, r.data, l.d());
    let exp: u32 = vals.iter().map(|&v| n - v.min(n)).sum();
    Ok((p as u128).pow(exp))
}

/// Census of `samples` i.i.d. uniform primitive vectors at level `n`.
pub fn montecarlo_profiles(
    l: &LieLattice,
    p: u64,
    n: u32,
    samples: u64,
    seed: u64,
) -> Result<ProfileCensus> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be >= 1".into()));
    }
    let start = Instant::now();
    let ring = ResidueRing::new(p, n)?;
    let kernel = ProfileKernel::new(ring);
    let r = l.commutator_matrix();
    let d = l.d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally: BTreeMap<DivisorProfile, u128> = BTreeMap::new();
    let (mut y, mut scratch, mut out) = (vec![0u64; d], vec![0u64; d * d], vec![0u32; d / 2]);
    for _ in 0..samples {
        loop {
            for x in y.iter_mut() {
                *x = rng.gen_range(0..ring.modulus());
            }
            if is_primitive(&y, p) {
                break;
            }
        }
        r.fill_mod(&y, &ring, &mut scratch);
        kernel.profile_into(&mut scratch, d, &mut out);
        *tally
            .entry(DivisorProfile {
                n,
                a: out.clone(),
            })
            .or_default() += 1;
    }
    Ok(ProfileCensus {
        lattice: l.name().to_string(),
        p,
        d,
        levels: BTreeMap::from([(n, tally)]),
        mode: CensusMode::Sampled { samples, seed },
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Frequency of a profile in a sampled level with its standard error `sqrt(f(1-f)/N)`.
pub fn frequency(census: &ProfileCensus, n: u32, a: &[u32]) -> (f64, f64) {
    let total = census.total(n) as f64;
    if total == 0.0 {
        return (0.0, 0.0);
    }
    let f = census.count(n, a) as f64 / total;
    (f, (f * (1.0 - f) / total).sqrt())
}
