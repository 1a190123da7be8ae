//! `a2zeta`: censuses, closed-form verification, orbit tables, finite zeta functions and
//! Dirichlet-series estimates from the command line.
//!
//! Exit codes: 0 when every check passes, 1 on a failed check, 2 on usage or budget errors.

mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use a2zeta::dirichlet::{
    euler_product, psi_eval, psi_sum_over_primes, slope_estimate, decade_grid, Form, PsiTag,
    ABSCISSA_TOLERANCE,
};
use a2zeta::finitezeta::{finite_zeta_report, FiniteGroup, BRUTEFORCE_SEED};
use a2zeta::lattice::permissible;
use a2zeta::modring::is_prime;
use a2zeta::orbitclass::{self, table, DEFAULT_ORBIT_BUDGET};
use a2zeta::padicint::link_report;
use a2zeta::poincare::{
    enumerate_counts, lattice_for, verify_closed_form, ProfileCensus, DEFAULT_BUDGET,
};
use a2zeta::ratfun::{satisfies_funeq, closed_form, LaurentQT, RatFunQT, Variant};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use manifest::{RunManifest, Sink};

#[derive(Parser, Debug)]
#[command(name = "a2zeta", version, about = "Representation zeta functions of SL3 and SU3 congruence subgroups")]
struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, alias = "parallel")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exhaustive census of elementary-divisor profiles.
    Enumerate(EnumerateArgs),
    /// Compare census coefficients with the closed form.
    Verify(VerifyArgs),
    /// Orbit and centraliser table of the adjoint action over F_q.
    Orbits(OrbitsArgs),
    /// Character degrees of a finite group of Lie type.
    FiniteZeta(FiniteZetaArgs),
    /// Abscissa estimate of an Euler product of finite zeta functions.
    Euler(EulerArgs),
    /// Prime sums of a psi approximant.
    Psi(PsiArgs),
    /// Functional equation of the closed form under q -> 1/q.
    Funeq(FuneqArgs),
    /// Poincare series against the p-adic integral, truncated.
    Link(LinkArgs),
}

#[derive(Args, Debug, Serialize)]
struct EnumerateArgs {
    #[arg(long)]
    algebra: Variant,
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    levels: u32,
    /// Permit p = 3 (exploratory; no closed form applies).
    #[arg(long)]
    allow_char3: bool,
    /// Maximum number of profile computations.
    #[arg(long, env = "A2ZETA_BUDGET")]
    budget: Option<u128>,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long)]
    algebra: Variant,
    #[arg(long)]
    p: u64,
    #[arg(long)]
    m: u32,
    #[arg(long)]
    kmax: u32,
    /// Census JSON from `enumerate`; computed on the fly when absent.
    #[arg(long)]
    census: Option<PathBuf>,
    #[arg(long, env = "A2ZETA_BUDGET")]
    budget: Option<u128>,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Emit {
    Json,
    Csv,
}

#[derive(Args, Debug, Serialize)]
struct OrbitsArgs {
    #[arg(long)]
    algebra: Variant,
    #[arg(long)]
    q: u64,
    #[arg(long, value_enum, default_value_t = Emit::Json)]
    emit: Emit,
    /// Also classify every element of the algebra and compare the counts.
    #[arg(long)]
    census: bool,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct FiniteZetaArgs {
    #[arg(long)]
    group: FiniteGroup,
    #[arg(long)]
    q: u64,
    /// Count conjugacy classes by brute force.
    #[arg(long)]
    bruteforce: bool,
    #[arg(long, default_value_t = 1 << 24)]
    budget: u128,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct EulerArgs {
    #[arg(long)]
    family: FiniteGroup,
    #[arg(long, default_value_t = 10_000)]
    primes_up_to: u64,
    #[arg(long, default_value_t = 100_000_000)]
    cap: u128,
    /// Values of s at which to evaluate the truncated product.
    #[arg(long, value_delimiter = ',')]
    s_grid: Vec<f64>,
    /// Expected abscissa; the run fails when the largest-N estimate is further away than
    /// the tolerance.
    #[arg(long)]
    expect: Option<f64>,
    #[arg(long, default_value_t = ABSCISSA_TOLERANCE)]
    tolerance: f64,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct PsiArgs {
    #[arg(long)]
    variant: Form,
    #[arg(long)]
    tag: PsiTag,
    #[arg(long)]
    s: f64,
    #[arg(long, default_value_t = 100_000)]
    primes_up_to: u64,
    /// Also evaluate the approximant at this prime power.
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct FuneqArgs {
    #[arg(long)]
    algebra: Variant,
    /// Negative control: perturb the numerator by one monomial.
    #[arg(long)]
    perturb: bool,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct LinkArgs {
    #[arg(long, default_value = "sl3")]
    algebra: Variant,
    #[arg(long)]
    p: u64,
    #[arg(long)]
    n_max: u32,
    /// Rational values of s.
    #[arg(long, value_delimiter = ',', default_value = "3,4,6")]
    s: Vec<String>,
    #[arg(long, env = "A2ZETA_BUDGET")]
    budget: Option<u128>,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<bool> {
    let start = Instant::now();
    let (mut manifest, sink, result, pass) = match command {
        Command::Enumerate(a) => enumerate(&a)?,
        Command::Verify(a) => verify(&a)?,
        Command::Orbits(a) => return orbits(&a, start),
        Command::FiniteZeta(a) => finite_zeta(&a)?,
        Command::Euler(a) => euler(&a)?,
        Command::Psi(a) => psi(&a)?,
        Command::Funeq(a) => funeq(&a)?,
        Command::Link(a) => link(&a)?,
    };
    manifest.wall_time = start.elapsed().as_secs_f64();
    sink.write_json(&manifest, result)?;
    Ok(pass)
}

type Output = (RunManifest, Sink, Value, bool);

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn check_p(p: u64, allow_char3: bool) -> Result<()> {
    if !is_prime(p) {
        bail!("p = {p} is not a prime");
    }
    if p == 3 && !allow_char3 {
        bail!("p = 3 unsupported");
    }
    Ok(())
}

fn enumerate(a: &EnumerateArgs) -> Result<Output> {
    check_p(a.p, a.allow_char3)?;
    let manifest = RunManifest::new("enumerate", a)?;
    let lattice = lattice_for(a.algebra, a.p)?;
    let census = enumerate_counts(&lattice, a.p, a.levels, a.budget.unwrap_or(DEFAULT_BUDGET))?;
    let rho = lattice.rho();
    let summary: Vec<Value> = census
        .levels
        .keys()
        .map(|&n| {
            json!({
                "n": n,
                "primitive": census.total(n).to_string(),
                "irregular": census.irregular_count(n, rho).to_string(),
            })
        })
        .collect();
    let mut result = json!({
        "algebra": a.algebra,
        "census": census.to_json(),
        "summary": summary,
    });
    if a.p == 3 {
        result["exploratory"] = json!("characteristic 3: no closed form applies");
    }
    Ok((manifest, Sink::new(a.out.clone()), result, true))
}

fn load_census(manifest: &mut RunManifest, path: &PathBuf) -> Result<ProfileCensus> {
    let bytes = manifest.read_input(path)?;
    let v: Value = serde_json::from_slice(&bytes).context("census file is not JSON")?;
    let inner = v.pointer("/result/census").unwrap_or(&v);
    Ok(ProfileCensus::from_json(inner)?)
}

fn verify(a: &VerifyArgs) -> Result<Output> {
    check_p(a.p, false)?;
    if !permissible(1, a.p, a.m) {
        bail!(
            "m = {} is not permissible at p = {}: need m > 1/(p-1), and m >= 2 for p = 2 resp. m >= 1/(p-2) for odd p",
            a.m,
            a.p
        );
    }
    let mut manifest = RunManifest::new("verify", a)?;
    let census = match &a.census {
        Some(path) => {
            let c = load_census(&mut manifest, path)?;
            if c.p != a.p {
                bail!("census is for p = {}, not {}", c.p, a.p);
            }
            c
        }
        None => {
            let levels = (a.kmax.saturating_sub(1)).div_ceil(2).max(1);
            let lattice = lattice_for(a.algebra, a.p)?;
            enumerate_counts(&lattice, a.p, levels, a.budget.unwrap_or(DEFAULT_BUDGET))?
        }
    };
    let checks = verify_closed_form(&census, a.algebra, a.m, a.kmax)?;
    for c in &checks {
        eprintln!(
            "k = {}: {} (census {}, closed form {})",
            c.k,
            verdict(c.pass),
            c.census,
            c.closed_form
        );
    }
    let pass = checks.iter().all(|c| c.pass);
    let result = json!({ "algebra": a.algebra, "p": a.p, "m": a.m, "checks": checks, "pass": pass });
    Ok((manifest, Sink::new(a.out.clone()), result, pass))
}

fn orbits(a: &OrbitsArgs, start: Instant) -> Result<bool> {
    let mut manifest = RunManifest::new("orbits", a)?;
    let rows = table(a.algebra, a.q);
    let counts = if a.census {
        Some(orbitclass::census(a.algebra, a.q, DEFAULT_ORBIT_BUDGET)?)
    } else {
        None
    };
    let pass = counts
        .as_ref()
        .is_none_or(|c| rows.iter().all(|r| c.count(r.tag) as u128 == r.total));
    if let Some(c) = &counts {
        for r in &rows {
            let got = c.count(r.tag) as u128;
            eprintln!("type {}: {} (census {got}, table {})", r.tag, verdict(got == r.total), r.total);
        }
    }
    manifest.wall_time = start.elapsed().as_secs_f64();
    let sink = Sink::new(a.out.clone());
    match a.emit {
        Emit::Json => {
            let mut result = json!({ "algebra": a.algebra, "q": a.q, "rows": rows });
            if let Some(c) = &counts {
                let by_type: serde_json::Map<String, Value> = rows
                    .iter()
                    .map(|r| (r.tag.to_string(), json!(c.count(r.tag))))
                    .collect();
                result["census"] = Value::Object(by_type);
                result["pass"] = json!(pass);
            }
            sink.write_json(&manifest, result)?;
        }
        Emit::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["type", "regularity", "orbits", "orbit_size", "total", "centraliser"];
            if counts.is_some() {
                header.push("census");
            }
            w.write_record(&header)?;
            for r in &rows {
                let regularity = serde_json::to_value(r.regularity)?;
                let mut rec = vec![
                    r.tag.to_string(),
                    regularity.as_str().unwrap_or_default().to_string(),
                    r.orbits.to_string(),
                    r.orbit_size.to_string(),
                    r.total.to_string(),
                    r.centraliser_order.to_string(),
                ];
                if let Some(c) = &counts {
                    rec.push(c.count(r.tag).to_string());
                }
                w.write_record(&rec)?;
            }
            sink.write_csv(&manifest, w.into_inner()?)?;
        }
    }
    Ok(pass)
}

fn finite_zeta(a: &FiniteZetaArgs) -> Result<Output> {
    let mut manifest = RunManifest::new("finite-zeta", a)?;
    if a.bruteforce {
        manifest.seeds.push(BRUTEFORCE_SEED);
    }
    let report = finite_zeta_report(a.group, a.q, a.bruteforce.then_some(a.budget))?;
    let classes: u128 = report.degrees.iter().map(|e| e.m).sum();
    let order_ok = report.checks.sum_md2 == report.checks.order;
    let classes_ok = report.checks.classes_bruteforce.is_none_or(|c| c == classes);
    eprintln!(
        "{} characters; sum m d^2 = {} vs |G| = {}: {}",
        classes,
        report.checks.sum_md2,
        report.checks.order,
        verdict(order_ok)
    );
    if let Some(c) = report.checks.classes_bruteforce {
        eprintln!("conjugacy classes {c} vs {classes}: {}", verdict(classes_ok));
    }
    let pass = order_ok && classes_ok;
    let result = json!({ "report": report, "characters": classes.to_string(), "pass": pass });
    Ok((manifest, Sink::new(a.out.clone()), result, pass))
}

fn euler(a: &EulerArgs) -> Result<Output> {
    if !matches!(a.family, FiniteGroup::Sl3 | FiniteGroup::Su3) {
        bail!("euler products are available for sl3 and su3");
    }
    let manifest = RunManifest::new("euler", a)?;
    let group = a.family;
    let (series, used) = euler_product(
        |p| a2zeta::finitezeta::finite_zeta(group, p).ok(),
        a.primes_up_to,
        a.cap,
    );
    let est = slope_estimate(&series, a.primes_up_to, used, &decade_grid(a.cap));
    let values: Vec<Value> = a
        .s_grid
        .iter()
        .map(|&s| json!({ "s": s, "truncated": series.eval(s) }))
        .collect();
    let pass = a
        .expect
        .is_none_or(|x| (est.largest_n - x).abs() <= a.tolerance);
    if let Some(x) = a.expect {
        eprintln!(
            "abscissa estimate {:.4} (extrapolated {:.4}) vs {x} +- {}: {}",
            est.largest_n,
            est.extrapolated,
            a.tolerance,
            verdict(pass)
        );
    }
    let result = json!({ "family": a.family, "estimate": est, "values": values, "pass": pass });
    Ok((manifest, Sink::new(a.out.clone()), result, pass))
}

fn psi(a: &PsiArgs) -> Result<Output> {
    let manifest = RunManifest::new("psi", a)?;
    let report = psi_sum_over_primes(a.tag, a.variant, a.s, a.primes_up_to);
    if report.expected_divergent {
        eprintln!(
            "s = {} is at or below the threshold {:.4}: expected divergent",
            a.s, report.threshold
        );
    }
    let mut result = json!({ "sum": report });
    if let Some(q) = a.q {
        result["value"] = json!(psi_eval(a.tag, a.variant, q as f64, a.s)?);
    }
    Ok((manifest, Sink::new(a.out.clone()), result, true))
}

fn funeq(a: &FuneqArgs) -> Result<Output> {
    let manifest = RunManifest::new("funeq", a)?;
    let mut f = closed_form(a.algebra, 0);
    if a.perturb {
        let num = f.numerator() + &LaurentQT::monomial(1, 1, 1);
        f = RatFunQT::new(num, f.denominator().clone())?;
    }
    let pass = satisfies_funeq(&f, 8);
    eprintln!("q->1/q identity: {}, factor q^8", verdict(pass));
    let result = json!({
        "algebra": a.algebra,
        "perturbed": a.perturb,
        "factor": "q^8",
        "closed_form": f.to_display_string(),
        "pass": pass,
    });
    Ok((manifest, Sink::new(a.out.clone()), result, pass))
}

fn link(a: &LinkArgs) -> Result<Output> {
    check_p(a.p, false)?;
    let manifest = RunManifest::new("link", a)?;
    let lattice = lattice_for(a.algebra, a.p)?;
    let census = enumerate_counts(&lattice, a.p, a.n_max, a.budget.unwrap_or(DEFAULT_BUDGET))?;
    let rho = lattice.rho();
    let mut reports = Vec::new();
    for s in &a.s {
        let s: BigRational = s.parse().with_context(|| format!("bad rational {s}"))?;
        let r = link_report(&census, &s, rho, a.n_max)?;
        eprintln!("s = {}: {}", r.s, verdict(r.equal));
        reports.push(r);
    }
    let pass = reports.iter().all(|r| r.equal);
    let result = json!({ "algebra": a.algebra, "reports": reports, "pass": pass });
    Ok((manifest, Sink::new(a.out.clone()), result, pass))
}
