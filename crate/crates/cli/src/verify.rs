use std::path::PathBuf;

use clap::{Args, ValueEnum};
use hyperdisc::barrier::{verify_bound_chain, BarrierInstance};
use hyperdisc::generate::{kls_det, kls_lorentz, random_sr_distribution, sr_ust, VarMix};
use hyperdisc::graph::Graph;
use hyperdisc::mixedchar::{ag_identity_sides, kls_identity_sides, KlsInstance, SrInstance};
use hyperdisc::srdist::SrDistribution;
use hyperdisc::{Error, Rational, Scalar, UniPoly};
use serde::Serialize;

use crate::instance::{self, Inst, View};
use crate::output::{self, num};
use crate::{Backend, CliError, Format, Global, Outcome};

/// Largest `n` for which every `S ⊆ [k]`, `k ≤ n`, is checked.
const MAX_MARGINAL_N: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Suite {
    Identities,
    Barrier,
    Marginals,
    All,
}

#[derive(Clone, Debug, Args)]
pub struct VerifyArgs {
    /// Instance file; the built-in fixtures are used when absent.
    pub file: Option<PathBuf>,
    /// Suites to run (repeatable or comma-separated). Defaults to `all` for a file.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub suite: Vec<Suite>,
    /// Scale a kls file instance to `σ = 1` before the barrier suite.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub pass: bool,
    /// Positive when the invariant holds with room to spare.
    pub margin: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub passed: bool,
    pub checks: usize,
    pub failures: usize,
    pub results: Vec<Check>,
}

fn poly_gap<T: Scalar>(a: &UniPoly<T>, b: &UniPoly<T>) -> f64 {
    let len = a.coeffs().len().max(b.coeffs().len());
    (0..len).map(|i| (a.coeff(i) - b.coeff(i)).to_f64().abs()).fold(0.0, f64::max)
}

fn identity_check<T: Scalar>(name: &str, sides: hyperdisc::Result<(UniPoly<T>, UniPoly<T>)>) -> Check {
    match sides {
        Ok((l, r)) => {
            let pass = if T::EXACT { l == r } else { l.approx_eq(&r, 1e-9) };
            let gap = poly_gap(&l, &r);
            Check { suite: "identities", name: name.into(), pass, margin: Some(0.0 - gap), detail: format!("degree {}", l.degree()) }
        }
        Err(e) => Check { suite: "identities", name: name.into(), pass: false, margin: None, detail: e.to_string() },
    }
}

fn kls_identity<T: Scalar>(name: &str, k: &KlsInstance<T>, backend: Backend) -> Check {
    match backend {
        Backend::Float if T::EXACT => identity_check(name, k.convert::<f64>().and_then(|f| kls_identity_sides(&f))),
        _ => identity_check(name, kls_identity_sides(k)),
    }
}

fn sr_identity<T: Scalar>(name: &str, s: &SrInstance<T>, backend: Backend) -> Check {
    match backend {
        Backend::Float if T::EXACT => identity_check(name, s.convert::<f64>().and_then(|f| ag_identity_sides(&f))),
        _ => identity_check(name, ag_identity_sides(s)),
    }
}

fn barrier_checks(name: &str, inst: hyperdisc::Result<BarrierInstance<'_>>) -> Vec<Check> {
    let fail = |step: &str, detail: String| Check {
        suite: "barrier",
        name: format!("{name}/{step}"),
        pass: false,
        margin: None,
        detail,
    };
    let report = match inst.and_then(verify_bound_chain) {
        Ok(r) => r,
        Err(Error::ChainViolated { step, detail }) => return vec![fail(&step, format!("chain violated: {detail}"))],
        Err(e) => return vec![fail("error", e.to_string())],
    };
    report
        .steps
        .into_iter()
        .map(|s| Check {
            suite: "barrier",
            name: format!("{name}/{}", s.step),
            pass: s.pass,
            margin: Some(s.margin),
            detail: format!("{} vs {}", num(s.quantity), num(s.bound)),
        })
        .collect()
}

fn kls_barrier<T: Scalar>(name: &str, k: &KlsInstance<T>, normalize: bool) -> Vec<Check> {
    let f = if normalize { k.normalized() } else { k.convert::<f64>() };
    match f {
        Ok(f) => barrier_checks(name, Ok(BarrierInstance::Kls(&f))),
        Err(e) => barrier_checks(name, Err(e)),
    }
}

fn sr_barrier<T: Scalar>(name: &str, s: &SrInstance<T>) -> Vec<Check> {
    match s.convert::<f64>() {
        Ok(f) => barrier_checks(name, Ok(BarrierInstance::Ag(&f))),
        Err(e) => barrier_checks(name, Err(e)),
    }
}

fn marginal_gap<T: Scalar>(mu: &SrDistribution<T>) -> hyperdisc::Result<(usize, f64, bool)> {
    let n = mu.n();
    if n > MAX_MARGINAL_N {
        return Err(Error::TooLarge { count: 1u128 << (n + 1), limit: 1u128 << (MAX_MARGINAL_N + 1) });
    }
    let x0s = [T::from_i64(1), T::from_i64(2), T::from_i64(-1), T::from_ratio(1, 2)];
    let (mut count, mut gap, mut ok) = (0usize, 0.0f64, true);
    for k in 0..=n {
        for mask in 0u64..1 << k {
            let s: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
            let direct = mu.marginal_via_enum(&s, k);
            for x0 in &x0s {
                let via = mu.marginal_via_formula(&s, k, x0)?;
                let d = (via.clone() - direct.clone()).to_f64().abs();
                gap = gap.max(d);
                ok &= if T::EXACT { via == direct } else { d <= 1e-9 * direct.to_f64().abs().max(1.0) };
                count += 1;
            }
        }
    }
    Ok((count, gap, ok))
}

fn marginal_check<T: Scalar>(name: &str, mu: &SrDistribution<T>, backend: Backend) -> Check {
    let res = match backend {
        Backend::Float if T::EXACT => marginal_gap(&mu.convert::<f64>()),
        _ => marginal_gap(mu),
    };
    match res {
        Ok((count, gap, pass)) => Check {
            suite: "marginals",
            name: name.into(),
            pass,
            margin: Some(0.0 - gap),
            detail: format!("{count} comparisons"),
        },
        Err(e) => Check { suite: "marginals", name: name.into(), pass: false, margin: None, detail: e.to_string() },
    }
}

struct Fixtures {
    kls: Vec<(String, KlsInstance<Rational>)>,
    sr: Vec<(String, SrInstance<Rational>)>,
    dists: Vec<(String, SrDistribution<Rational>)>,
}

fn fixtures(seed: u64) -> Result<Fixtures, CliError> {
    let mut kls = Vec::new();
    for i in 0..4 {
        kls.push((format!("kls-det#{i}"), kls_det(3, 2, VarMix::Mixed, seed + i)?));
    }
    for i in 0..2 {
        kls.push((format!("kls-lorentz#{i}"), kls_lorentz(3, 3, VarMix::Mixed, seed + i)?));
    }
    let mut sr = Vec::new();
    for name in ["k3", "k4", "diamond"] {
        sr.push((format!("sr-ust({name})"), sr_ust(&Graph::by_name(name)?)?));
    }
    let mut dists: Vec<_> = sr.iter().map(|(n, s)| (n.clone(), s.mu().clone())).collect();
    for i in 0..4 {
        dists.push((format!("random-sr#{i}"), random_sr_distribution(seed + i)?));
    }
    Ok(Fixtures { kls, sr, dists })
}

fn expand(suites: &[Suite]) -> Vec<Suite> {
    let mut out: Vec<Suite> = if suites.contains(&Suite::All) {
        vec![Suite::Identities, Suite::Barrier, Suite::Marginals]
    } else {
        suites.to_vec()
    };
    out.sort();
    out.dedup();
    out
}

fn file_checks<T: Scalar>(name: &str, inst: &Inst<T>, suites: &[Suite], normalize: bool, backend: Backend, results: &mut Vec<Check>) {
    for suite in suites {
        match (suite, inst) {
            (Suite::Identities, Inst::Kls(k)) => results.push(kls_identity(name, k, backend)),
            (Suite::Identities, Inst::Sr { inst, .. }) => results.push(sr_identity(name, inst, backend)),
            (Suite::Barrier, Inst::Kls(k)) => results.extend(kls_barrier(name, k, normalize)),
            (Suite::Barrier, Inst::Sr { inst, .. }) => results.extend(sr_barrier(name, inst)),
            (Suite::Marginals, Inst::Sr { inst, .. }) => results.push(marginal_check(name, inst.mu(), backend)),
            (Suite::Marginals, Inst::Kls(_)) => {}
            (Suite::All, _) => unreachable!("expanded"),
        }
    }
}

pub fn run(a: &VerifyArgs, g: &Global) -> Result<Outcome, CliError> {
    let suites = match (&a.file, a.suite.is_empty()) {
        (None, true) => return Err(CliError::Usage("select at least one --suite (identities, barrier, marginals, all) or pass a file".into())),
        (Some(_), true) => expand(&[Suite::All]),
        _ => expand(&a.suite),
    };
    let mut results = Vec::new();
    match &a.file {
        Some(path) => {
            let inst = instance::load(path)?;
            let name = path.file_name().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned());
            match inst.view(g.backend)? {
                View::Exact(i) => file_checks(&name, i, &suites, a.normalize, g.backend, &mut results),
                View::Float(i) => file_checks(&name, &*i, &suites, a.normalize, g.backend, &mut results),
            }
        }
        None => {
            let fx = fixtures(g.seed)?;
            for suite in suites {
                match suite {
                    Suite::Identities => {
                        results.extend(fx.kls.iter().map(|(n, k)| kls_identity(n, k, g.backend)));
                        results.extend(fx.sr.iter().map(|(n, s)| sr_identity(n, s, g.backend)));
                    }
                    Suite::Barrier => {
                        for (n, k) in &fx.kls {
                            results.extend(kls_barrier(n, k, true));
                        }
                        for (n, s) in &fx.sr {
                            results.extend(sr_barrier(n, s));
                        }
                    }
                    Suite::Marginals => results.extend(fx.dists.iter().map(|(n, d)| marginal_check(n, d, g.backend))),
                    Suite::All => unreachable!("expanded"),
                }
            }
        }
    }
    let failures = results.iter().filter(|c| !c.pass).count();
    let report = Report { passed: failures == 0, checks: results.len(), failures, results };
    let text = match g.format {
        Format::Json => output::json(&report)?,
        Format::Csv => output::csv(
            &["suite", "name", "pass", "margin", "detail"],
            &report
                .results
                .iter()
                .map(|c| {
                    vec![c.suite.into(), c.name.clone(), c.pass.to_string(), c.margin.map_or(String::new(), num), c.detail.clone()]
                })
                .collect::<Vec<_>>(),
        )?,
    };
    Ok(Outcome { text, code: if report.passed { 0 } else { 1 } })
}
